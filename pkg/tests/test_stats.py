"""Wilson score interval sanity checks."""

from heraldtpc.stats import wilson_interval


def test_known_value():
    lo, hi = wilson_interval(5, 100)
    assert 0.016 < lo < 0.022
    assert 0.10 < hi < 0.115
    assert lo < 0.05 < hi


def test_extremes_clamped():
    lo, hi = wilson_interval(0, 50)
    assert lo == 0.0 and 0 < hi < 0.1
    lo, hi = wilson_interval(50, 50)
    assert 0.9 < lo < 1.0 and hi == 1.0


def test_empty_sample_is_vacuous():
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_interval_shrinks_with_n():
    w1 = wilson_interval(10, 100)
    w2 = wilson_interval(100, 1000)
    assert (w2[1] - w2[0]) < (w1[1] - w1[0])

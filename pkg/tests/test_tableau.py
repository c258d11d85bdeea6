"""Stabilizer tableau vs a dense state-vector oracle on up to 4 qubits."""

import numpy as np
import pytest

from heraldtpc.pauli import PauliOperator
from heraldtpc.tableau import StabilizerTableau, UnsupportedGateError

_I = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_GATES_1Q = {"X": _X, "Y": _Y, "Z": _Z, "H": _H, "S": _S, "SDG": _S.conj()}


class DenseState:
    """Brute-force simulator used only as a test oracle (n <= 4)."""

    def __init__(self, n):
        self.n = n
        self.v = np.zeros(2**n, dtype=complex)
        self.v[0] = 1.0
        for q in range(n):
            self.apply_1q(_H, q)

    def _embed(self, mat, qubits):
        ops = [_I] * self.n
        full = np.array([[1.0]], dtype=complex)
        if len(qubits) == 1:
            ops[qubits[0]] = mat
            for op in ops:
                full = np.kron(full, op)
            return full
        # two-qubit gate: build by explicit index arithmetic
        full = np.zeros((2**self.n, 2**self.n), dtype=complex)
        a, b = qubits
        for i in range(2**self.n):
            bi = (i >> (self.n - 1 - a)) & 1
            bj = (i >> (self.n - 1 - b)) & 1
            for bi2 in range(2):
                for bj2 in range(2):
                    j = i
                    j = (j & ~(1 << (self.n - 1 - a))) | (bi2 << (self.n - 1 - a))
                    j = (j & ~(1 << (self.n - 1 - b))) | (bj2 << (self.n - 1 - b))
                    full[j, i] += mat[bi2 * 2 + bj2, bi * 2 + bj]
        return full

    def apply_1q(self, mat, q):
        self.v = self._embed(mat, [q]) @ self.v

    def apply_2q(self, mat, a, b):
        self.v = self._embed(mat, [a, b]) @ self.v

    def apply_gate(self, name, qubits):
        if name in _GATES_1Q:
            self.apply_1q(_GATES_1Q[name], qubits[0])
        elif name == "CZ":
            self.apply_2q(np.diag([1, 1, 1, -1]).astype(complex), *qubits)
        elif name == "CNOT":
            m = np.zeros((4, 4), dtype=complex)
            m[0, 0] = m[1, 1] = m[3, 2] = m[2, 3] = 1
            self.apply_2q(m, *qubits)
        else:
            raise ValueError(name)

    def pauli_matrix(self, p: PauliOperator):
        mats = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}
        label = p.to_label()
        sign = {"": 1, "i": 1j, "-": -1, "-i": -1j}[
            label[: len(label) - p.n]
        ]
        full = np.array([[1.0]], dtype=complex)
        for c in label[len(label) - p.n :]:
            full = np.kron(full, mats[c])
        return sign * full

    def prob_plus_one(self, p: PauliOperator):
        proj = (np.eye(2**self.n) + self.pauli_matrix(p)) / 2
        return float(np.real(np.vdot(self.v, proj @ self.v)))


def random_circuit(rng, n, depth):
    ops = []
    names_1 = ["H", "S", "SDG", "X", "Z"]
    for _ in range(depth):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, size=2, replace=False)
            ops.append((rng.choice(["CZ", "CNOT"]), (int(a), int(b))))
        else:
            ops.append((str(rng.choice(names_1)), (int(rng.integers(n)),)))
    return ops


def random_pauli(rng, n):
    while True:
        x = rng.integers(0, 2, n).astype(bool)
        z = rng.integers(0, 2, n).astype(bool)
        if x.any() or z.any():
            n_y = int(np.count_nonzero(x & z))
            return PauliOperator(x, z, n_y % 4)  # Hermitian sign convention


def test_graph_state_stabilizers():
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    t = StabilizerTableau.graph_state(4, edges)
    for v in range(4):
        k = PauliOperator.single(4, v, "X")
        for a, b in edges:
            if v == a:
                k = k * PauliOperator.single(4, b, "Z")
            elif v == b:
                k = k * PauliOperator.single(4, a, "Z")
        assert t.contains(k)


def test_invariants_hold_through_random_circuits():
    rng = np.random.default_rng(3)
    for trial in range(30):
        n = int(rng.integers(1, 6))
        t = StabilizerTableau.plus_state(n)
        for name, qs in random_circuit(rng, n, 25):
            t.apply_gate(name, qs)
            t.validate()
        for _ in range(3):
            t.measure_pauli(random_pauli(rng, n), rng)
            t.validate()


def test_unsupported_gate_raises():
    t = StabilizerTableau.plus_state(2)
    with pytest.raises(UnsupportedGateError):
        t.apply_gate("T", (0,))


def test_measurement_distribution_matches_dense_oracle():
    rng = np.random.default_rng(7)
    shots = 10_000
    for trial in range(6):
        n = int(rng.integers(2, 5))
        circ = random_circuit(rng, n, 20)
        p = random_pauli(rng, n)
        dense = DenseState(n)
        for name, qs in circ:
            dense.apply_gate(name, qs)
        expected = dense.prob_plus_one(p)
        base = StabilizerTableau.plus_state(n)
        for name, qs in circ:
            base.apply_gate(name, qs)
        hits = 0
        for _ in range(shots):
            t = base.copy()
            if t.measure_pauli(p, rng) == +1:
                hits += 1
        observed = hits / shots
        sigma = max(np.sqrt(abs(expected * (1 - expected)) / shots), 1e-9)
        if expected < 1e-9 or expected > 1 - 1e-9:
            assert observed == round(expected)
        else:
            assert abs(observed - expected) < 3 * sigma + 1e-12


def test_deterministic_measurement_sign_tracking():
    rng = np.random.default_rng(11)
    t = StabilizerTableau.plus_state(2)
    t.apply_gate("CZ", (0, 1))
    t.apply_gate("H", (0,))
    t.apply_gate("H", (1,))
    # CZ then H on both maps |++> to a state stabilized by -YY
    p = PauliOperator.from_label("YY")
    dense = DenseState(2)
    for name, qs in [("CZ", (0, 1)), ("H", (0,)), ("H", (1,))]:
        dense.apply_gate(name, qs)
    expected = dense.prob_plus_one(p)
    outcome = t.measure_pauli(p, rng)
    assert expected < 1e-9 or expected > 1 - 1e-9
    assert outcome == (+1 if expected > 0.5 else -1)

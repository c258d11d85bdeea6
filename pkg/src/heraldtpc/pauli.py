"""Pauli strings in binary symplectic form.

A Pauli operator on n qubits is stored as two boolean vectors (x, z) plus a
phase exponent p, representing ``i^p * X^x * Z^z`` with X factors written to
the left of Z factors on each qubit.  Under this convention ``Y == i * X Z``,
so the product X*Z carries coefficient -i relative to Y.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_LABEL_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LABEL = {v: k for k, v in _LABEL_TO_BITS.items()}


class DimensionError(ValueError):
    """Raised when two Pauli operators act on different qubit counts."""


@dataclass
class PauliOperator:
    x: np.ndarray
    z: np.ndarray
    phase: int = 0  # power of i, mod 4

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=bool)
        self.z = np.asarray(self.z, dtype=bool)
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise DimensionError("x and z bit-vectors must be 1-d and equal length")
        self.phase = int(self.phase) % 4

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(np.zeros(n, bool), np.zeros(n, bool), 0)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliOperator":
        """Single-qubit Pauli ``kind`` ('X','Y','Z') embedded in n qubits."""
        p = cls.identity(n)
        xb, zb = _LABEL_TO_BITS[kind]
        p.x[qubit] = xb
        p.z[qubit] = zb
        if kind == "Y":
            p.phase = 1  # Y = i X Z
        return p

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """Build from a string like 'XIZY' (optionally prefixed +/-/i/-i)."""
        phase = 0
        if label.startswith("-i"):
            phase, label = 3, label[2:]
        elif label.startswith("i"):
            phase, label = 1, label[1:]
        elif label.startswith("-"):
            phase, label = 2, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        x = np.array([_LABEL_TO_BITS[c][0] for c in label], bool)
        z = np.array([_LABEL_TO_BITS[c][1] for c in label], bool)
        p = (phase + sum(c == "Y" for c in label)) % 4
        return cls(x, z, p)

    def to_label(self) -> str:
        """Canonical label using the I/X/Y/Z alphabet with a sign prefix."""
        n_y = int(np.count_nonzero(self.x & self.z))
        p = (self.phase - n_y) % 4
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[p]
        body = "".join(
            _BITS_TO_LABEL[(int(a), int(b))] for a, b in zip(self.x, self.z)
        )
        return prefix + body

    def copy(self) -> "PauliOperator":
        return PauliOperator(self.x.copy(), self.z.copy(), self.phase)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x | self.z)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def is_identity(self) -> bool:
        return self.weight() == 0 and self.phase == 0

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return pauli_multiply(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return (
            self.n == other.n
            and self.phase == other.phase
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )


def pauli_multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Product a*b with the phase tracked exactly mod 4.

    Reordering ``Z^{z_a} X^{x_b} -> X^{x_b} Z^{z_a}`` contributes (-1) per
    overlapping qubit, i.e. i^2 per overlap.
    """
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} != {b.n}")
    swaps = int(np.count_nonzero(a.z & b.x))
    phase = (a.phase + b.phase + 2 * swaps) % 4
    return PauliOperator(a.x ^ b.x, a.z ^ b.z, phase)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff the binary symplectic inner product of (a, b) is 0 mod 2."""
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} != {b.n}")
    sym = int(np.count_nonzero(a.x & b.z)) + int(np.count_nonzero(a.z & b.x))
    return sym % 2 == 0

"""Stabilizer tableau simulator with exact sign tracking.

Generators and destabilizers are kept as full Pauli rows; measurement of an
arbitrary Pauli follows the standard anticommuting-pivot update, which the
destabilizer rows make O(n^2).
"""

from __future__ import annotations

import numpy as np

from .pauli import DimensionError, PauliOperator, commutes, pauli_multiply


class UnsupportedGateError(ValueError):
    """Raised for gate names outside the supported Clifford set."""


_SINGLE_QUBIT_GATES = {"H", "S", "SDG", "X", "Y", "Z"}
_TWO_QUBIT_GATES = {"CZ", "CNOT"}


class StabilizerTableau:
    """n-qubit stabilizer state with destabilizer rows."""

    def __init__(self, n: int):
        self.n = n
        # start in |+>^n: stabilizers X_i, destabilizers Z_i
        self.stab = [PauliOperator.single(n, q, "X") for q in range(n)]
        self.destab = [PauliOperator.single(n, q, "Z") for q in range(n)]

    @classmethod
    def plus_state(cls, n: int) -> "StabilizerTableau":
        return cls(n)

    @classmethod
    def graph_state(cls, n: int, edges) -> "StabilizerTableau":
        t = cls(n)
        for a, b in edges:
            t.apply_gate("CZ", (a, b))
        return t

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.stab = [p.copy() for p in self.stab]
        t.destab = [p.copy() for p in self.destab]
        return t

    # -- gates ---------------------------------------------------------------

    def apply_gate(self, gate: str, qubits) -> "StabilizerTableau":
        gate = gate.upper()
        if isinstance(qubits, int):
            qubits = (qubits,)
        if gate in _SINGLE_QUBIT_GATES:
            (q,) = qubits
            self._check_index(q)
            for row in self.stab + self.destab:
                _conjugate_1q(row, gate, q)
        elif gate in _TWO_QUBIT_GATES:
            a, b = qubits
            self._check_index(a)
            self._check_index(b)
            for row in self.stab + self.destab:
                _conjugate_2q(row, gate, a, b)
        else:
            raise UnsupportedGateError(f"not a supported Clifford gate: {gate}")
        return self

    def apply_pauli(self, p: PauliOperator) -> None:
        """Apply a Pauli error to the state: anticommuting rows flip sign."""
        for row in self.stab + self.destab:
            if not commutes(row, p):
                row.phase = (row.phase + 2) % 4

    # -- measurement ---------------------------------------------------------

    def measure_pauli(self, p: PauliOperator, rng) -> int:
        """Measure Hermitian Pauli p; returns outcome +1 or -1.

        Deterministic (tableau unchanged) when +/-p lies in the stabilizer
        group; otherwise uniformly random with the standard update.
        """
        if p.n != self.n:
            raise DimensionError("operator size does not match tableau")
        n_y = int(np.count_nonzero(p.x & p.z))
        if (p.phase - n_y) % 2 != 0:
            raise ValueError("measured Pauli must be Hermitian")
        anti = [k for k in range(self.n) if not commutes(self.stab[k], p)]
        if anti:
            pivot = anti[0]
            r = int(rng.integers(2))
            pivot_row = self.stab[pivot]
            for k in anti[1:]:
                self.stab[k] = pauli_multiply(pivot_row, self.stab[k])
            for k in range(self.n):
                if k != pivot and not commutes(self.destab[k], p):
                    self.destab[k] = pauli_multiply(pivot_row, self.destab[k])
            self.destab[pivot] = pivot_row
            signed = p.copy()
            signed.phase = (signed.phase + 2 * r) % 4
            self.stab[pivot] = signed
            return -1 if r else +1
        # deterministic: accumulate stabilizers paired with anticommuting
        # destabilizers; the product equals +/- p
        acc = PauliOperator.identity(self.n)
        for k in range(self.n):
            if not commutes(self.destab[k], p):
                acc = pauli_multiply(acc, self.stab[k])
        if not (np.array_equal(acc.x, p.x) and np.array_equal(acc.z, p.z)):
            raise AssertionError("tableau inconsistency in deterministic branch")
        return +1 if acc.phase == p.phase else -1

    def contains(self, p: PauliOperator) -> bool:
        """True iff p (including its sign) is in the stabilizer group."""
        if any(not commutes(self.stab[k], p) for k in range(self.n)):
            return False
        acc = PauliOperator.identity(self.n)
        for k in range(self.n):
            if not commutes(self.destab[k], p):
                acc = pauli_multiply(acc, self.stab[k])
        return acc == p

    # -- invariants ----------------------------------------------------------

    def validate(self) -> None:
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if not commutes(self.stab[i], self.stab[j]):
                    raise AssertionError(f"generators {i},{j} anticommute")
        if self._symplectic_rank() != self.n:
            raise AssertionError("generators not independent over GF(2)")

    def _symplectic_rank(self) -> int:
        m = np.concatenate(
            [np.array([np.concatenate([r.x, r.z]) for r in self.stab], bool)]
        )
        m = m.copy()
        rank = 0
        rows, cols = m.shape
        for c in range(cols):
            piv = None
            for r in range(rank, rows):
                if m[r, c]:
                    piv = r
                    break
            if piv is None:
                continue
            m[[rank, piv]] = m[[piv, rank]]
            for r in range(rows):
                if r != rank and m[r, c]:
                    m[r] ^= m[rank]
            rank += 1
            if rank == rows:
                break
        return rank

    def _check_index(self, q: int) -> None:
        if not (0 <= q < self.n):
            raise IndexError(f"qubit index {q} out of range for n={self.n}")


def _conjugate_1q(row: PauliOperator, gate: str, q: int) -> None:
    x, z = bool(row.x[q]), bool(row.z[q])
    if gate == "H":
        if x and z:
            row.phase = (row.phase + 2) % 4
        row.x[q], row.z[q] = z, x
    elif gate == "S":
        if x:
            row.phase = (row.phase + 1) % 4
            row.z[q] = not z
    elif gate == "SDG":
        if x:
            row.phase = (row.phase + 3) % 4
            row.z[q] = not z
    elif gate == "X":
        if z:
            row.phase = (row.phase + 2) % 4
    elif gate == "Z":
        if x:
            row.phase = (row.phase + 2) % 4
    elif gate == "Y":
        if x != z:
            row.phase = (row.phase + 2) % 4


def _conjugate_2q(row: PauliOperator, gate: str, a: int, b: int) -> None:
    if gate == "CNOT":
        # in the i^p X^x Z^z convention the images X_a -> X_a X_b and
        # Z_b -> Z_a Z_b recombine without any sign (cross-qubit factors
        # commute and squared factors cancel cleanly)
        row.x[b] ^= row.x[a]
        row.z[a] ^= row.z[b]
    elif gate == "CZ":
        # CZ = H(b) CNOT(a,b) H(b)
        _conjugate_1q(row, "H", b)
        _conjugate_2q(row, "CNOT", a, b)
        _conjugate_1q(row, "H", b)


def apply_gate(t: StabilizerTableau, gate: str, qubits) -> StabilizerTableau:
    """Functional wrapper: returns a conjugated copy of the tableau."""
    return t.copy().apply_gate(gate, qubits)


def measure_pauli(t: StabilizerTableau, p: PauliOperator, rng):
    """Functional wrapper: returns (outcome, updated tableau copy)."""
    t2 = t.copy()
    outcome = t2.measure_pauli(p, rng)
    return outcome, t2

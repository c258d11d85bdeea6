"""Clifford circuits with heralded-recipe primitives and Pauli-frame tracking.

A circuit is an ordered op list.  Measurements record outcome bits into a
classical register; ``cfeedback`` ops apply outcome-conditioned corrections.
Two executors are provided: a full tableau run (used to verify recipes on
small instances) and an exact Pauli-frame fault propagator (used for error
audits, where only the deviation from the noiseless run matters).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliOperator
from .tableau import StabilizerTableau

# op tuples:
#   ("prep", q)                      prepare |+> on q
#   ("gate", name, (qubits...))      Clifford gate
#   ("pp", a, b, mid)                parity projection: measure Z_a Z_b into
#                                    record mid, apply X_a on odd outcome
#   ("measure", q, basis, mid)       single-qubit measurement, consumes q
#   ("cfeedback", mid, (targets...), kind)
#                                    kind "Z": apply Z^m on targets
#                                    kind "X": apply X^m on targets
#                                    kind "S": apply S (m=0) or SDG (m=1)
#   ("noise1", q, rate, tag)         single-qubit depolarizing marker
#   ("noise2", a, b, rate, tag)      two-qubit depolarizing marker


class InvalidLocationError(IndexError):
    """Fault location does not index an operation of the circuit."""


@dataclass
class Circuit:
    n: int
    ops: list = field(default_factory=list)
    n_meas: int = 0

    def _q(self, *qs):
        for q in qs:
            if not (0 <= q < self.n):
                raise IndexError(f"qubit {q} out of range")

    def prep_plus(self, q):
        self._q(q)
        self.ops.append(("prep", q))

    def gate(self, name, *qubits):
        self._q(*qubits)
        self.ops.append(("gate", name.upper(), tuple(qubits)))

    def cz(self, a, b):
        self.gate("CZ", a, b)

    def parity_projection(self, a, b) -> int:
        """Project (a,b) to even ZZ parity; returns the measurement id."""
        self._q(a, b)
        mid = self.n_meas
        self.n_meas += 1
        self.ops.append(("pp", a, b, mid))
        return mid

    def measure(self, q, basis) -> int:
        self._q(q)
        mid = self.n_meas
        self.n_meas += 1
        self.ops.append(("measure", q, basis.upper(), mid))
        return mid

    def cfeedback(self, mid, targets, kind):
        self._q(*targets)
        self.ops.append(("cfeedback", mid, tuple(targets), kind.upper()))

    def noise1(self, q, rate, tag="gate"):
        self._q(q)
        self.ops.append(("noise1", q, rate, tag))

    def noise2(self, a, b, rate, tag="gate"):
        self._q(a, b)
        self.ops.append(("noise2", a, b, rate, tag))


_BASIS_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

# nontrivial single-qubit Paulis as (x, z) bit pairs
_PAULI_1Q = [(1, 0), (1, 1), (0, 1)]
_PAULI_2Q = [
    (ax, az, bx, bz)
    for ax, az in [(0, 0)] + _PAULI_1Q
    for bx, bz in [(0, 0)] + _PAULI_1Q
][1:]  # 15 nontrivial two-qubit Paulis


def run_on_tableau(circ: Circuit, rng, noisy: bool = False):
    """Execute on a stabilizer tableau; returns (tableau, outcome bits).

    With noisy=True the depolarizing markers are sampled and applied as
    Pauli errors.
    """
    t = StabilizerTableau(circ.n)
    outcomes = np.zeros(circ.n_meas, dtype=np.uint8)
    for op in circ.ops:
        kind = op[0]
        if kind == "prep":
            pass  # fresh |+> is the tableau's initial state; recipes prep once
        elif kind == "gate":
            t.apply_gate(op[1], op[2])
        elif kind == "pp":
            _, a, b, mid = op
            p = PauliOperator.identity(circ.n)
            p.z[[a, b]] = True
            m = t.measure_pauli(p, rng)
            bit = 0 if m == +1 else 1
            outcomes[mid] = bit
            if bit:
                t.apply_gate("X", a)
        elif kind == "measure":
            _, q, basis, mid = op
            m = t.measure_pauli(_basis_pauli(circ.n, q, basis), rng)
            outcomes[mid] = 0 if m == +1 else 1
        elif kind == "cfeedback":
            _, mid, targets, fkind = op
            bit = int(outcomes[mid])
            for q in targets:
                if fkind == "Z":
                    if bit:
                        t.apply_gate("Z", q)
                elif fkind == "X":
                    if bit:
                        t.apply_gate("X", q)
                elif fkind == "S":
                    # sqrt-Z correction after a Y measurement: SDG on +1, S on -1
                    t.apply_gate("S" if bit else "SDG", q)
                else:
                    raise ValueError(f"unknown feedback kind {fkind}")
        elif kind == "noise1":
            if noisy and rng.random() < op[2]:
                xb, zb = _PAULI_1Q[rng.integers(3)]
                _apply_bits(t, circ.n, [(op[1], xb, zb)])
        elif kind == "noise2":
            if noisy and rng.random() < op[3]:
                ax, az, bx, bz = _PAULI_2Q[rng.integers(15)]
                _apply_bits(t, circ.n, [(op[1], ax, az), (op[2], bx, bz)])
        else:
            raise ValueError(f"unknown op {kind}")
    return t, outcomes


def _apply_bits(t, n, placements):
    p = PauliOperator.identity(n)
    for q, xb, zb in placements:
        p.x[q] = xb
        p.z[q] = zb
    t.apply_pauli(p)


def _basis_pauli(n, q, basis):
    p = PauliOperator.identity(n)
    xb, zb = _BASIS_BITS[basis]
    p.x[q] = xb
    p.z[q] = zb
    if basis == "Y":
        p.phase = 1
    return p


class PauliFrame:
    """Sparse deviation-from-ideal tracker pushed through circuit ops.

    Measurement components fold into outcome flips; conditioned corrections
    re-enter the frame when their controlling outcome was flipped.
    """

    def __init__(self, n: int, n_meas: int):
        self.x = np.zeros(n, dtype=bool)
        self.z = np.zeros(n, dtype=bool)
        self.flips = np.zeros(n_meas, dtype=bool)

    def inject(self, placements) -> None:
        for q, xb, zb in placements:
            self.x[q] ^= bool(xb)
            self.z[q] ^= bool(zb)

    def step(self, op) -> None:
        kind = op[0]
        if kind == "prep":
            q = op[1]
            self.x[q] = self.z[q] = False
        elif kind == "gate":
            self._gate(op[1], op[2])
        elif kind == "pp":
            _, a, b, mid = op
            if self.x[a] ^ self.x[b]:  # anticommutes with Z_a Z_b
                self.flips[mid] ^= True
                # the recipe's parity fix (X on a) toggles with the outcome
                self.x[a] ^= True
        elif kind == "measure":
            _, q, basis, mid = op
            xb, zb = _BASIS_BITS[basis]
            if (self.x[q] & zb) ^ (self.z[q] & xb):
                self.flips[mid] ^= True
            self.x[q] = self.z[q] = False
        elif kind == "cfeedback":
            _, mid, targets, fkind = op
            if self.flips[mid]:
                # deviation between the correction branches: X for X-type,
                # Z for both Pauli-Z and S-type (S vs SDG differ by Z)
                for q in targets:
                    if fkind == "X":
                        self.x[q] ^= True
                    else:
                        self.z[q] ^= True
            if fkind == "S":
                for q in targets:
                    self.z[q] ^= self.x[q]
        # noise markers: locations only, nothing to do

    def _gate(self, name, qubits):
        if name == "CZ":
            a, b = qubits
            self.z[a] ^= self.x[b]
            self.z[b] ^= self.x[a]
        elif name == "CNOT":
            a, b = qubits
            self.x[b] ^= self.x[a]
            self.z[a] ^= self.z[b]
        elif name == "H":
            (q,) = qubits
            self.x[q], self.z[q] = self.z[q], self.x[q]
        elif name in ("S", "SDG"):
            (q,) = qubits
            self.z[q] ^= self.x[q]
        # X/Y/Z gates do not change frame bits


def propagate_error(circ: Circuit, fault) -> PauliOperator:
    """Push a Pauli fault inserted after op ``loc`` to the circuit end.

    fault = (loc, PauliOperator).  Returns the residual Pauli on the
    unmeasured qubits (measured components have been folded into outcome
    flips and re-injected through any feedback ops).
    """
    loc, pauli = fault
    if not (0 <= loc < len(circ.ops)):
        raise InvalidLocationError(f"location {loc} outside circuit")
    frame = PauliFrame(circ.n, circ.n_meas)
    frame.inject([(q, pauli.x[q], pauli.z[q]) for q in pauli.support()])
    for op in circ.ops[loc + 1 :]:
        frame.step(op)
    return PauliOperator(frame.x.copy(), frame.z.copy(), 0)


def fault_locations(circ: Circuit):
    """Enumerate (op index, support tuple, rate, tag) of all noise markers."""
    locs = []
    for i, op in enumerate(circ.ops):
        if op[0] == "noise1":
            locs.append((i, (op[1],), op[2], op[3]))
        elif op[0] == "noise2":
            locs.append((i, (op[1], op[2]), op[3], op[4]))
    return locs

"""Dense complex statevector simulator for small gate circuits.

Conventions:
    - Qubit ordering is little-endian: qubit 0 is the least significant
      bit of the basis-state index, so for two qubits |q1 q0> = |10> sits
      at index 2.
    - Gate application is pure: every operation returns a new StateVector
      and never mutates its input. Amplitude buffers are marked read-only.
    - Amplitudes are complex128. States are validated to unit norm on
      construction; unitarity keeps them normalized afterwards.

Supported gates: H, U1(lambda), RY(theta), CX. RY uses the real rotation
matrix [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 20
NORM_ATOL = 1e-12

GATE_KINDS = ("H", "U1", "RY", "CX")

_SQRT2_INV = 1.0 / math.sqrt(2.0)
_H_MATRIX = np.array([[_SQRT2_INV, _SQRT2_INV], [_SQRT2_INV, -_SQRT2_INV]], dtype=complex)


def _ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """A single circuit operation.

    kind: one of H, U1, RY, CX. `angle` is required for U1/RY and must be
    absent otherwise; `control` is required for CX and must be absent
    otherwise.
    """

    kind: str
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}; expected one of {GATE_KINDS}")
        if self.target < 0:
            raise IndexError(f"gate target must be non-negative, got {self.target}")
        if self.kind in ("U1", "RY"):
            if self.angle is None:
                raise ValueError(f"{self.kind} gate requires an angle")
            if not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} angle must be finite, got {self.angle}")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} gate takes no angle")
        if self.kind == "CX":
            if self.control is None:
                raise ValueError("CX gate requires a control qubit")
            if self.control < 0:
                raise IndexError(f"gate control must be non-negative, got {self.control}")
            if self.control == self.target:
                raise ValueError("CX control and target must differ")
        elif self.control is not None:
            raise ValueError(f"{self.kind} gate takes no control qubit")


def h(target: int) -> GateOp:
    return GateOp("H", target)


def u1(target: int, angle: float) -> GateOp:
    return GateOp("U1", target, angle=angle)


def ry(target: int, angle: float) -> GateOp:
    return GateOp("RY", target, angle=angle)


def cx(control: int, target: int) -> GateOp:
    return GateOp("CX", target, control=control)


@dataclass(frozen=True)
class StateVector:
    """Pure n-qubit state: 2**n_qubits complex amplitudes at unit norm."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.shape[0] != 2**self.n_qubits:
            raise ValueError(
                f"amplitude array must have length {2**self.n_qubits} "
                f"for {self.n_qubits} qubit(s), got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm**2 deviates from 1 by {abs(norm_sq - 1.0):.3e}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def _trusted(cls, n_qubits: int, amplitudes: np.ndarray) -> "StateVector":
        # Fast path for internally produced (already unitary-evolved) arrays.
        sv = object.__new__(cls)
        amplitudes.flags.writeable = False
        object.__setattr__(sv, "n_qubits", n_qubits)
        object.__setattr__(sv, "amplitudes", amplitudes)
        return sv


def new_zero_state(n_qubits: int) -> StateVector:
    """|0...0> on n_qubits qubits."""
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector._trusted(int(n_qubits), amps)


def _check_qubit(index: int, n_qubits: int, what: str) -> None:
    if not 0 <= index < n_qubits:
        raise IndexError(f"{what} qubit {index} out of range for {n_qubits}-qubit state")


# Cached basis-index tables keyed by (n_qubits, qubit); small widths only so
# the cache stays a few MiB.
_CACHE_MAX_QUBITS = 12
_PAIR_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
_ONES_CACHE: dict[tuple[int, int], np.ndarray] = {}
_CX_CACHE: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray]] = {}


def _pair_indices(n: int, qubit: int) -> tuple[np.ndarray, np.ndarray]:
    key = (n, qubit)
    cached = _PAIR_CACHE.get(key)
    if cached is None:
        idx = np.arange(2**n)
        i0 = idx[(idx >> qubit) & 1 == 0]
        cached = (i0, i0 | (1 << qubit))
        if n <= _CACHE_MAX_QUBITS:
            _PAIR_CACHE[key] = cached
    return cached


def _ones_indices(n: int, qubit: int) -> np.ndarray:
    key = (n, qubit)
    cached = _ONES_CACHE.get(key)
    if cached is None:
        idx = np.arange(2**n)
        cached = idx[(idx >> qubit) & 1 == 1]
        if n <= _CACHE_MAX_QUBITS:
            _ONES_CACHE[key] = cached
    return cached


def _cx_indices(n: int, control: int, target: int) -> tuple[np.ndarray, np.ndarray]:
    key = (n, control, target)
    cached = _CX_CACHE.get(key)
    if cached is None:
        idx = np.arange(2**n)
        src = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]
        cached = (src, src | (1 << target))
        if n <= _CACHE_MAX_QUBITS:
            _CX_CACHE[key] = cached
    return cached


def _apply_1q_matrix(amps: np.ndarray, matrix: np.ndarray, qubit: int, n: int) -> np.ndarray:
    i0, i1 = _pair_indices(n, qubit)
    out = np.empty_like(amps)
    out[i0] = matrix[0, 0] * amps[i0] + matrix[0, 1] * amps[i1]
    out[i1] = matrix[1, 0] * amps[i0] + matrix[1, 1] * amps[i1]
    return out


def _apply_raw(amps: np.ndarray, gate: GateOp, n: int) -> np.ndarray:
    _check_qubit(gate.target, n, "target")
    if gate.kind == "H":
        return _apply_1q_matrix(amps, _H_MATRIX, gate.target, n)
    if gate.kind == "RY":
        return _apply_1q_matrix(amps, _ry_matrix(gate.angle), gate.target, n)
    if gate.kind == "U1":
        out = amps.copy()
        ones = _ones_indices(n, gate.target)
        out[ones] *= complex(math.cos(gate.angle), math.sin(gate.angle))
        return out
    _check_qubit(gate.control, n, "control")  # CX
    src, dst = _cx_indices(n, gate.control, gate.target)
    out = amps.copy()
    out[src], out[dst] = amps[dst], amps[src]
    return out


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate, returning a new state; the input is left untouched."""
    return StateVector._trusted(state.n_qubits, _apply_raw(state.amplitudes, gate, state.n_qubits))


def _run_single_qubit(state: StateVector, gates) -> StateVector:
    # Scalar arithmetic: length-2 arrays are too small for numpy dispatch.
    a0 = complex(state.amplitudes[0])
    a1 = complex(state.amplitudes[1])
    changed = False
    for gate in gates:
        _check_qubit(gate.target, 1, "target")
        kind = gate.kind
        if kind == "H":
            a0, a1 = _SQRT2_INV * a0 + _SQRT2_INV * a1, _SQRT2_INV * a0 - _SQRT2_INV * a1
        elif kind == "U1":
            a1 = a1 * complex(math.cos(gate.angle), math.sin(gate.angle))
        elif kind == "RY":
            c, s = math.cos(gate.angle / 2.0), math.sin(gate.angle / 2.0)
            a0, a1 = c * a0 - s * a1, s * a0 + c * a1
        else:
            _check_qubit(gate.control, 1, "control")
        changed = True
    if not changed:
        return state
    return StateVector._trusted(1, np.array([a0, a1], dtype=complex))


def run_circuit(state: StateVector, gates) -> StateVector:
    """Left-fold apply_gate over a gate sequence."""
    n = state.n_qubits
    if n == 1:
        return _run_single_qubit(state, gates)
    amps = state.amplitudes
    for gate in gates:
        amps = _apply_raw(amps, gate, n)
    if amps is state.amplitudes:
        return state
    return StateVector._trusted(n, amps)


def probabilities(state: StateVector) -> np.ndarray:
    """Measurement probabilities |a_i|**2 over all basis states."""
    return np.abs(state.amplitudes) ** 2


def marginal_zero_probability(state: StateVector, qubit: int) -> float:
    """Probability that a single qubit reads 0, marginalizing the rest."""
    _check_qubit(qubit, state.n_qubits, "readout")
    if state.n_qubits == 1 and qubit == 0:
        a0 = complex(state.amplitudes[0])
        p = a0.real * a0.real + a0.imag * a0.imag
    else:
        i0, _ = _pair_indices(state.n_qubits, qubit)
        p = float(np.sum(np.abs(state.amplitudes[i0]) ** 2))
    return min(max(p, 0.0), 1.0)

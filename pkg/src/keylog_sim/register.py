"""Dense state vectors over ordered qubit / qudit / truncated-mode registers.

Layout: subsystem 0 is the most significant (slowest-varying) factor, so the
amplitude vector reshapes to ``amps.reshape(dims)`` in C order. All gate
functions return a new ``RegisterState``; inputs are never mutated.

Sampling uses ``numpy.random.default_rng(seed)`` (PCG64 bit generator,
SeedSequence seeding), which is reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import fock
from .errors import (
    BadAssignment,
    DimensionGuardExceeded,
    DimensionMismatch,
    NotAQubit,
)

MAX_REGISTER_DIM = 2**24
TAU_DISTRIBUTION = 1e-10

QUBIT, QUDIT, MODE = "qubit", "qudit", "mode"


@dataclass(frozen=True)
class Subsystem:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (QUBIT, QUDIT, MODE):
            raise ValueError(f"unknown subsystem kind {self.kind!r}")
        if self.kind == QUBIT and self.dim != 2:
            raise ValueError("a qubit has dimension 2")
        if self.dim < 2 and self.kind == QUDIT:
            raise ValueError(f"qudit dimension must be >= 2, got {self.dim}")
        if self.dim < 1:
            raise ValueError(f"mode cutoff must be >= 1, got {self.dim}")

    @property
    def number_like(self) -> bool:
        return self.kind in (QUDIT, MODE)


def Qubit() -> Subsystem:
    return Subsystem(QUBIT, 2)


def Qudit(d: int) -> Subsystem:
    return Subsystem(QUDIT, int(d))


def Mode(N: int) -> Subsystem:
    return Subsystem(MODE, int(N))


@dataclass(frozen=True, eq=False)
class RegisterState:
    specs: tuple[Subsystem, ...]
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        if self.amps.shape != (self.total_dim,):
            raise DimensionMismatch(
                f"amplitude length {self.amps.shape} does not match dims {self.dims}",
                dims=list(self.dims),
            )

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.specs)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def _with(self, tensor: np.ndarray) -> RegisterState:
        return RegisterState(self.specs, np.ascontiguousarray(tensor).reshape(-1))


@dataclass(frozen=True, eq=False)
class MeasurementResult:
    outcome: int
    distribution: np.ndarray
    collapsed: RegisterState


def _guard(specs: Sequence[Subsystem]) -> None:
    total = math.prod(s.dim for s in specs)
    if total > MAX_REGISTER_DIM:
        raise DimensionGuardExceeded(
            f"register dimension {total} exceeds {MAX_REGISTER_DIM}",
            dims=[s.dim for s in specs],
        )


def _local_factor(spec: Subsystem, assignment) -> np.ndarray:
    if isinstance(assignment, str):
        if assignment == "uniform" and spec.kind in (QUDIT, QUBIT):
            return np.full(spec.dim, 1 / math.sqrt(spec.dim), dtype=complex)
        raise BadAssignment(f"preparation {assignment!r} not available for a {spec.kind}", kind=spec.kind)
    if isinstance(assignment, (int, np.integer)):
        if not 0 <= assignment < spec.dim:
            raise BadAssignment(f"basis index {assignment} outside dimension {spec.dim}", dim=spec.dim)
        v = np.zeros(spec.dim, dtype=complex)
        v[assignment] = 1
        return v
    v = np.asarray(assignment, dtype=complex)
    if v.shape != (spec.dim,):
        raise BadAssignment(f"vector of shape {v.shape} for a subsystem of dimension {spec.dim}", dim=spec.dim)
    nrm = np.linalg.norm(v)
    if abs(nrm - 1) > 1e-9:
        raise BadAssignment(f"vector for {spec.kind} is not normalized (norm {nrm:.12g})", norm=float(nrm))
    return v


def init_register(specs: Sequence[Subsystem], assignment: Sequence) -> RegisterState:
    """Product state. Each entry of ``assignment`` is a basis index, ``"uniform"``,
    or an explicit normalized local vector (e.g. a Fock-space codeword)."""
    specs = tuple(specs)
    if len(specs) != len(assignment):
        raise BadAssignment(f"{len(specs)} subsystems but {len(assignment)} assignments")
    _guard(specs)
    amps = np.ones(1, dtype=complex)
    for spec, a in zip(specs, assignment):
        amps = np.kron(amps, _local_factor(spec, a))
    amps /= np.linalg.norm(amps)
    return RegisterState(specs, amps)


def _check_index(state: RegisterState, idx: int) -> int:
    if not 0 <= idx < len(state.specs):
        raise IndexError(f"subsystem index {idx} out of range for {len(state.specs)} subsystems")
    return idx


def _require_qubit(state: RegisterState, idx: int) -> None:
    if state.specs[_check_index(state, idx)].kind != QUBIT:
        raise NotAQubit(f"subsystem {idx} is a {state.specs[idx].kind}", index=idx)


def apply_local(op: np.ndarray, idx: int, state: RegisterState) -> RegisterState:
    """Apply ``op`` to subsystem ``idx`` (no Kronecker product is formed)."""
    _check_index(state, idx)
    d = state.dims[idx]
    if op.shape != (d, d):
        raise DimensionMismatch(f"operator {op.shape} on subsystem of dim {d}", index=idx)
    t = np.tensordot(op, state.tensor(), axes=([1], [idx]))
    return state._with(np.moveaxis(t, 0, idx))


def apply_controlled(
    op: np.ndarray, control_idx: int, target_idx: int, state: RegisterState, control_value: int = 1
) -> RegisterState:
    """Apply ``op`` to ``target_idx`` on the branch where ``control_idx`` equals ``control_value``."""
    _check_index(state, control_idx)
    _check_index(state, target_idx)
    if control_idx == target_idx:
        raise ValueError("control and target must differ")
    d = state.dims[target_idx]
    if op.shape != (d, d):
        raise DimensionMismatch(f"operator {op.shape} on subsystem of dim {d}", index=target_idx)
    t = state.tensor().copy()
    sl = [slice(None)] * t.ndim
    sl[control_idx] = control_value
    branch = t[tuple(sl)]
    # the control axis is gone from ``branch``, shifting later axes down by one
    axis = target_idx - (1 if target_idx > control_idx else 0)
    new = np.moveaxis(np.tensordot(op, branch, axes=([1], [axis])), 0, axis)
    t[tuple(sl)] = new
    return state._with(t)


def apply_cnot(control_idx: int, target_idx: int, state: RegisterState) -> RegisterState:
    _require_qubit(state, control_idx)
    _require_qubit(state, target_idx)
    return apply_controlled(PAULI_X, control_idx, target_idx, state)


def apply_swap(i: int, j: int, state: RegisterState) -> RegisterState:
    if state.dims[i] != state.dims[j]:
        raise DimensionMismatch("swap needs equal dimensions", dims=[state.dims[i], state.dims[j]])
    return state._with(np.swapaxes(state.tensor(), i, j))


def _require_mode(state: RegisterState, idx: int) -> None:
    if state.specs[_check_index(state, idx)].kind != MODE:
        raise DimensionMismatch(f"subsystem {idx} is a {state.specs[idx].kind}, not a mode", index=idx)


def apply_qubit_controlled_displacement(
    control_idx: int, mode_idx: int, beta, state: RegisterState, method: str = fock.EXPONENTIAL
) -> RegisterState:
    """``|0><0| x I + |1><1| x D(beta)``."""
    _require_qubit(state, control_idx)
    _require_mode(state, mode_idx)
    D = fock.displacement_matrix(beta, state.dims[mode_idx], method)
    return apply_controlled(D, control_idx, mode_idx, state)


def apply_number_controlled_displacement(
    qudit_idx: int,
    qubit_idx: int,
    mode_idx: int,
    beta,
    sign: int,
    state: RegisterState,
    method: str = fock.EXPONENTIAL,
) -> RegisterState:
    """``sum_j |j><j| x (|0><0| x I + |1><1| x D(sign * j * beta))``."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    spec = state.specs[_check_index(state, qudit_idx)]
    if not spec.number_like:
        raise DimensionMismatch(f"subsystem {qudit_idx} has no number basis", index=qudit_idx)
    _require_qubit(state, qubit_idx)
    _require_mode(state, mode_idx)
    if len({qudit_idx, qubit_idx, mode_idx}) != 3:
        raise ValueError("qudit, qubit and mode indices must differ")
    N, d = state.dims[mode_idx], spec.dim
    beta = complex(beta)
    # fail before doing any work if the largest shift is out of range
    fock.displacement_matrix((d - 1) * beta, N, method)

    t = state.tensor().copy()
    for j in range(1, d):
        sl = [slice(None)] * t.ndim
        sl[qudit_idx] = j
        sl[qubit_idx] = 1
        branch = t[tuple(sl)]
        axis = mode_idx - sum(1 for i in (qudit_idx, qubit_idx) if i < mode_idx)
        D = fock.displacement_matrix(sign * j * beta, N, method)
        t[tuple(sl)] = np.moveaxis(np.tensordot(D, branch, axes=([1], [axis])), 0, axis)
    return state._with(t)


def dft_matrix(d: int) -> np.ndarray:
    """F[k, j] = exp(2 pi i j k / d) / sqrt(d)."""
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / math.sqrt(d)


def qft_qudit(idx: int, state: RegisterState, inverse: bool = False) -> RegisterState:
    spec = state.specs[_check_index(state, idx)]
    if spec.kind != QUDIT:
        raise DimensionMismatch(f"QFT needs a qudit, subsystem {idx} is a {spec.kind}", index=idx)
    F = dft_matrix(spec.dim)
    return apply_local(F.conj().T if inverse else F, idx, state)


def cross_kerr(idx_a: int, idx_b: int, d: int, state: RegisterState) -> RegisterState:
    """exp(2 pi i n_a n_b / d): |j>|k> picks up exp(2 pi i j k / d)."""
    for i in (idx_a, idx_b):
        if not state.specs[_check_index(state, i)].number_like:
            raise DimensionMismatch(f"subsystem {i} has no number basis", index=i)
    if idx_a == idx_b:
        raise ValueError("cross-Kerr acts on two distinct subsystems")
    na = np.arange(state.dims[idx_a])
    nb = np.arange(state.dims[idx_b])
    phase = np.exp(2j * np.pi * np.outer(na, nb) / d)
    shape = [1] * len(state.dims)
    shape[idx_a], shape[idx_b] = len(na), len(nb)
    if idx_a > idx_b:
        phase = phase.T
    return state._with(state.tensor() * phase.reshape(shape))


def marginal(state: RegisterState, idx) -> np.ndarray:
    """Outcome distribution of one subsystem, or the joint one of a tuple of
    subsystems (mixed-radix index, first listed most significant)."""
    idxs = (idx,) if isinstance(idx, (int, np.integer)) else tuple(idx)
    for i in idxs:
        _check_index(state, i)
    probs = np.abs(state.tensor()) ** 2
    others = tuple(i for i in range(probs.ndim) if i not in idxs)
    m = probs.sum(axis=others)
    # sum keeps remaining axes in ascending order; reorder to the requested one
    order = sorted(idxs)
    m = np.transpose(m, [order.index(i) for i in idxs])
    return m.reshape(-1)


def sample_outcome(distribution: np.ndarray, seed: int) -> int:
    rng = np.random.default_rng(seed)
    p = np.clip(np.asarray(distribution, dtype=float), 0, None)
    return int(rng.choice(len(p), p=p / p.sum()))


def measure(idx, state: RegisterState, seed: int | None = None) -> MeasurementResult:
    """Computational-basis measurement of ``idx`` (an index or tuple of indices).

    With ``seed=None`` the exact marginal is returned and the collapsed state
    is the argmax branch; with a seed one outcome is drawn and collapsed on.
    """
    idxs = (idx,) if isinstance(idx, (int, np.integer)) else tuple(idx)
    dist = marginal(state, idxs)
    total = dist.sum()
    if abs(total - 1) > TAU_DISTRIBUTION:
        raise ArithmeticError(f"register not normalized: marginal sums to {total!r}")
    outcome = int(np.argmax(dist)) if seed is None else sample_outcome(dist, seed)

    sub_dims = [state.dims[i] for i in idxs]
    digits = np.unravel_index(outcome, sub_dims)
    t = state.tensor()
    mask = np.zeros(t.shape, dtype=bool)
    sl = [slice(None)] * t.ndim
    for i, v in zip(idxs, digits):
        sl[i] = int(v)
    mask[tuple(sl)] = True
    collapsed = np.where(mask, t, 0)
    collapsed = collapsed / math.sqrt(dist[outcome])
    return MeasurementResult(outcome, dist, state._with(collapsed))


def split(state: RegisterState, idx: int) -> np.ndarray:
    """Matrix M with rows = all other subsystems, columns = subsystem ``idx``."""
    t = np.moveaxis(state.tensor(), idx, -1)
    return t.reshape(-1, state.dims[idx])


def reduced_density_matrix(idx: int, state: RegisterState) -> np.ndarray:
    M = split(state, idx)
    return M.T @ M.conj()


def mode_leakage(idx: int, state: RegisterState) -> float:
    """Probability mass of subsystem ``idx`` in its top ceil(N/10) levels."""
    dist = marginal(state, idx)
    return float(dist[-fock.tail_size(len(dist)) :].sum())


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

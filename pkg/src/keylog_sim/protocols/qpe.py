"""Phase estimation: closed form, qubit circuit, and the one-shot bosonic variants.

Phase convention: the controlled unitary is ``U = diag(1, exp(-2i*theta))``
and a perfect readout returns ``k = ell`` where
``theta = pi * (ell + delta) / 2**n``. For the displacement loop
``D(-beta) D(alpha) D(beta) = exp(i*phi) D(alpha)`` that means
``theta = -phi / 2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import fock
from .. import register as reg
from ..errors import DimensionGuardExceeded, DimensionMismatch, TruncationRisk
from ..phase_algebra import (
    IDENTITY,
    SQRT_HALF_PI,
    PhasedDisplacement,
    as_amplitude,
    compose,
    conjugate_loop,
    displacement,
)

EXACT = "exact"
FOCK = "fock"
QFT = "qft"
CROSSKERR = "crosskerr"
# cross-Kerr readouts: the a' ancilla alone, or a' together with a in its
# Fourier-conjugate basis, decoded as (k - m) mod d
ANCILLA = "ancilla"
JOINT = "joint"

MAX_STANDARD_QUBITS = 10
TAU_DISTRIBUTION = 1e-10


def qpe_outcome_distribution(n: int, theta: float) -> np.ndarray:
    """p(k) = 2^{-2n} |sum_j exp(2 pi i j (k - 2^n theta / pi) / 2^n)|^2 in closed form."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d = 2**n
    k = np.arange(d)
    # offset of each k from the peak, folded into [-d/2, d/2)
    y = np.mod(k - d * theta / math.pi + d / 2, d) - d / 2
    # |sin(pi y) / (d sin(pi y / d))|^2 written with sinc to remove the y = 0 singularity
    return (np.sinc(y) / np.sinc(y / d)) ** 2


def theta_decomposition(n: int, theta: float) -> tuple[int, float]:
    """``(ell, delta)`` with ``theta = pi (ell + delta) / 2**n`` read on the circle."""
    d = 2**n
    v = math.fmod(d * theta / math.pi, d)
    if v < 0:
        v += d
    ell = math.floor(v + 0.5)
    delta = v - ell
    return ell % d, delta


def effective_theta(alpha, beta) -> float:
    """theta seen by phase estimation for probe ``beta`` against displacement ``alpha``."""
    return -conjugate_loop(alpha, beta).phase / 2


@dataclass(frozen=True)
class QpeConfig:
    """Settings for one phase-estimation run against an unknown displacement.

    ``working_cutoff`` is the Fock dimension used for mode c during the run
    (``None`` picks one large enough for the biggest intermediate
    displacement); the input codeword is built at ``gkp.cutoff`` and
    zero-padded. ``mode_state`` replaces the GKP codeword as input.
    ``ancilla_cutoff`` realizes ancilla a as a truncated mode instead of a
    2**n qudit.
    """

    n: int = 1
    beta: complex = SQRT_HALF_PI
    backend: str = FOCK
    gkp: fock.GkpParams = field(default_factory=fock.GkpParams)
    working_cutoff: int | None = None
    mode_state: np.ndarray | None = field(default=None, compare=False, repr=False)
    readout: str = ANCILLA
    ancilla_cutoff: int | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "beta", as_amplitude(self.beta))
        if self.backend not in (EXACT, FOCK):
            raise ValueError(f"backend must be {EXACT!r} or {FOCK!r}, got {self.backend!r}")
        if self.readout not in (ANCILLA, JOINT):
            raise ValueError(f"readout must be {ANCILLA!r} or {JOINT!r}, got {self.readout!r}")
        if self.ancilla_cutoff is not None and self.ancilla_cutoff < 2**self.n:
            raise ValueError(f"ancilla_cutoff {self.ancilla_cutoff} cannot hold 2**n = {2**self.n} levels")

    @property
    def d(self) -> int:
        return 2**self.n


@dataclass(eq=False)
class QpeOutcome:
    distribution: np.ndarray
    ell: int
    delta: float
    theta: float
    n: int
    beta: complex | None = None
    fourier: str = QFT
    readout: str = ANCILLA
    backend: str = EXACT
    post_mode_state: np.ndarray | None = None
    codeword_fidelity: float | None = None
    mode_purity: float | None = None
    leakage_max: float = 0.0
    alpha_applications: int = 0

    @property
    def k_top(self) -> int:
        return int(np.argmax(self.distribution))


class UserOperation:
    """The sender's logical displacement.

    Every application goes through this object, so the single-use
    restriction of the attack is checked by counting, not by inspection.
    """

    def __init__(self, op: PhasedDisplacement):
        self.op = op
        self.applications = 0

    def on_mode(self, idx: int, state: reg.RegisterState) -> reg.RegisterState:
        self.applications += 1
        D = fock.phased_displacement_matrix(self.op, state.dims[idx])
        return reg.apply_local(D, idx, state)

    def on_branches(self, branches: list[PhasedDisplacement]) -> list[PhasedDisplacement]:
        self.applications += 1
        return [compose(self.op, b) for b in branches]


def _as_user_operation(alpha) -> UserOperation:
    if isinstance(alpha, UserOperation):
        return alpha
    if isinstance(alpha, PhasedDisplacement):
        return UserOperation(alpha)
    return UserOperation(displacement(alpha))


# -- qubit-register circuit ----------------------------------------------------


def _qft_circuit(qubits: list[int], state: reg.RegisterState) -> reg.RegisterState:
    """Textbook H / controlled-R_m / swap QFT; qubits[0] is the most significant bit."""
    n = len(qubits)
    for i, q in enumerate(qubits):
        state = reg.apply_local(reg.HADAMARD, q, state)
        for m, c in enumerate(qubits[i + 1 :], start=2):
            rm = np.diag([1, np.exp(2j * np.pi / 2**m)])
            state = reg.apply_controlled(rm, c, q, state)
    for i in range(n // 2):
        state = reg.apply_swap(qubits[i], qubits[n - 1 - i], state)
    return state


def qpe_standard(n: int, theta: float) -> QpeOutcome:
    """n ancilla qubits, eigenqubit |1> of U = diag(1, e^{-2i theta}), controlled powers, QFT."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_STANDARD_QUBITS:
        raise DimensionGuardExceeded(f"qpe_standard limited to {MAX_STANDARD_QUBITS} qubits", n=n)
    specs = [reg.Qubit() for _ in range(n + 1)]
    state = reg.init_register(specs, [0] * n + [1])
    for q in range(n):
        state = reg.apply_local(reg.HADAMARD, q, state)
    for q in range(n):
        power = 2 ** (n - 1 - q)
        u = np.diag([1, np.exp(-2j * theta * power)])
        state = reg.apply_controlled(u, q, n, state)
    state = _qft_circuit(list(range(n)), state)
    dist = reg.measure(tuple(range(n)), state).distribution
    ell, delta = theta_decomposition(n, theta)
    return QpeOutcome(dist, ell, delta, theta, n, backend="circuit")


# -- one-shot engine -----------------------------------------------------------


@dataclass
class _Layout:
    a: list[int]
    a_prime: list[int]
    b: list[int]
    c: int | None


@dataclass
class _EngineResult:
    distributions: list[np.ndarray]
    post_mode_state: np.ndarray | None
    codeword_fidelity: float
    mode_purity: float
    leakage_max: float


def _probe_reach(probes: list[complex], d: int, alpha: complex) -> float:
    return sum((d - 1) * abs(b) for b in probes) + abs(alpha)


def working_cutoff_for(input_cutoff: int, reach: float) -> int:
    """Fock dimension holding a state supported below ``input_cutoff`` after a
    displacement of magnitude ``reach``."""
    root = math.sqrt(input_cutoff)
    n = math.ceil((root + reach) ** 2) + math.ceil(2 * root)
    n = max(n, input_cutoff, math.ceil(4 * reach**2) + 1, fock.MIN_DISPLACEMENT_CUTOFF)
    # round up so nearby reaches share cached operators
    return -(-n // 16) * 16


def _fourier(idx: int, d: int, state: reg.RegisterState, inverse: bool = False) -> reg.RegisterState:
    if state.specs[idx].kind == reg.QUDIT:
        return reg.qft_qudit(idx, state, inverse=inverse)
    F = np.eye(state.dims[idx], dtype=complex)
    F[:d, :d] = reg.dft_matrix(d)
    return reg.apply_local(F.conj().T if inverse else F, idx, state)


def _readout(
    state: reg.RegisterState, layout: _Layout, d: int, fourier: str, readout: str
) -> tuple[reg.RegisterState, list[np.ndarray]]:
    dists = []
    for i, a in enumerate(layout.a):
        if fourier == QFT:
            state = _fourier(a, d, state)
            dists.append(reg.measure(a, state).distribution[:d])
            continue
        ap = layout.a_prime[i]
        state = reg.cross_kerr(a, ap, d, state)
        if readout == ANCILLA:
            dists.append(reg.measure(ap, state).distribution)
        else:
            state = _fourier(a, d, state, inverse=True)
            joint = reg.measure((a, ap), state).distribution.reshape(state.dims[a], d)[:d]
            m = np.arange(d)
            dists.append(np.array([joint[m, (m + r) % d].sum() for r in range(d)]))
    return state, dists


def _ancilla_specs(config: QpeConfig, m: int, fourier: str):
    d = config.d
    specs, prep = [], []
    for _ in range(m):
        if config.ancilla_cutoff is None:
            specs.append(reg.Qudit(d))
            prep.append("uniform")
        else:
            v = np.zeros(config.ancilla_cutoff, dtype=complex)
            v[:d] = 1 / math.sqrt(d)
            specs.append(reg.Mode(config.ancilla_cutoff))
            prep.append(v)
    if fourier == CROSSKERR:
        specs += [reg.Qudit(d) for _ in range(m)]
        prep += ["uniform"] * m
    return specs, prep


def _run_exact(config, probes, user, fourier) -> _EngineResult:
    d, m = config.d, len(probes)
    grid = list(itertools.product(range(d), repeat=m))
    branches = [IDENTITY] * len(grid)
    for i, beta in enumerate(probes):
        branches = [compose(displacement(J[i] * beta), op) for J, op in zip(grid, branches)]
    branches = user.on_branches(branches)
    for i in reversed(range(m)):
        beta = probes[i]
        branches = [compose(displacement(-J[i] * beta), op) for J, op in zip(grid, branches)]
    target = user.op
    for op in branches:
        # operator identity: every branch ends on the same displacement
        assert abs(op.alpha - target.alpha) < 1e-12
    phases = np.array([np.exp(1j * (op.phase - target.phase)) for op in branches])

    specs, prep = _ancilla_specs(config, m, fourier)
    state = reg.init_register(specs, prep)
    t = state.tensor().copy()
    a_axes = tuple(range(m))
    shape = [1] * t.ndim
    for ax in a_axes:
        shape[ax] = d
    if config.ancilla_cutoff is None:
        t = t * phases.reshape(shape)
    else:
        sl = tuple(slice(0, d) if ax in a_axes else slice(None) for ax in range(t.ndim))
        t[sl] = t[sl] * phases.reshape(shape)
    state = state._with(t)
    layout = _Layout(list(a_axes), list(range(m, 2 * m)) if fourier == CROSSKERR else [], [], None)
    _, dists = _readout(state, layout, d, fourier, config.readout)
    return _EngineResult(dists, None, 1.0, 1.0, 0.0)


def _input_mode_state(config: QpeConfig) -> np.ndarray:
    if config.mode_state is not None:
        v = np.asarray(config.mode_state, dtype=complex)
        return fock.normalize(v)
    return fock.gkp_codeword(config.gkp)


def _run_fock(config, probes, user, fourier) -> _EngineResult:
    d, m = config.d, len(probes)
    phi = _input_mode_state(config)
    N = config.working_cutoff or working_cutoff_for(len(phi), _probe_reach(probes, d, user.op.alpha))
    phi = fock.pad(phi, N)

    a_specs, a_prep = _ancilla_specs(config, m, fourier)
    specs = a_specs + [reg.Qubit() for _ in range(m)] + [reg.Mode(N)]
    prep = a_prep + [1] * m + [phi]
    n_a = len(a_specs)
    layout = _Layout(
        list(range(m)),
        list(range(m, 2 * m)) if fourier == CROSSKERR else [],
        list(range(n_a, n_a + m)),
        n_a + m,
    )
    c = layout.c
    state = reg.init_register(specs, prep)

    leak_max = reg.mode_leakage(c, state)

    def guarded(s, step):
        nonlocal leak_max
        leak = reg.mode_leakage(c, s)
        leak_max = max(leak_max, leak)
        if leak > fock.LEAKAGE_LIMIT:
            raise TruncationRisk(
                f"mode leakage {leak:.3g} above {fock.LEAKAGE_LIMIT:g} after {step}; raise the working cutoff",
                leakage=leak,
                working_cutoff=N,
                step=step,
            )
        return s

    def controlled(s, i, sign):
        if config.ancilla_cutoff is None:
            return reg.apply_number_controlled_displacement(layout.a[i], layout.b[i], c, probes[i], sign, s)
        return _controlled_on_levels(s, layout.a[i], layout.b[i], c, probes[i], sign, d)

    for i in range(m):
        state = guarded(controlled(state, i, +1), f"controlled displacement {i}")
    state = guarded(user.on_mode(c, state), "user operation")
    for i in reversed(range(m)):
        state = guarded(controlled(state, i, -1), f"inverse controlled displacement {i}")

    ref = user.op.scalar() * (fock.displacement_matrix(user.op.alpha, N, fock.ANALYTIC) @ phi)
    M = reg.split(state, c)
    fid = float(np.linalg.norm(M @ ref.conj()) ** 2)
    _, s, vh = np.linalg.svd(M, full_matrices=False)
    purity = float(np.sum(s**4))
    post = vh[0]
    overlap = np.vdot(ref, post)
    if abs(overlap) > 0:
        post = post * (abs(overlap) / overlap)

    _, dists = _readout(state, layout, d, fourier, config.readout)
    return _EngineResult(dists, post, fid, purity, leak_max)


def _controlled_on_levels(state, a_idx, b_idx, c_idx, beta, sign, levels):
    # ancilla realized as a truncated mode: only levels < 2**n are ever
    # populated, and the controlled shift is applied on exactly those
    N = state.dims[c_idx]
    t = state.tensor().copy()
    axis = c_idx - sum(1 for i in (a_idx, b_idx) if i < c_idx)
    for j in range(1, levels):
        sl = [slice(None)] * t.ndim
        sl[a_idx], sl[b_idx] = j, 1
        D = fock.displacement_matrix(sign * j * beta, N)
        t[tuple(sl)] = np.moveaxis(np.tensordot(D, t[tuple(sl)], axes=([1], [axis])), 0, axis)
    return state._with(t)


def run_probes(config: QpeConfig, probes, alpha, fourier: str = QFT) -> tuple[list[QpeOutcome], UserOperation]:
    """One application of the user operation, probed by one ancilla pair per entry of ``probes``.

    With a single probe this is the one-shot protocol; several probes share
    the same mode c (and the same single application).
    """
    user = _as_user_operation(alpha)
    probes = [as_amplitude(b) for b in probes]
    if fourier not in (QFT, CROSSKERR):
        raise ValueError(f"unknown Fourier stage {fourier!r}")
    if config.backend == EXACT:
        res = _run_exact(config, probes, user, fourier)
    else:
        res = _run_fock(config, probes, user, fourier)
    readout = config.readout if fourier == CROSSKERR else ANCILLA
    outcomes = []
    for beta, dist in zip(probes, res.distributions):
        theta = effective_theta(user.op.alpha, beta)
        ell, delta = theta_decomposition(config.n, theta)
        total = float(dist.sum())
        if abs(total - 1) > TAU_DISTRIBUTION:
            raise DimensionMismatch(f"readout distribution sums to {total!r}")
        outcomes.append(
            QpeOutcome(
                distribution=dist,
                ell=ell,
                delta=delta,
                theta=theta,
                n=config.n,
                beta=beta,
                fourier=fourier,
                readout=readout,
                backend=config.backend,
                post_mode_state=res.post_mode_state,
                codeword_fidelity=res.codeword_fidelity,
                mode_purity=res.mode_purity,
                leakage_max=res.leakage_max,
                alpha_applications=user.applications,
            )
        )
    return outcomes, user


def qpe_oneshot(config: QpeConfig, alpha) -> QpeOutcome:
    """Number-controlled D(j beta), a single D(alpha), the inverse, then a QFT on the ancilla."""
    (outcome,), _ = run_probes(config, [config.beta], alpha, QFT)
    return outcome


def qpe_crosskerr(config: QpeConfig, alpha) -> QpeOutcome:
    """As ``qpe_oneshot`` with the QFT replaced by a cross-Kerr coupling to a uniform ancilla a'."""
    (outcome,), _ = run_probes(config, [config.beta], alpha, CROSSKERR)
    return outcome


def with_beta(config: QpeConfig, beta) -> QpeConfig:
    return replace(config, beta=as_amplitude(beta))

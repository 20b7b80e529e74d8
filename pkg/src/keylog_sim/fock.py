"""Truncated single-mode Fock-space numerics.

States are 1-D complex arrays over |0>..|N-1>, operators are N x N complex
arrays. Operator builders cache their results and hand out read-only arrays,
so the caches can be shared between threads.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionMismatch, DimensionTooSmall, TruncationRisk
from .phase_algebra import PhasedDisplacement, as_amplitude

TAU_NORM = 1e-12
TAU_TRUNC = 1e-8
LEAKAGE_LIMIT = 1e-6
MIN_DISPLACEMENT_CUTOFF = 8
# dropped lattice weight for the default s_max
LATTICE_TAIL = 1e-12

EXPONENTIAL = "exponential"
ANALYTIC = "analytic"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_dim(N: int, minimum: int) -> int:
    N = int(N)
    if N < minimum:
        raise DimensionTooSmall(f"cutoff {N} below minimum {minimum}", cutoff=N, minimum=minimum)
    return N


@functools.lru_cache(maxsize=64)
def ladder_lower(N: int) -> np.ndarray:
    """Annihilation operator, <n-1|a|n> = sqrt(n)."""
    N = _check_dim(N, 2)
    return _frozen(np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex))


def ladder_raise(N: int) -> np.ndarray:
    return _frozen(ladder_lower(N).conj().T.copy())


@functools.lru_cache(maxsize=64)
def quadratures(N: int) -> tuple[np.ndarray, np.ndarray]:
    """``(q, p)`` with q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2))."""
    a = ladder_lower(N)
    ad = a.conj().T
    q = (a + ad) / math.sqrt(2.0)
    p = (a - ad) / (1j * math.sqrt(2.0))
    return _frozen(q), _frozen(p)


@functools.lru_cache(maxsize=64)
def number_operator(N: int) -> np.ndarray:
    N = _check_dim(N, 1)
    return _frozen(np.diag(np.arange(N, dtype=float)).astype(complex))


@functools.lru_cache(maxsize=16)
def _unit_generator_eig(N: int) -> tuple[np.ndarray, np.ndarray]:
    # H = i (a^dag - a) is Hermitian; D(r) = exp(r (a^dag - a)) = V exp(-i r w) V^dag
    a = ladder_lower(N)
    w, V = np.linalg.eigh(1j * (a.conj().T - a))
    return _frozen(w), _frozen(V)


def _displacement_exponential(alpha: complex, N: int) -> np.ndarray:
    # Rotating the real-axis generator: R(phi) (a^dag - a) R(phi)^dag with
    # R = exp(i phi n) equals e^{i phi} a^dag - e^{-i phi} a, so one
    # eigendecomposition per cutoff serves every alpha.
    w, V = _unit_generator_eig(N)
    r, phi = abs(alpha), math.atan2(alpha.imag, alpha.real)
    rot = np.exp(1j * phi * np.arange(N))
    left = rot[:, None] * V
    right = V.conj().T * rot.conj()[None, :]
    return (left * np.exp(-1j * r * w)[None, :]) @ right


def _displacement_analytic(alpha: complex, N: int) -> np.ndarray:
    # <m|D|n> = sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^(m-n)(|alpha|^2), m >= n,
    # and (-conj(alpha)) with m, n swapped above the diagonal.
    x = abs(alpha) ** 2
    m, n = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    mag = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - x / 2.0)
    lag = eval_genlaguerre(lo, k, x)
    below = np.power(complex(alpha), k)
    above = np.power(complex(-alpha.conjugate()), k)
    return mag * lag * np.where(m >= n, below, above)


@functools.lru_cache(maxsize=256)
def _displacement_cached(alpha: complex, N: int, method: str) -> np.ndarray:
    if method == EXPONENTIAL:
        return _frozen(_displacement_exponential(alpha, N))
    if method == ANALYTIC:
        return _frozen(_displacement_analytic(alpha, N))
    raise ValueError(f"unknown displacement method {method!r}")


def displacement_matrix(alpha, N: int, method: str = EXPONENTIAL) -> np.ndarray:
    """Truncated D(alpha).

    ``exponential`` exponentiates the truncated generator (exactly unitary on
    the truncated space); ``analytic`` fills in the closed-form matrix
    elements of the infinite operator. They agree on the low-energy block.
    """
    alpha = as_amplitude(alpha)
    N = _check_dim(N, MIN_DISPLACEMENT_CUTOFF)
    if abs(alpha) ** 2 > N / 4:
        raise TruncationRisk(
            f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds cutoff/4 = {N / 4:.4g}",
            alpha=[alpha.real, alpha.imag],
            cutoff=N,
        )
    return _displacement_cached(alpha, N, method)


def phased_displacement_matrix(d: PhasedDisplacement, N: int, method: str = EXPONENTIAL) -> np.ndarray:
    return d.scalar() * displacement_matrix(d.alpha, N, method)


def low_energy_block(N: int) -> int:
    """Size of the leading block on which truncated products are trusted."""
    return N // 2


# -- states -----------------------------------------------------------------


def fock_state(n: int, N: int) -> np.ndarray:
    if not 0 <= n < N:
        raise DimensionMismatch(f"level {n} outside cutoff {N}", level=n, cutoff=N)
    v = np.zeros(N, dtype=complex)
    v[n] = 1.0
    return v


def vacuum(N: int) -> np.ndarray:
    return fock_state(0, N)


def coherent_state(alpha, N: int) -> np.ndarray:
    """Amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!), truncated (not renormalized)."""
    alpha = as_amplitude(alpha)
    n = np.arange(N)
    if alpha == 0:
        return vacuum(N)
    logmag = -abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * math.atan2(alpha.imag, alpha.real))


def squeezed_position_state(center: float, width: float, N: int) -> np.ndarray:
    """Fock amplitudes of psi(q) proportional to exp(-(q - center)^2 / (2 width^2)).

    The wavepacket satisfies ((1 + w^2) a + (1 - w^2) a^dag) psi = sqrt(2) center psi,
    which gives a three-term recursion seeded by the vacuum overlap.
    """
    w2 = width * width
    c = float(center)
    out = np.zeros(N)
    out[0] = math.sqrt(2 * width / (1 + w2)) * math.exp(-c * c / (2 * (1 + w2)))
    if N > 1:
        out[1] = math.sqrt(2) * c * out[0] / (1 + w2)
    for n in range(1, N - 1):
        out[n + 1] = (math.sqrt(2) * c * out[n] - (1 - w2) * math.sqrt(n) * out[n - 1]) / (
            (1 + w2) * math.sqrt(n + 1)
        )
    return out.astype(complex)


def default_s_max(delta: float) -> int:
    """Smallest lattice radius whose first dropped weight is below LATTICE_TAIL."""
    s = 0
    while math.exp(-math.pi * delta**2 * (2 * s + 2) ** 2 / 2) >= LATTICE_TAIL:
        s += 1
    return s


@dataclass(frozen=True)
class GkpParams:
    """Finite-energy GKP codeword: lattice peaks of width ``delta`` under a Gaussian envelope."""

    mu: int = 0
    delta: float = 0.25
    cutoff: int = 150
    s_max: int | None = None

    def __post_init__(self):
        if self.mu not in (0, 1):
            raise ValueError(f"mu must be 0 or 1, got {self.mu!r}")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if self.cutoff < 8:
            raise DimensionTooSmall(f"GKP cutoff {self.cutoff} below 8", cutoff=self.cutoff)
        if self.s_max is None:
            object.__setattr__(self, "s_max", default_s_max(self.delta))
        elif self.s_max < 0:
            raise ValueError(f"s_max must be non-negative, got {self.s_max!r}")
        elif math.exp(-math.pi * self.delta**2 * (2 * self.s_max + 2) ** 2 / 2) >= LATTICE_TAIL:
            raise ValueError(
                f"s_max={self.s_max} drops lattice weight above {LATTICE_TAIL:g} at delta={self.delta}"
            )


@functools.lru_cache(maxsize=32)
def _gkp_cached(params: GkpParams) -> np.ndarray:
    v = np.zeros(params.cutoff, dtype=complex)
    root_pi = math.sqrt(math.pi)
    for s in range(-params.s_max, params.s_max + 1):
        q = (2 * s + params.mu) * root_pi
        weight = math.exp(-(params.delta**2) * q * q / 2)
        v += weight * squeezed_position_state(q, params.delta, params.cutoff)
    v = normalize(v)
    leak = leakage(v)
    if leak > LEAKAGE_LIMIT:
        raise TruncationRisk(
            f"GKP codeword leakage {leak:.3g} above {LEAKAGE_LIMIT:g}; raise the cutoff",
            leakage=leak,
            cutoff=params.cutoff,
            delta=params.delta,
        )
    return _frozen(v)


def gkp_codeword(params: GkpParams) -> np.ndarray:
    return _gkp_cached(params).copy()


# -- diagnostics --------------------------------------------------------------


def normalize(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / nrm


def tail_size(N: int) -> int:
    return math.ceil(N / 10)


def leakage(v: np.ndarray) -> float:
    """Probability mass in the top ceil(N/10) levels."""
    v = np.asarray(v)
    return float(np.sum(np.abs(v[-tail_size(len(v)) :]) ** 2))


def pad(v: np.ndarray, N: int) -> np.ndarray:
    """Embed a state into a larger truncation."""
    if N < len(v):
        raise DimensionMismatch(f"cannot pad length {len(v)} down to {N}", length=len(v), cutoff=N)
    out = np.zeros(N, dtype=complex)
    out[: len(v)] = v
    return out


def fidelity(v1: np.ndarray, v2: np.ndarray) -> float:
    if len(v1) != len(v2):
        raise DimensionMismatch(f"dims {len(v1)} and {len(v2)} differ", dims=[len(v1), len(v2)])
    return float(abs(np.vdot(v1, v2)) ** 2)


def expectation(op: np.ndarray, v: np.ndarray) -> complex:
    if op.shape != (len(v), len(v)):
        raise DimensionMismatch(f"operator {op.shape} vs state {len(v)}", op=list(op.shape), state=len(v))
    return complex(np.vdot(v, op @ v))

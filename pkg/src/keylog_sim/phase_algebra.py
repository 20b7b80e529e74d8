"""Exact algebra of phased single-mode displacement operators.

A value ``PhasedDisplacement(alpha, phase)`` stands for the operator
``exp(i*phase) * D(alpha)`` with ``D(alpha) = exp(alpha a^dag - conj(alpha) a)``.
Products are closed-form:

    D(a) D(b) = exp(BCH_SIGN * i * Im(a * conj(b))) D(a + b)

so nothing here touches a matrix. ``BCH_SIGN`` is pinned by comparing
truncated Fock matrices (see ``tests/test_fock.py::TestCompositionOracle``).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import PhaseOutOfAlphabet

TWO_PI = 2.0 * math.pi
TAU_PHASE = 1e-9
TAU_AMP = 1e-12

# [A, B] = alpha conj(beta) - conj(alpha) beta = 2i Im(alpha conj(beta)) for
# A = alpha a^dag - conj(alpha) a, hence +1.
BCH_SIGN = +1

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


def as_amplitude(z) -> complex:
    """Coerce ``z`` to a finite Python complex."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"complex amplitude must be finite, got {z!r}")
    return z


def wrap_phase(phase: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    w = math.fmod(float(phase), TWO_PI)
    if w < 0.0:
        w += TWO_PI
    # fmod of a value just below 0 can round up to exactly 2*pi
    if w >= TWO_PI:
        w -= TWO_PI
    return w


def phase_distance(a: float, b: float) -> float:
    """Shortest distance between two angles on the circle."""
    d = wrap_phase(a - b)
    return min(d, TWO_PI - d)


@dataclass(frozen=True, eq=False)
class PhasedDisplacement:
    """The operator ``exp(i*phase) D(alpha)``; phase is kept in [0, 2*pi)."""

    alpha: complex
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_amplitude(self.alpha))
        phase = float(self.phase)
        if not math.isfinite(phase):
            raise ValueError(f"phase must be finite, got {phase!r}")
        object.__setattr__(self, "phase", wrap_phase(phase))

    def __mul__(self, other: PhasedDisplacement) -> PhasedDisplacement:
        if not isinstance(other, PhasedDisplacement):
            return NotImplemented
        return compose(self, other)

    def inverse(self) -> PhasedDisplacement:
        return PhasedDisplacement(-self.alpha, -self.phase)

    def isclose(self, other: PhasedDisplacement, tau_phase=TAU_PHASE, tau_amp=TAU_AMP) -> bool:
        return (
            phase_distance(self.phase, other.phase) <= tau_phase
            and abs(self.alpha - other.alpha) <= tau_amp
        )

    def __eq__(self, other):
        if not isinstance(other, PhasedDisplacement):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def scalar(self) -> complex:
        return cmath.exp(1j * self.phase)


def displacement(alpha) -> PhasedDisplacement:
    return PhasedDisplacement(alpha, 0.0)


IDENTITY = PhasedDisplacement(0j, 0.0)


def symplectic_phase(alpha, beta) -> float:
    """``Im(alpha * conj(beta))``, not reduced mod 2*pi."""
    alpha, beta = as_amplitude(alpha), as_amplitude(beta)
    return (alpha * beta.conjugate()).imag


def compose(d1: PhasedDisplacement, d2: PhasedDisplacement) -> PhasedDisplacement:
    """Operator product ``d1 @ d2``."""
    bch = BCH_SIGN * symplectic_phase(d1.alpha, d2.alpha)
    return PhasedDisplacement(d1.alpha + d2.alpha, d1.phase + d2.phase + bch)


def conjugate_loop(alpha, beta) -> PhasedDisplacement:
    """``D(-beta) D(alpha) D(beta)``: same displacement, phase ``2*Im(alpha conj(beta))``."""
    return compose(compose(displacement(-as_amplitude(beta)), displacement(alpha)), displacement(beta))


class PauliLetter(enum.Enum):
    I = "I"
    X = "X"
    Z = "Z"
    Y = "Y"

    @property
    def bits(self) -> str:
        """Superdense-coding label: I, X, Z, Y <-> 00, 01, 10, 11."""
        return _LETTER_BITS[self]

    @classmethod
    def from_bits(cls, bits: str) -> PauliLetter:
        for letter, b in _LETTER_BITS.items():
            if b == bits:
                return letter
        raise ValueError(f"not a two-bit string: {bits!r}")

    @classmethod
    def parse(cls, text: str) -> PauliLetter:
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown Pauli letter {text!r}; expected one of I, X, Z, Y") from None


_LETTER_BITS = {
    PauliLetter.I: "00",
    PauliLetter.X: "01",
    PauliLetter.Z: "10",
    PauliLetter.Y: "11",
}


def make_pauli(letter: PauliLetter) -> PhasedDisplacement:
    """GKP logical Pauli as a phased displacement; Y is built as i * X * Z."""
    letter = PauliLetter(letter)
    if letter is PauliLetter.I:
        return IDENTITY
    if letter is PauliLetter.X:
        return displacement(SQRT_HALF_PI)
    if letter is PauliLetter.Z:
        return displacement(1j * SQRT_HALF_PI)
    xz = compose(make_pauli(PauliLetter.X), make_pauli(PauliLetter.Z))
    return PhasedDisplacement(xz.alpha, xz.phase + math.pi / 2)


def stabilizers() -> tuple[PhasedDisplacement, PhasedDisplacement]:
    """``(S_X, S_Z) = (X*X, Z*Z)``."""
    x, z = make_pauli(PauliLetter.X), make_pauli(PauliLetter.Z)
    return compose(x, x), compose(z, z)


class CommutationKind(enum.Enum):
    COMMUTE = "commute"
    ANTICOMMUTE = "anticommute"
    GENERAL = "general"


@dataclass(frozen=True)
class CommutationClass:
    kind: CommutationKind
    # 2*theta mod 2*pi: d1 d2 = exp(i*angle) d2 d1
    angle: float


def commutation_class(d1: PhasedDisplacement, d2: PhasedDisplacement, tol=TAU_PHASE) -> CommutationClass:
    angle = wrap_phase(2.0 * BCH_SIGN * symplectic_phase(d1.alpha, d2.alpha))
    if phase_distance(angle, 0.0) <= tol:
        kind = CommutationKind.COMMUTE
    elif phase_distance(angle, math.pi) <= tol:
        kind = CommutationKind.ANTICOMMUTE
    else:
        kind = CommutationKind.GENERAL
    return CommutationClass(kind, angle)


def _phase_bit(phase: float, tol: float, which: str) -> int:
    if phase_distance(phase, 0.0) <= tol:
        return 0
    if phase_distance(phase, math.pi) <= tol:
        return 1
    raise PhaseOutOfAlphabet(
        f"{which} loop phase {phase!r} is not within {tol} of 0 or pi",
        run=which,
        phase=phase,
    )


def infer_letter(phase_real_run: float, phase_imag_run: float, tol=TAU_PHASE) -> PauliLetter:
    """Decode the sender's letter from the loop phases of the two runs.

    A real probe displacement only sees the imaginary part of the unknown
    one (that is the Z bit); an imaginary probe sees the real part (X bit).
    """
    bit_z = _phase_bit(phase_real_run, tol, "real")
    bit_x = _phase_bit(phase_imag_run, tol, "imag")
    return PauliLetter.from_bits(f"{bit_z}{bit_x}")

"""The keystroke-logging attack: two probe directions, one decoded Pauli letter."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .. import fock
from ..errors import KeylogError
from ..phase_algebra import SQRT_HALF_PI, PauliLetter, infer_letter, make_pauli, wrap_phase
from .qpe import CROSSKERR, QFT, QpeConfig, QpeOutcome, run_probes

BETA_REAL = complex(SQRT_HALF_PI)
BETA_IMAG = 1j * SQRT_HALF_PI

THREADS_ENV = "KEYLOG_SIM_THREADS"


@dataclass(eq=False)
class AttackReport:
    true_letter: PauliLetter
    inferred_letter: PauliLetter
    run_real: QpeOutcome
    run_imag: QpeOutcome
    codeword_fidelity: float
    leakage_max: float
    recovered_phases: tuple[float, float]
    alpha_applications: tuple[int, ...]
    fourier: str = QFT
    shared_mode: bool = False

    @property
    def correct(self) -> bool:
        return self.inferred_letter is self.true_letter


def recovered_phase(distribution: np.ndarray, n: int) -> float:
    """Loop phase 2*pi*k/2**n read off the most likely outcome k."""
    k = int(np.argmax(distribution))
    return wrap_phase(math.pi * k / 2 ** (n - 1))


def keystroke_attack(
    letter: PauliLetter,
    config: QpeConfig | None = None,
    *,
    crosskerr: bool = False,
    shared_mode: bool = False,
) -> AttackReport:
    """Infer ``letter`` from one application of its displacement per run.

    By default the real and imaginary probes run on two independently
    prepared copies of mode c, each seeing the user operation once. With
    ``shared_mode`` both probe pairs wrap the same single application.
    ``config.beta`` is ignored.
    """
    letter = PauliLetter(letter)
    config = config or QpeConfig()
    fourier = CROSSKERR if crosskerr else QFT
    op = make_pauli(letter)

    if shared_mode:
        (real, imag), user = run_probes(config, [BETA_REAL, BETA_IMAG], op, fourier)
        counts = (user.applications,)
    else:
        (real,), u1 = run_probes(replace(config, beta=BETA_REAL), [BETA_REAL], op, fourier)
        (imag,), u2 = run_probes(replace(config, beta=BETA_IMAG), [BETA_IMAG], op, fourier)
        counts = (u1.applications, u2.applications)

    phases = (recovered_phase(real.distribution, config.n), recovered_phase(imag.distribution, config.n))
    inferred = infer_letter(*phases)
    return AttackReport(
        true_letter=letter,
        inferred_letter=inferred,
        run_real=real,
        run_imag=imag,
        codeword_fidelity=min(real.codeword_fidelity, imag.codeword_fidelity),
        leakage_max=max(real.leakage_max, imag.leakage_max),
        recovered_phases=phases,
        alpha_applications=counts,
        fourier=fourier,
        shared_mode=shared_mode,
    )


@dataclass(eq=False)
class SweepRow:
    letter: PauliLetter
    delta: float
    cutoff: int
    n: int
    report: AttackReport | None = None
    error: str | None = None
    error_code: str | None = None


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    return os.cpu_count() or 1


def _sweep_cell(cell) -> SweepRow:
    letter, delta, cutoff, n, base, crosskerr, shared_mode = cell
    row = SweepRow(letter, delta, cutoff, n)
    try:
        config = replace(base, n=n, gkp=fock.GkpParams(mu=base.gkp.mu, delta=delta, cutoff=cutoff))
        row.report = keystroke_attack(letter, config, crosskerr=crosskerr, shared_mode=shared_mode)
    except (KeylogError, ValueError, ArithmeticError) as exc:
        row.error = str(exc)
        row.error_code = getattr(exc, "code", type(exc).__name__)
    return row


def attack_sweep(
    letters: Sequence[PauliLetter] = tuple(PauliLetter),
    deltas: Sequence[float] = (0.25,),
    cutoffs: Sequence[int] = (150,),
    n_values: Sequence[int] = (1,),
    *,
    base: QpeConfig | None = None,
    crosskerr: bool = False,
    shared_mode: bool = False,
    workers: int | None = None,
) -> list[SweepRow]:
    """Cartesian sweep (letters outermost, n innermost); one row per cell, in input order.

    Failures are recorded on the row instead of aborting the sweep.
    """
    for name, values in (("letters", letters), ("deltas", deltas), ("cutoffs", cutoffs), ("n_values", n_values)):
        if len(values) == 0:
            raise ValueError(f"{name} must be non-empty")
    base = base or QpeConfig()
    cells = [
        (PauliLetter(letter), float(delta), int(cutoff), int(n), base, crosskerr, shared_mode)
        for letter in letters
        for delta in deltas
        for cutoff in cutoffs
        for n in n_values
    ]
    workers = workers or default_workers()
    if workers <= 1 or len(cells) == 1:
        return [_sweep_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(_sweep_cell, cells))


"""Geometric-phase extraction through a single control qubit."""

from __future__ import annotations

import numpy as np

from .. import fock
from .. import register as reg
from ..errors import EntanglementResidue, TruncationRisk
from ..phase_algebra import as_amplitude
from .qpe import _as_user_operation, working_cutoff_for


def geometric_phase_channel(alpha, beta, psi, phi, working_cutoff: int | None = None):
    """Controlled D(beta), then D(alpha) on the mode, then controlled D(-beta).

    ``alpha`` may be a complex amplitude, a ``PhasedDisplacement`` or a
    ``UserOperation`` (whose application count is then observable).
    Returns ``(qubit, mode)``. The final state must factor as
    ``(U psi) x (D(alpha) phi)`` with ``U = diag(1, e^{-2i theta})``; the
    mode factor's global phase is fixed against ``D(alpha) phi`` so the
    qubit factor carries all of it. Raises ``EntanglementResidue`` if the
    state does not factor.
    """
    user = _as_user_operation(alpha)
    alpha, beta = user.op.alpha, as_amplitude(beta)
    psi = np.asarray(psi, dtype=complex)
    phi = fock.normalize(np.asarray(phi, dtype=complex))
    N = working_cutoff or working_cutoff_for(len(phi), abs(alpha) + abs(beta))
    phi = fock.pad(phi, N)

    def guarded(s, step):
        leak = reg.mode_leakage(1, s)
        if leak > fock.LEAKAGE_LIMIT:
            raise TruncationRisk(f"mode leakage {leak:.3g} after {step}", leakage=leak, step=step, cutoff=N)
        return s

    state = reg.init_register([reg.Qubit(), reg.Mode(N)], [fock.normalize(psi), phi])
    state = guarded(reg.apply_qubit_controlled_displacement(0, 1, beta, state), "controlled D(beta)")
    state = guarded(user.on_mode(1, state), "user displacement")
    state = guarded(reg.apply_qubit_controlled_displacement(0, 1, -beta, state), "controlled D(-beta)")

    M = reg.split(state, 1)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    if s[1] > fock.TAU_TRUNC:
        raise EntanglementResidue(
            f"qubit and mode remain entangled (second Schmidt coefficient {s[1]:.3g})",
            schmidt=[float(x) for x in s],
        )
    qubit, mode = u[:, 0] * s[0], vh[0]
    ref = user.op.scalar() * (fock.displacement_matrix(alpha, N, fock.ANALYTIC) @ phi)
    overlap = np.vdot(ref, mode)
    gauge = abs(overlap) / overlap if abs(overlap) > 0 else 1.0
    return qubit / gauge, mode * gauge

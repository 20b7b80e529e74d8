from .attack import (
    BETA_IMAG,
    BETA_REAL,
    AttackReport,
    SweepRow,
    attack_sweep,
    keystroke_attack,
    recovered_phase,
)
from .channel import geometric_phase_channel
from .qpe import (
    CROSSKERR,
    EXACT,
    FOCK,
    JOINT,
    ANCILLA,
    QFT,
    QpeConfig,
    QpeOutcome,
    UserOperation,
    effective_theta,
    qpe_crosskerr,
    qpe_oneshot,
    qpe_outcome_distribution,
    qpe_standard,
    run_probes,
    theta_decomposition,
    working_cutoff_for,
)
from .superdense import DECODING, ENCODING, SuperdenseResult, bell_pair, superdense_dv

"""Two-qubit superdense coding: Bell pair, Pauli encoding, Bell-basis readout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import register as reg
from ..phase_algebra import PauliLetter

# The operator behind each label is the one whose encoded state the readout
# table below decodes: labels 10 and 11 carry i(|10> - |01>)/sqrt2 = (Y x I)|Phi+>
# and (|00> - |11>)/sqrt2 = (Z x I)|Phi+> respectively.
ENCODING = {
    "00": PauliLetter.I,
    "01": PauliLetter.X,
    "10": PauliLetter.Y,
    "11": PauliLetter.Z,
}

# raw ZZ outcome (sender qubit, receiver qubit) -> transmitted bits
DECODING = {"00": "00", "01": "01", "10": "11", "11": "10"}

_MATRICES = {
    PauliLetter.I: reg.PAULI_I,
    PauliLetter.X: reg.PAULI_X,
    PauliLetter.Y: reg.PAULI_Y,
    PauliLetter.Z: reg.PAULI_Z,
}


@dataclass(frozen=True, eq=False)
class SuperdenseResult:
    bits: str
    letter: PauliLetter
    raw_outcome: str
    decoded: str
    distribution: np.ndarray


def bell_pair() -> reg.RegisterState:
    state = reg.init_register([reg.Qubit(), reg.Qubit()], [0, 0])
    state = reg.apply_local(reg.HADAMARD, 0, state)
    return reg.apply_cnot(0, 1, state)


def superdense_dv(bits: str) -> SuperdenseResult:
    bits = str(bits)
    if bits not in ENCODING:
        raise ValueError(f"bits must be one of {sorted(ENCODING)}, got {bits!r}")
    letter = ENCODING[bits]
    state = bell_pair()
    state = reg.apply_local(_MATRICES[letter], 0, state)
    state = reg.apply_cnot(0, 1, state)
    state = reg.apply_local(reg.HADAMARD, 0, state)
    result = reg.measure((0, 1), state)
    raw = format(result.outcome, "02b")
    return SuperdenseResult(bits, letter, raw, DECODING[raw], result.distribution)

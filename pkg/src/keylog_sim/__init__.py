"""Simulator for keystroke logging on GKP-encoded superdense coding.

Two backends: exact displacement-operator algebra (``phase_algebra``) and
truncated Fock-space numerics (``fock`` + ``register``). ``protocols`` builds
the end-to-end procedures on top of both; ``cli`` runs them in batch.
"""

__version__ = "0.1.0"

"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermiticity: float = 1e-12
    trace: float = 1e-12
    norm: float = 1e-12
    psd_slack: float = 1e-10
    fidelity_symmetry: float = 1e-10
    # eigenvalues below this are treated as exact zeros when taking square roots
    eig_cutoff: float = 1e-13
    full_rank: float = 1e-12
    mode_threshold: float = 1e-14


TOL = Tolerances()

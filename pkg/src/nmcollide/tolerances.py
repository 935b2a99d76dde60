"""Numerical tolerances used by type validation and certification.

A single profile keeps every threshold in one auditable place. Functions
that validate or certify accept an optional profile and fall back to
``DEFAULT_TOLERANCES``, so experiment configs can tighten or relax the
whole stack coherently instead of scattering magic numbers.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceProfile:
    # max |A - A^dagger| entry for anything declared Hermitian
    hermiticity: float = 1e-12
    # |tr(rho) - 1| for density operators
    unit_trace: float = 1e-12
    # density-operator eigenvalues may dip to -positivity before rejection
    positivity: float = 1e-10
    # max |sum K^dagger K - 1| entry for Kraus channels
    kraus_completeness: float = 1e-10
    # Choi eigenvalues may dip to -choi_positivity in certification
    choi_positivity: float = 1e-10
    # residual imaginary part allowed when a result is provably real
    imaginary_residue: float = 1e-10


DEFAULT_TOLERANCES = ToleranceProfile()

"""Holevo quantity of the uniform-versus-imperfect string ensemble.

Both states in the game are diagonal in the computational basis, so the
Holevo quantity reduces to a Jensen-Shannon style entropy difference and
measuring every qubit in that basis attains it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .info_metrics import as_prob_vector, mutual_information_binary, shannon_entropy
from .rng_models import RngDistribution, mixture_states

SLACK = 1e-9


@dataclass(frozen=True)
class DiscriminationEnsemble:
    rho0: np.ndarray
    rho1: np.ndarray
    prior: float = 0.5

    def __post_init__(self):
        rho0 = as_prob_vector(self.rho0)
        rho1 = as_prob_vector(self.rho1)
        if rho0.shape != rho1.shape:
            raise ShapeError(f"state sizes differ: {rho0.size} vs {rho1.size}")
        if not 0.0 <= self.prior <= 1.0:
            raise DomainError(f"prior must lie in [0, 1], got {self.prior!r}")
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "rho1", rho1)

    @property
    def omega(self) -> float:
        return float(np.log2(self.rho0.size))

    @classmethod
    def from_generator(cls, d: RngDistribution) -> "DiscriminationEnsemble":
        rho0, rho1 = mixture_states(d)
        return cls(rho0, rho1)


def holevo_bound(e: DiscriminationEnsemble) -> float:
    """chi = H(mix) - prior H(rho0) - (1 - prior) H(rho1), in bits."""
    q = e.prior
    mix = q * e.rho0 + (1.0 - q) * e.rho1
    chi = shannon_entropy(mix) - q * shannon_entropy(e.rho0) - (1.0 - q) * shannon_entropy(e.rho1)
    return max(0.0, chi)


def accessible_information(e: DiscriminationEnsemble) -> float:
    """Information about X obtained by reading every qubit in the computational basis."""
    return mutual_information_binary(e.rho0, e.rho1, e.prior)


def check_deficit_bound(e: DiscriminationEnsemble) -> tuple[float, float, bool]:
    """Return ``(h, deficit / 2, h <= deficit / 2)`` for an equal-prior ensemble."""
    h = holevo_bound(e)
    half = 0.5 * max(0.0, e.omega - shannon_entropy(e.rho1))
    return h, half, h <= half + SLACK

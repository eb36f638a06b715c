"""Numerical tolerances and random number generation shared by every module."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

import numpy as np

HERM_TOL = 1e-9
PSD_TOL = 1e-9
EQ_TOL = 1e-8
TRACE_TOL = 1e-9

DEFAULT_SEED = 20240101
SEED_ENV_VAR = "QCORR_SEED"


@dataclass(frozen=True)
class Tolerances:
    """The tolerance block used by validation and by every zero test.

    ``herm``  : max entrywise |m - m^dagger| accepted as Hermitian.
    ``psd``   : most negative eigenvalue accepted as positive semidefinite.
    ``eq``    : Frobenius tolerance for matrix equalities (product, commutators).
    ``trace`` : accepted deviation of a trace from one.
    """

    herm: float = HERM_TOL
    psd: float = PSD_TOL
    eq: float = EQ_TOL
    trace: float = TRACE_TOL

    def replace(self, **changes: float) -> Tolerances:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()


def default_seed() -> int:
    """Seed from ``$QCORR_SEED`` when set, otherwise the package default."""
    value = os.environ.get(SEED_ENV_VAR)
    if value is None or value.strip() == "":
        return DEFAULT_SEED
    return int(value)


def make_rng(seed: int | np.random.Generator | None = None) -> np.random.Generator:
    """Return a PCG64 generator.

    All stochastic code goes through here so results are bit-reproducible for a
    given integer seed. Passing an existing generator returns it unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = default_seed()
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int | None, n: int) -> list[np.random.Generator]:
    """Independent child streams for parallel or per-task sampling."""
    if seed is None:
        seed = default_seed()
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]

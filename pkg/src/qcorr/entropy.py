"""Shannon and von Neumann entropies (base 2), conditional entropy and
mutual information of bipartite states."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import NotAProbabilityVector, NotPSD
from .settings import PSD_TOL
from .states import DensityMatrix

_CLAMP = 1e-12


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def shannon(p) -> float:
    """H(p) = -sum p log2 p with 0 log 0 = 0."""
    v = np.asarray(p, dtype=float).reshape(-1)
    if v.size == 0 or np.any(v < -_CLAMP) or abs(v.sum() - 1) > 1e-9:
        raise NotAProbabilityVector(f"not a probability vector: sum={v.sum():.12g}, min={v.min() if v.size else 'n/a'}")
    return _entropy_bits(np.clip(v, 0.0, 1.0))


def entropy_of_eigenvalues(w) -> float:
    """Entropy of a density-matrix spectrum after clamping PSD noise to zero."""
    v = np.asarray(w, dtype=float).reshape(-1)
    if v.size and v.min() < -PSD_TOL:
        raise NotPSD(f"eigenvalue {v.min():.3g} below -{PSD_TOL:.1g}", margin=float(v.min()))
    return _entropy_bits(np.clip(v, 0.0, 1.0))


def entropy_of_matrix(m) -> float:
    return entropy_of_eigenvalues(np.linalg.eigvalsh(m))


def von_neumann(rho: DensityMatrix) -> float:
    """S(rho) = -Tr rho log2 rho, evaluated as the Shannon entropy of the spectrum."""
    return entropy_of_eigenvalues(rho.spectrum.values)


@dataclass(frozen=True)
class EntropyReport:
    s_joint: float
    s_A: float
    s_B: float
    cond_A_given_B: float
    cond_B_given_A: float
    mutual: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def entropy_report(rho: DensityMatrix) -> EntropyReport:
    s_ab = von_neumann(rho)
    s_a = entropy_of_matrix(rho.reduced("A"))
    s_b = entropy_of_matrix(rho.reduced("B"))
    return EntropyReport(
        s_joint=s_ab,
        s_A=s_a,
        s_B=s_b,
        cond_A_given_B=s_ab - s_b,
        cond_B_given_A=s_ab - s_a,
        mutual=s_a + s_b - s_ab,
    )


def conditional_entropy(rho: DensityMatrix, given: str = "B") -> float:
    """S(A|B) for ``given="B"`` and S(B|A) for ``given="A"``."""
    r = entropy_report(rho)
    return r.cond_A_given_B if given.upper() == "B" else r.cond_B_given_A


def mutual_information(rho: DensityMatrix) -> float:
    return entropy_report(rho).mutual


def batch_entropy(eigs: np.ndarray) -> np.ndarray:
    """Row-wise entropy of a stack of eigenvalue vectors."""
    p = np.clip(eigs, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)

"""Absolute (unitary-orbit invariant) properties.

The closed-form criteria take only an ordered spectrum. ``falsify_absolute``
searches for a conjugation that breaks the ordinary property, which both
disproves absoluteness and cross-checks the closed forms.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .criteria import (
    batch_chsh_value,
    batch_discord_residual,
    batch_ppt_margin,
    batch_product_residual,
    batch_steering_value,
    chsh_max,
    is_ppt,
    is_product,
    steerable_three,
    zero_discord_blocks,
)
from .entropy import batch_entropy, entropy_of_eigenvalues, entropy_report
from .errors import BadSpectrum, BudgetExhausted, DimensionMismatch, UnsupportedDims
from .linalg import Spectrum, dagger, hermitian_eig
from .settings import make_rng
from .states import DensityMatrix, UnitaryMatrix, cartan_core, haar_unitaries, make_density

MIXED_TOL = 1e-9
BREAK_MARGIN = -1e-6
BATCH = 256
CARTAN_POINTS = 8


class Method(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    SEARCH = "search"


@dataclass(frozen=True, eq=False)
class AbsoluteVerdict:
    holds: bool
    margin: float
    method: Method = Method.CLOSED_FORM
    counterexample: UnitaryMatrix | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.counterexample is not None and self.holds:
            raise ValueError("a verdict with a counterexample cannot hold")

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"holds": bool(self.holds), "margin": float(self.margin), "method": self.method.value}
        if self.counterexample is not None:
            out["counterexample"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.counterexample.matrix]
        if self.details:
            out["details"] = {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.details.items()}
        return out


def _closed(margin: float, **details) -> AbsoluteVerdict:
    margin = float(margin)
    return AbsoluteVerdict(margin >= 0, margin, Method.CLOSED_FORM, None, details)


def _spectrum(spec, length: int | None = None) -> np.ndarray:
    s = spec if isinstance(spec, Spectrum) else Spectrum.from_values(spec)
    s.check_density()
    if length is not None and len(s) != length:
        raise BadSpectrum(f"expected {length} eigenvalues, got {len(s)}")
    return np.clip(s.values, 0.0, None)


# --------------------------------------------------------------------------
# Closed-form criteria
# --------------------------------------------------------------------------


def absolutely_separable_2xn(spec, n: int = 2) -> AbsoluteVerdict:
    """Absolute separability on C^2 (x) C^n: d1 - d_{2n-1} - 2 sqrt(d_{2n-2} d_{2n}) <= 0."""
    if n < 2:
        raise BadSpectrum(f"n must be at least 2, got {n}")
    d = _spectrum(spec, 2 * n)
    value = d[0] - d[2 * n - 2] - 2 * math.sqrt(d[2 * n - 3] * d[2 * n - 1])
    return _closed(-value)


@dataclass(frozen=True)
class OrderingPair:
    """Bijections S+ -> {1..p+} and S- -> {1..p-}, stored as tuples of index pairs
    listed in the order of their images."""

    sigma_plus: tuple[tuple[int, int], ...]
    sigma_minus: tuple[tuple[int, int], ...]

    def __post_init__(self):
        p = max((max(k, l) for k, l in self.sigma_plus), default=0)
        plus = {(k, l) for k in range(1, p + 1) for l in range(k, p + 1)}
        minus = {(k, l) for k in range(1, p + 1) for l in range(k + 1, p + 1)}
        if len(self.sigma_plus) != len(plus) or set(self.sigma_plus) != plus:
            raise ValueError("sigma_plus is not a bijection on S+")
        if len(self.sigma_minus) != len(minus) or set(self.sigma_minus) != minus:
            raise ValueError("sigma_minus is not a bijection on S-")


@functools.lru_cache(maxsize=None)
def orderings(p: int) -> tuple[OrderingPair, ...]:
    plus = [(k, l) for k in range(1, p + 1) for l in range(k, p + 1)]
    minus = [(k, l) for k in range(1, p + 1) for l in range(k + 1, p + 1)]
    return tuple(
        OrderingPair(sp, sm) for sp in itertools.permutations(plus) for sm in itertools.permutations(minus)
    )


@functools.lru_cache(maxsize=None)
def _lambda_index_tensor(p: int, mn: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalue indices (0-based) and signs of every Lambda entry, for each ordering."""
    pairs = orderings(p)
    idx = np.zeros((len(pairs), p, p), dtype=int)
    sign = np.zeros((len(pairs), p, p))
    for o, pair in enumerate(pairs):
        for pos, (k, l) in enumerate(pair.sigma_plus, start=1):
            idx[o, k - 1, l - 1] = mn - pos  # lambda_{mn + 1 - sigma+}
            sign[o, k - 1, l - 1] = 1.0
        for pos, (l, k) in enumerate(pair.sigma_minus, start=1):
            idx[o, k - 1, l - 1] = pos - 1  # -lambda_{sigma-(l, k)}
            sign[o, k - 1, l - 1] = -1.0
    return idx, sign


def absolutely_ppt(spec, dims: tuple[int, int] = (2, 2)) -> AbsoluteVerdict:
    """Absolute PPT: Lambda + Lambda^T is PSD for every ordering pair.

    The margin is the smallest eigenvalue over all orderings. Enumeration is
    exact and limited to min(m, n) <= 3.
    """
    m, n = int(dims[0]), int(dims[1])
    p = min(m, n)
    if p > 3:
        raise UnsupportedDims(f"absolute PPT enumeration supports min(m, n) <= 3, got {m}x{n}")
    d = _spectrum(spec, m * n)
    idx, sign = _lambda_index_tensor(p, m * n)
    lam = sign * d[idx]
    sym = lam + np.swapaxes(lam, -1, -2)
    lows = np.linalg.eigvalsh(sym)[:, 0]
    worst = int(np.argmin(lows))
    return _closed(lows[worst], worst_ordering=worst, n_orderings=len(lows))


def local_margin(d: np.ndarray) -> np.ndarray:
    """1 - (2d1+2d2-1)^2 - (2d1+2d3-1)^2 along the last axis (descending order)."""
    return 1 - (2 * d[..., 0] + 2 * d[..., 1] - 1) ** 2 - (2 * d[..., 0] + 2 * d[..., 2] - 1) ** 2


def unsteerable3_margin(d: np.ndarray) -> np.ndarray:
    """1 - [3 sum d_i^2 - 2 sum_{i<j} d_i d_j] along the last axis."""
    sq = np.sum(d * d, axis=-1)
    cross = (np.sum(d, axis=-1) ** 2 - sq) / 2
    return 1 - (3 * sq - 2 * cross)


def unsteerable3_exact_margin(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d)
    vals = [sum(np.abs(1 - 2 * (d[..., i] + d[..., j])) for i in range(4) if i != j) for j in range(4)]
    return 1 - np.max(np.stack(vals, axis=-1), axis=-1) / math.sqrt(3)


def separable_margin(d: np.ndarray) -> np.ndarray:
    """-(d1 - d3 - 2 sqrt(d2 d4)) for two-qubit spectra along the last axis."""
    return -(d[..., 0] - d[..., 2] - 2 * np.sqrt(np.clip(d[..., 1] * d[..., 3], 0.0, None)))


def nnce_margin(d: np.ndarray) -> np.ndarray:
    return batch_entropy(d) - 1


def zero_discord_margin(d: np.ndarray, tol: float = MIXED_TOL) -> np.ndarray:
    dev = np.max(np.abs(d - 0.25), axis=-1)
    return np.where(dev <= tol, 0.0, -dev)


def absolutely_local(spec) -> AbsoluteVerdict:
    """CHSH locality of every state with this spectrum: (2d1+2d2-1)^2 + (2d1+2d3-1)^2 <= 1."""
    return _closed(local_margin(_spectrum(spec, 4)))


def absolutely_unsteerable3(spec) -> AbsoluteVerdict:
    """3 sum d_i^2 - 2 sum_{i<j} d_i d_j <= 1; symmetric in the eigenvalues."""
    return _closed(unsteerable3_margin(_spectrum(spec, 4)))


def absolutely_unsteerable3_exact(spec) -> AbsoluteVerdict:
    """Exact orbit test: max over U of ||t||_1 / sqrt(3) <= 1.

    The maximum is attained on Bell-diagonal states, where placing d_j on the
    singlet gives ||t||_1 = sum_{i != j} |1 - 2(d_i + d_j)|. The purity form in
    :func:`absolutely_unsteerable3` is sufficient for this, not necessary.
    """
    m = float(unsteerable3_exact_margin(_spectrum(spec, 4)))
    return _closed(m, max_steering_value=1 - m)


def absolutely_nonneg_cond_entropy(spec) -> AbsoluteVerdict:
    """S(A|B) >= 0 on the whole orbit iff S(rho) >= 1."""
    return _closed(nnce_margin(_spectrum(spec, 4)))


def absolutely_zero_discord(spec, tol: float = MIXED_TOL) -> AbsoluteVerdict:
    """Zero discord on the whole orbit only for the maximally mixed state."""
    d = _spectrum(spec, 4)
    return _closed(zero_discord_margin(d, tol), max_deviation=float(np.max(np.abs(d - 0.25))))


absolutely_classical_cc = absolutely_zero_discord
absolutely_classical_cq = absolutely_zero_discord
absolutely_classical_qc = absolutely_zero_discord
absolutely_product = absolutely_zero_discord
absolutely_zero_super_discord = absolutely_zero_discord


def necessary_family_step1(spec, tol: float = 1e-9) -> bool:
    """Some permutation satisfies d1 = 1/2 - d2 and d3 = d2."""
    d = np.asarray(spec.values if isinstance(spec, Spectrum) else spec, dtype=float)
    if d.shape != (4,):
        raise BadSpectrum(f"expected 4 eigenvalues, got shape {d.shape}")
    for p in itertools.permutations(d):
        if abs(p[0] - (0.5 - p[1])) <= tol and abs(p[2] - p[1]) <= tol:
            return True
    return False


# --------------------------------------------------------------------------
# Unitary search
# --------------------------------------------------------------------------


class Property(str, enum.Enum):
    SEPARABLE = "separable"
    LOCAL = "local"
    UNSTEERABLE3 = "unsteerable3"
    NONNEG_COND_ENTROPY = "nonneg-cond-entropy"
    ZERO_DISCORD = "zero-discord"
    PRODUCT = "product"


def _nce_margin(ms: np.ndarray, s_joint: float) -> np.ndarray:
    ra = np.einsum("...ijkj->...ik", ms.reshape(ms.shape[:-2] + (2, 2, 2, 2)))
    rb = np.einsum("...ijil->...jl", ms.reshape(ms.shape[:-2] + (2, 2, 2, 2)))
    sa = batch_entropy(np.linalg.eigvalsh(ra))
    sb = batch_entropy(np.linalg.eigvalsh(rb))
    return s_joint - np.maximum(sa, sb)


def batch_margin(prop: Property, ms: np.ndarray, s_joint: float | None = None) -> np.ndarray:
    """Ordinary-property margins (positive = holds) for a stack of two-qubit states."""
    prop = Property(prop)
    if prop is Property.SEPARABLE:
        return batch_ppt_margin(ms)
    if prop is Property.LOCAL:
        return 2 - batch_chsh_value(ms)
    if prop is Property.UNSTEERABLE3:
        return 1 - batch_steering_value(ms)
    if prop is Property.NONNEG_COND_ENTROPY:
        if s_joint is None:
            s_joint = float(batch_entropy(np.linalg.eigvalsh(ms).reshape(-1, 4)[0]))
        return _nce_margin(ms, s_joint)
    if prop is Property.ZERO_DISCORD:
        return -batch_discord_residual(ms, "A")
    return -batch_product_residual(ms)


def ordinary_margin(prop: Property, rho: DensityMatrix) -> float:
    """Scalar margin of the ordinary property via the public criteria."""
    prop = Property(prop)
    if prop is Property.SEPARABLE:
        return is_ppt(rho).margin
    if prop is Property.LOCAL:
        return -chsh_max(rho)[1].margin
    if prop is Property.UNSTEERABLE3:
        return -steerable_three(rho).margin
    if prop is Property.NONNEG_COND_ENTROPY:
        rep = entropy_report(rho)
        return min(rep.cond_A_given_B, rep.cond_B_given_A)
    if prop is Property.ZERO_DISCORD:
        return -float(zero_discord_blocks(rho, "A").witness["residual"])
    return -float(is_product(rho).witness["residual"])


CLOSED_FORMS: dict[Property, Callable[[Any], AbsoluteVerdict]] = {
    Property.SEPARABLE: absolutely_separable_2xn,
    Property.LOCAL: absolutely_local,
    Property.UNSTEERABLE3: absolutely_unsteerable3,
    Property.NONNEG_COND_ENTROPY: absolutely_nonneg_cond_entropy,
    Property.ZERO_DISCORD: absolutely_zero_discord,
    Property.PRODUCT: absolutely_product,
}


def _cartan_grid() -> np.ndarray:
    pts = np.linspace(0, 2 * math.pi, CARTAN_POINTS, endpoint=False)
    return np.array([cartan_core(a, b, c) for a in pts for b in pts for c in pts])


def _local_pairs(rng: np.random.Generator, n: int) -> np.ndarray:
    a = haar_unitaries(n, 2, rng)
    b = haar_unitaries(n, 2, rng)
    return np.einsum("nij,nkl->nikjl", a, b).reshape(n, 4, 4)


def _candidates(rng: np.random.Generator, grid: np.ndarray, start: int, n: int, cartan: bool) -> np.ndarray:
    if not cartan:
        return haar_unitaries(n, 4, rng)
    cores = grid[(start + np.arange(n)) % len(grid)]
    return _local_pairs(rng, n) @ cores @ _local_pairs(rng, n)


def _perturb(rng: np.random.Generator, base: np.ndarray, scale: float, n: int) -> np.ndarray:
    """Unitaries exp(i scale H) base with random Hermitian H, via the Cayley map."""
    g = rng.standard_normal((n, 4, 4)) + 1j * rng.standard_normal((n, 4, 4))
    h = (g + dagger(g)) * (scale / 4)
    eye = np.eye(4)
    cay = np.linalg.solve(eye + 0.5j * h, eye - 0.5j * h)
    return cay @ base


def falsify_absolute(
    rho: DensityMatrix,
    prop: Property | str,
    budget: int = 5000,
    seed=None,
    strict: bool = False,
) -> AbsoluteVerdict:
    """Search conjugations U rho U^dagger that break ``prop``.

    Half of the budget explores: the identity first, then alternating batches
    of Haar unitaries and Cartan-grid cores dressed with random local
    unitaries, all acting on the diagonalized state. The other half refines
    the best candidates by shrinking random unitary perturbations. A
    candidate counts only if its margin is below -1e-6; the first one in
    evaluation order is returned, so results are reproducible for a seed.
    """
    prop = Property(prop)
    if rho.dims != (2, 2):
        raise DimensionMismatch(f"search needs a two-qubit state, got dims {rho.dims}")
    if budget < 1:
        raise ValueError("budget must be positive")
    rng = make_rng(seed)
    spec, vecs = hermitian_eig(rho.matrix)
    d = np.clip(spec.values, 0.0, None)
    diag = np.diag(d).astype(complex)
    s_joint = entropy_of_eigenvalues(d)
    to_eigen = dagger(vecs)  # maps rho to diag(d)
    grid = _cartan_grid()

    used = 0
    best_margin = math.inf
    pool: list[tuple[float, np.ndarray]] = []

    def evaluate(us: np.ndarray):
        nonlocal used, best_margin, pool
        us = us[: budget - used]
        ms = us @ diag @ dagger(us)
        margins = batch_margin(prop, ms, s_joint)
        used += len(us)
        order = np.argsort(margins, kind="stable")[:8]
        pool = sorted(pool + [(float(margins[i]), us[i]) for i in order], key=lambda x: x[0])[:8]
        best_margin = min(best_margin, float(margins.min()))
        hit = np.flatnonzero(margins < BREAK_MARGIN)
        return (us[hit[0]], float(margins[hit[0]])) if hit.size else None

    found = evaluate(np.eye(4, dtype=complex)[None])
    explore = max(budget // 2, 1)
    k = 0
    while found is None and used < explore:
        found = evaluate(_candidates(rng, grid, (k // 2) * BATCH, min(BATCH, explore - used), cartan=k % 2 == 1))
        k += 1
    scale = 0.5
    while found is None and used < budget:
        seeds = [u for _, u in pool[:4]]
        per = max(BATCH // len(seeds), 1)
        batch = np.concatenate([_perturb(rng, u, scale, per) for u in seeds])
        found = evaluate(batch)
        scale = max(scale * 0.7, 1e-3)

    details = {"property": prop.value, "evaluated": used, "budget": budget}
    if found is not None:
        u = UnitaryMatrix(found[0] @ to_eigen)
        return AbsoluteVerdict(False, found[1], Method.SEARCH, u, details)
    if strict:
        raise BudgetExhausted(
            f"no conjugation breaking {prop.value} within {budget} candidates", best_margin,
            AbsoluteVerdict(True, best_margin, Method.SEARCH, None, details),
        )
    return AbsoluteVerdict(True, best_margin, Method.SEARCH, None, details)


def closed_form_verdict(prop: Property | str, spec) -> AbsoluteVerdict:
    return CLOSED_FORMS[Property(prop)](spec)


def conjugate_matrix(rho: DensityMatrix, u: UnitaryMatrix) -> DensityMatrix:
    return make_density(u.matrix @ rho.matrix @ dagger(u.matrix), rho.dims)

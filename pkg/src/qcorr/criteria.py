"""Basis-dependent property tests for bipartite states.

Every test returns a :class:`CriterionVerdict` whose ``margin`` is positive when
the named property holds and negative when it fails. Zero tests (product,
discord, super discord) report ``-residual`` and snap residuals inside the
tolerance to exactly ``0.0``, so ``holds == (margin >= 0)`` always.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .entropy import entropy_of_matrix, entropy_report
from .errors import (
    DimensionMismatch,
    InvalidInput,
    NotCyclicOrthogonal,
    NotProjector,
    NotPure,
)
from .linalg import (
    PAULIS,
    commutator,
    frobenius_norm,
    gell_mann,
    partial_trace,
    partial_transpose,
    swap_operator,
    tensor,
)
from .settings import EQ_TOL, PSD_TOL
from .states import DensityMatrix

SQRT3 = math.sqrt(3)


@dataclass(frozen=True)
class CriterionVerdict:
    holds: bool
    margin: float
    witness: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_margin(cls, margin: float, **witness) -> CriterionVerdict:
        margin = float(margin)
        return cls(margin >= 0, margin, witness)

    @classmethod
    def from_residual(cls, residual: float, tol: float, **witness) -> CriterionVerdict:
        residual = float(residual)
        margin = 0.0 if residual <= tol else -residual
        return cls(margin >= 0, margin, {"residual": residual, "tol": tol, **witness})

    def as_dict(self) -> dict[str, Any]:
        return {"holds": bool(self.holds), "margin": self.margin, "witness": _jsonable(self.witness)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _require_two_qubit(rho: DensityMatrix, what: str) -> None:
    if rho.dims != (2, 2):
        raise DimensionMismatch(f"{what} needs a two-qubit state, got dims {rho.dims}")


def _side(side: str) -> str:
    s = str(side).upper()
    if s not in ("A", "B"):
        raise InvalidInput(f"side must be 'A' or 'B', got {side!r}")
    return s


# --------------------------------------------------------------------------
# Fano-Bloch form
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FanoBlochForm:
    """Local Bloch vectors and correlation tensor, all defined by traces:
    a_m = Tr rho (s_m (x) I), b_n = Tr rho (I (x) s_n), t_mn = Tr rho (s_m (x) s_n)."""

    a: np.ndarray
    b: np.ndarray
    t: np.ndarray
    dims: tuple[int, int]

    def to_matrix(self) -> np.ndarray:
        da, db = self.dims
        ga, gb = gell_mann(da), gell_mann(db)
        ia, ib = np.eye(da), np.eye(db)
        m = np.eye(da * db, dtype=complex) / (da * db)
        m += sum(am * tensor(s, ib) for am, s in zip(self.a, ga)) / (2 * db)
        m += sum(bn * tensor(ia, s) for bn, s in zip(self.b, gb)) / (2 * da)
        for i, sa in enumerate(ga):
            for j, sb in enumerate(gb):
                m += self.t[i, j] * tensor(sa, sb) / 4
        return m


def fano_bloch(rho: DensityMatrix) -> FanoBlochForm:
    da, db = rho.dims
    ga, gb = gell_mann(da), gell_mann(db)
    m = rho.matrix
    ra, rb = rho.reduced("A"), rho.reduced("B")
    a = np.array([np.trace(ra @ s).real for s in ga])
    b = np.array([np.trace(rb @ s).real for s in gb])
    t = np.array([[np.trace(m @ tensor(sa, sb)).real for sb in gb] for sa in ga])
    return FanoBlochForm(a, b, t.reshape(len(ga), len(gb)), rho.dims)


_PAULI_PRODUCTS = np.array([[tensor(sa, sb) for sb in PAULIS] for sa in PAULIS])


def correlation_tensor(m: np.ndarray) -> np.ndarray:
    """t_mn for one 4x4 matrix or a stack of them."""
    return np.einsum("...ij,mnji->...mn", m, _PAULI_PRODUCTS).real


# --------------------------------------------------------------------------
# Product and separability
# --------------------------------------------------------------------------


def _realign(m: np.ndarray, da: int, db: int) -> np.ndarray:
    # R[(i, j), (k, l)] = rho[(i, k), (j, l)]; product states give rank one.
    return m.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)


def product_conditions(rho: DensityMatrix) -> np.ndarray:
    """Absolute residuals of the 36 bilinear conditions obeyed by two-qubit product states.

    Each condition equates two products of entries, i.e. a 2x2 minor of the
    realigned matrix. Ordering: pairs of entries of the first factor
    (ab, ac, ad, bc, bd, cd) outermost, pairs of the second (ef, eg, eh, fg, fh, gh)
    innermost. Item 12 is generated as m21 m42 = m22 m41.
    """
    _require_two_qubit(rho, "product_conditions")
    r = _realign(rho.matrix, 2, 2)
    out = []
    for p, q in itertools.combinations(range(4), 2):
        for s, u in itertools.combinations(range(4), 2):
            out.append(abs(r[p, s] * r[q, u] - r[p, u] * r[q, s]))
    return np.array(out)


def is_product(rho: DensityMatrix, tol: float = EQ_TOL) -> CriterionVerdict:
    """Product test via ||rho - rho_A (x) rho_B||_F <= tol."""
    residual = frobenius_norm(rho.matrix - tensor(rho.reduced("A"), rho.reduced("B")))
    witness = {}
    if rho.dims == (2, 2):
        witness["max_condition_residual"] = float(product_conditions(rho).max())
    return CriterionVerdict.from_residual(residual, tol, **witness)


def is_separable_pure(rho: DensityMatrix, tol: float = 1e-8, purity_tol: float = 1e-8) -> CriterionVerdict:
    """A pure bipartite state is separable iff its reduced state has zero entropy."""
    top = rho.spectrum.values[0]
    if abs(top - 1) > purity_tol:
        raise NotPure(f"largest eigenvalue {top:.12g} is not 1", margin=purity_tol - abs(top - 1))
    s_a = entropy_of_matrix(rho.reduced("A"))
    return CriterionVerdict.from_residual(s_a, tol, reduced_entropy=s_a)


def is_ppt(rho: DensityMatrix, tol: float = PSD_TOL) -> CriterionVerdict:
    """Positivity of the partial transpose; margin is its least eigenvalue.

    The verdict decides separability only for 2x2 and 2x3 systems.
    """
    lo = float(np.linalg.eigvalsh(partial_transpose(rho.matrix, rho.dims, "B"))[0])
    margin = 0.0 if -tol <= lo < 0 else lo
    decides = sorted(rho.dims) in ([2, 2], [2, 3])
    return CriterionVerdict.from_margin(margin, min_eigenvalue=lo, decides_separability=decides)


# --------------------------------------------------------------------------
# Nonlocality and steering (two qubits)
# --------------------------------------------------------------------------


def chsh_max(rho: DensityMatrix) -> tuple[float, CriterionVerdict]:
    """Maximal CHSH value 2 sqrt(mu1 + mu2) over all settings.

    ``mu1, mu2`` are the two largest eigenvalues of t^T t. The verdict is
    "nonlocal" with margin ``value - 2``.
    """
    _require_two_qubit(rho, "chsh_max")
    t = correlation_tensor(rho.matrix)
    mu = np.linalg.eigvalsh(t.T @ t)[::-1]
    value = 2 * math.sqrt(max(mu[0] + mu[1], 0.0))
    return value, CriterionVerdict.from_margin(value - 2, value=value, mu=mu)


def steering_value(rho: DensityMatrix) -> tuple[float, np.ndarray, np.ndarray]:
    """max over three direction pairs of |sum_i <A_i (x) B_i>| / sqrt(3).

    Equals the trace norm of t over sqrt(3): the optimum pairs the left and
    right singular vectors of t. Returns (value, alice_dirs, bob_dirs).
    """
    t = correlation_tensor(rho.matrix)
    u, s, vt = np.linalg.svd(t)
    return float(s.sum() / SQRT3), u.T, vt


def steerable_three(rho: DensityMatrix) -> CriterionVerdict:
    """Violation of the three-setting linear steering inequality (value > 1)."""
    _require_two_qubit(rho, "steerable_three")
    value, alice, bob = steering_value(rho)
    return CriterionVerdict.from_margin(value - 1, value=value, alice_directions=alice, bob_directions=bob)


# --------------------------------------------------------------------------
# Zero discord
# --------------------------------------------------------------------------


def zero_discord_dakic(rho: DensityMatrix, side: str = "A", tol: float = EQ_TOL) -> CriterionVerdict:
    """Two-qubit zero-discord test ||x||^2 + ||t||^2 - k_max = 0, K = x x^T + t t^T.

    ``side`` is the measured qubit: "A" uses the Bloch vector of A and tests
    D(B|A) = 0 (classical-quantum); "B" uses b and t^T and tests D(A|B) = 0.
    """
    _require_two_qubit(rho, "zero_discord_dakic")
    fb = fano_bloch(rho)
    if _side(side) == "A":
        x, t = fb.a, fb.t
    else:
        x, t = fb.b, fb.t.T
    k = np.outer(x, x) + t @ t.T
    value = float(x @ x + np.sum(t * t) - np.linalg.eigvalsh(k)[-1])
    return CriterionVerdict.from_residual(max(value, 0.0), tol, geometric_value=value)


def discord_blocks(m: np.ndarray, dims: Sequence[int], side: str = "A") -> list[np.ndarray]:
    """Square blocks whose joint normality/commutation decides zero discord.

    For ``side="B"`` (measurement on B, D(A|B)) these are the dB x dB blocks
    of rho indexed by A; for ``side="A"`` the dA x dA blocks indexed by B.
    """
    da, db = int(dims[0]), int(dims[1])
    if _side(side) == "A":
        sw = swap_operator(da, db)
        m = sw @ m @ sw.T
        outer, inner = db, da
    else:
        outer, inner = da, db
    return [m[i * inner:(i + 1) * inner, j * inner:(j + 1) * inner] for i in range(outer) for j in range(outer)]


def zero_discord_blocks(rho: DensityMatrix, side: str = "A", tol: float | None = None) -> CriterionVerdict:
    """Zero discord with measurement on ``side``: every block normal, all blocks commuting.

    Works for any dimensions. Default tolerance 1e-8 (1 + ||rho||_F).
    """
    if tol is None:
        tol = EQ_TOL * (1 + frobenius_norm(rho.matrix))
    blocks = discord_blocks(rho.matrix, rho.dims, side)
    worst, where = 0.0, None
    for i, blk in enumerate(blocks):
        r = frobenius_norm(commutator(blk, blk.conj().T))
        if r > worst:
            worst, where = r, ("normal", i)
    for i, j in itertools.combinations(range(len(blocks)), 2):
        r = frobenius_norm(commutator(blocks[i], blocks[j]))
        if r > worst:
            worst, where = r, ("commute", i, j)
    return CriterionVerdict.from_residual(worst, tol, side=_side(side), worst=where)


class Classicality(str, enum.Enum):
    CC = "CC"
    CQ = "CQ"
    QC = "QC"
    QQ = "QQ"


def classify_ccq(rho: DensityMatrix) -> Classicality:
    """CC if both discords vanish, CQ if only D(B|A), QC if only D(A|B)."""
    cq = zero_discord_blocks(rho, "A").holds
    qc = zero_discord_blocks(rho, "B").holds
    if cq and qc:
        return Classicality.CC
    if cq:
        return Classicality.CQ
    if qc:
        return Classicality.QC
    return Classicality.QQ


# --------------------------------------------------------------------------
# Super discord
# --------------------------------------------------------------------------


def zero_super_discord(rho: DensityMatrix, tol: float = EQ_TOL) -> CriterionVerdict:
    """Zero super discord on both sides, decided by vanishing mutual information."""
    mutual = entropy_report(rho).mutual
    residual = max(mutual, 0.0)
    product = is_product(rho)
    return CriterionVerdict.from_residual(
        residual, tol, mutual=mutual, product_agrees=(residual <= tol) == product.holds
    )


# --------------------------------------------------------------------------
# KCBS contextuality
# --------------------------------------------------------------------------


def check_kcbs_projectors(projectors: Sequence, tol: float = 1e-9) -> list[np.ndarray]:
    ps = [np.asarray(p, dtype=complex) for p in projectors]
    if len(ps) != 5:
        raise InvalidInput(f"KCBS needs exactly five projectors, got {len(ps)}")
    d = ps[0].shape[0]
    if d < 3:
        raise DimensionMismatch(f"KCBS needs dimension >= 3, got {d}")
    for i, p in enumerate(ps):
        if p.shape != (d, d):
            raise DimensionMismatch(f"projector {i} has shape {p.shape}")
        if np.max(np.abs(p - p.conj().T)) > tol or np.max(np.abs(p @ p - p)) > tol:
            raise NotProjector(f"P{i} is not an orthogonal projector")
    for i in range(5):
        r = np.max(np.abs(ps[i] @ ps[(i + 1) % 5]))
        if r > tol:
            raise NotCyclicOrthogonal(f"P{i} P{(i + 1) % 5} != 0 (max entry {r:.3g})", margin=tol - r)
    return ps


def kcbs_value(state, projectors: Sequence, tol: float = 1e-9) -> tuple[float, CriterionVerdict]:
    """<psi| P0 + ... + P4 |psi> (or Tr(rho sum P)); contextual iff the value exceeds 2.

    ``state`` may be a state vector, a density matrix array or a
    :class:`DensityMatrix`.
    """
    ps = check_kcbs_projectors(projectors, tol)
    total = sum(ps)
    if isinstance(state, DensityMatrix):
        rho = state.matrix
    else:
        s = np.asarray(state, dtype=complex)
        if s.ndim == 1:
            s = s / np.linalg.norm(s)
            rho = np.outer(s, s.conj())
        else:
            rho = s
    if rho.shape != total.shape:
        raise DimensionMismatch(f"state of size {rho.shape[0]} vs projectors of size {total.shape[0]}")
    value = float(np.trace(rho @ total).real)
    return value, CriterionVerdict.from_margin(value - 2, value=value)


def kcbs_projectors(unitary=None) -> list[np.ndarray]:
    """The pentagram family in C^3: rank-one projectors on
    (cos t, sin t cos(4 pi j/5), sin t sin(4 pi j/5)) with cos^2 t = cos(pi/5)/(1 + cos(pi/5)).

    Reaches sqrt(5) on (1, 0, 0). An optional unitary rotates the family.
    """
    c2 = math.cos(math.pi / 5) / (1 + math.cos(math.pi / 5))
    ct, st = math.sqrt(c2), math.sqrt(1 - c2)
    out = []
    for j in range(5):
        ang = 4 * math.pi * j / 5
        v = np.array([ct, st * math.cos(ang), st * math.sin(ang)], dtype=complex)
        p = np.outer(v, v.conj())
        if unitary is not None:
            u = np.asarray(getattr(unitary, "matrix", unitary))
            p = u @ p @ u.conj().T
        out.append(p)
    return out


# --------------------------------------------------------------------------
# Vectorized margins for stacks of 4x4 states (used by the unitary search)
# --------------------------------------------------------------------------


def batch_ppt_margin(ms: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    lo = np.linalg.eigvalsh(partial_transpose(ms, (2, 2), "B"))[..., 0]
    return np.where((lo < 0) & (lo >= -tol), 0.0, lo)


def batch_chsh_value(ms: np.ndarray) -> np.ndarray:
    t = correlation_tensor(ms)
    mu = np.linalg.eigvalsh(np.swapaxes(t, -1, -2) @ t)
    return 2 * np.sqrt(np.clip(mu[..., -1] + mu[..., -2], 0.0, None))


def batch_steering_value(ms: np.ndarray) -> np.ndarray:
    return np.linalg.svd(correlation_tensor(ms), compute_uv=False).sum(axis=-1) / SQRT3


def batch_discord_residual(ms: np.ndarray, side: str) -> np.ndarray:
    """Largest block commutator norm per state (two qubits)."""
    if _side(side) == "A":
        sw = swap_operator(2, 2)
        ms = sw @ ms @ sw.T
    blocks = [ms[..., 2 * i:2 * i + 2, 2 * j:2 * j + 2] for i in range(2) for j in range(2)]
    worst = np.zeros(ms.shape[:-2])
    for blk in blocks:
        c = commutator(blk, np.conj(np.swapaxes(blk, -1, -2)))
        worst = np.maximum(worst, np.linalg.norm(c, axis=(-2, -1)))
    for x, y in itertools.combinations(blocks, 2):
        worst = np.maximum(worst, np.linalg.norm(commutator(x, y), axis=(-2, -1)))
    return worst


def batch_product_residual(ms: np.ndarray) -> np.ndarray:
    ra = partial_trace(ms, (2, 2), "A")
    rb = partial_trace(ms, (2, 2), "B")
    prod = np.einsum("...ij,...kl->...ikjl", ra, rb).reshape(ms.shape)
    return np.linalg.norm(ms - prod, axis=(-2, -1))

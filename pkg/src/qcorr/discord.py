"""Quantum discord by minimization over projective qubit measurements, and
weak (two-outcome, strength xi) measurements used by super discord."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .entropy import batch_entropy, entropy_of_matrix, entropy_report
from .errors import DimensionMismatch, InvalidProjectors
from .linalg import PAULIS, dagger, partial_trace, swap_operator, tensor
from .states import DensityMatrix, make_density

GRID = 64
N_REFINE = 5


def _measured_first(rho: DensityMatrix, side: str) -> tuple[np.ndarray, int, int]:
    """Matrix reordered so the measured subsystem is the first factor."""
    s = side.upper()
    da, db = rho.dims
    if s == "A":
        return rho.matrix, da, db
    if s == "B":
        sw = swap_operator(da, db)
        return sw @ rho.matrix @ sw.T, db, da
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def _directions(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


class _MeasuredEntropy:
    """S(other | {Pi_n, Pi_-n}) for projective qubit measurements along unit vectors n."""

    def __init__(self, m: np.ndarray, d_other: int):
        t = m.reshape(2, d_other, 2, d_other)
        self.reduced = np.einsum("ijik->jk", t)
        # Tr_meas((s_k (x) I) rho) for k = x, y, z
        self.parts = np.array([np.einsum("ji,iajb->ab", s, t) for s in PAULIS])

    def __call__(self, n: np.ndarray) -> np.ndarray:
        n = np.atleast_2d(n)
        shift = np.einsum("nk,kab->nab", n, self.parts)
        total = 0.0
        for sign in (1.0, -1.0):
            post = (self.reduced[None] + sign * shift) / 2
            p = np.trace(post, axis1=-2, axis2=-1).real
            eigs = np.linalg.eigvalsh(post)
            with np.errstate(divide="ignore", invalid="ignore"):
                normed = np.where(p[:, None] > 1e-15, eigs / np.where(p > 1e-15, p, 1.0)[:, None], 0.0)
            total = total + p * batch_entropy(normed)
        return total


@dataclass(frozen=True)
class DiscordResult:
    value: float
    raw_value: float
    direction: np.ndarray
    measured_entropy: float


def discord_details(rho: DensityMatrix, side: str = "A", grid: int = GRID, n_refine: int = N_REFINE) -> DiscordResult:
    """Discord with a projective measurement on the qubit ``side``.

    ``side="A"`` gives D(B|A) = I(A:B) - max_Pi [S(B) - S(B|Pi)]. The
    minimum of the measured conditional entropy is located on a ``grid`` x
    ``grid`` (theta, phi) mesh and polished by Nelder-Mead from the
    ``n_refine`` best mesh points.
    """
    m, dmeas, dother = _measured_first(rho, side)
    if dmeas != 2:
        raise DimensionMismatch(f"measured subsystem must be a qubit, got dimension {dmeas}")
    f = _MeasuredEntropy(m, dother)
    th, ph = np.meshgrid(np.linspace(0, math.pi, grid), np.linspace(0, 2 * math.pi, grid, endpoint=False), indexing="ij")
    th, ph = th.ravel(), ph.ravel()
    values = f(_directions(th, ph))
    best = np.argsort(values, kind="stable")[:n_refine]
    best_val, best_x = float(values[best[0]]), np.array([th[best[0]], ph[best[0]]])

    def obj(x):
        return float(f(_directions(np.array([x[0]]), np.array([x[1]])))[0])

    for i in best:
        res = minimize(obj, np.array([th[i], ph[i]]), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        if res.fun < best_val:
            best_val, best_x = float(res.fun), res.x
    rep = entropy_report(rho)
    s_meas = rep.s_A if side.upper() == "A" else rep.s_B
    raw = s_meas - rep.s_joint + best_val
    direction = _directions(np.array([best_x[0]]), np.array([best_x[1]]))[0]
    return DiscordResult(max(raw, 0.0), raw, direction, best_val)


def discord_numeric(rho: DensityMatrix, side: str = "A", grid: int = GRID, n_refine: int = N_REFINE) -> float:
    """D(B|A) for ``side="A"``, D(A|B) for ``side="B"``, in bits, clamped at 0."""
    return discord_details(rho, side, grid, n_refine).value


def measured_conditional_entropy(rho: DensityMatrix, direction, side: str = "A") -> float:
    """S(other | projective measurement along ``direction`` on ``side``)."""
    m, dmeas, dother = _measured_first(rho, side)
    if dmeas != 2:
        raise DimensionMismatch("measured subsystem must be a qubit")
    n = np.asarray(direction, dtype=float)
    return float(_MeasuredEntropy(m, dother)(n / np.linalg.norm(n))[0])


# --------------------------------------------------------------------------
# Weak measurements
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeakMeasurementPair:
    """P(+-xi) = sqrt((1 -+ tanh xi)/2) Pi1 + sqrt((1 +- tanh xi)/2) Pi2."""

    pi1: np.ndarray
    pi2: np.ndarray
    xi: float

    def __post_init__(self):
        p1 = np.asarray(self.pi1, dtype=complex)
        p2 = np.asarray(self.pi2, dtype=complex)
        tol = 1e-9
        if p1.shape != p2.shape or p1.shape[0] != p1.shape[1]:
            raise InvalidProjectors("projectors must be square and of equal size")
        for name, p in (("pi1", p1), ("pi2", p2)):
            if np.max(np.abs(p - p.conj().T)) > tol or np.max(np.abs(p @ p - p)) > tol:
                raise InvalidProjectors(f"{name} is not an orthogonal projector")
        if np.max(np.abs(p1 + p2 - np.eye(p1.shape[0]))) > tol:
            raise InvalidProjectors("pi1 + pi2 != identity")
        if not math.isfinite(self.xi):
            raise InvalidProjectors("strength xi must be finite")
        object.__setattr__(self, "pi1", p1)
        object.__setattr__(self, "pi2", p2)

    @classmethod
    def along(cls, direction, xi: float) -> WeakMeasurementPair:
        """Qubit pair with Pi1, Pi2 = (I +- n.sigma)/2."""
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        ns = sum(c * s for c, s in zip(n, PAULIS))
        return cls((np.eye(2) + ns) / 2, (np.eye(2) - ns) / 2, xi)

    def operators(self) -> tuple[np.ndarray, np.ndarray]:
        th = math.tanh(self.xi)
        lo, hi = math.sqrt((1 - th) / 2), math.sqrt((1 + th) / 2)
        return lo * self.pi1 + hi * self.pi2, hi * self.pi1 + lo * self.pi2


@dataclass(frozen=True, eq=False)
class WeakMeasurementOutcome:
    p_plus: float
    p_minus: float
    post_plus: DensityMatrix | None
    post_minus: DensityMatrix | None
    cond_entropy: float
    averaged: DensityMatrix


def weak_measure(rho: DensityMatrix, side: str, wm: WeakMeasurementPair) -> WeakMeasurementOutcome:
    """Apply P(+-xi) on ``side``.

    Probabilities are Tr((P^dagger P (x) I) rho); the post states are the
    normalized reduced states of the other subsystem, and ``averaged`` is the
    non-selective bipartite state sum_+- (P (x) I) rho (P (x) I)^dagger.
    """
    s = side.upper()
    da, db = rho.dims
    dmeas = da if s == "A" else db
    if wm.pi1.shape[0] != dmeas:
        raise DimensionMismatch(f"projectors act on dimension {wm.pi1.shape[0]}, subsystem {s} has {dmeas}")
    keep = "B" if s == "A" else "A"
    dkeep = db if s == "A" else da
    probs, posts, entropies = [], [], []
    avg = np.zeros_like(rho.matrix)
    for op in wm.operators():
        full = tensor(op, np.eye(db)) if s == "A" else tensor(np.eye(da), op)
        out = full @ rho.matrix @ dagger(full)
        avg = avg + out
        p = float(np.trace(out).real)
        probs.append(p)
        if p > 1e-15:
            post = make_density(partial_trace(out, rho.dims, keep) / p, (dkeep, 1))
            posts.append(post)
            entropies.append(p * entropy_of_matrix(post.matrix))
        else:
            posts.append(None)
            entropies.append(0.0)
    return WeakMeasurementOutcome(
        probs[0], probs[1], posts[0], posts[1], float(sum(entropies)), make_density(avg, rho.dims)
    )


def super_discord_at(rho: DensityMatrix, side: str, wm: WeakMeasurementPair) -> float:
    """I(A:B) - [S(other) - S(other | P(+-xi))] at the given projectors and strength.

    No optimization over projectors or strength is performed.
    """
    rep = entropy_report(rho)
    s_other = rep.s_B if side.upper() == "A" else rep.s_A
    return rep.mutual - (s_other - weak_measure(rho, side, wm).cond_entropy)

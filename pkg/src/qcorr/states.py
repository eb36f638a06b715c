"""Density matrices, named two-qubit families and unitary constructions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidInput,
    NotPSD,
    NotUnitary,
    NotUnitTrace,
    OutOfRange,
)
from .linalg import PAULIS, Spectrum, as_matrix, dagger, partial_trace, symmetrize, tensor
from .settings import DEFAULT_TOLERANCES, Tolerances, make_rng

UNITARY_TOL = 1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated bipartite state. Build with :func:`make_density`."""

    matrix: np.ndarray
    dims: tuple[int, int]

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def spectrum(self) -> Spectrum:
        return Spectrum.from_values(np.linalg.eigvalsh(self.matrix))

    def reduced(self, keep: str = "A") -> np.ndarray:
        return partial_trace(self.matrix, self.dims, keep)

    def is_two_qubit(self) -> bool:
        return self.dims == (2, 2)

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims}, spectrum={np.round(self.spectrum.values, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        u = as_matrix(self.matrix)
        if u.shape[0] != u.shape[1]:
            raise NotUnitary(f"unitary must be square, got {u.shape}")
        err = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
        if err > UNITARY_TOL:
            raise NotUnitary(f"||U^dagger U - I||_F = {err:.3g}", margin=UNITARY_TOL - err)
        object.__setattr__(self, "matrix", _frozen(u))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class CartanParams:
    """Angles of the nonlocal core exp(-i sum_k lambda_k s_k (x) s_k)."""

    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            v = getattr(self, name)
            if not (0.0 <= v <= 2 * math.pi):
                raise OutOfRange(f"{name}={v} outside [0, 2 pi]")


@dataclass(frozen=True)
class LocalSU2Params:
    """[[e^{i alpha} cos phi, e^{i beta} sin phi], [-e^{-i beta} sin phi, e^{-i alpha} cos phi]]."""

    alpha: float = 0.0
    beta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.alpha, self.beta, self.phi)):
            raise InvalidInput("SU(2) angles must be finite")

    def matrix(self) -> np.ndarray:
        a, b, p = self.alpha, self.beta, self.phi
        return np.array(
            [
                [np.exp(1j * a) * np.cos(p), np.exp(1j * b) * np.sin(p)],
                [-np.exp(-1j * b) * np.sin(p), np.exp(-1j * a) * np.cos(p)],
            ]
        )


def make_density(matrix, dims: Sequence[int] | None = None, tols: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
    """Validate and wrap a density matrix.

    The input is replaced by its Hermitian part before the trace and positivity
    checks. ``dims`` defaults to two equal factors when the size is a square.
    """
    m = as_matrix(matrix)
    h = symmetrize(m, tols.herm)
    n = h.shape[0]
    if dims is None:
        r = math.isqrt(n)
        if r * r != n:
            raise DimensionMismatch(f"size {n} is not a square; pass dims explicitly")
        dims = (r, r)
    dims = (int(dims[0]), int(dims[1]))
    if dims[0] * dims[1] != n:
        raise DimensionMismatch(f"dims {dims} do not match matrix size {n}")
    tr = float(np.trace(h).real)
    if abs(tr - 1) > tols.trace:
        raise NotUnitTrace(f"trace is {tr:.12g}", margin=tols.trace - abs(tr - 1))
    lo = float(np.linalg.eigvalsh(h)[0])
    if lo < -tols.psd:
        raise NotPSD(f"minimum eigenvalue {lo:.3g} is below -{tols.psd:.1g}", margin=lo)
    return DensityMatrix(_frozen(h), dims)


def pure_state(psi, dims: Sequence[int] | None = None) -> DensityMatrix:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return make_density(np.outer(v, v.conj()), dims)


def maximally_mixed(dims: Sequence[int] = (2, 2)) -> DensityMatrix:
    n = dims[0] * dims[1]
    return make_density(np.eye(n) / n, dims)


_BELL_VECTORS = {
    "phi+": np.array([1, 0, 0, 1]) / math.sqrt(2),
    "phi-": np.array([1, 0, 0, -1]) / math.sqrt(2),
    "psi+": np.array([0, 1, 1, 0]) / math.sqrt(2),
    "psi-": np.array([0, 1, -1, 0]) / math.sqrt(2),
}


def _bell_key(which: str) -> str:
    key = which.lower().replace("Φ", "phi").replace("φ", "phi").replace("Ψ", "psi").replace("ψ", "psi")
    key = key.replace("_plus", "+").replace("_minus", "-").replace("plus", "+").replace("minus", "-")
    if key not in _BELL_VECTORS:
        raise InvalidInput(f"unknown Bell state {which!r}; use phi+, phi-, psi+ or psi-")
    return key


def bell_vector(which: str) -> np.ndarray:
    return _BELL_VECTORS[_bell_key(which)].astype(complex)


def bell(which: str) -> DensityMatrix:
    """Projector onto one of the four Bell vectors (phi+, phi-, psi+, psi-)."""
    return pure_state(bell_vector(which), (2, 2))


def weyl(t1: float, t2: float, t3: float) -> DensityMatrix:
    """(I + sum_k t_k s_k (x) s_k) / 4, rejected outside the physical tetrahedron."""
    m = np.eye(4, dtype=complex)
    for t, s in zip((t1, t2, t3), PAULIS):
        m = m + t * tensor(s, s)
    return make_density(m / 4, (2, 2))


def bell_diagonal(p_phi_plus: float, p_phi_minus: float, p_psi_plus: float, p_psi_minus: float) -> DensityMatrix:
    w = np.array([p_phi_plus, p_phi_minus, p_psi_plus, p_psi_minus], dtype=float)
    m = sum(wi * np.outer(bell_vector(k), bell_vector(k).conj()) for wi, k in zip(w, _BELL_VECTORS))
    return make_density(m, (2, 2))


def bell_weights_to_weyl(p) -> tuple[float, float, float]:
    """Correlation coefficients of a Bell-diagonal mixture (phi+, phi-, psi+, psi-)."""
    p1, p2, p3, p4 = p
    return (p1 - p2 + p3 - p4, -p1 + p2 + p3 - p4, p1 + p2 - p3 - p4)


def weyl_to_bell_weights(t1: float, t2: float, t3: float) -> tuple[float, float, float, float]:
    return (
        (1 + t1 - t2 + t3) / 4,
        (1 - t1 + t2 + t3) / 4,
        (1 + t1 + t2 - t3) / 4,
        (1 - t1 - t2 - t3) / 4,
    )


def werner(w: float) -> DensityMatrix:
    """w |psi-><psi-| + (1 - w) I/4 for w in [-1/3, 1]."""
    if not (-1 / 3 - 1e-12 <= w <= 1 + 1e-12):
        raise OutOfRange(f"Werner parameter w={w} outside [-1/3, 1]")
    psi = bell_vector("psi-")
    m = w * np.outer(psi, psi.conj()) + (1 - w) * np.eye(4) / 4
    return make_density(m, (2, 2))


def gisin(lam: float, theta: float) -> DensityMatrix:
    """lam |psi_theta><psi_theta| + (1 - lam)(|00><00| + |11><11|)/2,
    with psi_theta = sin(theta)|01> + cos(theta)|10>."""
    if not (0 <= lam <= 1):
        raise OutOfRange(f"Gisin lambda={lam} outside [0, 1]")
    if not (-1e-12 <= theta <= math.pi / 2 + 1e-12):
        raise OutOfRange(f"Gisin theta={theta} outside [0, pi/2]")
    s, c = math.sin(theta), math.cos(theta)
    h = (1 - lam) / 2
    m = np.array(
        [
            [h, 0, 0, 0],
            [0, lam * s * s, lam * s * c, 0],
            [0, lam * s * c, lam * c * c, 0],
            [0, 0, 0, h],
        ],
        dtype=complex,
    )
    return make_density(m, (2, 2))


def haar_unitaries(n: int, d: int, seed=None) -> np.ndarray:
    """Stack of ``n`` Haar-distributed d x d unitaries, shape (n, d, d).

    QR of a complex Ginibre matrix, with each column rescaled by the phase of
    the matching diagonal entry of R so the result is exactly Haar.
    """
    rng = make_rng(seed)
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def haar_unitary(d: int, seed=None) -> UnitaryMatrix:
    if d < 1:
        raise InvalidInput(f"dimension must be >= 1, got {d}")
    return UnitaryMatrix(haar_unitaries(1, d, seed)[0])


def cartan_core(lambda1: float, lambda2: float, lambda3: float) -> np.ndarray:
    """Closed form of exp(-i(l1 XX + l2 YY + l3 ZZ)); the three terms commute."""
    em = np.exp(-1j * lambda3)
    cm, sm = math.cos(lambda1 - lambda2), math.sin(lambda1 - lambda2)
    cp, sp = math.cos(lambda1 + lambda2), math.sin(lambda1 + lambda2)
    off = sp * (math.sin(lambda3) - 1j * math.cos(lambda3))
    return np.array(
        [
            [em * cm, 0, 0, -1j * em * sm],
            [0, np.conj(em) * cp, off, 0],
            [0, off, np.conj(em) * cp, 0],
            [-1j * em * sm, 0, 0, em * cm],
        ],
        dtype=complex,
    )


def cartan_unitary(p: CartanParams) -> UnitaryMatrix:
    return UnitaryMatrix(cartan_core(p.lambda1, p.lambda2, p.lambda3))


def local_unitary(ua: LocalSU2Params, ub: LocalSU2Params) -> UnitaryMatrix:
    return UnitaryMatrix(tensor(ua.matrix(), ub.matrix()))


def cartan_compose(
    ua: LocalSU2Params,
    ub: LocalSU2Params,
    core: CartanParams,
    va: LocalSU2Params,
    vb: LocalSU2Params,
) -> UnitaryMatrix:
    """(U_A (x) U_B) U_g (V_A (x) V_B)."""
    m = tensor(ua.matrix(), ub.matrix()) @ cartan_core(core.lambda1, core.lambda2, core.lambda3)
    return UnitaryMatrix(m @ tensor(va.matrix(), vb.matrix()))


def conjugate(rho: DensityMatrix, u) -> DensityMatrix:
    """U rho U^dagger, keeping the factor dimensions of ``rho``."""
    um = u.matrix if isinstance(u, UnitaryMatrix) else as_matrix(u)
    if um.shape != rho.matrix.shape:
        raise DimensionMismatch(f"unitary {um.shape} does not act on state of size {rho.matrix.shape}")
    return make_density(um @ rho.matrix @ dagger(um), rho.dims)


def random_density(dims: Sequence[int] = (2, 2), rank: int | None = None, seed=None) -> DensityMatrix:
    """G G^dagger / Tr(G G^dagger) with G a complex Gaussian (dA dB) x rank matrix."""
    n = dims[0] * dims[1]
    rank = n if rank is None else rank
    if not (1 <= rank <= n):
        raise InvalidInput(f"rank must lie in [1, {n}], got {rank}")
    rng = make_rng(seed)
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    return make_density(m / np.trace(m).real, dims)


def random_pure(dims: Sequence[int] = (2, 2), seed=None) -> DensityMatrix:
    return random_density(dims, 1, seed)


def random_spectrum(n: int = 4, seed=None) -> Spectrum:
    """Uniform (flat Dirichlet) point of the probability simplex, sorted."""
    return Spectrum.from_values(make_rng(seed).dirichlet(np.ones(n)))


# JSON state format: {"dims": [dA, dB], "matrix": [[[re, im], ...], ...]}


def state_to_dict(rho: DensityMatrix) -> dict:
    m = rho.matrix
    return {
        "dims": list(rho.dims),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def state_from_dict(data: dict, tols: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
    if not isinstance(data, dict) or "matrix" not in data:
        raise InvalidInput("state JSON must be an object with a 'matrix' field")
    rows = data["matrix"]
    try:
        m = np.array([[complex(float(e[0]), float(e[1])) for e in row] for row in rows], dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise InvalidInput(f"matrix entries must be [re, im] pairs: {exc}") from exc
    dims = data.get("dims")
    return make_density(m, dims, tols)


def load_state(path: str | Path, tols: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return state_from_dict(data, tols)


def dump_state(rho: DensityMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(rho)) + "\n", encoding="utf-8")

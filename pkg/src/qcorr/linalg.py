"""Dense complex-matrix helpers: Hermitian eigensolver, tensor products,
partial trace and partial transpose on a bipartite split."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import BadSpectrum, DimensionMismatch, InvalidInput, NotHermitian, NotSquare
from .settings import HERM_TOL

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalues sorted in descending order."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise BadSpectrum("spectrum contains non-finite values")
        if np.any(np.diff(v) > 0):
            raise BadSpectrum("spectrum must be sorted in descending order")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values) -> Spectrum:
        """Sort arbitrary eigenvalues into a spectrum."""
        v = np.asarray(values, dtype=float).reshape(-1)
        return cls(np.sort(v)[::-1])

    def check_density(self, tol: float = 1e-9) -> Spectrum:
        """Raise :class:`BadSpectrum` unless this can be a density-matrix spectrum."""
        v = self.values
        if v.size == 0:
            raise BadSpectrum("empty spectrum")
        if v[-1] < -tol or v[0] > 1 + tol:
            raise BadSpectrum(f"eigenvalues outside [0, 1]: min {v[-1]:.3g}, max {v[0]:.3g}")
        if abs(v.sum() - 1) > tol:
            raise BadSpectrum(f"eigenvalues sum to {v.sum():.12g}, not 1", margin=v.sum() - 1)
        return self

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self) -> Iterator[float]:
        return iter(self.values.tolist())

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise InvalidInput(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix contains NaN or Inf")
    return a


def _check_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix of shape {a.shape} is not square")


def hermiticity_error(m) -> float:
    a = as_matrix(m)
    _check_square(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def symmetrize(m, tol: float = HERM_TOL) -> np.ndarray:
    """Return (m + m^dagger)/2, raising if ``m`` is not Hermitian within ``tol``."""
    a = as_matrix(m)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"max |m - m^dagger| = {err:.3g} exceeds {tol:.1g}", margin=tol - err)
    return (a + a.conj().T) / 2


def hermitian_eig(m, tol: float = HERM_TOL) -> tuple[Spectrum, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns the spectrum in descending order and the unitary matrix whose
    columns are the matching eigenvectors.
    """
    h = symmetrize(m, tol)
    w, v = np.linalg.eigh(h)
    return Spectrum(w[::-1].copy()), v[:, ::-1].copy()


def eigvalsh_desc(m) -> np.ndarray:
    """Eigenvalues of an (already Hermitian) matrix or stack, largest first."""
    return np.linalg.eigvalsh(m)[..., ::-1]


def tensor(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _check_bipartite(rho: np.ndarray, dims: Sequence[int]) -> tuple[int, int]:
    if len(dims) != 2:
        raise DimensionMismatch(f"expected two factor dimensions, got {dims}")
    da, db = int(dims[0]), int(dims[1])
    if da < 1 or db < 1:
        raise DimensionMismatch(f"factor dimensions must be positive, got {dims}")
    if rho.shape[-2:] != (da * db, da * db):
        raise DimensionMismatch(f"matrix shape {rho.shape[-2:]} does not match dims {da}x{db}")
    return da, db


def _side(side: str) -> str:
    s = str(side).upper()
    if s not in ("A", "B"):
        raise InvalidInput(f"subsystem must be 'A' or 'B', got {side!r}")
    return s


def partial_trace(rho, dims: Sequence[int], keep: str = "A") -> np.ndarray:
    """Reduce a bipartite operator to subsystem ``keep``.

    Works on a single matrix or on a stack with leading batch axes.
    """
    r = np.asarray(rho, dtype=complex)
    da, db = _check_bipartite(r, dims)
    t = r.reshape(r.shape[:-2] + (da, db, da, db))
    if _side(keep) == "A":
        return np.einsum("...ijkj->...ik", t)
    return np.einsum("...ijil->...jl", t)


def partial_transpose(rho, dims: Sequence[int], side: str = "B") -> np.ndarray:
    """Transpose the indices of one tensor factor.

    ``<m mu| rho^{T_B} |n nu> = <m nu| rho |n mu>``; ``side="A"`` swaps the
    first-factor indices instead.
    """
    r = np.asarray(rho, dtype=complex)
    da, db = _check_bipartite(r, dims)
    t = r.reshape(r.shape[:-2] + (da, db, da, db))
    nb = t.ndim - 4
    ax = list(range(nb))
    if _side(side) == "B":
        perm = ax + [nb, nb + 3, nb + 2, nb + 1]
    else:
        perm = ax + [nb + 2, nb + 1, nb, nb + 3]
    return t.transpose(perm).reshape(r.shape)


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"cannot commute shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m), ord="fro"))


def dagger(m) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(m), -1, -2))


def swap_operator(da: int, db: int) -> np.ndarray:
    """Permutation matrix mapping |i>|j> on A (x) B to |j>|i> on B (x) A."""
    s = np.zeros((da * db, da * db))
    for i in range(da):
        for j in range(db):
            s[j * da + i, i * db + j] = 1.0
    return s


def gell_mann(d: int) -> list[np.ndarray]:
    """Traceless Hermitian basis of su(d) with Tr(s_m s_n) = 2 delta_mn.

    Ordered symmetric, antisymmetric, diagonal per index pair, which for d = 2
    gives the Pauli matrices x, y, z in that order.
    """
    if d == 2:
        return [p.copy() for p in PAULIS]
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            mats += [s, a]
    for l in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:l] = 1
        diag[l] = -l
        mats.append(np.diag(diag) * np.sqrt(2 / (l * (l + 1))))
    return mats

"""Dense Hermitian linear algebra for small state spaces (dims <= 16).

Conventions used throughout the package:

* operators are dense complex ``numpy`` arrays,
* the inner product is the Hilbert-Schmidt pairing ``Tr(A^dag B)``,
* density matrices are unit-trace positive semidefinite arrays, with
  eigenvalues in ``[-1e-10, 0)`` clipped to zero on ingestion.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import RankDeficiencyError, ReconstructionError

HERMITICITY_WARN_TOL = 1e-9
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
ORTHONORMALITY_TOL = 1e-10

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_PAULI_BY_LETTER = {"I": PAULI_I, "0": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def as_hermitian(mat: np.ndarray, *, name: str = "operator") -> np.ndarray:
    """Coerce ``mat`` to a Hermitian array by symmetrization.

    File inputs carry rounding, so the symmetrized ``(A + A^dag)/2`` is
    returned; asymmetry above 1e-9 triggers a warning rather than an error.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {mat.shape}")
    asym = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if asym > HERMITICITY_WARN_TOL:
        warnings.warn(f"{name} deviates from Hermiticity by {asym:.3e}; symmetrizing", stacklevel=2)
    return 0.5 * (mat + mat.conj().T)


def is_hermitian(mat: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    mat = np.asarray(mat)
    return bool(np.max(np.abs(mat - mat.conj().T)) <= tol)


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product ``Tr(a^dag b)``, real for Hermitian inputs."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.vdot(a, b).real)


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input the sum of |eigenvalues|."""
    a = np.asarray(a, dtype=complex)
    if is_hermitian(a, tol=1e-9):
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Standard trace distance ``(1/2) ||a - b||_1``."""
    return 0.5 * trace_norm(np.asarray(a) - np.asarray(b))


def as_density_matrix(mat: np.ndarray, *, name: str = "state") -> np.ndarray:
    """Validate and normalize a density matrix.

    Trace must equal 1 within 1e-10 and the minimum eigenvalue must be
    >= -1e-10; eigenvalues in ``[-1e-10, 0)`` are clipped to zero.
    """
    rho = as_hermitian(mat, name=name)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} has trace {tr}, expected 1 within {TRACE_TOL}")
    vals, vecs = np.linalg.eigh(rho)
    if vals[0] < -PSD_TOL:
        raise ValueError(f"{name} has negative eigenvalue {vals[0]:.3e} below tolerance")
    if vals[0] < 0.0:
        vals = np.clip(vals, 0.0, None)
        rho = (vecs * vals) @ vecs.conj().T
        rho = rho / float(np.trace(rho).real)
    return rho


def project_to_state(mat: np.ndarray) -> tuple[np.ndarray, float]:
    """Project onto the PSD cone (clip negative eigenvalues, renormalize).

    Returns the projected state and the amount of negative weight removed,
    which is zero when the input already was a state.
    """
    herm = as_hermitian(mat)
    vals, vecs = np.linalg.eigh(herm)
    clipped = float(-np.sum(vals[vals < 0.0]))
    vals = np.clip(vals, 0.0, None)
    rho = (vecs * vals) @ vecs.conj().T
    tr = float(np.trace(rho).real)
    if tr <= 0.0:
        raise ValueError("projected operator has non-positive trace")
    return rho / tr, clipped


def pure_state(vec: np.ndarray) -> np.ndarray:
    """Rank-one density matrix |v><v| / <v|v>."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    n = np.vdot(v, v).real
    if n <= 0.0:
        raise ValueError("zero vector")
    return np.outer(v, v.conj()) / n


def tensor(*ops: np.ndarray) -> np.ndarray:
    return reduce(np.kron, [np.asarray(o, dtype=complex) for o in ops])


def pauli_string_operator(letters: str) -> np.ndarray:
    """Unnormalized Pauli tensor product for a string such as ``"XZ"`` or ``"0Y"``."""
    try:
        mats = [_PAULI_BY_LETTER[ch.upper()] for ch in letters]
    except KeyError as exc:
        raise ValueError(f"unknown Pauli letter in {letters!r}") from exc
    if not mats:
        raise ValueError("empty Pauli string")
    return tensor(*mats)


def operator_sqrt(e: np.ndarray) -> np.ndarray:
    """Positive square root of a PSD Hermitian operator.

    Eigenvalues in ``[-1e-10, 0)`` are clipped to zero; anything lower is an
    error.
    """
    e = as_hermitian(e, name="effect")
    vals, vecs = np.linalg.eigh(e)
    if vals[0] < -PSD_TOL:
        raise ValueError(f"operator is not PSD: min eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def bloch_from_qubit(rho: np.ndarray) -> tuple[float, float, float]:
    """Bloch coordinates of a qubit state, ``rho = (I + x sx + y sy + z sz)/2``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {rho.shape}")
    x = float(np.trace(rho @ PAULI_X).real)
    y = float(np.trace(rho @ PAULI_Y).real)
    z = float(np.trace(rho @ PAULI_Z).real)
    return x, y, z


def qubit_from_bloch(x: float, y: float, z: float) -> np.ndarray:
    r2 = x * x + y * y + z * z
    if r2 > 1.0 + 1e-10:
        raise ValueError(f"Bloch vector norm {np.sqrt(r2):.12f} outside the closed unit ball")
    return 0.5 * (PAULI_I + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


def vec_herm(mat: np.ndarray) -> np.ndarray:
    """Isometric real vectorization of a Hermitian matrix.

    Components: diagonal, then sqrt(2) * real and sqrt(2) * imaginary parts of
    the upper triangle, so Euclidean inner products equal HS inner products.
    """
    mat = np.asarray(mat, dtype=complex)
    d = mat.shape[0]
    iu = np.triu_indices(d, k=1)
    return np.concatenate(
        [mat.diagonal().real, np.sqrt(2.0) * mat[iu].real, np.sqrt(2.0) * mat[iu].imag]
    )


def unvec_herm(vec: np.ndarray, dim: int) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[np.diag_indices(dim)] = vec[:dim]
    iu = np.triu_indices(dim, k=1)
    k = iu[0].size
    upper = (vec[dim : dim + k] + 1j * vec[dim + k : dim + 2 * k]) / np.sqrt(2.0)
    mat[iu] = upper
    mat[(iu[1], iu[0])] = upper.conj()
    return mat


@dataclass(frozen=True)
class ObservableBasis:
    """A Hilbert-Schmidt orthonormal family of Hermitian operators.

    ``ops`` has shape (m, d, d). ``scale`` records the normalization factor
    relating normalized coordinates to raw operator units (e.g. sqrt(2^n) for
    Pauli product bases); expectations can be reported in either unit system.
    """

    ops: np.ndarray
    labels: tuple[str, ...]
    scale: float | None = None

    def __post_init__(self) -> None:
        ops = np.asarray(self.ops, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValueError(f"basis operators must have shape (m, d, d), got {ops.shape}")
        if len(self.labels) != ops.shape[0]:
            raise ValueError("one label per basis operator required")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "labels", tuple(self.labels))
        gram = np.einsum("aij,bji->ab", ops.conj().transpose(0, 2, 1), ops).real
        if np.max(np.abs(gram - np.eye(ops.shape[0]))) > ORTHONORMALITY_TOL:
            raise ValueError("basis is not HS-orthonormal within 1e-10")
        ops.setflags(write=False)

    @property
    def size(self) -> int:
        return self.ops.shape[0]

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    @property
    def is_traceless(self) -> bool:
        return bool(np.max(np.abs(np.trace(self.ops, axis1=1, axis2=2))) <= 1e-12)

    @property
    def is_complete(self) -> bool:
        return self.size == self.dim * self.dim

    def coords(self, rho: np.ndarray) -> np.ndarray:
        """Coordinate vector ``(Tr(rho H_1), ..., Tr(rho H_m))``."""
        rho = np.asarray(rho, dtype=complex)
        return np.einsum("ij,aji->a", rho, self.ops).real

    def coords_many(self, rhos: np.ndarray) -> np.ndarray:
        rhos = np.asarray(rhos, dtype=complex)
        return np.einsum("kij,aji->ka", rhos, self.ops).real

    def coefficients(self, a: np.ndarray) -> tuple[float, np.ndarray]:
        """Split a Hermitian operator into trace part and basis components.

        Returns ``(Tr(a)/d, c)`` with ``c_j = Tr(a H_j)``; the remainder of
        ``a`` is HS-orthogonal to ``span{I, H_1, ..., H_m}``.
        """
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.dim, self.dim):
            raise ValueError(f"operator dimension {a.shape} does not match basis dim {self.dim}")
        return float(np.trace(a).real) / self.dim, self.coords(a)

    def reconstruct(self, coords: np.ndarray, *, residual_tol: float = 1e-9) -> np.ndarray:
        """Trace-one Hermitian matrix with the given basis coordinates.

        For a traceless basis this is ``I/d + sum_j c_j H_j``; for a complete
        basis it is ``sum_j c_j H_j``. Otherwise the minimum-norm solution of
        the affine constraints is used and an inconsistency above
        ``residual_tol`` raises :class:`ReconstructionError`.
        """
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.size,):
            raise ValueError(f"expected {self.size} coordinates, got {coords.shape}")
        d = self.dim
        if self.is_traceless:
            return np.eye(d, dtype=complex) / d + np.tensordot(coords, self.ops, axes=1)
        a_rows = np.stack([vec_herm(op) for op in self.ops] + [vec_herm(np.eye(d, dtype=complex))])
        b = np.concatenate([coords, [1.0]])
        x, *_ = np.linalg.lstsq(a_rows, b, rcond=None)
        residual = float(np.max(np.abs(a_rows @ x - b)))
        if residual > residual_tol:
            raise ReconstructionError(
                f"coordinates are inconsistent with a trace-one operator (residual {residual:.3e})",
                residual=residual,
            )
        return unvec_herm(x, d)

    def reconstruct_many(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if self.is_traceless:
            eye = np.eye(self.dim, dtype=complex) / self.dim
            return eye[None, :, :] + np.tensordot(coords, self.ops, axes=([1], [0]))
        return np.stack([self.reconstruct(c) for c in coords])


def gram_schmidt(ops: list[np.ndarray] | np.ndarray, labels: list[str] | None = None) -> ObservableBasis:
    """HS-orthonormalize a linearly independent Hermitian family.

    Raises :class:`RankDeficiencyError` when a residual norm drops below
    1e-10 during orthogonalization.
    """
    mats = [as_hermitian(op) for op in ops]
    if not mats:
        raise ValueError("no operators given")
    if labels is None:
        labels = [f"h{i}" for i in range(len(mats))]
    out: list[np.ndarray] = []
    for i, mat in enumerate(mats):
        residual = mat.copy()
        for prev in out:
            residual = residual - hs_inner(prev, residual) * prev
        norm = hs_norm(residual)
        if norm < 1e-10:
            raise RankDeficiencyError(f"operator {i} is linearly dependent (residual norm {norm:.3e})")
        out.append(residual / norm)
    return ObservableBasis(ops=np.stack(out), labels=tuple(labels))


def pauli_product_basis(n_qubits: int) -> ObservableBasis:
    """The 4^n - 1 non-identity Pauli products, each divided by sqrt(2^n).

    Labels carry the unnormalized Pauli strings; the common normalization
    sqrt(2^n) is recorded in ``scale`` so expectations can be reported in raw
    Pauli units as ``scale * Tr(rho H_j)``.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    scale = float(np.sqrt(2.0**n_qubits))
    ops = []
    labels = []
    for letters in itertools.product("IXYZ", repeat=n_qubits):
        if all(ch == "I" for ch in letters):
            continue
        labels.append("".join(letters))
        ops.append(pauli_string_operator("".join(letters)) / scale)
    return ObservableBasis(ops=np.stack(ops), labels=tuple(labels), scale=scale)


def complete_hermitian_basis(dim: int) -> ObservableBasis:
    """Orthonormal basis of all dim x dim Hermitian matrices.

    Built from the diagonal projectors, the symmetric real parts (factor 1/2)
    and the antisymmetric imaginary parts (factor i/2) of the off-diagonal
    matrix units, then HS-orthonormalized.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    ops: list[np.ndarray] = []
    labels: list[str] = []
    for i in range(dim):
        proj = np.zeros((dim, dim), dtype=complex)
        proj[i, i] = 1.0
        ops.append(proj)
        labels.append(f"proj{i}")
    for i in range(dim):
        for k in range(i + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[i, k] = sym[k, i] = 0.5
            ops.append(sym)
            labels.append(f"sym{i}{k}")
    for i in range(dim):
        for k in range(i + 1, dim):
            asym = np.zeros((dim, dim), dtype=complex)
            asym[i, k] = 0.5j
            asym[k, i] = -0.5j
            ops.append(asym)
            labels.append(f"asym{i}{k}")
    return gram_schmidt(ops, labels)


def traceless_basis(dim: int) -> ObservableBasis:
    """Orthonormal basis of the traceless Hermitian matrices (dim^2 - 1 ops)."""
    if dim == 2:
        return pauli_product_basis(1)
    full = complete_hermitian_basis(dim)
    eye = np.eye(dim, dtype=complex)
    candidates = [op - np.trace(op) / dim * eye for op in full.ops]
    kept: list[np.ndarray] = []
    labels: list[str] = []
    for label, cand in zip(full.labels, candidates):
        residual = cand.copy()
        for prev in kept:
            residual = residual - hs_inner(prev, residual) * prev
        norm = hs_norm(residual)
        if norm >= 1e-10:
            kept.append(residual / norm)
            labels.append(label)
    if len(kept) != dim * dim - 1:
        raise RankDeficiencyError("traceless basis construction lost rank")
    return ObservableBasis(ops=np.stack(kept), labels=tuple(labels))

"""Finite-dimensional quantum states, measurements, and entropic quantities.

Density matrices are validated at construction (hermiticity and trace to
1e-12, spectrum above -1e-12) and keep a cached eigendecomposition.
Measurements come in two flavors: orthonormal bases (projective) and POVMs.
Incompatibility constants follow the overlap convention: probabilities of
the sharpest simultaneous localization, in [1/d, 1] for bases.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .entropy import DiscreteDistribution
from .errors import DimensionMismatchError, ValidationError

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-12
GRAM_ATOL = 1e-12
COMPLETENESS_ATOL = 1e-10
PROB_CLAMP = 1e-12
SUPPORT_ATOL = 1e-12


def _as_square_complex(matrix, what: str) -> np.ndarray:
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{what} must be a square matrix, got shape {arr.shape}")
    return arr


def _check_hermitian(arr: np.ndarray, what: str) -> None:
    dev = np.abs(arr - arr.conj().T).max()
    if dev > HERMITIAN_ATOL:
        raise ValidationError(f"{what} deviates from hermiticity by {dev:.3e}")


def _clamp_spectrum(eigenvalues: np.ndarray, what: str) -> np.ndarray:
    low = eigenvalues.min()
    if low < -PSD_ATOL:
        raise ValidationError(f"{what} has eigenvalue {low:.3e} below -{PSD_ATOL}")
    return np.clip(eigenvalues, 0.0, None)


class DensityMatrix:
    """Unit-trace positive semidefinite operator on C^d."""

    def __init__(self, matrix) -> None:
        arr = _as_square_complex(matrix, "density matrix")
        _check_hermitian(arr, "density matrix")
        trace = arr.trace()
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValidationError(f"trace is {trace!r}, expected 1")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.matrix = arr
        # spectrum is part of the type invariant, so validate it eagerly;
        # the decomposition is cached and reused by every entropy call
        _clamp_spectrum(self.eigenvalues, "density matrix")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _eig(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.matrix)
        w.setflags(write=False)
        v.setflags(write=False)
        return w, v

    @property
    def eigenvalues(self) -> np.ndarray:
        """Spectrum in ascending order (may carry -1e-12 dust; clamp before logs)."""
        return self._eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        """Unitary matrix whose columns match eigenvalues."""
        return self._eig[1]


class OrthonormalBasis:
    """Orthonormal basis with a distinct real outcome label per vector.

    ``vectors`` is a d x d complex matrix whose columns are the basis states;
    the Gram matrix must equal the identity entrywise to 1e-12.
    """

    def __init__(self, vectors, labels) -> None:
        arr = _as_square_complex(vectors, "basis")
        labels = np.asarray(labels, dtype=float).reshape(-1)
        if labels.size != arr.shape[1]:
            raise ValidationError(
                f"{labels.size} labels for {arr.shape[1]} basis vectors"
            )
        if np.unique(labels).size != labels.size:
            raise ValidationError("outcome labels must be distinct")
        gram = arr.conj().T @ arr
        dev = np.abs(gram - np.eye(arr.shape[0])).max()
        if dev > GRAM_ATOL:
            raise ValidationError(f"basis fails orthonormality by {dev:.3e}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        labels = np.ascontiguousarray(labels)
        labels.setflags(write=False)
        self.vectors = arr
        self.labels = labels

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


class Povm:
    """Positive operator-valued measure with real outcome labels.

    Elements must be PSD (spectrum above -1e-12) and sum to the identity
    entrywise within 1e-10.
    """

    def __init__(self, elements, labels) -> None:
        arrs = [np.asarray(e, dtype=complex) for e in elements]
        if not arrs:
            raise ValidationError("POVM needs at least one element")
        dim = arrs[0].shape[0]
        stack = np.empty((len(arrs), dim, dim), dtype=complex)
        for i, e in enumerate(arrs):
            e = _as_square_complex(e, f"POVM element {i}")
            if e.shape[0] != dim:
                raise DimensionMismatchError("POVM elements have mixed dimensions")
            _check_hermitian(e, f"POVM element {i}")
            w = np.linalg.eigvalsh(e)
            _clamp_spectrum(w, f"POVM element {i}")
            stack[i] = e
        labels = np.asarray(labels, dtype=float).reshape(-1)
        if labels.size != len(arrs):
            raise ValidationError(f"{labels.size} labels for {len(arrs)} elements")
        if np.unique(labels).size != labels.size:
            raise ValidationError("outcome labels must be distinct")
        total = stack.sum(axis=0)
        dev = np.abs(total - np.eye(dim)).max()
        if dev > COMPLETENESS_ATOL:
            raise ValidationError(f"POVM fails completeness by {dev:.3e}")
        stack.setflags(write=False)
        labels = np.ascontiguousarray(labels)
        labels.setflags(write=False)
        self.elements = stack
        self.labels = labels

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-Tr rho ln rho in nats, from the cached spectrum."""
    w = _clamp_spectrum(rho.eigenvalues, "density matrix")
    mask = w > 0.0
    return float(-(w[mask] @ np.log(w[mask])))


def quantum_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Umegaki relative entropy S(rho || sigma) = Tr rho (ln rho - ln sigma).

    Returns math.inf when rho has support outside the support of sigma
    (mass beyond 1e-12 on sigma's null space).
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(
            f"states have dimensions {rho.dim} and {sigma.dim}"
        )
    wr = _clamp_spectrum(rho.eigenvalues, "density matrix")
    ws = _clamp_spectrum(sigma.eigenvalues, "density matrix")
    # rho projected onto sigma's eigenbasis
    overlap = np.einsum(
        "ji,jk,ki->i", sigma.eigenvectors.conj(), rho.matrix, sigma.eigenvectors
    ).real
    overlap = np.clip(overlap, 0.0, None)
    null = ws <= 0.0
    if overlap[null].sum() > SUPPORT_ATOL:
        return math.inf
    mask_r = wr > 0.0
    tr_rho_ln_rho = float(wr[mask_r] @ np.log(wr[mask_r]))
    mask_s = ~null
    tr_rho_ln_sigma = float(overlap[mask_s] @ np.log(ws[mask_s]))
    return tr_rho_ln_rho - tr_rho_ln_sigma


def _finish_probabilities(raw: np.ndarray, labels: np.ndarray) -> DiscreteDistribution:
    if raw.min() < -PROB_CLAMP:
        raise ValidationError(f"measurement probability {raw.min():.3e} below clamp")
    probs = np.clip(raw, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise ValidationError(f"measurement probabilities sum to {total!r}")
    return DiscreteDistribution(outcomes=labels.copy(), probs=probs / total)


def measure_projective(rho: DensityMatrix, basis: OrthonormalBasis) -> DiscreteDistribution:
    """Born-rule outcome distribution of a projective measurement."""
    if rho.dim != basis.dim:
        raise DimensionMismatchError("state and basis dimensions differ")
    raw = np.einsum("ji,jk,ki->i", basis.vectors.conj(), rho.matrix, basis.vectors).real
    return _finish_probabilities(raw, basis.labels)


def measure_povm(rho: DensityMatrix, povm: Povm) -> DiscreteDistribution:
    """Born-rule outcome distribution p(x) = Tr(element_x rho)."""
    if rho.dim != povm.dim:
        raise DimensionMismatchError("state and POVM dimensions differ")
    raw = np.einsum("aij,ji->a", povm.elements, rho.matrix).real
    return _finish_probabilities(raw, povm.labels)


def measured_state(rho: DensityMatrix, basis: OrthonormalBasis) -> DensityMatrix:
    """Post-measurement (dephased) state sum_x <x|rho|x> |x><x|.

    Probabilities stay paired with their own basis vectors, independent of
    outcome-label ordering.
    """
    if rho.dim != basis.dim:
        raise DimensionMismatchError("state and basis dimensions differ")
    raw = np.einsum("ji,jk,ki->i", basis.vectors.conj(), rho.matrix, basis.vectors).real
    if raw.min() < -PROB_CLAMP:
        raise ValidationError(f"measurement probability {raw.min():.3e} below clamp")
    probs = np.clip(raw, 0.0, None)
    probs = probs / probs.sum()
    v = basis.vectors
    return DensityMatrix((v * probs) @ v.conj().T)


def max_overlap_pvm(basis_a: OrthonormalBasis, basis_b: OrthonormalBasis) -> float:
    """Incompatibility constant c = max_{x,z} |<x|z>|^2 for two bases."""
    if basis_a.dim != basis_b.dim:
        raise DimensionMismatchError("bases have different dimensions")
    overlaps = np.abs(basis_a.vectors.conj().T @ basis_b.vectors) ** 2
    return float(overlaps.max())


def _psd_sqrt(element: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(element)
    w = _clamp_spectrum(w, "POVM element")
    return (v * np.sqrt(w)) @ v.conj().T


def max_overlap_povm(povm_a: Povm, povm_b: Povm) -> float:
    """Incompatibility constant c = max_{x,z} || sqrt(A_x) sqrt(B_z) ||^2.

    The norm is the largest singular value; for rank-1 projector POVMs this
    reduces to the squared basis overlap.
    """
    if povm_a.dim != povm_b.dim:
        raise DimensionMismatchError("POVMs have different dimensions")
    roots_a = [_psd_sqrt(e) for e in povm_a.elements]
    roots_b = [_psd_sqrt(e) for e in povm_b.elements]
    best = 0.0
    for ra in roots_a:
        for rb in roots_b:
            s = np.linalg.svd(ra @ rb, compute_uv=False)[0]
            best = max(best, float(s) ** 2)
    return best


def thermal_state(hamiltonian, beta: float) -> DensityMatrix:
    """Gibbs state exp(-beta H) / Z, computed in the eigenbasis of H."""
    h = _as_square_complex(hamiltonian, "hamiltonian")
    _check_hermitian(h, "hamiltonian")
    if not (beta >= 0.0 and math.isfinite(beta)):
        raise ValidationError("inverse temperature must be finite and nonnegative")
    w, v = np.linalg.eigh(h)
    weights = np.exp(-beta * (w - w.min()))
    weights = weights / weights.sum()
    return DensityMatrix((v * weights) @ v.conj().T)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim)


def random_density_matrix(dim: int, rank: int, seed) -> DensityMatrix:
    """Random state G G^dag / Tr from a dim x rank complex Gaussian G.

    rank = 1 draws a Haar-random pure state, rank = dim a full-rank mixed
    state. ``seed`` is an int or a numpy Generator; fixed seeds reproduce.
    """
    if not (1 <= rank <= dim):
        raise ValidationError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / rho.trace())


def random_orthonormal_basis(dim: int, seed, labels=None) -> OrthonormalBasis:
    """Haar-random orthonormal basis via QR with phase-fixed diagonal."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    if labels is None:
        labels = np.arange(dim, dtype=float)
    return OrthonormalBasis(q, labels)


def computational_basis(dim: int, labels=None) -> OrthonormalBasis:
    if labels is None:
        labels = np.arange(dim, dtype=float)
    return OrthonormalBasis(np.eye(dim, dtype=complex), labels)


def fourier_basis(dim: int, labels=None) -> OrthonormalBasis:
    """Discrete Fourier basis, mutually unbiased with the computational one."""
    j = np.arange(dim)
    f = np.exp(2j * np.pi * np.outer(j, j) / dim) / math.sqrt(dim)
    if labels is None:
        labels = np.arange(dim, dtype=float)
    return OrthonormalBasis(f, labels)


def basis_to_povm(basis: OrthonormalBasis) -> Povm:
    """Rank-1 projector POVM carrying the same outcome labels."""
    v = basis.vectors
    elements = np.einsum("ia,ja->aij", v, v.conj())
    return Povm(elements, basis.labels.copy())

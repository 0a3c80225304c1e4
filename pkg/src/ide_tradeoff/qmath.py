"""Dense complex linear algebra and entropy primitives.

Matrices are plain ``numpy`` arrays. Computational-basis indices are
1-based in the docstrings (``|1>, ..., |d>``) and 0-based in code; the
erasure flag ``|0>`` of a ``(d+1)``-dimensional output occupies the last
row/column.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

STRUCT_TOL = 1e-9
PROB_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant."""


class ShapeError(ValueError):
    """Raised on incompatible matrix shapes."""


def boxplus(*mats) -> np.ndarray:
    """Sum of matrices after zero-padding each to the common maximal shape.

    Chained use ``boxplus(a, b, c)`` realizes ``a ⊞ b ⊞ c``.

    >>> boxplus([[1], [2]], [[3, 4]], [[5]]).real.tolist()
    [[9.0, 4.0], [2.0, 0.0]]
    """
    if not mats:
        raise ValueError("boxplus needs at least one operand")
    arrs = [np.atleast_2d(np.asarray(m, dtype=complex)) for m in mats]
    return reduce(_boxplus2, arrs)


def _boxplus2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    rows = max(a.shape[0], b.shape[0])
    cols = max(a.shape[1], b.shape[1])
    out = np.zeros((rows, cols), dtype=complex)
    out[: a.shape[0], : a.shape[1]] += a
    out[: b.shape[0], : b.shape[1]] += b
    return out


def check_prob_vec(p, tol: float = PROB_TOL) -> np.ndarray:
    """Return ``p`` as a float array after checking it is a pmf."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"probability vector must be 1-d and nonempty, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("probability vector has non-finite entries")
    if np.any(p < 0):
        raise ValidationError(f"probability vector has negative entry {p.min()!r}")
    if abs(p.sum() - 1.0) > tol:
        raise ValidationError(f"probability vector sums to {p.sum()!r}, not 1")
    return p


def check_density(rho, tol: float = STRUCT_TOL) -> np.ndarray:
    """Validate a density operator: square, Hermitian, unit trace, PSD."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"density operator must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValidationError("density operator has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > tol:
        raise ValidationError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValidationError(f"density operator has trace {np.trace(rho).real!r}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValidationError("density operator has a negative eigenvalue")
    return rho


def xlog2x(x) -> np.ndarray:
    """Elementwise ``x log2 x`` with ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


def shannon_entropy(p, tol: float = PROB_TOL) -> float:
    """Shannon entropy in bits."""
    p = check_prob_vec(p, tol)
    return float(-xlog2x(p).sum())


def spectrum(rho, tol: float = STRUCT_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix with tiny negatives clipped to zero."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > tol:
        raise ValidationError("matrix is not Hermitian")
    w = np.linalg.eigvalsh(rho)
    if w.size and w.min() < -tol:
        raise ValidationError(f"eigenvalue {w.min()!r} below -{tol}")
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho, tol: float = STRUCT_TOL) -> float:
    """Von Neumann entropy ``-Tr rho log2 rho`` in bits."""
    w = spectrum(rho, tol)
    return float(-xlog2x(w).sum())


def trace_norm(m) -> float:
    """Schatten 1-norm. Hermitian inputs go through ``eigvalsh``."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"trace norm needs a square matrix, got shape {m.shape}")
    if np.allclose(m, m.conj().T, rtol=0.0, atol=1e-12):
        return float(np.abs(np.linalg.eigvalsh(m)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def basis_ket(d: int, k: int) -> np.ndarray:
    """Computational basis vector ``|k>`` of C^d, ``k`` 1-based."""
    if not 1 <= k <= d:
        raise IndexError(f"basis index {k} outside [1, {d}]")
    v = np.zeros(d, dtype=complex)
    v[k - 1] = 1.0
    return v


def pauli_x(d: int) -> np.ndarray:
    """Cyclic shift ``X|k> = |k+1>`` with ``X|d> = |1>``."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def pauli_z(d: int) -> np.ndarray:
    """Clock operator ``Z|k> = exp(2 pi i (k-1)/d) |k>``."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def bell_state(d: int, i: int, j: int) -> np.ndarray:
    """Generalized Bell vector ``(X^i Z^j ⊗ I)|phi_00>`` of length ``d*d``.

    Ordering is ``A ⊗ B`` via ``np.kron``, so amplitude index ``a*d + b``
    belongs to ``|a+1>_A |b+1>_B``.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not (0 <= i < d and 0 <= j < d):
        raise IndexError(f"Bell indices ({i}, {j}) outside [0, {d - 1}]")
    phi00 = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    local = np.linalg.matrix_power(pauli_x(d), i) @ np.linalg.matrix_power(pauli_z(d), j)
    return np.kron(local, np.eye(d)) @ phi00


def bell_basis(d: int) -> np.ndarray:
    """All ``d*d`` Bell vectors as rows, row ``i*d + j`` holding ``phi_{i,j}``."""
    return np.array([bell_state(d, i, j) for i in range(d) for j in range(d)])


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())

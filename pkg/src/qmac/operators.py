"""Dense complex Hermitian linear algebra kernel.

Eigendecompositions, operator functions, tensor products, partial traces
and norms used by every other module.  Operators are plain complex numpy
arrays; functions validate the invariants they rely on (Hermiticity,
positivity, unit trace) and fail loudly instead of silently coercing.

All entropies produced downstream are in bits (log base 2).
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

# Tolerances separating numerical noise from genuine violations.
HERMITIAN_TOL = 1e-10   # max-entry deviation from the conjugate transpose
PSD_CLAMP = 1e-10       # eigenvalues in [-PSD_CLAMP, 0) are clamped to 0
PSD_HARD = 1e-6         # below -PSD_HARD an operator is genuinely not PSD
TRACE_TOL = 1e-10
ENTROPY_FLOOR = 1e-12   # eigenvalues below this are dropped from -sum(l*log l)
SUPPORT_FLOOR = 1e-12   # eigenvalues below this count as outside the support
POVM_SUM_TOL = 1e-8     # max-entry deviation of sum(elements) from identity


class ValidationError(ValueError):
    """An operator, distribution or table violates a documented invariant."""


def as_operator(a) -> np.ndarray:
    """Coerce to a square complex matrix with finite entries."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValidationError("matrix has non-finite entries")
    return a


def hermitize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (a + a†)/2; suppresses drift after operator functions."""
    return (a + a.conj().T) / 2


def check_hermitian(a, tol: float = HERMITIAN_TOL, name: str = "operator") -> np.ndarray:
    a = as_operator(a)
    dev = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if dev > tol:
        raise ValidationError(f"{name} is not Hermitian (max deviation {dev:.3e})")
    return a


def check_density(rho, tol: float = TRACE_TOL, name: str = "state") -> np.ndarray:
    """Validate a density matrix: Hermitian, eigenvalues >= -1e-10, trace 1."""
    rho = check_hermitian(rho, name=name)
    w = np.linalg.eigvalsh(hermitize(rho))
    if w[0] < -PSD_CLAMP:
        raise ValidationError(f"{name} has negative eigenvalue {w[0]:.3e}")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"{name} has trace {tr:.12g}, expected 1")
    return rho


def check_povm(elements: Sequence[np.ndarray], dim: int | None = None,
               name: str = "POVM") -> None:
    """Validate POVM elements: each PSD within 1e-10, summing to identity within 1e-8."""
    if not len(elements):
        raise ValidationError(f"{name} has no elements")
    mats = [check_hermitian(e, name=f"{name} element {i}") for i, e in enumerate(elements)]
    d = mats[0].shape[0] if dim is None else dim
    total = np.zeros((d, d), dtype=complex)
    for i, m in enumerate(mats):
        if m.shape[0] != d:
            raise ValidationError(f"{name} element {i} has dimension {m.shape[0]}, expected {d}")
        w = np.linalg.eigvalsh(hermitize(m))
        if w[0] < -PSD_CLAMP:
            raise ValidationError(f"{name} element {i} has negative eigenvalue {w[0]:.3e}")
        total += m
    dev = float(np.max(np.abs(total - np.eye(d))))
    if dev > POVM_SUM_TOL:
        raise ValidationError(f"{name} elements do not sum to identity (deviation {dev:.3e})")


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending, real) and unitary eigenvectors of a Hermitian operator.

    Satisfies a = V diag(w) V† up to ~1e-9 in max-entry norm.
    """
    a = check_hermitian(a)
    w, v = np.linalg.eigh(hermitize(a))
    return w, v


def op_sqrt(a) -> np.ndarray:
    """Operator square root of a PSD operator, clamping eigenvalue noise at zero."""
    w, v = eig_hermitian(a)
    if w.size and w[0] < -PSD_HARD:
        raise ValidationError(f"operator is not PSD (eigenvalue {w[0]:.3e}); no real square root")
    w = np.clip(w, 0.0, None)
    return hermitize((v * np.sqrt(w)) @ v.conj().T)


def pinv_sqrt(a, support_floor: float = SUPPORT_FLOOR,
              support_rtol: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Pseudo-inverse square root of a PSD operator and its support projector.

    Eigenvalues at or below max(support_floor, max_eig * support_rtol) are
    treated as null space; a nonzero relative cutoff keeps the inversion
    stable when the spectrum spans many orders of magnitude.  Returns
    (a^{-1/2} on supp, projector onto supp).
    """
    w, v = eig_hermitian(a)
    if w.size and w[0] < -PSD_HARD:
        raise ValidationError(f"operator is not PSD (eigenvalue {w[0]:.3e})")
    cutoff = max(support_floor, float(w[-1]) * support_rtol) if w.size else support_floor
    on = w > cutoff
    inv = np.where(on, 1.0 / np.sqrt(np.where(on, w, 1.0)), 0.0)
    root = hermitize((v * inv) @ v.conj().T)
    proj = hermitize((v * on.astype(float)) @ v.conj().T)
    return root, proj


def entropy_bits(rho) -> float:
    """Von Neumann entropy -Tr(rho log2 rho) in bits, with 0 log 0 := 0."""
    rho = check_density(rho)
    w = np.linalg.eigvalsh(hermitize(rho))
    w = w[w > ENTROPY_FLOOR]
    return float(-(w * np.log2(w)).sum())


def shannon_bits(p) -> float:
    """Shannon entropy of a probability vector in bits; zeros are dropped."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > ENTROPY_FLOOR]
    return float(-(p * np.log2(p)).sum())


def tensor(a, b) -> np.ndarray:
    """Kronecker product."""
    return np.kron(as_operator(a), as_operator(b))


def tensor_all(ops: Iterable[np.ndarray]) -> np.ndarray:
    mats = [as_operator(o) for o in ops]
    if not mats:
        return np.eye(1, dtype=complex)
    return reduce(np.kron, mats)


def partial_trace(a, factor_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out all tensor factors not listed in `keep`.

    Parameters
    ----------
    a : square matrix on the tensor product of the given factors
    factor_dims : dimension of each factor, in tensor order
    keep : indices (0-based) of the factors to retain; order of the result
        follows the original factor order.  An empty `keep` yields the 1x1
        matrix [[Tr a]].
    """
    a = as_operator(a)
    dims = [int(d) for d in factor_dims]
    if any(d < 1 for d in dims):
        raise ValidationError(f"factor dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if total != a.shape[0]:
        raise ValidationError(
            f"factor dimensions {dims} give total {total}, matrix has dimension {a.shape[0]}"
        )
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {len(dims)} factors")
    drop = [i for i in range(len(dims)) if i not in keep]
    out = a.reshape(dims + dims)
    for i in sorted(drop, reverse=True):
        out = np.trace(out, axis1=i, axis2=i + out.ndim // 2)
    size = int(np.prod([dims[k] for k in keep])) if keep else 1
    return out.reshape(size, size)


def trace_norm(a) -> float:
    """Trace norm of a Hermitian operator: sum of absolute eigenvalues."""
    a = check_hermitian(a)
    w = np.linalg.eigvalsh(hermitize(a))
    return float(np.abs(w).sum())

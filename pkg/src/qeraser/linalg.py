"""Dense complex linear algebra for the small (dim <= 16) problems of this package.

States and operators are plain :class:`numpy.ndarray` objects with complex
dtype. The helpers here add the checks and the two-qubit spectrum routine
that numpy does not provide directly.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import ContractViolation, DimensionError

STRUCT_TOL = 1e-12
DERIVED_TOL = 1e-10
# eigenvalues in [-CLAMP_TOL, 0) are roundoff; anything lower is a bug
CLAMP_TOL = 1e-10
# relative size below which a PSD eigenvalue is dropped from a square-root factor
FACTOR_CUTOFF = 1e-14

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)


def ket(amps: Sequence[complex]) -> np.ndarray:
    """Return ``amps`` as a read-only complex vector."""
    v = np.array(amps, dtype=complex).reshape(-1)
    v.setflags(write=False)
    return v


def basis(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    """Outer product ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def tensor(*operands: np.ndarray) -> np.ndarray:
    """Kronecker product of vectors or of matrices (not mixed).

    Examples
    --------
    >>> tensor(np.array([1, 0]), np.array([0, 1])).real
    array([0., 1., 0., 0.])
    """
    if not operands:
        raise DimensionError("tensor needs at least one operand")
    arrays = [np.asarray(op, dtype=complex) for op in operands]
    ndims = {a.ndim for a in arrays}
    if len(ndims) != 1 or ndims.pop() not in (1, 2):
        raise DimensionError("tensor operands must all be vectors or all be matrices")
    return reduce(np.kron, arrays)


def unit_scale(values) -> tuple[np.ndarray, int]:
    """Split complex ``values`` into ``(mantissa, e)`` with ``values == mantissa * 2**e``.

    The largest mantissa modulus lies in [0.5, 1). Scaling by an exact power
    of two keeps subnormal inputs finite, where dividing by their maximum
    modulus would overflow. All-zero input returns ``(zeros, 0)``.
    """
    v = np.asarray(values, dtype=complex)
    peak = float(np.abs(v).max()) if v.size else 0.0
    if peak == 0.0:
        return np.zeros_like(v), 0
    _, e = np.frexp(peak)
    e = int(e)
    return np.ldexp(v.real, -e) + 1j * np.ldexp(v.imag, -e), e


def _max_abs(m: np.ndarray) -> float:
    # nan propagates, so any comparison against a tolerance fails
    return float(np.abs(m).max()) if m.size else 0.0


def is_normalized(v: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    return abs(np.vdot(v, v).real - 1.0) <= tol


def is_hermitian(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and _max_abs(m - m.conj().T) <= tol


def is_unitary(u: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return _max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def is_density(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    """Hermitian, unit trace and eigenvalues no lower than ``-CLAMP_TOL``."""
    if not is_hermitian(m, tol):
        return False
    if abs(np.trace(m).real - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(m).min() >= -CLAMP_TOL)


def check_density(m: np.ndarray, name: str = "rho") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if not is_density(m):
        raise ContractViolation(f"{name} is not a valid density matrix")
    return m


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int] | int) -> np.ndarray:
    """Reduced density matrix over the registers listed in ``keep``.

    Parameters
    ----------
    rho : ndarray
        Square matrix on the tensor product of registers with sizes ``dims``.
    dims : sequence of int
        Register dimensions, in tensor order.
    keep : int or sequence of int
        Indices of the registers to keep. Kept registers stay in their
        original relative order.

    Returns
    -------
    ndarray
        Matrix of side ``prod(dims[k] for k in keep)``.
    """
    rho = np.asarray(rho, dtype=complex)
    dims = [int(d) for d in dims]
    keep = sorted({keep} if isinstance(keep, (int, np.integer)) else set(keep))
    n = int(np.prod(dims))
    if rho.shape != (n, n):
        raise DimensionError(f"matrix of shape {rho.shape} does not match register dims {dims}")
    if not keep:
        raise DimensionError("keep must name at least one register")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"register index out of range for dims {dims}")

    nreg = len(dims)
    t = rho.reshape(dims + dims)
    row = list(range(nreg))
    col = [nreg + k if k in keep else k for k in range(nreg)]
    out = [k for k in keep] + [nreg + k for k in keep]
    d = int(np.prod([dims[k] for k in keep]))
    return np.einsum(t, row + col, out).reshape(d, d)


def herm_eigvals(m: np.ndarray, tol: float = STRUCT_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, sorted nonincreasing."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        raise ContractViolation("herm_eigvals requires a Hermitian matrix")
    return np.linalg.eigvalsh(m)[::-1].copy()


def clamp_nonnegative(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < -CLAMP_TOL:
        raise ContractViolation(f"eigenvalue {values.min():.3e} is negative beyond roundoff")
    return np.where(values < 0.0, 0.0, values)


def psd_factor(m: np.ndarray) -> np.ndarray:
    """Return ``W`` with ``m = W W^dagger`` for a Hermitian PSD ``m``.

    Eigencomponents smaller than ``FACTOR_CUTOFF`` times the largest
    eigenvalue are dropped, so a rank-deficient input yields a thin factor
    instead of columns of size ``sqrt(roundoff)``.
    """
    w, v = np.linalg.eigh(np.asarray(m, dtype=complex))
    w = clamp_nonnegative(w)
    top = w.max() if w.size else 0.0
    keep = w > FACTOR_CUTOFF * max(top, 1.0)
    return v[:, keep] * np.sqrt(w[keep])


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """Wootters spin flip ``(sy x sy) rho* (sy x sy)`` of a two-qubit matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError("spin flip is defined for 4x4 matrices")
    return SIGMA_YY @ rho.conj() @ SIGMA_YY


def prod_spectrum_sqrt(rho: np.ndarray, rho_tilde: np.ndarray) -> np.ndarray:
    """Square roots of the eigenvalues of ``rho @ rho_tilde``, nonincreasing.

    Both arguments must be Hermitian PSD. With ``rho = W W^dagger`` and
    ``rho_tilde = Z Z^dagger`` the nonzero eigenvalues of the product equal
    the squared singular values of ``W^dagger Z``, so the singular values are
    returned directly. This avoids the square-root amplification of roundoff
    that a direct non-Hermitian eigensolve suffers near rank-deficient states.
    """
    rho = np.asarray(rho, dtype=complex)
    rho_tilde = np.asarray(rho_tilde, dtype=complex)
    if rho.shape != (4, 4) or rho_tilde.shape != (4, 4):
        raise DimensionError("prod_spectrum_sqrt expects two 4x4 matrices")
    if not (is_hermitian(rho) and is_hermitian(rho_tilde)):
        raise ContractViolation("prod_spectrum_sqrt requires Hermitian PSD operands")
    w = psd_factor(rho)
    z = psd_factor(rho_tilde)
    if w.shape[1] == 0 or z.shape[1] == 0:
        return np.zeros(4)
    s = np.linalg.svd(w.conj().T @ z, compute_uv=False)
    out = np.zeros(4)
    out[: min(4, s.size)] = np.sort(s)[::-1][:4]
    return out

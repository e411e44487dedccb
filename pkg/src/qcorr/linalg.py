"""Small dense Hermitian algebra for one- and two-qubit operators.

Everything here works on plain ``numpy`` arrays. Functions that accept a single
matrix also accept a stack of matrices with leading batch axes, which is how the
optimizers evaluate thousands of measurement directions at once.
"""
import math

import numba
import numpy as np

__all__ = [
    "HermiticityError",
    "IDENTITY",
    "PAULI",
    "check_hermitian",
    "eigenvalues_hermitian",
    "jacobi_eigh",
    "partial_trace",
    "pauli_compose",
    "pauli_decompose",
    "tensor_product",
    "trace_norm",
    "trace_norm_distance",
]

HERMITICITY_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
PARALLEL_MIN_BATCH = 512

# OpenMP is safe to enter from several Python threads at once
numba.config.THREADING_LAYER = "omp"

IDENTITY = np.eye(2, dtype=complex)
PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
# sigma_i (x) sigma_j for i, j in 0..3, shape (4, 4, 4, 4)
_PAULI_PAIRS = np.einsum("iab,jcd->ijacbd", PAULI, PAULI).reshape(4, 4, 4, 4)


class HermiticityError(ValueError):
    """Raised when a matrix is not Hermitian within tolerance.

    The largest entrywise deviation ``|m - m^H|`` is kept on ``asymmetry``.
    """

    def __init__(self, asymmetry, tol):
        self.asymmetry = float(asymmetry)
        self.tol = tol
        super().__init__(
            f"matrix is not Hermitian: max |m - m^H| = {self.asymmetry:.3e} > {tol:.1e}"
        )


def _as_square(m, dims=(2, 4)):
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")
    if dims is not None and m.shape[-1] not in dims:
        raise ValueError(f"expected dimension in {dims}, got {m.shape[-1]}")
    return m


def check_hermitian(m, tol=HERMITICITY_TOL):
    """Return ``(m + m^H) / 2`` after checking ``m`` is Hermitian within ``tol``."""
    m = _as_square(m, dims=None)
    mh = np.conj(np.swapaxes(m, -1, -2))
    asym = float(np.max(np.abs(m - mh))) if m.size else 0.0
    if asym > tol:
        raise HermiticityError(asym, tol)
    return 0.5 * (m + mh)


def tensor_product(a, b):
    """Kronecker product of two single-qubit operators."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor_product expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def partial_trace(m, subsystem):
    """Trace out ``subsystem`` ("A" = first qubit, "B" = second) of a 4x4 operator."""
    m = _as_square(m, dims=(4,))
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    if subsystem == "A":
        return np.einsum("...ijik->...jk", t)
    if subsystem == "B":
        return np.einsum("...ijkj->...ik", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


@numba.njit(cache=True)
def _jacobi_inplace(a, v, tol, max_sweeps):
    # Cyclic complex Jacobi: each (p, q) step is a phase fix on column q
    # followed by a real Givens rotation, so U = P R is unitary.
    # tol is absolute for unit-scale matrices and relative above that.
    n = a.shape[0]
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j].real ** 2 + a[i, j].imag ** 2
    tol = tol * max(1.0, math.sqrt(fro))
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if math.sqrt(off) < tol or sweep == max_sweeps:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                ph = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                u_qp = -s * ph.conjugate()
                u_qq = c * ph.conjugate()
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * c + akq * u_qp
                    a[k, q] = akp * s + akq * u_qq
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * c + vkq * u_qp
                    v[k, q] = vkp * s + vkq * u_qq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * ph * aqk
                    a[q, k] = s * apk + c * ph * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return max_sweeps


@numba.njit(cache=True)
def _jacobi_batch(mats, tol, max_sweeps):
    nb, n = mats.shape[0], mats.shape[1]
    vals = np.empty((nb, n))
    vecs = np.empty((nb, n, n), dtype=np.complex128)
    sweeps = np.empty(nb, dtype=np.int64)
    for b in range(nb):
        a = mats[b].copy()
        v = np.eye(n, dtype=np.complex128)
        sweeps[b] = _jacobi_inplace(a, v, tol, max_sweeps)
        d = np.empty(n)
        for i in range(n):
            d[i] = a[i, i].real
        order = np.argsort(d)
        for i in range(n):
            vals[b, i] = d[order[i]]
            for k in range(n):
                vecs[b, k, i] = v[k, order[i]]
    return vals, vecs, sweeps


@numba.njit(cache=True)
def _trace_norm_one(a, tol, max_sweeps):
    a = a.copy()
    v = np.eye(a.shape[0], dtype=np.complex128)
    _jacobi_inplace(a, v, tol, max_sweeps)
    s = 0.0
    for i in range(a.shape[0]):
        s += abs(a[i, i].real)
    return s


@numba.njit(cache=True)
def _trace_norm_serial(mats, tol, max_sweeps):
    out = np.empty(mats.shape[0])
    for b in range(mats.shape[0]):
        out[b] = _trace_norm_one(mats[b], tol, max_sweeps)
    return out


@numba.njit(cache=True, parallel=True)
def _trace_norm_parallel(mats, tol, max_sweeps):
    # each slot is written by exactly one iteration: results do not depend
    # on scheduling
    out = np.empty(mats.shape[0])
    for b in numba.prange(mats.shape[0]):
        out[b] = _trace_norm_one(mats[b], tol, max_sweeps)
    return out


def _stack(m):
    m = np.ascontiguousarray(m, dtype=np.complex128)
    return m.reshape((-1,) + m.shape[-2:]), m.shape[:-2]


def jacobi_eigh(m, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of Hermitian matrices by cyclic Jacobi rotations.

    The input is assumed Hermitian (see :func:`check_hermitian`). Sweeps stop
    once the off-diagonal Frobenius norm drops below ``1e-13`` (scaled by the
    matrix norm when that exceeds one) or after ``max_sweeps``.

    Returns:
        tuple: ``(values, vectors, sweeps)`` with eigenvalues ascending along
        the last axis, eigenvectors in the columns of ``vectors`` and the
        number of sweeps used per matrix.
    """
    flat, lead = _stack(m)
    vals, vecs, sweeps = _jacobi_batch(flat, JACOBI_TOL, max_sweeps)
    n = flat.shape[-1]
    return vals.reshape(lead + (n,)), vecs.reshape(lead + (n, n)), sweeps.reshape(lead)


def eigenvalues_hermitian(m, hermiticity_tol=HERMITICITY_TOL):
    """Real eigenvalues of a Hermitian matrix (or stack), sorted ascending.

    Raises:
        HermiticityError: if ``m`` deviates from ``m^H`` by more than
            ``hermiticity_tol`` in any entry.
    """
    m = check_hermitian(_as_square(m, dims=None), hermiticity_tol)
    return jacobi_eigh(m)[0]


def trace_norm(h):
    """Schatten 1-norm of a Hermitian operator: the sum of absolute eigenvalues."""
    flat, lead = _stack(h)
    kernel = _trace_norm_parallel if len(flat) >= PARALLEL_MIN_BATCH else _trace_norm_serial
    out = kernel(flat, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    return float(out[0]) if not lead else out.reshape(lead)


def trace_norm_distance(rho, tau, hermiticity_tol=HERMITICITY_TOL):
    """Trace-norm distance ``||rho - tau||_1``, with no factor of 1/2.

    Both arguments may carry matching (or broadcastable) batch axes.
    """
    rho = _as_square(rho, dims=None)
    tau = _as_square(tau, dims=None)
    if rho.shape[-1] != tau.shape[-1]:
        raise ValueError(f"dimension mismatch: {rho.shape[-1]} vs {tau.shape[-1]}")
    return trace_norm(check_hermitian(rho - tau, hermiticity_tol))


def pauli_decompose(m):
    """Real coefficients ``R`` with ``m = 1/4 sum_ij R[i, j] sigma_i (x) sigma_j``.

    Index 0 is the identity, 1..3 are x, y, z. For a unit-trace state
    ``R[0, 0] == 1``, ``R[k, 0]`` and ``R[0, k]`` are the local Bloch vectors
    and ``R[1:, 1:]`` is the correlation matrix.
    """
    m = _as_square(m, dims=(4,))
    r = np.einsum("ijab,...ba->...ij", _PAULI_PAIRS, m)
    return r.real


def pauli_compose(r):
    """Inverse of :func:`pauli_decompose`."""
    r = np.asarray(r, dtype=float)
    if r.shape[-2:] != (4, 4):
        raise ValueError(f"expected (..., 4, 4) coefficients, got {r.shape}")
    return 0.25 * np.einsum("...ij,ijab->...ab", r, _PAULI_PAIRS)

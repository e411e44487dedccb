"""Reference computations that share no code path with the package.

Eigenvalues come from LAPACK or from polynomial roots, measurement channels
are written out as explicit projector sums, and Bell-diagonal spectra use the
Bell-basis formula.
"""
import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMAS = (SX, SY, SZ)


def bell_state_matrix(c):
    m = np.kron(I2, I2).astype(complex)
    for ck, s in zip(c, SIGMAS):
        m = m + ck * np.kron(s, s)
    return m / 4


def bell_spectrum(c):
    """Eigenvalues of the Bell-diagonal state, one per Bell vector."""
    cx, cy, cz = c
    return np.sort(
        np.array(
            [
                1 - cx - cy - cz,  # singlet
                1 - cx + cy + cz,
                1 + cx - cy + cz,
                1 + cx + cy - cz,
            ]
        )
        / 4
    )


def char_poly_roots(m):
    """Eigenvalues as roots of the characteristic polynomial.

    Coefficients by Faddeev-LeVerrier (traces of powers), roots by
    ``numpy.roots``.
    """
    n = m.shape[0]
    coeffs = [1.0 + 0j]
    mk = np.zeros_like(m)
    for k in range(1, n + 1):
        mk = m @ (mk + coeffs[-1] * np.eye(n))
        coeffs.append(-np.trace(mk) / k)
    return np.sort(np.roots(coeffs).real)


def trace_norm_ref(h):
    return float(np.abs(np.linalg.eigvalsh(h)).sum())


def projector_ref(n, sign):
    ns = n[0] * SX + n[1] * SY + n[2] * SZ
    return (I2 + sign * ns) / 2


def measure_ref(rho, n):
    out = np.zeros((4, 4), dtype=complex)
    for sign in (+1, -1):
        p = np.kron(projector_ref(n, sign), I2)
        out += p @ rho @ p
    return out


def marginals_ref(rho):
    t = rho.reshape(2, 2, 2, 2)
    ra = np.trace(t, axis1=1, axis2=3)
    rb = np.trace(t, axis1=0, axis2=2)
    return ra, rb


def q_ref(rho, n):
    return trace_norm_ref(rho - measure_ref(rho, n))


def c_ref(rho, n):
    ra, rb = marginals_ref(rho)
    pi = np.kron(ra, rb)
    return trace_norm_ref(measure_ref(rho, n) - measure_ref(pi, n))


def total_ref(rho):
    ra, rb = marginals_ref(rho)
    return trace_norm_ref(rho - np.kron(ra, rb))


def random_state(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_bloch(rng, max_len=1.0):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * max_len * rng.uniform() ** (1 / 3)


def random_unitary(rng, dim=2):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_direction(rng, size=None):
    v = rng.normal(size=(3,) if size is None else (size, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_bell_vector(rng):
    while True:
        c = rng.uniform(-1, 1, 3)
        if bell_spectrum(c)[0] >= 0:
            return c

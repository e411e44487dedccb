"""Local projective measurements along Bloch-sphere directions."""
import numpy as np

from .linalg import IDENTITY, PAULI
from .states import TwoQubitState, as_state

__all__ = [
    "DirectionError",
    "check_direction",
    "direction_from_angles",
    "local_measure",
    "measure_matrix",
    "projector",
]

UNIT_TOL = 1e-12


class DirectionError(ValueError):
    pass


def check_direction(n, tol=UNIT_TOL):
    """Return ``n`` as a float array of unit 3-vectors (shape ``(3,)`` or ``(N, 3)``)."""
    n = np.asarray(n, dtype=float)
    if n.shape[-1:] != (3,) or n.ndim > 2:
        raise DirectionError(f"direction must have shape (3,) or (N, 3), got {n.shape}")
    dev = np.max(np.abs(np.linalg.norm(n, axis=-1) - 1.0))
    if not dev <= tol:
        raise DirectionError(f"direction is not a unit vector (| |n| - 1 | = {dev:.3e})")
    return n


def direction_from_angles(theta, phi):
    """Unit vector for polar angle ``theta`` and azimuth ``phi``."""
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _n_dot_sigma(n):
    return np.einsum("...k,kab->...ab", n, PAULI[1:])


def projector(n, sign):
    """``(I + n . sigma) / 2`` for sign "+" and ``(I - n . sigma) / 2`` for "-"."""
    n = check_direction(n)
    if sign in ("+", 1, +1):
        s = 1.0
    elif sign in ("-", -1):
        s = -1.0
    else:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return 0.5 * (IDENTITY + s * _n_dot_sigma(n))


def measure_matrix(m, n, subsystem="A"):
    """Apply the measurement channel to a raw 4x4 operator (no validation).

    ``m`` is a single operator or a stack broadcastable against the stack of
    directions ``n``. Uses ``sum_j P_j m P_j = (m + S m S) / 2`` with
    ``S = n . sigma`` on the measured qubit.
    """
    s = _n_dot_sigma(n)
    if subsystem == "A":
        s4 = np.einsum("...ab,cd->...acbd", s, IDENTITY)
    elif subsystem == "B":
        s4 = np.einsum("ab,...cd->...acbd", IDENTITY, s)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    s4 = s4.reshape(s4.shape[:-4] + (4, 4))
    return 0.5 * (m + s4 @ m @ s4)


def local_measure(rho, n, subsystem="A"):
    """Non-selective projective measurement of one qubit along ``n``.

    Measures the first qubit by default; pass ``subsystem="B"`` to measure
    the second. With a stack of directions, returns the stack of raw
    post-measurement matrices instead of a single state.
    """
    rho = as_state(rho)
    n = check_direction(n)
    out = measure_matrix(rho.matrix, n, subsystem)
    if n.ndim > 1:
        return out
    return TwoQubitState(out, "product" if rho.tag == "product" else "classical_quantum", rho.physical)

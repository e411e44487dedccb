"""Two-qubit density operators: Bell-diagonal states, the (c, c, 0) family,
marginal products and the ordering of correlation magnitudes."""
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    HERMITICITY_TOL,
    PAULI,
    check_hermitian,
    eigenvalues_hermitian,
    jacobi_eigh,
    partial_trace,
    pauli_compose,
    pauli_decompose,
)

__all__ = [
    "TAGS",
    "SortedCorrelations",
    "TwoQubitState",
    "UnphysicalStateError",
    "as_state",
    "bloch_state",
    "build_bell_diagonal",
    "build_rho_star",
    "classify",
    "marginal_product",
    "product_state",
    "sort_correlations",
]

PSD_TOL = 1e-12
TRACE_TOL = 1e-10
TAG_TOL = 1e-10
TIE_TOL = 1e-9

TAGS = ("general", "bell_diagonal", "classical_quantum", "product")
AXES = ("x", "y", "z")


class UnphysicalStateError(ValueError):
    """A candidate density operator has an eigenvalue below ``-1e-12``."""

    def __init__(self, min_eigenvalue, what="state"):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"{what} is not positive semidefinite: min eigenvalue {self.min_eigenvalue:.6g}"
        )


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """A validated 4x4 density operator.

    ``physical`` is False only for operators built on request with
    ``allow_unphysical=True``; they are still Hermitian with unit trace.
    """

    matrix: np.ndarray
    tag: str = "general"
    physical: bool = True
    eigenvalues: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        self.matrix.setflags(write=False)

    @property
    def correlations(self):
        """Pauli coefficient array, see :func:`qcorr.linalg.pauli_decompose`."""
        return pauli_decompose(self.matrix)

    @property
    def bell_vector(self):
        """``(c_x, c_y, c_z)`` for Bell-diagonal states, else None."""
        if self.tag != "bell_diagonal" and not _is_bell_diagonal(self.correlations):
            return None
        return np.diag(self.correlations)[1:].copy()


def _is_bell_diagonal(r, tol=TAG_TOL):
    off = r.copy()
    off[0, 0] = 0.0
    off[1:, 1:] -= np.diag(np.diag(r)[1:])
    return bool(np.all(np.abs(off) <= tol))


def classify(m, tol=TAG_TOL):
    """Tag a state by inspecting its Pauli coefficients.

    Returns one of ``product``, ``bell_diagonal``, ``classical_quantum`` or
    ``general``; the first matching tag in that order wins.
    """
    r = pauli_decompose(m)
    a, b, t = r[1:, 0], r[0, 1:], r[1:, 1:]
    if np.all(np.abs(t - np.outer(a, b)) <= tol):
        return "product"
    if _is_bell_diagonal(r, tol):
        return "bell_diagonal"
    # classical on the first qubit: local Bloch vector and every correlation
    # row share one axis, i.e. [a | T] has rank one
    s = np.linalg.svd(np.column_stack([a, t]), compute_uv=False)
    if s[1] <= tol:
        return "classical_quantum"
    return "general"


def _validate(m, what, allow_unphysical=False):
    m = check_hermitian(m, HERMITICITY_TOL)
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{what} has trace {tr:.12g}, expected 1")
    ev = eigenvalues_hermitian(m)
    if ev[0] < -PSD_TOL and not allow_unphysical:
        raise UnphysicalStateError(ev[0], what)
    return m, ev


def as_state(m, tag=None, allow_unphysical=False):
    """Validate a raw 4x4 matrix (or pass a :class:`TwoQubitState` through).

    Raises:
        HermiticityError: entries differ from the conjugate transpose by
            more than 1e-12.
        ValueError: wrong shape or trace not 1 within 1e-10.
        UnphysicalStateError: an eigenvalue is below -1e-12.
    """
    if isinstance(m, TwoQubitState):
        return m
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"two-qubit state must be 4x4, got shape {m.shape}")
    m, ev = _validate(m, "state", allow_unphysical)
    physical = bool(ev[0] >= -PSD_TOL)
    if physical and ev[0] < 0:
        # clip boundary noise: rebuild from the spectrum with negatives zeroed
        w, v, _ = jacobi_eigh(m)
        w = np.clip(w, 0.0, None)
        m = (v * (w / w.sum())) @ v.conj().T
        ev = np.clip(ev, 0.0, None)
    return TwoQubitState(m, tag or classify(m), physical, ev)


def build_bell_diagonal(c, allow_unphysical=False):
    """State ``1/4 [I (x) I + sum_k c_k sigma_k (x) sigma_k]``.

    Raises:
        UnphysicalStateError: if the correlation vector lies outside the
            tetrahedron of valid Bell-diagonal states.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (3,):
        raise ValueError(f"Bell vector must have 3 components, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("Bell vector must be finite")
    r = np.zeros((4, 4))
    r[0, 0] = 1.0
    r[1:, 1:] = np.diag(c)
    m = pauli_compose(r)
    m, ev = _validate(m, "Bell-diagonal state", allow_unphysical)
    tag = "product" if np.all(c == 0) else "bell_diagonal"
    physical = bool(ev[0] >= -PSD_TOL)
    if physical:
        ev = np.clip(ev, 0.0, None)
    return TwoQubitState(m, tag, physical, ev)


def build_rho_star(c, allow_unphysical=False):
    """The degenerate Bell-diagonal family with correlation vector ``(c, c, 0)``.

    Positivity requires ``0 <= c <= 1/2``; larger ``c`` raises unless
    ``allow_unphysical`` is set.
    """
    if c < 0:
        raise ValueError(f"c must be non-negative, got {c}")
    return build_bell_diagonal([c, c, 0.0], allow_unphysical)


def bloch_state(r):
    """Single-qubit operator ``(I + r . sigma) / 2``."""
    r = np.asarray(r, dtype=float)
    return 0.5 * (PAULI[0] + np.einsum("...k,kab->...ab", r, PAULI[1:]))


def product_state(a, b):
    """Validated ``rho_A (x) rho_B`` from two Bloch vectors."""
    ra, rb = bloch_state(a), bloch_state(b)
    return as_state(np.kron(ra, rb), tag="product")


def marginal_product(rho):
    """Product of the reduced states, ``tr_B(rho) (x) tr_A(rho)``."""
    rho = as_state(rho)
    ra = partial_trace(rho.matrix, "B")
    rb = partial_trace(rho.matrix, "A")
    return TwoQubitState(np.kron(ra, rb), "product", rho.physical)


@dataclass(frozen=True)
class SortedCorrelations:
    """Magnitudes ``|c_k|`` in descending order with their axes.

    ``ties`` maps axis pairs such as ``"xy"`` to whether the two magnitudes
    agree within 1e-9.
    """

    c_plus: float
    c_zero: float
    c_minus: float
    axis_plus: str
    axis_zero: str
    axis_minus: str
    ties: dict

    @property
    def has_tie(self):
        return any(self.ties.values())

    @property
    def top_tie(self):
        """True when the largest magnitude is not unique."""
        return abs(self.c_plus - self.c_zero) <= TIE_TOL


def sort_correlations(c):
    c = np.abs(np.asarray(c, dtype=float))
    if c.shape != (3,):
        raise ValueError(f"Bell vector must have 3 components, got shape {c.shape}")
    # stable on ties: x before y before z
    order = sorted(range(3), key=lambda k: -c[k])
    ties = {
        AXES[i] + AXES[j]: bool(abs(c[i] - c[j]) <= TIE_TOL)
        for i in range(3)
        for j in range(i + 1, 3)
    }
    return SortedCorrelations(
        c_plus=float(c[order[0]]),
        c_zero=float(c[order[1]]),
        c_minus=float(c[order[2]]),
        axis_plus=AXES[order[0]],
        axis_zero=AXES[order[1]],
        axis_minus=AXES[order[2]],
        ties=ties,
    )

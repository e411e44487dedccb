"""Quantum, classical and total correlations under the trace norm.

Three ways of assigning a (Q, C, T) triple to a two-qubit state live here:

* measurement based: one optimal measurement ``M`` is picked, either by
  minimizing Q (strategy a) or by maximizing C (strategy b), and the other
  quantity is read off at the same measurement;
* measurement independent: Q against the closest classical state, C from that
  classical state to its closest product state;
* independent optimization: Q is minimized and C is maximized separately,
  each over its own measurement direction.

Measurements are projective on one qubit and parameterized by a unit vector.
Directions ``n`` and ``-n`` give the same channel, so optimizers only search
the upper hemisphere.
"""
import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numba
import numpy as np
from scipy.optimize import minimize

from .linalg import JACOBI_MAX_SWEEPS, JACOBI_TOL, _jacobi_inplace, trace_norm
from .measurement import check_direction, measure_matrix
from .states import (
    AXES,
    TwoQubitState,
    as_state,
    bloch_state,
    build_bell_diagonal,
    marginal_product,
    product_state,
    sort_correlations,
)

__all__ = [
    "ApproximationWarning",
    "ClosedFormReference",
    "CorrelationTriple",
    "FRAMEWORKS",
    "OptimizationResult",
    "OptimizerSettings",
    "ProductSearchResult",
    "c_at",
    "c_prime_at",
    "canonical_direction",
    "closed_form_bell",
    "closest_product_search",
    "closest_product_to_single_axis_classical",
    "evaluate_all_frameworks",
    "fibonacci_hemisphere",
    "independent_optimization",
    "maximize_c",
    "minimize_q",
    "q_at",
    "total",
]

FRAMEWORKS = (
    "measurement_based_a",
    "measurement_based_b",
    "measurement_independent",
    "independent_optimization",
)
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
ZERO_C = 1e-12


class ApproximationWarning(UserWarning):
    """A value was obtained from a numeric search rather than a closed form."""


@dataclass(frozen=True)
class OptimizerSettings:
    """Knobs for the Bloch-sphere optimizers.

    Attributes:
        grid_points: hemisphere lattice size for the coarse scan.
        refine_tol: Nelder-Mead ``xatol``/``fatol``.
        refine_max_iters: Nelder-Mead iteration cap per start.
        seed: orients the local refinement charts; runs are reproducible.
        n_starts: number of best lattice nodes refined.
    """

    grid_points: int = 2000
    refine_tol: float = 1e-10
    refine_max_iters: int = 200
    seed: int = 0
    n_starts: int = 5

    def __post_init__(self):
        if int(self.grid_points) < 16:
            raise ValueError(f"grid_points must be >= 16, got {self.grid_points}")
        if not self.refine_tol > 0:
            raise ValueError(f"refine_tol must be positive, got {self.refine_tol}")
        if int(self.refine_max_iters) < 1 or int(self.n_starts) < 1:
            raise ValueError("refine_max_iters and n_starts must be positive")


class OptimizationResult(NamedTuple):
    value: float
    direction: np.ndarray
    evaluations: int


def fibonacci_hemisphere(n_points):
    """Golden-angle spiral on the upper hemisphere, pole first, equator last."""
    if n_points < 2:
        raise ValueError("need at least two lattice points")
    i = np.arange(n_points)
    z = 1.0 - i / (n_points - 1)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = i * GOLDEN_ANGLE
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def canonical_direction(n):
    """Representative of ``{n, -n}`` with the last nonzero component positive."""
    n = np.asarray(n, dtype=float)
    for k in (2, 1, 0):
        if abs(n[k]) > 1e-15:
            return n if n[k] > 0 else -n
    return n


def _matrix(rho):
    return as_state(rho).matrix


def q_at(rho, n, subsystem="A"):
    """Trace-norm disturbance ``||rho - M_n(rho)||_1``.

    ``n`` may be a single direction (returns a float) or an ``(N, 3)`` stack
    (returns an array).
    """
    m = _matrix(rho)
    n = check_direction(n)
    return trace_norm(m - measure_matrix(m, n, subsystem))


def c_at(rho, n, subsystem="A"):
    """``||M_n(rho) - M_n(pi_rho)||_1`` with ``pi_rho`` the marginal product."""
    rho = as_state(rho)
    n = check_direction(n)
    pi = marginal_product(rho).matrix
    return trace_norm(measure_matrix(rho.matrix - pi, n, subsystem))


def total(rho):
    """``||rho - pi_rho||_1``; depends on no measurement."""
    rho = as_state(rho)
    return trace_norm(rho.matrix - marginal_product(rho).matrix)


def _tangent_chart(n0, angle):
    n0 = np.asarray(n0, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n0[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n0, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n0, e1)
    ca, sa = math.cos(angle), math.sin(angle)
    e1, e2 = ca * e1 + sa * e2, -sa * e1 + ca * e2

    def to_direction(u):
        v = n0 + u[0] * e1 + u[1] * e2
        return v / np.linalg.norm(v)

    return to_direction


def _refine(objective, n0, step, settings, angle):
    chart = _tangent_chart(n0, angle)
    simplex = np.array([[0.0, 0.0], [step, 0.0], [0.0, step]])
    res = minimize(
        lambda u: objective(chart(u)),
        np.zeros(2),
        method="Nelder-Mead",
        options={
            "xatol": settings.refine_tol,
            "fatol": settings.refine_tol,
            "maxiter": settings.refine_max_iters,
            "initial_simplex": simplex,
        },
    )
    return float(res.fun), chart(res.x), int(res.nfev)


def _optimize(batch_objective, point_objective, settings, sense, starts=None):
    # sense = +1 minimizes, -1 maximizes
    settings = settings or OptimizerSettings()
    lattice = fibonacci_hemisphere(int(settings.grid_points))
    values = sense * np.asarray(batch_objective(lattice))
    evaluations = len(lattice)
    order = np.argsort(values, kind="stable")
    best_val = float(values[order[0]])
    best_dir = lattice[order[0]]
    if starts is None:
        starts = lattice[order[: int(settings.n_starts)]]
    rng = np.random.default_rng(settings.seed)
    step = math.sqrt(2.0 * math.pi / settings.grid_points)

    def objective(n):
        return sense * float(point_objective(n))

    for n0 in np.atleast_2d(starts):
        val, n, nfev = _refine(objective, n0, step, settings, rng.uniform(0.0, 2.0 * math.pi))
        evaluations += nfev
        # polish: restart on a small simplex to escape a collapsed one
        val2, n2, nfev = _refine(objective, n, 1e-3 * step, settings, rng.uniform(0.0, 2.0 * math.pi))
        evaluations += nfev
        if val2 < val:
            val, n = val2, n2
        if val < best_val:
            best_val, best_dir = val, n
    return OptimizationResult(sense * best_val, canonical_direction(best_dir), evaluations)


def minimize_q(rho, settings=None, subsystem="A", starts=None):
    """Smallest :func:`q_at` over measurement directions.

    A hemisphere lattice scan is refined by Nelder-Mead from the best
    ``settings.n_starts`` nodes, or from ``starts`` when given.

    Returns:
        OptimizationResult: ``(value, direction, evaluations)``.
    """
    m = _matrix(rho)

    def objective(n):
        return trace_norm(m - measure_matrix(m, n, subsystem))

    return _optimize(objective, objective, settings, +1, starts)


def maximize_c(rho, settings=None, subsystem="A", starts=None):
    """Largest :func:`c_at` over measurement directions (same scheme as :func:`minimize_q`)."""
    rho = as_state(rho)
    m = rho.matrix - marginal_product(rho).matrix

    def objective(n):
        return trace_norm(measure_matrix(m, n, subsystem))

    return _optimize(objective, objective, settings, -1, starts)


@dataclass(frozen=True)
class ClosedFormReference:
    """Closed-form trace-norm correlations of a Bell-diagonal state.

    ``a_n``/``b_n`` are the Bloch lengths of the closest product state to the
    optimally measured state, along ``axis`` (the largest ``|c_k|``).
    """

    q: float
    c: float
    c_prime: float
    a_n: float
    b_n: float
    axis: str


def _a_n(c_abs, branch="plus"):
    a = math.sqrt(1.0 + c_abs) - 1.0
    if branch == "plus":
        return a
    if branch == "minus":
        return -a
    raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")


def closed_form_bell(c):
    """Closed-form (Q, C, C') for the Bell-diagonal state with vector ``c``.

    Raises:
        UnphysicalStateError: if ``c`` does not describe a valid state.
    """
    c = np.asarray(c, dtype=float)
    build_bell_diagonal(c)
    s = sort_correlations(c)
    c_n = float(c[AXES.index(s.axis_plus)])
    a = _a_n(abs(c_n))
    b = math.copysign(a, c_n) if abs(c_n) >= ZERO_C else 0.0
    return ClosedFormReference(
        q=s.c_zero,
        c=s.c_plus,
        c_prime=2.0 * (math.sqrt(1.0 + s.c_plus) - 1.0),
        a_n=a,
        b_n=b,
        axis=s.axis_plus,
    )


def closest_product_to_single_axis_classical(c_n, axis, branch="plus"):
    """Closest product state to ``1/4 (I (x) I + c_n sigma_n (x) sigma_n)``.

    The Bloch vectors are ``a_n`` and ``b_n = sign(c_n) a_n`` along ``axis``
    with ``a_n = sqrt(1 + |c_n|) - 1`` (``branch="minus"`` flips both, at the
    same distance). Returns ``I/4`` when ``|c_n| < 1e-12``.
    """
    if abs(c_n) > 1.0:
        raise ValueError(f"|c_n| must be <= 1, got {c_n}")
    k = AXES.index(axis)
    a_vec = np.zeros(3)
    b_vec = np.zeros(3)
    if abs(c_n) >= ZERO_C:
        a = _a_n(abs(c_n), branch)
        a_vec[k] = a
        b_vec[k] = math.copysign(1.0, c_n) * a
    return product_state(a_vec, b_vec)


class ProductSearchResult(NamedTuple):
    distance: float
    bloch_a: np.ndarray
    bloch_b: np.ndarray
    evaluations: int


@numba.njit(cache=True)
def _squash(v):
    r = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    if r == 0.0:
        return v * 0.0
    return v * (math.tanh(r) / r)


@numba.njit(cache=True)
def _product_distance(target, p):
    # ||target - rho_A (x) rho_B||_1 with Bloch vectors squashed into the ball
    a = _squash(p[:3])
    b = _squash(p[3:])
    ra = np.empty((2, 2), dtype=np.complex128)
    rb = np.empty((2, 2), dtype=np.complex128)
    ra[0, 0] = 0.5 * (1 + a[2])
    ra[1, 1] = 0.5 * (1 - a[2])
    ra[0, 1] = 0.5 * (a[0] - 1j * a[1])
    ra[1, 0] = 0.5 * (a[0] + 1j * a[1])
    rb[0, 0] = 0.5 * (1 + b[2])
    rb[1, 1] = 0.5 * (1 - b[2])
    rb[0, 1] = 0.5 * (b[0] - 1j * b[1])
    rb[1, 0] = 0.5 * (b[0] + 1j * b[1])
    d = np.empty((4, 4), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for m in range(2):
                    d[2 * i + k, 2 * j + m] = target[2 * i + k, 2 * j + m] - ra[i, j] * rb[k, m]
    v = np.eye(4, dtype=np.complex128)
    _jacobi_inplace(d, v, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    s = 0.0
    for i in range(4):
        s += abs(d[i, i].real)
    return s


def closest_product_search(target, restarts=20, seed=0, max_evals=3000):
    """Numeric search for the product state closest to ``target`` in trace norm.

    Nelder-Mead over the two Bloch vectors from ``restarts`` random starts.
    The result is an upper bound on the true minimum distance.
    """
    m = np.ascontiguousarray(_matrix(target), dtype=np.complex128)
    rng = np.random.default_rng(seed)
    best = None
    evaluations = 0
    for _ in range(int(restarts)):
        x0 = rng.normal(scale=0.5, size=6)
        simplex = np.vstack([x0, x0 + 0.25 * np.eye(6)])
        res = minimize(
            lambda p: _product_distance(m, p),
            x0,
            method="Nelder-Mead",
            options={
                "xatol": 1e-6,
                "fatol": 1e-9,
                "maxfev": max_evals,
                "maxiter": max_evals,
                "initial_simplex": simplex,
                "adaptive": True,
            },
        )
        evaluations += int(res.nfev)
        if best is None or res.fun < best.fun:
            best = res
    return ProductSearchResult(
        float(best.fun), _squash(best.x[:3]), _squash(best.x[3:]), evaluations
    )


def c_prime_at(rho, n, subsystem="A", restarts=20, seed=0):
    """Classical correlation of the measured state against its closest product state.

    For Bell-diagonal ``rho`` the measured state ``M_n(rho)`` equals
    ``1/4 (I + (n.sigma) (x) (m.sigma))`` with ``m_k = c_k n_k``, a single-axis
    classical state in rotated local frames, whose closest product state is
    known in closed form. Other states fall back on
    :func:`closest_product_search` and emit an :class:`ApproximationWarning`.
    """
    rho = as_state(rho)
    n = check_direction(n)
    chi = measure_matrix(rho.matrix, n, subsystem)
    c_vec = rho.bell_vector
    if c_vec is None:
        warnings.warn(
            "closest product state found numerically; value is an upper bound",
            ApproximationWarning,
            stacklevel=2,
        )
        return closest_product_search(chi, restarts=restarts, seed=seed).distance
    m = c_vec * n
    m_len = float(np.linalg.norm(m))
    if m_len < ZERO_C:
        pi = np.eye(4) / 4
    else:
        a = _a_n(min(m_len, 1.0))
        ax, bx = (n, m / m_len) if subsystem == "A" else (m / m_len, n)
        pi = np.kron(bloch_state(a * ax), bloch_state(a * bx))
    return trace_norm(chi - pi)


@dataclass(frozen=True)
class CorrelationTriple:
    """(Q, C, T) in one framework.

    ``tie_break_sensitive`` marks frameworks whose C (or Q) is read off at a
    direction picked by the other optimization, so the value can change with
    the optimizer's choice among degenerate optima.
    """

    framework: str
    q: Optional[float]
    c: Optional[float]
    t: Optional[float]
    q_direction: Optional[np.ndarray] = None
    c_direction: Optional[np.ndarray] = None
    available: bool = True
    approximate: bool = False
    tie_break_sensitive: bool = False

    def as_dict(self):
        d = asdict(self)
        for key in ("q_direction", "c_direction"):
            if d[key] is not None:
                d[key] = [float(v) for v in d[key]]
        return d


def _clip(x):
    return max(float(x), 0.0)


def independent_optimization(rho, settings=None, q_direction=None, subsystem="A"):
    """Q minimized and C maximized over separate measurements, plus T.

    ``q_direction`` pins the measurement used for Q (any optimal direction
    must give the same Q); the C optimization never sees it.
    """
    rho = as_state(rho)
    if q_direction is None:
        q_res = minimize_q(rho, settings, subsystem)
        q_val, q_dir = q_res.value, q_res.direction
    else:
        q_dir = canonical_direction(check_direction(q_direction))
        q_val = q_at(rho, q_dir, subsystem)
    c_res = maximize_c(rho, settings, subsystem)
    return CorrelationTriple(
        "independent_optimization",
        _clip(q_val),
        _clip(c_res.value),
        _clip(total(rho)),
        q_dir,
        c_res.direction,
    )


def evaluate_all_frameworks(rho, settings=None, subsystem="A", product_restarts=20):
    """Correlation triples for every framework, in :data:`FRAMEWORKS` order.

    The measurement-independent triple is only available for Bell-diagonal
    states; its T is the distance to the closest product state found
    numerically, so it is flagged approximate.
    """
    rho = as_state(rho)
    settings = settings or OptimizerSettings()
    q_res = minimize_q(rho, settings, subsystem)
    c_res = maximize_c(rho, settings, subsystem)
    t = _clip(total(rho))
    n_minus, n_plus = q_res.direction, c_res.direction

    strategy_a = CorrelationTriple(
        "measurement_based_a", _clip(q_res.value), _clip(c_at(rho, n_minus, subsystem)), t,
        n_minus, n_minus, tie_break_sensitive=True,
    )
    strategy_b = CorrelationTriple(
        "measurement_based_b", _clip(q_at(rho, n_plus, subsystem)), _clip(c_res.value), t,
        n_plus, n_plus, tie_break_sensitive=True,
    )
    if rho.bell_vector is not None:
        t_prime = closest_product_search(rho, restarts=product_restarts, seed=settings.seed)
        independent_of_measurement = CorrelationTriple(
            "measurement_independent",
            _clip(q_res.value),
            _clip(c_prime_at(rho, n_minus, subsystem)),
            _clip(min(t_prime.distance, t)),
            n_minus, n_minus, approximate=True, tie_break_sensitive=True,
        )
    else:
        independent_of_measurement = CorrelationTriple(
            "measurement_independent", None, None, None, available=False
        )
    independent = CorrelationTriple(
        "independent_optimization", _clip(q_res.value), _clip(c_res.value), t, n_minus, n_plus
    )
    return [strategy_a, strategy_b, independent_of_measurement, independent]

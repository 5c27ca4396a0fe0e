"""
Least squares over the probability simplex.

Solves ``min ||A w - b||^2  s.t.  w >= 0, sum(w) = 1`` with a primal
active-set method warm-started from a non-negative least squares solution,
and certifies the result with the KKT conditions. SLSQP is kept as a
fallback for the rare case the active-set loop stalls.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.optimize import minimize, nnls

from synth_control.errors import OptimizerFailure

KKT_TOLERANCE = 1e-10
FEASIBILITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SimplexSolution:
    w: np.ndarray
    objective: float
    degenerate: bool
    iterations: int
    method: str
    kkt_violation: float


def project_simplex(v: np.ndarray, s: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{w : w >= 0, sum(w) = s}`` (sort-and-threshold)."""
    n = v.shape[0]
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, n + 1) > (cssv - s))[0][-1]
    theta = (cssv[rho] - s) / (rho + 1.0)
    return np.clip(v - theta, 0.0, None)


def _objective(A: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    r = A @ w - b
    return float(r @ r)


def _kkt_violation(H: np.ndarray, c: np.ndarray, w: np.ndarray) -> float:
    """Largest KKT residual, relative to the gradient scale."""
    g = H @ w - c
    free = w > 0
    lam = g[free].mean()
    stationarity = np.abs(g[free] - lam).max(initial=0.0)
    dual = np.clip(lam - g[~free], 0.0, None).max(initial=0.0)
    return float(max(stationarity, dual) / max(1.0, np.abs(g).max(), np.abs(c).max()))


def _equality_qp(H: np.ndarray, c: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Minimize 1/2 wHw - cw on the free set subject to sum(w) = 1."""
    idx = np.flatnonzero(free)
    size = idx.size
    K = np.zeros((size + 1, size + 1))
    K[:size, :size] = H[np.ix_(idx, idx)]
    K[:size, size] = 1.0
    K[size, :size] = 1.0
    rhs = np.append(c[idx], 1.0)
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    z = np.zeros_like(c)
    z[idx] = sol[:size]
    return z


def _warm_start(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a heavily weighted row of ones pushes nnls towards sum(w) = 1
    heavy = 1e3 * max(1.0, np.abs(A).max(), np.abs(b).max())
    A_aug = np.vstack([A, heavy * np.ones(A.shape[1])])
    b_aug = np.append(b, heavy)
    try:
        w, _ = nnls(A_aug, b_aug, maxiter=50 * A.shape[1])
    except RuntimeError:
        w = np.full(A.shape[1], 1.0 / A.shape[1])
    return project_simplex(w) if w.sum() > 0 else np.full(A.shape[1], 1.0 / A.shape[1])


def _active_set(H: np.ndarray, c: np.ndarray, w: np.ndarray, max_iter: int):
    w = w.copy()
    free = w > 0
    tol = KKT_TOLERANCE * max(1.0, np.abs(c).max(), np.abs(H).max())
    weight_tol = 1e-12
    for iteration in range(1, max_iter + 1):
        z = _equality_qp(H, c, free)
        if np.all(z[free] >= -weight_tol):
            w = np.where(free, np.clip(z, 0.0, None), 0.0)
            w /= w.sum()
            free = w > 0
            g = H @ w - c
            lam = g[free].mean()
            slack = g - lam
            slack[free] = 0.0
            j = int(np.argmin(slack))
            if slack[j] >= -tol:
                return w, iteration
            free[j] = True
            continue
        # step towards z until the first free weight hits zero
        blocking = free & (z < -weight_tol)
        ratios = w[blocking] / (w[blocking] - z[blocking])
        alpha = float(np.clip(ratios.min(), 0.0, 1.0))
        w = w + alpha * (z - w)
        hit = np.flatnonzero(blocking)[np.argmin(ratios)]
        w[hit] = 0.0
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        free = w > 0
    return w, max_iter


def _slsqp(A: np.ndarray, b: np.ndarray, w0: np.ndarray) -> np.ndarray:
    n = A.shape[1]
    result = minimize(
        lambda w: _objective(A, b, w),
        w0,
        jac=lambda w: 2.0 * A.T @ (A @ w - b),
        method="SLSQP",
        bounds=[(0.0, 1.0)] * n,
        constraints=[{"type": "eq", "fun": lambda w: np.sum(w) - 1.0}],
        options={"maxiter": 1000, "ftol": 1e-15},
    )
    if not result.success:
        logger.debug(f"SLSQP fallback did not converge: {result.message}")
    return project_simplex(np.asarray(result.x, dtype=float))


def _is_degenerate(A: np.ndarray, w: np.ndarray) -> bool:
    """True when the optimal face is not a single point (collinear active donors)."""
    idx = np.flatnonzero(w > 0)
    if idx.size <= 1:
        return False
    system = np.vstack([A[:, idx], np.ones(idx.size)])
    return int(np.linalg.matrix_rank(system)) < idx.size


def solve_simplex_lsq(A: np.ndarray, b: np.ndarray, max_iter: int = 0) -> SimplexSolution:
    """
    :param A: m x n design matrix, one column per candidate
    :param b: m target vector
    :param max_iter: active-set iteration cap, ``10 n + 50`` when 0
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise OptimizerFailure("non-finite values in the design matrix or target")
    if n == 1:
        w = np.ones(1)
        return SimplexSolution(w, _objective(A, b, w), False, 0, "trivial", 0.0)

    H = A.T @ A
    c = A.T @ b
    w, iterations = _active_set(H, c, _warm_start(A, b), max_iter or 10 * n + 50)
    method = "active-set"
    violation = _kkt_violation(H, c, w)
    if violation > KKT_TOLERANCE * 100:
        candidate = _slsqp(A, b, w)
        if _objective(A, b, candidate) < _objective(A, b, w):
            w, method = candidate, "slsqp"
            violation = _kkt_violation(H, c, w)

    # never worse than the best single donor
    vertex_objectives = np.sum((A - b[:, np.newaxis]) ** 2, axis=0)
    best_vertex = int(np.argmin(vertex_objectives))
    objective = _objective(A, b, w)
    if vertex_objectives[best_vertex] < objective:
        w = np.zeros(n)
        w[best_vertex] = 1.0
        objective = float(vertex_objectives[best_vertex])
        method += "+vertex"

    if not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > FEASIBILITY_TOLERANCE:
        raise OptimizerFailure(
            f"solution is infeasible (sum={w.sum()!r}, method={method})"
        )
    if violation > 1e-6:
        raise OptimizerFailure(
            f"KKT conditions violated by {violation:.3e} after {iterations} iterations"
        )
    return SimplexSolution(
        w=w,
        objective=objective,
        degenerate=_is_degenerate(A, w),
        iterations=iterations,
        method=method,
        kkt_violation=violation,
    )

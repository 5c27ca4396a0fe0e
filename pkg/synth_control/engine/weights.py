from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional, Tuple, Union

import numpy as np
from loguru import logger
from scipy.optimize import minimize

from synth_control.engine.matrices import ScmMatrices
from synth_control.engine.simplex_qp import SimplexSolution, solve_simplex_lsq
from synth_control.errors import InsufficientPreWindow, OptimizerFailure
from synth_control.panel.study import DonorWeights, PredictorWeights

VLike = Union[PredictorWeights, np.ndarray]


@dataclass(frozen=True)
class OptimizerOptions:
    """Outer V search settings."""

    n_starts: int = 20
    lattice_budget: int = 256
    n_refine: int = 5
    max_iter: int = 400
    seed: int = 0


@dataclass(frozen=True)
class InnerSolution:
    weights: DonorWeights
    objective: float
    degenerate: bool
    method: str


@dataclass(frozen=True)
class OuterSolution:
    predictor_weights: PredictorWeights
    inner: InnerSolution
    pre_mspe: float
    evaluations: int

    @property
    def donor_weights(self) -> DonorWeights:
        return self.inner.weights


def _v_array(m: ScmMatrices, v: VLike) -> np.ndarray:
    if isinstance(v, PredictorWeights):
        return v.as_array(m.predictors)
    return np.asarray(v, dtype=float)


def _solve(m: ScmMatrices, v: np.ndarray) -> SimplexSolution:
    root_v = np.sqrt(np.clip(v, 0.0, None))
    A = root_v[:, np.newaxis] * m.X0_scaled
    b = root_v * m.X1_scaled
    return solve_simplex_lsq(A, b)


def solve_weights(m: ScmMatrices, v: VLike) -> InnerSolution:
    """Donor weights minimizing the V-weighted predictor distance, with diagnostics."""
    solution = _solve(m, _v_array(m, v))
    if solution.degenerate:
        logger.debug(
            f"Donor weights are not unique (method={solution.method}); "
            "returning the first converged point"
        )
    return InnerSolution(
        weights=DonorWeights.from_array(m.donors, solution.w),
        objective=solution.objective,
        degenerate=solution.degenerate,
        method=solution.method,
    )


def solve_w(m: ScmMatrices, v: VLike) -> DonorWeights:
    """W* = argmin over the donor simplex of sum_m v_m (X1_m - (X0 W)_m)^2."""
    return solve_weights(m, v).weights


def pre_mspe(m: ScmMatrices, w: np.ndarray) -> float:
    residual = m.Z1 - m.Z0 @ w
    return float(residual @ residual / residual.size)


def simplex_lattice(k: int, divisions: int) -> np.ndarray:
    """All points of the k-simplex whose coordinates are multiples of 1/divisions."""
    points = []
    for bars in combinations(range(divisions + k - 1), k - 1):
        edges = (-1,) + bars + (divisions + k - 1,)
        points.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    return np.array(points, dtype=float) / divisions


def lattice_divisions(k: int, budget: int) -> int:
    """Finest lattice resolution whose point count fits in ``budget`` (at least 1)."""
    divisions = 1
    while _lattice_size(k, divisions + 1) <= budget:
        divisions += 1
    return divisions


def _lattice_size(k: int, divisions: int) -> int:
    return comb(divisions + k - 1, k - 1)


def _softmax(theta: np.ndarray) -> np.ndarray:
    e = np.exp(theta - theta.max())
    return e / e.sum()


def optimize_v_detailed(
    m: ScmMatrices, options: Optional[OptimizerOptions] = None
) -> OuterSolution:
    """
    Nested search: V on the predictor simplex minimizes the pre-treatment
    outcome MSPE of W(V).

    Candidates are a simplex lattice plus seeded Dirichlet draws; the best
    ``n_refine`` are polished with Nelder-Mead on a softmax parametrization.
    The best V ever evaluated wins, earlier candidates winning ties.
    """
    options = options or OptimizerOptions()
    if m.Z1.size < 2:
        raise InsufficientPreWindow(int(m.Z1.size))
    k = m.k

    cache = {}
    best = {"loss": np.inf, "v": None, "inner": None}

    def evaluate(v: np.ndarray) -> float:
        v = v / v.sum()
        key = v.round(15).tobytes()
        if key in cache:
            return cache[key]
        try:
            solution = _solve(m, v)
        except OptimizerFailure as e:
            logger.debug(f"Inner solve failed for V={np.round(v, 4)}: {e}")
            cache[key] = np.inf
            return np.inf
        loss = pre_mspe(m, solution.w)
        cache[key] = loss
        if loss < best["loss"]:
            best.update(loss=loss, v=v, inner=solution)
        return loss

    if k == 1:
        evaluate(np.ones(1))
    else:
        rng = np.random.default_rng(options.seed)
        lattice = simplex_lattice(k, lattice_divisions(k, options.lattice_budget))
        starts = np.vstack(
            [
                np.full((1, k), 1.0 / k),
                lattice,
                rng.dirichlet(np.ones(k), size=options.n_starts),
            ]
        )
        losses = np.array([evaluate(v) for v in starts])
        order = np.argsort(losses, kind="stable")[: options.n_refine]
        for i in order:
            theta0 = np.log(np.clip(starts[i], 1e-8, None))
            minimize(
                lambda theta: evaluate(_softmax(theta)),
                theta0,
                method="Nelder-Mead",
                options={
                    "maxiter": options.max_iter,
                    "xatol": 1e-8,
                    "fatol": 1e-14,
                },
            )

    if best["inner"] is None:
        raise OptimizerFailure("no predictor weighting produced a finite fit")

    solution: SimplexSolution = best["inner"]
    v = np.clip(best["v"], 0.0, None)
    v = v / v.sum()
    logger.debug(
        f"V search finished after {len(cache)} evaluations, pre-MSPE {best['loss']:.6g}"
    )
    return OuterSolution(
        predictor_weights=PredictorWeights.from_array(m.predictors, v),
        inner=InnerSolution(
            weights=DonorWeights.from_array(m.donors, solution.w),
            objective=solution.objective,
            degenerate=solution.degenerate,
            method=solution.method,
        ),
        pre_mspe=float(best["loss"]),
        evaluations=len(cache),
    )


def optimize_v(
    m: ScmMatrices, options: Optional[OptimizerOptions] = None
) -> Tuple[PredictorWeights, DonorWeights]:
    outer = optimize_v_detailed(m, options)
    return outer.predictor_weights, outer.donor_weights

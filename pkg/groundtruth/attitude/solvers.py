"""Rotation solvers for R_W_I given a world triad and the matching body triad.

Three methods, selected by name through ``SOLVER_MAPPER``:

- ``linear``: unconstrained least squares over the nine entries of R, then projected onto SO(3)
- ``tangent``: Gauss-Newton on the rotation manifold with the analytic Jacobian
- ``wahba``: closed-form SVD solution of the weighted Wahba problem
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional

import numpy as np

from groundtruth import log
from groundtruth.attitude.triads import DirectionalTriad
from groundtruth.exceptions import DegenerateSVD, NonConvergence, SingularSystem
from groundtruth.geometry import exp_so3, project_to_so3, skew
from groundtruth.gt_globals import DEFAULT_ALPHA, GN_MAX_ITER, GN_STEP_TOL, SINGULAR_TOL


class RotationMethod(str, Enum):
    LINEAR = "linear"
    TANGENT = "tangent"
    WAHBA = "wahba"


@dataclass(frozen=True, eq=False)
class RotationEstimate:
    rotation: np.ndarray
    method: RotationMethod
    residual: float
    iterations: int = 0


def triad_residual(R: np.ndarray, world: DirectionalTriad, body: DirectionalTriad) -> float:
    """Norm of the stacked residual [g_w m_w c_w] - R [g_i m_i c_i]."""
    return float(np.linalg.norm(world.matrix() - R @ body.matrix()))


def wahba_svd(
    world_vectors: np.ndarray,
    body_vectors: np.ndarray,
    weights: Optional[np.ndarray] = None,
    tol: float = SINGULAR_TOL,
) -> np.ndarray:
    """Rotation R maximizing trace(Rᵀ A) with A = Σ w_k v_w,k v_i,kᵀ.

    ``world_vectors`` and ``body_vectors`` are ``(N, 3)``. Raises ``DegenerateSVD`` when the
    two smallest singular values of A vanish and the rotation is unobservable.
    """
    W = np.asarray(world_vectors, dtype=float).reshape(-1, 3)
    B = np.asarray(body_vectors, dtype=float).reshape(-1, 3)
    w = np.ones(len(W)) if weights is None else np.asarray(weights, dtype=float)
    A = (W * w[:, None]).T @ B
    U, S, Vt = np.linalg.svd(A)
    if S[0] == 0.0 or S[1] <= tol * S[0]:
        raise DegenerateSVD(f"attitude profile matrix is degenerate (singular values {S})")
    M = np.diag([1.0, 1.0, np.linalg.det(U) * np.linalg.det(Vt)])
    return U @ M @ Vt


def solve_rotation_linear(
    world: DirectionalTriad, body: DirectionalTriad, tol: float = SINGULAR_TOL
) -> RotationEstimate:
    X = body.matrix()
    Y = world.matrix()
    # R X = Y  <=>  Xᵀ Rᵀ = Yᵀ, solved column by column
    Rt, _, rank, sv = np.linalg.lstsq(X.T, Y.T, rcond=None)
    if rank < 3 or sv[-1] <= tol * sv[0]:
        raise SingularSystem(f"stacked body matrix has rank {rank} < 3")
    R = project_to_so3(Rt.T)
    return RotationEstimate(R, RotationMethod.LINEAR, triad_residual(R, world, body))


def solve_rotation_wahba(
    world: DirectionalTriad,
    body: DirectionalTriad,
    alpha: float = DEFAULT_ALPHA,
    m_weight: float = 1.0,
    c_weight: float = 1.0,
    tol: float = SINGULAR_TOL,
) -> RotationEstimate:
    """Weighted Wahba solution with weights (alpha, m_weight, c_weight) on (g, m, c)."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    R = wahba_svd(
        np.vstack([world.g, world.m, world.c]),
        np.vstack([body.g, body.m, body.c]),
        np.array([alpha, m_weight, c_weight]),
        tol=tol,
    )
    return RotationEstimate(R, RotationMethod.WAHBA, triad_residual(R, world, body))


def tangent_prediction(R: np.ndarray, body: DirectionalTriad) -> np.ndarray:
    return np.concatenate([R @ body.g, R @ body.m, R @ body.c])


def tangent_residual(R: np.ndarray, world: DirectionalTriad, body: DirectionalTriad) -> np.ndarray:
    """Stacked 9-vector y - blockdiag(R)·x."""
    return world.stacked() - tangent_prediction(R, body)


def tangent_jacobian(R: np.ndarray, body: DirectionalTriad) -> np.ndarray:
    """Jacobian (9 x 3) of the prediction R·exp(δ)·v with respect to δ at δ = 0.

    Each block is -R⌊v⌋ for v in (g_i, m_i, c_i).
    """
    return np.vstack([-R @ skew(body.g), -R @ skew(body.m), -R @ skew(body.c)])


def solve_rotation_tangent(
    world: DirectionalTriad,
    body: DirectionalTriad,
    init: Optional["np.typing.ArrayLike"] = None,
    alpha: float = DEFAULT_ALPHA,
    step_tol: float = GN_STEP_TOL,
    max_iter: int = GN_MAX_ITER,
) -> RotationEstimate:
    """Gauss-Newton on R ← R·exp(δ); the step is halved while the cost increases.

    ``init`` is a tangent vector; without it the Wahba solution seeds the iteration.
    """
    if init is None:
        R = solve_rotation_wahba(world, body, alpha=alpha).rotation
    else:
        R = exp_so3(init)

    r = tangent_residual(R, world, body)
    cost = float(r @ r)
    for iteration in range(max_iter):
        J = tangent_jacobian(R, body)
        delta = np.linalg.lstsq(J, r, rcond=None)[0]
        step = float(np.linalg.norm(delta))
        if step < step_tol:
            return RotationEstimate(R, RotationMethod.TANGENT, np.sqrt(cost), iteration)

        scale = 1.0
        while True:
            R_new = R @ exp_so3(scale * delta)
            r_new = tangent_residual(R_new, world, body)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                break
            scale *= 0.5
            if scale * step < step_tol:
                # no descent left along the Gauss-Newton direction
                log.debug(f"tangent solver: stalled at cost {cost:.3e} after {iteration} iterations")
                return RotationEstimate(R, RotationMethod.TANGENT, np.sqrt(cost), iteration)

        R, r, cost = R_new, r_new, cost_new
        log.debug(f"tangent solver: iteration {iteration + 1}, step {scale * step:.3e}, cost {cost:.3e}")
        if scale * step < step_tol:
            return RotationEstimate(R, RotationMethod.TANGENT, np.sqrt(cost), iteration + 1)

    raise NonConvergence(
        f"tangent solver did not converge in {max_iter} iterations", residual=float(np.sqrt(cost))
    )


SOLVER_MAPPER: Dict[str, Callable[..., RotationEstimate]] = {
    RotationMethod.LINEAR.value: solve_rotation_linear,
    RotationMethod.TANGENT.value: solve_rotation_tangent,
    RotationMethod.WAHBA.value: solve_rotation_wahba,
}

methods = sorted(SOLVER_MAPPER.keys())
methods_str = ", ".join(methods)


def solver_dispatcher(method: "str | RotationMethod") -> Callable[..., RotationEstimate]:
    """Select the solver function for a method name."""
    key = method.value if isinstance(method, RotationMethod) else str(method).lower()
    if key not in SOLVER_MAPPER:
        raise ValueError(
            f"Unsupported rotation method '{method}', currently supported methods are: {methods_str}"
        )
    return SOLVER_MAPPER[key]


def solve_rotation(
    world: DirectionalTriad,
    body: DirectionalTriad,
    method: "str | RotationMethod" = RotationMethod.WAHBA,
    alpha: float = DEFAULT_ALPHA,
    **kwargs: Any,
) -> RotationEstimate:
    solver = solver_dispatcher(method)
    if solver is solve_rotation_linear:
        return solver(world, body, **kwargs)
    return solver(world, body, alpha=alpha, **kwargs)

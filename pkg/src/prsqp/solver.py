"""Hybrid-accelerated proximal splitting with SQP subproblems.

One iteration, starting from ``w_k = (x_k, y_k, lam_k)`` with current Hessian
models ``H_x, H_y``:

1. x block: solve the quadratic model of ``L_beta`` in the metric
   ``Hcal_x = H_x + beta A^T A + ell I``, extrapolate by ``alpha``, Armijo
   backtrack along ``d_x = (1 + alpha)(x_tilde - x_k)``.
2. First dual update ``lam_{k+1/2} = lam_k - r beta (A x_{k+1} - y_k)``.
3. y block at ``(x_{k+1}, lam_{k+1/2})`` in the metric
   ``Hcal_y = H_y + (beta + sigma) I``; extrapolate, backtrack.
4. Second dual update ``lam_{k+1} = lam_{k+1/2} - s beta (A x_{k+1} - y_{k+1})``.
5. Stop when the relative sup-norm step over ``(x, y, lam)`` drops to
   ``tol_step``.
6. Refresh ``(H_x, H_y)`` at the new point, doubling ``ell`` / ``sigma`` until
   both metrics admit a Cholesky factorization.

The dual steps ``r, s`` may take either sign (ascent or descent flavors) as
long as ``r + s != 0``; the diagnostics module computes the decrease margins
that certify monotonicity of the merit function for a given choice.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Mapping, NamedTuple, Optional

import numpy as np
import scipy.linalg

from .alf import AugmentedIterate, Iterate, eval_alf, eval_merit_hat, grad_alf
from .core import DimensionMismatch, NotPositiveDefinite, as_vector, cholesky_spd, spectral_norm
from .problems import composite_objective, hessian_pair


class ProximalNotPD(NotPositiveDefinite):
    """A subproblem metric failed to factor; raise ell (x block) or sigma (y block)."""


class LineSearchFailed(RuntimeError):
    """Armijo backtracking exhausted max_backtracks without an acceptable step."""


class NumericalError(ArithmeticError):
    """The iteration produced non-finite values or an unrepairable metric."""


class SolveStatus(str, Enum):
    CONVERGED = "Converged"
    ITER_LIMIT = "IterLimit"
    LINE_SEARCH_FAILED = "LineSearchFailed"
    NUMERICAL_ERROR = "NumericalError"


_PARAM_DEFAULTS = dict(
    rho=0.4,
    nu=0.6,
    alpha=0.0,
    beta=1.0,
    ell=5.0,
    sigma=10.0,
    r=0.1,
    s=1.0,
    max_iter=10_000,
    tol_step=1e-4,
    max_backtracks=60,
    relaxed_alpha=False,
)


def validate_params(params, relaxed=None):
    """Range violations of a parameter set, as human-readable strings.

    ``params`` may be a :class:`SolverParams`, any object with the same
    attributes, or a mapping (missing entries fall back to the defaults, so
    invalid combinations can be checked without constructing). ``relaxed``
    overrides the set's own ``relaxed_alpha`` flag; when true, the upper
    acceleration bound ``alpha < 1/rho - 1`` is not enforced.
    """
    if isinstance(params, Mapping):
        merged = dict(_PARAM_DEFAULTS)
        merged.update(params)
        get = merged.__getitem__
    else:
        get = lambda k: getattr(params, k, _PARAM_DEFAULTS[k])
    out = []
    rho, nu, alpha = get("rho"), get("nu"), get("alpha")
    if not 0.0 < rho < 1.0:
        out.append(f"rho must lie in (0, 1), got {rho}")
    if not 0.0 < nu < 1.0:
        out.append(f"nu must lie in (0, 1), got {nu}")
    if not alpha > -1.0:
        out.append(f"alpha must exceed -1, got {alpha}")
    relaxed_eff = bool(get("relaxed_alpha")) if relaxed is None else bool(relaxed)
    if not relaxed_eff and 0.0 < rho < 1.0 and not alpha < 1.0 / rho - 1.0:
        out.append(f"alpha = {alpha} is not below 1/rho - 1 = {1.0 / rho - 1.0} (set relaxed_alpha to override)")
    for name in ("beta", "ell", "sigma"):
        if not get(name) > 0.0:
            out.append(f"{name} must be positive, got {get(name)}")
    if get("r") + get("s") == 0.0:
        out.append(f"r + s must be nonzero, got r = {get('r')}, s = {get('s')}")
    if get("max_iter") < 1:
        out.append(f"max_iter must be >= 1, got {get('max_iter')}")
    if not get("tol_step") >= 0.0:
        out.append(f"tol_step must be >= 0, got {get('tol_step')}")
    if get("max_backtracks") < 1:
        out.append(f"max_backtracks must be >= 1, got {get('max_backtracks')}")
    return out


@dataclass
class SolverParams:
    """Algorithm parameters; ranges are enforced at construction.

    ``alpha`` must satisfy ``-1 < alpha < 1/rho - 1`` unless ``relaxed_alpha``
    is set, in which case only ``alpha > -1`` is required and runs are tagged
    as outside the supported theory. ``r`` and ``s`` are the two dual step
    scales (positive = ascent, negative = descent) with ``r + s != 0``.
    """

    rho: float = _PARAM_DEFAULTS["rho"]
    nu: float = _PARAM_DEFAULTS["nu"]
    alpha: float = _PARAM_DEFAULTS["alpha"]
    beta: float = _PARAM_DEFAULTS["beta"]
    ell: float = _PARAM_DEFAULTS["ell"]
    sigma: float = _PARAM_DEFAULTS["sigma"]
    r: float = _PARAM_DEFAULTS["r"]
    s: float = _PARAM_DEFAULTS["s"]
    max_iter: int = _PARAM_DEFAULTS["max_iter"]
    tol_step: float = _PARAM_DEFAULTS["tol_step"]
    max_backtracks: int = _PARAM_DEFAULTS["max_backtracks"]
    relaxed_alpha: bool = _PARAM_DEFAULTS["relaxed_alpha"]

    def __post_init__(self):
        violations = validate_params(self)
        if violations:
            raise ValueError("; ".join(violations))


@dataclass
class StepRecord:
    """Per-iteration trace row (elapsed is wall seconds for the iteration)."""

    k: int
    t_x: float
    t_y: float
    norm_dx: float
    norm_dy: float
    L_beta: float
    L_hat: float
    feas_inf: float
    kkt_inf: float
    ofv: float
    backtracks_x: int
    backtracks_y: int
    elapsed: float


@dataclass
class SolveResult:
    final: Iterate
    status: SolveStatus
    trace: List[StepRecord] = field(default_factory=list)
    iterations: int = 0
    theory_supported: bool = True


class IterationOutcome(NamedTuple):
    state: AugmentedIterate
    record: StepRecord
    hess_x: np.ndarray
    hess_y: np.ndarray
    internals: Optional[dict]


_MAX_METRIC_REPAIR = 60  # doublings of ell / sigma before giving up


def _metric_x(P, H_x, params):
    return H_x + params.beta * P.AtA + params.ell * np.eye(P.n1)


def _metric_y(P, H_y, params):
    return H_y + (params.beta + params.sigma) * np.eye(P.n2)


def _x_step(P, w, H_x, params):
    # quadratic-model minimizer, its metric and the gradient it used
    Hcal = _metric_x(P, H_x, params)
    g = grad_alf(P, w, params.beta).gx
    if not np.all(np.isfinite(g)):
        raise NumericalError("non-finite x-gradient")
    try:
        factor = cholesky_spd(Hcal)
    except NotPositiveDefinite as exc:
        raise ProximalNotPD(f"x-metric not positive definite at ell = {params.ell}: {exc}") from None
    x_tilde = w.x - scipy.linalg.cho_solve(factor, g, check_finite=False)
    return x_tilde, Hcal, g


def _y_step(P, x_next, y, lam_half, H_y, params):
    Hcal = _metric_y(P, H_y, params)
    residual = P.apply_A(x_next) - y
    g = P.grad_g(y) + lam_half - params.beta * residual
    if not np.all(np.isfinite(g)):
        raise NumericalError("non-finite y-gradient")
    try:
        factor = cholesky_spd(Hcal)
    except NotPositiveDefinite as exc:
        raise ProximalNotPD(f"y-metric not positive definite at sigma = {params.sigma}: {exc}") from None
    y_tilde = y - scipy.linalg.cho_solve(factor, g, check_finite=False)
    return y_tilde, Hcal, g


def solve_x_subproblem(P, w, H_x, params):
    """Minimizer of the x quadratic model of ``L_beta`` at ``w``:
    ``x_tilde = x - Hcal_x^{-1} grad_x L_beta`` with
    ``Hcal_x = H_x + beta A^T A + ell I``.

    Raises :class:`ProximalNotPD` when the metric does not factor; the caller
    is expected to increase ``ell`` and retry (see :func:`iterate_once`).
    """
    x_tilde, _, _ = _x_step(P, w, H_x, params)
    return x_tilde


def solve_y_subproblem(P, x_next, y, lam_half, H_y, params):
    """Minimizer of the y quadratic model at ``(x_next, y, lam_half)``:
    ``y_tilde = y - Hcal_y^{-1} (grad g(y) + lam_half - beta (A x_next - y))``
    with ``Hcal_y = H_y + (beta + sigma) I``.

    Raises :class:`ProximalNotPD` when the metric does not factor (raise
    ``sigma`` and retry).
    """
    y_tilde, _, _ = _y_step(P, x_next, y, lam_half, H_y, params)
    return y_tilde


def hybrid_accelerate(tilde, current, alpha):
    """Extrapolated target and search direction for one block.

    ``bar = tilde + alpha (tilde - current)`` and the direction from the
    current point is ``d = bar - current = (1 + alpha)(tilde - current)``.
    Requires ``alpha > -1`` so ``d`` keeps the orientation of the model step.
    """
    if not alpha > -1.0:
        raise ValueError(f"alpha must exceed -1, got {alpha}")
    d = (1.0 + alpha) * (np.asarray(tilde, dtype=float) - np.asarray(current, dtype=float))
    return current + d, d


def line_search(P, point, d, Hcal, params, block):
    """Armijo backtracking for one block of ``L_beta`` at fixed other blocks.

    Accepts the largest ``t = nu^i`` (``i = 0, 1, ...``) with

        ``L_beta(moved) <= L_beta(point) - rho * t * d^T Hcal d``

    where ``moved`` shifts the ``block`` coordinate ("x" or "y") of ``point``
    by ``t d``. The comparison carries a ``1e-12 (1 + |L|)`` float slack so a
    vanishing direction near a stationary point is not rejected on rounding
    noise. Returns ``(t, i)``; ``d = 0`` returns ``(1.0, 0)`` immediately.

    Raises :class:`LineSearchFailed` after ``params.max_backtracks`` shrinks.
    """
    if block not in ("x", "y"):
        raise ValueError(f"block must be 'x' or 'y', got {block!r}")
    d = as_vector(d, name="d")
    if not np.any(d):
        return 1.0, 0
    quad = float(d @ (Hcal @ d))
    L0 = eval_alf(P, point, params.beta)
    if not np.isfinite(L0) or not np.isfinite(quad):
        raise NumericalError(f"non-finite quantities entering the {block} line search")
    slack = 1e-12 * (1.0 + abs(L0))
    t = 1.0
    for i in range(params.max_backtracks + 1):
        if block == "x":
            cand = Iterate(point.x + t * d, point.y, point.lam)
        else:
            cand = Iterate(point.x, point.y + t * d, point.lam)
        L_t = eval_alf(P, cand, params.beta)
        if L_t <= L0 - params.rho * t * quad + slack:
            return t, i
        t *= params.nu
    raise LineSearchFailed(
        f"{block} line search found no acceptable step within {params.max_backtracks} backtracks"
    )


def dual_update(lam, step, beta, residual):
    """Scaled multiplier move ``lam - step * beta * residual`` (residual = A x - y)."""
    lam = as_vector(lam, name="lam")
    residual = as_vector(residual, n=lam.shape[0], name="residual")
    return lam - step * beta * residual


def _quiet_numerics(fn):
    # divergent parameter choices legitimately overflow float64; the explicit
    # isfinite checks below turn that into NumericalError instead of warnings
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore"):
            return fn(*args, **kwargs)

    return wrapper


def _repair_metric(build, bump, limit=_MAX_METRIC_REPAIR):
    # call build() until it stops raising, doubling via bump(); returns build's value
    for attempt in range(limit + 1):
        try:
            return build()
        except NotPositiveDefinite:
            if attempt == limit:
                raise NumericalError(
                    f"metric stayed indefinite after {limit} proximal-weight doublings"
                ) from None
            bump()


@_quiet_numerics
def iterate_once(P, state, H_x, H_y, params, k=0, eta2_y=None, keep_internals=False):
    """One full iteration from ``state``; returns an :class:`IterationOutcome`.

    ``params`` is mutated in place when a metric needs repair (``ell`` or
    ``sigma`` doubles) -- :func:`run` passes a private copy. ``eta2_y`` is the
    uniform y-curvature bound used for the merit column of the trace record
    (``L_hat`` is NaN when it is not supplied). ``keep_internals`` attaches the
    per-block gradients, directions and metric quadratic forms to the outcome
    for invariant checks.

    Raises :class:`LineSearchFailed` or :class:`NumericalError` upward.
    """
    t_start = time.perf_counter()
    w = state.w
    beta = params.beta

    # ----- x block: model step, extrapolation, Armijo
    def bump_ell():
        params.ell *= 2.0

    x_tilde, Hcal_x, gx = _repair_metric(lambda: _x_step(P, w, H_x, params), bump_ell)
    if not np.all(np.isfinite(x_tilde)):
        raise NumericalError("x-subproblem produced non-finite values")
    _, d_x = hybrid_accelerate(x_tilde, w.x, params.alpha)
    t_x, bt_x = line_search(P, w, d_x, Hcal_x, params, "x")
    x_next = w.x + t_x * d_x

    # ----- first dual update on the mixed residual A x_{k+1} - y_k
    lam_half = dual_update(w.lam, params.r, beta, P.apply_A(x_next) - w.y)

    # ----- y block at the updated x and half-step multiplier
    def bump_sigma():
        params.sigma *= 2.0

    y_tilde, Hcal_y, gy = _repair_metric(
        lambda: _y_step(P, x_next, w.y, lam_half, H_y, params), bump_sigma
    )
    if not np.all(np.isfinite(y_tilde)):
        raise NumericalError("y-subproblem produced non-finite values")
    _, d_y = hybrid_accelerate(y_tilde, w.y, params.alpha)
    mid = Iterate(x_next, w.y, lam_half)
    t_y, bt_y = line_search(P, mid, d_y, Hcal_y, params, "y")
    y_next = w.y + t_y * d_y

    # ----- second dual update on the full new residual
    residual_new = P.apply_A(x_next) - y_next
    lam_next = dual_update(lam_half, params.s, beta, residual_new)
    w_next = Iterate(x_next, y_next, lam_next)
    if not np.all(np.isfinite(w_next.concat())):
        raise NumericalError("iteration produced non-finite iterate")

    # ----- refresh the second-order model, keeping both metrics factorable
    H_x_next, H_y_next = hessian_pair(P, x_next, y_next)
    _repair_metric(lambda: cholesky_spd(_metric_x(P, H_x_next, params)), bump_ell)
    _repair_metric(lambda: cholesky_spd(_metric_y(P, H_y_next, params)), bump_sigma)

    state_next = AugmentedIterate(w=w_next, d_y_prev=d_y)

    from .diagnostics import kkt_residual  # local import: diagnostics uses SolverParams

    if eta2_y is not None and P.lipschitz_g is not None:
        L_hat = eval_merit_hat(P, state_next, params, eta2_y)
    else:
        L_hat = float("nan")
    record = StepRecord(
        k=k,
        t_x=t_x,
        t_y=t_y,
        norm_dx=float(np.linalg.norm(d_x)),
        norm_dy=float(np.linalg.norm(d_y)),
        L_beta=eval_alf(P, w_next, beta),
        L_hat=L_hat,
        feas_inf=float(np.max(np.abs(residual_new))) if residual_new.size else 0.0,
        kkt_inf=kkt_residual(P, w_next).total,
        ofv=composite_objective(P, x_next),
        backtracks_x=bt_x,
        backtracks_y=bt_y,
        elapsed=time.perf_counter() - t_start,
    )

    internals = None
    if keep_internals:
        internals = dict(
            gx=gx,
            d_x=d_x,
            quad_x=float(d_x @ (Hcal_x @ d_x)),
            gx_dot_dx=float(gx @ d_x),
            model_residual_x=float(np.max(np.abs(gx + Hcal_x @ (x_tilde - w.x)))),
            x_tilde=x_tilde,
            gy=gy,
            d_y=d_y,
            quad_y=float(d_y @ (Hcal_y @ d_y)),
            gy_dot_dy=float(gy @ d_y),
            model_residual_y=float(np.max(np.abs(gy + Hcal_y @ (y_tilde - w.y)))),
            y_tilde=y_tilde,
            lam_half=lam_half,
        )
    return IterationOutcome(state_next, record, H_x_next, H_y_next, internals)


@_quiet_numerics
def run(P, w0, params, callback: Optional[Callable[[IterationOutcome], None]] = None):
    """Drive :func:`iterate_once` from ``w0`` until convergence or breakdown.

    Stops with status Converged when the relative sup-norm step
    ``||w_{k+1} - w_k||_inf / max(1, ||w_k||_inf)`` falls to ``params.tol_step``,
    with IterLimit after ``max_iter`` iterations, and with LineSearchFailed /
    NumericalError when an iteration raises (captured, not propagated). The
    caller's ``params`` are never mutated; positive-definiteness repair acts on
    a private copy. The merit column of the trace uses the running maximum of
    ``||H_y||`` for the uniform curvature bound. ``callback``, when given,
    receives each :class:`IterationOutcome` (with internals attached).
    """
    violations = validate_params(params)
    if violations:
        raise ValueError("; ".join(violations))
    if not isinstance(w0, Iterate):
        raise TypeError("w0 must be an Iterate")
    if w0.x.shape[0] != P.n1 or w0.y.shape[0] != P.n2:
        raise DimensionMismatch(
            f"w0 has shapes x:{w0.x.shape}, y:{w0.y.shape}; problem expects {P.n1}/{P.n2}"
        )
    params = replace(params)
    theory_supported = not validate_params(params, relaxed=False)

    state = AugmentedIterate(w=w0, d_y_prev=np.zeros(P.n2))
    H_x, H_y = hessian_pair(P, w0.x, w0.y)
    eta_y = spectral_norm(H_y)
    trace: List[StepRecord] = []
    status = SolveStatus.ITER_LIMIT
    for k in range(params.max_iter):
        prev = state.w.concat()
        try:
            out = iterate_once(
                P,
                state,
                H_x,
                H_y,
                params,
                k=k,
                eta2_y=eta_y + params.beta + params.sigma,
                keep_internals=callback is not None,
            )
        except LineSearchFailed:
            status = SolveStatus.LINE_SEARCH_FAILED
            break
        except (NumericalError, NotPositiveDefinite):
            status = SolveStatus.NUMERICAL_ERROR
            break
        state, H_x, H_y = out.state, out.hess_x, out.hess_y
        eta_y = max(eta_y, spectral_norm(H_y))
        trace.append(out.record)
        if callback is not None:
            callback(out)
        step = float(np.max(np.abs(state.w.concat() - prev)))
        if step / max(1.0, float(np.max(np.abs(prev)))) <= params.tol_step:
            status = SolveStatus.CONVERGED
            break
    return SolveResult(
        final=state.w,
        status=status,
        trace=trace,
        iterations=len(trace),
        theory_supported=theory_supported,
    )

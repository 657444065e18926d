"""Quasi-maximum-likelihood estimation and the OLS baseline.

The optimizer works on an unconstrained vector. Mean coefficients enter as
``beta_ols + se_ols * u`` so every coordinate is of order one; variance
parameters pass through :func:`to_constrained`, which maps any real vector
into the family's admissible region (positivity and stationarity). Standard
errors come from the inverse of a central-difference Hessian of the
log-likelihood taken directly in the constrained parameters.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from . import _kernels
from .descriptives import normal_two_sided, significance_stars, student_t_two_sided
from .design import ReturnPanel
from .errors import (
    ConstraintViolation,
    NonPositiveVariance,
    RankDeficient,
    SingularHessian,
    TooFewRows,
)
from .volatility import (
    _FAMILY_CODE,
    _SQRT_2_OVER_PI,
    MeanParams,
    ModelSpec,
    VarianceParams,
    residuals_and_variance,
    satisfies_constraints,
)

__all__ = [
    "OptimizerOptions",
    "FitResult",
    "least_squares",
    "ols_fit",
    "to_constrained",
    "to_unconstrained",
    "numerical_gradient",
    "numerical_hessian",
    "one_sided_stationarity",
    "standard_errors",
    "model_loglik",
    "fit",
]

logger = logging.getLogger(__name__)

_PENALTY = 1e10
START_VA, START_VB = 0.85, 0.10


@dataclass(frozen=True)
class OptimizerOptions:
    max_iterations: int = 1000
    ftol: float = 1e-12
    xtol: float = 1e-10
    gtol: float = 1e-5
    bfgs_restarts: int = 3
    fd_rel_step: float = 1e-5
    fd_abs_step: float = 1e-7
    kink_step: float = 1e-5
    hessian_step: float = 0.05
    hessian_step_mean: float = 0.5
    restarts: int = 0
    jitter: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("ftol", "xtol", "gtol", "fd_rel_step", "fd_abs_step", "kink_step",
                     "hessian_step", "hessian_step_mean"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iterations < 1 or self.restarts < 0:
            raise ValueError("max_iterations must be >= 1 and restarts >= 0")


@dataclass(eq=False)
class FitResult:
    """Estimates with inference and optimizer diagnostics.

    ``gradient_norm`` is the 2-norm of the finite-difference gradient of the
    average negative log-likelihood in the optimizer's coordinates;
    ``stationarity`` is the one-sided measure from
    :func:`one_sided_stationarity` (equal to ``gradient_norm`` when that is
    already below tolerance). A fit is converged when either is below ``gtol``.
    ``p_dist`` records whether p-values use the normal approximation
    (``"normal"``, likelihood fits) or Student's t (``"student_t"``, OLS).
    """

    family: str
    names: list[str]
    params: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    stars: list[str]
    loglik: float
    q2_path: np.ndarray
    residuals: np.ndarray
    nobs: int
    converged: bool
    iterations: int = 0
    gradient_norm: float = 0.0
    stationarity: float = 0.0
    spec: Optional[ModelSpec] = None
    mean_params: Optional[MeanParams] = None
    variance_params: Optional[VarianceParams] = None
    q0: float = math.nan
    start_loglik: float = math.nan
    hessian_ok: bool = True
    p_dist: str = "normal"
    message: str = ""
    history: list[float] = field(default_factory=list)
    rejected: int = 0
    cov: Optional[np.ndarray] = None

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __getitem__(self, name: str) -> float:
        return float(self.params[self.index(name)])

    def se(self, name: str) -> float:
        return float(self.std_errors[self.index(name)])

    def row(self, name: str) -> dict:
        i = self.index(name)
        return {"name": name, "coef": float(self.params[i]), "se": float(self.std_errors[i]),
                "t": float(self.t_stats[i]), "p": float(self.p_values[i]), "stars": self.stars[i]}


def _inference(params, se, p_dist: str, df: int | None = None):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, params / se, np.nan)
    if p_dist == "student_t":
        p = np.array([student_t_two_sided(x, df) if math.isfinite(x) else math.nan for x in t])
    else:
        p = np.array([normal_two_sided(x) if math.isfinite(x) else math.nan for x in t])
    return t, p, [significance_stars(x) for x in p]


# ---------------------------------------------------------------------- OLS


def least_squares(X, y) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """QR least squares with classical covariance ``s^2 (X'X)^-1``.

    Returns ``(beta, residuals, cov, ssr)``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, k = X.shape
    if n <= k:
        raise TooFewRows(f"{n} observations for {k} regressors")
    if np.linalg.matrix_rank(X) < k:
        raise RankDeficient("regressor matrix is not of full column rank")
    q, r = np.linalg.qr(X)
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    ssr = math.fsum((resid * resid).tolist())
    r_inv = np.linalg.inv(r)
    cov = ssr / (n - k) * (r_inv @ r_inv.T)
    return beta, resid, cov, ssr


def ols_fit(panel: ReturnPanel) -> FitResult:
    """Least squares on the mean equation with classical standard errors.

    The log-likelihood is the Gaussian one at the ML variance ``SSR / n``.
    """
    X = panel.design_matrix()
    n, k = X.shape
    beta, resid, cov, ssr = least_squares(X, panel.y)
    se = np.sqrt(np.diag(cov))
    t, p, stars = _inference(beta, se, "student_t", n - k)
    sigma2_ml = ssr / n
    loglik = -0.5 * n * (math.log(2 * math.pi) + math.log(sigma2_ml) + 1.0)
    mp = MeanParams.from_vector(beta, panel.lag_order)
    return FitResult(
        family="ols", names=mp.names(), params=beta, std_errors=se,
        t_stats=t, p_values=p, stars=stars, loglik=loglik,
        q2_path=np.full(n, sigma2_ml), residuals=resid, nobs=n, converged=True,
        mean_params=mp, q0=sigma2_ml,
        p_dist="student_t", cov=cov,
    )


# ---------------------------------------------------------------- transforms


def _simplex(s: np.ndarray) -> np.ndarray:
    """Positive weights with sum below one: ``exp(s_i) / (1 + sum exp(s))``."""
    m = max(0.0, float(np.max(s)))
    ex = np.exp(s - m)
    return ex / (math.exp(-m) + ex.sum())


def _simplex_inv(w: np.ndarray) -> np.ndarray:
    slack = 1.0 - float(np.sum(w))
    return np.log(w) - math.log(slack)


def to_constrained(x, family: str, n_exog: int = 0) -> VarianceParams:
    """Map an unconstrained vector to admissible variance parameters.

    GARCH ``[log vc, s_a, s_b]``: ``(va, vb)`` are simplex weights, so both are
    positive with ``va + vb < 1``.

    GJR ``[log vc, s1, s2, s3]``: with simplex weights ``w``, ``va = w1``,
    ``vb = 2 w2`` and ``gamma = 2 (w3 - w2)``; this gives ``vb >= 0``,
    ``vb + gamma >= 0`` and ``va + vb + gamma/2 = sum(w) < 1``, with
    ``gamma = 0`` an interior point.

    EGARCH ``[vc, atanh(va), vb, gamma]``.

    Trailing ``n_exog`` entries (variance regressor loadings) pass through.
    """
    x = np.asarray(x, dtype=np.float64)
    if family == "egarch":
        core = VarianceParams(float(x[0]), math.tanh(x[1]), float(x[2]), float(x[3]))
        k = 4
    elif family == "garch":
        w = _simplex(x[1:3])
        core = VarianceParams(math.exp(x[0]), float(w[0]), float(w[1]))
        k = 3
    elif family == "gjr":
        w = _simplex(x[1:4])
        core = VarianceParams(math.exp(x[0]), float(w[0]), 2.0 * float(w[1]),
                              2.0 * (float(w[2]) - float(w[1])))
        k = 4
    else:
        raise ValueError(f"unknown family {family!r}")
    if x.size != k + n_exog:
        raise ValueError(f"expected {k + n_exog} unconstrained values, got {x.size}")
    if n_exog:
        return VarianceParams(core.vc, core.va, core.vb, core.gamma, vx=x[k:].copy())
    return core


def to_unconstrained(vp: VarianceParams, family: str) -> np.ndarray:
    """Inverse of :func:`to_constrained`; requires strictly interior parameters."""
    if family == "egarch":
        core = [vp.vc, math.atanh(vp.va), vp.vb, vp.gamma]
    elif family == "garch":
        core = [math.log(vp.vc), *_simplex_inv(np.array([vp.va, vp.vb]))]
    elif family == "gjr":
        w = np.array([vp.va, 0.5 * vp.vb, 0.5 * (vp.vb + vp.gamma)])
        core = [math.log(vp.vc), *_simplex_inv(w)]
    else:
        raise ValueError(f"unknown family {family!r}")
    out = np.asarray(core, dtype=np.float64)
    if vp.vx is not None:
        out = np.concatenate([out, vp.vx])
    return out


# --------------------------------------------------------------- numerics


def numerical_gradient(f: Callable[[np.ndarray], float], x, rel_step: float = 1e-5,
                       abs_step: float = 1e-7) -> np.ndarray:
    """Central differences with step ``max(rel_step * |x_i|, abs_step)``."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        h = max(rel_step * abs(x[i]), abs_step)
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def one_sided_stationarity(f: Callable[[np.ndarray], float], x, step: float = 1e-5) -> float:
    """Largest rate of decrease over the moves ``x +- h e_i``, in 2-norm.

    Coordinate ``i`` contributes ``max(0, -D+_i, D-_i)`` from the forward and
    backward difference quotients. For a smooth function this is ``|g_i|``;
    at a minimum on a kink, where no gradient vanishes, it is zero.
    """
    x = np.asarray(x, dtype=np.float64)
    f0 = f(x)
    rates = np.empty(x.size)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        fwd = (f(x + e) - f0) / h
        bwd = (f0 - f(x - e)) / h
        rates[i] = max(0.0, -fwd, bwd)
    return float(np.linalg.norm(rates))


def numerical_hessian(f: Callable[[np.ndarray], float], theta, scale=None,
                      step=1e-2,
                      feasible: Callable[[np.ndarray], bool] | None = None) -> np.ndarray:
    """Central-difference Hessian of ``f`` at ``theta``.

    Differences are taken along ``theta + scale * s`` with ``|s_i| = step_i``
    (``step`` may be a scalar or per-coordinate); a step is halved until
    every point it touches passes ``feasible``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    p = theta.size
    scale = np.ones(p) if scale is None else np.asarray(scale, dtype=np.float64)
    steps = np.broadcast_to(np.asarray(step, dtype=np.float64), (p,))

    def ok(point) -> bool:
        return feasible is None or feasible(point)

    def shrink(h_i, h_j, i, j):
        for _ in range(60):
            pts = []
            for si in (1, -1):
                for sj in ((1, -1) if j is not None else (0,)):
                    d = np.zeros(p)
                    d[i] += si * h_i * scale[i]
                    if j is not None:
                        d[j] += sj * h_j * scale[j]
                    pts.append(theta + d)
            if all(ok(pt) for pt in pts):
                return h_i, h_j
            h_i *= 0.5
            h_j *= 0.5
        raise SingularHessian("no feasible finite-difference step around the estimate")

    f0 = f(theta)
    H = np.empty((p, p))
    h = np.empty(p)
    for i in range(p):
        h[i], _ = shrink(steps[i], steps[i], i, None)
        e = np.zeros(p)
        e[i] = h[i] * scale[i]
        H[i, i] = (f(theta + e) - 2.0 * f0 + f(theta - e)) / (h[i] * h[i])
    for i in range(p):
        for j in range(i + 1, p):
            hi, hj = shrink(h[i], h[j], i, j)
            ei = np.zeros(p)
            ej = np.zeros(p)
            ei[i] = hi * scale[i]
            ej[j] = hj * scale[j]
            val = (f(theta + ei + ej) - f(theta + ei - ej)
                   - f(theta - ei + ej) + f(theta - ei - ej)) / (4.0 * hi * hj)
            H[i, j] = H[j, i] = val
    return H / np.outer(scale, scale)


def standard_errors(loglik: Callable[[np.ndarray], float], theta, scale=None,
                    step=1e-2,
                    feasible: Callable[[np.ndarray], bool] | None = None):
    """Square roots of the diagonal of the inverse negative Hessian.

    Returns ``(se, cov)``. Raises :class:`SingularHessian` when the observed
    information is not positive definite.
    """
    theta = np.asarray(theta, dtype=np.float64)
    scale = np.ones(theta.size) if scale is None else np.asarray(scale, dtype=np.float64)
    H = numerical_hessian(loglik, theta, scale, step, feasible)
    # work in scaled coordinates, where the information matrix is O(1)
    info = -H * np.outer(scale, scale)
    if not np.all(np.isfinite(info)):
        raise SingularHessian("non-finite Hessian entries")
    info = 0.5 * (info + info.T)
    eig = np.linalg.eigvalsh(info)
    if eig[0] <= 0 or eig[0] < 1e-10 * eig[-1]:
        raise SingularHessian(f"information matrix not positive definite (eigenvalues {eig[0]:.3g}..{eig[-1]:.3g})")
    cov_s = np.linalg.inv(info)
    cov = cov_s * np.outer(scale, scale)
    return np.sqrt(np.diag(cov)), cov


# ------------------------------------------------------------ likelihood model


class _Problem:
    """Likelihood of one model on one panel with the optimizer's coordinates."""

    def __init__(self, panel: ReturnPanel, spec: ModelSpec, ols: FitResult, q0: float):
        self.panel = panel
        self.spec = spec
        self.family = spec.family
        self.code = _FAMILY_CODE[spec.family]
        self.X = np.ascontiguousarray(panel.design_matrix())
        self.y = np.ascontiguousarray(panel.y)
        self.n = self.y.size
        self.k = self.X.shape[1]
        self.mv = spec.include_mean_variance
        self.n_exog = spec.n_exog
        self.exog = np.ascontiguousarray(panel.variance_exog()) if self.n_exog else None
        self.q0 = q0
        self.beta_ols = ols.params
        # residuals are measured from the OLS fit so a shift in y cancels before the likelihood
        self.r_ols = np.ascontiguousarray(ols.residuals)
        self.se_ols = np.where(ols.std_errors > 0, ols.std_errors, 1.0)
        self.gm_scale = 0.1 / math.sqrt(q0)
        self.vx_scale = 1.0 if self.family == "egarch" else q0
        self.n_mean = self.k + int(self.mv)
        self.rejected = 0
        vp0 = self.start_variance()
        self.names = (MeanParams.from_vector(np.zeros(self.n_mean), panel.lag_order, self.mv).names()
                      + vp0.names(self.family))

    def start_variance(self) -> VarianceParams:
        va, vb = START_VA, START_VB
        if self.family == "egarch":
            vc = (1.0 - va) * math.log(self.q0) - vb * _SQRT_2_OVER_PI
            vp = VarianceParams(vc, va, vb, 0.0)
        elif self.family == "gjr":
            vp = VarianceParams(self.q0 * (1.0 - va - vb), va, vb, 0.0)
        else:
            vp = VarianceParams(self.q0 * (1.0 - va - vb), va, vb)
        if self.n_exog:
            vp = VarianceParams(vp.vc, vp.va, vp.vb, vp.gamma, vx=np.zeros(self.n_exog))
        return vp

    # coordinates -------------------------------------------------------------

    def split(self, theta):
        mean = theta[: self.n_mean]
        vp = VarianceParams.from_vector(theta[self.n_mean:], self.family, self.n_exog)
        return mean, vp

    def theta_from_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        mean = self.beta_ols + self.se_ols * x[: self.k]
        if self.mv:
            mean = np.append(mean, self.gm_scale * x[self.k])
        xv = x[self.n_mean:].copy()
        if self.n_exog:
            xv[-self.n_exog:] *= self.vx_scale
        vp = to_constrained(xv, self.family, self.n_exog)
        return np.concatenate([mean, vp.to_vector(self.family)])

    def x_from_theta(self, theta) -> np.ndarray:
        mean, vp = self.split(np.asarray(theta, dtype=np.float64))
        xm = (mean[: self.k] - self.beta_ols) / self.se_ols
        if self.mv:
            xm = np.append(xm, mean[self.k] / self.gm_scale)
        xv = to_unconstrained(vp, self.family)
        if self.n_exog:
            xv[-self.n_exog:] /= self.vx_scale
        return np.concatenate([xm, xv])

    # likelihood --------------------------------------------------------------

    def feasible(self, theta) -> bool:
        _, vp = self.split(theta)
        return satisfies_constraints(vp, self.family)

    def paths(self, theta):
        mean, vp = self.split(theta)
        if self.mv:
            mp = MeanParams.from_vector(mean, self.panel.lag_order, True)
            return residuals_and_variance(mp, vp, self.spec, self.panel, self.q0)
        e = self.r_ols - self.X @ (mean - self.beta_ols)
        if not satisfies_constraints(vp, self.family):
            raise ConstraintViolation(f"candidate outside the {self.family} region")
        xt = self.exog @ vp.vx if self.n_exog else np.zeros(self.n)
        gamma = 0.0 if vp.gamma is None else vp.gamma
        if self.code == _kernels.GARCH:
            q = _kernels.garch_path(vp.vc, vp.va, vp.vb, e, xt, self.q0)
        elif self.code == _kernels.GJR:
            q = _kernels.gjr_path(vp.vc, vp.va, vp.vb, gamma, e, xt, self.q0)
        else:
            q = _kernels.egarch_path(vp.vc, vp.va, vp.vb, gamma, e, xt, self.q0)
        return e, q

    def loglik(self, theta) -> float:
        try:
            e, q = self.paths(theta)
        except NonPositiveVariance:
            return -math.inf
        ll = _kernels.gaussian_loglik(e, q)
        return ll if math.isfinite(ll) else -math.inf

    def objective(self, x) -> float:
        """Average negative log-likelihood in optimizer coordinates."""
        try:
            theta = self.theta_from_x(x)
            ll = self.loglik(theta)
        except (ConstraintViolation, OverflowError):
            # transform is exact, but rounding at extreme coordinates can land on the boundary
            self.rejected += 1
            return _PENALTY
        if not math.isfinite(ll):
            return _PENALTY
        return -ll / self.n


def model_loglik(panel: ReturnPanel, spec: ModelSpec, mean: MeanParams,
                 variance: VarianceParams, q0: float) -> float:
    """Gaussian log-likelihood of given parameters on ``panel``."""
    e, q = residuals_and_variance(mean, variance, spec, panel, q0)
    return float(_kernels.gaussian_loglik(e, q))


# ----------------------------------------------------------------- optimizer


@dataclass
class _Run:
    x: np.ndarray
    fun: float
    gnorm: float
    stat: float
    nit: int
    history: list[float]
    message: str


def _minimize(problem: _Problem, x0: np.ndarray, opts: OptimizerOptions) -> _Run:
    f = problem.objective

    def grad(x):
        return numerical_gradient(f, x, opts.fd_rel_step, opts.fd_abs_step)

    history = [f(x0)]

    def record(intermediate_result):
        history.append(float(intermediate_result.fun))

    def bfgs(start):
        return optimize.minimize(
            f, start, jac=grad, method="BFGS", callback=record,
            options={"gtol": opts.gtol, "norm": 2, "maxiter": opts.max_iterations,
                     "xrtol": opts.xtol},
        )

    def measures(x):
        gnorm = float(np.linalg.norm(grad(x)))
        stat = gnorm if gnorm < opts.gtol else one_sided_stationarity(f, x, opts.kink_step)
        return gnorm, stat

    res = bfgs(x0)
    x, fun, nit, message = res.x, float(res.fun), int(res.nit), str(res.message)
    gnorm, stat = measures(x)
    # a fresh inverse-Hessian estimate often clears a line-search stall
    for _ in range(opts.bfgs_restarts):
        if min(gnorm, stat) < opts.gtol:
            break
        res = bfgs(x)
        nit += int(res.nit)
        if not res.fun < fun:
            break
        x, fun, message = res.x, float(res.fun), str(res.message)
        gnorm, stat = measures(x)
    if min(gnorm, stat) >= opts.gtol:
        # derivative-free fallback, then a quasi-Newton pass from its best vertex
        nm = optimize.minimize(
            f, x, method="Nelder-Mead", callback=record,
            options={"maxiter": 200 * x.size, "xatol": opts.xtol, "fatol": opts.ftol,
                     "adaptive": True},
        )
        nit += int(nm.nit)
        if nm.fun <= fun:
            res2 = bfgs(nm.x)
            nit += int(res2.nit)
            cand = res2 if res2.fun <= nm.fun else nm
            x, fun, message = cand.x, float(cand.fun), str(cand.message)
            gnorm, stat = measures(x)
    return _Run(x, fun, gnorm, stat, nit, history, message)


def _better(a: _Run, b: _Run) -> bool:
    if a.fun != b.fun:
        return a.fun < b.fun
    if min(a.gnorm, a.stat) != min(b.gnorm, b.stat):
        return min(a.gnorm, a.stat) < min(b.gnorm, b.stat)
    return tuple(a.x) < tuple(b.x)


def _scales(problem: _Problem, theta: np.ndarray) -> np.ndarray:
    mean, vp = problem.split(theta)
    s_mean = list(problem.se_ols)
    if problem.mv:
        s_mean.append(problem.gm_scale)
    if problem.family == "egarch":
        s_var = [0.05, 0.01, 0.01, 0.01]
    else:
        s_var = [0.1 * vp.vc, 0.01, 0.01] + ([0.01] if problem.family == "gjr" else [])
    s_var += [0.1 * problem.vx_scale] * problem.n_exog
    return np.asarray(s_mean + s_var, dtype=np.float64)


def fit(panel: ReturnPanel, spec: ModelSpec | None = None,
        opts: OptimizerOptions | None = None, ols: FitResult | None = None) -> FitResult:
    """Gaussian QML fit of the mean equation with a conditional-variance family.

    Starts from OLS mean coefficients, ``va = 0.85``, ``vb = 0.10`` and an
    intercept matching the OLS residual variance. ``q0``, the variance of the
    first row, is fixed at the OLS residual variance. When the optimizer
    ends above the gradient tolerance the best point found is returned with
    ``converged=False``.
    """
    spec = spec or ModelSpec()
    opts = opts or OptimizerOptions()
    if panel.lag_order != spec.lag_order:
        raise ValueError(f"panel has {panel.lag_order} lags, spec asks for {spec.lag_order}")
    ols = ols or ols_fit(panel)
    q0 = float(np.mean(ols.residuals ** 2))
    problem = _Problem(panel, spec, ols, q0)
    n_params = len(problem.names)
    if len(panel) < 10 * n_params:
        raise TooFewRows(f"{len(panel)} rows for {n_params} parameters (need {10 * n_params})")

    theta0 = np.concatenate([
        ols.params, [0.0] if problem.mv else [],
        problem.start_variance().to_vector(spec.family),
    ])
    x0 = problem.x_from_theta(theta0)
    start_ll = problem.loglik(theta0)

    rng = np.random.default_rng(opts.seed)
    starts = [x0] + [x0 + opts.jitter * rng.standard_normal(x0.size) for _ in range(opts.restarts)]
    best: _Run | None = None
    for xs in starts:
        run = _minimize(problem, xs, opts)
        if best is None or _better(run, best):
            best = run
    assert best is not None

    theta = problem.theta_from_x(best.x)
    loglik = problem.loglik(theta)
    e, q2 = problem.paths(theta)
    mean_vec, vp = problem.split(theta)
    mp = MeanParams.from_vector(mean_vec, panel.lag_order, problem.mv)

    # a kinked optimum (EGARCH |z| with a residual at zero) has no vanishing gradient
    converged = min(best.gnorm, best.stat) < opts.gtol
    hessian_ok = True
    message = best.message
    cov = None
    # wide steps on the mean block average over the kinks |e/Q| puts in the EGARCH likelihood
    steps = np.full(theta.size, opts.hessian_step)
    steps[: problem.n_mean] = opts.hessian_step_mean
    try:
        scale = _scales(problem, theta)
        se, cov = standard_errors(problem.loglik, theta, scale, steps, problem.feasible)
        # second pass with steps proportional to the first-pass standard errors
        se, cov = standard_errors(problem.loglik, theta, np.where(se > 0, se, scale),
                                  steps, problem.feasible)
    except SingularHessian as exc:
        hessian_ok = False
        se = np.full(theta.size, np.nan)
        message = f"{message}; {exc}"
        logger.warning("%s fit: %s", spec.family, exc)
    t, p, stars = _inference(theta, se, "normal")
    if not converged:
        logger.warning("%s fit did not converge (gradient norm %.3g)", spec.family, best.gnorm)
    return FitResult(
        family=spec.family, names=problem.names, params=theta, std_errors=se, t_stats=t,
        p_values=p, stars=stars, loglik=loglik, q2_path=q2, residuals=e, nobs=len(panel),
        converged=converged, iterations=best.nit, gradient_norm=best.gnorm,
        stationarity=best.stat, spec=spec,
        mean_params=mp, variance_params=vp, q0=q0, start_loglik=start_ll,
        hessian_ok=hessian_ok, p_dist="normal", message=message, history=best.history,
        rejected=problem.rejected, cov=cov,
    )

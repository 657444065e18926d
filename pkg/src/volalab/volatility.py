"""Mean equation, GARCH/EGARCH/GJR variance recursions and the Gaussian likelihood.

Variance parameters follow one naming scheme across families:

``vc``
    intercept (of the log variance for EGARCH)
``va``
    coefficient on the lagged variance (lagged log variance for EGARCH);
    reported as ``b``
``vb``
    coefficient on the lagged squared residual (on ``|e/Q|`` for EGARCH);
    reported as ``a``
``gamma``
    asymmetry term: ``gamma * e**2 * 1{e < 0}`` for GJR, ``gamma * e/Q`` for EGARCH
``vx``
    optional loadings on the nine variance regressors (weekday dummies, factors)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from . import _kernels
from .design import DUMMY_NAMES, ReturnPanel
from .errors import ConstraintViolation, DimensionMismatch, NonPositiveVariance

__all__ = [
    "Family",
    "FAMILIES",
    "MeanParams",
    "VarianceParams",
    "ModelSpec",
    "check_constraints",
    "satisfies_constraints",
    "mean_residuals",
    "filter_garch",
    "filter_egarch",
    "filter_gjr",
    "filter_variance",
    "residuals_and_variance",
    "gaussian_loglik",
    "news_impact",
    "unconditional_variance",
]

Family = Literal["garch", "egarch", "gjr"]
FAMILIES: tuple[str, ...] = ("garch", "egarch", "gjr")
_FAMILY_CODE = {"garch": _kernels.GARCH, "egarch": _kernels.EGARCH, "gjr": _kernels.GJR}
N_VARIANCE_REGRESSORS = 9
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)  # E|z| for standard normal z


def _family(name: str) -> str:
    key = name.lower()
    if key not in _FAMILY_CODE:
        raise ValueError(f"unknown variance family {name!r}")
    return key


@dataclass(frozen=True, eq=False)
class MeanParams:
    const: float = 0.0
    tue: float = 0.0
    wed: float = 0.0
    thu: float = 0.0
    fri: float = 0.0
    rf: float = 0.0
    mkt_rf: float = 0.0
    smb: float = 0.0
    hml: float = 0.0
    umd: float = 0.0
    lags: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gamma_m: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "lags", np.atleast_1d(np.asarray(self.lags, dtype=np.float64)))

    @property
    def lag_order(self) -> int:
        return self.lags.size

    def coefficients(self) -> np.ndarray:
        """Coefficients aligned with :meth:`ReturnPanel.design_matrix`."""
        head = [self.const, self.tue, self.wed, self.thu, self.fri,
                self.rf, self.mkt_rf, self.smb, self.hml, self.umd]
        return np.concatenate([np.asarray(head, dtype=np.float64), self.lags])

    def to_vector(self) -> np.ndarray:
        vec = self.coefficients()
        if self.gamma_m is not None:
            vec = np.append(vec, self.gamma_m)
        return vec

    @classmethod
    def from_vector(cls, vec, lag_order: int, mean_variance: bool = False) -> "MeanParams":
        vec = np.asarray(vec, dtype=np.float64)
        expected = 10 + lag_order + int(mean_variance)
        if vec.size != expected:
            raise DimensionMismatch(f"expected {expected} mean coefficients, got {vec.size}")
        return cls(*map(float, vec[:10]), lags=vec[10:10 + lag_order].copy(),
                   gamma_m=float(vec[-1]) if mean_variance else None)

    def names(self) -> list[str]:
        out = ["const", "tue", "wed", "thu", "fri", "rf", "mkt_rf", "smb", "hml", "umd"]
        out += [f"lag{i}" for i in range(1, self.lag_order + 1)]
        if self.gamma_m is not None:
            out.append("gamma_m")
        return out


@dataclass(frozen=True, eq=False)
class VarianceParams:
    vc: float
    va: float
    vb: float
    gamma: Optional[float] = None
    vx: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.vx is not None:
            object.__setattr__(self, "vx", np.asarray(self.vx, dtype=np.float64).ravel())

    def to_vector(self, family: str) -> np.ndarray:
        vec = [self.vc, self.va, self.vb]
        if _family(family) != "garch":
            vec.append(0.0 if self.gamma is None else self.gamma)
        out = np.asarray(vec, dtype=np.float64)
        if self.vx is not None:
            out = np.concatenate([out, self.vx])
        return out

    @classmethod
    def from_vector(cls, vec, family: str, n_exog: int = 0) -> "VarianceParams":
        vec = np.asarray(vec, dtype=np.float64)
        asym = _family(family) != "garch"
        k = 3 + int(asym)
        if vec.size != k + n_exog:
            raise DimensionMismatch(f"expected {k + n_exog} variance parameters, got {vec.size}")
        return cls(float(vec[0]), float(vec[1]), float(vec[2]),
                   gamma=float(vec[3]) if asym else None,
                   vx=vec[k:].copy() if n_exog else None)

    def names(self, family: str) -> list[str]:
        out = ["vc", "va", "vb"]
        if _family(family) != "garch":
            out.append("gamma")
        if self.vx is not None:
            out += ["vx_" + n[2:] for n in DUMMY_NAMES] + ["vx_rf", "vx_mkt_rf", "vx_smb", "vx_hml", "vx_umd"]
        return out


@dataclass(frozen=True)
class ModelSpec:
    family: Family = "garch"
    lag_order: int = 1
    include_mean_variance: bool = False
    variance_regressors: Literal["none", "all"] = "none"
    distribution: Literal["gaussian"] = "gaussian"

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", _family(self.family))
        if self.lag_order < 0:
            raise ValueError("lag_order must be >= 0")
        if self.variance_regressors not in ("none", "all"):
            raise ValueError("variance_regressors must be 'none' or 'all'")
        if self.distribution != "gaussian":
            raise ValueError("only gaussian innovations are supported")

    @property
    def n_exog(self) -> int:
        return N_VARIANCE_REGRESSORS if self.variance_regressors == "all" else 0


# ---------------------------------------------------------------- constraints


def _violations(vp: VarianceParams, family: str) -> list[str]:
    family = _family(family)
    bad = []
    values = [vp.vc, vp.va, vp.vb] + ([] if vp.gamma is None else [vp.gamma])
    if not all(math.isfinite(v) for v in values):
        return ["non-finite parameter"]
    if family != "garch" and vp.gamma is None:
        bad.append(f"{family} needs an asymmetry coefficient")
    if family == "egarch":
        if not abs(vp.va) < 1.0:
            bad.append("|va| < 1")
        return bad
    gamma = vp.gamma or 0.0
    if not vp.vc > 0.0:
        bad.append("vc > 0")
    if vp.va < 0.0:
        bad.append("va >= 0")
    if vp.vb < 0.0:
        bad.append("vb >= 0")
    if family == "garch":
        if not vp.va + vp.vb < 1.0:
            bad.append("va + vb < 1")
    else:
        if vp.vb + gamma < 0.0:
            bad.append("vb + gamma >= 0")
        if not vp.va + vp.vb + 0.5 * gamma < 1.0:
            bad.append("va + vb + gamma/2 < 1")
    return bad


def satisfies_constraints(vp: VarianceParams, family: str) -> bool:
    return not _violations(vp, family)


def check_constraints(vp: VarianceParams, family: str) -> None:
    bad = _violations(vp, family)
    if bad:
        raise ConstraintViolation(f"{family} parameters violate: {', '.join(bad)}")


def unconditional_variance(vp: VarianceParams, family: str) -> float:
    """Long-run variance implied by the recursion (no variance regressors).

    For EGARCH this is ``exp`` of the stationary mean of the log variance,
    with ``E|z| = sqrt(2/pi)``.
    """
    family = _family(family)
    if family == "egarch":
        return math.exp((vp.vc + vp.vb * _SQRT_2_OVER_PI) / (1.0 - vp.va))
    persistence = vp.va + vp.vb + (0.5 * vp.gamma if family == "gjr" else 0.0)
    return vp.vc / (1.0 - persistence)


# ---------------------------------------------------------------- mean equation


def mean_residuals(params: MeanParams, panel: ReturnPanel, q_prev=None) -> np.ndarray:
    """``y - fitted mean``. ``q_prev[t]`` is the variance of the row before ``t``
    and is required exactly when ``params.gamma_m`` is set."""
    if params.lag_order != panel.lag_order:
        raise DimensionMismatch(
            f"{params.lag_order} lag coefficients for a panel with {panel.lag_order} lags")
    e = panel.y - panel.design_matrix() @ params.coefficients()
    if params.gamma_m is None:
        if q_prev is not None:
            raise DimensionMismatch("lagged variance supplied without a mean-variance coefficient")
        return e
    if q_prev is None:
        raise DimensionMismatch("mean-variance coefficient set but no lagged variance path")
    q_prev = np.asarray(q_prev, dtype=np.float64)
    if q_prev.shape != e.shape:
        raise DimensionMismatch("lagged variance path has the wrong length")
    return e - params.gamma_m * q_prev


# ----------------------------------------------------------------- recursions


def _exog_term(vp: VarianceParams, n: int, exog) -> np.ndarray:
    if vp.vx is None:
        return np.zeros(n)
    if exog is None:
        raise DimensionMismatch("variance regressor loadings given without regressors")
    exog = np.asarray(exog, dtype=np.float64)
    if exog.ndim != 2 or exog.shape != (n, vp.vx.size):
        raise DimensionMismatch(f"variance regressors must be ({n}, {vp.vx.size})")
    return exog @ vp.vx


def _prepare(e, q0) -> np.ndarray:
    e = np.ascontiguousarray(e, dtype=np.float64)
    if e.ndim != 1:
        raise DimensionMismatch("residuals must be one-dimensional")
    if not q0 > 0:
        raise NonPositiveVariance(f"initial variance {q0} must be positive")
    return e


def _checked(q: np.ndarray) -> np.ndarray:
    if not np.all(q > 0) or not np.all(np.isfinite(q)):
        raise NonPositiveVariance("conditional variance left (0, inf)")
    return q


def filter_garch(vp: VarianceParams, e, exog=None, q0: float = 1.0) -> np.ndarray:
    """GARCH(1,1): ``Q2[t] = vc + vx.x[t] + va*Q2[t-1] + vb*e[t-1]**2``, ``Q2[0] = q0``.

    With ``va = 0`` this is ARCH(1).
    """
    check_constraints(vp, "garch")
    e = _prepare(e, q0)
    q = _kernels.garch_path(vp.vc, vp.va, vp.vb, e, _exog_term(vp, e.size, exog), float(q0))
    return _checked(q)


def filter_gjr(vp: VarianceParams, e, exog=None, q0: float = 1.0) -> np.ndarray:
    """GJR: GARCH plus ``gamma * e[t-1]**2`` whenever ``e[t-1] < 0``."""
    check_constraints(vp, "gjr")
    e = _prepare(e, q0)
    q = _kernels.gjr_path(vp.vc, vp.va, vp.vb, vp.gamma, e,
                          _exog_term(vp, e.size, exog), float(q0))
    return _checked(q)


def filter_egarch(vp: VarianceParams, e, exog=None, q0: float = 1.0) -> np.ndarray:
    """EGARCH(1,1) on the log variance; positive for any real parameters.

    ``log Q2[t] = vc + vx.x[t] + va*log Q2[t-1] + vb*|z| + gamma*z`` with
    ``z = e[t-1] / sqrt(Q2[t-1])``. Only ``|va| < 1`` is enforced.
    """
    check_constraints(vp, "egarch")
    e = _prepare(e, q0)
    q = _kernels.egarch_path(vp.vc, vp.va, vp.vb, vp.gamma, e,
                             _exog_term(vp, e.size, exog), float(q0))
    return _checked(q)


_FILTERS = {"garch": filter_garch, "egarch": filter_egarch, "gjr": filter_gjr}


def filter_variance(vp: VarianceParams, family: str, e, exog=None, q0: float = 1.0) -> np.ndarray:
    return _FILTERS[_family(family)](vp, e, exog, q0)


def residuals_and_variance(mp: MeanParams, vp: VarianceParams, spec: ModelSpec,
                           panel: ReturnPanel, q0: float) -> tuple[np.ndarray, np.ndarray]:
    """Residual and conditional-variance paths of the full model on ``panel``."""
    exog = panel.variance_exog() if vp.vx is not None else None
    if mp.gamma_m is None:
        e = mean_residuals(mp, panel)
        return e, filter_variance(vp, spec.family, e, exog, q0)
    check_constraints(vp, spec.family)
    if not q0 > 0:
        raise NonPositiveVariance("initial variance must be positive")
    base = MeanParams(*mp.coefficients()[:10], lags=mp.lags)
    r = np.ascontiguousarray(mean_residuals(base, panel))
    e, q = _kernels.joint_path(_FAMILY_CODE[spec.family], vp.vc, vp.va, vp.vb,
                               0.0 if vp.gamma is None else vp.gamma, r, mp.gamma_m,
                               _exog_term(vp, r.size, exog), float(q0))
    return e, _checked(q)


# ----------------------------------------------------------------- likelihood


def gaussian_loglik(e, q2) -> float:
    """``sum -0.5 * (log 2pi + log Q2 + e**2 / Q2)``, compensated summation."""
    e = np.asarray(e, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    if e.shape != q2.shape:
        raise DimensionMismatch("residual and variance paths differ in length")
    if not np.all(q2 > 0):
        raise NonPositiveVariance("variance path must be positive")
    return float(_kernels.gaussian_loglik(np.ascontiguousarray(e), np.ascontiguousarray(q2)))


def news_impact(vp: VarianceParams, family: str, shocks, q_bar: float) -> np.ndarray:
    """Next-period variance as a function of today's shock, lagged variance fixed at ``q_bar``."""
    family = _family(family)
    if not q_bar > 0:
        raise ValueError("q_bar must be positive")
    x = np.asarray(shocks, dtype=np.float64)
    if family == "egarch":
        z = x / math.sqrt(q_bar)
        return np.exp(vp.vc + vp.va * math.log(q_bar) + vp.vb * np.abs(z) + vp.gamma * z)
    out = vp.vc + vp.va * q_bar + vp.vb * x * x
    if family == "gjr":
        out = out + vp.gamma * x * x * (x < 0)
    return out

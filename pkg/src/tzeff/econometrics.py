"""Unit-root, cointegration, convergence and variance-ratio tests.

All functions take plain price or return arrays and return small frozen
result records. Numerics are numpy/scipy; the Bartlett long-run variance
runs through :mod:`tzeff.kernels`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from . import kernels
from .errors import DegenerateRegressionError, InsufficientDataError

# MacKinnon (1994) response surface for the constant-only Dickey-Fuller tau,
# one I(1) series (Table 3 coefficients as tabulated by MacKinnon;
# also the values behind statsmodels.tsa.adfvalues "c", N=1).
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_TAU_SMALLP = (2.1659, 1.4412, 0.038269)
_TAU_LARGEP = (1.7339, 0.93202, -0.12745, -0.010368)

JOHANSEN_CRIT5_RANK0 = 20.262
JOHANSEN_CRIT5_RANK1 = 9.165

ADF_MIN_LENGTH = 20
JOHANSEN_MIN_LENGTH = 30
CONVERGENCE_MIN_N = 10
CONVERGENCE_WARN_N = 20


def mackinnon_p(tau: float) -> float:
    """Approximate p-value of an ADF tau statistic, constant-only case."""
    if tau > _TAU_MAX:
        return 1.0
    if tau < _TAU_MIN:
        return 0.0
    coef = _TAU_SMALLP if tau <= _TAU_STAR else _TAU_LARGEP
    return float(stats.norm.cdf(np.polyval(coef[::-1], tau)))


@dataclass(frozen=True)
class AdfResult:
    t_stat: float
    p_value: float
    lags: int
    n: int

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level


def _ols(y: np.ndarray, X: np.ndarray):
    n, k = X.shape
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0) * math.sqrt(n):
        raise DegenerateRegressionError("singular/degenerate regression: collinear regressors")
    beta = linalg.solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    dof = n - k
    s2 = float(resid @ resid) / dof
    scale = float(np.abs(y).max(initial=0.0)) or 1.0
    if s2 <= (1e-14 * scale) ** 2:
        raise DegenerateRegressionError("singular/degenerate regression: zero residual variance")
    rinv = linalg.solve_triangular(r, np.eye(k))
    cov = s2 * (rinv @ rinv.T)
    return beta, np.sqrt(np.diag(cov)), resid


def adf_test(series, lags: int = 1) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and ``lags`` lagged differences."""
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1 or len(y) < ADF_MIN_LENGTH:
        raise InsufficientDataError(f"ADF needs at least {ADF_MIN_LENGTH} observations, got {len(y)}", n=len(y))
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if lags < 0:
        raise ValueError("lags must be non-negative")
    dy = np.diff(y)
    n = len(dy) - lags
    cols = [np.ones(n), y[lags:-1]]
    cols += [dy[lags - i : len(dy) - i] for i in range(1, lags + 1)]
    X = np.column_stack(cols)
    beta, se, _ = _ols(dy[lags:], X)
    tau = float(beta[1] / se[1])
    return AdfResult(tau, mackinnon_p(tau), lags, n)


@dataclass(frozen=True)
class JohansenResult:
    trace_rank0: float
    trace_rank1: float
    eigenvalues: tuple[float, float]
    n: int
    beta: tuple[float, float, float]
    beta_se: tuple[float, float]
    crit5_rank0: float = JOHANSEN_CRIT5_RANK0
    crit5_rank1: float = JOHANSEN_CRIT5_RANK1
    degenerate: bool = False

    @property
    def rejects_rank0(self) -> bool:
        return self.trace_rank0 > self.crit5_rank0

    @property
    def rejects_rank1(self) -> bool:
        return self.trace_rank1 > self.crit5_rank1


def _partial_out(A: np.ndarray, Z: np.ndarray | None) -> np.ndarray:
    if Z is None:
        return A
    coef, *_ = np.linalg.lstsq(Z, A, rcond=None)
    return A - Z @ coef


def _johansen_residuals(x, y, vecm_lags: int):
    Y = np.column_stack([np.asarray(x, float), np.asarray(y, float)])
    if Y.shape[0] != len(x) or len(x) != len(y):
        raise ValueError("x and y must have equal length")
    k = vecm_lags
    dY = np.diff(Y, axis=0)
    n = len(dY) - k
    if n < JOHANSEN_MIN_LENGTH:
        raise InsufficientDataError(
            f"Johansen needs at least {JOHANSEN_MIN_LENGTH} observations after lagging, got {n}", n=n
        )
    Z0 = dY[k:]
    # Restricted constant: the intercept lives inside the cointegrating space.
    Z1 = np.column_stack([Y[k:-1], np.ones(n)])
    Z2 = np.column_stack([dY[k - i : len(dY) - i] for i in range(1, k + 1)]) if k else None
    return _partial_out(Z0, Z2), _partial_out(Z1, Z2), n


def johansen_trace(x, y, vecm_lags: int = 1) -> JohansenResult:
    """Johansen trace test for a bivariate system, restricted constant.

    ``beta`` is the first cointegrating vector over ``(x, y, 1)`` normalized
    so the ``x`` coefficient is one; ``beta_se`` are the asymptotic standard
    errors of the ``y`` coefficient and the constant.
    """
    R0, R1, n = _johansen_residuals(x, y, vecm_lags)
    S00 = R0.T @ R0 / n
    S11 = R1.T @ R1 / n
    S01 = R0.T @ R1 / n

    exact = _exact_relation(R1)
    if exact is not None:
        return _degenerate_johansen(R0, R1, n, exact)

    try:
        A = S01.T @ np.linalg.solve(S00, S01)
        lam, vecs = linalg.eigh((A + A.T) / 2, S11)
    except (np.linalg.LinAlgError, linalg.LinAlgError) as exc:
        raise DegenerateRegressionError(f"Johansen eigenproblem failed: {exc}") from None
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order][:2], 0.0, 1.0 - 1e-15)
    vecs = vecs[:, order]
    trace0 = float(-n * np.sum(np.log1p(-lam)))
    trace1 = float(-n * np.log1p(-lam[1]))

    b = vecs[:, 0]
    if abs(b[0]) < 1e-300:
        raise DegenerateRegressionError("cointegrating vector has zero x coefficient")
    b = b / b[0]
    alpha = S01 @ b / float(b @ S11 @ b)
    omega = S00 - np.outer(alpha, alpha) * float(b @ S11 @ b)
    try:
        info = float(alpha @ np.linalg.solve(omega, alpha))
        H = S11[1:, 1:]
        cov = np.linalg.inv(H) / (n * info)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.array([np.nan, np.nan])
    return JohansenResult(
        trace_rank0=trace0,
        trace_rank1=trace1,
        eigenvalues=(float(lam[0]), float(lam[1])),
        n=n,
        beta=tuple(float(v) for v in b),
        beta_se=(float(se[0]), float(se[1])),
    )


def _exact_relation(R1: np.ndarray) -> np.ndarray | None:
    _, s, vt = np.linalg.svd(R1, full_matrices=False)
    if s[0] == 0 or s[-1] > 1e-10 * s[0]:
        return None
    return vt[-1]


def _degenerate_johansen(R0, R1, n, relation) -> JohansenResult:
    # An exact linear relation among the lagged levels: canonical correlation
    # one along it, the remaining correlation from the reduced system.
    if abs(relation[0]) < 1e-12:
        raise DegenerateRegressionError("levels are collinear with a zero x coefficient")
    b = relation / relation[0]

    def basis(M):
        u, s, _ = np.linalg.svd(M, full_matrices=False)
        return u[:, s > 1e-10 * s[0]] if s[0] > 0 else u[:, :0]

    q0, q1 = basis(R0), basis(R1)
    rho = np.linalg.svd(q0.T @ q1, compute_uv=False) if q0.size and q1.size else np.zeros(1)
    lam1 = float(np.clip(rho.max() ** 2 if rho.size else 0.0, 0.0, 1.0 - 1e-15))
    return JohansenResult(
        trace_rank0=math.inf,
        trace_rank1=float(-n * math.log1p(-lam1)),
        eigenvalues=(1.0, lam1),
        n=n,
        beta=tuple(float(v) for v in b),
        beta_se=(0.0, 0.0),
        degenerate=True,
    )


@dataclass(frozen=True)
class ConvergenceResult:
    alpha: float
    nw_se: float
    t_stat: float
    p_value: float
    n: int
    nw_lag: int
    degenerate: bool = False
    small_sample: bool = False

    def conf_int(self, level: float = 0.95) -> tuple[float, float]:
        q = stats.t.ppf(0.5 + level / 2, self.n - 1)
        return self.alpha - q * self.nw_se, self.alpha + q * self.nw_se


def newey_west_lag(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def newey_west_se(resid, lag: int) -> float:
    """HAC standard error of a sample mean from demeaned residuals."""
    e = np.ascontiguousarray(resid, dtype=np.float64)
    return math.sqrt(max(kernels.bartlett_lrv(e, int(lag)), 0.0) / len(e))


def convergence_test(target, portfolio, nw_lag: int | None = None) -> ConvergenceResult:
    """Regress the price gap on a constant with Newey-West standard errors."""
    a = np.asarray(target, dtype=np.float64)
    b = np.asarray(portfolio, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("target and portfolio must be aligned")
    n = len(a)
    if n < CONVERGENCE_MIN_N:
        raise InsufficientDataError(f"convergence test needs at least {CONVERGENCE_MIN_N} observations, got {n}", n=n)
    d = a - b
    alpha = float(d.mean())
    resid = d - alpha
    lag = newey_west_lag(n) if nw_lag is None else int(nw_lag)
    small = n < CONVERGENCE_WARN_N
    if small:
        warnings.warn(f"convergence test on only {n} observations", stacklevel=2)
    if float(np.abs(resid).max()) <= 1e-9:
        t = 0.0 if abs(alpha) <= 1e-9 else math.copysign(math.inf, alpha)
        return ConvergenceResult(alpha, 0.0, t, 1.0 if t == 0.0 else 0.0, n, lag, True, small)
    se = newey_west_se(resid, lag)
    t = alpha / se
    p = float(2.0 * stats.t.sf(abs(t), n - 1))
    return ConvergenceResult(alpha, se, t, p, n, lag, False, small)


@dataclass(frozen=True)
class VarianceRatioResult:
    sd_x: float
    sd_y: float
    F: float
    df: tuple[int, int]
    p_two_sided: float
    p_lower: float
    p_upper: float


def variance_ratio_test(x, y) -> VarianceRatioResult:
    """Two-sample F test of equal variances."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 3 or len(y) < 3:
        raise InsufficientDataError("variance ratio needs at least 3 observations per sample")
    vx, vy = float(np.var(x, ddof=1)), float(np.var(y, ddof=1))
    if vy == 0.0:
        raise DegenerateRegressionError("zero variance in the denominator sample")
    if vx == 0.0:
        raise DegenerateRegressionError("zero variance in the numerator sample")
    F = vx / vy
    d1, d2 = len(x) - 1, len(y) - 1
    lower = float(stats.f.cdf(F, d1, d2))
    upper = float(stats.f.sf(F, d1, d2))
    two = min(1.0, 2.0 * min(lower, upper))
    return VarianceRatioResult(math.sqrt(vx), math.sqrt(vy), F, (d1, d2), two, lower, upper)


def log_returns(prices) -> np.ndarray:
    p = np.asarray(prices, dtype=np.float64)
    if np.any(p <= 0):
        raise ValueError("log returns need strictly positive prices")
    return np.diff(np.log(p))


def diff_returns(prices) -> np.ndarray:
    return np.diff(np.asarray(prices, dtype=np.float64))


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    median: float
    max: float
    min: float
    sd: float
    skewness: float | None
    kurtosis: float | None
    n: int


def descriptive_stats(series) -> DescriptiveStats:
    """Sample moments; kurtosis is not excess (normal gives 3). Skewness and
    kurtosis are ``None`` for a constant series."""
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise InsufficientDataError("descriptive statistics need at least 2 observations", n=n)
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    sd = float(np.std(x, ddof=1))
    if m2 <= (1e-12 * max(abs(mean), 1.0)) ** 2:
        skew = kurt = None
        sd = 0.0
    else:
        skew = float(np.mean(dev**3) / m2**1.5)
        kurt = float(np.mean(dev**4) / m2**2)
    return DescriptiveStats(mean, float(np.median(x)), float(x.max()), float(x.min()), sd, skew, kurt, n)

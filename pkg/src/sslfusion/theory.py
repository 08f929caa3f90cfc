"""Closed-form predictions for the minimal model.

Everything here assumes the robot has converged: the learned slope equals
``E[t | x_f] / x_f`` and the conditional-variance proxy equals its population
value. The fused error is assembled from the slope, the proxy and the fusion
weights. Do not replace it with the single-fraction simplification that
circulates for this model: that fraction gives 0.846 at (6.25, 1, 1), while
the composed expression (and direct simulation) give 0.489.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

from .model import ModelParams, ParameterError

log = logging.getLogger(__name__)

UNBOUNDED = math.inf

_ROOT_RTOL = 1e-6


def slope(params: ModelParams) -> float:
    """Asymptotic least-squares slope of ``x_g`` on ``x_f``."""
    return params.sigma_t2 / (params.sigma_f2 + params.sigma_t2)


def conditional_variance(params: ModelParams) -> float:
    """Population value of var(y_f) - cov(y_f, x_g)^2 / var(x_g), with y_f = a x_f."""
    st, sg, sf = params.as_tuple()
    return st**2 / (sf + st) - st**4 / ((st + sf) ** 2 * (st + sg))


def conditional_variance_factored(params: ModelParams) -> float:
    """Same quantity over a common denominator; no cancellation for small sigma_t2."""
    st, sg, sf = params.as_tuple()
    return st**2 * (st * sg + sf * st + sf * sg) / ((st + sf) ** 2 * (st + sg))


def fusion_weights(params: ModelParams) -> tuple[float, float]:
    """``(alpha, beta)``: weights on the learned cue and on ``x_g``."""
    s = conditional_variance_factored(params)
    sg = params.sigma_g2
    return sg / (sg + s), s / (sg + s)


def expected_error_primary(params: ModelParams) -> float:
    return params.sigma_g2


def expected_error_fused(params: ModelParams) -> float:
    """E[(alpha*a*x_f + beta*x_g - t)^2] with all quantities at convergence."""
    st, sg, sf = params.as_tuple()
    a = slope(params)
    alpha, beta = fusion_weights(params)
    return (alpha * a + beta - 1.0) ** 2 * st + (alpha * a) ** 2 * sf + beta**2 * sg


def oracle_fusion_estimate(params: ModelParams, x_g, x_f):
    """MAP estimate of ``t`` for an observer that knows every variance.

    The posterior mode weights each cue and the zero-mean prior by precision:
    ``st (sf x_g + sg x_f) / (sg sf + st sf + st sg)``. Its mean squared error
    is the posterior variance, a lower bound for any estimator. Benchmark only;
    the robot never has access to ``sigma_t2`` or ``sigma_f2``.
    """
    st, sg, sf = params.as_tuple()
    return st * (sf * x_g + sg * x_f) / (sg * sf + st * sf + st * sg)


def _fused_minus_primary(sigma_t2: float, sigma_g2: float, sigma_f2: float) -> float:
    p = ModelParams(sigma_t2, sigma_g2, sigma_f2)
    return expected_error_fused(p) - sigma_g2


def closed_form_threshold(sigma_t2: float, sigma_g2: float) -> float:
    """The radical expression for the critical ``sigma_f2``; no cross-check."""
    st, sg = sigma_t2, sigma_g2
    radical = math.sqrt(17 * sg**2 * st**4 + 18 * sg * st**5 + st**6)
    return -0.5 * (2 * sg**2 * st + 3 * st**2 * sg + st**3 + radical) / (sg**2 - st**2)


def bisect_threshold(sigma_t2: float, sigma_g2: float, *, rtol: float = 1e-13) -> float:
    """Root of e_fused(sigma_f2) - sigma_g2 by bracketing and bisection.

    Only meaningful when sigma_t2 > sigma_g2: the difference is negative for
    small sigma_f2 and tends to sigma_t2 - sigma_g2 > 0 as sigma_f2 grows.
    """
    if sigma_t2 <= sigma_g2:
        raise ValueError("no finite threshold when sigma_t2 <= sigma_g2")
    lo, hi = sigma_g2 * 1e-6, sigma_g2
    while _fused_minus_primary(sigma_t2, sigma_g2, lo) >= 0:
        lo /= 2
        if lo < 1e-300:
            raise ArithmeticError("could not bracket threshold from below")
    while _fused_minus_primary(sigma_t2, sigma_g2, hi) <= 0:
        lo, hi = hi, hi * 2
        if hi > 1e300:
            raise ArithmeticError("could not bracket threshold from above")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if _fused_minus_primary(sigma_t2, sigma_g2, mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def sigma_f2_threshold(sigma_t2: float, sigma_g2: float) -> float:
    """Critical secondary-cue variance above which fusion stops helping.

    Returns ``math.inf`` when ``sigma_t2 <= sigma_g2`` (fusion always helps).
    The closed form is checked against a bisection root of the fused-error
    equation; when they disagree by more than 1e-6 relative (which happens
    close to ``sigma_t2 == sigma_g2`` where the denominator cancels) the
    bisection root is returned instead.
    """
    if not (sigma_t2 > 0 and sigma_g2 > 0) or not math.isfinite(sigma_t2 + sigma_g2):
        raise ParameterError("variances must be finite and strictly positive")
    if sigma_t2 <= sigma_g2:
        return UNBOUNDED
    root = bisect_threshold(sigma_t2, sigma_g2)
    try:
        closed = closed_form_threshold(sigma_t2, sigma_g2)
    except (ZeroDivisionError, OverflowError):
        closed = math.nan
    if math.isfinite(closed) and abs(closed - root) <= _ROOT_RTOL * root:
        return closed
    log.warning(
        "closed-form threshold %r disagrees with bisection root %r at (%g, %g); using root",
        closed, root, sigma_t2, sigma_g2,
    )
    return root


def sigma_yf2_threshold(sigma_t2: float, sigma_g2: float) -> float:
    """Threshold restated on the learned cue's variance: a(C)^2 * C."""
    c = sigma_f2_threshold(sigma_t2, sigma_g2)
    if math.isinf(c):
        return UNBOUNDED
    a = sigma_t2 / (sigma_t2 + c)
    return a * a * c


def fusion_favorable(params: ModelParams) -> tuple[bool, str | None]:
    """Whether fusing beats the primary cue, and which condition grants it.

    Returns ``(True, "i")`` for a strong prior (sigma_t2 <= sigma_g2),
    ``(True, "ii")`` for an accurate enough secondary cue, else ``(False, None)``.
    Sitting exactly on the threshold counts as not favorable.
    """
    if params.sigma_t2 <= params.sigma_g2:
        return True, "i"
    if params.sigma_f2 < sigma_f2_threshold(params.sigma_t2, params.sigma_g2):
        return True, "ii"
    return False, None


@dataclass(frozen=True)
class TheoryReport:
    sigma_t2: float
    sigma_g2: float
    sigma_f2: float
    a_star: float
    s_star: float
    alpha: float
    beta: float
    e_primary: float
    e_fused: float
    favorable: bool
    condition: str | None
    sigma_f2_threshold: float
    c_rhs: float
    sigma_yf2_threshold: float

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("sigma_f2_threshold", "c_rhs", "sigma_yf2_threshold"):
            if math.isinf(d[key]):
                d[key] = "unbounded"
        return d


def theory_report(params: ModelParams) -> TheoryReport:
    alpha, beta = fusion_weights(params)
    favorable, condition = fusion_favorable(params)
    c = sigma_f2_threshold(params.sigma_t2, params.sigma_g2)
    return TheoryReport(
        sigma_t2=params.sigma_t2,
        sigma_g2=params.sigma_g2,
        sigma_f2=params.sigma_f2,
        a_star=slope(params),
        s_star=conditional_variance(params),
        alpha=alpha,
        beta=beta,
        e_primary=expected_error_primary(params),
        e_fused=expected_error_fused(params),
        favorable=favorable,
        condition=condition,
        sigma_f2_threshold=c,
        c_rhs=c,
        sigma_yf2_threshold=sigma_yf2_threshold(params.sigma_t2, params.sigma_g2),
    )

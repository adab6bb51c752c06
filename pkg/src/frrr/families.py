"""Natural exponential families with canonical and non-canonical links.

Each family is described by its log-partition function b and a strictly
increasing link, so that the natural parameter solves (h o b')(theta) = eta
for a linear predictor eta.  Families with an open natural-parameter boundary
(gamma-log, negbin-log) are clipped a configurable margin away from it so
that the curvature bounds stay finite.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_ndtr
from scipy.stats import norm

FAMILY_IDS = (
    "gaussian",
    "bernoulli_logit",
    "bernoulli_probit",
    "poisson_log",
    "gamma_log",
    "negbin_log",
)

# families whose natural domain is the open half-line (-inf, 0)
_NEGATIVE_DOMAIN = ("gamma_log", "negbin_log")


class InvalidParameterError(ValueError):
    """Natural parameter outside the family domain."""


@dataclass(frozen=True)
class FamilySpec:
    """One exponential family plus link, with a configured parameter interval.

    ``a`` is the known dispersion; ``k`` is the gamma shape or the negative
    binomial failure count.  ``theta_lo``/``theta_hi`` restrict the natural
    parameter; they are intersected with the family's natural domain, and
    ``clip_margin`` is the distance kept from an open domain boundary.
    """

    family: str
    a: float = 1.0
    k: float = None
    theta_lo: float = -np.inf
    theta_hi: float = np.inf
    clip_margin: float = 1e-3

    def __post_init__(self):
        if self.family not in FAMILY_IDS:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.a > 0:
            raise ValueError("dispersion a must be positive")
        if not self.clip_margin > 0:
            raise ValueError("clip_margin must be positive")
        if self.k is None:
            # gamma ties dispersion and shape as a = 1/k; negbin defaults to 1
            k = 1.0 / self.a if self.family == "gamma_log" else 1.0
            object.__setattr__(self, "k", float(k))
        if not self.k > 0:
            raise ValueError("k must be positive")
        if self.family == "gamma_log" and abs(self.a * self.k - 1.0) > 1e-12:
            raise ValueError("gamma_log requires a = 1/k")
        if self.family in ("bernoulli_logit", "bernoulli_probit",
                           "poisson_log", "negbin_log") and self.a != 1.0:
            raise ValueError(f"{self.family} has fixed dispersion a = 1")
        if self.theta_min > self.theta_max:
            raise ValueError("configured theta interval is empty")

    @property
    def theta_min(self):
        """Lower end of the effective natural-parameter interval."""
        return self.theta_lo

    @property
    def theta_max(self):
        """Upper end, kept clip_margin away from an open boundary."""
        if self.family in _NEGATIVE_DOMAIN:
            return min(self.theta_hi, -self.clip_margin)
        return self.theta_hi

    @property
    def is_discrete(self):
        return self.family in ("bernoulli_logit", "bernoulli_probit",
                               "poisson_log", "negbin_log")


@dataclass(frozen=True)
class FamilyBounds:
    """Curvature/mean bounds of b over the configured interval.

    ``c_l``/``c_u`` are inf/sup of b'' and ``u_1`` is the sup of |b'|;
    unbounded values are reported as 0 or +inf.
    """

    c_l: float
    c_u: float
    u_1: float


def _check_domain(spec, theta):
    theta = np.asarray(theta, dtype=float)
    if spec.family in _NEGATIVE_DOMAIN and np.any(theta >= 0):
        raise InvalidParameterError(
            f"{spec.family} requires theta < 0, got max {np.max(theta)}")
    return theta


def b_value(spec, theta):
    """Log-partition b(theta)."""
    theta = _check_domain(spec, theta)
    f = spec.family
    if f == "gaussian":
        return theta ** 2 / 2.0
    if f in ("bernoulli_logit", "bernoulli_probit"):
        return np.logaddexp(0.0, theta)
    if f == "poisson_log":
        return np.exp(theta)
    if f == "gamma_log":
        return -np.log(-theta)
    # negbin_log: -k log(1 - e^theta)
    return -spec.k * np.log1p(-np.exp(theta))


def b_prime(spec, theta):
    """Mean function b'(theta)."""
    theta = _check_domain(spec, theta)
    f = spec.family
    if f == "gaussian":
        return theta + 0.0
    if f in ("bernoulli_logit", "bernoulli_probit"):
        return expit(theta)
    if f == "poisson_log":
        return np.exp(theta)
    if f == "gamma_log":
        return -1.0 / theta
    e = np.exp(theta)
    return spec.k * e / (1.0 - e)


def b_second(spec, theta):
    """Variance function b''(theta), always nonnegative."""
    theta = _check_domain(spec, theta)
    f = spec.family
    if f == "gaussian":
        return np.ones_like(theta)
    if f in ("bernoulli_logit", "bernoulli_probit"):
        s = expit(theta)
        return s * (1.0 - s)
    if f == "poisson_log":
        return np.exp(theta)
    if f == "gamma_log":
        return 1.0 / theta ** 2
    e = np.exp(theta)
    return spec.k * e / (1.0 - e) ** 2


def theta_raw_from_eta(spec, eta):
    """Solve (h o b')(theta) = eta without clipping to the configured interval."""
    eta = np.asarray(eta, dtype=float)
    f = spec.family
    if f in ("gaussian", "bernoulli_logit", "poisson_log"):
        return eta + 0.0
    if f == "bernoulli_probit":
        # logit(Phi(eta)) = log Phi(eta) - log Phi(-eta), stable for |eta| large
        return log_ndtr(eta) - log_ndtr(-eta)
    if f == "gamma_log":
        return -np.exp(-eta)
    # negbin_log: mean = exp(eta) = k e^t/(1-e^t)  =>  t = log(m/(1+m)), m = e^eta/k
    m = np.exp(eta) / spec.k
    return np.log(m) - np.log1p(m)


def theta_from_eta(spec, eta):
    """Natural parameter for linear predictor eta, clipped into the interval."""
    return np.clip(theta_raw_from_eta(spec, eta), spec.theta_min, spec.theta_max)


def dtheta_deta(spec, eta):
    """Derivative d theta / d eta of the unclipped link inversion."""
    eta = np.asarray(eta, dtype=float)
    f = spec.family
    if f in ("gaussian", "bernoulli_logit", "poisson_log"):
        return np.ones_like(eta)
    if f == "bernoulli_probit":
        # phi(eta) / (Phi(eta) Phi(-eta)), computed in log space
        return np.exp(norm.logpdf(eta) - log_ndtr(eta) - log_ndtr(-eta))
    if f == "gamma_log":
        return np.exp(-eta)
    return 1.0 / (1.0 + np.exp(eta) / spec.k)


def _sup_abs_bprime(spec, lo, hi):
    if spec.family == "gaussian":
        return max(abs(lo), abs(hi))
    if np.isinf(hi):
        if spec.family in ("bernoulli_logit", "bernoulli_probit"):
            return 1.0
        return np.inf
    return float(b_prime(spec, hi))


def family_bounds(spec):
    """Inf/sup of b'' and sup of |b'| over the configured interval.

    b'' is monotone for every family except the bernoulli bell, so the
    extrema sit at the interval endpoints (plus the interior mode at 0 for
    bernoulli).  Unbounded infima come out as 0 and suprema as +inf.
    """
    lo, hi = spec.theta_min, spec.theta_max
    f = spec.family
    if f == "gaussian":
        return FamilyBounds(1.0, 1.0, _sup_abs_bprime(spec, lo, hi))
    if f in ("bernoulli_logit", "bernoulli_probit"):
        ends = [float(b_second(spec, t)) if np.isfinite(t) else 0.0
                for t in (lo, hi)]
        c_u = 0.25 if lo <= 0.0 <= hi else max(ends)
        return FamilyBounds(min(ends), c_u, _sup_abs_bprime(spec, lo, hi))
    if f == "poisson_log":
        c_l = float(np.exp(lo)) if np.isfinite(lo) else 0.0
        c_u = float(np.exp(hi)) if np.isfinite(hi) else np.inf
        return FamilyBounds(c_l, c_u, _sup_abs_bprime(spec, lo, hi))
    if f == "gamma_log":
        c_l = 1.0 / lo ** 2 if np.isfinite(lo) else 0.0
        return FamilyBounds(c_l, 1.0 / hi ** 2, -1.0 / hi)
    # negbin_log: b'' increasing in theta on (-inf, 0)
    c_l = float(b_second(spec, lo)) if np.isfinite(lo) else 0.0
    return FamilyBounds(c_l, float(b_second(spec, hi)), float(b_prime(spec, hi)))


def sample_response(spec, theta, rng):
    """Draw responses from the family at natural parameter theta."""
    theta = _check_domain(spec, theta)
    if np.any(theta < spec.theta_min - 1e-12) or np.any(theta > spec.theta_max + 1e-12):
        raise InvalidParameterError("theta outside the configured interval")
    f = spec.family
    if f == "gaussian":
        return rng.normal(theta, np.sqrt(spec.a))
    if f in ("bernoulli_logit", "bernoulli_probit"):
        return (rng.random(np.shape(theta)) < expit(theta)).astype(float)
    if f == "poisson_log":
        return rng.poisson(np.exp(theta)).astype(float)
    if f == "gamma_log":
        # shape k, rate -k*theta: mean -1/theta, variance a/theta^2 with a = 1/k
        return rng.gamma(spec.k, scale=-1.0 / (spec.k * theta))
    return rng.negative_binomial(spec.k, 1.0 - np.exp(theta)).astype(float)


def response_in_support(spec, y):
    """Boolean mask of entries lying in the family support."""
    y = np.asarray(y, dtype=float)
    f = spec.family
    if f == "gaussian":
        return np.isfinite(y)
    if f in ("bernoulli_logit", "bernoulli_probit"):
        return np.isin(y, (0.0, 1.0))
    if f == "gamma_log":
        return np.isfinite(y) & (y > 0)
    return np.isfinite(y) & (y >= 0) & (y == np.floor(y))


def linear_predictor(X, B):
    """eta = X @ B with shape checking."""
    X = np.asarray(X, dtype=float)
    B = np.asarray(B, dtype=float)
    if X.ndim != 2 or B.ndim != 2 or X.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape} vs B {B.shape}")
    return X @ B


@dataclass
class Dataset:
    """Design matrix, response matrix and their family."""

    X: np.ndarray
    Y: np.ndarray
    family: FamilySpec

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise ValueError("X and Y must be matrices")
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError("X and Y must have the same number of rows")
        if not np.all(response_in_support(self.family, self.Y)):
            raise ValueError("Y has entries outside the family support")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def q(self):
        return self.Y.shape[1]

    def digest(self):
        """Content hash used to tie chains to the data they were run on."""
        import hashlib

        h = hashlib.sha256()
        h.update(self.family.family.encode())
        h.update(np.float64(self.family.a).tobytes())
        h.update(np.float64(self.family.k).tobytes())
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.Y).tobytes())
        return h.hexdigest()

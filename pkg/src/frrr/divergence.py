"""Closed-form divergences, brute-force oracles and rate formulas.

Per-entry KL and alpha-Renyi divergences have closed forms in the natural
parameter; product-measure divergences are their sums.  Theorem-facing
quantities use the per-entry-averaged convention (the 1/(nq) factor the
proofs insert); totals are exposed alongside.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats
from scipy.special import expit

from .families import b_prime, b_second, b_value, _check_domain


def kl_per_entry(spec, theta, zeta):
    """KL(P_theta || P_zeta) = [b'(theta)(theta - zeta) - b(theta) + b(zeta)] / a."""
    theta = _check_domain(spec, theta)
    zeta = _check_domain(spec, zeta)
    val = (b_prime(spec, theta) * (theta - zeta)
           - b_value(spec, theta) + b_value(spec, zeta)) / spec.a
    return np.maximum(val, 0.0)


def renyi_per_entry(spec, theta, zeta, alpha):
    """alpha-Renyi divergence via convexity of b over the interval domain:

    D_alpha = [alpha b(theta) + (1-alpha) b(zeta) - b(alpha theta + (1-alpha) zeta)]
              / (a (1-alpha)).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    theta = _check_domain(spec, theta)
    zeta = _check_domain(spec, zeta)
    mix = alpha * theta + (1.0 - alpha) * zeta
    val = (alpha * b_value(spec, theta) + (1.0 - alpha) * b_value(spec, zeta)
           - b_value(spec, mix)) / (spec.a * (1.0 - alpha))
    return np.maximum(val, 0.0)


@dataclass
class DivergenceReport:
    """KL/Renyi/Hellinger/TV quantities in both normalizations.

    ``hellinger_sq`` is computed from the total D_{1/2} of the product law;
    TV bounds come from the scalar inequalities linking TV to D_alpha and H^2.
    """

    n_entries: int
    kl_avg: float
    kl_total: float
    renyi_avg: dict
    renyi_total: dict
    hellinger_sq: float
    tv_lower: float
    tv_upper: float

    def to_csv(self, path):
        rows = [("kl", "", self.kl_avg, self.kl_total, "additive")]
        for a in sorted(self.renyi_avg):
            rows.append(("renyi", "%.17g" % a, self.renyi_avg[a],
                         self.renyi_total[a], "additive"))
        rows.append(("hellinger_sq", "", self.hellinger_sq / self.n_entries,
                     self.hellinger_sq, "total"))
        rows.append(("tv_lower", "", self.tv_lower, self.tv_lower, "total"))
        rows.append(("tv_upper", "", self.tv_upper, self.tv_upper, "total"))
        with open(path, "w") as fh:
            fh.write("metric,alpha,per_entry_avg,total,normalization\n")
            for name, a, avg, tot, norm in rows:
                fh.write("%s,%s,%.17g,%.17g,%s\n" % (name, a, avg, tot, norm))


def divergence_report(spec, Theta, Zeta, alphas=(0.25, 0.5, 0.75)):
    """Divergences between the product laws at parameter matrices Theta, Zeta."""
    Theta = np.asarray(Theta, dtype=float)
    Zeta = np.asarray(Zeta, dtype=float)
    if Theta.shape != Zeta.shape:
        raise ValueError("Theta and Zeta shapes differ")
    m = Theta.size
    kl_tot = float(np.sum(kl_per_entry(spec, Theta, Zeta)))
    renyi_tot = {a: float(np.sum(renyi_per_entry(spec, Theta, Zeta, a)))
                 for a in alphas}
    d_half = renyi_tot.get(0.5)
    if d_half is None:
        d_half = float(np.sum(renyi_per_entry(spec, Theta, Zeta, 0.5)))
    hell_sq = 2.0 * (1.0 - np.exp(-0.5 * d_half))
    tv_upper = min(1.0, min(np.sqrt(2.0 * renyi_tot[a] / a) for a in renyi_tot))
    tv_lower = hell_sq / 2.0
    return DivergenceReport(
        n_entries=m,
        kl_avg=kl_tot / m,
        kl_total=kl_tot,
        renyi_avg={a: v / m for a, v in renyi_tot.items()},
        renyi_total=renyi_tot,
        hellinger_sq=float(hell_sq),
        tv_lower=float(tv_lower),
        tv_upper=float(tv_upper),
    )


# ---------------------------------------------------------------------------
# brute-force oracles


def _entry_dist(spec, theta):
    f = spec.family
    if f in ("bernoulli_logit", "bernoulli_probit"):
        return stats.bernoulli(expit(theta))
    if f == "poisson_log":
        return stats.poisson(np.exp(theta))
    if f == "negbin_log":
        return stats.nbinom(spec.k, 1.0 - np.exp(theta))
    if f == "gaussian":
        return stats.norm(theta, np.sqrt(spec.a))
    return stats.gamma(1.0 / spec.a, scale=-spec.a / theta)


def _count_support(spec, theta, zeta, tail=1e-10):
    """Truncated outcome range certified to miss < tail mass of both laws."""
    if spec.family.startswith("bernoulli"):
        return np.arange(2)
    d1, d2 = _entry_dist(spec, theta), _entry_dist(spec, zeta)
    hi = int(max(d1.ppf(1.0 - tail / 10), d2.ppf(1.0 - tail / 10))) + 10
    assert d1.sf(hi) < tail and d2.sf(hi) < tail
    return np.arange(hi + 1)


def kl_bruteforce(spec, theta, zeta):
    """Per-entry KL by direct summation (discrete) or quadrature (continuous)."""
    d1, d2 = _entry_dist(spec, theta), _entry_dist(spec, zeta)
    if spec.is_discrete:
        ys = _count_support(spec, theta, zeta)
        p = d1.pmf(ys)
        ratio = d1.logpmf(ys) - d2.logpmf(ys)
        return float(np.sum(np.where(p > 0, p * ratio, 0.0)))
    lo, hi = d1.ppf(1e-14), d1.ppf(1.0 - 1e-14)
    val, _ = integrate.quad(
        lambda y: d1.pdf(y) * (d1.logpdf(y) - d2.logpdf(y)), lo, hi, limit=200)
    return float(val)


def renyi_bruteforce(spec, theta, zeta, alpha):
    """Per-entry alpha-Renyi by direct summation or quadrature."""
    d1, d2 = _entry_dist(spec, theta), _entry_dist(spec, zeta)
    if spec.is_discrete:
        ys = _count_support(spec, theta, zeta)
        integ = np.exp(alpha * d1.logpmf(ys) + (1.0 - alpha) * d2.logpmf(ys))
        return float(np.log(np.sum(integ)) / (alpha - 1.0))
    lo = min(d1.ppf(1e-14), d2.ppf(1e-14))
    hi = max(d1.ppf(1.0 - 1e-14), d2.ppf(1.0 - 1e-14))
    val, _ = integrate.quad(
        lambda y: np.exp(alpha * d1.logpdf(y) + (1.0 - alpha) * d2.logpdf(y)),
        lo, hi, limit=200)
    return float(np.log(val) / (alpha - 1.0))


def tv_bruteforce(spec, Theta, Zeta, max_outcomes=1 << 14):
    """Total variation of the product law by outcome-space enumeration.

    Supported: discrete families with a small enough product outcome space,
    and the single-cell gaussian closed form.  Anything else raises.
    """
    Theta = np.asarray(Theta, dtype=float).ravel()
    Zeta = np.asarray(Zeta, dtype=float).ravel()
    if spec.family == "gaussian":
        if Theta.size != 1:
            raise ValueError("gaussian TV supported only for a single cell")
        gap = abs(Theta[0] - Zeta[0]) / (2.0 * np.sqrt(spec.a))
        return float(2.0 * stats.norm.cdf(gap) - 1.0)
    if not spec.is_discrete:
        raise ValueError(f"TV enumeration unsupported for {spec.family}")
    supports = [_count_support(spec, t, z) for t, z in zip(Theta, Zeta)]
    total = np.prod([len(s) for s in supports])
    if total > max_outcomes:
        raise ValueError(f"product outcome space too large ({total})")
    logp = [ _entry_dist(spec, t).logpmf(s)
             for t, s in zip(Theta, supports)]
    logq = [ _entry_dist(spec, z).logpmf(s)
             for z, s in zip(Zeta, supports)]
    tv = 0.0
    for combo in itertools.product(*(range(len(s)) for s in supports)):
        lp = sum(logp[i][j] for i, j in enumerate(combo))
        lq = sum(logq[i][j] for i, j in enumerate(combo))
        tv += abs(np.exp(lp) - np.exp(lq))
    return float(0.5 * tv)


# ---------------------------------------------------------------------------
# lemma bound quantities


@dataclass(frozen=True)
class LemmaBounds:
    """Right-hand sides of the four divergence lemmas, averaged convention."""

    kl_upper: float            # (C_U / 2a) ||zeta - theta||_F^2 / (nq)
    renyi_lower: float         # (alpha C_L / 2a) ||theta - zeta||_F^2 / (nq)
    logsq_first: float         # (C_U / a)  ||theta - zeta||_F^2 / (nq)
    logsq_second: float        # (C_U^2 / 4a^2) ||zeta - theta||_F^4 / (nq)
    misspec_kl: float          # (2 U_1 / a) ||zeta - theta||_F / sqrt(nq)

    @property
    def logsq_upper(self):
        return self.logsq_first + self.logsq_second


def lemma_bounds(bounds, a, Theta, Zeta, alpha=1.0):
    """Evaluate the lemma right-hand sides for parameter matrices Theta, Zeta.

    The Renyi lower bound carries the order alpha as a prefactor: strong
    convexity of b gives a Jensen gap of at least alpha(1-alpha) C_L d^2 / 2,
    so D_alpha >= alpha C_L d^2 / (2a), with equality for gaussian.  At
    alpha = 1 (the default) this reduces to the KL lower bound.
    """
    diff = np.asarray(Zeta, dtype=float) - np.asarray(Theta, dtype=float)
    m = diff.size
    sq = float(np.sum(diff ** 2))
    return LemmaBounds(
        kl_upper=bounds.c_u / (2.0 * a) * sq / m,
        renyi_lower=alpha * bounds.c_l / (2.0 * a) * sq / m,
        logsq_first=bounds.c_u / a * sq / m,
        logsq_second=bounds.c_u ** 2 / (4.0 * a ** 2) * sq ** 2 / m,
        misspec_kl=2.0 * bounds.u_1 / a * np.sqrt(sq) / np.sqrt(m),
    )


def expected_log_ratio_sq(spec, Theta, Zeta):
    """Averaged second moment of the log likelihood ratio under P_Theta.

    Uses E Y^2 = b'(theta)^2 + a b''(theta), giving
    (1/(a^2 nq)) sum_ij [a b''(theta) d^2 + (b'(theta) d - b(theta) + b(zeta))^2]
    with d = theta - zeta.
    """
    Theta = np.asarray(Theta, dtype=float)
    Zeta = np.asarray(Zeta, dtype=float)
    d = Theta - Zeta
    lin = b_prime(spec, Theta) * d - b_value(spec, Theta) + b_value(spec, Zeta)
    per = spec.a * b_second(spec, Theta) * d ** 2 + lin ** 2
    return float(np.sum(per) / (spec.a ** 2 * Theta.size))


def misspec_kl_lhs(spec, Theta0, ThetaBar, Zeta):
    """Averaged E_{Theta0} log(p_ThetaBar / p_Zeta), the misspecified-lemma LHS."""
    Theta0 = np.asarray(Theta0, dtype=float)
    ThetaBar = np.asarray(ThetaBar, dtype=float)
    Zeta = np.asarray(Zeta, dtype=float)
    per = (b_prime(spec, Theta0) * (ThetaBar - Zeta)
           - b_value(spec, ThetaBar) + b_value(spec, Zeta))
    return float(np.sum(per) / (spec.a * Theta0.size))


# ---------------------------------------------------------------------------
# rate formulas


def _log_term(r, p, q, scale, denom_sq):
    """r (q+p+2) log(1 + scale / sqrt(denom_sq * r)), 0 at r = 0 by convention."""
    if r == 0:
        return 0.0
    return 2.0 * r * (q + p + 2) * np.log1p(scale / np.sqrt(denom_sq * r))


@dataclass(frozen=True)
class RateFormulas:
    epsilon_n_thm1: float
    epsilon_n_thm3: float
    epsilon_prime_n: float
    r_n: float
    inputs: dict = field(default_factory=dict)


def rate_formulas(n, p, q, r, a, bounds, x_frob, b_frob):
    """Contraction-rate quantities for the given problem constants.

    ``b_frob`` is the Frobenius norm of the true matrix (or of the KL
    minimizer for r_n), ``r`` its rank; ``bounds`` carries C_U and U_1.
    """
    if min(n, p, q) < 1 or r < 0 or a <= 0 or x_frob < 0 or b_frob < 0:
        raise ValueError("invalid rate-formula inputs")
    c_u, u_1 = bounds.c_u, bounds.u_1
    scale = x_frob * b_frob * np.sqrt(q * p)
    eps1 = c_u * _log_term(r, p, q, scale, 4.0 * a) / (n * q)
    eps3 = max(c_u ** 2 / (4.0 * n * q),
               c_u * _log_term(r, p, q, scale, 2.0 * a) / (n * q))
    eps_prime = max(c_u / (a * n), c_u ** 2 / (4.0 * a ** 2 * n),
                    _log_term(r, p, q, scale, 2.0) / n)
    rn_scale = x_frob * b_frob * 2.0 * np.sqrt(n * q) * np.sqrt(p * q) / a
    r_n = u_1 * _log_term(r, p, q, rn_scale, 2.0) / (n * q)
    return RateFormulas(
        epsilon_n_thm1=float(eps1),
        epsilon_n_thm3=float(eps3),
        epsilon_prime_n=float(eps_prime),
        r_n=float(r_n),
        inputs=dict(n=n, p=p, q=q, r=r, a=a, c_u=c_u, u_1=u_1,
                    x_frob=x_frob, b_frob=b_frob),
    )


def c_alpha(alpha):
    """Piecewise Hellinger constant: 2(1+a)/(1-a) on [0.5, 1), 2(1+a)/a below."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if alpha >= 0.5:
        return 2.0 * (alpha + 1.0) / (1.0 - alpha)
    return 2.0 * (alpha + 1.0) / alpha

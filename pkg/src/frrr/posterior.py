"""Fractional log-posterior, Langevin samplers and the posterior mean.

The target is U(B) = alpha * log-likelihood(B) + log-prior(B) for a
fractional power alpha in (0, 1).  ULA iterates
B <- B + gamma grad U(B) + sqrt(2 gamma) xi; MALA adds a Metropolis-Hastings
correction with the asymmetric Gaussian proposal density.
"""

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .families import (b_prime, b_value, dtheta_deta, family_bounds,
                       linear_predictor, theta_from_eta)
from .prior import grad_log_prior, log_prior

CHAIN_MAGIC = b"FRRRCHN1"


class SamplerDivergence(RuntimeError):
    """Log-posterior fell below the floor or became non-finite."""


@dataclass(frozen=True)
class FractionalConfig:
    alpha: float = 0.5
    step_size: float = None   # None -> inverse-smoothness heuristic
    n_steps: int = 10000
    burn_in: int = None       # None -> n_steps // 5
    thin: int = 10
    seed: int = 0
    algorithm: str = "mala"
    init: np.ndarray = None   # None -> zero matrix (the prior mode)
    autotune: bool = True
    log_post_floor: float = -1e12

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.n_steps < 1 or self.thin < 1:
            raise ValueError("n_steps and thin must be positive")
        # burn_in == n_steps is allowed and retains nothing
        burn = self.n_steps // 5 if self.burn_in is None else self.burn_in
        if not 0 <= burn <= self.n_steps:
            raise ValueError("burn_in must satisfy 0 <= burn_in <= n_steps")
        object.__setattr__(self, "burn_in", burn)
        if self.algorithm not in ("ula", "mala"):
            raise ValueError("algorithm must be 'ula' or 'mala'")


@dataclass
class Chain:
    """Retained sampler output; all lists share one length."""

    samples: np.ndarray           # (m, p, q)
    log_post: np.ndarray          # (m,)
    accept_flags: np.ndarray      # (m,) bool, all True for ULA
    config: FractionalConfig
    dataset_digest: str
    step_size: float = 0.0        # step size actually used after tuning
    acceptance_rate: float = 1.0

    def __post_init__(self):
        if not (len(self.samples) == len(self.log_post) == len(self.accept_flags)):
            raise ValueError("chain field lengths differ")
        if len(self.log_post) and not np.all(np.isfinite(self.log_post)):
            raise ValueError("non-finite log-posterior in retained samples")


def log_likelihood(data, B):
    """Sum of (y theta - b(theta)) / a over all cells, dropping c(y, a)."""
    eta = linear_predictor(data.X, B)
    theta = theta_from_eta(data.family, eta)
    return float(np.sum(data.Y * theta - b_value(data.family, theta)) / data.family.a)


def grad_log_likelihood(data, B):
    """X^T [(Y - b'(theta)) * dtheta/deta] / a, the chain-rule gradient."""
    eta = linear_predictor(data.X, B)
    spec = data.family
    theta = theta_from_eta(spec, eta)
    S = (data.Y - b_prime(spec, theta)) * dtheta_deta(spec, eta)
    return data.X.T @ S / spec.a


def log_fractional_posterior(data, B, prior_cfg, alpha):
    """alpha * log-likelihood + log-prior (alpha = 1 allowed for diagnostics)."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return alpha * log_likelihood(data, B) + log_prior(B, prior_cfg)


def grad_log_fractional_posterior(data, B, prior_cfg, alpha):
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return alpha * grad_log_likelihood(data, B) + grad_log_prior(B, prior_cfg)


def default_step_size(data, prior_cfg, alpha):
    """Conservative inverse of a smoothness bound on the target."""
    c_u = family_bounds(data.family).c_u
    lik_curv = alpha * c_u * np.sum(data.X ** 2) / data.family.a
    prior_curv = (prior_cfg.p + prior_cfg.q + 2) / prior_cfg.tau ** 2
    return 0.5 / (lik_curv + prior_curv)


def run_sampler(data, prior_cfg, frac_cfg):
    """Run ULA or MALA on the fractional posterior; deterministic given seed.

    MALA step size is doubled/halved during burn-in targeting acceptance
    around 0.5, then frozen for the retained part of the chain.
    """
    cfg = frac_cfg
    rng = np.random.default_rng(cfg.seed)
    p, q = prior_cfg.p, prior_cfg.q
    B = np.zeros((p, q)) if cfg.init is None else np.array(cfg.init, dtype=float)
    if B.shape != (p, q):
        raise ValueError("init matrix has the wrong shape")

    gamma = cfg.step_size if cfg.step_size is not None else \
        default_step_size(data, prior_cfg, cfg.alpha)
    value = log_fractional_posterior(data, B, prior_cfg, cfg.alpha)
    grad = grad_log_fractional_posterior(data, B, prior_cfg, cfg.alpha)

    mala = cfg.algorithm == "mala"
    retained, log_posts, flags = [], [], []
    n_acc = n_prop = 0
    window_acc = window_n = 0

    for step in range(cfg.n_steps):
        noise = rng.standard_normal((p, q))
        prop = B + gamma * grad + np.sqrt(2.0 * gamma) * noise
        prop_value = log_fractional_posterior(data, prop, prior_cfg, cfg.alpha)
        prop_grad = grad_log_fractional_posterior(data, prop, prior_cfg, cfg.alpha)
        if mala:
            fwd = -np.sum((prop - B - gamma * grad) ** 2) / (4.0 * gamma)
            bwd = -np.sum((B - prop - gamma * prop_grad) ** 2) / (4.0 * gamma)
            log_ratio = prop_value - value + bwd - fwd
            accepted = np.isfinite(prop_value) and \
                np.log(rng.random()) < log_ratio
            n_prop += 1
            window_n += 1
            if accepted:
                B, value, grad = prop, prop_value, prop_grad
                n_acc += 1
                window_acc += 1
        else:
            accepted = True
            B, value, grad = prop, prop_value, prop_grad

        if not np.isfinite(value) or value < cfg.log_post_floor:
            raise SamplerDivergence(
                f"log-posterior {value} at step {step} (floor {cfg.log_post_floor})")

        # step-size tuning, burn-in only so the retained chain has fixed gamma
        if mala and cfg.autotune and step < cfg.burn_in and window_n >= 50:
            rate = window_acc / window_n
            if rate > 0.6:
                gamma *= 2.0
            elif rate < 0.4:
                gamma *= 0.5
            window_acc = window_n = 0

        if step >= cfg.burn_in and (step - cfg.burn_in) % cfg.thin == 0:
            retained.append(B.copy())
            log_posts.append(value)
            flags.append(bool(accepted))

    m = len(retained)
    return Chain(
        samples=np.array(retained).reshape(m, p, q),
        log_post=np.array(log_posts, dtype=float),
        accept_flags=np.array(flags, dtype=bool),
        config=cfg,
        dataset_digest=data.digest(),
        step_size=gamma,
        acceptance_rate=(n_acc / n_prop) if n_prop else 1.0,
    )


def posterior_mean(chain):
    """Entrywise average of the retained samples."""
    if len(chain.samples) == 0:
        raise ValueError("empty chain")
    return chain.samples.mean(axis=0)


def effective_rank(B, threshold_ratio=1e-3):
    """Number of singular values above threshold_ratio times the largest."""
    if not 0.0 < threshold_ratio < 1.0:
        raise ValueError("threshold_ratio must lie in (0, 1)")
    s = np.linalg.svd(np.asarray(B, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > threshold_ratio * s[0]))


def save_chain(path, chain):
    """Binary chain file: magic, p, q, count (int32 LE), alpha/gamma (f64),
    then row-major float64 sample matrices.  A sidecar CSV
    (step, log_post, accepted) is written next to it."""
    m = len(chain.samples)
    p, q = chain.samples.shape[1:] if m else (0, 0)
    with open(path, "wb") as fh:
        fh.write(CHAIN_MAGIC)
        fh.write(struct.pack("<iii", p, q, m))
        fh.write(struct.pack("<dd", chain.config.alpha, chain.step_size))
        fh.write(np.ascontiguousarray(chain.samples, dtype="<f8").tobytes())
    with open(str(path) + ".csv", "w") as fh:
        fh.write("step,log_post,accepted\n")
        for i in range(m):
            fh.write("%d,%.17g,%d\n" % (i, chain.log_post[i], chain.accept_flags[i]))


def load_chain(path):
    """Read a chain file back; returns (samples, alpha, gamma, log_post, flags)."""
    with open(path, "rb") as fh:
        if fh.read(8) != CHAIN_MAGIC:
            raise ValueError("not a chain file")
        p, q, m = struct.unpack("<iii", fh.read(12))
        alpha, gamma = struct.unpack("<dd", fh.read(16))
        samples = np.frombuffer(fh.read(8 * m * p * q), dtype="<f8").reshape(m, p, q)
    log_post = np.zeros(m)
    flags = np.ones(m, dtype=bool)
    try:
        side = np.genfromtxt(str(path) + ".csv", delimiter=",", skip_header=1)
        side = side.reshape(-1, 3)
        log_post = side[:, 1]
        flags = side[:, 2].astype(bool)
    except OSError:
        pass
    return samples.copy(), alpha, gamma, log_post, flags

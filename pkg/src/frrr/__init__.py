"""Fractional-posterior Bayesian inference for generalized reduced-rank
regression: exponential-family likelihoods, a spectral scaled Student prior,
Langevin samplers, closed-form divergences, and a verification harness for
the associated contraction-rate bounds."""

__version__ = "1.0.0"

from .divergence import (DivergenceReport, LemmaBounds, RateFormulas, c_alpha,
                         divergence_report, expected_log_ratio_sq,
                         kl_bruteforce, kl_per_entry, lemma_bounds,
                         misspec_kl_lhs, rate_formulas, renyi_bruteforce,
                         renyi_per_entry, tv_bruteforce)
from .experiments import (KLFit, MisspecConfig, MisspecStudyResult,
                          RateStudyConfig, RateStudyResult, cross_kl_avg,
                          cross_renyi_avg, fit_kl_minimizer,
                          hellinger_consistency_check, likelihood_ridge_fit,
                          posterior_average_divergence, run_misspec_study,
                          run_rate_study, verify_divergence_bounds)
from .families import (FAMILY_IDS, Dataset, FamilyBounds, FamilySpec,
                       InvalidParameterError, b_prime, b_second, b_value,
                       dtheta_deta, family_bounds, linear_predictor,
                       sample_response, theta_from_eta, theta_raw_from_eta)
from .posterior import (Chain, FractionalConfig, SamplerDivergence,
                        default_step_size, effective_rank,
                        grad_log_fractional_posterior, grad_log_likelihood,
                        load_chain, log_fractional_posterior, log_likelihood,
                        posterior_mean, run_sampler, save_chain)
from .prior import (PriorConfig, grad_log_prior, log_prior,
                    prior_second_moment_check, sample_prior, tau_preset)
from .simulate import (SyntheticTruth, calibrate_scale, compute_kappa,
                       generate_dataset, load_dataset, make_design,
                       make_low_rank_truth, prediction_error, save_dataset)

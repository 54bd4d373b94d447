"""
config.py

Global configuration and tunable defaults for sparsetrig.

All default tolerances, iteration caps and experiment settings used by the
solvers in sparsetrig.core and by the experiment runners are defined here as a
single CONFIG dict.

Modules read CONFIG at call time rather than hardcoding values.
Override at runtime by modifying CONFIG, or per-project by passing a JSON file
to load_config() (the CLI exposes this as --config).
"""

import copy
import json
import logging
from pathlib import Path

from sparsetrig.core.errors import ConfigError

logger = logging.getLogger(__name__)


CONFIG = {

    ##    <(''<)  <( ' ' )>  (>'')>
    # RECOVERY VERDICT
    ##    <(''<)  <( ' ' )>  (>'')>

    # Perfect recovery: max_k |d_k - c_k| <= success_rel_tol * max_k |c_k|
    "success_rel_tol":         1e-4,

    # Default residual stop when sparsity is unknown: eps = tol * ||f||_2
    "residual_rel_tol":        1e-8,

    # Correlations below this * ||r|| (unit columns) count as zero
    "correlation_floor":       1e-12,

    ##    <(''<)  <( ' ' )>  (>'')>
    # LEAST SQUARES BACKENDS
    ##    <(''<)  <( ' ' )>  (>'')>

    # Orthogonalized column below this * column norm is a degenerate selection
    "qr_degenerate_tol":       1e-10,

    "lsqr_tol":                1e-12,
    "lsqr_max_iter":           500,

    ##    <(''<)  <( ' ' )>  (>'')>
    # MATCHING PURSUIT
    ##    <(''<)  <( ' ' )>  (>'')>

    # MP revisits indices, so it gets its own iteration cap
    "mp_max_iterations":       2000,

    ##    <(''<)  <( ' ' )>  (>'')>
    # BASIS PURSUIT
    ##    <(''<)  <( ' ' )>  (>'')>

    # feas_tol = bp_feas_rel_tol * ||f||_2
    "bp_feas_rel_tol":         1e-10,

    # ||y - x|| <= bp_gap_tol * ||x|| and duality gap <= bp_gap_tol * max(1, ||x||_1)
    "bp_gap_tol":              1e-9,

    # max_iter = bp_max_iter_factor * D
    "bp_max_iter_factor":      50,

    # Douglas-Rachford step, fixed and unscaled
    "bp_step":                 1.0,

    # Detected support for debiasing: |d_k| > bp_support_rel_tol * max |d|
    "bp_support_rel_tol":      1e-6,

    # Relative pivot below which F F^* counts as singular
    "bp_singular_pivot":       1e-12,

    # Dense LP oracle is only for tiny instances
    "lp_max_dimension":        64,
    "lp_max_iter":             10000,

    ##    <(''<)  <( ' ' )>  (>'')>
    # DIAGNOSTICS
    ##    <(''<)  <( ' ' )>  (>'')>

    # Gram matrices are never formed above this support size
    "gram_max_support":        4096,

    # Dense eigensolve up to this size, Lanczos above
    "eig_dense_max":           512,
    "eig_iter_tol":            1e-10,

    # Total subsets visited by the brute-force restricted isometry scan
    "ric_subset_budget":       10**6,
    "ric_batch_size":          4096,

    # Coherence constants: grid model / continuous model
    "coherence_constant":            4.94,
    "coherence_constant_continuous": 4.0 / 3.0,
    "thresholding_constant":         17.89,
    "omp_constant":                  32.62,

    ##    <(''<)  <( ' ' )>  (>'')>
    # EXPERIMENT DEFAULTS
    ##    <(''<)  <( ' ' )>  (>'')>

    "default_dimension":       100,
    "default_samples":         40,
    "default_trials":          100,
    "default_seed":            20080101,
    "oversampling_target":     0.9,
    "oversampling_trials":     200,
    "timing_repeats":          5,
    "audit_trials":            200,
    "noise_variances":         [0.05, 0.1, 0.2, 0.4],

    # Thread pool size for trials; results are independent of this value
    "workers":                 1,

    ##    <(''<)  <( ' ' )>  (>'')>
    # OUTPUT
    ##    <(''<)  <( ' ' )>  (>'')>

    "float_format":            "%.17g",
    "output_dir":              "sparsetrig_results",

    # Stand-in for an infinite PSNR in CSV output
    "psnr_infinite_sentinel":  "inf",
}


def load_config(path, base=None):
    """Return a copy of CONFIG with overrides from a JSON file merged in.

    Args:
        path: str or Path - JSON file with a flat {key: value} object
        base: dict or None - config to start from; defaults to CONFIG

    Returns:
        dict - merged configuration

    Raises:
        ConfigError: unreadable file, non-object JSON or unknown keys
    """
    merged = copy.deepcopy(CONFIG if base is None else base)
    path = Path(path)

    try:
        with open(path, 'r') as f:
            overrides = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e

    if not isinstance(overrides, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")

    unknown = sorted(set(overrides) - set(merged))
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {unknown}")

    merged.update(overrides)
    logger.info("Loaded %d config overrides from %s", len(overrides), path)
    return merged


def apply_overrides(overrides):
    """Update the global CONFIG in place.

    Args:
        overrides: dict - keys must already exist in CONFIG

    Raises:
        ConfigError: unknown keys
    """
    unknown = sorted(set(overrides) - set(CONFIG))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    CONFIG.update(overrides)

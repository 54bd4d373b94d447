"""
core/results_io.py

Result-file I/O for experiment tables, sampling sets and coefficient files.
All functions operate on explicit arguments.

File structure per run (one family per experiment, shared output directory):
    {stem}_{suffix}.csv        <- result table, one row per (algorithm, M, ...)
    {stem}_{suffix}.json       <- run_params sidecar: config hash, seed rule,
                                  the full experiment config
    {stem}_{suffix}.dat        <- optional gnuplot companion (whitespace columns)

Every CSV row carries the config hash and the seed derivation rule version.
Tables are written with pandas: floats at 17 significant digits, UTF-8,
LF line endings, header row.

Param divergence:
    Rewriting a result whose sidecar holds different run params is allowed,
    but the differences are logged to _param_mismatches.log in the output
    directory.

Sample / coefficient CSV schema (recover subcommand):
    samples:      x1..xd, re, im      (points in radians)
    coefficients: k1..kd, re, im      (nonzero entries only)
"""

import json
import logging
from datetime import datetime
from pathlib import Path

import numpy as np
import pandas as pd

from sparsetrig.config import CONFIG
from sparsetrig.core.errors import ConfigError
from sparsetrig.core.sampling import SEED_RULE_VERSION

logger = logging.getLogger(__name__)


# (つ -' _ '- )つ    (つ -' _ '- )つ
# FILE SUFFIX CONSTANTS
# Single definition point, every experiment imports from here
# (つ -' _ '- )つ    (つ -' _ '- )つ

SUFFIX_SWEEP       = "sweep"
SUFFIX_OVERSAMPLE  = "oversampling"
SUFFIX_TIMING      = "timing"
SUFFIX_NOISE       = "noise"
SUFFIX_AUDIT       = "audit"
SUFFIX_RECOVERED   = "recovered"

_MISMATCH_LOG_FILENAME = "_param_mismatches.log"

STAMP_COLUMNS = ("config_hash", "seed_rule")


##    <(''<)  <( ' ' )>  (>'')>
# RESULT PATH RESOLUTION
##    <(''<)  <( ' ' )>  (>'')>

def resolve_result_path(out, stem, suffix, extension=".csv"):
    """Resolve the result file for a run.

    Convention:
        out ending in the extension  -> used as is
        anything else                -> <out>/<stem>_<suffix><extension>

    Args:
        out:       str or Path - output file or directory
        stem:      str - run stem, e.g. 'sweep_d100_n40'
        suffix:    str - suffix constant e.g. SUFFIX_SWEEP
        extension: str

    Returns:
        Path
    """
    out = Path(out)
    if out.suffix == extension:
        return out
    return out / f"{stem}_{suffix}{extension}"


def companion_path(path, extension):
    """Same stem, different extension (.json sidecar, .dat companion)."""
    return Path(path).with_suffix(extension)


##    <(''<)  <( ' ' )>  (>'')>
# RUN PARAM BLOCK
##    <(''<)  <( ' ' )>  (>'')>

def build_run_params(config_dict, config_hash):
    """Canonical run_params block written next to every result table.

    Args:
        config_dict: dict - JSON-ready experiment config
        config_hash: str

    Returns:
        dict
    """
    return {
        "config_hash": config_hash,
        "seed_rule":   SEED_RULE_VERSION,
        "config":      config_dict,
    }


def check_param_divergence(stored_params, current_params, result_path, output_dir):
    """Compare stored run params with the current ones and log divergence.

    Args:
        stored_params:  dict - run_params loaded from the sidecar
        current_params: dict - run_params of this run
        result_path:    Path - result file being rewritten
        output_dir:     Path - directory of the mismatch log

    Returns:
        dict - {'diverged': bool, 'differences': {key: {'stored', 'current'}}}
    """
    result = {'diverged': False, 'differences': {}}
    if not stored_params:
        return result

    stored_config  = dict(stored_params.get("config", {}))
    current_config = dict(current_params.get("config", {}))
    stored_config["seed_rule"]  = stored_params.get("seed_rule")
    current_config["seed_rule"] = current_params.get("seed_rule")

    for key in sorted(set(stored_config) | set(current_config)):
        stored_val  = stored_config.get(key)
        current_val = current_config.get(key)
        if stored_val != current_val:
            result['diverged'] = True
            result['differences'][key] = {'stored': stored_val, 'current': current_val}

    if result['diverged']:
        _log_mismatch(output_dir, Path(result_path), result['differences'])
        logger.warning("Run params diverge from %s: %s",
                       Path(result_path).name, sorted(result['differences']))
    return result


def _log_mismatch(output_dir, result_path, differences):
    """Append one divergence entry to the output directory mismatch log."""
    log_path = Path(output_dir) / _MISMATCH_LOG_FILENAME
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    entry = (
        f"[{timestamp}] PARAM_DIVERGENCE | "
        f"file={result_path.name} | "
        f"keys={sorted(differences)} | "
        f"stored={ {k: v['stored'] for k, v in differences.items()} } | "
        f"current={ {k: v['current'] for k, v in differences.items()} }\n"
    )
    try:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, 'a', encoding="utf-8", newline="\n") as f:
            f.write(entry)
    except OSError as e:
        logger.error("Failed to write mismatch log: %s", e)


def load_run_params(path):
    """Load a run_params sidecar, returning an empty dict if absent or unreadable."""
    path = Path(path)
    if not path.exists():
        return {}
    try:
        with open(path, 'r', encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error("Failed to load run params %s: %s", path, e)
        return {}


def save_run_params(path, params):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding="utf-8", newline="\n") as f:
        json.dump(params, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug("Saved run params: %s", path)


##    <(''<)  <( ' ' )>  (>'')>
# TABLE WRITERS
##    <(''<)  <( ' ' )>  (>'')>

def stamp(table, config_hash):
    """Append config_hash and seed_rule columns to every row."""
    table = table.copy()
    table["config_hash"] = config_hash
    table["seed_rule"]   = SEED_RULE_VERSION
    return table


def write_table(table, path, float_format=None):
    """Write a DataFrame as CSV (header, 17 significant digits, UTF-8, LF).

    Args:
        table:        pd.DataFrame
        path:         str or Path
        float_format: str or None - defaults to CONFIG['float_format']

    Returns:
        Path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(
        path,
        index=False,
        float_format=float_format or CONFIG["float_format"],
        encoding="utf-8",
        lineterminator="\n",
    )
    logger.info("Wrote %d rows to %s", len(table), path)
    return path


def write_dat(table, path, columns=None, title=None):
    """Gnuplot companion: '#'-prefixed header, whitespace separated columns.

    Args:
        table:   pd.DataFrame
        path:    str or Path
        columns: list of str or None - subset and order of columns
        title:   str or None - extra comment line

    Returns:
        Path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = table if columns is None else table[list(columns)]
    with open(path, 'w', encoding="utf-8", newline="\n") as f:
        if title:
            f.write(f"# {title}\n")
        f.write("# " + " ".join(str(c) for c in frame.columns) + "\n")
        frame.to_csv(f, sep=" ", index=False, header=False,
                     float_format=CONFIG["float_format"], lineterminator="\n")
    logger.debug("Wrote gnuplot data: %s", path)
    return path


def save_result(table, path, run_params, dat_columns=None):
    """Write a stamped result table plus its run_params sidecar.

    An existing sidecar with different params is logged as divergence
    before being replaced.

    Args:
        table:       pd.DataFrame - unstamped result rows
        path:        Path - result CSV path
        run_params:  dict - from build_run_params()
        dat_columns: list of str or None - also write a .dat companion

    Returns:
        Path - the CSV path
    """
    path = Path(path)
    sidecar = companion_path(path, ".json")
    check_param_divergence(load_run_params(sidecar), run_params, path, path.parent)

    stamped = stamp(table, run_params["config_hash"])
    write_table(stamped, path)
    save_run_params(sidecar, run_params)
    if dat_columns is not None:
        write_dat(table, companion_path(path, ".dat"), dat_columns,
                  title=f"config_hash={run_params['config_hash']}")
    return path


def load_table(path):
    """Read a result CSV back into a DataFrame."""
    path = Path(path)
    try:
        return pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise ConfigError(f"cannot read table {path}: {e}") from e


##    <(''<)  <( ' ' )>  (>'')>
# SAMPLING SETS, SAMPLES AND COEFFICIENTS
##    <(''<)  <( ' ' )>  (>'')>

def _axis_columns(prefix, dimension):
    return [f"{prefix}{i + 1}" for i in range(dimension)]


def sampling_frame(sampling):
    """Sampling set as a DataFrame: x1..xd and, on a grid, g1..gd."""
    columns = {name: sampling.points[:, i]
               for i, name in enumerate(_axis_columns("x", sampling.dimension))}
    if sampling.grid_indices is not None:
        columns.update({name: sampling.grid_indices[:, i]
                        for i, name in enumerate(_axis_columns("g", sampling.dimension))})
    return pd.DataFrame(columns)


def write_sampling_set(sampling, path):
    return write_table(sampling_frame(sampling), path)


def write_samples(points, values, path):
    """Samples CSV: x1..xd, re, im."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    values = np.asarray(values, dtype=np.complex128).ravel()
    frame = pd.DataFrame({name: points[:, i]
                          for i, name in enumerate(_axis_columns("x", points.shape[1]))})
    frame["re"] = values.real
    frame["im"] = values.imag
    return write_table(frame, path)


def _split_columns(frame, prefix, path):
    axis = sorted((c for c in frame.columns if c.startswith(prefix) and c[len(prefix):].isdigit()),
                  key=lambda c: int(c[len(prefix):]))
    missing = [c for c in ("re", "im") if c not in frame.columns]
    if not axis or missing:
        raise ConfigError(
            f"{path} needs columns {prefix}1..{prefix}d, re, im; got {list(frame.columns)}")
    values = frame["re"].to_numpy(dtype=np.float64) + 1j * frame["im"].to_numpy(dtype=np.float64)
    return frame[axis].to_numpy(), values


def read_samples(path):
    """Read a samples CSV.

    Returns:
        (np.ndarray shape (N, d) of float, np.ndarray shape (N,) of complex)

    Raises:
        ConfigError: unreadable file or missing columns
    """
    frame = load_table(path)
    points, values = _split_columns(frame, "x", path)
    return points.astype(np.float64), values


def write_coefficients(frequencies, coefficients, path):
    """Coefficient CSV with one row per nonzero entry: k1..kd, re, im."""
    coefficients = np.asarray(coefficients, dtype=np.complex128).ravel()
    support = np.flatnonzero(coefficients)
    freqs = frequencies.frequencies[support]
    frame = pd.DataFrame({name: freqs[:, i]
                          for i, name in enumerate(_axis_columns("k", frequencies.dimension))})
    frame["re"] = coefficients[support].real
    frame["im"] = coefficients[support].imag
    return write_table(frame, path)


def read_coefficients(path):
    """Read a coefficient CSV.

    Returns:
        (np.ndarray shape (M, d) of int, np.ndarray shape (M,) of complex)
    """
    frame = load_table(path)
    freqs, values = _split_columns(frame, "k", path)
    return freqs.astype(np.int64), values


# U S A G I
# from sparsetrig.core.results_io import resolve_result_path, build_run_params, save_result
# path = resolve_result_path("out", "sweep_d100", SUFFIX_SWEEP)
# save_result(df, path, build_run_params(cfg.to_dict(), cfg.config_hash()))

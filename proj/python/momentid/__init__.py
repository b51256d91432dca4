"""Treatment effect estimation from two environments via higher-order moments."""

import csv
import io

from ._core import (
    RESULTS_HEADER,
    ChangeKind,
    Dataset,
    MomentIdError,
    NoiseSpec,
    Scenario,
    ScmParams,
    construct_counterexample,
    construct_epsy_counterexample,
    detect,
    estimate,
    get_ratio,
    oracle_estimate,
    run_experiment,
    simulate,
)

RESULTS_COLUMNS = tuple(RESULTS_HEADER.split(","))

_INT_COLUMNS = ("n", "rep", "order_found")
_FLOAT_COLUMNS = ("beta_true", "beta_hat", "rel_bias")


def parse_results(text):
    """Rows of a results CSV as dicts; empty fields become None.

    Raises ValueError when the header does not match RESULTS_COLUMNS.
    """
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != RESULTS_COLUMNS:
        raise ValueError(f"results header {reader.fieldnames} != {list(RESULTS_COLUMNS)}")
    rows = []
    for raw in reader:
        row = {}
        for key, value in raw.items():
            if value == "":
                row[key] = None
            elif key in _INT_COLUMNS:
                row[key] = int(value)
            elif key in _FLOAT_COLUMNS:
                row[key] = float(value)
            else:
                row[key] = value
        rows.append(row)
    return rows


def load_results(path):
    with open(path, newline="", encoding="utf-8") as f:
        return parse_results(f.read())


__all__ = [
    "RESULTS_COLUMNS",
    "RESULTS_HEADER",
    "ChangeKind",
    "Dataset",
    "MomentIdError",
    "NoiseSpec",
    "Scenario",
    "ScmParams",
    "construct_counterexample",
    "construct_epsy_counterexample",
    "detect",
    "estimate",
    "get_ratio",
    "load_results",
    "oracle_estimate",
    "parse_results",
    "run_experiment",
    "simulate",
]

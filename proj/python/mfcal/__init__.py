"""Multi-fidelity Bayesian calibration of computer models."""

import json

from ._core import (
    DimensionError,
    MfcalError,
    SchemaError,
    SingularityError,
    delta_2_toy,
    delta_f_toy,
    eta_l_toy,
    field_mean_toy,
    fit,
    is_latin_hypercube,
    lhs,
    predict,
    rmspe,
    sample_quantile,
    set_quiet,
    sim_study,
    toy_gen,
)
from ._core import run_config_schema as _schema_text
from ._core import validate_config as _validate_text


def run_config_schema():
    """The bundled run-config JSON Schema as a dict."""
    return json.loads(_schema_text())


def validate_config(config):
    """Check a config dict (or JSON text) against the bundled schema."""
    _validate_text(config if isinstance(config, str) else json.dumps(config))


__all__ = [
    "DimensionError",
    "MfcalError",
    "SchemaError",
    "SingularityError",
    "delta_2_toy",
    "delta_f_toy",
    "eta_l_toy",
    "field_mean_toy",
    "fit",
    "is_latin_hypercube",
    "lhs",
    "predict",
    "rmspe",
    "run_config_schema",
    "sample_quantile",
    "set_quiet",
    "sim_study",
    "toy_gen",
    "validate_config",
]

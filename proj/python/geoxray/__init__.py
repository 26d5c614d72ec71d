"""Radon and geodesic X-ray transforms on simple surfaces.

Fields are square numpy arrays sampled on [-1, 1]^2 with row j at
y_j = -1 + 2 j / (n - 1). Fan data are (nbeta, nalpha) arrays.
"""

import json

from ._core import (
    ConsistencyError,
    DomainError,
    Error,
    IntegrationError,
    Metric,
    ParameterError,
    SimplicityError,
    SupportError,
    commands,
    commutator_residuals,
    conjugate_time,
    exit_time,
    fbp,
    invert,
    lightray_fubini,
    pestov_residual,
    phantom,
    radon_forward,
    santalo_residual,
    trace,
    xray_backproject,
    xray_forward,
)
from . import _core

__version__ = "0.3.0"


def simplicity(metric, n_boundary=32, n_angles=32):
    """Simplicity report (convexity, trapping, conjugate points) as a dict."""
    return json.loads(_core.simplicity_json(metric, n_boundary, n_angles))


def run(command, **flags):
    """Runs a CLI command in-process; returns (status, manifest dict)."""
    if "fan" in flags and not isinstance(flags["fan"], str):
        flags["fan"] = "{}x{}".format(*flags["fan"])
    status, manifest = _core.run_json(command, json.dumps(flags))
    return status, json.loads(manifest)

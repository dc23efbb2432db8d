"""Exact and float jet calculus for Kundt spacetimes: frames, boost orders,
nil-Killing fields, scalar polynomial invariants and deformations."""

from __future__ import annotations

__version__ = "0.1.0"

from .catalog import get as catalog_entry
from .chart import Chart, Inequality
from .classify import (
    algebraic_stability_check,
    degenerate_kundt_check,
    kundt_vector_check,
    lie_algebra_closure_check,
    linear_map_type_check,
    nil_killing_check,
    transverse_killing_residual,
    twist_check,
)
from .deform import (
    DeformationSpec,
    def_theorem_check,
    deform_metric,
    flow_pullback_check,
    ricci_scalar_variation,
    riemann_variation,
)
from .errors import (
    EvaluationError,
    InputError,
    JetOrderError,
    KundtkitError,
    ModeError,
    ParseError,
    PreconditionError,
    RankBoundError,
    ShapeError,
    SingularMetricError,
)
from .expr import parse
from .frame import NullFrame, build_kundt_frame, complete_null_frame, degenerate_frame_check
from .geometry import Geometry, MetricSpec, VectorFieldSpec
from .jet import FLOAT, RATIONAL
from .metricfile import MetricDocument
from .report import ClassificationReport
from .spi import InvariantSpec, SpiReport, generate_invariants, spi_report
from .tensor import TensorValue, boost_order

__all__ = [
    "__version__",
    "catalog_entry",
    "Chart",
    "Inequality",
    "algebraic_stability_check",
    "degenerate_kundt_check",
    "kundt_vector_check",
    "lie_algebra_closure_check",
    "linear_map_type_check",
    "nil_killing_check",
    "transverse_killing_residual",
    "twist_check",
    "DeformationSpec",
    "def_theorem_check",
    "deform_metric",
    "flow_pullback_check",
    "ricci_scalar_variation",
    "riemann_variation",
    "EvaluationError",
    "InputError",
    "JetOrderError",
    "KundtkitError",
    "ModeError",
    "ParseError",
    "PreconditionError",
    "RankBoundError",
    "ShapeError",
    "SingularMetricError",
    "parse",
    "NullFrame",
    "build_kundt_frame",
    "complete_null_frame",
    "degenerate_frame_check",
    "Geometry",
    "MetricSpec",
    "VectorFieldSpec",
    "FLOAT",
    "RATIONAL",
    "MetricDocument",
    "ClassificationReport",
    "InvariantSpec",
    "SpiReport",
    "generate_invariants",
    "spi_report",
    "TensorValue",
    "boost_order",
]

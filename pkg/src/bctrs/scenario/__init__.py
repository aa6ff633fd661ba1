from .config import ConfigError, ScenarioConfig, apply_overrides, load_config, parse_config
from .curves import CurveKind, CurveTable, reference_curves
from .engine import MetricsSeries, RunResult, Scenario, run
from .export import ExportError, export, export_curve, export_metrics, export_trace

__all__ = [
    "ConfigError",
    "CurveKind",
    "CurveTable",
    "ExportError",
    "MetricsSeries",
    "RunResult",
    "Scenario",
    "ScenarioConfig",
    "apply_overrides",
    "export",
    "export_curve",
    "export_metrics",
    "export_trace",
    "load_config",
    "parse_config",
    "reference_curves",
    "run",
]

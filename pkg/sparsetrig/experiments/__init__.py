# sparsetrig/experiments/__init__.py

"""
experiments/__init__.py

Public interface for the sparsetrig.experiments package.
Exports the experiment classes and their run_* entry points.

Import from here for subcommand registration in main.py or for external
code that scripts a run.
"""

from sparsetrig.experiments.base_experiment import BaseExperiment, ExperimentConfig, draw_instance
from sparsetrig.experiments.success_sweep   import SuccessSweep, SweepResult, run_success_sweep
from sparsetrig.experiments.oversampling    import (
    OversamplingResult,
    OversamplingSearch,
    run_oversampling_search,
)
from sparsetrig.experiments.timing          import TimingResult, TimingRun, loglog_slope, run_timing
from sparsetrig.experiments.noise           import NoiseReport, NoiseRun, run_noise
from sparsetrig.experiments.coherence_audit import AuditResult, CoherenceAudit, run_coherence_audit

__all__ = [
    "BaseExperiment",
    "ExperimentConfig",
    "draw_instance",
    "SuccessSweep",
    "SweepResult",
    "run_success_sweep",
    "OversamplingSearch",
    "OversamplingResult",
    "run_oversampling_search",
    "TimingRun",
    "TimingResult",
    "run_timing",
    "loglog_slope",
    "NoiseRun",
    "NoiseReport",
    "run_noise",
    "CoherenceAudit",
    "AuditResult",
    "run_coherence_audit",
]

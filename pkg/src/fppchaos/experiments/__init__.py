"""Experiment runners and the ``fppchaos`` command line."""
from .config import EXPERIMENTS, ExperimentConfig, load_config, parse_config_text, parse_t_grid
from .output import EXIT_CENSORED, EXIT_CHECK_FAILED, EXIT_OK, ExperimentResult, write_outputs
from .runners import (
    ValleyStats,
    decreasing_with_separation,
    lemma_checks,
    oracle_checks,
    run_experiment,
    run_lemma_suite,
    run_oracle,
    run_scan,
    run_transition,
    run_valleys,
    run_var_scaling,
    valley_sample,
    valley_schedule,
)

__all__ = [
    "EXPERIMENTS", "ExperimentConfig", "load_config", "parse_config_text", "parse_t_grid",
    "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_CENSORED", "ExperimentResult", "write_outputs",
    "ValleyStats", "decreasing_with_separation", "lemma_checks", "oracle_checks",
    "run_experiment", "run_lemma_suite", "run_oracle", "run_scan", "run_transition",
    "run_valleys", "run_var_scaling", "valley_sample", "valley_schedule",
]

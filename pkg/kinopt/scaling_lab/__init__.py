from .experiment import ExperimentReport, ExperimentSpec, run_experiment, summarize

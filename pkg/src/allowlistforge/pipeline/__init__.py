"""Journaled, resumable stage execution and the bounded worker pool."""

from .journal import Journal, StageRecord
from .stages import STAGE_ORDER, STAGES, Pipeline, PipelineLocked, StageSummary
from .workers import ParallelOutcome, Task, TaskFailure, WorkerConfig, run_parallel

__all__ = [
    "Journal", "StageRecord", "STAGE_ORDER", "STAGES", "Pipeline", "PipelineLocked",
    "StageSummary", "ParallelOutcome", "Task", "TaskFailure", "WorkerConfig", "run_parallel",
]

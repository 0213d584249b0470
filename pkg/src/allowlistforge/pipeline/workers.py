"""Bounded process pool with a hard per-task deadline.

Each task runs in a worker process. A task still running at its deadline
has its worker killed and replaced, and is recorded as ``TimedOut``. Tasks
and their results must be picklable.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field
from multiprocessing.connection import Connection, wait
from typing import Any, Callable, Iterable

logger = logging.getLogger(__name__)

DEFAULT_TASK_DEADLINE = 30.0


@dataclass(frozen=True)
class WorkerConfig:
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    task_deadline: float = DEFAULT_TASK_DEADLINE

    def __post_init__(self) -> None:
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.task_deadline <= 0:
            raise ValueError("task_deadline must be > 0")


@dataclass(frozen=True)
class Task:
    key: str
    fn: Callable[..., Any]
    args: tuple = ()


@dataclass(frozen=True)
class TaskFailure:
    key: str
    kind: str  # "TimedOut", "Error" or "WorkerCrashed"
    message: str


@dataclass
class ParallelOutcome:
    results: dict[str, Any] = field(default_factory=dict)
    failures: list[TaskFailure] = field(default_factory=list)


def _worker_main(conn: Connection) -> None:
    while True:
        try:
            msg = conn.recv()
        except (EOFError, KeyboardInterrupt):
            return
        if msg is None:
            return
        key, fn, args = msg
        try:
            reply = (key, True, fn(*args))
        except BaseException as exc:  # reported to the parent, never raised here
            reply = (key, False, f"{type(exc).__name__}: {exc}")
        try:
            conn.send(reply)
        except Exception as exc:
            conn.send((key, False, f"unpicklable result: {exc}"))


class _Worker:
    def __init__(self, ctx) -> None:
        self.conn, child = ctx.Pipe()
        self.process = ctx.Process(target=_worker_main, args=(child,), daemon=True)
        self.process.start()
        child.close()

    def kill(self) -> None:
        self.process.kill()
        self.process.join()
        self.conn.close()

    def stop(self) -> None:
        try:
            self.conn.send(None)
        except (OSError, BrokenPipeError):
            pass
        self.process.join(timeout=1.0)
        if self.process.is_alive():
            self.process.kill()
            self.process.join()
        self.conn.close()


def run_parallel(
    tasks: Iterable[Task],
    config: WorkerConfig | None = None,
    on_result: Callable[[str, Any], None] | None = None,
) -> ParallelOutcome:
    """Run ``tasks`` with at most ``config.jobs`` in flight.

    ``on_result(key, value)`` is called in the calling thread as each task
    completes, in completion order. The returned mapping does not depend on
    that order.
    """
    config = config or WorkerConfig()
    ctx = mp.get_context()
    outcome = ParallelOutcome()
    pending = iter(tasks)
    exhausted = False
    idle: list[_Worker] = []
    busy: dict[Connection, tuple[_Worker, Task, float]] = {}

    try:
        while True:
            while not exhausted and len(busy) < config.jobs:
                try:
                    task = next(pending)
                except StopIteration:
                    exhausted = True
                    break
                worker = idle.pop() if idle else _Worker(ctx)
                worker.conn.send((task.key, task.fn, task.args))
                busy[worker.conn] = (worker, task, time.monotonic() + config.task_deadline)
            if not busy:
                break

            timeout = max(0.0, min(end for _, _, end in busy.values()) - time.monotonic())
            for conn in wait(list(busy), timeout=timeout):
                worker, task, _ = busy.pop(conn)
                try:
                    key, ok, payload = conn.recv()
                except (EOFError, OSError):
                    worker.kill()
                    outcome.failures.append(TaskFailure(task.key, "WorkerCrashed", "worker exited"))
                    continue
                idle.append(worker)
                if ok:
                    outcome.results[key] = payload
                    if on_result is not None:
                        on_result(key, payload)
                else:
                    outcome.failures.append(TaskFailure(key, "Error", payload))

            now = time.monotonic()
            for conn, (worker, task, end) in list(busy.items()):
                if now >= end:
                    del busy[conn]
                    worker.kill()
                    logger.warning("task %s exceeded %.1fs deadline; cancelled", task.key, config.task_deadline)
                    outcome.failures.append(
                        TaskFailure(task.key, "TimedOut", f"exceeded {config.task_deadline}s deadline")
                    )
    finally:
        for worker, _, _ in busy.values():
            worker.kill()
        for worker in idle:
            worker.stop()
    outcome.failures.sort(key=lambda f: f.key)
    return outcome

"""
Background job manager for long-running computations started over HTTP.

Uses in-memory storage with thread-safe access. Every job owns a cancel
event; algorithms poll it through ``check_cancelled`` from their inner loops,
so a cancelled job stops at the next loop iteration and never leaves partial
results behind.
"""
import threading
import time
import logging
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional
from enum import Enum

from config import Config
from services.errors import ComputationCancelled, MFGError

logger = logging.getLogger(__name__)

_cancel_event: ContextVar[Optional[threading.Event]] = ContextVar('mfg_cancel_event', default=None)


def check_cancelled() -> None:
    """Raise ComputationCancelled if the surrounding scope was cancelled."""
    event = _cancel_event.get()
    if event is not None and event.is_set():
        raise ComputationCancelled('Computation cancelled')


@contextmanager
def cancellation_scope(event: threading.Event):
    """Make ``event`` the cancel signal for code running in this context."""
    token = _cancel_event.set(event)
    try:
        yield event
    finally:
        _cancel_event.reset(token)


class JobStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELLED = "cancelled"


@dataclass
class Job:
    """Represents one background task run."""
    id: str
    task: str
    status: JobStatus = JobStatus.PENDING
    message: str = ""
    result: Optional[Dict[str, Any]] = None
    error: Optional[Dict[str, Any]] = None
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    cancel_event: threading.Event = field(default_factory=threading.Event, repr=False)

    @property
    def finished(self) -> bool:
        return self.status in (JobStatus.COMPLETED, JobStatus.FAILED, JobStatus.CANCELLED)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "task": self.task,
            "status": self.status.value,
            "message": self.message,
            "result": self.result,
            "error": self.error,
            "created_at": self.created_at,
            "updated_at": self.updated_at
        }


class JobManager:
    """Thread-safe job manager for background tasks."""

    def __init__(self, cleanup_after_seconds: int = Config.MFG_JOB_CLEANUP_SECONDS):
        self._jobs: Dict[str, Job] = {}
        self._lock = threading.Lock()
        self._cleanup_after = cleanup_after_seconds

    def create_job(self, job_id: str, task: str) -> Job:
        with self._lock:
            self._cleanup_old_jobs()
            job = self._jobs[job_id] = Job(id=job_id, task=task, message="Queued")
        logger.info(f"Job {job_id} queued for task {task}")
        return job

    def get_job(self, job_id: str) -> Optional[Job]:
        with self._lock:
            return self._jobs.get(job_id)

    def _transition(self, job_id: str, status: JobStatus, message: str, **updates: Any) -> None:
        """Move a job to ``status``; unknown (deleted) jobs are ignored."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return
            job.status = status
            job.message = message
            for name, value in updates.items():
                setattr(job, name, value)
            job.updated_at = time.time()
        log = logger.error if status is JobStatus.FAILED else logger.info
        log(f"Job {job_id} {status.value}: {message}")

    def cancel(self, job_id: str) -> bool:
        """Request cancellation. Returns False for unknown or already finished jobs."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.finished:
                return False
            job.cancel_event.set()
            job.message = "Cancellation requested"
            job.updated_at = time.time()
        logger.info(f"Cancellation requested for job {job_id}")
        return True

    def run_in_background(self, job_id: str, work: Callable[[], Dict[str, Any]]) -> threading.Thread:
        """Run ``work`` on a daemon thread inside the job's cancellation scope."""
        job = self.get_job(job_id)
        if job is None:
            raise KeyError(job_id)

        def target():
            self._transition(job_id, JobStatus.RUNNING, f"Running {job.task}")
            with cancellation_scope(job.cancel_event):
                try:
                    result = work()
                except ComputationCancelled:
                    self._transition(job_id, JobStatus.CANCELLED, "Computation cancelled")
                except MFGError as e:
                    self._transition(job_id, JobStatus.FAILED, f"Computation failed: {e.message}", error=e.to_dict())
                except Exception as e:
                    logger.exception(f"Job {job_id} crashed")
                    self._transition(job_id, JobStatus.FAILED, f"Computation failed: {e}",
                                     error={'error': str(e), 'error_code': 'internal_error', 'details': {}})
                else:
                    self._transition(job_id, JobStatus.COMPLETED, "Computation complete", result=result)

        thread = threading.Thread(target=target, name=f"mfg-job-{job_id[:8]}", daemon=True)
        thread.start()
        return thread

    def delete_job(self, job_id: str) -> None:
        with self._lock:
            removed = self._jobs.pop(job_id, None)
        if removed is not None:
            logger.info(f"Deleted job {job_id}")

    def _cleanup_old_jobs(self) -> None:
        """Drop finished jobs idle for longer than the retention window. Caller holds the lock."""
        cutoff = time.time() - self._cleanup_after
        for job_id in [j.id for j in self._jobs.values() if j.finished and j.updated_at < cutoff]:
            del self._jobs[job_id]
            logger.debug(f"Cleaned up old job {job_id}")


# Global instance
job_manager = JobManager()

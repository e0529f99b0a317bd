"""Thread-pool fan-out for independent seeded jobs.

Jobs are indexed 0..count-1 and derive all randomness from their index,
so results are merged in submission order and do not depend on the
number of workers.
"""

import logging
import threading
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import Generic, Protocol, TypeVar

from app.exceptions import BusinessLogicException, InvalidOperationException
from app.schemas.trial_schema import JobProgressUpdate, JobStatus

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ProgressHandle(Protocol):
    """Interface for reporting job progress."""

    def send_progress_text(self, text: str) -> None:
        """Send a text progress update."""
        ...

    def send_progress_value(self, value: float) -> None:
        """Send a progress value update (0.0 to 1.0)."""
        ...

    def send_progress(self, text: str, value: float) -> None:
        """Send both text and progress value update."""
        ...


class LogProgressHandle:
    """ProgressHandle that writes to the log, at INFO once per tenth of the work."""

    def __init__(self, label: str) -> None:
        self.label = label
        self.progress = 0.0
        self.progress_text = ""
        self._reported_tenth = -1

    def send_progress_text(self, text: str) -> None:
        self.send_progress(text, self.progress)

    def send_progress_value(self, value: float) -> None:
        self.send_progress(self.progress_text, value)

    def send_progress(self, text: str, value: float) -> None:
        update = JobProgressUpdate(text=text, value=value)
        self.progress_text = update.text
        if update.value > self.progress:
            self.progress = update.value
        tenth = int(self.progress * 10)
        if tenth > self._reported_tenth:
            self._reported_tenth = tenth
            logger.info(f"{self.label}: {update.text} ({self.progress:.0%})")
        else:
            logger.debug(f"{self.label}: {update.text}")


class JobResult(Generic[T]):
    """Value or error of one job."""

    def __init__(
        self,
        index: int,
        status: JobStatus,
        value: T | None = None,
        error: BusinessLogicException | None = None,
    ) -> None:
        self.index = index
        self.status = status
        self.value = value
        self.error = error

    @property
    def ok(self) -> bool:
        return self.status == JobStatus.COMPLETED

    def __repr__(self) -> str:
        return f"JobResult(index={self.index}, status={self.status.value})"


class TrialRunner:
    """Runs indexed jobs on a thread pool and collects their results in index order."""

    def __init__(self, max_workers: int = 4) -> None:
        if max_workers < 1:
            raise InvalidOperationException("create trial runner", f"max_workers must be positive (got {max_workers})")
        self.max_workers = max_workers
        self._cancelled = threading.Event()
        self._lock = threading.Lock()
        self.logger = logging.getLogger(__name__)

    def cancel(self) -> None:
        """Request cancellation; jobs that have not started are skipped."""
        self._cancelled.set()

    @property
    def is_cancelled(self) -> bool:
        return self._cancelled.is_set()

    def reset(self) -> None:
        self._cancelled.clear()

    def run(
        self,
        job: Callable[[int], T],
        count: int,
        label: str = "jobs",
        progress: ProgressHandle | None = None,
    ) -> list[JobResult[T]]:
        """Run job(0) .. job(count-1).

        BusinessLogicException failures are recorded on the result; any
        other exception propagates to the caller.
        """
        if progress is None:
            progress = LogProgressHandle(label)
        done = 0

        def execute(index: int) -> JobResult[T]:
            nonlocal done
            if self.is_cancelled:
                return JobResult(index, JobStatus.CANCELLED)
            try:
                result: JobResult[T] = JobResult(index, JobStatus.COMPLETED, value=job(index))
            except BusinessLogicException as e:
                self.logger.debug(f"{label} job {index} failed: {e}")
                result = JobResult(index, JobStatus.FAILED, error=e)
            with self._lock:
                done += 1
                progress.send_progress(f"{done}/{count} done", done / count)
            return result

        if count <= 0:
            return []
        if self.max_workers == 1:
            results = [execute(index) for index in range(count)]
        else:
            with ThreadPoolExecutor(max_workers=min(self.max_workers, count)) as executor:
                futures = [executor.submit(execute, index) for index in range(count)]
                results = [future.result() for future in futures]

        failed = sum(1 for r in results if r.status == JobStatus.FAILED)
        cancelled = sum(1 for r in results if r.status == JobStatus.CANCELLED)
        self.logger.info(f"{label}: {count - failed - cancelled} completed, {failed} failed, {cancelled} cancelled")
        return results

"""
Tests for background jobs and cooperative cancellation
"""
import threading
import time
import unittest

from services.errors import ComputationCancelled, PreconditionError
from services.job_manager import JobManager, JobStatus, cancellation_scope, check_cancelled


class TestJobManager(unittest.TestCase):
    """Job lifecycle on the background thread"""

    def setUp(self):
        self.manager = JobManager(cleanup_after_seconds=3600)

    def run_job(self, work):
        self.manager.create_job('job-1', 'sample')
        thread = self.manager.run_in_background('job-1', work)
        return thread

    def test_completed_job_keeps_result(self):
        self.run_job(lambda: {'answer': 42}).join(timeout=10)
        job = self.manager.get_job('job-1')
        self.assertEqual(job.status, JobStatus.COMPLETED)
        self.assertEqual(job.to_dict()['result'], {'answer': 42})

    def test_failed_job_records_error(self):
        def work():
            raise PreconditionError("e is not idempotent", {'witness': 'U0'})

        self.run_job(work).join(timeout=10)
        job = self.manager.get_job('job-1')
        self.assertEqual(job.status, JobStatus.FAILED)
        self.assertEqual(job.error['error_code'], 'precondition_failed')
        self.assertEqual(job.error['details'], {'witness': 'U0'})

    def test_cancel_stops_at_next_check(self):
        started = threading.Event()

        def work():
            started.set()
            while True:
                check_cancelled()
                time.sleep(0.01)

        thread = self.run_job(work)
        self.assertTrue(started.wait(timeout=10))
        self.assertTrue(self.manager.cancel('job-1'))
        thread.join(timeout=10)
        self.assertEqual(self.manager.get_job('job-1').status, JobStatus.CANCELLED)
        self.assertFalse(self.manager.cancel('job-1'))

    def test_unknown_jobs(self):
        self.assertIsNone(self.manager.get_job('missing'))
        self.assertFalse(self.manager.cancel('missing'))
        with self.assertRaises(KeyError):
            self.manager.run_in_background('missing', lambda: {})

    def test_delete(self):
        self.run_job(lambda: {}).join(timeout=10)
        self.manager.delete_job('job-1')
        self.assertIsNone(self.manager.get_job('job-1'))

    def test_check_outside_scope_is_noop(self):
        check_cancelled()
        event = threading.Event()
        with cancellation_scope(event):
            check_cancelled()
            event.set()
            with self.assertRaises(ComputationCancelled):
                check_cancelled()
        check_cancelled()


if __name__ == '__main__':
    unittest.main()

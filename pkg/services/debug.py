"""Debug logging for algorithm development (enabled with DEV_DEBUG)."""

import logging
import threading
import time
from collections import Counter
from functools import wraps
from typing import Any, Dict

from config import Config

debug_logger = logging.getLogger('mfg_debug')

if Config.DEV_DEBUG:
    debug_logger.setLevel(logging.DEBUG)
    if not debug_logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(
            '\033[36m[MFG]\033[0m %(asctime)s %(threadName)s - %(message)s',
            datefmt='%H:%M:%S'
        ))
        debug_logger.addHandler(handler)
else:
    debug_logger.setLevel(logging.CRITICAL)

# Values longer than this are cut in log lines (polynomials get long quickly)
_MAX_VALUE_CHARS = 120

_counters: Counter = Counter()
_counters_lock = threading.Lock()


def _render(value: Any) -> str:
    text = str(value)
    if len(text) > _MAX_VALUE_CHARS:
        return text[:_MAX_VALUE_CHARS] + '...'
    return text


def debug_log(message: str, **kwargs):
    """Emit ``message | k=v | ...`` on the debug logger, e.g. debug_log("Solving system", rows=120, cols=48)."""
    if not Config.DEV_DEBUG:
        return

    if kwargs:
        extras = ' | '.join(f'{k}={_render(v)}' for k, v in kwargs.items())
        message = f"{message} | {extras}"

    debug_logger.debug(message)


def debug_count(name: str, amount: int = 1) -> None:
    """Bump a named counter (linear systems solved, idempotent candidates tried...)."""
    if not Config.DEV_DEBUG:
        return
    with _counters_lock:
        _counters[name] += amount


def debug_counters(reset: bool = False) -> Dict[str, int]:
    """Snapshot of the counters collected since start (or the last reset)."""
    with _counters_lock:
        snapshot = dict(_counters)
        if reset:
            _counters.clear()
    return snapshot


def debug_timer(func):
    """Run ``func`` inside a DebugTimer named after it."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        if not Config.DEV_DEBUG:
            return func(*args, **kwargs)

        with DebugTimer(func.__qualname__):
            return func(*args, **kwargs)

    return wrapper


class DebugTimer:
    """
    Times a block and logs how much each debug counter moved inside it.

        with DebugTimer("Krull-Schmidt decomposition"):
            ks_decompose(obj)
    """
    def __init__(self, label: str):
        self.label = label
        self.start = None
        self.elapsed = 0.0
        self._before: Dict[str, int] = {}

    def __enter__(self):
        if Config.DEV_DEBUG:
            self.start = time.perf_counter()
            self._before = debug_counters()
            debug_log(f"{self.label} started")
        return self

    def __exit__(self, *args):
        if Config.DEV_DEBUG and self.start:
            self.elapsed = time.perf_counter() - self.start
            after = debug_counters()
            delta = {k: v - self._before.get(k, 0) for k, v in after.items() if v != self._before.get(k, 0)}
            debug_log(f"{self.label} completed", elapsed=f"{self.elapsed:.3f}s", **delta)

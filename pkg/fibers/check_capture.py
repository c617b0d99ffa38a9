"""
Check Capture Decorator
Times verification checks, records each execution in an in-memory log and
prints a one-line status. Timings go to stderr only, never into reports.
"""

import functools
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional


@dataclass
class CheckExecution:
    """Data structure for tracking check executions"""
    check: str
    latency_ms: float
    success: bool = True
    passed: Optional[bool] = None
    error_message: Optional[str] = None


@dataclass
class CheckLog:
    """Executions captured in this process, in call order"""
    executions: List[CheckExecution] = field(default_factory=list)

    def capture_execution(self, execution: CheckExecution):
        self.executions.append(execution)

    def clear(self):
        self.executions.clear()

    def summary(self) -> Dict[str, float]:
        total = len(self.executions)
        if total == 0:
            return {"total_executions": 0, "success_rate": 0.0, "avg_latency_ms": 0.0}
        ok = sum(1 for e in self.executions if e.success and e.passed is not False)
        return {
            "total_executions": total,
            "success_rate": round(100.0 * ok / total, 2),
            "avg_latency_ms": round(sum(e.latency_ms for e in self.executions) / total, 2),
        }


# Global log instance
check_log = CheckLog()


def capture_check(check: str):
    """
    Decorator to capture a verification check.

    Args:
        check: check name as it appears in reports (e.g., "sumid")

    The wrapped function returns a CheckResult-like object with a `passed`
    attribute; exceptions are recorded and re-raised.
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                latency_ms = (time.perf_counter() - start_time) * 1000
                check_log.capture_execution(
                    CheckExecution(check=check, latency_ms=latency_ms, success=False, error_message=str(e))
                )
                print(f"❌ {check}: {e}", file=sys.stderr)
                raise

            latency_ms = (time.perf_counter() - start_time) * 1000
            if isinstance(result, list):
                passed = all(getattr(r, "passed", True) for r in result)
            else:
                passed = getattr(result, "passed", None)
            check_log.capture_execution(CheckExecution(check=check, latency_ms=latency_ms, passed=passed))
            glyph = "✅" if passed is not False else "❌"
            print(f"📊 {glyph} {check}: {latency_ms:.1f}ms", file=sys.stderr)
            return result

        return wrapper
    return decorator

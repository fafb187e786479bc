"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
import contextlib
import time

RESULTS = []


@contextlib.contextmanager
def criterion(number: int, title: str, budget_s: float):
    """Time the body, fail it when over budget, and record the verdict line."""
    start = time.perf_counter()
    status, detail = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if elapsed >= budget_s:
            detail = "over time budget"
            raise AssertionError(f"criterion {number} took {elapsed:.2f} s, budget {budget_s} s")
        status = "PASS"
    except BaseException as e:
        detail = detail or f"{type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}"
        raise
    finally:
        elapsed = time.perf_counter() - start
        line = f"[{status}] {number:2d}. {title} ({elapsed:.2f} s, budget {budget_s:g} s)"
        if detail:
            line += f" :: {detail}"
        RESULTS.append(line)
        print(line)

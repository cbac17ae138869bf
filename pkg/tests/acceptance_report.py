"""Collects one pass/fail line per acceptance criterion."""

import functools
import time

RESULTS: dict[int, str] = {}


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                RESULTS[number] = f"criterion {number:>2} FAIL  {title}: {type(exc).__name__}: {exc}".splitlines()[0]
                print(RESULTS[number])
                raise
            took = time.perf_counter() - start
            extra = f" ({detail})" if detail else ""
            RESULTS[number] = f"criterion {number:>2} PASS  {title}{extra} [{took:.2f} s]"
            print(RESULTS[number])
        return run
    return wrap

# netsim/events.py
"""
events.py – the discrete-event core.

Events pop in ``(timestamp, insertion sequence)`` order, so two runs of the
same scenario replay identically. The clock is an integer count of
nanoseconds and never moves backward.
"""
from __future__ import annotations

import heapq
import itertools
from collections.abc import Callable
from typing import Any, Generic, Optional, TypeVar

from shared.errors import SimulationError, TwinsecError

T = TypeVar("T")

NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000


def seconds(ns: int) -> float:
    return ns / NS_PER_S


def to_ns(seconds_: float) -> int:
    return round(seconds_ * NS_PER_S)


class EventHandle:
    __slots__ = ("when", "cancelled")

    def __init__(self, when: int):
        self.when = when
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


class SimFuture(Generic[T]):
    """Result slot completed by a later event; callbacks run synchronously."""

    def __init__(self) -> None:
        self._done = False
        self._result: Optional[T] = None
        self._exc: Optional[BaseException] = None
        self._callbacks: list[Callable[["SimFuture[T]"], None]] = []

    def done(self) -> bool:
        return self._done

    def result(self) -> T:
        if not self._done:
            raise RuntimeError("future is still pending")
        if self._exc is not None:
            raise self._exc
        return self._result  # type: ignore[return-value]

    def exception(self) -> Optional[BaseException]:
        return self._exc

    def set_result(self, value: T) -> None:
        self._finish(value, None)

    def set_exception(self, exc: BaseException) -> None:
        self._finish(None, exc)

    def add_done_callback(self, fn: Callable[["SimFuture[T]"], None]) -> None:
        if self._done:
            fn(self)
        else:
            self._callbacks.append(fn)

    def _finish(self, value: Optional[T], exc: Optional[BaseException]) -> None:
        if self._done:
            return
        self._done, self._result, self._exc = True, value, exc
        callbacks, self._callbacks = self._callbacks, []
        for fn in callbacks:
            fn(self)


class Scheduler:
    def __init__(self) -> None:
        self._queue: list[tuple[int, int, EventHandle, Callable[..., Any], tuple]] = []
        self._seq = itertools.count()
        self.now = 0
        self.events_run = 0

    def call_at(self, when: int, fn: Callable[..., Any], *args: Any) -> EventHandle:
        if when < self.now:
            raise ValueError(f"cannot schedule at {when} ns, clock is at {self.now} ns")
        handle = EventHandle(when)
        heapq.heappush(self._queue, (when, next(self._seq), handle, fn, args))
        return handle

    def call_later(self, delay: int, fn: Callable[..., Any], *args: Any) -> EventHandle:
        return self.call_at(self.now + delay, fn, *args)

    def every(self, period: int, fn: Callable[[], Any], *, start: int = 0) -> None:
        """Call *fn* at ``start``, ``start + period``, … forever."""
        def tick() -> None:
            fn()
            self.call_later(period, tick)
        self.call_at(start, tick)

    def pending(self) -> int:
        return sum(1 for *_, handle, _, _ in self._queue if not handle.cancelled)

    def step(self) -> bool:
        while self._queue:
            when, _, handle, fn, args = heapq.heappop(self._queue)
            if handle.cancelled:
                continue
            self.now = when
            self.events_run += 1
            try:
                fn(*args)
            except SimulationError:
                raise
            except TwinsecError as exc:
                raise SimulationError(f"{type(exc).__name__}: {exc}", sim_time_ns=when) from exc
            return True
        return False

    def run(self, until: Optional[int] = None) -> None:
        """Run every event with timestamp ≤ *until* (all events if None)."""
        while self._queue:
            if until is not None and self._queue[0][0] > until:
                break
            if not self.step():
                break
        if until is not None and until > self.now:
            self.now = until

    def run_until_complete(self, fut: SimFuture[T], limit: Optional[int] = None) -> T:
        while not fut.done():
            if limit is not None and self._queue and self._queue[0][0] > limit:
                break
            if not self.step():
                break
        return fut.result()

"""A small farm-with-feedback runtime.

One emitter context feeds ``par_degree`` worker threads through bounded
single-producer/single-consumer queues; every worker result flows back to
the emitter through its own feedback queue. The emitter runs in the calling
thread.

Queues never block. Idle contexts park on a doorbell that the peer rings
only when it sees the context parked, so the common path is lock-free.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable

DRR = "drr"
OD = "od"
WS = "ws"
SCHEDULERS = (DRR, OD, WS)

DEFAULT_QSIZE = 4096


class _Marker:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


EOS = _Marker("EOS")
GO_ON = _Marker("GO_ON")


class FarmError(RuntimeError):
    pass


class Task:
    """Base task envelope; the runtime only ever reads ``weight``."""

    __slots__ = ("weight",)

    def __init__(self, weight: float = 1.0):
        self.weight = weight


def set_weight(task: Task, w: float) -> None:
    if w < 0:
        raise ValueError("task weight must be nonnegative")
    task.weight = w


def task_weight(task) -> float:
    return getattr(task, "weight", 1.0)


class OwnershipError(RuntimeError):
    pass


class SpscQueue:
    """Bounded FIFO ring for exactly one producer and one consumer thread.

    Relies on the interpreter lock for ordered slot/index stores; no other
    synchronisation. With ``check_owners`` the first pushing and popping
    threads are recorded and any other thread is rejected.
    """

    __slots__ = ("capacity", "_buf", "_size", "_head", "_tail", "_check", "_producer", "_consumer")

    def __init__(self, capacity: int, check_owners: bool = False):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._size = capacity + 1
        self._buf = [None] * self._size
        self._head = 0
        self._tail = 0
        self._check = check_owners
        self._producer = None
        self._consumer = None

    def push(self, item) -> bool:
        if self._check:
            self._producer = self._own(self._producer, "producer")
        tail = self._tail
        nxt = tail + 1
        if nxt == self._size:
            nxt = 0
        if nxt == self._head:
            return False
        self._buf[tail] = item
        self._tail = nxt
        return True

    def pop(self) -> tuple[bool, Any]:
        if self._check:
            self._consumer = self._own(self._consumer, "consumer")
        head = self._head
        if head == self._tail:
            return False, None
        item = self._buf[head]
        self._buf[head] = None
        head += 1
        self._head = 0 if head == self._size else head
        return True, item

    @staticmethod
    def _own(owner, role):
        me = threading.get_ident()
        if owner is not None and owner != me:
            raise OwnershipError(f"second {role} thread on an SPSC queue")
        return me

    def empty(self) -> bool:
        return self._head == self._tail

    def full(self) -> bool:
        nxt = self._tail + 1
        return (0 if nxt == self._size else nxt) == self._head

    def __len__(self):
        return (self._tail - self._head) % self._size


class _Doorbell:
    __slots__ = ("_event", "parked")

    def __init__(self):
        self._event = threading.Event()
        self.parked = False

    def ring(self):
        if self.parked:
            self._event.set()

    def wake(self):
        self._event.set()

    def park_unless(self, ready: Callable[[], bool]):
        self._event.clear()
        self.parked = True
        try:
            if not ready():
                self._event.wait()
        finally:
            self.parked = False


@dataclass(frozen=True)
class FarmConfig:
    par_degree: int = 1
    qsize: int = DEFAULT_QSIZE
    scheduler: str = WS

    def __post_init__(self):
        if self.par_degree < 1:
            raise ValueError("par_degree must be >= 1")
        if self.qsize < 1:
            raise ValueError("qsize must be >= 1")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.scheduler!r}")

    @property
    def worker_capacity(self) -> int:
        return 1 if self.scheduler == OD else self.qsize


class Scheduler:
    """Picks a worker for each task; ``None`` means every queue is full."""

    def __init__(self, n_workers: int):
        self.n = n_workers

    def select(self, task, queues) -> int | None:
        raise NotImplementedError

    def dispatched(self, i: int, task) -> None:
        pass

    def returned(self, i: int) -> None:
        pass


class RoundRobin(Scheduler):
    """Next worker after the cursor whose input queue has room."""

    def __init__(self, n_workers):
        super().__init__(n_workers)
        self.cursor = 0

    def select(self, task, queues):
        for k in range(self.n):
            i = (self.cursor + k) % self.n
            if not queues[i].full():
                self.cursor = (i + 1) % self.n
                return i
        return None


class Weighted(Scheduler):
    """Worker with the lowest pending weight (lowest index on ties).

    The emitter cannot see queue occupancy, so a task's weight stays pending
    from dispatch until its result comes back on the feedback channel: the
    total therefore also covers the task currently being processed.
    """

    def __init__(self, n_workers):
        super().__init__(n_workers)
        self.pending = [0.0] * n_workers
        self._in_flight = [deque() for _ in range(n_workers)]

    def select(self, task, queues):
        best = None
        for i in range(self.n):
            if not queues[i].full() and (best is None or self.pending[i] < self.pending[best]):
                best = i
        return best

    def dispatched(self, i, task):
        w = task_weight(task)
        self.pending[i] += w
        self._in_flight[i].append(w)

    def returned(self, i):
        self.pending[i] -= self._in_flight[i].popleft()
        if not self._in_flight[i]:
            self.pending[i] = 0.0


def make_scheduler(kind: str, n_workers: int) -> Scheduler:
    return Weighted(n_workers) if kind == WS else RoundRobin(n_workers)


class Emitter:
    """Base for emitter logic.

    ``svc`` is called once with ``None`` and then once per task coming back
    from a worker. It returns a task to dispatch, ``GO_ON`` or ``EOS``;
    extra tasks can be dispatched from inside ``svc`` with ``send_out``.
    """

    _farm: "Farm | None" = None

    def svc(self, task):
        raise NotImplementedError

    def send_out(self, task) -> None:
        self._farm._dispatch(task)


@dataclass
class FarmStats:
    emitted: int = 0
    received: int = 0
    per_worker: list[int] = field(default_factory=list)
    final_pending: list[float] = field(default_factory=list)


class Farm:
    def __init__(self, config: FarmConfig, emitter: Emitter, worker: Callable[[Any], Any],
                 check_owners: bool = False):
        self.config = config
        self.emitter = emitter
        self.worker = worker
        n = config.par_degree
        cap = config.worker_capacity
        self.inputs = [SpscQueue(cap, check_owners) for _ in range(n)]
        # a worker never holds more results than tasks it was given, and the
        # emitter drains feedback before it retries a full dispatch
        self.feedback = [SpscQueue(max(cap, 64), check_owners) for _ in range(n)]
        self.worker_bells = [_Doorbell() for _ in range(n)]
        self.feedback_space = [_Doorbell() for _ in range(n)]
        self.emitter_bell = _Doorbell()
        self.scheduler = make_scheduler(config.scheduler, n)
        self.stats = FarmStats(per_worker=[0] * n)
        self._backlog: deque = deque()
        self._poll = 0
        self._errors: list[BaseException] = []
        self._stop = False

    # emitter side ------------------------------------------------------

    def _collect(self) -> bool:
        """Move every available result into the backlog (round-robin over workers)."""
        got = False
        n = self.config.par_degree
        for k in range(n):
            i = (self._poll + k) % n
            q = self.feedback[i]
            popped = False
            while True:
                ok, res = q.pop()
                if not ok:
                    break
                self.scheduler.returned(i)
                self._backlog.append(res)
                popped = True
            if popped:
                got = True
                self.feedback_space[i].ring()
        self._poll = (self._poll + 1) % n
        return got

    def _any_feedback(self) -> bool:
        return any(not q.empty() for q in self.feedback) or bool(self._errors)

    def _dispatch(self, task) -> None:
        if task is EOS or task is GO_ON or task is None:
            raise FarmError(f"{task!r} cannot be dispatched as a task")
        while True:
            if self._stop:
                raise FarmError("farm stopped") from (self._errors[0] if self._errors else None)
            i = self.scheduler.select(task, self.inputs)
            if i is not None:
                break
            # every input queue is full: make room on the feedback side
            if not self._collect():
                self.emitter_bell.park_unless(lambda: self._any_feedback() or
                                              any(not q.full() for q in self.inputs))
        self.inputs[i].push(task)
        self.scheduler.dispatched(i, task)
        self.stats.emitted += 1
        self.stats.per_worker[i] += 1
        self.worker_bells[i].ring()

    def _next_result(self):
        while not self._backlog:
            if self._errors:
                self._stop = True
                return None
            if not self._collect():
                self.emitter_bell.park_unless(self._any_feedback)
        self.stats.received += 1
        return self._backlog.popleft()

    def _handle(self, out) -> bool:
        if out is EOS:
            return True
        if out is not GO_ON and out is not None:
            self._dispatch(out)
        return False

    def _run_emitter(self) -> None:
        done = self._handle(self.emitter.svc(None))
        while not done:
            res = self._next_result()
            if self._stop:
                return
            done = self._handle(self.emitter.svc(res))
        # results still in flight after end-of-stream are handed over all the same
        while self.stats.received < self.stats.emitted:
            res = self._next_result()
            if self._stop:
                return
            self._handle(self.emitter.svc(res))

    # worker side -------------------------------------------------------

    def _run_worker(self, i: int) -> None:
        inq, fb = self.inputs[i], self.feedback[i]
        bell, space = self.worker_bells[i], self.feedback_space[i]
        fn = self.worker
        try:
            while True:
                ok, task = inq.pop()
                if not ok:
                    if self._stop:
                        return
                    bell.park_unless(lambda: not inq.empty() or self._stop)
                    continue
                if task is EOS:
                    return
                res = fn(task)
                while not fb.push(res):
                    if self._stop:
                        return
                    self.emitter_bell.wake()
                    space.park_unless(lambda: not fb.full() or self._stop)
                self.emitter_bell.ring()
        except BaseException as e:  # noqa: BLE001 - reported by run()
            self._errors.append(e)
            self._stop = True
            self.emitter_bell.wake()

    # ------------------------------------------------------------------

    def run_and_wait_end(self) -> FarmStats:
        self.emitter._farm = self
        threads = [threading.Thread(target=self._run_worker, args=(i,), daemon=True,
                                    name=f"farm-worker-{i}")
                   for i in range(self.config.par_degree)]
        for t in threads:
            t.start()
        try:
            self._run_emitter()
        except BaseException as e:  # noqa: BLE001
            self._errors.insert(0, e)
        finally:
            self._stop = self._stop or bool(self._errors)
            for i, q in enumerate(self.inputs):
                if not self._stop:
                    while not q.push(EOS):
                        self.worker_bells[i].wake()
                        time.sleep(1e-4)
                self.worker_bells[i].wake()
                self.feedback_space[i].wake()
            for t in threads:
                t.join()
            self.emitter._farm = None
        if self._errors:
            raise FarmError(f"farm run failed: {self._errors[0]!r}") from self._errors[0]
        if isinstance(self.scheduler, Weighted):
            self.stats.final_pending = list(self.scheduler.pending)
        return self.stats


def farm_run(config: FarmConfig, emitter: Emitter, worker: Callable[[Any], Any], **kw) -> FarmStats:
    return Farm(config, emitter, worker, **kw).run_and_wait_end()

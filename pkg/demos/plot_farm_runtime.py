"""
A farm with feedback, without any trees
=======================================

The emitter is called once with ``None``, then once per result coming back
from a worker. Here it streams weighted tasks and watches which worker
each one lands on under the weighted scheduler.
"""

import threading
from collections import Counter

from farmtree.runtime import EOS, GO_ON, Emitter, FarmConfig, Task, farm_run


class Job(Task):
    __slots__ = ("n", "who")

    def __init__(self, n):
        super().__init__(weight=n)
        self.n = n
        self.who = None


class Countdown(Emitter):
    """Emits 40 jobs, every third one heavy, then stops once all are back."""

    def __init__(self):
        self.load = Counter()
        self.left = 40

    def svc(self, task):
        if task is None:
            for i in range(40):
                self.send_out(Job(60 if i % 3 == 0 else 2))
            return GO_ON
        self.load[task.who] += task.n
        self.left -= 1
        return EOS if self.left == 0 else GO_ON


def work(job):
    job.who = threading.current_thread().name
    sum(range(job.n * 2000))  # pretend to be busy in proportion to the weight
    return job


for scheduler in ("drr", "od", "ws"):
    e = Countdown()
    stats = farm_run(FarmConfig(par_degree=3, scheduler=scheduler), e, work)
    print(f"{scheduler}: tasks per worker {stats.per_worker}, weight per worker {sorted(e.load.values())}")

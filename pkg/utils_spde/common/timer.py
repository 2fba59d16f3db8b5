# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Wall-clock timing of experiment stages; durations end up in the run record."""

from collections import OrderedDict
from contextlib import contextmanager
from time import perf_counter

from utils_spde.common.exceptions import InvalidArgument


class Timer(object):
    """Wall-clock stopwatch, usable as a context manager.

    Examples:
        >>> import time
        >>> with Timer() as t:
        ...     time.sleep(0.1)
        >>> "Time elapsed {}".format(t) #doctest: +ELLIPSIS
        'Time elapsed 0.1...'
    """

    def __init__(self):
        self._started_at = None
        self._interval = 0
        self.running = False

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *args):
        self.stop()

    def __str__(self):
        return "{:0.4f}".format(self.interval)

    def start(self):
        self._started_at = perf_counter()
        self.running = True

    def stop(self):
        """Stops the clock; `interval` then holds the seconds since start()."""
        if self._started_at is None:
            raise InvalidArgument("Timer was stopped before start()")
        self._interval = perf_counter() - self._started_at
        self.running = False

    def elapsed(self):
        """Seconds since start(), readable while the clock runs."""
        if self._started_at is None:
            return 0.0
        return perf_counter() - self._started_at if self.running else self._interval

    @property
    def interval(self):
        if self.running:
            raise InvalidArgument("Timer is still running; call stop() first")
        return self._interval


class StageTimer(object):
    """Named stage durations of one run, in insertion order.

    A stage may be timed more than once; its durations add up.

    Examples:
        >>> stages = StageTimer()
        >>> with stages.stage("basis"):
        ...     pass
        >>> list(stages.as_dict())
        ['basis']
    """

    def __init__(self):
        self._durations = OrderedDict()

    @contextmanager
    def stage(self, name):
        timer = Timer()
        timer.start()
        try:
            yield timer
        finally:
            timer.stop()
            self._durations[name] = self._durations.get(name, 0.0) + timer.interval

    def total(self):
        return sum(self._durations.values())

    def as_dict(self):
        """Returns:
            dict: Stage name to elapsed seconds, rounded to microseconds.
        """
        return OrderedDict((k, round(v, 6)) for k, v in self._durations.items())

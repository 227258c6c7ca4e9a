# coding=utf-8

# Copyright (C) 2017 Max Harmathy <max.harmathy@web.de>
# Copyright (C) 2026 pqc-backprop contributors
#
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 2 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

"""
Thread pool with a deterministic merge.

Tasks are numbered up front; results come back in task order no matter which
worker finished first, so callers that reduce them in that order get the same
bits for any thread count.
"""

import logging
import os
from queue import Queue
from threading import Thread

from pqc_backprop.errors import ParameterError

log = logging.getLogger(__name__)

THREADS_VARIABLE = "PQCPROP_THREADS"


def resolve_threads(threads=None):
    """
    :param threads: None for the environment default, 0 for one thread per
      CPU, otherwise the thread count
    """
    if threads is None:
        value = os.environ.get(THREADS_VARIABLE, "1")
        try:
            threads = int(value)
        except ValueError:
            raise ParameterError("{}={!r} is not an integer".format(
                THREADS_VARIABLE, value))
    if threads < 0:
        raise ParameterError("thread count must be non-negative")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


class TaskWorker(Thread):
    """
    Take (index, arguments) items from a queue until a None arrives and store
    function results (or the raised exception) under their index.
    """

    def __init__(self, function, task_queue, results, on_done=None):
        self.function = function
        self.task_queue = task_queue
        self.results = results
        self.on_done = on_done
        super(TaskWorker, self).__init__(daemon=True)

    def run(self):
        while True:
            item = self.task_queue.get()
            if item is None:
                break
            index, arguments = item
            try:
                self.results[index] = (True, self.function(*arguments))
            except BaseException as error:
                self.results[index] = (False, error)
            if self.on_done is not None:
                self.on_done(index)


def run_tasks(function, argument_list, threads=1, on_done=None):
    """
    Call ``function(*arguments)`` for every entry of ``argument_list`` and
    return the results in the same order. The first failing task (in task
    order) re-raises its exception.
    """
    argument_list = list(argument_list)
    threads = min(resolve_threads(threads), len(argument_list))
    if threads <= 1:
        results = []
        for index, arguments in enumerate(argument_list):
            results.append(function(*arguments))
            if on_done is not None:
                on_done(index)
        return results

    log.debug("running %d task(s) on %d thread(s)", len(argument_list),
              threads)
    task_queue = Queue()
    results = {}
    workers = [TaskWorker(function, task_queue, results, on_done)
               for _ in range(threads)]
    for worker in workers:
        worker.start()
    for item in enumerate(argument_list):
        task_queue.put(item)
    for _ in workers:
        task_queue.put(None)
    for worker in workers:
        worker.join()

    ordered = []
    for index in range(len(argument_list)):
        succeeded, value = results[index]
        if not succeeded:
            raise value
        ordered.append(value)
    return ordered

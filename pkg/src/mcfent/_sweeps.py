""" _sweeps.py - fan independent tasks out over a bounded process pool """

import asyncio
import concurrent.futures
import logging
from typing import Any, Callable, Dict, Hashable, Mapping, Optional, Sequence

from ._config import default_workers
from ._errors import DomainError


__all__ = "run_sweep",


logger = logging.getLogger(__name__)


async def _gather(fn, tasks, workers):
    loop = asyncio.get_running_loop()
    limit = asyncio.Semaphore(workers)
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:

        async def one(key, args):
            async with limit:
                logger.debug('sweep task %r started', key)
                return key, await loop.run_in_executor(pool, fn, *args)

        return await asyncio.gather(*(one(key, args)
                                      for key, args in tasks))


def run_sweep(fn: Callable[..., Any],
              tasks: Mapping[Hashable, Sequence[Any]],
              workers: Optional[int] = None) -> Dict[Hashable, Any]:
    """Call fn(*args) for every (key, args) of `tasks` and return the
    results keyed and ordered by sorted task key.

    With one worker the tasks run in this process; otherwise `fn` and its
    arguments must be picklable.  The first exception raised by a task
    propagates.
    """
    if workers is None:
        workers = default_workers()
    if workers < 1:
        raise DomainError(f'workers must be at least 1, got {workers}')
    ordered = sorted(tasks.items(), key=lambda item: item[0])
    if workers == 1 or len(ordered) <= 1:
        results = [(key, fn(*args)) for key, args in ordered]
    else:
        logger.info('running %d tasks on %d workers', len(ordered), workers)
        results = asyncio.run(_gather(fn, ordered, workers))
    return dict(sorted(results, key=lambda item: item[0]))

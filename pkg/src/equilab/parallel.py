import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ValidationError

ENV_THREADS = "EQUILAB_THREADS"


def resolve_workers(workers=None) -> int:
    """Explicit argument, else ``$EQUILAB_THREADS``, else 1."""
    if workers is None:
        raw = os.environ.get(ENV_THREADS)
        if raw is None or raw.strip() == "":
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ValidationError(f"{ENV_THREADS} must be a positive integer, got {raw!r}", field=ENV_THREADS) from None
    if int(workers) < 1:
        raise ValidationError(f"must be a positive integer, got {workers}", field="workers")
    return int(workers)


def map_replicas(fn, n_replicas, workers=None):
    """``[fn(r) for r in range(n_replicas)]``, possibly on a thread pool.

    Results come back in replica order, so output never depends on the
    worker count as long as ``fn`` is a pure function of ``r``.
    """
    workers = min(resolve_workers(workers), max(n_replicas, 1))
    if workers == 1:
        return [fn(r) for r in range(n_replicas)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_replicas), chunksize=max(1, n_replicas // (4 * workers))))

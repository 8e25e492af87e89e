from concurrent.futures import ProcessPoolExecutor


def split(n, parts):
    """Split range(n) into at most `parts` contiguous (start, stop) blocks."""
    parts = max(1, min(parts, n)) if n else 1
    step, extra = divmod(n, parts)
    blocks = []
    start = 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        blocks.append((start, stop))
        start = stop
    return blocks


def pmap(fn, items, workers=1):
    """Ordered map; results come back in input order whatever the worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

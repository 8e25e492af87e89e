"""Helpers shared by the CLI and acceptance tests."""

import csv
import io
import json

# execution settings and timings may differ between otherwise identical runs
VOLATILE_KEYS = {"runtime_ms"}
VOLATILE_CONFIG_KEYS = {"workers", "out"}


def load_output(text):
    if text.lstrip().startswith("{"):
        return json.loads(text)
    lines = text.splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    config = json.loads(next(ln for ln in meta if ln.startswith("# config="))[len("# config=") :])
    rows = list(csv.reader(io.StringIO("\n".join(ln for ln in lines if not ln.startswith("#")))))
    return {"config": config, "columns": rows[0], "rows": [[float(x) for x in r] for r in rows[1:]]}


def _strip(doc):
    doc = {k: v for k, v in doc.items() if k not in VOLATILE_KEYS}
    if "config" in doc:
        doc["config"] = {k: v for k, v in doc["config"].items() if k not in VOLATILE_CONFIG_KEYS}
    return doc


def differences(a, b, tol=1e-12, path="$"):
    """List of mismatches: integers and strings exactly, floats within ``tol``."""
    if isinstance(a, dict) and isinstance(b, dict):
        if path == "$":
            a, b = _strip(a), _strip(b)
        out = []
        if set(a) != set(b):
            out.append(f"{path}: keys {sorted(set(a) ^ set(b))}")
        for k in set(a) & set(b):
            out += differences(a[k], b[k], tol, f"{path}.{k}")
        return out
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [f"{path}: length {len(a)} != {len(b)}"]
        out = []
        for i, (x, y) in enumerate(zip(a, b)):
            out += differences(x, y, tol, f"{path}[{i}]")
        return out
    if isinstance(a, float) or isinstance(b, float):
        if isinstance(a, bool) or isinstance(b, bool):
            return [] if a == b else [f"{path}: {a!r} != {b!r}"]
        return [] if abs(a - b) <= tol else [f"{path}: {a!r} vs {b!r}"]
    return [] if a == b and type(a) is type(b) else [f"{path}: {a!r} != {b!r}"]

"""Command-line front end.

Every command writes a single machine-readable document (JSON, or CSV for
``gaps``) that embeds the resolved configuration and a schema version.
Exit status: 0 success, 2 validation error, 3 resource budget exceeded.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

import mpmath

from . import correlation, counting, exponents, fourier, gaps, sequence
from .errors import IndeterminateError, PrecisionDeficitError, ResourceError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    out: Optional[str] = None
    format: Optional[str] = None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(
            command=data["command"],
            params=dict(data.get("params", {})),
            seed=data.get("seed", 0),
            workers=data.get("workers", 1),
            out=data.get("out"),
            format=data.get("format"),
        )


def write_atomic(path: str, text: str):
    """Write via a temporary file in the same directory, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

# command -> parameters that must be present after merging the config file
REQUIRED = {
    "exponents": ["d", "n"],
    "sequence": ["d", "N"],
    "correlate": ["d", "N", "ell"],
    "gaps": ["d", "N"],
    "count": ["a", "d", "B"],
    "fourier-check": ["d", "ell", "N", "A"],
    "mc": ["mode", "d", "ell", "N"],
}

GLOBAL_KEYS = {"seed", "workers", "out", "format", "config"}


def _common(p):
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--config", default=None, help="flat key=value file; explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monocorr",
        description="Local statistics of alpha*n^d mod 1 and point counts on diagonal hypersurfaces.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("exponents", help="L(d,n), phi(m,d,n), d_ell and the threshold test")
    _common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--precision", type=int, default=None)

    p = sub.add_parser("sequence", help="write x(n) = alpha n^d mod 1, one value per line")
    _common(p)
    p.add_argument("--alpha", default=None, help="rat:p/q | sqrt:p/q | dec:0.123... | rand:SEED")
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--precision", type=int, default=None)
    p.add_argument("--digits", type=int, default=None)

    p = sub.add_parser("correlate", help="ell-point correlation R_ell^N for an indicator box")
    _common(p)
    p.add_argument("--alpha", default=None)
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--support", default=None, help='"a1,b1;a2,b2;..." (default [-1/2,1/2] per factor)')
    p.add_argument("--naive", action="store_true", default=None)

    p = sub.add_parser("gaps", help="nearest-neighbour gap distribution with Taylor bounds")
    _common(p)
    p.add_argument("--alpha", default=None)
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--s-grid", dest="s_grid", default=None, help='"start:stop:step" or "s1,s2,..."')
    p.add_argument("--K", type=int, default=None)

    p = sub.add_parser("count", help="stratified point count on a diagonal hypersurface")
    _common(p)
    p.add_argument("--a", default=None, help='coefficients, e.g. "1,-1,1,-1"')
    p.add_argument("--d", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--naive", action="store_true", default=None)
    p.add_argument("--emit-points", dest="emit_points", default=None)
    p.add_argument("--budget", type=int, default=None)

    p = sub.add_parser("fourier-check", help="direct sum vs finite frequency expansion")
    _common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--A", default=None, help="Fejer width (rational allowed)")
    p.add_argument("--tolerance", type=float, default=None)

    p = sub.add_parser("mc", help="Monte Carlo mean / variance of R_ell^N over random alpha")
    _common(p)
    p.add_argument("--mode", choices=["mean", "var"], default=None)
    p.add_argument("--d", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--support", default=None)
    p.add_argument("--fejer", default=None, help="use Fejer factors of this width instead")
    return parser


DEFAULTS = {
    "exponents": {"m": 0, "precision": 128},
    "sequence": {"precision": 64, "digits": 20},
    "correlate": {"naive": False},
    "gaps": {"s_grid": "0.1:4.0:0.1", "K": 3},
    "count": {"naive": False, "budget": counting.DEFAULT_WORK_BUDGET},
    "fourier-check": {"tolerance": 1e-8},
    "mc": {"trials": 60},
}


def read_config_file(path: str) -> Dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _convert(action, raw: str):
    if isinstance(action, argparse._StoreTrueAction):
        return raw.lower() in {"1", "true", "yes", "on"}
    value = action.type(raw) if action.type else raw
    if action.choices is not None and value not in action.choices:
        raise UsageError(f"config value {raw!r} not in {sorted(action.choices)}")
    return value


# options whose values routinely start with "-" (signed lists)
SIGNED_VALUE_FLAGS = {"--support", "--a", "--s-grid", "--A", "--fejer"}


def _bind_signed_values(argv):
    """Rewrite ``--support -1,1`` as ``--support=-1,1`` so argparse keeps the value."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in SIGNED_VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def resolve_config(argv) -> ExperimentConfig:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = parser.parse_args(_bind_signed_values(argv))
    command = ns.command
    values = {k: v for k, v in vars(ns).items() if k != "command"}
    if values.get("config"):
        sp = _subparser(parser, command)
        by_dest = {a.dest: a for a in sp._actions}
        for key, raw in read_config_file(values["config"]).items():
            if key not in by_dest:
                raise UsageError(f"unknown config key {key!r} for {command}")
            if values.get(key) is None:
                values[key] = _convert(by_dest[key], raw)
    for key, default in DEFAULTS.get(command, {}).items():
        if values.get(key) is None:
            values[key] = default
    missing = [k for k in REQUIRED[command] if values.get(k) is None]
    if command == "sequence" and not values.get("out"):
        missing.append("out")
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise UsageError(f"{command}: missing required option(s) {flags}")
    params = {k: v for k, v in values.items() if k not in GLOBAL_KEYS}
    return ExperimentConfig(
        command=command,
        params=params,
        seed=values["seed"] if values.get("seed") is not None else 0,
        workers=values["workers"] if values.get("workers") is not None else 1,
        out=values.get("out"),
        format=values.get("format"),
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _alpha(cfg: ExperimentConfig, d, N):
    spec = cfg.params.get("alpha") or f"rand:{cfg.seed}"
    return sequence.parse_alpha(spec, d, N)


def _default_box(ell):
    return ";".join(["-1/2,1/2"] * (ell - 1))


def cmd_exponents(cfg):
    p = cfg.params
    d, n, m = p["d"], p["n"], p["m"]
    rep = exponents.exponent_report(d, n, m, p["precision"])
    out = rep.to_dict()
    out["d_ell_for_n"] = exponents.d_ell(n)
    out["threshold"] = exponents.poissonian_threshold(d, n)
    return out


def cmd_sequence(cfg):
    p = cfg.params
    alpha = _alpha(cfg, p["d"], p["N"])
    seq = sequence.generate(alpha, p["d"], p["N"], p["precision"], workers=cfg.workers)
    lines = seq.decimal_strings(p["digits"])
    write_atomic(cfg.out, "\n".join(lines) + "\n")
    return {"alpha": str(alpha), "N": seq.N, "precision": seq.precision, "values_file": cfg.out}


def cmd_correlate(cfg):
    p = cfg.params
    ell = p["ell"]
    f = correlation.parse_support(p.get("support") or _default_box(ell))
    alpha = _alpha(cfg, p["d"], p["N"])
    start = time.perf_counter()
    seq = sequence.generate(alpha, p["d"], p["N"], workers=cfg.workers)
    if p["naive"]:
        res = correlation.r_ell_naive(seq, ell, f)
    else:
        res = correlation.r_ell_windowed(seq, ell, f, workers=cfg.workers)
    elapsed = (time.perf_counter() - start) * 1000
    return {
        "alpha": str(alpha),
        "value": res.value,
        "expectation": res.expectation,
        "tuple_count": res.tuple_count,
        "N": res.N,
        "ell": res.ell,
        "runtime_ms": round(elapsed, 3),
    }


def cmd_gaps(cfg):
    p = cfg.params
    alpha = _alpha(cfg, p["d"], p["N"])
    seq = sequence.generate(alpha, p["d"], p["N"], workers=cfg.workers)
    rep = gaps.gap_report(seq, gaps.parse_grid(p["s_grid"]), p["K"])
    return {
        "alpha": str(alpha),
        "N": rep.N,
        "K": rep.K,
        "columns": ["s", "P_N", "lower", "upper", "exp_ref"],
        "rows": [list(r) for r in rep.rows()],
    }


def _parse_coefficients(text):
    try:
        a = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"coefficients must be integers: {text!r}") from None
    if any(x == 0 for x in a):
        raise UsageError("coefficients must be nonzero")
    return a


def cmd_count(cfg):
    p = cfg.params
    form = counting.DiagonalForm(tuple(_parse_coefficients(p["a"])), p["d"])
    rep = counting.count_report(form, p["B"], naive=p["naive"], budget=p["budget"], workers=cfg.workers)
    if p.get("emit_points"):
        text = "".join(",".join(map(str, pt.coords)) + "\n" for pt in rep.points)
        write_atomic(p["emit_points"], text)
    return rep.to_dict()


def cmd_fourier_check(cfg):
    p = cfg.params
    d, ell, N = p["d"], p["ell"], p["N"]
    A = Fraction(p["A"])
    alpha = sequence.sample_alpha(cfg.seed, d, N)
    seq = sequence.generate(alpha, d, N)
    chk = fourier.poisson_identity_check(seq, ell, correlation.fejer(A, ell - 1), p["tolerance"])
    out = {"alpha": str(alpha)}
    out.update(chk.to_dict())
    return out


def cmd_mc(cfg):
    p = cfg.params
    ell = p["ell"]
    if p.get("fejer"):
        f = correlation.fejer(Fraction(p["fejer"]), ell - 1)
    else:
        f = correlation.parse_support(p.get("support") or _default_box(ell))
    args = (p["d"], ell, f, p["N"], p["trials"], cfg.seed, cfg.workers)
    if p["mode"] == "mean":
        est = fourier.expectation_mc(*args)
        return {"mean": est.mean, "stderr": est.stderr, "expectation": float(f.expectation), "values": est.values}
    est = fourier.variance_mc(*args)
    return {
        "second_moment": est.second_moment,
        "mean_squared": est.mean_squared,
        "excess": est.excess,
        "values": est.values,
    }


COMMANDS = {
    "exponents": cmd_exponents,
    "sequence": cmd_sequence,
    "correlate": cmd_correlate,
    "gaps": cmd_gaps,
    "count": cmd_count,
    "fourier-check": cmd_fourier_check,
    "mc": cmd_mc,
}


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 30)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def render(cfg: ExperimentConfig, result: Dict[str, Any]) -> str:
    fmt = cfg.format or ("csv" if cfg.command == "gaps" else "json")
    doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "config": cfg.to_dict()}
    doc.update(result)
    if fmt == "json":
        return json.dumps(doc, default=_jsonable, indent=2) + "\n"
    if "rows" not in result:
        raise UsageError(f"{cfg.command} has no tabular output; use --format json")
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    buf.write("# config=" + json.dumps(cfg.to_dict(), default=_jsonable) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result["columns"])
    for row in result["rows"]:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def run(cfg: ExperimentConfig):
    """Dispatch and render; write to ``cfg.out`` when set.

    Returns ``(text, written)``. The ``sequence`` command owns ``--out`` for its
    values file, so its summary document is always returned unwritten.
    """
    result = COMMANDS[cfg.command](cfg)
    text = render(cfg, result)
    if cfg.out and cfg.command != "sequence":
        write_atomic(cfg.out, text)
        return text, True
    return text, False


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if exc.code is not None else EXIT_OK
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text, written = run(cfg)
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, PrecisionDeficitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IndeterminateError as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if not written:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

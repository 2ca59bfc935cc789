"""Command-line front end: ``keyrate``, ``sweep`` and ``validate``.

Configs are flat JSON objects whose keys are ProtocolConfig fields. A sweep
spec is a JSON object::

    {"base": {...config...},
     "axes": [["L", [50, 100]], ["delta_r", {"start": 0, "stop": 1, "step": 0.05}]],
     "summary": "delta_r"}

Rows come out in grid order (last axis fastest). Set CVQKD_OUTPUT_DIR to
change where outputs and SDP dumps go when ``--out`` is a bare file name.
"""

import argparse
import csv
import io
import itertools
import json
import logging
import math
import multiprocessing
import os
import sys

import numpy as np

from .engine import PipelineError, compute_key_rate
from .oracle import lossonly_key_rate, optimal_alpha
from .protocol import ConfigError, ProtocolConfig

log = logging.getLogger("cvqkd_psk")

CSV_COLUMNS = (
    "num_states,L_km,eta,alpha,xi,beta,delta_r,delta_a,n_cutoff,"
    "step1,step2,zeta_eps,eps_prime,p_pass,delta_EC,rate,iterations,status"
).split(",")

AXIS_FIELDS = {"L": "distance_km", "alpha": "alpha", "delta_r": "delta_r", "xi": "xi", "beta": "beta"}

# radial postselection grid used when an axis is given without values
DEFAULT_DELTA_R = {"start": 0.0, "stop": 2.15, "step": 0.025}


class UsageError(Exception):
    pass


def output_dir():
    return os.environ.get("CVQKD_OUTPUT_DIR", ".")


def resolve_out(path):
    if path is None:
        return None
    if os.path.dirname(path):
        return path
    return os.path.join(output_dir(), path)


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def make_config(data):
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    if "L" in data:
        data = dict(data)
        data["distance_km"] = data.pop("L")
    try:
        return ProtocolConfig.from_dict(data)
    except ConfigError as exc:
        raise UsageError(f"invalid config field {exc}") from exc
    except TypeError as exc:
        raise UsageError(f"invalid config: {exc}") from exc


def fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.12g}"


# -- keyrate -----------------------------------------------------------------


def run_point(args):
    """Worker entry: (config dict, dump dir) -> CSV row dict."""
    data, dump_dir = args
    cfg = ProtocolConfig.from_dict(data)
    row = {
        "num_states": cfg.num_states,
        "L_km": cfg.distance_km,
        "eta": cfg.eta,
        "alpha": cfg.alpha,
        "xi": cfg.xi,
        "beta": cfg.beta,
        "delta_r": cfg.delta_r,
        "delta_a": cfg.delta_a,
        "n_cutoff": cfg.n_cutoff,
    }
    try:
        res = compute_key_rate(cfg, dump_dir=dump_dir)
    except PipelineError as exc:
        log.warning("point %s failed: %s", data, exc)
        row.update({k: float("nan") for k in CSV_COLUMNS[9:16]})
        row.update(iterations=0, status=f"error:{exc.stage}")
        return row
    row.update(
        step1=res.step1_value,
        step2=res.step2_lower,
        zeta_eps=res.zeta_eps,
        eps_prime=res.epsilon_prime,
        p_pass=res.p_pass,
        delta_EC=res.delta_EC,
        rate=res.rate,
        iterations=res.iterations,
        status=res.status,
    )
    return row


def cmd_keyrate(ns):
    cfg = make_config(load_json(ns.config) if ns.config else {})
    dump = os.path.join(output_dir(), "sdp_dumps") if ns.debug_dump_sdp else None
    try:
        res = compute_key_rate(cfg, dump_dir=dump)
    except PipelineError as exc:
        print(f"key-rate pipeline failed: {exc}", file=sys.stderr)
        return 1
    record = {"config": cfg.to_dict(), "result": res.as_dict(with_trace=True)}
    text = json.dumps(record, indent=2, default=float)
    print(text)
    out = resolve_out(ns.out)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    return 0 if res.status in ("ok", "nonpositive") else 1


# -- sweep -------------------------------------------------------------------


def axis_values(name, spec):
    if spec is None:
        if name != "delta_r":
            raise UsageError(f"axis {name} needs values")
        spec = DEFAULT_DELTA_R
    if isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "step"}
        if extra or not {"start", "stop", "step"} <= set(spec):
            raise UsageError(f"axis {name}: range needs exactly start, stop, step")
        n = int(round((spec["stop"] - spec["start"]) / spec["step"])) + 1
        return [round(spec["start"] + k * spec["step"], 12) for k in range(n)]
    if not isinstance(spec, list):
        raise UsageError(f"axis {name}: values must be a list or a range")
    return [float(v) for v in spec]


def parse_axis_arg(text):
    """``name=v1,v2`` or ``name=start:stop:step`` or bare ``name``."""
    name, _, rest = text.partition("=")
    if not rest:
        return name, None
    if ":" in rest:
        a, b, c = (float(t) for t in rest.split(":"))
        return name, {"start": a, "stop": b, "step": c}
    return name, [float(t) for t in rest.split(",")]


def build_grid(spec):
    extra = set(spec) - {"base", "axes", "summary"}
    if extra:
        raise UsageError(f"unknown sweep key {sorted(extra)[0]}")
    base = dict(spec.get("base", {}))
    if "L" in base:
        base["distance_km"] = base.pop("L")
    make_config(base)
    axes = spec.get("axes") or []
    if not axes:
        raise UsageError("sweep needs at least one axis")
    names, values = [], []
    for entry in axes:
        name, vals = entry if len(entry) == 2 else (entry[0], None)
        if name not in AXIS_FIELDS:
            raise UsageError(f"unknown axis {name}; choose from {sorted(AXIS_FIELDS)}")
        names.append(name)
        values.append(axis_values(name, vals))
        if not values[-1]:
            raise UsageError(f"axis {name} is empty")
    points = []
    for combo in itertools.product(*values):
        d = dict(base)
        for name, v in zip(names, combo):
            d[AXIS_FIELDS[name]] = v
        make_config(d)
        points.append(d)
    return names, points


def run_points(points, workers, dump_dir=None):
    jobs = [(p, dump_dir) for p in points]
    if workers <= 1 or len(jobs) == 1:
        return [run_point(j) for j in jobs]
    with multiprocessing.Pool(workers) as pool:
        return list(pool.imap(run_point, jobs))


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[c]) if c != "status" else r[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def argmax_summary(rows, names, axis):
    """Best ``axis`` value (by rate) for each combination of the other axes."""
    col = {"L": "L_km"}.get(axis, axis)
    others = [{"L": "L_km"}.get(n, n) for n in names if n != axis]
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[o] for o in others), []).append(r)
    lines = ["# argmax of rate over " + axis]
    for key, rs in groups.items():
        ok = [r for r in rs if np.isfinite(r["rate"])]
        label = ",".join(f"{o}={fmt(k)}" for o, k in zip(others, key)) or "all"
        if not ok:
            lines.append(f"# {label}: no certified rate")
            continue
        best = max(ok, key=lambda r: r["rate"])
        lines.append(
            f"# {label}: {axis}={fmt(best[col])} rate={fmt(best['rate'])} p_pass={fmt(best['p_pass'])}"
        )
    return "\n".join(lines) + "\n"


def cmd_sweep(ns):
    spec = load_json(ns.config) if ns.config else {}
    if not isinstance(spec, dict):
        raise UsageError("sweep spec must be a JSON object")
    if ns.axis:
        spec = dict(spec)
        spec["axes"] = [list(parse_axis_arg(a)) for a in ns.axis]
    if ns.summary:
        spec["summary"] = ns.summary
    names, points = build_grid(spec)
    dump = os.path.join(output_dir(), "sdp_dumps") if ns.debug_dump_sdp else None
    rows = run_points(points, ns.workers, dump)
    text = rows_to_csv(rows)
    out = resolve_out(ns.out)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if spec.get("summary"):
        if spec["summary"] not in names:
            raise UsageError(f"summary axis {spec['summary']} is not swept")
        sys.stderr.write(argmax_summary(rows, names, spec["summary"]))
    return 0


# -- validate ----------------------------------------------------------------


def validate_point(args):
    data, tolerance = args
    oracle_cfg = ProtocolConfig.from_dict({**data, "xi": 0.0})
    alpha, _ = optimal_alpha(oracle_cfg)
    alpha = round(alpha, 4)
    oracle_cfg = ProtocolConfig.from_dict({**data, "xi": 0.0, "alpha": alpha})
    ref = lossonly_key_rate(oracle_cfg)
    cfg = ProtocolConfig.from_dict({**data, "xi": 1e-5, "alpha": alpha})
    try:
        res = compute_key_rate(cfg)
        rate, s1, s2 = res.rate, res.step1_value, res.step2_lower
    except PipelineError as exc:
        log.warning("validation point failed: %s", exc)
        rate = s1 = s2 = float("nan")
    rel = abs(rate - ref.rate) / abs(ref.rate) if ref.rate else float("inf")
    ok = bool(np.isfinite(rel) and rel < tolerance and s2 <= s1 + 1e-6)
    return {
        "L_km": cfg.distance_km,
        "alpha_opt": alpha,
        "oracle_rate": ref.rate,
        "engine_rate": rate,
        "step1": s1,
        "step2": s2,
        "rel_diff": rel,
        "pass": ok,
    }


def cmd_validate(ns):
    base = load_json(ns.config) if ns.config else {}
    if not isinstance(base, dict):
        raise UsageError("config must be a JSON object")
    base = dict(base)
    base.setdefault("beta", 0.95)
    base.setdefault("delta_r", 0.0)
    if ns.n_cutoff is not None:
        base["n_cutoff"] = ns.n_cutoff
    base.setdefault("n_cutoff", 10)
    grid = [float(t) for t in ns.L.split(",") if t.strip()] if ns.L else []
    if not grid:
        raise UsageError("validate needs a nonempty L grid (--L 20,40,60)")
    points = []
    for L in grid:
        d = dict(base, distance_km=L)
        d.pop("L", None)
        make_config(d)
        points.append((d, ns.tolerance))
    if ns.workers <= 1:
        rows = [validate_point(p) for p in points]
    else:
        with multiprocessing.Pool(ns.workers) as pool:
            rows = list(pool.imap(validate_point, points))
    cols = ["L_km", "alpha_opt", "oracle_rate", "engine_rate", "step1", "step2", "rel_diff", "pass"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(r[c]) if c != "pass" else ("pass" if r[c] else "FAIL") for c in cols])
    text = buf.getvalue()
    sys.stdout.write(text)
    out = resolve_out(ns.out)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    failed = [r for r in rows if not r["pass"]]
    if failed:
        for r in failed:
            print(f"FAIL L={fmt(r['L_km'])} rel_diff={fmt(r['rel_diff'])}", file=sys.stderr)
        return 1
    return 0


# -- entry point -------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="cvqkd-psk", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="output file")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--debug-dump-sdp", action="store_true", help="write every SDP in SDPA format")

    k = sub.add_parser("keyrate", help="certified key rate for one configuration")
    common(k)
    s = sub.add_parser("sweep", help="key rates over a parameter grid, as CSV")
    common(s)
    s.add_argument("--axis", action="append", help="name=v1,v2 | name=start:stop:step (overrides spec axes)")
    s.add_argument("--summary", help="print the argmax of the rate over this axis")
    v = sub.add_parser("validate", help="compare loss-only runs against the analytical rate")
    common(v)
    v.add_argument("--L", help="comma-separated distances in km")
    v.add_argument("--n-cutoff", type=int)
    v.add_argument("--tolerance", type=float, default=0.05)
    return p


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if ns.workers < 1:
        parser.error("--workers must be >= 1")
    handler = {"keyrate": cmd_keyrate, "sweep": cmd_sweep, "validate": cmd_validate}[ns.command]
    try:
        return handler(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line orchestration: approx -> prove pipelines, parameter sweeps,
plot-data export, and the logistic compatibility demo.

Configuration is JSON; every real number that enters rigorous code is kept
as its decimal string and converted through exact rationals to an outward
rounded interval (floats like 0.2 and 0.02 are not dyadic).  Exit codes:
0 = proven / success, 1 = validation failed (sound but unproven),
2 = configuration or runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

try:
    import jsonschema
except ImportError:                      # pragma: no cover
    jsonschema = None

from tailflow.approx import (
    ApproxOrbit,
    GalerkinConfig,
    GalerkinSystem,
    bundled_seed,
    find_periodic_orbit,
)
from tailflow.enclosure import EnclosurePolicy, find_enclosure
from tailflow.evolution import EvolutionConfig
from tailflow.intervals import Interval
from tailflow.models import (
    BrusselatorHeadField,
    BrusselatorModel,
    BrusselatorParams,
    LogisticModel,
    LogisticParams,
    PdeState,
)
from tailflow.poincare import ProofPolicy, validate_fixed_point
from tailflow.tails import Kind, Parity, TailVector

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "model": {"enum": ["brusselator", "logistic"]},
        "params": {
            "type": "object",
            "properties": {
                "d1": {"type": "string"}, "d2": {"type": "string"},
                "A": {"type": "string"}, "B": {"type": "string"},
                "d": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "head_n": {"type": "integer", "minimum": 1},
        "parity": {"enum": ["odd", "none"]},
        "tail_s": {"type": "number", "exclusiveMinimum": 1},
        "tail_c": {"type": "number", "minimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "tau": {"type": "number", "exclusiveMinimum": 0},
        "tau_max": {"type": "number"},
        "tau_min": {"type": "number"},
        "grow": {"type": "number", "minimum": 1},
        "order": {"type": "integer", "minimum": 2, "maximum": 6},
        "enclosure_retries": {"type": "integer", "minimum": 1},
        "enclosure_inflate": {"type": "number", "exclusiveMinimum": 1},
        "raise_cap": {"type": ["number", "null"]},
        "fundamental_period": {"type": "boolean"},
        "bisect_tol": {"type": "number"},
        "t_max": {"type": "number"},
        "eig_floor": {"type": "number"},
        "approx": {
            "type": "object",
            "properties": {
                "n": {"type": "integer"},
                "transient": {"type": "number"},
                "seed": {"type": ["string", "object"]},
                "rtol": {"type": "number"},
                "atol": {"type": "number"},
            },
            "additionalProperties": True,
        },
        "out_dir": {"type": "string"},
    },
    "required": ["model", "params"],
    "additionalProperties": True,
}

_DEFAULTS = {
    "head_n": 59,
    "parity": "odd",
    "tail_s": 5.0,
    "tail_c": 1.0,
    "delta": 1e-5,
    "tau": 2.0 ** -11,
    "tau_max": 2.0 ** -11,
    "tau_min": 2.0 ** -16,
    "grow": 1.0,
    "order": 6,
    "enclosure_retries": 12,
    "enclosure_inflate": 2.0,
    "raise_cap": None,
    "fundamental_period": False,
    "bisect_tol": 1e-4,
    "t_max": 30.0,
    "eig_floor": 1e-6,
    "approx": {},
    "out_dir": ".",
}


class ConfigError(ValueError):
    pass


def load_config(path: str) -> dict:
    """Parse the JSON config, keeping all reals as exact decimal strings."""
    with open(path) as f:
        raw = json.load(f, parse_float=lambda s: float(s))
    if jsonschema is not None:
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(
                f"config key {list(exc.absolute_path)}: {exc.message}") from exc
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    # model parameters stay strings and go through exact decimal parsing
    for k, v in cfg.get("params", {}).items():
        if not isinstance(v, str):
            raise ConfigError(f"params.{k} must be a decimal string")
    return cfg


def build_model(cfg: dict):
    parity = Parity.ODD if cfg["parity"] == "odd" else Parity.NONE
    if cfg["model"] == "brusselator":
        p = cfg["params"]
        params = BrusselatorParams.make(p["d1"], p["d2"], p["A"], p["B"])
        return BrusselatorModel(params, parity), params
    params = LogisticParams.make(cfg["params"]["d"])
    return LogisticModel(params, parity), params


def _evolution_config(cfg: dict) -> EvolutionConfig:
    return EvolutionConfig(
        tau=cfg["tau"], order=cfg["order"], tau_min=cfg["tau_min"],
        tau_max=cfg["tau_max"], grow=cfg["grow"], raise_cap=cfg["raise_cap"],
        enclosure=EnclosurePolicy(inflate=cfg["enclosure_inflate"],
                                  max_retries=cfg["enclosure_retries"]))


def _proof_policy(cfg: dict) -> ProofPolicy:
    return ProofPolicy(delta=cfg["delta"], tail_c=cfg["tail_c"],
                       tail_s=cfg["tail_s"], bisect_tol=cfg["bisect_tol"],
                       t_max=cfg["t_max"], eig_floor=cfg["eig_floor"],
                       fundamental_check=cfg["fundamental_period"])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_approx(cfg: dict, out: Optional[str] = None) -> str:
    if cfg["model"] != "brusselator":
        raise ConfigError("approx requires the brusselator model")
    model, params = build_model(cfg)
    acfg = cfg.get("approx", {})
    seed = acfg.get("seed", "B2.0")
    if isinstance(seed, str):
        seed = bundled_seed(seed)
    gcfg = GalerkinConfig(params, n=cfg["head_n"],
                          parity=model.parity,
                          rtol=acfg.get("rtol", 1e-10),
                          atol=acfg.get("atol", 1e-12),
                          transient=acfg.get("transient", 60.0))
    orbit = find_periodic_orbit(gcfg, seed)
    os.makedirs(cfg["out_dir"], exist_ok=True)
    out = out or os.path.join(cfg["out_dir"], "proof_input.json")
    with open(out, "w") as f:
        json.dump(orbit.to_json(), f)
    # one non-rigorous period as a CSV trace for plotting
    sysg = GalerkinSystem(gcfg)
    sol = sysg.integrate(orbit.x_star, (0.0, orbit.period), dense=True)
    ts = np.linspace(0.0, orbit.period, 600)
    trace = os.path.join(cfg["out_dir"], "approx_trace.csv")
    with open(trace, "w", newline="") as f:
        wcsv = csv.writer(f)
        names = [f"u{k}" for k in sysg.modes] + [f"v{k}" for k in sysg.modes]
        wcsv.writerow(["t"] + names)
        for t in ts:
            wcsv.writerow([f"{t:.8f}"] + [f"{x:.12e}" for x in sol.sol(t)])
    print(f"approx: T* = {orbit.period:.6f}, residual = {orbit.residual:.2e}, "
          f"cycle = {orbit.cycle}")
    print(f"wrote {out} and {trace}")
    return out


def cmd_prove(cfg: dict, proof_input: str, trace: Optional[str] = None) -> int:
    if cfg["model"] != "brusselator":
        raise ConfigError("prove requires the brusselator model")
    model, params = build_model(cfg)
    with open(proof_input) as f:
        orbit = ApproxOrbit.from_json(json.load(f))
    fld = BrusselatorHeadField(model, cfg["head_n"])
    evo = _evolution_config(cfg)
    pol = _proof_policy(cfg)
    os.makedirs(cfg["out_dir"], exist_ok=True)
    rows = []

    def obs(ta, tb, pq, rep, lval):
        if trace is not None:
            mids = pq.p_box.mid
            rads = pq.p_box.rad
            rows.append([float(tb)] + [f"{m:.10e}" for m in mids[:8]]
                        + [f"{r:.3e}" for r in rads[:8]])

    t0 = time.time()
    cert = validate_fixed_point(model, fld, orbit, evo, pol,
                                observer=obs if trace else None)
    elapsed = time.time() - t0
    cert.params = {k: v for k, v in cfg["params"].items()}
    cert.meta["seconds"] = elapsed
    cert_path = os.path.join(cfg["out_dir"], "certificate.json")
    with open(cert_path, "w") as f:
        json.dump(cert.to_json(), f, indent=1)
    table_path = os.path.join(cfg["out_dir"], "certificate_table.txt")
    with open(table_path, "w") as f:
        f.write(cert.table(10) + "\n")
    if trace is not None:
        with open(trace, "w", newline="") as f:
            wcsv = csv.writer(f)
            wcsv.writerow(["t"] + [f"mid{i}" for i in range(8)]
                          + [f"rad{i}" for i in range(8)])
            wcsv.writerows(rows)
    status = "PROVEN" if cert.passed else "NOT PROVEN"
    print(f"{status}: C1={cert.c1} C2={cert.c2} transversal={cert.transversal}")
    print(f"period in [{cert.period[0]:.6f}, {cert.period[1]:.6f}] "
          f"({elapsed:.0f}s)")
    print(f"wrote {cert_path}")
    return 0 if cert.passed else 1


def _sweep_entry(args):
    base, delta_cfg = args
    cfg = json.loads(json.dumps(base))
    cfg.update(delta_cfg)
    if "params" in delta_cfg:
        p = dict(base.get("params", {}))
        p.update(delta_cfg["params"])
        cfg["params"] = p
    tag = delta_cfg.get("tag") or cfg["params"].get("B", "run")
    out_dir = os.path.join(cfg["out_dir"], f"sweep_{tag}")
    cfg["out_dir"] = out_dir
    t0 = time.time()
    try:
        pi = cmd_approx(cfg)
        code = cmd_prove(cfg, pi)
        cert = json.load(open(os.path.join(out_dir, "certificate.json")))
        period = cert["period_float"]
        return {"tag": str(tag), "passed": code == 0,
                "period": period, "seconds": time.time() - t0,
                "inclusion_dim": cert["meta"].get("inclusion_dim")}
    except Exception as exc:           # per-entry isolation
        return {"tag": str(tag), "passed": False, "error": str(exc),
                "seconds": time.time() - t0}


def cmd_sweep(manifest_path: str) -> int:
    with open(manifest_path) as f:
        manifest = json.load(f)
    base = dict(_DEFAULTS)
    base.update(manifest.get("base", {}))
    entries = manifest.get("entries", [])
    if not entries:
        print("empty manifest: nothing to do")
        return 0
    workers = int(os.environ.get("TAILFLOW_WORKERS", "1"))
    results = []
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_entry,
                                  [(base, e) for e in entries]))
    else:
        for e in entries:
            results.append(_sweep_entry((base, e)))
    print(f"{'tag':>10} {'passed':>7} {'incl.dim':>9} {'seconds':>8}  period")
    ok = True
    for r in results:
        ok = ok and r.get("passed", False)
        per = r.get("period")
        per_s = f"[{per[0]:.5f},{per[1]:.5f}]" if per else r.get("error", "-")
        print(f"{r['tag']:>10} {str(r.get('passed')):>7} "
              f"{str(r.get('inclusion_dim', '-')):>9} "
              f"{r['seconds']:>8.0f}  {per_s}")
    out = os.path.join(base.get("out_dir", "."), "sweep_summary.json")
    with open(out, "w") as f:
        json.dump(results, f, indent=1)
    print(f"wrote {out}")
    return 0 if ok else 1


def cmd_export_plot(trace_path: str, out_dir: str = ".") -> int:
    if not os.path.exists(trace_path):
        print(f"trace not found: {trace_path}", file=sys.stderr)
        return 2
    with open(trace_path) as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [r for r in reader]
    os.makedirs(out_dir, exist_ok=True)
    long_path = os.path.join(out_dir, "modes_long.csv")
    with open(long_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "mode", "midpoint", "radius"])
        for r in rows:
            t = r[0]
            for j, name in enumerate(header[1:], start=1):
                if name.startswith("rad"):
                    continue
                rad = "0"
                if f"rad{name[3:]}" in header:
                    rad = r[header.index(f"rad{name[3:]}")]
                w.writerow([t, name, r[j], rad])
    # u(t,x), v(t,x) surfaces from the midpoints (approx traces only)
    surf_path = os.path.join(out_dir, "surface.csv")
    unames = [h for h in header if h.startswith("u")]
    vnames = [h for h in header if h.startswith("v")]
    with open(surf_path, "w", newline="") as f:
        w = csv.writer(f)
        xs = np.linspace(0.0, np.pi, 65)
        w.writerow(["t"] + [f"u(x={x:.3f})" for x in xs]
                   + [f"v(x={x:.3f})" for x in xs])
        if unames and vnames:
            uk = np.array([int(h[1:]) for h in unames])
            vk = np.array([int(h[1:]) for h in vnames])
            for r in rows:
                uc = np.array([float(r[header.index(h)]) for h in unames])
                vc = np.array([float(r[header.index(h)]) for h in vnames])
                uvals = (np.sin(np.outer(xs, uk)) @ uc)
                vvals = (np.sin(np.outer(xs, vk)) @ vc)
                w.writerow([r[0]] + [f"{x:.8e}" for x in uvals]
                           + [f"{x:.8e}" for x in vvals])
    print(f"wrote {long_path} and {surf_path}")
    return 0


def cmd_logistic_demo(cfg: dict) -> int:
    model, params = build_model(cfg)
    if cfg["model"] != "logistic":
        raise ConfigError("logistic-demo requires the logistic model")
    import math
    n = max(cfg["head_n"], 8)
    a = math.sqrt(math.pi / 8.0)
    head = np.zeros(n)
    head[0] = a
    report = {}
    for s in (4.0, 6.0):
        x0 = PdeState((TailVector.from_point_coeffs(head, s, Kind.SINE),))
        res = find_enclosure(model, x0, 1e-2,
                             EnclosurePolicy(max_retries=20))
        report[f"s={s}"] = {
            "accepted": res.accepted,
            "retries": res.retries,
            "tau": res.tau,
            "tail_ok": res.diagnostics["components"][0]["tail_ok"],
        }
        print(f"s = {s}: accepted = {res.accepted} "
              f"(retries {res.retries}, tau {res.tau:.2e})")
    os.makedirs(cfg["out_dir"], exist_ok=True)
    out = os.path.join(cfg["out_dir"], "logistic_demo.json")
    with open(out, "w") as f:
        json.dump(report, f, indent=1)
    expected = report["s=4.0"]["accepted"] and not report["s=6.0"]["accepted"]
    print("compatibility limitation reproduced" if expected
          else "unexpected outcome")
    return 0 if expected else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="tailflow",
        description="rigorous integration and periodic-orbit certificates "
                    "for 1-D dissipative PDEs in sine-series form")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p_app = sub.add_parser("approx", help="find the approximate orbit")
    p_app.add_argument("config")
    p_app.add_argument("--out")
    p_prv = sub.add_parser("prove", help="run the rigorous certificate")
    p_prv.add_argument("config")
    p_prv.add_argument("proof_input")
    p_prv.add_argument("--trace")
    p_swp = sub.add_parser("sweep", help="run a manifest of proofs")
    p_swp.add_argument("manifest")
    p_exp = sub.add_parser("export-plot", help="CSV plot data from a trace")
    p_exp.add_argument("trace")
    p_exp.add_argument("--out-dir", default=".")
    p_log = sub.add_parser("logistic-demo",
                           help="enclosure compatibility limitation demo")
    p_log.add_argument("config")
    args = ap.parse_args(argv)
    try:
        if args.cmd == "approx":
            cmd_approx(load_config(args.config), args.out)
            return 0
        if args.cmd == "prove":
            return cmd_prove(load_config(args.config), args.proof_input,
                             args.trace)
        if args.cmd == "sweep":
            return cmd_sweep(args.manifest)
        if args.cmd == "export-plot":
            return cmd_export_plot(args.trace, args.out_dir)
        if args.cmd == "logistic-demo":
            return cmd_logistic_demo(load_config(args.config))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())

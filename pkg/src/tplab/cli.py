"""Experiment runner: load a model and fields from a JSON config, execute the
selected check suites, and write CSV/JSON reports.

Exit codes are a stable interface for CI: 0 all checks passed (SKIPPED and
INCONCLUSIVE are counted but do not fail), 1 at least one FAIL verdict,
2 configuration problem, 3 enumeration capacity exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds, fixtures
from .energy import bivariate_symmetrized, energy_report
from .errors import CapacityError, ConfigError, LabError
from .models import (
    FiniteChain,
    FiniteField,
    GaussianChaos,
    GaussianSeries,
    chain_from_json,
    complete_refresh_chain,
    product_chain,
    two_state_chain,
)
from .montecarlo import SampleSpec, normal_stream
from .poincare import (
    check_scalar_poincare,
    check_trace_poincare,
    equivalence_probe,
    ou_certificate,
    poincare_constant,
)
from .reports import FAIL, INCONCLUSIVE, PASS, SKIPPED, rows_to_csv, rows_to_json
from .spectral import ScalarFnSpec

KNOWN_SUITES = ("poincare", "subadditivity", "chain-rule", "exp-moment",
                "tail", "poly-moment", "intdim", "chaos")

CHAIN_ONLY = {"poincare", "subadditivity", "chain-rule", "exp-moment", "intdim"}


def default_config() -> dict:
    """Built-in experiment: all chain suites on the two-state fixture."""
    return {
        "seed": 20240601,
        "samples": {"n": 20000, "workers": 1, "antithetic": False},
        "model": {"fixture": "two-state"},
        "fields": [
            {"type": "fixture", "name": "indicator-1"},
            {"type": "random", "dim": 2, "count": 3, "seed": 101},
        ],
        "suites": ["poincare", "subadditivity", "chain-rule", "exp-moment",
                   "tail", "poly-moment", "intdim"],
        "params": {
            "lambda_grid": [0.5 * k for k in range(1, 17)],
            "q_list": [1, 1.5, 2, 3],
            "intdim_q": [1, 2, 3],
            "probe": {"trials": 50, "dims": [1, 2, 3]},
            "phis": [
                {"kind": "sinh", "scale": 1.0},
                {"kind": "signed_pow", "exponent": 2.0},
                {"kind": "affine", "a": 2.0, "b": 1.0},
            ],
        },
        "output": {"dir": "tplab-out", "format": "both"},
    }


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return cfg


def build_model(desc) -> tuple[object, str]:
    if not isinstance(desc, dict):
        raise ConfigError("model: descriptor must be a JSON object")
    if "fixture" in desc:
        name = desc["fixture"]
        return fixtures.get_model(name), name
    if "graph" in desc or "generator" in desc:
        chain = chain_from_json(desc, name=desc.get("name", "chain"))
        return chain, chain.name
    if "two_state" in desc:
        rate = float(desc["two_state"].get("rate", 1.0))
        chain = two_state_chain(rate)
        return chain, chain.name
    if "complete_refresh" in desc:
        chain = complete_refresh_chain(desc["complete_refresh"]["stationary"])
        return chain, chain.name
    if "product" in desc:
        base, _ = build_model(desc["product"]["base"])
        if not isinstance(base, FiniteChain):
            raise ConfigError("model.product.base: must describe a finite chain")
        chain = product_chain(base, int(desc["product"]["n"]))
        return chain, chain.name
    if "gaussian_series" in desc:
        series = GaussianSeries(np.asarray(desc["gaussian_series"]["coefficients"], dtype=float))
        return series, desc.get("name", "gaussian-series")
    if "gaussian_chaos" in desc:
        chaos = GaussianChaos(np.asarray(desc["gaussian_chaos"]["coefficients"], dtype=float))
        return chaos, desc.get("name", "gaussian-chaos")
    raise ConfigError(f"model: unrecognized descriptor with keys {sorted(desc)}")


def _table_field(values) -> FiniteField:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        return FiniteField.from_scalars(arr)
    if arr.ndim == 3:
        return FiniteField(arr)
    raise ConfigError(f"fields: table values must be 1-d (scalars) or 3-d, got {arr.ndim}-d")


def build_fields(descs, chain: FiniteChain, master_seed: int) -> list[tuple[str, FiniteField]]:
    out = []
    for idx, desc in enumerate(descs):
        kind = desc.get("type")
        if kind == "table":
            f = _table_field(desc["values"])
            if f.n_states != chain.n_states:
                raise ConfigError(
                    f"fields[{idx}]: table has {f.n_states} states, chain has {chain.n_states}")
            out.append((desc.get("name", f"table-{idx}"), f))
        elif kind == "constant":
            value = desc.get("matrix", [[float(desc.get("value", 0.0))]])
            m = np.atleast_2d(np.asarray(value, dtype=float))
            vals = np.broadcast_to(m, (chain.n_states,) + m.shape).copy()
            out.append((desc.get("name", f"constant-{idx}"), FiniteField(vals)))
        elif kind == "random":
            dim = int(desc.get("dim", 2))
            count = int(desc.get("count", 1))
            sub = int(desc.get("seed", 0))
            for i in range(count):
                rng = normal_stream(master_seed ^ sub, i)
                raw = rng.standard_normal((chain.n_states, dim, dim))
                out.append((f"random-{idx}-{i}", FiniteField(0.5 * (raw + raw.transpose(0, 2, 1)))))
        elif kind == "fixture":
            out.append((desc["name"], fixtures.get_field(desc["name"], chain)))
        else:
            raise ConfigError(f"fields[{idx}]: unknown field type {kind!r}")
    return out


def _build_phi(desc: dict) -> ScalarFnSpec:
    kind = desc.get("kind")
    if kind == "sinh":
        return ScalarFnSpec.sinh(float(desc.get("scale", 1.0)))
    if kind == "signed_pow":
        return ScalarFnSpec.signed_pow(float(desc.get("exponent", 2.0)))
    if kind == "affine":
        return ScalarFnSpec.affine(float(desc.get("a", 1.0)), float(desc.get("b", 0.0)))
    raise ConfigError(f"params.phis: unsupported scalar function kind {kind!r} "
                      "(chain-rule admits sinh, signed_pow, affine)")


def _chain_rows(chain, name, fields, suites, params, sample_spec, seed):
    cert = poincare_constant(chain)
    rows = []

    def add(suite, report):
        rows.append(report.to_row(suite=suite, fixture=name))

    for suite in suites:
        if suite == "poincare":
            for fname, f in fields:
                if f.dim == 1:
                    r = check_scalar_poincare(chain, f.values[:, 0, 0], cert)
                    r.context["field"] = fname
                    add(suite, r)
                r = check_trace_poincare(chain, f, cert)
                r.context["field"] = fname
                add(suite, r)
            probe_cfg = params.get("probe", {"trials": 50, "dims": [1, 2, 3]})
            probe = equivalence_probe(chain, int(probe_cfg.get("trials", 50)),
                                      probe_cfg.get("dims", [1, 2, 3]), seed)
            add(suite, probe.to_check(chain.name))
        elif suite == "subadditivity":
            for fname, f in fields:
                pair = bivariate_symmetrized(chain, f)
                r = bounds.check_subadditivity(chain, pair)
                r.context["field"] = fname
                add(suite, r)
                r = bounds.check_bivariate_poincare(chain, pair, cert)
                r.context["field"] = fname
                add(suite, r)
        elif suite == "chain-rule":
            phis = [_build_phi(p) for p in params.get("phis", [{"kind": "sinh"}])]
            for fname, f in fields:
                for phi in phis:
                    r = bounds.check_chain_rule(chain, f, phi)
                    r.context["field"] = fname
                    add(suite, r)
                    if chain.n_states >= 2:
                        r = bounds.check_mean_value_trace(f.values[0], f.values[1], phi)
                        r.context["field"] = fname
                        add(suite, r)
        elif suite == "exp-moment":
            for fname, f in fields:
                grid = params.get("theta_grid")
                if grid is None:
                    rep = energy_report(chain, f)
                    grid = bounds.default_theta_grid(cert.alpha, rep.v_f)
                for r in bounds.check_exp_moment(chain, f, cert, grid):
                    r.context["field"] = fname
                    add(suite, r)
        elif suite == "tail":
            grid = params.get("lambda_grid", [0.5 * k for k in range(1, 17)])
            for fname, f in fields:
                for r in bounds.check_tail_empirical(chain, f, cert, grid):
                    r.context["field"] = fname
                    add(suite, r)
        elif suite == "poly-moment":
            q_list = params.get("q_list", [1, 1.5, 2, 3])
            for fname, f in fields:
                for r in bounds.check_poly_moment(chain, f, cert, q_list):
                    r.context["field"] = fname
                    add(suite, r)
        elif suite == "intdim":
            q_list = params.get("intdim_q", [1, 2, 3])
            for fname, f in fields:
                for q in q_list:
                    r = bounds.check_intdim_variant(chain, f, cert, int(q))
                    r.context["field"] = fname
                    add(suite, r)
        else:
            raise ConfigError(f"suites: '{suite}' requires a Gaussian model, "
                              f"but the config model is a finite chain")
    return rows


def _gaussian_rows(model, name, suites, params, sample_spec):
    cert = ou_certificate()
    rows = []

    def add(suite, report):
        rows.append(report.to_row(suite=suite, fixture=name))

    for suite in suites:
        if suite == "tail":
            grid = params.get("lambda_grid", [float(k) for k in range(1, 9)])
            override = params.get("v_f_bound")
            for r in bounds.check_tail_empirical(model, None, cert, grid,
                                                 spec=sample_spec,
                                                 v_f_override=override):
                add(suite, r)
        elif suite == "poly-moment":
            q_list = params.get("q_list", [1, 1.5, 2, 3])
            for r in bounds.check_poly_moment(model, None, cert, q_list,
                                              spec=sample_spec):
                add(suite, r)
        elif suite == "chaos":
            if not isinstance(model, GaussianChaos):
                raise ConfigError("suites: 'chaos' requires a gaussian_chaos model")
            q_list = params.get("q_list", [1, 2, 3])
            if model.dim == 1:
                for r in bounds.check_chaos_scalar(model, q_list, sample_spec):
                    add(suite, r)
            for r in bounds.check_chaos_matrix(model, q_list, sample_spec):
                add(suite, r)
        elif suite in CHAIN_ONLY:
            raise ConfigError(f"suites: '{suite}' requires a finite chain model")
        else:
            raise ConfigError(f"suites: unknown suite '{suite}'")
    return rows


def validate_config(cfg: dict):
    unknown = [s for s in cfg.get("suites", []) if s not in KNOWN_SUITES]
    if unknown:
        raise ConfigError(f"suites: unknown suite names {unknown} "
                          f"(known: {list(KNOWN_SUITES)})")
    if not cfg.get("suites"):
        raise ConfigError("suites: at least one suite is required")
    if "model" not in cfg:
        raise ConfigError("model: missing")
    samples = cfg.get("samples", {})
    if not isinstance(samples, dict):
        raise ConfigError("samples: must be an object with n/workers/antithetic")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or seed < 0 or seed > (1 << 64) - 1:
        raise ConfigError("seed: must be an unsigned 64-bit integer")


def run_experiment(cfg: dict) -> tuple[list[dict], list[dict], dict]:
    """Execute the configured suites; returns (rows, energy reports, counts)."""
    validate_config(cfg)
    seed = int(cfg.get("seed", 0))
    samples = cfg.get("samples", {})
    sample_spec = SampleSpec(
        n=int(samples.get("n", 20000)),
        seed=seed,
        workers=int(samples.get("workers", 1)),
        antithetic=bool(samples.get("antithetic", False)),
    )
    params = cfg.get("params", {})
    suites = cfg["suites"]
    model, name = build_model(cfg["model"])

    energy_dicts = []
    if isinstance(model, FiniteChain):
        fields = build_fields(cfg.get("fields", []), model, seed)
        if not fields:
            raise ConfigError("fields: a finite-chain experiment needs at least one field")
        rows = _chain_rows(model, name, fields, suites, params, sample_spec, seed)
        for fname, f in fields:
            rep = energy_report(model, f)
            energy_dicts.append({"fixture": name, "field": fname,
                                 "report": rep.to_json_dict()})
    else:
        rows = _gaussian_rows(model, name, suites, params, sample_spec)
        rep = energy_report(model, spec=sample_spec)
        energy_dicts.append({"fixture": name, "field": "model",
                             "report": rep.to_json_dict()})

    counts = {PASS: 0, FAIL: 0, SKIPPED: 0, INCONCLUSIVE: 0}
    for row in rows:
        counts[row["verdict"]] = counts.get(row["verdict"], 0) + 1
    return rows, energy_dicts, counts


def _write_outputs(rows, energy_dicts, out_dir: Path, fmt: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        path = out_dir / "report.csv"
        path.write_text(rows_to_csv(rows))
        written.append(path)
    if fmt in ("json", "both"):
        path = out_dir / "report.json"
        path.write_text(rows_to_json(rows, energy_dicts))
        written.append(path)
    return written


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.samples is not None:
            cfg.setdefault("samples", {})["n"] = args.samples
        if args.suite:
            cfg["suites"] = args.suite
        out_cfg = cfg.get("output", {})
        out_dir = Path(args.out) if args.out else Path(out_cfg.get("dir", "tplab-out"))
        fmt = args.format or out_cfg.get("format", "both")
        if fmt not in ("csv", "json", "both"):
            raise ConfigError(f"output.format: expected csv|json|both, got {fmt!r}")
        rows, energy_dicts, counts = run_experiment(cfg)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except LabError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    written = _write_outputs(rows, energy_dicts, out_dir, fmt)
    for path in written:
        print(f"wrote {path}")
    print(f"checks: {len(rows)}  PASS={counts[PASS]}  FAIL={counts[FAIL]}  "
          f"SKIPPED={counts[SKIPPED]}  INCONCLUSIVE={counts[INCONCLUSIVE]}")
    return 1 if counts[FAIL] else 0


def _cmd_fixtures(_args) -> int:
    rows = fixtures.catalog()
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        print(f"{r['name']:<{width}}  [{r['kind']}]  {r['description']}  "
              f"(citation: {r['citation']})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tplab",
        description="Run trace-Poincare / matrix-concentration check suites "
                    "and emit CSV/JSON reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the suites of a config")
    run_p.add_argument("--config", help="path to a JSON experiment config "
                                        "(built-in default when omitted)")
    run_p.add_argument("--seed", type=int, help="override the config seed (u64)")
    run_p.add_argument("--samples", type=int, help="override the Monte Carlo sample count")
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument("--suite", action="append",
                       help="run only this suite (repeatable)")
    run_p.add_argument("--format", choices=["csv", "json", "both"],
                       help="report format (default both)")
    run_p.set_defaults(func=_cmd_run)

    fx_p = sub.add_parser("fixtures", help="list built-in fixtures")
    fx_p.set_defaults(func=_cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = args.func(args)
    if argv is None:
        sys.exit(code)
    return code

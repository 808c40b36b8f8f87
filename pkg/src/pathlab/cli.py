"""Batch front-end: seeded, manifest-stamped runs of every pipeline stage.

Each subcommand reads CSV/JSON inputs, writes its artifacts into --out,
and stamps the directory with a single manifest.json recording the
command line, the config echo, input content digests, and wall time.
Exit code 0 on success, 2 on any validation problem (bad flags, missing
files, malformed inputs), with a one-line error on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import (
    __version__,
    bounds,
    bridge,
    flow,
    herding,
    suite as suite_mod,
    synthgen,
    tensor,
)
from .errors import PathlabError
from .flow import FlowConfig
from .paths import (
    expected_signature,
    marcus_signature,
    read_ensemble_csv,
    read_path_csv,
    write_ensemble_csv,
)
from .rng import stream

import os


class CliError(Exception):
    """Validation problem that should surface as exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


@dataclass
class RunManifest:
    """Provenance record emitted once per output directory."""

    command: str
    config: dict | None
    seed: int
    version: str
    inputs: dict
    wall_time_s: float
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "inputs": self.inputs,
            "wall_time_s": self.wall_time_s,
            "warnings": list(self.warnings),
        }


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: {exc}")


def _read_ensemble(path: str):
    try:
        with open(path) as fh:
            return read_ensemble_csv(fh)
    except FileNotFoundError:
        raise CliError(f"input file not found: {path}")
    except (ValueError, IndexError, StopIteration):
        raise CliError(f"malformed path CSV: {path}")


def _write_json(obj, out_path: str) -> None:
    with open(out_path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _finish(args, out_dir: str, config_echo, inputs: dict, t0: float, warnings):
    manifest = RunManifest(
        command=" ".join(args._argv),
        config=config_echo,
        seed=getattr(args, "seed", 0),
        version=__version__,
        inputs={p: _digest(p) for p in inputs},
        wall_time_s=time.perf_counter() - t0,
        warnings=list(warnings),
    )
    _write_json(manifest.to_dict(), os.path.join(out_dir, "manifest.json"))


def _ensure_out(args) -> str:
    out = args.out
    os.makedirs(out, exist_ok=True)
    return out


def _gen_params(cfg: dict):
    kind = cfg.get("kind")
    raw = dict(cfg.get("params", {}))
    try:
        if kind == "merton":
            return kind, synthgen.MertonParams(**raw)
        if kind == "regime_switch":
            raw["before"] = synthgen.MertonParams(**raw["before"])
            raw["after"] = synthgen.MertonParams(**raw["after"])
            return kind, synthgen.RegimeSwitchParams(**raw)
    except (TypeError, KeyError) as exc:
        raise CliError(f"bad generator params: {exc}")
    raise CliError(f"unknown generator kind: {kind!r}")


def _plots_on(args) -> bool:
    return not getattr(args, "no_plots", False)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    cfg = _load_json(args.config)
    kind, params = _gen_params(cfg)
    out = _ensure_out(args)
    warnings: list = []
    try:
        if kind == "merton":
            ensemble = synthgen.gen_merton(
                params, n=args.n, steps=args.steps, horizon=args.horizon,
                seed=args.seed, t_start=cfg.get("t_start", 0.0), warnings=warnings,
            )
        else:
            ensemble = synthgen.gen_regime_switch(
                params, n=args.n, steps=args.steps, horizon=args.horizon,
                seed=args.seed, t_start=cfg.get("t_start", 0.0), warnings=warnings,
            )
    except PathlabError as exc:
        raise CliError(str(exc))
    csv_path = os.path.join(out, "ensemble.csv")
    with open(csv_path, "w") as fh:
        write_ensemble_csv(ensemble, fh)
    if _plots_on(args):
        from .plotting import save_ensemble_plot

        save_ensemble_plot(ensemble, os.path.join(out, "ensemble.png"))
    _finish(args, out, cfg, [args.config], t0, warnings)
    return 0


def cmd_sig(args) -> int:
    t0 = time.perf_counter()
    try:
        with open(args.infile) as fh:
            path = read_path_csv(fh)
    except FileNotFoundError:
        raise CliError(f"input file not found: {args.infile}")
    except PathlabError as exc:
        raise CliError(str(exc))
    except (ValueError, IndexError, StopIteration):
        raise CliError(f"malformed path CSV: {args.infile}")
    sig = marcus_signature(path, args.depth)
    payload = tensor.series_to_dict(sig)
    if args.out is None:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0
    out = _ensure_out(args)
    _write_json(payload, os.path.join(out, "sig.json"))
    _finish(args, out, None, [args.infile], t0, [])
    return 0


def cmd_proxy(args) -> int:
    t0 = time.perf_counter()
    ensemble = _read_ensemble(args.infile)
    t_start = ensemble.paths[0].times[0]
    grid = t_start + np.linspace(0.0, args.horizon, args.steps + 1)
    try:
        proxy = synthgen.build_proxy(ensemble, t_start, grid, args.depth)
    except PathlabError as exc:
        raise CliError(str(exc))
    out = _ensure_out(args)
    payload = [tensor.series_to_dict(p) for p in proxy.proxies]
    _write_json(payload, os.path.join(out, "proxy.json"))
    _finish(args, out, None, [args.infile], t0, [])
    return 0


def cmd_herd(args) -> int:
    t0 = time.perf_counter()
    ensemble = _read_ensemble(args.infile)
    cfg = _load_json(args.config) if args.config else {}
    sigs = [marcus_signature(p, args.depth) for p in ensemble]
    try:
        geom = flow.flow_geometry(sigs, m=args.m, ridge=args.ridge)
    except PathlabError as exc:
        raise CliError(str(exc))
    if "target" in cfg:
        target = tensor.series_from_dict(cfg["target"])
    else:
        target = expected_signature(ensemble, args.depth)
    try:
        result = herding.herd(target, sigs, args.n, geom)
    except PathlabError as exc:
        raise CliError(str(exc))
    out = _ensure_out(args)
    payload = {
        "selected": [int(i) for i in result.selected],
        "error_trace": [float(e) for e in result.error_trace],
        "slope": float(herding.herding_rate_report(result).slope),
    }
    _write_json(payload, os.path.join(out, "herd.json"))
    if _plots_on(args):
        from .plotting import save_herding_plot

        save_herding_plot(
            payload["error_trace"], os.path.join(out, "herding.png"),
            r_max=result.r_max,
        )
    inputs = [args.infile] + ([args.config] if args.config else [])
    _finish(args, out, cfg or None, inputs, t0, [])
    return 0


def cmd_bridge(args) -> int:
    t0 = time.perf_counter()
    ensemble = _read_ensemble(args.infile)
    cfg = _load_json(args.config)
    series_dict = cfg.get("target", cfg)
    try:
        target_series = tensor.series_from_dict(series_dict)
    except (KeyError, TypeError, PathlabError) as exc:
        raise CliError(f"bad target tensor series: {exc}")
    sigs = [marcus_signature(p, target_series.depth) for p in ensemble]
    try:
        geom = flow.flow_geometry(sigs, m=args.m, ridge=args.ridge)
        tilt = bridge.solve_bridge(
            ensemble,
            geom.feature(target_series),
            geom,
            tol=float(cfg.get("tol", 1e-6)),
            max_iter=int(cfg.get("max_iter", 500)),
        )
    except PathlabError as exc:
        raise CliError(str(exc))
    out = _ensure_out(args)
    payload = {
        "alpha": [float(a) for a in tilt.alpha],
        "weights": [float(w) for w in tilt.weights],
        "log_partition": float(tilt.log_partition),
        "kl_to_prior": float(tilt.kl_to_prior),
        "converged": bool(tilt.converged),
        "residual": float(tilt.residual),
        "iterations": int(tilt.iterations),
    }
    _write_json(payload, os.path.join(out, "bridge.json"))
    _finish(args, out, cfg, [args.infile, args.config], t0, [])
    return 0


def cmd_flow(args) -> int:
    t0 = time.perf_counter()
    cfg = _load_json(args.config)
    try:
        flow_cfg = FlowConfig.from_dict(dict(cfg["flow"]))
    except KeyError:
        raise CliError('flow config must carry a "flow" section')
    except PathlabError as exc:
        raise CliError(str(exc))
    if args.seed is not None:
        flow_cfg = FlowConfig.from_dict({**flow_cfg.to_dict(), "seed": args.seed})
    if args.mode is not None:
        flow_cfg = FlowConfig.from_dict({**flow_cfg.to_dict(), "mode": args.mode})
    args.seed = flow_cfg.seed
    depth = int(cfg.get("depth", 3))

    reference = _read_ensemble(args.infile)
    init_cfg = cfg.get("initial")
    if init_cfg is None:
        raise CliError('flow config must carry an "initial" section')
    try:
        initial = synthgen.actor_path(
            init_cfg["velocity"],
            t_start=init_cfg["t_start"],
            horizon=init_cfg["horizon"],
            steps=int(init_cfg.get("steps", 1)),
        )
    except (KeyError, TypeError) as exc:
        raise CliError(f"bad initial section: {exc}")

    sigs = [marcus_signature(p, depth) for p in reference]
    try:
        geom = flow.flow_geometry(
            sigs, m=int(cfg.get("m", args.m)), ridge=float(cfg.get("ridge", args.ridge))
        )
        t_win = initial.t_end
        n_steps = int(round(flow_cfg.horizon / flow_cfg.step))
        grid = t_win + np.linspace(0.0, flow_cfg.horizon, n_steps + 1)
        proxy = synthgen.build_proxy(reference, t_win, grid, depth)
        ensemble, state = flow.run_flow(flow_cfg, initial, proxy, geom)
    except PathlabError as exc:
        raise CliError(str(exc))

    out = _ensure_out(args)
    with open(os.path.join(out, "ensemble.csv"), "w") as fh:
        write_ensemble_csv(ensemble, fh)
    with open(os.path.join(out, "loss.csv"), "w") as fh:
        fh.write("s,J,cont,jump,resid\n")
        clock = t_win
        for loss, (cont, jump, resid) in zip(
            state.loss_trace, state.dissipation_trace
        ):
            clock += flow_cfg.step
            fh.write(
                f"{clock!r},{loss!r},{cont!r},{jump!r},{resid!r}\n"
            )
    if _plots_on(args):
        from .plotting import save_ensemble_plot, save_loss_plot

        save_ensemble_plot(ensemble, os.path.join(out, "ensemble.png"))
        times = t_win + flow_cfg.step * np.arange(1, len(state.loss_trace) + 1)
        save_loss_plot(
            times,
            state.loss_trace,
            state.dissipation_trace,
            os.path.join(out, "loss.png"),
        )
    _finish(args, out, cfg, [args.config, args.infile], t0, state.geometry.state.warnings)
    return 0


def cmd_bounds(args) -> int:
    t0 = time.perf_counter()
    cfg = _load_json(args.config) if args.config else {}
    out = _ensure_out(args)
    inputs = [p for p in (args.infile, args.config) if p]

    if args.submode == "gen":
        kind, params = _gen_params(cfg)
        if kind != "merton":
            raise CliError("bounds gen expects a merton sampler config")
        steps = int(cfg.get("steps", 20))
        horizon = float(cfg.get("horizon", 1.0))

        def sampler(count, s):
            return synthgen.gen_merton(
                params, n=count, steps=steps, horizon=horizon, seed=s
            )

        anchors = sampler(int(cfg.get("anchor_n", 40)), args.seed + 3)
        sigs = [marcus_signature(p, args.depth) for p in anchors]
        try:
            geom = flow.flow_geometry(sigs, m=args.m, ridge=args.ridge)
            report = bounds.generalization_trial(
                sampler,
                n=args.n,
                delta=float(cfg.get("delta", 0.05)),
                geometry=geom,
                oracle_size=int(cfg.get("oracle_size", 100 * args.n)),
                trials=int(cfg.get("trials", 50)),
                seed=args.seed,
            )
        except PathlabError as exc:
            raise CliError(str(exc))
        payload = {
            "mode": "gen",
            "lhs": float(report.lhs),
            "rhs": float(report.rhs),
            "satisfied": bool(report.satisfied),
            "trials": int(report.trials),
            "satisfaction_rate": float(report.satisfaction_rate),
        }
        _write_json(payload, os.path.join(out, "bounds.json"))
        _finish(args, out, cfg or None, inputs, t0, [])
        return 0

    if args.infile is None:
        raise CliError(f"bounds {args.submode} requires --in")
    ensemble = _read_ensemble(args.infile)
    sigs = [marcus_signature(p, args.depth) for p in ensemble]
    try:
        geom = flow.flow_geometry(sigs, m=args.m, ridge=args.ridge)
    except PathlabError as exc:
        raise CliError(str(exc))

    if args.submode == "rad":
        _, big_m = bounds.support_radius(ensemble, geom)
        closed = bounds.rademacher_bound(ensemble, big_m, geom)
        mc = bounds.rademacher_mc(
            ensemble, big_m, geom, draws=int(cfg.get("draws", 256)), seed=args.seed
        )
        payload = {
            "mode": "rad",
            "mc_estimate": float(mc),
            "closed_form": float(closed),
            "norm_cap": float(big_m),
            "ordered": bool(mc <= closed),
        }
        _write_json(payload, os.path.join(out, "bounds.json"))
        _finish(args, out, cfg or None, inputs, t0, [])
        return 0

    # proj
    proxy = expected_signature(ensemble, args.depth)
    full_dim = tensor.flat_dim(args.depth, ensemble.d + 1)
    m_values = cfg.get("m_values", list(range(1, full_dim + 1)))
    try:
        probe = bounds.projection_error_probe(ensemble, proxy, geom, m_values)
    except PathlabError as exc:
        raise CliError(str(exc))
    payload = {
        "mode": "proj",
        "rows": [
            {"m": int(mp), "eps": float(e), "tail": float(tl)}
            for mp, e, tl in probe.rows
        ],
        "c_fit": float(probe.c_fit),
    }
    _write_json(payload, os.path.join(out, "bounds.json"))
    if _plots_on(args):
        from .plotting import save_probe_plot

        save_probe_plot(probe.rows, os.path.join(out, "probe.png"))
    _finish(args, out, cfg or None, inputs, t0, [])
    return 0


def cmd_suite(args) -> int:
    t0 = time.perf_counter()
    report, timing = suite_mod.run_suite(args.seed)
    out = _ensure_out(args)
    _write_json(report, os.path.join(out, "suite_report.json"))
    _write_json(timing, os.path.join(out, "timing.json"))
    if _plots_on(args):
        from .plotting import save_suite_plot

        save_suite_plot(report["checks"], os.path.join(out, "suite.png"))
    _finish(args, out, None, [], t0, [])
    for check in report["checks"]:
        print(f"{check['name']:16s} {'PASS' if check['passed'] else 'FAIL'}")
    print("all passed" if report["all_passed"] else "FAILURES PRESENT")
    return 0 if report["all_passed"] else 1


# ---------------------------------------------------------------------------
# parser wiring


def _add_common(sub, *, infile=False, config=False, out_default="."):
    if infile:
        sub.add_argument("--in", dest="infile", required=infile == "required")
    if config:
        sub.add_argument("--config", required=config == "required")
    sub.add_argument("--out", default=out_default)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--no-plots", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="pathlab", add_help=True)
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen")
    _add_common(gen, config="required")
    gen.add_argument("--n", type=int, default=32)
    gen.add_argument("--steps", type=int, default=50)
    gen.add_argument("--horizon", type=float, default=1.0)
    gen.set_defaults(fn=cmd_gen)

    sig = subs.add_parser("sig")
    sig.add_argument("--in", dest="infile", required=True)
    sig.add_argument("--depth", type=int, default=2)
    sig.add_argument("--out", default=None)
    sig.add_argument("--seed", type=int, default=0)
    sig.set_defaults(fn=cmd_sig)

    proxy = subs.add_parser("proxy")
    _add_common(proxy, infile="required")
    proxy.add_argument("--depth", type=int, default=3)
    proxy.add_argument("--steps", type=int, default=50)
    proxy.add_argument("--horizon", type=float, default=1.0)
    proxy.set_defaults(fn=cmd_proxy)

    herd = subs.add_parser("herd")
    _add_common(herd, infile="required", config=True)
    herd.add_argument("--depth", type=int, default=3)
    herd.add_argument("--n", type=int, default=50)
    herd.add_argument("--m", type=int, default=16)
    herd.add_argument("--ridge", type=float, default=0.05)
    herd.set_defaults(fn=cmd_herd)

    br = subs.add_parser("bridge")
    _add_common(br, infile="required", config="required")
    br.add_argument("--m", type=int, default=16)
    br.add_argument("--ridge", type=float, default=0.05)
    br.set_defaults(fn=cmd_bridge)

    fl = subs.add_parser("flow")
    _add_common(fl, infile="required", config="required")
    fl.add_argument("--mode", choices=["forecast", "reconstruction"], default=None)
    fl.add_argument("--m", type=int, default=32)
    fl.add_argument("--ridge", type=float, default=0.05)
    fl.set_defaults(fn=cmd_flow)
    fl.set_defaults(seed=None)

    bd = subs.add_parser("bounds")
    bd.add_argument("submode", choices=["gen", "rad", "proj"])
    _add_common(bd, infile=True, config=True)
    bd.add_argument("--depth", type=int, default=3)
    bd.add_argument("--n", type=int, default=64)
    bd.add_argument("--m", type=int, default=16)
    bd.add_argument("--ridge", type=float, default=0.05)
    bd.set_defaults(fn=cmd_bounds)

    su = subs.add_parser("suite")
    _add_common(su)
    su.set_defaults(fn=cmd_suite)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args._argv = ["pathlab"] + argv
        return args.fn(args)
    except (CliError, PathlabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

Subcommands
-----------
analyze    steady currents and top-k cycle fluxes at a single point
sweep      one-parameter sweep to wide-format CSV
rank       ranked cycle-flux table to CSV
simulate   trajectory sampling and cycle-completion counts to CSV
threshold  switch-threshold table over a grid of gate splittings

Each subcommand reads a JSON config (``--config``); see the README for
the schema.  ``--output`` writes CSV to a file, default stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cycles import enumerate_cycles
from .flux import all_cycle_records, rank_cycles
from .gillespie import count_cycle_completions, empirical_cycle_flux, simulate
from .network import COLLAPSED, MULTIGRAPH, build_network
from .steady import reservoir_currents, solve_steady_state
from .sweep import (
    SweepSpec,
    build_model,
    currents_csv,
    make_params,
    ranked_csv,
    run_sweep,
    switch_threshold,
)


def _load_config(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _network_from_config(cfg: dict, mode: str | None):
    if "network_file" in cfg:
        net = build_network(json.loads(Path(cfg["network_file"]).read_text()))
    elif "network" in cfg:
        net = build_network(cfg["network"])
    elif "model" in cfg:
        params = make_params(cfg["model"], cfg.get("params"))
        net = build_model(cfg["model"], params)
    else:
        raise SystemExit("config needs one of: model, network, network_file")
    if mode:
        from dataclasses import replace

        net = replace(net, mode=mode)
    return net


def _emit(text: str, output: str | None) -> None:
    if output and output != "-":
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_analyze(args) -> None:
    cfg = _load_config(args.config)
    net = _network_from_config(cfg, args.mode)
    p = solve_steady_state(net)
    rep = reservoir_currents(net, p)
    names = {r.id: r.name for r in net.reservoirs}
    print(f"# {net.n_states} states, {len(net.channels)} channels, mode={net.mode}")
    print("# currents (positive = from bath into system):")
    for rid in sorted(names):
        print(
            f"#   {names[rid]:>4}: heat={rep.heat[rid]:+.6e}  energy={rep.energy[rid]:+.6e}"
            f"  particle={rep.particle[rid]:+.6e}  spin={rep.spin[rid]:+.6e}"
        )
    top = rank_cycles(net, args.top_k)
    print(f"# top-{args.top_k} cycles by traffic:")
    for i, rec in enumerate(top, start=1):
        print(
            f"#   {i}. jf={rec.j_forward:.4e} jb={rec.j_backward:.4e} "
            f"jnet={rec.j_net:+.4e}  {rec.cycle.format(net.labels)}"
        )
    _emit(currents_csv([("", rep)]), args.output)


def _cmd_rank(args) -> None:
    cfg = _load_config(args.config)
    net = _network_from_config(cfg, args.mode)
    ranked = rank_cycles(net, args.top_k if args.top_k > 0 else None)
    names = {r.id: r.name for r in net.reservoirs}
    _emit(ranked_csv(ranked, net.labels, names), args.output)


def _cmd_sweep(args) -> None:
    cfg = _load_config(args.config)
    sw = cfg.get("sweep")
    if not sw:
        raise SystemExit("config lacks a 'sweep' section")
    spec = SweepSpec(
        model=cfg["model"],
        parameter=sw["parameter"],
        start=float(sw["start"]),
        stop=float(sw["stop"]),
        count=int(sw["count"]),
        params=make_params(cfg["model"], cfg.get("params")),
        top_k=args.top_k,
        mode=args.mode or COLLAPSED,
    )
    _emit(run_sweep(spec).to_csv(), args.output)


def _cmd_simulate(args) -> None:
    cfg = _load_config(args.config)
    net = _network_from_config(cfg, args.mode)
    traj = simulate(net, args.total_time, args.seed)
    report = count_cycle_completions(traj, mode=net.mode)
    rows = ["cycle_string,orientation,count,empirical_flux,stderr"]
    for key, est in sorted(empirical_cycle_flux(report).items()):
        from .cycles import CanonicalCycle

        cyc = CanonicalCycle(key[0], key[1] or None)
        s = cyc.format(net.labels)
        rows.append(f"{s},forward,{est.forward_count},{est.j_forward!r},{est.stderr()!r}")
        rows.append(
            f"{s},backward,{est.backward_count},{est.j_backward!r},{est.stderr(True)!r}"
        )
    print(f"# seed={args.seed} total_time={traj.total_time!r} jumps={traj.n_jumps}")
    _emit("\n".join(rows) + "\n", args.output)


def _cmd_threshold(args) -> None:
    cfg = _load_config(args.config)
    if cfg.get("model", "transistor") != "transistor":
        raise SystemExit("threshold analysis applies to the transistor model")
    params = make_params("transistor", cfg.get("params"))
    th = cfg.get("threshold", {})
    w_values = th.get("w_M", [0.5, 1.0, 1.5, 2.0, 2.5])
    rows = switch_threshold(
        params,
        w_values,
        t_start=float(th.get("t_start", 0.005)),
        t_stop=th.get("t_stop"),
        count=int(th.get("count", 240)),
    )
    out = ["w_M,threshold,plateau"]
    out += [f"{r.w_m!r},{r.threshold!r},{r.plateau!r}" for r in rows]
    _emit("\n".join(out) + "\n", args.output)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cycleflux",
        description="Cycle-flux network analysis of dissipative thermal devices",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--output", default=None, help="CSV output path (default stdout)")
        sp.add_argument(
            "--mode", choices=[COLLAPSED, MULTIGRAPH], default=None,
            help="override the network's graph mode",
        )

    sp = sub.add_parser("analyze", help="currents and top cycles at one point")
    common(sp)
    sp.add_argument("--top-k", type=int, default=5)
    sp.set_defaults(func=_cmd_analyze)

    sp = sub.add_parser("sweep", help="parameter sweep to CSV")
    common(sp)
    sp.add_argument("--top-k", type=int, default=5)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("rank", help="ranked cycle-flux table")
    common(sp)
    sp.add_argument("--top-k", type=int, default=0, help="0 = all cycles")
    sp.set_defaults(func=_cmd_rank)

    sp = sub.add_parser("simulate", help="stochastic trajectory cycle counts")
    common(sp)
    sp.add_argument("--total-time", type=float, default=1e5)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("threshold", help="switch-threshold table")
    common(sp)
    sp.set_defaults(func=_cmd_threshold)

    args = parser.parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

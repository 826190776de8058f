"""Command line entry points.

Subcommands: lk (pairwise degree), mu123 (triple invariant with optional
diagnostics), ergodic (orbit-sampled estimate against the flux formula).
Errors map to exit codes by family: geometry 2, numerics 3, input/output 4.
"""

import argparse
import json
import os
import sys

from .catalog import catalog
from .config import load_config
from .curves import read_link_json
from .errors import InputOutputError, Mu3Error
from .estimator import (
    asymptotic_mu123,
    energy_l2,
    h123_flux_formula,
    pairwise_helicity_check,
)
from .invariants import linking_number, mu123 as mu123_invariant, subtorus_degrees
from .maps import conf_map3, sample_on_grid
from .preimage import extract_preimage
from .records import RunRecord, StageTimer, append_record


def _apply_threads():
    val = os.environ.get("MU3_THREADS")
    if not val:
        return
    try:
        n = max(1, int(val))
    except ValueError:
        return
    try:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except Exception:
        pass


def _pair(text):
    try:
        i, j = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("pair must look like 1,2") from exc
    return i, j


def _fluxes(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("fluxes must look like 2,3,5") from exc


def _check_grid(n):
    if n < 8 or n % 2:
        raise InputOutputError("grid size must be even and >= 8, got %d" % n)
    return n


def _load_link(args):
    if args.curves:
        return read_link_json(args.curves)
    entry = catalog(args.catalog, twist=getattr(args, "twist", None))
    return list(entry.components), entry.name


def _emit(args, payload, record=None):
    if args.json:
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    if record is not None and args.log:
        append_record(args.log, record)


def cmd_lk(args):
    _check_grid(args.n)
    comps, name = _load_link(args)
    i, j = args.pair
    if i == j or not (1 <= i <= len(comps)) or not (1 <= j <= len(comps)):
        raise InputOutputError(
            "pair %d,%d out of range for %d components" % (i, j, len(comps))
        )
    record = RunRecord.start(
        " ".join(sys.argv[1:]),
        {"command": "lk", "link": name, "pair": [i, j], "n": args.n},
        grid_n=args.n,
    )
    with StageTimer(record).stage("lk"):
        res = linking_number((comps[i - 1], comps[j - 1]), n=args.n)
    record.add_result("lk", res.raw, res.rounded, res.residual)
    if not args.json:
        print(
            "lk[%d,%d] %s = %d   (raw %.6f, residual %.2e)"
            % (i, j, name, res.rounded, res.raw, res.residual)
        )
    _emit(args, {"link": name, "pair": [i, j], "lk": res.to_dict()}, record)
    return 0


def cmd_mu123(args):
    _check_grid(args.n)
    comps, name = _load_link(args)
    if len(comps) != 3:
        raise InputOutputError(
            "the triple invariant needs 3 components, got %d" % len(comps)
        )
    m = conf_map3(*comps)
    record = RunRecord.start(
        " ".join(sys.argv[1:]),
        {"command": "mu123", "link": name, "n": args.n},
        grid_n=args.n,
    )
    with StageTimer(record).stage("mu123"):
        res = mu123_invariant(m, n=args.n)
    record.add_result("mu123", res.raw, res.rounded, res.residual)
    payload = {"link": name, "n": args.n, "mu123": res.to_dict()}
    if not args.json:
        print(
            "mu123 %s = %d   (raw %.6f, residual %.2e)"
            % (name, res.rounded, res.raw, res.residual)
        )
    if args.diagnostics:
        with StageTimer(record).stage("subtorus"):
            degs = subtorus_degrees(m, n=256)
        with StageTimer(record).stage("preimage"):
            g = sample_on_grid(m, args.n)
            pre = extract_preimage(g)
        payload["subtorus_degrees"] = [d.to_dict() for d in degs]
        payload["preimage"] = pre.to_dict()
        for k, d in enumerate(degs):
            record.add_result("subtorus_%d" % (k + 1), d.raw, d.rounded, d.residual)
        if not args.json:
            print(
                "subtorus degrees: %s"
                % ", ".join("%d (raw %.4f)" % (d.rounded, d.raw) for d in degs)
            )
            print(
                "preimage: %d loops, classes %s, total %s"
                % (
                    len(pre.polylines),
                    [c.tolist() for c in pre.homology_class],
                    pre.total_class.tolist(),
                )
            )
    _emit(args, payload, record)
    return 0


def _export_orbit_csv(path, system, cfg):
    """One closed orbit per tube to CSV, components separated by NaN rows."""
    import numpy as np

    from .orbits import orbit_triple

    rng = np.random.default_rng(cfg.seed)
    starts = [tube.sample_uniform(rng, 1)[0] for tube in system.tubes]
    trip_curves = orbit_triple(system, starts, cfg.T, dt=cfg.dt).curves
    with open(path, "w") as fh:
        fh.write("x,y,z\n")
        for k, nodes in enumerate(trip_curves):
            if k:
                fh.write("nan,nan,nan\n")
            for p in nodes:
                fh.write("%.9g,%.9g,%.9g\n" % (p[0], p[1], p[2]))


def cmd_ergodic(args):
    overrides = {
        "samples": args.samples,
        "T": args.T,
        "seed": args.seed,
        "radius": args.radius,
        "grid_n": args.grid_n,
        "tubes": args.tubes,
        "fluxes": args.fluxes,
        "dt": args.dt,
    }
    cfg = load_config(args.config, overrides)
    system, field = cfg.build()
    record = RunRecord.start(
        " ".join(sys.argv[1:]), cfg.to_dict(), grid_n=cfg.grid_n, seed=cfg.seed
    )
    payload = {
        "config": cfg.to_dict(),
        "divergence_residual": field.divergence_residual,
    }

    est = None
    pred = None
    if len(system.tubes) == 3:
        with StageTimer(record).stage("estimate"):
            est = asymptotic_mu123(
                field,
                samples=cfg.samples,
                T=cfg.T,
                seed=cfg.seed,
                dt=cfg.dt,
                grid_n=cfg.grid_n,
            )
        pred = h123_flux_formula(field)
        record.add_result("estimate", est.estimate, residual=est.stderr)
        record.add_result("prediction", pred)
        payload["estimate"] = est.to_dict()
        payload["prediction"] = pred
        if not args.json:
            print("estimate   = %.6f +- %.6f   (used %d/%d samples)"
                  % (est.estimate, est.stderr, est.used, est.total))
            print("prediction = %.6f" % pred)
            if pred != 0.0:
                print("agreement  = %.4f" % (est.estimate / pred))
            else:
                print("agreement  = n/a (zero prediction)")
        payload["agreement"] = est.estimate / pred if pred else None

    with StageTimer(record).stage("pairwise"):
        pairs = pairwise_helicity_check(
            field, samples=cfg.samples, T=cfg.T, seed=cfg.seed, dt=cfg.dt
        )
    payload["pairwise"] = pairs
    for p in pairs:
        record.add_result(
            "pairwise_%d_%d" % p["pair"], p["estimate"], p["prediction"],
            p["stderr"],
        )
        if not args.json:
            print(
                "pairwise %s: %.6f +- %.6f   (predicted %.6f)"
                % (p["pair"], p["estimate"], p["stderr"], p["prediction"])
            )

    with StageTimer(record).stage("energy"):
        en = energy_l2(field)
    record.add_result("energy", en.value, residual=en.quad_error)
    payload["energy"] = {
        "value": en.value,
        "quad_error": en.quad_error,
        "mc_value": en.mc_value,
        "mc_stderr": en.mc_stderr,
    }
    ratio = None
    if pred is not None and en.value > 0.0:
        ratio = abs(pred) / en.value ** 1.5
        record.add_result("helicity_energy_ratio", ratio, rounded=0)
    payload["helicity_energy_ratio"] = ratio
    if not args.json:
        print(
            "energy     = %.6f   (quad err %.2e, mc %.6f +- %.6f)"
            % (en.value, en.quad_error, en.mc_value, en.mc_stderr)
        )
        if ratio is not None:
            print("ratio      = %.6f   (|prediction| / energy^1.5)" % ratio)

    if args.orbit_csv:
        with StageTimer(record).stage("orbit_csv"):
            _export_orbit_csv(args.orbit_csv, system, cfg)
        record.artifacts.append(args.orbit_csv)
        if not args.json:
            print("orbit curves written to %s" % args.orbit_csv)

    _emit(args, payload, record)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mu3",
        description="Grid and orbit pipelines for third-order link invariants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine output")
        p.add_argument("--log", help="append a run record to this JSON-lines file")

    p_lk = sub.add_parser("lk", help="pairwise linking degree")
    src = p_lk.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", help="catalog link name")
    src.add_argument("--curves", help="link JSON document")
    p_lk.add_argument("--pair", type=_pair, default=(1, 2), help="components, e.g. 2,3")
    p_lk.add_argument("--n", type=int, default=256)
    common(p_lk)
    p_lk.set_defaults(func=cmd_lk)

    p_mu = sub.add_parser("mu123", help="triple linking invariant")
    src = p_mu.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", help="catalog link name")
    src.add_argument("--curves", help="link JSON document")
    p_mu.add_argument("--n", type=int, default=48)
    p_mu.add_argument("--twist", type=int, help="cover count for borromean_n")
    p_mu.add_argument(
        "--diagnostics",
        action="store_true",
        help="also report subtorus degrees and preimage classes",
    )
    common(p_mu)
    p_mu.set_defaults(func=cmd_mu123)

    p_er = sub.add_parser("ergodic", help="orbit-sampled invariant estimate")
    p_er.add_argument("--config", help="JSON config file")
    p_er.add_argument("--tubes", choices=("borromean", "hopf"))
    p_er.add_argument("--fluxes", type=_fluxes)
    p_er.add_argument("--radius", type=float)
    p_er.add_argument("--samples", type=int)
    p_er.add_argument("--T", type=float)
    p_er.add_argument("--dt", type=float)
    p_er.add_argument("--seed", type=int)
    p_er.add_argument("--grid-n", dest="grid_n", type=int)
    p_er.add_argument("--orbit-csv", help="export one closed orbit per tube")
    common(p_er)
    p_er.set_defaults(func=cmd_ergodic)
    return parser


def main(argv=None):
    _apply_threads()
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Mu3Error as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

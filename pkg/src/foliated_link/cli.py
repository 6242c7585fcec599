"""Command-line entry point: ``foliated-link <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AlphaGrid,
    AlphaRow,
    grid_from_points,
    optimize_repeaters,
)
from .codes import (
    CodeValidationError,
    builtin_or_file,
    generalized_bicycle,
    row_reduced,
    save_code,
    steane,
    toric,
)
from .decoding import DECODERS, EXACT, ErasurePattern, decode
from .foliation import FoliationError, chain_from_dict, chain_to_dict, foliate, subgraph_consistency_check
from .gf2 import Gf2Poly, rank
from .io import (
    ALPHA_COLUMNS,
    GRID_COLUMNS,
    OPT_COLUMNS,
    atomic_write_text,
    config_hash,
    read_csv,
    write_csv,
)
from .montecarlo import ALPHA0_DB_PER_KM, LossModel, estimate_etr, spacing_for_transmission
from .plotting import Panel, Series, render_svg

PROFILES = {"quick": 10_000, "medium": 500_000, "full": 2_000_000}


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """``"3"``, ``"1,2,5"`` or an inclusive range ``"2:30"`` / ``"2:30:2"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) not in (2, 3):
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            step = bits[2] if len(bits) == 3 else 1
            out.extend(range(bits[0], bits[1] + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_exponents(text: str) -> Gf2Poly:
    try:
        return Gf2Poly.from_exponents(int(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def probability(text: str) -> float:
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1]")
    return v


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


def seed_value(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _trials(args) -> int:
    if args.trials is not None:
        return args.trials
    return PROFILES[args.profile]


# commands -----------------------------------------------------------------


def cmd_code(args) -> int:
    if args.family == "steane":
        code = steane()
    elif args.family == "toric":
        code = toric(args.d)
    elif args.family == "gb":
        if args.ell is None or args.a is None or args.b is None:
            raise UsageError("gb needs --ell, --a and --b")
        code = generalized_bicycle(args.ell, args.a, args.b, name=args.name, claimed_distance=args.claimed_distance)
    else:
        code = builtin_or_file(args.family)
    if args.row_reduce:
        code = row_reduced(code)
    if args.out:
        save_code(code, args.out)
    report = {
        "name": code.name,
        "n": code.n,
        "k": code.k,
        "rank_h_x": rank(code.h_x),
        "rank_h_z": rank(code.h_z),
        "rows_h_x": code.h_x.rows,
        "rows_h_z": code.h_z.rows,
        "claimed_distance": code.claimed_distance,
    }
    print(json.dumps(report))
    return 0


def cmd_foliate(args) -> int:
    chain = foliate(builtin_or_file(args.code), args.hops)
    report = subgraph_consistency_check(chain)
    if args.dump:
        atomic_write_text(args.dump, json.dumps(chain_to_dict(chain)) + "\n")
    print(json.dumps(report))
    return 0


def cmd_decode(args) -> int:
    chain = chain_from_dict(json.loads(Path(args.chain).read_text(encoding="utf-8")))
    erased = parse_int_list(args.erasure) if args.erasure.strip() else []
    local = {"primal": [], "dual": []}
    for g in erased:
        label, idx = chain.locate(g)
        local[label].append(idx)
    out = {}
    for sub in (chain.primal, chain.dual):
        pattern = ErasurePattern.from_indices(sub, local[sub.label])
        res = decode(sub, pattern, args.decoder)
        entry = {"recoverable": sorted(res.recoverable), "success": res.success}
        if res.witness is not None:
            # stabilizer rows whose product with the logical avoids the erasure
            entry["witness"] = {str(j): [int(r) for r in np.flatnonzero(w)] for j, w in sorted(res.witness.items())}
        out[sub.label] = entry
    out["success"] = out["primal"]["success"] and out["dual"]["success"]
    print(json.dumps(out))
    return 0


def cmd_simulate(args) -> int:
    code = builtin_or_file(args.code)
    model = LossModel(alpha0=args.alpha0, eta_r=args.eta_r, l0_km=args.l0_km)
    res = estimate_etr(foliate(code, args.hops), model, _trials(args), args.seed, args.decoder)
    _emit(json.dumps(res.to_dict(), indent=2) + "\n", args.out)
    return 0


def _row_key(row: dict) -> tuple:
    return (str(row["code"]), repr(float(row["eta_r"])), repr(float(row["l0_km"])), int(row["hops"]))


def _row_order(row: dict) -> tuple:
    return (str(row["code"]), float(row["eta_r"]), float(row["l0_km"]), int(row["hops"]))


def cmd_sweep(args) -> int:
    code = builtin_or_file(args.code)
    if (args.l0_km is None) == (args.loss is None):
        raise UsageError("give exactly one of --l0-km or --loss")
    if args.loss is not None:
        for x in args.loss:
            if not 0.0 <= x < 1.0:
                raise UsageError(f"loss {x} not in [0, 1)")
        spacings = [spacing_for_transmission(1.0 - x, args.alpha0) if x > 0 else 0.0 for x in args.loss]
    else:
        spacings = list(args.l0_km)
    trials = _trials(args)
    config = {
        "code": code.name, "hops": args.hops, "eta_r": args.eta_r, "l0_km": spacings,
        "trials": trials, "seed": args.seed, "decoder": args.decoder, "alpha0": args.alpha0,
    }
    meta = {"config": config_hash(config), "n": code.n, "k": code.k, "alpha0": args.alpha0, "decoder": args.decoder}

    rows: list[dict] = []
    done = set()
    if Path(args.out).exists():
        rows, _ = read_csv(args.out)
        done = {_row_key(r) for r in rows}
    chains = {}
    for eta_r in args.eta_r:
        for l0 in spacings:
            model = LossModel(alpha0=args.alpha0, eta_r=eta_r, l0_km=l0)
            for hops in args.hops:
                key = _row_key({"code": code.name, "eta_r": eta_r, "l0_km": l0, "hops": hops})
                if key in done:
                    continue
                if hops not in chains:
                    chains[hops] = foliate(code, hops)
                res = estimate_etr(chains[hops], model, trials, args.seed, args.decoder)
                rows.append({
                    "code": code.name, "eta_r": float(eta_r), "l0_km": float(l0), "hops": hops,
                    "trials": trials, "seed": args.seed, "p_primal": res.p_primal,
                    "p_dual": res.p_dual, "eta_eff": res.eta_eff, "stderr": res.stderr,
                })
                done.add(key)
                rows.sort(key=_row_order)
                write_csv(args.out, GRID_COLUMNS, rows, meta)
    rows.sort(key=_row_order)
    write_csv(args.out, GRID_COLUMNS, rows, meta)
    return 0


def cmd_fit(args) -> int:
    rows, meta = read_csv(args.inp)
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r["code"], r["eta_r"]), []).append((r["l0_km"], r["hops"], r["eta_eff"], r["stderr"]))
    out = []
    n_min = n_max = None
    for (code, eta_r), items in sorted(groups.items()):
        grid = grid_from_points(code, eta_r, items)
        n_min = grid.n_range[0] if n_min is None else min(n_min, grid.n_range[0])
        n_max = grid.n_range[1] if n_max is None else max(n_max, grid.n_range[1])
        for r in grid.rows:
            out.append({
                "code": code, "eta_r": eta_r, "l0_km": r.l0_km,
                "alpha_eff_db_per_km": r.alpha_eff, "log10_prefactor": r.log10_prefactor,
                "rms_residual": r.rms_residual,
            })
    new_meta = {k: meta[k] for k in ("n", "k", "alpha0") if k in meta}
    if n_min is not None:
        new_meta["n_min"] = n_min
        new_meta["n_max"] = n_max
    new_meta["source"] = meta.get("config", "")
    write_csv(args.out, ALPHA_COLUMNS, out, new_meta)
    return 0


def load_alpha_grid(path, eta_r: float | None = None, code=None) -> AlphaGrid:
    rows, meta = read_csv(path)
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r["code"], r["eta_r"]), []).append(r)
    if eta_r is not None:
        groups = {k: v for k, v in groups.items() if k[1] == eta_r}
    if len(groups) != 1:
        raise UsageError(f"{path}: expected one (code, eta_r) group, found {len(groups)}; use --eta-r")
    (name, er), group = next(iter(groups.items()))
    group.sort(key=lambda r: r["l0_km"])
    n = code.n if code is not None else int(meta.get("n", 1))
    k = code.k if code is not None else int(meta.get("k", 1))
    return AlphaGrid(
        code=name,
        eta_r=er,
        rows=tuple(
            AlphaRow(r["l0_km"], r["alpha_eff_db_per_km"], r["log10_prefactor"], r["rms_residual"])
            for r in group
        ),
        n_range=(int(meta.get("n_min", 2)), int(meta.get("n_max", 30))),
        n=n,
        k=k,
        alpha0=float(meta.get("alpha0", ALPHA0_DB_PER_KM)),
    )


def cmd_optimize(args) -> int:
    code = builtin_or_file(args.code) if args.code else None
    grid = load_alpha_grid(args.grid, args.eta_r, code)
    rows = []
    for L in args.distance_km:
        res = optimize_repeaters(grid, L, args.n_max)
        rows.append(res.to_row())
    write_csv(args.out, OPT_COLUMNS, rows, {"code": grid.code, "eta_r": grid.eta_r, "n": grid.n, "k": grid.k})
    return 0


def _series_by(rows, key_fn):
    groups: dict = {}
    for r in rows:
        groups.setdefault(key_fn(r), []).append(r)
    return groups


def cmd_plot(args) -> int:
    rows, meta = read_csv(args.inp)
    alpha0 = float(meta.get("alpha0", ALPHA0_DB_PER_KM))
    if args.kind == "loss-tolerance":
        panel = Panel("Loss tolerance", "single-photon loss", "effective transmission rate", xlim=(0, 1), ylim=(0, 1))
        sel = [r for r in rows if r["hops"] == 1]
        for (code, eta_r), grp in sorted(_series_by(sel, lambda r: (r["code"], r["eta_r"])).items()):
            grp.sort(key=lambda r: r["l0_km"])
            xs = [1.0 - 10 ** (-alpha0 * r["l0_km"] / 10) for r in grp]
            panel.series.append(Series(f"{code} eta_r={eta_r:g}", xs, [r["eta_eff"] for r in grp]))
        panel.series.append(Series("direct", [0.0, 1.0], [1.0, 0.0], markers=False, dashed=True, color="#777"))
        panels = [panel]
    elif args.kind == "attenuation":
        panel = Panel("Effective attenuation", "repeater spacing L0 (km)", "alpha_eff (dB/km)")
        xmax = 0.0
        for (code, eta_r), grp in sorted(_series_by(rows, lambda r: (r["code"], r["eta_r"])).items()):
            grp.sort(key=lambda r: r["l0_km"])
            xmax = max(xmax, grp[-1]["l0_km"])
            panel.series.append(Series(
                f"{code} eta_r={eta_r:g}", [r["l0_km"] for r in grp], [r["alpha_eff_db_per_km"] for r in grp]
            ))
        panel.series.append(Series("alpha0", [0.0, xmax or 1.0], [alpha0, alpha0], markers=False, dashed=True, color="#777"))
        panels = [panel]
    elif args.kind == "optimization":
        rows.sort(key=lambda r: r["distance_km"])
        xs = [r["distance_km"] for r in rows]
        left = Panel("Optimized ETR", "distance L (km)", "eta_eff", logx=True, ylim=(0, 1))
        left.series.append(Series("eta_eff", xs, [r["eta_eff"] for r in rows]))
        right = Panel("Optimal repeaters per 10 km", "distance L (km)", "N_opt per 10 km", logx=True)
        right.series.append(Series("N_opt/10 km", xs, [10.0 * r["n_opt"] / r["distance_km"] for r in rows]))
        panels = [left, right]
    else:
        raise UsageError(f"unknown plot kind {args.kind!r}")
    atomic_write_text(args.out, render_svg(panels))
    return 0


# parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foliated-link", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("code", help="build or validate a CSS code and write it as JSON")
    c.add_argument("family", help="steane | toric | gb | a code JSON file or builtin name")
    c.add_argument("--d", type=int, default=3, help="toric lattice size")
    c.add_argument("--ell", type=int)
    c.add_argument("--a", type=parse_exponents, help="exponents of a(x), e.g. 0,2,8,15")
    c.add_argument("--b", type=parse_exponents, help="exponents of b(x)")
    c.add_argument("--name")
    c.add_argument("--claimed-distance", type=int)
    c.add_argument("--row-reduce", action="store_true", help="drop redundant check rows")
    c.add_argument("--out")
    c.set_defaults(func=cmd_code)

    f = sub.add_parser("foliate", help="build and check a chain's syndrome graphs")
    f.add_argument("--code", required=True)
    f.add_argument("--hops", type=positive_int, required=True)
    f.add_argument("--dump")
    f.set_defaults(func=cmd_foliate)

    d = sub.add_parser("decode", help="decode one erasure pattern on a dumped chain")
    d.add_argument("--chain", required=True)
    d.add_argument("--erasure", required=True, help="comma-separated global qubit indices")
    d.add_argument("--decoder", choices=DECODERS, default=EXACT)
    d.set_defaults(func=cmd_decode)

    def add_mc(sp, required_out=False):
        sp.add_argument("--code", required=True)
        sp.add_argument("--trials", type=positive_int)
        sp.add_argument("--profile", choices=sorted(PROFILES), default="quick")
        sp.add_argument("--seed", type=seed_value, default=0)
        sp.add_argument("--alpha0", type=float, default=ALPHA0_DB_PER_KM)
        sp.add_argument("--decoder", choices=DECODERS, default=EXACT)
        sp.add_argument("--out", required=required_out)

    s = sub.add_parser("simulate", help="estimate the ETR of one chain")
    add_mc(s)
    s.add_argument("--hops", type=positive_int, required=True)
    s.add_argument("--eta-r", type=probability, default=1.0)
    s.add_argument("--l0-km", type=float, required=True)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="simulate a grid of cells into grid.csv")
    add_mc(w, required_out=True)
    w.add_argument("--hops", type=parse_int_list, required=True, help="e.g. 1 or 2:30")
    w.add_argument("--eta-r", type=lambda t: [probability(x) for x in t.split(",")], default=[1.0])
    w.add_argument("--l0-km", type=parse_float_list)
    w.add_argument("--loss", type=parse_float_list, help="fiber loss values in [0, 1)")
    w.set_defaults(func=cmd_sweep)

    ft = sub.add_parser("fit", help="fit alpha_eff per spacing from grid.csv")
    ft.add_argument("--in", dest="inp", required=True)
    ft.add_argument("--out", required=True)
    ft.set_defaults(func=cmd_fit)

    o = sub.add_parser("optimize", help="optimal repeater count per distance")
    o.add_argument("--grid", required=True)
    o.add_argument("--distance-km", type=parse_float_list, required=True)
    o.add_argument("--n-max", type=positive_int)
    o.add_argument("--eta-r", type=float)
    o.add_argument("--code", help="code file for n/k (defaults to the grid metadata)")
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_optimize)

    pl = sub.add_parser("plot", help="render stored data as SVG")
    pl.add_argument("--kind", choices=["loss-tolerance", "attenuation", "optimization"], required=True)
    pl.add_argument("--in", dest="inp", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"foliated-link: error: {exc}", file=sys.stderr)
        return 2
    except (CodeValidationError, FoliationError, ValueError, KeyError, IndexError, OSError) as exc:
        print(f"foliated-link: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

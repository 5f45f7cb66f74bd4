"""Command-line front end: ``python -m sticky_landscape <command> ...``.

Exit codes: 0 success, 1 numerical failure, 2 missing input, 3 inconsistent
inputs.
"""

import argparse
import csv
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np

from . import export, svgplot
from . import geometry as geo
from .lines import TraceError

log = logging.getLogger("sticky_landscape")

OK, NUMERICAL, MISSING, INCONSISTENT = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _kappa(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("kappa must be positive")
    return v


def _out(args):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_theory(directory):
    from .landscape import load_json
    path = Path(directory) / "landscape.json"
    if not path.is_file():
        raise CliError(MISSING, f"no landscape.json in {directory}; run 'landscape' first")
    return load_json(path), path


# --------------------------------------------------------------------------

def cmd_landscape(args):
    from .clusters import load_catalog
    from .landscape import compute_landscape, save_json
    try:
        catalog = load_catalog(args.catalog, n=args.n, seed=args.seed)
    except FileNotFoundError as exc:
        raise CliError(MISSING, str(exc))
    if catalog.n != args.n:
        raise CliError(INCONSISTENT, f"catalog is for n={catalog.n}, not n={args.n}")
    land = compute_landscape(catalog=catalog, line_ds=args.line_ds, face_ds=args.ds,
                             strict=args.strict, jobs=args.jobs,
                             corner_spacing=args.corner_spacing,
                             spring_metric=args.spring_metric)
    out = _out(args)
    (out / "lines").mkdir(exist_ok=True)
    for line in land.lines.lines:
        export.write_line(line, out / "lines" / f"line_{line.id:03d}.csv")
    for face in land.faces.faces:
        export.write_face(face, out / "faces")
    summary = land.summary()
    export.write_modes(summary, out / "modes.csv")
    export.write_totals(summary, out / "totals.csv")
    save_json(land, out / "landscape.json")
    export.write_manifest(out, "landscape", vars(args) | {"settings": land.settings},
                          seed=args.seed)
    n0, n1, n2 = summary.counts()
    Z0, Z1, Z2 = summary.Z
    print(f"n={land.n}: {n0}/{n1}/{n2} modes, Z0={Z0:.4g} Z1={Z1:.4g} Z2={Z2:.4g}, "
          f"Z1/Z0={Z1 / Z0:.3f} Z2/Z1={Z2 / Z1:.3f}")


def cmd_rates(args):
    from .kinetics import assemble_rates
    theory, path = _load_theory(args.landscape or args.out)
    if args.n is not None and theory.n != args.n:
        raise CliError(INCONSISTENT, f"landscape is for n={theory.n}, not n={args.n}")
    Z = theory.summary.Z
    net = assemble_rates(theory.lines, theory.catalog, Z0=Z[0], kappa=args.kappa,
                         convention=args.convention, Z=Z)
    out = _out(args)
    export.write_rates(net, out / "rates.csv", kappa=args.kappa, duration=args.duration)
    export.write_manifest(out, "rates", vars(args), inputs=[path])
    M = net.matrix(args.convention)
    print(export.GEOMETRIC_NOTE)
    for i, a in enumerate(net.modes):
        print(a, " ".join(f"{v:10.4g}" for v in M[i]))


def cmd_simulate(args):
    from .bdsim import parse_config, run, write_summary, write_trace
    cfg = Path(args.config)
    if not cfg.is_file():
        raise CliError(MISSING, f"config file {cfg} not found")
    params = parse_config(cfg.read_text())
    if args.seed is not None:
        params.seed = args.seed
    land, inputs = _classifier_landscape(args, params.n)
    from .landscape import classifier_for
    classifier = classifier_for(land)
    rigid = {m.id: m for m in land.catalog.rigid}
    if params.initial_mode not in rigid:
        raise CliError(INCONSISTENT, f"no rigid mode {params.initial_mode}")
    trace = run(params, classifier, rigid[params.initial_mode].representative)
    out = _out(args)
    write_trace(trace, out / "trace.csv")
    write_summary(trace, [m.id for m in land.catalog.rigid], out / "summary.json")
    export.write_manifest(out, "simulate", vars(args), inputs=[cfg] + inputs,
                          seed=params.seed)
    print(f"simulated {trace.elapsed:g} time units in {trace.wall_seconds:.1f} s; "
          f"ratios {trace.ratios(params.kappa)}")


def _classifier_landscape(args, n):
    if args.landscape:
        theory, path = _load_theory(args.landscape)
        if theory.n != n:
            raise CliError(INCONSISTENT, f"landscape is for n={theory.n}, config has n={n}")
        return theory, [path]
    from .landscape import compute_landscape
    try:
        return compute_landscape(n=n, mesh=False), []
    except FileNotFoundError as exc:
        raise CliError(MISSING, str(exc))


def cmd_compare(args):
    from .bdsim import SimParams
    from .kinetics import assemble_rates
    from .statmech import kappa_from_constants, yields
    theory, tpath = _load_theory(args.theory)
    spath = Path(args.sim) / "summary.json"
    if not spath.is_file():
        raise CliError(INCONSISTENT, f"no simulation summary in {args.sim}")
    sim = json.loads(spath.read_text())
    params = SimParams(**sim["params"])
    if params.n != theory.n:
        raise CliError(INCONSISTENT, f"theory n={theory.n}, simulation n={params.n}")
    kappa = sim["kappa"]
    out = _out(args)
    summ = theory.summary

    occ = {}
    for rec in sim["occupancy"]:
        occ.setdefault(rec["dim"], {})[rec["mode"]] = rec["time"]
    rows = []
    for dim in range(3):
        th = summ.probabilities(dim)
        tot = sum(occ.get(dim, {}).values())
        for k, p in th.items():
            ps = occ.get(dim, {}).get(k, 0.0) / tot if tot else float("nan")
            rows.append((dim, k, p, ps))
    with open(out / "scatter.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "mode", "p_theory", "p_sim"])
        w.writerows([(d, k, f"{a:.8g}", f"{b:.8g}") for d, k, a, b in rows])
    (out / "scatter.svg").write_text(svgplot.scatter(
        [r[2] for r in rows], [r[3] for r in rows], "mode probabilities",
        "theory", "simulation"))

    net = assemble_rates(theory.lines, theory.catalog, Z0=summ.Z[0], kappa=kappa, Z=summ.Z)
    C_th = net.expected_counts(sim["elapsed"], kappa=kappa)
    C_sim = np.array(sim["transitions"])
    with open(out / "counts.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a", "b", "count_theory", "count_sim", "difference"])
        for i, a in enumerate(net.modes):
            for j, b in enumerate(net.modes):
                w.writerow([a, b, f"{C_th[i, j]:.6g}", int(C_sim[i, j]),
                            f"{C_sim[i, j] - C_th[i, j]:.6g}"])
    with open(out / "ratios.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ratio", "theory", "simulation"])
        for name, a, b in zip(("Z1_over_Z0", "Z2_over_Z1"), summ.ratios, sim["ratios"]):
            w.writerow([name, f"{a:.6g}", f"{b:.6g}"])
    T = np.linspace(0.6, 3.0, 200)
    ys = np.array([yields(summ.Z, k) for k in kappa_from_constants(T)]).T
    (out / "yields.svg").write_text(svgplot.curves(
        T, ys, ["0-D", "1-D", "2-D"], "yields", "temperature", "fraction"))
    export.write_manifest(out, "compare", vars(args), inputs=[tpath, spath])
    print(f"compared {len(rows)} modes; ratios theory {summ.ratios} simulation {sim['ratios']}")


# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="sticky_landscape",
                                description="Free-energy landscape of sticky hard spheres.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("landscape", help="rigid modes, lines, faces and their totals")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--ds", type=float, default=0.05, help="face step size")
    a.add_argument("--line-ds", type=float, default=0.01)
    a.add_argument("--strict", action="store_true",
                   help="relax meshes until every triangle has quality above 0.2")
    a.add_argument("--catalog", help="adjacency-list file (default: shipped data)")
    a.add_argument("--corner-spacing", choices=["uniform", "length"], default="uniform")
    a.add_argument("--spring-metric", choices=["bond", "quotient"], default="bond")
    a.add_argument("--out", default="landscape_out")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--jobs", type=int, default=1)
    a.set_defaults(func=cmd_landscape)

    r = sub.add_parser("rates", help="leading-order rate matrix")
    r.add_argument("--n", type=int)
    r.add_argument("--kappa", type=_kappa, default=math.inf)
    r.add_argument("--convention", choices=["leading", "restricted"], default="leading")
    r.add_argument("--duration", type=float, help="also report expected counts")
    r.add_argument("--landscape", help="directory holding landscape.json (default: --out)")
    r.add_argument("--out", default="landscape_out")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_rates)

    s = sub.add_parser("simulate", help="Brownian dynamics run")
    s.add_argument("--config", required=True)
    s.add_argument("--landscape", help="directory holding landscape.json")
    s.add_argument("--out", default="sim_out")
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="theory against simulation")
    c.add_argument("--theory", required=True)
    c.add_argument("--sim", required=True)
    c.add_argument("--out", default="compare_out")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (TraceError, geo.GeometryError, geo.ProjectionError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL
    return OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: data ingestion, subcommand dispatch, serialization.

Subcommands: density, bandwidth, ci, band, modes, levelset, ridge, morse,
tree, persist, cdf, roc, simulate.  Every subcommand writes a machine-readable
JSON or CSV artifact plus a one-line human summary on stdout.

Exit codes: 0 success, 2 configuration error, 3 data error.  Bootstrap paths
require an explicit --seed; there is no wall-clock seeding.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import bandwidth, distfunc, estimator, geometry, inference, simulate, topology
from .bandwidth import BandwidthSelector, SelectorMethod
from .estimator import DensityModel, Sample
from .kernels import KernelFamily, KernelSpec

SCHEMA = 1


class ConfigError(Exception):
    exit_code = 2


class DataError(Exception):
    exit_code = 3


def ingest(path: str, group_col: str | None = None):
    """Parse a CSV of observations (one row per point, one column per dim).

    A non-numeric first row is treated as a header.  Returns a Sample, or a
    dict of label -> Sample when ``group_col`` names a label column.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: empty file")

    header = None
    start = 0
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        header = [cell.strip() for cell in rows[0]]
        start = 1
        if not rows[1:]:
            raise DataError(f"{path}: no data rows after header")

    label_idx = None
    if group_col is not None:
        if header is None or group_col not in header:
            raise DataError(f"{path}: group column {group_col!r} not in header")
        label_idx = header.index(group_col)

    width = len(rows[start])
    points, labels = [], []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise DataError(f"{path}: line {lineno}: expected {width} columns, "
                            f"got {len(row)}")
        values = []
        for col, cell in enumerate(row):
            if col == label_idx:
                labels.append(cell.strip())
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric cell "
                                f"{cell.strip()!r}")
            if not np.isfinite(v):
                raise DataError(f"{path}: line {lineno}: non-finite value")
            values.append(v)
        points.append(values)

    data = np.array(points, dtype=float)
    if label_idx is None:
        return Sample(data)
    groups = {}
    for lab in sorted(set(labels)):
        rows_for = data[[i for i, l in enumerate(labels) if l == lab]]
        groups[lab] = Sample(rows_for)
    if len(groups) != 2:
        raise DataError(f"{path}: expected exactly 2 groups, got {len(groups)}")
    return groups


def _kernel(args, dim: int) -> KernelSpec:
    return KernelSpec(KernelFamily(args.kernel), dim)


def _parse_lscv_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, count = spec.split(":")
        return np.geomspace(float(lo), float(hi), int(count))
    except ValueError as exc:
        raise ConfigError(f"bad --lscv-grid {spec!r}, expected lo:hi:count") from exc


def select_bandwidth(args, sample: Sample, kernel: KernelSpec) -> float:
    method = args.bandwidth_method
    if method == "fixed":
        if args.bandwidth is None or args.bandwidth <= 0:
            raise ConfigError("--bandwidth-method fixed requires --bandwidth > 0")
        sel = BandwidthSelector(SelectorMethod.FIXED, fixed_h=args.bandwidth)
    elif method == "lscv":
        grid = (_parse_lscv_grid(args.lscv_grid)
                if args.lscv_grid else None)
        sel = BandwidthSelector(SelectorMethod.LSCV, lscv_grid=grid)
    elif method == "plugin":
        sel = BandwidthSelector(SelectorMethod.AMISE_PLUGIN)
    else:
        sel = BandwidthSelector(SelectorMethod.RULE_OF_THUMB)
    try:
        return sel.select(sample, kernel)
    except (ValueError, bandwidth.DegenerateSampleError) as exc:
        raise DataError(str(exc)) from exc


def _model(args) -> DensityModel:
    sample = ingest(args.input)
    kernel = _kernel(args, sample.dim)
    h = select_bandwidth(args, sample, kernel)
    return DensityModel(sample, kernel, h)


def _require_seed(args):
    if args.seed is None:
        raise ConfigError("bootstrap paths require an explicit --seed")


def _grid_axis(model: DensityModel, resolution: int) -> np.ndarray:
    return estimator.default_axes(model, resolution=resolution)[0]


def _write_json(path: str | None, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(path: str | None, header: list, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        # repr(float(...)) keeps full precision and avoids numpy scalar reprs
        writer.writerow([repr(float(v)) if isinstance(v, float) else v
                         for v in row])
    if path:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())
    else:
        print(buf.getvalue(), end="")


def cmd_density(args):
    model = _model(args)
    grid = estimator.evaluate_grid(model, resolution=args.grid)
    if args.format == "json":
        _write_json(args.output, {
            "schema": SCHEMA,
            "axes": [ax.tolist() for ax in grid.axes],
            "values": grid.values.tolist(),
            "bandwidth": model.bandwidth,
        })
    else:
        header = [f"x{l}" for l in range(model.dim)] + ["density"]
        rows = [list(p) + [v] for p, v in zip(grid.points, grid.values)]
        _write_csv(args.output, header, rows)
    print(f"density: n={model.n} d={model.dim} h={model.bandwidth:.6g} "
          f"grid={grid.values.size}")


def cmd_bandwidth(args):
    sample = ingest(args.input)
    kernel = _kernel(args, sample.dim)
    h = select_bandwidth(args, sample, kernel)
    _write_json(args.output, {"schema": SCHEMA, "bandwidth": h,
                              "method": args.bandwidth_method})
    print(f"bandwidth: method={args.bandwidth_method} h={h:.6g}")


def cmd_ci(args):
    model = _model(args)
    axis = _grid_axis(model, args.grid)
    if args.method == "plugin":
        result = inference.ci_plugin(model, axis, args.alpha)
    else:
        _require_seed(args)
        plan = inference.BootstrapPlan(args.boot, args.seed)
        fn = (inference.ci_bootstrap_plugin if args.method == "boot-plugin"
              else inference.ci_bootstrap)
        result = fn(model, axis, args.alpha, plan)
    _write_json(args.output, result.to_dict())
    print(f"ci: method={result.method} alpha={args.alpha} points={axis.size}")


def cmd_band(args):
    model = _model(args)
    axis = _grid_axis(model, args.grid)
    if args.method == "evt":
        result = inference.band_plugin_evt(model, axis, args.alpha)
    elif args.method == "boot":
        _require_seed(args)
        result = inference.band_bootstrap(
            model, axis, args.alpha, inference.BootstrapPlan(args.boot, args.seed))
    else:
        _require_seed(args)
        result = inference.band_debiased_bootstrap(
            model.sample, model.kernel, model.bandwidth, axis, args.alpha,
            inference.BootstrapPlan(args.boot, args.seed))
    _write_json(args.output, result.to_dict())
    hw = "varies" if result.halfwidth is None else f"{result.halfwidth:.6g}"
    print(f"band: method={result.method} alpha={args.alpha} halfwidth={hw}")


def cmd_modes(args):
    model = _model(args)
    modes = geometry.find_modes(model, tol=args.tol, max_iter=args.max_iter)
    header = [f"x{l}" for l in range(model.dim)] + ["density"]
    rows = [list(m) + [d] for m, d in zip(modes.modes, modes.density)]
    _write_csv(args.output, header, rows)
    print(f"modes: found {modes.n_modes} local modes")


def cmd_levelset(args):
    model = _model(args)
    grid = estimator.evaluate_grid(model, resolution=args.grid)
    level = args.level
    if level is None:
        raise ConfigError("levelset requires --lambda")
    ls = geometry.level_set(grid, level)
    header = [f"x{l}" for l in range(model.dim)] + ["in_set", "component"]
    rows = [list(p) + [int(m), int(c)]
            for p, m, c in zip(grid.points, ls.mask.ravel(), ls.labels.ravel())]
    _write_csv(args.output, header, rows)
    print(f"levelset: lambda={level:.6g} components={ls.n_components}")


def cmd_ridge(args):
    model = _model(args)
    ridge = geometry.scms(model, tol=args.tol, max_iter=args.max_iter)
    header = [f"x{l}" for l in range(model.dim)] + ["proj_grad_norm", "lambda2"]
    rows = [list(p) + [g, l] for p, g, l in
            zip(ridge.points, ridge.projected_grad_norms, ridge.lambda2)]
    _write_csv(args.output, header, rows)
    print(f"ridge: {ridge.points.shape[0]} ridge points "
          f"({int(ridge.converged.sum())}/{ridge.converged.size} starts converged)")


def cmd_morse(args):
    model = _model(args)
    grid = estimator.evaluate_grid(model, resolution=args.grid)
    part = geometry.morse_smale(model, grid)
    header = [f"x{l}" for l in range(model.dim)] + ["ascent", "descent", "cell"]
    rows = [list(p) + [int(a), int(d), int(c)] for p, a, d, c in
            zip(grid.points, part.ascent_ids, part.descent_ids, part.cell_labels)]
    _write_csv(args.output, header, rows)
    print(f"morse: {len(set(part.cell_labels.tolist()))} cells, "
          f"{part.modes.shape[0]} modes")


def cmd_tree(args):
    model = _model(args)
    grid = estimator.evaluate_grid(model, resolution=args.grid)
    tree = topology.cluster_tree(grid)
    _write_json(args.output, tree.to_dict())
    print(f"tree: {len(tree.nodes)} leaves")


def cmd_persist(args):
    model = _model(args)
    grid = estimator.evaluate_grid(model, resolution=args.grid)
    diagram = topology.persistence_diagram(topology.cluster_tree(grid))
    _write_csv(args.output, ["birth", "death"],
               [[b, d] for b, d in diagram.pairs])
    print(f"persist: {diagram.pairs.shape[0]} pairs (dim 0)")


def cmd_cdf(args):
    model = _model(args)
    if model.dim != 1:
        raise DataError("cdf requires univariate data")
    scdf = distfunc.SmoothedCDF(model)
    axis = _grid_axis(model, args.grid)
    values = distfunc.cdf_many(scdf, axis)
    _write_csv(args.output, ["x", "cdf"], [[x, v] for x, v in zip(axis, values)])
    print(f"cdf: evaluated at {axis.size} points, h={model.bandwidth:.6g}")


def cmd_roc(args):
    if not args.group_col:
        raise ConfigError("roc requires --group-col")
    groups = ingest(args.input, group_col=args.group_col)
    (lab_h, healthy), (lab_d, diseased) = sorted(groups.items())
    kernel = _kernel(args, 1)
    h_f = select_bandwidth(args, healthy, kernel)
    h_g = select_bandwidth(args, diseased, kernel)
    t_grid = distfunc.default_t_grid(args.grid)
    if args.seed is not None:
        plan = inference.BootstrapPlan(args.boot, args.seed)
        band = distfunc.roc_band(healthy, diseased, kernel, h_f, h_g,
                                 args.alpha, plan, t_grid)
        rows = [[t, c, lo, up] for t, c, lo, up in
                zip(t_grid, band.center, band.lower, band.upper)]
        _write_csv(args.output, ["t", "roc", "lower", "upper"], rows)
        print(f"roc: groups=({lab_h},{lab_d}) band halfwidth={band.halfwidth:.6g}")
    else:
        curve = distfunc.roc_curve(healthy, diseased, kernel, h_f, h_g, t_grid)
        rows = [[t, v] for t, v in zip(curve.t, curve.values)]
        _write_csv(args.output, ["t", "roc"], rows)
        print(f"roc: groups=({lab_h},{lab_d}) curve on {t_grid.size} points")


def cmd_simulate(args):
    _require_seed(args)
    report = simulate.simulate_coverage(
        args.truth, args.n, args.method, args.alpha, args.trials, args.seed,
        replicates=args.boot, grid_size=args.grid)
    _write_json(args.output, report.to_dict())
    print(f"simulate: method={report.method} target={report.target} "
          f"coverage={report.coverage:.3f} (nominal {report.nominal:.2f}, "
          f"{report.trials} trials)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdeforge",
        description="Kernel density estimation, inference, and feature extraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="input CSV path")
        p.add_argument("--kernel", choices=["gaussian", "spherical"],
                       default="gaussian")
        p.add_argument("--bandwidth-method", choices=["rot", "lscv", "plugin",
                                                      "fixed"], default="rot")
        p.add_argument("--bandwidth", type=float, default=None,
                       help="fixed bandwidth (with --bandwidth-method fixed)")
        p.add_argument("--lscv-grid", default=None, metavar="LO:HI:COUNT")
        p.add_argument("--grid", type=int, default=256,
                       help="grid resolution per dimension")
        p.add_argument("--output", default=None, help="output file path")

    p = sub.add_parser("density", help="evaluate the KDE on a grid")
    common(p)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("bandwidth", help="select a bandwidth")
    common(p)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("ci", help="pointwise confidence intervals")
    common(p)
    p.add_argument("--method", choices=["plugin", "boot-plugin", "boot"],
                   default="plugin")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("band", help="simultaneous confidence band")
    common(p)
    p.add_argument("--method", choices=["evt", "boot", "debias"], default="boot")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_band)

    for name, fn in (("modes", cmd_modes), ("ridge", cmd_ridge)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--max-iter", type=int, default=500)
        p.set_defaults(func=fn)

    p = sub.add_parser("levelset", help="superlevel set of the KDE grid")
    common(p)
    p.add_argument("--lambda", dest="level", type=float, default=None)
    p.set_defaults(func=cmd_levelset)

    p = sub.add_parser("morse", help="Morse-Smale partition of the KDE grid")
    common(p)
    p.set_defaults(func=cmd_morse)

    p = sub.add_parser("tree", help="cluster tree of the KDE grid")
    common(p)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("persist", help="0-dim persistence diagram")
    common(p)
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("cdf", help="smoothed CDF")
    common(p)
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("roc", help="smoothed ROC curve (two-sample)")
    common(p)
    p.add_argument("--group-col", default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None,
                   help="enables the bootstrap band")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("simulate", help="Monte Carlo coverage study")
    common(p, needs_input=False)
    p.add_argument("--truth", default="normal",
                   help="'normal' or 'mixture:w,mu1,mu2,sd1,sd2'")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--method", choices=list(simulate.METHODS),
                   default="band-bootstrap")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--boot", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Machine-readable CSV goes to stdout (or --out); human diagnostics go to
stderr. Exit codes: 0 success, 1 domain/validation error, 2 usage error.
The TRIMIGA_THREADS environment variable caps BLAS parallelism (0 = auto);
it must be honored before numpy first loads, hence the import dance below.
"""

import os
import sys

_threads = os.environ.get("TRIMIGA_THREADS", "").strip()
if _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse

import numpy as np

from . import iges, native
from .errors import TrimigaError
from .plate import Material, PlateConfig, convergence_rates, solve_plate
from .quadrature import integrate


def _fmt(value):
    return format(float(value), ".12g")


def _write_output(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_path(path):
    if path.lower().endswith((".igs", ".iges")):
        return iges.extract_region(iges.parse_file(path))
    return native.load_region(path)


def _load_region(args):
    if getattr(args, "region", None):
        return _load_path(args.region)
    if getattr(args, "iges", None):
        return iges.extract_region(iges.parse_file(args.iges))
    raise TrimigaError("no geometry given: pass --region or --iges")


def _parse_at(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise TrimigaError(f"--at expects 's,t', got {text!r}")
    try:
        s, t = float(parts[0]), float(parts[1])
    except ValueError:
        raise TrimigaError(f"--at expects two numbers, got {text!r}") from None
    return s, t


def cmd_map(args):
    region = _load_region(args)
    s, t = _parse_at(args.at)
    m = region.map_point(s, t)
    rows = ["s,t,u,v", ",".join(_fmt(v) for v in (s, t, m.uv[0], m.uv[1]))]
    _write_output("\n".join(rows) + "\n", args.out)
    return 0


def cmd_jacobian(args):
    region = _load_region(args)
    s, t = _parse_at(args.at)
    m = region.map_point(s, t)
    cd = region.composite_eval(s, t, order=1)
    rows = [
        "s,t,du_ds,dv_ds,du_dt,dv_dt,det,jacobian_scale",
        ",".join(
            _fmt(v)
            for v in (
                s, t,
                m.duv_ds[0], m.duv_ds[1], m.duv_dt[0], m.duv_dt[1],
                m.det, cd.jacobian_scale,
            )
        ),
    ]
    _write_output("\n".join(rows) + "\n", args.out)
    return 0


def cmd_area(args):
    region = _load_region(args)
    area = integrate(
        region, lambda cd: 1.0, args.order, split_breakpoints=not args.no_split
    )
    rows = ["order,split,area",
            f"{args.order},{int(not args.no_split)},{_fmt(area)}"]
    _write_output("\n".join(rows) + "\n", args.out)
    return 0


def cmd_check_derivs(args):
    region = _load_region(args)
    breaks = [bp.s for bp in region.breakpoints()]
    margin = 0.02
    svals = [
        s
        for s in np.linspace(margin, 1.0 - margin, args.grid)
        if all(abs(s - b) > margin for b in breaks)
    ]
    tvals = np.linspace(margin, 1.0 - margin, args.grid)

    def rel(err, ref):
        return err / max(ref, 1.0)

    worst1 = worst2 = 0.0
    h1, h2 = 1e-6, 1e-4
    for s in svals:
        for t in tvals:
            cd = region.composite_eval(s, t, order=2)
            fd_s = (region.composite_eval(s + h1, t, 0).x
                    - region.composite_eval(s - h1, t, 0).x) / (2 * h1)
            fd_t = (region.composite_eval(s, t + h1, 0).x
                    - region.composite_eval(s, t - h1, 0).x) / (2 * h1)
            worst1 = max(
                worst1,
                rel(np.abs(cd.dx_ds - fd_s).max(), np.abs(cd.dx_ds).max()),
                rel(np.abs(cd.dx_dt - fd_t).max(), np.abs(cd.dx_dt).max()),
            )
            fd_ss = (region.composite_eval(s + h2, t, 1).dx_ds
                     - region.composite_eval(s - h2, t, 1).dx_ds) / (2 * h2)
            fd_tt = (region.composite_eval(s, t + h2, 1).dx_dt
                     - region.composite_eval(s, t - h2, 1).dx_dt) / (2 * h2)
            fd_st = (region.composite_eval(s, t + h2, 1).dx_ds
                     - region.composite_eval(s, t - h2, 1).dx_ds) / (2 * h2)
            worst2 = max(
                worst2,
                rel(np.abs(cd.d2x_ds2 - fd_ss).max(), np.abs(cd.d2x_ds2).max()),
                rel(np.abs(cd.d2x_dt2 - fd_tt).max(), np.abs(cd.d2x_dt2).max()),
                rel(np.abs(cd.d2x_dsdt - fd_st).max(), np.abs(cd.d2x_dsdt).max()),
            )
    rows = [
        "quantity,max_rel_error",
        f"first_derivatives,{_fmt(worst1)}",
        f"second_derivatives,{_fmt(worst2)}",
    ]
    _write_output("\n".join(rows) + "\n", args.out)
    ok = worst1 < 1e-5 and worst2 < 1e-5
    if not ok:
        print("derivative check FAILED (tolerance 1e-5)", file=sys.stderr)
    return 0 if ok else 1


def cmd_iges_dump(args):
    model = iges.parse_file(args.iges)
    rows = ["de,type,param_lines,form"]
    for de, entry in sorted(model.entries.items()):
        rows.append(f"{de},{entry.etype},{entry.pd_count},{entry.form}")
    _write_output("\n".join(rows) + "\n", args.out)
    for etype, count in sorted(model.skipped.items()):
        print(f"skipped {count} entity(ies) of unsupported type {etype}", file=sys.stderr)
    for note in model.diagnostics + iges.boundary_gap_diagnostics(model):
        print(note, file=sys.stderr)
    return 0


def cmd_iges_extract(args):
    model = iges.parse_file(args.iges)
    region = iges.extract_region(model, args.index)
    if not args.out:
        raise TrimigaError("iges-extract requires --out for the native geometry file")
    native.save_region(region, args.out, comment=f"extracted from {args.iges}")
    report = region.validate(16)
    print(report.summary(), file=sys.stderr)
    return 0


def _plate_config(args):
    overrides = {}
    if args.config:
        overrides = _read_config(args.config)
    material = Material(
        float(overrides.get("youngs_modulus", 1e5)),
        float(overrides.get("poisson_ratio", 0.3)),
    )
    cfg = PlateConfig(
        degree=int(overrides.get("degree", 2)),
        quad_order=args.order or (
            int(overrides["quad_order"]) if "quad_order" in overrides else None
        ),
        bc_mode=args.bc or overrides.get("bc", "paper"),
        arc_weight=float(overrides.get("arc_weight", PlateConfig.arc_weight)),
        scale=float(overrides.get("scale", 5.0)),
        far_stress=float(overrides.get("far_stress", 1.0)),
        material=material,
    )
    max_stage = args.stage if args.stage is not None else int(overrides.get("stage", 2))
    return cfg, overrides.get("geometry"), max_stage


def _read_config(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise TrimigaError(f"{path}:{lineno}: expected key=value, got {line!r}")
            values[key.strip()] = value.strip()
    return values


def cmd_plate(args):
    cfg, geometry_path, max_stage = _plate_config(args)
    region = None
    if args.region or geometry_path:
        region = _load_path(args.region or geometry_path)
    results = []
    for stage in range(max_stage + 1):
        stage_cfg = PlateConfig(
            stage=stage,
            degree=cfg.degree,
            quad_order=cfg.quad_order,
            bc_mode=cfg.bc_mode,
            arc_weight=cfg.arc_weight,
            scale=cfg.scale,
            far_stress=cfg.far_stress,
            material=cfg.material,
        )
        results.append(solve_plate(stage_cfg, region=region))
    rates = convergence_rates(results)
    rows = ["stage,dofs,l2_stress_error,rim_stress,rate"]
    for i, r in enumerate(results):
        rate = _fmt(rates[i - 1]) if i > 0 else ""
        rows.append(
            f"{i},{r.dofs},{_fmt(r.l2_stress_error)},{_fmt(r.rim_stress)},{rate}"
        )
    _write_output("\n".join(rows) + "\n", args.out)
    if args.dump:
        _dump_fields(results[-1], args.dump, args.grid)
    return 0


def _dump_fields(result, path, grid):
    sol = result.solution
    rows = ["s,t,x,y,ux,uy,sxx,syy,sxy"]
    for s in np.linspace(0.0, 1.0, grid):
        for t in np.linspace(0.0, 1.0, grid):
            cd = sol.geometry.eval(s, t)
            u = sol.displacement(s, t)
            sig = sol.stress(s, t)
            rows.append(
                ",".join(
                    _fmt(v)
                    for v in (s, t, cd.x[0], cd.x[1], u[0], u[1], sig[0], sig[1], sig[2])
                )
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trimiga",
        description="Evaluate, integrate and analyze trimmed NURBS regions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_geometry(p):
        p.add_argument("--region", help="native-format region file (surface + 2 curves)")
        p.add_argument("--iges", help="IGES file; the first trimmed surface is used")
        p.add_argument("--out", help="write CSV here instead of stdout")

    p = sub.add_parser("map", help="evaluate the (s,t) -> (u,v) map")
    add_geometry(p)
    p.add_argument("--at", required=True, help="parameter pair 's,t'")
    p.set_defaults(fn=cmd_map)

    p = sub.add_parser("jacobian", help="map derivatives and jacobian at a point")
    add_geometry(p)
    p.add_argument("--at", required=True, help="parameter pair 's,t'")
    p.set_defaults(fn=cmd_jacobian)

    p = sub.add_parser("area", help="integrate 1 over the trimmed region")
    add_geometry(p)
    p.add_argument("--order", type=int, default=16, help="Gauss points per direction")
    p.add_argument("--no-split", action="store_true",
                   help="ignore trimming-curve breakpoints when partitioning")
    p.set_defaults(fn=cmd_area)

    p = sub.add_parser("check-derivs",
                       help="compare analytic derivatives with finite differences")
    add_geometry(p)
    p.add_argument("--grid", type=int, default=16, help="interior sample grid size")
    p.set_defaults(fn=cmd_check_derivs)

    p = sub.add_parser("iges-dump", help="inventory the entities of an IGES file")
    p.add_argument("--iges", required=True)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(fn=cmd_iges_dump)

    p = sub.add_parser("iges-extract",
                       help="extract a trimmed region to the native format")
    p.add_argument("--iges", required=True)
    p.add_argument("--index", type=int, default=0, help="trimmed surface index")
    p.add_argument("--out", help="native geometry file to write")
    p.set_defaults(fn=cmd_iges_extract)

    p = sub.add_parser("plate", help="plate-with-a-hole convergence study")
    p.add_argument("--stage", type=int, default=None,
                   help="finest refinement stage (default 2)")
    p.add_argument("--bc", choices=("paper", "exact"),
                   help="right-edge loading: uniform pull or reference tractions")
    p.add_argument("--order", type=int, help="Gauss points per direction")
    p.add_argument("--region", help="native-format region overriding the built-in plate")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--out", help="write the convergence CSV here instead of stdout")
    p.add_argument("--dump", help="write per-point field CSV for the finest stage")
    p.add_argument("--grid", type=int, default=17, help="dump grid size per direction")
    p.set_defaults(fn=cmd_plate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.fn(args)
    except TrimigaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

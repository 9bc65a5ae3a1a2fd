"""Command line: parse a config, run one subcommand, write outputs + manifest.

    gmcf <smooth|flow|cascade|shadow|verify> --config FILE
         [--out DIR] [--threads K] [--seed U64]

Exit codes: 0 success; 2 config problem; 3 infeasible smoothing parameters;
4 degenerate level set; 5 validation or probe failure; 6 numerical abort;
1 unexpected error.  Outputs are binary grids (.gmcf), CSV with a header
row, or plain-text reports; manifest.json records inputs, a parameter hash,
library versions, the seed, and wall time.
"""

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .barriers import sup_barrier
from .cascade import (CascadeConfig, CascadeProblem, ProbeError, ProbeSpec,
                      _domain_radius, convergence_rows, extract_shadow,
                      run_cascade, run_probe_battery)
from .cones import make_cone
from .config import ConfigError, parse_config_file, serialize_config
from .domains import interval_extent
from .gridio import write_grid
from .registry import domain as registry_domain, initial_data
from .smoothing import (DegenerateLevelSetError, FeasibilityError, build_f,
                        build_g, smooth_intersection, validate_curvature,
                        validate_inclusions)
from .solver import residual, solve_graph, solve_interval, solve_radial

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_FEASIBILITY = 3
EXIT_DEGENERATE = 4
EXIT_VALIDATION = 5
EXIT_NUMERIC = 6


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _write_text(path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _f(x):
    """Stable float formatting for CSV cells."""
    return repr(float(x))


def _rle(mask):
    """Run-length encoding 'start:length;...' of the True runs."""
    mask = np.asarray(mask, dtype=bool).ravel()
    if not mask.any():
        return ""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.nonzero(padded[1:] != padded[:-1])[0]
    starts, stops = edges[0::2], edges[1::2]
    return ";".join("%d:%d" % (s, e - s) for s, e in zip(starts, stops))


def _expr_matches_geometry(args_kind, geometry):
    if args_kind == "any":
        return True
    need = {"interval": "profile-x", "radial": "profile-r", "graph2d": "pts2d"}
    return args_kind == need[geometry]


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _cmd_smooth(p, outdir, rng):
    a = registry_domain(p["domain_a"])
    b = registry_domain(p["domain_b"])
    cone = make_cone(p["cone"])
    delta = p["delta"] if p["delta"] > 0 else None
    si = smooth_intersection(a, b, p["eps"], cone=cone, delta=delta,
                             rng=rng, n_rim=p["n_rim"])
    rep_inc = validate_inclusions(si, n=p["n_validate"], rng=rng)
    rep_cur = validate_curvature(si, cone, n=min(p["n_validate"], 1500), rng=rng)

    lo, hi = si.bounding_box()
    n = p["grid_n"]
    span = float(np.max(hi - lo))
    spacing = span / (n - 1)
    xs = lo[0] + spacing * np.arange(n)
    ys = lo[1] + spacing * np.arange(n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = si.phi.values(np.column_stack([X.ravel(), Y.ravel()])).reshape(n, n)
    write_grid(os.path.join(outdir, "smooth_phi.gmcf"), vals, spacing, lo)

    bad = (rep_inc["violations_smoothed_in_intersection"]
           + rep_inc["violations_trimmed_in_smoothed"])
    cur_ok = rep_cur["min_margin"] >= -1e-6
    lines = [
        "smoothed intersection of %s and %s" % (p["domain_a"], p["domain_b"]),
        "eps = %g   eps_eff = %g   delta = %g   delta1 = %g"
        % (si.eps, si.eps_eff, si.delta, si.delta1),
        "collars: %g / %g   rim samples: %d"
        % (si.collar_a, si.collar_b, len(si.rim)),
        "inclusion check: %d violations in %d + %d samples"
        % (bad, rep_inc["n_smoothed_in_intersection"],
           rep_inc["n_trimmed_in_smoothed"]),
        "inclusion margins: %g (smoothed in A cap B), %g (trimmed in smoothed)"
        % (rep_inc["min_margin_smoothed_in_intersection"],
           rep_inc["min_margin_trimmed_in_smoothed"]),
        "curvature (%s cone): min margin %g over %d boundary samples -> %s"
        % (rep_cur["cone"], rep_cur["min_margin"], rep_cur["n_boundary_samples"],
           "ok" if cur_ok else "VIOLATED"),
        "single-field curvature deviation: %g (tol %g)"
        % (rep_cur["single_field_max_curvature_dev"], rep_cur["single_field_tol"]),
        "verdict: %s" % ("pass" if (bad == 0 and cur_ok) else "FAIL"),
    ]
    _write_text(os.path.join(outdir, "smooth_report.txt"), lines)
    outputs = ["smooth_phi.gmcf", "smooth_report.txt"]
    return (EXIT_OK if bad == 0 and cur_ok else EXIT_VALIDATION), outputs


def _flow_run(p, rng):
    spec = registry_domain(p["domain"])
    fn, args_kind = initial_data(p["initial"])
    geometry = p["geometry"]
    if not _expr_matches_geometry(args_kind, geometry):
        raise ConfigError(["[flow] initial %r takes %s arguments, which does "
                           "not fit geometry %r"
                           % (p["initial"], args_kind, geometry)])
    sigma = p["sigma_cfl"] if p["sigma_cfl"] > 0 else None
    dval = float(p["data"])
    if geometry == "interval":
        if spec.dim != 1:
            raise ConfigError(["[flow] geometry interval needs a 1D domain"])
        a, b = interval_extent(spec)
        n = int(round((b - a) / p["h"])) + 1
        grid = np.linspace(a, b, n)
        res = solve_interval(np.asarray(fn(grid), dtype=float),
                             lambda t: (dval, dval), a=a, b=b, n=n,
                             t_end=p["t_end"], n_frames=p["n_frames"],
                             sigma_cfl=sigma if sigma else 0.9,
                             h_cap=p["h_cap"])
        return res, grid, "x"
    if geometry == "radial":
        if spec.dim < 2 or spec.kind != "ball" or np.any(spec.center != 0.0):
            raise ConfigError(["[flow] geometry radial needs a ball domain "
                               "centred at the origin"])
        rad = _domain_radius(spec)
        n = int(round(rad / p["h"])) + 1
        grid = np.linspace(0.0, rad, n)
        res = solve_radial(np.asarray(fn(grid), dtype=float), lambda t: dval,
                           R=rad, n=n, dim=p["dim"], t_end=p["t_end"],
                           n_frames=p["n_frames"],
                           sigma_cfl=sigma if sigma else 0.9, h_cap=p["h_cap"])
        return res, grid, "r"
    if spec.dim != 2:
        raise ConfigError(["[flow] geometry graph2d needs a 2D domain"])
    res = solve_graph(spec, fn, dval, h=p["h"], t_end=p["t_end"],
                      n_frames=p["n_frames"],
                      sigma_cfl=sigma if sigma else 0.2, h_cap=p["h_cap"])
    return res, None, None


def _cmd_flow(p, outdir, rng):
    res, grid, axis = _flow_run(p, rng)
    outputs = []
    if res.kind == "graph2d":
        for i, (t, fr) in enumerate(zip(res.times, res.frames)):
            name = "flow_t%04d.gmcf" % i
            write_grid(os.path.join(outdir, name), fr, res.spacing, res.origin)
            outputs.append(name)
        _write_csv(os.path.join(outdir, "flow_times.csv"), ["frame", "t"],
                   [[str(i), _f(t)] for i, t in enumerate(res.times)])
        outputs.append("flow_times.csv")
    else:
        rows = []
        for t, fr in zip(res.times, res.frames):
            for x, u in zip(grid, fr):
                rows.append([_f(t), _f(x), _f(u)])
        _write_csv(os.path.join(outdir, "flow_frames.csv"), ["t", axis, "u"], rows)
        outputs.append("flow_frames.csv")
    diag_rows = list(zip(*[[_f(v) for v in res.diag[k]]
                           for k in ("t", "max_abs", "min_u", "max_grad", "dt")]))
    _write_csv(os.path.join(outdir, "flow_diag.csv"),
               ["t", "max_abs", "min_u", "max_grad", "dt"], diag_rows)
    outputs.append("flow_diag.csv")
    code = EXIT_OK if res.status in ("done", "stopped") else EXIT_NUMERIC
    return code, outputs


def _cascade_run(p, rng):
    spec = registry_domain(p["domain"])
    fn, args_kind = initial_data(p["initial"])
    if not _expr_matches_geometry(args_kind, p["geometry"]):
        raise ConfigError(["[cascade] initial %r takes %s arguments, which "
                           "does not fit geometry %r"
                           % (p["initial"], args_kind, p["geometry"])])
    cfg = CascadeConfig(r_schedule=p["r_schedule"], eps=p["eps"],
                        stab_tol=p["stab_tol"], h_inf=p["h_inf"],
                        h_cap=p["h_cap"], clamp_delta=p["clamp_delta"])
    prob = CascadeProblem(omega=spec, u0=fn, t_end=p["t_end"], h=p["h"],
                          n_frames=p["n_frames"], geometry=p["geometry"],
                          dim=p["dim"])
    return run_cascade(prob, cfg, rng=rng), cfg


def _write_cascade_outputs(cres, outdir):
    outputs = []
    for R, stage in zip(cres.r_values, cres.stages):
        rows = []
        if stage.kind == "graph2d":
            continue                     # stage dumps are 1D/radial CSVs
        for t, fr in zip(stage.times, stage.frames):
            for x, u in zip(stage.coords, fr):
                rows.append([_f(t), _f(x), _f(u)])
        name = "stage_R%g_frames.csv" % R
        _write_csv(os.path.join(outdir, name),
                   ["t", "r" if stage.kind == "radial" else "x", "u"], rows)
        outputs.append(name)
    header, rows = convergence_rows(cres)
    _write_csv(os.path.join(outdir, "cascade_table.csv"), header, rows)
    outputs.append("cascade_table.csv")

    shadow = extract_shadow(cres)
    rows = []
    for ti, t in enumerate(shadow.times):
        rows.append([_f(t),
                     _f(shadow.radius[ti]) if shadow.radius is not None else "",
                     _rle(shadow.masks[ti]), _rle(shadow.ambiguous[ti])])
    _write_csv(os.path.join(outdir, "shadow.csv"),
               ["t", "radius", "mask_rle", "ambiguous_rle"], rows)
    outputs.append("shadow.csv")
    return shadow, outputs


def _cmd_cascade(p, outdir, rng):
    cres, _cfg = _cascade_run(p, rng)
    shadow, outputs = _write_cascade_outputs(cres, outdir)
    lines = ["cascade over R schedule %s" % (cres.r_values,),
             "stage statuses: %s" % ", ".join(r.status for r in cres.stages),
             "flagged non-monotone cells: %d" % len(cres.flagged)]
    for prep, R in zip(cres.prepared, cres.r_values):
        lines.append("R=%g: mollifier radius %g, sampled sup error %g%s"
                     % (R, prep.radius, prep.sup_err,
                        " (extended-real data clamped)" if prep.had_infinite else ""))
    _write_text(os.path.join(outdir, "cascade_report.txt"), lines)
    outputs.append("cascade_report.txt")
    bad = any(r.status not in ("done", "stopped") for r in cres.stages)
    return (EXIT_NUMERIC if bad else EXIT_OK), outputs


def _read_probes(path):
    probes = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        want = ["designation", "cx", "cy", "r0", "t0"]
        if header is None or [h.strip() for h in header] != want:
            raise ConfigError(["probe file %s must start with the header %s"
                               % (path, ",".join(want))])
        for i, row in enumerate(rd):
            if not row:
                continue
            if len(row) != 5:
                raise ConfigError(["probe file row %d needs 5 fields" % (i + 2)])
            desig = row[0].strip()
            if desig not in ("inside", "outside"):
                raise ConfigError(["probe file row %d: designation must be "
                                   "inside or outside" % (i + 2)])
            try:
                cx, cy, r0, t0 = (float(v) for v in row[1:])
            except ValueError:
                raise ConfigError(["probe file row %d: fields cx,cy,r0,t0 "
                                   "must be numbers" % (i + 2)]) from None
            probes.append((ProbeSpec(center=np.array([cx, cy]), r0=r0, t0=t0,
                                     dim=2), desig))
    if not probes:
        raise ConfigError(["probe file %s contains no probes" % path])
    return probes


def _cmd_shadow(p, outdir, rng):
    probes = _read_probes(p["probes_file"])
    cres, _cfg = _cascade_run(p, rng)
    shadow, outputs = _write_cascade_outputs(cres, outdir)
    report = run_probe_battery(shadow, probes)
    rows = []
    for pi, ((probe, desig), rr) in enumerate(zip(report.probes, report.results)):
        for t, m in zip(rr["times"], rr["margins"]):
            rows.append([str(pi), desig, _f(t), _f(m)])
    _write_csv(os.path.join(outdir, "probe_margins.csv"),
               ["probe", "designation", "t", "margin"], rows)
    _write_text(os.path.join(outdir, "weak_solution_report.txt"),
                report.summary_lines())
    outputs += ["probe_margins.csv", "weak_solution_report.txt"]
    return (EXIT_OK if report.all_pass else EXIT_VALIDATION), outputs


def _cmd_verify(p, outdir, rng):
    n = p["n_samples"]
    checks = []

    f = build_f()
    s = rng.uniform(-0.99, 0.99, n)
    fv = f.value(s)
    m = np.minimum(s, 0.0)
    # strictness of the sandwich m-1 < f < m is float-visible only on the
    # core; near |s| = 1 the gap sits below one ulp of s
    core = np.abs(s) <= 0.9
    ok = (np.all(fv[core] < m[core]) and np.all(fv[core] > m[core] - 1.0)
          and np.all(fv <= m) and np.all(fv >= m - 1.0))
    ends = f.value(-1.0) == -1.0 and f.value(1.0) == 0.0
    checks.append(("profile-axioms", bool(ok and ends)))

    try:
        build_g(1.0, eps_g=10.0)
        checks.append(("band-feasibility-guard", False))
    except FeasibilityError:
        checks.append(("band-feasibility-guard", True))

    a = registry_domain("lens_left")
    b = registry_domain("lens_right")
    si = smooth_intersection(a, b, 0.2, cone=make_cone("mean"), rng=rng)
    rep_inc = validate_inclusions(si, n=min(n, 3000), rng=rng)
    rep_cur = validate_curvature(si, make_cone("mean"), n=300, rng=rng)
    checks.append(("lens-inclusions",
                   rep_inc["violations_smoothed_in_intersection"] == 0
                   and rep_inc["violations_trimmed_in_smoothed"] == 0))
    checks.append(("lens-curvature", rep_cur["min_margin"] >= -1e-6))

    a0, b0 = 0.1, np.pi - 0.1
    nn = 129
    xs = np.linspace(a0, b0, nn)
    exact = lambda x, t: t - np.log(np.sin(x))
    res = solve_interval(exact(xs, 0.0),
                         lambda t: (float(exact(a0, t)), float(exact(b0, t))),
                         a=a0, b=b0, n=nn, t_end=0.05, n_frames=6)
    err = residual(exact, res)
    checks.append(("translator-exactness", err <= 5e-3))

    vres = solve_interval(0.05 + 0.30 * np.exp(-8.0 * np.linspace(-1, 1, 161) ** 2),
                          lambda t: (0.05, 0.05), a=-1.0, b=1.0, n=161,
                          t_end=0.2, n_frames=21)
    up, _dn, info = sup_barrier(vres, s=0.5, sup_data=0.05)
    pts = np.column_stack([rng.uniform(-0.9, 0.9, 400),
                           rng.uniform(-0.45, 0.45, 400)])
    worst = np.inf
    for t in np.linspace(0.01, 0.19, 7):
        ok = np.asarray(up.valid(pts, t), dtype=bool)
        if ok.any():
            worst = min(worst, float(np.min(info["residual_fn"](pts[ok], t))))
    checks.append(("cap-barrier-residual", worst >= 0.0))

    lines = ["verify battery (%d checks)" % len(checks)]
    for name, ok in checks:
        lines.append("%-24s %s" % (name, "pass" if ok else "FAIL"))
    all_ok = all(ok for _, ok in checks)
    lines.append("verdict: %s" % ("pass" if all_ok else "FAIL"))
    _write_text(os.path.join(outdir, "verify_report.txt"), lines)
    return (EXIT_OK if all_ok else EXIT_VALIDATION), ["verify_report.txt"]


_DISPATCH = {"smooth": _cmd_smooth, "flow": _cmd_flow, "cascade": _cmd_cascade,
             "shadow": _cmd_shadow, "verify": _cmd_verify}


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="gmcf",
        description="graphical mean curvature flow laboratory")
    ap.add_argument("subcommand", choices=list(_DISPATCH))
    ap.add_argument("--config", required=True, help="path to the INI config")
    ap.add_argument("--out", default=None, help="output directory (overrides config)")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads (GMCF_THREADS is the fallback)")
    ap.add_argument("--seed", type=int, default=None,
                    help="RNG seed (overrides config)")
    args = ap.parse_args(argv)

    t0 = time.time()
    try:
        cfg = parse_config_file(args.config, subcommand=args.subcommand)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print("cannot read config: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG

    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    env_threads = os.environ.get("GMCF_THREADS")
    if args.threads is not None:
        cfg.threads = args.threads
    elif env_threads is not None:
        try:
            cfg.threads = max(1, int(env_threads))
        except ValueError:
            print("ignoring malformed GMCF_THREADS=%r" % env_threads,
                  file=sys.stderr)

    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)

    try:
        code, outputs = _DISPATCH[cfg.subcommand](cfg.params, outdir, rng)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except FeasibilityError as exc:
        print("infeasible parameters: %s" % exc, file=sys.stderr)
        return EXIT_FEASIBILITY
    except DegenerateLevelSetError as exc:
        print("degenerate level set: %s" % exc, file=sys.stderr)
        return EXIT_DEGENERATE
    except ProbeError as exc:
        print("inadmissible probe: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, KeyError) as exc:
        print("validation failure: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:              # noqa: BLE001 - mapped to exit 1
        print("unexpected error: %r" % exc, file=sys.stderr)
        return EXIT_UNEXPECTED

    canon = serialize_config(cfg)
    manifest = {
        "subcommand": cfg.subcommand,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "config": canon,
        "versions": {
            "artifact": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "wall_time_s": round(time.time() - t0, 3),
        "exit_code": code,
        "outputs": [{"name": name,
                     "sha256": _sha256_file(os.path.join(outdir, name)),
                     "bytes": os.path.getsize(os.path.join(outdir, name))}
                    for name in outputs],
    }
    try:
        import scipy
        manifest["versions"]["scipy"] = scipy.__version__
    except Exception:
        pass
    try:
        import numba
        manifest["versions"]["numba"] = numba.__version__
    except Exception:
        pass
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())

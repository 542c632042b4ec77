"""gevrey: command-line entry point.

Commands: seq-audit, decomp, fdb, lemma23, fit, wf-scan, parametrix,
catalog.  Reports are JSON with sorted keys and embed the full run
configuration, so identical configurations give byte-identical output.
Exit status: 0 success, 1 validation failure, 2 I/O error.
GEVREY_THREADS overrides the worker pool for scans.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .faadibruno import lemma23_constant_search
from .funcspec import parse_spec
from .jets import jet_compose, jet_of, jet_partial
from .multiindex import decomposition_census, enumerate_decompositions
from .regularity import DerivativeGrowthData, fit_regularity
from .schemas import schema_id
from .sequences import DefiningSequence, audit_sequence
from .wavefront import (
    GridField,
    ScanParams,
    catalog_field,
    default_cutoff_radius,
    read_gridfield,
    wf_scan,
    write_gridfield,
)

# documented numerical defaults
TOL_IDENTITY = 1e-8
TOL_EXACT = 1e-12
FIT_MARGIN = 0.05


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); map to validation failure
        raise _CliError(message)


def _report(command: str, params: dict, result: dict, seed: int, out: str | None) -> None:
    doc = {
        "schema": schema_id(command),
        "config": {
            "command": command,
            "parameters": params,
            "seed": seed,
            "version": __version__,
        },
        "result": result,
    }
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(","))


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(","))


def _cmd_seq_audit(args, seed: int) -> None:
    seq = DefiningSequence(args.tau, args.sigma)
    rep = audit_sequence(seq, args.pmax)
    _report(
        "seq-audit",
        {"tau": args.tau, "sigma": args.sigma, "pmax": args.pmax},
        rep.to_dict(),
        seed,
        args.out,
    )


def _cmd_decomp(args, seed: int) -> None:
    alpha = _parse_ints(args.alpha)
    if args.census:
        count, bound, ok = decomposition_census(alpha)
        result = {"alpha": list(alpha), "count": count, "bound": bound, "ok": ok}
        decs = None
    else:
        decs = [
            {
                "parts": [list(p) for p in d.parts],
                "multiplicities": list(d.multiplicities),
            }
            for d in enumerate_decompositions(alpha)
        ]
        result = {"alpha": list(alpha), "decompositions": decs}
    if args.out is None and decs is not None:
        # streamed form: one JSON object per decomposition
        for d in decs:
            sys.stdout.write(json.dumps(d, sort_keys=True) + "\n")
        return
    _report(
        "decomp",
        {"alpha": list(alpha), "census": bool(args.census)},
        result,
        seed,
        args.out,
    )


def _cmd_fdb(args, seed: int) -> None:
    from .faadibruno import fdb_derivative

    f = parse_spec(args.f)
    g = parse_spec(args.g)
    alpha = _parse_ints(args.alpha)
    at = _parse_floats(args.at)
    value = fdb_derivative(f, g, alpha, at)
    result: dict = {"value": float(value)}
    if args.check_jet:
        n = sum(alpha)
        gj = jet_of(g, at, n)
        fj = jet_of(f, (gj.value,), n)
        oracle = jet_partial(jet_compose(fj, gj), alpha)
        result["jet_value"] = float(oracle)
        denom = max(abs(float(oracle)), 1.0)
        result["jet_agrees"] = abs(float(value) - float(oracle)) / denom <= 1e-9
    _report(
        "fdb",
        {"f": args.f, "g": args.g, "alpha": list(alpha), "at": list(at),
         "check_jet": bool(args.check_jet)},
        result,
        seed,
        args.out,
    )


def _cmd_lemma23(args, seed: int) -> None:
    seq = DefiningSequence(args.tau, args.sigma)
    fit = lemma23_constant_search(seq, args.kmax)
    _report(
        "lemma23",
        {"tau": args.tau, "sigma": args.sigma, "kmax": args.kmax},
        {
            "C": fit.C,
            "k_max": fit.k_max,
            "witness_k": fit.witness_k,
            "witness_parts": list(fit.witness_parts),
        },
        seed,
        args.out,
    )


def _cmd_fit(args, seed: int) -> None:
    rows: list[tuple[int, float]] = []
    with open(args.data) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("n,"):
                continue
            n_s, v_s = line.split(",")
            rows.append((int(n_s), float(v_s)))
    rows.sort()
    entries = tuple(v for _, v in rows)
    data = DerivativeGrowthData(entries, source="measured-on-grid")
    grid = _parse_floats(args.sigma_grid)
    fit = fit_regularity(data, list(grid), margin=FIT_MARGIN)
    _report(
        "fit",
        {"data": args.data, "sigma_grid": list(grid)},
        {
            "tau_hat": fit.tau_hat,
            "sigma_hat": fit.sigma_hat,
            "h_hat": fit.h_hat,
            "A_hat": fit.A_hat,
            "admissible": fit.admissible,
            "degenerate": fit.degenerate,
            "residuals": list(fit.residuals),
        },
        seed,
        args.out,
    )


def _parse_points(text: str, field: GridField) -> list[tuple[float, ...]]:
    if os.path.exists(text):
        pts = []
        with open(text) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    pts.append(_parse_floats(line))
        return pts
    if text == "grid":
        # coarse interior lattice with room for the cutoff support
        pts = []
        for i in range(field.dim):
            lo = field.origin[i] + 0.3 * field.spacing[i] * field.sizes[i]
            hi = field.origin[i] + 0.7 * field.spacing[i] * field.sizes[i]
            pts.append(np.linspace(lo, hi, 3))
        mesh = np.meshgrid(*pts, indexing="ij")
        return [tuple(float(m[idx]) for m in mesh) for idx in np.ndindex(mesh[0].shape)]
    return [_parse_floats(chunk) for chunk in text.split(";")]


def _cmd_wf_scan(args, seed: int) -> None:
    field = read_gridfield(args.field)
    points = _parse_points(args.points, field)
    extent = min(
        field.spacing[i] * (field.sizes[i] - 1) for i in range(field.dim)
    )
    rs = args.rs if args.rs is not None else min(
        default_cutoff_radius(args.tau, args.sigma), 0.2 * extent
    )
    rp = args.rp if args.rp is not None else 0.4 * rs
    dxi = max(1.0 / (n * s) for n, s in zip(field.sizes, field.spacing))
    xi_min = args.ximin if args.ximin is not None else 5.0 * dxi
    params = ScanParams(
        r_plateau=rp, r_support=rs, xi_min=xi_min, N_max=args.nmax
    )
    # pool size: env override > flag > available cores
    threads = int(
        os.environ.get("GEVREY_THREADS", args.threads or os.cpu_count() or 1)
    )
    verdicts = wf_scan(field, points, args.dirs, args.tau, args.sigma, params, threads)
    if args.csv:
        # plot-ready decay profiles: point; direction; N; log_value
        from .wavefront import Cone, directional_decay_profile, make_cutoff, scan_directions

        with open(args.csv, "w") as fh:
            fh.write("point;direction;N;log_value\n")
            dirs = scan_directions(field.dim, args.dirs)
            half = math.pi / 4 if field.dim == 1 else math.pi / len(dirs)
            for pt in points:
                try:
                    phi = make_cutoff(tuple(pt), rp, rs, field)
                except ValueError:
                    continue
                for d in dirs:
                    prof = directional_decay_profile(
                        field, phi, Cone(d, half, xi_min), args.nmax
                    )
                    p_s = ",".join(repr(c) for c in pt)
                    d_s = ",".join(repr(c) for c in d)
                    for N, v in enumerate(prof.entries):
                        fh.write(f"{p_s};{d_s};{N};{v!r}\n")
    _report(
        "wf-scan",
        {
            "field": args.field,
            "points": args.points,
            "dirs": args.dirs,
            "tau": args.tau,
            "sigma": args.sigma,
            "r_plateau": rp,
            "r_support": rs,
            "xi_min": xi_min,
            "N_max": args.nmax,
        },
        {"verdicts": [v.to_dict() for v in verdicts]},
        seed,
        args.out,
    )


def _cmd_parametrix(args, seed: int) -> None:
    from .parametrix import (
        bound_audit,
        build_reduction_operators,
        neumann_sums,
        parse_operator,
        residual_identity_check,
        word_count_recurrence,
    )
    from .wavefront import make_cutoff

    P = parse_operator(args.op)
    system = build_reduction_operators(P)
    dir_s, angle_s, ximin_s = args.cone.split(",")
    xi_lo = max(float(ximin_s), 4.0)
    xis = [float(v) for v in np.geomspace(xi_lo, max(16.0 * xi_lo, 64.0), 33)]
    if float(dir_s) < 0:
        xis = [-v for v in xis]
    x0, rp, rs = _parse_floats(args.phi)
    n = args.grid
    spacing = 2.0 / n
    grid = GridField(1, (n,), (-1.0,), (spacing,), np.zeros(n))
    phi = make_cutoff((x0,), rp, rs, grid)
    sums = neumann_sums(system, phi, args.N, xi_samples=xis, fd_order_max=args.beta_max)
    residual = residual_identity_check(sums)
    audit = bound_audit(sums, beta_max=args.beta_max, tau=args.tau, sigma=args.sigma)
    expected = sum(word_count_recurrence(P.order, v) for v in range(0, args.N - P.order + 1))
    result = {
        "max_residual": residual.to_real(),
        "residual_ok": residual.to_real() <= TOL_IDENTITY,
        "word_count_w": len(sums.w_words),
        "word_count_e": len(sums.e_words),
        "word_count_matches_recurrence": len(sums.w_words) == expected,
        "K1": sums.K1,
        "K2": sums.K2,
        "identity_residual_probe": system.identity_residual,
        "audit_ok": audit.ok(),
        "coefficient_violations": audit.coefficient_violations,
        "word_violations": audit.word_violations,
        "homogeneity_max_error": audit.homogeneity_max_error,
        "leibniz_terms_checked": audit.leibniz_terms_checked,
        "leibniz_violations": audit.leibniz_violations,
    }
    _report(
        "parametrix",
        {
            "op": args.op,
            "N": args.N,
            "cone": args.cone,
            "phi": args.phi,
            "grid": args.grid,
            "tau": args.tau,
            "sigma": args.sigma,
            "beta_max": args.beta_max,
        },
        result,
        seed,
        args.out,
    )


def _cmd_catalog(args, seed: int) -> None:
    os.makedirs(args.out_dir, exist_ok=True)
    files = []
    for name in ("delta", "bump", "step2d", "kink"):
        gf = catalog_field(name)
        path = os.path.join(args.out_dir, f"{name}.gf")
        write_gridfield(gf, path)
        files.append(f"{name}.gf")
    _report(
        "catalog",
        {"out_dir": args.out_dir},
        {"files": files},
        seed,
        args.report,
    )


def build_parser() -> _Parser:
    p = _Parser(prog="gevrey", description=__doc__)
    p.add_argument("--seed", type=int, default=0, help="seed echoed into reports")
    sub = p.add_subparsers(dest="command", required=True)

    sa = sub.add_parser("seq-audit", help="audit a defining sequence")
    sa.add_argument("--tau", type=float, required=True)
    sa.add_argument("--sigma", type=float, required=True)
    sa.add_argument("--pmax", type=int, default=40)
    sa.add_argument("--out", default=None)

    dc = sub.add_parser("decomp", help="decompositions of a multi-index")
    dc.add_argument("--alpha", required=True, help="a1,..,ad")
    dc.add_argument("--census", action="store_true")
    dc.add_argument("--out", default=None)

    fd = sub.add_parser("fdb", help="derivative of a composition")
    fd.add_argument("--f", required=True)
    fd.add_argument("--g", required=True)
    fd.add_argument("--alpha", required=True)
    fd.add_argument("--at", required=True)
    fd.add_argument("--check-jet", action="store_true")
    fd.add_argument("--out", default=None)

    lm = sub.add_parser("lemma23", help="fit the splitting constant")
    lm.add_argument("--tau", type=float, required=True)
    lm.add_argument("--sigma", type=float, required=True)
    lm.add_argument("--kmax", type=int, default=12)
    lm.add_argument("--out", default=None)

    ft = sub.add_parser("fit", help="fit regularity parameters from growth data")
    ft.add_argument("--data", required=True, help="csv rows n,log_sup_abs_derivative")
    ft.add_argument("--sigma-grid", default="1.5,2,2.5,3")
    ft.add_argument("--out", default=None)

    wf = sub.add_parser("wf-scan", help="wave-front scan of a grid field")
    wf.add_argument("--field", required=True)
    wf.add_argument("--points", required=True, help="file | grid | x1,y1;x2,y2")
    wf.add_argument("--dirs", type=int, default=16)
    wf.add_argument("--tau", type=float, required=True)
    wf.add_argument("--sigma", type=float, required=True)
    wf.add_argument("--rp", type=float, default=None)
    wf.add_argument("--rs", type=float, default=None)
    wf.add_argument("--ximin", type=float, default=None)
    wf.add_argument("--nmax", type=int, default=40)
    wf.add_argument("--csv", default=None, help="also write decay profiles as CSV")
    wf.add_argument("--threads", type=int, default=None,
                    help="worker pool size (GEVREY_THREADS overrides)")
    wf.add_argument("--out", default=None)

    pm = sub.add_parser("parametrix", help="build and audit Neumann sums")
    pm.add_argument("--op", required=True, help="e.g. 'D^2 + sin*D + poly:1'")
    pm.add_argument("--N", type=int, default=8)
    pm.add_argument("--cone", default="1,0.4,4", help="dir,angle,ximin")
    pm.add_argument("--phi", default="0,0.15,0.4", help="x0,rp,rs")
    pm.add_argument("--grid", type=int, default=256)
    pm.add_argument("--tau", type=float, default=1.0)
    pm.add_argument("--sigma", type=float, default=2.0)
    pm.add_argument("--beta-max", type=int, default=4)
    pm.add_argument("--out", default=None)

    ct = sub.add_parser("catalog", help="emit the built-in test fields")
    ct.add_argument("--out", dest="out_dir", required=True)
    ct.add_argument("--report", default=None)
    return p


_DISPATCH = {
    "seq-audit": _cmd_seq_audit,
    "decomp": _cmd_decomp,
    "fdb": _cmd_fdb,
    "lemma23": _cmd_lemma23,
    "fit": _cmd_fit,
    "wf-scan": _cmd_wf_scan,
    "parametrix": _cmd_parametrix,
    "catalog": _cmd_catalog,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _DISPATCH[args.command](args, args.seed)
        return 0
    except _CliError as exc:
        sys.stderr.write(f"gevrey: {exc}\n")
        return 1
    except (ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(f"gevrey: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"gevrey: i/o error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

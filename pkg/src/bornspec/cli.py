"""Command-line entry point: ``bornspec <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure or failed
verification.
"""

import argparse
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
import sys
import time

import numpy as np
from threadpoolctl import threadpool_limits

from . import assembly, bounds, geometry, io, spectral, surface
from .errors import NumericalError, VoxelFileError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _float_list(text):
    try:
        return [float(parse_fraction(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_fraction(token):
    """Parse '0.125' or '1/8'."""
    token = token.strip()
    if "/" in token:
        num, den = token.split("/", 1)
        return float(num) / float(den)
    return float(token)


def _add_common(p):
    p.add_argument("--out", type=Path, default=Path("bornspec-run"), help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="cap on BLAS/LAPACK worker threads")
    p.add_argument("--memory-cap", type=int, default=None,
                   help=f"dense assembly cap in bytes (default ${assembly.MEMORY_CAP_ENV} or 8 GiB)")
    p.add_argument("--emit-plot-data", action="store_true", help="also write x/y CSV files for plotting")


def _add_shape(p, need_h=True):
    p.add_argument("--shape", choices=geometry.SHAPES, default="sphere")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--axes", type=float, nargs=3, metavar=("A", "B", "C"))
    p.add_argument("--sides", type=float, nargs=3, metavar=("LX", "LY", "LZ"))
    p.add_argument("--file", type=Path, help="voxel list for --shape file")
    if need_h:
        p.add_argument("--h", type=parse_fraction, required=True, help="lattice pitch, e.g. 0.125 or 1/8")


def _add_thresholds(p):
    t = spectral.Thresholds()
    p.add_argument("--tau0-rel", type=float, default=t.tau0_rel, help="null threshold relative to ||A||")
    p.add_argument("--tau-div", type=float, default=t.tau_div, help="divergence-ratio threshold")
    p.add_argument("--tau-im", type=float, default=t.tau_im, help="tolerance on Im(lambda) > 0")
    p.add_argument("--eps-accum", type=float, default=t.eps_accum, help="accumulation radius around 0 and -1/2")
    p.add_argument("--longitudinal-radius", type=float, default=t.longitudinal_radius)


def _add_basis(p):
    p.add_argument("--basis", choices=("auto",) + spectral.divfree.METHODS, default="auto")
    p.add_argument("--degree", type=int, default=None, help="basis degree (default: lattice limit)")


def build_parser():
    parser = _Parser(prog="bornspec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="compressed spectrum and spectral series")
    _add_shape(p)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--kind", choices=("static", "gamma", "green"), default="green")
    _add_basis(p)
    _add_thresholds(p)
    p.add_argument("--dump-matrix", action="store_true", help="write operator.bspc and compressed.bspc")
    _add_common(p)

    p = sub.add_parser("solve", help="Born solve for an incident plane wave")
    _add_shape(p)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--chi", type=_complex, required=True, help="susceptibility, e.g. 1 or -2+0.1j")
    p.add_argument("--direction", type=float, nargs=3, default=[0.0, 0.0, 1.0])
    p.add_argument("--polarization", type=_complex, nargs=3, default=[1.0, 0.0, 0.0])
    p.add_argument("--amplitude", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("bounds", help="norm bounds and the I[V] functional")
    _add_shape(p)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--fourier-samples", type=int, default=0, help="Monte-Carlo samples for the Fourier cross-check")
    p.add_argument("--surface-subdiv", type=int, default=None,
                   help="icosphere level for the surface term of the series bound (sphere only)")
    p.add_argument("--no-discrete", action="store_true", help="skip assembling the dynamic correction matrix")
    _add_common(p)

    p = sub.add_parser("mie-verify", help="compare compressed static clusters with -l/(2l+1)")
    p.add_argument("--lmax", type=int, default=6)
    p.add_argument("--h", type=parse_fraction, default=0.1)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--check-lmax", type=int, default=3, help="degrees that must match for exit 0")
    _add_common(p)

    p = sub.add_parser("surface-hs", help="trace(M^4) on a triangulated boundary")
    p.add_argument("--shape", choices=("sphere", "ellipsoid"), default="sphere")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--axes", type=float, nargs=3, metavar=("A", "B", "C"))
    p.add_argument("--subdiv", type=int, default=3)
    _add_common(p)

    p = sub.add_parser("convergence", help="norms and series over several lattice pitches")
    _add_shape(p, need_h=False)
    p.add_argument("--hs", type=_float_list, required=True, help="comma-separated pitches, e.g. 1/5,1/7,1/9")
    p.add_argument("--k", type=float, default=0.0)
    _add_basis(p)
    _add_thresholds(p)
    _add_common(p)
    return parser


def _shape_spec(args):
    if args.shape == "sphere":
        return {"shape": "sphere", "radius": args.radius}
    if args.shape == "ellipsoid":
        if args.axes is None:
            raise ValueError("--axes is required for an ellipsoid")
        return {"shape": "ellipsoid", "axes": args.axes}
    if args.shape == "box":
        if args.sides is None:
            raise ValueError("--sides is required for a box")
        return {"shape": "box", "sides": args.sides}
    if args.file is None:
        raise ValueError("--file is required for --shape file")
    return {"shape": "file", "path": args.file}


def _thresholds(args):
    return spectral.Thresholds(args.tau0_rel, args.tau_div, args.tau_im, args.eps_accum, args.longitudinal_radius)


def _write_config(args):
    args.out.mkdir(parents=True, exist_ok=True)
    cfg = {key: val for key, val in vars(args).items() if key != "func"}
    cfg["memory_cap_bytes"] = assembly.memory_cap_bytes(args.memory_cap)
    cfg["version"] = _version()
    io.write_json(args.out / "config.json", cfg)


def _say(msg):
    print(msg, flush=True)


def cmd_spectrum(args):
    geom = geometry.voxelize(_shape_spec(args), args.h)
    thr = _thresholds(args)
    an = spectral.analyze(geom, args.k, args.kind, args.basis, args.degree, thr, memory_cap=args.memory_cap)
    spec = an.spectrum
    io.write_spectrum_csv(args.out / "spectrum.csv", spec)
    n_viol, max_im = spectral.im_violations(spec, thr.tau_im)
    report = an.series.to_dict()
    report.update(
        n_voxels=geom.n_voxels, basis=an.basis.method, basis_dim=an.basis.dim, degree=an.basis.degree,
        label_counts=spec.label_counts(), accumulation=spectral.accumulation_report(spec, thr.eps_accum),
        im_violations=n_viol, max_physical_im=max_im, r_v=geom.r_v, volume=geom.total_volume,
    )
    io.write_json(args.out / "series.json", report)
    if args.dump_matrix:
        assembly.dump_matrix(an.operator, args.out / "operator.bspc")
        assembly.dump_matrix(an.compressed, args.out / "compressed.bspc")
    if args.emit_plot_data:
        io.write_rows(args.out / "plot_spectrum.csv", ["x", "y"],
                      ((float(z.real), float(z.imag)) for z in spec.eigenvalues))
    _say(f"{geom.n_voxels} voxels, basis {an.basis.method} dim {an.basis.dim}: "
         f"S={an.series.series_value:.6g} |A(I+2A)^2|_F={an.series.frob_G122:.6g} "
         f"Im>tau violations={n_viol}")
    return EXIT_OK


def cmd_solve(args):
    geom = geometry.voxelize(_shape_spec(args), args.h)
    kind = "static" if args.k == 0 else "green"
    G = assembly.assemble(geom, args.k, kind, memory_cap=args.memory_cap)
    inc = assembly.plane_wave(geom, args.k, args.direction, args.polarization, args.amplitude)
    sol = assembly.born_solve(G, args.chi, inc)
    E = sol.field.reshape(-1, 3)
    rows = (tuple(p) + tuple(v for c in e for v in (c.real, c.imag)) for p, e in zip(geom.voxel_centers, E))
    io.write_rows(args.out / "field.csv",
                  ["x", "y", "z", "ex_re", "ex_im", "ey_re", "ey_im", "ez_re", "ez_im"], rows)
    io.write_json(args.out / "solve.json", {
        "n_voxels": geom.n_voxels, "chi": args.chi, "amplification_ratio": sol.amplification_ratio,
        "condition_estimate_1norm": sol.condition_estimate, "relative_residual": sol.residual,
        "mean_field": E.mean(axis=0),
    })
    if args.emit_plot_data:
        io.write_rows(args.out / "plot_field.csv", ["x", "y"],
                      ((float(p[2]), float(np.linalg.norm(e))) for p, e in zip(geom.voxel_centers, E)))
    _say(f"amplification ratio {sol.amplification_ratio:.6g}, condition estimate {sol.condition_estimate:.3e}")
    return EXIT_OK


def cmd_bounds(args):
    geom = geometry.voxelize(_shape_spec(args), args.h)
    disc = None
    if args.k > 0 and not args.no_discrete:
        disc = assembly.frobenius_norm(assembly.assemble(geom, args.k, "gamma", memory_cap=args.memory_cap))
    surf = None
    if args.surface_subdiv is not None:
        if args.shape != "sphere":
            raise ValueError("--surface-subdiv is only available for spheres")
        mesh = geometry.icosphere_mesh(args.radius, args.surface_subdiv)
        surf = surface.hs_trace4(surface.assemble_surface_matrix(mesh)).trace4_value
    rep = bounds.bounds_report(geom, args.k, discrete_gamma_hs=disc, surface_hs_value=surf,
                               fourier_samples=args.fourier_samples or None, seed=args.seed)
    out = rep.to_dict()
    out["inputs"] = {"shape": _shape_spec(args), "h": args.h, "k": args.k, "n_voxels": geom.n_voxels}
    io.write_json(args.out / "bounds.json", out)
    _say(f"im_bound={rep.im_bound:.6g} gamma_hs_bound={rep.gamma_hs_bound:.6g} "
         f"i_direct={rep.i_direct:.6g} i_hls={rep.i_hls:.6g}")
    return EXIT_OK


def cmd_mie_verify(args):
    geom = geometry.voxelize({"shape": "sphere", "radius": args.radius}, args.h)
    an = spectral.analyze(geom, 0.0, "static", "harmonic", args.lmax, memory_cap=args.memory_cap)
    clusters = spectral.mie_clusters(an.spectrum, args.lmax, args.tol)
    header = ["l", "target", "count", "expected_count", "centroid", "rel_error", "max_member_error"]
    rows = [(c.l, c.target, c.count, 2 * c.l + 1, c.centroid, c.rel_error, c.max_member_error) for c in clusters]
    io.write_rows(args.out / "mie_table.csv", header, rows)
    _say(f"{geom.n_voxels} voxels, harmonic basis to degree {args.lmax}")
    _say(f"{'l':>2} {'target':>10} {'count':>5} {'centroid':>10} {'rel_err':>8} {'member_max':>10}")
    ok = True
    for c in clusters:
        _say(f"{c.l:>2} {c.target:>10.6f} {c.count:>5} {c.centroid:>10.6f} {c.rel_error:>8.4f} {c.max_member_error:>10.4f}")
        if c.l <= args.check_lmax:
            ok &= c.count == 2 * c.l + 1 and c.rel_error <= args.tol
    if args.emit_plot_data:
        io.write_rows(args.out / "plot_mie.csv", ["x", "y"], ((float(c.l), c.centroid) for c in clusters))
    _say("clusters match" if ok else f"cluster mismatch for l <= {args.check_lmax}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_surface_hs(args):
    if args.shape == "sphere":
        mesh = geometry.icosphere_mesh(args.radius, args.subdiv)
    else:
        if args.axes is None:
            raise ValueError("--axes is required for an ellipsoid")
        mesh = geometry.ellipsoid_mesh(args.axes, args.subdiv)
    rep = surface.hs_trace4(surface.assemble_surface_matrix(mesh), sphere=args.shape == "sphere")
    out = {"panel_count": rep.panel_count, "trace4_value": rep.trace4_value,
           "oracle_value": rep.oracle_value, "rel_error": rep.rel_error,
           "self_term_policy": rep.self_term_policy, "total_area": mesh.total_area}
    io.write_json(args.out / "surface_report.json", out)
    _say(f"{rep.panel_count} panels: trace(M^4) = {rep.trace4_value:.6g}"
         + (f" (oracle {rep.oracle_value:.6g}, rel. error {rep.rel_error:.3%})" if rep.oracle_value else ""))
    return EXIT_OK


def cmd_convergence(args):
    thr = _thresholds(args)
    header = ["h", "n_voxels", "basis_dim", "frob_G1", "frob_G12", "frob_G122", "series", "schur_ratio",
              "im_violations", "i_direct"]
    if args.k > 0:
        header += ["frob_acoustic", "frob_green_full"]
    rows = []
    for h in args.hs:
        t0 = time.time()
        geom = geometry.voxelize(_shape_spec(args), h)
        an = spectral.analyze(geom, args.k, "green", args.basis, args.degree, thr, memory_cap=args.memory_cap)
        s = an.series
        row = [h, geom.n_voxels, an.basis.dim, s.frob_G1, s.frob_G12, s.frob_G122, s.series_value,
               s.schur_ratio, spectral.im_violations(an.spectrum, thr.tau_im)[0], bounds.i_functional_direct(geom)]
        if args.k > 0:
            row += [assembly.streamed_frobenius(geom, args.k, "acoustic"),
                    assembly.streamed_frobenius(geom, args.k, "green")]
        rows.append(row)
        _say(" ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in zip(header, row))
             + f" ({time.time() - t0:.1f}s)")
    io.write_rows(args.out / "convergence.csv", header, rows)
    io.write_json(args.out / "convergence.json", [dict(zip(header, r)) for r in rows])
    if args.emit_plot_data:
        io.write_rows(args.out / "plot_convergence.csv", ["x", "y"], ((r[0], r[5]) for r in rows))
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "bounds": cmd_bounds,
    "mie-verify": cmd_mie_verify,
    "surface-hs": cmd_surface_hs,
    "convergence": cmd_convergence,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads is not None and args.threads < 1:
            raise ValueError("--threads must be >= 1")
        _write_config(args)
        with threadpool_limits(limits=args.threads):
            return COMMANDS[args.command](args)
    except (ValueError, VoxelFileError) as exc:
        print(f"bornspec: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"bornspec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

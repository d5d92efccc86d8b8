"""Command line interface: ``specpoly {gen-graph,estimate-cdf,approx,bench}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, polyfun
from .densest import estimate_cdf
from .krylov import lanczos_fAb
from .matcore import gen_erdos_renyi_laplacian, save_matrix_market

log = logging.getLogger("specpoly")


def parse_degrees(text: str) -> list[int]:
    """``"3..25"``, ``"3,5,10"`` or a mix such as ``"3..6,10"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no degrees in {text!r}")
    return out


def _add_matrix_args(p):
    src = p.add_argument_group("matrix")
    src.add_argument("--matrix", help="Matrix Market file (symmetric, or the file for a file-backed preset)")
    src.add_argument("--preset", choices=sorted(bench.PRESETS), help="named matrix recipe")
    src.add_argument("--scale", type=float, default=1.0, help="multiply the matrix by this factor")
    src.add_argument("--seed", type=int, default=0, help="seed for generators and probe vectors")


def _add_density_args(p):
    g = p.add_argument_group("spectral density")
    g.add_argument("--T", type=int, default=10, help="number of count thresholds")
    g.add_argument("--J", type=int, default=10, help="number of probe vectors")
    g.add_argument("--ktheta", type=int, default=30, help="degree of the damped step filters")
    g.add_argument(
        "--bounds",
        default="lanczos",
        help="spectral interval: 'lanczos' (estimated), 'oracle' (dense eigenvalues) or 'lo,hi'",
    )
    g.add_argument("--cdf-cache", help="JSON file to reuse (or store) the fitted CDF")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specpoly", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-graph", help="write an Erdos-Renyi graph Laplacian as Matrix Market")
    g.add_argument("--n", type=int, default=500)
    g.add_argument("--p", type=float, default=0.2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output .mtx path")

    e = sub.add_parser("estimate-cdf", help="estimate the spectral CDF and write it as JSON")
    _add_matrix_args(e)
    _add_density_args(e)
    e.add_argument("--out", help="output JSON path (defaults to --cdf-cache)")

    a = sub.add_parser("approx", help="approximate f(A)b for a single method and degree")
    _add_matrix_args(a)
    _add_density_args(a)
    a.add_argument("--method", choices=bench.METHODS, default="ls")
    a.add_argument("--K", type=int, default=10)
    a.add_argument("--fn", default="exp-neg", choices=sorted(bench.FUNCTIONS))
    a.add_argument("--M", type=int, default=2000)
    a.add_argument("--b", choices=("ones", "random", "spectral-ones"), default="ones")
    a.add_argument("--out", required=True, help="output vector file (one value per line)")
    a.add_argument("--save-approximant", help="write the polynomial as JSON")
    a.add_argument("--check", action="store_true", help="report the error against the exact oracle")

    b = sub.add_parser("bench", help="run the full method comparison and write CSV + figures")
    _add_matrix_args(b)
    _add_density_args(b)
    b.add_argument("--fn", default="exp-neg", choices=sorted(bench.FUNCTIONS))
    b.add_argument("--degrees", type=parse_degrees, default=list(range(3, 26)))
    b.add_argument("--M", type=int, default=2000)
    b.add_argument("--eig-K", type=int, default=10, help="degree for the per-eigenvalue error table")
    b.add_argument("--no-reorth", action="store_true", help="plain Lanczos without reorthogonalization")
    b.add_argument("--no-figures", action="store_true")
    b.add_argument("--no-timing", action="store_true", help="leave wall_ms empty (byte-stable output)")
    b.add_argument("--out", required=True, help="output directory")
    return parser


def _matrix(args):
    if args.preset is None and args.matrix is None:
        raise SystemExit("error: one of --matrix or --preset is required")
    return bench.build_matrix(args.preset, args.matrix, args.scale, args.seed)


def _cfg_from(args, **extra) -> bench.ExperimentConfig:
    return bench.ExperimentConfig(
        preset=args.preset,
        matrix=args.matrix,
        scale=args.scale,
        seed=args.seed,
        T=args.T,
        J=args.J,
        K_theta=args.ktheta,
        bounds=args.bounds,
        cdf_cache=args.cdf_cache,
        **extra,
    )


def cmd_gen_graph(args) -> int:
    A = gen_erdos_renyi_laplacian(args.n, args.p, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_matrix_market(out, A, comment=f"G(n={args.n}, p={args.p}) Laplacian, seed {args.seed}")
    print(f"wrote {out} (n={A.n}, nnz={A.nnz})")
    return 0


def cmd_estimate_cdf(args) -> int:
    out = args.out or args.cdf_cache
    if not out:
        raise SystemExit("error: --out or --cdf-cache is required")
    A = _matrix(args)
    cfg = _cfg_from(args)
    lam = np.linalg.eigvalsh(A.to_dense()) if args.bounds == "oracle" else None
    interval = bench.resolve_interval(cfg, A, lam)
    cdf = estimate_cdf(A, interval, T=args.T, J=args.J, K_theta=args.ktheta, seed=args.seed)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    cdf.save(out)
    print(f"wrote {out} (interval [{interval.lo:.6g}, {interval.hi:.6g}])")
    return 0


def cmd_approx(args) -> int:
    A = _matrix(args)
    f = bench.get_function(args.fn)
    cfg = _cfg_from(args, fn=args.fn, M=args.M)
    eig = None
    if args.b == "spectral-ones" or args.check or args.bounds == "oracle":
        eig = bench.dense_sym_eig(A)
    if args.b == "ones":
        b = np.ones(A.n)
    elif args.b == "random":
        b = np.random.default_rng(np.random.SeedSequence([args.seed, 1])).standard_normal(A.n)
    else:
        b = bench.make_b_spectral_ones(eig[0])

    counted = bench.CountingMatrix(A)
    p = None
    if args.method == "lanczos":
        y = lanczos_fAb(counted, b, args.K, f)
    else:
        interval = bench.resolve_interval(cfg, A, None if eig is None else eig[1])
        if args.method == "chebyshev":
            p = polyfun.cheby_truncated(f, interval, args.K)
        else:
            cdf = bench.load_or_estimate_cdf(cfg, A, interval)
            if args.method == "interp":
                p = polyfun.newton_interpolant(polyfun.warped_nodes(cdf, args.K), f)
            else:
                measure = polyfun.build_measure(cdf, interval, args.M)
                p = polyfun.ortho_expand(f, polyfun.stieltjes_basis(measure, args.K), args.K)
        y = p.apply(counted, b)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(out, y, fmt="%.17g")
    if args.save_approximant and p is not None:
        polyfun.save_approximant(args.save_approximant, p)
    msg = f"wrote {out} ({args.method}, K={args.K}, {counted.count} matvecs)"
    if args.check:
        exact = bench.exact_fAb(A, f, b, eig=eig)
        rel = float(np.sum((exact - y) ** 2) / np.sum(exact**2))
        msg += f", relative error {rel:.3e}"
    print(msg)
    return 0


def cmd_bench(args) -> int:
    if args.preset is None and args.matrix is None:
        raise SystemExit("error: one of --matrix or --preset is required")
    cfg = _cfg_from(
        args,
        fn=args.fn,
        degrees=args.degrees,
        M=args.M,
        eig_K=args.eig_K,
        reorth=not args.no_reorth,
        out=args.out,
        figures=not args.no_figures,
        record_timing=not args.no_timing,
    )
    result = bench.run_experiment(cfg)
    for r in result.rows:
        if r["K"] == result.eig_K:
            print(f"K={r['K']:>2} {r['method']:<10} rel_err={r['rel_err']:.3e} eig_max_err={r['eig_max_err']:.3e}")
    for path in result.files:
        print(f"wrote {path}")
    return 0


COMMANDS = {
    "gen-graph": cmd_gen_graph,
    "estimate-cdf": cmd_estimate_cdf,
    "approx": cmd_approx,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

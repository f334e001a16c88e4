"""Command-line entry point: ``sparse-rmt <command> ...``.

Exit codes: 0 success / verdict pass, 1 acceptance failure, 2 usage or
configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import charpoly, outliers, spectra, stieltjes
from .ensemble import EnsembleConfig, EntryLaw, deformation_matrix, sample_iid_matrix
from .errors import ConfigurationError, DomainError, NumericalError
from .formats import (
    complex_pair,
    parse_complex,
    read_deformation,
    read_matrix,
    write_matrix,
    write_singular_values,
    write_spectrum,
)
from .harness import ExperimentSpec, load_spec, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

MATRIX_FORMAT = "matrix file: first line 'n m', then n*m lines 're im' in row-major order"


def bundled_specs() -> list[str]:
    files = resources.files("sparse_rmt") / "specs"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def resolve_spec(name_or_path: str) -> ExperimentSpec:
    path = Path(name_or_path)
    if path.exists():
        return load_spec(path)
    ref = resources.files("sparse_rmt") / "specs" / f"{name_or_path}.json"
    if ref.is_file():
        with resources.as_file(ref) as p:
            return load_spec(p)
    raise ConfigurationError(f"no spec file or bundled spec named {name_or_path!r}; bundled: {', '.join(bundled_specs())}")


def _write_json(path, doc) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_gen(args) -> int:
    cfg = EnsembleConfig(args.n, args.k, EntryLaw.from_name(args.law), args.seed)
    x = sample_iid_matrix(cfg)
    write_matrix(args.out or sys.stdout, x)
    return EXIT_OK


def cmd_eig(args) -> int:
    s = spectra.eig(read_matrix(args.matrix))
    write_spectrum(args.out, s.values)
    print(f"n={s.source_dim} spectral_radius={spectra.spectral_radius(s)!r} backward_error={s.backward_error:.3e}")
    if s.flagged:
        print(f"warning: {s.diagnostic}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_svd(args) -> int:
    m = read_matrix(args.matrix)
    if args.xi is not None:
        m = m - parse_complex(args.xi) * np.eye(m.shape[0])
    sv = spectra.singular_values(m)
    write_singular_values(args.out, sv)
    print(f"s_max={float(sv[0])!r} s_min={float(sv[-1])!r}")
    return EXIT_OK


def cmd_outliers(args) -> int:
    x = read_matrix(args.matrix)
    defm = read_deformation(args.defm)
    if defm.n != x.shape[0]:
        raise ConfigurationError(f"deformation size {defm.n} does not match matrix size {x.shape[0]}")
    y = x + deformation_matrix(defm)
    rep = outliers.outlier_report(spectra.eig(y), defm.eigenvalues(), args.eps)
    doc = rep.to_dict()
    if defm.rank == 1 and args.overlap:
        (u, v), = defm.pairs
        doc["overlap"] = outliers.eigvec_overlap(y, u, v, rep.eps, x=x).to_dict()
    _write_json(args.out, doc)
    return EXIT_OK


def cmd_charpoly(args) -> int:
    m = read_matrix(args.matrix)
    order = m.shape[0] if args.order is None else args.order
    poly = charpoly.newton_charpoly(charpoly.trace_powers(m, max(order, 1)), order)
    lines = ["{!r} {!r}".format(*complex_pair(c)) for c in poly.coeffs]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stieltjes(args) -> int:
    xi_mod = math.sqrt(args.xi2)
    if args.curve:
        etas = np.logspace(math.log10(args.eta), 0, args.points)
        rows = ["eta,h,im_m_over_eta"]
        for eta in map(float, etas):
            sol = stieltjes.solve_m(1j * eta, xi_mod)
            rows.append(f"{eta!r},{stieltjes.h_eta(eta, xi_mod)!r},{sol.m.imag / eta!r}")
        Path(args.curve).write_text("\n".join(rows) + "\n")
    if args.support:
        _write_json(args.support, stieltjes.support_estimate(xi_mod).to_dict())
    sol = stieltjes.solve_m(1j * args.eta, xi_mod)
    print(f"eta={args.eta!r} m={complex_pair(sol.m)} im_m_over_eta={sol.m.imag / args.eta!r} "
          f"limit={1 / (args.xi2 - 1)!r} residual={sol.residual:.2e} iterations={sol.iterations}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = resolve_spec(args.spec)
    if args.seed is not None:
        spec.ensemble = spec.ensemble.with_seed(args.seed)
    if args.trials is not None:
        spec.trials = args.trials
    out = Path(args.out) if args.out else Path(spec.name)
    report, _ = run(spec, workers=args.workers, out_dir=out)
    for line in report.summary_lines():
        print(line)
    print(f"outputs written to {out}/")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_list(args) -> int:
    for name in bundled_specs():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparse-rmt", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a sparse i.i.d. matrix X = B*A/sqrt(K)",
                       description=f"Sample X with entries B_ij A_ij / sqrt(k), B ~ Bernoulli(k/n). "
                                   f"Writes a {MATRIX_FORMAT}.")
    g.add_argument("--n", type=int, required=True, help="matrix dimension")
    g.add_argument("--k", type=int, required=True, help="sparsity parameter, 1 <= k <= n")
    g.add_argument("--law", required=True, help="real_gaussian | complex_gaussian | rademacher | uniform")
    g.add_argument("--seed", type=int, default=0, help="unsigned 64-bit seed")
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eig", help="eigenvalues of a matrix file",
                       description=f"Input: {MATRIX_FORMAT}. Output: one eigenvalue per line, 're im'.")
    e.add_argument("--matrix", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eig)

    s = sub.add_parser("svd", help="singular values of M - xi I",
                       description=f"Input: {MATRIX_FORMAT}. Output: singular values, one per line, nonincreasing.")
    s.add_argument("--matrix", required=True)
    s.add_argument("--xi", help="complex shift, e.g. 2 or 1.5+0.8j")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_svd)

    o = sub.add_parser("outliers", help="outliers of X + E and their Hausdorff distance to sigma(E)",
                       description=f"Inputs: {MATRIX_FORMAT}; deformation JSON "
                                   "{'u': [[[re, im], ...], ...], 'v': [...]}. Output: JSON report with keys "
                                   "eps, observed, predicted, hausdorff, count_match (and overlap for rank one).")
    o.add_argument("--matrix", required=True)
    o.add_argument("--defm", required=True)
    o.add_argument("--eps", type=float, help="exclusion ring width (default: quarter of the gap of sigma(E))")
    o.add_argument("--overlap", action="store_true", help="also report the eigenvector overlap (rank one)")
    o.add_argument("--out", help="output path (default: stdout)")
    o.set_defaults(func=cmd_outliers)

    c = sub.add_parser("charpoly", help="coefficients of det(I - zM) by Newton's identities",
                       description=f"Input: {MATRIX_FORMAT}. Output: coefficients c_0..c_order, one 're im' per line.")
    c.add_argument("--matrix", required=True)
    c.add_argument("--order", type=int, help="truncation order (default: n)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_charpoly)

    t = sub.add_parser("stieltjes", help="solve the fixed point for m(i eta); print Im m / eta",
                       description="Dimensionless. Optional CSV 'eta,h,im_m_over_eta' on a log grid from "
                                   "--eta to 1, and a support estimate JSON {xi, c, C, eta_small, threshold}.")
    t.add_argument("--xi2", type=float, required=True, help="|xi|^2, must exceed 1")
    t.add_argument("--eta", type=float, default=1e-3)
    t.add_argument("--curve", help="write the (eta, h, Im m/eta) curve to this CSV")
    t.add_argument("--points", type=int, default=25)
    t.add_argument("--support", help="write the support estimate to this JSON file")
    t.set_defaults(func=cmd_stieltjes)

    x = sub.add_parser("experiment", help="run a Monte Carlo experiment spec",
                       description="Runs a JSON experiment spec (path or bundled name) and writes "
                                   "records.jsonl (one trial per line), report.json and summary.csv to --out. "
                                   "Exit code 0 iff the verdict passes.")
    x.add_argument("--spec", required=True, help="spec file or bundled name (see 'list')")
    x.add_argument("--out", help="output directory (default: spec name)")
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--seed", type=int, help="override the master seed")
    x.add_argument("--trials", type=int, help="override the number of trials")
    x.set_defaults(func=cmd_experiment)

    ls = sub.add_parser("list", help="list bundled experiment specs")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

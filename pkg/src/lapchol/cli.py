"""Command-line surface.

Subcommands: factorize (graph -> factorization file + stats), solve
(factorization + graph + rhs -> solution), check (factorize at desk scale
and verify every guarantee against the dense oracle), bench (work counters
and wall times, optionally comparing the compiled and pure backends).

Exit codes: 0 success, 1 a check failed, 2 usage/parse error,
3 disconnected input, 4 right-hand side not mean-zero.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import io as lio
from . import oracle
from ._kernels import NUMBA_ENABLED, backend_name, get_backend
from .factorizer import Config, Variant, sparse_cholesky
from .graphgen import erdos_renyi, path_graph, random_regular_multigraph
from .solver import iterative_refinement, laplacian_operator, project_mean_zero

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DISCONNECTED = 3
EXIT_RHS_NOT_MEAN_ZERO = 4

_VARIANTS = {
    "random-perm": Variant.RANDOM_PERM,
    "low-degree": Variant.LOW_DEGREE,
    "exact": Variant.EXACT_CLIQUE,
}


def _fail(msg, code):
    print(f"error: {msg}", file=sys.stderr)
    return code


def _load_graph(args):
    return lio.parse_graph(args.input, args.format)


def _config_from(args, record_diagnostics=False):
    return Config(eps=args.eps, delta=args.delta, rho_override=args.rho,
                  variant=_VARIANTS[args.variant], seed=args.seed,
                  record_diagnostics=record_diagnostics)


def _add_factorize_flags(p):
    p.add_argument("--input", required=True, help="graph file")
    p.add_argument("--format", default="edgelist",
                   choices=["edgelist", "matrix-market"])
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", default="random-perm",
                   choices=sorted(_VARIANTS))
    p.add_argument("--rho", type=int, default=None,
                   help="override the sampling multiplicity formula")


def cmd_factorize(args):
    try:
        g = _load_graph(args)
    except (OSError, lio.GraphFormatError) as exc:
        return _fail(exc, EXIT_USAGE)
    if not g.is_connected():
        return _fail("input graph is disconnected", EXIT_DISCONNECTED)
    try:
        cfg = _config_from(args)
        fact = sparse_cholesky(g, cfg)
    except ValueError as exc:
        return _fail(exc, EXIT_USAGE)
    if args.out:
        lio.serialize_factorization(fact, args.out)
    if args.stats:
        lio.write_stats_json(fact.stats, args.stats)
    s = fact.stats
    print(f"factorized n={s.n} m={s.m_input} rho={s.rho} "
          f"variant={s.variant} fill={s.fill} "
          f"attempts={s.attempts_total} "
          f"time={s.wall_times['total_s']:.3f}s")
    return EXIT_OK


def cmd_solve(args):
    try:
        fact = lio.deserialize_factorization(args.factorization)
        g = lio.parse_graph(args.input, args.format)
        b = lio.read_vector(args.rhs)
    except (OSError, lio.GraphFormatError,
            lio.FactorizationFormatError) as exc:
        return _fail(exc, EXIT_USAGE)
    if g.n != fact.n:
        return _fail(f"graph has {g.n} vertices but factorization {fact.n}",
                     EXIT_USAGE)
    if b.shape[0] != fact.n:
        return _fail(f"rhs length {b.shape[0]} does not match n={fact.n}",
                     EXIT_USAGE)
    if args.project_rhs:
        b = project_mean_zero(b)
    L_apply = laplacian_operator(g)
    try:
        report = iterative_refinement(L_apply, fact, b,
                                      eps_solve=args.eps_solve)
    except ValueError as exc:
        return _fail(exc, EXIT_RHS_NOT_MEAN_ZERO)
    if args.out:
        lio.write_vector(report.x, args.out)
    if args.report:
        with open(args.report, "w") as fh:
            json.dump({
                "schema": 1,
                "iterations": report.iterations,
                "converged": report.converged,
                "early_stopped": report.early_stopped,
                "residual_norms": report.residual_norms,
                "wall_time_s": report.wall_time_s,
            }, fh, indent=2)
            fh.write("\n")
    status = "converged" if report.converged else "NOT converged"
    print(f"solve {status} in {report.iterations} iterations "
          f"(final residual "
          f"{report.residual_norms[-1] if report.residual_norms else 0.0:.3e})")
    return EXIT_OK if report.converged else EXIT_CHECK_FAILED


def _check_line(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"CHECK {name}: {tag}{suffix}")
    return ok


def cmd_check(args):
    try:
        g = _load_graph(args)
    except (OSError, lio.GraphFormatError) as exc:
        return _fail(exc, EXIT_USAGE)
    if not g.is_connected():
        return _fail("input graph is disconnected", EXIT_DISCONNECTED)
    if g.n > oracle.SIZE_CAP:
        return _fail(f"check needs n <= {oracle.SIZE_CAP} (dense oracle)",
                     EXIT_USAGE)
    cfg = _config_from(args, record_diagnostics=args.trace)
    cfg.track_leverage = True
    try:
        fact = sparse_cholesky(g, cfg, keep_graph=True)
    except ValueError as exc:
        return _fail(exc, EXIT_USAGE)

    ok = True
    L = g.reconstruct_dense()
    Z = oracle.dense_from_factorization(fact)
    lmin, lmax = oracle.spectral_bounds(L, Z)
    lo, hi = 1.0 - args.eps, 1.0 + args.eps
    ok &= _check_line(
        "spectral-approximation",
        lo - 1e-9 <= lmin and lmax <= hi + 1e-9,
        f"eigenvalue range [{lmin:.4f}, {lmax:.4f}] vs [{lo}, {hi}]")

    R = oracle.effective_resistance_matrix(L)
    if cfg.variant is Variant.EXACT_CLIQUE:
        # exact elimination does not maintain the 1/rho bound; sampling does
        _check_line("leverage-bound", True, "skipped in exact mode")
    else:
        # every multi-edge that was ever alive is leverage-bounded by 1/rho
        rho = fact.stats.rho
        pool = fact.graph
        m = pool.n_edges
        lev = pool._ew[:m] * R[pool._eu[:m], pool._ev[:m]]
        worst = float(lev.max())
        ok &= _check_line("leverage-bound", worst <= 1.0 / rho + 1e-9,
                          f"max w*Reff {worst:.3e} vs 1/rho {1.0 / rho:.3e} "
                          f"over {m} multi-edges")

    traj = fact.stats.live_edges
    if cfg.variant is Variant.EXACT_CLIQUE:
        _check_line("edge-count-monotone", True,
                    "skipped in exact mode (quadratic clique fill)")
    else:
        ok &= _check_line("edge-count-monotone",
                          bool(np.all(np.diff(traj) <= 0)),
                          f"post-split {int(traj[0])} -> {int(traj[-1])}")

    # sampler unbiasedness on the lightest star of the input graph
    deg = g.live_mult.copy()
    v = int(np.argmin(np.where(deg > 0, deg, np.iinfo(np.int64).max)))
    star = g.star_edges(v)
    if 0 < len(star) <= 8:
        mean = oracle.expected_clique_sample_mean(star, v, g.n)
        exact = oracle.clique_from_star(star, v, g.n) / len(star)
        scale = max(np.abs(exact).max(), 1e-300)
        err = float(np.abs(mean - exact).max() / scale)
        ok &= _check_line("sampler-unbiasedness", err <= 1e-11,
                          f"star of vertex {v}, relative error {err:.2e}")
    else:
        _check_line("sampler-unbiasedness", True,
                    f"skipped (lightest star has {len(star)} edges)")

    n = g.n
    rng = np.random.default_rng(0)
    if n >= 3:
        triples = ([(u, v2, z) for u in range(n) for v2 in range(n)
                    for z in range(n) if len({u, v2, z}) == 3]
                   if n <= 15 else
                   [tuple(rng.choice(n, size=3, replace=False))
                    for _ in range(200)])
        tri_ok = all(oracle.reff_triangle_check(L, *t) for t in triples)
        ok &= _check_line("resistance-triangle", tri_ok,
                          f"{len(triples)} triples")

    # one seeded refinement solve: residuals must fall below the target
    rng_b = np.random.default_rng(args.seed)
    b = rng_b.standard_normal(n)
    b -= b.mean()
    report = iterative_refinement(laplacian_operator(g), fact, b,
                                  eps_solve=1e-8)
    ok &= _check_line("refinement-convergence", report.converged,
                      f"{report.iterations} iterations, final residual "
                      f"{report.residual_norms[-1]:.3e}")

    if args.trace and fact.stats.diagnostics:
        print("step  lambda_min  lambda_max  within_eps  truncation_ok")
        for r in fact.stats.diagnostics:
            print(f"{r.step:4d}  {r.lambda_min:10.6f}  {r.lambda_max:10.6f}"
                  f"  {str(r.within_eps):>10}  {str(r.truncation_ok):>13}")

    if args.stats:
        lio.write_stats_json(fact.stats, args.stats, extra={
            "spectral_bounds": [lmin, lmax],
            "solve_residual_norms": report.residual_norms,
            "checks_passed": bool(ok),
        })
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _bench_graph(args):
    if args.input:
        return lio.parse_graph(args.input, args.format)
    if args.gen == "regular":
        return random_regular_multigraph(args.n, args.deg, args.seed)
    if args.gen == "er":
        return erdos_renyi(args.n, args.p, args.seed)
    return path_graph(args.n)


def cmd_bench(args):
    try:
        g = _bench_graph(args)
    except (OSError, lio.GraphFormatError, ValueError) as exc:
        return _fail(exc, EXIT_USAGE)
    if not g.is_connected():
        return _fail("input graph is disconnected", EXIT_DISCONNECTED)
    backends = ["numba", "numpy"] if args.backend == "both" else [args.backend]
    cfg = Config(eps=args.eps, delta=args.delta, rho_override=args.rho,
                 variant=_VARIANTS[args.variant], seed=args.seed)
    rows = []
    results = {}
    for b in backends:
        try:
            resolved = backend_name(get_backend(b))
        except (RuntimeError, ValueError) as exc:
            return _fail(exc, EXIT_USAGE)
        if resolved == "numba":
            sparse_cholesky(g, cfg, backend=b)  # compile warm-up
        best = None
        for _ in range(max(1, args.repeat)):
            t0 = time.perf_counter()
            fact = sparse_cholesky(g, cfg, backend=b)
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        results[b] = fact
        s = fact.stats
        work = s.rho * s.m_input * max(np.log(s.n), 1.0)
        rows.append((resolved, best, s))
        print(f"backend={resolved:6s} n={s.n} m={s.m_input} rho={s.rho} "
              f"time={best:.4f}s attempts={s.attempts_total} "
              f"edges_touched={s.attempts_total + s.rho * s.m_input} "
              f"fill={s.fill} attempts/(rho*m*ln n)={s.attempts_total / work:.3f}")
    if len(results) == 2:
        fa, fb = results["numba"], results["numpy"]
        same = (np.array_equal(fa.perm, fb.perm)
                and np.array_equal(fa.diag, fb.diag)
                and np.array_equal(fa.col_ptr, fb.col_ptr)
                and np.array_equal(fa.col_idx, fb.col_idx)
                and np.array_equal(fa.col_val, fb.col_val))
        print(f"backends bitwise identical: {same}")
        print(f"speedup numba vs numpy: {rows[1][1] / rows[0][1]:.1f}x")
        if not same:
            return EXIT_CHECK_FAILED
    if args.stats:
        lio.write_stats_json(rows[-1][2], args.stats)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="lapchol",
        description="Sparse approximate Cholesky factorization of graph "
                    "Laplacians by randomized clique sampling.")
    sub = p.add_subparsers(dest="command", required=True)

    pf = sub.add_parser("factorize", help="factor a graph Laplacian")
    _add_factorize_flags(pf)
    pf.add_argument("--out", default=None, help="factorization output file")
    pf.add_argument("--stats", default=None, help="stats JSON output")
    pf.set_defaults(func=cmd_factorize)

    ps = sub.add_parser("solve", help="solve L x = b with a factorization")
    ps.add_argument("--factorization", required=True)
    ps.add_argument("--input", required=True, help="the graph of L")
    ps.add_argument("--format", default="edgelist",
                    choices=["edgelist", "matrix-market"])
    ps.add_argument("--rhs", required=True, help="one real per line")
    ps.add_argument("--eps-solve", type=float, default=1e-8)
    ps.add_argument("--out", default=None, help="solution output file")
    ps.add_argument("--report", default=None, help="solve report JSON")
    ps.add_argument("--project-rhs", action="store_true",
                    help="project the rhs onto mean zero instead of rejecting")
    ps.set_defaults(func=cmd_solve)

    pc = sub.add_parser("check", help="verify guarantees against the dense oracle")
    _add_factorize_flags(pc)
    pc.add_argument("--trace", action="store_true",
                    help="per-step eigenvalue trace")
    pc.add_argument("--stats", default=None, help="stats JSON output")
    pc.set_defaults(func=cmd_check)

    pb = sub.add_parser("bench", help="work counters and wall times")
    pb.add_argument("--input", default=None)
    pb.add_argument("--format", default="edgelist",
                    choices=["edgelist", "matrix-market"])
    pb.add_argument("--gen", default="regular", choices=["regular", "er", "path"])
    pb.add_argument("--n", type=int, default=4096)
    pb.add_argument("--deg", type=int, default=4)
    pb.add_argument("--p", type=float, default=0.01)
    pb.add_argument("--eps", type=float, default=0.5)
    pb.add_argument("--delta", type=float, default=1.0)
    pb.add_argument("--rho", type=int, default=8,
                    help="sampling multiplicity (default 8 for benchmarking)")
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--variant", default="random-perm",
                    choices=sorted(_VARIANTS))
    pb.add_argument("--repeat", type=int, default=1)
    pb.add_argument("--backend", default="auto",
                    choices=["auto", "numba", "numpy", "both"])
    pb.add_argument("--stats", default=None)
    pb.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands: divergence, wasserstein, tci-check, genexp, conjugate.

Exit-code contract: 0 success, 2 input error, 3 inequality violation -- so CI
can drive the CLI itself as a property-test harness.  Every run echoes its
fully resolved configuration into the output; identical (config, seed) pairs
produce byte-identical output on the same build.  DIVBOUND_THREADS caps trial
parallelism (default 1; results do not depend on it).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import learning, serialize, tci, transport
from .convex import ConjugateRate, Power, Quadratic, conjugate
from .divergences import divergence, kind_from_name, chi_square
from .errors import DivboundError
from .spaces import DiscreteMeasure, SeededRng
from .learning import GibbsAlgorithm, LearningProblem

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATION = 3


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _finite_or_str(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf"
    return x


def cmd_divergence(args) -> int:
    kind = kind_from_name(args.kind)
    space = serialize.load_space(args.space)
    nu = serialize.load_measure(args.nu, space)
    mu = serialize.load_measure(args.mu, space)
    if args.kind == "chi2":
        try:
            value: float = chi_square(nu, mu)
            ac = True
        except DivboundError:
            value, ac = math.inf, False
        payload_value = _finite_or_str(value)
    else:
        result = divergence(kind, nu, mu)
        payload_value = _finite_or_str(result.value)
        ac = result.absolutely_continuous
    _emit({
        "kind": args.kind,
        "value": payload_value,
        "absolutely_continuous": ac,
        "config": {"space": args.space, "nu": args.nu, "mu": args.mu},
    }, args.out)
    return EXIT_OK


def cmd_wasserstein(args) -> int:
    space = serialize.load_space(args.space)
    mu = serialize.load_measure(args.mu, space)
    nu = serialize.load_measure(args.nu, space)
    if args.p == 1:
        result = transport.w1_dual(mu, nu)
        potential = result.dual_potential.values.tolist()
    else:
        result = transport.wasserstein(args.p, mu, nu)
        potential = None
    _emit({
        "distance": result.distance,
        "p": args.p,
        "duality_gap": result.duality_gap,
        "plan": result.plan.matrix.tolist(),
        "dual_potential": potential,
        "config": {"space": args.space, "mu": args.mu, "nu": args.nu, "p": args.p},
    }, args.out)
    return EXIT_OK


def _resolve_auto_constant(phi_spec: dict, kind_name: str, mu: DiscreteMeasure,
                           rng: SeededRng) -> dict:
    """Fill in {"c": "auto"}: fitted sub-Gaussian constant over the Lipschitz
    family for KL/quadratic, moment-search constant for power rates."""
    resolved = dict(phi_spec)
    if resolved.get("c") != "auto":
        return resolved
    if resolved.get("kind") == "power":
        beta = float(resolved.get("beta", 2.0))
        found = tci.moment_constant(mu, beta, search_budget=32, rng=rng.child(900001))
        resolved["c"] = found.c
        return resolved
    # quadratic: largest grid-certified CGF constant over sampled 1-Lipschitz f
    sampler = tci.lipschitz_family_sampler(mu)
    fit_rng = rng.child(900002)
    best = 0.0
    for i in range(64):
        f = sampler(fit_rng.child(i))
        best = max(best, tci.subgaussian_fit(mu, f).sigma_sq)
    resolved["c"] = best
    return resolved


def cmd_tci_check(args) -> int:
    rng = SeededRng(args.seed)
    if args.preset == "pinsker":
        space = transport.hamming_space(args.points)
        mu = tci._random_measure_on_support(
            DiscreteMeasure(space, np.full(args.points, 1.0 / args.points)),
            rng.child(424242), floor=0.05,
        ) if args.random_mu else DiscreteMeasure(space, np.full(args.points, 1.0 / args.points))
        phi_spec = json.loads(args.phi) if args.phi else {"kind": "quadratic", "c": 0.25}
        kind_name = args.divergence or "kl"
    else:
        if not (args.space and args.mu):
            raise ValueError("tci-check needs --space and --mu (or --preset pinsker)")
        space = serialize.load_space(args.space)
        mu = serialize.load_measure(args.mu, space)
        if not args.phi:
            raise ValueError("tci-check needs --phi")
        phi_spec = json.loads(args.phi)
        kind_name = args.divergence
    kind = kind_from_name(kind_name)
    phi_spec = _resolve_auto_constant(phi_spec, kind_name, mu, rng)
    if args.c_scale != 1.0:
        phi_spec = dict(phi_spec)
        phi_spec["c"] = float(phi_spec["c"]) * args.c_scale
    phi = serialize.rate_from_dict(phi_spec)
    report = tci.tci_check(mu, phi, kind, rng, args.trials, floor=args.floor)
    payload = report.to_dict()
    payload["config"].update({
        "preset": args.preset, "points": args.points, "c_scale": args.c_scale,
        "divergence": kind_name, "resolved_phi": phi_spec,
    })
    _emit(payload, args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _problem_from_config(cfg: dict) -> LearningProblem:
    prob = cfg["problem"]
    return LearningProblem.from_tables(
        prob["z_labels"], prob["h_labels"], prob["loss"], prob["p_z"], prob.get("n", 1))


def cmd_genexp(args) -> int:
    if args.preset == "tiny-gibbs":
        configs = list(learning.tiny_gibbs_configs())
        bounds = ("mi", "chi2", "ismi", "cmi")
        cmi_max_n = args.cmi_max_n
        rows = []
        for name, problem, alg in configs:
            wanted = bounds if problem.n <= cmi_max_n else tuple(b for b in bounds if b != "cmi")
            report = learning.bound_report(problem, alg, bounds=wanted)
            rows.append((name, problem.n, alg.gamma, report))
    else:
        if not args.config:
            raise ValueError("genexp needs --config or --preset tiny-gibbs")
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        base = cfg["problem"]
        gammas = cfg["algorithm"].get("gamma_sweep")
        if gammas is None:
            gammas = [cfg["algorithm"]["gamma"]]
        n_values = cfg["problem"].get("n_sweep")
        if n_values is None:
            n_values = [cfg["problem"].get("n", 1)]
        bounds = tuple(cfg.get("bounds", ("mi", "chi2", "ismi", "cmi")))
        prior = np.asarray(cfg["algorithm"]["prior"], dtype=float)
        rows = []
        for n in n_values:
            problem = LearningProblem.from_tables(
                base["z_labels"], base["h_labels"], base["loss"], base["p_z"], n)
            for gamma in gammas:
                report = learning.bound_report(
                    problem, GibbsAlgorithm(prior=prior, gamma=float(gamma)), bounds=bounds)
                rows.append((f"config/n={n}/gamma={gamma:g}", n, float(gamma), report))

    header = ["gamma", "n", "gen_err", "mi_bound", "chi2_bound", "ismi_bound",
              "cmi_bound", "ismi_chi2_bound"]
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for _, n, gamma, rep in rows:
                writer.writerow([gamma, n, rep.gen_err, rep.mi_bound, rep.chi2_bound,
                                 rep.ismi_bound, rep.cmi_bound, rep.ismi_chi2_bound])
    payload = {
        "config": {"preset": args.preset, "config_file": args.config,
                   "seed": args.seed, "csv": args.csv},
        "reports": [dict(name=name, n=n, gamma=gamma, **rep.to_dict())
                    for name, n, gamma, rep in rows],
    }
    _emit(payload, args.out)
    return EXIT_OK


def cmd_conjugate(args) -> int:
    phi_spec = json.loads(args.phi)
    phi = serialize.rate_from_dict(phi_spec)
    conj: ConjugateRate = conjugate(phi)
    ts = np.geomspace(args.t_min, args.t_max, args.t_points)
    table = [{"t": float(t),
              "conjugate": float(conj.value(t)),
              "generalized_inverse": conj.generalized_inverse(float(t))}
             for t in ts]
    _emit({"phi": phi.describe(), "table": table,
           "config": {"t_min": args.t_min, "t_max": args.t_max,
                      "t_points": args.t_points}}, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divbound",
        description="Divergences, discrete transport, conjugates, and inequality sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="evaluate a divergence between measure files")
    p.add_argument("--kind", required=True,
                   help="kl | tv | chi2 | chi2form | hellinger:<alpha>")
    p.add_argument("--space", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("wasserstein", help="transport distance between measure files")
    p.add_argument("--p", type=int, choices=(1, 2), default=1)
    p.add_argument("--space", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_wasserstein)

    p = sub.add_parser("tci-check", help="sample measures against a transport-cost bound")
    p.add_argument("--space", default=None)
    p.add_argument("--mu", default=None)
    p.add_argument("--divergence", default="kl")
    p.add_argument("--phi", default=None,
                   help='rate JSON, e.g. {"kind":"quadratic","c":0.25}; "c" may be "auto"')
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--floor", type=float, default=1e-3)
    p.add_argument("--preset", choices=("pinsker",), default=None)
    p.add_argument("--points", type=int, default=4, help="space size for presets")
    p.add_argument("--random-mu", action="store_true",
                   help="with --preset, draw mu at random instead of uniform")
    p.add_argument("--c-scale", type=float, default=1.0,
                   help="multiply the resolved constant (negative controls)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tci_check)

    p = sub.add_parser("genexp", help="generalization-error bound sweeps")
    p.add_argument("--config", default=None, help="experiment config JSON")
    p.add_argument("--preset", choices=("tiny-gibbs",), default=None)
    p.add_argument("--cmi-max-n", type=int, default=3)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--csv", default=None, help="write per-config rows here")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_genexp)

    p = sub.add_parser("conjugate", help="print conjugate and inverse tables for a rate")
    p.add_argument("--phi", required=True)
    p.add_argument("--t-min", type=float, default=1e-3)
    p.add_argument("--t-max", type=float, default=1e2)
    p.add_argument("--t-points", type=int, default=25)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_conjugate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DivboundError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

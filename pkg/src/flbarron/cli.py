"""Batch command-line front end with reproducible JSON/CSV outputs.

Subcommands map one-to-one onto the library layers: ``norm`` and
``decompose`` report potential-term norms, ``constants`` evaluates every
certified constant for a spec, ``solve`` runs the Neumann iteration against
the dense oracle, ``verify-eigen`` runs the sharpness experiment, ``probe``
sweeps empirical operator norms, and ``demo-embeddings`` reproduces the
borderline embedding demonstrations.  Identical config and seed give
byte-identical JSON.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import bounds as B
from . import solver as SV
from .errors import ToolkitError
from .grid import FreqFunction, make_radial_grid, make_tensor_grid, sample_profile
from .operators import certified_bound, empirical_operator_norm
from .potentials import HamiltonianSpec, fourier_transform, decompose_low_high
from .spaces import (
    SpaceIndex,
    SplitIndex,
    counterexample_norm,
    fl_norm,
    profile_norm_report,
    split_norm,
)


def _canonical_json(obj) -> str:
    def walk(x):
        if isinstance(x, dict):
            return {k: walk(v) for k, v in sorted(x.items())}
        if isinstance(x, (list, tuple)):
            return [walk(v) for v in x]
        if isinstance(x, (np.floating, float)):
            return float(f"{float(x):.17g}")
        if isinstance(x, (np.integer,)):
            return int(x)
        return x
    return json.dumps(walk(obj), sort_keys=True, indent=1)


def _config_hash(args_dict: dict) -> str:
    skip = {"func", "out"}  # the destination path is not part of the computation
    blob = json.dumps({k: v for k, v in sorted(args_dict.items()) if k not in skip},
                      sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _emit(payload: dict, out: str | None, csv_rows=None, csv_header=None):
    text = _canonical_json(payload)
    if out:
        Path(out).write_text(text + "\n")
        if csv_rows is not None:
            csv_path = Path(out).with_suffix(".csv")
            with open(csv_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                if csv_header:
                    writer.writerow(csv_header)
                writer.writerows(csv_rows)
    else:
        sys.stdout.write(text + "\n")


def _load_spec(path: str) -> HamiltonianSpec:
    with open(path) as fh:
        return HamiltonianSpec.from_json_dict(json.load(fh))


def _parse_grid(desc: str):
    """'kind:radial,count:N,rmax:R' or 'kind:tensor,extent:X,count:N'."""
    fields = dict(part.split(":", 1) for part in desc.split(","))
    kind = fields.pop("kind")
    if kind == "radial":
        return ("radial", float(fields["rmax"]), int(fields["count"]),
                fields.get("scheme", "log-uniform"))
    if kind == "tensor":
        return ("tensor", float(fields["extent"]), int(fields["count"]))
    raise ValueError(f"unknown grid kind {kind!r}")


def _build_grid(desc: str, dim: int):
    parsed = _parse_grid(desc)
    if parsed[0] == "radial":
        return make_radial_grid(dim, parsed[1], parsed[2], parsed[3])
    return make_tensor_grid(dim, parsed[1], parsed[2])


def _meta(args) -> dict:
    return {"config_hash": _config_hash(vars(args)), "version": __version__}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_norm(args):
    ham = _load_spec(args.spec)
    pot = ham.potential
    reports = []
    terms = ([("one_particle", i, None, t) for i, t in pot.one_particle]
             + [("pairwise", i, j, t) for i, j, t in pot.pairwise]
             + ([("additive", None, None, pot.additive)] if pot.additive else []))
    for role, i, j, term in terms:
        dim = pot.dim if role == "additive" else pot.n
        prof = fourier_transform(term, dim)
        if args.alpha is not None and role != "additive":
            idx = SplitIndex(args.s, args.alpha, args.beta)
            value, sp = split_norm(prof, idx, dim)
            reports.append({"role": role, "i": i, "j": j, "kind": term.kind,
                            "space": {"s": args.s, "alpha": args.alpha, "beta": args.beta},
                            "value": value, "split_method": sp.method,
                            "tail_bound": None, "truncated": False})
        else:
            rep = profile_norm_report(prof, SpaceIndex(args.s, args.p), dim)
            d = rep.to_json_dict()
            d.update({"role": role, "i": i, "j": j, "kind": term.kind})
            reports.append(d)
    payload = {"meta": _meta(args), "reports": reports}
    if args.alpha is not None:
        payload["big_C_V"] = B.big_C_V(pot, args.s, args.alpha, args.beta)
    _emit(payload, args.out)
    return 0


def cmd_decompose(args):
    ham = _load_spec(args.spec)
    pot = ham.potential
    entries = []
    for i, term in pot.one_particle:
        sp = decompose_low_high(term, pot.n, args.radius, args.alpha_prime, s=args.s)
        entries.append({"role": "one_particle", "i": i, "kind": term.kind,
                        "radius": sp.radius, "method": sp.method,
                        "low_fl1": sp.part_norms[0], "high_flap": sp.part_norms[1]})
    for i, j, term in pot.pairwise:
        sp = decompose_low_high(term, pot.n, args.radius, args.alpha_prime, s=args.s)
        entries.append({"role": "pairwise", "i": i, "j": j, "kind": term.kind,
                        "radius": sp.radius, "method": sp.method,
                        "low_fl1": sp.part_norms[0], "high_flap": sp.part_norms[1]})
    _emit({"meta": _meta(args), "decompositions": entries}, args.out)
    return 0


def cmd_constants(args):
    ham = _load_spec(args.spec)
    pot = ham.potential
    s, alpha, gamma = args.s, args.alpha, args.gamma
    beta = 1.0 + (s - gamma) / 2.0
    out = {"meta": _meta(args),
           "parameters": {"s": s, "alpha": alpha, "beta": beta, "gamma": gamma,
                          "rho": args.rho},
           "mu_tilde_1": B.mu_tilde(ham.masses, 1.0),
           "mu_tilde_rho": B.mu_tilde(ham.masses, args.rho)}
    if not math.isinf(alpha):
        out["c_alpha_beta"] = B.c_alpha_beta(alpha, beta, pot.n)
    nu_entries = []
    for role, t in ([(f"one_particle:{i}", term) for i, term in pot.one_particle]
                    + [(f"pairwise:{i},{j}", term) for i, j, term in pot.pairwise]):
        texp = t.power_exponent(pot.n)
        if texp is not None and texp != pot.n:
            nu_entries.append({"term": role, "kind": t.kind, "t": texp,
                               "nu_t_n": B.nu_t_n(texp, pot.n)})
    out["nu_constants"] = nu_entries
    C = B.big_C_V(pot, s, alpha, beta)
    out["big_C_V"] = C
    out["frak_C_V"] = B.frak_C_V(pot, s, alpha, gamma)
    out["coercivity_rho_star"] = B.coercivity_rho(ham, s, alpha, gamma)
    mt1 = B.mu_tilde(ham.masses, 1.0)
    out["contraction_K_eigen"] = B.contraction_radius(mt1, abs(args.lam + 1.0), C, s, beta)
    ctx = B.BoundContext(ham, s, alpha, gamma, args.lam)
    out["eigen_certificate_barron_unit"] = B.eigen_certificate(ctx, 1.0, "barron", C=C)
    out["eigen_certificate_l2_unit"] = B.eigen_certificate(ctx, 1.0, "l2", C=C)
    _emit(out, args.out)
    return 0


def cmd_solve(args):
    ham = _load_spec(args.spec)
    grid = _build_grid(args.grid, ham.dim)
    if grid.kind != "tensor":
        raise ToolkitError("solve needs a tensor grid")
    r = grid.radius_mesh()
    f = FreqFunction(grid, np.exp(-math.pi * r * r))
    u, report = SV.solve_neumann(ham, args.rho, f, s=args.s, tol=args.tol)
    if grid.size <= 4096:
        u_direct = SV.solve_direct(ham, args.rho, f)
        report.oracle_error = SV.oracle_error(u, u_direct, s=args.s)
    payload = {"meta": _meta(args), "report": report.to_json_dict()}
    rows = list(enumerate(report.residual_history, start=1))
    _emit(payload, args.out, csv_rows=rows, csv_header=["iteration", "residual"])
    return 0


def cmd_verify_eigen(args):
    gammas = tuple(float(x) for x in args.gammas.split(","))
    rep = SV.sharpness_experiment(args.delta, n=args.n, gammas=gammas,
                                  residual_cells=args.cells)
    payload = {"meta": _meta(args), "report": rep.to_json_dict()}
    rows = [(g,) for g in gammas]
    if args.delta == 1.0 or True:
        # gamma-norm table for the blow-up fit
        from .solver import high_band_barron_norm, tabulate_sharp_transform
        from .potentials import sharp_example_potential

        ex = sharp_example_potential(args.delta, args.n)
        if args.delta == 1.0:
            prof = ex.psi_profile
        else:
            prof = tabulate_sharp_transform(np.geomspace(1e-4, 400.0, 1200), args.delta, args.n)
        rows = [(g, high_band_barron_norm(prof, g, args.n)) for g in gammas]
    _emit(payload, args.out, csv_rows=rows, csv_header=["gamma", "high_band_barron_norm"])
    return 0


def cmd_probe(args):
    ham = _load_spec(args.spec)
    grid = _build_grid(args.grid, ham.dim)
    beta = args.beta if args.beta is not None else 1.0 + (args.s - args.gamma) / 2.0
    C = B.big_C_V(ham.potential, args.s, args.alpha, beta)
    params = {"rho": args.rho, "lam": args.lam, "K": args.K, "grid": grid}
    cert = certified_bound(args.op, ham, args.s, args.alpha, beta, C, params)
    sigma = B.sigma_exponent(args.alpha, args.p)
    src = SpaceIndex(abs(args.s) + 2 * sigma * beta, args.p)
    if args.op in ("pk_t_lambda", "pk_r"):
        dst = src
    elif args.op == "h0_inv":
        src = SpaceIndex(args.s, args.p)
        dst = SpaceIndex(args.s + 2.0, args.p)
    elif args.op == "multiply_v":
        dst = SpaceIndex(args.s - 2 * (1 - sigma) * beta, args.p)
    else:
        dst = SpaceIndex(args.s - 2 * (1 - sigma) * beta + 2.0, args.p)
    rep = empirical_operator_norm(args.op, ham, src, dst, args.probes, args.seed,
                                  certified=cert, params=params, grid=grid)
    payload = {"meta": _meta(args), "report": rep.to_json_dict(),
               "satisfied": rep.satisfied}
    _emit(payload, args.out)
    return 0 if rep.satisfied else 3


def cmd_demo_embeddings(args):
    ks = [10 ** j for j in range(0, 7)]
    rows = []
    for k in ks:
        _, lower = counterexample_norm(k, 0.0, 1.0, -0.5, 2.0, 1)
        rows.append((k, lower))
    # Coulomb partial Barron(-1) integrals under extent doubling vs split norm
    from .potentials import PotentialTerm

    coul = fourier_transform(PotentialTerm("coulomb"), 3)
    partials = []
    splits = []
    for R in (25.0, 50.0, 100.0, 200.0):
        g = make_radial_grid(3, R, 3000, "log-uniform", r_min=1e-8)
        fr = sample_profile(coul, g)
        partials.append(fl_norm(fr, SpaceIndex(-1.0, 1.0)))
        v, _ = split_norm(coul, SplitIndex(0.0, 2.0, 1.0), 3, grid=g)
        splits.append(v)
    payload = {"meta": _meta(args),
               "counterexample_lower_bounds": rows,
               "coulomb_partial_B_minus1": partials,
               "coulomb_split_norm_s0_alpha2": splits}
    _emit(payload, args.out, csv_rows=rows, csv_header=["k", "lower_bound"])
    return 0


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flbarron",
                                description="frequency-space toolkit: norms, constants, solves")
    p.add_argument("--out", default=None, help="output JSON path (CSV written alongside)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **arg_defs):
        sp = sub.add_parser(name)
        for flag, kw in arg_defs.items():
            sp.add_argument(flag, **kw)
        sp.set_defaults(func=fn)
        return sp

    add("norm", cmd_norm,
        **{"--spec": dict(required=True), "--s": dict(type=float, default=0.0),
           "--p": dict(type=float, default=1.0),
           "--alpha": dict(type=float, default=None),
           "--beta": dict(type=float, default=1.0)})
    add("decompose", cmd_decompose,
        **{"--spec": dict(required=True), "--radius": dict(type=float, default=1.0),
           "--alpha-prime": dict(type=float, default=2.0, dest="alpha_prime"),
           "--s": dict(type=float, default=0.0)})
    add("constants", cmd_constants,
        **{"--spec": dict(required=True), "--s": dict(type=float, default=0.0),
           "--alpha": dict(type=float, default=2.0),
           "--gamma": dict(type=float, default=0.5),
           "--rho": dict(type=float, default=1.0),
           "--lam": dict(type=float, default=0.0)})
    add("solve", cmd_solve,
        **{"--spec": dict(required=True),
           "--grid": dict(default="kind:tensor,extent:8,count:129"),
           "--rho": dict(type=float, default=1.0), "--s": dict(type=float, default=0.0)})
    add("verify-eigen", cmd_verify_eigen,
        **{"--delta": dict(type=float, default=1.0), "--n": dict(type=int, default=3),
           "--gammas": dict(default="0.90,0.95,0.99"),
           "--cells": dict(type=int, default=450)})
    add("probe", cmd_probe,
        **{"--spec": dict(required=True),
           "--grid": dict(default="kind:tensor,extent:8,count:65"),
           "--op": dict(default="r"), "--s": dict(type=float, default=0.0),
           "--alpha": dict(type=float, default=2.0),
           "--beta": dict(type=float, default=None),
           "--gamma": dict(type=float, default=0.5),
           "--p": dict(type=float, default=1.0),
           "--probes": dict(type=int, default=20),
           "--rho": dict(type=float, default=1.0),
           "--lam": dict(type=float, default=0.0),
           "--K": dict(type=float, default=0.0)})
    add("demo-embeddings", cmd_demo_embeddings, **{"--n": dict(type=int, default=1)})
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ToolkitError as exc:
        sys.stderr.write(f"numeric failure [{type(exc).__name__}]: {exc}\n")
        return 3
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"config error [{type(exc).__name__}]: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

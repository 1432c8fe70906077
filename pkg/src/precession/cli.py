"""Command-line interface: scores, sweeps, bounds, sampling, entanglement and Wigner export."""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import classical_protocol as cp
from . import composite_entanglement as ce
from . import measurement_sim as ms
from . import oscillator_scores as osc
from . import spin_scores as ss
from .errors import ConfigurationError, ConsistencyError, PrecessionError, UnsupportedRangeError

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "PRECESSION_OUTPUT_DIR"
AGREEMENT_TOL = 1e-9
SWEEP_COLUMNS = ("K", "d", "score", "classical_bound", "gap", "method")


def _num(x) -> str:
    return format(float(x), ".12g")


def _clean(obj):
    """Recursively turn numpy scalars, arrays and fractions into JSON types."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float, Fraction)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _resolve_path(path: str | None) -> str | None:
    if path is None or path == "-":
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    return path


@contextlib.contextmanager
def _sink(path):
    target = _resolve_path(path)
    if target is None:
        yield sys.stdout
        return
    parent = os.path.dirname(target)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(target, "w", newline="") as fh:
        yield fh


def _emit_json(args, command: str, result: dict):
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "result": _clean(result)}
    with _sink(args.output) as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _report_dict(report: ss.ScoreReport, include_state: bool) -> dict:
    return report.to_dict(include_state=include_state)


# subcommands -------------------------------------------------------------

def cmd_score(args) -> int:
    if args.system == "spin":
        methods = {"closed-form": ["closed_form"], "numeric": ["numeric"],
                   "both": ["closed_form", "numeric"]}[args.method]
        reports = {}
        for method in methods:
            if method == "closed_form":
                try:
                    reports[method] = ss.score_closed_form(args.K, args.d)
                except UnsupportedRangeError as exc:
                    raise UnsupportedRangeError(
                        f"no closed form for K={args.K}, d={args.d} (available for d <= 7K); "
                        "use --method numeric") from exc
            else:
                reports[method] = ss.score_numeric(args.K, args.d, with_state=args.state)
        result = {name: _report_dict(r, args.state) for name, r in reports.items()}
        if len(reports) == 2:
            diff = abs(reports["closed_form"].score - reports["numeric"].score)
            result["agreement"] = {"difference": diff, "agree": diff <= AGREEMENT_TOL}
            if diff > AGREEMENT_TOL:
                _emit_json(args, "score", result)
                raise ConsistencyError(f"closed form and numeric scores differ by {diff:.3e}")
        _emit_json(args, "score", result)
        return 0
    policy = osc.TruncationPolicy(args.nmax, args.overlap)
    residues = None if args.all_residues else (0,)
    report = osc.score_truncated(args.K, policy, residues=residues)
    _emit_json(args, "score", {"numeric": _report_dict(report, args.state)})
    if args.strict and not report.converged:
        return 3
    return 0


def _parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise ConfigurationError(f"bad range {text!r}, expected a:b") from None
    if a < 1:
        raise ConfigurationError(f"dimensions start at 1, got {a}")
    return a, b


def cmd_sweep(args) -> int:
    lo, hi = _parse_range(args.d)
    with _sink(args.output) as fh:
        fh.write(f"# K={args.K}\n# d_range={lo}:{hi}\n# method=numeric\n")
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for dim in range(lo, hi + 1):
            r = ss.score_numeric(args.K, dim, with_state=False)
            fh.write(f"{r.K},{r.dim},{_num(r.score)},{_num(r.classical_bound)},"
                     f"{_num(r.gap)},{r.method}\n")
    return 0


def cmd_bounds(args) -> int:
    _emit_json(args, "bounds", {
        "K": args.K,
        "classical": ss.classical_bound(args.K),
        "lower": osc.lower_bound(args.K),
        "upper": osc.upper_bound(args.K),
        "sector_negativity_constant": osc.WERNER_SECTOR_BOUND,
    })
    return 0


def cmd_classical(args) -> int:
    mc = cp.monte_carlo_score(args.density, args.K, args.samples, args.seed)
    check = cp.bound_check(args.density, args.K, resolution=args.resolution)
    lower, upper = cp.classical_range(args.K)
    _emit_json(args, "classical", {
        "K": args.K, "density": mc.density, "seed": mc.seed, "rounds": mc.rounds,
        "estimate": mc.estimate, "standard_error": mc.standard_error,
        "integrated_score": check.score, "classical_range": [lower, upper],
    })
    return 0


def _build_state(args) -> ms.QuantumState:
    if args.basis == "fock":
        if args.state != "optimal":
            coeffs = _parse_coeffs(args.state)
            return ms.QuantumState.normalized(coeffs, "fock")
        report = osc.score_truncated(args.K, osc.TruncationPolicy(args.nmax),
                                     check_convergence=False)
        return ms.QuantumState.normalized(report.optimal_state, "fock")
    if args.d is None:
        raise ConfigurationError("--d is required for spin states")
    if args.state == "optimal":
        return ms.QuantumState.normalized(ss.optimal_state(args.K, args.d))
    if args.state == "stretched":
        coeffs = np.zeros(args.d)
        coeffs[-1] = 1.0
        return ms.QuantumState(coeffs)
    coeffs = _parse_coeffs(args.state)
    if len(coeffs) != args.d:
        raise ConfigurationError(f"state has {len(coeffs)} coefficients but d={args.d}")
    return ms.QuantumState.normalized(coeffs)


def _parse_coeffs(text: str) -> list[complex]:
    try:
        return [complex(v.replace(" ", "")) for v in text.split(",")]
    except ValueError:
        raise ConfigurationError(
            f"state must be 'optimal', 'stretched' or comma-separated coefficients, got {text!r}"
        ) from None


def cmd_simulate(args) -> int:
    state = _build_state(args)
    result = ms.sample_rounds(state, args.K, args.rounds, args.seed)
    bound = ss.classical_bound(args.K)
    margin = result.estimate - bound
    _emit_json(args, "simulate", {
        "K": args.K, "basis": state.basis, "dimension": state.dimension,
        "seed": result.seed, "rounds": result.rounds,
        "estimate": result.estimate, "standard_error": result.standard_error,
        "exact": result.exact, "classical_bound": bound,
        "gap_in_standard_errors": margin / result.standard_error if result.standard_error else None,
    })
    return 0


def cmd_entanglement(args) -> int:
    if args.ghz:
        report = ce.ghz_check(args.K)
        result = {"K": args.K, "score": report.score, "target": report.target,
                  "ghz_overlap": report.ghz_overlap, "ghz_expectation": report.ghz_expectation,
                  "maximizers": [{"eigenvalue": v, "ghz_overlap": o} for v, o in report.maximizers]}
    else:
        j1, j2 = Fraction(args.j1), Fraction(args.j2)
        spectrum = ce.schmidt_spectrum(ce.embed_optimal_state(j1, j2, args.K))
        result = {"K": args.K, "j1": str(j1), "j2": str(j2),
                  "schmidt_values": spectrum.values, "schmidt_rank": spectrum.rank,
                  "entropy_bits": spectrum.entropy_bits}
    _emit_json(args, "entanglement", result)
    return 0


def cmd_wigner(args) -> int:
    policy = osc.TruncationPolicy(args.nmax)
    report = osc.score_truncated(args.K, policy, check_convergence=False)
    grid = osc.wigner_grid(report.optimal_state, args.extent, args.resolution)
    with _sink(args.output) as fh:
        fh.write(f"# K={args.K}\n# n_max={args.nmax}\n# extent={_num(args.extent)}\n"
                 f"# resolution={args.resolution}\n# score={_num(report.score)}\n")
        fh.write("x,p,W\n")
        for i, p in enumerate(grid.p):
            for k, x in enumerate(grid.x):
                fh.write(f"{_num(x)},{_num(p)},{_num(grid.values[i, k])}\n")
    return 0


# parser -----------------------------------------------------------------

def _add_output(p, default_format="json"):
    p.add_argument("--output", "-o", default=None,
                   help=f"output file (default stdout; relative paths go under ${OUTPUT_DIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="precession",
                                     description="Precession-protocol scores and simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="maximal score for a spin or oscillator")
    score_sub = score.add_subparsers(dest="system", required=True)
    spin = score_sub.add_parser("spin", help="spin of dimension d")
    spin.add_argument("--K", type=int, required=True)
    spin.add_argument("--d", type=int, required=True)
    spin.add_argument("--method", choices=["closed-form", "numeric", "both"], default="numeric")
    spin.add_argument("--state", action="store_true", help="include the optimal state")
    _add_output(spin)
    ho = score_sub.add_parser("ho", help="harmonic oscillator, Fock levels 0..nmax")
    ho.add_argument("--K", type=int, required=True)
    ho.add_argument("--nmax", type=int, required=True)
    ho.add_argument("--overlap", type=float, default=0.99, help="convergence overlap threshold")
    ho.add_argument("--all-residues", action="store_true", help="scan every residue block")
    ho.add_argument("--strict", action="store_true", help="exit 3 when not converged")
    ho.add_argument("--state", action="store_true", help="include the optimal state")
    _add_output(ho)
    for p in (spin, ho):
        p.set_defaults(func=cmd_score)

    sweep = sub.add_parser("sweep", help="CSV of spin scores over a dimension range")
    sweep.add_argument("--K", type=int, required=True)
    sweep.add_argument("--d", required=True, help="inclusive range a:b")
    _add_output(sweep)
    sweep.set_defaults(func=cmd_sweep)

    bounds = sub.add_parser("bounds", help="classical bound and oscillator bounds")
    bounds.add_argument("--K", type=int, required=True)
    _add_output(bounds)
    bounds.set_defaults(func=cmd_bounds)

    classical = sub.add_parser("classical", help="Monte Carlo classical score")
    classical.add_argument("--K", type=int, required=True)
    classical.add_argument("--density", required=True,
                           help="point:a1,a2 | disc:R | sector:+k | sector:-k | gaussian:sigma")
    classical.add_argument("--samples", type=int, default=100000)
    classical.add_argument("--seed", type=int, required=True)
    classical.add_argument("--resolution", type=int, default=720)
    _add_output(classical)
    classical.set_defaults(func=cmd_classical)

    sim = sub.add_parser("simulate", help="sample quantum rounds")
    sim.add_argument("--K", type=int, required=True)
    sim.add_argument("--d", type=int, default=None)
    sim.add_argument("--basis", choices=["spin", "fock"], default="spin")
    sim.add_argument("--nmax", type=int, default=300, help="Fock cutoff for the optimal oscillator state")
    sim.add_argument("--state", default="optimal",
                     help="optimal | stretched | comma-separated coefficients")
    sim.add_argument("--rounds", type=int, default=100000)
    sim.add_argument("--seed", type=int, required=True)
    _add_output(sim)
    sim.set_defaults(func=cmd_simulate)

    ent = sub.add_parser("entanglement", help="Schmidt data of composite embeddings or the GHZ check")
    ent.add_argument("--K", type=int, required=True)
    ent.add_argument("--j1", default="1/2")
    ent.add_argument("--j2", default="1")
    ent.add_argument("--ghz", action="store_true", help="run the K-qubit GHZ check instead")
    _add_output(ent)
    ent.set_defaults(func=cmd_entanglement)

    wig = sub.add_parser("wigner", help="CSV grid of the optimal oscillator Wigner function")
    wig.add_argument("--K", type=int, required=True)
    wig.add_argument("--nmax", type=int, default=300)
    wig.add_argument("--extent", type=float, default=7.0)
    wig.add_argument("--resolution", type=int, default=141)
    _add_output(wig)
    wig.set_defaults(func=cmd_wigner)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PrecessionError as exc:
        print(f"precession: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"precession: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

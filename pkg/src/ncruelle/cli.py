"""Command-line entry point.

``ncruelle <command> --config PATH [--out PATH] [--csv PATH] [--seed N]``

Every command writes a JSON report (sorted keys, versioned by
``schema_version``).  Apart from the ``timing`` block the report is a pure
function of the config and the seed.  Exit codes: 0 pass, 2 config error,
3 nonconvergence, 4 capacity, 5 validity-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, config, paper
from . import eigenstate as es
from . import entropy as ent
from . import mc
from . import potential as pot
from . import transfer as tr
from .algebra import LinearMap, PIVerdict, is_positivity_improving
from .cylfun import CylinderFunction
from .errors import (CapacityError, DegenerateEigenvalueError, DomainError, EigensolverError,
                     NCRuelleError, NormalizationError)

SCHEMA_VERSION = 1
COMMANDS = ("check", "iterate", "spectrum", "eigenstate", "entropy", "mc", "verify-paper")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_CAPACITY = 4
EXIT_INVALID = 5

NORMALIZATION_TOL = 1e-10
RESIDUAL_TOL = 1e-9
GAP_TOL = 1e-6
MC_SIGMAS = 3.0
EVENTUAL_STEPS = 8


class _Outcome:
    """Results of one command plus the exit code it implies."""

    def __init__(self, results: dict, passed: bool, code: int | None = None, csv_text=None):
        self.results = results
        self.passed = bool(passed)
        self.code = (EXIT_OK if passed else EXIT_INVALID) if code is None else code
        self.csv_text = csv_text


def _potential_block(phi: pot.Potential) -> dict:
    out = phi.summary()
    out["shift"] = {"k": phi.shift.k, "aperiodic": phi.shift.is_aperiodic(),
                    "transition_rows": phi.shift.entries.tolist()}
    out["normalization_deviation"] = pot.check_normalized(phi)
    return out


def _section_depth(phi: pot.Potential, run: config.RunSettings) -> int:
    return tr.default_section_depth(phi) if run.cylinder_depth is None else int(run.cylinder_depth)


def _reference_state(phi: pot.Potential, n: int):
    """Closed-form eigenstate when the family has one, else None."""
    try:
        return es.closed_form(phi, n)
    except DomainError:
        return None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _pointwise_verdict(phi: pot.Potential, seed: int) -> PIVerdict:
    if phi.verdict is not None:
        return phi.verdict
    verdicts = [is_positivity_improving(LinearMap(phi.algebra, m), seed=seed) for m in phi.maps]
    if PIVerdict.CERTIFIED_FALSE in verdicts:
        return PIVerdict.CERTIFIED_FALSE
    if all(v is PIVerdict.CERTIFIED_TRUE for v in verdicts):
        return PIVerdict.CERTIFIED_TRUE
    return PIVerdict.PROBABLY_TRUE


def _eventual_improvement(phi: pot.Potential, seed: int, trials: int = 20) -> int | None:
    """Worst first step at which L^n maps constant rank-one projectors to strictly positive values."""
    alg = phi.algebra
    rng = np.random.default_rng(seed)
    if alg.is_matrix:
        dirs = list(np.eye(alg.size)) + list(rng.standard_normal((trials, alg.size)))
        elems = [np.outer(x, x) / (x @ x) for x in dirs]
    else:
        elems = list(np.eye(alg.size))
    worst = 0
    for e in elems:
        g = CylinderFunction.constant(e, alg, phi.shift)
        n = tr.first_strictly_positive_iterate(phi, g, EVENTUAL_STEPS)
        if n is None:
            return None
        worst = max(worst, n)
    return worst


def cmd_check(cfg: dict, run: config.RunSettings) -> _Outcome:
    shift = config.build_shift(cfg)
    phi = config.build_potential(cfg, shift)
    aperiodic = shift.is_aperiodic()
    dev = pot.check_normalized(phi)
    verdict = _pointwise_verdict(phi, run.seed)
    results = {
        "aperiodic": aperiodic,
        "primitivity_exponent": shift.primitivity_exponent,
        "normalization_deviation": dev,
        "normalized": dev <= NORMALIZATION_TOL,
        "certificate": phi.certificate,
        "positivity_verdict": verdict.value,
    }
    pi_ok = verdict is not PIVerdict.CERTIFIED_FALSE
    if not pi_ok and phi.certificate == "none":
        # branchwise maps may fail the pointwise test while the operator still improves
        step = _eventual_improvement(phi, run.seed)
        results["eventual_improvement_step"] = step
        pi_ok = step is not None
    results["potential"] = _potential_block(phi)
    return _Outcome(results, aperiodic and dev <= NORMALIZATION_TOL and pi_ok)


def cmd_iterate(cfg: dict, run: config.RunSettings) -> _Outcome:
    phi = config.build_potential(cfg)
    g = config.build_function(cfg, phi, run.seed)
    res = tr.power_iterate(phi, g, run.tol, run.max_iter, run.theta)
    log = res.log
    results = {
        "converged": res.converged,
        "steps": log.steps,
        "eta_estimate": res.eta_estimate,
        "final_spread": log.records[-1][1],
        "final_off_identity": log.records[-1][2],
        "decay_rate": log.decay_rate(),
        # reported, not enforced: the theory gives no monotonicity guarantee
        "spread_monotone": log.spread_monotone(after=max(phi.depth, 1)),
        "g_depth": g.depth,
        "potential": _potential_block(phi),
    }
    ref = _reference_state(phi, max(g.depth, phi.depth, 1))
    if ref is not None:
        exact = ref(g)
        results["eta_closed_form"] = exact
        results["eta_error"] = abs(res.eta_estimate - exact)
    code = EXIT_OK if res.converged else EXIT_NONCONVERGENCE
    return _Outcome(results, res.converged, code, log.to_csv())


def cmd_spectrum(cfg: dict, run: config.RunSettings) -> _Outcome:
    phi = config.build_potential(cfg)
    n = _section_depth(phi, run)
    spec = tr.spectrum(tr.assemble_matrix(phi, n))
    results = {
        "section_depth": n,
        "summary": spec.summary(),
        "eigenvalues": spec.to_json(),
        "potential": _potential_block(phi),
    }
    ok = spec.multiplicity_of_one == 1 and spec.second_modulus < 1.0 - GAP_TOL
    return _Outcome(results, ok)


def cmd_eigenstate(cfg: dict, run: config.RunSettings) -> _Outcome:
    phi = config.build_potential(cfg)
    n = _section_depth(phi, run)
    eta = es.extract(phi, n)
    fixed = es.check_fixed(eta, phi)
    results = {
        "section_depth": n,
        "solve_residual": eta.residual,
        "fixed_point_residual": fixed,
        "unit_value": eta.unit_value(),
        "faithful": eta.is_faithful(),
        "min_weight_eigenvalue": eta.min_weight_eigenvalue(),
        "state": eta.to_json(),
        "potential": _potential_block(phi),
    }
    ok = fixed <= RESIDUAL_TOL and eta.residual <= RESIDUAL_TOL and eta.is_faithful()
    ref = _reference_state(phi, n)
    if ref is not None:
        gap = es.max_difference(eta, ref, min(n, 2))
        results["closed_form_family"] = ref.source
        results["closed_form_gap"] = gap
        ok = ok and gap <= RESIDUAL_TOL
    return _Outcome(results, ok)


def cmd_entropy(cfg: dict, run: config.RunSettings) -> _Outcome:
    phi = config.build_potential(cfg)
    n = max(phi.depth, 1) if run.cylinder_depth is None else max(int(run.cylinder_depth), phi.depth)
    report = ent.nc_entropy(phi, es.extract(phi, n))
    results = {"section_depth": n, "entropy": report.to_json(), "jensen_holds": report.jensen_holds,
               "potential": _potential_block(phi)}
    return _Outcome(results, report.jensen_holds)


def _mc_block(est: mc.MCEstimate, exact: float) -> dict:
    diff = abs(est.estimate - exact)
    z = diff / est.std_error if est.std_error > 0 else (0.0 if diff <= 1e-12 else float("inf"))
    return dict(est.to_json(), exact=exact, abs_error=diff, z_score=z, within=z <= MC_SIGMAS)


def cmd_mc(cfg: dict, run: config.RunSettings) -> _Outcome:
    phi = config.build_potential(cfg)
    g = config.build_function(cfg, phi, run.seed)
    sampler = mc.SamplerConfig(seed=run.seed, samples=run.samples, workers=run.workers)
    exact_state = es.closed_form_trace_type(phi, max(g.depth, phi.depth, 1)) \
        if phi.is_trace_type else None
    eta_est = mc.estimate_eta(phi, g, sampler)
    h_est = mc.estimate_entropy(phi, sampler)
    eta_block = _mc_block(eta_est, exact_state(g))
    h_block = _mc_block(h_est, ent.nc_entropy(phi).h)
    results = {"eta": eta_block, "entropy": h_block, "g_depth": g.depth,
               "potential": _potential_block(phi)}
    return _Outcome(results, eta_block["within"] and h_block["within"])


def cmd_verify_paper(cfg: dict | None, run: config.RunSettings | None) -> _Outcome:
    rows = paper.run_all()
    results = {"rows": [r.to_json() for r in rows], "table": paper.format_table(rows),
               "failures": sum(not r.passed for r in rows)}
    return _Outcome(results, all(r.passed for r in rows))


HANDLERS = {
    "check": cmd_check,
    "iterate": cmd_iterate,
    "spectrum": cmd_spectrum,
    "eigenstate": cmd_eigenstate,
    "entropy": cmd_entropy,
    "mc": cmd_mc,
    "verify-paper": cmd_verify_paper,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncruelle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ncruelle {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "verify-paper", metavar="PATH")
        p.add_argument("--out", metavar="PATH", help="write the JSON report here")
        p.add_argument("--csv", metavar="PATH", help="write the iteration log here (iterate)")
        p.add_argument("--seed", type=int, metavar="N", help="override run.seed")
    return parser


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def run_command(command: str, cfg: dict | None, seed: int | None = None) -> tuple[dict, _Outcome]:
    """Run one command on a validated config; returns the report and the outcome."""
    run = None
    if cfg is not None:
        run = config.settings(cfg)
        if seed is not None:
            if seed < 0:
                raise config.ConfigError("--seed", "seed must be non-negative")
            run.seed = int(seed)
    start = time.perf_counter()
    outcome = HANDLERS[command](cfg, run)
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config": cfg,
        "seed": None if run is None else run.seed,
        "results": outcome.results,
        "passed": outcome.passed,
        "exit_code": outcome.code,
        "timing": {"seconds": time.perf_counter() - start},
    }
    return report, outcome


def _error_report(command, cfg, code, exc) -> dict:
    return {"schema_version": SCHEMA_VERSION, "version": __version__, "command": command,
            "config": cfg, "passed": False, "exit_code": code,
            "error": {"type": type(exc).__name__, "message": str(exc),
                      "path": getattr(exc, "path", None)}}


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, config.ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, CapacityError):
        return EXIT_CAPACITY
    if isinstance(exc, EigensolverError):
        return EXIT_NONCONVERGENCE
    if isinstance(exc, (NormalizationError, DegenerateEigenvalueError)):
        return EXIT_INVALID
    # remaining domain errors mean the config asks for something the family cannot do
    return EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    out_path = args.out
    csv_path = args.csv
    try:
        if args.config is not None:
            cfg = config.load(args.config)
            output = cfg.get("output", {})
            out_path = out_path or output.get("report_path")
            csv_path = csv_path or output.get("csv_path")
        report, outcome = run_command(args.command, cfg, args.seed)
    except NCRuelleError as exc:
        code = _exit_code(exc)
        print(f"ncruelle {args.command}: error: {exc}", file=sys.stderr)
        if out_path:
            _write(out_path, dump_report(_error_report(args.command, cfg, code, exc)))
        return code

    text = dump_report(report)
    if out_path:
        _write(out_path, text)
    if csv_path and outcome.csv_text is not None:
        _write(csv_path, outcome.csv_text)
    if args.command == "verify-paper":
        print(outcome.results["table"])
        print(f"{len(report['results']['rows']) - outcome.results['failures']} passed, "
              f"{outcome.results['failures']} failed")
    elif not out_path:
        sys.stdout.write(text)
    else:
        print(f"ncruelle {args.command}: {'PASS' if outcome.passed else 'FAIL'} "
              f"(exit {outcome.code}) -> {out_path}")
    return outcome.code


if __name__ == "__main__":
    raise SystemExit(main())

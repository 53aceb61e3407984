"""Command-line driver.

Subcommands ``check``, ``bound``, ``mult``, ``complement``, ``triangle`` and
``acceptance``.
Reports are JSON on stdout (or ``--out``); exit codes are 0 on success,
1 for usage or parse errors, 2 when a mathematical precondition fails and 3
when a numerical check fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .complement import complement_consistency_check
from .covariant import (
    CP_TOL,
    ABFamilySpec,
    NotCPTP,
    WeylChannel,
    ab_family,
    ab_triangle_classify,
    ab_triangle_corners,
    kraus_operators,
    verify_covariance,
)
from .norms import (
    EQUALITY_ATOL,
    TENSOR_DIM_CAP,
    equality_conditions,
    find_witness,
    kmnr_bound,
    multiplicativity_experiment,
    theorem3_state_check,
)
from .specfile import SpecError, complex_pairs, load_channel_spec, load_document, parse_channel_spec, parse_kraus_document
from .weyl import verify_weyl_relations
from .zgroup import ENUMERATION_LIMIT, GroupElement, Subgroup, cyclic_subgroup

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_NUMERIC = 3

WEYL_TOL = 1e-12
COVARIANCE_TOL = 1e-10
SPECTRAL_TOL = 1e-9
TP_TOL = 1e-10


class PreconditionFailure(Exception):
    pass


@dataclass
class Outcome:
    report: dict
    code: int = EXIT_OK
    text: str | None = None  # raw payload (CSV) instead of JSON


def jsonable(obj):
    """Convert results to plain JSON types; complex values become [re, im]."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, GroupElement):
        return obj.as_list()
    if isinstance(obj, Subgroup):
        return obj.as_lists()
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return complex_pairs(obj)
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _base_report(name: str, inputs: dict, **params) -> dict:
    return {"command": {"name": name, **params}, "inputs": inputs}


def _channel_flags(c: WeylChannel) -> dict:
    return {
        "valid_map": True,
        "cp": c.is_cp_tp,
        "tp": bool(abs(c.phi[0, 0] - 1) <= CP_TOL),
        "contractive": c.is_contractive,
    }


def cmd_check(spec: str, tol: float | None = None, seed: int = 0) -> Outcome:
    c, digest = load_channel_spec(spec)
    cov_tol = COVARIANCE_TOL if tol is None else tol
    relations = verify_weyl_relations(c.d)
    cov = verify_covariance(c, samples=20, seed=seed)
    passed = max(relations.values()) <= WEYL_TOL and cov <= cov_tol
    report = _base_report("check", {"spec": spec, "sha256": digest}, seed=seed)
    report["results"] = {
        "d": c.d,
        "weyl_relations": relations,
        "covariance_deviation": cov,
        "phi": c.phi.ravel(),
        "p": c.p.ravel(),
    }
    report["flags"] = {**_channel_flags(c), "checks_passed": passed}
    return Outcome(report, EXIT_OK if passed else EXIT_NUMERIC)


def cmd_bound(spec: str, restarts: int = 64, seed: int = 0, tol: float | None = None) -> Outcome:
    c, digest = load_channel_spec(spec)
    if c.d > ENUMERATION_LIMIT:
        raise PreconditionFailure(f"d={c.d} is above the subgroup enumeration limit {ENUMERATION_LIMIT}")
    eq_tol = EQUALITY_ATOL if tol is None else tol
    report = _base_report("bound", {"spec": spec, "sha256": digest}, restarts=restarts, seed=seed)
    rep = equality_conditions(c, restarts, seed, numeric=c.is_cp_tp)
    results = {
        "d": c.d,
        "nu2_bound": rep.nu2_bound,
        "emax": {"max_abs_phi": rep.emax.max_abs_phi, "members": rep.emax.members, "size": len(rep.emax.members)},
        "necessary_holds": rep.necessary_holds,
        "witness": None,
    }
    code = EXIT_OK
    if rep.sufficient_witness is not None:
        g, psi = rep.sufficient_witness
        state = theorem3_state_check(c, rep.sufficient_witness)
        results["witness"] = {
            "subgroup": g,
            "vector": psi,
            "tr_phi_rho_sq": state.tr_phi_rho_sq,
            "fourier_identity": state.fourier_identity,
            "bound_sq": state.bound_sq,
            "match": state.match,
            "support": state.support,
        }
        if not state.match:
            code = EXIT_NUMERIC
    if c.is_cp_tp:
        attained = abs(rep.nu2_numeric - rep.nu2_bound) <= eq_tol
        results["nu2_numeric"] = rep.nu2_numeric
        results["optimizer_state"] = rep.optimizer_state
        results["equality_attained"] = attained
        if rep.sufficient_witness is not None and not attained:
            code = EXIT_NUMERIC
    else:
        results["nu2_numeric"] = None
        results["equality_attained"] = rep.equality_attained
        report["notice"] = "map is not completely positive; numeric nu_2 skipped, bound only"
    report["results"] = results
    report["flags"] = _channel_flags(c)
    return Outcome(report, code)


def _load_factor(path: str):
    doc, digest = load_document(path)
    if "operators" in doc:
        return parse_kraus_document(doc), digest, "kraus"
    c = parse_channel_spec(doc)
    if not c.is_cp_tp:
        raise PreconditionFailure(f"{path}: second factor must be completely positive")
    return kraus_operators(c), digest, "spec"


def cmd_mult(spec_a: str, spec_b: str, restarts: int = 64, seed: int = 0, tol: float | None = None) -> Outcome:
    c, digest_a = load_channel_spec(spec_a)
    if not c.is_cp_tp:
        raise PreconditionFailure(f"{spec_a}: first factor must be a CP-TP Weyl channel")
    omega, digest_b, kind = _load_factor(spec_b)
    dims = max(c.d * omega[0].shape[0], c.d * omega[0].shape[1])
    if dims > TENSOR_DIM_CAP:
        raise PreconditionFailure(f"tensor dimension {dims} exceeds the cap {TENSOR_DIM_CAP}")
    try:
        m = multiplicativity_experiment(c, omega, restarts, seed)
    except ValueError as err:
        raise PreconditionFailure(str(err)) from err
    rel = 1e-6 if tol is None else tol
    multiplicative = abs(m.nu2_tensor - m.product) <= rel * m.product
    report = _base_report(
        "mult",
        {"spec_a": spec_a, "sha256_a": digest_a, "factor_b": spec_b, "sha256_b": digest_b, "factor_b_kind": kind},
        restarts=restarts,
        seed=seed,
    )
    report["results"] = {
        "nu2_phi": m.nu2_phi,
        "nu2_omega": m.nu2_omega,
        "nu2_tensor": m.nu2_tensor,
        "product": m.product,
        "tol": rel * m.product,
        "multiplicative": multiplicative,
    }
    hypothesis = m.hypothesis_contractive and m.hypothesis_equality
    report["flags"] = {
        "hypothesis_contractive": m.hypothesis_contractive,
        "hypothesis_equality": m.hypothesis_equality,
        "lower_bound_ok": m.nu2_tensor >= m.product - rel * m.product,
    }
    failed = (hypothesis and not multiplicative) or not report["flags"]["lower_bound_ok"]
    return Outcome(report, EXIT_NUMERIC if failed else EXIT_OK)


def cmd_complement(spec: str, samples: int = 50, seed: int = 0, tol: float | None = None) -> Outcome:
    c, digest = load_channel_spec(spec)
    if not c.is_cp_tp:
        raise PreconditionFailure("complementary channel needs a CP-TP channel")
    spec_tol = SPECTRAL_TOL if tol is None else tol
    chk = complement_consistency_check(c, samples, seed)
    tp_dev = max(chk.tp_deviation_general, chk.tp_deviation_structured)
    report = _base_report("complement", {"spec": spec, "sha256": digest}, samples=samples, seed=seed)
    report["results"] = {
        "environment_dim": chk.environment_dim,
        "tp_deviation": tp_dev,
        "spectral_deviation": chk.spectral_deviation,
        "general_vs_structured": chk.general_vs_structured,
        "channel_vs_complement": chk.channel_vs_complement,
    }
    passed = chk.spectral_deviation <= spec_tol and tp_dev <= TP_TOL
    report["flags"] = {**_channel_flags(c), "checks_passed": passed}
    return Outcome(report, EXIT_OK if passed else EXIT_NUMERIC)


TRIANGLE_FIELDS = ["a", "b", "corner", "region", "bound", "equality"]


def _grid(lo: float, hi: float, step: float) -> list[float]:
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def triangle_rows(d: int, step: float, generator: GroupElement | None = None) -> list[dict]:
    """(a, b) scan over a rectangle covering the channel triangle, corners first."""
    if d < 2 or step <= 0:
        raise PreconditionFailure("triangle needs d >= 2 and step > 0")
    g = cyclic_subgroup(generator if generator is not None else GroupElement(0, 1, d))
    if g.order != d:
        raise PreconditionFailure(f"generator spans a subgroup of order {g.order} < d")
    corners = ab_triangle_corners(d)
    points = [(name, a, b) for name, (a, b) in corners.items()]
    a_lo, a_hi = corners["E"][0], corners["B"][0]
    b_lo, b_hi = corners["B"][1], corners["A"][1]
    points += [("", a, b) for a in _grid(a_lo, a_hi, step) for b in _grid(b_lo, b_hi, step)]
    rows = []
    for name, a, b in points:
        c = ab_family(ABFamilySpec(d, g, a, b))
        equality = "" if d > ENUMERATION_LIMIT else find_witness(c) is not None
        rows.append({
            "a": a,
            "b": b,
            "corner": name,
            "region": ab_triangle_classify(d, a, b),
            "bound": kmnr_bound(c),
            "equality": equality,
        })
    return rows


def cmd_triangle(d: int, step: float, generator: GroupElement | None = None) -> Outcome:
    rows = triangle_rows(d, step, generator)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRIANGLE_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    report = _base_report("triangle", {"d": d, "step": step})
    report["results"] = {"rows": len(rows)}
    return Outcome(report, EXIT_OK, buf.getvalue())


def cmd_acceptance(only=None) -> Outcome:
    from .acceptance import CRITERIA, run_all

    unknown = sorted(set(only or ()) - set(CRITERIA))
    if unknown:
        raise PreconditionFailure(f"unknown criteria {unknown}; choose from 1..{len(CRITERIA)}")
    results = run_all(only)
    for r in results:
        print(r.line(), file=sys.stderr)
    report = _base_report("acceptance", {}, only=sorted(only) if only else None)
    report["results"] = {
        str(r.number): {"title": r.title, "passed": r.passed, "metrics": r.metrics, "seconds": r.seconds}
        for r in results
    }
    passed = all(r.passed for r in results)
    report["flags"] = {"all_passed": passed}
    return Outcome(report, EXIT_OK if passed else EXIT_NUMERIC)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weylcov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, restarts=False, samples=False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None, help="override the command's check tolerance")
        p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
        if restarts:
            p.add_argument("--restarts", type=int, default=64)
        if samples:
            p.add_argument("--samples", type=int, default=50)

    p = sub.add_parser("check", help="validate a channel spec")
    p.add_argument("--spec", required=True)
    common(p)
    p = sub.add_parser("bound", help="2-norm bound, E_max, witness and equality verdict")
    p.add_argument("--spec", required=True)
    common(p, restarts=True)
    p = sub.add_parser("mult", help="multiplicativity experiment for Phi (x) Omega")
    p.add_argument("--spec", required=True, help="Weyl channel spec for Phi")
    p.add_argument("--other", required=True, help="channel spec or Kraus file for Omega")
    common(p, restarts=True)
    p = sub.add_parser("complement", help="complementary channel diagnostics")
    p.add_argument("--spec", required=True)
    common(p, samples=True)
    p = sub.add_parser("triangle", help="CSV scan of the (a, b) channel triangle")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--generator", type=int, nargs=2, default=None, metavar=("X", "Y"))
    p.add_argument("--out", type=Path, default=None)
    p = sub.add_parser("acceptance", help="run the acceptance criteria")
    p.add_argument("--only", type=int, nargs="+", default=None, metavar="N")
    p.add_argument("--out", type=Path, default=None)
    return parser


def run(args) -> Outcome:
    if args.command == "check":
        return cmd_check(args.spec, args.tol, args.seed)
    if args.command == "bound":
        return cmd_bound(args.spec, args.restarts, args.seed, args.tol)
    if args.command == "mult":
        return cmd_mult(args.spec, args.other, args.restarts, args.seed, args.tol)
    if args.command == "complement":
        return cmd_complement(args.spec, args.samples, args.seed, args.tol)
    if args.command == "acceptance":
        return cmd_acceptance(args.only)
    gen = GroupElement(*args.generator, args.d) if args.generator else None
    return cmd_triangle(args.d, args.step, gen)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        outcome = run(args)
    except (SpecError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionFailure, NotCPTP) as err:
        print(f"precondition failed: {err}", file=sys.stderr)
        return EXIT_PRECONDITION
    if outcome.text is not None:
        payload = outcome.text
    else:
        outcome.report["timing"] = {"seconds": time.perf_counter() - start}
        payload = json.dumps(jsonable(outcome.report), indent=2) + "\n"
    if args.out is not None:
        args.out.write_text(payload)
    else:
        sys.stdout.write(payload)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())

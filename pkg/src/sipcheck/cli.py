"""Command-line front end: ``sip <subcommand> --norm FILE ...``.

Every subcommand prints a single JSON document (or a plain text listing
with ``--output text``) on stdout.  Exit status 0 means the computation
ran, whatever the verdicts; 2 means invalid input; 3 a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import auerbach, checker, geometry, norms, sip, spectral
from .errors import InvalidInput, NumericalFailure

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}") from None


def parse_basis(text: str) -> list:
    return [parse_vector(chunk) for chunk in text.split(";") if chunk.strip()]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _emit(result: dict, fmt: str, out) -> None:
    result = _jsonable(result)
    if fmt == "json":
        # float repr is the shortest string that round-trips the double
        out.write(json.dumps(result, separators=(",", ":")) + "\n")
        return
    for key, value in result.items():
        out.write(f"{key}: {json.dumps(value, separators=(',', ':'))}\n")


def _sampler(args):
    return checker.Sampler(seed=args.seed, count=args.samples, strategy=args.strategy)


def _op(args, spec):
    return spectral.as_matrix(spectral.load_operator(args.op), spec.dim)


def cmd_eval(args, spec):
    return {"value": sip.sip_eval(spec, args.x, args.y)}


def cmd_axioms(args, spec):
    return sip.sip_axiom_report(spec, args.samples, args.seed).to_dict()


def cmd_check_aa(args, spec):
    r = checker.adjoint_abelian_residual(spec, _op(args, spec), _sampler(args))
    return {"aa_residual": r, "verdict": r <= args.tol}


def cmd_transversal(args, spec):
    r = checker.check_transversal_normal(spec, args.U, args.V, _sampler(args))
    return {"residual": r, "verdict": r <= args.tol}


def cmd_direct_sum(args, spec):
    r = checker.check_direct_sum(spec, args.subspace, _sampler(args))
    return {"residual": r, "verdict": r <= args.tol}


def cmd_isometry(args, spec):
    r = checker.check_isometry(spec, _op(args, spec), _sampler(args))
    return {"residual": r, "verdict": r <= args.tol}


def cmd_lemma5(args, spec):
    r = checker.lemma_decomposition_residual(spec, _op(args, spec), args.z, args.x)
    return {"residual": r, "verdict": r <= args.tol}


def cmd_power_id(args, spec):
    r = checker.power_identity_residual(spec, _op(args, spec), args.z, args.x, args.n)
    return {"residual": r, "n": args.n, "verdict": r <= args.tol}


def cmd_verify_theorem(args, spec):
    report = checker.verify_theorem(spec, _op(args, spec), _sampler(args), args.tol,
                                    args.group_tol)
    return report.to_dict()


def cmd_auerbach(args, spec):
    basis = auerbach.auerbach_search(spec, args.seed, args.restarts)
    if args.strict and not basis.converged:
        raise NumericalFailure(
            f"Auerbach search did not converge (pair residual {basis.pair_residual:.3g})")
    return basis.to_dict()


def cmd_section(args, spec):
    frame = geometry.make_frame(spec, args.u, args.v)
    return {"point": geometry.section_point(spec, frame, args.theta)}


def cmd_ellipse(args, spec):
    frame = geometry.make_frame(spec, args.u, args.v)
    return {"residual": geometry.ellipse_fit_residual(spec, frame, args.grid)}


def cmd_ode(args, spec):
    frame = geometry.make_frame(spec, args.u, args.v)
    return geometry.ode_residual(spec, frame, args.x0).to_dict()


def cmd_lipschitz(args, spec):
    est = geometry.lipschitz_scan(spec, args.x, args.mesh, args.refine, args.seed)
    return est.to_dict()


def cmd_ucont(args, spec):
    with open(args.pairs, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{args.pairs}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or set(obj) != {"pairs"}:
        raise InvalidInput('pairs file must be {"pairs": [[y, z], ...]}')
    pairs = []
    for item in obj["pairs"]:
        if not isinstance(item, list) or len(item) != 2:
            raise InvalidInput("each pair must be [y, z]")
        pairs.append((item[0], item[1]))
    return geometry.uniform_continuity_probe(spec, args.x, pairs).to_dict()


def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get("SIP_SEED")
    try:
        default_seed = int(env_seed) if env_seed is not None else 7
    except ValueError:
        default_seed = 7

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--norm", required=True, help="norm spec JSON file")
    common.add_argument("--seed", type=int, default=default_seed)
    common.add_argument("--samples", type=int, default=512)
    common.add_argument("--strategy", choices=checker.STRATEGIES, default="mixed")
    common.add_argument("--tol", type=float, default=1e-7)
    common.add_argument("--group-tol", type=float, default=1e-8)
    common.add_argument("--output", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(
        prog="sip",
        description="Semi-inner-products of smooth norms and adjoint abelian operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    vec = parse_vector
    p = add("eval", cmd_eval, "evaluate [x, y]")
    p.add_argument("--x", type=vec, required=True)
    p.add_argument("--y", type=vec, required=True)

    add("axioms", cmd_axioms, "semi-inner-product axiom report")

    for name, func, text in (("check-aa", cmd_check_aa, "adjoint abelian residual"),
                             ("isometry", cmd_isometry, "isometry residual"),
                             ("verify-theorem", cmd_verify_theorem,
                              "full adjoint-abelian characterization report")):
        add(name, func, text).add_argument("--op", required=True, help="operator JSON file")

    p = add("transversal", cmd_transversal, "transversal-and-normal residual")
    p.add_argument("--U", type=vec, action="append", required=True)
    p.add_argument("--V", type=vec, action="append", required=True)

    p = add("direct-sum", cmd_direct_sum, "direct-sum splitting residual")
    p.add_argument("--subspace", type=parse_basis, action="append", required=True,
                   help="basis as 'v1;v2;...' (repeat per subspace)")

    p = add("lemma5", cmd_lemma5, "[z, x] versus [z, x_i] for z in one group")
    p.add_argument("--op", required=True)
    p.add_argument("--z", type=vec, required=True)
    p.add_argument("--x", type=vec, required=True)

    p = add("power-id", cmd_power_id, "power identity residual")
    p.add_argument("--op", required=True)
    p.add_argument("--z", type=vec, required=True)
    p.add_argument("--x", type=vec, required=True)
    p.add_argument("--n", type=int, default=1)

    p = add("auerbach", cmd_auerbach, "Auerbach basis search")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when the search does not converge")

    for name, func, text in (("section", cmd_section, "unit sphere point in a plane"),
                             ("ellipse", cmd_ellipse, "centered-ellipse fit residual"),
                             ("ode", cmd_ode, "section graph differential equation residual")):
        p = add(name, func, text)
        p.add_argument("--u", type=vec, required=True)
        p.add_argument("--v", type=vec, required=True)
        if name == "section":
            p.add_argument("--theta", type=float, required=True)
        elif name == "ellipse":
            p.add_argument("--grid", type=int, default=64)
        else:
            p.add_argument("--x0", type=float, required=True)

    p = add("lipschitz", cmd_lipschitz, "Lipschitz quotient scan")
    p.add_argument("--x", type=vec, required=True)
    p.add_argument("--mesh", type=int, default=64)
    p.add_argument("--refine", type=int, default=4)

    p = add("ucont", cmd_ucont, "uniform continuity probe over given pairs")
    p.add_argument("--x", type=vec, required=True)
    p.add_argument("--pairs", required=True, help='JSON file {"pairs": [[y, z], ...]}')
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.tol <= 0:
        stderr.write("sip: error: --tol must be positive\n")
        return EXIT_INPUT
    try:
        spec = norms.load_norm(args.norm)
        result = args.func(args, spec)
    except (InvalidInput, OSError) as exc:
        stderr.write(f"sip: error: {exc}\n")
        return EXIT_INPUT
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        stderr.write(f"sip: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    _emit(result, args.output, stdout)
    return EXIT_OK


def main() -> None:
    sys.exit(run())

"""
Command line of the library: one subcommand per operation, one JSON report per run.

E.g.:
    python -m cli_reporting.scripts.run rho --op data/T.json --p 2 --q 2 --seed 0
    python -m cli_reporting.scripts.run run --config results/rho.json

Exit codes: 0 when every item passed, 2 when a certification failed, 1 on input errors.
"""
import argparse
import os
import sys
import time
from dataclasses import replace

import numpy as np

from lattice_spaces.scripts.errors import CertificationError, ExtensionError, FactorizationError, LatticeInputError
from lattice_spaces.scripts.serialization import (load_json, operator_from_dict, read_operator, read_space,
                                                  space_from_dict)
from lattice_spaces.scripts.settings import DEFAULT_RESTARTS, corpus_root
from lattice_spaces.scripts.spaces import Exponent
from regular_norms.scripts.estimates import ORACLE_EXACT, RegularityParams
from regular_norms.scripts.regular_norms import rho_lower_bound, rho_oracle
from tensor_norms.scripts.tensor_norms import TENSOR_NORMS, tensor_norm
from tensor_norms.scripts.tensors import tensor_from_dict
from factorization.scripts.factorize import (DEFAULT_MAX_CUTS, MR_MODE, STRONG_MODE, maurey_rosenthal_factorize,
                                             strong_factorization_condition, strong_factorize_Lr,
                                             verify_factorization)
from factorization.scripts.mz_sweep import mz_coincidence_sweep, read_grid, write_sweep_csv
from extension.scripts.dyadic import DyadicLevel, dyadic_Jn, dyadic_Pn
from extension.scripts.hahn_banach import (RestrictedOperator, Subspace, certify_extension,
                                           extend_operator_Lq, hahn_banach_extend, restrict)
from cli_reporting.scripts.config import RunConfig, read_config
from cli_reporting.scripts.report import Report, write_report
from cli_reporting.scripts.verify_suite import verify_suite

INPUT_ROLES = {
    "rho": ("op",),
    "tensor-norm": ("tensor",),
    "factorize": ("op",),
    "extend": ("space", "subspace", "op"),
    "mz-sweep": ("grid",),
    "verify": ("corpus",),
}
PARAM_NAMES = {
    "rho": ("p", "q", "tuple_size", "restarts", "oracle"),
    "tensor-norm": ("norm", "p", "q"),
    "factorize": ("mode", "p", "q", "s", "r", "constant", "max_cuts"),
    "extend": ("q", "level"),
    "mz-sweep": ("n", "samples"),
    "verify": ("battery", "scale"),
}


def run_rho(config, report):
    """rho_{p,q}(T) by the ascent estimator, or by the exhaustive oracle with --oracle."""
    operator = read_operator(config.input_path("op"))
    params = RegularityParams(config.param("p", required=True), config.param("q", required=True))
    tuple_size = int(config.param("tuple_size", 2))
    if config.param("oracle", False):
        estimate = rho_oracle(operator, params, tuple_size)
    else:
        estimate = rho_lower_bound(operator, params, tuple_size, seed=config.seed,
                                   restarts=int(config.param("restarts", DEFAULT_RESTARTS)))
    report.add("rho", estimate.to_dict(), oracle=estimate.upper_kind == ORACLE_EXACT)


def run_tensor_norm(config, report):
    tensor = tensor_from_dict(load_json(config.input_path("tensor")))
    bounds = tensor_norm(tensor, config.param("norm", required=True), config.param("p"), config.param("q"),
                         seed=config.seed)
    report.add("tensor_norm", bounds.to_dict())


def run_factorize(config, report):
    """Maurey-Rosenthal or strong factorization, followed by its verification.

    A constant that no weights can reach is a failed certification: the item carries
    the most violated pair and the violation history.
    """
    operator = read_operator(config.input_path("op"))
    mode = config.param("mode", MR_MODE)
    constant = config.param("constant")
    constant = None if constant is None else float(constant)
    max_cuts = int(config.param("max_cuts", DEFAULT_MAX_CUTS))
    extra = {}
    try:
        if mode == MR_MODE:
            result = maurey_rosenthal_factorize(operator, config.param("p", required=True),
                                                config.param("s", required=True), C_hint=constant,
                                                max_cuts=max_cuts, seed=config.seed)
        elif mode == STRONG_MODE:
            p, q, r = (config.param(name, required=True) for name in ("p", "q", "r"))
            extra["strong_condition"] = strong_factorization_condition(p, q, r)
            result = strong_factorize_Lr(operator, p, q, r, K=constant, max_cuts=max_cuts, seed=config.seed)
        else:
            raise LatticeInputError(f"unknown factorization mode {mode!r}, expected {MR_MODE} or {STRONG_MODE}")
    except FactorizationError as error:
        report.add("factorization", {"mode": mode, "message": str(error), "witness": error.witness,
                                     "history": error.history, **extra}, ok=False)
        return
    check = verify_factorization(result, operator, seed=config.seed)
    ok = check.weights_ok and check.residual <= config.tolerance("residual") \
        and check.inner_norm_est <= result.constant * (1 + config.tolerance("estimator"))
    report.add("factorization", {**result.to_dict(), "check": check.to_dict(), **extra}, ok=ok)


def _read_subspace(ambient, path):
    data = load_json(path)
    basis = data.get("basis") if isinstance(data, dict) else data
    if basis is None:
        raise LatticeInputError(f"{path}: a subspace needs a basis")
    return Subspace(ambient, np.array(basis, dtype=float))


def _read_restricted(config):
    """The operator on X_0, from an ambient operator or from {codomain, images}."""
    data = load_json(config.input_path("op"))
    if not isinstance(data, dict):
        raise LatticeInputError(f"{config.input_path('op')}: an operator must be a JSON object")
    if "entries" in data:
        operator = operator_from_dict(data)
        ambient = read_space(config.inputs["space"]) if config.inputs.get("space") else operator.domain
        return restrict(operator, _read_subspace(ambient, config.input_path("subspace")))
    if "codomain" not in data or "images" not in data:
        raise LatticeInputError(f"{config.input_path('op')}: expected an operator or {{codomain, images}}")
    ambient = read_space(config.input_path("space"))
    subspace = _read_subspace(ambient, config.input_path("subspace"))
    return RestrictedOperator(subspace, space_from_dict(data["codomain"]), np.array(data["images"], dtype=float))


def run_extend(config, report):
    """Extension of an operator on a subspace, directly or through a dyadic level."""
    q, level = config.param("q"), config.param("level")
    result = {}
    try:
        restricted = _read_restricted(config)
        if level is not None:
            dyadic = DyadicLevel(int(level), q if q is not None else restricted.subspace.ambient.exponent)
            extension = extend_operator_Lq(restricted, dyadic, seed=config.seed)
            atoms = restricted.codomain.atom_count
            projection = dyadic_Jn(dyadic, atoms).entries @ dyadic_Pn(dyadic, atoms).entries
            target = RestrictedOperator(restricted.subspace, restricted.codomain, projection @ restricted.images)
            result["projection_residual"] = float(np.abs(target.images - restricted.images).max())
            q = dyadic.q
        else:
            q = Exponent.of(q if q is not None else restricted.codomain.exponent)
            extension = hahn_banach_extend(restricted, q, seed=config.seed)
            target = restricted
        record = certify_extension(target, extension, q, seed=config.seed)
    except ExtensionError as error:
        report.add("extension", {"message": str(error)}, ok=False)
        return
    scale = max(1.0, float(np.abs(target.images).max()))
    ok = record.agreement_residual <= config.tolerance("residual") * scale \
        and record.rho_after.lower <= record.rho_before * (1 + config.tolerance("estimator")) \
        + config.tolerance("residual")
    result.update({"extension": extension.entries, "q": q, "record": record.to_dict()})
    report.add("extension", result, ok=ok)


def run_mz_sweep(config, report):
    cells = mz_coincidence_sweep(read_grid(config.input_path("grid")), int(config.param("n", 2)),
                                 int(config.param("samples", 20)), seed=config.seed, threads=config.threads,
                                 verbose=not config.quiet)
    if config.csv:
        folder = os.path.dirname(config.csv)
        if folder:
            os.makedirs(folder, exist_ok=True)
        write_sweep_csv(cells, config.csv)
    for index, cell in enumerate(cells):
        report.add(f"cell_{index}", cell.to_row())


def run_verify(config, report):
    corpus = config.inputs.get("corpus") or corpus_root()
    suite = verify_suite(corpus, run, seed=config.seed, battery=bool(config.param("battery", True)),
                         scale=float(config.param("scale", 1.0)), threads=config.threads,
                         verbose=not config.quiet)
    report.items.extend(suite.items)


HANDLERS = {
    "rho": run_rho,
    "tensor-norm": run_tensor_norm,
    "factorize": run_factorize,
    "extend": run_extend,
    "mz-sweep": run_mz_sweep,
    "verify": run_verify,
}


def run(config):
    """Dispatches a configuration to the owning stage.

    Args:
        config (RunConfig): the run

    Returns:
        Report
    """
    report = Report(config.to_dict())
    start = time.perf_counter()
    HANDLERS[config.command](config, report)
    report.wall_time = time.perf_counter() - start
    return report


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors are input errors and exit with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def exponent_arg(text):
    """An exponent flag such as 2, 4/3 or inf; kept as text for the config echo."""
    Exponent.of(text)
    return text


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed of every stochastic estimator.")
    common.add_argument("--tol", type=float, default=None, help="relative acceptance tolerance of estimators.")
    common.add_argument("--out", "-o", default=None,
                        help="file name of the JSON report; a .csv name for mz-sweep writes the table there.")
    common.add_argument("--threads", type=int, default=None, help="worker threads of the orchestrator.")
    common.add_argument("--quiet", action="store_true", default=None, help="suppress progress output.")

    parser = ArgumentParser(description="Regular operators on finite atomic Banach function spaces.")
    commands = parser.add_subparsers(dest="command", required=True)

    rho = commands.add_parser("rho", parents=[common], help="estimate rho_{p,q}(T).")
    rho.add_argument("--op", required=True, help="operator file.")
    rho.add_argument("--p", type=exponent_arg, required=True)
    rho.add_argument("--q", type=exponent_arg, required=True)
    rho.add_argument("--tuple-size", dest="tuple_size", type=int, default=None)
    rho.add_argument("--restarts", type=int, default=None)
    rho.add_argument("--oracle", action="store_true", default=None, help="exhaustive search for small inputs.")

    tensor = commands.add_parser("tensor-norm", parents=[common], help="bounds of a tensor norm.")
    tensor.add_argument("--tensor", required=True, help="tensor file.")
    tensor.add_argument("--norm", choices=TENSOR_NORMS, required=True)
    tensor.add_argument("--p", type=exponent_arg, default=None)
    tensor.add_argument("--q", type=exponent_arg, default=None)

    factorize = commands.add_parser("factorize", parents=[common], help="factor T through L spaces.")
    factorize.add_argument("--op", required=True, help="operator file.")
    factorize.add_argument("--mode", choices=(MR_MODE, STRONG_MODE), default=None)
    for name in ("p", "q", "s", "r"):
        factorize.add_argument(f"--{name}", type=exponent_arg, default=None)
    factorize.add_argument("--constant", type=float, default=None, help="constant to reach.")
    factorize.add_argument("--max-cuts", dest="max_cuts", type=int, default=None)

    extend = commands.add_parser("extend", parents=[common], help="extend an operator from a subspace.")
    extend.add_argument("--ambient", "--space", dest="space", default=None, help="ambient space file.")
    extend.add_argument("--subspace", required=True, help="file with the basis of X_0.")
    extend.add_argument("--op", required=True, help="ambient operator or {codomain, images} file.")
    extend.add_argument("--q", type=exponent_arg, default=None)
    extend.add_argument("--level", type=int, default=None, help="dyadic level for L_q codomains.")

    sweep = commands.add_parser("mz-sweep", parents=[common], help="coincidence sweep over a grid.")
    sweep.add_argument("--grid", required=True, help="grid file, .json or .csv.")
    sweep.add_argument("--n", type=int, default=None)
    sweep.add_argument("--samples", type=int, default=None)
    sweep.add_argument("--csv", default=None, help="file name of the sweep table.")

    verify = commands.add_parser("verify", parents=[common], help="replay a corpus and run the battery.")
    verify.add_argument("--corpus", default=None, help="corpus folder; LATTICE_CORPUS_ROOT by default.")
    verify.add_argument("--battery", dest="battery", action="store_true")
    verify.add_argument("--no-battery", dest="battery", action="store_false")
    verify.add_argument("--scale", type=float, default=None, help="fraction of the battery's sample counts.")
    verify.set_defaults(battery=None)

    replay = commands.add_parser("run", parents=[common], help="replay an archived config or report.")
    replay.add_argument("--config", required=True, help="config or report file.")
    return parser


def _with_csv(config, csv=None):
    if config.command != "mz-sweep" or config.csv:
        return config
    stem, extension = os.path.splitext(config.output)
    if extension == ".csv":
        return replace(config, csv=csv or config.output, output=f"{stem}.json")
    return replace(config, csv=csv or f"{stem}.csv")


def config_from_args(args):
    """RunConfig of parsed command-line arguments."""
    if args.command == "run":
        config = read_config(args.config, seed=args.seed, output=args.out, threads=args.threads, quiet=args.quiet)
        if args.tol is not None:
            config = replace(config, tolerances={**config.tolerances, "estimator": args.tol})
        return _with_csv(config)
    inputs = {role: getattr(args, role) for role in INPUT_ROLES[args.command] if getattr(args, role) is not None}
    params = {name: getattr(args, name) for name in PARAM_NAMES[args.command] if getattr(args, name) is not None}
    config = RunConfig(
        command=args.command,
        seed=0 if args.seed is None else args.seed,
        inputs=inputs,
        params=params,
        tolerances={} if args.tol is None else {"estimator": args.tol},
        output=args.out or "",
        threads=args.threads or 1,
        quiet=bool(args.quiet),
    )
    return _with_csv(config, getattr(args, "csv", None))


def main(argv=None):
    """Runs the command line and returns the exit code."""
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        report = run(config)
        write_report(report, config.output, config.tolerance("oracle"))
    except LatticeInputError as error:
        print(f"Input error: {error}", file=sys.stderr)
        return 1
    except CertificationError as error:
        print(f"Certification failed: {error}", file=sys.stderr)
        return 2
    if not config.quiet:
        if report.ok:
            print(f"Successfully ran {config.command} on {len(report.items)} items. Saved result to {config.output}.")
        else:
            print(f"Ran {config.command} with failed items {', '.join(report.failures)}. "
                  f"Saved result to {config.output}.")
        if config.csv:
            print(f"Saved table to {config.csv}.")
    return report.exit_code


if __name__ == '__main__':
    sys.exit(main())

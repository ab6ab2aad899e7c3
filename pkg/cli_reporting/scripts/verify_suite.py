"""
Replay of the archived corpus, followed by the acceptance battery.

Every top-level .json file of the corpus folder is an archived run configuration
with an optional "expected" block. E.g.:

    {"command": "rho", "seed": 0, "inputs": {"op": "data/identity_l2.json"},
     "params": {"p": 2, "q": 2}, "expected": {"ok": true, "value": 1.0}}

Input paths are relative to the corpus folder. A value is matched when the first
lower/upper interval of the replayed report contains it within the tolerance.
"""
import os
from concurrent.futures import ThreadPoolExecutor

from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.serialization import load_json
from lattice_spaces.scripts.settings import ESTIMATOR_TOLERANCE
from cli_reporting.scripts.acceptance import run_battery
from cli_reporting.scripts.config import config_from_dict
from cli_reporting.scripts.report import Report


def load_instances(corpus):
    """Reads every instance of a corpus folder, in file name order.

    Args:
        corpus (string): folder path

    Returns:
        list of (name, RunConfig, expected dict)
    """
    if not os.path.isdir(corpus):
        raise LatticeInputError(f"corpus directory {corpus} does not exist")
    instances = []
    for name in sorted(os.listdir(corpus)):
        path = os.path.join(corpus, name)
        if not name.endswith(".json") or not os.path.isfile(path):
            continue
        data = load_json(path)
        try:
            config = config_from_dict(data, quiet=True).resolved(corpus)
        except LatticeInputError as error:
            raise LatticeInputError(f"{path}: {error}") from error
        expected = data.get("expected") or {}
        instances.append((name, config, expected))
    return instances


def first_interval(data):
    """(lower, upper) of the first dict holding both keys, depth first."""
    if isinstance(data, dict):
        if "lower" in data and "upper" in data:
            return float(data["lower"]), float(data["upper"])
        data = list(data.values())
    if isinstance(data, (list, tuple)):
        for value in data:
            found = first_interval(value)
            if found is not None:
                return found
    return None


def _problems(report, expected):
    problems = []
    if report.ok != bool(expected.get("ok", True)):
        problems.append(f"expected ok = {bool(expected.get('ok', True))}, got {report.ok}")
    value = expected.get("value")
    if value is not None:
        value = float(value)
        tolerance = float(expected.get("tolerance", ESTIMATOR_TOLERANCE))
        interval = first_interval([item["result"] for item in report.items])
        slack = tolerance * max(1.0, abs(value))
        if interval is None:
            problems.append("the report holds no interval")
        elif interval[0] > value + slack or interval[1] < value - slack:
            problems.append(f"interval [{interval[0]:.10g}, {interval[1]:.10g}] misses {value:.10g}")
    return problems


def replay_instance(instance, runner):
    """Runs one archived instance; failures are recorded, never raised."""
    name, config, expected = instance
    try:
        report = runner(config)
    except Exception as error:  # pylint: disable=broad-except
        return {"name": name, "ok": False, "oracle": False,
                "result": {"command": config.command, "error": f"{type(error).__name__}: {error}"}}
    problems = _problems(report, expected)
    return {"name": name, "ok": not problems, "oracle": any(item["oracle"] for item in report.items),
            "result": {"command": config.command, "problems": problems, "items": report.items}}


def verify_suite(corpus, runner, seed=0, battery=True, scale=1.0, threads=1, verbose=False, config=None):
    """Replays a corpus and runs the acceptance battery.

    Args:
        corpus (string): corpus folder
        runner (callable): RunConfig -> Report, the dispatcher of the command line
        seed (int): seed of the battery; instances keep their archived seeds
        battery (bool): run the acceptance battery after the replay
        scale (float): fraction of the battery's sample counts
        threads (int): instances replayed in parallel
        verbose (bool): print progress
        config (dict): configuration echo of the report

    Returns:
        Report with one item per instance and per criterion
    """
    instances = load_instances(corpus)
    report = Report(config or {"command": "verify", "corpus": corpus, "seed": seed})
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        replays = pool.map(lambda instance: replay_instance(instance, runner), instances)
        for index, item in enumerate(replays, start=1):
            report.items.append(item)
            if verbose:
                print(f"Checked {index} out of {len(instances)} instances.")
    if battery:
        for criterion in run_battery(seed, scale, verbose=verbose):
            report.add(f"criterion_{criterion.number}_{criterion.name}", criterion.to_dict(), ok=criterion.passed)
    return report

"""
Run reports and their writer-side checks.

A report holds the configuration echo, one entry per computed item, the wall time,
the library version and the oracle flag of every item. Every lower/upper pair in
the payload is checked before the file is written.
"""
import math
from dataclasses import dataclass, field

from lattice_spaces.scripts.errors import CertificationError
from lattice_spaces.scripts.serialization import dump_json, dumps_json
from lattice_spaces.scripts.settings import ORACLE_TOLERANCE

LIBRARY_VERSION = "0.1.0"


@dataclass
class Report:
    """
    Result of one run.

    config (dict): echo of the RunConfig
    items (list): dicts {name, ok, oracle, result}
    wall_time (float): seconds spent in the run
    version (string): library version
    """
    config: dict
    items: list = field(default_factory=list)
    wall_time: float = 0.0
    version: str = LIBRARY_VERSION

    def add(self, name, result, ok=True, oracle=False):
        """Appends one item; ok False marks a failed certification."""
        self.items.append({"name": name, "ok": bool(ok), "oracle": bool(oracle), "result": result})

    @property
    def ok(self):
        """True when no item failed."""
        return all(item["ok"] for item in self.items)

    @property
    def failures(self):
        """Names of the failed items."""
        return [item["name"] for item in self.items if not item["ok"]]

    @property
    def exit_code(self):
        """0 when every item passed, 2 otherwise."""
        return 0 if self.ok else 2

    def payload(self):
        """Everything but the wall time; identical for identical configs."""
        return {
            "config": self.config,
            "items": self.items,
            "version": self.version,
            "oracle_flags": {item["name"]: item["oracle"] for item in self.items},
            "ok": self.ok,
            "failures": self.failures,
        }

    def to_dict(self):
        data = self.payload()
        data["wall_time"] = self.wall_time
        return data


def check_intervals(data, tolerance=ORACLE_TOLERANCE, where="report"):
    """Raises CertificationError when a lower bound exceeds its upper bound.

    Every dict holding numeric lower and upper keys is checked against
    lower <= upper + tolerance * max(1, |upper|); a dict's own "tolerance" key wins.

    Args:
        data (object): decoded or in-memory report payload
        tolerance (float): default relative slack
        where (string): path used in the error message
    """
    if isinstance(data, dict):
        lower, upper = data.get("lower"), data.get("upper")
        if _is_number(lower) and _is_number(upper):
            slack = float(data["tolerance"]) if _is_number(data.get("tolerance")) else tolerance
            lower, upper = float(lower), float(upper)
            if not math.isinf(upper) and lower > upper + slack * max(1.0, abs(upper)):
                raise CertificationError(f"{where}: lower bound {lower} exceeds upper bound {upper}")
        for key, value in data.items():
            check_intervals(value, tolerance, f"{where}.{key}")
    elif isinstance(data, (list, tuple)):
        for index, value in enumerate(data):
            check_intervals(value, tolerance, f"{where}[{index}]")


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def write_report(report, path, tolerance=ORACLE_TOLERANCE):
    """Checks every interval and writes the report as JSON."""
    data = report.to_dict()
    check_intervals(data, tolerance)
    dump_json(data, path)
    return path


def numeric_payload(report):
    """The serialized payload, for byte comparisons between runs."""
    return dumps_json(report.payload())

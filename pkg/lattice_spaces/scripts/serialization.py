"""
JSON reading and writing of spaces, operators and reports.

Doubles are written as decimals with 17 significant digits so that every value
reads back bit for bit; non-finite values are written as null.
"""
import math
import os
from decimal import Decimal

import numpy as np
import simplejson as json

from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.spaces import Exponent, FunctionSpace, OperatorMatrix, WeightedLr

NORM_KINDS = ("weighted_lr", "lr")


def exact_decimal(value):
    """Decimal with 17 significant digits, or the float itself when not finite."""
    value = float(value)
    if not math.isfinite(value):
        return value
    return Decimal(format(value, ".17g"))


def to_jsonable(value):
    """Recursively converts numpy data, exponents and floats into JSON-ready values."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, Exponent):
        return value.to_json()
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return exact_decimal(value)
    return value


def dump_json(data, path):
    """Writes data to path, creating parent folders."""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, "w", encoding="utf8") as fp:
        json.dump(to_jsonable(data), fp, use_decimal=True, ignore_nan=True, indent=2, sort_keys=True)
        fp.write("\n")


def dumps_json(data):
    """String form of dump_json."""
    return json.dumps(to_jsonable(data), use_decimal=True, ignore_nan=True, indent=2, sort_keys=True)


def load_json(path):
    """Reads a JSON file; unreadable content is reported with the file name.

    Args:
        path (string): file path

    Returns:
        parsed JSON value
    """
    try:
        with open(path, "r", encoding="utf8") as fp:
            return json.load(fp)
    except json.JSONDecodeError as error:
        raise LatticeInputError(f"{path}: malformed JSON ({error.msg} at line {error.lineno})") from error
    except OSError as error:
        raise LatticeInputError(f"{path}: cannot be read ({error.strerror})") from error


def space_to_dict(space):
    """{atoms, weights[], norm: {kind, r}} for a WeightedLr space."""
    if not space.is_weighted_lr:
        raise LatticeInputError(f"custom norm {space.norm_kind.name!r} cannot be serialized")
    return {
        "atoms": space.atom_count,
        "weights": list(space.weights),
        "norm": {"kind": "weighted_lr", "r": space.norm_kind.r},
    }


def space_from_dict(data):
    """Builds a FunctionSpace from its JSON form.

    Args:
        data (dict): {atoms, weights, norm: {kind, r}}; weights default to ones

    Returns:
        FunctionSpace
    """
    try:
        norm_data = data["norm"]
        kind = norm_data.get("kind", "weighted_lr")
        exponent = Exponent.of(norm_data["r"])
    except (KeyError, TypeError, AttributeError) as error:
        raise LatticeInputError(f"space description is incomplete: {data!r}") from error
    if kind not in NORM_KINDS:
        raise LatticeInputError(f"unsupported norm kind {kind!r}")
    weights = data.get("weights")
    if weights is None:
        weights = [1.0] * int(data["atoms"])
    if "atoms" in data and int(data["atoms"]) != len(weights):
        raise LatticeInputError(f"space declares {data['atoms']} atoms but lists {len(weights)} weights")
    return FunctionSpace(tuple(weights), WeightedLr(exponent))


def operator_to_dict(operator):
    """{rows, cols, entries[][], domain, codomain}."""
    return {
        "rows": operator.codomain.atom_count,
        "cols": operator.domain.atom_count,
        "entries": operator.entries,
        "domain": space_to_dict(operator.domain),
        "codomain": space_to_dict(operator.codomain),
    }


def operator_from_dict(data):
    """Builds an OperatorMatrix from its JSON form."""
    try:
        domain = space_from_dict(data["domain"])
        codomain = space_from_dict(data["codomain"])
        entries = np.array(data["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as error:
        raise LatticeInputError(f"operator description is incomplete: {error}") from error
    if "rows" in data and entries.shape[0] != int(data["rows"]):
        raise LatticeInputError("operator rows do not match its entries")
    if "cols" in data and entries.ndim == 2 and entries.shape[1] != int(data["cols"]):
        raise LatticeInputError("operator cols do not match its entries")
    return OperatorMatrix(domain, codomain, entries)


def read_operator(path):
    """Loads an operator file."""
    return operator_from_dict(load_json(path))


def read_space(path):
    """Loads a space file."""
    return space_from_dict(load_json(path))

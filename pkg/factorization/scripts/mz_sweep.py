"""
Coincidence sweeps for Marcinkiewicz-Zygmund type inequalities.

For exponents (p, q) and spaces L_r1, L_r2 the sweep predicts whether every operator
L_r1 -> L_r2 is (p,q)-regular and measures the largest ratio rho_{p,q} lower bound
over ||T|| among sampled Gaussian operators.
"""
import argparse
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from lattice_spaces.scripts.errors import GuardError, LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.serialization import load_json
from lattice_spaces.scripts.spaces import Exponent, FunctionSpace, OperatorMatrix
from regular_norms.scripts.estimates import RegularityParams
from regular_norms.scripts.regular_norms import rho_lower_bound

MAX_SWEEP_ATOMS = 4
SWEEP_RESTARTS = 4
CSV_COLUMNS = ["p", "q", "r1", "r2", "predicted", "observed_ratio", "n", "samples"]


def _exists_between(low, high, low_open=False, high_open=False):
    """True when some t satisfies low <= t <= high, with strict ends where asked."""
    if low < high:
        return True
    return low == high and not low_open and not high_open


def _meets(q, p, low, high, low_open=False, high_open=False):
    """Is there t with q <= t <= p and t inside the interval (low, high) with the given ends?"""
    start, start_open = (q, False) if q > low else (low, low_open)
    if q == low:
        start_open = low_open
    end, end_open = (p, False) if p < high else (high, high_open)
    if p == high:
        end_open = high_open
    return _exists_between(start, end, start_open, end_open)


def mz_predicted(p, q, r1, r2):
    """True when every operator L_r1 -> L_r2 is (p,q)-regular by the six coincidence cases.

    Args:
        p, q (Exponent): regularity exponents
        r1, r2 (Exponent): exponents of the domain and codomain

    Returns:
        bool
    """
    p, q, r1, r2 = (Exponent.of(value).as_float() for value in (p, q, r1, r2))
    if q > p:
        return False
    if q <= r1 == r2 <= p:
        return True
    if r1 == r2 == 1 or r1 == r2 == math.inf:
        return True
    if 1 <= r2 <= r1 < 2 and _meets(q, p, r1, 2.0, low_open=True):
        return True
    if 2 < r2 <= r1 and _meets(q, p, 2.0, r2, high_open=True):
        return True
    return 1 <= r2 <= 2 <= r1 and q <= 2 <= p


# pylint: disable=R0903
@dataclass(frozen=True)
class MZCell:
    """
    One cell of a coincidence sweep.

    p, q, r1, r2 (Exponent): exponents of the cell
    coincidence_predicted (bool): value of mz_predicted
    observed_ratio (float): max over samples of rho lower bound / ||T|| upper bound
    n (int): atoms of both spaces
    samples (int): number of sampled operators
    """
    p: Exponent
    q: Exponent
    r1: Exponent
    r2: Exponent
    coincidence_predicted: bool
    observed_ratio: float
    n: int
    samples: int

    def to_row(self):
        """CSV row keyed by CSV_COLUMNS."""
        return {
            "p": self.p.to_json(), "q": self.q.to_json(), "r1": self.r1.to_json(), "r2": self.r2.to_json(),
            "predicted": self.coincidence_predicted, "observed_ratio": self.observed_ratio,
            "n": self.n, "samples": self.samples,
        }


def _cell_exponents(cell):
    try:
        return tuple(Exponent.of(cell[key]) for key in ("p", "q", "r1", "r2"))
    except (KeyError, TypeError) as error:
        raise LatticeInputError(f"grid cell {cell!r} needs keys p, q, r1, r2") from error


def observed_ratio(p, q, r1, r2, n, samples, seed=0, tuple_size=None, restarts=SWEEP_RESTARTS):
    """Max over sampled Gaussian T: L_r1^n -> L_r2^n of rho_{p,q} lower bound over ||T||."""
    params = RegularityParams(p, q).require_ordered()
    domain, codomain = FunctionSpace.lr(r1, atoms=n), FunctionSpace.lr(r2, atoms=n)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        operator = OperatorMatrix(domain, codomain, rng.standard_normal((n, n)))
        size = operator_norm_bounds(operator, seed=seed).upper
        if size == 0:
            continue
        rho = rho_lower_bound(operator, params, tuple_size or n, seed=seed, restarts=restarts).lower
        best = max(best, rho / size)
    return best


def mz_coincidence_sweep(grid, n, samples, seed=0, tuple_size=None, restarts=SWEEP_RESTARTS, threads=1,
                         verbose=False):
    """Predicted and observed coincidence for every cell of a grid.

    Args:
        grid (list): dicts with keys p, q, r1, r2
        n (int): atoms of the sampled operators, at most 4
        samples (int): operators per cell
        seed (int): seed shared by all cells
        tuple_size (int): tuple size of the rho search, n when None
        restarts (int): random starts of the rho search
        threads (int): cells swept in parallel; every cell keeps the shared seed
        verbose (bool): print progress

    Returns:
        list of MZCell
    """
    if not 1 <= int(n) <= MAX_SWEEP_ATOMS:
        raise GuardError("sweep_size", f"sweeps run at n <= {MAX_SWEEP_ATOMS} atoms, got n = {n}")
    if int(samples) < 1:
        raise LatticeInputError(f"samples must be positive, got {samples}")
    cells = [_cell_exponents(cell) for cell in grid]
    for p, q, _, _ in cells:
        RegularityParams(p, q).require_ordered()

    def sweep_cell(cell):
        p, q, r1, r2 = cell
        ratio = observed_ratio(p, q, r1, r2, int(n), int(samples), seed, tuple_size, restarts)
        return MZCell(p, q, r1, r2, mz_predicted(p, q, r1, r2), ratio, int(n), int(samples))

    results = []
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        for index, swept in enumerate(pool.map(sweep_cell, cells), start=1):
            results.append(swept)
            if verbose:
                print(f"Checked {index} out of {len(cells)} cells.")
    return results


def sweep_frame(cells):
    """DataFrame with the CSV_COLUMNS of the cells."""
    return pd.DataFrame([cell.to_row() for cell in cells], columns=CSV_COLUMNS)


def write_sweep_csv(cells, path):
    """Writes the sweep table and returns the frame."""
    frame = sweep_frame(cells)
    frame.to_csv(path, index=False)
    return frame


def read_grid(path):
    """Reads a grid from a .json list of cells or a .csv with columns p, q, r1, r2."""
    if not os.path.exists(path):
        raise LatticeInputError(f"grid file {path} does not exist")
    if path.endswith(".csv"):
        return pd.read_csv(path, dtype=str).to_dict(orient="records")
    data = load_json(path)
    if isinstance(data, dict):
        data = data.get("cells", [])
    return list(data)


if __name__ == '__main__':

    parser = argparse.ArgumentParser()
    parser.add_argument("--input",
                        "-i",
                        help="grid of (p, q, r1, r2) cells, .json or .csv.",
                        default="results/mz_grid.json")
    parser.add_argument("--output",
                        "-o",
                        help="file name of the sweep table.",
                        default="results/mz_sweep.csv")
    parser.add_argument("--n", type=int, default=2, help="atoms of the sampled operators.")
    parser.add_argument("--samples", type=int, default=20, help="operators per cell.")
    parser.add_argument("--seed", type=int, default=0, help="seed of the sampled operators.")
    parser.add_argument("--threads", type=int, default=1, help="cells swept in parallel.")
    args = parser.parse_args()

    sweep = mz_coincidence_sweep(read_grid(args.input), args.n, args.samples, args.seed, threads=args.threads,
                                 verbose=True)
    write_sweep_csv(sweep, args.output)
    print(f"Successfully swept {len(sweep)} cells. Saved result to {args.output}.")

"""CSV loading against the cavity-vacua column contracts."""

import csv
import os

import numpy as np


class FigplotsError(Exception):
    """Base error for figure rendering problems."""


class MissingColumnError(FigplotsError):
    def __init__(self, path: str, missing: list[str], expected: list[str]):
        self.missing = missing
        super().__init__(
            f"{path}: missing column(s) {missing}; expected header to "
            f"contain {expected}")


class EmptyDataError(FigplotsError):
    def __init__(self, path: str):
        super().__init__(f"{path}: no data rows")


def read_table(path: str, required: list[str]) -> dict[str, np.ndarray]:
    """Read a CSV into named float arrays, validating the required columns.

    Non-numeric columns (e.g. the phase label) come back as string arrays.
    """
    if not os.path.exists(path):
        raise FigplotsError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataError(path) from None
        rows = [r for r in reader if r]
    missing = [c for c in required if c not in header]
    if missing:
        raise MissingColumnError(path, missing, required)
    if not rows:
        raise EmptyDataError(path)
    cols = list(zip(*rows))
    table: dict[str, np.ndarray] = {}
    for name, values in zip(header, cols):
        try:
            table[name] = np.array([float(v) for v in values])
        except ValueError:
            table[name] = np.array(values)
    return table

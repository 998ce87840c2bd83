"""Input-output table: technical coefficients, labor needs, emission factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InfeasibleIO(Exception):
    """A coefficient column sum reached 1: the economy cannot reproduce itself."""

    def __init__(self, sector: int, column_sum: float):
        super().__init__(f"sector {sector}: coefficient column sum {column_sum:.6f} >= 1")
        self.sector = sector
        self.column_sum = column_sum


@dataclass
class IOTable:
    coefficients: np.ndarray  # a[i, j]: units of sector-i input per unit of sector-j output
    labor_coefficients: np.ndarray  # workers per unit of output
    emission_intensity: np.ndarray  # tCO2 per unit of output

    @property
    def n_sectors(self) -> int:
        return self.coefficients.shape[0]

    def validate(self) -> None:
        a = self.coefficients
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("coefficients must be a square matrix")
        if np.any(a < 0) or np.any(self.labor_coefficients < 0) or np.any(self.emission_intensity < 0):
            raise ValueError("IO table entries must be non-negative")
        check_productive(a)

    def copy(self) -> "IOTable":
        return IOTable(self.coefficients.copy(), self.labor_coefficients.copy(),
                       self.emission_intensity.copy())


def check_productive(coefficients: np.ndarray) -> None:
    """Raise InfeasibleIO on the first column whose coefficient sum is >= 1."""
    sums = coefficients.sum(axis=0)
    bad = np.where(sums >= 1.0)[0]
    if len(bad):
        j = int(bad[0])
        raise InfeasibleIO(j, float(sums[j]))


def load_io_table(path: str) -> IOTable:
    """Read the S+2 row CSV layout: S coefficient rows, labor row, emission row."""
    rows = []
    with open(path, encoding="utf-8") as f:
        for ln in f:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            rows.append([float(x) for x in ln.split(",")])
    if len(rows) < 3:
        raise ValueError(f"{path}: expected at least 3 rows (1 sector)")
    s = len(rows[0])
    if len(rows) != s + 2:
        raise ValueError(f"{path}: expected {s + 2} rows for {s} sectors, got {len(rows)}")
    table = IOTable(
        coefficients=np.array(rows[:s], dtype=np.float64),
        labor_coefficients=np.array(rows[s], dtype=np.float64),
        emission_intensity=np.array(rows[s + 1], dtype=np.float64),
    )
    table.validate()
    return table


def save_io_table(path: str, table: IOTable) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in table.coefficients:
            f.write(",".join(repr(float(x)) for x in row) + "\n")
        f.write(",".join(repr(float(x)) for x in table.labor_coefficients) + "\n")
        f.write(",".join(repr(float(x)) for x in table.emission_intensity) + "\n")

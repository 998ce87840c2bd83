"""Regenerate the bundled fixtures (sample microdata, IO table, run configs).

The lever-A share in cb7_stylized.json is calibrated separately by
tools/calibrate_cb7.py against the desk-scale baseline.
"""

from __future__ import annotations

import json
import os

import numpy as np

from decarbsim.iotable import IOTable, save_io_table
from decarbsim.microdata import generate_sample_csv

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "src", "decarbsim", "fixtures")

# Sector convention (README): 0 green equipment, 1 electricity, 2 gas,
# 3 motor fuel, 4 food, 5 housing, 6 transport, 7 manufacturing,
# 8 services, 9 other.
SECTORS = ["green_equipment", "electricity", "gas", "motor_fuel", "food",
           "housing", "transport", "manufacturing", "services", "other"]


def make_io_table() -> IOTable:
    s = 10
    a = np.zeros((s, s))

    def put(i, j, v):
        a[i, j] = v

    # inputs into green equipment
    put(7, 0, 0.18); put(1, 0, 0.05); put(8, 0, 0.08)
    # electricity: gas-fired share plus equipment and services
    put(2, 1, 0.20); put(0, 1, 0.05); put(8, 1, 0.04); put(1, 1, 0.02)
    # gas
    put(7, 2, 0.06); put(8, 2, 0.05); put(1, 2, 0.03)
    # motor fuel
    put(7, 3, 0.08); put(8, 3, 0.05); put(1, 3, 0.03)
    # food
    put(4, 4, 0.10); put(3, 4, 0.05); put(1, 4, 0.04); put(7, 4, 0.06); put(8, 4, 0.06)
    # housing
    put(1, 5, 0.03); put(2, 5, 0.04); put(7, 5, 0.08); put(8, 5, 0.10)
    # transport
    put(3, 6, 0.22); put(7, 6, 0.06); put(8, 6, 0.06); put(1, 6, 0.02)
    # manufacturing
    put(7, 7, 0.12); put(1, 7, 0.05); put(2, 7, 0.04); put(3, 7, 0.04); put(8, 7, 0.07)
    # services
    put(8, 8, 0.08); put(1, 8, 0.03); put(7, 8, 0.04)
    # other
    put(7, 9, 0.07); put(8, 9, 0.08); put(1, 9, 0.03)

    labor = np.array([0.012, 0.010, 0.009, 0.009, 0.011, 0.010,
                      0.011, 0.010, 0.012, 0.011])
    emis = np.array([0.02, 0.25, 0.30, 0.28, 0.05, 0.02,
                     0.10, 0.08, 0.01, 0.02])
    table = IOTable(a, labor, emis)
    table.validate()
    return table


DESK_CONFIG = {
    "population": {
        "microdata": "sample_microdata.csv",
        "n_households": 100000,
        "n_firms": 5000,
        "n_sectors": 10,
        "firm_size": {"mean": 2.5, "sigma": 1.0},
        "tail_imputation": {"tail_quantile": 0.99, "pareto_alpha": 1.6},
    },
    "io_table": "io_uk10.csv",
    "policy": {"green_sector": 0, "propensity_to_consume": 0.20,
               "transfer_per_household": 1300.0},
    "technologies": [
        {"name": "wind", "c0": 70.0, "floor": 35.0, "x0": 1000000.0,
         "calibrate": {"x_target": 4000000.0, "cost_target": 43.0},
         "adoption": {"k": 3200000.0, "r": 0.06, "t0_quarter": 60}},
        {"name": "solar", "c0": 30.0, "floor": 1.0, "x0": 1000000.0,
         "calibrate": {"x_target": 64000000.0, "cost_target": 8.0},
         "adoption": {"k": 120000000.0, "r": 0.10, "t0_quarter": 55}},
    ],
    "durables": [
        {"name": "heat_pump", "price0": 9000.0, "degree_k": 8, "rewire_p": 0.05,
         "params": {"base": -5.8, "price_coeff": -0.8, "income_coeff": 0.0,
                    "peer_coeff": 3.0, "subsidy_coeff": 1.0},
         "weight_shift": {"from": 2, "to": 1, "fraction": 0.7}},
        {"name": "ev", "price0": 18000.0, "degree_k": 8, "rewire_p": 0.05,
         "params": {"base": -6.2, "price_coeff": -0.5, "income_coeff": 0.0,
                    "peer_coeff": 3.0, "subsidy_coeff": 1.0},
         "weight_shift": {"from": 3, "to": 1, "fraction": 0.8}},
    ],
    "horizon_quarters": 120,
    "seed": 7,
    "output_dir": "out",
}

# Simulation clock: t=0 is 2025Q1, so the 2038-2042 budget window is
# quarters 52..71 and 2050 is quarter 100.
CB7_WINDOW = (52, 71)

LEVER_C_EXPANSION = {
    "name": "leverc_expansion_stress",
    "horizon_quarters": 120,
    "green_sector": 0,
    "lever_c": [
        {"start_quarter": 8, "end_quarter": 119, "total": 100000000.0,
         "target": "households", "allocation": "uniform", "financing": "expansion"}
    ],
}


def main() -> None:
    os.makedirs(FIXTURES, exist_ok=True)
    generate_sample_csv(os.path.join(FIXTURES, "sample_microdata.csv"),
                        n_rows=1000, seed=42, n_sectors=10)
    save_io_table(os.path.join(FIXTURES, "io_uk10.csv"), make_io_table())
    with open(os.path.join(FIXTURES, "desk_config.json"), "w", encoding="utf-8") as f:
        json.dump(DESK_CONFIG, f, indent=1)
        f.write("\n")
    with open(os.path.join(FIXTURES, "leverc_expansion.json"), "w", encoding="utf-8") as f:
        json.dump(LEVER_C_EXPANSION, f, indent=1)
        f.write("\n")
    print(f"fixtures written to {os.path.normpath(FIXTURES)}")


if __name__ == "__main__":
    main()

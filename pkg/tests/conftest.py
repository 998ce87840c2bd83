import json
import os

import numpy as np
import pytest

from decarbsim.economy import EconomySim, PolicyParams
from decarbsim.iotable import IOTable
from decarbsim.microdata import (Firm, Household, generate_sample_csv,
                                 parse_microdata)

TWO_SECTOR_IO = IOTable(
    coefficients=np.array([[0.05, 0.10], [0.08, 0.05]]),
    labor_coefficients=np.array([0.01, 0.012]),
    emission_intensity=np.array([0.1, 0.3]),
)


def flat_households(n, deposits=500_000, income=800_000, weights=None, sectors=2):
    w = np.array(weights) if weights is not None else np.full(sectors, 1.0 / sectors)
    return [Household(id=i, deposits=deposits, illiquid_wealth=1_000_000,
                      gross_income=income, region_code=i % 3,
                      consumption_weights=w.copy())
            for i in range(n)]


def flat_firms(m, sectors=2, size=5):
    return [Firm(id=j, sector=j % sectors, size=size) for j in range(m)]


def small_sim(n=50, m=4, sectors=2, policy=None, seed=3, io=None, **kw):
    io = io if io is not None else TWO_SECTOR_IO.copy()
    policy = policy or PolicyParams(green_sector=0)
    return EconomySim(flat_households(n, sectors=sectors), flat_firms(m, sectors=sectors),
                      io, policy, seed=seed, **kw)


def one_sector_sim(n=10, m=1, policy=None, seed=1, labor=0.01):
    io = IOTable(np.array([[0.0]]), np.array([labor]), np.array([0.1]))
    policy = policy or PolicyParams(green_sector=0)
    return EconomySim(flat_households(n, sectors=1), flat_firms(m, sectors=1),
                      io, policy, seed=seed)


@pytest.fixture(scope="session")
def sample_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("micro") / "sample.csv"
    generate_sample_csv(str(path), n_rows=400, seed=11, n_sectors=4)
    return str(path)


@pytest.fixture(scope="session")
def sample_records(sample_csv):
    return parse_microdata(sample_csv)


@pytest.fixture(scope="session")
def small_config_dir(tmp_path_factory, sample_csv):
    """A fast end-to-end run config: 1500 households, 4 sectors, 12 firms."""
    d = tmp_path_factory.mktemp("cfg")
    io_rows = [
        "0.05,0.10,0.05,0.02",
        "0.05,0.05,0.10,0.05",
        "0.02,0.05,0.05,0.10",
        "0.05,0.02,0.05,0.05",
        "0.010,0.012,0.009,0.011",
        "0.5,0.2,0.1,0.3",
    ]
    (d / "io.csv").write_text("\n".join(io_rows) + "\n")
    cfg = {
        "population": {
            "microdata": sample_csv,
            "n_households": 1500,
            "n_firms": 12,
            "n_sectors": 4,
            "tail_imputation": {"tail_quantile": 0.99, "pareto_alpha": 1.6},
        },
        "io_table": "io.csv",
        "policy": {"green_sector": 0},
        "technologies": [
            {"name": "wind", "c0": 70.0, "floor": 35.0, "x0": 1e6, "b": 1.0,
             "adoption": {"k": 4e6, "r": 0.1, "t0_quarter": 20}}
        ],
        "durables": [
            {"name": "heat_pump", "price0": 9000.0, "degree_k": 6, "rewire_p": 0.05,
             "params": {"base": -5.0, "price_coeff": -0.8, "income_coeff": 0.0,
                        "peer_coeff": 3.0, "subsidy_coeff": 1.0},
             "weight_shift": {"from": 2, "to": 1, "fraction": 0.7}}
        ],
        "horizon_quarters": 12,
        "seed": 9,
        "output_dir": str(d / "out"),
    }
    with open(d / "config.json", "w") as f:
        json.dump(cfg, f, indent=1)
    return str(d)


@pytest.fixture
def small_config_path(small_config_dir):
    return os.path.join(small_config_dir, "config.json")

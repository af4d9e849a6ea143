"""Shared fixtures: the 2006 Sausalito Marin City school board contest.

The contest ships with the repository (data/sausalito_2006.json) and is
used across the suite in two pooling variants: losers kept separate
(the write-in column is already a single candidate) and Romanowsky
merged with the write-ins.
"""

from pathlib import Path

import pytest

from electaudit.contest_io import load_contest
from electaudit.model import pool_losers

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def sausalito():
    return load_contest(DATA / "sausalito_2006.json")


@pytest.fixture(scope="session")
def sausalito_flat(sausalito):
    # every listed candidate separate; undervote bucket on its own
    return pool_losers(sausalito, "none")


@pytest.fixture(scope="session")
def sausalito_grouped(sausalito):
    # Romanowsky + write-ins merge into one loser group (490 <= 1936)
    return pool_losers(sausalito)

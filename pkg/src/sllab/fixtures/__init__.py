"""Bundled empirical-model fixtures (JSON)."""

from importlib import resources
from pathlib import Path

FIXTURE_NAMES = ("pr_box", "classical_correlated", "hardy", "ks_odd_cycle",
                 "singlet_chsh")


def fixture_path(name: str) -> Path:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; known: {list(FIXTURE_NAMES)}")
    return Path(resources.files(__name__) / f"{name}.json")

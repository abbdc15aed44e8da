"""Shared fixtures: the shipped triage table and a default matcher config."""

from importlib import resources

import pytest

from triagebot.matcher import MatcherConfig, load_matcher_config
from triagebot.model import parse_table


def bundled_tree_text() -> str:
    return resources.files("triagebot.data").joinpath("triage_tree.csv").read_text("utf-8")


@pytest.fixture(scope="session")
def bundled_tree_csv() -> str:
    return bundled_tree_text()


@pytest.fixture()
def triage_tree(bundled_tree_csv):
    return parse_table(bundled_tree_csv)


@pytest.fixture(scope="session")
def cfg() -> MatcherConfig:
    return load_matcher_config()

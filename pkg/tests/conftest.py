"""Shared fixtures: the two-disease snapshot network and helpers."""

import json
from pathlib import Path

import pytest

from qmrdx import Evidence, load_network

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def snapshot_net():
    """Aneurysm/hernia network: 2 diseases, 6 findings, 7 edges."""
    return load_network(DATA / "aneurysm_hernia.json", "symcat")


@pytest.fixture(scope="session")
def snap_ids(snapshot_net):
    """Frequently used ids on the snapshot network."""
    net = snapshot_net
    return {
        "aaa": net.disease_id("abdominal-aortic-aneurysm"),
        "hernia": net.disease_id("abdominal-hernia"),
        "sharp": net.finding_id("Sharp abdominal pain"),
        "back": net.finding_id("Back pain"),
        "breath": net.finding_id("Shortness of breath"),
        "groin": net.finding_id("Groin mass"),
        "ache": net.finding_id("Ache all over"),
        "upper": net.finding_id("Upper abdominal pain"),
    }


@pytest.fixture
def tmp_json(tmp_path):
    def write(doc, name="doc.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return path

    return write


def evidence(positive=(), negative=()):
    return Evidence(frozenset(positive), frozenset(negative))

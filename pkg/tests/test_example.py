"""Tests for example.py"""

import io

from linkchain import example
from .fixtures import KING_HEADS


def test_run_layers():
    stream = io.StringIO()
    layers = example.run_layers(stream)
    assert len(layers) == 4
    text = stream.getvalue()
    assert text.startswith("# king layer 1\n")
    assert f"Replayed heads: {KING_HEADS}" in text


def test_run_synthetic():
    stream = io.StringIO()
    parsed, adjacent = example.run_synthetic(n_train=300, n_test=50,
                                             stream=stream)
    assert parsed.counts['sentences'] == adjacent.counts['sentences'] == 50
    assert parsed.directed > adjacent.directed
    text = stream.getvalue()
    assert "Adjacent baseline:" in text
    assert "Parsed 'The king of Prussia bought a camel'" in text

"""Tests for oracle.py"""

import io

import numpy
import pytest

from linkchain import corpus
from linkchain import oracle
from linkchain.oracle import LEFT, RIGHT, NONE
from linkchain.oracle import COMP_NONE, COMP_ONE, COMP_MANY
from .fixtures import king_sentence, king_layers, make_sentence, random_tree
from .fixtures import KING_HEADS


def comps(layer):
    """Return (form, lcomp, rcomp) for each token of a layer."""
    return [(tok.form, tok.lcomp, tok.rcomp) for tok in layer]


def test_increment_comp():
    assert oracle.increment_comp(COMP_NONE) == COMP_ONE
    assert oracle.increment_comp(COMP_ONE) == COMP_MANY
    assert oracle.increment_comp(COMP_MANY) == COMP_MANY
    assert [oracle.comp_value(n) for n in range(4)] == \
        [COMP_NONE, COMP_ONE, COMP_MANY, COMP_MANY]


def test_derive_layers_king(king_layers):
    """The gold layers of the king sentence, worked by hand."""
    assert len(king_layers) == 4
    assert king_layers[0].labels == [RIGHT, NONE, NONE, LEFT, NONE, RIGHT,
                                     NONE]
    assert all(tok.lcomp == tok.rcomp == COMP_NONE for tok in king_layers[0])
    assert comps(king_layers[1]) == [
        ('king', COMP_ONE, COMP_NONE), ('of', COMP_NONE, COMP_ONE),
        ('bought', COMP_NONE, COMP_NONE), ('camel', COMP_ONE, COMP_NONE)]
    assert king_layers[1].labels == [NONE, LEFT, NONE, LEFT]
    assert comps(king_layers[2]) == [
        ('king', COMP_ONE, COMP_ONE), ('bought', COMP_NONE, COMP_ONE)]
    assert king_layers[2].labels == [RIGHT, NONE]
    assert comps(king_layers[3]) == [('bought', COMP_ONE, COMP_ONE)]
    assert king_layers[3].tokens[0].orig_index == 5


def test_derive_layers_small():
    """One and two token sentences."""
    layers = oracle.derive_layers(make_sentence((0,)))
    assert len(layers) == 1
    layers = oracle.derive_layers(make_sentence((2, 0)))
    assert len(layers) == 2
    assert layers[0].labels == [RIGHT, NONE]
    assert [tok.orig_index for tok in layers[1]] == [2]
    assert layers[1].tokens[0].lcomp == COMP_ONE


def test_derive_layers_gold_argument(king_sentence):
    """An explicit gold tree overrides the sentence's heads."""
    unheaded = king_sentence.with_heads([None] * 7)
    with pytest.raises(oracle.OracleError):
        oracle.derive_layers(unheaded)
    layers = oracle.derive_layers(unheaded, corpus.DepTree(KING_HEADS))
    assert oracle.replay(layers).heads == KING_HEADS


def test_derive_layers_errors():
    """Trees that cannot be encoded."""
    with pytest.raises(oracle.OracleError) as excinfo:
        oracle.derive_layers(make_sentence((0, 4, 1, 1)))
    assert "non-projective" in str(excinfo.value)
    with pytest.raises(oracle.OracleError):
        oracle.derive_layers(make_sentence((2, 1)))
    with pytest.raises(oracle.OracleError):
        oracle.derive_layers(make_sentence((0, 0)))
    with pytest.raises(oracle.OracleError):
        oracle.derive_layers(make_sentence((0, 1)), corpus.DepTree((0,)))


def test_apply_labels_king(king_layers):
    layer = king_layers[0]
    next_layer, attachments = oracle.apply_labels(layer, layer.labels)
    assert attachments == {(1, 2), (4, 3), (6, 7)}
    assert comps(next_layer) == comps(king_layers[1])
    assert all(tok.label == NONE for tok in next_layer)


def test_apply_labels_identity():
    """All NONE changes nothing."""
    layer = oracle.initial_layer(make_sentence((0, 1, 2)))
    next_layer, attachments = oracle.apply_labels(layer, [NONE] * 3)
    assert next_layer == layer
    assert attachments == set()


def test_apply_labels_pair():
    layer = oracle.initial_layer(make_sentence((2, 0)))
    next_layer, attachments = oracle.apply_labels(layer, [RIGHT, NONE])
    assert attachments == {(1, 2)}
    assert len(next_layer) == 1
    assert next_layer.tokens[0].lcomp == COMP_ONE
    assert next_layer.tokens[0].rcomp == COMP_NONE


def test_apply_labels_many():
    """Comps saturate at MANY."""
    layer = oracle.initial_layer(make_sentence((2, 0, 2)))
    layer, _ = oracle.apply_labels(layer, [RIGHT, NONE, LEFT])
    assert comps(layer) == [('w2', COMP_ONE, COMP_ONE)]
    sent = make_sentence((3, 3, 0, 3, 3))
    layer = oracle.initial_layer(sent)
    layer, _ = oracle.apply_labels(layer, [NONE, RIGHT, NONE, LEFT, NONE])
    layer, _ = oracle.apply_labels(layer, [RIGHT, NONE, LEFT])
    assert comps(layer) == [('w3', COMP_MANY, COMP_MANY)]


def test_apply_labels_invalid():
    layer = oracle.initial_layer(make_sentence((2, 0, 2)))
    for labels in ([LEFT, NONE, NONE], [NONE, NONE, RIGHT],
                   [RIGHT, LEFT, NONE], [NONE, NONE]):
        with pytest.raises(oracle.OracleError):
            oracle.apply_labels(layer, labels)


def test_check_labels():
    assert oracle.check_labels([RIGHT, NONE, LEFT]) is None
    assert oracle.check_labels([NONE, NONE]) is None
    assert "first" in oracle.check_labels([LEFT, NONE])
    assert "last" in oracle.check_labels([NONE, RIGHT])
    assert oracle.check_labels([NONE, RIGHT, LEFT]) is not None
    assert oracle.check_labels([7]) is not None


def test_replay_king(king_layers):
    assert oracle.replay(king_layers).heads == KING_HEADS


def test_replay_single():
    layers = oracle.derive_layers(make_sentence((0,)))
    assert oracle.replay(layers).heads == (0,)


def test_replay_errors(king_layers):
    with pytest.raises(oracle.OracleError):
        oracle.replay(king_layers[:-1])
    with pytest.raises(oracle.OracleError):
        oracle.replay([])
    # Dropping a pass leaves tokens unattached.
    with pytest.raises(oracle.OracleError):
        oracle.replay([king_layers[0], king_layers[3]])


def test_round_trip_random_trees():
    """Decoding the gold layers gives back the tree."""
    rng = numpy.random.default_rng(2023)
    for _ in range(1000):
        n_tok = int(rng.integers(1, 11))
        heads = random_tree(rng, n_tok)
        layers = oracle.derive_layers(make_sentence(heads))
        assert oracle.replay(layers).heads == heads
        # At most n-1 labelled passes, each shrinking the layer.
        assert len(layers) <= n_tok
        for layer, next_layer in zip(layers, layers[1:]):
            assert len(next_layer) < len(layer)
            assert oracle.check_labels(layer.labels) is None


def test_leaf_safety_and_comps():
    """
    A token links only when it has no pending dependents, and comps count
    the dependents already attached on each side.

    """
    rng = numpy.random.default_rng(11)
    for _ in range(200):
        heads = random_tree(rng, int(rng.integers(2, 11)))
        attached = set()
        for layer in oracle.derive_layers(make_sentence(heads)):
            for tok in layer:
                deps = [dep for dep, head in enumerate(heads, start=1)
                        if head == tok.orig_index]
                left = sum(dep in attached for dep in deps
                           if dep < tok.orig_index)
                right = sum(dep in attached for dep in deps
                            if dep > tok.orig_index)
                assert tok.lcomp == oracle.comp_value(left)
                assert tok.rcomp == oracle.comp_value(right)
                if tok.label != NONE:
                    assert all(dep in attached for dep in deps)
            attached.update(tok.orig_index for tok in layer
                            if tok.label != NONE)


def test_dump_layers(king_layers):
    out = io.StringIO()
    oracle.dump_layers(king_layers, out, header="king")
    blocks = out.getvalue().split("\n\n")
    assert blocks[0].splitlines()[0] == "# king layer 1"
    assert blocks[0].splitlines()[1] == "1\tThe\tDT\tNONE\tNONE\tRIGHT"
    assert blocks[3].splitlines()[1] == "5\tbought\tVBD\tONE\tONE\tNONE"

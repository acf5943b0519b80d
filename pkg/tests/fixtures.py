"""pytest fixtures that are shared across tests."""

import numpy
import pytest

from linkchain import corpus
from linkchain import evaluation
from linkchain import model
from linkchain import oracle
from linkchain import synthetic

# "The king of Prussia bought a camel" is the running example.

KING_FORMS = ['The', 'king', 'of', 'Prussia', 'bought', 'a', 'camel']
KING_TAGS = ['DT', 'NN', 'IN', 'NNP', 'VBD', 'DT', 'NN']
KING_HEADS = (2, 5, 2, 3, 0, 7, 5)
KING_TEXT = ''.join(
    f"{idx}\t{form}\t{pos}\t{head}\n" for idx, (form, pos, head) in
    enumerate(zip(KING_FORMS, KING_TAGS, KING_HEADS), start=1))
"""The king sentence in the treebank format."""

SYNTHETIC_SEED = 42
N_SYNTHETIC_TRAIN = 2000
N_SYNTHETIC_TEST = 200


def make_sentence(heads, forms=None, tags=None):
    """
    Return a Sentence with the given heads. Forms and tags default to
    ``w1, w2, ...`` and ``T1, T2, ...``.

    """
    n_tok = len(heads)
    forms = forms or [f"w{idx}" for idx in range(1, n_tok + 1)]
    tags = tags or [f"T{idx}" for idx in range(1, n_tok + 1)]
    return corpus.Sentence(
        corpus.RawToken(idx, form, pos, head) for idx, (form, pos, head) in
        enumerate(zip(forms, tags, heads), start=1))


def random_tree(rng, n_tok):
    """Return the heads of a uniformly sampled projective tree."""
    return evaluation.baseline_random(range(n_tok), rng).heads


def brute_force_projective(heads):
    """All-pairs crossing check with ROOT at position 0."""
    spans = [tuple(sorted((dep, head)))
             for dep, head in enumerate(heads, start=1)]
    for a, b in spans:
        for c, d in spans:
            if a < c < b < d:
                return False
    return True


class TableScorer:
    """
    A scorer with fixed slice scores, for testing inference without a
    trained model.

    """
    def __init__(self, emit, trans):
        self.emit = numpy.asarray(emit, dtype=float)
        self.trans = numpy.asarray(trans, dtype=float)

    def feature_views(self, layer):
        return numpy.zeros((len(layer), len(model.FEATURES)),
                           dtype=numpy.int64)

    def slice_scores(self, views):
        return self.emit[:len(views)], self.trans


def random_scorer(rng, n_pos, p_forbid=0.0):
    """
    Return a TableScorer with normal random scores. Each score is ``-inf``
    with probability ``p_forbid``.

    """
    emit = rng.normal(size=(n_pos, len(oracle.LINKS)))
    trans = rng.normal(size=(len(oracle.LINKS) + 1, len(oracle.LINKS)))
    if p_forbid:
        emit[rng.random(emit.shape) < p_forbid] = -numpy.inf
        trans[rng.random(trans.shape) < p_forbid] = -numpy.inf
    return TableScorer(emit, trans)


class GoldScorer:
    """
    A scorer that knows the gold tree: it scores each layer's gold labels
    0 and every other label -5.

    The feature views carry each token's original index in column 0, from
    which the layer's gold labels are recomputed.

    """
    def __init__(self, heads):
        self.heads = list(heads)

    def feature_views(self, layer):
        views = numpy.zeros((len(layer), len(model.FEATURES)),
                            dtype=numpy.int64)
        views[:, 0] = [tok.orig_index for tok in layer]
        return views

    def slice_scores(self, views):
        present = {int(idx) for idx in views[:, 0]}
        pending = {idx: 0 for idx in range(len(self.heads) + 1)}
        for dep, head in enumerate(self.heads, start=1):
            if dep in present:
                pending[head] += 1
        layer = oracle.Layer(
            oracle.LayerToken(int(idx), '', '') for idx in views[:, 0])
        labels = oracle.gold_labels(layer, self.heads, pending)
        emit = numpy.full((len(views), len(oracle.LINKS)), -5.0)
        emit[numpy.arange(len(views)), labels] = 0.0
        return emit, numpy.zeros((len(oracle.LINKS) + 1, len(oracle.LINKS)))


@pytest.fixture
def king_sentence():
    """The king sentence with its gold tree."""
    return make_sentence(KING_HEADS, KING_FORMS, KING_TAGS)


@pytest.fixture
def king_layers(king_sentence):
    """The gold layers of the king sentence."""
    return oracle.derive_layers(king_sentence)


@pytest.fixture
def king_vocab(king_sentence):
    """The vocabulary of the king sentence."""
    return corpus.build_vocab([king_sentence])


@pytest.fixture
def king_model(king_vocab, king_layers):
    """A smoothed model trained on the king sentence."""
    return model.train(king_vocab, king_layers, alpha=0.1)


@pytest.fixture
def king_model_raw(king_vocab, king_layers):
    """An unsmoothed model trained on the king sentence."""
    return model.train(king_vocab, king_layers, alpha=0)


@pytest.fixture(scope='module')
def synthetic_split():
    """Training and testing sections of a synthetic treebank."""
    pairs = synthetic.generate(
        seed=SYNTHETIC_SEED, count=N_SYNTHETIC_TRAIN + N_SYNTHETIC_TEST)
    sentences = [sent for sent, _ in pairs]
    return sentences[:N_SYNTHETIC_TRAIN], sentences[N_SYNTHETIC_TRAIN:]


@pytest.fixture(scope='module')
def synthetic_model(synthetic_split):
    """A model trained on the synthetic training section."""
    train, _ = synthetic_split
    vocab = corpus.build_vocab(train)
    layers = [layer for sent in train for layer in oracle.derive_layers(sent)]
    return model.train(vocab, layers)

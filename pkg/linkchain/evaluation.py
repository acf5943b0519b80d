"""
Unlabelled attachment scoring and the two baseline parsers.

Per-sentence results are kept as :class:`~linkchain.evaluation.Tally`
objects, which add together, and :func:`aggregate` turns any number of
them into an :class:`~linkchain.evaluation.EvalReport`.

"""

# This file is part of Link Chain - a dependency parser built from a
# chain-structured probabilistic classifier.
# Copyright (C) 2023 Cibolabs.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

import logging
import threading

import numpy

from .corpus import DepTree


RANDOM_SAMPLES = 10
"""
The default number of random trees drawn per sentence by
:func:`~linkchain.evaluation.random_baseline_tallies`.
"""
METRIC_NAMES = ('directed', 'undirected', 'root', 'non_root', 'oov',
    'in_vocab', 'exact')
"""
The order of the metric rows in :meth:`EvalReport.rows`.
"""
COUNT_NAMES = ('sentences', 'tokens', 'non_root_tokens', 'oov_tokens',
    'in_vocab_tokens')
"""
The order of the count rows in :meth:`EvalReport.rows`.
"""
_TALLY_FIELDS = ('sentences', 'tokens', 'directed', 'undirected', 'root',
    'exact', 'non_root_tokens', 'non_root', 'oov_tokens', 'oov',
    'in_vocab_tokens', 'in_vocab')


class EvaluationError(Exception):
    pass


class Tally:
    """
    Correct-attachment counts over one or more sentences.

    Tallies combine with ``+``; the sum of per-sentence tallies is the
    tally of the whole corpus, whatever the order.

    Attributes
    ----------
    sentences : int
    tokens : int
    directed : int
        Tokens whose predicted head is the gold head.
    undirected : int
        Tokens whose predicted edge is a gold edge in either direction.
    root : int
        Sentences whose predicted root is the gold root.
    exact : int
        Sentences with every head correct.
    non_root_tokens, non_root : int
        Tokens not headed by ROOT in the gold tree, and those correct.
    oov_tokens, oov : int
        Out-of-vocabulary tokens, and those correct.
    in_vocab_tokens, in_vocab : int
        In-vocabulary tokens, and those correct.

    """
    def __init__(self, **counts):
        """Constructor."""
        for name in _TALLY_FIELDS:
            setattr(self, name, counts.pop(name, 0))
        if counts:
            raise EvaluationError(
                f"ERROR: unknown tally fields {sorted(counts)}")

    def __add__(self, other):
        return Tally(**{name: getattr(self, name) + getattr(other, name)
                        for name in _TALLY_FIELDS})

    def __eq__(self, other):
        return (isinstance(other, Tally) and
                all(getattr(self, name) == getattr(other, name)
                    for name in _TALLY_FIELDS))

    def __repr__(self):
        fields = ', '.join(
            f"{name}={getattr(self, name)}" for name in _TALLY_FIELDS)
        return f"Tally({fields})"


def _edges(heads):
    """The unordered edge set of a head sequence, ROOT edges included."""
    return {frozenset((dep, head))
            for dep, head in enumerate(heads, start=1)}


def score(pred, gold, oov_mask=None):
    """
    Compare a predicted tree with the gold tree.

    Parameters
    ----------
    pred, gold : :class:`~linkchain.corpus.DepTree` or sequence of int
    oov_mask : sequence of bool, optional
        True for each out-of-vocabulary token. If omitted, every token is
        in vocabulary.

    Returns
    -------
    :class:`~linkchain.evaluation.Tally`
        The tally of one sentence.

    Raises
    ------
    :exc:`~linkchain.evaluation.EvaluationError`
        If the lengths differ.

    Notes
    -----
    A token is undirected-correct if ``{token, predicted head}`` is one of
    the gold tree's unordered edges, the root's edge to ROOT included.

    """
    pred = tuple(pred)
    gold = tuple(gold)
    if oov_mask is None:
        oov_mask = [False] * len(gold)
    oov_mask = list(oov_mask)
    if len(pred) != len(gold) or len(oov_mask) != len(gold):
        raise EvaluationError(
            f"ERROR: length mismatch: {len(pred)} predicted heads, "
            f"{len(gold)} gold heads, {len(oov_mask)} OOV flags")
    gold_edges = _edges(gold)
    tally = Tally(sentences=1, tokens=len(gold))
    for dep, (p_head, g_head, is_oov) in enumerate(
            zip(pred, gold, oov_mask), start=1):
        correct = p_head == g_head
        tally.directed += correct
        tally.undirected += frozenset((dep, p_head)) in gold_edges
        if g_head != 0:
            tally.non_root_tokens += 1
            tally.non_root += correct
        if is_oov:
            tally.oov_tokens += 1
            tally.oov += correct
        else:
            tally.in_vocab_tokens += 1
            tally.in_vocab += correct
    tally.root = int(DepTree(pred).root == DepTree(gold).root)
    tally.exact = int(tally.directed == tally.tokens)
    return tally


class EvalReport:
    """
    Accuracies over a corpus.

    Token metrics are micro-averaged over tokens; ``root`` and ``exact``
    are fractions of sentences. A bucket with no tokens has nothing
    wrong in it and scores 1.0; its count in :attr:`counts` is 0.

    Attributes
    ----------
    directed, undirected, root, non_root, oov, in_vocab, exact : float
    counts : dict
        The sentence and token counts named in :data:`COUNT_NAMES`.
        ``non_root_tokens`` plus the sentence count is ``tokens``, and
        ``oov_tokens`` plus ``in_vocab_tokens`` is ``tokens``.

    """
    def __init__(self, tally):
        """Constructor."""
        def frac(num, den):
            return num / den if den else 1.0

        self.directed = frac(tally.directed, tally.tokens)
        self.undirected = frac(tally.undirected, tally.tokens)
        self.root = frac(tally.root, tally.sentences)
        self.non_root = frac(tally.non_root, tally.non_root_tokens)
        self.oov = frac(tally.oov, tally.oov_tokens)
        self.in_vocab = frac(tally.in_vocab, tally.in_vocab_tokens)
        self.exact = frac(tally.exact, tally.sentences)
        self.counts = {name: getattr(tally, name) for name in COUNT_NAMES}
        self.tally = tally

    def rows(self):
        """
        Return the report as ``(name, value)`` pairs: the metrics in
        :data:`METRIC_NAMES` order, then the counts.

        """
        rows = [(name, getattr(self, name)) for name in METRIC_NAMES]
        rows.extend((name, self.counts[name]) for name in COUNT_NAMES)
        return rows

    def to_dict(self):
        """Return the report as a JSON-serialisable dictionary."""
        return dict(self.rows())

    def format(self):
        """Return the rows as tab-separated text, one row per line."""
        lines = []
        for name, value in self.rows():
            if isinstance(value, float):
                lines.append(f"{name}\t{value:.4f}")
            else:
                lines.append(f"{name}\t{value}")
        return '\n'.join(lines) + '\n'


def aggregate(tallies):
    """
    Combine per-sentence tallies into a report.

    Parameters
    ----------
    tallies : iterable of :class:`~linkchain.evaluation.Tally`

    Returns
    -------
    :class:`~linkchain.evaluation.EvalReport`

    Raises
    ------
    :exc:`~linkchain.evaluation.EvaluationError`
        If there are no sentences.

    """
    total = Tally()
    for tally in tallies:
        total = total + tally
    if total.sentences == 0:
        raise EvaluationError("ERROR: cannot evaluate an empty corpus")
    logging.info("Evaluated %i sentences, %i tokens", total.sentences,
        total.tokens)
    return EvalReport(total)


def baseline_adjacent(sentence):
    """
    Attach every token to its right neighbour; the last token is the root.

    Parameters
    ----------
    sentence : :class:`~linkchain.corpus.Sentence` or any sized sequence

    Returns
    -------
    :class:`~linkchain.corpus.DepTree`

    """
    n_tok = len(sentence)
    return DepTree(list(range(2, n_tok + 1)) + [0])


_TREE_COUNTS = [0]
"""
``_TREE_COUNTS[s]`` is the number of projective trees over ``s`` tokens.
"""
_FOREST_COUNTS = [1]
"""
``_FOREST_COUNTS[s]`` is the number of ways ``s`` adjacent tokens can form
projective subtrees whose roots all attach to one head outside the span.
"""
_COUNTS_LOCK = threading.Lock()


def _extend_counts(size):
    """Fill both count tables up to ``size``, bottom-up."""
    with _COUNTS_LOCK:
        trees = _TREE_COUNTS
        forests = _FOREST_COUNTS
        for span in range(len(forests), size + 1):
            trees.append(sum(forests[root - 1] * forests[span - root]
                             for root in range(1, span + 1)))
            forests.append(sum(trees[first] * forests[span - first]
                               for first in range(1, span + 1)))


def _draw(rng, weights):
    """
    Return an index drawn with probability proportional to its integer
    weight. Exact for weights of any size.

    """
    total = sum(weights)
    n_bits = total.bit_length()
    n_bytes = (n_bits + 7) // 8
    while True:
        value = int.from_bytes(rng.bytes(n_bytes), 'big')
        value >>= 8 * n_bytes - n_bits
        if value < total:
            break
    for idx, weight in enumerate(weights):
        if value < weight:
            return idx
        value -= weight
    raise EvaluationError("ERROR: draw fell outside the weights")


_TREE = 'tree'
_FOREST = 'forest'


def _sample_heads(rng, n_tok):
    """
    Return the heads of a uniform projective tree over ``n_tok`` tokens.

    Spans are expanded from an explicit stack, left to right, so long
    sentences need no deep recursion.

    """
    _extend_counts(n_tok)
    heads = [0] * n_tok
    # (kind, offset, size, head): tokens offset+1..offset+size
    stack = [(_TREE, 0, n_tok, 0)]
    while stack:
        kind, offset, size, head = stack.pop()
        if size == 0:
            continue
        if kind == _TREE:
            weights = [_FOREST_COUNTS[root - 1] * _FOREST_COUNTS[size - root]
                       for root in range(1, size + 1)]
            root = offset + _draw(rng, weights) + 1
            heads[root - 1] = head
            stack.append((_FOREST, root, offset + size - root, root))
            stack.append((_FOREST, offset, root - 1 - offset, root))
        else:
            weights = [_TREE_COUNTS[first] * _FOREST_COUNTS[size - first]
                       for first in range(1, size + 1)]
            first = _draw(rng, weights) + 1
            stack.append((_FOREST, offset + first, size - first, head))
            stack.append((_TREE, offset, first, head))
    return heads


def baseline_random(sentence, seed=None):
    """
    Return a projective tree drawn uniformly from all projective trees of
    the sentence's length.

    Parameters
    ----------
    sentence : :class:`~linkchain.corpus.Sentence` or any sized sequence
    seed : int, :class:`numpy.random.Generator` or None
        Passed to :func:`numpy.random.default_rng`, so a generator is used
        as it is.

    Returns
    -------
    :class:`~linkchain.corpus.DepTree`

    Notes
    -----
    The root is chosen with probability proportional to the number of
    arrangements of its left and right dependents, and each span of
    dependents is split into subtrees the same way, so every projective
    tree has the same probability.

    """
    rng = numpy.random.default_rng(seed)
    return DepTree(_sample_heads(rng, len(sentence)))


def n_projective_trees(size):
    """Return the number of projective trees over ``size`` tokens."""
    _extend_counts(size)
    return _TREE_COUNTS[size]


def random_baseline_tallies(sentences, samples=RANDOM_SAMPLES, seed=None,
        vocab=None):
    """
    Score :func:`baseline_random` against the gold trees.

    Parameters
    ----------
    sentences : sequence of :class:`~linkchain.corpus.Sentence`
        Each must carry a gold tree.
    samples : int
        The number of random trees per sentence.
    seed : int or None
        Seeds the single generator used for every draw.
    vocab : :class:`~linkchain.corpus.Vocab`, optional
        Defines the OOV bucket.

    Returns
    -------
    list of :class:`~linkchain.evaluation.Tally`
        ``samples`` tallies per sentence. Every sample of a sentence has
        the same token count, so aggregating them gives the mean accuracy
        over samples; the report's counts are ``samples`` times the corpus
        counts.

    """
    if samples < 1:
        raise EvaluationError("ERROR: at least one random sample is needed")
    rng = numpy.random.default_rng(seed)
    tallies = []
    for sent in sentences:
        mask = vocab.oov_mask(sent) if vocab is not None else None
        for _ in range(samples):
            tallies.append(score(baseline_random(sent, rng), sent.tree, mask))
    return tallies

"""
:func:`parse` is the main interface. It labels the current layer with the
decoder, attaches and removes the linked tokens, and repeats on the
compressed layer until only the root remains.

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
import math
from concurrent import futures

from . import corpus
from . import inference
from . import oracle
from .oracle import LEFT, RIGHT, NONE, BOUNDARY


class ParserError(Exception):
    pass


class ParseResult:
    """
    The outcome of parsing one sentence.

    Attributes
    ----------
    tree : :class:`~linkchain.corpus.DepTree`
    layers : list of :class:`~linkchain.oracle.Layer`
        One layer per pass, carrying the predicted labels, followed by the
        final single-token layer. The same form as
        :func:`~linkchain.oracle.derive_layers` returns.
    fallback_count : int
        The number of passes labelled by :func:`fallback`.
    marginals : list of numpy arrays
        Per-pass label marginals, only if requested.

    """
    def __init__(self, tree, layers, fallback_count, marginals=None):
        """Constructor."""
        self.tree = tree
        self.layers = layers
        self.fallback_count = fallback_count
        self.marginals = marginals if marginals is not None else []

    @property
    def n_passes(self):
        """The number of labelling passes."""
        return len(self.layers) - 1


def parse(model, sentence, with_marginals=False):
    """
    Parse a sentence.

    Parameters
    ----------
    model : :class:`~linkchain.model.Model` or another scorer
        Anything with ``feature_views(layer)`` and ``slice_scores(views)``
        methods.
    sentence : :class:`~linkchain.corpus.Sentence`
        Gold heads, if present, are ignored.
    with_marginals : bool
        If True, also compute each pass's label marginals with
        :func:`~linkchain.inference.forward_backward`. They are
        diagnostics; the labels always come from
        :func:`~linkchain.inference.viterbi`.

    Returns
    -------
    :class:`~linkchain.parser.ParseResult`

    Notes
    -----
    Every pass links at least one token, so a sentence of n tokens takes
    at most n - 1 passes. Decisions are never revisited. Comp counters are
    updated from the predicted attachments, as in
    :func:`~linkchain.oracle.apply_labels`.

    If the decoder finds no sequence of finite score, which can only
    happen when the model is unsmoothed, :func:`fallback` links a single
    token and the pass is counted in ``fallback_count``.

    """
    n_tok = len(sentence)
    if n_tok == 0:
        raise ParserError("ERROR: cannot parse an empty sentence")
    heads = [None] * n_tok
    layer = oracle.initial_layer(sentence)
    trace = []
    marginals = []
    fallback_count = 0
    while len(layer) > 1:
        views = model.feature_views(layer)
        result = inference.viterbi(model, views)
        if result.valid:
            labels = result.labels
        else:
            labels = fallback(model, views)
            fallback_count += 1
            logging.warning(
                "No finite-score labelling for a layer of %i tokens; "
                "falling back to a single link", len(layer))
        if with_marginals:
            try:
                marginals.append(inference.forward_backward(model, views)[0])
            except inference.InferenceError:
                marginals.append(None)
        layer = layer.labelled(labels)
        trace.append(layer)
        layer, attachments = oracle.apply_labels(layer, labels)
        for dep, head in attachments:
            heads[dep - 1] = head
    trace.append(layer)
    heads[layer.tokens[0].orig_index - 1] = 0
    violation = corpus.validate_tree(heads)
    if violation is not None:
        raise ParserError(
            f"ERROR: parse produced an invalid tree: {violation}")
    return ParseResult(corpus.DepTree(heads), trace, fallback_count, marginals)


def fallback(model, views):
    """
    Label a layer with a single link when decoding has failed.

    Parameters
    ----------
    model : scorer
    views : numpy array, shape ``(T, 8)``

    Returns
    -------
    tuple of int
        All NONE except one LEFT or RIGHT, placed at the position and
        direction with the highest finite slice score among the choices
        legal at that position. Each choice is scored as the only link of
        the layer, so its previous link is NONE, or BOUNDARY at the first
        position. Ties go to the earlier position, then LEFT. If no choice
        is finite, the first token links RIGHT.

    """
    emit, trans = model.slice_scores(views)
    n_pos = len(views)
    best = None
    best_score = -math.inf
    for t in range(n_pos):
        prev = BOUNDARY if t == 0 else NONE
        for link in (LEFT, RIGHT):
            if (link == LEFT and t == 0) or (link == RIGHT and t == n_pos - 1):
                continue
            score = trans[prev, link] + emit[t, link]
            if score > best_score:
                best = (t, link)
                best_score = score
    if best is None:
        best = (0, RIGHT)
    labels = [NONE] * n_pos
    labels[best[0]] = best[1]
    return tuple(labels)


def parse_corpus(model, sentences, concurrent=False, with_marginals=False):
    """
    Parse every sentence, returning the results in input order.

    Parameters
    ----------
    model : :class:`~linkchain.model.Model`
    sentences : sequence of :class:`~linkchain.corpus.Sentence`
    concurrent : bool
        If True, parse the sentences in a
        :class:`python:concurrent.futures.ThreadPoolExecutor`.
    with_marginals : bool
        Passed to :func:`parse`.

    Returns
    -------
    list of :class:`~linkchain.parser.ParseResult`

    """
    logging.info("Parsing %i sentences", len(sentences))

    def parse_one(sent):
        return parse(model, sent, with_marginals=with_marginals)

    if concurrent:
        logging.info("Parsing concurrently.")
        with futures.ThreadPoolExecutor() as executor:
            results = list(executor.map(parse_one, sentences))
    else:
        results = [parse_one(sent) for sent in sentences]
    n_fallback = sum(res.fallback_count for res in results)
    if n_fallback:
        logging.warning("%i passes were resolved by fallback", n_fallback)
    return results

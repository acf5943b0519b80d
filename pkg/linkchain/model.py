"""
The factorised link model: a transition table over consecutive link labels
and one emission table per observed feature, trained by counting.

Each position of a layer is scored as::

    log P(L_t | L_t-1) + sum over features f of log P(f_t | L_t)

with ``L_0 = BOUNDARY``. The features of position t are the word and tag,
its two comp counters, the next word and tag, the right comp of the left
neighbour and the left comp of the right neighbour. Because neighbour
features appear in the feature sets of two positions, the score is a
product of experts rather than a normalised joint distribution.

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
from concurrent import futures

import numpy

from . import corpus
from . import oracle


FORMAT_NAME = 'linkchain-model'
"""
The first word of a model file's header line.
"""
FORMAT_VERSION = 'v1'
"""
The model file format version written by :func:`~linkchain.model.save`.
"""
ALPHA = 0.1
"""
The default additive smoothing mass.
"""

FEAT_WORD = 0
FEAT_POS = 1
FEAT_LCOMP = 2
FEAT_RCOMP = 3
FEAT_NEXT_WORD = 4
FEAT_NEXT_POS = 5
FEAT_PREV_RCOMP = 6
FEAT_NEXT_LCOMP = 7
FEATURES = ('word', 'pos', 'lcomp', 'rcomp', 'next_word', 'next_pos',
            'prev_rcomp', 'next_lcomp')
"""
The feature names, in column order of a feature view.
"""
N_COMP_CODES = 4
"""
NONE, ONE, MANY and BOUNDARY.
"""


class ModelError(Exception):
    pass


class CPTable:
    """
    A conditional probability table learnt by counting.

    ``P(v | ctx) = (count + alpha) / (ctx_total + alpha * n_values)``

    Parameters
    ----------
    name : str
    n_contexts : int
        The number of context values (rows).
    n_values : int
        The number of values of the conditioned variable (columns).
    alpha : float
        The additive smoothing mass. With ``alpha == 0`` unseen pairs
        have probability 0 and a log-probability of ``-inf``.

    Attributes
    ----------
    counts : numpy array of int64, shape ``(n_contexts, n_values)``

    """
    def __init__(self, name, n_contexts, n_values, alpha=ALPHA):
        """Constructor."""
        self.name = name
        self.alpha = alpha
        self.counts = numpy.zeros((n_contexts, n_values), dtype=numpy.int64)
        self._log_probs = None

    @property
    def shape(self):
        return self.counts.shape

    def add(self, contexts, values, count=1):
        """
        Increment the counts of the ``(context, value)`` pairs.

        Parameters
        ----------
        contexts, values : array-like of int
            Parallel sequences of row and column indices. Repeated pairs
            are counted once per occurrence.

        """
        numpy.add.at(self.counts, (numpy.asarray(contexts),
                                   numpy.asarray(values)), count)
        self._log_probs = None

    def merge(self, other):
        """Add the counts of another table with the same shape."""
        if other.shape != self.shape:
            raise ModelError(
                f"ERROR: cannot merge table {other.name} of shape "
                f"{other.shape} into {self.name} of shape {self.shape}")
        self.counts += other.counts
        self._log_probs = None

    def probs(self):
        """Return the ``(n_contexts, n_values)`` array of probabilities."""
        n_values = self.counts.shape[1]
        num = self.counts + self.alpha
        den = self.counts.sum(axis=1, keepdims=True) + self.alpha * n_values
        with numpy.errstate(divide='ignore', invalid='ignore'):
            return numpy.where(den > 0, num / den, 0.0)

    def log_probs(self):
        """Return the log of :meth:`probs`, cached until the next update."""
        if self._log_probs is None:
            with numpy.errstate(divide='ignore'):
                self._log_probs = numpy.log(self.probs())
        return self._log_probs

    def prob(self, context, value):
        """Return ``P(value | context)``."""
        return float(self.probs()[context, value])


def feature_cardinalities(vocab):
    """Return the number of codes of each feature, boundary included."""
    n_words = vocab.n_word_codes + 1
    n_tags = vocab.n_tag_codes + 1
    return (n_words, n_tags, N_COMP_CODES, N_COMP_CODES,
            n_words, n_tags, N_COMP_CODES, N_COMP_CODES)


def feature_views(vocab, layer):
    """
    Encode the features of every position of a layer.

    Parameters
    ----------
    vocab : :class:`~linkchain.corpus.Vocab`
    layer : :class:`~linkchain.oracle.Layer`

    Returns
    -------
    numpy array of int64, shape ``(T, 8)``
        Row t holds the codes of position t in the order of
        :data:`FEATURES`. Neighbour slots beyond the ends of the layer
        hold the feature's boundary code: ``vocab.n_word_codes`` for
        words, ``vocab.n_tag_codes`` for tags and
        :data:`~linkchain.oracle.BOUNDARY` for comps.

    """
    tokens = layer.tokens
    n_tok = len(tokens)
    views = numpy.empty((n_tok, len(FEATURES)), dtype=numpy.int64)
    words = [vocab.word_code(tok.form) for tok in tokens]
    tags = [vocab.tag_code(tok.pos) for tok in tokens]
    views[:, FEAT_WORD] = words
    views[:, FEAT_POS] = tags
    views[:, FEAT_LCOMP] = [tok.lcomp for tok in tokens]
    views[:, FEAT_RCOMP] = [tok.rcomp for tok in tokens]
    views[:, FEAT_NEXT_WORD] = words[1:] + [vocab.n_word_codes]
    views[:, FEAT_NEXT_POS] = tags[1:] + [vocab.n_tag_codes]
    views[:, FEAT_PREV_RCOMP] = [oracle.BOUNDARY] + \
        [tok.rcomp for tok in tokens[:-1]]
    views[:, FEAT_NEXT_LCOMP] = [tok.lcomp for tok in tokens[1:]] + \
        [oracle.BOUNDARY]
    return views


class Model:
    """
    Vocabularies plus the transition and emission tables.

    Parameters
    ----------
    vocab : :class:`~linkchain.corpus.Vocab`
    alpha : float
        The smoothing mass shared by every table.

    Attributes
    ----------
    vocab : :class:`~linkchain.corpus.Vocab`
    alpha : float
    trans : :class:`~linkchain.model.CPTable`
        ``P(L_t | L_t-1)``; row :data:`~linkchain.oracle.BOUNDARY` is the
        distribution of the first link.
    emissions : list of :class:`~linkchain.model.CPTable`
        ``P(f | L_t)`` for each feature in :data:`FEATURES`.

    Notes
    -----
    A model is updated only while training. Once trained it is read-only,
    so one instance may be shared by concurrent parsers.

    """
    def __init__(self, vocab, alpha=ALPHA):
        """Constructor."""
        if alpha < 0:
            raise ModelError("ERROR: alpha must not be negative")
        self.vocab = vocab
        self.alpha = float(alpha)
        self.trans = CPTable('transition', len(oracle.LINKS) + 1,
                             len(oracle.LINKS), alpha)
        self.emissions = [
            CPTable(name, len(oracle.LINKS), card, alpha)
            for name, card in zip(FEATURES, feature_cardinalities(vocab))]

    @property
    def tables(self):
        """The transition table followed by the emission tables."""
        return [self.trans] + self.emissions

    def feature_views(self, layer):
        """Encode a layer against this model's vocabulary."""
        return feature_views(self.vocab, layer)

    def add_layers(self, layers):
        """
        Count the gold labels of layers.

        Parameters
        ----------
        layers : iterable of :class:`~linkchain.oracle.Layer`
            Layers with gold labels. Single-token layers are skipped.

        Returns
        -------
        int
            The number of layers counted.

        """
        n_layers = 0
        for layer in layers:
            if len(layer) < 2:
                continue
            views = self.feature_views(layer)
            labels = numpy.array(layer.labels, dtype=numpy.int64)
            prev = numpy.concatenate(([oracle.BOUNDARY], labels[:-1]))
            self.trans.add(prev, labels)
            for feat, table in enumerate(self.emissions):
                table.add(labels, views[:, feat])
            n_layers += 1
        return n_layers

    def merge(self, other):
        """
        Add the counts of a model trained with the same vocabulary.

        Raises
        ------
        :exc:`~linkchain.model.ModelError`
            If the vocabularies differ.

        """
        if other.vocab != self.vocab:
            raise ModelError("ERROR: cannot merge models with different "
                             "vocabularies")
        for mine, theirs in zip(self.tables, other.tables):
            mine.merge(theirs)

    def slice_scores(self, views):
        """
        Score every label at every position.

        Parameters
        ----------
        views : numpy array, shape ``(T, 8)``

        Returns
        -------
        emit : numpy array, shape ``(T, 3)``
            ``emit[t, l] = sum over f of log P(f_t | l)``.
        trans : numpy array, shape ``(4, 3)``
            ``trans[prev, l] = log P(l | prev)``.

        """
        emit = numpy.zeros((len(views), len(oracle.LINKS)))
        for feat, table in enumerate(self.emissions):
            emit += table.log_probs()[:, views[:, feat]].T
        return emit, self.trans.log_probs()

    def slice_log_score(self, view, l_prev, l_t):
        """
        Return the log-score of one position.

        Parameters
        ----------
        view : sequence of int
            One row of a feature view.
        l_prev : int
            The previous link or :data:`~linkchain.oracle.BOUNDARY`.
        l_t : int
            The current link.

        Returns
        -------
        float
            May be ``-inf`` when ``alpha == 0``.

        """
        score = self.trans.log_probs()[l_prev, l_t]
        for feat, table in enumerate(self.emissions):
            score += table.log_probs()[l_t, view[feat]]
        return float(score)

    def table_sizes(self):
        """Return ``{table name: (rows, columns, non-zero cells)}``."""
        return {table.name: table.shape + (int(numpy.count_nonzero(
                    table.counts)),) for table in self.tables}


def train(vocab, layers, alpha=ALPHA, concurrent=False, n_chunks=4):
    """
    Train a model by counting gold labels over layers.

    Parameters
    ----------
    vocab : :class:`~linkchain.corpus.Vocab`
    layers : iterable of :class:`~linkchain.oracle.Layer`
        Layers from :func:`~linkchain.oracle.derive_layers`.
    alpha : float
    concurrent : bool
        If True, count ``n_chunks`` slices of the layers in a
        :class:`python:concurrent.futures.ThreadPoolExecutor` and merge
        the partial models. The counts are the same either way.
    n_chunks : int

    Returns
    -------
    :class:`~linkchain.model.Model`

    """
    model = Model(vocab, alpha=alpha)
    if concurrent:
        layers = list(layers)
        chunks = [layers[num::n_chunks] for num in range(n_chunks)]

        def count_chunk(chunk):
            partial = Model(vocab, alpha=alpha)
            return partial, partial.add_layers(chunk)

        n_layers = 0
        with futures.ThreadPoolExecutor() as executor:
            for partial, n_counted in executor.map(count_chunk, chunks):
                model.merge(partial)
                n_layers += n_counted
    else:
        n_layers = model.add_layers(layers)
    logging.info("Trained on %i layers", n_layers)
    return model


def slice_log_score(model, view, l_prev, l_t):
    """Functional form of :meth:`Model.slice_log_score`."""
    return model.slice_log_score(view, l_prev, l_t)


def save(model, sink):
    """
    Write a model as text.

    Parameters
    ----------
    model : :class:`~linkchain.model.Model`
    sink : str, path or writable text stream

    Notes
    -----
    The header line is ``linkchain-model v1 alpha=<float>``, followed by
    the vocabulary (see :meth:`~linkchain.corpus.Vocab.dump`), one
    ``[table <name> <rows> <cols>]`` section per table holding
    ``<context>|<value>|<count>`` lines for the non-zero counts, and a
    closing ``[end]`` line.

    """
    if hasattr(sink, 'write'):
        _write_model(model, sink)
    else:
        with open(sink, 'w', encoding='utf-8') as fh:
            _write_model(model, fh)
        logging.info("Wrote model to %s", sink)


def _write_model(model, stream):
    stream.write(f"{FORMAT_NAME} {FORMAT_VERSION} alpha={model.alpha!r}\n")
    model.vocab.dump(stream)
    for table in model.tables:
        rows, cols = table.shape
        stream.write(f"[table {table.name} {rows} {cols}]\n")
        for ctx, value in zip(*numpy.nonzero(table.counts)):
            stream.write(f"{ctx}|{value}|{table.counts[ctx, value]}\n")
    stream.write("[end]\n")


def load(source):
    """
    Read a model written by :func:`~linkchain.model.save`.

    Parameters
    ----------
    source : str, path or readable text stream

    Returns
    -------
    :class:`~linkchain.model.Model`

    Raises
    ------
    :exc:`~linkchain.model.ModelError`
        If the header or version is wrong, or the file is truncated or
        malformed or not UTF-8. No partial model is returned.

    """
    if hasattr(source, 'read'):
        return _read_model(iter(source))
    try:
        with open(source, 'r', encoding='utf-8') as fh:
            model = _read_model(iter(fh))
    except UnicodeDecodeError:
        raise ModelError(f"ERROR: {source} is not valid UTF-8") from None
    logging.info("Read model from %s", source)
    return model


def _read_model(lines):
    header = _next_line(lines).split()
    if len(header) != 3 or header[0] != FORMAT_NAME:
        raise ModelError("ERROR: not a model file")
    if header[1] != FORMAT_VERSION:
        raise ModelError(
            f"ERROR: model format {header[1]} is not {FORMAT_VERSION}")
    if not header[2].startswith('alpha='):
        raise ModelError("ERROR: the header has no alpha")
    try:
        alpha = float(header[2][len('alpha='):])
        vocab = corpus.Vocab.load(lines)
    except (ValueError, corpus.CorpusError) as err:
        raise ModelError(f"ERROR: malformed model file: {err}") from None
    model = Model(vocab, alpha=alpha)
    line = _next_line(lines)
    for table in model.tables:
        rows, cols = table.shape
        expected = f"[table {table.name} {rows} {cols}]"
        if line != expected:
            raise ModelError(
                f"ERROR: expected {expected!r}, found {line!r}")
        line = _next_line(lines)
        while not line.startswith('['):
            try:
                ctx, value, count = (int(col) for col in line.split("|"))
                if not (0 <= ctx < rows and 0 <= value < cols) or count < 0:
                    raise ValueError(line)
                table.counts[ctx, value] = count
            except ValueError:
                raise ModelError(
                    f"ERROR: malformed count line {line!r} in table "
                    f"{table.name}") from None
            line = _next_line(lines)
    if line != '[end]':
        raise ModelError(f"ERROR: expected '[end]', found {line!r}")
    return model


def _next_line(lines):
    try:
        return next(lines).rstrip('\r\n')
    except StopIteration:
        raise ModelError("ERROR: the model file is truncated") from None

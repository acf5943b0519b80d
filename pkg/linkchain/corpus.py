"""
Reading, validating, filtering and numericalising dependency treebanks.

The treebank format is one token per line with four tab-separated columns,
``INDEX FORM POS HEAD``, and a blank line between sentences. ``HEAD`` is 0
for the sentence's root.

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
from collections import Counter


PUNCT_TAGS = frozenset([',', '.', ':', '``', "''", '-LRB-', '-RRB-', '#', '$'])
"""
The Penn Treebank punctuation tags, removed by
:func:`~linkchain.corpus.filter_short` by default.
"""
MAX_LEN = 10
"""
The default maximum sentence length after punctuation removal.
"""
OOV_STRING = '<OOV>'
"""
The string written for the out-of-vocabulary entry of a vocabulary dump.
"""

VIOLATION_RANGE = 'range'
"""
A head index is outside 0..n or a token index is malformed.
"""
VIOLATION_CROSSING = 'crossing'
"""
Two dependencies cross: "Dependencies do not cross".
"""
VIOLATION_CYCLE = 'cycle'
"""
A word depends on itself, directly or indirectly.
"""
VIOLATION_ROOT = 'root'
"""
The number of words depending on ROOT is not exactly one.
"""


class CorpusError(Exception):
    """
    Raised when a treebank cannot be read.

    Attributes
    ----------
    lineno : int or None
        The 1-based line number of the offending line, if known.

    """
    def __init__(self, msg, lineno=None):
        super().__init__(msg)
        self.lineno = lineno


class RawToken:
    """
    One token of a treebank sentence.

    Parameters
    ----------
    index : int
        1-based position in the sentence.
    form : str
        The surface string.
    pos : str
        The part-of-speech tag.
    head : int or None
        The index of the token's head, 0 for ROOT. ``None`` if the
        sentence carries no gold tree.

    """
    def __init__(self, index, form, pos, head):
        """Constructor."""
        self.index = index
        self.form = form
        self.pos = pos
        self.head = head

    def __eq__(self, other):
        return (isinstance(other, RawToken) and
                (self.index, self.form, self.pos, self.head) ==
                (other.index, other.form, other.pos, other.head))

    def __repr__(self):
        return f"RawToken({self.index}, {self.form!r}, {self.pos!r}, " \
               f"{self.head})"


class Sentence:
    """
    A sequence of :class:`~linkchain.corpus.RawToken` objects with indices
    ``1..n``.

    Parameters
    ----------
    tokens : sequence of :class:`~linkchain.corpus.RawToken`

    Attributes
    ----------
    tokens : list of :class:`~linkchain.corpus.RawToken`

    """
    def __init__(self, tokens):
        """Constructor."""
        self.tokens = list(tokens)
        for expected, tok in enumerate(self.tokens, start=1):
            if tok.index != expected:
                raise CorpusError(
                    f"ERROR: token indices must be 1..n, found {tok.index} "
                    f"at position {expected}")

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Sentence) and self.tokens == other.tokens

    def __repr__(self):
        return f"Sentence({' '.join(self.forms)!r})"

    @property
    def forms(self):
        """The tokens' surface strings."""
        return [tok.form for tok in self.tokens]

    @property
    def tags(self):
        """The tokens' part-of-speech tags."""
        return [tok.pos for tok in self.tokens]

    def has_tree(self):
        """Return True if every token has a head."""
        return all(tok.head is not None for tok in self.tokens)

    @property
    def tree(self):
        """
        The gold :class:`~linkchain.corpus.DepTree` implied by the head
        fields, or ``None``.

        """
        if not self.has_tree():
            return None
        return DepTree([tok.head for tok in self.tokens])

    def with_heads(self, heads):
        """
        Return a copy of this sentence with its heads replaced.

        Parameters
        ----------
        heads : sequence of int or :class:`~linkchain.corpus.DepTree`

        Returns
        -------
        :class:`~linkchain.corpus.Sentence`

        """
        heads = list(heads)
        if len(heads) != len(self.tokens):
            raise CorpusError(
                f"ERROR: {len(heads)} heads given for a sentence of "
                f"{len(self.tokens)} tokens")
        return Sentence(
            RawToken(tok.index, tok.form, tok.pos, head)
            for tok, head in zip(self.tokens, heads))


class DepTree:
    """
    Head assignments of a sentence. ``heads[i]`` is the head of token
    ``i + 1``; 0 stands for ROOT.

    The constructor does not validate the tree,
    use :func:`~linkchain.corpus.validate_tree`.

    """
    def __init__(self, heads):
        """Constructor."""
        self.heads = tuple(int(h) for h in heads)

    def __len__(self):
        return len(self.heads)

    def __iter__(self):
        return iter(self.heads)

    def __getitem__(self, idx):
        return self.heads[idx]

    def __eq__(self, other):
        if isinstance(other, DepTree):
            return self.heads == other.heads
        return NotImplemented

    def __hash__(self):
        return hash(self.heads)

    def __repr__(self):
        return f"DepTree({self.heads})"

    @property
    def root(self):
        """The 1-based index of the first token headed by ROOT, or 0."""
        for idx, head in enumerate(self.heads, start=1):
            if head == 0:
                return idx
        return 0

    def arcs(self):
        """Return the list of ``(dependent, head)`` pairs."""
        return [(idx, head) for idx, head in enumerate(self.heads, start=1)]


class TreeViolation:
    """
    The first dependency-grammar axiom violated by a head sequence.

    Attributes
    ----------
    axiom : str
        One of the ``VIOLATION_*`` constants.
    message : str
        A readable description naming the offending tokens.

    """
    def __init__(self, axiom, message):
        """Constructor."""
        self.axiom = axiom
        self.message = message

    def __repr__(self):
        return f"TreeViolation({self.axiom!r}, {self.message!r})"

    def __str__(self):
        return f"{self.axiom}: {self.message}"


def read_corpus(stream, require_heads=True):
    """
    Read every sentence from a treebank stream.

    Parameters
    ----------
    stream : iterable of str
        An open text file or any iterable of lines.
    require_heads : bool
        If False, the HEAD column may be ``_``, in which case the token's
        head is ``None``.

    Returns
    -------
    list of :class:`~linkchain.corpus.Sentence`

    Raises
    ------
    :exc:`~linkchain.corpus.CorpusError`
        If a line does not have four columns, its index or head is not
        numeric, or a sentence's indices are not contiguous.

    """
    sentences = []
    tokens = []
    start_line = None
    lineno = 0
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip('\r\n')
        if not line.strip():
            if tokens:
                sentences.append(_make_sentence(tokens, start_line))
                tokens = []
            continue
        if not tokens:
            start_line = lineno
        tokens.append(_parse_line(line, lineno, require_heads))
    if tokens:
        sentences.append(_make_sentence(tokens, start_line))
    logging.info("Read %i sentences from %i lines", len(sentences), lineno)
    return sentences


def _parse_line(line, lineno, require_heads):
    """Parse one token line into a RawToken."""
    cols = line.split('\t')
    if len(cols) != 4:
        raise CorpusError(
            f"ERROR: line {lineno}: expected 4 tab-separated columns, "
            f"found {len(cols)}: {line!r}", lineno=lineno)
    index, form, pos, head = cols
    try:
        index = int(index)
    except ValueError:
        raise CorpusError(
            f"ERROR: line {lineno}: index {index!r} is not an integer",
            lineno=lineno) from None
    if head == '_' and not require_heads:
        head = None
    else:
        try:
            head = int(head)
        except ValueError:
            raise CorpusError(
                f"ERROR: line {lineno}: head {head!r} is not an integer",
                lineno=lineno) from None
    if index < 1:
        raise CorpusError(
            f"ERROR: line {lineno}: index must be at least 1", lineno=lineno)
    if head is not None and (head < 0 or head == index):
        raise CorpusError(
            f"ERROR: line {lineno}: invalid head {head} for token {index}",
            lineno=lineno)
    return RawToken(index, form, pos, head)


def _make_sentence(tokens, start_line):
    """Build a Sentence, tagging index errors with the sentence's line."""
    try:
        return Sentence(tokens)
    except CorpusError as err:
        raise CorpusError(
            f"ERROR: sentence starting at line {start_line}: {err}",
            lineno=start_line) from None


def write_corpus(sentences, stream, heads=None):
    """
    Write sentences in the 4-column treebank format.

    Parameters
    ----------
    sentences : sequence of :class:`~linkchain.corpus.Sentence`
    stream : writable text stream
    heads : sequence of head sequences, optional
        Heads to write in place of the sentences' own, one per sentence.
        Missing heads are written as ``_``.

    """
    if heads is None:
        heads = [[tok.head for tok in sent.tokens] for sent in sentences]
    for sent, sent_heads in zip(sentences, heads):
        for tok, head in zip(sent.tokens, sent_heads):
            head = '_' if head is None else head
            stream.write(f"{tok.index}\t{tok.form}\t{tok.pos}\t{head}\n")
        stream.write("\n")


def validate_tree(heads):
    """
    Check a head sequence against the dependency grammar axioms.

    Parameters
    ----------
    heads : sequence of int
        ``heads[i]`` is the head of token ``i + 1``; 0 is ROOT.

    Returns
    -------
    :class:`~linkchain.corpus.TreeViolation` or None
        ``None`` if the heads form a single-rooted, acyclic, projective tree.

    Notes
    -----
    The checks are made in the order: head range, crossing arcs, cycles
    (self-dependence included), exactly one root. The first failing check
    is reported.

    """
    heads = list(heads)
    n = len(heads)
    if n == 0:
        return TreeViolation(VIOLATION_RANGE, "empty head sequence")
    for idx, head in enumerate(heads, start=1):
        if head < 0 or head > n:
            return TreeViolation(
                VIOLATION_RANGE, f"token {idx} has head {head} outside 0..{n}")
    crossing = _find_crossing(heads)
    if crossing is not None:
        (a, b), (c, d) = crossing
        return TreeViolation(
            VIOLATION_CROSSING, f"arc {a}-{b} crosses arc {c}-{d}")
    for idx in range(1, n + 1):
        cycle = _find_cycle(heads, idx)
        if cycle is not None:
            return TreeViolation(
                VIOLATION_CYCLE,
                f"token {idx} depends on itself via {cycle}")
    roots = [idx for idx, head in enumerate(heads, start=1) if head == 0]
    if len(roots) != 1:
        return TreeViolation(
            VIOLATION_ROOT, f"expected exactly one root, found {roots}")
    return None


def _find_cycle(heads, start):
    """Return the head path from start if it returns to start, else None."""
    path = [start]
    seen = {start}
    node = heads[start - 1]
    while node != 0:
        path.append(node)
        if node == start:
            return path
        if node in seen:
            # A cycle that does not pass through start.
            return None
        seen.add(node)
        node = heads[node - 1]
    return None


def _find_crossing(heads):
    """
    Return the first pair of crossing arcs as ``((a, b), (c, d))`` with
    ``a < b`` and ``c < d``, or None. ROOT sits at position 0.

    """
    spans = sorted(
        (min(idx, head), max(idx, head))
        for idx, head in enumerate(heads, start=1))
    for i, (a, b) in enumerate(spans):
        for c, d in spans[i + 1:]:
            if a < c < b < d:
                return (a, b), (c, d)
    return None


def is_projective(heads):
    """
    Return True if no two arcs cross, with ROOT at position 0.

    Parameters
    ----------
    heads : sequence of int

    Returns
    -------
    bool

    """
    return _find_crossing(list(heads)) is None


def _strip_punct(sentence, punct_tags):
    """
    Remove punctuation tokens, re-pointing heads through them. Returns
    the list of (form, pos, head) triples for the remaining tokens, with
    heads renumbered.

    """
    heads = [tok.head for tok in sentence.tokens]
    is_punct = [tok.pos in punct_tags for tok in sentence.tokens]
    new_index = {0: 0}
    kept = 0
    for idx, punct in enumerate(is_punct, start=1):
        if not punct:
            kept += 1
            new_index[idx] = kept
    triples = []
    n = len(heads)
    for tok, punct in zip(sentence.tokens, is_punct):
        if punct:
            continue
        head = tok.head
        steps = 0
        # Bounded walk so cyclic input cannot loop forever.
        while head is not None and 0 < head <= n and is_punct[head - 1] and \
                steps <= n:
            head = heads[head - 1]
            steps += 1
        if head is None:
            new_head = None
        elif head in new_index:
            new_head = new_index[head]
        else:
            # Out of range or stuck in a punctuation cycle.
            new_head = -1
        triples.append((tok.form, tok.pos, new_head))
    return triples


def filter_short(sentence, punct_tags=PUNCT_TAGS, max_len=MAX_LEN):
    """
    Remove punctuation from a sentence and keep it only if it is short
    enough and still forms a valid projective tree.

    Parameters
    ----------
    sentence : :class:`~linkchain.corpus.Sentence`
    punct_tags : set of str
        The tags that mark punctuation tokens.
    max_len : int
        The maximum number of tokens after punctuation removal.

    Returns
    -------
    :class:`~linkchain.corpus.Sentence` or None
        ``None`` if the sentence is rejected.

    Notes
    -----
    A token headed by a removed punctuation token is re-headed to that
    token's head, transitively.

    """
    kept, reason = _filter_one(sentence, punct_tags, max_len)
    return kept


def _filter_one(sentence, punct_tags, max_len):
    """Return (sentence or None, rejection reason or None)."""
    triples = _strip_punct(sentence, punct_tags)
    if not triples:
        return None, 'empty'
    if len(triples) > max_len:
        return None, 'too_long'
    heads = [head for _, _, head in triples]
    if any(head is None for head in heads):
        return None, 'no_heads'
    violation = validate_tree(heads)
    if violation is not None:
        return None, violation.axiom
    tokens = [RawToken(idx, form, pos, head)
              for idx, (form, pos, head) in enumerate(triples, start=1)]
    return Sentence(tokens), None


class FilterStats:
    """
    Counts of the sentences kept and rejected by
    :func:`~linkchain.corpus.filter_corpus`.

    Attributes
    ----------
    read : int
        The number of sentences examined.
    kept : int
        The number of sentences accepted.
    rejected : dict
        Rejection counts keyed by reason: ``'empty'``, ``'too_long'``,
        ``'no_heads'`` or one of the ``VIOLATION_*`` constants.

    """
    def __init__(self):
        """Constructor."""
        self.read = 0
        self.kept = 0
        self.rejected = Counter()

    @property
    def n_rejected(self):
        """The total number of rejected sentences."""
        return sum(self.rejected.values())

    def __str__(self):
        reasons = ", ".join(
            f"{reason}={count}" for reason, count in sorted(
                self.rejected.items()))
        return f"read={self.read} kept={self.kept} " \
               f"rejected={self.n_rejected} ({reasons})"


def filter_corpus(sentences, punct_tags=PUNCT_TAGS, max_len=MAX_LEN):
    """
    Apply :func:`~linkchain.corpus.filter_short` to every sentence.

    Returns
    -------
    kept : list of :class:`~linkchain.corpus.Sentence`
    stats : :class:`~linkchain.corpus.FilterStats`

    """
    kept = []
    stats = FilterStats()
    for num, sent in enumerate(sentences, start=1):
        stats.read += 1
        filtered, reason = _filter_one(sent, punct_tags, max_len)
        if filtered is None:
            stats.rejected[reason] += 1
            logging.debug("Rejected sentence %i (%s)", num, reason)
        else:
            stats.kept += 1
            kept.append(filtered)
    logging.info("Filtered corpus: %s", stats)
    return kept, stats


class VocabCounts:
    """
    Mergeable frequency counts of word forms and tags.

    Forms and tags keep their first-occurrence order, which breaks
    frequency ties in :meth:`~linkchain.corpus.VocabCounts.to_vocab`.
    Merging keeps this object's order first, so merging partial counts
    of consecutive corpus chunks in order gives the same vocabulary as
    counting the whole corpus.

    """
    def __init__(self):
        """Constructor."""
        self.forms = Counter()
        self.tags = Counter()

    def add(self, sentences):
        """Count the forms and tags of the sentences."""
        for sent in sentences:
            self.forms.update(sent.forms)
            self.tags.update(sent.tags)
        return self

    def merge(self, other):
        """Return a new VocabCounts with the counts of both."""
        merged = VocabCounts()
        merged.forms = self.forms + other.forms
        merged.tags = self.tags + other.tags
        return merged

    def to_vocab(self, size):
        """Return a :class:`~linkchain.corpus.Vocab` of the top forms."""
        if size < 1:
            raise CorpusError("ERROR: the vocabulary size must be at least 1")
        order = {form: num for num, form in enumerate(self.forms)}
        ranked = sorted(
            self.forms.items(), key=lambda item: (-item[1], order[item[0]]))
        return Vocab(ranked[:size], list(self.tags.items()), size)


class Vocab:
    """
    Word and tag code tables.

    Word codes ``0..m-1`` are the in-vocabulary forms, ordered by
    frequency; code ``m`` is the out-of-vocabulary code. Tag codes
    ``0..k-1`` are the observed tags in first-occurrence order; code ``k``
    is the unknown-tag code.

    Parameters
    ----------
    words : list of (str, int)
        ``(form, frequency)`` pairs in code order.
    tags : list of (str, int)
        ``(tag, frequency)`` pairs in code order.
    size : int
        The configured vocabulary size K.

    Attributes
    ----------
    words, tags : list of str
    word_freqs, tag_freqs : list of int
    size : int
    oov : int
        The out-of-vocabulary word code.
    unknown_tag : int
        The code for tags never seen in training.

    """
    def __init__(self, words, tags, size):
        """Constructor."""
        self.words = [form for form, _ in words]
        self.word_freqs = [freq for _, freq in words]
        self.tags = [tag for tag, _ in tags]
        self.tag_freqs = [freq for _, freq in tags]
        self.size = size
        self._word_codes = {form: code for code, form in enumerate(self.words)}
        self._tag_codes = {tag: code for code, tag in enumerate(self.tags)}
        self.oov = len(self.words)
        self.unknown_tag = len(self.tags)

    def __eq__(self, other):
        return (isinstance(other, Vocab) and
                self.words == other.words and
                self.word_freqs == other.word_freqs and
                self.tags == other.tags and
                self.tag_freqs == other.tag_freqs and
                self.size == other.size)

    @property
    def n_word_codes(self):
        """The number of word codes, the OOV code included."""
        return len(self.words) + 1

    @property
    def n_tag_codes(self):
        """The number of tag codes, the unknown-tag code included."""
        return len(self.tags) + 1

    def word_code(self, form):
        """Return the code of a form, the OOV code if it is unknown."""
        return self._word_codes.get(form, self.oov)

    def tag_code(self, tag):
        """Return the code of a tag, the unknown-tag code if it is unknown."""
        return self._tag_codes.get(tag, self.unknown_tag)

    def word_string(self, code):
        """Return the form of a word code."""
        if code == self.oov:
            return OOV_STRING
        return self.words[code]

    def is_oov(self, form):
        """Return True if the form is out of vocabulary."""
        return form not in self._word_codes

    def oov_mask(self, sentence):
        """Return a list of booleans, True for each OOV token."""
        return [self.is_oov(form) for form in sentence.forms]

    def dump(self, stream):
        """
        Write the vocabulary as ``code<TAB>string<TAB>frequency`` lines:
        a ``[words K m]`` section, then a ``[tags k]`` section.

        """
        stream.write(f"[words {self.size} {len(self.words)}]\n")
        for code, (form, freq) in enumerate(zip(self.words, self.word_freqs)):
            stream.write(f"{code}\t{form}\t{freq}\n")
        stream.write(f"{self.oov}\t{OOV_STRING}\t0\n")
        stream.write(f"[tags {len(self.tags)}]\n")
        for code, (tag, freq) in enumerate(zip(self.tags, self.tag_freqs)):
            stream.write(f"{code}\t{tag}\t{freq}\n")

    @classmethod
    def load(cls, lines):
        """
        Read a vocabulary written by :meth:`~linkchain.corpus.Vocab.dump`.

        Parameters
        ----------
        lines : iterator of str
            Consumed up to the end of the tags section.

        Raises
        ------
        :exc:`~linkchain.corpus.CorpusError`
            If the sections are missing or malformed.

        """
        header = _next_line(lines).split()
        if len(header) != 3 or header[0] != '[words':
            raise CorpusError("ERROR: missing [words] section")
        size = int(header[1])
        n_words = int(header[2].rstrip(']'))
        words = [_read_entry(_next_line(lines), code)
                 for code in range(n_words)]
        _read_entry(_next_line(lines), n_words)
        header = _next_line(lines).split()
        if len(header) != 2 or header[0] != '[tags':
            raise CorpusError("ERROR: missing [tags] section")
        n_tags = int(header[1].rstrip(']'))
        tags = [_read_entry(_next_line(lines), code) for code in range(n_tags)]
        return cls(words, tags, size)


def _next_line(lines):
    """Return the next line without its newline; raise at end of input."""
    try:
        return next(lines).rstrip('\r\n')
    except StopIteration:
        raise CorpusError("ERROR: unexpected end of vocabulary") from None


def _read_entry(line, code):
    """Parse one ``code<TAB>string<TAB>frequency`` line."""
    cols = line.split('\t')
    if len(cols) != 3 or cols[0] != str(code):
        raise CorpusError(f"ERROR: malformed vocabulary entry {line!r}")
    try:
        return cols[1], int(cols[2])
    except ValueError:
        raise CorpusError(
            f"ERROR: malformed vocabulary frequency in {line!r}") from None


def build_vocab(corpus, size=2500):
    """
    Build the word and tag tables of a corpus.

    Parameters
    ----------
    corpus : sequence of :class:`~linkchain.corpus.Sentence`
    size : int
        K, the number of most frequent forms to keep.

    Returns
    -------
    :class:`~linkchain.corpus.Vocab`

    Notes
    -----
    Frequency ties at rank K are broken by first occurrence.

    """
    return VocabCounts().add(corpus).to_vocab(size)

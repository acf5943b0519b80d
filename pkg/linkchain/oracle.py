"""
Converts a gold dependency tree into layers of LEFT/RIGHT/NONE link labels
and replays labelled layers back into a tree.

Each layer is one compression level of the sentence. A token labelled
:attr:`LEFT` or :attr:`RIGHT` depends on its neighbour in that layer; it is
attached, removed, and the neighbour's comp counter on that side is
incremented. :attr:`NONE` postpones the token to a later layer.

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

from . import corpus


# Link labels. Their numeric order is the decoder's tie-break order.
LEFT = 0
"""
The token depends on its left neighbour.
"""
RIGHT = 1
"""
The token depends on its right neighbour.
"""
NONE = 2
"""
The search for the token's head is postponed.
"""
BOUNDARY = 3
"""
The link before the first token, and the value of neighbour features
beyond either end of a layer.
"""
LINKS = (LEFT, RIGHT, NONE)
"""
The labels a token can take, in tie-break order.
"""
LINK_NAMES = {LEFT: 'LEFT', RIGHT: 'RIGHT', NONE: 'NONE', BOUNDARY: 'BOUNDARY'}

# Comp counter values.
COMP_NONE = 0
"""
No dependent attached on that side yet.
"""
COMP_ONE = 1
"""
One dependent attached on that side.
"""
COMP_MANY = 2
"""
Two or more dependents attached on that side.
"""
COMP_NAMES = {COMP_NONE: 'NONE', COMP_ONE: 'ONE', COMP_MANY: 'MANY',
              BOUNDARY: 'BOUNDARY'}


class OracleError(Exception):
    pass


def increment_comp(comp):
    """Return the comp value after one more dependent: NONE, ONE, MANY."""
    return min(comp + 1, COMP_MANY)


def comp_value(count):
    """Map a dependent count to a comp value."""
    return min(count, COMP_MANY)


class LayerToken:
    """
    A token in one compression layer.

    Parameters
    ----------
    orig_index : int
        The token's 1-based position in the original sentence.
    form : str
    pos : str
    lcomp, rcomp : int
        Comp values for dependents already attached from the left/right.
    label : int
        The token's link label in this layer; gold when deriving layers,
        predicted when parsing.

    """
    def __init__(self, orig_index, form, pos, lcomp=COMP_NONE,
            rcomp=COMP_NONE, label=NONE):
        """Constructor."""
        self.orig_index = orig_index
        self.form = form
        self.pos = pos
        self.lcomp = lcomp
        self.rcomp = rcomp
        self.label = label

    def copy(self, label=None):
        """Return a copy, optionally with a new label."""
        return LayerToken(
            self.orig_index, self.form, self.pos, self.lcomp, self.rcomp,
            self.label if label is None else label)

    def __eq__(self, other):
        return isinstance(other, LayerToken) and \
            self.__dict__ == other.__dict__

    def __repr__(self):
        return f"LayerToken({self.orig_index}, {self.form!r}, " \
               f"{COMP_NAMES[self.lcomp]}, {COMP_NAMES[self.rcomp]}, " \
               f"{LINK_NAMES[self.label]})"


class Layer:
    """
    One compression level: a sequence of
    :class:`~linkchain.oracle.LayerToken` objects.

    """
    def __init__(self, tokens):
        """Constructor."""
        self.tokens = list(tokens)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Layer) and self.tokens == other.tokens

    def __repr__(self):
        return f"Layer({self.tokens})"

    @property
    def labels(self):
        """The tokens' labels."""
        return [tok.label for tok in self.tokens]

    def labelled(self, labels):
        """Return a copy of this layer carrying the given labels."""
        labels = list(labels)
        if len(labels) != len(self.tokens):
            raise OracleError(
                f"ERROR: {len(labels)} labels for a layer of "
                f"{len(self.tokens)} tokens")
        return Layer(tok.copy(label) for tok, label in
                     zip(self.tokens, labels))


def initial_layer(sentence):
    """
    Return the lowest layer of a sentence: every token with no discovered
    dependents and a NONE label.

    """
    return Layer(LayerToken(tok.index, tok.form, tok.pos)
                 for tok in sentence.tokens)


def check_labels(labels):
    """
    Check a label sequence against the layer invariants.

    Returns
    -------
    str or None
        A description of the first problem, or ``None`` if the labels are
        admissible: the first label is not LEFT, the last is not RIGHT,
        and no RIGHT is followed by LEFT.

    Notes
    -----
    The at-least-one-link requirement is not checked here, because an
    all-NONE pass is a legal (if useless) input to
    :func:`~linkchain.oracle.apply_labels`.

    """
    labels = list(labels)
    for label in labels:
        if label not in LINKS:
            return f"unknown label {label}"
    if not labels:
        return None
    if labels[0] == LEFT:
        return "the first token cannot link LEFT"
    if labels[-1] == RIGHT:
        return "the last token cannot link RIGHT"
    for idx in range(1, len(labels)):
        if labels[idx - 1] == RIGHT and labels[idx] == LEFT:
            return f"tokens {idx} and {idx + 1} cannot head each other"
    return None


def apply_labels(layer, labels):
    """
    Attach and remove the linked tokens of a layer.

    Parameters
    ----------
    layer : :class:`~linkchain.oracle.Layer`
    labels : sequence of int
        One link label per token.

    Returns
    -------
    next_layer : :class:`~linkchain.oracle.Layer`
        The surviving tokens in order, with NONE labels and their comp
        counters incremented once per dependent removed from each side.
    attachments : set of (int, int)
        ``(dependent orig_index, head orig_index)`` pairs.

    Raises
    ------
    :exc:`~linkchain.oracle.OracleError`
        If the labels violate the layer invariants.

    """
    labels = list(labels)
    if len(labels) != len(layer):
        raise OracleError(
            f"ERROR: {len(labels)} labels for a layer of {len(layer)} tokens")
    problem = check_labels(labels)
    if problem:
        raise OracleError(f"ERROR: invalid label sequence: {problem}")
    tokens = layer.tokens
    attachments = set()
    survivors = []
    for idx, (tok, label) in enumerate(zip(tokens, labels)):
        if label == LEFT:
            attachments.add((tok.orig_index, tokens[idx - 1].orig_index))
        elif label == RIGHT:
            attachments.add((tok.orig_index, tokens[idx + 1].orig_index))
        else:
            new_tok = tok.copy(NONE)
            if idx > 0 and labels[idx - 1] == RIGHT:
                new_tok.lcomp = increment_comp(new_tok.lcomp)
            if idx + 1 < len(tokens) and labels[idx + 1] == LEFT:
                new_tok.rcomp = increment_comp(new_tok.rcomp)
            survivors.append(new_tok)
    return Layer(survivors), attachments


def gold_labels(layer, heads, pending):
    """
    Return the gold labels of a layer.

    A token is labelled LEFT/RIGHT iff its gold head is its immediate
    left/right neighbour and it has no dependents left to attach.

    Parameters
    ----------
    layer : :class:`~linkchain.oracle.Layer`
    heads : sequence of int
        The gold heads of the original sentence.
    pending : dict
        The number of unattached dependents of each original index.

    """
    tokens = layer.tokens
    labels = []
    for idx, tok in enumerate(tokens):
        head = heads[tok.orig_index - 1]
        label = NONE
        if pending[tok.orig_index] == 0:
            if idx > 0 and tokens[idx - 1].orig_index == head:
                label = LEFT
            elif idx + 1 < len(tokens) and tokens[idx + 1].orig_index == head:
                label = RIGHT
        labels.append(label)
    return labels


def derive_layers(sentence, gold=None):
    """
    Encode a sentence and its gold tree as a sequence of labelled layers.

    Parameters
    ----------
    sentence : :class:`~linkchain.corpus.Sentence`
    gold : :class:`~linkchain.corpus.DepTree`, optional
        The gold tree; defaults to the sentence's own heads.

    Returns
    -------
    list of :class:`~linkchain.oracle.Layer`
        Every layer carries its gold labels. The last layer holds only the
        root token.

    Raises
    ------
    :exc:`~linkchain.oracle.OracleError`
        If the tree is invalid or not projective, in which case some layer
        has no linkable token.

    """
    if gold is None:
        gold = sentence.tree
    if gold is None:
        raise OracleError("ERROR: the sentence has no gold tree")
    heads = list(gold)
    if len(heads) != len(sentence):
        raise OracleError(
            f"ERROR: {len(heads)} heads for a sentence of "
            f"{len(sentence)} tokens")
    violation = corpus.validate_tree(heads)
    if violation is not None and violation.axiom != corpus.VIOLATION_CROSSING:
        raise OracleError(f"ERROR: invalid gold tree: {violation}")
    pending = {idx: 0 for idx in range(len(heads) + 1)}
    for head in heads:
        pending[head] += 1
    layers = []
    layer = initial_layer(sentence)
    while len(layer) > 1:
        labels = gold_labels(layer, heads, pending)
        if all(label == NONE for label in labels):
            raise OracleError(
                "ERROR: cannot linearise a non-projective tree; no token "
                f"can be attached in a layer of {len(layer)} tokens")
        layer = layer.labelled(labels)
        layers.append(layer)
        layer, attachments = apply_labels(layer, labels)
        for _, head in attachments:
            pending[head] -= 1
    layers.append(layer)
    return layers


def replay(layers):
    """
    Rebuild a tree from labelled layers.

    Parameters
    ----------
    layers : sequence of :class:`~linkchain.oracle.Layer`
        Each layer's tokens carry its labels; the last layer has one token.

    Returns
    -------
    :class:`~linkchain.corpus.DepTree`

    Raises
    ------
    :exc:`~linkchain.oracle.OracleError`
        If the labels are invalid, a token is attached twice or never, or
        the attachments do not form a valid tree.

    """
    layers = list(layers)
    if not layers or len(layers[-1]) != 1:
        raise OracleError("ERROR: the final layer must hold exactly one token")
    n = len(layers[0])
    heads = [None] * n
    for layer in layers[:-1]:
        _, attachments = apply_labels(layer, layer.labels)
        for dep, head in attachments:
            if heads[dep - 1] is not None:
                raise OracleError(f"ERROR: token {dep} is attached twice")
            heads[dep - 1] = head
    root = layers[-1].tokens[0].orig_index
    if heads[root - 1] is not None:
        raise OracleError(f"ERROR: root token {root} is also attached")
    heads[root - 1] = 0
    missing = [idx for idx, head in enumerate(heads, start=1) if head is None]
    if missing:
        raise OracleError(f"ERROR: tokens {missing} were never attached")
    violation = corpus.validate_tree(heads)
    if violation is not None:
        raise OracleError(f"ERROR: replayed heads are not a tree: {violation}")
    return corpus.DepTree(heads)


def dump_layers(layers, stream, header=None):
    """
    Write layers as text: one block per layer, one
    ``orig_index FORM POS lcomp rcomp label`` line per token, tab
    separated, with a blank line after each block.

    Parameters
    ----------
    layers : sequence of :class:`~linkchain.oracle.Layer`
    stream : writable text stream
    header : str, optional
        Written as a ``#`` comment before each block, with the layer's
        number appended.

    """
    for num, layer in enumerate(layers, start=1):
        if header is not None:
            stream.write(f"# {header} layer {num}\n")
        for tok in layer:
            stream.write(
                f"{tok.orig_index}\t{tok.form}\t{tok.pos}\t"
                f"{COMP_NAMES[tok.lcomp]}\t{COMP_NAMES[tok.rcomp]}\t"
                f"{LINK_NAMES[tok.label]}\n")
        stream.write("\n")

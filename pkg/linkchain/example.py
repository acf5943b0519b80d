#!/usr/bin/env python

"""
An example script::

    python3 -m linkchain.example

Work through this example, starting in the :func:`run_layers` function,
in conjunction with the documentation for
:func:`linkchain.oracle.derive_layers`
and :func:`linkchain.parser.parse`.

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

import sys

from linkchain import corpus
from linkchain import evaluation
from linkchain import model
from linkchain import oracle
from linkchain import parser
from linkchain import synthetic


def king_sentence():
    """Return "The king of Prussia bought a camel" with its tree."""
    forms = ['The', 'king', 'of', 'Prussia', 'bought', 'a', 'camel']
    tags = ['DT', 'NN', 'IN', 'NNP', 'VBD', 'DT', 'NN']
    heads = [2, 5, 2, 3, 0, 7, 5]
    return corpus.Sentence(
        corpus.RawToken(idx, form, pos, head)
        for idx, (form, pos, head) in enumerate(zip(forms, tags, heads),
                                                start=1))


def run_layers(stream=sys.stdout):
    """
    Show how a tree is encoded as layers of link labels, and decoded.

    Returns
    -------
    list of :class:`~linkchain.oracle.Layer`

    """
    sent = king_sentence()
    layers = oracle.derive_layers(sent)
    # Each block is one pass: the tokens still unattached, their comp
    # counters and the label that links them to a neighbour.
    oracle.dump_layers(layers, stream, header="king")
    tree = oracle.replay(layers)
    stream.write(f"Replayed heads: {tree.heads}\n")
    return layers


def run_synthetic(n_train=500, n_test=100, seed=42, stream=sys.stdout):
    """
    Train on a synthetic treebank and compare the parser with the
    adjacent-word baseline on held-out sentences.

    Returns
    -------
    parsed, adjacent : :class:`~linkchain.evaluation.EvalReport`

    """
    pairs = synthetic.generate(seed=seed, count=n_train + n_test)
    train = [sent for sent, _ in pairs[:n_train]]
    test = [sent for sent, _ in pairs[n_train:]]

    vocab = corpus.build_vocab(train, size=2500)
    layers = [layer for sent in train for layer in oracle.derive_layers(sent)]
    trained = model.train(vocab, layers)

    results = parser.parse_corpus(trained, test)
    parsed = evaluation.aggregate(
        evaluation.score(res.tree, sent.tree, vocab.oov_mask(sent))
        for res, sent in zip(results, test))
    adjacent = evaluation.aggregate(
        evaluation.score(evaluation.baseline_adjacent(sent), sent.tree)
        for sent in test)

    stream.write("Parser:\n")
    stream.write(parsed.format())
    stream.write("Adjacent baseline:\n")
    stream.write(adjacent.format())

    # Parse the example sentence. Its heads are ignored by the parser.
    result = parser.parse(trained, king_sentence())
    stream.write(f"Parsed 'The king of Prussia bought a camel' in "
                 f"{result.n_passes} passes: {result.tree.heads}\n")
    return parsed, adjacent


if __name__ == '__main__':
    print("=============================")
    print("RUNNING LAYER ENCODING EXAMPLE")
    print("=============================")
    run_layers()
    print("\n==================================")
    print("RUNNING SYNTHETIC TRAINING EXAMPLE")
    print("==================================")
    run_synthetic()

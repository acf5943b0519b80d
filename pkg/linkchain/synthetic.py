"""
A small dependency grammar for generating treebanks with known trees.

The grammar is::

    S  -> NP VERB (NP) (ADV)
    NP -> (DET) NOUN (PP)
    PP -> PREP NP

A determiner attaches to its noun, a preposition to the noun it follows,
a prepositional object to its preposition, and the subject, object and
adverb to the verb, which is the root. "the king of Prussia bought a
camel" is one of its sentences.

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

import numpy

from .corpus import DepTree, RawToken, Sentence, MAX_LEN


DET = 'DET'
NOUN = 'NOUN'
PREP = 'PREP'
VERB = 'VERB'
ADV = 'ADV'
WORD_CLASSES = (DET, NOUN, PREP, VERB, ADV)

LEXICON = {
    DET: ('the', 'a', 'every', 'this', 'that'),
    NOUN: ('king', 'camel', 'Prussia', 'queen', 'horse', 'merchant', 'city',
        'river', 'garden', 'tower', 'bread', 'letter'),
    PREP: ('of', 'in', 'near', 'with', 'from'),
    VERB: ('bought', 'saw', 'sold', 'found', 'liked', 'sent'),
    ADV: ('yesterday', 'quickly', 'often', 'again'),
}
"""
The default words of each class.
"""
TAGS = {DET: 'DT', NOUN: 'NN', PREP: 'IN', VERB: 'VBD', ADV: 'RB'}
"""
The part-of-speech tag written for each class.
"""
MAX_RESAMPLE = 1000
"""
The number of draws :func:`generate` makes for one sentence before giving
up on the length limit.
"""


class SyntheticError(Exception):
    pass


class ToyGrammar:
    """
    The lexicon and expansion probabilities of the grammar.

    Parameters
    ----------
    lexicon : dict, optional
        Maps each of :data:`WORD_CLASSES` to a non-empty sequence of words.
    det_prob : float
        The probability that a noun phrase has a determiner.
    pp_prob : float
        The probability that a noun phrase has a prepositional phrase.
    obj_prob : float
        The probability that a sentence has an object.
    adv_prob : float
        The probability that a sentence ends with an adverb.
    max_pp_depth : int
        The deepest nesting of prepositional phrases.
    max_len : int
        Longer sentences are redrawn.

    """
    def __init__(self, lexicon=None, det_prob=0.7, pp_prob=0.3, obj_prob=0.7,
            adv_prob=0.3, max_pp_depth=2, max_len=MAX_LEN):
        """Constructor."""
        self.lexicon = {cls: tuple(words)
                        for cls, words in (lexicon or LEXICON).items()}
        for cls in WORD_CLASSES:
            if not self.lexicon.get(cls):
                raise SyntheticError(f"ERROR: no words for class {cls}")
        for name, prob in (('det_prob', det_prob), ('pp_prob', pp_prob),
                ('obj_prob', obj_prob), ('adv_prob', adv_prob)):
            if not 0 <= prob <= 1:
                raise SyntheticError(
                    f"ERROR: {name} must be in [0, 1], not {prob}")
        if max_len < 2:
            raise SyntheticError("ERROR: max_len must be at least 2")
        self.det_prob = det_prob
        self.pp_prob = pp_prob
        self.obj_prob = obj_prob
        self.adv_prob = adv_prob
        self.max_pp_depth = max_pp_depth
        self.max_len = max_len

    def tag(self, cls):
        """Return the tag of a word class."""
        return TAGS[cls]


class _Builder:
    """Accumulates ``[class, word, head]`` entries with 1-based heads."""
    def __init__(self, grammar, rng):
        self.grammar = grammar
        self.rng = rng
        self.tokens = []

    def word(self, cls, head=None):
        words = self.grammar.lexicon[cls]
        self.tokens.append([cls, words[self.rng.integers(len(words))], head])
        return len(self.tokens)

    def chance(self, prob):
        return self.rng.random() < prob

    def noun_phrase(self, depth):
        """Append an NP and return the index of its noun."""
        det = self.word(DET) if self.chance(self.grammar.det_prob) else None
        noun = self.word(NOUN)
        if det is not None:
            self.tokens[det - 1][2] = noun
        if (depth < self.grammar.max_pp_depth and
                self.chance(self.grammar.pp_prob)):
            prep = self.word(PREP, head=noun)
            pobj = self.noun_phrase(depth + 1)
            self.tokens[pobj - 1][2] = prep
        return noun

    def sentence(self):
        subj = self.noun_phrase(0)
        verb = self.word(VERB, head=0)
        self.tokens[subj - 1][2] = verb
        if self.chance(self.grammar.obj_prob):
            obj = self.noun_phrase(0)
            self.tokens[obj - 1][2] = verb
        if self.chance(self.grammar.adv_prob):
            self.word(ADV, head=verb)
        return self.tokens


def generate(grammar=None, seed=42, count=1):
    """
    Generate sentences and their trees.

    Parameters
    ----------
    grammar : :class:`~linkchain.synthetic.ToyGrammar`, optional
        Defaults to ``ToyGrammar()``.
    seed : int
        Seeds :func:`numpy.random.default_rng`; the output is a function
        of the grammar, seed and count.
    count : int
        The number of sentences.

    Returns
    -------
    list of (:class:`~linkchain.corpus.Sentence`,
    :class:`~linkchain.corpus.DepTree`)
        Each sentence carries its tree in its head fields too.

    """
    if count < 1:
        raise SyntheticError("ERROR: count must be at least 1")
    if grammar is None:
        grammar = ToyGrammar()
    rng = numpy.random.default_rng(seed)
    result = []
    for _ in range(count):
        for _ in range(MAX_RESAMPLE):
            tokens = _Builder(grammar, rng).sentence()
            if len(tokens) <= grammar.max_len:
                break
        else:
            raise SyntheticError(
                f"ERROR: no sentence of at most {grammar.max_len} tokens "
                f"after {MAX_RESAMPLE} draws")
        sent = Sentence(
            RawToken(idx, word, grammar.tag(cls), head)
            for idx, (cls, word, head) in enumerate(tokens, start=1))
        result.append((sent, DepTree(head for _, _, head in tokens)))
    logging.info("Generated %i sentences from seed %i", count, seed)
    return result

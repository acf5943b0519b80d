"""
Exact decoding and marginals over the link labels of one layer.

The lattice has six states per position: the link label and a control bit
recording whether any label so far is not NONE. The constraints are:

- the first label is not LEFT and the last is not RIGHT
- RIGHT is never followed by LEFT, whatever the transition counts say
- the control bit must be set at the end, so at least one token links

All functions take a *scorer*, any object with a ``slice_scores(views)``
method returning ``(emit, trans)`` log-score arrays of shapes ``(T, 3)``
and ``(4, 3)``, as :meth:`linkchain.model.Model.slice_scores` does.

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

import itertools
import math

import numpy
from scipy.special import logsumexp

from .oracle import LEFT, RIGHT, NONE, BOUNDARY, LINKS


BRUTE_FORCE_MAX_LEN = 8
"""
The longest sequence :func:`brute_force` will enumerate.
"""
N_STATES = 2 * len(LINKS)


class InferenceError(Exception):
    pass


def state(link, seen):
    """Return the lattice state index of a link and control bit."""
    return 2 * link + int(seen)


def state_link(s):
    """Return the link of a lattice state."""
    return s // 2


def state_seen(s):
    """Return the control bit of a lattice state."""
    return bool(s % 2)


def _allowed_transitions():
    """The 6x6 boolean matrix of allowed state transitions."""
    allowed = numpy.zeros((N_STATES, N_STATES), dtype=bool)
    for prev_link, prev_seen, link in itertools.product(
            LINKS, (False, True), LINKS):
        if prev_link == RIGHT and link == LEFT:
            continue
        seen = prev_seen or link != NONE
        allowed[state(prev_link, prev_seen), state(link, seen)] = True
    return allowed


ALLOWED = _allowed_transitions()
START_OK = numpy.array(
    [state_link(s) != LEFT and state_seen(s) == (state_link(s) != NONE)
     for s in range(N_STATES)])
END_OK = numpy.array(
    [state_link(s) != RIGHT and state_seen(s) for s in range(N_STATES)])
STATE_LINKS = numpy.array([state_link(s) for s in range(N_STATES)])


class DecodeResult:
    """
    The outcome of :func:`viterbi`.

    Attributes
    ----------
    labels : tuple of int
        The best admissible label sequence; empty if ``valid`` is False.
    log_score : float
        The sum of its slice log-scores, ``-inf`` if ``valid`` is False.
    valid : bool
        False iff every admissible sequence scores ``-inf``.

    """
    def __init__(self, labels, log_score, valid):
        """Constructor."""
        self.labels = tuple(labels)
        self.log_score = log_score
        self.valid = valid

    def __repr__(self):
        return f"DecodeResult({self.labels}, {self.log_score}, {self.valid})"


def _lattice(scorer, views):
    """
    Build the log-potentials of the constrained lattice.

    Returns
    -------
    start : numpy array, shape ``(6,)``
        Scores of the first position's states.
    steps : numpy array, shape ``(T-1, 6, 6)``
        ``steps[t-1, s_prev, s]`` scores the move into position t.
    end : numpy array, shape ``(6,)``
        0 for accepting final states, ``-inf`` otherwise.

    """
    emit, trans = scorer.slice_scores(views)
    n_pos = len(emit)
    if n_pos < 2:
        raise InferenceError(
            f"ERROR: a layer must have at least 2 tokens, not {n_pos}")
    state_emit = emit[:, STATE_LINKS]
    start = numpy.where(
        START_OK, trans[BOUNDARY, STATE_LINKS] + state_emit[0], -numpy.inf)
    pair_trans = trans[STATE_LINKS][:, STATE_LINKS]
    steps = pair_trans[None, :, :] + state_emit[1:, None, :]
    steps = numpy.where(ALLOWED[None, :, :], steps, -numpy.inf)
    end = numpy.where(END_OK, 0.0, -numpy.inf)
    return start, steps, end


def viterbi(scorer, views):
    """
    Find the best admissible label sequence.

    Parameters
    ----------
    scorer : object with a ``slice_scores(views)`` method
    views : numpy array, shape ``(T, 8)``, ``T >= 2``

    Returns
    -------
    :class:`~linkchain.inference.DecodeResult`

    Notes
    -----
    Ties are broken in favour of the lower label (LEFT < RIGHT < NONE) at
    the earliest differing position. Best suffix scores are computed right
    to left, then labels are chosen left to right, taking the lowest label
    that still reaches the best total.

    """
    start, steps, end = _lattice(scorer, views)
    n_pos = len(steps) + 1
    suffix = numpy.empty((n_pos, N_STATES))
    suffix[-1] = end
    for t in range(n_pos - 1, 0, -1):
        suffix[t - 1] = (steps[t - 1] + suffix[t][None, :]).max(axis=1)
    totals = start + suffix[0]
    best = totals.max()
    if best == -numpy.inf:
        return DecodeResult((), -math.inf, False)
    labels = []
    current = None
    for t in range(n_pos):
        for link in LINKS:
            if t == 0:
                s = state(link, link != NONE)
                value = totals[s]
                target = best
            else:
                s = state(link, state_seen(current) or link != NONE)
                value = steps[t - 1][current, s] + suffix[t][s]
                target = suffix[t - 1][current]
            if value == target:
                break
        else:
            raise InferenceError("ERROR: lost the best path while decoding")
        labels.append(link)
        current = s
    return DecodeResult(labels, float(best), True)


def forward_backward(scorer, views):
    """
    Compute per-position label marginals over the admissible sequences.

    Parameters
    ----------
    scorer : object with a ``slice_scores(views)`` method
    views : numpy array, shape ``(T, 8)``, ``T >= 2``

    Returns
    -------
    marginals : numpy array, shape ``(T, 3)``
        ``marginals[t, l]`` is the posterior probability of label l.
    log_z : float
        The log of the summed exponentiated scores of all admissible
        sequences.

    Raises
    ------
    :exc:`~linkchain.inference.InferenceError`
        If every admissible sequence scores ``-inf``.

    """
    start, steps, end = _lattice(scorer, views)
    n_pos = len(steps) + 1
    fwd = numpy.empty((n_pos, N_STATES))
    bwd = numpy.empty((n_pos, N_STATES))
    with numpy.errstate(divide='ignore'):
        fwd[0] = start
        for t in range(1, n_pos):
            fwd[t] = logsumexp(fwd[t - 1][:, None] + steps[t - 1], axis=0)
        bwd[-1] = end
        for t in range(n_pos - 1, 0, -1):
            bwd[t - 1] = logsumexp(steps[t - 1] + bwd[t][None, :], axis=1)
        log_z = float(logsumexp(fwd[-1] + end))
    if log_z == -math.inf:
        raise InferenceError(
            "ERROR: every admissible label sequence has zero probability")
    state_marg = numpy.exp(fwd + bwd - log_z)
    marginals = numpy.zeros((n_pos, len(LINKS)))
    for s in range(N_STATES):
        marginals[:, state_link(s)] += state_marg[:, s]
    return marginals, log_z


def posterior_decode(scorer, views):
    """
    Return the per-position argmax of the marginals.

    For diagnostics only: independent argmaxes may break the adjacency
    and control constraints, so the parser never uses this.

    """
    marginals, _ = forward_backward(scorer, views)
    return tuple(int(link) for link in marginals.argmax(axis=1))


def is_admissible(labels):
    """Return True if a label sequence satisfies every lattice constraint."""
    labels = list(labels)
    if not labels or labels[0] == LEFT or labels[-1] == RIGHT:
        return False
    if all(label == NONE for label in labels):
        return False
    return all(not (prev == RIGHT and cur == LEFT)
               for prev, cur in zip(labels, labels[1:]))


def sequence_log_score(scorer, views, labels):
    """
    Sum the slice log-scores of a label sequence, left to right.

    Constraints are not applied; see :func:`is_admissible`.

    """
    emit, trans = scorer.slice_scores(views)
    score = 0.0
    prev = BOUNDARY
    for t, label in enumerate(labels):
        score += trans[prev, label] + emit[t, label]
        prev = label
    return float(score)


def brute_force(scorer, views):
    """
    Decode and compute marginals by enumerating all ``3**T`` sequences.

    A test oracle for :func:`viterbi` and :func:`forward_backward`, with
    the same constraints and tie-break rule.

    Returns
    -------
    best : :class:`~linkchain.inference.DecodeResult`
    log_z : float
        ``-inf`` if no admissible sequence has a finite score.
    marginals : numpy array, shape ``(T, 3)``
        All zero if ``log_z`` is ``-inf``.

    Raises
    ------
    :exc:`~linkchain.inference.InferenceError`
        If ``T`` exceeds :data:`BRUTE_FORCE_MAX_LEN`.

    """
    n_pos = len(views)
    if n_pos > BRUTE_FORCE_MAX_LEN:
        raise InferenceError(
            f"ERROR: refusing to enumerate 3**{n_pos} sequences")
    if n_pos < 2:
        raise InferenceError(
            f"ERROR: a layer must have at least 2 tokens, not {n_pos}")
    emit, trans = scorer.slice_scores(views)
    best_labels = ()
    best_score = -math.inf
    seqs = []
    scores = []
    # product() yields sequences in tie-break order, so a later sequence
    # replaces the best only if it scores strictly higher.
    for labels in itertools.product(LINKS, repeat=n_pos):
        if not is_admissible(labels):
            continue
        score = 0.0
        prev = BOUNDARY
        for t, label in enumerate(labels):
            score += trans[prev, label] + emit[t, label]
            prev = label
        seqs.append(labels)
        scores.append(score)
        if score > best_score:
            best_labels = labels
            best_score = score
    scores = numpy.array(scores)
    marginals = numpy.zeros((n_pos, len(LINKS)))
    if best_score == -math.inf:
        return DecodeResult((), -math.inf, False), -math.inf, marginals
    log_z = float(logsumexp(scores))
    weights = numpy.exp(scores - log_z)
    for labels, weight in zip(seqs, weights):
        marginals[numpy.arange(n_pos), labels] += weight
    return DecodeResult(best_labels, float(best_score), True), log_z, \
        marginals

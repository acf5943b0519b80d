"""
The ``linkchain`` command.

Subcommands::

    linkchain train TREEBANK -o MODEL [--split 0.9]
    linkchain parse MODEL INPUT [--trace FILE] [--marginals]
    linkchain eval GOLD --model MODEL
    linkchain eval GOLD --baseline adjacent|random
    linkchain eval GOLD --pred FILE
    linkchain layers TREEBANK
    linkchain generate [--seed 42] [--count 2000]
    linkchain stats TREEBANK

Data is written to standard output, summaries and log messages to
standard error. The exit status is 0 on success, 1 for a usage or
configuration error and 2 for a data error.

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

import argparse
import json
import logging
import pathlib
import sys
from collections import Counter

import numpy

from . import corpus
from . import evaluation
from . import model as lcmodel
from . import oracle
from . import parser as lcparser
from . import synthetic

VOCAB_SIZE = 2500
"""
The default number of in-vocabulary word forms.
"""
DECODE_VITERBI = 'viterbi'
DECODE_POSTERIOR = 'posterior'
DECODE_MODES = (DECODE_VITERBI, DECODE_POSTERIOR)
"""
With ``posterior`` the parser still labels with Viterbi, but the per-pass
marginals are also written to standard error.
"""
BASELINE_ADJACENT = 'adjacent'
BASELINE_RANDOM = 'random'
SEED = 42
"""
The default seed for splits, the random baseline and the generator.
"""
GENERATE_COUNT = 2000
"""
The default number of sentences written by ``linkchain generate``.
"""
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class ConfigError(Exception):
    pass


class DataError(Exception):
    """Raised when the input holds nothing usable."""
    pass


class Config:
    """
    Settings shared by the subcommands.

    Parameters
    ----------
    vocab_size : int
    alpha : float
    max_len : int
    punct_tags : iterable of str
    decode : str
        One of :data:`DECODE_MODES`.
    seed : int
    random_samples : int
    split : float or None
        The training fraction for ``train --split``.
    concurrent : bool

    """
    def __init__(self, vocab_size=VOCAB_SIZE, alpha=lcmodel.ALPHA,
            max_len=corpus.MAX_LEN, punct_tags=corpus.PUNCT_TAGS,
            decode=DECODE_VITERBI, seed=SEED,
            random_samples=evaluation.RANDOM_SAMPLES, split=None,
            concurrent=False):
        """Constructor."""
        self.vocab_size = vocab_size
        self.alpha = alpha
        self.max_len = max_len
        self.punct_tags = frozenset(punct_tags)
        self.decode = decode
        self.seed = seed
        self.random_samples = random_samples
        self.split = split
        self.concurrent = concurrent

    @classmethod
    def from_args(cls, args):
        """
        Build a validated config from an :mod:`argparse` namespace. Options
        a subcommand does not define keep their defaults.

        """
        defaults = cls()
        kwargs = {name: getattr(args, name, getattr(defaults, name))
                  for name in vars(defaults)}
        punct = getattr(args, 'punct_tags', None)
        if isinstance(punct, str):
            kwargs['punct_tags'] = punct.split()
        config = cls(**kwargs)
        config.validate()
        return config

    def validate(self):
        """Raise :exc:`ConfigError` if any setting is out of range."""
        if self.vocab_size < 1:
            raise ConfigError("ERROR: the vocabulary size must be at least 1")
        if self.alpha < 0:
            raise ConfigError("ERROR: alpha must not be negative")
        if self.max_len < 1:
            raise ConfigError("ERROR: the maximum length must be at least 1")
        if self.random_samples < 1:
            raise ConfigError(
                "ERROR: the number of random samples must be at least 1")
        if self.split is not None and not 0 < self.split < 1:
            raise ConfigError("ERROR: the split must be between 0 and 1")
        if self.decode not in DECODE_MODES:
            raise ConfigError(f"ERROR: unknown decode mode {self.decode!r}")


class _ArgumentParser(argparse.ArgumentParser):
    """Exits with status 1 on usage errors."""
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def get_cmdargs(argv=None):
    """
    Get the command line arguments.

    """
    parser = _ArgumentParser(
        prog='linkchain',
        description="Train, run and evaluate a link-chain dependency parser.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument(
        "--verbose", "-v", action='count', default=0,
        help="-v for warnings, -vv for information, -vvv for debugging.")
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_filter_opts(sub):
        sub.add_argument("--max-len", dest='max_len', type=int,
            default=corpus.MAX_LEN,
            help="Drop longer sentences, after removing punctuation.")
        sub.add_argument("--punct-tags", dest='punct_tags',
            default=' '.join(sorted(corpus.PUNCT_TAGS)),
            help="Space-separated tags of the tokens to remove.")

    train = subparsers.add_parser('train', help="Train a model.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    train.add_argument("treebank", help="The training treebank.")
    train.add_argument("-o", "--output", required=True,
        help="The model file to write.")
    train.add_argument("--vocab-size", dest='vocab_size', type=int,
        default=VOCAB_SIZE, help="The number of word forms to keep.")
    train.add_argument("--alpha", type=float, default=lcmodel.ALPHA,
        help="Additive smoothing mass.")
    train.add_argument("--split", type=float, default=None,
        help=("Train on this fraction of the sentences and write the "
              "training and testing sections next to the model."))
    train.add_argument("--seed", type=int, default=SEED,
        help="Seeds the split.")
    train.add_argument("--concurrent", action='store_true',
        help="Count in concurrent threads.")
    add_filter_opts(train)

    parse = subparsers.add_parser('parse', help="Parse sentences.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parse.add_argument("model", help="A model written by train.")
    parse.add_argument("input", help="A treebank; the HEAD column may be _.")
    parse.add_argument("--trace", default=None,
        help="Write every labelled layer to this file.")
    parse.add_argument("--marginals", action='store_true',
        help="Write each pass's label marginals to standard error.")
    parse.add_argument("--decode", choices=DECODE_MODES,
        default=DECODE_VITERBI,
        help=f"{DECODE_POSTERIOR} also writes the marginals.")
    parse.add_argument("--concurrent", action='store_true',
        help="Parse in concurrent threads.")

    evalp = subparsers.add_parser('eval', help="Score a parser.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    evalp.add_argument("gold", help="The gold treebank.")
    source = evalp.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", default=None,
        help="Parse the gold sentences with this model.")
    source.add_argument("--baseline",
        choices=[BASELINE_ADJACENT, BASELINE_RANDOM], default=None,
        help="Score a baseline parser instead.")
    source.add_argument("--pred", default=None,
        help=("Score this treebank of predicted heads. Neither file is "
              "filtered."))
    evalp.add_argument("--json", action='store_true',
        help="Write the report as JSON.")
    evalp.add_argument("--seed", type=int, default=SEED,
        help="Seeds the random baseline.")
    evalp.add_argument("--random-samples", dest='random_samples', type=int,
        default=evaluation.RANDOM_SAMPLES,
        help="Random trees per sentence for the random baseline.")
    evalp.add_argument("--concurrent", action='store_true',
        help="Parse in concurrent threads.")
    add_filter_opts(evalp)

    layers = subparsers.add_parser('layers',
        help="Write the gold layers of a treebank.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    layers.add_argument("treebank")
    add_filter_opts(layers)

    generate = subparsers.add_parser('generate',
        help="Write a synthetic treebank.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    generate.add_argument("--seed", type=int, default=SEED)
    generate.add_argument("--count", type=int, default=GENERATE_COUNT)

    stats = subparsers.add_parser('stats', help="Describe a treebank.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    stats.add_argument("treebank")
    stats.add_argument("--vocab-size", dest='vocab_size', type=int,
        default=VOCAB_SIZE)
    add_filter_opts(stats)

    args = parser.parse_args(argv)
    # -v=warnings, -vv=informational, -vvv=debug
    levels = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO,
              3: logging.DEBUG}
    logging.basicConfig(
        level=levels[min(args.verbose, 3)],
        stream=sys.stderr)
    return args


def read_treebank(path, require_heads=True):
    """Read a treebank file, which must be UTF-8."""
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            return corpus.read_corpus(fh, require_heads=require_heads)
    except UnicodeDecodeError as err:
        raise corpus.CorpusError(
            f"ERROR: {path} is not valid UTF-8 ({err.reason})") from None


def read_filtered(path, config):
    """Read and filter a treebank, raising DataError if nothing is kept."""
    kept, stats = corpus.filter_corpus(
        read_treebank(path), punct_tags=config.punct_tags,
        max_len=config.max_len)
    if not kept:
        raise DataError(f"ERROR: zero usable sentences in {path} ({stats})")
    return kept, stats


def split_corpus(sentences, fraction, seed):
    """
    Shuffle and split sentences into training and testing sections.

    Both sections are non-empty; the training section holds
    ``round(fraction * n)`` sentences where that allows.

    """
    if len(sentences) < 2:
        raise DataError("ERROR: at least 2 sentences are needed to split")
    order = numpy.random.default_rng(seed).permutation(len(sentences))
    n_train = min(max(int(round(fraction * len(sentences))), 1),
                  len(sentences) - 1)
    train = [sentences[idx] for idx in sorted(order[:n_train])]
    test = [sentences[idx] for idx in sorted(order[n_train:])]
    return train, test


def gold_layers(sentences):
    """Derive the layers of every sentence; return them and the skip count."""
    layers = []
    n_skipped = 0
    for sent in sentences:
        try:
            layers.extend(oracle.derive_layers(sent))
        except oracle.OracleError as err:
            n_skipped += 1
            logging.warning("Skipping a sentence: %s", err)
    return layers, n_skipped


def cmd_train(args, config):
    """Train a model and write it."""
    sentences, stats = read_filtered(args.treebank, config)
    if config.split is not None:
        sentences, test = split_corpus(sentences, config.split, config.seed)
        out = pathlib.Path(args.output)
        for suffix, section in (('.train', sentences), ('.test', test)):
            path = out.with_suffix(suffix)
            with open(path, 'w', encoding='utf-8') as fh:
                corpus.write_corpus(section, fh)
            logging.info("Wrote %i sentences to %s", len(section), path)
    vocab = corpus.build_vocab(sentences, size=config.vocab_size)
    layers, n_skipped = gold_layers(sentences)
    if not layers:
        raise DataError("ERROR: zero usable sentences for training")
    model = lcmodel.train(vocab, layers, alpha=config.alpha,
        concurrent=config.concurrent)
    lcmodel.save(model, args.output)
    sizes = ' '.join(f"{name}={rows}x{cols}:{nonzero}"
                     for name, (rows, cols, nonzero)
                     in model.table_sizes().items())
    print(f"sentences used={len(sentences) - n_skipped} "
          f"rejected={stats.n_rejected + n_skipped} layers={len(layers)} "
          f"tables {sizes}", file=sys.stderr)


def write_marginals(results, stream):
    """Write per-pass label marginals as tab-separated text."""
    stream.write("sentence\tpass\tposition\tindex\tLEFT\tRIGHT\tNONE\n")
    for num, res in enumerate(results, start=1):
        for pass_num, (layer, marg) in enumerate(
                zip(res.layers, res.marginals), start=1):
            if marg is None:
                continue
            for pos, (tok, row) in enumerate(zip(layer, marg), start=1):
                values = '\t'.join(f"{value:.6f}" for value in row)
                stream.write(f"{num}\t{pass_num}\t{pos}\t{tok.orig_index}\t"
                             f"{values}\n")


def cmd_parse(args, config):
    """Parse a file and write the predicted treebank."""
    model = lcmodel.load(args.model)
    sentences = read_treebank(args.input, require_heads=False)
    if not sentences:
        raise DataError(f"ERROR: no sentences in {args.input}")
    with_marginals = args.marginals or config.decode == DECODE_POSTERIOR
    results = lcparser.parse_corpus(model, sentences,
        concurrent=config.concurrent, with_marginals=with_marginals)
    corpus.write_corpus(sentences, sys.stdout,
        heads=[res.tree.heads for res in results])
    if args.trace is not None:
        with open(args.trace, 'w', encoding='utf-8') as fh:
            for num, res in enumerate(results, start=1):
                oracle.dump_layers(res.layers, fh, header=f"sentence {num}")
    if with_marginals:
        write_marginals(results, sys.stderr)
    n_fallback = sum(res.fallback_count for res in results)
    print(f"sentences parsed={len(results)} fallbacks={n_fallback}",
          file=sys.stderr)


def cmd_eval(args, config):
    """Score a model, a baseline or a predicted treebank."""
    vocab = None
    if args.pred is not None:
        gold = read_treebank(args.gold)
        pred = read_treebank(args.pred)
        if len(pred) != len(gold):
            raise DataError(
                f"ERROR: {len(pred)} predicted and {len(gold)} gold sentences")
        tallies = [evaluation.score(p.tree, g.tree)
                   for p, g in zip(pred, gold)]
    else:
        gold, _ = read_filtered(args.gold, config)
        if args.model is not None:
            model = lcmodel.load(args.model)
            vocab = model.vocab
            results = lcparser.parse_corpus(model, gold,
                concurrent=config.concurrent)
            preds = [res.tree for res in results]
        elif args.baseline == BASELINE_ADJACENT:
            preds = [evaluation.baseline_adjacent(sent) for sent in gold]
        else:
            preds = None
        if preds is None:
            tallies = evaluation.random_baseline_tallies(
                gold, samples=config.random_samples, seed=config.seed)
        else:
            tallies = [
                evaluation.score(p, sent.tree,
                    vocab.oov_mask(sent) if vocab is not None else None)
                for p, sent in zip(preds, gold)]
    report = evaluation.aggregate(tallies)
    if args.json:
        sys.stdout.write(json.dumps(report.to_dict(), indent=2) + '\n')
    else:
        sys.stdout.write(report.format())
    print(f"sentences evaluated={len(gold)} directed={report.directed:.4f} "
          f"undirected={report.undirected:.4f}", file=sys.stderr)


def cmd_layers(args, config):
    """Write the gold layers of every usable sentence."""
    sentences, _ = read_filtered(args.treebank, config)
    for num, sent in enumerate(sentences, start=1):
        try:
            layers = oracle.derive_layers(sent)
        except oracle.OracleError as err:
            logging.warning("Skipping sentence %i: %s", num, err)
            continue
        oracle.dump_layers(layers, sys.stdout, header=f"sentence {num}")


def cmd_generate(args, config):
    """Write a synthetic treebank."""
    try:
        pairs = synthetic.generate(seed=config.seed, count=args.count)
    except synthetic.SyntheticError as err:
        raise ConfigError(str(err)) from None
    corpus.write_corpus([sent for sent, _ in pairs], sys.stdout)
    print(f"sentences generated={len(pairs)}", file=sys.stderr)


def cmd_stats(args, config):
    """Describe a treebank and what the filter keeps of it."""
    sentences = read_treebank(args.treebank)
    kept, stats = corpus.filter_corpus(
        sentences, punct_tags=config.punct_tags, max_len=config.max_len)
    rows = [('read', stats.read), ('kept', stats.kept),
            ('rejected', stats.n_rejected)]
    rows.extend((f"rejected_{reason}", count)
                for reason, count in sorted(stats.rejected.items()))
    n_tokens = sum(len(sent) for sent in kept)
    rows.append(('tokens', n_tokens))
    mean_len = n_tokens / len(kept) if kept else 0.0
    rows.append(('mean_length', f"{mean_len:.2f}"))
    if kept:
        vocab = corpus.build_vocab(kept, size=config.vocab_size)
        rows.append(('word_types', len(vocab.words)))
        rows.append(('tag_types', len(vocab.tags)))
    passes = Counter()
    for sent in kept:
        passes[len(oracle.derive_layers(sent)) - 1] += 1
    rows.extend((f"passes_{num}", count) for num, count in sorted(
        passes.items()))
    for name, value in rows:
        sys.stdout.write(f"{name}\t{value}\n")


COMMANDS = {
    'train': cmd_train,
    'parse': cmd_parse,
    'eval': cmd_eval,
    'layers': cmd_layers,
    'generate': cmd_generate,
    'stats': cmd_stats,
}


def main(argv=None):
    """
    Console entry point configured in pyproject.toml.

    Returns
    -------
    int
        The exit status.

    """
    try:
        args = get_cmdargs(argv)
    except SystemExit as err:
        return err.code
    try:
        config = Config.from_args(args)
        COMMANDS[args.command](args, config)
    except ConfigError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, corpus.CorpusError, lcmodel.ModelError,
            evaluation.EvaluationError, OSError) as err:
        print(err, file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK

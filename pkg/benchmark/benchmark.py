#!/usr/bin/env python

"""
Benchmark or profile training and parsing.

Fixed properties:

- data: sentences from :func:`linkchain.synthetic.generate`
- the first 90% of the sentences are trained on, the rest are parsed

Benchmark mode::

    > python3 -m benchmark.benchmark --mode benchmark --repeat 3 \
        --count 5000

Profiling mode, to create the file linkchain.profile with profiling
information::

    > python3 -m benchmark.benchmark --mode profile \
        --pstats linkchain.profile --count 5000

To read the profile information, in linkchain.profile, use the pstats
profiler either from within python
https://docs.python.org/3/library/profile.html#instant-user-s-manual
or the stats browser
https://www.stefaanlippens.net/python_profiling_with_pstats_interactive_mode/

"""

import argparse
import timeit
import cProfile
import logging
import sys

from linkchain import corpus
from linkchain import model
from linkchain import oracle
from linkchain import parser
from linkchain import synthetic

MODE_PROFILE = 'profile'
MODE_BENCHMARK = 'benchmark'


def get_cmdargs():
    """
    Get the command line arguments.

    """
    argparser = argparse.ArgumentParser(
        description="Benchmark or profile training and parsing.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    # Benchmark and profiling options.
    argparser.add_argument(
        "--mode", default=MODE_BENCHMARK,
        choices=[MODE_BENCHMARK, MODE_PROFILE],
        help='Run in one of these modes.')
    argparser.add_argument("--repeat", default=1, type=int,
        help=("Run the test this many times. Only relevant for " +
              f"{MODE_BENCHMARK} mode."))
    argparser.add_argument("--pstats", default=None,
        help=("The output profile stats file, which is readable by the " +
              f"pstats module. Only relevant for {MODE_PROFILE} mode. " +
              "The default is to print to standard output."))
    # Data options.
    argparser.add_argument(
        "--count", default=2000, type=int,
        help="The number of synthetic sentences to generate.")
    argparser.add_argument(
        "--seed", default=42, type=int,
        help="Seeds the generator.")
    argparser.add_argument(
        "--concurrent", action="store_true",
        help="Train and parse in concurrent threads")
    argparser.add_argument(
        "--verbose", "-v", action='count', default=0)
    args = argparser.parse_args()
    # Configure log level based on verbosity.
    # -v=warnings, -vv=informational, -vvv=debug
    levels = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO,
              3: logging.DEBUG}
    logging.basicConfig(
        level=levels[min(args.verbose, 3)],
        stream=sys.stdout)
    return args


def run_train_parse():
    """Train on the synthetic sentences and parse the held-out ones."""
    pairs = synthetic.generate(seed=bm_cmdargs.seed, count=bm_cmdargs.count)
    sentences = [sent for sent, _ in pairs]
    n_train = max(int(len(sentences) * 0.9), 1)
    train, test = sentences[:n_train], sentences[n_train:] or sentences[:1]
    vocab = corpus.build_vocab(train)
    layers = [layer for sent in train for layer in oracle.derive_layers(sent)]
    trained = model.train(vocab, layers, concurrent=bm_cmdargs.concurrent)
    results = parser.parse_corpus(trained, test,
        concurrent=bm_cmdargs.concurrent)
    print(f"Trained on {len(train)} sentences ({len(layers)} layers), "
          f"parsed {len(results)}.")


def run_benchmark():
    """Run in the mode given on the command line."""
    if bm_cmdargs.mode == MODE_BENCHMARK:
        duration = timeit.repeat(run_train_parse, repeat=bm_cmdargs.repeat,
                                 number=1)
        print(f"Executed train and parse {bm_cmdargs.repeat} times " +
              f"with results: {duration} seconds.")
    else:
        cProfile.run('run_train_parse()', bm_cmdargs.pstats)
        print(f"Wrote profile stats to {bm_cmdargs.pstats}.")


if __name__ == '__main__':
    bm_cmdargs = get_cmdargs()  # available in global namespace.
    run_benchmark()

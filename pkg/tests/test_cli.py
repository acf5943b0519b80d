"""Tests for cli.py"""

import json

import pytest

from linkchain import cli
from linkchain import corpus
from linkchain import evaluation
from linkchain import model
from .fixtures import KING_TEXT, KING_HEADS

PUNCT_TEXT = "1\tThe\tDT\t2\n2\tking\tNN\t3\n3\tslept\tVBD\t0\n4\t.\t.\t3\n"
"""A sentence ending in a full stop."""
LONG_TEXT = ''.join(f"{idx}\tw{idx}\tNN\t{idx + 1}\n" for idx in range(1, 12)
                    ) + "12\tw12\tVBD\t0\n"
"""A chain of 12 tokens, too long to keep."""


def write_file(tmp_path, name, *sentences):
    path = tmp_path / name
    path.write_text('\n'.join(sentences) + '\n', encoding='utf-8')
    return str(path)


@pytest.fixture
def synthetic_file(tmp_path, capsys):
    """A synthetic treebank written by the generate subcommand."""
    assert cli.main(['generate', '--seed', '5', '--count', '300']) == 0
    path = tmp_path / 'synthetic.tb'
    path.write_text(capsys.readouterr().out, encoding='utf-8')
    return str(path)


@pytest.fixture
def synthetic_model_file(tmp_path, synthetic_file, capsys):
    out = str(tmp_path / 'synthetic.model')
    assert cli.main(['train', synthetic_file, '-o', out]) == 0
    capsys.readouterr()
    return out


def test_generate(capsys):
    assert cli.main(['generate', '--seed', '3', '--count', '20']) == 0
    captured = capsys.readouterr()
    sentences = corpus.read_corpus(captured.out.splitlines(True))
    assert len(sentences) == 20
    assert all(corpus.validate_tree(sent.tree.heads) is None
               for sent in sentences)
    assert "sentences generated=20" in captured.err
    # Same seed, same output.
    assert cli.main(['generate', '--seed', '3', '--count', '20']) == 0
    assert capsys.readouterr().out == captured.out


def test_generate_bad_count(capsys):
    assert cli.main(['generate', '--count', '0']) == cli.EXIT_USAGE
    assert "ERROR" in capsys.readouterr().err


def test_train(tmp_path, synthetic_file, capsys):
    out = tmp_path / 'out.model'
    assert cli.main(['train', synthetic_file, '-o', str(out)]) == 0
    captured = capsys.readouterr()
    assert "sentences used=300 rejected=0" in captured.err
    assert "transition=4x3" in captured.err
    loaded = model.load(out)
    assert loaded.alpha == model.ALPHA


def test_train_split(tmp_path, synthetic_file, capsys):
    out = tmp_path / 'split.model'
    assert cli.main(['train', synthetic_file, '-o', str(out),
                     '--split', '0.8', '--seed', '1']) == 0
    assert "sentences used=240" in capsys.readouterr().err
    with open(tmp_path / 'split.train', encoding='utf-8') as fh:
        train = corpus.read_corpus(fh)
    with open(tmp_path / 'split.test', encoding='utf-8') as fh:
        test = corpus.read_corpus(fh)
    assert len(train) == 240
    assert len(test) == 60


def test_train_zero_usable(tmp_path, capsys):
    treebank = write_file(tmp_path, 'long.tb', LONG_TEXT)
    out = str(tmp_path / 'none.model')
    assert cli.main(['train', treebank, '-o', out]) == cli.EXIT_DATA
    assert "zero usable sentences" in capsys.readouterr().err


def test_train_bad_config(tmp_path, capsys):
    treebank = write_file(tmp_path, 'king.tb', KING_TEXT)
    out = str(tmp_path / 'king.model')
    assert cli.main(['train', treebank, '-o', out, '--alpha', '-1']) == \
        cli.EXIT_USAGE
    assert cli.main(['train', treebank, '-o', out, '--split', '1.5']) == \
        cli.EXIT_USAGE
    assert cli.main(['train', treebank, '-o', out, '--vocab-size', '0']) == \
        cli.EXIT_USAGE


def test_usage_errors(capsys):
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(['bogus']) == cli.EXIT_USAGE
    assert cli.main(['train']) == cli.EXIT_USAGE
    assert cli.main(['eval', 'gold.tb']) == cli.EXIT_USAGE
    assert cli.main(['eval', 'gold.tb', '--baseline', 'left']) == \
        cli.EXIT_USAGE


def test_missing_file(tmp_path, capsys):
    missing = str(tmp_path / 'missing.tb')
    assert cli.main(['stats', missing]) == cli.EXIT_DATA
    assert cli.main(['layers', missing]) == cli.EXIT_DATA


def test_malformed_file(tmp_path, capsys):
    treebank = write_file(tmp_path, 'bad.tb', "1\tThe\tDT\n")
    assert cli.main(['stats', treebank]) == cli.EXIT_DATA


def test_invalid_utf8(tmp_path, capsys):
    """Bytes that do not decode are a data error, not a crash."""
    treebank = tmp_path / 'latin1.tb'
    treebank.write_bytes(b"1\tk\xffng\tNN\t0\n")
    for args in (['stats', str(treebank)], ['layers', str(treebank)],
                 ['eval', str(treebank), '--baseline', 'adjacent']):
        assert cli.main(args) == cli.EXIT_DATA
        assert "not valid UTF-8" in capsys.readouterr().err
    good = write_file(tmp_path, 'king.tb', KING_TEXT)
    assert cli.main(['parse', str(treebank), good]) == cli.EXIT_DATA
    assert "not valid UTF-8" in capsys.readouterr().err


def test_parse(tmp_path, synthetic_model_file, capsys):
    """Parse a file whose HEAD column is empty."""
    unheaded = KING_TEXT.replace('\t0\n', '\t_\n')
    for head in set(KING_HEADS) - {0}:
        unheaded = unheaded.replace(f"\t{head}\n", "\t_\n")
    infile = write_file(tmp_path, 'king.in', unheaded)
    trace = tmp_path / 'king.trace'
    assert cli.main(['parse', synthetic_model_file, infile,
                     '--trace', str(trace)]) == 0
    captured = capsys.readouterr()
    parsed = corpus.read_corpus(captured.out.splitlines(True))
    assert len(parsed) == 1
    assert parsed[0].forms == ['The', 'king', 'of', 'Prussia', 'bought', 'a',
                               'camel']
    assert corpus.validate_tree(parsed[0].tree.heads) is None
    assert "sentences parsed=1 fallbacks=0" in captured.err
    text = trace.read_text(encoding='utf-8')
    assert text.startswith("# sentence 1 layer 1\n")
    assert text.count("# sentence 1 layer") >= 2


def test_parse_marginals(tmp_path, synthetic_model_file, capsys):
    infile = write_file(tmp_path, 'king.tb', KING_TEXT)
    assert cli.main(['parse', synthetic_model_file, infile,
                     '--marginals']) == 0
    lines = capsys.readouterr().err.splitlines()
    header = "sentence\tpass\tposition\tindex\tLEFT\tRIGHT\tNONE"
    assert header in lines
    rows = [line.split('\t') for line in lines[lines.index(header) + 1:]
            if line.startswith('1\t')]
    # The first pass has a row for each of the seven tokens.
    assert len([row for row in rows if row[1] == '1']) == 7
    for row in rows:
        assert sum(float(value) for value in row[4:]) == \
            pytest.approx(1.0, abs=1e-5)


def test_parse_deterministic(tmp_path, synthetic_file, capsys):
    """Training and parsing twice gives identical output."""
    outputs = []
    for num in range(2):
        out = str(tmp_path / f"run{num}.model")
        assert cli.main(['train', synthetic_file, '-o', out]) == 0
        capsys.readouterr()
        assert cli.main(['parse', out, synthetic_file]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    models = [(tmp_path / f"run{num}.model").read_text(encoding='utf-8')
              for num in range(2)]
    assert models[0] == models[1]


def test_parse_missing_model(tmp_path, capsys):
    infile = write_file(tmp_path, 'king.tb', KING_TEXT)
    assert cli.main(['parse', str(tmp_path / 'none.model'), infile]) == \
        cli.EXIT_DATA


def test_eval_pred_identity(tmp_path, capsys):
    gold = write_file(tmp_path, 'king.tb', KING_TEXT)
    assert cli.main(['eval', gold, '--pred', gold, '--json']) == 0
    report = json.loads(capsys.readouterr().out)
    for name in evaluation.METRIC_NAMES:
        assert report[name] == 1.0
    assert report['oov_tokens'] == 0
    # The table form prints the same rows.
    assert cli.main(['eval', gold, '--pred', gold]) == 0
    rows = dict(line.split('\t')
                for line in capsys.readouterr().out.splitlines())
    for name in evaluation.METRIC_NAMES:
        assert rows[name] == "1.0000"
    assert report['tokens'] == 7
    assert report['sentences'] == 1


def test_eval_pred_mismatch(tmp_path, capsys):
    gold = write_file(tmp_path, 'gold.tb', KING_TEXT, PUNCT_TEXT)
    pred = write_file(tmp_path, 'pred.tb', KING_TEXT)
    assert cli.main(['eval', gold, '--pred', pred]) == cli.EXIT_DATA


def test_eval_adjacent(tmp_path, capsys):
    gold = write_file(tmp_path, 'king.tb', KING_TEXT)
    assert cli.main(['eval', gold, '--baseline', 'adjacent']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "directed\t0.2857"
    assert lines[1] == "undirected\t0.5714"


def test_eval_random(tmp_path, capsys):
    gold = write_file(tmp_path, 'king.tb', KING_TEXT, PUNCT_TEXT)
    args = ['eval', gold, '--baseline', 'random', '--seed', '9',
            '--random-samples', '5', '--json']
    assert cli.main(args) == 0
    first = json.loads(capsys.readouterr().out)
    assert first['sentences'] == 10
    assert first['tokens'] == 5 * (7 + 3)
    assert 0.0 <= first['directed'] <= first['undirected'] <= 1.0
    assert cli.main(args) == 0
    assert json.loads(capsys.readouterr().out) == first
    assert cli.main(['eval', gold, '--baseline', 'random',
                     '--random-samples', '0']) == cli.EXIT_USAGE


def test_eval_model(tmp_path, synthetic_file, capsys):
    """The model beats the adjacent baseline on its own grammar."""
    out = str(tmp_path / 'split.model')
    assert cli.main(['train', synthetic_file, '-o', out,
                     '--split', '0.8']) == 0
    test = str(tmp_path / 'split.test')
    capsys.readouterr()
    assert cli.main(['eval', test, '--model', out, '--json']) == 0
    parsed = json.loads(capsys.readouterr().out)
    assert cli.main(['eval', test, '--baseline', 'adjacent', '--json']) == 0
    adjacent = json.loads(capsys.readouterr().out)
    assert parsed['sentences'] == adjacent['sentences'] == 60
    assert parsed['directed'] > adjacent['directed']
    assert parsed['oov_tokens'] + parsed['in_vocab_tokens'] == \
        parsed['tokens']


def test_eval_filters_gold(tmp_path, capsys):
    """Long sentences are dropped and punctuation removed."""
    gold = write_file(tmp_path, 'mixed.tb', KING_TEXT, PUNCT_TEXT, LONG_TEXT)
    assert cli.main(['eval', gold, '--baseline', 'adjacent', '--json']) == 0
    report = json.loads(capsys.readouterr().out)
    assert report['sentences'] == 2
    assert report['tokens'] == 10


def test_layers(tmp_path, capsys):
    treebank = write_file(tmp_path, 'king.tb', KING_TEXT)
    assert cli.main(['layers', treebank]) == 0
    out = capsys.readouterr().out
    assert out.count("# sentence 1 layer") == 4
    blocks = out.strip('\n').split('\n\n')
    assert len(blocks) == 4
    first = blocks[0].splitlines()
    assert first[0] == "# sentence 1 layer 1"
    assert first[1].split('\t')[:3] == ['1', 'The', 'DT']
    assert first[1].split('\t')[-1] == 'RIGHT'
    assert blocks[-1].splitlines()[1].split('\t')[:2] == ['5', 'bought']


def test_stats(tmp_path, capsys):
    treebank = write_file(tmp_path, 'mixed.tb', KING_TEXT, PUNCT_TEXT,
                          LONG_TEXT)
    assert cli.main(['stats', treebank]) == 0
    rows = dict(line.split('\t')
                for line in capsys.readouterr().out.splitlines())
    assert rows['read'] == '3'
    assert rows['kept'] == '2'
    assert rows['rejected'] == '1'
    assert rows['rejected_too_long'] == '1'
    assert rows['tokens'] == '10'
    assert rows['mean_length'] == '5.00'
    # The king needs 3 passes; "The king slept" needs 2.
    assert rows['passes_3'] == '1'
    assert rows['passes_2'] == '1'


def test_stats_punct_tags(tmp_path, capsys):
    """With no punctuation tags the full stop is kept."""
    treebank = write_file(tmp_path, 'punct.tb', PUNCT_TEXT)
    assert cli.main(['stats', treebank, '--punct-tags', '']) == 0
    rows = dict(line.split('\t')
                for line in capsys.readouterr().out.splitlines())
    assert rows['tokens'] == '4'


def test_config_from_args():
    args = cli.get_cmdargs(['stats', 'x.tb', '--max-len', '5',
                            '--punct-tags', ', .'])
    config = cli.Config.from_args(args)
    assert config.max_len == 5
    assert config.punct_tags == frozenset([',', '.'])
    assert config.vocab_size == cli.VOCAB_SIZE
    assert config.split is None
    with pytest.raises(cli.ConfigError):
        cli.Config(decode='beam').validate()


def test_split_corpus():
    sentences = list(range(10))
    train, test = cli.split_corpus(sentences, 0.9, seed=4)
    assert len(train) == 9
    assert len(test) == 1
    assert sorted(train + test) == sentences
    assert train == sorted(train)
    # Both sections are always non-empty.
    train, test = cli.split_corpus(sentences, 0.01, seed=4)
    assert (len(train), len(test)) == (1, 9)
    with pytest.raises(cli.DataError):
        cli.split_corpus([1], 0.5, seed=4)

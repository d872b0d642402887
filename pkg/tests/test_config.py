import pytest

from patrank.config import RunConfig, dump_config, parse_config_file
from patrank.errors import ConfigError, ParseError


def test_parse_simple_keys(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nk = 20\nseed=7\n\nalphas = 0.5,0.9\n")
    values = parse_config_file(cfg)
    assert values == {"k": "20", "seed": "7", "alphas": "0.5,0.9"}


def test_parse_include_relative(tmp_path):
    (tmp_path / "base.cfg").write_text("k = 5\nseed = 1\n")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("include base.cfg\nseed = 2\n")
    values = parse_config_file(cfg)
    assert values == {"k": "5", "seed": "2"}  # later assignment wins


def test_parse_include_cycle_detected(tmp_path):
    (tmp_path / "a.cfg").write_text("include b.cfg\n")
    (tmp_path / "b.cfg").write_text("include a.cfg\n")
    with pytest.raises(ConfigError, match="cycle"):
        parse_config_file(tmp_path / "a.cfg")


def test_parse_rejects_bare_line(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("justakey\n")
    with pytest.raises(ParseError, match="line 1"):
        parse_config_file(cfg)


def test_dump_contains_defaults_and_is_sorted():
    out = dump_config()
    lines = out.strip().splitlines()
    assert lines == sorted(lines)
    assert "k = 10" in lines
    assert "bootstrap_B = 10000" in lines


def test_typed_accessors(tmp_path):
    cfg = RunConfig({"k": "3", "alphas": "0.1,0.9", "k_rrfs": "10,60"})
    assert cfg.get_int("k") == 3
    assert cfg.get_floats("alphas") == [0.1, 0.9]
    assert cfg.get_ints("k_rrfs") == [10, 60]
    assert cfg.get_int("depth") == 1000  # default
    with pytest.raises(ConfigError):
        RunConfig({"k": "nope"}).get_int("k")


def test_validate_checks_bounds_and_paths(tmp_path):
    with pytest.raises(ConfigError, match="k must"):
        RunConfig({"k": "0"}).validate()
    with pytest.raises(ConfigError, match="bootstrap_B"):
        RunConfig({"bootstrap_B": "10"}).validate()
    with pytest.raises(ConfigError, match="does not exist"):
        RunConfig({"corpus": str(tmp_path / "missing.jsonl")}).validate()


def test_embedding_path_errors_name_the_cell(tmp_path):
    cfg = RunConfig({})
    with pytest.raises(ConfigError, match=r"corpus='TAC'.*system='llama'"):
        cfg.embedding_path("llama", "corpus", "TAC")
    cfg2 = RunConfig({"emb.llama.corpus.TAC": str(tmp_path / "gone.emb1")})
    with pytest.raises(ConfigError, match="does not exist"):
        cfg2.embedding_path("llama", "corpus", "TAC")

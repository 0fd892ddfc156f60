import pytest

from rbmreweight.config import ConfigError, ExperimentSpec, parse_config, parse_config_text, parse_count


def test_minimal_file_gets_defaults(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("state = ghz:3\n")
    spec = parse_config(path)
    assert spec.state == "ghz:3"
    assert spec == ExperimentSpec(state="ghz:3")
    assert spec.schedule[-1] == 10 ** 7 and spec.repeats == 5 and spec.burn_in == 1000


def test_schedule_three_points():
    spec = parse_config_text("schedule = 1e2,1e4,1e6")
    assert spec.schedule == (100, 10_000, 1_000_000)


def test_full_file():
    text = """
    # GHZ run
    experiment = convergence
    state = ghz:5
    observables = XXXXX, Z1Z2   # two observables
    schedule = 1e3 1e4
    repeats = 3
    seed = 42
    out = out.csv
    translation-invariant = no
    quadrature = yes
    """
    spec = parse_config_text(text)
    assert spec.observables == ("XXXXX", "Z1Z2")
    assert spec.seed == 42 and spec.repeats == 3
    assert spec.translation_invariant is False and spec.quadrature is True


def test_negative_repeats_rejected():
    with pytest.raises(ConfigError, match=r"<config>:2: repeats must be >= 1"):
        parse_config_text("state = bell-imag\nrepeats = -1\n")


def test_unknown_key_has_line():
    with pytest.raises(ConfigError, match=r"x.cfg:3: unknown key 'sampels'"):
        parse_config_text("state = ghz:3\n\nsampels = 10\n", "x.cfg")


def test_duplicate_key():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("seed = 1\nseed = 2\n")


def test_malformed_lines():
    with pytest.raises(ConfigError, match=":1: expected"):
        parse_config_text("just words")
    with pytest.raises(ConfigError, match=":1: bad value for repeats"):
        parse_config_text("repeats = many")
    with pytest.raises(ConfigError, match=":1: bad value for schedule"):
        parse_config_text("schedule = 1.5e0")


@pytest.mark.parametrize("text", ["schedule = 1e4,1e3", "schedule = 10,10", "experiment = fit",
                                  "experiment = size-scaling", "sizes = 1,2", "chains = 0",
                                  "seed = -3", "observables = ,"])
def test_validation_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_parse_count():
    assert parse_count("1e6") == 1_000_000
    assert parse_count("250") == 250
    with pytest.raises(ValueError):
        parse_count("1e-1")


def test_updated_ignores_none():
    spec = ExperimentSpec()
    assert spec.updated(seed=None, repeats=2).repeats == 2
    assert spec.updated(seed=None).seed == 0
    with pytest.raises(ConfigError):
        spec.updated(repeats=0)

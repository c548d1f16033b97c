import pytest

from nuhyp.config import DEFAULTS, load_config
from nuhyp.errors import ParameterError


def test_defaults_validate_and_are_not_mutated():
    cfg = load_config()
    cfg["catmap"]["q_max"] = 1
    assert DEFAULTS["catmap"]["q_max"] == 30
    assert load_config()["figure8"]["eps"] == [1e-2, 1e-3, 1e-4]


def test_file_then_overrides(tmp_path):
    f = tmp_path / "run.toml"
    f.write_text('seed = 3\n[figure8]\nM = 32\nfamily = "torus"\n')
    cfg = load_config(f, ["figure8.M=16"])
    assert cfg["seed"] == 3 and cfg["figure8"]["M"] == 16 and cfg["figure8"]["family"] == "torus"
    assert cfg["figure8"]["T"] == 100000


def test_override_values_parse_as_toml():
    cfg = load_config(overrides=["blowup.qs=[3, 7]", "budgets.tol=1e-8", "measure.family=cylinder"])
    assert cfg["blowup"]["qs"] == [3, 7] and cfg["budgets"]["tol"] == 1e-8
    assert cfg["measure"]["family"] == "cylinder"


@pytest.mark.parametrize("override, words", [
    ("pliss.c2=0.1", "c2"),
    ("pliss.c0=0.3", "c0"),
    ("hyperbolicity.gamma=2", "gamma"),
    ("hyperbolicity.N=0", "N"),
    ("budgets.h_min=1", "h_min"),
    ("blowup.qs=[11, 5]", "qs"),
    ("blowup.ratio_max=0.9", "ratio"),
    ("figure8.eps=[0.5, 1.5]", "eps"),
    ("figure8.T=2.5", "T"),
    ("catmap.q_max=0", "q_max"),
    ("catmap.qmax=3", "catmap.qmax"),
    ("catmap=3", "catmap"),
    ("noequals", "key=value"),
])
def test_invalid_configs_are_rejected(override, words):
    with pytest.raises(ParameterError, match=words.replace(".", r"\.")):
        load_config(overrides=[override])


def test_bad_toml_names_the_file(tmp_path):
    f = tmp_path / "broken.toml"
    f.write_text("[catmap\n")
    with pytest.raises(ParameterError, match="broken.toml"):
        load_config(f)

import math

import pytest

from logistic_harvest.config import RunConfig, extent_value, load_config, parse_config_text
from logistic_harvest.errors import ConfigTypeError
from logistic_harvest.spectra import bessel_j0_zero

def test_defaults():
    cfg = RunConfig()
    assert cfg.kind == "interval"
    assert cfg.extent == pytest.approx(math.pi)
    assert cfg.n == 256
    assert cfg.lam == 0.0
    assert cfg.scenario is None
    assert cfg.lambdas == (0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 1.0, 2.0, 3.5, 5.0, 10.0, 20.0, 35.0, 50.0)
    assert len(cfg.p_list) * len(cfg.q_list) * len(cfg.lambdas) >= 200
    for p in cfg.p_list:
        for q in cfg.q_list:
            cfg.params(p=p, q=q)

def test_parse_basic():
    cfg = parse_config_text(
        """
        # resonant interval
        kind = interval
        extent = pi   # trailing comment
        n = 64
        p = 2
        lambda = 0.25
        """
    )
    assert cfg.n == 64
    assert cfg.p == 2.0
    assert cfg.lam == 0.25
    assert cfg.extent == pytest.approx(math.pi)

@pytest.mark.parametrize("text, expected", [
    ("pi", math.pi),
    ("2pi", 2 * math.pi),
    ("2*pi", 2 * math.pi),
    ("pi/2", math.pi / 2),
    ("3.5", 3.5),
    ("j01", bessel_j0_zero()),
])
def test_extent_forms(text, expected):
    assert extent_value(text) == pytest.approx(expected)
    assert parse_config_text(f"extent = {text}").extent == pytest.approx(expected)

@pytest.mark.parametrize("text", ["0", "-1", "pi/0", "inf", "nan", "abc"])
def test_extent_rejected(text):
    with pytest.raises(ConfigTypeError):
        parse_config_text(f"extent = {text}")

def test_lists():
    cfg = parse_config_text("lambdas = 0.1, 1, 10\nk_list = 2,4\nq_list = 0.25")
    assert cfg.lambdas == (0.1, 1.0, 10.0)
    assert cfg.k_list == (2, 4)
    assert cfg.q_list == (0.25,)

    with pytest.raises(ConfigTypeError):
        parse_config_text("alpha_list = 0.1, -0.1")
    with pytest.raises(ConfigTypeError):
        parse_config_text("lambdas = ,")

@pytest.mark.parametrize("text, expected", [
    ("1", True),
    ("0", False),
    ("yes", True),
    ("Off", False),
    ("true", True),
])
def test_bools(text, expected):
    assert parse_config_text(f"stability = {text}").stability is expected

def test_bad_bool():
    with pytest.raises(ConfigTypeError):
        parse_config_text("plot_script = maybe")

@pytest.mark.parametrize("text", [
    "n = 64\nn = 128",
    "just some words",
    "= 3",
    "colour = red",
    "n = 2.5",
    "scenario = everything",
    "method = bisection",
    "homotopy = gamma",
])
def test_rejected_lines(text):
    with pytest.raises(ConfigTypeError):
        parse_config_text(text)

def test_scenario_and_method():
    cfg = parse_config_text("scenario = jacobian\nmethod = monotone\nhomotopy = beta")
    assert cfg.scenario == "jacobian"
    assert cfg.method == "monotone"
    assert cfg.homotopy == "beta"

def test_optional_float():
    assert parse_config_text("tau = auto").tau is None
    assert parse_config_text("tau = 1.5").tau == 1.5

@pytest.mark.parametrize("text", ["p = 1", "q = 1.5", "lambda = -1", "beta = 1.2", "alpha = -0.1"])
def test_invalid_params(text):
    with pytest.raises(ConfigTypeError):
        parse_config_text(text).validate()

def test_invalid_mesh():
    with pytest.raises(ConfigTypeError):
        parse_config_text("n = 1").validate()
    with pytest.raises(ConfigTypeError):
        parse_config_text("lambda_cap = -1").validate()

def test_params_and_mesh():
    cfg = parse_config_text("n = 32\np = 2\nq = 0.25\nlambda = 3")
    params = cfg.params()
    assert (params.p, params.q, params.lam) == (2.0, 0.25, 3.0)
    assert cfg.params(lam=0.0).lam == 0.0

    mesh = cfg.mesh()
    assert mesh.size == 33
    assert cfg.mesh(n=16).size == 17

def test_unknown_attribute():
    with pytest.raises(ConfigTypeError):
        RunConfig().colour

def test_load_config(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("n = 48\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg.n == 48
    assert cfg.source == str(path)

    with pytest.raises(ConfigTypeError):
        load_config(tmp_path / "missing.conf")

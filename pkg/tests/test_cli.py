import orjson
import pytest

from logistic_harvest.cli import main
from logistic_harvest.cli.command import BRANCH_HEADER
from logistic_harvest.cli.verify import VERIFY_HEADER
from logistic_harvest.format.table import read_csv

def load_json(path):
    return orjson.loads(path.read_bytes())

def test_eig_resonant_interval(run_cli):
    code, out = run_cli("eig", "extent = pi\nn = 128\n")
    assert code == 0

    meta = load_json(out / "eig.json")
    assert abs(meta["beta_Omega"] - 1) <= 1e-3
    assert "lambda_beta" not in meta

    header, rows = read_csv(out / "eig.csv")
    assert header == ["index", "node", "phi"]
    assert len(rows) == 129

def test_eig_with_steklov_pair(run_cli):
    code, out = run_cli("eig", "extent = pi\nbeta = 0.25\nalpha = 0.01\n")
    assert code == 0

    meta = load_json(out / "eig.json")
    assert abs(meta["lambda_beta"] - 0.5) <= 2e-3
    assert meta["lambda_alpha_beta"] == pytest.approx(meta["lambda_beta"] * 0.1)

    header, _ = read_csv(out / "eig.csv")
    assert header[-1] == "phi_beta"

def test_eig_is_deterministic(run_cli):
    _, out = run_cli("eig", "n = 64\n")
    first = (out / "eig.csv").read_bytes()
    _, out = run_cli("eig", "n = 64\n")
    assert (out / "eig.csv").read_bytes() == first

def test_set_overrides_config(run_cli):
    code, out = run_cli("eig", "n = 32\n", "--set", "n=64")
    assert code == 0
    assert load_json(out / "eig.json")["mesh"]["n"] == 64

@pytest.mark.parametrize("config", ["extent = 0\n", "colour = red\n", "p = 0.5\n"])
def test_invalid_config_exits_2(run_cli, config):
    code, out = run_cli("eig", config)
    assert code == 2
    assert not out.exists()

def test_unknown_command_exits_2(run_cli):
    code, _ = run_cli("integrate", "n = 64\n")
    assert code == 2

def test_bad_override_exits_2(run_cli):
    code, _ = run_cli("eig", "n = 64\n", "--set", "n")
    assert code == 2

def test_missing_config_exits_2(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["eig", "--config", str(tmp_path / "missing.conf"), "--out", str(tmp_path)])
    assert e.value.code == 2

def test_version():
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0

def test_branch_with_zero_cap(run_cli):
    code, out = run_cli("branch", "n = 64\nlambda_cap = 0\n")
    assert code == 0

    header, rows = read_csv(out / "branch.csv")
    assert header == BRANCH_HEADER
    assert len(rows) == 1
    assert rows[0][1] == 0.0
    assert rows[0][2] == pytest.approx(1.0)
    assert (out / "branch.json").exists()
    assert (out / "branch.dat").exists()

def test_solve_newton(run_cli):
    code, out = run_cli("solve", "n = 64\np = 3\nq = 0.5\nlambda = 0.5\n")
    assert code == 0

    meta = load_json(out / "solution.json")
    assert meta["residual"] <= 1e-10
    assert 0 < meta["gap_to_one"]
    assert not meta["neumann_state"]

def test_verify_jacobian(run_cli):
    code, out = run_cli("verify", "scenario = jacobian\nn = 64\n")
    assert code == 0

    report = load_json(out / "verify.json")
    assert report["passed"]
    assert report["scenarios"] == ["jacobian"]
    assert (out / "verify.csv").read_text(encoding="utf-8").splitlines()[0] == ",".join(VERIFY_HEADER)

def test_verify_failure_exits_5(run_cli):
    code, out = run_cli("verify", "scenario = refinement\nn = 64\ntol = 1e-30\nmax_iter = 5\n")
    assert code == 5

    report = load_json(out / "verify.json")
    assert not report["passed"]
    assert report["first_failure"]["scenario"] == "refinement"

def test_perturb_needs_resonant_interval(run_cli):
    code, _ = run_cli("perturb", "extent = 2pi\nn = 64\n")
    assert code == 2

def test_lambda_star_needs_critical_exponents(run_cli):
    code, _ = run_cli("lambda-star", "p = 3\nq = 0.5\nn = 64\n")
    assert code == 2

@pytest.mark.slow
def test_sweep(run_cli):
    code, out = run_cli("sweep", "n = 64\np_list = 2, 3\nq_list = 0.5\nlambdas = 0.05, 0.5\n")
    assert code == 0

    summary = load_json(out / "sweep.json")
    assert summary["solutions"] >= 1
    assert summary["all_below_one"]

def test_a_priori_bound_needs_enough_samples(run_cli):
    code, out = run_cli("verify", "scenario = a-priori-bound\nn = 32\np_list = 3\nq_list = 0.5\nlambdas = 0.5\n")
    assert code == 5

    failure = load_json(out / "verify.json")["first_failure"]
    assert failure["check"] == "converged positive solutions"
    assert failure["value"] == 1
    assert failure["limit"] == 200

@pytest.mark.slow
def test_a_priori_bound_default_grid(run_cli):
    code, out = run_cli("verify", "scenario = a-priori-bound\nn = 64\n")
    assert code == 0

    checks = load_json(out / "verify.json")["checks"]
    count = next(i for i in checks if i["check"] == "converged positive solutions")
    assert count["value"] >= 200

def test_branch_csv_is_deterministic(run_cli):
    config = "n = 64\np = 3\nq = 0.5\nlambda_cap = 1\n"
    code, out = run_cli("branch", config)
    assert code == 0
    first = (out / "branch.csv").read_bytes()

    code, out = run_cli("branch", config)
    assert code == 0
    assert (out / "branch.csv").read_bytes() == first

@pytest.mark.slow
@pytest.mark.parametrize("lam", [5, 50])
def test_solve_monotone_large_lambda(run_cli, lam):
    code, out = run_cli("solve", f"n = 64\np = 3\nq = 0.5\nlambda = {lam}\nmethod = monotone\n")
    assert code == 0

    meta = load_json(out / "solution.json")
    assert meta["certificate_ok"]
    assert meta["minimal"]["residual"] <= 1e-10
    assert meta["maximal"]["residual"] <= 1e-10

    header, rows = read_csv(out / "solution.csv")
    assert header == ["index", "node", "minimal", "maximal"]
    assert all(row[2] <= row[3] + 1e-8 for row in rows)
    assert all(row[3] < 1 for row in rows)

@pytest.mark.slow
def test_borderline_rescaled_bounds_refine(run_cli):
    _, out = run_cli("verify", "scenario = borderline-uniqueness\nn = 128\n")

    checks = {i["check"]: i for i in load_json(out / "verify.json")["checks"]}
    for name in ("rescaled C1", "rescaled C2", "rescaled C2/C1"):
        check = checks[f"{name} change under refinement"]
        assert check["passed"]
        assert check["limit"] == 0.02

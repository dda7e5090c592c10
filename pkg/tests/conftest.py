import math

import pytest

from logistic_harvest.cli import main
from logistic_harvest.domain import build_mesh
from logistic_harvest.spectra import bessel_j0_zero, dirichlet_principal

@pytest.fixture(scope="session")
def interval_mesh():
    return build_mesh("interval", math.pi, 128)

@pytest.fixture(scope="session")
def interval_pair(interval_mesh):
    return dirichlet_principal(interval_mesh)

@pytest.fixture(scope="session")
def fine_mesh():
    return build_mesh("interval", math.pi, 256)

@pytest.fixture(scope="session")
def fine_pair(fine_mesh):
    return dirichlet_principal(fine_mesh)

@pytest.fixture(scope="session")
def coarse_mesh():
    return build_mesh("interval", math.pi, 64)

@pytest.fixture(scope="session")
def coarse_pair(coarse_mesh):
    return dirichlet_principal(coarse_mesh)

@pytest.fixture(scope="session")
def wide_mesh():
    return build_mesh("interval", 2 * math.pi, 128)

@pytest.fixture(scope="session")
def disk_mesh():
    return build_mesh("radial-disk", bessel_j0_zero(), 512)

@pytest.fixture
def run_cli(tmp_path):
    """Run the command line with a config text, return ``(exit_code, out_dir)``"""
    def run(command, config, *extra):
        path = tmp_path / "run.conf"
        path.write_text(config, encoding="utf-8")
        out = tmp_path / "out"
        with pytest.raises(SystemExit) as e:
            main([command, "--config", str(path), "--out", str(out), "--no-progress-bar", *extra])
        return e.value.code, out
    return run

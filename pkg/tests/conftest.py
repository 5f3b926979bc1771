import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from obisim.config import ScenarioConfig  # noqa: E402

TINY_TOML = """
[kernel]
seed = 7
market_close_ns = 120_000_000_000

[agents.zi]
count = 8
arrival_mean_s = 5.0

[agents.informed]
count = 8
arrival_mean_s = 5.0

[agents.obi]
count = 3

[harness]
days = 2
"""


def tiny_config(seed: int = 7, obi: int = 3) -> ScenarioConfig:
    """Two simulated minutes with a handful of agents: fast enough for unit tests."""
    cfg = ScenarioConfig()
    cfg.kernel.seed = seed
    cfg.kernel.market_close_ns = 120_000_000_000
    cfg.agents.zi.count = 8
    cfg.agents.informed.count = 8
    cfg.agents.zi.arrival_mean_s = 5.0
    cfg.agents.informed.arrival_mean_s = 5.0
    cfg.agents.obi.count = obi
    cfg.harness.days = 2
    return cfg.validate()


@pytest.fixture
def tiny():
    return tiny_config()


@pytest.fixture
def tiny_toml(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML)
    return path


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion; printed at the end of the run."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

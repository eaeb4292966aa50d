import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import record  # noqa: E402


@pytest.fixture(scope="session")
def synth_small(tmp_path_factory):
    """Seed-1 synthetic archive: 1000 users, 10k tweets, 15 regions."""
    from geosocial.synth import generate_synthetic

    out = tmp_path_factory.mktemp("synth_small")
    manifest = generate_synthetic(out, seed=1, n_users=1000, n_tweets=10000, n_regions=15)
    return out, manifest


@pytest.fixture(scope="session")
def synth_run(synth_small, tmp_path_factory):
    """Full pipeline run over the small synthetic archive."""
    from geosocial.pipeline import PipelineConfig, run_pipeline

    src, manifest = synth_small
    out = tmp_path_factory.mktemp("synth_run")
    cfg = PipelineConfig.from_file(src / "config.json")
    cfg.out_dir = out
    report = run_pipeline(cfg)
    return out, report, manifest


@pytest.fixture
def rec():
    return record


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2} {status}: {title} ({detail})")

import os
import subprocess
import sys

import pytest

from onoc_xbar.cli import main


@pytest.fixture(scope="session")
def reproduced(tmp_path_factory):
    """Two reproduce runs: one in this process on one thread, one in a fresh process on four."""
    first = tmp_path_factory.mktemp("run1")
    second = tmp_path_factory.mktemp("run2")
    old = os.environ.get("ONOC_XBAR_THREADS")
    os.environ["ONOC_XBAR_THREADS"] = "1"
    try:
        assert main(["reproduce", "--out", str(first)]) == 0
    finally:
        if old is None:
            os.environ.pop("ONOC_XBAR_THREADS")
        else:
            os.environ["ONOC_XBAR_THREADS"] = old
    env = dict(os.environ, ONOC_XBAR_THREADS="4")
    proc = subprocess.run(
        [sys.executable, "-m", "onoc_xbar", "reproduce", "--out", str(second)],
        env=env, capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    return first, second


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(line)

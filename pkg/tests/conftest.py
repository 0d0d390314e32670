from pathlib import Path

import pytest

from sssanc.scenario import parse_scenario

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
GOLDEN = Path(__file__).resolve().parent / "golden"

SMALL = """
[paths]
primary = {primary}
secondary = {secondary}
secondary_estimate = {estimate}

[noise]
{noise}

[algorithm]
{algorithm}

[run]
name = small
filter_length = {L}
iterations = {N}
trials = {T}
seed = 42
{extra}
"""


def small_text(algorithm="kind = sss\nstep_sizes = 0.6, 0.3, 0.15, 0.075",
               noise="kind = white\nvariance = 1", N=400, T=4, L=16,
               primary="preset:primary", secondary="preset:secondary",
               estimate="preset:secondary_estimate", extra=""):
    return SMALL.format(algorithm=algorithm, noise=noise, N=N, T=T, L=L, primary=primary,
                        secondary=secondary, estimate=estimate, extra=extra)


def small_scenario(**kw):
    return parse_scenario(small_text(**kw))


@pytest.fixture
def small():
    return small_scenario


_ACCEPTANCE = {}


def record_acceptance(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    _ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])

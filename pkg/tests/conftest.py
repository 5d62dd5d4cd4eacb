import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile(
    "default", max_examples=25, deadline=None, derandomize=True,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("default")

# criterion id -> (description, outcome), filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture
def record_criterion():
    def record(cid, text, ok, detail=""):
        prev = ACCEPTANCE.get(cid)
        ok = bool(ok) and (prev is None or prev[1])
        ACCEPTANCE[cid] = (text, ok, detail if prev is None else f"{prev[2]}; {detail}".strip("; "))
    return record


def pytest_runtest_logreport(report):
    # a failing acceptance test counts against its criterion even if it
    # never reached the record call
    if report.when == "call" and report.failed and "test_acceptance" in report.nodeid:
        marker = report.nodeid.rsplit("criterion_", 1)
        if len(marker) == 2:
            cid = int(marker[1].split("_")[0])
            text, _, detail = ACCEPTANCE.get(cid, ("", False, ""))
            ACCEPTANCE[cid] = (text, False, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        text, ok, detail = ACCEPTANCE[cid]
        tr.write_line(f"criterion {cid}: {'PASS' if ok else 'FAIL'}  {text}  [{detail}]")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

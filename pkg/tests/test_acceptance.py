"""Acceptance suite: one test per criterion, each printed as a pass/fail line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines;
the same criteria are available from the command line via `nsclab accept`.
"""

import numpy as np
import pytest

from nsclab.acceptance import CRITERIA, run_acceptance_suite
from nsclab.config import ExperimentConfig

_report = None


def _suite():
    global _report
    if _report is None:
        lines = []
        _report = run_acceptance_suite(ExperimentConfig(), progress=lambda e: lines.append(e))
    return _report


def _entry(cid):
    report = _suite()
    for entry in report["criteria"]:
        if entry["id"] == cid:
            return entry
    raise KeyError(cid)


@pytest.mark.parametrize("cid,name", [(c[0], c[1]) for c in CRITERIA])
def test_criterion(cid, name):
    entry = _entry(cid)
    status = "PASS" if entry["passed"] else "FAIL"
    print(f"[{status}] {cid:>3} {name}: {entry['tolerance']} "
          f"({entry['seconds']:.2f}s / {entry['runtime_budget_seconds']:.0f}s budget)")
    assert entry["criterion_passed"], entry["measured"]
    assert entry["seconds"] < entry["runtime_budget_seconds"], (
        f"{cid} exceeded its runtime budget: {entry['seconds']:.2f}s")


def test_overall_report_shape():
    report = _suite()
    assert report["all_passed"]
    assert len(report["criteria"]) == len(CRITERIA)
    assert "config" in report
    # measured values are JSON-serializable
    import json

    json.dumps(report)


def test_suite_reruns_with_modified_tau():
    # the expansion checks carry no restriction on the relaxation time
    from nsclab.params import PhysicalParams

    cfg = ExperimentConfig(physical=PhysicalParams(tau=0.5))
    report = run_acceptance_suite(cfg, criteria=["C1", "C2", "C6", "C10"])
    assert report["all_passed"], [e for e in report["criteria"] if not e["passed"]]
    assert report["config"]["physical"]["tau"] == 0.5

import json

import pytest

from versalnf.cases import case_dim2, case_dim3, case_l4, case_pipe


@pytest.fixture(scope="module")
def reports():
    return {
        "dim2": case_dim2(),
        "dim3": case_dim3(),
        "pipe": case_pipe(),
        "l4": case_l4(),
    }


def test_all_cases_pass(reports):
    for name, rep in reports.items():
        failing = [c.label for c in rep.checks if c.status != "pass"]
        assert not failing, f"{name}: {failing}"


def test_cases_complete_quickly(reports):
    for name, rep in reports.items():
        assert rep.elapsed_seconds < 60, name


def test_reports_serializable(reports):
    for rep in reports.values():
        doc = json.dumps(rep.as_dict())
        back = json.loads(doc)
        assert back["status"] == "pass"
        assert back["checks"]


def test_expected_check_labels(reports):
    labels = {c.label for c in reports["l4"].checks}
    assert "epsN_series_order2" in labels
    assert "epsS_series_order2" in labels
    assert "reality_interval_endpoints" in labels
    labels2 = {c.label for c in reports["pipe"].checks}
    assert "transformation_residual_corrected" in labels2
    assert "transport_lemma_random" in labels2


def test_case_determinism():
    a = case_dim2(seed=5)
    b = case_dim2(seed=5)
    assert [c.status for c in a.checks] == [c.status for c in b.checks]

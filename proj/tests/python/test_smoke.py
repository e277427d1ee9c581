import json
import os
import pathlib

import pytest

import eucgov

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = pathlib.Path(os.environ.get("EUCGOV_FIXTURES", HERE.parent / "fixtures"))
STORES = os.environ.get("EUCGOV_CLI_STORES")

CONTROLS = [
    "location_known", "operating_instructions", "backup_in_place", "recovery_tested",
    "version_controlled", "review_current", "testing_evidenced", "access_restricted",
    "integrity_protected", "second_person_can_fix", "technical_docs_exist",
]


def answers(c, m, impact, failing=()):
    controls = {name: name not in failing for name in CONTROLS}
    controls["holds_personal_data"] = False
    controls["holds_sensitive_personal_data"] = False
    return {"complexity": c, "materiality": m, "impact": impact,
            "controls": controls, "assessed_on": "2018-05-01"}


def test_assess_blue():
    r = eucgov.assess(answers(1, 1, 1))
    assert r["band"] == "Blue"
    assert r["risk_score"] == 1
    assert r["next_review"] == "2019-05-01"
    assert r["reasons"] == []


def test_assess_matches_cli(tmp_path):
    a = answers(3, 2, 5, ["version_controlled", "access_restricted", "backup_in_place"])
    path = tmp_path / "a.json"
    path.write_text(json.dumps(a))
    code, out, _ = eucgov.run_cli(["assess", "--input", path])
    assert code == 0
    assert json.loads(out) == eucgov.assess(a)


def test_what_if_and_errors():
    red = answers(3, 2, 5, ["location_known", "operating_instructions", "backup_in_place",
                            "version_controlled", "review_current", "testing_evidenced",
                            "access_restricted", "integrity_protected"])
    assert eucgov.assess(red)["band"] == "Red"
    fixed = eucgov.what_if(red, ["version_controlled", "review_current", "testing_evidenced",
                                 "access_restricted", "integrity_protected"])
    assert fixed["band"] == "Green"
    with pytest.raises(eucgov.EucgovError) as info:
        eucgov.what_if(red, ["not_a_control"])
    assert info.value.code == "UnknownField"
    assert info.value.field == "not_a_control"


def test_triage():
    assert eucgov.triage({"department": "Facilities", "has_euc": 0})["band"] == "Green"


def test_scan_and_depth():
    report = eucgov.scan(FIXTURES / "nested_ifs.xlsx")
    assert report["metrics"]["max_nested_if_level"] == 2
    assert report["complexity"] == 2
    assert eucgov.nested_if_depth('=IF(A1,"IF(",2)') == (1, True)
    with pytest.raises(eucgov.EucgovError) as info:
        eucgov.scan(FIXTURES / "random-bytes.bin")
    assert info.value.code == "NotAWorkbook"


def test_diff():
    d = eucgov.diff(FIXTURES / "baseline.xlsx", FIXTURES / "baseline_mutated.xlsx")
    assert [e["kind"] for e in d["entries"]] == ["FORMULA_REPLACED_BY_CONSTANT"]


@pytest.mark.skipif(not STORES, reason="generated stores not available")
def test_reports_on_generated_stores():
    fig6 = os.path.join(STORES, "fig6.json")
    snap = eucgov.kpi(fig6, as_of="2019-03-31")
    assert snap["band_counts"] == {"Blue": 20, "Green": 116, "Amber": 14, "Red": 8}
    assert len(eucgov.list_eucas(fig6)) == 158
    assert len(eucgov.unregistered(fig6)) == 22
    c = eucgov.concentration(os.path.join(STORES, "fig7.json"), top_k=7)
    assert c["top_k_share"] == 0.85


def test_inventory_round_trip(tmp_path):
    store = tmp_path / "store.json"
    code, out, err = eucgov.run_cli(["inventory", "add", "--store", store, "--name", "Complaints DB",
                                     "--department", "Complaints", "--manager", "J. Smith"])
    assert code == 0, err
    record = json.loads(out)
    assert record["lifecycle_status"] == "live"
    assert eucgov.list_eucas(store)[0]["id"] == record["id"]
    code, _, err = eucgov.run_cli(["inventory", "review", "--id", "X", "--date", "2019-03-10",
                                   "--store", store])
    assert code == 1
    assert err.startswith("UnknownId")

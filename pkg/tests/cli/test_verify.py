"""Tests for the verify command."""

import json

import pytest

from nmlab.core.exceptions import InvalidInputError


@pytest.mark.unit
class TestVerifyCommand:
    def test_single_claim(self, cli_runner):
        result = cli_runner("verify", "prop1", "--directions", "10")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["claim"] == "prop1"
        assert data["status"] == "confirmed"

    def test_corrected_claim_still_passes(self, cli_runner):
        result = cli_runner("verify", "prop2", "--directions", "10")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["status"] == "confirmed_with_correction"
        assert len(data["corrections"]) == 2

    def test_sigmoid_claim_reports_weight_swap(self, cli_runner):
        result = cli_runner("verify", "thm1", "--directions", "10")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["status"] == "confirmed_with_correction"
        assert data["corrections"][0]["substitution"].startswith("w01 <-> w10")
        assert data["details"]["spectrum"]["reproduced"] is False

    def test_summary_table(self, cli_runner):
        result = cli_runner("-f", "csv", "verify", "prop3", "--summary", "--directions", "5")
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "claim,status,corrections,summary"
        assert lines[1].startswith("prop3,confirmed,0,")

    def test_unknown_claim(self, cli_runner):
        result = cli_runner("verify", "prop9")
        assert isinstance(result.exception, InvalidInputError)
        assert "Available: all, thm1" in result.exception.message


@pytest.mark.slow
def test_verify_all(cli_runner):
    result = cli_runner("verify", "--directions", "100")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert [r["claim"] for r in data] == ["thm1", "prop1", "prop2", "prop3", "blindspot", "lemma1"]

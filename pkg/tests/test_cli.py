"""Tests for the supergrade command line."""

import msgspec
import pytest

from src.supergrade.cli import build_parser, config_from_args, main
from src.supergrade.config_utils import BOUNDS_ENV
from src.supergrade.schemas import SPEC_VERSION, Bounds, Command


def run_json(capsys, *argv):
    """Run main and decode its JSON report."""
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, msgspec.json.decode(out)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep bounds overrides from the outer environment out of the tests."""
    monkeypatch.delenv(BOUNDS_ENV, raising=False)


def test_group_report(capsys):
    """Test the group command and the report envelope."""
    code, report = run_json(capsys, "group", "--group", "Z2xZ4")
    assert code == 0
    assert report["spec_version"] == SPEC_VERSION
    assert report["claim"] == "group"
    assert report["verdict"] == "pass"
    assert report["evidence_kind"] == "exact"
    assert report["details"]["invariant_factors"] == [2, 4]
    assert report["details"]["subgroups"] == 8
    assert "timing_ms" not in report


def test_group_with_elements(capsys):
    """Test generated subgroup details."""
    code, report = run_json(capsys, "group", "--group", "Z4", "--elements", "2")
    assert code == 0
    assert report["details"]["generated_order"] == 2
    assert report["details"]["generates"] is False
    assert report["details"]["annihilator_size"] == 2


def test_output_is_deterministic(capsys):
    """Test that identical runs produce identical bytes."""
    argv = ["verify", "--thm", "5.2", "--group", "Z2xZ2", "--elements", "(0,0),(1,1),(0,1),(1,0)",
            "--p", "1,1,0,0", "--q", "0,0,1,1"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first


def test_verify_rejected_relation_still_passes(capsys):
    """Test that a verified non-admissible instance passes."""
    code, report = run_json(capsys, "verify", "--thm", "5.2", "--group", "Z4", "--elements", "0,2,1,3",
                            "--p", "1,1,0,0", "--q", "0,0,1,1")
    assert code == 0
    assert report["claim"] == "Thm5.2"


def test_failing_verdict_exits_one(capsys):
    """Test that a fail verdict maps to exit code 1."""
    code, report = run_json(capsys, "involution", "--group", "Z2", "--sig", "2,2", "--inv", "trp",
                            "--theta", "0,0,0,1")
    assert code == 1
    assert report["verdict"] == "fail"
    assert report["details"]["graded"] is False
    assert report["details"]["violation"] is not None


@pytest.mark.parametrize("argv", [
    ["group", "--group", "Z2+Z3"],
    ["group"],
    ["falsify"],
    ["verify", "--thm", "9.9", "--group", "Z2"],
    ["verify", "--group", "Z4", "--elements", "0,0"],
    ["grade", "--group", "Z2", "--sig", "1,1", "--theta", "0,1,1"],
    ["verify", "--thm", "5.2", "--group", "Z4", "--elements", "0,2,1,3", "--p", "1,2,0,0", "--q", "0,0,1,1"],
    ["structure", "--kind", "nope", "--n", "1"],
    ["structure", "--kind", "osp-jordan", "--sig", "1,1"],
    ["structure", "--kind", "p-jordan", "--n", "0"],
])
def test_errors_exit_two(argv, capsys):
    """Test that config and claim errors map to exit code 2 on stderr."""
    assert main(argv) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "error: " in captured.err


def test_falsify_lemma(capsys):
    """Test the bounded falsification search over the conjugation family."""
    code, report = run_json(capsys, "falsify", "--lemma", "5.1", "--group", "Z2", "--h", "1", "--elements", "0")
    assert code == 0
    assert report["claim"] == "Lemma5.1"
    assert report["evidence_kind"] == "bounded"
    assert report["family_size"] == 64


def test_env_bounds_override(capsys, monkeypatch):
    """Test SUPERGRADE_BOUNDS lowering the candidate bound."""
    monkeypatch.setenv(BOUNDS_ENV, "max_candidates=10")
    assert main(["enumerate", "--group", "Z2", "--sig", "2,2"]) == 2
    assert "max_candidates=10" in capsys.readouterr().err


def test_env_bounds_do_not_override_config(tmp_path, monkeypatch):
    """Test that explicit config bounds win over the environment."""
    path = tmp_path / "run.cfg"
    path.write_text("enumerate group=Z2 sig=2,2 bounds=max_size=5\n", encoding="utf-8")
    monkeypatch.setenv(BOUNDS_ENV, "max_candidates=10")
    args = build_parser().parse_args(["enumerate", "--config", str(path)])
    config = config_from_args(args)
    assert config.command == Command.ENUMERATE
    assert config.bounds == Bounds(max_size=5)


@pytest.mark.parametrize("parts", ["1", "3"])
def test_enumerate_counts(parts, capsys):
    """Test golden counts with and without a partitioned scan."""
    code, report = run_json(capsys, "enumerate", "--group", "Z2", "--sig", "2,2", "--parts", parts)
    assert code == 0
    assert report["details"]["raw_count"] == 8
    assert report["details"]["dedup_count"] == 5
    assert report["details"]["scanned"] == 16


def test_config_file_with_flag_override(tmp_path, capsys):
    """Test that flags win over config file values."""
    path = tmp_path / "run.cfg"
    path.write_text("verify claim=Lemma6.5 group=Z2 sig=1,1 theta=0,0\n", encoding="utf-8")
    code, report = run_json(capsys, "verify", "--config", str(path), "--theta", "0,1")
    assert code == 0
    assert report["claim"] == "Lemma6.5"
    assert report["witnesses"] == ["(1)"]


def test_missing_config_file(tmp_path, capsys):
    """Test that an unreadable config file is a config error."""
    assert main(["group", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_text_format(capsys):
    """Test the human-readable rendering."""
    assert main(["group", "--group", "Z6", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "claim: group" in out
    assert "verdict: pass" in out
    assert "  invariant_factors: [6]" in out


def test_timing_flag(capsys):
    """Test that timing appears only when requested."""
    code, report = run_json(capsys, "group", "--group", "Z2", "--timing")
    assert code == 0
    assert report["timing_ms"] >= 0


def test_out_archives_report(tmp_path, capsys):
    """Test that --out writes the report under reports/<claim>/."""
    assert main(["group", "--group", "Z3", "--out", str(tmp_path)]) == 0
    printed = capsys.readouterr().out
    archived = list((tmp_path / "reports" / "group").glob("*.json"))
    assert len(archived) == 1
    assert archived[0].read_text(encoding="utf-8") == printed


def test_structure_command(capsys):
    """Test the structure command on the Lie superalgebra osp(1|2)."""
    code, report = run_json(capsys, "structure", "--kind", "b-lie", "--n", "0", "--m", "1")
    assert code == 0
    assert report["claim"] == "Thm7.4"


def test_tensor_grading_kind(capsys):
    """Test grade --kind tensor: an elementary M_(1,1) tensored with the Pauli M_2."""
    code, report = run_json(capsys, "grade", "--kind", "tensor", "--group", "Z2xZ2", "--sig", "1,1",
                            "--theta", "(0,0),(0,0)", "--fine-k", "1")
    assert code == 0
    assert report["claim"] == "grading"
    details = report["details"]
    assert details["kind"] == "tensor"
    assert details["fine_k"] == 1
    assert details["elementary_signature"] == "1,1"
    assert sorted(details["dimensions"].values()) == [4, 4, 4, 4]
    assert details["super_compatible"] is True
    assert details["fine"] is False
    assert details["identity_component_dim"] == 4
    assert "fine_k=1" in report["instance"]


def test_tensor_grading_kind_needs_fine_k(capsys):
    """Test that the tensor kind requires its fine factor."""
    assert main(["grade", "--kind", "tensor", "--group", "Z2xZ2", "--sig", "1,1", "--theta", "(0,0),(0,0)"]) == 2
    assert "fine_k" in capsys.readouterr().err


def test_spec_flag_names_the_claim(capsys):
    """Test --spec as an alternative to --lemma and --thm."""
    code, report = run_json(capsys, "falsify", "--spec", "Lemma5.1", "--group", "Z2", "--h", "1",
                            "--elements", "0")
    assert code == 0
    assert report["claim"] == "Lemma5.1"
    code, report = run_json(capsys, "verify", "--spec", "5.3", "--group", "Z4", "--elements", "0,1",
                            "--perm", "2,1")
    assert code == 0
    assert report["claim"] == "Thm5.3"


def test_empty_paired_block_exits_two(capsys):
    """Test that p_i + q_i = 0 is a claim error, not a smaller instance."""
    assert main(["verify", "--thm", "5.2", "--group", "Z4", "--elements", "0,2,1,3",
                 "--p", "1,1,0,0", "--q", "1,1,0,0"]) == 2
    assert "p_i + q_i >= 1" in capsys.readouterr().err


def test_reports_list_and_show(tmp_path, capsys):
    """Test reading back reports archived with --out."""
    assert main(["group", "--group", "Z3", "--out", str(tmp_path)]) == 0
    printed = capsys.readouterr().out
    assert main(["involution", "--group", "Z2", "--sig", "2,2", "--inv", "trp", "--theta", "0,0,0,1",
                 "--out", str(tmp_path)]) == 1
    capsys.readouterr()

    code, keys = run_json(capsys, "reports", "--out", str(tmp_path))
    assert code == 0
    assert len(keys) == 2
    assert "group/group=Z3" in keys
    code, keys = run_json(capsys, "reports", "--out", str(tmp_path), "--claim", "group")
    assert keys == ["group/group=Z3"]

    assert main(["reports", "--out", str(tmp_path), "--claim", "group", "--instance", "group=Z3"]) == 0
    assert capsys.readouterr().out == printed


def test_reports_show_failing_and_missing(tmp_path, capsys):
    """Test exit codes when showing archived reports."""
    assert main(["involution", "--group", "Z2", "--sig", "2,2", "--inv", "trp", "--theta", "0,0,0,1",
                 "--out", str(tmp_path)]) == 1
    instance = msgspec.json.decode(capsys.readouterr().out)["instance"]
    assert main(["reports", "--out", str(tmp_path), "--claim", "superinvolution", "--instance", instance]) == 1
    assert msgspec.json.decode(capsys.readouterr().out)["verdict"] == "fail"
    assert main(["reports", "--out", str(tmp_path), "--claim", "Thm5.2", "--instance", "nothing"]) == 2
    assert "error: " in capsys.readouterr().err
    assert main(["reports", "--out", str(tmp_path), "--instance", "nothing"]) == 2


def test_enumerate_out_records_golden_counts(tmp_path, capsys):
    """Test that an archived enumeration records its counts under golden/."""
    assert main(["enumerate", "--group", "Z2", "--sig", "2,2", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    code, golden = run_json(capsys, "reports", "--out", str(tmp_path), "--golden")
    assert code == 0
    assert golden == {"Z2_osp_2_2": {"dedup": 5, "raw": 8}}
    assert (tmp_path / "golden" / "counts.json").exists()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

from __future__ import annotations

import json

import pytest

from braidscape.cli import EXIT_ERROR, EXIT_NOT_APPLICABLE, EXIT_OK, main, run


def _tree(trees_dir, name):
    return str(trees_dir / f"{name}.json")


def test_stats_summary(trees_dir, capsys):
    code = main(["stats", "--tree", _tree(trees_dir, "h"), "--n", "3"])

    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "m=2 r=0 s=2"


def test_stats_json_for_interval(trees_dir, capsys):
    code = main(["stats", "--tree", _tree(trees_dir, "path"), "--n", "2", "--json"])

    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert report["command"][0] == "stats"
    assert report["outcome"]["ordered_connected"] is False
    assert report["timing_seconds"] is None
    assert list(report["inputs"]) == [_tree(trees_dir, "path")]


def test_subdivide_reports_vertex_count(trees_dir, capsys):
    assert main(["subdivide", "--tree", _tree(trees_dir, "y"), "--n", "3"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "7 vertices"


def test_cells_census(trees_dir):
    code, report = run(["cells", "--tree", _tree(trees_dir, "y"), "--n", "2", "--census"])

    assert code == EXIT_OK
    assert report.outcome["dims"]["0"] == {"critical": 1, "redundant": 5}
    assert report.outcome["dims"]["1"] == {"collapsible": 5, "critical": 1}


def test_cells_listing_with_dimension_filter(trees_dir):
    code, report = run(["cells", "--tree", _tree(trees_dir, "y"), "--n", "2", "--dim", "1"])

    assert code == EXIT_OK
    assert len(report.outcome["cells"]) == 6
    assert {cell["dim"] for cell in report.outcome["cells"]} == {1}


def test_cell_cap_from_environment(trees_dir, monkeypatch, capsys):
    monkeypatch.setenv("BRAIDSCAPE_MAX_CELLS", "3")

    code = main(["cells", "--tree", _tree(trees_dir, "h"), "--n", "2"])

    assert code == EXIT_ERROR
    assert "cap is 3" in capsys.readouterr().err


def test_critical_and_homology(trees_dir):
    _, critical = run(["critical", "--tree", _tree(trees_dir, "y"), "--n", "2"])
    _, homology = run(["homology", "--tree", _tree(trees_dir, "y"), "--n", "2"])

    assert critical.outcome["counts"] == [1, 1]
    assert homology.outcome["betti"][:2] == [1, 1]


def test_tc_determined(trees_dir, tmp_path):
    out = tmp_path / "reports" / "tc.json"

    code = main(["tc", "--tree", _tree(trees_dir, "y"), "--n", "3", "--out", str(out), "--timing"])

    report = json.loads(out.read_text(encoding="utf-8"))
    assert code == EXIT_OK
    assert report["outcome"]["value"] == 3
    assert report["outcome"]["case"] == "1"
    assert report["timing_seconds"] is not None
    assert report["limits"]["max_cells"] > 0


def test_tc_not_applicable_exit_code(trees_dir, capsys):
    code = main(["tc", "--tree", _tree(trees_dir, "y"), "--n", "2"])

    assert code == EXIT_NOT_APPLICABLE
    assert "below_statement1_threshold" in capsys.readouterr().out


def test_verify_round_trip(trees_dir, tmp_path, capsys):
    _, report = run(["tc", "--tree", _tree(trees_dir, "h"), "--n", "2"])
    certificate = tmp_path / "certificate.json"
    certificate.write_text(json.dumps(report.outcome), encoding="utf-8")
    capsys.readouterr()

    assert main(["verify", "--certificate", str(certificate)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "certificate verified"

    report.outcome["value"] = 5
    certificate.write_text(json.dumps(report.outcome), encoding="utf-8")
    assert main(["verify", "--certificate", str(certificate)]) == EXIT_ERROR
    assert "verification failed: value" in capsys.readouterr().out


def test_verify_rejects_malformed_document(tmp_path, capsys):
    certificate = tmp_path / "certificate.json"
    certificate.write_text('{"status": "maybe"}', encoding="utf-8")

    assert main(["verify", "--certificate", str(certificate)]) == EXIT_ERROR
    assert "Invalid certificate document" in capsys.readouterr().err


def test_arcs_command(trees_dir, capsys):
    assert main(["arcs", "--tree", _tree(trees_dir, "y")]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "k = 1"


@pytest.mark.parametrize("ordered", [False, True])
def test_plan_between_given_configurations(trees_dir, ordered):
    argv = ["plan", "--tree", _tree(trees_dir, "y"), "--n", "2", "--from", "v:b,v:x", "--to", "v:x,v:y"]

    code, report = run([*argv, "--ordered"] if ordered else argv)

    assert code == EXIT_OK
    assert report.outcome["valid"] is True
    assert report.outcome["path"]["ordered"] is ordered
    assert report.outcome["from"] == "v:b,v:x"


def test_plan_random_writes_frames(trees_dir, tmp_path):
    frames = tmp_path / "frames.json"
    argv = ["plan", "--tree", _tree(trees_dir, "h"), "--n", "3", "--random", "--seed", "5", "--frames-out", str(frames)]

    code, first = run(argv)
    _, second = run(argv)

    assert code == EXIT_OK
    assert first.outcome == second.outcome
    assert json.loads(frames.read_text(encoding="utf-8")) == first.outcome["path"]


@pytest.mark.parametrize(
    "extra",
    [[], ["--from", "v:b", "--to", "v:x"], ["--from", "v:b,e:b-c@1/2", "--to", "v:x,v:y"]],
)
def test_plan_input_errors(trees_dir, capsys, extra):
    code = main(["plan", "--tree", _tree(trees_dir, "y"), "--n", "2", *extra])

    assert code == EXIT_ERROR
    assert capsys.readouterr().err.startswith("error: ")


def test_profile_lists_undetermined(trees_dir):
    code, report = run(["profile", "--tree", _tree(trees_dir, "h"), "--n-min", "2", "--n-max", "5"])

    assert code == EXIT_OK
    assert report.outcome["undetermined"] == [4]
    assert [row["value"] for row in report.outcome["rows"]] == [3, 3, None, 5]


def test_profile_rejects_empty_range(trees_dir, capsys):
    code = main(["profile", "--tree", _tree(trees_dir, "h"), "--n-min", "5", "--n-max", "2"])

    assert code == EXIT_ERROR
    assert "--n-max" in capsys.readouterr().err


def test_missing_tree_file(tmp_path, capsys):
    code = main(["stats", "--tree", str(tmp_path / "absent.json"), "--n", "2"])

    assert code == EXIT_ERROR
    assert capsys.readouterr().err.startswith("error: ")


def test_command_is_required():
    with pytest.raises(SystemExit):
        main([])

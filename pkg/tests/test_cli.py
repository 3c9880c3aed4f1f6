import json

import pytest

from qhd.cli import main
from qhd.curve_config import config_from_dict


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_graph(tmp_path, name, argv_family=("W", "0", "0", "0")):
    path = tmp_path / name
    code = main(["gen", *argv_family, "-o", str(path)])
    assert code == 0
    return path


def test_gen_writes_parseable_graph(tmp_path, capsys):
    path = write_graph(tmp_path, "w000.json")
    data = json.loads(path.read_text())
    cfg = config_from_dict(data)
    assert len(cfg.curves) == 7


def test_gen_round_trip_is_byte_stable(tmp_path):
    path = write_graph(tmp_path, "n210.json", ("N", "2", "1", "0"))
    text = path.read_text()
    from qhd.cli import dump_json
    from qhd.curve_config import config_to_dict

    assert dump_json(config_to_dict(config_from_dict(json.loads(text)))) == text


def test_invariants_flags_log_canonical(tmp_path, capsys):
    path = write_graph(tmp_path, "w000.json")
    code, out, _ = run(capsys, "invariants", str(path))
    assert code == 0
    assert "beta: 0" in out
    assert "log-canonical: yes" in out
    assert "det (direct): 81" in out
    assert "det (star formula, |.|): 81" in out


def test_invariants_json(tmp_path, capsys):
    path = write_graph(tmp_path, "m000.json", ("M", "0", "0", "0"))
    code, out, _ = run(capsys, "invariants", str(path), "--json")
    data = json.loads(out)
    assert data["det_direct"] == 36
    assert data["e"] == "-1"
    assert data["bound_violations"] == []


def test_disc_trivial_group(tmp_path, capsys):
    path = tmp_path / "line.json"
    path.write_text(
        json.dumps({"curves": [{"id": 0, "self": -1, "label": None}], "points": []})
    )
    code, out, _ = run(capsys, "disc", str(path), "--self-isotropic")
    assert code == 0
    assert "(trivial group)" in out
    assert "self-isotropic subgroups: 1" in out


def test_disc_singular_graph_is_domain_error(tmp_path, capsys):
    path = tmp_path / "singular.json"
    path.write_text(
        json.dumps(
            {
                "curves": [
                    {"id": 0, "self": -2, "label": None},
                    {"id": 1, "self": -1, "label": None},
                    {"id": 2, "self": -2, "label": None},
                ],
                "points": [
                    {"id": 0, "incident": [0, 1]},
                    {"id": 1, "incident": [1, 2]},
                ],
            }
        )
    )
    code, _, err = run(capsys, "disc", str(path))
    assert code == 1
    assert "error:" in err


def test_blowdown_accepts_basic_placement(tmp_path, capsys):
    graph = write_graph(tmp_path, "w000.json")
    placement = tmp_path / "basic.json"
    placement.write_text(
        json.dumps(
            {"extras": [{"attach": [1, 4]}, {"attach": [2, 5]}, {"attach": [3, 6]}]}
        )
    )
    code, out, _ = run(capsys, "blowdown", str(graph), "--placement", str(placement))
    assert code == 0
    assert "verified: 6 contractions" in out


def test_blowdown_reports_rejection(tmp_path, capsys):
    graph = write_graph(tmp_path, "w000.json")
    placement = tmp_path / "bad.json"
    placement.write_text(json.dumps({"extras": [{"attach": [2, 4]}]}))
    code, out, _ = run(capsys, "blowdown", str(graph), "--placement", str(placement))
    assert code == 0
    assert out.startswith("rejected:")


def test_blowdown_json_record_round_trips(tmp_path, capsys):
    graph = write_graph(tmp_path, "w000.json")
    placement = tmp_path / "basic.json"
    placement.write_text(
        json.dumps(
            {"extras": [{"attach": [1, 4]}, {"attach": [2, 5]}, {"attach": [3, 6]}]}
        )
    )
    code, out, _ = run(
        capsys, "blowdown", str(graph), "--placement", str(placement), "--json"
    )
    data = json.loads(out)
    assert data["verified"] is True
    record = data["record"]
    assert len(record["steps"]) == 6
    config_from_dict(record["final"])
    config_from_dict(record["initial"])
    assert all(len(v) == 7 for v in record["pic_basis"].values())


def test_search_reports_verified_placements(tmp_path, capsys):
    graph = write_graph(tmp_path, "w000.json")
    code, out, _ = run(capsys, "search", str(graph))
    assert code == 0
    assert "verified placements: 2" in out


def test_search_no_placements_is_success(tmp_path, capsys):
    graph = write_graph(tmp_path, "w000.json")
    code, out, _ = run(capsys, "search", str(graph), "--extras", "1")
    assert code == 0
    assert "no placements found" in out


def test_sweep_table(capsys):
    code, out, _ = run(capsys, "sweep", "W", "--max", "1")
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith("W")]
    assert len(lines) == 8
    zero = next(l for l in lines if l.split()[1:4] == ["0", "0", "0"])
    assert zero.split()[4:7] == ["2", "2", "true"]
    others = [l for l in lines if l.split()[1:4] != ["0", "0", "0"] and l.split()[1:4] != ["1", "1", "1"]]
    assert all(l.split()[4:7] == ["1", "1", "true"] for l in others)
    assert "0 flagged" in out


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "W", "--max", "0", "--json")
    data = json.loads(out)
    assert len(data) == 1
    assert data[0]["count"] == 2 and data[0]["match"] is True
    assert len(data[0]["subgroups"]) == 2


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "X", "0", "0", "0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_missing_file_is_domain_error(capsys):
    code, _, err = run(capsys, "invariants", "/nonexistent/graph.json")
    assert code == 1
    assert "error:" in err

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from segre_lines.cli import _parse_charts, build_parser, config_from_args, main
from segre_lines.errors import InvalidInput
from segre_lines.generators import circle_config, one_example, random_curve
from segre_lines.lines import clebsch_cubic, fermat_cubic


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--output", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


@pytest.fixture
def files(tmp_path, cstar):
    return {
        "one": _write(tmp_path / "one.json", one_example(3).to_json()),
        "cstar": _write(tmp_path / "cstar.json", cstar.to_json()),
        "fermat": _write(tmp_path / "fermat.json", fermat_cubic().to_json()),
    }


def test_index_first_example(files, tmp_path):
    code, rep = _run(["index", "--input", files["one"]], tmp_path)
    assert code == 0
    assert rep["det"] == "1" and rep["euler"] == 1
    assert rep["seed"] == 42 and rep["status"] == "ok"


def test_verify_all_cstar(files, tmp_path):
    code, rep = _run(["verify-all", "--input", files["cstar"]], tmp_path)
    assert code == 0
    assert (rep["euler"], rep["segre"], rep["welschinger"]) == (-1, -1, -1)
    assert rep["agreement"] is True
    assert rep["det"] == "-64"


def test_nodes_cstar(files, tmp_path):
    code, rep = _run(["nodes", "--input", files["cstar"]], tmp_path)
    assert code == 0
    assert sorted(rep["chord_diagram"]["kinds"]) == ["cross", "cross", "solitary"]
    assert rep["nodes"]["certificate_ok"] is True


def test_wallcross_identical(files, tmp_path):
    code, rep = _run(["wallcross", "--from", files["cstar"], "--to", files["cstar"]], tmp_path)
    assert code == 0
    assert rep["crossings"] == [] and rep["constant"] is True
    assert rep["det_from"] == rep["det_to"] == "-64"


def test_wallcross_first_example_to_cstar(files, tmp_path):
    code, rep = _run(["wallcross", "--from", files["one"], "--to", files["cstar"]], tmp_path)
    assert code == 0
    assert len(rep["crossings"]) % 2 == 1 and rep["consistent"] and rep["parity_ok"]


def test_generate_from_config(tmp_path):
    cfg = _write(tmp_path / "cfg.json", circle_config([[1, 0, 0], [0, 1, 0], [0, 0, 1]]).to_json())
    code, rep = _run(["generate", "--input", cfg], tmp_path)
    assert code == 0
    assert rep["segre_ground_truth"] == -1 and rep["int_BQ"] == 1


def test_generate_random_is_seeded(tmp_path):
    a = _run(["generate", "--n", "3", "--seed", "9"], tmp_path, "a.json")[1]
    b = _run(["generate", "--n", "3", "--seed", "9"], tmp_path, "b.json")[1]
    assert a == b and a["seed"] == 9


def test_segre_and_welschinger_commands(files, tmp_path):
    code, rep = _run(["segre", "--input", files["cstar"]], tmp_path, "s.json")
    assert code == 0 and rep["segre"] == -1
    assert sorted(d["weight"] for d in rep["details"]) == [-1, 1, 1]
    code, rep = _run(["welschinger", "--input", files["cstar"]], tmp_path, "w.json")
    assert code == 0 and rep["welschinger"] == -1


def test_secants_numeric_command(tmp_path):
    path = _write(tmp_path / "c4.json", random_curve(4, np.random.default_rng(1)).to_json())
    code, rep = _run(["secants", "--input", path, "--seed", "3"], tmp_path)
    assert code == 0
    assert rep["secants"]["total_with_multiplicity"] == 6 and rep["secants"]["certificate_ok"]


def test_lines_fermat_byte_identical(files, tmp_path):
    args = ["lines", "--input", files["fermat"], "--seed", "7", "--starts", "100"]
    assert main(args + ["--output", str(tmp_path / "a.json")]) == 0
    assert main(args + ["--output", str(tmp_path / "b.json")]) == 0
    a = (tmp_path / "a.json").read_bytes()
    assert a == (tmp_path / "b.json").read_bytes()
    rep = json.loads(a)
    assert rep["real_lines"] == 3 and rep["signed_count"] == 3 and rep["stable"]
    assert all(r["det"] for r in rep["lines"])


def test_lines_incomplete_exit_3(tmp_path):
    path = _write(tmp_path / "clebsch.json", clebsch_cubic().to_json())
    code, rep = _run(["lines", "--input", path, "--starts", "3", "--max-rounds", "1"], tmp_path)
    assert code == 3
    assert rep["status"] == "error" and rep["error"]["type"] == "IncompleteEnumeration"
    assert rep["stable"] is False


def test_degenerate_exit_2(tmp_path, syz_curve):
    path = _write(tmp_path / "syz.json", syz_curve.to_json())
    code, rep = _run(["index", "--input", path], tmp_path)
    assert code == 2
    assert rep["det"] == "0" and rep["error"]["type"] == "Degenerate"


def test_malformed_json_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": [\n  ,]}')
    code, rep = _run(["index", "--input", str(bad)], tmp_path)
    assert code == 1 and rep is None
    assert "bad.json:2:" in capsys.readouterr().err


def test_missing_input_exit_1(tmp_path):
    assert main(["index"]) == 1
    assert main(["index", "--input", str(tmp_path / "nope.json")]) == 1


def test_usage_error_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_bare_coefficient_rows(tmp_path):
    path = _write(tmp_path / "rows.json", {"p": [[0, 2, 0, 2, 0], [1, 0, 0, 0, -1], [0, 2, 0, -2, 0]]})
    code, rep = _run(["index", "--input", path], tmp_path)
    assert code == 0 and rep["euler"] == -1


def test_pretty_and_compact(files, tmp_path):
    main(["index", "--input", files["one"], "--output", str(tmp_path / "c.json")])
    main(["index", "--input", files["one"], "--pretty", "--output", str(tmp_path / "p.json")])
    compact = (tmp_path / "c.json").read_text()
    pretty = (tmp_path / "p.json").read_text()
    assert "\n" not in compact.rstrip("\n") and "\n  " in pretty
    assert json.loads(compact) == json.loads(pretty)


def test_output_is_atomic(files, tmp_path):
    out = tmp_path / "r.json"
    out.write_text("old")
    main(["index", "--input", files["one"], "--output", str(out)])
    assert json.loads(out.read_text())["euler"] == 1
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".segre-lines-")]


def test_parse_charts():
    assert _parse_charts("1-2,4-3") == ((0, 1), (2, 3))
    with pytest.raises(InvalidInput):
        _parse_charts("1,2")


def test_config_from_args():
    ns = build_parser().parse_args(["lines", "--input", "x", "--seed", "5", "--charts", "1-2", "--threads", "2"])
    cfg = config_from_args(ns)
    assert cfg.seed == cfg.solver.seed == 5
    assert cfg.solver.charts == ((0, 1),) and cfg.solver.threads == 2
    assert cfg.pretty is False


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "segre_lines", "index", "--input", files["one"]],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["det"] == "1"

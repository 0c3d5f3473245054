import io
import json

import numpy as np
import pytest

from qcap import channels as C
from qcap.cli import (CHANNEL_SCHEMA, ExperimentConfig, Report, channel_to_dict, emit_report, main,
                      parse_channel_file, run, write_channel_file)
from qcap.exceptions import FileNotFound, InvalidChannel, SchemaError
from qcap.linalg import random_density_matrix


def _run_main(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


def _write(tmp_path, doc, name="ch.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_parse_depolarizing_file(tmp_path):
    path = str(tmp_path / "dep.json")
    write_channel_file(C.depolarizing(3, 0.4), path)
    ch = parse_channel_file(path)
    assert C.validate(ch).valid and ch.symmetry is not None


def test_parse_rejects_column_sums(tmp_path):
    doc = {"kind": "classical", "dim_in": 2, "dim_out": 2, "matrix": [[0.45, 0.45], [0.45, 0.45]]}
    with pytest.raises(InvalidChannel) as info:
        parse_channel_file(_write(tmp_path, doc))
    assert info.value.residuals["column_sum_residual"] == pytest.approx(0.1)


def test_parse_errors(tmp_path):
    with pytest.raises(FileNotFound):
        parse_channel_file(str(tmp_path / "missing.json"))
    bad = [
        {"kind": "kraus", "dim_in": 2, "dim_out": 2},  # no kraus list
        {"kind": "other", "dim_in": 2, "dim_out": 2},
        {"kind": "classical", "dim_in": 3, "dim_out": 2, "matrix": [[1.0, 0.0], [0.0, 1.0]]},
        {"kind": "classical", "dim_in": 2, "dim_out": 2, "matrix": [[1.0, 0.0], [0.0]]},
        {"kind": "kraus", "dim_in": 2, "dim_out": 2, "kraus": [{"re": [[1, 0], [0, 1]], "extra": 1}]},
    ]
    for i, doc in enumerate(bad):
        with pytest.raises(SchemaError):
            parse_channel_file(_write(tmp_path, doc, f"bad{i}.json"))
    p = tmp_path / "garbage.json"
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        parse_channel_file(str(p))


def test_kraus_file_failing_trace_preservation(tmp_path):
    doc = {"kind": "kraus", "dim_in": 1, "dim_out": 1, "kraus": [{"re": [[0.5]]}]}
    with pytest.raises(InvalidChannel) as info:
        parse_channel_file(_write(tmp_path, doc))
    assert info.value.residuals["tp_residual"] == pytest.approx(0.75)


def test_round_trip_is_apply_equivalent(tmp_path):
    rng = np.random.default_rng(0)
    for ch in [C.random_channel(3, 2, rng, m=2), C.amplitude_damping(0.3), C.bsc(0.2)]:
        path = str(tmp_path / "rt.json")
        write_channel_file(ch, path)
        back = parse_channel_file(path)
        if isinstance(ch, C.ClassicalChannel):
            assert np.abs(back.matrix - ch.matrix).max() <= 1e-12
            continue
        for _ in range(3):
            rho = random_density_matrix(ch.dim_in, rng)
            assert np.abs(C.apply(back, rho) - C.apply(ch, rho)).max() <= 1e-12


def test_schema_is_well_formed():
    import jsonschema
    jsonschema.Draft202012Validator.check_schema(CHANNEL_SCHEMA)
    jsonschema.validate(channel_to_dict(C.depolarizing(2, 0.5)), CHANNEL_SCHEMA)


def test_capacity_classical_from_file(tmp_path, capsys):
    path = str(tmp_path / "bsc.json")
    write_channel_file(C.bsc(0.1), path)
    code, out = _run_main(["capacity", "--kind", "classical", "--channel", path], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["value"] == pytest.approx(0.368064, abs=1e-6)
    assert doc["command"]["kind"] == "classical" and "seed" in doc["provenance"]
    assert "wall_time_s" not in doc["provenance"]


def test_curve_csv_classical_identity(capsys):
    code, out = _run_main(["curve", "--d", "1", "--named", "classical_identity", "--n", "4", "--format", "csv"],
                          capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "q,p,pi_q,f_q,certified"
    assert len(lines) == 10
    for row in lines[1:]:
        assert abs(float(row.split(",")[3]) - np.log(4)) <= 1e-9


def test_qgrid_parsing(capsys):
    code, out = _run_main(["curve", "--named", "bsc", "--eps", "0.1", "--qgrid", "2,4", "8"], capsys)
    doc = json.loads(out)
    assert [s["q"] for s in doc["results"]["curve"]["samples"]] == [2.0, 4.0, 8.0]


def test_validate_command(tmp_path, capsys):
    code, out = _run_main(["validate", "--named", "depolarizing", "--n", "2", "--lam", "0.5"], capsys)
    assert code == 0 and json.loads(out)["results"]["valid"]
    doc = {"kind": "classical", "dim_in": 2, "dim_out": 2, "matrix": [[0.9, 0.0], [0.0, 0.9]]}
    code, out = _run_main(["validate", "--channel", _write(tmp_path, doc)], capsys)
    assert code == 1
    assert json.loads(out)["results"]["residuals"]["column_sum_residual"] == pytest.approx(0.1)


def test_norm_commands(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"re": [[3, 0], [0, -4]]}))
    code, out = _run_main(["norm", "--kind", "schatten", "--p", "2", "--matrix", str(m)], capsys)
    assert code == 0 and json.loads(out)["results"]["value"] == pytest.approx(5)
    code, out = _run_main(["norm", "--kind", "psumming-classical", "--q", "2", "--named", "classical_identity",
                           "--n", "4"], capsys)
    assert json.loads(out)["results"]["value"] == pytest.approx(2)
    code, out = _run_main(["norm", "--kind", "psumming-covariant", "--q", "2", "--named", "identity", "--n", "2"],
                          capsys)
    assert json.loads(out)["results"]["value"] == pytest.approx(np.sqrt(2))
    code, out = _run_main(["norm", "--kind", "one-to-p", "--p", "1.5", "--d", "2", "--named", "identity",
                           "--n", "2", "--restarts", "2"], capsys)
    doc = json.loads(out)
    assert doc["results"]["value"] == pytest.approx(2 ** (1 / 3)) and doc["warnings"]


def test_soft_non_convergence_exit_code(capsys):
    code, out = _run_main(["capacity", "--kind", "classical", "--named", "bsc", "--eps", "0.3", "--max-iters", "1"],
                          capsys)
    # one Blahut-Arimoto step from the uniform law is already optimal for a symmetric channel
    assert code == 0
    code, out = _run_main(["capacity", "--kind", "holevo", "--named", "amplitude_damping", "--gamma", "0.3",
                           "--max-iters", "1", "--restarts", "1"], capsys)
    assert code == 2 and json.loads(out)["warnings"]


def test_error_exit_codes(tmp_path, capsys):
    assert main(["capacity", "--kind", "ea", "--channel", str(tmp_path / "none.json")]) == 1
    assert main(["capacity", "--kind", "classical", "--named", "depolarizing", "--n", "2", "--lam", "0.5"]) == 1
    assert main(["capacity", "--kind", "restricted", "--d", "3", "--named", "identity", "--n", "2"]) == 1
    with pytest.raises(SystemExit) as info:
        main(["norm", "--kind", "bogus"])
    assert info.value.code == 1
    capsys.readouterr()


def test_seed_env_overrides(monkeypatch, capsys):
    monkeypatch.setenv("QCAP_SEED", "7")
    code, out = _run_main(["capacity", "--kind", "ea", "--named", "identity", "--n", "2", "--seed", "3"], capsys)
    prov = json.loads(out)["provenance"]
    assert prov["seed"] == 7 and prov["seed_source"] == "QCAP_SEED"


def test_reports_are_byte_identical(capsys):
    args = ["capacity", "--kind", "holevo", "--named", "depolarizing", "--n", "2", "--lam", "0.5",
            "--restarts", "2"]
    _, a = _run_main(args, capsys)
    _, b = _run_main(args, capsys)
    assert a == b


def test_timing_flag_adds_wall_time(capsys):
    _, out = _run_main(["validate", "--named", "identity", "--n", "2", "--timing"], capsys)
    assert json.loads(out)["provenance"]["wall_time_s"] >= 0


def test_empty_report_is_valid_json():
    buf = io.StringIO()
    emit_report(Report({"command": "none"}, provenance={"seed": 0}), "json", buf)
    doc = json.loads(buf.getvalue())
    assert "results" not in doc and doc["provenance"] == {"seed": 0}


def test_csv_without_curve_and_output_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = main(["capacity", "--kind", "ea", "--named", "identity", "--n", "2", "--format", "csv", "-o", str(out)])
    assert code == 0 and capsys.readouterr().out == ""
    text = out.read_text().splitlines()
    assert text[0] == "key,value" and "value,1.38629436112" in text


def test_export_and_run_api(tmp_path):
    path = str(tmp_path / "e.json")
    assert main(["export", "--named", "depolarizing", "--n", "2", "--lam", "0.25", "-o", path]) == 0
    rep = run(ExperimentConfig(command="capacity", kind="ea", channel=path))
    assert rep.results["value"] == pytest.approx(
        2 * np.log(2) + sum(w * np.log(w) for w in [0.25 + 0.75 / 4] + [0.75 / 4] * 3))


def test_demo_small_n_reports_warning(capsys):
    code, out = _run_main(["demo", "nonadditivity", "--n", "4", "--restarts", "2", "--qgrid", "2,64"], capsys)
    doc = json.loads(out)
    assert code == 0 and not doc["results"]["certified"] and doc["warnings"]


def test_selftest_command(capsys):
    code, out = _run_main(["selftest"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["results"]["passed"]
    assert all("seconds" not in c for c in doc["results"]["checks"])


def test_demo_n16_report(capsys):
    code, out = _run_main(["demo", "nonadditivity", "--n", "16"], capsys)
    res = json.loads(out)["results"]
    assert code == 0 and res["certified"]
    assert res["gap_floor"] == pytest.approx(0.2310, abs=1e-4)
    assert res["capacity_n1"] == pytest.approx(np.log(16), abs=1e-12)
    assert all(f == pytest.approx(np.log(16), abs=1e-9) for f in res["f_q_n1"])

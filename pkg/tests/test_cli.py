import json

import pytest

from dt4series.cli import load_model, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_series_cao_kool_json(capsys):
    code, out = run(capsys, "series", "cao_kool", "--gamma", "g",
                    "--order", "3")
    assert code == 0
    data = json.loads(out)
    assert data["name"] == "cao_kool"
    assert data["coefficients"] == ["1", "-g", "1/2*g^2 + 5/2*g",
                                    "-1/6*g^3 - 5/2*g^2 - 10/3*g"]
    assert data["convention_tags"]["quot_sign"] == 1


def test_series_gamma_zero_is_constant_one(capsys):
    code, out = run(capsys, "series", "cao_kool", "--gamma", "0",
                    "--order", "5")
    data = json.loads(out)
    assert data["coefficients"] == ["1", "0", "0", "0", "0", "0"]


def test_series_csv_format(capsys):
    code, out = run(capsys, "series", "segre", "--gamma", "g", "--rank", "0",
                    "--order", "2", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,coefficient"
    assert lines[1] == '0,"1"'


def test_vfc_hilb_text(capsys):
    code, out = run(capsys, "vfc", "hilb", "--n", "1", "--format", "text")
    assert code == 0
    assert "e^(1,1)" in out and "u[v1,1]" in out


def test_vfc_bracket_agrees_with_closed(capsys):
    _, closed = run(capsys, "vfc", "hilb", "--n", "3")
    _, bracket = run(capsys, "vfc", "hilb", "--n", "3", "--bracket")
    a, b = json.loads(closed), json.loads(bracket)
    assert a["state"] == b["state"]


def test_vfc_quot(capsys):
    code, out = run(capsys, "vfc", "quot", "--n", "2", "--format", "text")
    assert code == 0
    assert "u[f," in out


def test_vfc_cache(tmp_path, capsys):
    code1, out1 = run(capsys, "--cache-dir", str(tmp_path), "vfc", "hilb",
                      "--n", "4")
    code2, out2 = run(capsys, "--cache-dir", str(tmp_path), "vfc", "hilb",
                      "--n", "4", "--verify-cache")
    assert (code1, code2) == (0, 0)
    assert out1 == out2
    assert any(p.name.startswith("class-") for p in tmp_path.iterdir())


def test_verify_pass_and_exit_codes(capsys):
    code, out = run(capsys, "verify", "fuss_catalan")
    assert code == 0
    assert out.startswith("PASS fuss_catalan")


def test_verify_unknown_check(capsys):
    with pytest.raises(KeyError):
        main(["verify", "not_a_check"])


def test_verify_order_override(capsys):
    code, out = run(capsys, "verify", "cao_kool", "--order", "5")
    assert code == 0


def test_bench_emits_table(capsys):
    code, out = run(capsys, "bench", "--orders", "4,8")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "kernel,order,seconds"
    kernels = {ln.split(",")[0] for ln in lines[1:]}
    assert kernels == {"series_mul", "bracket"}


def test_model_file_round_trip(tmp_path, capsys):
    model_doc = {
        "kind": "CY4",
        "labels": ["v1", "v2"],
        "c3": {"v1": 1, "v2": 2},
        "eulerO": 2,
        "classes": [{"rank": 1, "pairing": {"v1": "g", "v2": 0}}],
    }
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model_doc))
    model = load_model(str(path))
    assert model.kind == "CY4"
    assert model.labels == ("v1", "v2")
    code, out = run(capsys, "vfc", "hilb", "--n", "1", "--model", str(path),
                    "--format", "text")
    assert code == 0
    assert "u[v1,1]" in out and "u[v2,1]" in out


def test_model_surface_file(tmp_path):
    doc = {
        "kind": "Surface",
        "labels": ["f"],
        "c1": {"f": 1},
        "pairN": 2,
        "intersect": {"f,f": 0},
        "classes": [{"rank": 1, "pairing": {"f": "g"}}],
    }
    path = tmp_path / "surf.json"
    path.write_text(json.dumps(doc))
    model = load_model(str(path))
    assert model.kind == "Surface"
    assert model.pair_multiplicity == 2
    assert model.is_elliptic()


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code = main(["--out", str(target), "series", "cao_kool", "--order", "2"])
    assert code == 0
    data = json.loads(target.read_text())
    assert data["name"] == "cao_kool"


def test_determinism_across_invocations(capsys):
    _, a = run(capsys, "series", "nekrasov", "--gamma", "g", "--order", "4")
    _, b = run(capsys, "series", "nekrasov", "--gamma", "g", "--order", "4")
    assert a == b

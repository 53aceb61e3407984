import csv
import io
import json

import numpy as np
import pytest

from weylcov import cli
from weylcov.covariant import ab_triangle_classify
from weylcov.samplers import random_kraus
from weylcov.specfile import SpecError, kraus_document, load_channel_spec, parse_channel_spec


def run_json(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def strip_timing(report):
    report = dict(report)
    report.pop("timing", None)
    return report


# -- spec parsing -------------------------------------------------------


def test_parse_families():
    c = parse_channel_spec({"d": 3, "family": {"name": "depolarizing", "lambda": [0.5, 0.0]}})
    assert c.p[0, 0] == pytest.approx(5 / 9)
    c = parse_channel_spec({"d": 6, "family": {"name": "ab", "generators": [[2, 0], [0, 3]], "a": 0.2, "b": 0.3}})
    assert c.is_cp_tp
    c = parse_channel_spec({"d": 2, "phi": [1, 0.2, [0.4, 0], 0]})
    assert np.allclose(c.p.ravel(), [0.4, 0.3, 0.2, 0.1])


@pytest.mark.parametrize(
    "doc, where",
    [
        ({"d": 2, "phi": [1, 1, 1, 1], "p": [1, 0, 0, 0]}, "family/phi/p"),
        ({"d": 2}, "family/phi/p"),
        ({"phi": [1, 1, 1, 1]}, "d"),
        ({"d": 1, "phi": [1]}, "d"),
        ({"d": 2, "phi": [1, 1, 1]}, "phi"),
        ({"d": 2, "phi": [1, 1, 1, "x"]}, "phi[3]"),
        ({"d": 2, "p": [0.5, 0.5, 0.5, 0]}, "p"),
        ({"d": 2, "family": {"name": "nope"}}, "family.name"),
        ({"d": 3, "family": {"name": "dephasing"}}, "family.generator"),
        ({"d": 2, "phi": [1, 1, 1, 1], "extra": 1}, "extra"),
    ],
)
def test_parse_errors(doc, where):
    with pytest.raises(SpecError) as err:
        parse_channel_spec(doc)
    assert err.value.where == where


def test_json_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"d": 2,\n "phi": [1, 1,, 1]}')
    with pytest.raises(SpecError, match="line 2"):
        load_channel_spec(path)


# -- check -------------------------------------------------------------


def test_check_depolarizing(capsys, spec_dir):
    code, rep = run_json(capsys, "check", "--spec", str(spec_dir / "depolarizing_d3_half.json"))
    assert code == 0
    assert rep["flags"] == {"valid_map": True, "cp": True, "tp": True, "contractive": True, "checks_passed": True}
    assert rep["results"]["p"][0][0] == pytest.approx(5 / 9, abs=1e-15)
    assert len(rep["inputs"]["sha256"]) == 64


def test_check_not_cp(capsys, spec_dir):
    code, rep = run_json(capsys, "check", "--spec", str(spec_dir / "depolarizing_d3_not_cp.json"))
    assert code == 0
    assert rep["flags"]["cp"] is False and rep["flags"]["valid_map"] is True
    assert rep["results"]["p"][1][0] == pytest.approx((1 - 1.2) / 9)


def test_check_malformed_exit_1(capsys, tmp_path):
    path = write(tmp_path, "both.json", {"d": 2, "phi": [1, 0, 0, 0], "p": [0.25] * 4})
    assert cli.main(["check", "--spec", path]) == 1
    assert "exactly one" in capsys.readouterr().err


def test_missing_file_and_usage(capsys, tmp_path):
    assert cli.main(["check", "--spec", str(tmp_path / "none.json")]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["check"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 1


def test_every_bundled_spec_checks(capsys, spec_dir):
    specs = sorted(spec_dir.glob("*.json"))
    assert len(specs) >= 5
    for path in specs:
        code, rep = run_json(capsys, "check", "--spec", str(path))
        assert code == 0, path.name
        assert rep["flags"]["checks_passed"]


# -- bound -------------------------------------------------------------


def test_bound_pauli_qubit(capsys, spec_dir):
    code, rep = run_json(capsys, "bound", "--spec", str(spec_dir / "pauli_qubit.json"), "--restarts", "8")
    assert code == 0
    res = rep["results"]
    assert res["equality_attained"] is True
    # phi = (1, 0.2, 0.4, 0) so the bound is sqrt((1 + 0.16)/2)
    assert res["nu2_bound"] == pytest.approx(np.sqrt(0.58))
    assert res["witness"]["match"] is True


def test_bound_depolarizing(capsys, spec_dir):
    code, rep = run_json(capsys, "bound", "--spec", str(spec_dir / "depolarizing_d3_half.json"), "--restarts", "4")
    assert code == 0
    assert rep["results"]["nu2_bound"] == pytest.approx(np.sqrt(0.5))
    assert rep["results"]["equality_attained"] is True
    assert rep["results"]["emax"]["size"] == 8


def test_bound_small_emax(capsys, spec_dir):
    code, rep = run_json(capsys, "bound", "--spec", str(spec_dir / "small_emax_d4.json"), "--restarts", "8")
    assert code == 0
    res = rep["results"]
    assert res["necessary_holds"] is False and res["equality_attained"] is False
    assert sorted(res["emax"]["members"]) == [[0, 1], [0, 3]]
    assert res["witness"] is None


def test_bound_not_cp_notice(capsys, spec_dir):
    code, rep = run_json(capsys, "bound", "--spec", str(spec_dir / "depolarizing_d3_not_cp.json"))
    assert code == 0
    assert "notice" in rep and rep["results"]["nu2_numeric"] is None


# -- mult --------------------------------------------------------------


def test_mult_qubit(capsys, spec_dir):
    spec = str(spec_dir / "depolarizing_d2_half.json")
    code, rep = run_json(capsys, "mult", "--spec", spec, "--other", spec, "--restarts", "8")
    assert code == 0
    assert rep["results"]["multiplicative"] is True
    assert rep["results"]["nu2_tensor"] == pytest.approx(0.625, abs=1e-9)


def test_mult_identity_with_kraus_file(capsys, spec_dir, tmp_path, rng):
    other = write(tmp_path, "omega.json", kraus_document(random_kraus(rng, 2, 3)))
    code, rep = run_json(
        capsys, "mult", "--spec", str(spec_dir / "identity_d3.json"), "--other", other, "--restarts", "8"
    )
    assert code == 0
    assert rep["inputs"]["factor_b_kind"] == "kraus"
    assert rep["results"]["multiplicative"] is True
    assert rep["results"]["nu2_phi"] == pytest.approx(1.0)


def test_mult_depolarizing_pair(capsys, spec_dir):
    spec = str(spec_dir / "depolarizing_d3_half.json")
    code, rep = run_json(capsys, "mult", "--spec", spec, "--other", spec, "--restarts", "4")
    assert code == 0 and rep["results"]["multiplicative"] is True


def test_mult_cap_exit_2(capsys, tmp_path, rng):
    spec = write(tmp_path, "d6.json", {"d": 6, "family": {"name": "depolarizing", "lambda": 0.5}})
    other = write(tmp_path, "omega.json", kraus_document(random_kraus(rng, 7, 1)))
    assert cli.main(["mult", "--spec", spec, "--other", other]) == 2
    assert "cap" in capsys.readouterr().err


def test_mult_bad_kraus_file(capsys, tmp_path, spec_dir):
    other = write(tmp_path, "omega.json", {"dims": [2, 2], "operators": [[[1, 0], [0, 0], [0, 0]]]})
    assert cli.main(["mult", "--spec", str(spec_dir / "identity_d3.json"), "--other", other]) == 1


# -- complement --------------------------------------------------------


@pytest.mark.parametrize("name", ["dephasing_d2.json", "ab_d3_corner_A.json", "depolarizing_d2_half.json"])
def test_complement(capsys, spec_dir, name):
    code, rep = run_json(capsys, "complement", "--spec", str(spec_dir / name), "--samples", "50")
    assert code == 0
    res = rep["results"]
    assert res["spectral_deviation"] <= 1e-10
    assert res["tp_deviation"] <= 1e-10
    assert res["environment_dim"] == {"dephasing_d2.json": 4, "ab_d3_corner_A.json": 9, "depolarizing_d2_half.json": 4}[name]


def test_complement_not_cp_exit_2(capsys, spec_dir):
    assert cli.main(["complement", "--spec", str(spec_dir / "depolarizing_d3_not_cp.json")]) == 2


# -- triangle ----------------------------------------------------------


def test_triangle_csv(capsys):
    assert cli.main(["triangle", "--d", "3", "--step", "0.25"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    corners = {r["corner"]: r for r in rows if r["corner"]}
    assert set(corners) == {"A", "B", "E"}
    assert corners["A"]["region"] == "channel_and_shaded"
    assert float(corners["A"]["a"]) == 0.0 and float(corners["A"]["b"]) == 1.0
    for r in rows:
        assert ab_triangle_classify(3, float(r["a"]), float(r["b"])) == r["region"]
    assert {r["region"] for r in rows} >= {"channel_and_shaded", "not_channel"}


def test_triangle_to_file(tmp_path):
    out = tmp_path / "tri.csv"
    assert cli.main(["triangle", "--d", "2", "--step", "0.5", "--out", str(out)]) == 0
    assert out.read_text().startswith("a,b,corner,region,bound,equality")


def test_triangle_bad_step(capsys):
    assert cli.main(["triangle", "--d", "3", "--step", "0"]) == 2


# -- reproducibility and output -------------------------------------


def test_reports_reproducible(capsys, spec_dir):
    spec = str(spec_dir / "pauli_qubit.json")
    _, first = run_json(capsys, "bound", "--spec", spec, "--restarts", "4", "--seed", "3")
    _, second = run_json(capsys, "bound", "--spec", spec, "--restarts", "4", "--seed", "3")
    assert "timing" in first
    assert json.dumps(strip_timing(first)) == json.dumps(strip_timing(second))
    assert first["command"]["seed"] == 3


def test_out_flag(tmp_path, spec_dir):
    out = tmp_path / "rep.json"
    assert cli.main(["check", "--spec", str(spec_dir / "identity_d3.json"), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["command"]["name"] == "check"


def test_floats_round_trip(capsys, spec_dir):
    c, _ = load_channel_spec(spec_dir / "depolarizing_d3_half.json")
    _, rep = run_json(capsys, "check", "--spec", str(spec_dir / "depolarizing_d3_half.json"))
    p = np.array([complex(*v) for v in rep["results"]["p"]])
    assert np.array_equal(p, c.p.ravel())


def test_acceptance_subset(capsys):
    code, rep = run_json(capsys, "acceptance", "--only", "2", "12")
    assert code == 0
    assert set(rep["results"]) == {"2", "12"}
    assert rep["flags"]["all_passed"] is True
    assert cli.main(["acceptance", "--only", "99"]) == 2

import json
import shutil
import subprocess

import numpy as np
import pytest

from vectk import io
from vectk.approx import approximate_family, approximate_twisted_family
from vectk.cech import U1Cochain, torsion_cocycle
from vectk.cli import main
from vectk.scenarios import builtin_scenario
from vectk.triangulations import boundary_simplex, point, pseudo_projective_plane, suspension


def torsion_space(n):
    return suspension(pseudo_projective_plane(n))
from vectk.vectorial import verify


def write(path, obj):
    io.write_json(path, obj)
    return str(path)


def report(path):
    return json.loads(path.read_text())


def test_fmt_rounds_to_twelve_digits():
    assert io.fmt(1 / 3) == 0.333333333333
    assert io.fmt(-0.0) == 0.0 and str(io.fmt(-1e-300 * 1e-300)) == "0.0"


def test_matrix_encoding_round_trip(rng):
    M = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    np.testing.assert_allclose(io.decode_matrix(io.encode_matrix(M)), M, atol=1e-11)
    np.testing.assert_allclose(io.decode_matrix([[1, 2]]), [[1, 2]])
    assert io.decode_matrix([]).shape == (0, 0)
    with pytest.raises(io.InputError):
        io.decode_matrix([["a"]])


@pytest.mark.parametrize("name", ["flow-s1", "bott-s2", "pauli-torsion"])
def test_bundle_round_trip(name):
    sc = builtin_scenario(name)
    if name == "pauli-torsion":
        E = approximate_twisted_family(sc.family, sc.lambda_max)
    else:
        E = approximate_family(sc.family, sc.lambda_max)
    text = io.dumps(io.bundle_to_dict(E))
    F = io.bundle_from_dict(json.loads(text))
    assert verify(F).passed
    assert io.dumps(io.bundle_to_dict(F)) == text


def test_family_round_trip(tmp_path):
    sc = builtin_scenario("pauli-torsion")
    data = json.loads(io.dumps(io.family_to_dict(sc.family)))
    fam = io.family_from_dict(data)
    for key in sc.family.local_ops:
        np.testing.assert_allclose(fam.local_ops[key], sc.family.local_ops[key], atol=1e-11)
    with pytest.raises(io.InputError):
        io.family_from_dict({"complex": data["complex"], "kind": "twisted", "local_families": {}})


def test_bad_json_is_an_input_error(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(io.InputError):
        io.read_json(p)
    with pytest.raises(io.InputError):
        io.read_json(tmp_path / "missing.json")


@pytest.mark.parametrize("K,degree,expected", [
    (boundary_simplex(4), 3, "Z"),
    (boundary_simplex(3), 3, "0"),
    (boundary_simplex(3), 2, "Z"),
    (torsion_space(3), 3, "Z/3"),
])
def test_cohomology_command(tmp_path, capsys, K, degree, expected):
    path = write(tmp_path / "k.json", K.to_dict())
    out = tmp_path / "r.json"
    assert main(["cohomology", "--complex", path, "--degree", str(degree), "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == expected
    assert report(out)["group"] == expected


def test_rp2_x_s1_cohomology(tmp_path, capsys):
    assert main(["scenario", "pauli-torsion", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["cohomology", "--complex", str(tmp_path / "complex.json"), "--degree", "3"]) == 0
    assert capsys.readouterr().out.strip() == "Z/2"


def test_dd_and_obstruction_commands(tmp_path):
    K = boundary_simplex(4)
    kpath = write(tmp_path / "k.json", K.to_dict())
    zero = write(tmp_path / "zero.json", U1Cochain.zero(K, 2).to_dict())
    assert main(["obstruction", "--complex", kpath, "--cocycle", zero, "--rank", "1"]) == 0
    L = torsion_space(2)
    lpath = write(tmp_path / "l.json", L.to_dict())
    c = write(tmp_path / "c.json", torsion_cocycle(L, 2).to_dict())
    out = tmp_path / "dd.json"
    assert main(["dd", "--complex", lpath, "--cocycle", c, "--out", str(out)]) == 0
    assert report(out)["class"]["order"] == 2
    assert main(["obstruction", "--complex", lpath, "--cocycle", c, "--rank", "3"]) == 1
    out = tmp_path / "ob.json"
    assert main(["obstruction", "--complex", lpath, "--cocycle", c, "--rank", "4", "--out", str(out)]) == 0
    assert report(out)["verdict"] == "Solvable" and report(out)["witness"] is not None


def test_not_a_cocycle_is_an_input_error(tmp_path):
    K = boundary_simplex(3)
    kpath = write(tmp_path / "k.json", K.to_dict())
    bad = write(tmp_path / "c.json", {"degree": 1, "turns": {"0,1": "1/3"}})
    assert main(["dd", "--complex", kpath, "--cocycle", bad]) == 2
    assert main(["obstruction", "--complex", kpath, "--cocycle", bad, "--rank", "2"]) == 2


def test_input_errors_exit_two(tmp_path):
    assert main(["cohomology", "--complex", str(tmp_path / "nope.json"), "--degree", "1"]) == 2
    assert main(["cohomology", "--degree", "1"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["scenario", "flow-s1"]) == 2
    assert main(["cohomology", "--complex", "x", "--degree", "one"]) == 2
    kpath = write(tmp_path / "k.json", point().to_dict())
    assert main(["cohomology", "--complex", kpath, "--degree", "0", "--jobs", "0"]) == 0
    sc_dir = tmp_path / "s"
    main(["scenario", "flow-s1", "--out", str(sc_dir)])
    assert main(["approximate", "--family", str(sc_dir / "family.json"), "--out",
                 str(tmp_path / "b.json"), "--jobs", "0"]) == 2


def test_jobs_from_environment(tmp_path, monkeypatch):
    main(["scenario", "flow-s1", "--out", str(tmp_path)])
    monkeypatch.setenv("VECTK_JOBS", "lots")
    assert main(["approximate", "--family", str(tmp_path / "family.json"), "--out", str(tmp_path / "b.json")]) == 2
    monkeypatch.setenv("VECTK_JOBS", "3")
    assert main(["approximate", "--family", str(tmp_path / "family.json"), "--out", str(tmp_path / "b.json")]) == 0


@pytest.mark.parametrize("name", ["flow-s1", "bott-s2", "point-operator"])
def test_scenario_approximate_verify_index(tmp_path, name, capsys):
    d = tmp_path / name
    assert main(["scenario", name, "--out", str(d)]) == 0
    meta = report(d / "scenario.json")
    assert sorted(p.name for p in d.iterdir()) == sorted(meta["files"])
    rep = tmp_path / "approx.json"
    assert main(["approximate", "--family", str(d / "family.json"), "--lambda-max", str(meta["lambda_max"]),
                 "--out", str(tmp_path / "b.json"), "--report", str(rep)]) == 0
    r = report(rep)
    assert r["index"] == [meta["expected"]["index"]] == [r["index_of_family"]]
    assert r["verification"]["passed"]
    if name == "bott-s2":
        assert r["kernel_chern"] == meta["expected"]["chern"]
    assert main(["verify", "--bundle", str(tmp_path / "b.json")]) == 0
    capsys.readouterr()
    assert main(["index", "--bundle", str(tmp_path / "b.json")]) == 0
    assert capsys.readouterr().out.strip() == str(meta["expected"]["index"])


def test_no_gap_exits_one(tmp_path):
    K = point()
    grid = np.sqrt(np.arange(0, 1, 0.005))
    fam = {"complex": K.to_dict(), "matrices": {"0": io.encode_matrix(np.diag(grid))}}
    path = write(tmp_path / "f.json", fam)
    assert main(["approximate", "--family", path, "--gap-tol", "0.01", "--out", str(tmp_path / "b.json")]) == 1


def test_incompatible_section_exits_one(tmp_path):
    main(["scenario", "pauli-torsion", "--out", str(tmp_path)])
    fam = report(tmp_path / "family.json")
    patch, mats = next(iter(fam["local_families"].items()))
    key = next(k for k in mats if "," in k)
    mats[key] = io.encode_matrix(np.diag([1.0, 2.0]))
    write(tmp_path / "family.json", fam)
    assert main(["approximate", "--family", str(tmp_path / "family.json"), "--out", str(tmp_path / "b.json")]) == 1


def test_corrupted_transition_fails_verification(tmp_path):
    main(["scenario", "bott-s2", "--out", str(tmp_path)])
    main(["approximate", "--family", str(tmp_path / "family.json"), "--lambda-max", "2",
          "--out", str(tmp_path / "b.json")])
    data = report(tmp_path / "b.json")
    key = "0,1|0,1"
    M = io.decode_matrix(data["transitions"][key])
    data["transitions"][key] = io.encode_matrix(1.5 * M)
    write(tmp_path / "b.json", data)
    assert main(["verify", "--bundle", str(tmp_path / "b.json")]) == 1


def test_console_script(tmp_path):
    exe = shutil.which("vectk")
    if exe is None:
        pytest.skip("console script not installed")
    done = subprocess.run([exe, "scenario", "flow-s1", "--out", str(tmp_path)], capture_output=True, text=True)
    assert done.returncode == 0 and (tmp_path / "family.json").exists()

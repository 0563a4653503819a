import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import bell_state, isotropic_sigma1, random_density
from relent import HermitianOp, StateFileError, load_state, pure_state, save_state
from relent.cli import main

LN2 = math.log(2.0)


def _run(*args):
    r = subprocess.run([sys.executable, "-m", "relent.cli", *args],
                       capture_output=True, text=True)
    return r.returncode, r.stdout, r.stderr


def _report_dict(out):
    rows = {}
    for line in out.splitlines():
        if " = " in line:
            key, _, val = line.partition(" = ")
            rows[key] = val
    return rows


def test_round_trip_exact(tmp_path, rng):
    rho = random_density(rng, (2, 3))
    path = tmp_path / "rho.json"
    save_state(path, rho)
    back = load_state(path)
    assert back.dims == rho.dims
    assert np.array_equal(back.mat, rho.mat)


def test_load_schema_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("not json")
    with pytest.raises(StateFileError):
        load_state(p)
    p.write_text(json.dumps({"dims": [2]}))
    with pytest.raises(StateFileError):
        load_state(p)
    p.write_text(json.dumps({"dims": [2], "matrix": [[1, 0], [0, 0], [0, 0]]}))
    with pytest.raises(StateFileError):
        load_state(p)


def test_load_content_errors(tmp_path):
    p = tmp_path / "nonherm.json"
    p.write_text(json.dumps({
        "dims": [2],
        "matrix": [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
    }))
    with pytest.raises(Exception):
        load_state(p)


def test_cli_relent_reference(tmp_path):
    pa = tmp_path / "phi.json"
    pb = tmp_path / "sig.json"
    save_state(pa, bell_state())
    save_state(pb, isotropic_sigma1())
    rc, out, _ = _run("relent", str(pa), str(pb))
    assert rc == 0
    rows = _report_dict(out)
    assert abs(float(rows["value"]) - LN2) <= 1e-12
    assert rows["support_ok"] == "true"


def test_cli_relent_infinite(tmp_path):
    pa = tmp_path / "x.json"
    pb = tmp_path / "y.json"
    save_state(pa, HermitianOp((2,), np.diag([0.5, 0.5]).astype(complex)))
    save_state(pb, HermitianOp((2,), np.diag([1.0, 0.0]).astype(complex)))
    rc, out, _ = _run("relent", str(pa), str(pb))
    assert rc == 0
    rows = _report_dict(out)
    assert rows["value"] == "+inf"
    assert rows["support_ok"] == "false"


def test_cli_measure_product_state(tmp_path):
    p = tmp_path / "prod.json"
    save_state(p, pure_state(np.kron([1, 0], [0, 1]), (2, 2)))
    rc, out, _ = _run("measure", str(p), "--set", "sep", "--split", "0",
                      "--tol", "1e-5")
    assert rc == 0
    rows = _report_dict(out)
    assert float(rows["upper"]) <= 1e-6
    assert rows["converged"] == "true"


def test_cli_measure_dump_round_trip(tmp_path):
    p = tmp_path / "phi.json"
    d = tmp_path / "min.json"
    save_state(p, bell_state())
    rc, out, _ = _run("measure", str(p), "--set", "ppt", "--split", "0",
                      "--tol", "1e-5", "--dump", str(d))
    assert rc == 0
    mini = load_state(d)
    save_state(tmp_path / "min2.json", mini)
    assert (tmp_path / "min2.json").read_bytes() == d.read_bytes()


def test_cli_determinism(tmp_path):
    p = tmp_path / "phi.json"
    save_state(p, bell_state())
    args = ("measure", str(p), "--set", "sep", "--split", "0", "--seed", "11",
            "--tol", "1e-4")
    _, out1, _ = _run(*args)
    _, out2, _ = _run(*args)
    strip = lambda s: "\n".join(l for l in s.splitlines()
                                if not l.startswith("wall_time_s"))
    assert strip(out1) == strip(out2)


def test_cli_bound_matches_library(tmp_path):
    from relent import BoundRequest, OscillatorSpec, bipartite_bound_oscillator

    rc, out, _ = _run("bound", "bipartite", "--eps", "0.01", "--energy", "10",
                      "--modes", "1", "--freqs", "1", "--d0", "2")
    assert rc == 0
    rows = _report_dict(out)
    value, t_star = bipartite_bound_oscillator(
        BoundRequest(eps=0.01, energy=10.0, d0=2), OscillatorSpec(1, (1.0,)))
    assert float(rows["value"]) == value
    assert float(rows["t_star"]) == t_star


def test_cli_bound_sweep_csv():
    rc, out, _ = _run("bound", "bipartite", "--eps", "0.01", "--energy", "5",
                      "--modes", "1", "--freqs", "1",
                      "--sweep", "eps=1e-3:1e-1:5")
    assert rc == 0
    lines = out.splitlines()
    idx = lines.index("eps,value,t_star")
    data = lines[idx + 1: idx + 6]
    assert len(data) == 5
    for row in data:
        eps_s, val_s, t_s = row.split(",")
        float(eps_s), float(val_s), float(t_s)


def test_cli_multipartite_bound():
    rc, out, _ = _run("bound", "multipartite", "--eps", "0.1", "--energy", "2",
                      "--m", "3", "--s", "2", "--modes", "1", "--freqs", "1")
    assert rc == 0
    rows = _report_dict(out)
    assert float(rows["value"]) > 0
    assert "value_sqrt" in rows


def test_cli_witness(tmp_path):
    p = tmp_path / "phi.json"
    save_state(p, bell_state())
    rc, out, _ = _run("witness", str(p))
    assert rc == 0
    rows = _report_dict(out)
    assert abs(float(rows["value"]) - LN2) <= 1e-12


def test_cli_nongauss(tmp_path):
    c = 16
    m = np.zeros((c, c), dtype=complex)
    m[1, 1] = 1.0
    p = tmp_path / "fock1.json"
    save_state(p, HermitianOp((c,), m))
    rc, out, _ = _run("nongauss", str(p), "--modes", "1", "--cutoff", str(c))
    assert rc == 0
    rows = _report_dict(out)
    assert abs(float(rows["value"]) - 2 * LN2) <= 1e-9


def test_cli_measure_pisep_and_rains(tmp_path, rng):
    p = tmp_path / "ghz.json"
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / np.sqrt(2)
    save_state(p, pure_state(ghz, (2, 2, 2)))
    rc, out, _ = _run("measure", str(p), "--set", "pisep",
                      "--partitions", "0|1|2", "--tol", "1e-3",
                      "--max-iters", "150")
    assert rc in (0, 4)
    rows = _report_dict(out)
    assert abs(float(rows["upper"]) - LN2) <= 1e-2  # fully separable distance of GHZ

    q = tmp_path / "phi.json"
    save_state(q, bell_state())
    rc, out, _ = _run("measure", str(q), "--set", "rains", "--split", "0",
                      "--tol", "1e-4")
    assert rc in (0, 4)
    rows = _report_dict(out)
    assert abs(float(rows["upper"]) - LN2) <= 1e-2


def test_cli_witness_rejects_mixed(tmp_path, rng):
    p = tmp_path / "mixed.json"
    save_state(p, random_density(rng, (2, 2)))
    rc, _, _ = _run("witness", str(p))
    assert rc == 3


def test_cli_certify(tmp_path):
    p = tmp_path / "phi.json"
    save_state(p, bell_state())
    rc, out, _ = _run("certify", str(p), "--set", "ppt", "--split", "0",
                      "--tol", "1e-3", "--eps", "1e-4")
    rows = _report_dict(out)
    assert rc in (0, 4)
    assert float(rows["bound"]) >= LN2 - 5e-2


def test_cli_exit_codes(tmp_path):
    # usage error
    rc, _, _ = _run("measure")
    assert rc == 2
    # malformed file
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    rc, _, err = _run("relent", str(bad), str(bad))
    assert rc == 2
    # numeric rejection: non-PSD input into the gaussian path
    neg = tmp_path / "neg.json"
    save_state(neg, HermitianOp((4,), np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)))
    rc, _, err = _run("nongauss", str(neg), "--modes", "1", "--cutoff", "4")
    assert rc == 3


def test_cli_json_block(tmp_path):
    p = tmp_path / "phi.json"
    save_state(p, bell_state())
    rc, out, _ = _run("--json", "relent", str(p), str(p))
    assert rc == 0
    marker = out.index("--- machine ---")
    block = json.loads(out[marker + len("--- machine ---"):])
    assert "value" in block


def test_main_callable(tmp_path):
    p = tmp_path / "phi.json"
    save_state(p, bell_state())
    assert main(["relent", str(p), str(p)]) == 0

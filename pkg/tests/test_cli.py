import csv
import io
import json
import math

import numpy as np
import pytest

from circdens import cli
from circdens import semiclassical as sc


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        else:
            lines.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    return meta, rows


def test_density_two_particles(capsys):
    code, out, _ = run(capsys, "density", "--N", "2", "--grid", "2")
    assert code == 0
    meta, rows = parse_csv(out)
    assert len(rows) == 2
    assert float(rows[1]["r"]) == 1.0
    assert float(rows[1]["rho_quantum"]) == 0.0
    assert json.loads(meta["N"]) == 2


def test_open_shell_exit_code(capsys):
    code, out, err = run(capsys, "density", "--N", "8", "--grid", "4")
    assert code == 2
    assert out == ""
    assert "6, 10" in err


def test_overlap_exit_code(capsys):
    code, _, err = run(capsys, "density", "--N", "606", "--grid", "4", "--method", "semiclassical", "--tangent-pairs")
    assert code == 3
    assert "(4,1)" in err


def test_invalid_class_exit_code(capsys):
    code, _, err = run(capsys, "orbits", "--v", "3", "--w", "2")
    assert code == 2
    assert err.startswith("error:")


def test_bad_grid_exit_code(capsys):
    assert run(capsys, "density", "--N", "2", "--grid", "1")[0] == 2


def test_json_round_trip_bit_exact(capsys):
    code, out, _ = run(capsys, "density", "--N", "68", "--grid", "41", "--method", "both", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    cols = doc["columns"]
    assert cols == ["r", "rho_quantum", "delta_rho_quantum", "delta_rho_semiclassical"]
    r = np.array([row[0] for row in doc["rows"]])
    expected = sc.delta_profile(r, 68)
    got = np.array([row[3] for row in doc["rows"]])
    assert np.array_equal(got, expected)


def test_csv_round_trip_bit_exact(capsys):
    code, out, _ = run(capsys, "density", "--N", "68", "--grid", "17", "--method", "semiclassical")
    _, rows = parse_csv(out)
    r = np.array([float(row["r"]) for row in rows])
    got = np.array([float(row["delta_rho_semiclassical"]) for row in rows])
    assert np.array_equal(got, sc.delta_profile(r, 68))


def test_deterministic_modulo_timestamp(tmp_path, capsys):
    files = []
    for i in range(2):
        path = tmp_path / f"out{i}.csv"
        assert run(capsys, "density", "--N", "68", "--grid", "30", "--method", "both", "--out", str(path))[0] == 0
        files.append([line for line in path.read_text().splitlines() if not line.startswith("# generated")])
    assert files[0] == files[1]


def test_tau_truncation_metadata(capsys, p606):
    code, out, _ = run(capsys, "density", "--N", "606", "--grid", "800", "--method", "semiclassical",
                       "--channels", "tau", "--format", "json")
    doc = json.loads(out)
    meta = doc["meta"]
    assert meta["kinetic_truncated_above"] == pytest.approx(1 - 1 / p606)
    col = doc["columns"].index("delta_tau_semiclassical")
    flagged = [row[col] is None for row in doc["rows"]]
    beyond = [row[0] > 1 - 1 / p606 for row in doc["rows"]]
    assert flagged == beyond and any(beyond)
    assert meta["truncation"]["k_max_radial"] == 2
    assert meta["p_lambda"] == p606


def test_density_all_channels(capsys):
    code, out, _ = run(capsys, "density", "--N", "68", "--grid", "5", "--channels", "rho,tau,tau1,xi", "--method", "both")
    assert code == 0
    _, rows = parse_csv(out)
    assert {"tau1_quantum", "delta_xi_semiclassical"} <= set(rows[0])


def test_unknown_channel(capsys):
    assert run(capsys, "density", "--N", "2", "--grid", "3", "--channels", "nu")[0] == 2


def test_shells_skips_open_shells(capsys):
    code, out, _ = run(capsys, "shells", "--nmin", "2", "--nmax", "12")
    meta, rows = parse_csv(out)
    assert [int(row["N"]) for row in rows] == [2, 6, 10, 12]
    assert "skipped_open_shell" in meta


def test_shells_diameter_only(capsys):
    code, out, _ = run(capsys, "shells", "--nmin", "600", "--nmax", "610", "--vmax", "2", "--wmax", "1")
    _, rows = parse_csv(out)
    row = [r for r in rows if r["N"] == "606"][0]
    assert float(row["dE_semiclassical"]) == sc.shell_correction_semiclassical(606, 2, 1)


def test_orbit_sweep_triangle_jacobian_zeros(capsys):
    code, out, _ = run(capsys, "orbits", "--v", "3", "--w", "1", "--rmin", "0.2", "--rmax", "0.7", "--steps", "501")
    _, rows = parse_csv(out)
    npo = [(float(r["r"]), float(r["jacobian"])) for r in rows if r["orbit"] == "NPO(3,1)"]
    rr = np.array([a for a, _ in npo])
    jj = np.array([b for _, b in npo])
    crossings = rr[1:][np.sign(jj[1:]) != np.sign(jj[:-1])]
    dr = 0.5 / 500
    assert len(crossings) == 2
    assert abs(crossings[0] - 1 / 3) <= dr and abs(crossings[1] - 0.5) <= dr


def test_orbit_sweep_tangent_pair(capsys):
    code, out, _ = run(capsys, "orbits", "--v", "4", "--w", "1", "--rmin", "0.67", "--rmax", "0.70", "--steps", "301")
    _, rows = parse_csv(out)
    first = min(float(r["r"]) for r in rows if r["orbit"].startswith("NPO"))
    assert abs(first - 0.6824976) <= 1e-4
    assert {r["branch"] for r in rows if r["orbit"].startswith("NPO")} == {"plain", "primed"}


def test_orbit_sweep_bowtie_near_centre(capsys):
    code, out, _ = run(capsys, "orbits", "--v", "2", "--w", "1", "--rmin", "1e-4", "--rmax", "1e-3", "--steps", "3")
    _, rows = parse_csv(out)
    npo = [float(r["length"]) for r in rows if r["orbit"] == "NPO(2,1)"]
    assert npo and all(abs(x - 4.0) < 1e-5 for x in npo)


def test_orbit_catalogue(capsys):
    code, out, _ = run(capsys, "orbits", "--r", "0.5", "--lmax", "5.0", "--format", "json")
    doc = json.loads(out)
    names = {row[doc["columns"].index("orbit")] for row in doc["rows"]}
    assert {"L+(0)", "L-(0)", "NPO(2,1)"} <= names


def test_bifurcations(capsys):
    code, out, _ = run(capsys, "bifurcations", "--vmax", "4", "--wmax", "1", "--steps", "5", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert {row[1] for row in doc["rows"]} == {2, 3, 4}


def test_fmt_seventeen_digits():
    assert cli._fmt(math.pi) == "3.1415926535897931"
    assert float(cli._fmt(0.1 + 0.2)) == 0.1 + 0.2


def test_small_n_overlap_is_validity_error(capsys):
    # at N = 12 the (3,1) bifurcations are closer than hbar in action
    assert run(capsys, "density", "--N", "12", "--grid", "5", "--method", "semiclassical")[0] == 3

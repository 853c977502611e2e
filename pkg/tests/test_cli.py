import json
import math

import pytest

from hemidefense.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(out):
    return dict(line.split(": ", 1) for line in out.strip().splitlines())


def test_solve_aligned(capsys):
    code, out, _ = run(capsys, "solve", "--psi", "0", "--phi", "0.9424778", "--r", "2", "--radius", "1", "--nu", "1")
    assert code == 0
    vals = parse(out)
    assert float(vals["theta_rel"]) == pytest.approx(0.0, abs=1e-12)
    assert float(vals["beta_star"]) == pytest.approx(1.5707963, abs=1e-7)
    for key in ("theta_abs", "B", "tau_D", "tau_A", "p", "residual_beta", "residual_theta", "iterations"):
        assert key in vals


def test_solve_nominal_state_phi_pi(capsys):
    code, out, _ = run(capsys, "solve", "--psi", "0.9", "--phi-pi", "0.3", "--r", "2", "--json")
    assert code == 0
    rec = json.loads(out)
    assert rec["theta_rel"] == pytest.approx(1.2123183651216, abs=1e-12)
    assert rec["beta_star"] == pytest.approx(0.9733751727623793, abs=1e-12)
    assert rec["p"] == pytest.approx(rec["tau_D"] - rec["tau_A"])


def test_solve_rejects_inside(capsys):
    code, _, err = run(capsys, "solve", "--psi", "0.9", "--phi", "0.3", "--r", "0.5", "--radius", "1")
    assert code == 1 and "perimeter" in err


def test_solve_singular_is_failure(capsys):
    code, _, err = run(capsys, "solve", "--psi", "0", "--phi", "0", "--r", "2")
    assert code == 2 and "error" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve", "--psi", "x"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["fly"])
    assert info.value.code == 1


def test_simulate_default(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--out", str(tmp_path))
    assert code == 0 and "winner=intruder" in out
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert set(manifest["files"]) == {"trajectory.csv", "result.json", "config.json", "manifest.json"}
    for name in manifest["files"]:
        assert (tmp_path / name).exists()
    assert manifest["seed"] == 0 and manifest["duration_s"] >= 0 and manifest["version"]


def test_simulate_comparative_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dl": 1.36, "dl_prime": 0.36, "mode": "until_defender_arrives"}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0 and "winner=defender" in out and "l_s=" in out


def test_simulate_timeout(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"max_ticks": 1}')
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0 and "winner=timeout" in out


@pytest.mark.parametrize("text,needle", [('{"bogus": 1}', "bogus"), ('{"R": -1}', "R:"), ("[1]", "object"), ("{", "JSON")])
def test_simulate_bad_config(tmp_path, capsys, text, needle):
    cfg = tmp_path / "c.json"
    cfg.write_text(text)
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 1 and needle in err


def test_simulate_missing_config(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path))
    assert code == 1 and "cannot read" in err


def test_simulate_echo_reproduces(tmp_path, capsys):
    run(capsys, "simulate", "--dynamics", "second-order", "--out", str(tmp_path / "a"))
    run(capsys, "simulate", "--config", str(tmp_path / "a" / "config.json"), "--out", str(tmp_path / "b"))
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_sweep_proportional_constant_column(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--dynamics", "ideal", "--step-scaling", "proportional", "--trials", "1",
                     "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()[1:]
    vals = [float(r.split(",")[-1]) for r in rows]
    assert len(vals) == 22
    assert max(vals) - min(vals) <= 1e-9 * max(vals)


def test_sweep_config_round_trip(tmp_path, capsys):
    run(capsys, "sweep", "--radii", "3,10", "--trials", "2", "--seed", "4", "--out", str(tmp_path / "a"))
    echo = json.loads((tmp_path / "a" / "config.json").read_text())
    assert echo["seed"] == 4 and echo["radii"] == [3.0, 10.0]
    run(capsys, "sweep", "--config", str(tmp_path / "a" / "config.json"), "--out", str(tmp_path / "b"))
    for name in ("sweep.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text('{"radii": [3], "trails_per_radius": 2}')
    code, _, err = run(capsys, "sweep", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 1 and "trails_per_radius" in err


def test_sweep_all_failed_exit_code(tmp_path, capsys, monkeypatch):
    import hemidefense.experiments as X
    from hemidefense.exceptions import SimulationError

    def boom(cfg, record_trajectory=True):
        raise SimulationError("no", 0)

    monkeypatch.setattr(X, "run_game", boom)
    code, _, _ = run(capsys, "sweep", "--radii", "3", "--trials", "1", "--out", str(tmp_path))
    assert code == 2


def test_compare_ideal(tmp_path, capsys):
    code, out, _ = run(capsys, "compare", "--trials", "7", "--dynamics", "ideal", "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "compare.csv").read_text().splitlines()
    assert rows[0] == "trial,strategy,winner,t_f,l_s,l_s_over_R,psi0,phi0,r0"
    assert len(rows) == 1 + 14
    assert all(",defender," in r for r in rows[1:])


def test_compare_second_order_uses_wide_landing(tmp_path, capsys):
    code, _, _ = run(capsys, "compare", "--trials", "2", "--dynamics", "second-order", "--out", str(tmp_path))
    assert code == 0
    echo = json.loads((tmp_path / "config.json").read_text())
    assert echo["base_config"]["eps_aim"] == pytest.approx(math.pi)
    assert echo["base_config"]["dynamics_defender"]["kind"] == "second_order"


def test_default_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(capsys, "simulate", "--seed", "11")
    assert code == 0
    made = list((tmp_path / "runs").iterdir())
    assert len(made) == 1 and made[0].name.startswith("simulate-seed11-")


def test_full_precision_output(tmp_path, capsys):
    run(capsys, "simulate", "--out", str(tmp_path))
    row = (tmp_path / "trajectory.csv").read_text().splitlines()[1].split(",")
    assert float(row[2]) == 10 * math.cos(0.3 * math.pi)

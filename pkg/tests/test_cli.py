import json

import pytest

from sllab.cli import main


def _cfg(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


class TestValidate:
    def test_good_config(self, tmp_path, capsys):
        p = _cfg(tmp_path, {"experiment": "free_packet"})
        assert main(["validate", p]) == 0
        assert "free_packet" in capsys.readouterr().out

    def test_unknown_key_exit_2(self, tmp_path, capsys):
        p = _cfg(tmp_path, {"experiment": "free_packet",
                            "params": {"wobble": 1}})
        assert main(["validate", p]) == 2
        assert "wobble" in capsys.readouterr().err

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["validate", str(tmp_path / "nope.json")]) == 2


class TestRun:
    def test_run_ok(self, tmp_path, capsys):
        p = _cfg(tmp_path, {"experiment": "contextuality",
                            "params": {"fixture": "pr_box"}})
        out = tmp_path / "out"
        assert main(["run", p, "--out", str(out)]) == 0
        assert (out / "summary.json").is_file()
        assert "[pass]" in capsys.readouterr().out

    def test_run_numeric_abort_exit_3(self, tmp_path, capsys):
        p = _cfg(tmp_path, {"experiment": "measurement", "seed": 0,
                            "params": {"n_traj": 50, "coupling": 0.0,
                                       "kinds": ["bohmian"]}})
        out = tmp_path / "out"
        assert main(["run", p, "--out", str(out)]) == 3
        assert (out / "abort.json").is_file()

    def test_run_bad_config_exit_2(self, tmp_path):
        p = _cfg(tmp_path, {"experiment": "nope"})
        assert main(["run", p, "--out", str(tmp_path / "o")]) == 2

    def test_seed_override(self, tmp_path):
        p = _cfg(tmp_path, {"experiment": "relaxation", "seed": 1,
                            "params": {"n_traj": 300, "t_final": 0.5,
                                       "n": 64, "dt": 0.002}})
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["run", p, "--out", str(out_a)]) in (0, 4)
        assert main(["run", p, "--out", str(out_b), "--seed", "2"]) in (0, 4)
        ma = json.loads((out_a / "manifest.json").read_text())
        mb = json.loads((out_b / "manifest.json").read_text())
        assert ma["config"]["seed"] == 1
        assert mb["config"]["seed"] == 2
        assert ma["config_hash"] != mb["config_hash"]


class TestFixtures:
    def test_list(self, capsys):
        assert main(["fixtures", "list"]) == 0
        out = capsys.readouterr().out
        assert "pr_box" in out
        assert "singlet_chsh" in out


class TestReport:
    def test_report_verifies(self, tmp_path, capsys):
        p = _cfg(tmp_path, {"experiment": "contextuality",
                            "params": {"fixture": "hardy"}})
        out = tmp_path / "out"
        main(["run", p, "--out", str(out)])
        assert main(["report", str(out)]) == 0
        assert "verified" in capsys.readouterr().out

    def test_report_detects_tamper(self, tmp_path, capsys):
        p = _cfg(tmp_path, {"experiment": "contextuality",
                            "params": {"fixture": "hardy"}})
        out = tmp_path / "out"
        main(["run", p, "--out", str(out)])
        (out / "analysis.json").write_text("{}")
        assert main(["report", str(out)]) == 4
        assert "mismatch" in capsys.readouterr().out

    def test_report_missing_dir(self, tmp_path):
        assert main(["report", str(tmp_path / "nope")]) == 2


class TestThreads:
    def test_invalid_thread_count(self):
        with pytest.raises(SystemExit):
            main(["--threads", "zero", "fixtures", "list"])

import pytest

from globalca.cli import Config, main, read_config
from globalca.complexity import Thresholds


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_rules(capsys):
    code, out, _ = run(capsys, "rules")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "rule,class" and len(lines) == 89
    assert "110,4" in lines and "0,1" in lines


def test_step(capsys, tmp_path):
    code, out, _ = run(capsys, "step", "--rule", "30", "--init", "0001000", "--steps", "2")
    assert code == 0
    assert out.splitlines() == ["0001000", "0011100", "0110010"]
    code, out, _ = run(capsys, "step", "--rule", "110", "--init-index", "1", "--steps", "60",
                       "--out", str(tmp_path / "g"))
    assert code == 0 and len(out.splitlines()) == 61
    assert (tmp_path / "g.ppm").read_text().startswith("P3\n26 61\n")


def test_compose(capsys):
    code, out, _ = run(capsys, "compose", "--eps", "30", "--eps-prime", "30", "--gr", "1")
    assert code == 0
    assert out.splitlines() == ["table=012110202100000000200000000", "conflict=0"]
    code, out, err = run(capsys, "compose", "--eps", "1", "--eps-prime", "1", "--gr", "1", "--strict")
    assert code == 2 and "conflict" in err.lower()


def test_run_deterministic(capsys):
    argv = ("run", "--eps", "30", "--eps-prime", "110", "--gr", "36983", "--init-index", "1")
    code, first, _ = run(capsys, *argv)
    assert code == 0
    assert first.splitlines() == ["gr_index,eps,eps_prime,init_index,score,class,conflict",
                                  "36983,30,110,1,413,3,0"]
    assert run(capsys, *argv)[1] == first


def test_isolated(capsys):
    code, out, _ = run(capsys, "isolated", "--rule", "110", "--init-index", "1")
    assert code == 0 and out.splitlines()[1] == "0,110,110,1,231,4,0"


def test_debruijn(capsys):
    code, out, _ = run(capsys, "debruijn", "--order", "3", "--alphabet", "3", "--count", "100", "--width", "26")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 100
    assert all(len(line) == 26 and set(line) <= set("012") for line in lines)
    assert len(set(lines)) == 100
    code, out, _ = run(capsys, "debruijn", "--order", "2", "--alphabet", "2", "--count", "1")
    assert out == "0011\n"
    code, _, err = run(capsys, "debruijn", "--order", "3", "--alphabet", "2", "--count", "5")
    assert code == 2


def test_calibrate(capsys, tmp_path):
    out_path = tmp_path / "th.txt"
    code, out, _ = run(capsys, "calibrate", "--out", str(out_path), "--inits", "5")
    assert code == 0
    th = Thresholds.load(out_path)
    assert th.provenance["inits"] == "5" and out == th.dumps()


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "compose", "--eps", "30")[0] == 1
    assert run(capsys, "run", "--eps", "0", "--eps-prime", "0", "--gr", "1", "--init-index", "0")[0] == 1
    assert run(capsys, "rules", "--steps", "-1")[0] == 1
    code, _, err = run(capsys, "compose", "--eps", "300", "--eps-prime", "0", "--gr", "1")
    assert code == 2 and err.startswith("globalca:") and len(err.splitlines()) == 1


def test_io_error(capsys, tmp_path):
    assert run(capsys, "aggregate", "--in", str(tmp_path / "nowhere"))[0] == 3
    assert run(capsys, "rules", "--config", str(tmp_path / "missing.cfg"))[0] == 3


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# settings\nwidth = 30\nstrict_conflicts = true\n")
    cfg = read_config(path)
    assert cfg.width == 30 and cfg.strict_conflicts and cfg.steps == 60
    path.write_text("colour=blue\n")
    with pytest.raises(Exception, match="colour"):
        read_config(path)
    assert read_config(path, ignore_unknown=True) == Config()


def test_sweep_resume_and_aggregate(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "out"
    cfg.write_text(f"init_count=50\noutput_dir={tmp_path / 'ignored'}\n")
    argv = ("sweep", "--config", str(cfg), "--grs", "7,8", "--inits", "1", "--out", str(out))
    code, text, _ = run(capsys, *argv)
    assert code == 0
    assert "executions=7832" in text and "shards_written=2" in text
    echoed = (out / "config.txt").read_text()
    assert "init_count=1" in echoed and "grs_spec=7,8" in echoed
    assert not (tmp_path / "ignored").exists()

    code, _, err = run(capsys, *argv)
    assert code == 2 and "--resume" in err
    code, text, _ = run(capsys, *argv, "--resume")
    assert code == 0 and "executions=0" in text

    csv_path, svg_path = tmp_path / "maps.csv", tmp_path / "maps.svg"
    code, text, _ = run(capsys, "aggregate", "--in", str(out), "--out-csv", str(csv_path),
                        "--out-svg", str(svg_path))
    assert code == 0
    assert "records=7832" in text
    assert len(csv_path.read_text().splitlines()) == 65
    assert svg_path.read_text().startswith("<svg")
    code, text, _ = run(capsys, "aggregate", "--in", str(out), "--measured")
    assert code == 0 and "records=7832" in text

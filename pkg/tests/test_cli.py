import json
import subprocess
import sys

import numpy as np
import pytest

from sqbench.audio import read_wav, write_wav
from sqbench.cli import build_parser, main
from sqbench.config import ConfigError, load_config
from sqbench.experiment import REPORT_FILES, load_manifest


@pytest.fixture(scope="module")
def pair(reference_8k, tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_wav(reference_8k, d / "ref.wav")
    write_wav(reference_8k.with_samples(reference_8k.samples[::-1]), d / "talker.wav")
    return d


def test_help_for_every_subcommand(capsys):
    for cmd in ("degrade", "score", "run", "analyze", "gen-noise"):
        with pytest.raises(SystemExit) as e:
            main([cmd, "--help"])
        assert e.value.code == 0
    assert "degrade" in build_parser().format_help()


def test_degrade_prints_snr_and_is_deterministic(pair, capsys):
    args = ["degrade", str(pair / "ref.wav"), "--noise", "pink", "--snr", "0", "--seed", "4"]
    assert main(args + ["--out", str(pair / "d1.wav")]) == 0
    snr = float(capsys.readouterr().out.strip().split("=")[1])
    assert abs(snr) <= 0.1
    assert main(args + ["--out", str(pair / "d2.wav")]) == 0
    assert (pair / "d1.wav").read_bytes() == (pair / "d2.wav").read_bytes()
    assert (pair / "d1_ref.wav").exists()


def test_degrade_babble_needs_pool(pair, capsys):
    base = ["degrade", str(pair / "ref.wav"), "--noise", "babble", "--snr", "5", "--out", str(pair / "b.wav")]
    assert main(base) == 2
    assert main(base + ["--babble-pool", str(pair / "ref.wav"), str(pair / "talker.wav")]) == 0


def test_missing_input_exits_2(tmp_path, capsys):
    missing = tmp_path / "nothere.wav"
    assert main(["degrade", str(missing), "--noise", "pink", "--snr", "0", "--out", str(tmp_path / "o.wav")]) == 2
    assert str(missing) in capsys.readouterr().err


def test_score_commands(pair, capsys):
    ref = str(pair / "ref.wav")
    assert main(["score", ref, ref]) == 0
    assert float(capsys.readouterr().out) >= 4.5
    assert main(["score", ref, ref, "--metric", "pesq"]) == 2
    err = capsys.readouterr().err
    assert "nsim" in err and "disturbance" in err
    assert main(["score", ref, ref, "--external", "echo 3.2"]) == 0
    assert capsys.readouterr().out.strip() == "3.2"
    assert main(["score", ref, ref, "--external", "false"]) == 1


def test_gen_noise(tmp_path):
    out = tmp_path / "n.wav"
    assert main(["gen-noise", "pink", "--duration", "1", "--seed", "3", "--out", str(out)]) == 0
    buf = read_wav(out)
    assert len(buf) == 8000
    assert 20 * np.log10(np.sqrt(np.mean(buf.samples ** 2))) == pytest.approx(-26.0, abs=0.01)


def test_seed_from_environment(pair, monkeypatch, capsys):
    base = ["degrade", str(pair / "ref.wav"), "--noise", "pink", "--snr", "0"]
    main(base + ["--seed", "4", "--out", str(pair / "flag.wav")])
    monkeypatch.setenv("SQBENCH_SEED", "4")
    main(base + ["--out", str(pair / "env.wav")])
    assert (pair / "env.wav").read_bytes() == (pair / "flag.wav").read_bytes()
    monkeypatch.setenv("SQBENCH_SEED", "abc")
    assert main(["gen-noise", "pink", "--out", str(pair / "x.wav")]) == 2


def _config(tmp_path, manifest, **extra):
    cfg = {"manifest": str(manifest), "snr_levels": [-5, 15], "noises": ["pink", "babble"],
           "output_dir": str(tmp_path / "out"), "master_seed": 2}
    cfg.update(extra)
    p = tmp_path / "run.json"
    p.write_text(json.dumps(cfg))
    return p


def test_run_then_analyze(small_corpus, tmp_path, capsys):
    cfg = _config(tmp_path, small_corpus)
    assert main(["run", str(cfg)]) == 0
    out = tmp_path / "out"
    assert "jobs" in capsys.readouterr().err
    names = sorted(p.name for p in out.iterdir())
    assert set(REPORT_FILES) <= set(names) and "scores.jsonl" in names
    before = {n: (out / n).read_bytes() for n in REPORT_FILES}
    assert main(["analyze", str(out / "scores.jsonl")]) == 0
    assert {n: (out / n).read_bytes() for n in REPORT_FILES} == before

    assert main(["analyze", str(out / "scores.jsonl"), "--granularity", "per-signal", "--out",
                 str(tmp_path / "ps")]) == 0
    a = (out / "table1_ks_language.csv").read_text()
    b = (tmp_path / "ps" / "table1_ks_language.csv").read_text()
    assert a != b and "per-signal" in b and "per-snr-mean" in a

    store = (out / "scores.jsonl").read_bytes()
    assert main(["run", str(cfg), "--parallelism", "2", "--out", str(tmp_path / "p2")]) == 0
    assert (tmp_path / "p2" / "scores.jsonl").read_bytes() == store
    assert main(["run", str(cfg), "--resume"]) == 0
    assert (out / "scores.jsonl").read_bytes() == store


def test_analyze_errors(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["analyze", str(empty)]) == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{nope\n")
    assert main(["analyze", str(bad)]) == 2
    assert ":1:" in capsys.readouterr().err


def test_config_validation_names_field(small_corpus, tmp_path, capsys):
    for field, value in [("snr_levels", []), ("noises", ["white"]), ("metrics", ["pesq"]),
                         ("parallelism", 0), ("ks_granularity", "weekly"), ("bogus", 1)]:
        cfg = _config(tmp_path, small_corpus, **{field: value})
        with pytest.raises(ConfigError) as e:
            load_config(cfg)
        assert e.value.field == field
        assert main(["run", str(cfg)]) == 2
        assert field in capsys.readouterr().err


def test_config_overrides_and_external_metrics(small_corpus, tmp_path):
    cfg = _config(tmp_path, small_corpus, metrics=["nsim", {"name": "ext", "command": "echo 2.5"}])
    c = load_config(cfg, parallelism=4, master_seed=None)
    assert c.parallelism == 4 and c.master_seed == 2
    assert c.metric_names() == ["nsim", "ext"]
    assert c.snr_levels == (-5.0, 15.0)
    assert load_manifest(c.manifest)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "sqbench", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout

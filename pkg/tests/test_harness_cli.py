import json

import pytest

from pakelab.cli import main, read_config_file
from pakelab.harness import (
    ConfigError, DictionaryError, ExperimentConfig, aggregate, generate_dictionary, load_dictionary,
    pooled_bits, run_experiment, run_trial, summarize, theoretical_bits,
)


def small(**kw):
    base = dict(protocol="autha", instantiation="mulhash", rotate_params=True, dict_size=256,
                sessions=4, trials=5, seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


class TestDictionaries:
    def test_generate(self):
        d = generate_dictionary(1024, 1)
        assert len(set(d.words)) == 1024 and 0 <= d.true_index < 1024
        assert generate_dictionary(1024, 1) == d
        assert generate_dictionary(1024, 2).words != d.words
        with pytest.raises(DictionaryError):
            generate_dictionary(1, 0)

    def test_load(self, tmp_path):
        f = tmp_path / "words.txt"
        f.write_text("alpha\nbeta\n\ngamma\n")
        assert load_dictionary(f).words == [b"alpha", b"beta", b"gamma"]
        f.write_text("alpha\nbeta\nalpha\n")
        with pytest.raises(DictionaryError, match="line 3 repeats line 1"):
            load_dictionary(f)


class TestConfig:
    def test_from_mapping_types(self):
        cfg = ExperimentConfig.from_mapping({"dict-size": "64", "rotate_params": "true", "tolerance": "0.1",
                                             "seed": "0x10", "dict_file": "none"})
        assert cfg.dict_size == 64 and cfg.rotate_params is True and cfg.tolerance == 0.1
        assert cfg.seed == 16 and cfg.dict_file is None
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"bogus": "1"})

    @pytest.mark.parametrize("kw,needle", [
        (dict(instantiation="mulhash", group="ec23", rotate_params=False), "ec"),
        (dict(attack="impersonate", instantiation="mulhash"), "mulexphash"),
        (dict(attack="small-subgroup", protocol="dh", group="ec65519", rotate_params=False), "t > 1"),
        (dict(attack="srp6-fixed-u", protocol="srp6", group="ec23", rotate_params=False), "ec"),
        (dict(attack="partition", instantiation="mulexphash"), "no partition filter"),
        (dict(attack="frobnicate"), "unknown attack"),
        (dict(trials=0), "trials"),
        (dict(protocol="oeke", attack="ecsrp1-dictionary"), "protocol"),
    ])
    def test_incompatible_rejected(self, kw, needle):
        with pytest.raises(ConfigError, match=needle):
            run_experiment(small(**kw))

    def test_theory(self):
        assert theoretical_bits(small()) == pytest.approx(1.0)
        assert theoretical_bits(small(instantiation="randmulhash", rotate_params=False, group="safe64")) == 2.0
        assert theoretical_bits(small(instantiation="muliota")) == 0.0
        bc = theoretical_bits(small(protocol="oeke", instantiation="blockcipher", group="ec65519",
                                    rotate_params=False))
        assert bc == pytest.approx(1.0, abs=0.01)


class TestExperiments:
    def test_rows_and_session_zero(self):
        result = run_experiment(small())
        rows = result.to_csv().strip().splitlines()
        assert rows[0] == "trial,session,survivors"
        assert len(rows) - 1 == 5 * (4 + 1)
        assert result.aggregate["median_survivors"][0] == 256
        assert all(t.report.rounds[0] == (0, 256) for t in result.trials)

    def test_determinism(self, tmp_path):
        a = run_experiment(small(), out=str(tmp_path / "a"))
        b = run_experiment(small(), out=str(tmp_path / "b"))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert a.to_json() != run_experiment(small(seed=8)).to_json()

    def test_parallel_matches_serial(self):
        assert run_experiment(small(jobs=2)).to_json() == run_experiment(small()).to_json()

    def test_muliota_resists(self):
        result = run_experiment(small(instantiation="muliota"))
        assert result.verdict == "resists"
        assert set(result.aggregate["median_survivors"]) == {256}

    def test_single_group_mulhash_is_one_reading(self):
        result = run_experiment(small(group="safe64", rotate_params=False, sessions=6, trials=20))
        agg = result.aggregate
        assert agg["independence"] == "single-group" and agg["verdict"] == "pass"
        assert len(set(agg["median_survivors"][1:])) == 1

    def test_verdict_fail_beyond_tolerance(self):
        cfg = small(trials=10)
        trials = [run_trial(cfg, i) for i in range(cfg.trials)]
        assert aggregate(cfg, trials)["verdict"] == "pass"
        cfg.tolerance = 0.0001
        assert aggregate(cfg, trials)["verdict"] == "fail"

    def test_pooled_bits_ignores_saturated_rounds(self):
        cfg = small(protocol="autha", instantiation="blockcipher", group="ec65519", rotate_params=False,
                    sessions=12, trials=5)
        trials = [run_trial(cfg, i) for i in range(cfg.trials)]
        assert 1.5 <= pooled_bits(trials) <= 2.5
        naive = aggregate(cfg, trials)["naive_bits_per_session"]
        assert naive < 1.0  # capped at log2(256) / 12 once the dictionary is exhausted

    def test_dict_file(self, tmp_path):
        f = tmp_path / "w.txt"
        f.write_text("\n".join(f"w{i}" for i in range(50)))
        result = run_experiment(small(dict_file=str(f)))
        assert result.aggregate["median_survivors"][0] == 50

    def test_summarize(self):
        text, csv_text = summarize(run_experiment(small()))
        assert "verdict" in text and csv_text.startswith("trial,session,survivors")


class TestCli:
    def test_run_and_verify_transcript(self, tmp_path, capsys):
        path = tmp_path / "t.txt"
        assert main(["run-protocol", "--protocol", "oeke", "--instantiation", "blockcipher",
                     "--group-preset", "ec65519", "--out", str(path)]) == 0
        assert main(["verify-transcript", str(path)]) == 0
        lines = path.read_text().splitlines()
        idx, sender, tag, payload = lines[2].split()
        lines[2] = " ".join([idx, sender, tag, "00" * (len(payload) // 2)])
        path.write_text("\n".join(lines) + "\n")
        assert main(["verify-transcript", str(path)]) == 1
        assert "flow 2" in capsys.readouterr().out

    def test_run_protocol_json(self, capsys):
        assert main(["run-protocol", "--protocol", "srp5", "--group-preset", "ec23", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["accepted"] == {"client": True, "server": True}

    def test_config_error_exit_code(self, capsys):
        assert main(["experiment", "--instantiation", "mulhash", "--group-preset", "ec23"]) == 2
        assert "configuration error" in capsys.readouterr().err
        assert main(["run-protocol", "--protocol", "srp6", "--group-preset", "ec23"]) == 2

    def test_strict_calibration_exit_code(self, tmp_path):
        args = ["experiment", "--instantiation", "mulhash", "--rotate-params", "--dict-size", "64",
                "--sessions", "3", "--trials", "3", "--format", "json", "--out", str(tmp_path / "r.json")]
        assert main(args + ["--tolerance", "0.000001", "--strict"]) == 3
        assert main(args + ["--tolerance", "0.000001"]) == 0

    def test_config_file_and_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "exp.conf"
        cfg.write_text("# partition on rotating groups\nprotocol = autha\ninstantiation = mulhash\n"
                       "rotate-params = true\ndict_size = 64\nsessions = 3\ntrials = 2\n")
        assert read_config_file(cfg)["rotate_params"] == "true"
        assert main(["experiment", "--config", str(cfg), "--trials", "3", "--format", "csv"]) == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert len(rows) == 1 + 3 * 4

    def test_attack_subcommand(self, capsys):
        assert main(["attack", "--attack", "ecsrp1-dictionary", "--protocol", "ecsrp1",
                     "--group-preset", "ec65519", "--dict-size", "128", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["aggregate"]["verdict"] == "pass" and doc["aggregate"]["trials"] == 1

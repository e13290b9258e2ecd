import json
import subprocess
import sys

import pytest

from eocsiren.cli import COMMANDS, ConfigError, main, parse_config

SMALL = ["--width", "16", "--depth", "4", "--ensembles", "2", "--inputs", "20"]


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("EOCSIREN_OUT", str(tmp_path / "env-out"))
    return tmp_path


class TestConfig:
    def test_defaults(self, out):
        c = parse_config(["verify-init"])
        assert c["width"] == 256 and c["depth"] == 10 and c["seeds"] == [0]
        assert c["schemes"] == ["proposed-sigma0", "sigma1", "sitzmann", "framework-default"]
        assert c["out"] == str(out / "env-out")

    def test_precedence(self, out):
        cfg = out / "run.ini"
        cfg.write_text("width = 32\ndepth = 5\n[verify-init]\nensembles = 3\n[fit]\nepochs = 9\n")
        c = parse_config(["verify-init", "--config", str(cfg), "--depth", "6"])
        assert (c["width"], c["depth"], c["ensembles"]) == (32, 6, 3)
        assert c.file_values == {"width": 32, "depth": 5, "ensembles": 3}
        assert c.flag_values == {"depth": 6}

    def test_unknown_file_key(self, out, capsys):
        cfg = out / "bad.ini"
        cfg.write_text("widht = 32\n")
        assert main(["verify-init", "--config", str(cfg)]) == 1
        assert "widht" in capsys.readouterr().err

    def test_inapplicable_key(self, out):
        cfg = out / "bad.ini"
        cfg.write_text("epochs = 3\n")
        with pytest.raises(ConfigError, match="epochs"):
            parse_config(["verify-init", "--config", str(cfg)])

    def test_bad_value(self, out):
        cfg = out / "bad.ini"
        cfg.write_text("width = many\n")
        with pytest.raises(ConfigError, match="width"):
            parse_config(["verify-init", "--config", str(cfg)])

    def test_aliases_and_lists(self, out):
        c = parse_config(["ntk-scan", "--scheme", "sitzmann", "--seed", "1,2", "--depths", "3,5"])
        assert c["schemes"] == ["sitzmann"] and c["seeds"] == [1, 2] and c["depths"] == [3, 5]

    def test_custom_schemes(self, out):
        c = parse_config(["verify-init", "--schemes", "custom:2.0,0.3;sigma1"])
        assert c["schemes"] == ["custom:2.0,0.3", "sigma1"]

    @pytest.mark.parametrize("argv,flag", [
        (["verify-init", "--depth", "1"], "--depth"),
        (["svd-scan", "--depths", "2,4"], "--depths"),
        (["ntk-scan", "--depths", "8,4"], "--depths"),
        (["fit", "--task", "5d"], "--task"),
        (["fit", "--lr", "-1"], "--lr"),
        (["spectrum", "--domain", "1,-1"], "--domain"),
        (["verify-init", "--format", "xml"], "--format"),
    ])
    def test_validation_names_flag(self, out, capsys, argv, flag):
        assert main(argv) == 1
        assert flag in capsys.readouterr().err

    def test_unknown_flag_exit_1(self, out, capsys):
        assert main(["verify-init", "--bogus", "3"]) == 1
        assert main([]) == 1

    def test_print_config(self, out, capsys):
        assert main(["fit", "--print-config", "--epochs", "7"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["config"]["epochs"] == 7 and doc["flag_values"] == {"epochs": 7}
        assert {"version", "backend", "python", "numpy"} <= set(doc)

    def test_all_commands_have_help(self):
        for cmd in COMMANDS:
            with pytest.raises(SystemExit) as err:
                parse_config([cmd, "--help"])
            assert err.value.code == 0


class TestRun:
    def test_verify_init_writes_outputs(self, out, capsys):
        d = out / "r"
        assert main(["verify-init", "--out", str(d)] + SMALL) == 0
        text = capsys.readouterr().out
        assert "PASS" in text or "FAIL" in text
        csv_lines = (d / "verify-init.csv").read_text().splitlines()
        assert csv_lines[0].startswith("scheme,L,N,layer,preact_std")
        assert len(csv_lines) == 1 + 4 * 3
        man = json.loads((d / "verify-init.manifest.json").read_text())
        assert man["command"] == "verify-init" and man["config"]["width"] == 16
        assert man["exit_status"] == 0

    def test_gate_exit_code(self, out):
        # a custom off-curve scheme with large gain cannot pass the Jacobian check
        argv = ["verify-init", "--out", str(out / "g"), "--schemes", "custom:2.4,0.0", "--gate"] + SMALL
        assert main(argv) == 2
        assert main(argv[:-len(SMALL) - 1] + SMALL) == 0

    def test_json_format(self, out):
        d = out / "j"
        assert main(["svd-scan", "--out", str(d), "--format", "json", "--width", "8", "--depths", "3,4",
                     "--ensembles", "1", "--inputs", "3"]) == 0
        doc = json.loads((d / "svd-scan.json").read_text())
        assert doc["config"]["depths"] == [3, 4] and len(doc["rows"]) == 2 * 2 * 8

    def test_replay_reproduces(self, out):
        d = out / "a"
        assert main(["overlap", "--out", str(d), "--width", "8", "--depth", "3", "--inputs", "16",
                     "--vectors", "4", "--schemes", "custom:2.0,0.3;sitzmann"]) == 0
        first = (d / "overlap.csv").read_bytes()
        (d / "overlap.csv").unlink()
        assert main(["replay", str(d / "overlap.manifest.json")]) == 0
        assert (d / "overlap.csv").read_bytes() == first

    @pytest.mark.parametrize("cmd,extra", [
        ("ntk-scan", ["--width", "8", "--depths", "3,4,5", "--ensembles", "1", "--inputs", "5"]),
        ("spectrum", ["--width", "8", "--depths", "3", "--ensembles", "1", "--inputs", "256"]),
        ("fit", ["--width", "8", "--depth", "3", "--epochs", "2"]),
        ("denoise", ["--width", "8", "--depth", "3", "--epochs", "2", "--size", "8", "--test-factor", "1"]),
        ("sweep", ["--widths", "4", "--depths", "3", "--epochs", "1", "--schemes", "sigma1"]),
    ])
    def test_commands_run(self, out, cmd, extra):
        d = out / cmd
        assert main([cmd, "--out", str(d)] + extra) == 0
        assert (d / f"{cmd}.csv").exists()

    def test_denoise_from_pgm(self, out):
        from eocsiren.experiments import procedural_image
        from eocsiren.pgm import write_pgm

        write_pgm(out / "img.pgm", procedural_image(8))
        d = out / "p"
        assert main(["denoise", "--out", str(d), "--image", str(out / "img.pgm"), "--width", "8",
                     "--depth", "3", "--epochs", "1"]) == 0
        assert "denoise" in (d / "denoise.csv").read_text()

    def test_missing_image(self, out, capsys):
        assert main(["denoise", "--image", str(out / "nope.pgm"), "--epochs", "1"]) == 1

    def test_module_entry_point(self, out):
        proc = subprocess.run([sys.executable, "-m", "eocsiren", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0 and "eocsiren" in proc.stdout

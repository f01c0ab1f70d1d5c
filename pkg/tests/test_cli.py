import json

import pytest
from click.testing import CliRunner

from pcv import cli, vault
from pcv.cli import main

from conftest import FAST_KDF_WORK, FAST_PARAMS, SP, deterministic_entropy


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def fast_encrypt(monkeypatch):
    """Route CLI encrypts through the fast test parameters."""
    real = vault.encrypt_flow

    def wrapped(d, sp, **kw):
        kw.update(params=FAST_PARAMS, kdf_work=FAST_KDF_WORK,
                  therm_seed=4200, deform_seed=77,
                  entropy=deterministic_entropy())
        return real(d, sp, **kw)

    monkeypatch.setattr(cli.vault, "encrypt_flow", wrapped)


class TestEncryptDecrypt:
    def test_round_trip(self, runner, fast_encrypt, fast_container, tmp_path):
        _, sp, sk = fast_container
        plain = tmp_path / "in.txt"
        plain.write_bytes(b"attack at dawn")
        box = tmp_path / "out.pcv"
        res = runner.invoke(main, ["encrypt", str(plain), str(box)],
                            input=f"{sp}\n{sp}\n")
        assert res.exit_code == 0, res.output
        assert "self-check attempts" in res.output
        assert box.exists()

        out = tmp_path / "plain.txt"
        image = tmp_path / "captcha.pgm"
        res = runner.invoke(main, ["decrypt", str(box), str(out),
                                   "--image-out", str(image), "--no-ascii"],
                            input=f"{sp}\n{sk.lower()}\n")
        assert res.exit_code == 0, res.output
        assert out.read_bytes() == b"attack at dawn"
        assert image.read_bytes().startswith(b"P5\n")

    def test_wrong_sk_exits_2_without_output(self, runner, fast_container,
                                             tmp_path):
        container, sp, sk = fast_container
        box = tmp_path / "box.pcv"
        box.write_bytes(container.serialize())
        out = tmp_path / "plain.txt"
        wrong = "AAAAA" if sk != "AAAAA" else "BBBBB"
        res = runner.invoke(main, ["decrypt", str(box), str(out), "--no-ascii"],
                            input=f"{sp}\n{wrong}\n")
        assert res.exit_code == 2
        assert "no output written" in res.output
        assert not out.exists()

    def test_ascii_preview_printed(self, runner, fast_container, tmp_path):
        container, sp, sk = fast_container
        box = tmp_path / "box.pcv"
        box.write_bytes(container.serialize())
        out = tmp_path / "plain.txt"
        res = runner.invoke(main, ["decrypt", str(box), str(out)],
                            input=f"{sp}\n{sk}\n")
        assert res.exit_code == 0
        assert "#" in res.output and "." in res.output

    def test_malformed_container_exits_3(self, runner, tmp_path):
        bad = tmp_path / "bad.pcv"
        bad.write_bytes(b"not a container")
        res = runner.invoke(main, ["decrypt", str(bad), str(tmp_path / "o")],
                            input="pw\n")
        assert res.exit_code == 3

    def test_passwords_never_echoed(self, runner, fast_container, tmp_path):
        container, sp, sk = fast_container
        box = tmp_path / "box.pcv"
        box.write_bytes(container.serialize())
        res = runner.invoke(main, ["decrypt", str(box),
                                   str(tmp_path / "o"), "--no-ascii"],
                            input=f"{sp}\n{sk}\n")
        assert sp not in res.output
        assert sk not in res.output


class TestEstimate:
    def test_reference_figure(self, runner):
        res = runner.invoke(main, ["estimate"])
        assert res.exit_code == 0
        assert "3.2768e+06 s" in res.output
        assert "≈ 37.9 days" in res.output

    def test_invalid_rate(self, runner):
        res = runner.invoke(main, ["estimate", "--rate", "0"])
        assert res.exit_code == 3


class TestAttackSim:
    def test_jsonl_report(self, runner, sep_container, tmp_path):
        container, sp, _ = sep_container
        box = tmp_path / "box.pcv"
        box.write_bytes(container.serialize())
        out = tmp_path / "report.jsonl"
        res = runner.invoke(main, ["attack-sim", str(box), "--true-sp", sp,
                                   "--candidates", "4", "-o", str(out)])
        assert res.exit_code == 0, res.output
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert lines[-1]["summary"] is True
        assert lines[-1]["success"] is True
        assert "success: True" in res.output


class TestRender:
    def test_oversized_text_exits_3(self, runner):
        res = runner.invoke(main, ["render", "TOOLONG"])
        assert res.exit_code == 3


class TestHelp:
    def test_all_commands_registered(self, runner):
        res = runner.invoke(main, ["--help"])
        for cmd in ("encrypt", "decrypt", "sweep", "loopback", "lyapunov",
                    "detune", "attack-sim", "estimate", "render", "serve"):
            assert cmd in res.output

"""Command-line surface: train, eval, sl, and error signaling."""
import shlex
import subprocess
import sys

from adrl.cli import main

from conftest import PROGRAM

SIM = shlex.join(PROGRAM)
SMALL_ARCH = ["--d", "8", "--heads", "2", "--blocks", "1", "--ff-hidden", "16"]


def test_train_command_end_to_end(tmp_path):
    curve = tmp_path / "curve.csv"
    ckpt = tmp_path / "net.pt"
    proc = subprocess.run(
        [sys.executable, "-m", "adrl.cli", "train",
         "--atom", "--program", SIM, "--mode", "drl",
         "--epochs", "1", "--batch-episodes", "4", "--lr", "0.01",
         *SMALL_ARCH, "--eval-episodes", "2",
         "--curves", str(curve), "--checkpoint", str(ckpt)],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert "epoch=0 mean_cumulative_reward=" in proc.stdout
    assert "eval mean_return=" in proc.stdout
    assert curve.exists() and ckpt.exists()


def test_eval_command_reuses_checkpoint_overrides(tmp_path, capsys):
    ckpt = tmp_path / "net.pt"
    assert main(["train", "--atom", "--program", SIM, "--mode", "drl",
                 "--epochs", "0", *SMALL_ARCH,
                 "--checkpoint", str(ckpt)]) == 0
    assert main(["eval", "--checkpoint", str(ckpt), "--program", SIM,
                 "--episodes", "2"]) == 0
    out = capsys.readouterr().out
    assert "eval mean_return=" in out
    assert "episodes=2" in out


def test_sl_command_reports_accuracy(capsys):
    code = main(["sl", "--atom", "--program", SIM,
                 "--instances", "2", "--epochs", "2", "--lr", "0.01",
                 *SMALL_ARCH])
    assert code == 0
    out = capsys.readouterr().out
    assert "accuracy=" in out
    assert "samples=2" in out


def test_malformed_settings_exit_code_two(capsys):
    code = main(["train", "--settings", "1,2", "--program", SIM])
    assert code == 2
    assert "error [TRAINER]" in capsys.readouterr().err

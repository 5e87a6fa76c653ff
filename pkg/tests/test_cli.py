import json

import numpy as np
import pytest

from msnr_bss.cli import main
from msnr_bss.csvio import load_signals, store_signals
from msnr_bss.channel import PAPER_MIXING_MATRIX, ChannelSpec, mix
from msnr_bss.harness import demo_sources


def test_gen_qpsk_bits(tmp_path):
    out = tmp_path / "q.csv"
    assert main(["gen", "--modulation", "qpsk", "--bits", "00", "--sps", "4", "--cycles", "1",
                 "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "ch0"
    np.testing.assert_allclose(load_signals(out)[0], np.cos(2 * np.pi * np.arange(4) / 4 + np.pi / 4),
                               atol=1e-15)


def test_gen_ook_random(tmp_path):
    out = tmp_path / "o.csv"
    args = ["gen", "--modulation", "ook", "--random", "20", "--sps", "100", "--seed", "3", "--out", str(out)]
    assert main(args) == 0
    x = load_signals(out)
    assert x.shape == (1, 2000) and set(np.unique(x)) <= {0.0, 1.0}


def test_gen_odd_qpsk_is_data_error(tmp_path, capsys):
    code = main(["gen", "--modulation", "qpsk", "--bits", "011", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "even bit count" in capsys.readouterr().err


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--modulation", "fsk", "--bits", "01", "--out", "x"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_demo_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["demo", "--seed", "4", "--snr-db", "30", "--ma-len", "7",
                     "--out-dir", str(tmp_path / d)]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_demo_no_noise(tmp_path, capsys):
    assert main(["demo", "--no-noise", "--out-dir", str(tmp_path)]) == 0
    assert "mean_corr=0.99" in capsys.readouterr().out
    assert (tmp_path / "report.csv").read_text().splitlines()[1].split(",")[1] == "inf"


def test_separate_with_report(tmp_path):
    s = demo_sources()
    store_signals(s, tmp_path / "s.csv")
    store_signals(mix(ChannelSpec(PAPER_MIXING_MATRIX, 30.0, 1), s), tmp_path / "x.csv")
    code = main(["separate", "--input", str(tmp_path / "x.csv"), "--ma-len", "7",
                 "--output", str(tmp_path / "y.csv"), "--report", str(tmp_path / "r.csv"),
                 "--sources", str(tmp_path / "s.csv")])
    assert code == 0
    assert load_signals(tmp_path / "y.csv").shape == (2, 2000)
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert rows[0] == "output,eigenvalue,objective_db,source,abs_corr"
    assert len(rows) == 3
    assert all(float(r.split(",")[4]) > 0.99 for r in rows[1:])


def test_separate_bad_input(tmp_path):
    (tmp_path / "x.csv").write_text("ch0,ch1\n1,2\n3\n")
    assert main(["separate", "--input", str(tmp_path / "x.csv"), "--output", str(tmp_path / "y.csv")]) == 2
    assert main(["separate", "--input", str(tmp_path / "missing.csv"), "--output", str(tmp_path / "y.csv")]) == 2


def test_sweep_cli(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ma_lengths": [3, 7], "snr_db_values": [20, 30], "trials_per_cell": 2,
                               "base_seed": 5}))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a.csv")]) == 0
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "b.csv"), "--workers", "2"]) == 0
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert len(a.decode().splitlines()) == 1 + 2 * 2 * 2


def test_sweep_cli_bad_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ma_lengths": [3], "snr_db_values": [20], "nope": 1}))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a.csv")]) == 2

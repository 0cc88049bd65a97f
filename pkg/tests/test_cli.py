"""Command-line harness: simulate, localize, evaluate, mask-dump."""

import csv

import numpy as np
import pytest

from srpmask import read_mask, read_wav, read_wav_mono, write_wav
from srpmask.cli import main
from srpmask.masking import read_mask as read_mask_file

PIPELINE_SMALL = """
[pipeline]
num_mics = 4
array_radius_m = 0.2
max_delay_frames = 30
grid_deg = 2.0
"""

SCENES_CLEAN = """
[scene]
duration_s = 1.0
[batch]
azimuths_deg = 0,90
snrs_db = clean
seeds = 0
"""

SCENES_NOISY = """
[scene]
duration_s = 1.5
utterance_s = 1.0
interferer = yes
interferer_offset_deg = 90
wireless_delay_max_s = 0.2
[batch]
azimuths_deg = 45
snrs_db = 5
seeds = 0,1
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture()
def clean_scene_dir(tmp_path):
    config = _write(tmp_path, "pipeline.ini", PIPELINE_SMALL)
    scenes = _write(tmp_path, "scenes.ini", SCENES_CLEAN)
    out = tmp_path / "scenes"
    assert main(["simulate", "--scene-config", scenes, "--config", config,
                 "--out-dir", str(out)]) == 0
    return config, out


def test_simulate_writes_wavs_and_truth(clean_scene_dir, capsys):
    _, out = clean_scene_dir
    wavs = sorted(p.name for p in out.glob("*.wav"))
    assert len(wavs) == 4  # 2 scenes x (array + close)
    with open(out / "truth.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert {r["snr_db"] for r in rows} == {"clean"}
    array = read_wav(out / f"{rows[0]['scene_id']}_array.wav")
    assert array.num_channels == 4
    close = read_wav_mono(out / f"{rows[0]['scene_id']}_close.wav")
    assert close.sample_rate == 16000


def test_simulate_deterministic(tmp_path):
    config = _write(tmp_path, "pipeline.ini", PIPELINE_SMALL)
    scenes = _write(tmp_path, "scenes.ini", SCENES_CLEAN)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["simulate", "--scene-config", scenes, "--config", config,
                     "--out-dir", str(out)]) == 0
    for path_a in sorted(out_a.iterdir()):
        path_b = out_b / path_a.name
        assert path_a.read_bytes() == path_b.read_bytes()


def test_localize_prints_result_and_dumps(clean_scene_dir, tmp_path, capsys):
    config, out = clean_scene_dir
    with open(out / "truth.csv", newline="") as fh:
        row = next(csv.DictReader(fh))
    array_wav = str(out / f"{row['scene_id']}_array.wav")
    close_wav = str(out / f"{row['scene_id']}_close.wav")
    mask_path = tmp_path / "mask.bin"
    pm_path = tmp_path / "power.csv"
    code = main(["localize", array_wav, close_wav, "--config", config,
                 "--dump-mask", str(mask_path), "--dump-powermap", str(pm_path)])
    assert code == 0
    text = capsys.readouterr().out
    line = next(l for l in text.splitlines() if l.startswith("best_azimuth_deg"))
    est = float(line.split(":")[1])
    truth = float(row["truth_azimuth_deg"])
    assert abs(est - truth) <= 2.0
    mask = read_mask_file(mask_path)
    assert mask.ndim == 2 and mask.shape[1] == 257
    pm = np.loadtxt(pm_path, delimiter=",", skiprows=1)
    assert pm.shape[1] == 2 and pm.shape[0] == 180  # 2-degree grid


def test_evaluate_clean_scenes(clean_scene_dir, tmp_path, capsys):
    config, out = clean_scene_dir
    report_path = tmp_path / "report.csv"
    trials_path = tmp_path / "trials.csv"
    code = main(["evaluate", str(out), "--config", config,
                 "--masks", "none,irm-star", "--report", str(report_path),
                 "--trials", str(trials_path)])
    assert code == 0
    with open(report_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["condition"], r["mask"]) for r in rows] == \
        [("snr=clean", "none"), ("snr=clean", "irm-star")]
    assert all(float(r["avg_error_deg"]) <= 2.0 for r in rows)
    assert all(r["n"] == "2" for r in rows)
    with open(trials_path, newline="") as fh:
        trial_rows = list(csv.DictReader(fh))
    assert len(trial_rows) == 4


def test_evaluate_single_scene_error_equals_angular_error(tmp_path):
    config = _write(tmp_path, "pipeline.ini", PIPELINE_SMALL)
    scenes = _write(tmp_path, "scenes.ini", SCENES_NOISY.replace(
        "seeds = 0,1", "seeds = 3"))
    out = tmp_path / "scenes"
    assert main(["simulate", "--scene-config", scenes, "--config", config,
                 "--out-dir", str(out)]) == 0
    report_path = tmp_path / "report.csv"
    trials_path = tmp_path / "trials.csv"
    assert main(["evaluate", str(out), "--config", config, "--masks",
                 "irm-star", "--report", str(report_path),
                 "--trials", str(trials_path)]) == 0
    with open(report_path, newline="") as fh:
        row = next(csv.DictReader(fh))
    with open(trials_path, newline="") as fh:
        trial = next(csv.DictReader(fh))
    assert row["n"] == "1"
    assert float(row["avg_error_deg"]) == pytest.approx(
        float(trial["error_deg"]), abs=1e-3)


def test_evaluate_deterministic_report(clean_scene_dir, tmp_path):
    config, out = clean_scene_dir
    paths = [tmp_path / "r1.csv", tmp_path / "r2.csv"]
    for path in paths:
        assert main(["evaluate", str(out), "--config", config,
                     "--masks", "irm", "--report", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_mask_dump_subcommand(clean_scene_dir, tmp_path):
    config, out = clean_scene_dir
    with open(out / "truth.csv", newline="") as fh:
        row = next(csv.DictReader(fh))
    array_wav = str(out / f"{row['scene_id']}_array.wav")
    close_wav = str(out / f"{row['scene_id']}_close.wav")
    bin_path = tmp_path / "mask.bin"
    csv_path = tmp_path / "mask.csv"
    code = main(["mask-dump", array_wav, close_wav, "--config", config,
                 "--mask", "irm", "--out", str(bin_path), "--csv", str(csv_path)])
    assert code == 0
    values = read_mask(bin_path)
    assert values.min() >= 0.0 and values.max() <= 1.0
    csv_values = np.loadtxt(csv_path, delimiter=",")
    np.testing.assert_allclose(csv_values, values, atol=1e-6)


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["localize"])  # missing positionals
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1


def test_data_error_exit_code(tmp_path, capsys):
    config = _write(tmp_path, "pipeline.ini", PIPELINE_SMALL)
    assert main(["evaluate", str(tmp_path / "missing"), "--config",
                 config]) == 2
    assert main(["localize", str(tmp_path / "a.wav"), str(tmp_path / "b.wav"),
                 "--config", config]) == 2


def test_empty_batch_rejected(tmp_path):
    config = _write(tmp_path, "pipeline.ini", PIPELINE_SMALL)
    scenes = _write(tmp_path, "scenes.ini",
                    "[batch]\nazimuths_deg =\nsnrs_db = 5\nseeds = 0\n")
    assert main(["simulate", "--scene-config", scenes, "--config", config,
                 "--out-dir", str(tmp_path / "out")]) == 2


def test_channel_count_mismatch_is_data_error(clean_scene_dir, tmp_path):
    config, out = clean_scene_dir
    with open(out / "truth.csv", newline="") as fh:
        row = next(csv.DictReader(fh))
    close_wav = str(out / f"{row['scene_id']}_close.wav")
    # close (1 channel) fed as the array recording
    assert main(["localize", close_wav, close_wav, "--config", config]) == 2


def test_wav_roundtrip_pcm16(tmp_path):
    from srpmask import MultichannelSignal
    rng = np.random.default_rng(1)
    sig = MultichannelSignal.from_array(0.1 * rng.standard_normal((3, 400)),
                                        16000.0)
    path = tmp_path / "x.wav"
    write_wav(path, sig, encoding="pcm16")
    back = read_wav(path)
    assert back.num_channels == 3
    np.testing.assert_allclose(back.to_array(), sig.to_array(), atol=1e-4)


def test_unknown_config_key_rejected(tmp_path):
    bad = _write(tmp_path, "bad.ini", "[pipeline]\nframe_sz = 512\n")
    assert main(["localize", "a.wav", "b.wav", "--config", bad]) == 2

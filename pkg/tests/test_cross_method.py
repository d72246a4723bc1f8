"""Cross-method checks: the sparse and ridge coding routes must agree."""
import warnings

import pytest

from handsteer import synth
from handsteer.recognizer import TrainConfig, run_stream, train_recognizer
from handsteer.reports import parse_report


def test_src_agrees_with_crc_on_full_stream(training_recordings, model):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        src_model = train_recognizer(
            training_recordings, TrainConfig(seed=0, classifier="src")
        )
    stream = synth.generate(synth.standard_eval_scenarios()[4], seed=5004)
    crc_events = run_stream(model, stream)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        src_events = run_stream(src_model, stream)
    assert len(crc_events) == len(src_events) == 975
    agreement = sum(
        a.label == b.label for a, b in zip(crc_events, src_events)
    ) / len(crc_events)
    assert agreement >= 0.99, f"agreement {agreement:.4f}"


def test_bench_with_src_shows_order_of_magnitude_gap(model, tmp_path):
    from handsteer.cli import main
    from handsteer.frames import write_stream
    from handsteer.recognizer import save_model

    save_model(tmp_path / "model", model)
    stream = synth.generate(
        synth.posture_recording(synth.PostureLabel.TURN_LEFT, total=2.0), seed=5
    )
    write_stream(tmp_path / "short.stream", stream)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rc = main([
            "bench", "--model-dir", str(tmp_path / "model"),
            "--stream", str(tmp_path / "short.stream"),
            "--out", str(tmp_path), "--with-src",
        ])
    assert rc == 0
    values, _ = parse_report(tmp_path / "bench_report.txt")
    crc_total = float(values["crc_total_seconds"])
    src_total = float(values["src_total_seconds"])
    assert src_total >= 10.0 * crc_total, (crc_total, src_total)

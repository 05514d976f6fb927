"""End-to-end coverage of the retouchq command line."""

import csv
import json

import numpy as np
import pytest

from retouchq import imgio, nn
from retouchq.cli import _pair_seed, main


def write_refs(dirpath, count=3, side=32, seed=7):
    rng = np.random.default_rng(seed)
    for k in range(count):
        img = (0.25 + 0.5 * rng.random((side, side, 3))).astype(np.float32)
        imgio.write_image(dirpath / f"ref{k}.png", img)


@pytest.fixture(scope="session")
def refs_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("refs")
    write_refs(path)
    return path


@pytest.fixture(scope="session")
def pairs_dir(tmp_path_factory, refs_dir):
    out = tmp_path_factory.mktemp("pairs")
    assert main(["distort", "--refs", str(refs_dir), "--out", str(out), "--seed", "3"]) == 0
    return out


@pytest.fixture(scope="session")
def identity_checkpoint(tmp_path_factory):
    """A net whose Q-values are all negative: the stop rule fires immediately."""
    net = nn.init_network(8768, 0, hidden_dims=(16,))
    net.weights[-1][:] = 0.0
    net.biases[-1][:] = -1.0
    net.version += 1
    path = tmp_path_factory.mktemp("ckpt") / "identity.dqnc"
    nn.save_checkpoint(net, path)
    return path


def read_manifest(pairs_dir):
    with open(pairs_dir / "manifest.csv", newline="") as fh:
        return list(csv.DictReader(fh))


class TestParser:
    def test_per_ref_must_be_positive(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["distort", "--refs", "x", "--out", "y", "--per-ref", "0"])
        assert exc.value.code == 2
        assert "per-ref must be ≥ 1" in capsys.readouterr().err

    def test_distance_band_ordering(self, capsys):
        with pytest.raises(SystemExit):
            main(["distort", "--refs", "x", "--out", "y", "--min-d", "21", "--max-d", "20"])
        assert "min-d must not exceed max-d" in capsys.readouterr().err

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            main([])


class TestPairSeed:
    def test_base_seed_xor_index(self):
        assert _pair_seed(11, 0, 0) == 11
        assert _pair_seed(11, 1, 0) == 10
        assert _pair_seed(11, 2, 0) == 9

    def test_variants_decorrelated(self):
        seeds = {_pair_seed(11, 4, k) for k in range(8)}
        assert len(seeds) == 8


class TestDistort:
    def test_writes_pairs_and_manifest(self, pairs_dir):
        rows = read_manifest(pairs_dir)
        assert [r["stem"] for r in rows] == ["ref0", "ref1", "ref2"]
        for row in rows:
            assert 10.0 <= float(row["achieved_distance"]) <= 20.0
            assert int(row["op_count"]) >= 1
            assert (pairs_dir / f"{row['stem']}.dist.png").exists()
            assert (pairs_dir / f"{row['stem']}.ref.png").exists()

    def test_achieved_distance_matches_files(self, pairs_dir):
        from retouchq import color

        row = read_manifest(pairs_dir)[0]
        dist = imgio.read_image(pairs_dir / f"{row['stem']}.dist.png")
        ref = imgio.read_image(pairs_dir / f"{row['stem']}.ref.png")
        # files are 8-bit, so the stored distance is only quantization-close
        assert color.mean_lab_distance(dist, ref) == pytest.approx(
            float(row["achieved_distance"]), abs=0.2
        )

    def test_deterministic_for_seed(self, refs_dir, pairs_dir, tmp_path):
        out = tmp_path / "again"
        assert main(["distort", "--refs", str(refs_dir), "--out", str(out), "--seed", "3"]) == 0
        assert (out / "manifest.csv").read_text() == (pairs_dir / "manifest.csv").read_text()
        for name in ("ref0.dist.png", "ref2.ref.png"):
            assert (out / name).read_bytes() == (pairs_dir / name).read_bytes()

    def test_seed_changes_output(self, refs_dir, pairs_dir, tmp_path):
        out = tmp_path / "reseeded"
        assert main(["distort", "--refs", str(refs_dir), "--out", str(out), "--seed", "4"]) == 0
        assert (out / "manifest.csv").read_text() != (pairs_dir / "manifest.csv").read_text()

    def test_per_ref_variants(self, refs_dir, tmp_path):
        out = tmp_path / "variants"
        rc = main(
            ["distort", "--refs", str(refs_dir), "--out", str(out), "--per-ref", "2"]
        )
        assert rc == 0
        stems = [r["stem"] for r in read_manifest(out)]
        assert stems == [f"ref{i}_v{k}" for i in range(3) for k in range(2)]

    def test_jobs_do_not_change_results(self, refs_dir, pairs_dir, tmp_path):
        out = tmp_path / "parallel"
        rc = main(
            ["distort", "--refs", str(refs_dir), "--out", str(out), "--seed", "3", "--jobs", "2"]
        )
        assert rc == 0
        assert (out / "manifest.csv").read_text() == (pairs_dir / "manifest.csv").read_text()

    def test_empty_refs_dir(self, tmp_path, capsys):
        empty = tmp_path / "none"
        empty.mkdir()
        assert main(["distort", "--refs", str(empty), "--out", str(tmp_path / "o")]) == 1
        assert "no images found" in capsys.readouterr().err

    def test_unreadable_image_skipped(self, tmp_path, capsys):
        refs = tmp_path / "refs"
        refs.mkdir()
        write_refs(refs, count=1)
        (refs / "broken.png").write_text("not a png")
        out = tmp_path / "out"
        assert main(["distort", "--refs", str(refs), "--out", str(out)]) == 0
        assert "skipping broken" in capsys.readouterr().err
        assert [r["stem"] for r in read_manifest(out)] == ["ref0"]


def toy_config_file(tmp_path, **extra):
    lines = {
        "hidden_dims": "16 8",
        "warmup": "4",
        "batch_size": "2",
        "steps": "6",
        "log_every": "2",
        "eps_decay_steps": "10",
    }
    lines.update({k: str(v) for k, v in extra.items()})
    path = tmp_path / "toy.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in lines.items()))
    return path


class TestTrain:
    def test_zero_steps_writes_checkpoint(self, pairs_dir, tmp_path):
        cfg = toy_config_file(tmp_path, steps=0)
        out = tmp_path / "net.dqnc"
        rc = main(
            ["train", "--pairs", str(pairs_dir), "--out", str(out), "--config", str(cfg)]
        )
        assert rc == 0
        net, adam = nn.load_checkpoint(out)
        assert net.dims == [8768, 16, 8, 12]
        assert adam.step == 0
        assert out.with_suffix(".log.csv").exists()

    def test_cli_steps_overrides_config(self, pairs_dir, tmp_path):
        cfg = toy_config_file(tmp_path, steps=6)
        out = tmp_path / "net.dqnc"
        log = tmp_path / "train.csv"
        rc = main(
            [
                "train", "--pairs", str(pairs_dir), "--out", str(out),
                "--config", str(cfg), "--steps", "4", "--log", str(log),
            ]
        )
        assert rc == 0
        rows = log.read_text().strip().splitlines()
        assert rows[0].startswith("iteration,")
        assert rows[-1].split(",")[0] == "4"

    def test_training_deterministic_across_runs(self, pairs_dir, tmp_path):
        cfg = toy_config_file(tmp_path, steps=12)
        outs = []
        for name in ("a.dqnc", "b.dqnc"):
            out = tmp_path / name
            rc = main(
                ["train", "--pairs", str(pairs_dir), "--out", str(out),
                 "--config", str(cfg), "--seed", "21"]
            )
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_resume_from_checkpoint(self, pairs_dir, tmp_path, capsys):
        cfg = toy_config_file(tmp_path)
        first = tmp_path / "first.dqnc"
        assert main(["train", "--pairs", str(pairs_dir), "--out", str(first), "--config", str(cfg)]) == 0
        more = tmp_path / "more.dqnc"
        rc = main(
            ["train", "--pairs", str(pairs_dir), "--out", str(more),
             "--config", str(cfg), "--resume", str(first)]
        )
        assert rc == 0
        _, adam_first = nn.load_checkpoint(first)
        _, adam_more = nn.load_checkpoint(more)
        assert adam_more.step > adam_first.step

    def test_context_file_requires_features_dir(self, pairs_dir, tmp_path, capsys):
        cfg = toy_config_file(tmp_path, steps=0)
        rc = main(
            ["train", "--pairs", str(pairs_dir), "--out", str(tmp_path / "n.dqnc"),
             "--config", str(cfg), "--context", "file"]
        )
        assert rc == 1
        assert "--features-dir is required" in capsys.readouterr().err

    def test_missing_feature_file_names_stem(self, pairs_dir, tmp_path, capsys):
        from retouchq import features

        cfg = toy_config_file(tmp_path, steps=0)
        fdir = tmp_path / "feats"
        fdir.mkdir()
        for stem in ("ref0", "ref2"):
            features.write_context_feature(fdir / f"{stem}.ctxf", np.ones(64, np.float32))
        rc = main(
            ["train", "--pairs", str(pairs_dir), "--out", str(tmp_path / "n.dqnc"),
             "--config", str(cfg), "--context", "file", "--features-dir", str(fdir)]
        )
        assert rc == 1
        assert "ref1" in capsys.readouterr().err

    def test_context_file_training_runs(self, pairs_dir, tmp_path):
        from retouchq import features

        cfg = toy_config_file(tmp_path, steps=6)
        fdir = tmp_path / "feats"
        fdir.mkdir()
        rng = np.random.default_rng(0)
        for stem in ("ref0", "ref1", "ref2"):
            features.write_context_feature(
                fdir / f"{stem}.ctxf", rng.random(64).astype(np.float32)
            )
        out = tmp_path / "ctx.dqnc"
        rc = main(
            ["train", "--pairs", str(pairs_dir), "--out", str(out),
             "--config", str(cfg), "--context", "file", "--features-dir", str(fdir)]
        )
        assert rc == 0
        net, _ = nn.load_checkpoint(out)
        assert net.dims == [64 + 8000, 16, 8, 12]

    def test_pairs_dir_without_manifest(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        rc = main(["train", "--pairs", str(empty), "--out", str(tmp_path / "n.dqnc")])
        assert rc == 1
        assert "no manifest.csv" in capsys.readouterr().err


class TestEnhance:
    def test_identity_policy_is_byte_identical(self, pairs_dir, identity_checkpoint, tmp_path, capsys):
        src = pairs_dir / "ref0.dist.png"
        out = tmp_path / "out.png"
        trace_path = tmp_path / "trace.json"
        rc = main(
            ["enhance", "--checkpoint", str(identity_checkpoint), "--input", str(src),
             "--output", str(out), "--trace", str(trace_path)]
        )
        assert rc == 0
        assert out.read_bytes() == src.read_bytes()
        assert json.loads(trace_path.read_text()) == []
        assert "after 0 edits" in capsys.readouterr().out

    def test_trace_schema(self, pairs_dir, tmp_path):
        # a constant positive-Q net edits until max-steps and logs every step
        net = nn.init_network(8768, 0, hidden_dims=(16,))
        net.weights[-1][:] = 0.0
        net.biases[-1][:] = 0.5
        net.version += 1
        ckpt = tmp_path / "eager.dqnc"
        nn.save_checkpoint(net, ckpt)
        out = tmp_path / "out.png"
        trace_path = tmp_path / "trace.json"
        rc = main(
            ["enhance", "--checkpoint", str(ckpt), "--input", str(pairs_dir / "ref1.dist.png"),
             "--output", str(out), "--trace", str(trace_path), "--max-steps", "3"]
        )
        assert rc == 0
        entries = json.loads(trace_path.read_text())
        assert len(entries) == 3
        for step, entry in enumerate(entries):
            assert entry["step"] == step
            assert entry["action_index"] == 0  # ties break to the lowest index
            assert entry["action_name"] == "contrast_down"
            assert entry["q_value"] == pytest.approx(0.5, abs=1e-6)
            assert entry["distance_after"] is None  # no reference at enhance time

    def test_rerun_identical(self, pairs_dir, identity_checkpoint, tmp_path):
        outs = []
        for name in ("a.png", "b.png"):
            out = tmp_path / name
            main(
                ["enhance", "--checkpoint", str(identity_checkpoint),
                 "--input", str(pairs_dir / "ref2.dist.png"), "--output", str(out)]
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_missing_checkpoint_reported(self, pairs_dir, tmp_path, capsys):
        rc = main(
            ["enhance", "--checkpoint", str(tmp_path / "nope.dqnc"),
             "--input", str(pairs_dir / "ref0.dist.png"), "--output", str(tmp_path / "o.png")]
        )
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestEval:
    def test_identity_policy_report(self, pairs_dir, identity_checkpoint, tmp_path, capsys):
        report = tmp_path / "report.csv"
        rc = main(
            ["eval", "--checkpoint", str(identity_checkpoint), "--pairs", str(pairs_dir),
             "--report", str(report)]
        )
        assert rc == 0
        with open(report, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["stem"] for r in rows] == ["ref0", "ref1", "ref2", "AGGREGATE"]
        for row in rows[:-1]:
            assert row["l2_after"] == row["l2_before"]  # no edits applied
            assert 0.0 <= float(row["ssim"]) <= 1.0
        agg = rows[-1]
        mean_before = np.mean([float(r["l2_before"]) for r in rows[:-1]])
        assert float(agg["l2_before"]) == pytest.approx(mean_before, abs=5e-7)
        out = capsys.readouterr().out
        assert "mean L2 before" in out
        assert "+0.0% reduction" in out

    def test_jobs_match_serial(self, pairs_dir, identity_checkpoint, tmp_path):
        serial = tmp_path / "serial.csv"
        parallel = tmp_path / "parallel.csv"
        main(["eval", "--checkpoint", str(identity_checkpoint), "--pairs", str(pairs_dir),
              "--report", str(serial)])
        main(["eval", "--checkpoint", str(identity_checkpoint), "--pairs", str(pairs_dir),
              "--report", str(parallel), "--jobs", "2"])
        assert serial.read_text() == parallel.read_text()


class TestBench:
    def test_smoke(self, capsys):
        rc = main(["bench", "--side", "48", "--repeats", "1"])
        assert rc == 0
        out = capsys.readouterr().out
        for op in ("srgb_to_lab", "lab_histogram", "luminance"):
            assert op in out

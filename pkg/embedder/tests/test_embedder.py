"""Embedder conformance: EMB1 output the primary pipeline accepts unmodified."""

from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import OFFLINE_MODEL, make_image, write_manifest
from memeground.embedding import read_embedding_file, vector_norm
from vit_embedder.cli import main
from vit_embedder.embedder import (
    EmbedJob,
    ManifestError,
    embed_manifest,
    read_manifest_tsv,
)
from vit_embedder.model import ModelError, load_model


@pytest.fixture
def three_images(tmp_path):
    items = [
        (f"img-{i}", make_image(tmp_path / f"img{i}.png", seed=100 + i)) for i in range(3)
    ]
    return items


class TestAcceptance:
    def test_three_image_manifest_conformance(self, tmp_path, three_images):
        job = EmbedJob(manifest=three_images, model_id=OFFLINE_MODEL)
        first = tmp_path / "run1.bin"
        second = tmp_path / "run2.bin"
        result = embed_manifest(job, first)
        assert result.embedded == 3 and result.skipped == []

        batch = read_embedding_file(first)  # the primary reader, unmodified
        assert batch.dim == 768
        assert [item_id for item_id, _ in batch.entries] == [i for i, _ in three_images]
        for item_id, vector in batch.entries:
            assert abs(vector_norm(vector) - 1.0) < 1e-5, item_id

        embed_manifest(job, second)
        assert first.read_bytes() == second.read_bytes()
        print("ACCEPTANCE PASS: embedder conformance (3-image manifest)")


class TestEmbedManifest:
    def test_duplicate_image_same_vector(self, tmp_path):
        image = make_image(tmp_path / "one.png", seed=7)
        job = EmbedJob(manifest=[("a", image), ("b", image)], model_id=OFFLINE_MODEL)
        embed_manifest(job, tmp_path / "out.bin")
        batch = read_embedding_file(tmp_path / "out.bin")
        vectors = dict(batch.entries)
        assert np.array_equal(vectors["a"], vectors["b"])

    def test_empty_manifest(self, tmp_path):
        result = embed_manifest(EmbedJob(manifest=[], model_id=OFFLINE_MODEL), tmp_path / "o.bin")
        assert result.embedded == 0
        assert read_embedding_file(tmp_path / "o.bin").entries == []

    def test_undecodable_image_skipped(self, tmp_path):
        good = make_image(tmp_path / "good.png", seed=3)
        bad = tmp_path / "bad.png"
        bad.write_text("not an image")
        job = EmbedJob(manifest=[("bad", bad), ("good", good)], model_id=OFFLINE_MODEL)
        result = embed_manifest(job, tmp_path / "out.bin")
        assert result.embedded == 1
        assert [item_id for item_id, _ in result.skipped] == ["bad"]
        batch = read_embedding_file(tmp_path / "out.bin")
        assert [item_id for item_id, _ in batch.entries] == ["good"]

    def test_missing_file_skipped(self, tmp_path):
        job = EmbedJob(manifest=[("ghost", tmp_path / "ghost.png")], model_id=OFFLINE_MODEL)
        result = embed_manifest(job, tmp_path / "out.bin")
        assert result.embedded == 0
        assert result.skipped and result.skipped[0][0] == "ghost"

    def test_dim_mismatch_rejected(self, tmp_path, three_images):
        job = EmbedJob(manifest=three_images, model_id=OFFLINE_MODEL, dim=512)
        with pytest.raises(ModelError, match="512"):
            embed_manifest(job, tmp_path / "never.bin")

    def test_distinct_images_distinct_vectors(self, tmp_path, three_images):
        embed_manifest(EmbedJob(manifest=three_images, model_id=OFFLINE_MODEL), tmp_path / "o.bin")
        batch = read_embedding_file(tmp_path / "o.bin")
        vectors = [v for _, v in batch.entries]
        assert not np.array_equal(vectors[0], vectors[1])
        assert not np.array_equal(vectors[1], vectors[2])


class TestManifest:
    def test_roundtrip(self, tmp_path):
        path = write_manifest(tmp_path / "m.tsv", [("a", tmp_path / "a.png")])
        assert read_manifest_tsv(path) == [("a", tmp_path / "a.png")]

    def test_wrong_columns(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("a\tb\tc\n", encoding="utf-8")
        with pytest.raises(ManifestError, match="row 1"):
            read_manifest_tsv(path)

    def test_duplicate_ids(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("a\t/x\na\t/y\n", encoding="utf-8")
        with pytest.raises(ManifestError, match="duplicate"):
            read_manifest_tsv(path)


class TestModel:
    def test_random_seed_reproducible(self):
        a = load_model("random:42")
        b = load_model("random:42")
        first = next(iter(a.state_dict().values()))
        second = next(iter(b.state_dict().values()))
        assert bool((first == second).all())

    def test_bad_random_spec(self):
        with pytest.raises(ModelError):
            load_model("random:not-a-seed")

    def test_pretrained_checkpoint_if_reachable(self, tmp_path):
        try:
            model = load_model()
        except ModelError:
            pytest.skip("checkpoint download unavailable in this environment")
        assert model.config.hidden_size == 768


class TestCli:
    def test_embed_command(self, tmp_path, three_images, capsys):
        manifest = write_manifest(tmp_path / "m.tsv", three_images)
        out = tmp_path / "cli.bin"
        rc = main(
            [
                "embed",
                "--manifest",
                str(manifest),
                "--out",
                str(out),
                "--model-id",
                OFFLINE_MODEL,
            ]
        )
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["embedded"] == 3 and summary["dim"] == 768
        assert read_embedding_file(out).dim == 768

    def test_missing_manifest_exits_1(self, tmp_path, capsys):
        rc = main(["embed", "--manifest", str(tmp_path / "none.tsv"), "--out", str(tmp_path / "o")])
        assert rc == 1

    def test_no_args_usage(self, capsys):
        assert main([]) == 2

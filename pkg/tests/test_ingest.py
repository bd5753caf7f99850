import json

import numpy as np
import pytest

from costsight import CostMatrix, InstanceRecord, bayes_decide_map
from costsight.errors import (
    DimensionMismatch,
    InvalidSpec,
    MagicMismatch,
    SchemaViolation,
    TruncatedFile,
)
from costsight.ingest import (
    DatasetManifest,
    FixtureSpec,
    generate_answers,
    generate_fixture,
    read_answers,
    read_imap,
    read_label_png,
    read_lmap,
    read_matrix,
    read_pmap,
    validate_manifest,
    write_answers,
    write_imap,
    write_label_png,
    write_lmap,
    write_matrix,
    write_pmap,
)
from costsight.ingest.manifest import validate_answers_file

from conftest import make_answer, random_simplex


class TestBinaryRoundTrips:
    def test_pmap_bitwise(self, rng, tmp_path):
        pm = random_simplex(rng, 6, size=(16, 16)).astype(np.float32)
        path = tmp_path / "a.pmap"
        write_pmap(path, pm)
        again = read_pmap(path)
        assert again.dtype == np.float32
        np.testing.assert_array_equal(
            again.view(np.uint32), pm.view(np.uint32)
        )

    def test_lmap_bitwise(self, rng, tmp_path):
        lm = rng.integers(0, 6, size=(9, 13)).astype(np.uint8)
        lm[0, 0] = 255
        path = tmp_path / "a.lmap"
        write_lmap(path, lm)
        np.testing.assert_array_equal(read_lmap(path), lm)

    def test_imap_bitwise(self, rng, tmp_path):
        im = rng.integers(0, 5000, size=(7, 5)).astype(np.uint16)
        path = tmp_path / "a.imap"
        write_imap(path, im)
        np.testing.assert_array_equal(read_imap(path), im)

    def test_label_png_round_trip(self, rng, tmp_path):
        lm = rng.integers(0, 6, size=(12, 8)).astype(np.uint8)
        path = tmp_path / "a.png"
        write_label_png(path, lm)
        np.testing.assert_array_equal(read_label_png(path), lm)


class TestCorruptFiles:
    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.pmap"
        path.write_bytes(b"XMAPv001" + b"\x00" * 20)
        with pytest.raises(MagicMismatch, match="PMAPv001"):
            read_pmap(path)

    def test_truncated_payload(self, rng, tmp_path):
        pm = random_simplex(rng, 6, size=(4, 4)).astype(np.float32)
        path = tmp_path / "a.pmap"
        write_pmap(path, pm)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(TruncatedFile, match="payload"):
            read_pmap(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "a.lmap"
        path.write_bytes(b"LMAPv001" + b"\x01\x00")
        with pytest.raises(TruncatedFile, match="header"):
            read_lmap(path)

    def test_trailing_garbage(self, rng, tmp_path):
        lm = rng.integers(0, 6, size=(4, 4)).astype(np.uint8)
        path = tmp_path / "a.lmap"
        write_lmap(path, lm)
        path.write_bytes(path.read_bytes() + b"zz")
        with pytest.raises(DimensionMismatch, match="longer"):
            read_lmap(path)

    def test_zero_dimension(self, tmp_path):
        import struct
        path = tmp_path / "a.imap"
        path.write_bytes(b"IMAPv001" + struct.pack("<2I", 0, 5))
        with pytest.raises(DimensionMismatch, match="H=0"):
            read_imap(path)


class TestJsonFormats:
    def test_matrix_round_trip_linear(self, tmp_path):
        c = CostMatrix([[0, 2], [1, 0]], class_names=("street", "dog"))
        path = tmp_path / "c.json"
        write_matrix(path, c)
        again = read_matrix(path)
        assert isinstance(again, CostMatrix)
        np.testing.assert_array_equal(again.entries, c.entries)

    def test_matrix_round_trip_log(self, tmp_path):
        from costsight import GROUP_MATRICES
        m = GROUP_MATRICES["passenger"]
        path = tmp_path / "m.json"
        write_matrix(path, m)
        again = read_matrix(path)
        np.testing.assert_array_equal(
            np.isnan(again.entries), np.isnan(m.entries)
        )
        np.testing.assert_array_equal(
            np.nan_to_num(again.entries), np.nan_to_num(m.entries)
        )

    def test_matrix_bad_space(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"space": "sqrt", "entries": []}')
        with pytest.raises(SchemaViolation, match="space"):
            read_matrix(path)

    def test_answers_round_trip(self, tmp_path):
        answers = [make_answer(1, 3), make_answer(5, {1: 0, 2: 6, 3: 3, 4: 1,
                                                      6: 2})]
        path = tmp_path / "a.jsonl"
        write_answers(path, answers)
        assert read_answers(path) == answers

    def test_answer_missing_severity_names_class(self, tmp_path):
        good = make_answer(5, 4).to_dict()
        del good["severities"]["3"]
        path = tmp_path / "a.jsonl"
        path.write_text(json.dumps(good) + "\n")
        with pytest.raises(SchemaViolation, match="missing class 3"):
            read_answers(path)

    def test_instance_records_round_trip(self, tmp_path):
        records = [
            InstanceRecord("img_0", 1, "human", 12.5, 40, bearing_deg=-3.0),
            InstanceRecord("img_0", 2, "dynamic", 30.0, 90),
        ]
        path = tmp_path / "inst.jsonl"
        from costsight.ingest import write_instance_records, read_instance_records
        write_instance_records(path, records)
        assert read_instance_records(path) == records


class TestFixtureGeneration:
    def test_zero_noise_recovers_ground_truth(self, tmp_path):
        spec = FixtureSpec(images=2, height=32, width=48, label_noise=0.0)
        manifest = generate_fixture(spec, seed=5, out_dir=tmp_path)
        for image_id in manifest.image_ids:
            pm = manifest.load_pmap(image_id)
            gt = manifest.load_gt(image_id)
            np.testing.assert_array_equal(bayes_decide_map(pm), gt)

    def test_deterministic(self, tmp_path):
        spec = FixtureSpec(images=2, height=24, width=24, label_noise=0.2)
        m1 = generate_fixture(spec, seed=9, out_dir=tmp_path / "a")
        m2 = generate_fixture(spec, seed=9, out_dir=tmp_path / "b")
        assert m1.to_dict()["images"] == m2.to_dict()["images"]
        for image_id in m1.image_ids:
            np.testing.assert_array_equal(
                m1.load_pmap(image_id), m2.load_pmap(image_id)
            )
            np.testing.assert_array_equal(
                m1.load_gt(image_id), m2.load_gt(image_id)
            )
        assert (tmp_path / "a" / "instances.jsonl").read_bytes() == \
            (tmp_path / "b" / "instances.jsonl").read_bytes()

    def test_noise_hits_exact_share_of_instance(self, tmp_path):
        spec = FixtureSpec(
            images=1, height=32, width=32, humans_per_image=1,
            vehicles_per_image=0, info_per_image=0,
            min_instance_pixels=10, max_instance_pixels=10,
            label_noise=0.4,
        )
        manifest = generate_fixture(spec, seed=3, out_dir=tmp_path)
        image_id = manifest.image_ids[0]
        pred = bayes_decide_map(manifest.load_pmap(image_id))
        inst = manifest.load_instance_raster(image_id)
        records = manifest.load_instance_records()
        assert len(records) == 1 and records[0].pixel_count == 10
        from costsight import instance_recall
        assert instance_recall(pred, inst, records[0].instance_id) == 0.6

    def test_invalid_spec(self):
        with pytest.raises(InvalidSpec):
            FixtureSpec(images=0)
        with pytest.raises(InvalidSpec):
            FixtureSpec(label_noise=1.5)

    def test_validate_clean_manifest(self, tmp_path):
        spec = FixtureSpec(images=2, height=16, width=16,
                           min_instance_pixels=4, max_instance_pixels=12)
        manifest = generate_fixture(spec, seed=1, out_dir=tmp_path)
        assert validate_manifest(manifest) == []

    def test_validate_flags_dimension_mismatch(self, tmp_path):
        spec = FixtureSpec(images=1, height=16, width=16,
                           min_instance_pixels=4, max_instance_pixels=12)
        manifest = generate_fixture(spec, seed=1, out_dir=tmp_path)
        entry = manifest.entries[0]
        write_lmap(manifest.path(entry.gt), np.zeros((8, 8), dtype=np.uint8))
        diags = validate_manifest(manifest)
        assert len(diags) == 1
        assert "dimension" in diags[0].reason

    def test_validate_flags_missing_file(self, tmp_path):
        spec = FixtureSpec(images=1, height=16, width=16,
                           min_instance_pixels=4, max_instance_pixels=12)
        manifest = generate_fixture(spec, seed=1, out_dir=tmp_path)
        manifest.path(manifest.entries[0].pmap).unlink()
        diags = validate_manifest(manifest)
        assert any("pmap" in d.reason for d in diags)

    def test_manifest_load_save_round_trip(self, tmp_path):
        spec = FixtureSpec(images=2, height=16, width=16,
                           min_instance_pixels=4, max_instance_pixels=12)
        manifest = generate_fixture(spec, seed=1, out_dir=tmp_path)
        again = DatasetManifest.load(tmp_path / "manifest.json")
        assert again.image_ids == manifest.image_ids
        assert again.n_classes == manifest.n_classes


class TestGenerateAnswers:
    def test_group_sizes_match_request(self):
        answers = generate_answers({"passenger": 40, "external": 25}, seed=2)
        assert sum(a.perspective == "passenger" for a in answers) == 40
        assert sum(a.perspective == "external" for a in answers) == 25

    def test_gender_counts(self):
        answers = generate_answers(
            {"passenger": 30, "external": 30}, seed=2,
            gender_counts={"female": 25, "male": 30, None: 5},
        )
        assert sum(a.gender == "female" for a in answers) == 25
        assert sum(a.gender is None for a in answers) == 5

    def test_deterministic(self):
        a = generate_answers({"passenger": 20, "external": 20}, seed=4)
        b = generate_answers({"passenger": 20, "external": 20}, seed=4)
        assert a == b

    def test_corpus_validates_per_line(self, tmp_path):
        answers = generate_answers({"passenger": 30, "external": 20}, seed=6)
        path = tmp_path / "answers.jsonl"
        write_answers(path, answers)
        assert validate_answers_file(path) == []
        # inject 3 violations
        lines = path.read_text().splitlines()
        bad = json.loads(lines[0])
        del bad["severities"][next(iter(bad["severities"]))]
        lines[0] = json.dumps(bad)
        bad2 = json.loads(lines[1])
        bad2["target_class"] = 9
        lines[1] = json.dumps(bad2)
        lines[2] = "{not json"
        path.write_text("\n".join(lines) + "\n")
        assert len(validate_answers_file(path)) == 3

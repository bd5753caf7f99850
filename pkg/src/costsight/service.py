"""HTTP gateway: survey collection, aggregation, tests and what-if runs.

Routes
------
POST /api/session           open a survey session (perspective assigned 50/50)
GET  /api/scenarios/next    next unanswered scene for a session
POST /api/answers           validate and durably append one answer
POST /api/feedback          closing questionnaire (difficulty, demographics)
GET  /api/matrices          mean-log matrix for a group filter
GET  /api/ftest             two-group bootstrap F-test over the stored corpus
POST /api/whatif            decide + metrics + consequences on the resident
                            fixture set for a posted cost matrix

The what-if path is read-only with respect to the answer store; the CLI and
these routes share the same core functions, so both produce identical numbers
for identical inputs.
"""

import datetime
import io
import json
import os
import random
import tempfile
import uuid
import warnings
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field
from PIL import Image

from . import published
from .anova import SHUFFLE_MODES, GroupedAnswers, bootstrap_p
from .birdseye import birdseye_points
from .consequence import consequences
from .costmatrix import (
    AnswerRecord,
    CostMatrix,
    MeanLogCostMatrix,
    PERSPECTIVES,
    aggregate_answers,
    robot_log_matrix,
    to_linear,
)
from .decision import decide_map
from .errors import (
    CostsightError,
    EmptyGroup,
    IncompleteCoverageWarning,
    SchemaViolation,
)
from .ingest import FixtureSpec, generate_fixture
from .ingest.manifest import DatasetManifest
from .metrics import compute_metrics, confusion_counts
from .store import JsonlAnswerStore
from .taxonomy import COARSE_NAMES

ENV_PORT = "COSTSIGHT_PORT"
ENV_STORE = "COSTSIGHT_STORE"
ENV_FIXTURES = "COSTSIGHT_FIXTURES"

_CLASS_COLORS = (
    (128, 64, 128),   # drivable
    (152, 251, 152),  # nondrivable
    (70, 70, 70),     # static
    (250, 170, 30),   # info
    (220, 20, 60),    # human
    (0, 0, 142),      # dynamic
)


@dataclass
class Session:
    session_id: str
    perspective: str
    created_at: str
    answered: set = field(default_factory=set)


class AnswerBody(BaseModel):
    session_id: str
    image_id: str
    target_class: int
    severities: dict
    gender: str | None = None
    age_band: str | None = None
    graduation: str | None = None
    field: str | None = None
    license: str | None = None
    transport: str | None = None


class FeedbackBody(BaseModel):
    session_id: str
    difficulty: int | None = Field(default=None, ge=1, le=5)
    comments: str | None = None
    gender: str | None = None
    age_band: str | None = None
    graduation: str | None = None
    field: str | None = None
    license: str | None = None
    transport: str | None = None


class WhatIfBody(BaseModel):
    matrix: dict | str
    baseline: str = "robot"
    dataset_id: str = "default"
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _resolve_matrix(spec):
    """Preset name or matrix dict -> linear CostMatrix."""
    if isinstance(spec, str):
        try:
            return published.preset(spec)
        except KeyError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
    try:
        space = spec.get("space")
        if space == "log10":
            return to_linear(MeanLogCostMatrix.from_dict(spec))
        return CostMatrix.from_dict(spec)
    except (CostsightError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))


class WhatIfDataset:
    """Fixture images held in memory for low-latency what-if runs."""

    def __init__(self, manifest):
        self.manifest = manifest
        self.gt = {}
        self.pmaps = {}
        self.rasters = {}
        for image_id in manifest.image_ids:
            self.gt[image_id] = manifest.load_gt(image_id)
            self.pmaps[image_id] = manifest.load_pmap(image_id)
            self.rasters[image_id] = manifest.load_instance_raster(image_id)
        self.records = manifest.load_instance_records()

    def run(self, cost_matrix, baseline_matrix, threshold):
        pred = {i: decide_map(pm, cost_matrix)
                for i, pm in self.pmaps.items()}
        base = {i: decide_map(pm, baseline_matrix)
                for i, pm in self.pmaps.items()}
        counts = None
        for image_id, p in pred.items():
            c = confusion_counts(p, self.gt[image_id],
                                 self.manifest.n_classes)
            counts = c if counts is None else counts + c
        report = consequences(
            pred, base, self.gt, self.rasters, self.records,
            threshold=threshold, rule_names=("whatif", "baseline"),
        )
        metrics = compute_metrics(counts, class_names=COARSE_NAMES)
        return metrics, report


def _default_fixture_dir():
    path = os.path.join(tempfile.gettempdir(), "costsight-default-fixture")
    if not os.path.exists(os.path.join(path, "manifest.json")):
        os.makedirs(path, exist_ok=True)
        generate_fixture(
            FixtureSpec(images=6, height=96, width=160, humans_per_image=3,
                        vehicles_per_image=2, label_noise=0.45,
                        noise_jitter=0.35),
            seed=1234,
            out_dir=path,
        )
    return path


def create_app(store_path=None, fixtures_dir=None, ui_dir=None,
               session_seed=None):
    """Build the FastAPI app.

    Parameters fall back to the COSTSIGHT_STORE and COSTSIGHT_FIXTURES
    environment variables; without a fixtures directory a small synthetic
    dataset is generated under the system temp directory so the service is
    usable out of the box. ``session_seed`` makes perspective assignment
    deterministic (tests only).
    """
    store_path = store_path or os.environ.get(ENV_STORE) or os.path.join(
        tempfile.gettempdir(), "costsight-answers.jsonl"
    )
    fixtures_dir = fixtures_dir or os.environ.get(ENV_FIXTURES) \
        or _default_fixture_dir()
    manifest = DatasetManifest.load(os.path.join(fixtures_dir,
                                                 "manifest.json"))
    dataset = WhatIfDataset(manifest)
    store = JsonlAnswerStore(store_path)
    feedback_path = store_path + ".feedback.jsonl"
    sessions = {}
    session_rng = random.Random(session_seed)
    scenario_pool = list(dataset.records)

    app = FastAPI(title="costsight gateway", version="0.1.0")

    def _session(session_id):
        s = sessions.get(session_id)
        if s is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id!r}")
        return s

    @app.post("/api/session")
    def open_session():
        session_id = uuid.uuid4().hex
        s = Session(
            session_id=session_id,
            perspective=session_rng.choice(PERSPECTIVES),
            created_at=_now(),
        )
        sessions[session_id] = s
        return {"session_id": s.session_id, "perspective": s.perspective,
                "created_at": s.created_at}

    @app.get("/api/scenarios/next")
    def next_scenario(session_id: str):
        s = _session(session_id)
        order = list(range(len(scenario_pool)))
        random.Random(session_id).shuffle(order)
        for idx in order:
            rec = scenario_pool[idx]
            if rec.image_id in s.answered:
                continue
            cls_index = COARSE_NAMES.index(rec.class_name) + 1
            return {
                "image_id": rec.image_id,
                "instance_id": rec.instance_id,
                "image_url": f"/api/scenario-image/{rec.image_id}/"
                             f"{rec.instance_id}.png",
                "target_class": cls_index,
                "class_name": rec.class_name,
                "perspective": s.perspective,
            }
        raise HTTPException(status_code=410,
                            detail="scenario pool exhausted for this session")

    @app.get("/api/scenario-image/{image_id}/{instance_id}.png")
    def scenario_image(image_id: str, instance_id: int):
        if image_id not in dataset.gt:
            raise HTTPException(status_code=404,
                                detail=f"unknown image {image_id!r}")
        gt = dataset.gt[image_id]
        raster = dataset.rasters[image_id]
        rgb = np.zeros((*gt.shape, 3), dtype=np.uint8)
        for cls, color in enumerate(_CLASS_COLORS):
            rgb[gt == cls] = color
        highlight = raster == instance_id
        rgb[highlight] = (255, 0, 0)
        img = Image.fromarray(rgb).resize(
            (gt.shape[1] * 4, gt.shape[0] * 4), Image.NEAREST
        )
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/api/answers")
    def submit_answer(body: AnswerBody):
        s = _session(body.session_id)
        if body.image_id in s.answered:
            raise HTTPException(
                status_code=409,
                detail=f"session already answered image {body.image_id!r}",
            )
        payload = body.model_dump(exclude_none=True)
        payload.pop("session_id")
        payload.update(
            participant_id=s.session_id,
            perspective=s.perspective,
            timestamp=_now(),
        )
        try:
            record = AnswerRecord.from_dict(payload)
        except SchemaViolation as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            answer_id = store.append(record)
        except OSError as exc:
            raise HTTPException(status_code=503,
                                detail=f"answer store unavailable: {exc}")
        s.answered.add(body.image_id)
        return {"answer_id": answer_id, "stored": len(store)}

    @app.post("/api/feedback")
    def submit_feedback(body: FeedbackBody):
        _session(body.session_id)
        entry = body.model_dump(exclude_none=True)
        entry["timestamp"] = _now()
        try:
            with open(feedback_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, separators=(",", ":")) + "\n")
                f.flush()
                os.fsync(f.fileno())
        except OSError as exc:
            raise HTTPException(status_code=503,
                                detail=f"feedback store unavailable: {exc}")
        return {"stored": True}

    @app.get("/api/matrices")
    def matrices(perspective: str | None = None, gender: str | None = None,
                 preset: str | None = None):
        if preset is not None:
            if preset == "robot":
                m = robot_log_matrix(len(COARSE_NAMES), COARSE_NAMES)
            elif preset in published.GROUP_MATRICES:
                m = published.GROUP_MATRICES[preset]
            else:
                raise HTTPException(status_code=404,
                                    detail=f"unknown preset {preset!r}")
            return {"group": preset, "n_answers": None, **m.to_dict()}
        group = {}
        if perspective is not None:
            group["perspective"] = perspective
        if gender is not None:
            group["gender"] = gender
        answers = store.replay()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IncompleteCoverageWarning)
                m = aggregate_answers(answers, group=group or None)
        except EmptyGroup:
            raise HTTPException(
                status_code=404,
                detail=f"no stored answers match filter {group}",
            )
        selected = [a for a in answers
                    if all(getattr(a, k) == v for k, v in group.items())]
        return {"group": group or "all", "n_answers": len(selected),
                "coverage_ok": m.coverage_ok, **m.to_dict()}

    @app.get("/api/ftest")
    def ftest(split: str = "perspective", shuffles: int = 1000,
              seed: int = 0, mode: str = "pooled"):
        if split not in ("perspective", "gender"):
            raise HTTPException(status_code=400,
                                detail=f"unsupported split {split!r}")
        if mode not in SHUFFLE_MODES:
            raise HTTPException(status_code=400,
                                detail=f"unsupported mode {mode!r}")
        answers = store.replay()
        try:
            g = GroupedAnswers.from_answers(answers, split)
            result = bootstrap_p(g, shuffles=shuffles, seed=seed, mode=mode)
        except (CostsightError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return result.to_dict()

    @app.post("/api/whatif")
    def whatif(body: WhatIfBody):
        if body.dataset_id != "default":
            raise HTTPException(status_code=404,
                                detail=f"unknown dataset {body.dataset_id!r}")
        cost = _resolve_matrix(body.matrix)
        baseline = _resolve_matrix(body.baseline)
        if cost.n_classes != manifest.n_classes:
            raise HTTPException(
                status_code=400,
                detail=f"matrix has {cost.n_classes} classes, dataset has "
                       f"{manifest.n_classes}",
            )
        try:
            metrics, report = dataset.run(cost, baseline, body.threshold)
        except CostsightError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "dataset_id": body.dataset_id,
            "threshold": body.threshold,
            "metrics": metrics.to_dict(),
            "consequences": {
                "zones": [z.to_dict() for z in report.zones],
                "precision_whatif": report.precision_a.to_dict(),
                "precision_baseline": report.precision_b.to_dict(),
            },
            "birdseye": birdseye_points(report),
        }

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    app.state.store = store
    app.state.dataset = dataset
    app.state.sessions = sessions
    return app

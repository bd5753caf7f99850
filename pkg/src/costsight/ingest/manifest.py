"""Dataset manifests tying rasters, metadata and taxonomy together."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..costmatrix import AnswerRecord
from ..errors import SchemaViolation
from . import formats

MANIFEST_FORMAT = "costsight-manifest-v1"


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    pmap: str
    gt: str
    instances: str
    meta: str

    def to_dict(self):
        return {
            "image_id": self.image_id,
            "pmap": self.pmap,
            "gt": self.gt,
            "instances": self.instances,
            "meta": self.meta,
        }


@dataclass(frozen=True)
class Diagnostic:
    image_id: str | None
    reason: str

    def __str__(self):
        where = self.image_id or "<manifest>"
        return f"{where}: {self.reason}"


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    entries: tuple
    n_classes: int
    taxonomy: str | None = None
    format_versions: dict | None = None
    extra: dict | None = None

    def path(self, rel):
        return Path(self.root) / rel

    @property
    def image_ids(self):
        return tuple(e.image_id for e in self.entries)

    def entry(self, image_id):
        for e in self.entries:
            if e.image_id == image_id:
                return e
        raise KeyError(image_id)

    def load_pmap(self, image_id):
        return formats.read_pmap(self.path(self.entry(image_id).pmap))

    def load_gt(self, image_id):
        return formats.read_lmap(self.path(self.entry(image_id).gt))

    def load_instance_raster(self, image_id):
        return formats.read_imap(self.path(self.entry(image_id).instances))

    def load_instance_records(self):
        """All instance metadata referenced by the manifest, deduplicated."""
        records = []
        seen = set()
        for e in self.entries:
            if e.meta in seen:
                continue
            seen.add(e.meta)
            records.extend(formats.read_instance_records(self.path(e.meta)))
        return records

    def to_dict(self):
        return {
            "format": MANIFEST_FORMAT,
            "n_classes": self.n_classes,
            "taxonomy": self.taxonomy,
            "format_versions": self.format_versions or {},
            "images": [e.to_dict() for e in self.entries],
            "extra": self.extra or {},
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path):
        path = Path(path)
        with open(path, encoding="utf-8") as f:
            try:
                d = json.load(f)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"{path}: not valid JSON: {exc}") from None
        if d.get("format") != MANIFEST_FORMAT:
            raise SchemaViolation(
                f"{path}: field 'format': expected {MANIFEST_FORMAT!r}, "
                f"got {d.get('format')!r}"
            )
        if "images" not in d or not isinstance(d["images"], list):
            raise SchemaViolation(f"{path}: field 'images': missing or not a list")
        entries = []
        for i, item in enumerate(d["images"]):
            for key in ("image_id", "pmap", "gt", "instances", "meta"):
                if key not in item:
                    raise SchemaViolation(
                        f"{path}: images[{i}]: field '{key}': missing"
                    )
            entries.append(ManifestEntry(
                image_id=item["image_id"],
                pmap=item["pmap"],
                gt=item["gt"],
                instances=item["instances"],
                meta=item["meta"],
            ))
        return cls(
            root=path.parent,
            entries=tuple(entries),
            n_classes=int(d.get("n_classes", 6)),
            taxonomy=d.get("taxonomy"),
            format_versions=d.get("format_versions"),
            extra=d.get("extra"),
        )


def validate_manifest(m):
    """Check a loaded manifest: files exist, parse, and dimensions agree.

    Returns a list of :class:`Diagnostic`; empty means all invariants hold.
    Failures are collected, not raised, so one broken image does not hide
    the rest.
    """
    out = []
    records = None
    try:
        records = m.load_instance_records()
    except FileNotFoundError as exc:
        out.append(Diagnostic(None, f"instance metadata missing: {exc}"))
    except SchemaViolation as exc:
        out.append(Diagnostic(None, f"instance metadata invalid: {exc}"))
    by_image = {}
    if records is not None:
        for rec in records:
            by_image.setdefault(rec.image_id, []).append(rec)
    for e in m.entries:
        shapes = {}
        for kind, loader in (("pmap", m.load_pmap), ("gt", m.load_gt),
                             ("instances", m.load_instance_raster)):
            try:
                arr = loader(e.image_id)
            except FileNotFoundError:
                out.append(Diagnostic(e.image_id, f"{kind} file missing"))
                continue
            except Exception as exc:  # format errors carry the details
                out.append(Diagnostic(e.image_id, f"{kind} unreadable: {exc}"))
                continue
            shapes[kind] = arr.shape[:2]
            if kind == "pmap" and arr.shape[-1] != m.n_classes:
                out.append(Diagnostic(
                    e.image_id,
                    f"pmap has {arr.shape[-1]} classes, manifest says "
                    f"{m.n_classes}",
                ))
            if kind == "instances":
                present = set(np.unique(arr)) - {0}
                for rec in by_image.get(e.image_id, ()):
                    if rec.instance_id not in present:
                        out.append(Diagnostic(
                            e.image_id,
                            f"instance {rec.instance_id} in metadata but "
                            "not in raster",
                        ))
        if len({s for s in shapes.values()}) > 1:
            dims = ", ".join(f"{k}={v}" for k, v in sorted(shapes.items()))
            out.append(Diagnostic(e.image_id, f"dimension mismatch: {dims}"))
    return out


def validate_answers_file(path):
    """Per-line schema check of an answer corpus; returns diagnostics."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                out.append(Diagnostic(None, f"line {lineno}: not JSON: {exc}"))
                continue
            try:
                AnswerRecord.from_dict(d)
            except SchemaViolation as exc:
                out.append(Diagnostic(None, f"line {lineno}: {exc}"))
    return out

from .formats import (
    read_answers,
    read_imap,
    read_instance_records,
    read_label_png,
    read_lmap,
    read_matrix,
    read_pmap,
    write_answers,
    write_imap,
    write_instance_records,
    write_label_png,
    write_lmap,
    write_matrix,
    write_pmap,
)
from .fixtures import FixtureSpec, generate_answers, generate_fixture
from .manifest import DatasetManifest, Diagnostic, validate_manifest

__all__ = [
    "DatasetManifest",
    "Diagnostic",
    "FixtureSpec",
    "generate_answers",
    "generate_fixture",
    "read_answers",
    "read_imap",
    "read_instance_records",
    "read_label_png",
    "read_lmap",
    "read_matrix",
    "read_pmap",
    "validate_manifest",
    "write_answers",
    "write_imap",
    "write_instance_records",
    "write_label_png",
    "write_lmap",
    "write_matrix",
    "write_pmap",
]

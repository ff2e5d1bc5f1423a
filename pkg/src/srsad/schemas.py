"""JSON schemas for every serialized record; writers validate before
writing so a malformed record can never reach disk."""

from __future__ import annotations

import jsonschema

from .errors import InvalidInput

_SPAN = {"type": "array", "minItems": 2, "maxItems": 2,
         "items": {"type": "integer", "minimum": 0}}

_CLASS_SPAN = {
    "type": "array", "minItems": 3, "maxItems": 3,
    "prefixItems": [
        {"type": "integer", "minimum": 0},
        {"type": "integer", "minimum": 0},
        {"enum": ["speech", "singing", "both", "neither"]},
    ],
}

SCHEMAS: dict[str, dict] = {
    "sample_sidecar": {
        "type": "object",
        "required": ["schema_version", "sample_id", "frame_period_s",
                     "n_frames", "speech_label_spans", "frame_class_spans",
                     "provenance"],
        "properties": {
            "schema_version": {"const": 1},
            "sample_id": {"type": "string", "minLength": 1},
            "frame_period_s": {"type": "number", "exclusiveMinimum": 0},
            "n_frames": {"type": "integer", "minimum": 1},
            "speech_label_spans": {"type": "array", "items": _SPAN},
            "frame_class_spans": {"type": "array", "items": _CLASS_SPAN},
            "provenance": {
                "type": "object",
                "required": ["sample_class", "source_ids", "snr_db",
                             "loudness_lkfs", "augmentations"],
                "properties": {
                    "sample_class": {"enum": ["speech", "singing"]},
                    "source_ids": {"type": "object"},
                    "snr_db": {"type": ["number", "null"]},
                    "loudness_lkfs": {"type": "number"},
                    "augmentations": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["method", "params"],
                            "properties": {
                                "method": {"type": "string"},
                                "params": {"type": "object"},
                            },
                        },
                    },
                },
            },
        },
    },
    "dataset_manifest": {
        "type": "object",
        "required": ["schema_version", "kind", "n_samples", "policy",
                     "sample_ids"],
        "properties": {
            "schema_version": {"const": 1},
            "kind": {"enum": ["train_chunks", "eval_scenes"]},
            "n_samples": {"type": "integer", "minimum": 1},
            "policy": {"type": "object"},
            "sample_ids": {"type": "array",
                           "items": {"type": "string"}, "minItems": 1},
        },
    },
    "metrics_report": {
        "type": "object",
        "required": ["schema_version", "auc", "auc_singing_rejection",
                     "counts", "threshold_policy"],
        "properties": {
            "schema_version": {"const": 1},
            "auc": {"type": "number", "minimum": 0, "maximum": 1},
            "auc_singing_rejection": {"type": "number",
                                      "minimum": 0, "maximum": 1},
            "counts": {"type": "object"},
            "threshold_policy": {"type": "string"},
        },
    },
    "run_record": {
        "type": "object",
        "required": ["schema_version", "command", "seed", "config",
                     "toolkit_version"],
        "properties": {
            "schema_version": {"const": 1},
            "command": {"type": "string"},
            "seed": {"type": "integer"},
            "config": {"type": "object"},
            "toolkit_version": {"type": "string"},
            "input_hashes": {"type": "object"},
        },
    },
    "decisions_sidecar": {
        "type": "object",
        "required": ["schema_version", "threshold", "frame_period_s", "spans",
                     "n_frames"],
        "properties": {
            "schema_version": {"const": 1},
            "threshold": {"type": "number"},
            "frame_period_s": {"type": "number", "exclusiveMinimum": 0},
            "n_frames": {"type": "integer", "minimum": 0},
            "spans": {"type": "array", "items": _SPAN},
        },
    },
    "complexity_report": {
        "type": "object",
        "required": ["schema_version", "architecture", "params", "macs",
                     "chunk_len_s"],
        "properties": {
            "schema_version": {"const": 1},
            "architecture": {"type": "string"},
            "params": {"type": "integer", "minimum": 0},
            "macs": {"type": "integer", "minimum": 0},
            "chunk_len_s": {"type": "number", "exclusiveMinimum": 0},
            "rtf": {"type": ["number", "null"]},
        },
    },
    "train_log_line": {
        "type": "object",
        "required": ["epoch", "train_loss", "val_loss", "lr", "improved"],
        "properties": {
            "epoch": {"type": "integer", "minimum": 1},
            "train_loss": {"type": "number"},
            "val_loss": {"type": "number"},
            "lr": {"type": "number", "exclusiveMinimum": 0},
            "improved": {"type": "boolean"},
        },
    },
}


def validate_record(name: str, record: dict) -> None:
    try:
        schema = SCHEMAS[name]
    except KeyError:
        raise InvalidInput(f"unknown schema {name!r}") from None
    try:
        jsonschema.validate(record, schema)
    except jsonschema.ValidationError as exc:
        raise InvalidInput(f"{name} record invalid: {exc.message}") from exc

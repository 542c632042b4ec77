"""JSON schemas for CLI reports.

Every report carries {"schema": "<id>/v1", "config": RunConfig,
"result": ...}; bumping a schema id is an explicit versioning act.
"""

from __future__ import annotations

SCHEMA_VERSION = 1

_CONFIG = {
    "type": "object",
    "required": ["command", "parameters", "seed", "version"],
    "properties": {
        "command": {"type": "string"},
        "parameters": {"type": "object"},
        "seed": {"type": "integer"},
        "version": {"type": "string"},
    },
}

REPORT_SCHEMAS: dict[str, dict] = {
    "seq-audit": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/seq-audit/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
            "result": {
                "type": "object",
                "required": ["m1_ok", "ratio_bound_ok", "almost_increasing_from",
                             "fitted_C_m2bar", "fitted_Cq_m2prime"],
            },
        },
    },
    "decomp": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/decomp/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
        },
    },
    "fdb": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/fdb/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
            "result": {
                "type": "object",
                "required": ["value"],
            },
        },
    },
    "lemma23": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/lemma23/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
            "result": {"type": "object", "required": ["C", "witness_k"]},
        },
    },
    "fit": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/fit/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
            "result": {
                "type": "object",
                "required": ["tau_hat", "sigma_hat", "h_hat", "A_hat", "admissible"],
            },
        },
    },
    "wf-scan": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/wf-scan/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
            "result": {
                "type": "object",
                "required": ["verdicts"],
                "properties": {"verdicts": {"type": "array"}},
            },
        },
    },
    "parametrix": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/parametrix/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
            "result": {
                "type": "object",
                "required": ["max_residual", "word_count_w", "word_count_e"],
            },
        },
    },
    "catalog": {
        "type": "object",
        "required": ["schema", "config", "result"],
        "properties": {
            "schema": {"const": f"gevrey-kit/catalog/v{SCHEMA_VERSION}"},
            "config": _CONFIG,
            "result": {"type": "object", "required": ["files"]},
        },
    },
}


def schema_id(command: str) -> str:
    return f"gevrey-kit/{command}/v{SCHEMA_VERSION}"


def validate_report(report: dict) -> None:
    """Validate a report against its schema (jsonschema, lazily imported)."""
    import jsonschema

    sid = report.get("schema", "")
    command = sid.split("/")[1] if sid.count("/") == 2 else ""
    if command not in REPORT_SCHEMAS:
        raise ValueError(f"unknown report schema {sid!r}")
    jsonschema.validate(report, REPORT_SCHEMAS[command])

"""Sweep reports: JSON (validated by the bundled schema) and CSV."""
from __future__ import annotations

import json
from importlib import resources

from .sweep import SweepRequest, SweepResult

SCHEMA_VERSION = 1


def load_schema() -> dict:
    text = resources.files("ridge_sketch").joinpath("schema/sweep_report.schema.json").read_text()
    return json.loads(text)


def build_report(req: SweepRequest, result: SweepResult, source=None, include_solution=True) -> dict:
    m, n = req.problem.shape
    doc = {
        "schema_version": SCHEMA_VERSION,
        "problem": {
            "m": m,
            "n": n,
            "orientation": req.problem.orientation.value,
            "source": None if source is None else str(source),
            "meta": req.problem.meta,
        },
        "request": {
            "method": req.method,
            "lambdas": list(req.lambdas),
            "alpha": req.alpha,
            "rel_tolerance": req.solver.rel_tolerance,
            "max_iterations": req.solver.max_iterations,
            "threads": req.threads,
        },
    }
    doc.update(result.to_json(include_solution))
    return doc


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` does not match the schema."""
    import jsonschema

    jsonschema.validate(doc, load_schema())


def write_report(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def write_csv(path, result: SweepResult) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(result.to_csv())

#!/usr/bin/env python3
"""Regenerate tests/fixtures/golden.json.

The fixture pins every number the acceptance tests compare bit for bit:
per-iteration churns, objectives, eigenvalues, accuracies, the predicted
labels, and sha256 digests of the generated features. Rerun this script
only when an intentional behavior change invalidates the frozen values,
and say why in the commit message.
"""
from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dbmmd.adapt import ModelKind, run_adaptation
from dbmmd.datamodel import AdaptConfig
from dbmmd.synthetic import SyntheticRecipe, generate_synthetic

FIXTURE_PATH = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "golden.json"

RECIPE = SyntheticRecipe(
    class_count=3,
    samples_per_class=50,
    feature_dim=2,
    shift="rotation",
    shift_param=30.0,
    noise_sigma=0.8,
    seed=7,
)

# k=2 keeps both synthetic directions; lam=1 matches the published default.
CONFIG = AdaptConfig(k=2, lam=1.0, max_iter=10)

PRIMAL_MODELS = (
    "JDA",
    "JDA+CG",
    "CDDA",
    "CDDA+CG",
    "CDDA+DB",
    "DGA-DA",
    "DGA-DA+CG",
    "DGA-DA+DB",
)

MEDA_CONFIG = CONFIG.replace(kernel="rbf")
MEDA_MODELS = ("MEDA", "MEDA+CG")

LINEAR_CONFIG = CONFIG.replace(kernel="linear")


def report_slice(report) -> dict:
    return {
        "baseline_accuracy": report.baseline_accuracy,
        "final_accuracy": report.final_accuracy,
        "fixed_point_iteration": report.fixed_point_iteration,
        "predicted_labels": [int(v) for v in report.predicted_labels],
        "iterations": [
            {
                "iteration": r.iteration,
                "churn": r.churn,
                "objective": r.objective,
                "accuracy": r.accuracy,
                "eigenvalues": list(r.eigenvalues),
            }
            for r in report.iterations
        ],
    }


def main() -> int:
    ds = generate_synthetic(RECIPE)
    fixture = {
        "recipe": RECIPE.to_dict(),
        "config": CONFIG.to_dict(),
        "meda_config": MEDA_CONFIG.to_dict(),
        "linear_config": LINEAR_CONFIG.to_dict(),
        "feature_sha256": {
            "source": hashlib.sha256(ds.pair.source.features.tobytes()).hexdigest(),
            "target": hashlib.sha256(ds.pair.target.features.tobytes()).hexdigest(),
        },
        "models": {},
        "meda": {},
        "linear_kernel": {},
    }
    for name in PRIMAL_MODELS:
        report = run_adaptation(ds.pair, CONFIG, ModelKind.parse(name), ds.target_truth)
        fixture["models"][name] = report_slice(report)
        print(
            f"{name:12s} acc={report.final_accuracy:.3f} "
            f"fp={report.fixed_point_iteration} "
            f"baseline={report.baseline_accuracy:.3f}"
        )
    for name in MEDA_MODELS:
        report = run_adaptation(ds.pair, MEDA_CONFIG, ModelKind.parse(name), ds.target_truth)
        fixture["meda"][name] = report_slice(report)
        print(
            f"{name:12s} acc={report.final_accuracy:.3f} fp={report.fixed_point_iteration}"
        )
    report = run_adaptation(ds.pair, LINEAR_CONFIG, ModelKind.parse("JDA"), ds.target_truth)
    fixture["linear_kernel"]["JDA"] = report_slice(report)
    print(f"{'JDA(linear)':12s} acc={report.final_accuracy:.3f}")

    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    print(f"wrote {FIXTURE_PATH}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

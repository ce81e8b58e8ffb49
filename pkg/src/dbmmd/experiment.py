"""Experiment driver: datasets in, per-model reports and summary tables out.

An experiment is described by a JSON spec:

    {
      "models": ["JDA", "JDA+CG", "CDDA+DB"],
      "dataset": {"synthetic": {"class_count": 3, ...}}
                 or {"source": "s.csv", "target": "t.csv",
                     "target_labels": "truth.csv"},
      "config": {"k": 2, "lam": 1.0, ...},
      "output_dir": "out",
      "repeat": 1,
      "data_format": "csv",
      "dump_embeddings": false
    }

Outputs under output_dir:

    reports/<model>_rep<r>.json   full per-run reports
    runs.json                     one status row per (model, repeat)
    experiment.json               the resolved spec, for re-rendering
    summary.csv / summary.md      aggregated table (no wall times, so
                                  reruns of the same spec are byte-identical)
    timing.csv                    wall times, kept out of the summary
    embeddings/<model>_rep<r>.f64 final embeddings, on request

Repeats re-seed the synthetic recipe (seed, seed+1, ...) and report the
mean and spread. A model that throws marks its own cells as failed and
the rest of the run continues.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adapt import ModelKind, run_adaptation
from .datamodel import AdaptConfig, DomainPair, LabeledDomain, UnlabeledDomain, make_pair
from .errors import FormatError, ParameterError
from .io import atomic_write_text, load_features, save_features
from .synthetic import SyntheticRecipe, generate_synthetic

SUMMARY_COLUMNS = (
    "model",
    "accuracy_mean",
    "accuracy_range",
    "delta_vs_base",
    "iterations_to_fixed_point",
    "status",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated description of one experiment."""

    models: tuple[str, ...]
    config: AdaptConfig
    output_dir: str
    repeat: int = 1
    synthetic: SyntheticRecipe | None = None
    source_path: str | None = None
    target_path: str | None = None
    target_labels_path: str | None = None
    data_format: str | None = None
    dump_embeddings: bool = False

    def __post_init__(self):
        if not self.models:
            raise ParameterError("experiment needs at least one model")
        for name in self.models:
            ModelKind.parse(name)
        if int(self.repeat) != self.repeat or self.repeat < 1:
            raise ParameterError(f"repeat must be a positive integer, got {self.repeat}")
        has_files = self.source_path is not None or self.target_path is not None
        if self.synthetic is None and not has_files:
            raise ParameterError("dataset missing: give synthetic recipe or file paths")
        if self.synthetic is not None and has_files:
            raise ParameterError("dataset over-specified: synthetic and file paths given")
        if has_files and (self.source_path is None or self.target_path is None):
            raise ParameterError("file dataset needs both source and target paths")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        allowed = {
            "models", "config", "output_dir", "repeat", "dataset",
            "data_format", "dump_embeddings",
        }
        extra = set(d) - allowed
        if extra:
            raise ParameterError(f"unknown spec keys: {sorted(extra)}")
        try:
            models = tuple(str(m) for m in d["models"])
            output_dir = str(d["output_dir"])
            dataset = d.get("dataset", {})
        except KeyError as exc:
            raise ParameterError(f"spec missing required key: {exc}") from None
        config = AdaptConfig.from_dict(d.get("config", {}))
        synthetic = None
        source = target = target_labels = None
        if "synthetic" in dataset:
            synthetic = SyntheticRecipe.from_dict(dataset["synthetic"])
        else:
            source = dataset.get("source")
            target = dataset.get("target")
            target_labels = dataset.get("target_labels")
        return cls(
            models=models,
            config=config,
            output_dir=output_dir,
            repeat=int(d.get("repeat", 1)),
            synthetic=synthetic,
            source_path=source,
            target_path=target,
            target_labels_path=target_labels,
            data_format=d.get("data_format"),
            dump_embeddings=bool(d.get("dump_embeddings", False)),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ExperimentSpec":
        try:
            payload = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ParameterError(f"{path}: no such spec file") from None
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: malformed JSON spec") from exc
        return cls.from_dict(payload)

    def to_dict(self) -> dict:
        if self.synthetic is not None:
            dataset = {"synthetic": self.synthetic.to_dict()}
        else:
            dataset = {"source": self.source_path, "target": self.target_path}
            if self.target_labels_path is not None:
                dataset["target_labels"] = self.target_labels_path
        return {
            "models": list(self.models),
            "dataset": dataset,
            "config": self.config.to_dict(),
            "output_dir": self.output_dir,
            "repeat": self.repeat,
            "data_format": self.data_format,
            "dump_embeddings": self.dump_embeddings,
        }


@dataclass
class ExperimentResult:
    rows: list[dict]
    runs: list[dict]
    output_dir: Path
    exit_code: int


def _mapped_truth(source: LabeledDomain, truth_domain: LabeledDomain) -> np.ndarray:
    """Map truth labels through the source's original-value mapping."""
    src_values = source.label_values or tuple(range(int(source.labels.max()) + 1))
    to_dense = {v: i for i, v in enumerate(src_values)}
    truth_values = truth_domain.label_values or tuple(
        range(int(truth_domain.labels.max()) + 1)
    )
    raw = [truth_values[d] for d in truth_domain.labels]
    missing = sorted({v for v in raw if v not in to_dense})
    if missing:
        raise FormatError(f"target label values {missing} never appear in the source")
    return np.asarray([to_dense[v] for v in raw], dtype=np.int64)


def _file_dataset(spec: ExperimentSpec):
    source = load_features(spec.source_path, spec.data_format)
    if not isinstance(source, LabeledDomain):
        raise FormatError(f"{spec.source_path}: source file has no labels")
    target_loaded = load_features(spec.target_path, spec.data_format)
    truth = None
    if isinstance(target_loaded, LabeledDomain):
        truth = _mapped_truth(source, target_loaded)
        target = UnlabeledDomain(target_loaded.features, name=target_loaded.name)
    else:
        target = target_loaded
    if spec.target_labels_path is not None:
        labels_domain = load_features(spec.target_labels_path, spec.data_format)
        if not isinstance(labels_domain, LabeledDomain):
            raise FormatError(f"{spec.target_labels_path}: truth file has no labels")
        if labels_domain.n != target.n:
            raise FormatError(
                f"{spec.target_labels_path}: {labels_domain.n} labels for {target.n} "
                "target samples"
            )
        truth = _mapped_truth(source, labels_domain)
    pair = make_pair(source, target)
    return pair, truth, source.label_values


def _dataset_for_rep(spec: ExperimentSpec, rep: int):
    if spec.synthetic is not None:
        recipe = dataclasses.replace(spec.synthetic, seed=spec.synthetic.seed + rep)
        ds = generate_synthetic(recipe)
        return ds.pair, ds.target_truth, None
    return _file_dataset(spec)


def _model_slug(name: str) -> str:
    return name.replace("+", "_")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _aggregate(spec: ExperimentSpec, runs: list[dict]) -> list[dict]:
    by_model: dict[str, list[dict]] = {name: [] for name in spec.models}
    for run in runs:
        by_model[run["model"]].append(run)
    rows = []
    means: dict[str, float | None] = {}
    for name in spec.models:
        cells = by_model[name]
        ok = [r for r in cells if r["status"] == "ok"]
        accs = [r["accuracy"] for r in ok if r["accuracy"] is not None]
        acc_mean = float(np.mean(accs)) if len(accs) == len(cells) and accs else None
        acc_range = (
            float(np.max(accs) - np.min(accs))
            if len(accs) == len(cells) and accs
            else None
        )
        iters = [
            r["fixed_point_iteration"]
            if r["fixed_point_iteration"] is not None
            else spec.config.max_iter
            for r in ok
        ]
        rows.append(
            {
                "model": name,
                "accuracy_mean": acc_mean,
                "accuracy_range": acc_range,
                "delta_vs_base": None,
                "iterations_to_fixed_point": float(np.mean(iters)) if iters else None,
                "status": "ok" if len(ok) == len(cells) and cells else "failed",
            }
        )
        means[name] = acc_mean if rows[-1]["status"] == "ok" else None
    for row in rows:
        kind = ModelKind.parse(row["model"])
        if kind.boundary == "none":
            continue
        base_mean = means.get(kind.base)
        if base_mean is not None and row["accuracy_mean"] is not None:
            row["delta_vs_base"] = row["accuracy_mean"] - base_mean
    return rows


def render_summary_csv(rows: list[dict]) -> str:
    lines = [",".join(SUMMARY_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in SUMMARY_COLUMNS))
    return "\n".join(lines) + "\n"


def render_summary_md(rows: list[dict], title: str) -> str:
    out = [f"# {title}", ""]
    out.append("| " + " | ".join(SUMMARY_COLUMNS) + " |")
    out.append("|" + "|".join([" --- "] * len(SUMMARY_COLUMNS)) + "|")
    for row in rows:
        out.append("| " + " | ".join(_fmt(row[c]) or "-" for c in SUMMARY_COLUMNS) + " |")
    out.append("")
    return "\n".join(out)


def _write_outputs(spec: ExperimentSpec, rows: list[dict], runs: list[dict],
                   out_dir: Path) -> None:
    atomic_write_text(out_dir / "summary.csv", render_summary_csv(rows))
    atomic_write_text(out_dir / "summary.md", render_summary_md(rows, "Adaptation summary"))
    atomic_write_text(
        out_dir / "runs.json",
        json.dumps([{k: v for k, v in r.items() if k != "wall_time"} for r in runs],
                   indent=2) + "\n",
    )
    timing_lines = ["model,repeat,wall_time_seconds"]
    for run in runs:
        if run["status"] == "ok":
            timing_lines.append(f"{run['model']},{run['repeat']},{_fmt(run['wall_time'])}")
    atomic_write_text(out_dir / "timing.csv", "\n".join(timing_lines) + "\n")
    atomic_write_text(out_dir / "experiment.json", json.dumps(spec.to_dict(), indent=2) + "\n")


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Execute every (model, repeat) cell and write all outputs.

    Returns the aggregated rows plus an exit code: 0 when every cell ran,
    1 when any cell failed. Spec-level problems raise instead.
    """
    out_dir = Path(spec.output_dir)
    (out_dir / "reports").mkdir(parents=True, exist_ok=True)
    runs: list[dict] = []
    for rep in range(spec.repeat):
        pair, truth, label_values = _dataset_for_rep(spec, rep)
        for name in spec.models:
            kind = ModelKind.parse(name)
            row = {
                "model": name,
                "repeat": rep,
                "status": "ok",
                "error": None,
                "accuracy": None,
                "fixed_point_iteration": None,
                "report": None,
                "wall_time": None,
            }
            try:
                report = run_adaptation(pair, spec.config, kind, truth)
            except Exception as exc:  # noqa: BLE001 - cell isolation is the point
                row["status"] = "failed"
                row["error"] = f"{type(exc).__name__}: {exc}"
                runs.append(row)
                continue
            report.label_values = label_values
            report_path = out_dir / "reports" / f"{_model_slug(name)}_rep{rep}.json"
            atomic_write_text(report_path, json.dumps(report.to_dict(), indent=2) + "\n")
            if spec.dump_embeddings and report.embedding is not None:
                save_features(
                    out_dir / "embeddings" / f"{_model_slug(name)}_rep{rep}.f64",
                    report.embedding,
                    fmt="raw",
                )
            row["accuracy"] = report.final_accuracy
            row["fixed_point_iteration"] = report.fixed_point_iteration
            row["report"] = str(report_path.relative_to(out_dir))
            row["wall_time"] = report.wall_time
            runs.append(row)
    rows = _aggregate(spec, runs)
    _write_outputs(spec, rows, runs, out_dir)
    exit_code = 0 if all(r["status"] == "ok" for r in runs) else 1
    return ExperimentResult(rows=rows, runs=runs, output_dir=out_dir, exit_code=exit_code)


def rerender_summary(output_dir: str | Path) -> ExperimentResult:
    """Rebuild summary.csv/summary.md from the stored run rows."""
    out_dir = Path(output_dir)
    spec_path = out_dir / "experiment.json"
    runs_path = out_dir / "runs.json"
    if not spec_path.exists() or not runs_path.exists():
        raise ParameterError(f"{out_dir}: not an experiment directory")
    spec = ExperimentSpec.from_dict(json.loads(spec_path.read_text()))
    runs = json.loads(runs_path.read_text())
    for run in runs:
        run.setdefault("wall_time", None)
    rows = _aggregate(spec, runs)
    atomic_write_text(out_dir / "summary.csv", render_summary_csv(rows))
    atomic_write_text(out_dir / "summary.md", render_summary_md(rows, "Adaptation summary"))
    exit_code = 0 if all(r["status"] == "ok" for r in runs) else 1
    return ExperimentResult(rows=rows, runs=runs, output_dir=out_dir, exit_code=exit_code)


def write_synthetic_files(recipe: SyntheticRecipe, out_dir: str | Path,
                          fmt: str = "csv") -> dict[str, Path]:
    """Materialize a synthetic pair as feature files.

    Writes source (with labels), target (features only), and a truth file
    carrying the target features with their held-back labels.
    """
    if fmt not in ("csv", "raw"):
        raise ParameterError(f"format must be 'csv' or 'raw', got {fmt!r}")
    ds = generate_synthetic(recipe)
    out = Path(out_dir)
    suffix = "csv" if fmt == "csv" else "f64"
    paths = {
        "source": out / f"source.{suffix}",
        "target": out / f"target.{suffix}",
        "target_labels": out / f"target_labels.{suffix}",
    }
    save_features(paths["source"], ds.pair.source.features, ds.pair.source.labels, fmt)
    save_features(paths["target"], ds.pair.target.features, None, fmt)
    save_features(paths["target_labels"], ds.pair.target.features, ds.target_truth, fmt)
    return paths

"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Run with  pytest tests/test_acceptance.py -v -s  to see the lines as they
happen; without -s pytest shows them only for failures. The frozen numbers
live in tests/fixtures/golden.json (regenerated by scripts/make_golden.py).
"""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dbmmd.adapt import ModelKind, assemble_db, run_adaptation
from dbmmd.classify import propagate_labels
from dbmmd.datamodel import AdaptConfig, DomainPair, LabeledDomain, UnlabeledDomain, make_pair
from dbmmd.experiment import ExperimentSpec, run_experiment
from dbmmd.graphs import build_affinity, build_graphs
from dbmmd.io import load_features, save_features
from dbmmd.linalg import gen_eig_smallest
from dbmmd.mmd import build_all, build_conditional, build_marginal, build_repulsive
from dbmmd.synthetic import SyntheticRecipe, generate_synthetic

FIXTURE_PATH = Path(__file__).parent / "fixtures" / "golden.json"


@contextmanager
def criterion(num: int, name: str):
    try:
        yield
    except BaseException:
        print(f"criterion {num} ({name}): FAIL")
        raise
    print(f"criterion {num} ({name}): PASS")


@pytest.fixture(scope="module")
def golden():
    return json.loads(FIXTURE_PATH.read_text())


@pytest.fixture(scope="module")
def golden_rerun(golden):
    """Re-execute every pinned run once; criteria 4, 5, 6 all read from it."""
    recipe = SyntheticRecipe.from_dict(golden["recipe"])
    config = AdaptConfig.from_dict(golden["config"])
    meda_config = AdaptConfig.from_dict(golden["meda_config"])
    linear_config = AdaptConfig.from_dict(golden["linear_config"])
    ds = generate_synthetic(recipe)
    t0 = time.perf_counter()
    reports = {}
    for name in golden["models"]:
        reports[name] = run_adaptation(ds.pair, config, ModelKind.parse(name), ds.target_truth)
    for name in golden["meda"]:
        reports[name] = run_adaptation(
            ds.pair, meda_config, ModelKind.parse(name), ds.target_truth
        )
    linear = {
        name: run_adaptation(ds.pair, linear_config, ModelKind.parse(name), ds.target_truth)
        for name in golden["linear_kernel"]
    }
    elapsed = time.perf_counter() - t0
    return ds, reports, linear, elapsed


def assert_report_matches_pin(report, pinned):
    assert report.baseline_accuracy == pinned["baseline_accuracy"]
    assert report.final_accuracy == pinned["final_accuracy"]
    assert report.fixed_point_iteration == pinned["fixed_point_iteration"]
    assert [int(v) for v in report.predicted_labels] == pinned["predicted_labels"]
    assert len(report.iterations) == len(pinned["iterations"])
    for rec, pin in zip(report.iterations, pinned["iterations"]):
        assert rec.iteration == pin["iteration"]
        assert rec.churn == pin["churn"]
        assert rec.objective == pin["objective"]
        assert rec.accuracy == pin["accuracy"]
        assert list(rec.eigenvalues) == pin["eigenvalues"]


def test_criterion_1_mmd_trace_composition():
    """Trace identities of all MMD matrices on 20 seeded instances, < 1 s."""
    with criterion(1, "MMD trace oracles"):
        t0 = time.perf_counter()
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            c = int(rng.integers(2, 5))
            n_s = int(rng.integers(c, 31))
            n_t = int(rng.integers(c, 61 - n_s)) if 61 - n_s > c else c
            ys = np.concatenate([np.arange(c), rng.integers(0, c, n_s - c)])
            yt = np.concatenate([np.arange(c), rng.integers(0, c, n_t - c)])
            src = LabeledDomain(rng.normal(size=(3, n_s)), ys, name="source")
            tgt = UnlabeledDomain(rng.normal(size=(3, n_t)), name="target")
            pair = make_pair(src, tgt).with_pseudo_labels(yt)
            z = rng.normal(size=(3, pair.n_total))
            zs, zt = z[:, :n_s], z[:, n_s:]

            def msq(a, b):
                d = a.mean(axis=1) - b.mean(axis=1)
                return float(d @ d)

            got = float(np.trace(z @ build_marginal(pair) @ z.T))
            assert abs(got - msq(zs, zt)) < 1e-10

            got = float(np.trace(z @ build_conditional(pair) @ z.T))
            want = sum(
                msq(zs[:, ys == k], zt[:, yt == k])
                for k in range(c)
                if (ys == k).any() and (yt == k).any()
            )
            assert abs(got - want) < 1e-10

            for direction in ("source_to_target", "target_to_source"):
                m = build_repulsive(pair, direction, mode="rank_one_sum")
                got = float(np.trace(z @ m @ z.T))
                want = 0.0
                for ca in range(c):
                    for cb in range(c):
                        if ca == cb:
                            continue
                        if direction == "source_to_target":
                            a_pts, b_pts = zs[:, ys == ca], zt[:, yt == cb]
                        else:
                            a_pts, b_pts = zt[:, yt == ca], zs[:, ys == cb]
                        if a_pts.shape[1] and b_pts.shape[1]:
                            want += msq(a_pts, b_pts)
                assert abs(got - want) < 1e-10
        assert time.perf_counter() - t0 < 1.0


def test_criterion_2_eigensolver():
    """Residuals on 50 seeded pencils plus a char-poly cross-check."""
    with criterion(2, "generalized eigensolver"):
        for seed in range(50):
            rng = np.random.default_rng(2000 + seed)
            n = int(rng.integers(2, 31))
            a = rng.normal(size=(n, n))
            a = 0.5 * (a + a.T)
            cmat = rng.normal(size=(n, n))
            b = cmat @ cmat.T + float(n) * np.eye(n)
            k = int(rng.integers(1, n + 1))
            ridge = 1e-9 * np.trace(b) / n
            pairs = gen_eig_smallest(a, b, k)
            b_reg = b + ridge * np.eye(n)
            for p in pairs:
                res = np.linalg.norm(a @ p.vector - p.value * (b_reg @ p.vector))
                assert res <= 1e-8
        # independent 4x4 oracle: eigenvalues are the roots of det(A - t B),
        # recovered by interpolating the degree-4 determinant polynomial
        rng = np.random.default_rng(4242)
        a = rng.normal(size=(4, 4))
        a = 0.5 * (a + a.T)
        cmat = rng.normal(size=(4, 4))
        b = cmat @ cmat.T + 4.0 * np.eye(4)
        ts = np.linspace(-3.0, 3.0, 9)
        dets = [np.linalg.det(a - t * b) for t in ts]
        roots = np.sort(np.roots(np.polyfit(ts, dets, 4)).real)
        got = np.array([p.value for p in gen_eig_smallest(a, b, 4, ridge=0.0)])
        assert_allclose(got, roots, atol=1e-6)


def test_criterion_3_unit_affinity_reductions(golden):
    """W == 1 collapses every reweighted model onto its plain counterpart."""
    with criterion(3, "unit-affinity reductions"):
        recipe = SyntheticRecipe.from_dict(golden["recipe"])
        ds = generate_synthetic(recipe)
        cfg = AdaptConfig.from_dict(golden["config"]).replace(
            sigma_mode="fixed", sigma=float("inf")
        )
        pair = ds.pair.with_pseudo_labels(ds.target_truth)
        mats = build_all(pair, cfg.matrix_mode)
        aff = build_affinity(pair.packed_features(), "fixed", float("inf"))
        graphs = build_graphs(pair, aff, mats.per_class_masks, cfg.graph_mode)
        plain = assemble_db(mats, None, ModelKind("CDDA"))
        reweighted = assemble_db(mats, graphs, ModelKind("CDDA", "DB"))
        assert np.array_equal(plain, reweighted)

        a = run_adaptation(ds.pair, cfg, ModelKind("CDDA"), ds.target_truth)
        b = run_adaptation(ds.pair, cfg, ModelKind("CDDA", "DB"), ds.target_truth)
        assert len(a.iterations) == len(b.iterations)
        for ra, rb in zip(a.iterations, b.iterations):
            assert np.array_equal(ra.pseudo_labels, rb.pseudo_labels)
            assert ra.objective == rb.objective
            assert ra.eigenvalues == rb.eigenvalues
        assert np.array_equal(a.projection, b.projection)

        # single-class degenerate pair: the conditional term IS the marginal
        rng = np.random.default_rng(33)
        src = LabeledDomain(rng.normal(size=(2, 6)), np.zeros(6, dtype=int), name="source")
        tgt = UnlabeledDomain(
            rng.normal(size=(2, 5)), pseudo_labels=np.zeros(5, dtype=int), name="target"
        )
        degenerate = DomainPair(src, tgt, class_count=1)
        assert np.array_equal(build_conditional(degenerate), build_marginal(degenerate))


def test_criterion_4_golden_pair(golden, golden_rerun):
    """Ordering claims plus a bit-exact match against the frozen fixture."""
    with criterion(4, "golden-pair results"):
        ds, reports, linear, elapsed = golden_rerun
        assert elapsed < 30.0
        source_sha = golden["feature_sha256"]["source"]
        target_sha = golden["feature_sha256"]["target"]
        import hashlib

        assert hashlib.sha256(ds.pair.source.features.tobytes()).hexdigest() == source_sha
        assert hashlib.sha256(ds.pair.target.features.tobytes()).hexdigest() == target_sha

        baseline = reports["JDA"].baseline_accuracy
        assert reports["JDA"].final_accuracy > baseline
        assert reports["CDDA+DB"].final_accuracy >= reports["CDDA"].final_accuracy
        assert reports["DGA-DA+DB"].final_accuracy >= reports["DGA-DA"].final_accuracy

        for name, pinned in golden["models"].items():
            assert_report_matches_pin(reports[name], pinned)
        for name, pinned in golden["meda"].items():
            assert_report_matches_pin(reports[name], pinned)
        for name, pinned in golden["linear_kernel"].items():
            assert_report_matches_pin(linear[name], pinned)


def test_criterion_5_fixed_points(golden, golden_rerun):
    """Every golden run reaches churn 0 within the iteration cap."""
    with criterion(5, "pseudo-label fixed points"):
        _, reports, linear, _ = golden_rerun
        cap = golden["config"]["max_iter"]
        everything = list(reports.items()) + list(linear.items())
        for name, report in everything:
            assert report.fixed_point_iteration is not None, name
            assert report.fixed_point_iteration <= cap, name
            assert report.iterations[-1].churn == 0, name
        for name, pinned in golden["models"].items():
            assert reports[name].fixed_point_iteration == pinned["fixed_point_iteration"]
        for name, pinned in golden["meda"].items():
            assert reports[name].fixed_point_iteration == pinned["fixed_point_iteration"]


def test_criterion_6_linear_kernel_vs_primal(golden, golden_rerun):
    """Linear kernel and primal mode land within two points of each other."""
    with criterion(6, "linear kernel vs primal"):
        _, reports, linear, _ = golden_rerun
        primal_acc = reports["JDA"].final_accuracy
        linear_acc = linear["JDA"].final_accuracy
        assert abs(primal_acc - linear_acc) <= 0.02
        assert linear_acc == golden["linear_kernel"]["JDA"]["final_accuracy"]


def test_criterion_7_label_propagation():
    """Hand-solved path-graph fixture and the large-mu clamping limit."""
    with criterion(7, "label propagation"):
        lap = np.array(
            [
                [1.0, -1.0, 0.0],
                [-1.0, 2.0, -1.0],
                [0.0, -1.0, 1.0],
            ]
        )
        y0 = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
        f = propagate_labels(lap, y0, mu=1.0)
        expect = np.array(
            [
                [5.0 / 6.0, 1.0 / 6.0],
                [0.5, 0.5],
                [1.0 / 6.0, 5.0 / 6.0],
            ]
        )
        assert np.max(np.abs(f - expect)) < 1e-10
        # clamping limit: with every row labeled, mu = 1e9 returns Y0 no
        # matter which Laplacian sits underneath
        rng = np.random.default_rng(77)
        for trial in range(5):
            w = rng.uniform(0.0, 1.0, size=(6, 6))
            w = 0.5 * (w + w.T)
            np.fill_diagonal(w, 0.0)
            any_lap = np.diag(w.sum(axis=1)) - w
            labels = rng.integers(0, 3, 6)
            y_full = np.zeros((6, 3))
            y_full[np.arange(6), labels] = 1.0
            f_clamped = propagate_labels(any_lap, y_full, mu=1e9)
            assert np.max(np.abs(f_clamped - y_full)) < 1e-6


def test_criterion_8_harness_reproducibility(golden, tmp_path):
    """Byte-identical summaries across reruns and bitwise feature files."""
    with criterion(8, "harness reproducibility"):
        recipe = SyntheticRecipe.from_dict(golden["recipe"])
        config = AdaptConfig.from_dict(golden["config"]).replace(max_iter=3)
        small = SyntheticRecipe.from_dict({**recipe.to_dict(), "samples_per_class": 10})

        def spec(out):
            return ExperimentSpec(
                models=("JDA", "CDDA+DB"),
                config=config,
                output_dir=str(out),
                synthetic=small,
            )

        a = run_experiment(spec(tmp_path / "a"))
        b = run_experiment(spec(tmp_path / "b"))
        assert a.exit_code == 0 and b.exit_code == 0
        assert (a.output_dir / "summary.csv").read_bytes() == (
            b.output_dir / "summary.csv"
        ).read_bytes()
        assert (a.output_dir / "runs.json").read_bytes() == (
            b.output_dir / "runs.json"
        ).read_bytes()

        rng = np.random.default_rng(88)
        x = rng.normal(size=(4, 9))
        labels = rng.integers(0, 3, 9)
        for fmt, suffix in (("csv", "csv"), ("raw", "f64")):
            path = tmp_path / f"feat.{suffix}"
            save_features(path, x, labels, fmt)
            dom = load_features(path, fmt)
            assert np.array_equal(dom.features, x)
            assert np.array_equal(dom.labels, labels)

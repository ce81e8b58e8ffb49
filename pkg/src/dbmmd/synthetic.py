"""Seeded synthetic domain pairs for desk-scale experiments.

Source classes are isotropic Gaussians at centers spread evenly on a
circle of fixed radius (with a seeded phase); the target re-samples the
same class distributions and then applies a controlled shift. Everything
is driven by one generator seeded from the recipe, so a recipe is a
complete, replayable description of the dataset.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import DomainPair, LabeledDomain, UnlabeledDomain, make_pair
from .errors import ParameterError

CENTER_RADIUS = 3.0

SHIFT_KINDS = ("rotation", "translation", "cov_scale")


@dataclass(frozen=True)
class SyntheticRecipe:
    """Parameters of one synthetic pair.

    shift_param means degrees for "rotation", an offset (scalar or
    per-dimension sequence) for "translation", and a spread multiplier
    for "cov_scale".
    """

    class_count: int = 3
    samples_per_class: int = 50
    feature_dim: int = 2
    shift: str = "rotation"
    shift_param: float | tuple[float, ...] = 30.0
    noise_sigma: float = 0.5
    seed: int = 7

    def __post_init__(self):
        if self.class_count < 1:
            raise ParameterError("class_count must be at least 1")
        if self.samples_per_class < 1:
            raise ParameterError("samples_per_class must be at least 1")
        if self.feature_dim < 1:
            raise ParameterError("feature_dim must be at least 1")
        if self.shift not in SHIFT_KINDS:
            raise ParameterError(f"shift must be one of {SHIFT_KINDS}, got {self.shift!r}")
        if self.noise_sigma < 0.0:
            raise ParameterError("noise_sigma must be nonnegative")
        if isinstance(self.shift_param, (list, np.ndarray)):
            object.__setattr__(self, "shift_param", tuple(float(v) for v in self.shift_param))

    def to_dict(self) -> dict:
        d = {
            "class_count": self.class_count,
            "samples_per_class": self.samples_per_class,
            "feature_dim": self.feature_dim,
            "shift": self.shift,
            "shift_param": self.shift_param,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }
        if isinstance(d["shift_param"], tuple):
            d["shift_param"] = list(d["shift_param"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticRecipe":
        allowed = {
            "class_count", "samples_per_class", "feature_dim",
            "shift", "shift_param", "noise_sigma", "seed",
        }
        extra = set(d) - allowed
        if extra:
            raise ParameterError(f"unknown recipe keys: {sorted(extra)}")
        d = dict(d)
        if isinstance(d.get("shift_param"), list):
            d["shift_param"] = tuple(float(v) for v in d["shift_param"])
        return cls(**d)


@dataclass(frozen=True)
class SyntheticDataset:
    """A generated pair plus the held-back target truth (evaluation only)."""

    pair: DomainPair
    target_truth: np.ndarray
    recipe: SyntheticRecipe

    def __post_init__(self):
        truth = np.array(self.target_truth, dtype=np.int64, copy=True)
        truth.setflags(write=False)
        object.__setattr__(self, "target_truth", truth)


def _class_centers(recipe: SyntheticRecipe, rng: np.random.Generator) -> np.ndarray:
    c, dim = recipe.class_count, recipe.feature_dim
    centers = np.zeros((c, dim))
    if dim == 1:
        for i in range(c):
            centers[i, 0] = (i - (c - 1) / 2.0) * CENTER_RADIUS
        return centers
    phase = rng.uniform(0.0, 2.0 * np.pi)
    angles = phase + 2.0 * np.pi * np.arange(c) / c
    centers[:, 0] = CENTER_RADIUS * np.cos(angles)
    centers[:, 1] = CENTER_RADIUS * np.sin(angles)
    if dim > 2:
        centers[:, 2:] = rng.normal(0.0, 0.5, size=(c, dim - 2))
    return centers


def _apply_shift(samples: np.ndarray, labels: np.ndarray, centers: np.ndarray,
                 recipe: SyntheticRecipe) -> np.ndarray:
    if recipe.shift == "rotation":
        if recipe.feature_dim < 2:
            raise ParameterError("rotation shift needs feature_dim >= 2")
        theta = np.deg2rad(float(recipe.shift_param))
        rot = np.eye(recipe.feature_dim)
        rot[0, 0] = np.cos(theta)
        rot[0, 1] = -np.sin(theta)
        rot[1, 0] = np.sin(theta)
        rot[1, 1] = np.cos(theta)
        return rot @ samples
    if recipe.shift == "translation":
        param = recipe.shift_param
        if isinstance(param, tuple):
            if len(param) != recipe.feature_dim:
                raise ParameterError(
                    f"translation vector length {len(param)} != feature_dim {recipe.feature_dim}"
                )
            offset = np.asarray(param, dtype=float)
        else:
            offset = np.full(recipe.feature_dim, float(param))
        return samples + offset[:, None]
    # cov_scale: widen or tighten every class around its own center
    scale = float(recipe.shift_param)
    if scale < 0.0:
        raise ParameterError("cov_scale factor must be nonnegative")
    out = samples.copy()
    for c in range(recipe.class_count):
        idx = np.flatnonzero(labels == c)
        mu = centers[c][:, None]
        out[:, idx] = mu + scale * (samples[:, idx] - mu)
    return out


def generate_synthetic(recipe: SyntheticRecipe) -> SyntheticDataset:
    """Build the seeded pair described by a recipe.

    The target draws fresh samples from the source class distributions and
    then shifts them, so with a zero-effect shift the target is simply a
    re-sample of the source distribution with its labels hidden.
    """
    rng = np.random.default_rng(recipe.seed)
    centers = _class_centers(recipe, rng)
    m = recipe.samples_per_class
    labels = np.repeat(np.arange(recipe.class_count), m)

    def draw() -> np.ndarray:
        cols = centers[labels].T
        noise = rng.standard_normal(cols.shape)
        return cols + recipe.noise_sigma * noise

    source_x = draw()
    target_x = _apply_shift(draw(), labels, centers, recipe)
    source = LabeledDomain(source_x, labels, name="synthetic-source")
    target = UnlabeledDomain(target_x, name="synthetic-target")
    if recipe.class_count == 1:
        pair = DomainPair(source, target, 1)
    else:
        pair = make_pair(source, target)
    return SyntheticDataset(pair=pair, target_truth=labels, recipe=recipe)

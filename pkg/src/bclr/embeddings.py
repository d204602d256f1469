"""Feature maps from raw series to standardized feature matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMatrix, standardize_columns
from .cubical import gaussian_smooth, standardize_frame, sublevel_pd
from .features import f_stat, f_stat_labels, persistence_image

__all__ = [
    "EmbeddingSpec",
    "poly2",
    "poly2_labels",
    "frame_features",
    "embed_image_series",
    "embed_tabular_series",
    "feature_labels",
]

_KINDS = ("tda-stat", "persistence-image", "poly2", "identity")
_ALIASES = {"pimg": "persistence-image", "tda": "tda-stat"}


@dataclass(frozen=True)
class EmbeddingSpec:
    """How to turn raw observations into features.

    ``sigma`` is the image smoothing width (0 disables smoothing);
    ``standardize_images`` toggles per-frame standardization and
    ``standardize_stage`` places it on the raw frame (``"raw"``, before
    smoothing) or on the smoothed frame (``"smoothed"``); ``connectivity`` is
    passed to the cubical persistence; ``pi_sigma`` is the persistence-image
    kernel width.
    """

    kind: str = "tda-stat"
    sigma: float = 2.0
    standardize_images: bool = True
    standardize_stage: str = "raw"
    connectivity: int = 8
    pi_sigma: float = 0.5

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in _KINDS:
            raise ValueError(f"unknown embedding kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.standardize_stage not in ("raw", "smoothed"):
            raise ValueError("standardize_stage must be 'raw' or 'smoothed'")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def output_dim(self, q: int | None = None) -> int:
        if self.kind in ("tda-stat", "persistence-image"):
            return 36
        if q is None:
            raise ValueError(f"{self.kind} needs the input dimension")
        return q * (q + 3) // 2 if self.kind == "poly2" else q


def poly2(x) -> np.ndarray:
    """Degree-2 polynomial features: x_i, then x_i x_j for i <= j in row-major order.

    Works row-wise on a 2-D array.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    q = x2.shape[1]
    if q < 1:
        raise ValueError("poly2 needs at least one input coordinate")
    iu, ju = np.triu_indices(q)
    out = np.concatenate([x2, x2[:, iu] * x2[:, ju]], axis=1)
    return out[0] if single else out


def poly2_labels(q: int) -> list:
    iu, ju = np.triu_indices(q)
    return [f"x{i + 1}" for i in range(q)] + [
        f"x{i + 1}^2" if i == j else f"x{i + 1}x{j + 1}" for i, j in zip(iu, ju)
    ]


def feature_labels(spec: EmbeddingSpec, q: int | None = None) -> list:
    if spec.kind == "tda-stat":
        return f_stat_labels()
    if spec.kind == "persistence-image":
        return [f"pi(b{i + 1}, l{j + 1})" for j in range(6) for i in range(6)]
    if spec.kind == "poly2":
        return poly2_labels(q)
    return [f"x{i + 1}" for i in range(q)]


def frame_features(frame, spec: EmbeddingSpec) -> np.ndarray:
    """Standardize, smooth and vectorize one frame's persistence diagrams."""
    img = np.asarray(frame, dtype=np.float64)
    if spec.standardize_images and spec.standardize_stage == "raw":
        img = standardize_frame(img)
    if spec.sigma > 0:
        img = gaussian_smooth(img, spec.sigma)
    if spec.standardize_images and spec.standardize_stage == "smoothed":
        img = standardize_frame(img)
    pd0, pd1 = sublevel_pd(img, spec.connectivity)
    if spec.kind == "persistence-image":
        return persistence_image(pd0, sigma=spec.pi_sigma)
    return f_stat(pd0, pd1)


def embed_image_series(frames, spec: EmbeddingSpec | None = None) -> FeatureMatrix:
    """Stack per-frame topological features in time order and standardize columns."""
    spec = spec or EmbeddingSpec()
    if spec.kind not in ("tda-stat", "persistence-image"):
        raise ValueError(f"{spec.kind} is not an image embedding")
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    if len(frames) < 3:
        raise ValueError("need at least 3 frames")
    shape = frames[0].shape
    rows = []
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ValueError(f"frame {i} has shape {f.shape}, expected {shape}")
        try:
            rows.append(frame_features(f, spec))
        except ValueError as exc:
            raise ValueError(f"{exc} (frame {i})") from exc
    X, _, _ = standardize_columns(np.vstack(rows))
    return X


def embed_tabular_series(rows, spec: EmbeddingSpec | None = None) -> FeatureMatrix:
    """Apply poly2 or identity row-wise, then standardize columns."""
    spec = spec or EmbeddingSpec("identity")
    a = np.asarray(rows, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] < 3:
        raise ValueError("need at least 3 observations")
    if spec.kind == "poly2":
        a = poly2(a)
    elif spec.kind != "identity":
        raise ValueError(f"{spec.kind} is not a tabular embedding")
    X, _, _ = standardize_columns(a)
    return X

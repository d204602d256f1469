import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from bclr.core import is_standardized
from bclr.embeddings import (
    EmbeddingSpec,
    embed_image_series,
    embed_tabular_series,
    feature_labels,
    frame_features,
    poly2,
    poly2_labels,
)
from bclr.cubical import gaussian_smooth, standardize_frame, sublevel_pd
from bclr.features import f_stat


def _frames(n=6, seed=0, size=20):
    return np.random.default_rng(seed).normal(size=(n, size, size))


def test_spec_dimensions_and_aliases():
    assert EmbeddingSpec("tda-stat").output_dim() == 36
    assert EmbeddingSpec("pimg").kind == "persistence-image"
    assert EmbeddingSpec("poly2").output_dim(4) == 14
    assert EmbeddingSpec("identity").output_dim(5) == 5
    with pytest.raises(ValueError):
        EmbeddingSpec("pca")
    with pytest.raises(ValueError):
        EmbeddingSpec(standardize_stage="later")


def test_poly2_examples():
    assert poly2(np.ones(4)).size == 14
    assert np.array_equal(poly2([1.0, 0, 0, 0]), [1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    assert poly2_labels(3) == ["x1", "x2", "x3", "x1^2", "x1x2", "x1x3", "x2^2", "x2x3", "x3^2"]
    assert poly2_labels(4)[5] == "x1x2"


@settings(max_examples=100)
@given(hnp.arrays(float, st.integers(1, 6), elements=st.floats(-10, 10)))
def test_poly2_square_identity(x):
    q = x.size
    quad = poly2(x)[q:]
    iu, ju = np.triu_indices(q)
    weights = np.where(iu == ju, 1.0, 2.0)
    assert np.isclose(np.sum(weights * quad), x.sum() ** 2, rtol=1e-9, atol=1e-9)
    assert quad.size == q * (q + 1) // 2


def test_image_series_shape_and_standardized():
    X = embed_image_series(_frames(50, size=50))
    assert X.values.shape == (50, 36)
    assert is_standardized(X)


def test_image_series_pipeline_order():
    f = _frames(1)[0]
    raw_first = frame_features(f, EmbeddingSpec())
    assert np.array_equal(raw_first, f_stat(*sublevel_pd(gaussian_smooth(standardize_frame(f), 2.0))))
    smoothed_first = frame_features(f, EmbeddingSpec(standardize_stage="smoothed"))
    assert np.array_equal(smoothed_first, f_stat(*sublevel_pd(standardize_frame(gaussian_smooth(f, 2.0)))))


def test_identical_frames_flag_all_constant():
    f = _frames(1)[0]
    X = embed_image_series(np.repeat(f[None], 5, axis=0))
    assert np.all(X.constant) and np.all(X.values == 0)


def test_frame_permutation_permutes_rows():
    fr = _frames(7, seed=3)
    perm = np.random.default_rng(1).permutation(7)
    a = embed_image_series(fr).values
    b = embed_image_series(fr[perm]).values
    assert np.allclose(a[perm], b)


def test_constant_frame_error_names_index():
    fr = _frames(4)
    fr[2] = 1.0
    with pytest.raises(ValueError, match=r"zero-variance frame \(frame 2\)"):
        embed_image_series(fr)


def test_image_series_checks():
    with pytest.raises(ValueError):
        embed_image_series(_frames(2))
    with pytest.raises(ValueError, match="frame 1"):
        embed_image_series([np.zeros((4, 4)) + np.eye(4), np.zeros((5, 5)), np.eye(4)])
    with pytest.raises(ValueError):
        embed_image_series(_frames(3), EmbeddingSpec("poly2"))


def test_persistence_image_embedding():
    X = embed_image_series(_frames(5), EmbeddingSpec("pimg"))
    assert X.values.shape == (5, 36)
    assert feature_labels(EmbeddingSpec("pimg"))[7] == "pi(b2, l2)"


def test_tabular_identity_on_standardized_input():
    from bclr.core import standardize_columns

    Z = standardize_columns(np.random.default_rng(0).normal(size=(20, 3)))[0].values
    assert np.allclose(embed_tabular_series(Z).values, Z, atol=1e-14)


def test_tabular_shapes():
    rng = np.random.default_rng(1)
    assert embed_tabular_series(rng.normal(size=(300, 4)), EmbeddingSpec("poly2")).values.shape == (300, 14)
    X = embed_tabular_series(rng.normal(size=(600, 5)))
    assert X.values.shape == (600, 5) and is_standardized(X)
    with pytest.raises(ValueError):
        embed_tabular_series(rng.normal(size=(2, 2)))
    with pytest.raises(ValueError):
        embed_tabular_series(rng.normal(size=(5, 2)), EmbeddingSpec("tda-stat"))


def test_embedding_deterministic():
    fr = _frames(4, seed=9)
    assert np.array_equal(embed_image_series(fr).values, embed_image_series(fr.copy()).values)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from bclr.cubical import PersistenceDiagram
from bclr.features import FSTAT_DIM, alps, f_stat, f_stat_labels, moment_summary, persistence_image, persistent_entropy

EMPTY = PersistenceDiagram(1, np.zeros((0, 2)))

diagrams = hnp.arrays(float, st.tuples(st.integers(1, 12), st.just(2)), elements=st.floats(-3, 3)).map(
    lambda a: PersistenceDiagram(0, np.column_stack([a[:, 0], a[:, 0] + np.abs(a[:, 1]) + 0.01]))
)


def _riemann_alps(l, steps=200_000):
    t = (np.arange(steps) + 0.5) * (max(l) / steps)
    return float(np.sum(np.log1p((np.asarray(l)[None, :] > t[:, None]).sum(axis=1))) * max(l) / steps)


def test_entropy_examples():
    assert abs(persistent_entropy([2.5, 2.5]) - math.log(2)) < 1e-15
    assert persistent_entropy([4.0]) == 0.0
    assert abs(persistent_entropy([1, 3]) - 0.5623351446188083) < 1e-12
    assert persistent_entropy([]) == 0.0


def test_alps_examples():
    assert alps([]) == 0.0
    assert abs(alps([1.7]) - 1.7 * math.log(2)) < 1e-15
    assert abs(alps([1, 2]) - (math.log(3) + math.log(2))) < 1e-15


def test_alps_matches_riemann_sum():
    l = [0.3, 1.1, 1.1, 2.0, 0.05]
    assert abs(alps(l) - _riemann_alps(l)) < 1e-4


@settings(max_examples=100)
@given(hnp.arrays(float, st.integers(0, 10), elements=st.floats(0.01, 10)), st.floats(0.01, 10))
def test_alps_strictly_monotone(l, extra):
    assert alps(np.append(l, extra)) > alps(l)


def test_f_stat_labels_and_length():
    labels = f_stat_labels()
    assert len(labels) == FSTAT_DIM == 36 and len(set(labels)) == 36
    assert labels[0] == "mean(l, D0)" and labels[3] == "mean(m, D1)" and labels[-1] == "alps(l, D1)"


def test_f_stat_empty():
    assert np.array_equal(f_stat(PersistenceDiagram(0, np.zeros((0, 2))), EMPTY), np.zeros(36))


def test_f_stat_single_point():
    v = f_stat(PersistenceDiagram(0, [[0.0, 2.0]]), EMPTY)
    lab = dict(zip(f_stat_labels(), v))
    assert lab["mean(l, D0)"] == 2 and lab["mean(m, D0)"] == 1
    for fam in ("variance", "skewness", "kurtosis", "iqr"):
        assert lab[f"{fam}(l, D0)"] == 0
    assert lab["p50(l, D0)"] == 2 and lab["entropy(l, D0)"] == 0
    assert abs(lab["alps(l, D0)"] - 2 * math.log(2)) < 1e-15
    assert all(lab[k] == 0 for k in lab if "D1" in k)


def test_moment_summary_conventions():
    x = np.array([1.0, 2.0, 4.0, 10.0])
    mean, var, skew, kurt, q25, q50, q75, iqr = moment_summary(x)
    c = x - x.mean()
    assert abs(var - np.mean(c**2)) < 1e-12
    assert abs(skew - np.mean(c**3) / var**1.5) < 1e-12
    assert abs(kurt - np.mean(c**4) / var**2) < 1e-12
    assert (q25, q50, q75) == tuple(np.percentile(x, [25, 50, 75]))
    assert iqr == q75 - q25


@settings(max_examples=60)
@given(diagrams, diagrams, st.integers(0, 2**32))
def test_f_stat_permutation_invariant(a, b, seed):
    rng = np.random.default_rng(seed)
    pa = PersistenceDiagram(0, a.points[rng.permutation(len(a))])
    pb = PersistenceDiagram(1, b.points[rng.permutation(len(b))])
    assert np.allclose(f_stat(a, PersistenceDiagram(1, b.points)), f_stat(pa, pb), atol=1e-12)


@settings(max_examples=60)
@given(diagrams, st.floats(0.1, 10))
def test_lifetime_scaling(pd, c):
    scaled = PersistenceDiagram(0, pd.points * c)
    lab = f_stat_labels()
    v, w = dict(zip(lab, f_stat(pd, EMPTY))), dict(zip(lab, f_stat(scaled, EMPTY)))
    for key in ("mean(l, D0)", "p25(l, D0)", "p50(l, D0)", "p75(l, D0)", "iqr(l, D0)", "alps(l, D0)"):
        assert math.isclose(w[key], c * v[key], rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(w["variance(l, D0)"], c * c * v["variance(l, D0)"], rel_tol=1e-9, abs_tol=1e-12)
    for key in ("entropy(l, D0)", "skewness(l, D0)", "kurtosis(l, D0)"):
        assert math.isclose(w[key], v[key], rel_tol=1e-6, abs_tol=1e-9)


def test_persistence_image_empty_and_single():
    assert np.array_equal(persistence_image(EMPTY), np.zeros(36))
    pi = persistence_image(PersistenceDiagram(0, [[1.0, 4.0]]))
    assert np.allclose(pi, math.atan(0.5 * 3.0))


def test_persistence_image_column_major_layout():
    pd = PersistenceDiagram(0, [[0.0, 1.0], [2.0, 5.0]])
    img = persistence_image(pd, sigma=0.7)
    xs, ys = np.linspace(0, 2, 6), np.linspace(1, 3, 6)
    i, j = 4, 1
    want = sum(math.atan(0.5 * l) * math.exp(-((b - xs[i]) ** 2 + (l - ys[j]) ** 2) / (2 * 0.7**2))
               for b, l in [(0.0, 1.0), (2.0, 3.0)])
    assert abs(img[j * 6 + i] - want) < 1e-12


def test_persistence_image_doubling_point():
    pt = [[0.5, 1.5]]
    one = persistence_image(PersistenceDiagram(0, pt))
    two = persistence_image(PersistenceDiagram(0, pt * 2))
    assert np.allclose(two, 2 * one)


@settings(max_examples=60)
@given(diagrams)
def test_persistence_image_bounds(pd):
    img = persistence_image(pd)
    assert np.all(img >= 0)
    assert np.all(img <= len(pd) * math.atan(0.5 * pd.lifetimes.max()) + 1e-12)


def test_persistence_image_bad_sigma():
    with pytest.raises(ValueError):
        persistence_image(PersistenceDiagram(0, [[0.0, 1.0]]), sigma=0)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bclr.core import GaussianPrior, GibbsConfig, PosteriorSamples, run_gibbs, standardize_columns
from bclr.embeddings import EmbeddingSpec, embed_tabular_series
from bclr.harness.generators import gen_multi3
from bclr.multi import (
    MultiConfig,
    Partition,
    SegmentPosterior,
    constrained_modes,
    constrained_picks,
    fit_segments,
    initial_partition,
    multi_fit,
    prune_by_entropy,
)
from bclr.posterior import ChangepointPosterior
from bclr.rng import make_stream

FAST = GibbsConfig(400, 200)


def _segment(index, lo, hi, masses):
    """SegmentPosterior on support lo+1..hi-1 from a {changepoint: mass} dict."""
    pmf = np.zeros(hi - lo - 1)
    for k, v in masses.items():
        pmf[k - lo - 1] = v
    post = ChangepointPosterior(pmf, lo + 1)
    draws = np.repeat(list(masses), 10)
    return SegmentPosterior(index, lo, hi, post, PosteriorSamples(draws, np.zeros((draws.size, 1))))


def _entropy_segment(h_target, m=20):
    """Segment whose pmf has a prescribed normalized entropy (bisection on a tilt)."""
    lo_t, hi_t = 0.0, 50.0
    for _ in range(200):
        t = 0.5 * (lo_t + hi_t)
        p = np.exp(-t * np.arange(m))
        p /= p.sum()
        h = -np.sum(p * np.log(p)) / np.log(m)
        lo_t, hi_t = (t, hi_t) if h > h_target else (lo_t, t)
    seg = SegmentPosterior(1, 0, m + 1, ChangepointPosterior(p, 1), PosteriorSamples([1, 2], np.zeros((2, 1))))
    assert abs(seg.entropy - h_target) < 1e-9
    return seg


def test_initial_partition_examples():
    assert initial_partition(250, 10).boundaries == (0, 22, 45, 68, 90, 113, 136, 159, 181, 204, 227, 250)
    p = initial_partition(100, 1)
    assert p.boundaries == (0, 50, 100) and p.segment(1) == (0, 100)
    with pytest.raises(ValueError):
        initial_partition(5, 3)


@given(st.integers(1, 30), st.integers(0, 500))
def test_initial_partition_strictly_increasing(J, extra):
    n = 2 * (J + 1) + extra
    b = initial_partition(n, J).boundaries
    assert b[0] == 0 and b[-1] == n and len(b) == J + 2
    assert all(y > x for x, y in zip(b, b[1:]))


def test_partition_validation_and_segments():
    with pytest.raises(ValueError):
        Partition((0, 10, 10, 20))
    with pytest.raises(ValueError):
        Partition((1, 5, 9))
    p = Partition.from_changepoints((100, 175, 205), 250)
    assert p.J == 3 and p.n == 250
    assert [p.segment(j) for j in (1, 2, 3)] == [(0, 175), (100, 205), (175, 250)]
    with pytest.raises(IndexError):
        p.segment(4)


def test_config_feasibility():
    MultiConfig(J=10, min_gap=10).check(250)
    with pytest.raises(ValueError, match="infeasible"):
        MultiConfig(J=10, min_gap=11).check(250)
    with pytest.raises(ValueError, match="infeasible"):
        multi_fit(np.zeros((100, 2)), MultiConfig(J=10, min_gap=10), make_stream(0))
    for bad in (dict(J=0), dict(min_gap=1), dict(eta=(0.0,)), dict(prior_scale=-1.0)):
        with pytest.raises(ValueError):
            MultiConfig(**bad)


def test_constrained_modes_gap():
    segs = [_segment(1, 0, 150, {100: 1.0}), _segment(2, 60, 200, {105: 0.7, 120: 0.3}),
            _segment(3, 110, 250, {175: 1.0})]
    # the second window starts at 110, so its mode moves to 120
    assert constrained_modes(segs, 10) == [100, 120, 175]
    only = [_segment(1, 0, 150, {100: 1.0}), _segment(2, 60, 200, {105: 1.0}), _segment(3, 110, 250, {175: 1.0})]
    assert constrained_modes(only, 10) == [100, 175]


def test_constrained_modes_collapse_and_unconstrained():
    segs = [_segment(1, 0, 100, {40: 1.0}), _segment(2, 30, 120, {41: 1.0}), _segment(3, 60, 200, {150: 1.0})]
    picks = constrained_picks(segs, 5)
    assert picks == [(0, 40), (2, 150)]
    free = [_segment(1, 0, 100, {20: 1.0}), _segment(2, 50, 150, {90: 1.0}), _segment(3, 100, 200, {160: 1.0})]
    assert constrained_modes(free, 5) == [20, 90, 160]


def test_window_near_segment_end_is_respected():
    seg = _segment(1, 0, 50, {48: 0.9, 30: 0.1})
    assert constrained_modes([seg], 5) == [30]


def test_prune_examples():
    segs = [_entropy_segment(0.3), _entropy_segment(0.9)]
    res = prune_by_entropy(segs, [(0, 5), (1, 7)], 0.5)
    assert res.changepoints == (5,)
    assert abs(res.entropies[0] - 0.3) < 1e-9
    uniform = SegmentPosterior(1, 0, 11, ChangepointPosterior(np.full(10, 0.1)), PosteriorSamples([1, 2], np.zeros((2, 1))))
    assert uniform.entropy == pytest.approx(1.0)
    assert prune_by_entropy([uniform], [(0, 3)], 1.0).changepoints == ()
    point = _segment(1, 0, 20, {7: 1.0})
    assert point.entropy == 0.0
    assert prune_by_entropy([point], [7], 0.01).changepoints == (7,)


def _data(seed, n=120, kappa=60, shift=3.0):
    g = np.random.default_rng(seed)
    x = g.normal(size=(n, 2))
    x[kappa:, 0] += shift
    return x


def test_single_segment_equals_run_gibbs():
    x = _data(0)
    cfg = MultiConfig(J=1, min_gap=5, eta=(), eta_final=2.0, final=FAST, prior_scale=0.5)
    stream = make_stream(11)
    res = multi_fit(x, cfg, stream)
    direct = run_gibbs(standardize_columns(x)[0], GaussianPrior.isotropic(2, 0.5), config=FAST, rng=stream.child(0, 1))
    seg = res.segments[0]
    assert np.array_equal(seg.samples.kappa, direct.kappa)
    assert np.array_equal(seg.samples.beta, direct.beta)
    assert res.changepoints == (seg.posterior.mode(),)


def test_segments_fit_independently_of_order():
    rows, _ = gen_multi3(make_stream(3))
    X = embed_tabular_series(rows, EmbeddingSpec("poly2"))
    cfg = MultiConfig(final=GibbsConfig(200, 100))
    part = initial_partition(X.n, 10)
    stream = make_stream(5)
    segs = fit_segments(X, part, cfg, stream, stage=2)
    assert len(segs) == 10
    prior = GaussianPrior.isotropic(X.d, cfg.prior_scale)
    for j in (7, 2, 10):
        s = segs[j - 1]
        lo, hi = part.segment(j)
        assert (s.index, s.lo, s.hi) == (j, lo, hi)
        assert s.posterior.start == lo + 1 and s.posterior.pmf.size == hi - lo - 1
        alone = run_gibbs(standardize_columns(X.values[lo:hi])[0], prior, config=cfg.final, rng=stream.child(2, j))
        assert np.array_equal(alone.kappa, s.samples.kappa)


def test_segment_error_names_segment():
    x = _data(1)
    # segment 1 spans rows 1..2 only
    with pytest.raises(ValueError, match=r"segment 1 \(rows 1\.\.2\): need at least 3"):
        fit_segments(x, Partition((0, 1, 2, 3, 120)), MultiConfig(J=3, final=FAST), make_stream(0))


def test_single_change_is_recovered():
    x = _data(2, n=200, kappa=120, shift=3.0)
    cfg = MultiConfig(J=4, min_gap=5, warmup=GibbsConfig(300, 150), final=FAST)
    res = multi_fit(x, cfg, make_stream(2))
    assert len(res.changepoints) >= 1
    assert min(abs(k - 120) for k in res.changepoints) <= 3
    assert all(h < cfg.eta_final for h in res.entropies)


def test_pure_noise_gives_few_changepoints():
    x = np.random.default_rng(4).normal(size=(250, 3))
    cfg = MultiConfig(warmup=GibbsConfig(300, 150), final=FAST)
    res = multi_fit(x, cfg, make_stream(4))
    assert len(res.changepoints) <= 2


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_gap_and_entropy_invariants(seed):
    x = _data(seed, n=150, kappa=70, shift=2.0)
    cfg = MultiConfig(J=3, min_gap=6, eta=(0.8,), eta_final=0.9, warmup=GibbsConfig(100, 50),
                      final=GibbsConfig(150, 75))
    res = multi_fit(x, cfg, make_stream(seed))
    cps = (0, *res.changepoints)
    assert all(b - a >= cfg.min_gap for a, b in zip(cps, cps[1:]))
    assert all(h < cfg.eta_final for h in res.entropies)
    assert len(res.history) >= 1 and res.history[0] == initial_partition(150, 3).boundaries

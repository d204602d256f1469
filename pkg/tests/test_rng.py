import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bclr.rng import RngStream, make_stream, pg_mean, sample_pg, sample_pg_many
from oracles import pg_mean_by_integration


def _draws(stream, k=100):
    return stream.generator.random(k)


def test_same_stream_reproduces():
    assert np.array_equal(_draws(make_stream(7, 0)), _draws(make_stream(7, 0)))


def test_stream_ids_and_seeds_separate():
    base = _draws(make_stream(7, 0))
    assert not np.array_equal(base, _draws(make_stream(7, 1)))
    assert not np.array_equal(base, _draws(make_stream(8, 0)))


def test_child_depends_on_identity_not_state():
    a = make_stream(3, 2)
    c1 = a.child(1, 4)
    a.generator.random(10)
    c2 = a.child(1, 4)
    assert np.array_equal(_draws(c1), _draws(c2))
    assert not np.array_equal(_draws(a.child(1, 4)), _draws(a.child(4, 1)))


def test_fresh_rewinds():
    s = make_stream(5, 9)
    first = sample_pg_many(np.full(20, 1.5), s)
    again = sample_pg_many(np.full(20, 1.5), s.fresh())
    assert np.array_equal(first, again)


def test_rejects_out_of_range_keys():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(1, 2**64)


def test_pg_byte_identical_across_processes():
    code = (
        "import numpy as np;from bclr.rng import make_stream,sample_pg_many;"
        "print(sample_pg_many(np.linspace(-3,3,50),make_stream(11,4)).tobytes().hex())"
    )
    outs = [subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
            for _ in range(2)]
    assert outs[0] == outs[1]
    local = sample_pg_many(np.linspace(-3, 3, 50), make_stream(11, 4)).tobytes().hex()
    assert outs[0].strip() == local


def test_pg_mean_formula():
    assert pg_mean(0.0) == 0.25
    assert abs(pg_mean(2.0) - math.tanh(1.0) / 4) < 1e-15
    assert abs(pg_mean(1e-9) - 0.25) < 1e-12


@pytest.mark.parametrize("z", [0.0, 0.1, 2.0, 5.0])
def test_mean_formula_matches_density_integration(z):
    m, mass = pg_mean_by_integration(z)
    assert abs(mass - 1) < 1e-9
    assert abs(m - pg_mean(z)) < 1e-9


@pytest.mark.parametrize("z", [0.0, 2.0, 50.0, 700.0, 1000.0])
def test_pg_sample_mean_within_3se(z):
    x = sample_pg_many(np.full(200_000, z), make_stream(123, int(z)))
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - pg_mean(z)) < 3 * se
    assert np.all(x > 0)


def test_pg_variance_matches_closed_form():
    # Var PG(1, z) = (sinh z - z) / (4 z^3 cosh^2(z/2))
    z = 1.5
    x = sample_pg_many(np.full(400_000, z), make_stream(9, 1))
    var = (math.sinh(z) - z) / (4 * z**3 * math.cosh(z / 2) ** 2)
    se = math.sqrt((np.mean((x - x.mean()) ** 4) - x.var() ** 2) / x.size)
    assert abs(x.var() - var) < 4 * se


def test_pg_symmetric_in_z():
    a = sample_pg_many(np.full(20_000, 2.0), make_stream(1, 0))
    b = sample_pg_many(np.full(20_000, -2.0), make_stream(1, 1))
    assert stats.ks_2samp(a, b).pvalue > 0.001


def test_scalar_and_vector_agree():
    s1, s2 = make_stream(4, 4), make_stream(4, 4)
    zs = [0.3, -1.0, 4.0]
    assert np.array_equal([sample_pg(z, s1) for z in zs], sample_pg_many(np.array(zs), s2))


def test_nonfinite_z_rejected():
    with pytest.raises(ValueError):
        sample_pg(float("nan"), make_stream(0))


@settings(max_examples=40)
@given(st.floats(-800, 800, allow_nan=False), st.integers(0, 2**32))
def test_draws_positive(z, seed):
    x = sample_pg_many(np.full(50, z), make_stream(seed))
    assert np.all(x > 0) and np.all(np.isfinite(x))

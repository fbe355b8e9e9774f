from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urnlab.distributions import CATALOG, DiscreteDist, cross_sq_diff, moments, sample
from urnlab.rng import BatchStream, RngStream, derive_seed


@st.composite
def dists(draw, max_atoms=4, max_value=9):
    values = draw(st.lists(st.integers(1, max_value), min_size=1, max_size=max_atoms,
                           unique=True))
    weights = draw(st.lists(st.integers(1, 20), min_size=len(values), max_size=len(values)))
    total = sum(weights)
    return DiscreteDist([(v, Fraction(w, total)) for v, w in zip(values, weights)])


class TestMoments:
    def test_point_mass(self):
        ms = moments(DiscreteDist.point(1))
        assert (ms.mean, ms.variance, ms.second_moment) == (1, 0, 1)

    def test_uniform_13(self):
        ms = moments(DiscreteDist.uniform([1, 3]))
        assert (ms.mean, ms.variance, ms.second_moment) == (2, 1, 5)

    def test_uniform_12(self):
        ms = moments(DiscreteDist.uniform([1, 2]))
        assert ms.mean == Fraction(3, 2)
        assert ms.variance == Fraction(1, 4)
        assert ms.second_moment == Fraction(5, 2)

    @given(dists())
    def test_second_moment_identity(self, d):
        ms = moments(d)
        assert ms.second_moment - ms.mean ** 2 == ms.variance
        assert ms.variance >= 0 and ms.mean >= 1


class TestCrossSqDiff:
    def test_identical_constants(self):
        d = DiscreteDist.point(4)
        assert cross_sq_diff(d, d) == 0

    def test_constant_vs_uniform(self):
        assert cross_sq_diff(DiscreteDist.point(1), DiscreteDist.uniform([3, 5])) == 10

    def test_uniform_vs_constant(self):
        assert cross_sq_diff(DiscreteDist.uniform([1, 2]), DiscreteDist.point(1)) == Fraction(1, 2)

    @given(dists(), dists())
    def test_matches_pair_enumeration(self, a, b):
        brute = sum(pa * pb * (x - y) ** 2 for x, pa in a.atoms for y, pb in b.atoms)
        assert cross_sq_diff(a, b) == brute

    @given(dists())
    def test_self_is_twice_variance(self, d):
        assert cross_sq_diff(d, d) == 2 * moments(d).variance


class TestValidation:
    @pytest.mark.parametrize("atoms", [
        [],
        [(0, 1)],
        [(1, Fraction(1, 2))],
        [(1, Fraction(1, 2)), (1, Fraction(1, 2))],
        [(2, Fraction(3, 2)), (3, Fraction(-1, 2))],
        [(1.5, 1)],
    ])
    def test_rejects(self, atoms):
        with pytest.raises(ValueError):
            DiscreteDist(atoms)

    def test_sorted(self):
        d = DiscreteDist([(5, "1/4"), (2, "3/4")])
        assert d.values == (2, 5)

    def test_json_rational_and_decimal(self):
        a = DiscreteDist.from_json({"atoms": [[1, "1/2"], [3, "0.5"]]})
        assert a == DiscreteDist.uniform([1, 3])
        assert DiscreteDist.from_json(a.to_json()) == a

    def test_json_decimal_is_exact(self):
        d = DiscreteDist.from_json({"atoms": [[1, "0.1"], [2, "0.9"]]})
        assert d.atoms[0][1] == Fraction(1, 10)

    def test_json_shorthand_point(self):
        assert DiscreteDist.from_json(3) == DiscreteDist.point(3)


class TestSample:
    def test_point_mass(self):
        rng = RngStream(99)
        assert all(sample(DiscreteDist.point(4), rng) == 4 for _ in range(100))

    def test_fair_coin_frequency(self):
        rng = RngStream(2024)
        d = DiscreteDist.uniform([1, 2])
        ones = sum(sample(d, rng) == 1 for _ in range(10 ** 6))
        assert 0.498 <= ones / 10 ** 6 <= 0.502

    def test_same_seed_same_sequence(self):
        d = DiscreteDist.uniform([1, 3, 7])
        a, b = RngStream(5), RngStream(5)
        assert [sample(d, a) for _ in range(200)] == [sample(d, b) for _ in range(200)]

    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_empirical_mean_within_4_se(self, name):
        d = CATALOG[name]
        rng = RngStream(derive_seed(77, len(name)))
        vals = np.array([sample(d, rng) for _ in range(10 ** 6)])
        ms = moments(d)
        se = np.sqrt(float(ms.variance) / vals.size)
        assert abs(vals.mean() - float(ms.mean)) <= 4 * se + 1e-15


class TestRng:
    def test_batch_matches_scalar(self):
        seeds = [derive_seed(3, i) for i in range(7)]
        batch = BatchStream(seeds)
        scalars = [RngStream(s) for s in seeds]
        for _ in range(50):
            got = batch.uniform()
            want = [r.uniform() for r in scalars]
            assert got.tolist() == want

    def test_uniform_range(self):
        r = RngStream(0)
        xs = [r.uniform() for _ in range(10000)]
        assert min(xs) >= 0.0 and max(xs) < 1.0

    def test_derived_seeds_distinct(self):
        seeds = {derive_seed(1, i) for i in range(10000)}
        assert len(seeds) == 10000
        assert derive_seed(1, 0) != derive_seed(2, 0)

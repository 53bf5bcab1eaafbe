import itertools

import numpy as np
import pytest

from sada.graph import Dag, generate_random_dag
from sada.synth import SampleMatrix, generate_discrete, generate_linear_nongaussian, sample_from_cpts
from sada.citest import (
    CiError,
    ExactCiOracle,
    GSquaredOracle,
    InsufficientSamplesError,
    PartialCorrelationOracle,
    SingularConditioningError,
    UnreliableTestError,
    ci_exact,
    ci_g2,
    ci_partial_correlation,
    find_separator,
)

from conftest import random_small_dags
from oracles import exists_separator_brute

CHAIN = Dag(3, [(0, 1), (1, 2)])
VSTRUCT = Dag(3, [(0, 2), (1, 2)])


def _copy_chain_cpts(k=3, peak=0.9):
    root = np.full((1, k), 1.0 / k)
    copy = np.full((k, k), (1 - peak) / (k - 1))
    np.fill_diagonal(copy, peak)
    return {0: root, 1: copy, 2: copy}


class TestPartialCorrelation:
    def test_identical_columns_dependent(self):
        rng = np.random.default_rng(1)
        x = rng.random(200)
        data = SampleMatrix(np.column_stack([x, x.copy()]), "continuous")
        v = PartialCorrelationOracle(data).query(0, 1)
        assert not v.independent
        assert v.p_value < 1e-12

    def test_independent_pair_acceptance_rate(self):
        hits = 0
        for s in range(100):
            rng = np.random.default_rng(s)
            data = SampleMatrix(rng.random((2000, 2)), "continuous")
            if PartialCorrelationOracle(data).query(0, 1).independent:
                hits += 1
        assert hits >= 90

    def test_chain_verdicts_rate(self):
        hits = 0
        for s in range(100):
            sm = generate_linear_nongaussian(CHAIN, m=2000, noise_weight=0.3, seed=s)
            o = PartialCorrelationOracle(sm)
            if (not o.query(0, 2).independent) and o.query(0, 2, (1,)).independent:
                hits += 1
        assert hits >= 90

    def test_size_calibration_thousand_queries(self):
        # false-dependence rate on truly independent columns stays near alpha
        rng = np.random.default_rng(7)
        data = SampleMatrix(rng.random((2000, 46)), "continuous")
        o = PartialCorrelationOracle(data)
        pairs = list(itertools.combinations(range(46), 2))[:1000]
        false_dep = 0
        for i, (u, v) in enumerate(pairs):
            z = () if i % 2 == 0 else ((u + v) % 46 if (u + v) % 46 not in (u, v) else (u + 7) % 46,)
            if not o.query(u, v, z).independent:
                false_dep += 1
        assert false_dep / 1000 <= o.alpha_level + 0.03

    def test_symmetric_in_pair(self):
        g = generate_random_dag(8, 1.5, seed=2)
        sm = generate_linear_nongaussian(g, m=300, seed=3)
        o = PartialCorrelationOracle(sm)
        for u, v, z in [(0, 5, ()), (2, 7, (1,)), (3, 6, (0, 4))]:
            assert o.query(u, v, z) == o.query(v, u, z)

    def test_insufficient_samples(self):
        data = SampleMatrix(np.random.default_rng(0).random((5, 4)), "continuous")
        o = PartialCorrelationOracle(data)
        with pytest.raises(InsufficientSamplesError):
            o.query(0, 1, (2, 3))

    def test_singular_conditioning(self):
        rng = np.random.default_rng(0)
        x, y = rng.random(500), rng.random(500)
        data = SampleMatrix(np.column_stack([x, y, x.copy()]), "continuous")
        with pytest.raises(SingularConditioningError):
            PartialCorrelationOracle(data).query(0, 1, (2,))

    def test_constant_column(self):
        data = SampleMatrix(
            np.column_stack([np.ones(50), np.random.default_rng(0).random(50)]),
            "continuous")
        with pytest.raises(SingularConditioningError):
            PartialCorrelationOracle(data).query(0, 1)

    def test_validation(self):
        data = SampleMatrix(np.random.default_rng(0).random((50, 3)), "continuous")
        o = PartialCorrelationOracle(data)
        with pytest.raises(CiError):
            o.query(0, 0)
        with pytest.raises(CiError):
            o.query(0, 1, (1,))
        with pytest.raises(CiError):
            o.query(0, 9)
        with pytest.raises(CiError):
            PartialCorrelationOracle(data, alpha_level=1.5)
        disc = SampleMatrix(np.zeros((10, 2), dtype=np.int64), "discrete", num_states=2)
        with pytest.raises(CiError):
            PartialCorrelationOracle(disc)

    def test_convenience_wrapper(self):
        rng = np.random.default_rng(4)
        data = SampleMatrix(rng.random((400, 2)), "continuous")
        assert ci_partial_correlation(data, 0, 1) == PartialCorrelationOracle(data).query(0, 1)


class TestGSquared:
    def test_edgeless_acceptance_rate(self):
        g = Dag(5)
        accept = total = 0
        for s in range(40):
            o = GSquaredOracle(generate_discrete(g, m=2000, seed=s))
            for u, v in itertools.combinations(range(5), 2):
                total += 1
                accept += o.query(u, v).independent
        assert accept / total >= 0.90

    def test_v_structure_rates(self):
        marg = cond = 0
        for s in range(100):
            o = GSquaredOracle(generate_discrete(VSTRUCT, m=2000, seed=s))
            marg += o.query(0, 1).independent
            cond += not o.query(0, 1, (2,)).independent
        assert marg >= 80
        assert cond >= 80

    def test_strong_chain_verdicts(self):
        hits = 0
        for s in range(50):
            rng = np.random.default_rng(s)
            sm = sample_from_cpts(CHAIN, _copy_chain_cpts(), 3, m=2000, rng=rng)
            o = GSquaredOracle(sm)
            if (not o.query(0, 2).independent) and o.query(0, 2, (1,)).independent:
                hits += 1
        assert hits >= 40

    def test_copy_column_dependent(self):
        rng = np.random.default_rng(3)
        x = rng.integers(0, 3, size=1000)
        sm = SampleMatrix(np.column_stack([x, x.copy()]), "discrete", num_states=3)
        v = GSquaredOracle(sm).query(0, 1)
        assert not v.independent
        assert v.p_value < 1e-12

    def test_unreliable_below_heuristic(self):
        sm = generate_discrete(CHAIN, m=100, seed=0)
        o = GSquaredOracle(sm)
        with pytest.raises(UnreliableTestError):
            o.query(0, 2, (1,))  # needs m >= 10 * 12
        o.query(0, 2)  # marginal dof 4 is fine at m=100

    def test_constant_column_independent_at_p1(self):
        vals = np.column_stack([
            np.zeros(500, dtype=np.int64),
            np.random.default_rng(0).integers(0, 3, 500),
        ])
        sm = SampleMatrix(vals, "discrete", num_states=3)
        v = GSquaredOracle(sm).query(0, 1)
        assert v.independent and v.p_value == 1.0

    def test_symmetric_in_pair(self):
        g = generate_random_dag(6, 1.25, seed=5)
        sm = generate_discrete(g, m=2000, seed=6)
        o = GSquaredOracle(sm)
        for u, v, z in [(0, 3, ()), (1, 5, (2,)), (2, 4, ())]:
            assert o.query(u, v, z) == o.query(v, u, z)

    def test_kind_mismatch(self):
        cont = SampleMatrix(np.random.default_rng(0).random((10, 2)), "continuous")
        with pytest.raises(CiError):
            GSquaredOracle(cont)

    def test_convenience_wrapper(self):
        sm = generate_discrete(CHAIN, m=2000, seed=9)
        assert ci_g2(sm, 0, 1) == GSquaredOracle(sm).query(0, 1)


class TestExactOracle:
    def test_verdicts_and_p_values(self, chain3):
        o = ExactCiOracle(chain3)
        dep = o.query(0, 2)
        sep = o.query(0, 2, (1,))
        assert (dep.independent, dep.p_value) == (False, 0.0)
        assert (sep.independent, sep.p_value) == (True, 1.0)
        assert ci_exact(chain3, 0, 2, (1,)) == sep

    def test_collider_separator_is_empty_set(self):
        o = ExactCiOracle(VSTRUCT)
        sep = o.find_separator(0, 1, {2})
        assert sep == frozenset()
        assert sep is not None

    def test_chain_separator(self, chain3):
        assert ExactCiOracle(chain3).find_separator(0, 2, {1}) == {1}

    def test_nine_node_separators(self, nine_node):
        o = ExactCiOracle(nine_node)
        assert o.find_separator(6, 1, {3}) is None
        assert o.find_separator(6, 1, {2, 3}) == {2, 3}
        assert o.separable(6, 1, {2, 3})
        assert not o.separable(6, 1, {3}, max_cond=None)

    def test_matches_bruteforce_scan(self):
        # the ancestor-restricted search must return the very same subset the
        # full candidate scan would, for every cap
        rng = np.random.default_rng(13)
        for g in random_small_dags(16, seed=99):
            o = ExactCiOracle(g)
            for _ in range(12):
                u, v = rng.choice(g.n, size=2, replace=False)
                u, v = int(u), int(v)
                pool_size = int(rng.integers(0, g.n - 1))
                pool = [w for w in rng.permutation(g.n)[:pool_size] if w not in (u, v)]
                for cap in (0, 1, 2, 3, None):
                    expect = exists_separator_brute(g, u, v, pool, cap)
                    got = o.find_separator(u, v, pool, cap)
                    if expect is None:
                        assert got is None
                    else:
                        assert got == frozenset(expect)
                    assert o.separable(u, v, pool, cap) == (expect is not None)


class TestFindSeparatorDispatch:
    def test_statistical_chain(self):
        sm = generate_linear_nongaussian(CHAIN, m=2000, seed=21)
        o = PartialCorrelationOracle(sm)
        assert find_separator(o, 0, 2, {1}) == {1}

    def test_candidate_pool_excludes_pair(self, chain3):
        with pytest.raises(CiError):
            find_separator(ExactCiOracle(chain3), 0, 2, {0, 1})

    def test_cap_zero_only_empty_subset(self, chain3):
        assert find_separator(ExactCiOracle(chain3), 0, 2, {1}, max_cond=0) is None

    def test_unreliable_subsets_are_skipped(self):
        # m=100 makes |z|=1 unreliable for k=3, so only the empty set is
        # testable: strongly linked endpoints yield no separator at all
        rng = np.random.default_rng(2)
        sm = sample_from_cpts(CHAIN, _copy_chain_cpts(peak=0.9), 3, m=100, rng=rng)
        o = GSquaredOracle(sm)
        assert find_separator(o, 0, 2, {1}) is None
        # an unlinked pair still separates through the decidable empty set
        free = SampleMatrix(
            np.column_stack([
                rng.integers(0, 3, 100), rng.integers(0, 3, 100), rng.integers(0, 3, 100),
            ]), "discrete", num_states=3)
        o2 = GSquaredOracle(free)
        assert find_separator(o2, 0, 1, {2}) == frozenset()

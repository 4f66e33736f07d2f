"""
Unit tests for the tree reduction and the reduction engines
"""

from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmq import reduction
from swarmq.fitness import CUBIC, from_scalar
from swarmq.reduction import UNROLLED_WIDTHS, lane_tree_reduce, run_reduction, tree_reduce_max
from swarmq.rng import RngKey
from swarmq.runtime import PAD_INDEX, SENTINEL_FIT, run_groups
from swarmq.serial import run_serial
from swarmq.swarm import PsoParams


def sequential_max(fits, indices):
    best_fit, best_idx = SENTINEL_FIT, PAD_INDEX
    for f, i in zip(fits, indices):
        if f > best_fit or (f == best_fit and i < best_idx):
            best_fit, best_idx = f, i
    return best_fit, best_idx


fit_values = st.one_of(st.sampled_from([-np.inf, 0.0, 1.0, 5.0]), st.floats(-1e6, 1e6))


class TestTreeReduceMax:
    """Test the (fit, index) max reduction"""

    def test_single(self):
        """Test one pair reduces to itself"""
        assert tree_reduce_max([2.5], [7]) == (2.5, 7)

    def test_small_vector(self):
        """Test [3, 1, 4, 1, 5] picks index 4"""
        assert tree_reduce_max([3.0, 1.0, 4.0, 1.0, 5.0], [0, 1, 2, 3, 4]) == (5.0, 4)

    def test_all_tied(self):
        """Test equal fitness goes to the lowest particle index"""
        assert tree_reduce_max([1.0] * 8, [7, 3, 9, 5, 4, 8, 6, 10]) == (1.0, 3)

    def test_empty(self):
        """Test an empty input reduces to the sentinel"""
        assert tree_reduce_max([], []) == (SENTINEL_FIT, PAD_INDEX)

    def test_padding_loses(self):
        """Test an all -inf group keeps its real lowest index over the padding"""
        assert tree_reduce_max([-np.inf, -np.inf, -np.inf], [4, 2, 6], lanes=32) == (-np.inf, 2)

    def test_length_mismatch(self):
        """Test fits and indices must pair up"""
        with pytest.raises(ValueError):
            tree_reduce_max([1.0, 2.0], [0])

    def test_random_128(self):
        """Test a random 128-vector against the sequential oracle"""
        rng = np.random.default_rng(4)
        fits = rng.integers(0, 20, size=128).astype(np.float64)
        idx = rng.permutation(128)
        assert tree_reduce_max(fits, idx, unrolled=True) == sequential_max(fits, idx)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(fit_values, min_size=1, max_size=300),
        st.sampled_from([None, 32, 64, 128, 256]),
    )
    def test_matches_sequential(self, fits, lanes):
        """Test looped and unrolled reductions agree with a sequential scan"""
        idx = list(range(len(fits)))[::-1]
        expected = sequential_max(fits, idx)
        assert tree_reduce_max(fits, idx, lanes=lanes) == expected
        assert tree_reduce_max(fits, idx, lanes=lanes, unrolled=True) == expected

    def test_unrolled_widths(self):
        """Test the specialized widths"""
        assert UNROLLED_WIDTHS == (32, 64, 128, 256)

    def test_unrolled_only_for_listed_group_sizes(self):
        """Test group size 33 runs the stride loop while group size 64 runs a straight-line kernel"""
        fits = np.arange(33, dtype=np.float64)
        idx = np.arange(33)
        with patch("swarmq.reduction._looped", wraps=reduction._looped) as looped:
            assert tree_reduce_max(fits, idx, lanes=33, unrolled=True) == (32.0, 32)
            looped.assert_called_once()
            looped.reset_mock()
            assert tree_reduce_max(fits, idx, lanes=64, unrolled=True) == (32.0, 32)
            looped.assert_not_called()


class TestLaneTreeReduce:
    """Test the cooperative lane-level reduction"""

    @pytest.mark.parametrize("group_size", [1, 8, 32])
    def test_every_lane_sees_winner(self, group_size):
        """Test lanes of ragged groups agree on the group winner"""
        particle_cnt = 3 * group_size - (group_size // 2)
        rng = np.random.default_rng(group_size)
        fitness = rng.integers(0, 5, size=particle_cnt).astype(np.float64)
        n_groups = -(-particle_cnt // group_size)
        shared_fit = np.full((n_groups, group_size), SENTINEL_FIT)
        shared_idx = np.full((n_groups, group_size), PAD_INDEX, dtype=np.int64)
        winners = {}

        def body(group, lane, barrier, scratch):
            particle = group * group_size + lane
            if particle < particle_cnt:
                shared_fit[group, lane] = fitness[particle]
                shared_idx[group, lane] = particle
            barrier.wait()
            winners[(group, lane)] = lane_tree_reduce(lane, shared_fit[group], shared_idx[group], barrier)

        run_groups(particle_cnt, group_size, body)
        for g in range(n_groups):
            start, stop = g * group_size, min((g + 1) * group_size, particle_cnt)
            expected = sequential_max(fitness[start:stop], range(start, stop))
            assert {winners[(g, lane)] for lane in range(group_size)} == {expected}


class TestRunReduction:
    """Test the reduction engines against the serial reference"""

    @pytest.mark.parametrize("unrolled", [False, True])
    def test_matches_serial(self, unrolled):
        """Test 256 particles, 1D cubic, 100 iterations"""
        params = PsoParams(particle_cnt=256, max_iter=100, group_size=64)
        key = RngKey(seed=17)
        serial = run_serial(params, CUBIC, key)
        result = run_reduction(params, CUBIC, key, unrolled=unrolled, workers=2)
        assert result.trace.tobytes() == serial.trace.tobytes()
        assert result.gbest_particle == serial.gbest_particle
        assert result.engine == ("unrolled" if unrolled else "reduction")

    def test_group_size_one(self):
        """Test single-lane groups reproduce the serial trace"""
        params = PsoParams(particle_cnt=12, dims=2, max_iter=20, group_size=1)
        key = RngKey(seed=3)
        assert run_reduction(params, CUBIC, key).trace.tobytes() == run_serial(params, CUBIC, key).trace.tobytes()

    def test_all_tied(self):
        """Test a flat fitness keeps particle 0 as gbest"""
        flat = from_scalar("flat", -100.0, 100.0, lambda p: 0.0)
        params = PsoParams(particle_cnt=64, max_iter=5, group_size=16)
        result = run_reduction(params, flat, RngKey(seed=1))
        assert result.gbest_particle == 0
        assert result.gbest_fit == 0.0

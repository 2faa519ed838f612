import math

import pytest
from hypothesis import given, settings, strategies as st

from vrcache.errors import ArgumentError
from vrcache.returns import (
    DiscountParams,
    Trajectory,
    lambda_return_block,
    lambda_return_direct,
    n_step_return,
)


def test_one_step_return():
    assert n_step_return(Trajectory([2.0], [1.0]), 1, 0.9) == pytest.approx(2.9)


def test_one_step_terminal():
    assert n_step_return(Trajectory([5.0], [123.0], [True]), 1, 0.9) == 5.0


def test_three_step_return():
    # 1 + 0.5*2 + 0.25*3 + 0.125*4
    traj = Trajectory([1, 2, 3], [0, 0, 4])
    assert n_step_return(traj, 3, 0.5) == 3.25


def test_n_step_truncates_at_terminal():
    traj = Trajectory([1, 2, 3], [9, 9, 9], [False, True, False])
    assert n_step_return(traj, 3, 0.5) == 1 + 0.5 * 2


def test_n_out_of_range():
    with pytest.raises(ArgumentError):
        n_step_return(Trajectory([1.0], [0.0]), 2, 0.9)
    with pytest.raises(ArgumentError):
        n_step_return(Trajectory([1.0], [0.0]), 0, 0.9)


def test_trajectory_validation():
    with pytest.raises(ArgumentError):
        Trajectory([1.0, 2.0], [0.0])
    with pytest.raises(ArgumentError):
        Trajectory([], [])
    assert Trajectory([1.0], [5.0], [True]).bootstrap_values == (0.0,)
    with pytest.raises(ArgumentError):
        DiscountParams(1.5, 0.5)


def test_direct_lambda_zero_is_one_step():
    traj = Trajectory([1.0, -2.0, 3.0], [0.3, 0.7, -1.1])
    assert lambda_return_direct(traj, DiscountParams(0.9, 0.0)) == n_step_return(traj, 1, 0.9)


def test_direct_lambda_one_gamma_one_monte_carlo():
    traj = Trajectory([1, 1, 1], [0, 0, 0], [False, False, True])
    assert lambda_return_direct(traj, DiscountParams(1.0, 1.0)) == 3.0


def test_direct_two_step_example():
    # 0.5*(1 + 0.9*10) + 0.5*(1 + 0.9*2 + 0.81*20)
    traj = Trajectory([1, 2], [10, 20])
    assert lambda_return_direct(traj, DiscountParams(0.9, 0.5)) == pytest.approx(14.5, abs=1e-12)


def test_block_two_position_example():
    out = lambda_return_block(Trajectory([1, 2], [10, 20]), DiscountParams(0.9, 0.5), seed=20.0)
    assert out == pytest.approx([14.5, 20.0], abs=1e-12)
    direct = [lambda_return_direct(Trajectory([1, 2], [10, 20]).suffix(i), DiscountParams(0.9, 0.5)) for i in range(2)]
    assert out == pytest.approx(direct, abs=1e-12)


def test_block_lambda_zero_is_elementwise_one_step():
    traj = Trajectory([0.1, 0.2, 0.3, 0.4], [1.5, -2.5, 3.5, 4.5], [False, True, False, False])
    out = lambda_return_block(traj, DiscountParams(0.97, 0.0))
    assert out == [n_step_return(traj.suffix(i), 1, 0.97) for i in range(4)]


def test_block_single_terminal():
    assert lambda_return_block(Trajectory([7.0], [3.0], [True]), DiscountParams(0.9, 0.8)) == [7.0]


def test_terminal_cuts_carry():
    traj = Trajectory([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [False, True, False])
    out = lambda_return_block(traj, DiscountParams(0.9, 0.7))
    assert out[1] == 2.0
    assert out[0] == pytest.approx(1.0 + 0.9 * (0.7 * 2.0 + 0.3 * 4.0), abs=1e-12)


def test_block_output_is_pure():
    traj = Trajectory([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    p = DiscountParams(0.9, 0.7)
    assert lambda_return_block(traj, p) == lambda_return_block(traj, p)


def test_lambda_one_block_exact_on_dyadic_data():
    traj = Trajectory([1.0, 2.0, -3.0, 4.0], [8.0, 16.0, 2.0, 6.0])
    out = lambda_return_block(traj, DiscountParams(0.5, 1.0))
    assert out == [n_step_return(traj.suffix(i), 4 - i, 0.5) for i in range(4)]


trajectories = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-5, 5), min_size=n, max_size=n),
        st.lists(st.floats(-5, 5), min_size=n, max_size=n),
        st.lists(st.booleans(), min_size=n, max_size=n),
        st.floats(0, 1),
        st.floats(0, 1),
    )
)


@settings(max_examples=300, deadline=None)
@given(trajectories)
def test_recursion_matches_direct(data):
    rewards, values, mask, gamma, lam = data
    traj = Trajectory(rewards, values, mask)
    p = DiscountParams(gamma, lam)
    out = lambda_return_block(traj, p)
    for i in range(len(traj)):
        assert math.isclose(out[i], lambda_return_direct(traj.suffix(i), p), rel_tol=0, abs_tol=1e-9)


@settings(max_examples=300, deadline=None)
@given(trajectories)
def test_convex_combination_bound(data):
    rewards, values, mask, gamma, lam = data
    mask = [False] * (len(mask) - 1) + [mask[-1]]  # terminal only at the end
    traj = Trajectory(rewards, values, mask)
    g = [n_step_return(traj, n, gamma) for n in range(1, len(traj) + 1)]
    lam_ret = lambda_return_direct(traj, DiscountParams(gamma, lam))
    assert min(g) - 1e-12 <= lam_ret <= max(g) + 1e-12

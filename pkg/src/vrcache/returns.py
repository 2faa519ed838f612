"""n-step and lambda-return estimators.

Two routes compute the same lambda-return. ``lambda_return_direct`` sums the
weighted n-step returns explicitly and exists as an oracle;
``lambda_return_block`` is the reverse-order recursion used to build caches.

Position ``i`` of a trajectory holds ``r_{t+i}``, the bootstrap value
``v(s_{t+i+1})`` and whether ``s_{t+i+1}`` is terminal. All arithmetic is
Python ``float`` (double precision).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ArgumentError


@dataclass(frozen=True)
class DiscountParams:
    gamma: float
    lam: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ArgumentError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.lam <= 1.0:
            raise ArgumentError(f"lambda must lie in [0, 1], got {self.lam}")


@dataclass(frozen=True)
class Trajectory:
    """Rewards, successor bootstrap values and successor-terminal flags.

    Bootstrap values at terminal positions are forced to zero on
    construction so both estimators see the same data.
    """

    rewards: tuple[float, ...]
    bootstrap_values: tuple[float, ...]
    terminal_mask: tuple[bool, ...]

    def __init__(
        self,
        rewards: Sequence[float],
        bootstrap_values: Sequence[float],
        terminal_mask: Sequence[bool] | None = None,
    ) -> None:
        rewards = tuple(float(r) for r in rewards)
        values = tuple(float(v) for v in bootstrap_values)
        if terminal_mask is None:
            terminal_mask = (False,) * len(rewards)
        mask = tuple(bool(m) for m in terminal_mask)
        if not (len(rewards) == len(values) == len(mask)):
            raise ArgumentError(
                f"length mismatch: {len(rewards)} rewards, {len(values)} values, {len(mask)} flags"
            )
        if not rewards:
            raise ArgumentError("trajectory must have at least one position")
        values = tuple(0.0 if m else v for v, m in zip(values, mask))
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "bootstrap_values", values)
        object.__setattr__(self, "terminal_mask", mask)

    def __len__(self) -> int:
        return len(self.rewards)

    def suffix(self, start: int) -> "Trajectory":
        return Trajectory(
            self.rewards[start:], self.bootstrap_values[start:], self.terminal_mask[start:]
        )


def n_step_return(traj: Trajectory, n: int, gamma: float) -> float:
    """Discounted sum of ``n`` rewards plus ``gamma**n`` times the value reached.

    If a terminal successor occurs before step ``n`` the sum stops there and
    nothing is bootstrapped.
    """
    if not 1 <= n <= len(traj):
        raise ArgumentError(f"n must be in [1, {len(traj)}], got {n}")
    total = 0.0
    for k in range(n):
        total += gamma**k * traj.rewards[k]
        if traj.terminal_mask[k]:
            return total
    return total + gamma**n * traj.bootstrap_values[n - 1]


def lambda_return_direct(traj: Trajectory, p: DiscountParams) -> float:
    """Truncated lambda-return by explicit summation over every n-step return.

    The final n-step return takes the remaining weight ``lam**(N-1)``; when
    the trajectory has no terminal, that term bootstraps from the last value.
    """
    N = len(traj)
    head = 0.0
    for n in range(1, N):
        head += p.lam ** (n - 1) * n_step_return(traj, n, p.gamma)
    return (1.0 - p.lam) * head + p.lam ** (N - 1) * n_step_return(traj, N, p.gamma)


def lambda_return_block(
    block: Trajectory, p: DiscountParams, seed: float | None = None
) -> list[float]:
    """Lambda-returns for every position of ``block``, evaluated back to front.

    ``seed`` stands for the return one step past the block and defaults to
    the last bootstrap value. A terminal successor cuts both the bootstrap
    value and the carried return, so ``Lambda_t = r_t`` there.
    """
    N = len(block)
    carry = block.bootstrap_values[-1] if seed is None else float(seed)
    gamma, lam = p.gamma, p.lam
    out = [0.0] * N
    for t in range(N - 1, -1, -1):
        if block.terminal_mask[t]:
            carry = block.rewards[t]
        else:
            v = block.bootstrap_values[t]
            carry = block.rewards[t] + gamma * (lam * carry + (1.0 - lam) * v)
        out[t] = carry
    return out

import pytest
from hypothesis import given, strategies as st

from vrcache.errors import ConfigurationError
from vrcache.memmodel import (
    ATARI_LAYOUT,
    PHYSICAL,
    VIRTUAL,
    MemoryLayout,
    cache_bytes,
    per_experience_bytes,
    reduction_ratio,
    round_megabytes,
)


def test_atari_layout():
    assert ATARI_LAYOUT.state_bytes == 84 * 84 * 4 == 28224


def test_per_experience_atari():
    assert per_experience_bytes(ATARI_LAYOUT, PHYSICAL) == 28229
    assert per_experience_bytes(ATARI_LAYOUT, VIRTUAL) == 8


def test_per_experience_tiny_state():
    tiny = MemoryLayout(1, 1, 4, 4)
    assert per_experience_bytes(tiny, PHYSICAL) == 6
    assert per_experience_bytes(tiny, VIRTUAL) == 8
    assert cache_bytes(1, tiny, PHYSICAL).bytes == 6


def test_cache_totals_atari():
    assert cache_bytes(80_000, ATARI_LAYOUT, PHYSICAL) == (2_258_320_000, 2154.0)
    assert cache_bytes(80_000, ATARI_LAYOUT, VIRTUAL) == (640_000, 0.61)


def test_ratio_atari():
    ratio, reduction = reduction_ratio(ATARI_LAYOUT)
    assert round(ratio, 3) == 0.028
    assert reduction > 99.9


def test_ratio_four_byte_fields():
    ratio, reduction = reduction_ratio(MemoryLayout(4, 4, 4, 4))
    assert ratio == pytest.approx(100 * 8 / 12)
    assert round(ratio, 1) == 66.7
    assert reduction == pytest.approx(100 - 100 * 8 / 12)


def test_rounding_rule():
    assert round_megabytes(2**20 + 2**19) == 2.0  # half-up
    assert round_megabytes(2**20 // 200) == 0.0
    assert round_megabytes(int(0.615 * 2**20) + 1) == 0.62


def test_invalid_layout():
    with pytest.raises(ConfigurationError):
        MemoryLayout(0, 1, 4, 4)
    with pytest.raises(ConfigurationError):
        cache_bytes(0, ATARI_LAYOUT, PHYSICAL)
    with pytest.raises(ConfigurationError):
        per_experience_bytes(ATARI_LAYOUT, "cloud")


@given(S=st.integers(1, 10**6), k=st.integers(1, 50), state=st.integers(1, 10**5))
def test_linear_in_cache_size_and_state_bytes(S, k, state):
    layout = MemoryLayout(state, 1, 4, 4)
    for backend in (PHYSICAL, VIRTUAL):
        assert cache_bytes(k * S, layout, backend).bytes == k * cache_bytes(S, layout, backend).bytes
    wider = MemoryLayout(state * k, 1, 4, 4)
    assert cache_bytes(S, wider, PHYSICAL).bytes - cache_bytes(S, layout, PHYSICAL).bytes == S * state * (k - 1)
    assert cache_bytes(S, wider, VIRTUAL) == cache_bytes(S, layout, VIRTUAL)

"""The reference models agree with each other, and the frozen constants match them."""

import pytest

import oracles
from frozen import AIRTIME_RATIO_P05_K32, BACKOFF_SLOTS_P05, K32_MEAN_PACKETS, RCNC_MEAN_BROADCASTS


def test_full_rank_exact_vs_monte_carlo():
    assert oracles.expected_packets_to_full_rank(32) == pytest.approx(K32_MEAN_PACKETS, rel=1e-12)
    assert oracles.packets_to_full_rank_mc(32, 10_000, seed=1) == pytest.approx(K32_MEAN_PACKETS, rel=0.01)


def test_full_rank_limit_overhead():
    # sum_{i>=1} 2^-i / (1 - 2^-i)
    limit = sum(2.0**-i / (1 - 2.0**-i) for i in range(1, 80))
    assert limit == pytest.approx(1.6067, abs=1e-4)
    assert oracles.expected_packets_to_full_rank(64) - 64 == pytest.approx(limit, abs=1e-9)


def test_full_rank_pmf_is_a_distribution():
    pmf = oracles.full_rank_pmf(8, 200)
    assert pmf[:8].sum() == 0
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
    mean = sum(m * q for m, q in enumerate(pmf))
    assert mean == pytest.approx(oracles.expected_packets_to_full_rank(8), rel=1e-9)


def test_backoff_exact_vs_monte_carlo():
    assert oracles.backoff_slots_exact(0.5, 16, 1024) == pytest.approx(BACKOFF_SLOTS_P05)
    mc = sum(oracles.backoff_slots_mc(0.5, 16, 1024, 100_000, seed=s) for s in range(4)) / 4
    assert mc == pytest.approx(BACKOFF_SLOTS_P05, rel=0.03)


def test_backoff_without_cap_growth():
    # cw_max == cw_min: plain geometric number of failures times mean slot
    assert oracles.backoff_slots_exact(0.5, 16, 16) == pytest.approx(1.0 * 7.5)


@pytest.mark.parametrize("n", sorted(RCNC_MEAN_BROADCASTS))
def test_rcnc_broadcast_oracle_frozen(n):
    assert oracles.rcnc_mean_broadcasts(n, 32, 0.5) == pytest.approx(RCNC_MEAN_BROADCASTS[n], rel=1e-9)


def test_rcnc_single_client_mean_is_thinned_rank_overhead():
    assert oracles.rcnc_mean_broadcasts(1, 32, 0.5) == pytest.approx(K32_MEAN_PACKETS / 0.5, rel=1e-6)


@pytest.mark.parametrize("n", sorted(AIRTIME_RATIO_P05_K32))
def test_airtime_ratio_oracle_frozen(n):
    assert oracles.airtime_ratio(n, 32, 0.5) == pytest.approx(AIRTIME_RATIO_P05_K32[n], rel=1e-9)

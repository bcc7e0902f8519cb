import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcnc.channel import ClientProfile
from rcnc.errors import ConfigError, InvalidInputError
from rcnc.policy import (
    ALL_CAPABLE,
    BELOW_THRESHOLD,
    COLLOCATED,
    NO_CAPABILITY,
    PARTIAL_CAPABILITY,
    Mode,
    NegotiationOutcome,
    PolicyConfig,
    apply_negotiation,
    decide_mode,
    negotiate,
    negotiate_all,
)


def roster(n, capable=None, group=None):
    capable = n if capable is None else capable
    return [ClientProfile(i, 0.5, i < capable, group) for i in range(n)]


def test_eight_clients_below_threshold():
    d = decide_mode(roster(8), PolicyConfig())
    assert (d.mode, d.reason) == (Mode.UNICAST, BELOW_THRESHOLD)
    assert d.unicast_set == frozenset(range(8)) and not d.rcnc_set


def test_thirty_five_capable_clients_use_rcnc():
    d = decide_mode(roster(35))
    assert (d.mode, d.reason) == (Mode.RCNC, ALL_CAPABLE)
    assert d.rcnc_set == frozenset(range(35))


def test_weak_clients_get_unicast():
    d = decide_mode(roster(30, capable=28))
    assert (d.mode, d.reason) == (Mode.MIXED, PARTIAL_CAPABILITY)
    assert len(d.rcnc_set) == 28 and d.unicast_set == {28, 29}


def test_collocated_roster_falls_back():
    d = decide_mode(roster(40, group="room"))
    assert (d.mode, d.reason) == (Mode.UNICAST, COLLOCATED)


def test_no_capable_client():
    d = decide_mode(roster(20, capable=0))
    assert (d.mode, d.reason) == (Mode.UNICAST, NO_CAPABILITY)


def test_threshold_boundary():
    assert decide_mode(roster(9)).mode is Mode.UNICAST
    assert decide_mode(roster(10)).mode is Mode.RCNC


def test_collocation_limit_is_strict():
    clients = [ClientProfile(i, 0.5, True, "g" if i < 10 else None) for i in range(20)]
    assert decide_mode(clients).mode is Mode.RCNC  # exactly half
    clients[10] = ClientProfile(10, 0.5, True, "g")
    assert decide_mode(clients).reason == COLLOCATED


def test_decide_mode_rejects_empty():
    with pytest.raises(InvalidInputError):
        decide_mode([])


def test_policy_config_bounds():
    with pytest.raises(ConfigError):
        PolicyConfig(unicast_threshold=0)
    with pytest.raises(ConfigError):
        PolicyConfig(collocation_fraction_limit=0.0)


def _expected(clients, policy):
    """Rule table restated independently of decide_mode."""
    n = len(clients)
    if n < policy.unicast_threshold:
        return Mode.UNICAST, BELOW_THRESHOLD
    sizes = {}
    for c in clients:
        if c.collocation_group is not None:
            sizes[c.collocation_group] = sizes.get(c.collocation_group, 0) + 1
    if any(s / n > policy.collocation_fraction_limit for s in sizes.values()):
        return Mode.UNICAST, COLLOCATED
    caps = [c.supports_decoding for c in clients]
    if all(caps):
        return Mode.RCNC, ALL_CAPABLE
    if not any(caps):
        return Mode.UNICAST, NO_CAPABILITY
    return Mode.MIXED, PARTIAL_CAPABILITY


def random_roster(rng):
    n = int(rng.integers(1, 60))
    groups = [None, None, None, "a", "b"]
    return [
        ClientProfile(i, float(rng.uniform(0.05, 1.0)), bool(rng.random() < rng.random() * 1.2), groups[rng.integers(len(groups))])
        for i in range(n)
    ]


def check_partition(decision, clients):
    ids = {c.client_id for c in clients}
    assert decision.rcnc_set | decision.unicast_set == ids
    assert not decision.rcnc_set & decision.unicast_set
    if decision.mode is Mode.RCNC:
        assert not decision.unicast_set
    elif decision.mode is Mode.UNICAST:
        assert not decision.rcnc_set
    else:
        assert decision.rcnc_set and decision.unicast_set
    capable = {c.client_id for c in clients if c.supports_decoding}
    assert decision.rcnc_set <= capable


def test_random_rosters_partition_and_precedence():
    rng = np.random.default_rng(6)
    for _ in range(500):
        clients = random_roster(rng)
        policy = PolicyConfig(int(rng.integers(1, 20)), 30, float(rng.uniform(0.1, 1.0)))
        d = decide_mode(clients, policy)
        check_partition(d, clients)
        assert (d.mode, d.reason) == _expected(clients, policy)
        assert decide_mode(clients, policy) == d


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 80), extra=st.integers(1, 40), threshold=st.integers(1, 30), frac=st.floats(0.0, 1.0))
def test_adding_clients_never_drops_below_threshold(n, extra, threshold, frac):
    policy = PolicyConfig(unicast_threshold=threshold)
    capable = round(frac * n)
    before = decide_mode(roster(n, capable), policy)
    after = decide_mode(roster(n + extra, capable), policy)
    if before.mode in (Mode.RCNC, Mode.MIXED):
        assert after.reason != BELOW_THRESHOLD


def test_negotiate_incapable_client_rejected():
    out = negotiate(ClientProfile(1, 0.5, supports_decoding=False), True)
    assert out == NegotiationOutcome(1, False, False)


def test_negotiate_always_accepts_capable():
    assert negotiate(ClientProfile(2, 0.5), True).accepted
    assert not negotiate(ClientProfile(2, 0.5), False).accepted


def test_negotiate_probability():
    rng = np.random.default_rng(31)
    client = ClientProfile(0, 0.5)
    rate = np.mean([negotiate(client, 0.7, rng).accepted for _ in range(10_000)])
    assert rate == pytest.approx(0.7, abs=0.015)


def test_negotiate_rejects_bad_probability():
    with pytest.raises(InvalidInputError):
        negotiate(ClientProfile(0, 0.5), 1.5)


def test_negotiation_outcome_invariant_and_effective_profile():
    rng = np.random.default_rng(1)
    clients = [ClientProfile(i, 0.5, i % 3 != 0) for i in range(60)]
    profiles, outcomes = negotiate_all(clients, 0.5, rng)
    for client, profile, out in zip(clients, profiles, outcomes):
        assert not out.accepted or out.declared_resources_ok
        assert profile.supports_decoding == out.accepted
        assert profile.client_id == client.client_id == out.client_id
    d = decide_mode(profiles)
    accepted = {o.client_id for o in outcomes if o.accepted}
    assert d.rcnc_set <= accepted


def test_apply_negotiation_checks_identity():
    with pytest.raises(InvalidInputError):
        apply_negotiation(ClientProfile(0, 0.5), NegotiationOutcome(1, True, True))

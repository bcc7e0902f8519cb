"""Expected values computed once with ``tests/oracles.py`` and frozen here."""

K32_MEAN_PACKETS = 33.60669514435779
BACKOFF_SLOTS_P05 = 31.5
RCNC_MEAN_BROADCASTS = {1: 67.2133902887156, 30: 87.36199076656858}
AIRTIME_RATIO_P05_K32 = {
    2: 2.094380905006344,
    5: 4.84041934272505,
    10: 9.194671227265866,
    20: 17.521651775441963,
    40: 33.36794827318385,
}

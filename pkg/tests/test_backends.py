"""The jitted kernels and the plain-numpy fallback must agree bit for bit."""

import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from rcnc import _kernels
PROBE = textwrap.dedent(
    """
    import hashlib, sys
    import numpy as np
    from rcnc import _kernels
    from rcnc.codec import DecoderState, ReceiveResult, make_generation, next_coded_packet
    from rcnc.harness import ExperimentConfig, csv_text, run_sweep

    cfg = ExperimentConfig(modes=("unicast", "plain", "mixed", "auto"), n_list=(3, 11), p_list=(0.4, 0.9),
                           runs=2, k=12, segment_size=10, capability_fraction=0.7)
    h = hashlib.sha256(csv_text(run_sweep(cfg)).encode())
    h.update(csv_text(run_sweep(ExperimentConfig(n_list=(4,), runs=3, k=16, segment_size=6))).encode())
    rng = np.random.default_rng(3)
    for k in (1, 5, 33):
        gen = make_generation(rng.bytes(k * 7 + 3), k)
        st = DecoderState.for_generation(gen)
        while st.receive(next_coded_packet(gen, rng)) is not ReceiveResult.COMPLETE:
            pass
        h.update(st.rows[0].tobytes() + st.rows[1].tobytes() + st.recover(gen.original_length))
    print(_kernels.BACKEND, h.hexdigest())
    """
)


def _probe(disable: bool):
    env = dict(os.environ)
    env.pop("RCNC_DISABLE_NUMBA", None)
    if disable:
        env["RCNC_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", PROBE], capture_output=True, text=True, env=env, check=True)
    return out.stdout.split()


def test_fallback_flag_selects_numpy():
    backend, _ = _probe(disable=True)
    assert backend == "numpy"


@pytest.mark.skipif(_kernels.BACKEND != "numba" and "RCNC_DISABLE_NUMBA" not in os.environ, reason="numba not installed")
def test_backends_bit_identical():
    fast, fast_digest = _probe(disable=False)
    slow, slow_digest = _probe(disable=True)
    assert (fast, slow) == ("numba", "numpy")
    assert fast_digest == slow_digest


def test_arq_chain_resumes_across_buffers():
    rng = np.random.default_rng(0)
    u = rng.random(10_001)
    whole = np.zeros(_kernels.ARQ_STATE_SIZE, dtype=np.int64)
    whole[_kernels.ARQ_CW] = 16
    _kernels.arq_chain(u, 0.3, 16, 1024, 10**9, whole)
    assert whole[_kernels.ARQ_POS] == 10_000  # odd leftover uniform is not consumed

    pieces = np.zeros(_kernels.ARQ_STATE_SIZE, dtype=np.int64)
    pieces[_kernels.ARQ_CW] = 16
    for lo in range(0, 10_000, 1000):
        pieces[_kernels.ARQ_POS] = 0
        _kernels.arq_chain(u[lo:lo + 1000], 0.3, 16, 1024, 10**9, pieces)
    keep = [_kernels.ARQ_DONE, _kernels.ARQ_CW, _kernels.ARQ_DATA_TX, _kernels.ARQ_RETX, _kernels.ARQ_SLOTS, _kernels.ARQ_ACKS]
    assert np.array_equal(whole[keep], pieces[keep])


def test_arq_chain_reference_trace():
    # p = 0.5: uniforms < 0.5 deliver; slot = floor(u * cw)
    u = np.array([0.9, 0.99, 0.7, 0.5, 0.1, 0.0, 0.6, 0.26])
    state = np.zeros(_kernels.ARQ_STATE_SIZE, dtype=np.int64)
    state[_kernels.ARQ_CW] = 4
    _kernels.arq_chain(u, 0.5, 4, 8, 2, state)
    # fail (slot floor(.99*4)=3, cw 8), fail (slot floor(.5*8)=4, cw 8), ok (cw 4), fail (slot floor(.26*4)=1)
    assert state.tolist()[: _kernels.ARQ_POS + 1] == [1, 8, 4, 3, 8, 1, 8]

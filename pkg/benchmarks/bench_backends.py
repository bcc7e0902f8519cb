"""Compare the numba kernels with the plain-numpy fallback.

Each backend runs in its own interpreter (the choice is made at import time
from RCNC_DISABLE_NUMBA).  Usage:

    python benchmarks/bench_backends.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKLOAD = textwrap.dedent(
    """
    import json, time
    import numpy as np
    from rcnc import _kernels
    from rcnc.channel import ClientProfile
    from rcnc.codec import DecoderState, ReceiveResult, make_generation, next_coded_packet
    from rcnc.protocols import run_rcnc, run_unicast_conversion

    def timed(fn, repeat):
        fn()  # warm-up / JIT compile
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        return best

    def codec_roundtrip():
        rng = np.random.default_rng(0)
        for k in (16, 64, 128):
            gen = make_generation(rng.bytes(k * 1500), k)
            st = DecoderState.for_generation(gen)
            while st.receive(next_coded_packet(gen, rng)) is not ReceiveResult.COMPLETE:
                pass
            st.recover(gen.original_length)

    gen = make_generation(bytes(32 * 1500), 32)
    roster = [ClientProfile(i, 0.5) for i in range(40)]

    def rcnc_runs():
        for s in range(20):
            run_rcnc(gen, roster, rng=s)

    def unicast_runs():
        for s in range(20):
            run_unicast_conversion(gen, roster, rng=s)

    repeat = {repeat}
    print(json.dumps({{
        "backend": _kernels.BACKEND,
        "codec k=16/64/128 roundtrip": timed(codec_roundtrip, repeat),
        "rcnc N=40 k=32 x20": timed(rcnc_runs, repeat),
        "unicast N=40 k=32 x20": timed(unicast_runs, repeat),
    }}))
    """
)


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("RCNC_DISABLE_NUMBA", None)
    if disable:
        env["RCNC_DISABLE_NUMBA"] = "1"
    proc = subprocess.run(
        [sys.executable, "-c", WORKLOAD.format(repeat=repeat)], capture_output=True, text=True, env=env, check=True
    )
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'workload':32s} {fast['backend']:>10s} {slow['backend']:>10s} {'speedup':>8s}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:32s} {fast[key]:9.3f}s {slow[key]:9.3f}s {slow[key] / fast[key]:7.1f}x")


if __name__ == "__main__":
    main()

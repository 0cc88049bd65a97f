#!/usr/bin/env python3
"""Benchmark the compiled AEC kernel against the pure-Python fallback.

Runs the same workload (speech-like close-talk through a short random echo
path plus noise) through both kernels and reports throughput. Pass --taps /
--seconds to change the workload; D=256 at 16 kHz is the pipeline default.
"""

import argparse
import time

import numpy as np

from srpmask import AecConfig
from srpmask._aec_py import kalman_aec_run as py_kernel
from srpmask.aec import S_FLOOR
from srpmask.sim import synth_speech_like

try:
    from srpmask._aec_core import kalman_aec_run as compiled_kernel
except ImportError:
    compiled_kernel = None


def run_kernel(kernel, ref, close, config):
    x = np.zeros(config.num_taps)
    P = config.initial_state_cov * np.eye(config.num_taps)
    h = np.zeros(config.num_taps)
    noise = np.empty_like(ref)
    echo = np.empty_like(ref)
    start = time.perf_counter()
    kernel(ref, close, x, P, h, config.process_noise ** 2, S_FLOOR,
           noise, echo)
    elapsed = time.perf_counter() - start
    return elapsed, noise


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--taps", type=int, default=256)
    parser.add_argument("--seconds", type=float, default=3.0)
    parser.add_argument("--sample-rate", type=float, default=16000.0)
    args = parser.parse_args()

    config = AecConfig(num_taps=args.taps)
    rng = np.random.default_rng(0)
    close = synth_speech_like(args.seconds, 0, args.sample_rate).samples
    path = rng.standard_normal(8)
    path /= np.linalg.norm(path)
    ref = np.convolve(close, path)[:close.shape[0]]
    ref += 0.01 * rng.standard_normal(ref.shape[0])
    n = ref.shape[0]

    print(f"workload: {n} samples, D={args.taps}")
    results = {}
    for name, kernel in (("python", py_kernel), ("compiled", compiled_kernel)):
        if kernel is None:
            print(f"{name:>9}: not available (extension not built)")
            continue
        elapsed, noise = run_kernel(kernel, ref, close, config)
        results[name] = (elapsed, noise)
        rate = n / elapsed
        print(f"{name:>9}: {elapsed:8.3f} s  ({rate / 1e3:8.1f} ksamples/s, "
              f"{rate / args.sample_rate:6.2f}x realtime)")
    if len(results) == 2:
        speedup = results["python"][0] / results["compiled"][0]
        drift = np.max(np.abs(results["python"][1] - results["compiled"][1]))
        print(f"  speedup: {speedup:.1f}x   max |noise diff|: {drift:.2e}")


if __name__ == "__main__":
    main()

"""Pure-NumPy Kalman AEC inner loop (fallback for the compiled core).

Keeps the exact operation order of the compiled kernel so both backends
agree to rounding noise: predict adds the process noise to the covariance
diagonal, the gain divides by a floored innovation variance via one
reciprocal, and the covariance update subtracts the exactly-symmetric
rank-1 term (P@h)(P@h)^T / S, which keeps P symmetric by construction
(averaging with its transpose would be a no-op).
"""

from __future__ import annotations

import numpy as np


def kalman_aec_run(ref, close, state_mean, state_cov, history,
                   process_var, s_floor, noise_out, echo_out):
    """Fold the per-sample Kalman update over ref/close; mutates the state
    arrays and fills noise_out/echo_out in place."""
    x = state_mean
    P = state_cov
    h = history
    diag = np.einsum("ii->i", P)
    for n in range(ref.shape[0]):
        # Observation row: current close sample plus the D-1 previous ones.
        h[1:] = h[:-1]
        h[0] = close[n]
        z = ref[n]
        # Predict (identity transition): P <- P + process_var * I.
        diag += process_var
        # Pre-fit residual and innovation variance, R = y^2, floored.
        y = z - h @ x
        Ph = P @ h
        S = h @ Ph + y * y
        if S < s_floor:
            S = s_floor
        inv_S = 1.0 / S
        # Gain, state update, symmetric covariance downdate.
        K = Ph * inv_S
        x += K * y
        upd = np.outer(Ph, Ph)
        upd *= inv_S
        P -= upd
        # Post-fit residual is the background-noise estimate.
        noise = z - h @ x
        noise_out[n] = noise
        echo_out[n] = z - noise

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Kalman AEC inner loop.

Same recurrence as the pure-Python kernel in ``_aec_py``, restructured
around symmetric BLAS level-2 calls: the covariance is maintained in one
triangle only (dsymv for P@h, dsyr for the rank-1 downdate), which keeps P
exactly symmetric by construction and halves the memory traffic of the
O(D^2) per-sample update. The full matrix is mirrored once on exit so
callers always see a complete symmetric covariance. Allocation-free per
sample.
"""

import numpy as np

from scipy.linalg.cython_blas cimport daxpy, ddot, dsymv, dsyr


def kalman_aec_run(double[::1] ref, double[::1] close, double[::1] state_mean,
                   double[:, ::1] state_cov, double[::1] history,
                   double process_var, double s_floor,
                   double[::1] noise_out, double[::1] echo_out):
    """Fold the per-sample Kalman update over ref/close; mutates the state
    arrays and fills noise_out/echo_out in place."""
    cdef Py_ssize_t n_samples = ref.shape[0]
    cdef Py_ssize_t n, i, j
    cdef int taps = <int>state_mean.shape[0]
    cdef int one = 1
    cdef double zero = 0.0, unit = 1.0
    # Row-major P handed to Fortran BLAS as its transpose; P is symmetric,
    # so uplo='L' consistently addresses the C-order upper triangle.
    cdef char uplo = b'L'
    cdef double z, y, S, inv_S, step, neg_inv_S, noise
    cdef double[::1] Ph = np.empty(taps)
    cdef double[::1] x = state_mean
    cdef double[:, ::1] P = state_cov
    cdef double[::1] h = history

    for n in range(n_samples):
        # Observation row: current close sample plus the D-1 previous ones.
        for i in range(taps - 1, 0, -1):
            h[i] = h[i - 1]
        h[0] = close[n]
        z = ref[n]
        # Predict (identity transition): P <- P + process_var * I.
        for i in range(taps):
            P[i, i] += process_var
        # Pre-fit residual and innovation variance, R = y^2, floored.
        y = z - ddot(&taps, &h[0], &one, &x[0], &one)
        dsymv(&uplo, &taps, &unit, &P[0, 0], &taps, &h[0], &one,
              &zero, &Ph[0], &one)
        S = ddot(&taps, &h[0], &one, &Ph[0], &one) + y * y
        if S < s_floor:
            S = s_floor
        inv_S = 1.0 / S
        # Gain folded into the updates: x += (P h / S) y ; P -= (P h)(P h)^T / S.
        step = inv_S * y
        daxpy(&taps, &step, &Ph[0], &one, &x[0], &one)
        neg_inv_S = -inv_S
        dsyr(&uplo, &taps, &neg_inv_S, &Ph[0], &one, &P[0, 0], &taps)
        # Post-fit residual is the background-noise estimate.
        noise = z - ddot(&taps, &h[0], &one, &x[0], &one)
        noise_out[n] = noise
        echo_out[n] = z - noise

    # Mirror the maintained triangle so callers see the full matrix.
    for i in range(taps):
        for j in range(i + 1, taps):
            P[j, i] = P[i, j]

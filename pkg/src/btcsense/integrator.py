"""Adaptive embedded Runge-Kutta stepping with exact landing on output times.

Dormand-Prince 5(4): the fifth-order solution is propagated and the
difference to the embedded fourth-order solution drives step-size control.
The state is an arbitrary (possibly complex) ndarray.  Two behaviors are
pinned here because the matrix-valued problems need them:

* the error norm is the max over leading-axis blocks of the Frobenius norm
  of the local error, scaled by atol + rtol * Frobenius norm of the block
  (``block_axis=True``); a flat norm over the whole state otherwise;
* an optional ``post_accept`` hook mutates the state after every accepted
  step (used to re-Hermitize density matrices).

Stage combinations run as matrix-vector products over a preallocated
stage buffer, and the right-hand side writes into caller-provided storage;
the matrix-valued problems are memory-bound, so the hot loop avoids
temporaries.  Steps are clipped so that every requested output time is hit
exactly; the sampling callback receives the integrator's state array by
reference and must copy anything it keeps.
"""

import numpy as np

# Dormand-Prince 5(4) tableau (exact rationals).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = (1 / 5,)
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_ERR_W = _B5 - _B4

_N_STAGES = 7
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_UNDERFLOW_FRACTION = 1e-14


class IntegrationFailure(RuntimeError):
    """Step-size underflow; carries the last time that was reached cleanly."""

    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time t={last_good_time:.12g})")
        self.last_good_time = last_good_time


def _block_norms(flat: np.ndarray, n_blocks: int) -> np.ndarray:
    blocks = flat.reshape(n_blocks, -1)
    return np.sqrt(np.einsum("ij,ij->i", blocks.real, blocks.real)
                   + np.einsum("ij,ij->i", blocks.imag, blocks.imag))


def integrate_adaptive(
    rhs,
    t_span: tuple[float, float],
    y0: np.ndarray,
    *,
    rtol: float,
    atol: float,
    t_eval: np.ndarray,
    on_sample,
    post_accept=None,
    block_axis: bool = False,
):
    """Integrate ``dy/dt = rhs(t, y, out)`` over ``t_span``, sampling at ``t_eval``.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y, out)`` writing the derivative into ``out`` (same shape
        as ``y``).
    t_span : (t0, t1)
        Integration window, t1 > t0.
    y0 : np.ndarray
        Initial state; not mutated.
    rtol, atol : float
        Tolerances entering the scaled local-error norm.
    t_eval : array
        Strictly increasing sample times with t_eval[0] >= t0 and
        t_eval[-1] == t1; each is hit exactly by clipping the step.
    on_sample : callable
        ``on_sample(t, y)`` invoked at every t_eval point (including t0 if
        present).  ``y`` is a live reference.
    post_accept : callable, optional
        ``post_accept(y)`` mutating the state in place after each accepted
        step.
    block_axis : bool
        Treat the leading axis of ``y`` as independent error-norm blocks.

    Returns
    -------
    dict with ``n_steps``, ``n_rejected``, ``n_fevals``.

    Raises
    ------
    IntegrationFailure
        If the controller drives the step below 1e-14 * (t1 - t0).
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got {t_span!r}")
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.size == 0 or np.any(np.diff(t_eval) <= 0):
        raise ValueError("t_eval must be non-empty and strictly increasing")
    if t_eval[0] < t0 or t_eval[-1] != t1:
        raise ValueError("t_eval must lie in [t0, t1] and end at t1")

    shape = y0.shape
    dtype = np.result_type(y0.dtype, np.float64)
    n_blocks = shape[0] if block_axis else 1
    size = y0.size

    y = np.array(y0, dtype=dtype).reshape(size)
    y_nat = y.reshape(shape)
    k = np.empty((_N_STAGES, size), dtype=dtype)
    k_nat = [k[i].reshape(shape) for i in range(_N_STAGES)]
    stage = np.empty(size, dtype=dtype)
    stage_nat = stage.reshape(shape)
    y_new = np.empty(size, dtype=dtype)
    err = np.empty(size, dtype=dtype)
    a_rows = _A.astype(dtype)
    b5 = _B5.astype(dtype)
    err_w = _ERR_W.astype(dtype)

    t = t0
    i_out = 0
    if t_eval[0] == t0:
        on_sample(t0, y_nat)
        i_out += 1

    rhs(t, y_nat, k_nat[0])
    n_fevals = 1

    # initial step from the magnitude of y and f
    y_norm = float(np.linalg.norm(y))
    f_norm = float(np.linalg.norm(k[0]))
    scale0 = atol + rtol * y_norm
    d0, d1 = y_norm / scale0, f_norm / scale0
    h = 1e-6 * (t1 - t0) if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h = min(h, t1 - t0)

    h_floor = _UNDERFLOW_FRACTION * (t1 - t0)
    n_steps = 0
    n_rejected = 0

    while i_out < t_eval.size:
        t_stop = t_eval[i_out]
        h_try = min(h, t1 - t)
        hit = False
        if t + h_try >= t_stop:
            h_try = t_stop - t
            hit = True

        # stages 1..6 (stage 0 is f(t, y), still valid on retries)
        for i in range(1, _N_STAGES):
            np.matmul(a_rows[i, :i], k[:i], out=stage)
            stage *= h_try
            stage += y
            rhs(t + _C[i] * h_try, stage_nat, k_nat[i])
        n_fevals += _N_STAGES - 1

        np.matmul(b5, k, out=y_new)
        y_new *= h_try
        y_new += y
        np.matmul(err_w, k, out=err)

        e_norm = _block_norms(err, n_blocks) * h_try
        scale = atol + rtol * np.maximum(
            _block_norms(y, n_blocks), _block_norms(y_new, n_blocks)
        )
        err_ratio = float(np.max(e_norm / scale))
        if not np.isfinite(err_ratio):
            err_ratio = np.inf

        if err_ratio <= 1.0:
            t = t_stop if hit else t + h_try
            y, y_new = y_new, y
            y_nat = y.reshape(shape)
            if post_accept is not None:
                post_accept(y_nat)
            n_steps += 1
            if hit:
                on_sample(t, y_nat)
                i_out += 1
            rhs(t, y_nat, k_nat[0])
            n_fevals += 1
            factor = _MAX_FACTOR if err_ratio == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err_ratio**-0.2)
            )
            # A clipped step says nothing about the natural step size; keep
            # the previous proposal alive so output sampling cannot stall it.
            h = max(h, h_try * factor) if hit else h_try * factor
        else:
            n_rejected += 1
            factor = _MIN_FACTOR if err_ratio == np.inf else min(
                1.0, max(_MIN_FACTOR, _SAFETY * err_ratio**-0.2)
            )
            h = h_try * factor
            if h < h_floor:
                raise IntegrationFailure("step size underflow", last_good_time=t)

    return {"n_steps": n_steps, "n_rejected": n_rejected, "n_fevals": n_fevals}

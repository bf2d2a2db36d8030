"""Dormand-Prince 5(4) integrator for batches of independent ODE systems.

State arrays have shape (n_state, n_batch).  All columns share one step
sequence; the step is accepted when every entry passes the mixed
relative/absolute test, so each column individually meets the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["Dopri5Result", "dopri5", "step_dopri5", "locate_event"]

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B, _B4))


class StepSizeUnderflow(RuntimeError):
    pass


def step_dopri5(f, t, y, k1, h):
    """One step; returns (y_new, k7, err_vec).  k7 = f(t+h, y_new) (FSAL)."""
    ks = [k1]
    for i in range(1, 7):
        acc = y.copy()
        for j, aij in enumerate(_A[i]):
            if aij != 0.0:
                acc += (h * aij) * ks[j]
        ks.append(f(t + _C[i] * h, acc))
        if i == 6:
            y_new = acc
    err = np.zeros_like(y)
    for ej, kj in zip(_E, ks):
        if ej != 0.0:
            err += (h * ej) * kj
    return y_new, ks[6], err


@dataclass
class Dopri5Result:
    t: float
    y: np.ndarray
    n_steps: int = 0
    n_rejected: int = 0
    n_eval: int = 0
    ts: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    fs: list = field(default_factory=list)
    event_t: float | None = None


def _err_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.max(np.abs(err) / scale)) if err.size else 0.0


def dopri5(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t1: float,
    rtol: float = 1e-10,
    atol: float = 1e-14,
    h0: float | None = None,
    max_steps: int = 200000,
    record: bool = False,
    event: Callable[[float, np.ndarray], float] | None = None,
    event_tol: float = 1e-12,
) -> Dopri5Result:
    """Integrate from t0 to t1 (either direction).

    ``event(t, y)`` stops the integration at its first sign change; the
    crossing is refined by bisection/secant on genuine partial steps, so the
    returned state satisfies |event| <= event_tol.
    """
    y = np.array(y0, dtype=float)
    span = t1 - t0
    res = Dopri5Result(t=t0, y=y)
    if span == 0.0:
        return res
    direction = 1.0 if span > 0 else -1.0
    t = t0
    k1 = f(t, y)
    n_eval = 1
    h = abs(h0) if h0 else 1e-2 * abs(span)
    h = min(h, abs(span))
    g_prev = event(t, y) if event is not None else None
    if record:
        res.ts.append(t)
        res.ys.append(y.copy())
        res.fs.append(k1.copy())
    steps = rejected = 0
    while direction * (t1 - t) > 0.0:
        if steps >= max_steps:
            raise StepSizeUnderflow(f"maximum number of steps ({max_steps}) exceeded at t={t}")
        last = abs(t1 - t) <= h * (1.0 + 1e-12)
        hs = (t1 - t) if last else direction * h
        y_new, k7, err = step_dopri5(f, t, y, k1, hs)
        n_eval += 6
        en = _err_norm(err, y, y_new, rtol, atol)
        if not np.isfinite(en):
            en = 1e10
        if en <= 1.0:
            t_new = t1 if last else t + hs
            if event is not None:
                g_new = event(t_new, y_new)
                if g_prev is not None and g_prev * g_new <= 0.0 and g_new != g_prev:
                    te, ye, ke, ne = locate_event(f, event, t, y, k1, hs, g_prev, g_new, event_tol)
                    n_eval += ne
                    steps += 1
                    res.t, res.y, res.event_t = te, ye, te
                    if record:
                        res.ts.append(te)
                        res.ys.append(ye.copy())
                        res.fs.append(ke.copy())
                    res.n_steps, res.n_rejected, res.n_eval = steps, rejected, n_eval
                    return res
                g_prev = g_new
            t, y, k1 = t_new, y_new, k7
            steps += 1
            if record:
                res.ts.append(t)
                res.ys.append(y.copy())
                res.fs.append(k1.copy())
            fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en**-0.2))
            h = abs(hs) * fac
        else:
            rejected += 1
            h = abs(hs) * max(0.2, 0.9 * en**-0.2)
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflow(f"step size underflow at t={t}")
    res.t, res.y = t, y
    res.n_steps, res.n_rejected, res.n_eval = steps, rejected, n_eval
    return res


def locate_event(f, event, t, y, k1, hs, g0, g1, tol, max_iter=200):
    """Find the event root inside the accepted step [t, t+hs] (Illinois false position)."""
    lo, hi = 0.0, hs
    glo, ghi = g0, g1
    n_eval = 0
    best = None
    side = 0
    for _ in range(max_iter):
        if ghi == glo:
            mid = 0.5 * (lo + hi)
        else:
            mid = hi - ghi * (hi - lo) / (ghi - glo)
            if not (min(lo, hi) < mid < max(lo, hi)):
                mid = 0.5 * (lo + hi)
        y_mid, k_mid, _ = step_dopri5(f, t, y, k1, mid)
        n_eval += 6
        g_mid = event(t + mid, y_mid)
        best = (t + mid, y_mid, k_mid)
        if abs(g_mid) <= tol or abs(hi - lo) <= 1e-15 * max(1.0, abs(t)):
            break
        if g_mid * glo > 0.0:
            lo, glo = mid, g_mid
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi, ghi = mid, g_mid
            if side == 1:
                glo *= 0.5
            side = 1
    return best[0], best[1], best[2], n_eval

"""Sound interval bounds for the network over an input box.

Every endpoint operation is rounded outward: the float result is computed,
its exact rounding error is recovered with an error-free transformation
(TwoSum / Dekker TwoProduct) and the endpoint is stepped one ulp outward only
when the result was inexact in the unsafe direction.  The resulting
enclosure holds for real arithmetic and for the float evaluation order of
:func:`fannet.network.affine`, because a correctly rounded float result always
lies between the downward- and upward-rounded values of the same operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Activation, Network

_SPLITTER = 134217729.0  # 2**27 + 1
# Dekker splitting is exact only away from overflow/underflow; outside this
# window fall back to an unconditional one-ulp widening.
_SAFE_MAX = 2.0**996
_SAFE_MIN = 2.0**-969


@dataclass(frozen=True)
class BoundsVector:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        if lo.shape != hi.shape:
            raise ValueError("bound arrays differ in shape")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, v) -> bool:
        v = np.asarray(v)
        return bool(np.all(self.lo <= v) and np.all(v <= self.hi))


def _two_sum_err(a, b, s):
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod_err(a, b, p):
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _round_out(val, err, unsafe, direction):
    """Step ``val`` one ulp toward ``direction`` where the exact result lies
    beyond it (sign of ``err``) or where ``err`` cannot be trusted."""
    if direction < 0:
        step = (err < 0) | unsafe
        return np.where(step, np.nextafter(val, -np.inf), val)
    step = (err > 0) | unsafe
    return np.where(step, np.nextafter(val, np.inf), val)


def _add(a, b, direction):
    with np.errstate(all="ignore"):
        s = a + b
        err = _two_sum_err(a, b, s)
    unsafe = ~np.isfinite(err) | (np.abs(s) > _SAFE_MAX)
    return _round_out(s, err, unsafe, direction)


def _mul(a, b, direction):
    with np.errstate(all="ignore"):
        p = a * b
        err = _two_prod_err(a, b, p)
        mag = np.abs(p)
        unsafe = (
            ~np.isfinite(err)
            | (mag > _SAFE_MAX)
            | ((mag < _SAFE_MIN) & (a != 0) & (b != 0))
            | (np.abs(a) > _SAFE_MAX)
            | (np.abs(b) > _SAFE_MAX)
        )
    return _round_out(p, err, unsafe, direction)


def propagate_batch(net: Network, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Output bounds for a (B, N) batch of input boxes."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    for layer in net.layers:
        acc_lo = np.zeros((lo.shape[0], layer.rows))
        acc_hi = np.zeros_like(acc_lo)
        for j in range(layer.cols):
            w = layer.weights[:, j]
            pos = w >= 0.0
            # w >= 0: [w*lo, w*hi]; w < 0: [w*hi, w*lo]
            x_for_lo = np.where(pos, lo[:, j : j + 1], hi[:, j : j + 1])
            x_for_hi = np.where(pos, hi[:, j : j + 1], lo[:, j : j + 1])
            acc_lo = _add(acc_lo, _mul(w, x_for_lo, -1), -1)
            acc_hi = _add(acc_hi, _mul(w, x_for_hi, 1), 1)
        lo = _add(acc_lo, layer.biases, -1)
        hi = _add(acc_hi, layer.biases, 1)
        if layer.activation is Activation.RELU:
            lo = np.maximum(lo, 0.0)
            hi = np.maximum(hi, 0.0)
    return lo, hi


def propagate_bounds(net: Network, input_box: BoundsVector) -> BoundsVector:
    lo, hi = propagate_batch(net, input_box.lo.reshape(1, -1), input_box.hi.reshape(1, -1))
    return BoundsVector(lo[0], hi[0])


def certainly_correct(lo: np.ndarray, hi: np.ndarray, label_index: int) -> np.ndarray:
    """Per batch row: the label's lower bound strictly exceeds every other
    label's upper bound."""
    target = lo[:, label_index]
    others = np.delete(hi, label_index, axis=1)
    return np.all(target[:, None] > others, axis=1)

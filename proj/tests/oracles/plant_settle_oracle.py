#!/usr/bin/env python3
"""Independent oracle for the plant settling-time tests.

Computes the sampled band-entry times from the closed-form solution of the
second-order lag, instead of iterating the stepper recurrence, so agreement
with the C++ implementation cross-checks both the discretization and the
scan logic. Prints one line per (from_level, to_level) transition plus the
unit-step estimate, for step h and h/2.
"""
import numpy as np

KP = 1.1196
TP1 = 0.087821
TP2 = 0.02042
GAIN = 5.0
BAND_FRACTION = 0.15


def band_width(target):
    return BAND_FRACTION * max(abs(target), 1.0)


def settle_sampled(from_level, to_level, h):
    """Replicates settle_scan: last sample outside the band, plus one step."""
    horizon = 10.0 * (TP1 + TP2)
    steps = int(np.ceil(horizon / h))
    k = np.arange(steps + 1, dtype=np.float64)
    t = k * h
    a = TP1 / (TP1 - TP2)
    b = -TP2 / (TP1 - TP2)
    g = a * np.exp(-t / TP1) + b * np.exp(-t / TP2)
    y_logical = KP * (to_level + (from_level - to_level) * g)
    err = np.abs(to_level - y_logical)
    outside = err > band_width(to_level)
    if outside[-1]:
        raise RuntimeError("did not converge")
    last = np.max(np.nonzero(outside)[0]) if outside.any() else -1
    return (last + 1) * h


def estimate_sampled(u, h):
    horizon = 10.0 * (TP1 + TP2)
    steps = int(np.ceil(horizon / h))
    k = np.arange(steps + 1, dtype=np.float64)
    t = k * h
    a = TP1 / (TP1 - TP2)
    b = -TP2 / (TP1 - TP2)
    y = KP * u * (1.0 - (a * np.exp(-t / TP1) + b * np.exp(-t / TP2)))
    outside = np.abs(u - y) > BAND_FRACTION * max(abs(u), 1.0)
    last = np.max(np.nonzero(outside)[0]) if outside.any() else -1
    return (last + 1) * h


def main():
    h = 1e-6
    print(f"dc gain (closed form): {KP}")
    worst = 0.0
    for frm in (0, 1, 2):
        for to in (0, 1, 2):
            if frm == to:
                continue
            s1 = settle_sampled(frm, to, h)
            s2 = settle_sampled(frm, to, h / 2)
            worst = max(worst, s1)
            print(f"settle {frm}->{to}: h={s1:.6f}s  h/2={s2:.7f}s  delta={abs(s1-s2)*1e6:.3f}us")
    print(f"worst transition entry: {worst:.6f}s")
    print(f"estimate u=1: {estimate_sampled(1.0, h):.6f}s")
    print(f"estimate u=5 (one level in volts): {estimate_sampled(5.0, h):.6f}s")


if __name__ == "__main__":
    main()

"""Pure-Python reference kernels.

The compiled extension (_ckern) mirrors these statement for statement so
both backends produce bit-identical floating point results; keep any
change here in sync with the .pyx file.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "pure"

_INF = math.inf


def segment_intersects_box(
    p0x, p0y, p0z, p1x, p1y, p1z, xmin, xmax, ymin, ymax, height, tol
):
    """Slab test of segment vs the box shrunk by tol on every face."""
    tmin = 0.0
    tmax = 1.0
    for p0, p1, lo, hi in (
        (p0x, p1x, xmin + tol, xmax - tol),
        (p0y, p1y, ymin + tol, ymax - tol),
        (p0z, p1z, tol, height - tol),
    ):
        if lo > hi:
            return False
        d = p1 - p0
        if d == 0.0:
            if p0 < lo or p0 > hi:
                return False
        else:
            t0 = (lo - p0) / d
            t1 = (hi - p0) / d
            if t0 > t1:
                t0, t1 = t1, t0
            if t0 > tmin:
                tmin = t0
            if t1 < tmax:
                tmax = t1
            if tmin > tmax:
                return False
    return tmin <= tmax


def los_mask(ux, uy, uz, ues, boxes, tol):
    """Per-UE LoS flags for one UAV position.

    ues: (n, 3) float array; boxes: (m, 5) rows [xmin, xmax, ymin, ymax, h].
    """
    ues = np.asarray(ues, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64)
    n = ues.shape[0]
    out = np.ones(n, dtype=np.uint8)
    for i in range(n):
        ex = float(ues[i, 0])
        ey = float(ues[i, 1])
        ez = float(ues[i, 2])
        for j in range(boxes.shape[0]):
            if segment_intersects_box(
                ux, uy, uz, ex, ey, ez,
                float(boxes[j, 0]), float(boxes[j, 1]),
                float(boxes[j, 2]), float(boxes[j, 3]),
                float(boxes[j, 4]), tol,
            ):
                out[i] = 0
                break
    return out


class DesCore:
    """Round-robin single-medium packet simulator over CBR sources.

    Each source u emits fixed-size packets at arrival times
    phase[u] + k * interval[u] for k = 0, 1, ... while the arrival time is
    below arrival_limit. Sources with infinite service time are silent.
    The shared server picks backlogged queues in cyclic order; one packet
    occupies the medium for service[u] seconds. Service never starts if it
    would finish past the advance horizon.
    """

    def __init__(self, interval, phase, service, arrival_limit):
        self.interval = [float(v) for v in interval]
        self.phase = [float(v) for v in phase]
        self.service = [float(v) for v in service]
        self.arrival_limit = float(arrival_limit)
        self.n = len(self.interval)
        self.next_idx = [0] * self.n
        self.delivered = [0] * self.n
        self.delay_sum = 0.0
        self.delay_count = 0
        self.clock = 0.0
        self.rr = 0

    def set_service(self, service):
        self.service = [float(v) for v in service]

    def delivered_counts(self):
        return list(self.delivered)

    def advance(self, t_end, delays_out=None, offset=0):
        """Run the medium until t_end; returns the new offset into delays_out."""
        t_end = float(t_end)
        n = self.n
        interval = self.interval
        phase = self.phase
        next_idx = self.next_idx
        delivered = self.delivered
        limit = self.arrival_limit
        while True:
            service = self.service
            chosen = -1
            arr_c = 0.0
            for i in range(n):
                u = self.rr + i
                if u >= n:
                    u -= n
                if service[u] == _INF:
                    continue
                arr = phase[u] + next_idx[u] * interval[u]
                if arr <= self.clock and arr < limit:
                    chosen = u
                    arr_c = arr
                    break
            if chosen >= 0:
                done_t = self.clock + service[chosen]
                if done_t > t_end:
                    break
                delay = done_t - arr_c
                delivered[chosen] += 1
                self.delay_sum += delay
                self.delay_count += 1
                if delays_out is not None:
                    delays_out[offset] = delay
                    offset += 1
                next_idx[chosen] += 1
                self.clock = done_t
                self.rr = chosen + 1
                if self.rr >= n:
                    self.rr = 0
            else:
                tnext = _INF
                for u in range(n):
                    if service[u] == _INF:
                        continue
                    arr = phase[u] + next_idx[u] * interval[u]
                    if arr < limit and arr < tnext:
                        tnext = arr
                if tnext >= t_end:
                    break
                self.clock = tnext
        if self.clock < t_end:
            self.clock = t_end
        return offset

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; statement-for-statement twin of pure.py."""

import numpy as np

from libc.math cimport INFINITY
from libc.stdlib cimport free, malloc

NAME = "cython"


cpdef bint segment_intersects_box(
    double p0x, double p0y, double p0z,
    double p1x, double p1y, double p1z,
    double xmin, double xmax, double ymin, double ymax,
    double height, double tol,
):
    """Slab test of segment vs the box shrunk by tol on every face."""
    cdef double tmin = 0.0
    cdef double tmax = 1.0
    cdef double p0, p1, lo, hi, d, t0, t1, tmp
    cdef int axis
    for axis in range(3):
        if axis == 0:
            p0 = p0x; p1 = p1x; lo = xmin + tol; hi = xmax - tol
        elif axis == 1:
            p0 = p0y; p1 = p1y; lo = ymin + tol; hi = ymax - tol
        else:
            p0 = p0z; p1 = p1z; lo = tol; hi = height - tol
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
                tmp = t0; t0 = t1; t1 = tmp
            if t0 > tmin:
                tmin = t0
            if t1 < tmax:
                tmax = t1
            if tmin > tmax:
                return False
    return tmin <= tmax


def los_mask(double ux, double uy, double uz, ues, boxes, double tol):
    """Per-UE LoS flags for one UAV position."""
    cdef double[:, ::1] e = np.ascontiguousarray(ues, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(boxes, dtype=np.float64)
    cdef Py_ssize_t n = e.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    out_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(m):
            if segment_intersects_box(
                ux, uy, uz, e[i, 0], e[i, 1], e[i, 2],
                b[j, 0], b[j, 1], b[j, 2], b[j, 3], b[j, 4], tol,
            ):
                out[i] = 0
                break
    return out_arr


cdef class DesCore:
    """Round-robin single-medium packet simulator over CBR sources."""

    cdef double* interval
    cdef double* phase
    cdef double* service
    cdef long long* next_idx
    cdef long long* delivered_arr
    cdef public double arrival_limit
    cdef public Py_ssize_t n
    cdef public double delay_sum
    cdef public long long delay_count
    cdef public double clock
    cdef public Py_ssize_t rr

    def __cinit__(self, interval, phase, service, arrival_limit):
        cdef Py_ssize_t n = len(interval)
        self.n = n
        self.interval = <double*>malloc(n * sizeof(double))
        self.phase = <double*>malloc(n * sizeof(double))
        self.service = <double*>malloc(n * sizeof(double))
        self.next_idx = <long long*>malloc(n * sizeof(long long))
        self.delivered_arr = <long long*>malloc(n * sizeof(long long))
        if (self.interval == NULL or self.phase == NULL or self.service == NULL
                or self.next_idx == NULL or self.delivered_arr == NULL):
            raise MemoryError()
        cdef Py_ssize_t i
        for i in range(n):
            self.interval[i] = float(interval[i])
            self.phase[i] = float(phase[i])
            self.service[i] = float(service[i])
            self.next_idx[i] = 0
            self.delivered_arr[i] = 0
        self.arrival_limit = float(arrival_limit)
        self.delay_sum = 0.0
        self.delay_count = 0
        self.clock = 0.0
        self.rr = 0

    def __dealloc__(self):
        free(self.interval)
        free(self.phase)
        free(self.service)
        free(self.next_idx)
        free(self.delivered_arr)

    def set_service(self, service):
        cdef Py_ssize_t i
        for i in range(self.n):
            self.service[i] = float(service[i])

    def delivered_counts(self):
        cdef Py_ssize_t i
        return [self.delivered_arr[i] for i in range(self.n)]

    def advance(self, double t_end, delays_out=None, Py_ssize_t offset=0):
        """Run the medium until t_end; returns the new offset into delays_out."""
        cdef double[::1] dview
        cdef bint collect = delays_out is not None
        if collect:
            dview = delays_out
        cdef Py_ssize_t n = self.n
        cdef double limit = self.arrival_limit
        cdef Py_ssize_t i, u, chosen
        cdef double arr, arr_c, done_t, delay, tnext
        with nogil:
            while True:
                chosen = -1
                arr_c = 0.0
                for i in range(n):
                    u = self.rr + i
                    if u >= n:
                        u -= n
                    if self.service[u] == INFINITY:
                        continue
                    arr = self.phase[u] + self.next_idx[u] * self.interval[u]
                    if arr <= self.clock and arr < limit:
                        chosen = u
                        arr_c = arr
                        break
                if chosen >= 0:
                    done_t = self.clock + self.service[chosen]
                    if done_t > t_end:
                        break
                    delay = done_t - arr_c
                    self.delivered_arr[chosen] += 1
                    self.delay_sum += delay
                    self.delay_count += 1
                    if collect:
                        dview[offset] = delay
                        offset += 1
                    self.next_idx[chosen] += 1
                    self.clock = done_t
                    self.rr = chosen + 1
                    if self.rr >= n:
                        self.rr = 0
                else:
                    tnext = INFINITY
                    for u in range(n):
                        if self.service[u] == INFINITY:
                            continue
                        arr = self.phase[u] + self.next_idx[u] * self.interval[u]
                        if arr < limit and arr < tnext:
                            tnext = arr
                    if tnext >= t_end:
                        break
                    self.clock = tnext
            if self.clock < t_end:
                self.clock = t_end
        return offset

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Every array argument is a flat, C-contiguous view."""

from libc.math cimport cos, sin


def phase_multiply(double complex[::1] z, const double[::1] theta, double scale):
    """In place: ``z *= exp(1j * scale * theta)``."""
    cdef Py_ssize_t k, n = z.shape[0]
    cdef double a, c, s, re, im
    if theta.shape[0] != n:
        raise ValueError("shape mismatch")
    with nogil:
        for k in range(n):
            a = scale * theta[k]
            c = cos(a)
            s = sin(a)
            re = z[k].real
            im = z[k].imag
            z[k] = (re * c - im * s) + (re * s + im * c) * 1j
    return None


def masked_mass(const double complex[::1] z, const double[::1] r, double radius):
    """Return ``(sum |z|^2 over r <= radius, sum |z|^2)``."""
    cdef Py_ssize_t k, n = z.shape[0]
    cdef double inside = 0.0, total = 0.0, m
    if r.shape[0] != n:
        raise ValueError("shape mismatch")
    with nogil:
        for k in range(n):
            m = z[k].real * z[k].real + z[k].imag * z[k].imag
            total += m
            if r[k] <= radius:
                inside += m
    return inside, total


def weighted_mass(const double complex[::1] z, const double[::1] w):
    """Return ``sum w |z|^2``."""
    cdef Py_ssize_t k, n = z.shape[0]
    cdef double acc = 0.0
    if w.shape[0] != n:
        raise ValueError("shape mismatch")
    with nogil:
        for k in range(n):
            acc += w[k] * (z[k].real * z[k].real + z[k].imag * z[k].imag)
    return acc

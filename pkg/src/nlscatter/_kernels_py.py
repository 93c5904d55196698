"""Pure numpy versions of the compiled kernels (same signatures, same semantics)."""

import numpy as np


def phase_multiply(z, theta, scale):
    """In place: ``z *= exp(1j * scale * theta)``."""
    if theta.shape[0] != z.shape[0]:
        raise ValueError("shape mismatch")
    z *= np.exp(1j * (scale * theta))


def masked_mass(z, r, radius):
    """Return ``(sum |z|^2 over r <= radius, sum |z|^2)``."""
    if r.shape[0] != z.shape[0]:
        raise ValueError("shape mismatch")
    m = z.real**2 + z.imag**2
    return float(m[r <= radius].sum()), float(m.sum())


def weighted_mass(z, w):
    """Return ``sum w |z|^2``."""
    if w.shape[0] != z.shape[0]:
        raise ValueError("shape mismatch")
    return float(np.dot(w, z.real**2 + z.imag**2))

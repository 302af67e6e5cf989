"""Derivatives and means for samples on a uniform vertex grid with Neumann ends."""
from __future__ import annotations

import numpy as np
from scipy import fft


def trapezoid_mean(u: np.ndarray, axis: int = -1) -> np.ndarray | float:
    u = np.asarray(u, dtype=float)
    n = u.shape[axis]
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return np.tensordot(u, w, axes=([axis], [0])) / (n - 1)


def laplacian_fd2(u: np.ndarray, dx: float) -> np.ndarray:
    """Second-order centred second derivative with reflective ghost values."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    out[1:-1] = u[2:] - 2 * u[1:-1] + u[:-2]
    out[0] = 2 * (u[1] - u[0])
    out[-1] = 2 * (u[-2] - u[-1])
    return out / (dx * dx)


def gradient_fd2(u: np.ndarray, dx: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    out[1:-1] = (u[2:] - u[:-2]) / (2 * dx)
    return out


def _cosine_coefficients(u: np.ndarray) -> np.ndarray:
    return fft.dct(np.asarray(u, dtype=float), type=1) / (len(u) - 1)


def laplacian_spectral(u: np.ndarray, length: float) -> np.ndarray:
    """Second derivative of the even (cosine) interpolant of vertex samples."""
    n = len(u)
    k = np.arange(n) * np.pi / length
    a = _cosine_coefficients(u)
    return fft.idct(-(k * k) * a * (n - 1), type=1)


def gradient_spectral(u: np.ndarray, length: float) -> np.ndarray:
    """First derivative of the cosine interpolant; zero at both ends."""
    n = len(u)
    a = _cosine_coefficients(u)
    k = np.arange(1, n - 1) * np.pi / length
    out = np.zeros(n)
    out[1:-1] = -0.5 * fft.dst(a[1:-1] * k, type=1)
    return out

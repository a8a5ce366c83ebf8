"""Shared independent oracles for the test suite.

These must stay decoupled from the implementation paths they check:
the exponential oracle is a plain power series, never a spectral
decomposition, and the Kronecker oracle is an index quadruple loop.
"""

import numpy as np


def taylor_evolution(h: np.ndarray, t: float, tol: float = 1e-13) -> np.ndarray:
    """exp(-i t h) by brute-force power series with max-entry truncation."""
    m = -1j * t * np.asarray(h, dtype=np.complex128)
    term = np.eye(m.shape[0], dtype=np.complex128)
    acc = term.copy()
    for k in range(1, 300):
        term = term @ m / k
        acc += term
        if np.max(np.abs(term)) < tol:
            break
    else:
        raise RuntimeError("series did not converge; scale the time step down")
    return acc


def loop_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product by explicit index loops (left factor slow)."""
    da, db = a.shape[0], b.shape[0]
    out = np.zeros((da * db, da * db), dtype=np.complex128)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for el in range(db):
                    out[i * db + k, j * db + el] = a[i, j] * b[k, el]
    return out


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)

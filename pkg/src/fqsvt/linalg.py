"""Dense complex linear algebra and randomness substrate.

Everything downstream (block encodings, circuit assembly, band projectors,
verification oracles) is built on the routines here: a cyclic-Jacobi
Hermitian eigensolver, matrix functions through diagonalization, the trace
norm, and seeded Haar-random state sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StateVector",
    "HermitianSpectrum",
    "rng",
    "eigh",
    "matfun",
    "trace_norm",
    "haar_state",
    "random_hermitian",
    "hermitian_from_spectrum",
    "dagger",
    "check_hermitian",
    "matrix_to_json",
    "matrix_from_json",
]

# Convergence threshold for the Jacobi sweep, relative to ||H||_F.
_JACOBI_REL_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 100


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by (seed, stream).

    Philox is counter-based, so runs are bit-reproducible across platforms
    and independent streams come from distinct keys rather than shared
    state. Parallel Monte Carlo passes one stream index per trial.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must fit in 64 bits, got {seed}")
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


@dataclass
class StateVector:
    """Amplitudes of an n-qubit register; intentionally allowed to be unnormalized."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("amplitudes must be finite")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        return StateVector(self.n_qubits, self.amplitudes / n)


@dataclass
class HermitianSpectrum:
    """Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ dagger(self.vectors)


def check_hermitian(h: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate a square Hermitian matrix; the diagnostic names the worst entry."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix entries must be finite")
    dev = np.abs(h - dagger(h))
    row, col = np.unravel_index(int(np.argmax(dev)), dev.shape)
    scale = max(1.0, float(np.max(np.abs(h))))
    if dev[row, col] > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: entry ({int(row)}, {int(col)}) deviates "
            f"from its conjugate transpose by {dev[row, col]:.3e}"
        )
    return h


def eigh(h: np.ndarray, tol: float = 1e-10) -> HermitianSpectrum:
    """Diagonalize a Hermitian matrix with cyclic Jacobi rotations.

    Eigenvalues are returned ascending with matching eigenvector columns.
    Within a degenerate cluster the eigenvector basis is solver-defined;
    downstream band logic only ever uses projectors, which are basis-free.
    """
    h = check_hermitian(h, tol=tol)
    n = h.shape[0]
    a = 0.5 * (h + dagger(h))
    v = np.eye(n, dtype=complex)
    if n == 1:
        return HermitianSpectrum(np.array([a[0, 0].real]), v)

    norm_f = np.linalg.norm(a)
    if norm_f == 0.0:
        return HermitianSpectrum(np.zeros(n), v)
    threshold = _JACOBI_REL_TOL * norm_f
    # Rotations smaller than this cannot move the off-diagonal mass past
    # the convergence threshold; skipping them saves whole sweeps.
    skip = threshold / (n * n)

    for _ in range(_JACOBI_MAX_SWEEPS):
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        if np.linalg.norm(off) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                t = 1.0 / (abs(tau) + math.sqrt(1.0 + tau * tau))
                if tau < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # Unitary G = diag(1, e^{-i art}) R(c, s) acting on the (p, q) plane.
                gp = s * phase.conjugate()
                gc = c * phase.conjugate()
                row_p = c * a[p, :] - (s * phase) * a[q, :]
                row_q = s * a[p, :] + (c * phase) * a[q, :]
                a[p, :] = row_p
                a[q, :] = row_q
                col_p = c * a[:, p] - gp * a[:, q]
                col_q = s * a[:, p] + gc * a[:, q]
                a[:, p] = col_p
                a[:, q] = col_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vol_p = c * v[:, p] - gp * v[:, q]
                vol_q = s * v[:, p] + gc * v[:, q]
                v[:, p] = vol_p
                v[:, q] = vol_q
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")

    values = np.diagonal(a).real.copy()
    order = np.argsort(values, kind="stable")
    return HermitianSpectrum(values[order], v[:, order])


def matfun(h: np.ndarray, g, spectrum: HermitianSpectrum | None = None) -> np.ndarray:
    """Matrix function g(H) of a Hermitian H via diagonalization.

    `g` is applied to each eigenvalue; a precomputed spectrum can be passed
    to reuse one diagonalization across many functions of the same matrix.
    """
    if spectrum is None:
        spectrum = eigh(h)
    gvals = np.array([g(x) for x in spectrum.values])
    if not np.all(np.isfinite(gvals)):
        bad = spectrum.values[~np.isfinite(gvals)][0]
        raise ValueError(f"function is not finite at eigenvalue {bad}")
    return (spectrum.vectors * gvals) @ dagger(spectrum.vectors)


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values (trace norm) of a rectangular matrix."""
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a), initial=0.0))
    if scale == 0.0:
        return 0.0
    if a.shape[0] == a.shape[1] and np.max(np.abs(a - dagger(a))) <= 1e-12 * max(1.0, scale):
        # Hermitian case: singular values are |eigenvalues|, computed
        # directly to avoid squaring away half the precision.
        return float(np.sum(np.abs(eigh(a).values)))
    gram = dagger(a) @ a if a.shape[0] >= a.shape[1] else a @ dagger(a)
    evals = eigh(gram).values
    # Gram eigenvalues below the roundoff floor are numerically zero; without
    # the cutoff their square roots inflate the sum by ~sqrt(eps) each.
    floor = gram.shape[0] * np.finfo(float).eps * float(np.max(evals, initial=0.0))
    evals = np.where(evals > floor, evals, 0.0)
    return float(np.sum(np.sqrt(evals)))


def haar_state(qubits: int, seed: int, stream: int = 0) -> StateVector:
    """Unit-norm Haar-random state on `qubits` qubits, reproducible per (seed, stream)."""
    if qubits < 1:
        raise ValueError("qubits must be >= 1")
    gen = rng(seed, stream)
    dim = 2**qubits
    z = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    return StateVector(qubits, z / np.linalg.norm(z))


def random_hermitian(dim: int, gen: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix with Gaussian entries (GUE up to scale)."""
    z = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    return scale * 0.5 * (z + dagger(z))


def hermitian_from_spectrum(values, gen: np.random.Generator) -> np.ndarray:
    """Hermitian matrix with the prescribed eigenvalues in a random eigenbasis.

    The basis is the eigenvector matrix of a GUE sample, which is Haar
    distributed up to column phases.
    """
    values = np.asarray(values, dtype=float)
    basis = eigh(random_hermitian(len(values), gen)).vectors
    return (basis * values) @ dagger(basis)


def matrix_to_json(a: np.ndarray) -> dict:
    """Encode a complex matrix as {"rows", "cols", "data"} with (re, im) pairs, row-major."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    data = [[float(z.real), float(z.imag)] for z in a.ravel(order="C")]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": data}


def matrix_from_json(doc: dict) -> np.ndarray:
    rows, cols = int(doc["rows"]), int(doc["cols"])
    data = doc["data"]
    if len(data) != rows * cols:
        raise ValueError(f"matrix JSON claims {rows}x{cols} but carries {len(data)} entries")
    flat = np.array([complex(re, im) for re, im in data])
    return flat.reshape(rows, cols)

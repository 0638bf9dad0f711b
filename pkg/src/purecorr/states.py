"""Validated quantum-state types, canonical examples and seeded generators.

States are immutable after construction (arrays are marked read-only) and
validation happens once, in the constructor.  Every random generator is a
seeded ``numpy.random.default_rng`` (PCG64); the generator name is recorded
in verification reports so seeds quoted there are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import DimPair, partial_trace, require_hermitian

__all__ = [
    "GENERATOR_NAME",
    "TRACE_TOL",
    "NORM_TOL",
    "PSD_TOL",
    "DensityMatrix",
    "BipartiteState",
    "PureState",
    "Ensemble",
    "from_pure",
    "mix",
    "example_source_state",
    "ghz",
    "random_pure",
    "random_density",
    "random_product_state",
    "random_unitary",
]

#: Name of the seeded RNG algorithm used everywhere (quoted in reports).
GENERATOR_NAME = "numpy-PCG64"

TRACE_TOL = 1e-9
NORM_TOL = 1e-9
#: Eigenvalues above -PSD_TOL count as nonnegative (eigensolver noise).
PSD_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix entries must be finite")
        require_hermitian(m)
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace must be 1, got {tr:.12g}")
        smallest = float(np.linalg.eigvalsh(m)[0])
        if smallest < -PSD_TOL:
            raise ValueError(
                f"density matrix is not positive semidefinite: "
                f"smallest eigenvalue {smallest:.3e}"
            )
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """A density matrix together with its two subsystem dimensions."""

    state: DensityMatrix
    dims: DimPair

    def __post_init__(self):
        dims = DimPair(*(int(d) for d in self.dims))
        if dims.da < 1 or dims.db < 1:
            raise ValueError(f"subsystem dimensions must be >= 1, got {dims}")
        if dims.total != self.state.dim:
            raise ValueError(
                f"dims {dims} do not match matrix dimension {self.state.dim}"
            )
        object.__setattr__(self, "dims", dims)

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix

    def marginal(self, keep: str) -> DensityMatrix:
        """Reduced state of subsystem "A" or "B"."""
        return DensityMatrix(partial_trace(self.matrix, self.dims, keep))


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized state vector over labeled tensor factors.

    ``layout`` is a tuple of (label, dimension) pairs, slowest factor first,
    matching the global composite-index convention.
    """

    amplitudes: np.ndarray
    layout: tuple[tuple[str, int], ...]

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise ValueError("amplitudes must be finite")
        layout = tuple((str(lab), int(d)) for lab, d in self.layout)
        if not layout:
            raise ValueError("layout must contain at least one factor")
        labels = [lab for lab, _ in layout]
        if len(set(labels)) != len(labels):
            raise ValueError(f"layout labels must be unique, got {labels}")
        if any(d < 1 for _, d in layout):
            raise ValueError(f"factor dimensions must be >= 1, got {layout}")
        if math.prod(d for _, d in layout) != v.size:
            raise ValueError(
                f"layout {layout} does not match vector length {v.size}"
            )
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm must be 1, got {norm:.12g}")
        object.__setattr__(self, "amplitudes", _freeze(v))
        object.__setattr__(self, "layout", layout)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.layout)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.layout)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> np.ndarray:
        """Projector |psi><psi|, trace-normalized.

        Dividing by the computed trace keeps dyadic-rational entries exact
        (e.g. GHZ-type amplitudes square to 1/2 plus one ulp; the shared
        factor cancels in the division).
        """
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        rho /= np.trace(rho).real
        return rho


@dataclass(frozen=True, eq=False)
class Ensemble:
    """A probability-weighted collection of equal-dimension states."""

    weights: tuple[float, ...]
    states: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(self.states):
            raise ValueError(
                f"{len(w)} weights for {len(self.states)} states"
            )
        if not w:
            raise ValueError("ensemble must not be empty")
        if any(x < 0 for x in w):
            raise ValueError(f"weights must be nonnegative, got {w}")
        if abs(sum(w) - 1.0) > TRACE_TOL:
            raise ValueError(f"weights must sum to 1, got {sum(w):.12g}")
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise ValueError(f"ensemble states have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def dim(self) -> int:
        return self.states[0].dim


def from_pure(psi: PureState) -> DensityMatrix:
    """Density matrix of a pure state."""
    return DensityMatrix(psi.density())


def mix(ensemble: Ensemble) -> DensityMatrix:
    """Convex mixture sum_i w_i rho_i of an ensemble."""
    out = np.zeros((ensemble.dim, ensemble.dim), dtype=np.complex128)
    for w, s in zip(ensemble.weights, ensemble.states):
        rho = s.density() if isinstance(s, PureState) else s.matrix
        out += w * rho
    return DensityMatrix(out)


def example_source_state() -> BipartiteState:
    """Two classically correlated qubits: even mixture of |00> and |11>."""
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = m[3, 3] = 0.5
    return BipartiteState(DensityMatrix(m), DimPair(2, 2))


def ghz() -> PureState:
    """The three-qubit state (|000> + |111>) / sqrt(2), factors (A, B, C)."""
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = amps[7] = math.sqrt(0.5)
    return PureState(amps, (("A", 2), ("B", 2), ("C", 2)))


def random_pure(d: int, seed) -> PureState:
    """Haar-random unit vector of dimension d (normalized complex Gaussian)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(v / np.linalg.norm(v), (("A", int(d)),))


def _ginibre_density(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return (m + m.conj().T) / 2.0


def random_density(dims: DimPair | Sequence[int], rank: int, seed) -> BipartiteState:
    """Random rank-r bipartite state: G G^dagger / Tr with Gaussian G."""
    dims = DimPair(*dims)
    rank = int(rank)
    if not 1 <= rank <= dims.total:
        raise ValueError(f"rank must be in [1, {dims.total}], got {rank}")
    rng = np.random.default_rng(seed)
    return BipartiteState(DensityMatrix(_ginibre_density(dims.total, rank, rng)), dims)


def random_product_state(dims: DimPair | Sequence[int], seed) -> BipartiteState:
    """Exactly factorable random state: independent full-rank factors."""
    dims = DimPair(*dims)
    rng = np.random.default_rng(seed)
    a = _ginibre_density(dims.da, dims.da, rng)
    b = _ginibre_density(dims.db, dims.db, rng)
    return BipartiteState(DensityMatrix(np.kron(a, b)), dims)


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix.

    The QR phases are fixed by making R's diagonal real positive; without
    that correction plain QR is not Haar-distributed.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases

"""Covariance of joint measurements and correlation witness synthesis.

The covariance of two observables on a bipartite state is the joint
expectation minus the product of the marginal expectations.  It equals the
Hilbert-Schmidt pairing of the observables with the correlation operator
``Delta = rho - rho_A (x) rho_B``, so the best unit-norm observable pair is
read off the operator Schmidt decomposition of Delta: expand Delta in
Hermitian product bases, SVD the (real) coefficient matrix, and recombine
the top singular pair.  The achieved covariance is then the top singular
value, which is nonzero exactly when the state is non-factorable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import chi2 as _chi2_dist

from .linalg import (
    DimPair,
    _lex_key,
    hermitian_basis,
    hermitian_eig,
    operator_to_coefficient_matrix,
    require_hermitian,
    svd,
    tensor_product,
)
from .reports import TheoremReport
from .states import BipartiteState, random_density, random_product_state

__all__ = [
    "FACTORABLE_TOL",
    "WITNESS_TOL",
    "OUTCOME_GROUP_TOL",
    "IMAG_TOL",
    "Observable",
    "CorrelationOperator",
    "OperatorSchmidt",
    "CorrelationWitness",
    "SamplingResult",
    "named_observable",
    "covariance",
    "correlated",
    "correlation_operator",
    "is_factorable",
    "operator_schmidt",
    "synthesize_witness",
    "brute_force_max_covariance",
    "to_projective",
    "sample_measurements",
    "chi_square_goodness",
    "chi_square_homogeneity",
    "verify_witness_criterion",
]

#: A state is factorable when ||Delta||_F does not exceed this.
FACTORABLE_TOL = 1e-9
#: A witness covariance above this counts as a genuine correlation.
WITNESS_TOL = 1e-7
#: Observable eigenvalues closer than this share one measurement outcome.
OUTCOME_GROUP_TOL = 1e-8
#: Largest imaginary residue tolerated on nominally real traces.
IMAG_TOL = 1e-10

_PAULI = {
    "i": np.eye(2, dtype=np.complex128),
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True, eq=False)
class Observable:
    """A Hermitian matrix whose eigenvalues label measurement outcomes."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if not np.all(np.isfinite(m)):
            raise ValueError("observable entries must be finite")
        require_hermitian(m)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def named_observable(name: str, dim: int = 2) -> Observable:
    """Observable for a named Pauli ("x", "y", "z") or the identity ("i")."""
    key = name.strip().lower()
    if key == "i":
        return Observable(np.eye(dim, dtype=np.complex128))
    if key in _PAULI:
        if dim != 2:
            raise ValueError(f"named observable {name!r} requires dimension 2")
        return Observable(_PAULI[key])
    raise ValueError(f"unknown observable name {name!r}; expected one of i, x, y, z")


@dataclass(frozen=True, eq=False)
class CorrelationOperator:
    """Delta = rho - rho_A (x) rho_B: traceless, Hermitian, zero iff factorable."""

    delta: np.ndarray
    dims: DimPair
    frobenius_norm: float

    def __post_init__(self):
        d = np.array(self.delta, dtype=np.complex128)
        dims = DimPair(*self.dims)
        if d.shape != (dims.total, dims.total):
            raise ValueError(f"delta shape {d.shape} does not match dims {dims}")
        require_hermitian(d)
        tr = complex(np.trace(d))
        if abs(tr) > 1e-10:
            raise ValueError(f"delta must be traceless, got trace {tr:.3e}")
        d.flags.writeable = False
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "frobenius_norm", float(self.frobenius_norm))


@dataclass(frozen=True, eq=False)
class OperatorSchmidt:
    """Expansion Delta = sum_k c_k  A_k (x) B_k with orthonormal Hermitian factors.

    ``coords_a`` / ``coords_b`` hold the coordinates of each output operator
    in the canonical Hermitian basis (one column per term).
    """

    coefficients: np.ndarray
    ops_a: tuple[Observable, ...]
    ops_b: tuple[Observable, ...]
    coords_a: np.ndarray
    coords_b: np.ndarray


@dataclass(frozen=True, eq=False)
class CorrelationWitness:
    """The observable pair achieving the maximal covariance on a state."""

    e: Observable
    f: Observable
    covariance: float
    sigma1: float


def _real_trace(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise ValueError(
            f"{what} has imaginary residue {value.imag:.3e} beyond {IMAG_TOL:.1e}"
        )
    return float(value.real)


def covariance(rho: BipartiteState, e: Observable, f: Observable) -> float:
    """Joint expectation of E (x) F minus the product of marginal expectations."""
    da, db = rho.dims
    if e.dim != da or f.dim != db:
        raise ValueError(
            f"observable dimensions ({e.dim}, {f.dim}) do not match state dims "
            f"({da}, {db})"
        )
    joint = complex(np.trace(rho.matrix @ tensor_product(e.matrix, f.matrix)))
    mean_a = complex(np.trace(rho.marginal("A").matrix @ e.matrix))
    mean_b = complex(np.trace(rho.marginal("B").matrix @ f.matrix))
    return _real_trace(joint - mean_a * mean_b, "covariance")


def correlated(
    rho: BipartiteState, e: Observable, f: Observable, tol: float = 1e-9
) -> bool:
    """Whether the two measurements are correlated on the state."""
    return abs(covariance(rho, e, f)) > tol


def correlation_operator(rho: BipartiteState) -> CorrelationOperator:
    """Difference between the state and the product of its marginals."""
    product = tensor_product(rho.marginal("A").matrix, rho.marginal("B").matrix)
    delta = rho.matrix - product
    return CorrelationOperator(delta, rho.dims, float(np.linalg.norm(delta)))


def is_factorable(rho: BipartiteState, tol: float = FACTORABLE_TOL) -> bool:
    """Whether the state equals the product of its own marginals."""
    return correlation_operator(rho).frobenius_norm <= tol


def operator_schmidt(delta: CorrelationOperator) -> OperatorSchmidt:
    """Operator Schmidt decomposition of a Hermitian bipartite operator.

    The coefficient matrix in the canonical Hermitian product basis is real
    for Hermitian input; its SVD gives descending nonnegative coefficients
    and Hermitian, Hilbert-Schmidt-orthonormal operator factors.
    """
    da, db = delta.dims
    c = operator_to_coefficient_matrix(delta.delta, delta.dims)
    imag = float(np.max(np.abs(c.imag)))
    if imag > IMAG_TOL:
        raise ValueError(
            f"coefficient matrix has imaginary part {imag:.3e}; "
            "input must be Hermitian"
        )
    sd = svd(c.real)
    k = sd.singular_values.size
    basis_a = np.stack(hermitian_basis(da))
    basis_b = np.stack(hermitian_basis(db))
    coords_a = sd.left_vectors[:, :k].real
    coords_b = sd.right_vectors[:, :k].real
    mats_a = np.einsum("mk,mij->kij", coords_a, basis_a)
    mats_b = np.einsum("nk,nij->kij", coords_b, basis_b)
    return OperatorSchmidt(
        coefficients=sd.singular_values,
        ops_a=tuple(Observable(m) for m in mats_a),
        ops_b=tuple(Observable(m) for m in mats_b),
        coords_a=coords_a,
        coords_b=coords_b,
    )


def synthesize_witness(rho: BipartiteState) -> CorrelationWitness:
    """Observable pair with maximal covariance among unit Hilbert-Schmidt pairs.

    Takes the top operator-Schmidt pair of the correlation operator; the
    achieved covariance equals the top coefficient.  Both are zero exactly
    when the state is factorable.  When the top coefficient is degenerate
    (within 1e-9) the pair with the lexicographically largest coordinate
    vector is chosen, and signs are fixed so the covariance is nonnegative.
    """
    schmidt = operator_schmidt(correlation_operator(rho))
    s = schmidt.coefficients
    idx = 0
    if s.size > 1:
        tied = np.flatnonzero(s[0] - s <= 1e-9)
        if tied.size > 1:
            idx = max(tied, key=lambda j: _lex_key(schmidt.coords_a[:, j]))
    e, f = schmidt.ops_a[idx], schmidt.ops_b[idx]
    cov = covariance(rho, e, f)
    if cov < 0:
        e = Observable(-e.matrix)
        cov = -cov
    return CorrelationWitness(e, f, float(cov), float(s[0]))


def _unit_hermitian_batch(
    rng: np.random.Generator, count: int, dim: int
) -> np.ndarray:
    """Random Hermitian matrices with unit Hilbert-Schmidt norm, shape (count, dim, dim)."""
    x = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal(
        (count, dim, dim)
    )
    h = (x + x.conj().transpose(0, 2, 1)) / 2.0
    norms = np.sqrt(np.sum(np.abs(h) ** 2, axis=(1, 2)))
    return h / norms[:, None, None]


def brute_force_max_covariance(rho: BipartiteState, trials: int, seed) -> float:
    """Monte Carlo maximum of |covariance| over random unit-norm pairs.

    Works directly from the covariance definition (no correlation operator,
    no decomposition), so it is an independent check on the synthesized
    witness: it approaches the witness value from below and never exceeds it
    beyond numerical noise.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    da, db = rho.dims
    e = _unit_hermitian_batch(rng, trials, da)
    f = _unit_hermitian_batch(rng, trials, db)
    r4 = rho.matrix.reshape(da, db, da, db)
    joint = np.einsum("abcd,tca,tdb->t", r4, e, f, optimize=True)
    rho_a = rho.marginal("A").matrix
    rho_b = rho.marginal("B").matrix
    mean_a = np.einsum("ij,tji->t", rho_a, e)
    mean_b = np.einsum("ij,tji->t", rho_b, f)
    cov = joint - mean_a * mean_b
    worst_imag = float(np.max(np.abs(cov.imag)))
    if worst_imag > IMAG_TOL:
        raise ValueError(f"covariance imaginary residue {worst_imag:.3e}")
    return float(np.max(np.abs(cov.real)))


def to_projective(
    obs: Observable, group_tol: float = OUTCOME_GROUP_TOL
) -> list[tuple[float, np.ndarray]]:
    """Spectral resolution of an observable as (outcome, projector) pairs.

    Eigenvalues within ``group_tol`` of each other are merged into a single
    outcome (labeled by their mean) with the summed projector, so the
    projectors are idempotent, mutually orthogonal and resolve the identity.
    """
    eig = hermitian_eig(obs.matrix)
    vals, vecs = eig.eigenvalues, eig.eigenvectors
    outcomes: list[tuple[float, np.ndarray]] = []
    i = 0
    while i < vals.size:
        j = i + 1
        while j < vals.size and vals[i] - vals[j] <= group_tol:
            j += 1
        block = vecs[:, i:j]
        outcomes.append((float(vals[i:j].mean()), block @ block.conj().T))
        i = j
    return outcomes


@dataclass(frozen=True, eq=False)
class SamplingResult:
    """Joint measurement statistics from repeated projective sampling."""

    outcomes_a: tuple[float, ...]
    outcomes_b: tuple[float, ...]
    counts: np.ndarray
    probabilities: np.ndarray
    empirical_covariance: float
    analytic_covariance: float
    trials: int

    def __post_init__(self):
        if int(self.counts.sum()) != self.trials:
            raise ValueError("counts must sum to the number of trials")

    @property
    def joint_counts(self) -> dict[tuple[float, float], int]:
        return {
            (ea, fb): int(self.counts[i, j])
            for i, ea in enumerate(self.outcomes_a)
            for j, fb in enumerate(self.outcomes_b)
        }


def sample_measurements(
    rho: BipartiteState, e: Observable, f: Observable, trials: int, seed
) -> SamplingResult:
    """Draw joint outcomes of two projective measurements on a state.

    Outcome (e_i, f_j) occurs with probability Tr(rho (P_i (x) Q_j)); the
    trials are drawn with a seeded generator, and the empirical covariance
    is reported next to the analytic one.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    da, db = rho.dims
    if e.dim != da or f.dim != db:
        raise ValueError(
            f"observable dimensions ({e.dim}, {f.dim}) do not match state dims "
            f"({da}, {db})"
        )
    proj_a = to_projective(e)
    proj_b = to_projective(f)
    r4 = rho.matrix.reshape(da, db, da, db)
    probs = np.empty((len(proj_a), len(proj_b)))
    for i, (_, p) in enumerate(proj_a):
        for j, (_, q) in enumerate(proj_b):
            val = complex(np.einsum("abcd,ca,db->", r4, p, q, optimize=True))
            probs[i, j] = _real_trace(val, "joint probability")
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"joint probabilities sum to {total:.12g}, not 1")
    probs = np.clip(probs, 0.0, None)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(trials, (probs / probs.sum()).reshape(-1))
    counts = counts.reshape(probs.shape)

    outcomes_a = np.array([v for v, _ in proj_a])
    outcomes_b = np.array([v for v, _ in proj_b])
    freq = counts / trials
    emp_joint = float(outcomes_a @ freq @ outcomes_b)
    emp_a = float(outcomes_a @ freq.sum(axis=1))
    emp_b = float(freq.sum(axis=0) @ outcomes_b)
    probs.flags.writeable = False
    counts.flags.writeable = False
    return SamplingResult(
        outcomes_a=tuple(float(v) for v in outcomes_a),
        outcomes_b=tuple(float(v) for v in outcomes_b),
        counts=counts,
        probabilities=probs,
        empirical_covariance=emp_joint - emp_a * emp_b,
        analytic_covariance=covariance(rho, e, f),
        trials=int(trials),
    )


def chi_square_goodness(
    counts: np.ndarray, probabilities: np.ndarray
) -> tuple[float, int, float]:
    """Pearson statistic of observed counts against a reference distribution.

    Returns (statistic, degrees of freedom, p-value).  Cells with zero
    reference probability but nonzero counts make the statistic infinite.
    """
    counts = np.asarray(counts, dtype=float).reshape(-1)
    probabilities = np.asarray(probabilities, dtype=float).reshape(-1)
    if counts.shape != probabilities.shape:
        raise ValueError("counts and probabilities must have matching shapes")
    n = counts.sum()
    support = probabilities > 0
    dof = int(support.sum()) - 1
    if counts[~support].sum() > 0:
        return math.inf, dof, 0.0
    expected = n * probabilities[support]
    stat = float(((counts[support] - expected) ** 2 / expected).sum())
    pvalue = float(_chi2_dist.sf(stat, dof)) if dof > 0 else 1.0
    return stat, dof, pvalue


def chi_square_homogeneity(
    counts1: np.ndarray, counts2: np.ndarray
) -> tuple[float, int, float]:
    """Pearson test that two count tables come from one joint distribution.

    The tables are flattened into a 2 x K contingency table; cells empty in
    both runs are dropped.  Returns (statistic, dof, p-value).
    """
    c1 = np.asarray(counts1, dtype=float).reshape(-1)
    c2 = np.asarray(counts2, dtype=float).reshape(-1)
    if c1.shape != c2.shape:
        raise ValueError("count tables must have matching shapes")
    keep = (c1 + c2) > 0
    c1, c2 = c1[keep], c2[keep]
    table = np.stack([c1, c2])
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row * col / table.sum()
    stat = float(((table - expected) ** 2 / expected).sum())
    dof = int(c1.size) - 1
    pvalue = float(_chi2_dist.sf(stat, dof)) if dof > 0 else 1.0
    return stat, dof, pvalue


def verify_witness_criterion(
    dims: DimPair | Sequence[int],
    trials: int,
    seed: int,
    *,
    factorable_tol: float = FACTORABLE_TOL,
    witness_tol: float = WITNESS_TOL,
) -> TheoremReport:
    """Check the biconditional: a correlated pair exists iff non-factorable.

    Runs ``trials`` seeded Ginibre full-rank states and ``trials`` seeded
    product states on the given dimensions.  For each, the synthesized
    witness must be significant (|covariance| > witness_tol) exactly when
    ||Delta||_F exceeds factorable_tol.  The report lists every violation.
    """
    dims = DimPair(*dims)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    state = np.random.SeedSequence(seed).generate_state(2 * trials, dtype=np.uint64)
    counterexamples: list[str] = []
    min_cov_nonfactorable = math.inf
    max_cov_factorable = 0.0

    def check(rho: BipartiteState, kind: str, index: int) -> None:
        nonlocal min_cov_nonfactorable, max_cov_factorable
        witness = synthesize_witness(rho)
        norm = correlation_operator(rho).frobenius_norm
        factorable = norm <= factorable_tol
        significant = abs(witness.covariance) > witness_tol
        if factorable:
            max_cov_factorable = max(max_cov_factorable, abs(witness.covariance))
        else:
            min_cov_nonfactorable = min(
                min_cov_nonfactorable, abs(witness.covariance)
            )
        if significant == factorable:
            counterexamples.append(
                f"{kind}[{index}]: |covariance| {abs(witness.covariance):.3e} vs "
                f"||Delta|| {norm:.3e}"
            )

    for t in range(trials):
        check(random_density(dims, dims.total, int(state[t])), "ginibre", t)
    for t in range(trials):
        check(random_product_state(dims, int(state[trials + t])), "product", t)

    stats = {"max_covariance_factorable": max_cov_factorable}
    if math.isfinite(min_cov_nonfactorable):
        stats["min_covariance_nonfactorable"] = min_cov_nonfactorable
    return TheoremReport(
        theorem=2,
        claim="a correlated measurement pair exists iff the state is non-factorable",
        ensemble=(
            f"{trials} Ginibre full-rank + {trials} product states on "
            f"{dims.da}x{dims.db}"
        ),
        seed=int(seed),
        trials=int(trials),
        passed=not counterexamples,
        counterexamples=tuple(counterexamples),
        stats=stats,
        tolerances={
            "factorable_tol": factorable_tol,
            "witness_tol": witness_tol,
        },
    )

"""Orbital-rotation (matchgate) classical-shadow simulation.

Rotations are spin-blocked: independent Haar blocks for the k=2 estimator
shots, and a single real orthogonal block shared by both spins for the
diagonal-measurement bases.  The single-shot 2-RDM estimator conjugates a
diagonal operator, whose eigenvalue at a sorted-frame pair depends on the
pair's overlap with the occupied reference block, by the two-particle
compound of the sorting-composed rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from shadowrdm.fci import FciVector, compute_rdms, rotate_state, sample_determinant_indices, bitstring_for_index
from shadowrdm.rdms import SpinBlockedRdms, same_spin_pairs


def haar_unitary(n: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """Haar-distributed unitary (or orthogonal) via Ginibre QR with the
    triangular factor's diagonal phase fixed."""
    if real:
        z = rng.standard_normal((n, n))
    else:
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return (q * (d / np.abs(d))).astype(complex)


@dataclass(frozen=True)
class OrbitalRotation:
    """Spin-blocked single-particle basis rotation."""

    u_alpha: np.ndarray
    u_beta: np.ndarray

    def __post_init__(self):
        for u in (self.u_alpha, self.u_beta):
            n = u.shape[0]
            if u.shape != (n, n):
                raise ValueError("rotation blocks must be square")
            if np.max(np.abs(u.conj().T @ u - np.eye(n))) > 1e-10:
                raise ValueError("rotation block is not unitary within 1e-10")

    @property
    def n_orb(self) -> int:
        return self.u_alpha.shape[0]


def sample_haar_rotation(n_orb: int, rng: np.random.Generator,
                         spin_blocked: bool = True,
                         real: bool = False) -> OrbitalRotation:
    """Random spin-blocked rotation.

    spin_blocked=True draws independent Haar blocks per spin sector;
    spin_blocked=False shares one sampled block across both sectors (the
    spatial-rotation form used by the diagonal-measurement bases).
    """
    if n_orb < 1:
        raise ValueError("n_orb must be at least 1")
    u_alpha = haar_unitary(n_orb, rng, real=real)
    u_beta = haar_unitary(n_orb, rng, real=real) if spin_blocked else u_alpha
    return OrbitalRotation(u_alpha=u_alpha, u_beta=u_beta)


@dataclass(frozen=True)
class ShadowShot:
    """One (rotation, measurement outcome) pair; the outcome is an
    occupation bitstring over 2*n_orb spin orbitals, alpha block first."""

    rotation: OrbitalRotation
    outcome: np.ndarray


def compound_matrix_k2(u: np.ndarray, pair_basis) -> np.ndarray:
    """Second compound (two-particle restriction) of u on an ordered-pair
    basis: entry ((r,s),(p,q)) = det [[u_rp, u_rq], [u_sp, u_sq]]."""
    n = u.shape[0]
    if np.max(np.abs(u.conj().T @ u - np.eye(n))) > 1e-10:
        raise ValueError("input to the pair compound must be unitary")
    pairs = np.asarray(pair_basis, dtype=np.int64).reshape(-1, 2)
    left, right = pairs[:, 0], pairs[:, 1]
    return (
        u[np.ix_(left, left)] * u[np.ix_(right, right)]
        - u[np.ix_(left, right)] * u[np.ix_(right, left)]
    )


def cross_compound_k2(u_alpha: np.ndarray, u_beta: np.ndarray) -> np.ndarray:
    """Two-particle matrix on the alpha-beta pair grid: entry
    ((r,s),(p,q)) = u_alpha[r,p] * u_beta[s,q], row-major pair indices."""
    return np.kron(u_alpha, u_beta)


def e_operator_eigenvalue(eta: int, n_spin_orbitals: int, s_prime: int) -> float:
    """Eigenvalue of the diagonal estimator operator at a sorted-frame pair
    sharing s_prime indices with the occupied reference block."""
    if s_prime not in (0, 1, 2):
        raise ValueError("s_prime must be 0, 1 or 2")
    if not 2 <= eta <= n_spin_orbitals:
        raise ValueError("need 2 <= eta <= n_spin_orbitals")
    num = math.comb(eta - s_prime, 2 - s_prime) * math.comb(
        n_spin_orbitals - eta + s_prime, s_prime
    )
    den = (-1) ** (2 + s_prime) * math.comb(2, s_prime)
    return num / den


def variance_bound(eta: int, n_spin_orbitals: int) -> float:
    """Upper bound on the average single-shot variance of the estimator."""
    if not 2 <= eta <= n_spin_orbitals:
        raise ValueError("need 2 <= eta <= n_spin_orbitals")
    n = n_spin_orbitals
    return math.comb(eta, 2) * (1.0 - (eta - 2) / n) ** 2 * ((1 + n) / (n - 1))


def _one_body_eigenvalue(eta_sector: int, n_orb: int, occupied: bool) -> float:
    # k=1 analogue of the estimator operator, per spin sector
    return float(n_orb - eta_sector + 1) if occupied else float(-eta_sector)


@dataclass
class VarianceBudget:
    """Shot budget bookkeeping: variance bound, ball radius and basis count."""

    eta: int
    n_spin_orbitals: int
    shots: int
    z: float = 1.0
    m_bases: int | None = None
    bound: float = field(init=False)
    epsilon1: float = field(init=False)

    def __post_init__(self):
        self.bound = variance_bound(self.eta, self.n_spin_orbitals)
        self.epsilon1 = self.z * math.sqrt(self.bound / self.shots)


def _sorting_permutation(bits: np.ndarray) -> np.ndarray:
    """Permutation matrix moving the occupied modes of bits to the front,
    preserving relative order (determinant +1 on the occupied columns)."""
    n = len(bits)
    occupied = [i for i in range(n) if bits[i]]
    empty = [i for i in range(n) if not bits[i]]
    v = np.zeros((n, n))
    for new, old in enumerate(occupied + empty):
        v[new, old] = 1.0
    return v


def single_shot_estimate(shot: ShadowShot, eta: int,
                         n_spin_orbitals: int) -> dict[str, np.ndarray]:
    """Per-spin-block single-shot 2-RDM contribution of one shadow shot.

    Returned matrices are indexed so that entry (pq, rs) is one additive
    sample of 2D^{pq,rs}; same-spin blocks on the p < q geminal basis, the
    alpha-beta block on the full n^2 grid.

    Because the two rotation blocks twirl independently, the estimator
    restricts per sector: each same-spin block conjugates the diagonal
    operator of its own sector (particle count eta_sigma on n_orb modes)
    with the sector's pair compound, and the alpha-beta block is the
    tensor product of the two one-body sector estimates.  The sorted-frame
    eigenvalue at a pair depends on its overlap with the occupied
    reference block {0..eta_sigma-1}.
    """
    n = n_spin_orbitals // 2
    bits = np.asarray(shot.outcome)
    if bits.shape != (2 * n,):
        raise ValueError("outcome length must be 2*n_orb")
    b_alpha, b_beta = bits[:n], bits[n:]
    eta_a, eta_b = int(b_alpha.sum()), int(b_beta.sum())
    if eta_a + eta_b != eta:
        raise ValueError(
            f"outcome popcounts ({eta_a},{eta_b}) inconsistent with eta={eta}"
        )

    m_alpha = _sorting_permutation(b_alpha) @ shot.rotation.u_alpha
    m_beta = _sorting_permutation(b_beta) @ shot.rotation.u_beta

    pairs = same_spin_pairs(n)
    npair = len(pairs)
    out: dict[str, np.ndarray] = {}
    for name, m, occ in (("d2aa", m_alpha, eta_a), ("d2bb", m_beta, eta_b)):
        if npair == 0 or occ < 2:
            # fewer than two same-spin particles: the block vanishes exactly
            out[name] = np.zeros((npair, npair), dtype=complex)
            continue
        lam = compound_matrix_k2(m, pairs)
        eig = np.array([
            e_operator_eigenvalue(occ, n, int(p < occ) + int(q < occ))
            for (p, q) in pairs
        ])
        out[name] = ((lam.conj().T * eig) @ lam).T

    one_body = []
    for m, occ in ((m_alpha, eta_a), (m_beta, eta_b)):
        eig = np.array([_one_body_eigenvalue(occ, n, p < occ) for p in range(n)])
        one_body.append((m.conj().T * eig) @ m)
    out["d2ab"] = np.kron(one_body[0], one_body[1]).T
    return out


class ShadowAccumulator:
    """Running sum of single-shot 2-RDM estimates with per-element second
    moments of the real part for variance diagnostics."""

    def __init__(self, n_orb: int, n_alpha: int, n_beta: int):
        self.n_orb = n_orb
        self.n_alpha = n_alpha
        self.n_beta = n_beta
        npair = n_orb * (n_orb - 1) // 2
        shapes = {"d2aa": (npair, npair), "d2bb": (npair, npair),
                  "d2ab": (n_orb * n_orb, n_orb * n_orb)}
        self._sums = {k: np.zeros(s, dtype=complex) for k, s in shapes.items()}
        self._sq = {k: np.zeros(s) for k, s in shapes.items()}
        self.shot_count = 0

    @property
    def eta(self) -> int:
        return self.n_alpha + self.n_beta

    def add(self, contribution: dict[str, np.ndarray]) -> None:
        for key, mat in contribution.items():
            self._sums[key] += mat
            self._sq[key] += mat.real ** 2
        self.shot_count += 1

    def merge(self, other: "ShadowAccumulator") -> None:
        if (other.n_orb, other.n_alpha, other.n_beta) != (
            self.n_orb, self.n_alpha, self.n_beta
        ):
            raise ValueError("accumulators describe different sectors")
        for key in self._sums:
            self._sums[key] += other._sums[key]
            self._sq[key] += other._sq[key]
        self.shot_count += other.shot_count

    def mean_blocks(self) -> dict[str, np.ndarray]:
        """Hermitian-symmetrized real mean per 2-RDM block."""
        if self.shot_count == 0:
            raise ValueError("no shots accumulated")
        out = {}
        for key, mat in self._sums.items():
            mean = mat / self.shot_count
            out[key] = 0.5 * (mean + mean.conj().T).real
        return out

    def mean_rdms(self) -> SpinBlockedRdms:
        """2-RDM estimate with the 1-RDM filled in by contraction."""
        blocks = self.mean_blocks()
        zero1 = np.zeros((self.n_orb, self.n_orb))
        est = SpinBlockedRdms(d1a=zero1, d1b=zero1.copy(), **blocks)
        return est.with_derived_one_body(self.eta)

    def element_variances(self) -> dict[str, np.ndarray]:
        """Empirical per-element single-shot variance of the real part."""
        if self.shot_count == 0:
            raise ValueError("no shots accumulated")
        out = {}
        for key in self._sums:
            mean = self._sums[key].real / self.shot_count
            out[key] = self._sq[key] / self.shot_count - mean ** 2
        return out

    def average_variance(self) -> dict[str, float]:
        """Average empirical variance per block, plus 'all_pairs': the mean
        over every entry of the C(2n,2)^2 two-particle matrix, where
        entries outside the spin-conserving blocks never fluctuate."""
        per_el = self.element_variances()
        n = self.n_orb
        out = {key: float(v.mean()) if v.size else 0.0 for key, v in per_el.items()}
        total_entries = math.comb(2 * n, 2) ** 2
        # unordered mixed pairs appear once in the C(2n,2) basis but the
        # accumulator tracks the ordered n^2 grid; same-spin variances enter
        # with their geminal multiplicity, mixed ones from the ordered grid
        tracked = (
            per_el["d2aa"].sum() + per_el["d2bb"].sum() + per_el["d2ab"].sum()
        )
        out["all_pairs"] = float(tracked / total_entries)
        return out

    def standard_errors(self) -> dict[str, np.ndarray]:
        return {
            key: np.sqrt(np.maximum(v, 0.0) / self.shot_count)
            for key, v in self.element_variances().items()
        }


def collect_shadow(state: FciVector, n_shots: int, seed: int,
                   batch_size: int = 2048) -> ShadowAccumulator:
    """Simulate n_shots of the estimator protocol on a pure state.

    Batches draw from independent RNG streams keyed by (seed, batch index),
    so results are reproducible for a fixed (seed, batch_size) and
    independent of any merge parallelism over batches.
    """
    space = state.space
    n = space.n_orb
    acc = ShadowAccumulator(n, space.n_alpha, space.n_beta)
    n_batches = (n_shots + batch_size - 1) // batch_size
    for batch in range(n_batches):
        rng = np.random.default_rng(np.random.SeedSequence((seed, batch)))
        todo = min(batch_size, n_shots - batch * batch_size)
        part = ShadowAccumulator(n, space.n_alpha, space.n_beta)
        for _ in range(todo):
            rotation = sample_haar_rotation(n, rng, spin_blocked=True)
            rotated = rotate_state(state, rotation.u_alpha, rotation.u_beta)
            idx = sample_determinant_indices(rotated, rng, size=1)[0]
            outcome = bitstring_for_index(space, idx)
            shot = ShadowShot(rotation=rotation, outcome=outcome)
            part.add(single_shot_estimate(shot, space.eta, 2 * n))
        acc.merge(part)
    return acc


def gaussian_surrogate(true_rdms: SpinBlockedRdms, shots: int,
                       rng: np.random.Generator,
                       z: float = 1.0) -> tuple[SpinBlockedRdms, float]:
    """Shadow-noise surrogate: i.i.d. Gaussian noise of width
    sqrt(variance_bound / shots) on each independent 2-RDM element,
    Hermitian-symmetrized, with the ball radius epsilon1 = z * width."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    n = true_rdms.n_orb
    trace = true_rdms.total_trace()
    eta = round(0.5 * (1.0 + math.sqrt(1.0 + 4.0 * trace)))
    sigma = math.sqrt(variance_bound(eta, 2 * n) / shots)

    noisy = SpinBlockedRdms.zeros(n)
    for key, block in true_rdms.blocks_2body().items():
        d = block.shape[0]
        noise = np.triu(rng.standard_normal((d, d)) * sigma)
        noise = noise + np.triu(noise, 1).T
        setattr(noisy, key, block.real + noise)
    noisy = noisy.with_derived_one_body(eta)
    return noisy, z * sigma


@dataclass(frozen=True)
class DiagonalSample:
    """Measured (or exact) rotated-frame 2-RDM diagonal for one basis."""

    rotation: OrbitalRotation
    s_aa: np.ndarray
    s_bb: np.ndarray
    s_ab: np.ndarray


def exact_rotated_diagonal(state: FciVector, rotation: OrbitalRotation):
    """Diagonal of the 2-RDM of the rotated state, per spin block."""
    rotated = rotate_state(state, rotation.u_alpha, rotation.u_beta)
    rdms = compute_rdms(rotated)
    return (
        np.diag(rdms.d2aa).real.copy(),
        np.diag(rdms.d2bb).real.copy(),
        np.diag(rdms.d2ab).real.copy(),
    )


def diagonal_measurements(state: FciVector, rotations: list[OrbitalRotation],
                          shots_per_basis: int | None,
                          rng: np.random.Generator,
                          z: float = 1.0) -> tuple[list[DiagonalSample], float]:
    """Pair-occupation diagonals under each basis rotation.

    Each diagonal entry is replaced by a binomial sample mean over
    shots_per_basis repetitions (the measured pair occupation is a
    projector, hence Bernoulli per shot); shots_per_basis=None keeps the
    exact values with epsilon2 = 0.  Cross-element covariances of
    simultaneously measured diagonals are ignored.
    """
    if not rotations:
        raise ValueError("need at least one rotation basis")
    samples = []
    eps2 = 0.0
    for rotation in rotations:
        exacts = exact_rotated_diagonal(state, rotation)
        if shots_per_basis is None:
            drawn = exacts
        else:
            if shots_per_basis < 1:
                raise ValueError("shots_per_basis must be at least 1")
            drawn = []
            for x in exacts:
                clipped = np.clip(x, 0.0, 1.0)
                drawn.append(
                    rng.binomial(shots_per_basis, clipped) / shots_per_basis
                )
                spread = np.sqrt(clipped * (1.0 - clipped) / shots_per_basis)
                if spread.size:
                    eps2 = max(eps2, z * float(spread.max()))
        samples.append(DiagonalSample(rotation, *drawn))
    return samples, eps2


def match_basis_count(eta: int, n_alpha: int, n_beta: int,
                      n_spin_orbitals: int,
                      state: FciVector | None = None,
                      rng: np.random.Generator | None = None,
                      n_probe_bases: int = 32) -> int:
    """Basis count m equalizing the diagonal-measurement budget with the
    estimator budget: ceil(variance bound / single-element variance).

    The closed-form per-element moments E[S] = (Na*Nb)^2/eta^2 and
    Var[S] = 1 - E[S]^2 are used when they give a variance in (0, 1];
    otherwise the variance is the empirical mean of X(1-X) over random
    probe bases, which requires the state.
    """
    bound = variance_bound(eta, n_spin_orbitals)
    e_s = (n_alpha * n_beta) ** 2 / eta**2
    var_s = 1.0 - e_s**2
    if not 0.0 < var_s <= 1.0:
        if state is None:
            raise ValueError(
                "closed-form diagonal variance is out of range; "
                "the empirical fallback needs the state"
            )
        if rng is None:
            rng = np.random.default_rng(0)
        values = []
        for _ in range(n_probe_bases):
            rotation = sample_haar_rotation(state.space.n_orb, rng,
                                            spin_blocked=False, real=True)
            for x in exact_rotated_diagonal(state, rotation):
                clipped = np.clip(x, 0.0, 1.0)
                values.append(clipped * (1.0 - clipped))
        var_s = float(np.concatenate(values).mean())
        if var_s <= 0.0:
            raise ValueError("probe bases produced zero diagonal variance")
    return math.ceil(bound / var_s)

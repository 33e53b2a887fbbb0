"""Exact diagonalization in a fixed (n_alpha, n_beta) sector.

Determinants are bitmask pairs (bit p set = spatial orbital p occupied);
alpha modes order before beta modes in the 2*n_orb spin-orbital
convention, and cross-spin sign factors cancel in all sector-conserving
expectation values, so only within-sector parities are tracked.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from shadowrdm.integrals import MolecularIntegrals
from shadowrdm.rdms import SpinBlockedRdms, same_spin_pairs

DEFAULT_DIMENSION_CAP = 100_000
_DENSE_EIG_LIMIT = 500


def _bits_below(mask: int, p: int) -> int:
    return (mask & ((1 << p) - 1)).bit_count()


def _occ_list(mask: int, n_orb: int) -> tuple[int, ...]:
    return tuple(p for p in range(n_orb) if mask >> p & 1)


@dataclass(frozen=True)
class DeterminantSpace:
    """Ordered basis of (alpha, beta) occupation strings for one sector."""

    n_orb: int
    n_alpha: int
    n_beta: int
    alpha_strings: tuple[int, ...] = field(repr=False)
    beta_strings: tuple[int, ...] = field(repr=False)

    @property
    def dim_alpha(self) -> int:
        return len(self.alpha_strings)

    @property
    def dim_beta(self) -> int:
        return len(self.beta_strings)

    @property
    def dimension(self) -> int:
        return self.dim_alpha * self.dim_beta

    @property
    def eta(self) -> int:
        return self.n_alpha + self.n_beta


def _strings(n_orb: int, n_elec: int) -> tuple[int, ...]:
    # lexicographic in the occupied-orbital tuples
    return tuple(
        sum(1 << p for p in occ) for occ in combinations(range(n_orb), n_elec)
    )


@lru_cache(maxsize=None)
def enumerate_space(n_orb: int, n_alpha: int, n_beta: int) -> DeterminantSpace:
    """All determinants of the sector, C(n_orb,n_alpha)*C(n_orb,n_beta) many."""
    if not (0 <= n_alpha <= n_orb and 0 <= n_beta <= n_orb):
        raise ValueError(
            f"electron counts ({n_alpha},{n_beta}) exceed {n_orb} orbitals"
        )
    return DeterminantSpace(
        n_orb=n_orb,
        n_alpha=n_alpha,
        n_beta=n_beta,
        alpha_strings=_strings(n_orb, n_alpha),
        beta_strings=_strings(n_orb, n_beta),
    )


@dataclass
class FciVector:
    """State in a DeterminantSpace: amplitudes[i, j] pairs alpha string i
    with beta string j.  Stored complex so basis rotations apply directly."""

    space: DeterminantSpace
    amplitudes: np.ndarray
    energy: float | None = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        expected = (self.space.dim_alpha, self.space.dim_beta)
        if self.amplitudes.shape != expected:
            raise ValueError(
                f"amplitudes shape {self.amplitudes.shape}, expected {expected}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_normalized(self, tol: float = 1e-9) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise ValueError(f"state is not normalized: |psi| = {self.norm():.3e}")


# ---------------------------------------------------------------------------
# sector Hamiltonian by Slater-Condon rules


class _SectorTables:
    """Per-spin-sector excitation tables for one string list."""

    def __init__(self, strings: tuple[int, ...], n_orb: int):
        self.strings = strings
        self.n_orb = n_orb
        self.index = {s: i for i, s in enumerate(strings)}
        self.occ = np.array(
            [_occ_list(s, n_orb) for s in strings], dtype=np.int64
        ).reshape(len(strings), -1)
        occupancy = np.zeros((len(strings), n_orb))
        for i, s in enumerate(strings):
            for p in _occ_list(s, n_orb):
                occupancy[i, p] = 1.0
        self.occupancy = occupancy

        # directed singles (i, j, p, r, sign): |J> = sign * a+_p a_r |I>
        singles = []
        for i, s in enumerate(strings):
            occ = _occ_list(s, n_orb)
            virt = [p for p in range(n_orb) if not s >> p & 1]
            for r in occ:
                base = s & ~(1 << r)
                sign_r = (-1) ** _bits_below(s, r)
                for p in virt:
                    j = self.index[base | (1 << p)]
                    sign = sign_r * (-1) ** _bits_below(base, p)
                    singles.append((i, j, p, r, sign))
        self.singles = np.array(singles, dtype=np.int64).reshape(-1, 5)

        # directed doubles (i, j, p, q, r, s, sign): sign*a+_p a+_q a_s a_r,
        # with r < s annihilated and p < q created
        doubles = []
        for i, st in enumerate(strings):
            occ = _occ_list(st, n_orb)
            virt = [p for p in range(n_orb) if not st >> p & 1]
            for r, s_ in combinations(occ, 2):
                m1 = st & ~(1 << r)
                sgn1 = (-1) ** _bits_below(st, r)
                m2 = m1 & ~(1 << s_)
                sgn2 = sgn1 * (-1) ** _bits_below(m1, s_)
                for p, q in combinations(virt, 2):
                    m3 = m2 | (1 << q)
                    sgn3 = sgn2 * (-1) ** _bits_below(m2, q)
                    m4 = m3 | (1 << p)
                    sgn4 = sgn3 * (-1) ** _bits_below(m3, p)
                    doubles.append((i, self.index[m4], p, q, r, s_, sgn4))
        self.doubles = np.array(doubles, dtype=np.int64).reshape(-1, 7)


@lru_cache(maxsize=None)
def _sector_tables(strings: tuple[int, ...], n_orb: int) -> _SectorTables:
    return _SectorTables(strings, n_orb)


def build_hamiltonian(ints: MolecularIntegrals, space: DeterminantSpace) -> sp.csr_matrix:
    """Sector Hamiltonian (without e_core) as a sparse symmetric matrix."""
    n = ints.n_orb
    if space.n_orb != n:
        raise ValueError("space and integrals disagree on orbital count")
    tei = ints.two_electron_tensor()
    jmat = np.einsum("ppqq->pq", tei)
    kmat = np.einsum("pqqp->pq", tei)

    ta = _sector_tables(space.alpha_strings, n)
    tb = _sector_tables(space.beta_strings, n)
    da, db = space.dim_alpha, space.dim_beta
    dim = da * db

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    # diagonal
    h_diag = ints.h1.diagonal()
    one_a = ta.occupancy @ h_diag
    one_b = tb.occupancy @ h_diag
    coul_a = 0.5 * np.einsum("ip,pq,iq->i", ta.occupancy, jmat - kmat, ta.occupancy)
    coul_b = 0.5 * np.einsum("ip,pq,iq->i", tb.occupancy, jmat - kmat, tb.occupancy)
    cross = np.einsum("ip,pq,jq->ij", ta.occupancy, jmat, tb.occupancy)
    diag = (one_a + coul_a)[:, None] + (one_b + coul_b)[None, :] + cross
    idx = np.arange(dim)
    rows.append(idx)
    cols.append(idx)
    vals.append(diag.ravel())

    # alpha singles (beta diagonal) and beta singles (alpha diagonal)
    for tables, other, alpha_side in ((ta, tb, True), (tb, ta, False)):
        if len(tables.singles) == 0:
            continue
        i, j, p, r, sign = tables.singles.T
        own = tables.occupancy[i].copy()
        own[np.arange(len(i)), r] -= 1.0  # sum over k in occ(I) \ {r}
        jpr = tei[p, r, :, :]  # (pr|kk) on the diagonal k
        kpr = tei[p, :, :, r]  # (pk|kr) on the diagonal k
        jdiag = np.einsum("skk->sk", jpr)
        kdiag = np.einsum("skk->sk", kpr)
        base = ints.h1[p, r] + np.einsum("sk,sk->s", own, jdiag - kdiag)
        cross_term = other.occupancy @ jdiag.T  # (n_other, n_singles)
        value = sign[None, :] * (base[None, :] + cross_term)
        other_idx = np.arange(len(other.strings))
        if alpha_side:
            row = i[None, :] * db + other_idx[:, None]
            col = j[None, :] * db + other_idx[:, None]
        else:
            row = other_idx[:, None] * db + i[None, :]
            col = other_idx[:, None] * db + j[None, :]
        rows.append(row.ravel())
        cols.append(col.ravel())
        vals.append(value.ravel())

    # same-spin doubles
    for tables, alpha_side in ((ta, True), (tb, False)):
        if len(tables.doubles) == 0:
            continue
        i, j, p, q, r, s_, sign = tables.doubles.T
        value = sign * (tei[p, r, q, s_] - tei[p, s_, q, r])
        other_dim = db if alpha_side else da
        other_idx = np.arange(other_dim)
        if alpha_side:
            row = i[None, :] * db + other_idx[:, None]
            col = j[None, :] * db + other_idx[:, None]
        else:
            row = other_idx[:, None] * db + i[None, :]
            col = other_idx[:, None] * db + j[None, :]
        rows.append(row.ravel())
        cols.append(col.ravel())
        vals.append(np.broadcast_to(value[None, :], row.shape).ravel())

    # mixed alpha-beta doubles
    if len(ta.singles) and len(tb.singles):
        ia, ja, pa, ra, sa = ta.singles.T
        ib, jb, pb, rb, sb = tb.singles.T
        value = (sa[:, None] * sb[None, :]) * tei[pa[:, None], ra[:, None], pb[None, :], rb[None, :]]
        row = ia[:, None] * db + ib[None, :]
        col = ja[:, None] * db + jb[None, :]
        rows.append(row.ravel())
        cols.append(col.ravel())
        vals.append(value.ravel())

    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return h.tocsr()


def _davidson_lowest(h: sp.csr_matrix, tol: float = 1e-9, max_iter: int = 400,
                     max_space: int = 24) -> tuple[float, np.ndarray, int]:
    dim = h.shape[0]
    diag = h.diagonal()
    v = np.zeros(dim)
    v[int(np.argmin(diag))] = 1.0
    basis = [v]
    h_basis = [h @ v]
    for it in range(max_iter):
        m = len(basis)
        vmat = np.array(basis).T
        hvmat = np.array(h_basis).T
        small = vmat.T @ hvmat
        small = 0.5 * (small + small.T)
        theta, y = np.linalg.eigh(small)
        ritz = vmat @ y[:, 0]
        h_ritz = hvmat @ y[:, 0]
        residual = h_ritz - theta[0] * ritz
        if np.linalg.norm(residual) < tol:
            return float(theta[0]), ritz, it + 1
        if m >= max_space:
            basis = [ritz]
            h_basis = [h @ ritz]
            m = 1
            vmat = np.array(basis).T
        denom = diag - theta[0]
        denom = np.where(np.abs(denom) < 1e-8, np.copysign(1e-8, denom + 1e-300), denom)
        t = residual / denom
        for _ in range(2):
            t -= vmat @ (vmat.T @ t)
            vmat = np.array(basis).T
        nt = np.linalg.norm(t)
        if nt < 1e-14:
            t = np.random.default_rng(it).standard_normal(dim)
            t -= vmat @ (vmat.T @ t)
            nt = np.linalg.norm(t)
        basis.append(t / nt)
        h_basis.append(h @ basis[-1])
    raise RuntimeError(f"Davidson did not converge in {max_iter} iterations")


def ground_state(ints: MolecularIntegrals,
                 dimension_cap: int = DEFAULT_DIMENSION_CAP) -> FciVector:
    """Lowest eigenpair of the sector Hamiltonian; residual below 1e-9."""
    space = enumerate_space(ints.n_orb, ints.n_alpha, ints.n_beta)
    if space.dimension > dimension_cap:
        raise ValueError(
            f"determinant space dimension {space.dimension} exceeds cap {dimension_cap}"
        )
    h = build_hamiltonian(ints, space)
    if space.dimension <= _DENSE_EIG_LIMIT:
        dense = h.toarray()
        evals, evecs = np.linalg.eigh(dense)
        energy, vec = evals[0], evecs[:, 0]
    else:
        energy, vec, _ = _davidson_lowest(h)
    residual = np.linalg.norm(h @ vec - energy * vec)
    if residual > 1e-9:
        raise RuntimeError(f"eigenpair residual {residual:.2e} above 1e-9")
    # fix overall sign for reproducibility
    lead = np.argmax(np.abs(vec))
    if vec[lead].real < 0:
        vec = -vec
    amps = vec.reshape(space.dim_alpha, space.dim_beta)
    return FciVector(space=space, amplitudes=amps, energy=float(energy) + ints.e_core)


# ---------------------------------------------------------------------------
# RDMs


def _annihilation_map(strings: tuple[int, ...], n_orb: int, orbitals: list[int]):
    """For each orbital p: list of (src_idx, dst_idx, sign) of a_p."""
    smaller = {}
    out = {}
    for p in orbitals:
        entries = []
        for i, s in enumerate(strings):
            if s >> p & 1:
                k = s & ~(1 << p)
                if k not in smaller:
                    smaller[k] = len(smaller)
                entries.append((i, smaller[k], (-1) ** _bits_below(s, p)))
        out[p] = entries
    return out, len(smaller)


def _pair_annihilation_tensor(psi: np.ndarray, strings: tuple[int, ...],
                              n_orb: int, axis: int) -> tuple[np.ndarray, int]:
    """Stack of a_q a_p psi over ordered pairs (p < q) along one spin axis."""
    pairs = same_spin_pairs(n_orb)
    smaller: dict[int, int] = {}
    entries = []  # (pair_idx, src, dst, sign)
    for a, (p, q) in enumerate(pairs):
        for i, s in enumerate(strings):
            if (s >> p & 1) and (s >> q & 1):
                sign = (-1) ** _bits_below(s, p)
                m1 = s & ~(1 << p)
                sign *= (-1) ** _bits_below(m1, q)
                k = m1 & ~(1 << q)
                if k not in smaller:
                    smaller[k] = len(smaller)
                entries.append((a, i, smaller[k], sign))
    other = psi.shape[1 - axis]
    out = np.zeros((len(pairs), max(len(smaller), 1), other), dtype=complex)
    for a, src, dst, sign in entries:
        vec = psi[src, :] if axis == 0 else psi[:, src]
        out[a, dst, :] += sign * vec
    return out, len(smaller)


def compute_rdms(state: FciVector) -> SpinBlockedRdms:
    """Spin-blocked 1- and 2-RDMs of a normalized state."""
    state.check_normalized()
    space = state.space
    n = space.n_orb
    psi = state.amplitudes

    rdms = SpinBlockedRdms.zeros(n, dtype=complex)

    # one-body: stack a_p psi per sector
    for strings, axis, target in (
        (space.alpha_strings, 0, "d1a"),
        (space.beta_strings, 1, "d1b"),
    ):
        amap, n_small = _annihilation_map(strings, n, list(range(n)))
        other = psi.shape[1 - axis]
        stack = np.zeros((n, max(n_small, 1), other), dtype=complex)
        for p, entries in amap.items():
            for src, dst, sign in entries:
                vec = psi[src, :] if axis == 0 else psi[:, src]
                stack[p, dst, :] += sign * vec
        flat = stack.reshape(n, -1)
        setattr(rdms, target, np.conj(flat) @ flat.T)

    # same-spin geminals
    for strings, axis, target in (
        (space.alpha_strings, 0, "d2aa"),
        (space.beta_strings, 1, "d2bb"),
    ):
        stack, _ = _pair_annihilation_tensor(psi, strings, n, axis)
        flat = stack.reshape(stack.shape[0], stack.shape[1] * stack.shape[2])
        setattr(rdms, target, np.conj(flat) @ flat.T)

    # alpha-beta geminal: independent single annihilations on each sector
    amap_a, small_a = _annihilation_map(space.alpha_strings, n, list(range(n)))
    amap_b, small_b = _annihilation_map(space.beta_strings, n, list(range(n)))
    mid = np.zeros((n, max(small_a, 1), space.dim_beta), dtype=complex)
    for p, entries in amap_a.items():
        for src, dst, sign in entries:
            mid[p, dst, :] += sign * psi[src, :]
    stack = np.zeros((n * n, max(small_a, 1), max(small_b, 1)), dtype=complex)
    for p in range(n):
        for q, entries in amap_b.items():
            acc = np.zeros((max(small_a, 1), max(small_b, 1)), dtype=complex)
            for src, dst, sign in entries:
                acc[:, dst] += sign * mid[p, :, src]
            stack[p * n + q] = acc
    flat = stack.reshape(n * n, -1)
    rdms.d2ab = np.conj(flat) @ flat.T
    return rdms


# ---------------------------------------------------------------------------
# rotations and sampling


def _sector_rotation_matrix(u: np.ndarray, strings: tuple[int, ...],
                            n_orb: int, k: int) -> np.ndarray:
    """<I'|R(u)|I> = det(u[occ I', occ I]) over all string pairs."""
    d = len(strings)
    if k == 0:
        return np.ones((1, 1), dtype=complex)
    occ = np.array([_occ_list(s, n_orb) for s in strings], dtype=np.int64)
    sub = u[occ[:, None, :, None], occ[None, :, None, :]]
    return np.linalg.det(sub.reshape(d, d, k, k))


def _check_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    n = u.shape[0]
    if np.max(np.abs(u.conj().T @ u - np.eye(n))) > tol:
        raise ValueError("rotation block is not unitary within 1e-10")


def rotate_state(state: FciVector, u_alpha: np.ndarray, u_beta: np.ndarray) -> FciVector:
    """Apply the orbital rotation with per-sector matrices (u_alpha, u_beta)."""
    _check_unitary(u_alpha)
    _check_unitary(u_beta)
    space = state.space
    ta = _sector_rotation_matrix(u_alpha, space.alpha_strings, space.n_orb, space.n_alpha)
    tb = _sector_rotation_matrix(u_beta, space.beta_strings, space.n_orb, space.n_beta)
    new_amps = ta @ state.amplitudes @ tb.T
    out = FciVector(space=space, amplitudes=new_amps, energy=None)
    if abs(out.norm() - state.norm()) > 1e-9:
        raise RuntimeError("rotation failed to preserve the norm")
    return out


def sample_determinant_indices(state: FciVector, rng: np.random.Generator,
                               size: int = 1) -> np.ndarray:
    """Born-rule draws of flattened determinant indices."""
    probs = np.abs(state.amplitudes.ravel()) ** 2
    probs = probs / probs.sum()
    return rng.choice(len(probs), size=size, p=probs)


def bitstring_for_index(space: DeterminantSpace, flat_index: int) -> np.ndarray:
    """Occupation bitstring over 2*n_orb spin orbitals (alpha block first)."""
    ia, ib = divmod(int(flat_index), space.dim_beta)
    bits = np.zeros(2 * space.n_orb, dtype=np.int8)
    for p in _occ_list(space.alpha_strings[ia], space.n_orb):
        bits[p] = 1
    for p in _occ_list(space.beta_strings[ib], space.n_orb):
        bits[space.n_orb + p] = 1
    return bits


def sample_bitstring(state: FciVector, rng: np.random.Generator) -> np.ndarray:
    """One Born-rule measurement outcome in the current orbital basis."""
    state.check_normalized()
    idx = sample_determinant_indices(state, rng, size=1)[0]
    return bitstring_for_index(state.space, idx)


# ---------------------------------------------------------------------------
# binary state cache

_CACHE_MAGIC = b"FCIVEC01"


def save_state(path, state: FciVector) -> None:
    """Header (dims, counts, energy flag) + little-endian complex amplitudes."""
    space = state.space
    has_energy = state.energy is not None
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack(
            "<qqqqd",
            space.n_orb, space.n_alpha, space.n_beta,
            1 if has_energy else 0,
            state.energy if has_energy else 0.0,
        ))
        fh.write(np.ascontiguousarray(state.amplitudes, dtype="<c16").tobytes())


def load_state(path) -> FciVector:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CACHE_MAGIC))
        if magic != _CACHE_MAGIC:
            raise ValueError(f"{path}: not a state cache file")
        n_orb, n_alpha, n_beta, has_energy, energy = struct.unpack(
            "<qqqqd", fh.read(8 * 4 + 8)
        )
        space = enumerate_space(n_orb, n_alpha, n_beta)
        raw = fh.read()
    amps = np.frombuffer(raw, dtype="<c16").reshape(space.dim_alpha, space.dim_beta)
    return FciVector(
        space=space,
        amplitudes=amps.astype(complex),
        energy=energy if has_energy else None,
    )

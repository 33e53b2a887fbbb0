"""Spin-blocked one- and two-particle reduced density matrices.

Geminal convention: 2D^{pq,rs} = <a^+_p a^+_q a_s a_r>.  Same-spin blocks
live on the ordered-pair basis p < q; the alpha-beta block on the full
n^2 pair grid.  The assembled spin-orbital form orders alpha modes before
beta modes and counts each unordered same-spin pair twice, so its trace
is eta*(eta-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def same_spin_pairs(n_orb: int) -> tuple[tuple[int, int], ...]:
    """Ordered pairs (p, q) with p < q, row-major."""
    return tuple((p, q) for p in range(n_orb) for q in range(p + 1, n_orb))


@lru_cache(maxsize=None)
def same_spin_pair_index(n_orb: int) -> np.ndarray:
    """(n, n) lookup of the geminal index of {p, q}; diagonal entries -1."""
    idx = -np.ones((n_orb, n_orb), dtype=np.int64)
    for a, (p, q) in enumerate(same_spin_pairs(n_orb)):
        idx[p, q] = a
        idx[q, p] = a
    return idx


def cross_pair_index(n_orb: int, p: int, q: int) -> int:
    """Row-major index of the alpha-beta pair (p, q) on the n^2 grid."""
    return p * n_orb + q


@dataclass
class SpinBlockedRdms:
    """1-RDM and 2-RDM spin blocks of an (n_alpha, n_beta) state."""

    d1a: np.ndarray
    d1b: np.ndarray
    d2aa: np.ndarray
    d2bb: np.ndarray
    d2ab: np.ndarray

    def __post_init__(self):
        n = self.d1a.shape[0]
        npair = n * (n - 1) // 2
        expected = {
            "d1a": (n, n),
            "d1b": (n, n),
            "d2aa": (npair, npair),
            "d2bb": (npair, npair),
            "d2ab": (n * n, n * n),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape}"
                )

    @property
    def n_orb(self) -> int:
        return self.d1a.shape[0]

    @classmethod
    def zeros(cls, n_orb: int, dtype=float) -> "SpinBlockedRdms":
        npair = n_orb * (n_orb - 1) // 2
        return cls(
            d1a=np.zeros((n_orb, n_orb), dtype=dtype),
            d1b=np.zeros((n_orb, n_orb), dtype=dtype),
            d2aa=np.zeros((npair, npair), dtype=dtype),
            d2bb=np.zeros((npair, npair), dtype=dtype),
            d2ab=np.zeros((n_orb * n_orb, n_orb * n_orb), dtype=dtype),
        )

    def blocks_2body(self) -> dict[str, np.ndarray]:
        return {"d2aa": self.d2aa, "d2bb": self.d2bb, "d2ab": self.d2ab}

    def real(self) -> "SpinBlockedRdms":
        return SpinBlockedRdms(
            d1a=self.d1a.real.copy(),
            d1b=self.d1b.real.copy(),
            d2aa=self.d2aa.real.copy(),
            d2bb=self.d2bb.real.copy(),
            d2ab=self.d2ab.real.copy(),
        )

    def hermitized(self) -> "SpinBlockedRdms":
        def h(m):
            return 0.5 * (m + m.conj().T)

        return SpinBlockedRdms(
            d1a=h(self.d1a),
            d1b=h(self.d1b),
            d2aa=h(self.d2aa),
            d2bb=h(self.d2bb),
            d2ab=h(self.d2ab),
        )

    def total_trace(self) -> float:
        """Assembled-form 2-RDM trace; eta*(eta-1) for an eta-electron state."""
        return float(
            2.0 * np.trace(self.d2aa).real
            + 2.0 * np.trace(self.d2bb).real
            + 2.0 * np.trace(self.d2ab).real
        )

    def assemble_spin_orbital(self) -> np.ndarray:
        """Full (2n)^2 x (2n)^2 spin-orbital 2-RDM over ordered pairs.

        Spin-orbital P = p for alpha, n + p for beta; the ordered pair
        (P, Q) maps to row P*(2n) + Q.
        """
        n = self.n_orb
        nso = 2 * n
        full = np.zeros((nso * nso, nso * nso), dtype=complex)

        pairs = same_spin_pairs(n)
        for a, (p, q) in enumerate(pairs):
            for b, (r, s) in enumerate(pairs):
                for gem, off in ((self.d2aa, 0), (self.d2bb, n)):
                    v = gem[a, b]
                    pp, qq, rr, ss = p + off, q + off, r + off, s + off
                    full[pp * nso + qq, rr * nso + ss] = v
                    full[qq * nso + pp, rr * nso + ss] = -v
                    full[pp * nso + qq, ss * nso + rr] = -v
                    full[qq * nso + pp, ss * nso + rr] = v

        for p in range(n):
            for q in range(n):
                for r in range(n):
                    for s in range(n):
                        v = self.d2ab[p * n + q, r * n + s]
                        pa, qb, ra, sb = p, n + q, r, n + s
                        full[pa * nso + qb, ra * nso + sb] = v
                        full[qb * nso + pa, sb * nso + ra] = v
                        full[pa * nso + qb, sb * nso + ra] = -v
                        full[qb * nso + pa, ra * nso + sb] = -v
        return full

    def frobenius_distance(self, other: "SpinBlockedRdms") -> float:
        """Frobenius norm of the assembled spin-orbital 2-RDM difference."""
        diff = self.assemble_spin_orbital() - other.assemble_spin_orbital()
        return float(np.linalg.norm(diff))

    def contract_to_one_body(self, eta: int) -> tuple[np.ndarray, np.ndarray]:
        """(d1a, d1b) implied by the 2-RDM contraction, divided by eta - 1."""
        n = self.n_orb
        pair_idx = same_spin_pair_index(n)
        d1a = np.zeros((n, n), dtype=self.d2ab.dtype)
        d1b = np.zeros((n, n), dtype=self.d2ab.dtype)
        for i in range(n):
            for j in range(n):
                acc_a = 0.0
                acc_b = 0.0
                for k in range(n):
                    acc_a += self.d2ab[i * n + k, j * n + k]
                    acc_b += self.d2ab[k * n + i, k * n + j]
                    if k != i and k != j:
                        sgn = 1.0
                        if i > k:
                            sgn = -sgn
                        if j > k:
                            sgn = -sgn
                        acc_a += sgn * self.d2aa[pair_idx[i, k], pair_idx[j, k]]
                        acc_b += sgn * self.d2bb[pair_idx[i, k], pair_idx[j, k]]
                d1a[i, j] = acc_a
                d1b[i, j] = acc_b
        return d1a / (eta - 1), d1b / (eta - 1)

    def with_derived_one_body(self, eta: int) -> "SpinBlockedRdms":
        d1a, d1b = self.contract_to_one_body(eta)
        return SpinBlockedRdms(
            d1a=d1a, d1b=d1b, d2aa=self.d2aa, d2bb=self.d2bb, d2ab=self.d2ab
        )

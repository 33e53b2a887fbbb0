"""Brute-force second-quantization oracles, independent of the package's
Slater-Condon and pair-annihilation code paths.

States are dicts mapping (alpha_mask, beta_mask) to complex amplitudes;
operators are applied literally, one creation/annihilation at a time, with
alpha modes ordered before beta modes in the Jordan-Wigner string.
"""

from __future__ import annotations

import numpy as np


def state_to_dict(state) -> dict[tuple[int, int], complex]:
    space = state.space
    out = {}
    for i, sa in enumerate(space.alpha_strings):
        for j, sb in enumerate(space.beta_strings):
            amp = state.amplitudes[i, j]
            if amp != 0:
                out[(sa, sb)] = complex(amp)
    return out


def _parity_below(mask: int, p: int) -> int:
    return (mask & ((1 << p) - 1)).bit_count() & 1


def apply_op(vec: dict, orbital: int, spin: str, dagger: bool) -> dict:
    """Apply a single a^+_p / a_p (spin = 'a' or 'b') to a state dict."""
    out: dict[tuple[int, int], complex] = {}
    for (sa, sb), amp in vec.items():
        if spin == "a":
            mask, other = sa, sb
            phase = 1.0
        else:
            mask = sb
            phase = -1.0 if (sa.bit_count() & 1) else 1.0
        occupied = bool(mask >> orbital & 1)
        if dagger == occupied:
            continue
        sign = -1.0 if _parity_below(mask, orbital) else 1.0
        new_mask = mask ^ (1 << orbital)
        key = (new_mask, sb) if spin == "a" else (sa, new_mask)
        out[key] = out.get(key, 0.0) + amp * sign * phase
    return out


def apply_op_string(vec: dict, ops) -> dict:
    """ops: sequence of (orbital, spin, dagger), applied right to left."""
    for orbital, spin, dagger in reversed(list(ops)):
        vec = apply_op(vec, orbital, spin, dagger)
        if not vec:
            return {}
    return vec


def overlap(bra: dict, ket: dict) -> complex:
    acc = 0.0 + 0.0j
    small, big = (bra, ket) if len(bra) <= len(ket) else (ket, bra)
    for key, amp in small.items():
        if key in big:
            if small is bra:
                acc += np.conj(amp) * big[key]
            else:
                acc += np.conj(big[key]) * amp
    return acc


def expectation(state_dict: dict, ops) -> complex:
    """<psi| op_string |psi> by literal operator application."""
    return overlap(state_dict, apply_op_string(state_dict, ops))


def brute_force_d2_block(state_dict: dict, pairs_bra, pairs_ket,
                         spins: tuple[str, str]) -> np.ndarray:
    """<a+_p a+_q a_s a_r> over (bra pair (p,q), ket pair (r,s)) grids."""
    sp, sq = spins
    out = np.zeros((len(pairs_bra), len(pairs_ket)), dtype=complex)
    for a, (p, q) in enumerate(pairs_bra):
        for b, (r, s) in enumerate(pairs_ket):
            out[a, b] = expectation(
                state_dict,
                [(p, sp, True), (q, sq, True), (s, sq, False), (r, sp, False)],
            )
    return out


def brute_force_q2_block(state_dict: dict, pairs_bra, pairs_ket,
                         spins: tuple[str, str]) -> np.ndarray:
    """<a_p a_q a+_s a+_r> (hole-hole ordering) over pair grids."""
    sp, sq = spins
    out = np.zeros((len(pairs_bra), len(pairs_ket)), dtype=complex)
    for a, (p, q) in enumerate(pairs_bra):
        for b, (r, s) in enumerate(pairs_ket):
            out[a, b] = expectation(
                state_dict,
                [(p, sp, False), (q, sq, False), (s, sq, True), (r, sp, True)],
            )
    return out


def brute_force_g2_block(state_dict: dict, pairs_bra, pairs_ket,
                         spins_bra: tuple[str, str],
                         spins_ket: tuple[str, str]) -> np.ndarray:
    """<a+_p a_q a+_s a_r> (particle-hole) with independent bra/ket spin labels."""
    sp, sq = spins_bra
    sr, ss = spins_ket
    out = np.zeros((len(pairs_bra), len(pairs_ket)), dtype=complex)
    for a, (p, q) in enumerate(pairs_bra):
        for b, (r, s) in enumerate(pairs_ket):
            out[a, b] = expectation(
                state_dict,
                [(p, sp, True), (q, sq, False), (s, ss, True), (r, sr, False)],
            )
    return out


def apply_hamiltonian(state_dict: dict, ints) -> dict:
    """H |psi> term by term from the integral lists (no Slater-Condon)."""
    n = ints.n_orb
    out: dict[tuple[int, int], complex] = {}

    def acc(vec, coeff):
        for key, amp in vec.items():
            out[key] = out.get(key, 0.0) + coeff * amp

    for key, amp in state_dict.items():
        out[key] = out.get(key, 0.0) + ints.e_core * amp
    for p in range(n):
        for q in range(n):
            h = ints.h1[p, q]
            if h == 0.0:
                continue
            for spin in ("a", "b"):
                acc(apply_op_string(state_dict,
                                    [(p, spin, True), (q, spin, False)]), h)
    for p in range(n):
        for r in range(n):
            for q in range(n):
                for s in range(n):
                    v = ints.get_eri(p, r, q, s)
                    if v == 0.0:
                        continue
                    for s1 in ("a", "b"):
                        for s2 in ("a", "b"):
                            vec = apply_op_string(
                                state_dict,
                                [(p, s1, True), (q, s2, True),
                                 (s, s2, False), (r, s1, False)],
                            )
                            acc(vec, 0.5 * v)
    return out


def brute_force_energy(state, ints) -> float:
    vec = state_to_dict(state)
    return overlap(vec, apply_hamiltonian(vec, ints)).real

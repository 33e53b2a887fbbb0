#!/usr/bin/env python3
"""Generate the FCIDUMP fixtures shipped with the package.

Systems (geometries in the GEOMETRIES table below):
  h2_sto3g      H2, STO-3G, R = 1.4 bohr, full space (2 orbitals)
  h4_sto3g      linear H4, STO-3G, 1.0 Angstrom spacing, full space (4 orbitals)
  n2_ccpvdz_10e8o   N2, cc-pVDZ (spherical), R = 1.0977 Angstrom, RHF
                    canonical orbitals, 2 frozen core + 8 active orbitals,
                    10 active electrons

The integral engine is a direct McMurchie-Davidson implementation
(cartesian Hermite expansions, Boys-function Coulomb recurrences, d
shells transformed to the 5 spherical components).  Restricted
Hartree-Fock with DIIS supplies the canonical orbitals; the active-space
reduction folds the frozen-core mean field into the one-body integrals
and the core energy.

Sanity anchors printed at the end (textbook values): H atom STO-3G RHF
-0.46658 Ha, H2 STO-3G RHF at 1.4 bohr -1.1167 Ha, N2 cc-pVDZ RHF about
-108.95 Ha.
"""

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammainc, gammaln

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from shadowrdm.integrals import MolecularIntegrals, write_fcidump  # noqa: E402

ANGSTROM = 1.8897259886

# exponents / contraction coefficients for normalized primitives
BASIS = {
    "H:STO-3G": [
        ("S", [(3.42525091, 0.15432897), (0.62391373, 0.53532814),
               (0.16885540, 0.44463454)]),
    ],
    "N:cc-pVDZ": [
        ("S", [(9046.0, 0.000700), (1357.0, 0.005389), (309.3, 0.027406),
               (87.73, 0.103207), (25.63, 0.278723), (8.060, 0.448540),
               (2.312, 0.278238), (0.4759, 0.015440), (0.11725, -0.002864)]),
        ("S", [(9046.0, -0.000153), (1357.0, -0.001208), (309.3, -0.005992),
               (87.73, -0.024544), (25.63, -0.067459), (8.060, -0.158078),
               (2.312, -0.121831), (0.4759, 0.549003), (0.11725, 0.578815)]),
        ("S", [(0.11725, 1.0)]),
        ("P", [(13.55, 0.039919), (2.917, 0.217169), (0.7973, 0.510319),
               (0.2185, 0.462206)]),
        ("P", [(0.2185, 1.0)]),
        ("D", [(0.8170, 1.0)]),
    ],
}

CHARGES = {"H": 1.0, "N": 7.0}

CART_COMPONENTS = {
    0: [(0, 0, 0)],
    1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
    2: [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)],
}

# normalized-cartesian -> real spherical (rows: m = -l..l)
SPH_FROM_CART = {
    0: np.array([[1.0]]),
    1: np.eye(3),
    2: np.array([
        [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [-0.5, 0.0, 0.0, -0.5, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        [np.sqrt(3.0) / 2.0, 0.0, 0.0, -np.sqrt(3.0) / 2.0, 0.0, 0.0],
    ]),
}


@dataclass
class Shell:
    l: int
    exps: np.ndarray
    coeffs: np.ndarray
    center: np.ndarray


def double_factorial(n: int) -> float:
    out = 1.0
    while n > 1:
        out *= n
        n -= 2
    return out


def primitive_norm(a: float, lx: int, ly: int, lz: int) -> float:
    l = lx + ly + lz
    pref = (2.0 * a / np.pi) ** 0.75 * (4.0 * a) ** (l / 2.0)
    den = np.sqrt(double_factorial(2 * lx - 1) * double_factorial(2 * ly - 1)
                  * double_factorial(2 * lz - 1))
    return pref / den


def boys(m_max: int, t: np.ndarray) -> np.ndarray:
    """F_m(t) for m = 0..m_max, arbitrary-shape t; returns (m_max+1, *t.shape)."""
    t = np.asarray(t, dtype=float)
    out = np.empty((m_max + 1,) + t.shape)
    small = t < 1e-12
    ts = np.where(small, 1.0, t)
    for m in range(m_max + 1):
        a = m + 0.5
        val = 0.5 * np.exp(gammaln(a)) * gammainc(a, ts) / ts**a
        series = 1.0 / (2 * m + 1) - t / (2 * m + 3) + t**2 / (2 * (2 * m + 5))
        out[m] = np.where(small, series, val)
    return out


def hermite_coeffs(la: int, lb: int, pa: np.ndarray, pb: np.ndarray,
                   p: np.ndarray, mu_q2: np.ndarray) -> np.ndarray:
    """E_t^{i,j} along one axis for all primitive pairs.

    pa = Px - Ax, pb = Px - Bx (arrays over primitive pairs), p = a + b,
    mu_q2 = (a b / p) (Ax - Bx)^2.  Returns (la+1, lb+1, la+lb+1, npairs).
    """
    npairs = p.shape[0]
    e = np.zeros((la + 1, lb + 1, la + lb + 2, npairs))
    e[0, 0, 0] = np.exp(-mu_q2)
    inv2p = 0.5 / p
    for i in range(la):
        for t in range(i + 2):
            val = pa * e[i, 0, t]
            if t > 0:
                val = val + inv2p * e[i, 0, t - 1] * 1.0
            val = val + (t + 1) * e[i, 0, t + 1]
            e[i + 1, 0, t] = val
    for i in range(la + 1):
        for j in range(lb):
            for t in range(i + j + 2):
                val = pb * e[i, j, t]
                if t > 0:
                    val = val + inv2p * e[i, j, t - 1]
                val = val + (t + 1) * e[i, j, t + 1]
                e[i, j + 1, t] = val
    return e[:, :, : la + lb + 1]


def hermite_coulomb(tmax: int, umax: int, vmax: int, p: np.ndarray,
                    pc: np.ndarray) -> np.ndarray:
    """R_{t,u,v}(p, PC) for all needed orders; pc has shape (npairs, 3)."""
    r2 = np.sum(pc * pc, axis=1)
    mtot = tmax + umax + vmax
    fm = boys(mtot, p * r2)
    base = (-2.0 * p) ** np.arange(mtot + 1)[:, None] * fm
    r = np.zeros((mtot + 1, tmax + 1, umax + 1, vmax + 1, p.shape[0]))
    r[:, 0, 0, 0] = base
    for order in range(1, tmax + umax + vmax + 1):
        for t in range(min(order, tmax) + 1):
            for u in range(min(order - t, umax) + 1):
                v = order - t - u
                if v < 0 or v > vmax:
                    continue
                for m in range(mtot - order + 1):
                    if t > 0:
                        val = pc[:, 0] * r[m + 1, t - 1, u, v]
                        if t > 1:
                            val = val + (t - 1) * r[m + 1, t - 2, u, v]
                    elif u > 0:
                        val = pc[:, 1] * r[m + 1, t, u - 1, v]
                        if u > 1:
                            val = val + (u - 1) * r[m + 1, t, u - 2, v]
                    else:
                        val = pc[:, 2] * r[m + 1, t, u, v - 1]
                        if v > 1:
                            val = val + (v - 1) * r[m + 1, t, u, v - 2]
                    r[m, t, u, v] = val
    return r[0]


@dataclass
class ShellPair:
    """Precomputed primitive-pair data for one ordered shell pair."""

    la: int
    lb: int
    p: np.ndarray          # (npairs,)
    coef: np.ndarray       # contraction * primitive norms, (npairs,)
    center_p: np.ndarray   # (npairs, 3)
    e_xyz: list            # axis -> (la+1, lb+1, la+lb+1, npairs)


def make_shell_pair(sa: Shell, sb: Shell) -> ShellPair:
    a = sa.exps[:, None]
    b = sb.exps[None, :]
    p = (a + b).ravel()
    mu = (a * b / (a + b)).ravel()
    ca = sa.coeffs[:, None]
    cb = sb.coeffs[None, :]
    coef = (ca * cb).ravel()
    pcenter = ((a[..., None] * sa.center + b[..., None] * sb.center)
               / (a + b)[..., None]).reshape(-1, 3)
    e_xyz = []
    for ax in range(3):
        qx = sa.center[ax] - sb.center[ax]
        pa = pcenter[:, ax] - sa.center[ax]
        pb = pcenter[:, ax] - sb.center[ax]
        e_xyz.append(hermite_coeffs(sa.l, sb.l, pa, pb, p, mu * qx * qx))
    return ShellPair(la=sa.l, lb=sb.l, p=p, coef=coef, center_p=pcenter,
                     e_xyz=e_xyz)


def norms_for_shell(shell: Shell) -> np.ndarray:
    return np.array([
        [primitive_norm(a, *comp) for comp in CART_COMPONENTS[shell.l]]
        for a in shell.exps
    ])  # (nprim, ncart)


def overlap_kinetic_block(sa: Shell, sb: Shell):
    """Cartesian overlap and kinetic blocks for one shell pair."""
    sp = make_shell_pair(sa, sb)
    na, nb = norms_for_shell(sa), norms_for_shell(sb)
    comps_a = CART_COMPONENTS[sa.l]
    comps_b = CART_COMPONENTS[sb.l]
    bexp = np.repeat(sb.exps[None, :], len(sa.exps), axis=0).ravel()
    s_blk = np.zeros((len(comps_a), len(comps_b)))
    t_blk = np.zeros_like(s_blk)
    pi_over_p = np.sqrt(np.pi / sp.p)

    # 1D overlap factors for angular momenta up to lb + 2 on the ket side
    ext = []
    aexp = np.repeat(sa.exps[:, None], len(sb.exps), axis=1).ravel()
    mu = aexp * bexp / sp.p
    for ax in range(3):
        qx = sa.center[ax] - sb.center[ax]
        pa = sp.center_p[:, ax] - sa.center[ax]
        pb = sp.center_p[:, ax] - sb.center[ax]
        ext.append(hermite_coeffs(sa.l, sb.l + 2, pa, pb, sp.p, mu * qx * qx))

    def s1d(ax, i, j):
        if i < 0 or j < 0:
            return np.zeros_like(sp.p)
        return ext[ax][i, j, 0] * pi_over_p

    for ia, ca in enumerate(comps_a):
        for ib, cb in enumerate(comps_b):
            pref = sp.coef * np.outer(na[:, ia], nb[:, ib]).ravel()
            sx = s1d(0, ca[0], cb[0])
            sy = s1d(1, ca[1], cb[1])
            sz = s1d(2, ca[2], cb[2])
            s_blk[ia, ib] = np.sum(pref * sx * sy * sz)
            t_axes = []
            for ax, (la_i, lb_j) in enumerate(zip(ca, cb)):
                tt = bexp * (2 * lb_j + 1) * s1d(ax, la_i, lb_j)
                tt = tt - 2.0 * bexp**2 * s1d(ax, la_i, lb_j + 2)
                if lb_j >= 2:
                    tt = tt - 0.5 * lb_j * (lb_j - 1) * s1d(ax, la_i, lb_j - 2)
                t_axes.append(tt)
            t_blk[ia, ib] = np.sum(pref * (t_axes[0] * sy * sz
                                           + sx * t_axes[1] * sz
                                           + sx * sy * t_axes[2]))
    return s_blk, t_blk


def nuclear_block(sa: Shell, sb: Shell, atoms) -> np.ndarray:
    sp = make_shell_pair(sa, sb)
    na, nb = norms_for_shell(sa), norms_for_shell(sb)
    comps_a = CART_COMPONENTS[sa.l]
    comps_b = CART_COMPONENTS[sb.l]
    ltot = sa.l + sb.l
    out = np.zeros((len(comps_a), len(comps_b)))
    for sym, center in atoms:
        pc = sp.center_p - np.asarray(center)
        r = hermite_coulomb(ltot, ltot, ltot, sp.p, pc)
        for ia, ca in enumerate(comps_a):
            for ib, cb in enumerate(comps_b):
                pref = sp.coef * np.outer(na[:, ia], nb[:, ib]).ravel()
                acc = np.zeros_like(sp.p)
                ex = sp.e_xyz[0][ca[0], cb[0]]
                ey = sp.e_xyz[1][ca[1], cb[1]]
                ez = sp.e_xyz[2][ca[2], cb[2]]
                for t in range(ca[0] + cb[0] + 1):
                    for u in range(ca[1] + cb[1] + 1):
                        for v in range(ca[2] + cb[2] + 1):
                            acc = acc + ex[t] * ey[u] * ez[v] * r[t, u, v]
                out[ia, ib] -= CHARGES[sym] * np.sum(
                    pref * (2.0 * np.pi / sp.p) * acc
                )
    return out


def eri_block(sa, sb, sc, sd) -> np.ndarray:
    """(ab|cd) cartesian block, chemustry notation, fully contracted."""
    bra = make_shell_pair(sa, sb)
    ket = make_shell_pair(sc, sd)
    na, nb = norms_for_shell(sa), norms_for_shell(sb)
    nc, nd = norms_for_shell(sc), norms_for_shell(sd)
    lab = sa.l + sb.l
    lcd = sc.l + sd.l
    nbra, nket = len(bra.p), len(ket.p)

    pq = bra.center_p[:, None, :] - ket.center_p[None, :, :]
    alpha = (bra.p[:, None] * ket.p[None, :]) / (bra.p[:, None] + ket.p[None, :])
    r = hermite_coulomb(lab + lcd, lab + lcd, lab + lcd,
                        alpha.ravel(), pq.reshape(-1, 3))
    r = r.reshape(lab + lcd + 1, lab + lcd + 1, lab + lcd + 1, nbra, nket)
    pref = (2.0 * np.pi**2.5
            / (bra.p[:, None] * ket.p[None, :]
               * np.sqrt(bra.p[:, None] + ket.p[None, :])))

    comps = [CART_COMPONENTS[s.l] for s in (sa, sb, sc, sd)]
    out = np.zeros(tuple(len(c) for c in comps))
    for ia, capx in enumerate(comps[0]):
        for ib, cbpx in enumerate(comps[1]):
            ebra = [bra.e_xyz[ax][capx[ax], cbpx[ax]] for ax in range(3)]
            cbra = bra.coef * np.outer(na[:, ia], nb[:, ib]).ravel()
            for ic, ccpx in enumerate(comps[2]):
                for idd, cdpx in enumerate(comps[3]):
                    eket = [ket.e_xyz[ax][ccpx[ax], cdpx[ax]] for ax in range(3)]
                    cket = ket.coef * np.outer(nc[:, ic], nd[:, idd]).ravel()
                    acc = np.zeros((nbra, nket))
                    for t in range(capx[0] + cbpx[0] + 1):
                        for u in range(capx[1] + cbpx[1] + 1):
                            for v in range(capx[2] + cbpx[2] + 1):
                                etuv = ebra[0][t] * ebra[1][u] * ebra[2][v]
                                for tt in range(ccpx[0] + cdpx[0] + 1):
                                    for uu in range(ccpx[1] + cdpx[1] + 1):
                                        for vv in range(ccpx[2] + cdpx[2] + 1):
                                            sign = (-1.0) ** (tt + uu + vv)
                                            acc += (
                                                sign
                                                * etuv[:, None]
                                                * (eket[0][tt] * eket[1][uu]
                                                   * eket[2][vv])[None, :]
                                                * r[t + tt, u + uu, v + vv]
                                            )
                    out[ia, ib, ic, idd] = np.sum(
                        cbra[:, None] * cket[None, :] * pref * acc
                    )
    return out


def build_molecule(atoms):
    shells = []
    for sym, center in atoms:
        for key, groups in BASIS.items():
            el = key.split(":")[0]
            if el != sym:
                continue
            for ltype, prims in groups:
                l = {"S": 0, "P": 1, "D": 2}[ltype]
                exps = np.array([p[0] for p in prims])
                coeffs = np.array([p[1] for p in prims])
                shells.append(Shell(l=l, exps=exps, coeffs=coeffs,
                                    center=np.asarray(center, dtype=float)))
            break
        else:
            raise KeyError(f"no basis for element {sym}")
    return shells


def assemble_integrals(atoms, shells):
    sizes = [len(CART_COMPONENTS[s.l]) for s in shells]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    nc = offs[-1]
    s_mat = np.zeros((nc, nc))
    t_mat = np.zeros((nc, nc))
    v_mat = np.zeros((nc, nc))
    for i, sa in enumerate(shells):
        for j, sb in enumerate(shells):
            if j < i:
                continue
            sb_blk, tb_blk = overlap_kinetic_block(sa, sb)
            vb_blk = nuclear_block(sa, sb, atoms)
            sl_i = slice(offs[i], offs[i + 1])
            sl_j = slice(offs[j], offs[j + 1])
            s_mat[sl_i, sl_j] = sb_blk
            t_mat[sl_i, sl_j] = tb_blk
            v_mat[sl_i, sl_j] = vb_blk
            if i != j:
                s_mat[sl_j, sl_i] = sb_blk.T
                t_mat[sl_j, sl_i] = tb_blk.T
                v_mat[sl_j, sl_i] = vb_blk.T
    eri = np.zeros((nc, nc, nc, nc))
    nsh = len(shells)
    for i in range(nsh):
        for j in range(i + 1):
            for k in range(nsh):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    blk = eri_block(shells[i], shells[j], shells[k], shells[l])
                    for (a, b, c, d), val in np.ndenumerate(blk):
                        aa, bb = offs[i] + a, offs[j] + b
                        cc, dd = offs[k] + c, offs[l] + d
                        for (x, y) in ((aa, bb), (bb, aa)):
                            for (z, w) in ((cc, dd), (dd, cc)):
                                eri[x, y, z, w] = val
                                eri[z, w, x, y] = val
    return s_mat, t_mat, v_mat, eri


def cart_to_sph_matrix(shells):
    blocks = [SPH_FROM_CART[s.l] for s in shells]
    nsph = sum(b.shape[0] for b in blocks)
    ncart = sum(b.shape[1] for b in blocks)
    m = np.zeros((nsph, ncart))
    ro = co = 0
    for b in blocks:
        m[ro: ro + b.shape[0], co: co + b.shape[1]] = b
        ro += b.shape[0]
        co += b.shape[1]
    return m


def normalize_contracted(s_mat):
    scale = 1.0 / np.sqrt(np.diag(s_mat))
    return scale


def nuclear_repulsion(atoms) -> float:
    e = 0.0
    for i, (sym_i, ri) in enumerate(atoms):
        for j, (sym_j, rj) in enumerate(atoms):
            if j <= i:
                continue
            e += CHARGES[sym_i] * CHARGES[sym_j] / np.linalg.norm(
                np.asarray(ri) - np.asarray(rj)
            )
    return e


def rhf(s, hcore, eri, n_elec, max_iter=200, tol=1e-10):
    n_occ = n_elec // 2
    evals, evecs = np.linalg.eigh(s)
    x = evecs * (1.0 / np.sqrt(evals)) @ evecs.T
    fock = hcore.copy()
    energy = 0.0
    diis_f, diis_e = [], []
    for it in range(max_iter):
        f_ortho = x @ fock @ x
        eps, c_ortho = np.linalg.eigh(f_ortho)
        c = x @ c_ortho
        c_occ = c[:, :n_occ]
        dm = 2.0 * c_occ @ c_occ.T
        j = np.einsum("pqrs,rs->pq", eri, dm)
        k = np.einsum("prqs,rs->pq", eri, dm)
        fock_new = hcore + j - 0.5 * k
        energy_new = 0.5 * np.sum(dm * (hcore + fock_new))
        err = fock_new @ dm @ s - s @ dm @ fock_new
        diis_f.append(fock_new)
        diis_e.append(err)
        if len(diis_f) > 8:
            diis_f.pop(0)
            diis_e.pop(0)
        if np.max(np.abs(err)) < tol and it > 1:
            return energy_new, c, eps
        if len(diis_f) > 1:
            m = len(diis_f)
            bmat = -np.ones((m + 1, m + 1))
            bmat[m, m] = 0.0
            for a in range(m):
                for b in range(m):
                    bmat[a, b] = np.sum(diis_e[a] * diis_e[b])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                coeff = np.linalg.solve(bmat, rhs)[:m]
                fock = sum(cc * ff for cc, ff in zip(coeff, diis_f))
            except np.linalg.LinAlgError:
                fock = fock_new
        else:
            fock = fock_new
        energy = energy_new
    raise RuntimeError(f"SCF did not converge; last E={energy}")


def mo_integrals(c, hcore, eri):
    h1 = c.T @ hcore @ c
    tmp = np.einsum("pqrs,pi->iqrs", eri, c, optimize=True)
    tmp = np.einsum("iqrs,qj->ijrs", tmp, c, optimize=True)
    tmp = np.einsum("ijrs,rk->ijks", tmp, c, optimize=True)
    return h1, np.einsum("ijks,sl->ijkl", tmp, c, optimize=True)


def active_space(h1_mo, eri_mo, e_nuc, n_core, n_active):
    core = list(range(n_core))
    act = list(range(n_core, n_core + n_active))
    e_core = e_nuc + 2.0 * sum(h1_mo[c, c] for c in core)
    for c in core:
        for cp in core:
            e_core += 2.0 * eri_mo[c, c, cp, cp] - eri_mo[c, cp, cp, c]
    h_eff = np.zeros((n_active, n_active))
    for a, p in enumerate(act):
        for b, q in enumerate(act):
            v = h1_mo[p, q]
            for c in core:
                v += 2.0 * eri_mo[p, q, c, c] - eri_mo[p, c, c, q]
            h_eff[a, b] = v
    eri_act = eri_mo[np.ix_(act, act, act, act)]
    return e_core, h_eff, eri_act


def to_molecular_integrals(n_orb, n_alpha, n_beta, e_core, h1, eri,
                           threshold=1e-12) -> MolecularIntegrals:
    ints = MolecularIntegrals(n_orb=n_orb, n_alpha=n_alpha, n_beta=n_beta,
                              e_core=float(e_core), h1=np.where(
                                  np.abs(h1) < threshold, 0.0, h1))
    for i in range(n_orb):
        for j in range(i + 1):
            for k in range(n_orb):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    v = eri[i, j, k, l]
                    if abs(v) >= threshold:
                        ints.set_eri(i, j, k, l, float(v))
    return ints


GEOMETRIES = {
    "h2_sto3g": [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 1.4))],
    "h4_sto3g": [("H", (0.0, 0.0, k * 1.0 * ANGSTROM)) for k in range(4)],
    "n2_ccpvdz_10e8o": [("N", (0.0, 0.0, 0.0)),
                        ("N", (0.0, 0.0, 1.0977 * ANGSTROM))],
}


def build_system(name):
    atoms = GEOMETRIES[name]
    shells = build_molecule(atoms)
    s_cart, t_cart, v_cart, eri_cart = assemble_integrals(atoms, shells)
    # contracted primitives are not normalized as AOs yet
    scale = normalize_contracted(s_cart)
    s_cart = s_cart * np.outer(scale, scale)
    t_cart = t_cart * np.outer(scale, scale)
    v_cart = v_cart * np.outer(scale, scale)
    eri_cart = np.einsum("p,q,r,s,pqrs->pqrs", scale, scale, scale, scale,
                         eri_cart, optimize=True)
    m = cart_to_sph_matrix(shells)
    s = m @ s_cart @ m.T
    hcore = m @ (t_cart + v_cart) @ m.T
    eri = np.einsum("ap,bq,cr,ds,pqrs->abcd", m, m, m, m, eri_cart,
                    optimize=True)
    # renormalize spherical AOs (the d0/d2 combinations are already unit
    # norm for exact cartesian overlaps, this guards against roundoff)
    scale = normalize_contracted(s)
    s = s * np.outer(scale, scale)
    hcore = hcore * np.outer(scale, scale)
    eri = np.einsum("p,q,r,s,pqrs->pqrs", scale, scale, scale, scale, eri,
                    optimize=True)
    e_nuc = nuclear_repulsion(atoms)
    n_elec = int(sum(CHARGES[sym] for sym, _ in atoms))
    e_rhf, c, eps = rhf(s, hcore, eri, n_elec)
    return {
        "atoms": atoms, "s": s, "hcore": hcore, "eri": eri, "e_nuc": e_nuc,
        "n_elec": n_elec, "e_rhf": e_rhf + e_nuc, "c": c, "eps": eps,
    }


def main():
    out_dir = Path(__file__).resolve().parent.parent / "src" / "shadowrdm" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}

    # H atom anchor (1 electron: energy = lowest hcore eigenvalue)
    shells = build_molecule([("H", (0.0, 0.0, 0.0))])
    s, t, v, _ = assemble_integrals([("H", (0.0, 0.0, 0.0))], shells)
    scale = normalize_contracted(s)
    hval = np.linalg.eigvalsh(
        np.linalg.inv(s * np.outer(scale, scale))
        @ ((t + v) * np.outer(scale, scale))
    )[0]
    print(f"H atom STO-3G lowest orbital energy: {hval:.6f} (ref -0.466582)")
    summary["h_atom_orbital"] = hval

    for name, (n_core, n_active) in (
        ("h2_sto3g", (0, 2)),
        ("h4_sto3g", (0, 4)),
        ("n2_ccpvdz_10e8o", (2, 8)),
    ):
        sys_data = build_system(name)
        print(f"{name}: E_nuc = {sys_data['e_nuc']:.10f}  "
              f"E_RHF = {sys_data['e_rhf']:.10f}")
        h1_mo, eri_mo = mo_integrals(sys_data["c"], sys_data["hcore"],
                                     sys_data["eri"])
        e_core, h_eff, eri_act = active_space(
            h1_mo, eri_mo, sys_data["e_nuc"], n_core, n_active
        )
        n_act_elec = sys_data["n_elec"] - 2 * n_core
        ints = to_molecular_integrals(
            n_active, n_act_elec // 2, n_act_elec // 2, e_core, h_eff, eri_act
        )
        path = out_dir / f"{name}.fcidump"
        path.write_text(write_fcidump(ints))
        print(f"  wrote {path} (n_orb={n_active}, e_core={e_core:.10f})")
        summary[name] = {
            "e_nuc": sys_data["e_nuc"],
            "e_rhf": sys_data["e_rhf"],
            "e_core": e_core,
            "n_orb": n_active,
            "n_elec_active": n_act_elec,
        }

    ref_path = Path(__file__).resolve().parent / "fixture_summary.json"
    ref_path.write_text(json.dumps(summary, indent=2))
    print(f"summary written to {ref_path}")


if __name__ == "__main__":
    main()

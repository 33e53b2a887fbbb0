"""Spin-adapted DQG semidefinite program assembly and shadow constraints.

Block registry: 1-RDM and hole blocks per spin, geminal 2-RDM blocks
(same-spin on ordered pairs p < q, alpha-beta on the full n^2 grid), the
hole-hole blocks with the same pair structure, the coupled
particle-hole block [alpha-alpha; beta-beta] of dimension 2n^2, and the
two mixed particle-hole blocks.  The hole and particle-hole maps are the
normal-ordered delta expansions of <a a a+ a+> and <a+ a a+ a>; the
beta-alpha 2-RDM block is never stored (index exchange on alpha-beta).

Inequalities enter as pairs of equality rows padded by fresh 1x1 slack
blocks, one pair per constrained element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from shadowrdm.integrals import MolecularIntegrals, energy_from_rdms
from shadowrdm.rdms import SpinBlockedRdms, same_spin_pairs, same_spin_pair_index
from shadowrdm.sdp import SdpProblem, SdpSolution
from shadowrdm.shadow import DiagonalSample, OrbitalRotation, compound_matrix_k2, cross_compound_k2

BLOCK_NAMES = (
    "d1a", "d1b", "q1a", "q1b",
    "d2aa", "d2bb", "d2ab",
    "q2aa", "q2bb", "q2ab",
    "g2big", "g2ab", "g2ba",
)


@dataclass
class ConstraintReport:
    """Row bookkeeping per constraint family; totals must equal the
    assembled problem's row count."""

    counts: dict[str, int] = field(default_factory=dict)
    slack_blocks: int = 0
    total_rows: int = 0
    shadow_ball_raw_tuples: int = 0

    def bump(self, family: str, rows: int) -> None:
        self.counts[family] = self.counts.get(family, 0) + rows
        self.total_rows += rows


@dataclass
class V2rdmLayout:
    """Index maps from physical RDM symbols to SDP block coordinates."""

    n_orb: int
    n_alpha: int
    n_beta: int
    blocks: dict[str, int]
    report: ConstraintReport = field(default_factory=ConstraintReport)
    n_slacks: int = 0

    @property
    def eta(self) -> int:
        return self.n_alpha + self.n_beta

    @property
    def pairs(self):
        return same_spin_pairs(self.n_orb)

    @property
    def pair_index(self):
        return same_spin_pair_index(self.n_orb)

    def ab_index(self, p: int, q: int) -> int:
        return p * self.n_orb + q

    def new_slack(self, problem: SdpProblem) -> int:
        idx = problem.add_block(f"slack{self.n_slacks:06d}", 1)
        self.n_slacks += 1
        self.report.slack_blocks += 1
        return idx


def _upper(indices):
    for a in indices:
        for b in indices:
            if a <= b:
                yield a, b


def build_nrep_problem(ints: MolecularIntegrals) -> tuple[SdpProblem, V2rdmLayout]:
    """DQG problem: PSD blocks, trace and contraction rows, hole maps and
    particle-hole maps; objective initialized to zero."""
    n = ints.n_orb
    na, nb = ints.n_alpha, ints.n_beta
    eta = na + nb
    pairs = same_spin_pairs(n)
    pidx = same_spin_pair_index(n)
    npair = len(pairs)
    nsq = n * n

    problem = SdpProblem()
    dims = {
        "d1a": n, "d1b": n, "q1a": n, "q1b": n,
        "d2aa": npair, "d2bb": npair, "d2ab": nsq,
        "q2aa": npair, "q2bb": npair, "q2ab": nsq,
        "g2big": 2 * nsq, "g2ab": nsq, "g2ba": nsq,
    }
    blocks = {name: problem.add_block(name, dims[name]) for name in BLOCK_NAMES}
    layout = V2rdmLayout(n_orb=n, n_alpha=na, n_beta=nb, blocks=blocks)
    B = blocks

    # -- traces: total (assembled convention) plus per spin sector
    total = [(B["d2aa"], a, a, 2.0) for a in range(npair)]
    total += [(B["d2bb"], a, a, 2.0) for a in range(npair)]
    total += [(B["d2ab"], a, a, 2.0) for a in range(nsq)]
    problem.add_row(total, float(eta * (eta - 1)))
    problem.add_row([(B["d2aa"], a, a, 2.0) for a in range(npair)], float(na * (na - 1)))
    problem.add_row([(B["d2bb"], a, a, 2.0) for a in range(npair)], float(nb * (nb - 1)))
    problem.add_row([(B["d2ab"], a, a, 1.0) for a in range(nsq)], float(na * nb))
    layout.report.bump("trace", 4)

    # -- contractions of the 2-RDM onto the 1-RDM, spin resolved
    def ab(p, q):
        return p * n + q

    rows = 0
    for i, j in _upper(range(n)):
        entries = [(B["d2ab"], ab(i, k), ab(j, k), 1.0) for k in range(n)]
        entries.append((B["d1a"], i, j, -float(nb)))
        problem.add_row(entries, 0.0)
        entries = [(B["d2ab"], ab(k, i), ab(k, j), 1.0) for k in range(n)]
        entries.append((B["d1b"], i, j, -float(na)))
        problem.add_row(entries, 0.0)
        rows += 2
        for name, d1name, count in (("d2aa", "d1a", na), ("d2bb", "d1b", nb)):
            entries = []
            for k in range(n):
                if k == i or k == j:
                    continue
                sgn = 1.0
                if i > k:
                    sgn = -sgn
                if j > k:
                    sgn = -sgn
                entries.append((B[name], pidx[i, k], pidx[j, k], sgn))
            entries.append((B[d1name], i, j, -float(count - 1)))
            problem.add_row(entries, 0.0)
            rows += 1
    layout.report.bump("contraction", rows)

    # -- one-particle hole map: q1 = 1 - d1
    rows = 0
    for i, j in _upper(range(n)):
        for d1, q1 in (("d1a", "q1a"), ("d1b", "q1b")):
            problem.add_row(
                [(B[d1], i, j, 1.0), (B[q1], i, j, 1.0)],
                1.0 if i == j else 0.0,
            )
            rows += 1
    layout.report.bump("q_map", rows)

    # -- two-particle hole maps (q2 = <a a a+ a+> expansion)
    rows = 0
    for (I, J) in _upper(range(npair)):
        i, j = pairs[I]
        k, l = pairs[J]
        for d2, q2, d1 in (("d2aa", "q2aa", "d1a"), ("d2bb", "q2bb", "d1b")):
            entries = [(B[q2], I, J, 1.0), (B[d2], J, I, -1.0)]
            if j == l:
                entries.append((B[d1], k, i, 1.0))
            if i == l:
                entries.append((B[d1], k, j, -1.0))
            if j == k:
                entries.append((B[d1], l, i, -1.0))
            if i == k:
                entries.append((B[d1], l, j, 1.0))
            rhs = float((i == k) * (j == l) - (i == l) * (j == k))
            problem.add_row(entries, rhs)
            rows += 1
    for (I, J) in _upper(range(nsq)):
        i, j = divmod(I, n)
        k, l = divmod(J, n)
        entries = [(B["q2ab"], I, J, 1.0), (B["d2ab"], J, I, -1.0)]
        if j == l:
            entries.append((B["d1a"], k, i, 1.0))
        if i == k:
            entries.append((B["d1b"], l, j, 1.0))
        problem.add_row(entries, float((i == k) * (j == l)))
        rows += 1
    layout.report.bump("q_map", rows)

    # -- particle-hole maps (g2 = <a+ a a+ a> expansion)
    rows = 0
    for (I, J) in _upper(range(nsq)):
        i, j = divmod(I, n)
        k, l = divmod(J, n)
        # mixed-spin blocks
        entries = [(B["g2ab"], I, J, 1.0), (B["d2ab"], ab(i, l), ab(k, j), 1.0)]
        if j == l:
            entries.append((B["d1a"], i, k, -1.0))
        problem.add_row(entries, 0.0)
        entries = [(B["g2ba"], I, J, 1.0), (B["d2ab"], ab(l, i), ab(j, k), 1.0)]
        if j == l:
            entries.append((B["d1b"], i, k, -1.0))
        problem.add_row(entries, 0.0)
        rows += 2
        # coupled block, same-spin quadrants
        for off, d2, d1 in ((0, "d2aa", "d1a"), (nsq, "d2bb", "d1b")):
            entries = [(B["g2big"], off + I, off + J, 1.0)]
            if i != l and k != j:
                sgn = 1.0
                if i > l:
                    sgn = -sgn
                if k > j:
                    sgn = -sgn
                entries.append((B[d2], pidx[i, l], pidx[k, j], sgn))
            if j == l:
                entries.append((B[d1], i, k, -1.0))
            problem.add_row(entries, 0.0)
            rows += 1
    # coupled block, alpha-beta quadrant (full grid; the transposed
    # quadrant is the same constraint by symmetry of the variable block)
    for I in range(nsq):
        i, j = divmod(I, n)
        for J in range(nsq):
            k, l = divmod(J, n)
            entries = [
                (B["g2big"], I, nsq + J, 1.0),
                (B["d2ab"], ab(i, l), ab(j, k), -1.0),
            ]
            problem.add_row(entries, 0.0)
            rows += 1
    layout.report.bump("g_map", rows)

    problem.set_cost([])
    return problem, layout


# ---------------------------------------------------------------------------
# shadow-derived constraints


def _independent_elements(layout: V2rdmLayout):
    """(block name, I, J) for every independent 2-RDM element."""
    npair = len(layout.pairs)
    nsq = layout.n_orb**2
    for name, dim in (("d2aa", npair), ("d2bb", npair), ("d2ab", nsq)):
        for I, J in _upper(range(dim)):
            yield name, I, J


def add_shadow_ball(problem: SdpProblem, layout: V2rdmLayout,
                    noisy: SpinBlockedRdms, epsilon1: float) -> ConstraintReport:
    """Elementwise ball |2D - noisy| <= epsilon1 on every independent
    element of each 2-RDM spin block, via paired slack equalities."""
    if epsilon1 <= 0.0:
        raise ValueError("epsilon1 must be positive")
    rows = 0
    for name, I, J in _independent_elements(layout):
        center = float(getattr(noisy, name)[I, J].real)
        blk = layout.blocks[name]
        lo = layout.new_slack(problem)
        hi = layout.new_slack(problem)
        problem.add_row([(blk, I, J, 1.0), (lo, 0, 0, -1.0)], center - epsilon1)
        problem.add_row([(blk, I, J, 1.0), (hi, 0, 0, 1.0)], center + epsilon1)
        rows += 2
    layout.report.bump("shadow_ball", rows)
    layout.report.shadow_ball_raw_tuples = 2 * (2 * layout.n_orb) ** 4
    return layout.report


def _diagonal_kernels(layout: V2rdmLayout, rotation: OrbitalRotation):
    """Per-block matrices whose row (pq) holds the pair amplitudes of the
    rotated diagonal functional X^{pq} = sum conj(A[pq,I]) A[pq,J] D[I,J]."""
    lam_a = compound_matrix_k2(rotation.u_alpha, layout.pairs)
    lam_b = compound_matrix_k2(rotation.u_beta, layout.pairs)
    ab = cross_compound_k2(rotation.u_alpha, rotation.u_beta)
    return {"d2aa": lam_a, "d2bb": lam_b, "d2ab": ab}


def add_diagonal_constraints(problem: SdpProblem, layout: V2rdmLayout,
                             samples: list[DiagonalSample],
                             epsilon2: float) -> ConstraintReport:
    """Rotated-frame diagonal windows S - eps2 <= X^{pq} <= S + eps2 for
    each basis, expressed as dense rows over the 2-RDM blocks."""
    rows = 0
    for sample in samples:
        kernels = _diagonal_kernels(layout, sample.rotation)
        for name, values in (("d2aa", sample.s_aa), ("d2bb", sample.s_bb),
                             ("d2ab", sample.s_ab)):
            kern = kernels[name]
            blk = layout.blocks[name]
            dim = kern.shape[0]
            for pq in range(dim):
                amp = kern[pq]
                coeff = np.real(np.outer(np.conj(amp), amp))
                entries = []
                for I in range(dim):
                    row_c = coeff[I]
                    entries.append((blk, I, I, float(row_c[I])))
                    for J in range(I + 1, dim):
                        w = row_c[J] + coeff[J, I]
                        if w != 0.0:
                            entries.append((blk, I, J, float(w)))
                target = float(values[pq])
                lo = layout.new_slack(problem)
                hi = layout.new_slack(problem)
                problem.add_row(entries + [(lo, 0, 0, -1.0)], target - epsilon2)
                problem.add_row(entries + [(hi, 0, 0, 1.0)], target + epsilon2)
                rows += 2
    layout.report.bump("diagonal", rows)
    return layout.report


def energy_cost_entries(layout: V2rdmLayout, ints: MolecularIntegrals):
    """Raw cost entries of the electronic energy functional (no core)."""
    n = layout.n_orb
    B = layout.blocks
    tei = ints.two_electron_tensor()
    entries = []
    for i in range(n):
        for j in range(n):
            if ints.h1[i, j] != 0.0:
                entries.append((B["d1a"], i, j, float(ints.h1[i, j])))
                entries.append((B["d1b"], i, j, float(ints.h1[i, j])))
    pairs = layout.pairs
    for a, (p, q) in enumerate(pairs):
        for b, (r, s) in enumerate(pairs):
            w = float(tei[p, r, q, s] - tei[p, s, q, r])
            if w != 0.0:
                entries.append((B["d2aa"], a, b, w))
                entries.append((B["d2bb"], a, b, w))
    c_ab = tei.transpose(0, 2, 1, 3).reshape(n * n, n * n)
    for a in range(n * n):
        for b in range(n * n):
            if c_ab[a, b] != 0.0:
                entries.append((B["d2ab"], a, b, float(c_ab[a, b])))
    return entries


def add_energy_window(problem: SdpProblem, layout: V2rdmLayout,
                      ints: MolecularIntegrals, e_gs: float,
                      epsilon_gs: float) -> ConstraintReport:
    """Window E_gs - eps <= Tr(H 2D) <= E_gs + eps on the energy
    functional; e_gs is the total energy, the core constant is removed."""
    if epsilon_gs <= 0.0:
        raise ValueError("epsilon_gs must be positive")
    entries = energy_cost_entries(layout, ints)
    center = e_gs - ints.e_core
    lo = layout.new_slack(problem)
    hi = layout.new_slack(problem)
    problem.add_row(entries + [(lo, 0, 0, -1.0)], center - epsilon_gs)
    problem.add_row(entries + [(hi, 0, 0, 1.0)], center + epsilon_gs)
    layout.report.bump("energy_window", 2)
    return layout.report


OBJECTIVE_KINDS = ("energy", "trace_norm", "energy_minus_trace")


def build_objective(layout: V2rdmLayout, ints: MolecularIntegrals,
                    kind: str):
    """Cost entries for the requested objective.

    The nuclear norm of a PSD-constrained block is its trace, so the
    trace-norm objective carries the assembled-convention weight 2 on
    every 2-RDM block diagonal and is constant on the feasible set.
    """
    if kind not in OBJECTIVE_KINDS:
        raise ValueError(f"unknown objective kind {kind!r}")
    B = layout.blocks
    npair = len(layout.pairs)
    nsq = layout.n_orb**2
    trace_entries = []
    for name, dim in (("d2aa", npair), ("d2bb", npair), ("d2ab", nsq)):
        trace_entries += [(B[name], a, a, 2.0) for a in range(dim)]
    if kind == "trace_norm":
        return trace_entries
    energy = energy_cost_entries(layout, ints)
    if kind == "energy":
        return energy
    return energy + [(blk, i, j, -w) for (blk, i, j, w) in trace_entries]


def extract_rdms(layout: V2rdmLayout, solution: SdpSolution) -> SpinBlockedRdms:
    """Read the optimized blocks back into a SpinBlockedRdms."""
    if solution.status == "numerical_failure":
        raise ValueError("cannot extract RDMs from a failed solve")
    B = layout.blocks
    return SpinBlockedRdms(
        d1a=solution.x_blocks[B["d1a"]].copy(),
        d1b=solution.x_blocks[B["d1b"]].copy(),
        d2aa=solution.x_blocks[B["d2aa"]].copy(),
        d2bb=solution.x_blocks[B["d2bb"]].copy(),
        d2ab=solution.x_blocks[B["d2ab"]].copy(),
    )


def hole_blocks_from_rdms(layout: V2rdmLayout, rdms: SpinBlockedRdms):
    """q1/q2/g2 block values implied by the delta-expansion maps; used to
    inject a full feasible point for a given 1-/2-RDM."""
    n = layout.n_orb
    pairs = layout.pairs
    pidx = layout.pair_index
    npair = len(pairs)
    nsq = n * n
    eye = np.eye(n)
    out = {
        "q1a": eye - rdms.d1a.real,
        "q1b": eye - rdms.d1b.real,
    }
    for d2, d1, q2 in (("d2aa", "d1a", "q2aa"), ("d2bb", "d1b", "q2bb")):
        gem = getattr(rdms, d2).real
        one = getattr(rdms, d1).real
        q = np.zeros((npair, npair))
        for I, (i, j) in enumerate(pairs):
            for J, (k, l) in enumerate(pairs):
                v = gem[J, I]
                v -= (j == l) * one[k, i]
                v += (i == l) * one[k, j]
                v += (j == k) * one[l, i]
                v -= (i == k) * one[l, j]
                v += (i == k) * (j == l) - (i == l) * (j == k)
                q[I, J] = v
        out[q2] = q
    q = np.zeros((nsq, nsq))
    for I in range(nsq):
        i, j = divmod(I, n)
        for J in range(nsq):
            k, l = divmod(J, n)
            v = rdms.d2ab[J, I].real
            v -= (j == l) * rdms.d1a[k, i].real
            v -= (i == k) * rdms.d1b[l, j].real
            v += (i == k) * (j == l)
            q[I, J] = v
    out["q2ab"] = q

    def d2aa_full(gem, i, l, k, j):
        if i == l or k == j:
            return 0.0
        sgn = 1.0
        if i > l:
            sgn = -sgn
        if k > j:
            sgn = -sgn
        return sgn * gem[pidx[i, l], pidx[k, j]].real

    g_ab = np.zeros((nsq, nsq))
    g_ba = np.zeros((nsq, nsq))
    g_big = np.zeros((2 * nsq, 2 * nsq))
    for I in range(nsq):
        i, j = divmod(I, n)
        for J in range(nsq):
            k, l = divmod(J, n)
            g_ab[I, J] = (j == l) * rdms.d1a[i, k].real - rdms.d2ab[i * n + l, k * n + j].real
            g_ba[I, J] = (j == l) * rdms.d1b[i, k].real - rdms.d2ab[l * n + i, j * n + k].real
            g_big[I, J] = (j == l) * rdms.d1a[i, k].real - d2aa_full(rdms.d2aa, i, l, k, j)
            g_big[nsq + I, nsq + J] = (
                (j == l) * rdms.d1b[i, k].real - d2aa_full(rdms.d2bb, i, l, k, j)
            )
            g_big[I, nsq + J] = rdms.d2ab[i * n + l, j * n + k].real
            g_big[nsq + I, J] = rdms.d2ab[l * n + i, k * n + j].real
    out["g2ab"] = g_ab
    out["g2ba"] = g_ba
    out["g2big"] = g_big
    return out


def optimized_energy(layout: V2rdmLayout, ints: MolecularIntegrals,
                     solution: SdpSolution) -> float:
    """Total energy of the optimized point, recomputed from the extracted
    RDMs rather than the solver's objective value."""
    return energy_from_rdms(ints, extract_rdms(layout, solution))

"""Block-structured semidefinite programs and a boundary-point solver.

Problem form: min <C, X> subject to <A_r, X> = b_r and every block of X
positive semidefinite.  Symmetric coefficient matrices store the upper
triangle once; an off-diagonal coefficient w contributes w * (X_ij + X_ji)
to inner products (standard symmetric vectorization, sqrt(2) scaling in
the internal svec coordinates).

The solver alternates a conjugate-gradient solve of the dual normal
system with a spectral split of the dual slack, adapting the augmented
Lagrangian weight from the primal/dual residual ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SdpBlock:
    name: str
    dim: int


class SdpProblem:
    """Mutable assembly container; compiled to immutable arrays for solves."""

    def __init__(self):
        self.blocks: list[SdpBlock] = []
        self.block_index: dict[str, int] = {}
        self.rows: list[dict[tuple[int, int, int], float]] = []
        self.b: list[float] = []
        self.cost: dict[tuple[int, int, int], float] = {}

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_block(self, name: str, dim: int) -> int:
        if name in self.block_index:
            raise ValueError(f"duplicate block name {name!r}")
        if dim < 1:
            raise ValueError("block dimension must be positive")
        self.blocks.append(SdpBlock(name, dim))
        self.block_index[name] = len(self.blocks) - 1
        return len(self.blocks) - 1

    @staticmethod
    def _canonical(entries) -> dict[tuple[int, int, int], float]:
        out: dict[tuple[int, int, int], float] = {}
        for blk, i, j, v in entries:
            if i == j:
                key, w = (blk, i, i), v
            elif i < j:
                key, w = (blk, i, j), 0.5 * v
            else:
                key, w = (blk, j, i), 0.5 * v
            out[key] = out.get(key, 0.0) + w
        return {k: w for k, w in out.items() if w != 0.0}

    def add_row(self, entries, rhs: float) -> int:
        """Append the equality sum_entries v * X[blk][i, j] = rhs.

        Raw (i, j) entries may appear in either order; they are folded
        onto the canonical upper triangle.
        """
        canon = self._canonical(entries)
        for blk, i, j in canon:
            d = self.blocks[blk].dim
            if not (0 <= i <= j < d):
                raise ValueError(f"entry ({i},{j}) outside block of dim {d}")
        self.rows.append(canon)
        self.b.append(float(rhs))
        return len(self.rows) - 1

    def set_cost(self, entries) -> None:
        """Replace the objective with sum v * X[blk][i, j] (raw entries)."""
        self.cost = self._canonical(entries)

    # -- svec layout -------------------------------------------------------

    def svec_layout(self):
        offsets = []
        off = 0
        for blk in self.blocks:
            offsets.append(off)
            off += blk.dim * (blk.dim + 1) // 2
        return offsets, off

    @staticmethod
    def _triu_pos(i: int, j: int, d: int) -> int:
        return i * d - i * (i - 1) // 2 + (j - i)

    def _svec_from_entries(self, entries: dict, offsets, n_svec) -> np.ndarray:
        vec = np.zeros(n_svec)
        for (blk, i, j), w in entries.items():
            pos = offsets[blk] + self._triu_pos(i, j, self.blocks[blk].dim)
            vec[pos] += w if i == j else _SQRT2 * w
        return vec

    def compile(self) -> "CompiledSdp":
        offsets, n_svec = self.svec_layout()
        data, indices, indptr = [], [], [0]
        for row in self.rows:
            for (blk, i, j), w in row.items():
                pos = offsets[blk] + self._triu_pos(i, j, self.blocks[blk].dim)
                indices.append(pos)
                data.append(w if i == j else _SQRT2 * w)
            indptr.append(len(indices))
        a_mat = sp.csr_matrix(
            (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr)),
            shape=(len(self.rows), n_svec),
        )
        c_vec = self._svec_from_entries(self.cost, offsets, n_svec)
        return CompiledSdp(
            problem=self,
            a_mat=a_mat,
            b=np.array(self.b, dtype=float),
            c=c_vec,
            offsets=offsets,
            n_svec=n_svec,
        )


@dataclass
class CompiledSdp:
    problem: SdpProblem
    a_mat: sp.csr_matrix
    b: np.ndarray
    c: np.ndarray
    offsets: list[int]
    n_svec: int

    def __post_init__(self):
        self._triu = [np.triu_indices(blk.dim) for blk in self.problem.blocks]
        self._scale = []
        for blk, (iu, ju) in zip(self.problem.blocks, self._triu):
            s = np.where(iu == ju, 1.0, _SQRT2)
            self._scale.append(s)

    def unpack(self, vec: np.ndarray) -> list[np.ndarray]:
        mats = []
        for k, blk in enumerate(self.problem.blocks):
            d = blk.dim
            seg = vec[self.offsets[k]: self.offsets[k] + d * (d + 1) // 2]
            m = np.zeros((d, d))
            iu, ju = self._triu[k]
            m[iu, ju] = seg / self._scale[k]
            m = m + np.triu(m, 1).T
            mats.append(m)
        return mats

    def pack(self, mats: list[np.ndarray]) -> np.ndarray:
        vec = np.zeros(self.n_svec)
        for k, blk in enumerate(self.problem.blocks):
            iu, ju = self._triu[k]
            d = blk.dim
            vec[self.offsets[k]: self.offsets[k] + d * (d + 1) // 2] = (
                mats[k][iu, ju] * self._scale[k]
            )
        return vec


@dataclass
class SolverOptions:
    tol: float = 1e-6
    max_iter: int = 40000
    sigma0: float = 1.0
    sigma_adapt: bool = True
    adapt_every: int = 10
    adapt_factor: float = 1.5
    adapt_band: float = 10.0
    cg_max_iter: int = 400


@dataclass
class SdpSolution:
    x_blocks: list[np.ndarray]
    y: np.ndarray
    z_blocks: list[np.ndarray]
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    status: str
    objective: float
    x_svec: np.ndarray = field(repr=False, default=None)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def project_psd(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral split s = s_plus + s_minus with s_plus PSD, s_minus NSD."""
    if np.max(np.abs(s - s.T)) > 1e-9:
        raise ValueError("matrix is not symmetric within 1e-9")
    sym = 0.5 * (s + s.T)
    evals, evecs = np.linalg.eigh(sym)
    pos = evecs * np.maximum(evals, 0.0) @ evecs.T
    return pos, sym - pos


def solve_bpsdp(problem: SdpProblem, opts: SolverOptions | None = None,
                warm_start: SdpSolution | None = None) -> SdpSolution:
    """Boundary-point (augmented dual Lagrangian) solve of the problem."""
    opts = opts or SolverOptions()
    comp = problem.compile()
    a_mat = comp.a_mat
    aat = (a_mat @ a_mat.T).tocsr()
    jacobi = aat.diagonal().copy()
    jacobi[jacobi <= 0.0] = 1.0
    precond = spla.LinearOperator(aat.shape, matvec=lambda v: v / jacobi)

    m = len(comp.b)
    n = comp.n_svec
    if warm_start is not None and warm_start.x_svec is not None \
            and len(warm_start.x_svec) == n and len(warm_start.y) == m:
        x = warm_start.x_svec.copy()
        y = warm_start.y.copy()
        z = comp.pack(warm_start.z_blocks)
    else:
        x = np.zeros(n)
        y = np.zeros(m)
        z = np.zeros(n)
    sigma = opts.sigma0

    norm_b = 1.0 + np.linalg.norm(comp.b)
    norm_c = 1.0 + np.linalg.norm(comp.c)

    one_dim = np.array(
        [k for k, blk in enumerate(problem.blocks) if blk.dim == 1],
        dtype=np.int64,
    )
    one_dim_pos = np.array([comp.offsets[k] for k in one_dim], dtype=np.int64)
    big_blocks = [k for k, blk in enumerate(problem.blocks) if blk.dim > 1]

    status = "max_iter"
    primal = dual = gap = np.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        ax = a_mat @ x
        rhs = a_mat @ (comp.c - z) + (comp.b - ax) / sigma
        cg_rtol = min(1e-2, max(0.05 * min(primal, dual), 1e-11))
        y_new, info = spla.cg(aat, rhs, x0=y, rtol=cg_rtol, atol=0.0,
                              maxiter=opts.cg_max_iter, M=precond)
        if not np.all(np.isfinite(y_new)):
            status = "numerical_failure"
            break
        y = y_new

        w = comp.c - a_mat.T @ y - x / sigma
        z = np.zeros(n)
        x_new = np.zeros(n)
        if len(one_dim_pos):
            wv = w[one_dim_pos]
            z[one_dim_pos] = np.maximum(wv, 0.0)
            x_new[one_dim_pos] = -sigma * np.minimum(wv, 0.0)
        w_mats = comp.unpack(w)
        for k in big_blocks:
            plus, minus = project_psd(w_mats[k])
            blk = problem.blocks[k]
            iu, ju = comp._triu[k]
            seg = slice(comp.offsets[k],
                        comp.offsets[k] + blk.dim * (blk.dim + 1) // 2)
            z[seg] = plus[iu, ju] * comp._scale[k]
            x_new[seg] = -sigma * minus[iu, ju] * comp._scale[k]
        x = x_new

        ax = a_mat @ x
        primal = np.linalg.norm(ax - comp.b) / norm_b
        dual = np.linalg.norm(a_mat.T @ y + z - comp.c) / norm_c
        by = float(comp.b @ y)
        cx = float(comp.c @ x)
        gap = abs(cx - by) / (1.0 + abs(by))
        if max(primal, dual, gap) <= opts.tol:
            status = "converged"
            break
        if opts.sigma_adapt and it % opts.adapt_every == 0 and dual > 0:
            # smaller sigma pushes primal feasibility, larger pushes dual
            ratio = primal / dual
            if ratio > opts.adapt_band:
                sigma = max(sigma / opts.adapt_factor, 1e-8)
            elif ratio < 1.0 / opts.adapt_band:
                sigma = min(sigma * opts.adapt_factor, 1e8)

    return SdpSolution(
        x_blocks=comp.unpack(x),
        y=y.copy(),
        z_blocks=comp.unpack(z),
        primal_residual=float(primal),
        dual_residual=float(dual),
        gap=float(gap),
        iterations=it,
        status=status,
        objective=float(comp.c @ x),
        x_svec=x,
    )


def residuals(problem: SdpProblem, solution: SdpSolution) -> tuple[float, float, float]:
    """(primal, dual, gap) recomputed from the assembly-level problem data,
    independently of the solver's compiled representation."""
    x = solution.x_blocks
    z = solution.z_blocks
    if len(x) != len(problem.blocks):
        raise ValueError("solution block count does not match problem")
    for mat, blk in zip(x, problem.blocks):
        if mat.shape != (blk.dim, blk.dim):
            raise ValueError("solution block dimensions do not match problem")

    def pairing(entries, mats):
        total = 0.0
        for (blk, i, j), w in entries.items():
            if i == j:
                total += w * mats[blk][i, i]
            else:
                total += w * (mats[blk][i, j] + mats[blk][j, i])
        return total

    ax = np.array([pairing(row, x) for row in problem.rows])
    b = np.array(problem.b)
    primal = np.linalg.norm(ax - b) / (1.0 + np.linalg.norm(b))

    # dual slack per block: C - A^T(y) - Z, assembled densely
    dual_sq = 0.0
    c_norm_sq = 0.0
    for k, blk in enumerate(problem.blocks):
        resid = -z[k].copy()
        c_blk = np.zeros((blk.dim, blk.dim))
        for (bb, i, j), w in problem.cost.items():
            if bb == k:
                c_blk[i, j] += w
                if i != j:
                    c_blk[j, i] += w
        resid += c_blk
        c_norm_sq += float(np.sum(c_blk**2))
        for row, yr in zip(problem.rows, solution.y):
            for (bb, i, j), w in row.items():
                if bb == k:
                    resid[i, j] -= yr * w
                    if i != j:
                        resid[j, i] -= yr * w
        dual_sq += float(np.sum(resid**2))
    dual = math.sqrt(dual_sq) / (1.0 + math.sqrt(c_norm_sq))

    cx = pairing(problem.cost, x)
    by = float(np.array(problem.b) @ solution.y)
    gap = abs(cx - by) / (1.0 + abs(by))
    return float(primal), float(dual), float(gap)


# ---------------------------------------------------------------------------
# SDPA sparse interchange format


def write_sdpa(problem: SdpProblem) -> str:
    """SDPA sparse text: comment, m, nblocks, block dims, rhs line, then
    `matno blkno i j value` entries (1-based, upper triangle), matno 0
    being the objective.  All blocks are written with positive dimension."""
    lines = [f"* {len(problem.rows)} rows, {len(problem.blocks)} blocks"]
    lines.append(f"{len(problem.rows)}")
    lines.append(f"{len(problem.blocks)}")
    lines.append(" ".join(str(blk.dim) for blk in problem.blocks))
    lines.append(" ".join(f"{v:.16g}" for v in problem.b))

    def emit(matno: int, entries: dict):
        for (blk, i, j) in sorted(entries):
            w = entries[(blk, i, j)]
            lines.append(f"{matno} {blk + 1} {i + 1} {j + 1} {w:.16g}")

    emit(0, problem.cost)
    for r, row in enumerate(problem.rows):
        emit(r + 1, row)
    return "\n".join(lines) + "\n"


def read_sdpa(text: str) -> SdpProblem:
    """Parse SDPA sparse text; negative block dimensions (diagonal blocks)
    are expanded into that many 1x1 blocks."""
    raw = [ln for ln in text.splitlines()]
    body = []
    for ln in raw:
        s = ln.strip()
        if not s or s.startswith("*") or s.startswith('"'):
            continue
        body.append(s)
    if len(body) < 4:
        raise ValueError("truncated SDPA content")
    m = int(body[0].split()[0])
    nblocks = int(body[1].split()[0])
    dim_tokens = body[2].replace(",", " ").replace("{", " ").replace("}", " ")
    dims = [int(t) for t in dim_tokens.split()]
    if len(dims) != nblocks:
        raise ValueError("block dimension count disagrees with header")
    rhs = [float(t) for t in body[3].replace(",", " ").split()]
    if len(rhs) != m:
        raise ValueError("rhs length disagrees with row count")

    problem = SdpProblem()
    expand: list[tuple[int, int]] = []  # sdpa block -> (first index, span)
    for k, d in enumerate(dims):
        if d > 0:
            idx = problem.add_block(f"blk{k}", d)
            expand.append((idx, 0))
        else:
            first = len(problem.blocks)
            for t in range(-d):
                problem.add_block(f"blk{k}_{t}", 1)
            expand.append((first, -d))

    rows_entries: list[list[tuple[int, int, int, float]]] = [[] for _ in range(m)]
    cost_entries: list[tuple[int, int, int, float]] = []
    for ln in body[4:]:
        toks = ln.split()
        if len(toks) != 5:
            raise ValueError(f"bad SDPA entry line: {ln!r}")
        matno, blkno = int(toks[0]), int(toks[1]) - 1
        i, j = int(toks[2]) - 1, int(toks[3]) - 1
        v = float(toks[4])
        first, span = expand[blkno]
        if span:
            if i != j or i >= span:
                raise ValueError("off-diagonal entry in a diagonal block")
            target, i, j = first + i, 0, 0
        else:
            target = first
        if i > j:
            i, j = j, i
        raw_entry = (target, i, j, v if i == j else 2.0 * v)
        if matno == 0:
            cost_entries.append(raw_entry)
        else:
            rows_entries[matno - 1].append(raw_entry)
    problem.set_cost(cost_entries)
    for entries, rhs_v in zip(rows_entries, rhs):
        problem.add_row(entries, rhs_v)
    return problem

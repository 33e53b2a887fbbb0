"""FCIDUMP parsing and energy evaluation from spin-blocked RDMs.

Two-electron integrals are stored in chemists' notation (ij|kl) with
8-fold permutational symmetry, keyed by a canonical index tuple.  All
public indices are 0-based; the 1-based convention of the FCIDUMP text
format is translated at the parse/write boundary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from shadowrdm.rdms import SpinBlockedRdms, same_spin_pairs


class FcidumpError(ValueError):
    """Malformed FCIDUMP content; message carries the offending line number."""


def _canonical_eri_key(i: int, j: int, k: int, l: int) -> tuple[int, int, int, int]:
    """Canonical representative of the 8-fold symmetry orbit of (ij|kl)."""
    ij = (i, j) if i <= j else (j, i)
    kl = (k, l) if k <= l else (l, k)
    return ij + kl if ij <= kl else kl + ij


@dataclass
class MolecularIntegrals:
    """Core energy plus one- and two-electron integrals of an active space.

    h1 is a symmetric (n_orb, n_orb) array; h2 maps canonical 0-based
    chemists' index tuples to values, with unlisted integrals zero.
    The container is treated as immutable after construction.
    """

    n_orb: int
    n_alpha: int
    n_beta: int
    e_core: float
    h1: np.ndarray
    h2: dict[tuple[int, int, int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        self.h1 = np.asarray(self.h1, dtype=float)
        if self.h1.shape != (self.n_orb, self.n_orb):
            raise ValueError(
                f"h1 shape {self.h1.shape} does not match n_orb={self.n_orb}"
            )
        if not (0 <= self.n_alpha <= self.n_orb and 0 <= self.n_beta <= self.n_orb):
            raise ValueError("electron counts must lie in [0, n_orb]")

    @property
    def n_elec(self) -> int:
        return self.n_alpha + self.n_beta

    def get_eri(self, i: int, j: int, k: int, l: int) -> float:
        """Chemists' (ij|kl), 0-based, resolved through the symmetry group."""
        return self.h2.get(_canonical_eri_key(i, j, k, l), 0.0)

    def set_eri(self, i: int, j: int, k: int, l: int, value: float) -> None:
        self.h2[_canonical_eri_key(i, j, k, l)] = value

    def two_electron_tensor(self) -> np.ndarray:
        """Dense (n,n,n,n) array of chemists' (ij|kl) values."""
        n = self.n_orb
        tei = np.zeros((n, n, n, n))
        for (i, j, k, l), v in self.h2.items():
            for a, b in ((i, j), (j, i)):
                for c, d in ((k, l), (l, k)):
                    tei[a, b, c, d] = v
                    tei[c, d, a, b] = v
        return tei


_HEADER_KV = re.compile(r"([A-Za-z][A-Za-z0-9_]*)\s*=\s*([^=,\s]+(?:\s*,\s*[+-]?\d+)*)")


def parse_fcidump(text) -> MolecularIntegrals:
    """Parse FCIDUMP text (a string or an iterable of lines).

    The namelist header `&FCI NORB=..,NELEC=..,MS2=.. ... &END` (or
    terminated by `/`) is followed by whitespace-separated data lines
    `value i j k l` with 1-based indices: i=j=k=l=0 carries the core
    energy, k=l=0 carries h1[i][j], and otherwise the line is (ij|kl).
    ORBSYM/ISYM entries are accepted and ignored.
    """
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in text]

    # Locate the header block.
    header_parts: list[str] = []
    data_start = None
    for ln_no, line in enumerate(lines):
        stripped = line.strip()
        header_parts.append(stripped)
        if "&END" in stripped.upper() or stripped.endswith("/") or stripped == "/":
            data_start = ln_no + 1
            break
    if data_start is None:
        raise FcidumpError("line 1: header not terminated by &END or /")

    header = " ".join(header_parts)
    if "&FCI" not in header.upper():
        raise FcidumpError("line 1: malformed header, missing &FCI")
    header = re.sub(r"&END", "", header, flags=re.IGNORECASE)

    fields: dict[str, str] = {}
    for key, value in _HEADER_KV.findall(header):
        fields[key.upper()] = value

    def _header_int(name: str, default: int | None = None) -> int:
        if name not in fields:
            if default is not None:
                return default
            raise FcidumpError(f"line 1: malformed header, missing {name}")
        try:
            return int(fields[name].split(",")[0])
        except ValueError as exc:
            raise FcidumpError(f"line 1: malformed header value for {name}") from exc

    n_orb = _header_int("NORB")
    n_elec = _header_int("NELEC")
    ms2 = _header_int("MS2", default=0)
    if n_orb < 1:
        raise FcidumpError("line 1: NORB must be positive")
    if (n_elec + ms2) % 2 != 0 or (n_elec - ms2) % 2 != 0:
        raise FcidumpError("line 1: NELEC and MS2 have incompatible parity")
    n_alpha = (n_elec + ms2) // 2
    n_beta = (n_elec - ms2) // 2

    e_core = 0.0
    h1 = np.zeros((n_orb, n_orb))
    h2: dict[tuple[int, int, int, int], float] = {}

    for ln_no in range(data_start, len(lines)):
        human_no = ln_no + 1
        tokens = lines[ln_no].split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise FcidumpError(f"line {human_no}: expected `value i j k l`")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
        except ValueError as exc:
            raise FcidumpError(f"line {human_no}: unreadable value") from exc
        try:
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError as exc:
            raise FcidumpError(f"line {human_no}: non-integer indices") from exc
        for idx in (i, j, k, l):
            if idx < 0 or idx > n_orb:
                raise FcidumpError(f"line {human_no}: index {idx} out of range")
        if i == j == k == l == 0:
            e_core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {human_no}: incomplete one-electron indices")
            h1[i - 1, j - 1] = value
            h1[j - 1, i - 1] = value
        elif min(i, j, k, l) >= 1:
            h2[_canonical_eri_key(i - 1, j - 1, k - 1, l - 1)] = value
        else:
            raise FcidumpError(f"line {human_no}: mixed zero/nonzero indices")

    return MolecularIntegrals(
        n_orb=n_orb, n_alpha=n_alpha, n_beta=n_beta, e_core=e_core, h1=h1, h2=h2
    )


def write_fcidump(ints: MolecularIntegrals) -> str:
    """Serialize to FCIDUMP text; parse_fcidump(write_fcidump(x)) round-trips."""
    out = [
        f"&FCI NORB={ints.n_orb},NELEC={ints.n_elec},"
        f"MS2={ints.n_alpha - ints.n_beta},",
        " ORBSYM=" + ",".join(["1"] * ints.n_orb) + ",",
        " ISYM=1,",
        "&END",
    ]
    for (i, j, k, l) in sorted(ints.h2):
        out.append(f"{ints.h2[(i, j, k, l)]:23.16e} {i + 1:3d} {j + 1:3d} {k + 1:3d} {l + 1:3d}")
    for i in range(ints.n_orb):
        for j in range(i + 1):
            if ints.h1[i, j] != 0.0:
                out.append(f"{ints.h1[i, j]:23.16e} {i + 1:3d} {j + 1:3d}   0   0")
    out.append(f"{ints.e_core:23.16e}   0   0   0   0")
    return "\n".join(out) + "\n"


def energy_from_rdms(ints: MolecularIntegrals, rdms: SpinBlockedRdms) -> float:
    """Energy e_core + h1.1D + (1/2) <two-electron>.2D of spin-blocked RDMs.

    Same-spin geminal blocks contract against (pr|qs) - (ps|qr); the
    alpha-beta block against (pr|qs).  Linear in every RDM block; for the
    RDMs of a Hamiltonian eigenstate this returns the eigenvalue.
    """
    n = ints.n_orb
    if rdms.n_orb != n:
        raise ValueError(f"RDMs dimensioned for {rdms.n_orb} orbitals, expected {n}")
    tei = ints.two_electron_tensor()

    energy = ints.e_core
    energy += np.sum(ints.h1 * (rdms.d1a + rdms.d1b)).real

    # alpha-beta: full n^2 pair grid, coefficient (pr|qs)
    c_ab = tei.transpose(0, 2, 1, 3).reshape(n * n, n * n)
    energy += np.sum(c_ab * rdms.d2ab).real

    # same-spin: ordered-pair geminal basis, antisymmetrized coefficient
    pairs = same_spin_pairs(n)
    npair = len(pairs)
    c_aa = np.zeros((npair, npair))
    for a, (p, q) in enumerate(pairs):
        for b, (r, s) in enumerate(pairs):
            c_aa[a, b] = tei[p, r, q, s] - tei[p, s, q, r]
    energy += np.sum(c_aa * (rdms.d2aa + rdms.d2bb)).real
    return float(energy)

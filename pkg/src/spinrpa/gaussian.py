"""Subsystem entropies and negativities of the Gaussian RPA vacuum.

A subsystem A of the vacuum is again Gaussian, fully characterized by the
truncated contraction matrix

    D_A = [[F_A, G_A], [conj(G_A), I + conj(F_A)]]

restricted to the sites of A.  The eigenvalues of D_A M_A (M = diag(I, -I))
come in pairs (f, -1-f); the branch {f_alpha >= 0} is the symplectic spectrum
of the reduced state, i.e. the thermal-like occupations of its normal modes.
The entanglement entropy (in bits) is

    S(A) = sum_alpha [(1 + f) log2(1 + f) - f log2 f].

Partial transposition of the modes in C (for a bipartition (B, C) of A) swaps
F and G entries between B and C, transposes F within C and conjugates G within
C.  The transposed spectrum {f~} can dip below zero (never below -1/2, which
trace preservation forbids) and the negativity is

    N_BC = 1/2 (prod_{f~ < 0} 1/(1 + 2 f~) - 1).

For a bipartition (A, complement) of the globally pure vacuum the negativity
only needs the reduced spectrum:

    N = 1/2 (prod_alpha (sqrt(f) + sqrt(1 + f))^2 - 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpectrumError
from .rpa import ContractionData

KIND_REDUCED = "reduced"
KIND_TRANSPOSED = "partial-transposed"

#: reduced occupations in [-CLAMP_TOL, 0) are numerical noise and clamped to 0
CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class SubsystemSpec:
    """An ordered site list A with an optional bipartition (B, C) of A."""

    sites: tuple
    split: tuple | None = None  # (b_sites, c_sites)

    def __post_init__(self):
        sites = tuple(int(i) for i in self.sites)
        object.__setattr__(self, "sites", sites)
        if len(set(sites)) != len(sites):
            raise SpectrumError(f"duplicate sites in subsystem {sites}")
        if self.split is not None:
            b, c = self.split
            b = tuple(int(i) for i in b)
            c = tuple(int(i) for i in c)
            object.__setattr__(self, "split", (b, c))
            if set(b) & set(c):
                raise SpectrumError("bipartition halves overlap")
            if set(b) | set(c) != set(sites):
                raise SpectrumError("bipartition halves must partition the subsystem")

    def validate(self, n: int) -> None:
        if not self.sites:
            raise SpectrumError("subsystem is empty")
        if any(i < 0 or i >= n for i in self.sites):
            raise SpectrumError(f"site index out of range for n={n}: {self.sites}")


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Sorted symplectic occupation numbers of a (possibly transposed) subsystem."""

    values: np.ndarray
    kind: str = KIND_REDUCED


def subsystem_contraction(contr: ContractionData, sites) -> np.ndarray:
    """Truncated contraction matrix of the sites in A (2m x 2m)."""
    sites = list(sites)
    if not sites:
        raise SpectrumError("subsystem is empty")
    n = contr.n
    if any(i < 0 or i >= n for i in sites):
        raise SpectrumError(f"site index out of range for n={n}: {sites}")
    idx = np.asarray(sites)
    f = contr.normal[np.ix_(idx, idx)]
    g = contr.anomalous[np.ix_(idx, idx)]
    eye = np.eye(len(sites))
    return np.vstack([np.hstack([f, g]), np.hstack([g.conj(), eye + f.conj()])])


def symplectic_spectrum(d_a: np.ndarray, transposed: bool = False) -> SymplecticSpectrum:
    """Occupation branch of the eigenvalues of D_A M_A.

    The eigenvalues split cleanly at -1/2: the branch above it is {f} (or
    {f~}), the branch below holds the partners {-1-f}.  Pairing is verified to
    1e-9 and a failure raises with the residual.
    """
    m = d_a.shape[0] // 2
    dm = d_a.copy()
    dm[:, m:] *= -1.0
    evals = np.linalg.eigvals(dm)
    imax = float(np.max(np.abs(evals.imag))) if evals.size else 0.0
    if imax > 1e-9 * max(1.0, float(np.max(np.abs(evals.real)))):
        raise SpectrumError(f"complex symplectic spectrum: max imaginary part {imax:.3e}")
    evals = np.sort(evals.real)
    upper = evals[evals >= -0.5]
    lower = evals[evals < -0.5]
    if len(upper) != m or len(lower) != m:
        raise SpectrumError(
            f"spectrum does not split into {m} occupation pairs: "
            f"{len(upper)} above -1/2, {len(lower)} below"
        )
    partner = np.sort(-1.0 - lower)
    residual = float(np.max(np.abs(np.sort(upper) - partner)))
    if residual > 1e-9 * max(1.0, float(np.max(np.abs(evals)))):
        raise SpectrumError(f"(f, -1-f) pairing violated: residual {residual:.3e}")

    values = np.sort(upper)
    if transposed:
        if np.any(values <= -0.5):
            raise SpectrumError("transposed occupation at or below -1/2: inconsistent state")
        return SymplecticSpectrum(values=values, kind=KIND_TRANSPOSED)
    if np.any(values < -CLAMP_TOL):
        raise SpectrumError(
            f"negative reduced occupation {float(values.min()):.3e} beyond tolerance"
        )
    return SymplecticSpectrum(values=np.where(values < 0.0, 0.0, values), kind=KIND_REDUCED)


def _entropy_terms(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    out = (1.0 + f) * np.log2(1.0 + f)
    pos = f > 0.0
    out[pos] -= f[pos] * np.log2(f[pos])
    return out


def entanglement_entropy(spectrum: SymplecticSpectrum) -> float:
    """Bosonic entanglement entropy in bits, with 0 log 0 = 0."""
    if spectrum.kind != KIND_REDUCED:
        raise SpectrumError("entropy needs a reduced (not transposed) spectrum")
    f = spectrum.values
    if np.any(f < 0.0):
        raise SpectrumError("negative occupation in reduced spectrum")
    return float(np.sum(_entropy_terms(f)))


def partial_transpose(d_a: np.ndarray, b_idx, c_idx) -> np.ndarray:
    """Partial transpose of D_A over the modes in C.

    ``b_idx`` / ``c_idx`` index positions within A (0..m-1) and must be
    disjoint and exhaustive.  The replacement rules are

        F~ = [[F_BB, G_BC], [G_BC^H, F_CC^T]],
        G~ = [[G_BB, F_BC], [F_BC^T, conj(G_CC)]],

    which for real contractions is the plain F <-> G swap of the off-diagonal
    blocks.  Hermiticity of F~ and symmetry of G~ hold by construction.
    """
    m = d_a.shape[0] // 2
    b = np.asarray(list(b_idx), dtype=int)
    c = np.asarray(list(c_idx), dtype=int)
    if set(b.tolist()) & set(c.tolist()):
        raise SpectrumError("transpose halves overlap")
    if set(b.tolist()) | set(c.tolist()) != set(range(m)):
        raise SpectrumError("transpose halves must cover the subsystem")
    f = d_a[:m, :m]
    g = d_a[:m, m:]
    ft = np.array(f, dtype=complex)
    gt = np.array(g, dtype=complex)
    if c.size:
        ft[np.ix_(c, c)] = f[np.ix_(c, c)].T
        gt[np.ix_(c, c)] = g[np.ix_(c, c)].conj()
        if b.size:
            ft[np.ix_(b, c)] = g[np.ix_(b, c)]
            ft[np.ix_(c, b)] = g[np.ix_(b, c)].conj().T
            gt[np.ix_(b, c)] = f[np.ix_(b, c)]
            gt[np.ix_(c, b)] = f[np.ix_(b, c)].T
    if np.max(np.abs(ft.imag)) == 0.0 and np.max(np.abs(gt.imag)) == 0.0:
        ft, gt = ft.real, gt.real
    eye = np.eye(m)
    return np.vstack([np.hstack([ft, gt]), np.hstack([gt.conj(), eye + ft.conj()])])


def negativity(spectrum: SymplecticSpectrum) -> float:
    """N = 1/2 (prod_{f~ < 0} 1/(1 + 2 f~) - 1); zero without negative values."""
    if spectrum.kind != KIND_TRANSPOSED:
        raise SpectrumError("negativity needs a partial-transposed spectrum")
    f = spectrum.values
    if np.any(f <= -0.5):
        raise SpectrumError("transposed occupation at or below -1/2: inconsistent state")
    neg = f[f < -1e-11]
    if neg.size == 0:
        return 0.0
    return 0.5 * (float(np.prod(1.0 / (1.0 + 2.0 * neg))) - 1.0)


def global_negativity(spectrum: SymplecticSpectrum) -> float:
    """Negativity of the (A, complement) bipartition of the pure vacuum."""
    if spectrum.kind != KIND_REDUCED:
        raise SpectrumError("global negativity needs the reduced spectrum of A")
    f = np.maximum(spectrum.values, 0.0)
    return 0.5 * (float(np.prod((np.sqrt(f) + np.sqrt(1.0 + f)) ** 2)) - 1.0)


def subsystem_entropy(contr: ContractionData, sites) -> float:
    """Convenience: reduced spectrum then entropy for the sites in A."""
    return entanglement_entropy(symplectic_spectrum(subsystem_contraction(contr, sites)))


def subsystem_negativity(contr: ContractionData, sites, b_sites, c_sites) -> float:
    """Convenience: negativity between B and C inside A (site labels)."""
    sites = list(sites)
    pos = {site: k for k, site in enumerate(sites)}
    b_idx = [pos[s] for s in b_sites]
    c_idx = [pos[s] for s in c_sites]
    d_a = subsystem_contraction(contr, sites)
    return negativity(symplectic_spectrum(partial_transpose(d_a, b_idx, c_idx), transposed=True))

"""Parity restoration for broken-phase results and low-occupation spin densities.

Below the critical field the mean field breaks the spin parity
P_z = exp[i pi sum_i (s_iz - s_i)]; the tilted product state and its mirror
(theta -> -theta) are degenerate, and the physical ground states are their
definite-parity combinations.  The overlap of the two mean fields is
(B/B_c)^{2 n s}, and the reduced state of a subsystem A of n_A sites carries
the overlap factor r^{2 s n_A} with r = B/B_c.

When that factor is negligible, the parity-projected reduced state is an
equal mixture of two orthogonally supported copies, so

    S -> S + 1,     N(A, complement) -> 2 N + 1/2,

while negativities of bipartitions strictly inside A are unchanged.  When the
factor is not negligible the entropy shift is instead the mixing entropy of
q_+- = (1 +- r^{2 s n_A})/2.

The low-occupation spin density of a small subsystem (valid to first order in
the average occupation, i.e. zero or one boson per site) lives on the basis
{|0>, |1_i>, |1_i 1_j>} and reads, in the local frame,

    rho_A = [[ gA gA†, 0, gA ],
             [ 0, F_A - G_A G_A†, 0 ],
             [ gA†, 0, 1 - tr F_A + gA† gA ]]

with gA the column of pair amplitudes G_{ij} (i < j; diagonal G_{ii} is of
higher order and dropped).  In the broken phase the matrix is rotated to the
lab frame and its parity-breaking elements removed, which is exactly the
equal-mixture projection.  At this order the entropy is carried by the
one-boson block rho1 = F_A - G_A G_A†,

    S approx tr rho1 (log2 e - log2 rho1),

and the leading negativity of a split (B, C) of A is the sum of the singular
values of the cross block G_BC.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np
import scipy.linalg

from .errors import OracleError, SpectrumError
from .meanfield import MeanFieldSolution, PHASE_BROKEN, PHASE_NORMAL
from .rpa import ContractionData

#: overlap factors below this are treated as orthogonal support (the +1 shift)
DEFAULT_EPS_OVERLAP = 1e-3

#: recommended single-site occupation bound for the truncated spin density
OCCUPATION_BOUND = 0.1


def binary_entropy(q: float) -> float:
    """Mixing entropy -q log2 q - (1-q) log2 (1-q) in bits."""
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return float(-q * np.log2(q) - (1.0 - q) * np.log2(1.0 - q))


@dataclass(frozen=True)
class ParityContext:
    """Phase information needed to restore parity in reported quantities.

    ``ratio`` is r = B/B_c = cos(theta) in the broken phase (ignored in the
    normal phase); ``spin`` the physical spin quantum number entering the
    overlap exponents; ``eps_overlap`` the negligibility threshold deciding
    between the +1 shift and the binary mixing entropy.
    """

    phase: str
    ratio: float = 0.0
    spin: float = 0.5
    eps_overlap: float = DEFAULT_EPS_OVERLAP

    @classmethod
    def from_mean_field(cls, sol: MeanFieldSolution, spin: float | None = None,
                        eps_overlap: float = DEFAULT_EPS_OVERLAP) -> "ParityContext":
        if sol.phase not in (PHASE_NORMAL, PHASE_BROKEN):
            raise SpectrumError("parity context needs a uniform XYZ mean field")
        s = spin if spin is not None else sol.spin
        if s is None:
            raise SpectrumError("spin quantum number required for overlap factors")
        ratio = float(np.cos(sol.tilt)) if sol.phase == PHASE_BROKEN else 0.0
        return cls(phase=sol.phase, ratio=ratio, spin=float(s), eps_overlap=eps_overlap)

    @property
    def broken(self) -> bool:
        return self.phase == PHASE_BROKEN

    @property
    def tilt(self) -> float:
        return float(np.arccos(np.clip(self.ratio, -1.0, 1.0)))

    def overlap(self, n_sites: int) -> float:
        """Subsystem overlap factor r^(2 s n_A); zero in the normal phase."""
        if not self.broken:
            return 0.0
        return float(self.ratio ** (2.0 * self.spin * n_sites))


def corrected_entropy(s_bosonic: float, ctx: ParityContext, n_sites: int) -> float:
    """Parity-restored subsystem entropy."""
    if not ctx.broken:
        return float(s_bosonic)
    ov = ctx.overlap(n_sites)
    if abs(ov) < ctx.eps_overlap:
        return float(s_bosonic) + 1.0
    return float(s_bosonic) + binary_entropy(0.5 * (1.0 + ov))


def corrected_global_negativity(n_value: float, ctx: ParityContext) -> float:
    """Parity-restored negativity of a global (A, complement) bipartition.

    Negativities of bipartitions internal to a proper subsystem pass through
    unchanged and should not be routed here.
    """
    if not ctx.broken:
        return float(n_value)
    return 2.0 * float(n_value) + 0.5


@dataclass(frozen=True)
class SpinDensity:
    """Explicit low-occupation reduced spin density of a small subsystem.

    ``matrix`` is hermitian with unit trace on the stored ``basis`` labels:
    excitation tuples ('vac',), ('exc', i), ('exc2', i, j) in the local frame
    (normal phase), or per-site magnetization tuples in the lab frame after
    parity restoration (broken phase).  ``truncation_warning`` flags mean
    occupations beyond the validity of the zero/one-boson truncation.
    """

    sites: tuple
    matrix: np.ndarray
    basis: tuple
    frame: str                  # "local" | "lab"
    normal_block: np.ndarray    # F_A
    anomalous_block: np.ndarray  # G_A
    truncation_warning: bool = False


def _truncated_density(f_a: np.ndarray, g_a: np.ndarray) -> tuple[np.ndarray, tuple]:
    size = f_a.shape[0]
    pairs = list(combinations(range(size), 2))
    g_col = np.array([g_a[i, j] for i, j in pairs])
    dim = 1 + size + len(pairs)
    rho = np.zeros((dim, dim), dtype=complex)
    basis = [("vac",)] + [("exc", i) for i in range(size)] + [("exc2", i, j) for i, j in pairs]
    rho1 = f_a - g_a @ g_a.conj().T
    rho[0, 0] = 1.0 - np.trace(f_a).real + np.vdot(g_col, g_col).real
    rho[1:1 + size, 1:1 + size] = rho1
    two = slice(1 + size, dim)
    rho[two, two] = np.outer(g_col, g_col.conj())
    rho[two, 0] = g_col
    rho[0, two] = g_col.conj()
    return rho, tuple(basis)


def _local_basis_index(occ: tuple, dims: tuple) -> int:
    # per-site index: m = +s first (index 0) down to m = -s (index 2s);
    # |0> maps to m = -s, |1> to m = -s + 1
    idx = 0
    for d, k in zip(dims, occ):
        idx = idx * d + (d - 1 - k)
    return idx


def _spin_y(dim: int) -> np.ndarray:
    s = (dim - 1) / 2.0
    m = np.arange(s, -s - 1.0, -1.0)
    up = 0.5 * np.sqrt(s * (s + 1.0) - m[1:] * (m[1:] + 1.0))
    sy = np.zeros((dim, dim), dtype=complex)
    sy[np.arange(dim - 1), np.arange(1, dim)] = -1j * up
    sy[np.arange(1, dim), np.arange(dim - 1)] = 1j * up
    return sy


def spin_density(contr: ContractionData, sites, ctx: ParityContext,
                 dim_cap: int = 4096) -> SpinDensity:
    """Low-occupation reduced spin density of the sites in A.

    Normal phase: the truncated-basis matrix in the local frame.  Broken
    phase: the matrix is embedded into the product spin space of A, rotated
    to the lab frame by exp(-i theta s_y) on every site, and its
    parity-breaking elements are removed via rho -> (rho + P rho P)/2.
    """
    sites = tuple(int(i) for i in sites)
    idx = np.asarray(sites)
    f_a = contr.normal[np.ix_(idx, idx)]
    g_a = contr.anomalous[np.ix_(idx, idx)]
    warn = bool(np.max(np.diag(f_a).real) > OCCUPATION_BOUND)
    rho, basis = _truncated_density(f_a, g_a)

    if not ctx.broken:
        rho = 0.5 * (rho + rho.conj().T)
        if np.max(np.abs(rho.imag)) == 0.0:
            rho = rho.real
        return SpinDensity(sites=sites, matrix=rho, basis=basis, frame="local",
                           normal_block=f_a, anomalous_block=g_a,
                           truncation_warning=warn)

    dim1 = int(round(2.0 * ctx.spin)) + 1
    size = len(sites)
    if dim1**size > dim_cap:
        raise OracleError(
            f"spin-density embedding dimension {dim1**size} exceeds cap {dim_cap}"
        )
    dims = (dim1,) * size
    full = np.zeros((dim1**size, dim1**size), dtype=complex)

    def occupation_of(label):
        occ = [0] * size
        if label[0] == "exc":
            occ[label[1]] = 1
        elif label[0] == "exc2":
            occ[label[1]] = 1
            occ[label[2]] = 1
        return tuple(occ)

    pos = [_local_basis_index(occupation_of(lbl), dims) for lbl in basis]
    full[np.ix_(pos, pos)] = rho

    rot1 = scipy.linalg.expm(-1j * ctx.tilt * _spin_y(dim1))
    rot = rot1
    for _ in range(size - 1):
        rot = np.kron(rot, rot1)
    full = rot @ full @ rot.conj().T

    m_site = np.arange(ctx.spin, -ctx.spin - 1.0, -1.0)
    par1 = np.asarray(np.round((-1.0) ** (m_site - ctx.spin)).real, dtype=float)
    par = par1
    for _ in range(size - 1):
        par = np.kron(par, par1)
    full = 0.5 * (full + par[:, None] * full * par[None, :])
    full = 0.5 * (full + full.conj().T)
    if np.max(np.abs(full.imag)) < 1e-14:
        full = full.real

    lab_basis = tuple(product(m_site.tolist(), repeat=size))
    return SpinDensity(sites=sites, matrix=full, basis=lab_basis, frame="lab",
                       normal_block=f_a, anomalous_block=g_a,
                       truncation_warning=warn)


def spin_entropy_and_negativity(density: SpinDensity, split=None) -> dict:
    """Entropy and first-order negativity from an explicit spin density.

    Returns the exact-eigenvalue entropy of the stored matrix, the
    one-boson-block estimate tr rho1 (log2 e - log2 rho1), and, when a split
    (B, C) of A is given (site labels), the first-order negativity
    N = sum of singular values of G_BC.
    """
    evals = np.linalg.eigvalsh(density.matrix)
    evals = evals[evals > 1e-14]
    s_exact = float(-np.sum(evals * np.log2(evals)))

    rho1 = density.normal_block - density.anomalous_block @ density.anomalous_block.conj().T
    nu = np.linalg.eigvalsh(0.5 * (rho1 + rho1.conj().T))
    nu = nu[nu > 1e-14]
    s_first = float(np.sum(nu * (np.log2(np.e) - np.log2(nu))))

    out = {"entropy": s_exact, "entropy_first_order": s_first}
    if split is not None:
        b_sites, c_sites = split
        pos = {site: k for k, site in enumerate(density.sites)}
        b_idx = [pos[s] for s in b_sites]
        c_idx = [pos[s] for s in c_sites]
        g_bc = density.anomalous_block[np.ix_(b_idx, c_idx)]
        out["negativity_first_order"] = float(np.sum(scipy.linalg.svdvals(g_bc)))
    return out

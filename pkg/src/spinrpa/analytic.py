"""Closed-form RPA entanglement: spin pair, fully connected array, uniform spectra.

Spin pair (couplings J_x >= |J_y|, J_z, transverse field B, rescaled units):
the two RPA normal modes are

    omega_0 = sqrt((lam - J_x')(lam - J_y)),
    omega_1 = sqrt((lam + J_x')(lam + J_y)),

with lam = |B| + J_z and J_x' = J_x in the normal phase, and lam = J_x,
J_x' = J_x cos^2(theta) + J_z sin^2(theta), cos(theta) = B/B_c in the broken
phase.  The single-site occupation and the entanglement measures follow as

    f  = 1/2 (sqrt(1 + (lam^2 - wbar^2)/(omega_0 omega_1)) - 1),
    wbar = (omega_0 + omega_1)/2,
    S  = (1+f) log2(1+f) - f log2 f   (+1 below B_c, orthogonal-support limit),
    f~ = f - sqrt(f (f+1)),    N = -f~/(1 + 2 f~) = f + sqrt(f (f+1)).

Fully connected array of n spins (J_mu(l) = J_mu/(n-1) off-diagonal): one
attractive mode omega_0 and n-1 degenerate weak repulsive modes omega_1
(the 1/(n-1) self-energy correction is kept exactly, so omega_1 != lam at
finite n).  All reduced L-site matrices have a single nonzero occupation

    f_L = 1/2 (sqrt(1 + 2 alpha_L Delta) - 1),    alpha_L = L(n-L)/n^2,
    Delta = n^2 (lam^2 - wbar^2) / (2 (n-1) omega_0 omega_1),
    wbar = (omega_0 + (n-1) omega_1)/n,

and the partial transpose over m of L sites has a single negative occupation

    f~_{Lm} = 1/2 sqrt(1 + gamma Delta - sqrt(8 beta Delta + gamma^2 Delta^2)) - 1/2,
    beta = m(L-m)/n^2,  gamma = alpha_L + 4 beta,   N = -f~/(1 + 2 f~).

The inner radicand is evaluated in the cancellation-free form
1 - 8 beta Delta / (gamma Delta + sqrt(gamma^2 Delta^2 + 8 beta Delta)), which
is exact for all Delta >= 0 and yields the finite limit
f~ -> -1/2 (1 - sqrt(alpha_L / gamma)) as Delta -> infinity (B -> B_c).

Uniform contractions F_ij = F0 d_ij + F1, G_ij = G0 d_ij + G1 produce the
subsystem spectrum {f_L, f_0 x (L-1)} and, after transposing m of L sites,
{f~_-, f~_+, f_0 x (L-2)}, with f~_+- + 1/2 the positive eigenvalues of the
4x4 collective block matrix [[A_FG, -A_GF], [A_GF, -A_FG]].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpectrumError
from .meanfield import PHASE_BROKEN, PHASE_NORMAL


def _entropy_bits(f: float) -> float:
    if not np.isfinite(f):
        return float("inf")
    if f <= 0.0:
        return 0.0
    return float((1.0 + f) * np.log2(1.0 + f) - f * np.log2(f))


def _binary_entropy(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return float(-q * np.log2(q) - (1.0 - q) * np.log2(1.0 - q))


def _xyz_phase(jx, jy, jz, b):
    """Phase branch, local gap and the tilt-replaced x coupling."""
    if jx < abs(jy):
        raise SpectrumError("pair closed forms require J_x >= |J_y| >= 0 with J_x >= 0")
    bc = jx - jz
    if abs(b) >= bc:
        return PHASE_NORMAL, abs(b) + jz, jx, 1.0
    ct = b / bc
    jxp = jx * ct**2 + jz * (1.0 - ct**2)
    return PHASE_BROKEN, jx, jxp, ct


@dataclass(frozen=True)
class PairResult:
    """Closed-form pair entanglement at one field point."""

    phase: str
    omega0: float
    omega1: float
    omega_mean: float
    occupation: float          # f
    entropy: float             # bosonic S
    pt_eigenvalue: float       # f~
    negativity: float          # N
    entropy_corrected: float
    negativity_corrected: float
    critical_field: float
    diverged: bool = False


def pair_closed_form(jx, jy, jz, b, s: float | None = None, eps_overlap: float = 1e-3) -> PairResult:
    """Entanglement of a spin pair from the two RPA mode frequencies.

    At |B| = B_c the occupation diverges; the result is returned with
    ``diverged=True`` rather than clamped.  The corrected values add the
    parity-restoration shift in the broken phase: S + 1 and 2N + 1/2 when the
    mean-field overlap (B/B_c)^{2s} is negligible; with ``s`` supplied and the
    overlap above ``eps_overlap``, the entropy shift becomes the binary mixing
    entropy of q_+- = (1 +- (B/B_c)^{2s})/2.
    """
    phase, lam, jxp, ct = _xyz_phase(jx, jy, jz, b)
    omega0 = float(np.sqrt(max((lam - jxp) * (lam - jy), 0.0)))
    omega1 = float(np.sqrt((lam + jxp) * (lam + jy)))
    wbar = 0.5 * (omega0 + omega1)
    diverged = omega0 == 0.0
    if diverged:
        f = float("inf")
        ft = -0.5
        neg = float("inf")
    else:
        drive = (lam**2 - wbar**2) / (omega0 * omega1)
        f = 0.5 * (np.sqrt(1.0 + drive) - 1.0)
        f = float(max(f, 0.0))
        ft = f - np.sqrt(f * (f + 1.0))
        neg = f + np.sqrt(f * (f + 1.0))
    entropy = _entropy_bits(f)

    s_corr, n_corr = entropy, neg
    if phase == PHASE_BROKEN:
        overlap = abs(ct) ** (2.0 * s) if s is not None else 0.0
        if abs(overlap) < eps_overlap:
            s_corr = entropy + 1.0
        else:
            s_corr = entropy + _binary_entropy(0.5 * (1.0 + overlap))
        n_corr = 2.0 * neg + 0.5
    return PairResult(
        phase=phase,
        omega0=omega0,
        omega1=omega1,
        omega_mean=wbar,
        occupation=f,
        entropy=entropy,
        pt_eigenvalue=float(ft),
        negativity=float(neg),
        entropy_corrected=float(s_corr),
        negativity_corrected=float(n_corr),
        critical_field=float(jx - jz),
        diverged=diverged,
    )


@dataclass(frozen=True)
class FullyConnectedResult:
    """Closed-form entanglement of the uniformly connected array."""

    phase: str
    n: int
    size: int                  # L
    split: int | None          # m
    omega0: float
    omega1: float
    omega_mean: float
    delta: float
    alpha: float
    beta: float | None
    gamma: float | None
    occupation: float          # f_L
    entropy: float
    pt_eigenvalue: float | None
    negativity: float | None
    entropy_corrected: float
    negativity_corrected: float | None
    critical_field: float
    diverged: bool = False


def _tilde_f(delta: float, beta: float, gamma: float) -> float:
    """Single negative transposed occupation, cancellation-free in Delta."""
    if beta == 0.0:
        return 0.0
    if np.isinf(delta):
        return -0.5 * (1.0 - np.sqrt((gamma - 4.0 * beta) / gamma))
    root = np.sqrt((gamma * delta) ** 2 + 8.0 * beta * delta)
    inner = 1.0 - 8.0 * beta * delta / (gamma * delta + root) if delta > 0.0 else 1.0
    if inner < 0.0:
        raise SpectrumError(f"negative radicand {inner:.3e} in transposed occupation")
    return 0.5 * np.sqrt(inner) - 0.5


def fully_connected_closed_form(n, jx, jy, jz, b, size, split=None,
                                s: float | None = None, eps_overlap: float = 1e-3
                                ) -> FullyConnectedResult:
    """Entropy of L sites and negativity of an (m, L-m) split, closed form.

    ``size`` is L with 1 <= L <= n; ``split`` is m with 1 <= m < L.  At
    |B| = B_c the occupation diverges (flagged); the transposed occupation and
    the subsystem negativity stay finite there and are reported through their
    exact limits.  n = 2, L = 1 reduces to the pair formulas.
    """
    n = int(n)
    size = int(size)
    if not 1 <= size <= n:
        raise SpectrumError(f"subsystem size {size} outside 1..{n}")
    if split is not None and not 1 <= int(split) < size:
        raise SpectrumError(f"split {split} outside 1..{size - 1}")
    phase, lam, jxp, ct = _xyz_phase(jx, jy, jz, b)
    omega0 = float(np.sqrt(max((lam - jxp) * (lam - jy), 0.0)))
    omega1 = float(np.sqrt((lam + jxp / (n - 1.0)) * (lam + jy / (n - 1.0))))
    wbar = (omega0 + (n - 1.0) * omega1) / n
    alpha = size * (n - size) / n**2
    diverged = omega0 == 0.0
    if diverged:
        delta = float("inf")
        f_l = float("inf") if alpha > 0.0 else 0.0
    else:
        delta = n**2 * (lam**2 - wbar**2) / (2.0 * (n - 1.0) * omega0 * omega1)
        delta = float(max(delta, 0.0))
        f_l = 0.5 * (np.sqrt(1.0 + 2.0 * alpha * delta) - 1.0)
    entropy = _entropy_bits(f_l)

    beta = gamma = None
    ft = neg = None
    if split is not None:
        m = int(split)
        beta = m * (size - m) / n**2
        gamma = alpha + 4.0 * beta
        ft = _tilde_f(delta, beta, gamma)
        neg = float("inf") if ft <= -0.5 else -ft / (1.0 + 2.0 * ft)

    s_corr = entropy
    n_corr = neg
    if phase == PHASE_BROKEN:
        overlap = abs(ct) ** (2.0 * s * size) if s is not None else 0.0
        if abs(overlap) < eps_overlap:
            s_corr = entropy + 1.0
        else:
            s_corr = entropy + _binary_entropy(0.5 * (1.0 + overlap))
        if neg is not None and size == n:
            n_corr = 2.0 * neg + 0.5  # global bipartition; subsystem splits pass through
    return FullyConnectedResult(
        phase=phase,
        n=n,
        size=size,
        split=None if split is None else int(split),
        omega0=omega0,
        omega1=omega1,
        omega_mean=float(wbar),
        delta=float(delta),
        alpha=float(alpha),
        beta=beta,
        gamma=gamma,
        occupation=float(f_l),
        entropy=entropy,
        pt_eigenvalue=None if ft is None else float(ft),
        negativity=None if neg is None else float(neg),
        entropy_corrected=float(s_corr),
        negativity_corrected=None if n_corr is None else float(n_corr),
        critical_field=float(jx - jz),
        diverged=diverged,
    )


@dataclass(frozen=True)
class UniformSpectra:
    """Symplectic data of uniform contractions F0 d_ij + F1, G0 d_ij + G1."""

    occupation_collective: float   # f_L, non-degenerate
    occupation_local: float        # f_0, (L-1)-fold degenerate
    pt_plus: float                 # f~_+ >= 0
    pt_minus: float                # f~_- (negative when entangled)


def uniform_contraction_spectra(f0, f1, g0, g1, size, split) -> UniformSpectra:
    """Closed-form spectra for uniform contraction matrices.

        f_L = sqrt((F0 + L F1 + 1/2)^2 - (G0 + L G1)^2) - 1/2
        f_0 = sqrt((F0 + 1/2)^2 - G0^2) - 1/2

    and the (m, L-m) transposed pair f~_+- from the collective 4x4 block.
    Raises on a negative radicand (inputs not a valid Gaussian state).
    """
    size = int(size)
    m = int(split)
    if not 1 <= m < size:
        raise SpectrumError(f"split {split} outside 1..{size - 1}")
    p = size - m

    def _branch(a, g):
        rad = a * a - g * g
        if rad < 0.0:
            raise SpectrumError(f"negative radicand {rad:.3e}: inconsistent contractions")
        return np.sqrt(rad) - 0.5

    f_l = _branch(f0 + size * f1 + 0.5, g0 + size * g1)
    f_loc = _branch(f0 + 0.5, g0)

    rmp = np.sqrt(m * p)
    a_fg = (0.5 + f0) * np.eye(2) + np.array([[m * f1, rmp * g1], [rmp * g1, p * f1]])
    a_gf = g0 * np.eye(2) + np.array([[m * g1, rmp * f1], [rmp * f1, p * g1]])
    amat = np.block([[a_fg, -a_gf], [a_gf, -a_fg]])
    tr2 = float(np.trace(amat @ amat))
    det = float(np.linalg.det(amat))
    disc = tr2**2 - 16.0 * det
    if disc < 0.0 or tr2 < 0.0:
        raise SpectrumError("negative discriminant: inconsistent contractions")
    plus_rad = tr2 + np.sqrt(disc)
    minus_rad = tr2 - np.sqrt(disc)
    if minus_rad < 0.0:
        if minus_rad < -1e-10 * max(1.0, tr2):
            raise SpectrumError("negative radicand in transposed branch")
        minus_rad = 0.0
    ft_plus = 0.5 * np.sqrt(plus_rad) - 0.5
    ft_minus = 0.5 * np.sqrt(minus_rad) - 0.5
    return UniformSpectra(
        occupation_collective=float(f_l),
        occupation_local=float(f_loc),
        pt_plus=float(max(ft_plus, ft_minus)),
        pt_minus=float(min(ft_plus, ft_minus)),
    )

"""Quadratic boson (RPA) layer: matrices, symplectic diagonalization, contractions.

Around the mean field, the map s_+ -> sqrt(2s) b†, s_- -> sqrt(2s) b,
s_z -> -s + b† b (in each local frame) turns the spin Hamiltonian into a
quadratic boson form

    H_b = E_0 + sum_i lam_i b†_i b_i
          - sum_{i != j} [ Dp_{ij} b†_i b_j + 1/2 (Dm_{ij} b†_i b†_j + h.c.) ],

where lam_i is the local mean-field gap, Dp is hermitian (hopping-like) and Dm
symmetric (pairing-like), both built from the couplings rotated into the local
frames:

    D(pm)_{ij} = 1/2 sqrt(s_i s_j) [ J~_xx pm J~_yy - i (J~_yx mp J~_xy) ]_{ij}.

Collecting Z = (b, b†), H_b = E_0 - 1/2 tr(lam) + 1/2 Z† H Z with the
2n x 2n hermitian block matrix H = [[lam - Dp, -Dm], [-conj(Dm), lam - conj(Dp)]].
A Bogoliubov transformation W = [[U, V], [conj(V), conj(U)]] preserving the
boson metric M = diag(I, -I) (i.e. W M W† = M) brings H to diagonal form
with positive frequencies omega_alpha, which are the symplectic eigenvalues of
H (eigenvalues of M H).  The transformed vacuum fixes the basic contractions

    F_{ij} = <b†_j b_i> = (V V†)_{ij},   G_{ij} = <b_j b_i> = (V U^T)_{ij},

and the vacuum pair-coefficient matrix Z = V conj(U)^{-1} (symmetric).

Diagonalization uses the Cholesky route: for positive-definite H, write
H = K† K, diagonalize the hermitian K M K† (its spectrum is exactly the
paired +-omega set) and map the eigenvectors back with K^{-1}.  This yields
M-orthonormal Bogoliubov blocks by construction, degenerate subspaces
included, which a generic eigensolver does not guarantee.

On a cyclic translationally invariant array the problem factorizes over
momentum k into 2x2 blocks and everything is closed-form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import StabilityError, SpectrumError
from .meanfield import MeanFieldSolution, PHASE_BROKEN
from .model import SpinModel, XYZModelTI, _readonly, fourier_couplings, _phase_matrix

#: omega_min below MARGINAL_TOL * max(lam) is reported as unstable; the
#: entropy diverges logarithmically as the lowest frequency goes to zero.
MARGINAL_TOL = 1e-8


def metric(n: int) -> np.ndarray:
    """Boson metric M = diag(I_n, -I_n)."""
    m = np.ones(2 * n)
    m[n:] = -1.0
    return np.diag(m)


@dataclass(frozen=True)
class RpaSystem:
    """Assembled quadratic boson problem in the mean-field frame."""

    local_gaps: np.ndarray  # (n,) lam_i
    hopping: np.ndarray     # (n, n) hermitian, zero diagonal
    pairing: np.ndarray     # (n, n) symmetric, zero diagonal
    mf_energy: float

    @property
    def n(self) -> int:
        return self.local_gaps.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """The 2n x 2n hermitian block matrix."""
        lam = np.diag(self.local_gaps)
        a = lam - self.hopping
        b = -self.pairing
        top = np.hstack([a, b])
        bot = np.hstack([b.conj(), a.conj()])
        return np.vstack([top, bot])


@dataclass(frozen=True)
class RpaModes:
    """Positive-frequency Bogoliubov modes of a stable RPA problem.

    ``omega`` holds the n positive frequencies (ascending); ``u``/``v`` the
    n x n Bogoliubov blocks with columns normalized to +1 in the M metric;
    ``energy`` is the vacuum energy E_0 + 1/2 sum_alpha (omega_alpha - lam_alpha).
    """

    omega: np.ndarray
    u: np.ndarray
    v: np.ndarray
    energy: float
    stable: bool = True

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def w(self) -> np.ndarray:
        """Full 2n x 2n Bogoliubov matrix [[U, V], [conj(V), conj(U)]]."""
        top = np.hstack([self.u, self.v])
        bot = np.hstack([self.v.conj(), self.u.conj()])
        return np.vstack([top, bot])


@dataclass(frozen=True)
class MomentumModes:
    """Per-momentum Bogoliubov data for a translationally invariant array."""

    n: int
    omega: np.ndarray       # (n,) omega^k
    u: np.ndarray           # (n,) u_k, real >= 1
    v: np.ndarray           # (n,) v_k, phase = Dm^k / |Dm^k| (0 when Dm^k = 0)
    lam: float
    hopping_k: np.ndarray   # (n,) Dp^k
    pairing_k: np.ndarray   # (n,) Dm^k
    energy: float
    stable: bool = True


@dataclass(frozen=True)
class ContractionData:
    """Second moments of the RPA vacuum.

    ``normal`` is F_{ij} = <b†_j b_i> (hermitian, positive semidefinite),
    ``anomalous`` is G_{ij} = <b_j b_i> (symmetric).  Together they fix the
    generalized contraction matrix D = [[F, G], [conj(G), I + conj(F)]], which
    characterizes the Gaussian state completely.
    """

    normal: np.ndarray
    anomalous: np.ndarray

    @property
    def n(self) -> int:
        return self.normal.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        f, g = self.normal, self.anomalous
        eye = np.eye(f.shape[0])
        return np.vstack(
            [np.hstack([f, g]), np.hstack([g.conj(), eye + f.conj()])]
        )


def _maybe_real(a: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    if np.iscomplexobj(a) and np.max(np.abs(a.imag)) <= tol * max(1.0, np.max(np.abs(a.real))):
        return np.ascontiguousarray(a.real)
    return a


def build_rpa_matrices(model, mf: MeanFieldSolution) -> RpaSystem:
    """Assemble the RPA blocks around a converged mean field.

    For an :class:`XYZModelTI` the couplings enter through the separation
    profiles; in the broken phase the tilt rotation amounts to the replacement
    J_x(l) -> J_x(l) cos^2(theta) + J_z(l) sin^2(theta) with J_y unchanged.
    For a general :class:`SpinModel` each coupling block is rotated into the
    local frames of its two sites before the blocks are read off.
    """
    if isinstance(model, XYZModelTI):
        return _build_ti(model, mf)
    return _build_general(model, mf)


def _broken_profile_x(model: XYZModelTI, mf: MeanFieldSolution) -> np.ndarray:
    if mf.phase == PHASE_BROKEN:
        c2 = np.cos(mf.tilt) ** 2
        return model.jx * c2 + model.jz * (1.0 - c2)
    return model.jx


def _build_ti(model: XYZModelTI, mf: MeanFieldSolution) -> RpaSystem:
    lam = mf.magnitudes
    if np.any(lam <= 0):
        raise StabilityError("mean field has non-positive local gaps")
    jxp = _broken_profile_x(model, mf)
    n = model.n
    sep = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    dplus = ((jxp + model.jy) / 2.0)[sep]
    dminus = ((jxp - model.jy) / 2.0)[sep]
    return RpaSystem(
        local_gaps=_readonly(np.asarray(lam, dtype=float)),
        hopping=_readonly(dplus),
        pairing=_readonly(dminus),
        mf_energy=mf.energy,
    )


def _build_general(sm: SpinModel, mf: MeanFieldSolution) -> RpaSystem:
    n = sm.n
    if mf.frames is None:
        raise StabilityError("mean-field solution carries no local frames")
    lam = np.asarray(mf.magnitudes, dtype=float)
    if np.any(lam <= 0):
        raise StabilityError("mean field has non-positive local gaps")
    dplus = np.zeros((n, n), dtype=complex)
    dminus = np.zeros((n, n), dtype=complex)
    root_s = np.sqrt(sm.spins)
    for i in range(n):
        ri = mf.frames[i]
        for j in range(n):
            if i == j:
                continue
            jr = ri.T @ sm.couplings[i, :, j, :] @ mf.frames[j]
            w = 0.5 * root_s[i] * root_s[j]
            dplus[i, j] = w * (jr[0, 0] + jr[1, 1] - 1j * (jr[1, 0] - jr[0, 1]))
            dminus[i, j] = w * (jr[0, 0] - jr[1, 1] - 1j * (jr[1, 0] + jr[0, 1]))
    dplus = _maybe_real(dplus)
    dminus = _maybe_real(dminus)
    if not np.allclose(dplus, dplus.conj().T, atol=1e-12):
        raise SpectrumError("hopping block is not hermitian; coupling tensor inconsistent")
    if not np.allclose(dminus, dminus.T, atol=1e-12):
        raise SpectrumError("pairing block is not symmetric; coupling tensor inconsistent")
    return RpaSystem(
        local_gaps=_readonly(lam),
        hopping=_readonly(dplus),
        pairing=_readonly(dminus),
        mf_energy=mf.energy,
    )


def _diagnose_instability(sys: RpaSystem) -> StabilityError:
    h = sys.matrix
    m = metric(sys.n)
    evals = scipy.linalg.eigvals(m @ h)
    scale = float(np.max(sys.local_gaps))
    bad = [
        (idx, ev)
        for idx, ev in enumerate(evals)
        if abs(ev.imag) > 1e-10 * scale or abs(ev) < MARGINAL_TOL * scale
    ]
    if bad:
        idx, ev = min(bad, key=lambda t: abs(t[1].real))
        kind = "imaginary" if abs(ev.imag) > 1e-10 * scale else "vanishing"
        return StabilityError(
            f"RPA matrix is not positive definite: {kind} mode frequency {ev:.6g} "
            f"at mode index {idx}",
            mode=idx,
            value=complex(ev),
        )
    return StabilityError("RPA matrix is not positive definite")


def symplectic_diagonalize(sys: RpaSystem) -> RpaModes:
    """Bogoliubov-diagonalize the quadratic form via the Cholesky route.

    Returns modes with W M W† = M and W† H W = diag(omega, omega) to
    machine accuracy.  Raises :class:`StabilityError` when H is not positive
    definite or the smallest frequency is marginal.
    """
    h = sys.matrix
    if not np.allclose(h, h.conj().T, atol=1e-12 * max(1.0, np.max(np.abs(h)))):
        raise SpectrumError("RPA matrix is not hermitian")
    n = sys.n
    try:
        k = scipy.linalg.cholesky(h, lower=False)  # h = k^H k
    except scipy.linalg.LinAlgError:
        raise _diagnose_instability(sys) from None

    msigns = np.ones(2 * n)
    msigns[n:] = -1.0
    a = (k * msigns) @ k.conj().T
    evals, evecs = scipy.linalg.eigh(a)

    scale = float(np.max(sys.local_gaps))
    pairing_residual = float(np.max(np.abs(evals[:n][::-1] + evals[n:])))
    if pairing_residual > 1e-9 * max(1.0, scale):
        raise SpectrumError(
            f"symplectic spectrum is not (+/-)-paired: residual {pairing_residual:.3e}"
        )
    omega = evals[n:]
    if omega[0] < MARGINAL_TOL * scale:
        raise StabilityError(
            f"marginal stability: lowest frequency {omega[0]:.6g} below "
            f"{MARGINAL_TOL:g} * max(lam)",
            mode=0,
            value=float(omega[0]),
        )

    wplus = scipy.linalg.solve_triangular(k, evecs[:, n:] * np.sqrt(omega), lower=False)
    u = wplus[:n, :]
    v = wplus[n:, :].conj()
    energy = sys.mf_energy + 0.5 * float(np.sum(omega) - np.sum(sys.local_gaps))
    return RpaModes(
        omega=_readonly(omega),
        u=_readonly(_maybe_real(u)),
        v=_readonly(_maybe_real(v)),
        energy=energy,
        stable=True,
    )


def momentum_modes(model: XYZModelTI, mf: MeanFieldSolution) -> MomentumModes:
    """Closed-form per-momentum diagonalization for cyclic XYZ arrays.

    omega^k = sqrt((lam - Dp^k)^2 - |Dm^k|^2) with
    u_k = sqrt((lam - Dp^k + omega^k) / (2 omega^k)) and
    v_k = (Dm^k/|Dm^k|) sqrt((lam - Dp^k - omega^k) / (2 omega^k)).
    The stability condition is |Dm^k| < lam - Dp^k for every k.
    """
    lam = float(mf.magnitudes[0])
    n = model.n
    jxp = _broken_profile_x(model, mf)
    fc = fourier_couplings(
        XYZModelTI(n=model.n, s=model.s, jx=jxp, jy=model.jy, jz=model.jz, b=model.b)
    )
    dplus_k = fc.hopping_k
    dminus_k = fc.pairing_k

    gap = lam - dplus_k
    radicand = gap**2 - np.abs(dminus_k) ** 2
    bad = (gap <= 0) | (radicand <= 0)
    if np.any(bad):
        kbad = int(np.argwhere(bad)[0][0])
        raise StabilityError(
            f"|Dm^k| >= lam - Dp^k at k={kbad}: mean field is not a stable vacuum",
            mode=kbad,
            value=float(radicand[kbad]),
        )
    omega = np.sqrt(radicand)
    if float(np.min(omega)) < MARGINAL_TOL * lam:
        kbad = int(np.argmin(omega))
        raise StabilityError(
            f"marginal stability: omega^k = {omega[kbad]:.6g} at k={kbad}",
            mode=kbad,
            value=float(omega[kbad]),
        )

    u = np.sqrt((gap + omega) / (2.0 * omega))
    vmag = np.sqrt(np.maximum(gap - omega, 0.0) / (2.0 * omega))
    phase = np.where(dminus_k != 0.0, np.sign(dminus_k), 0.0)
    v = phase * vmag
    energy = mf.energy + 0.5 * float(np.sum(omega - lam + dplus_k))
    return MomentumModes(
        n=n,
        omega=_readonly(omega),
        u=_readonly(u),
        v=_readonly(v),
        lam=lam,
        hopping_k=_readonly(dplus_k),
        pairing_k=_readonly(dminus_k),
        energy=energy,
        stable=True,
    )


def contractions(modes) -> ContractionData:
    """Vacuum contraction matrices F and G from either diagonalization path."""
    if isinstance(modes, RpaModes):
        f = modes.v @ modes.v.conj().T
        g = modes.v @ modes.u.T
        f = 0.5 * (f + f.conj().T)
        g = 0.5 * (g + g.T)
        return ContractionData(normal=_readonly(f), anomalous=_readonly(g))
    if isinstance(modes, MomentumModes):
        n = modes.n
        ph = _phase_matrix(n, -1) / n
        f_l = ph @ (np.abs(modes.v) ** 2)
        g_l = ph @ (modes.u * modes.v)
        f_l = _maybe_real(f_l, tol=1e-11)
        g_l = _maybe_real(g_l, tol=1e-11)
        sep = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return ContractionData(normal=_readonly(f_l[sep]), anomalous=_readonly(g_l[sep]))
    raise TypeError(f"unsupported modes object {type(modes).__name__}")


def vacuum_coefficients(modes) -> np.ndarray:
    """Symmetric pair-coefficient matrix Z of the vacuum.

    Dense path: Z = V conj(U)^{-1}; momentum path: Z(l) is the inverse
    transform of v_k / u_k.  A singular U signals marginal stability.
    """
    if isinstance(modes, RpaModes):
        ubar = modes.u.conj()
        if np.linalg.cond(ubar) > 1e12:
            raise StabilityError("U block is numerically singular: marginal stability")
        z = np.linalg.solve(ubar.T, modes.v.T).T
        sym_err = float(np.max(np.abs(z - z.T)))
        if sym_err > 1e-10 * max(1.0, float(np.max(np.abs(z)))):
            raise SpectrumError(f"vacuum coefficient matrix not symmetric: {sym_err:.3e}")
        return 0.5 * (z + z.T)
    if isinstance(modes, MomentumModes):
        n = modes.n
        ph = _phase_matrix(n, -1) / n
        z_l = _maybe_real(ph @ (modes.v / modes.u), tol=1e-11)
        sep = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return z_l[sep]
    raise TypeError(f"unsupported modes object {type(modes).__name__}")


def rpa_spin_observables(contr: ContractionData, spins, tilt: float | None = None) -> dict:
    """Basic spin averages and correlators in the RPA vacuum.

    In the local (mean-field) frame, with F and G the vacuum contractions:

        <s_iz>          = F_ii - s_i
        <s_i+ s_j->     = 2 sqrt(s_i s_j) F_ji           (i != j)
        <s_i- s_j->     = 2 sqrt(s_i s_j) G_ji           (i != j)
        <s_iz s_jz>     = <s_iz><s_jz> + |F_ij|^2 + |G_ij|^2   (i != j)

    Diagonals of the pair correlators are not defined by these formulas and
    are returned as NaN.  When ``tilt`` is given (uniform broken phase), the
    lab-frame single-site averages and xx/yy/zz/xz correlators obtained by
    rotating about y are included as well.
    """
    f, g = contr.normal, contr.anomalous
    n = contr.n
    s = np.broadcast_to(np.asarray(spins, dtype=float), (n,))
    root = np.sqrt(np.outer(s, s))
    sz = np.real(np.diag(f)) - s

    offdiag = ~np.eye(n, dtype=bool)
    nan_diag = np.where(offdiag, 0.0, np.nan)

    spsm = 2.0 * root * f.T + nan_diag
    smsm = 2.0 * root * g.T + nan_diag
    szsz = np.outer(sz, sz) + np.abs(f) ** 2 + np.abs(g) ** 2 + nan_diag

    out = {"sz": sz, "spsm": spsm, "smsm": smsm, "szsz": szsz}
    if tilt is not None:
        c, sn = np.cos(tilt), np.sin(tilt)
        xx = 0.5 * root * np.real(f + f.T + g + g.conj()) + nan_diag
        yy = 0.5 * root * np.real(f + f.T - g - g.conj()) + nan_diag
        zz = szsz
        out["sx_lab"] = sn * sz
        out["sz_lab"] = c * sz
        out["sxsx_lab"] = c**2 * xx + sn**2 * zz
        out["sysy_lab"] = yy
        out["szsz_lab"] = c**2 * zz + sn**2 * xx
        out["sxsz_lab"] = c * sn * (zz - xx)
    return out

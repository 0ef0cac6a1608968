"""Self-consistent mean field for spin arrays.

The mean-field ground state is the lowest-energy product of local coherent
states, each spin fully aligned against its local field

    lambda^{i,mu} = B^{i,mu} - sum_{j != i, nu} J^{i mu, j nu} <s_{j nu}>,
    <s_i> = -s_i lambda^i / |lambda^i|,

with energy <H> = 1/2 sum_i (lambda^i + B^i) . <s_i>.

For the uniform XYZ family with the ferromagnetic-type convention
(J_x(l) >= 0, |J_y(l)| <= J_x(l)) the solution is closed-form: above the
critical field B_c = J_x^0 - J_z^0 the spins align with the field axis
(lambda = |B| + J_z^0); below it they tilt into the xz plane by an angle
theta with cos(theta) = B/B_c and lambda = J_x^0, spontaneously breaking the
spin parity exp[i pi sum_i (s_iz - s_i)].

When the anisotropy ratio chi = (J_y(l) - J_z(l)) / (J_x(l) - J_z(l)) is the
same for every separation l and lies in [0, 1], the tilted product state is an
exact eigenstate at the factorizing field B_s = B_c sqrt(chi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MeanFieldError
from .model import SpinModel, XYZModelTI, _readonly

PHASE_NORMAL = "normal"
PHASE_BROKEN = "broken"
PHASE_GENERAL = "general"


@dataclass(frozen=True)
class MeanFieldSolution:
    """Converged mean field.

    Attributes:
        local_fields: (n, 3) self-consistent field vectors lambda^i.
        magnitudes: (n,) their norms, all positive.
        frames: (n, 3, 3) rotation matrices; columns are the local x, y, z
            axes in lab coordinates, with the z column along lambda^i.
        spin_directions: (n, 3) unit vectors <s_i>/s_i = -lambda^i/|lambda^i|.
        tilt: angle between lambda and the lab z axis for uniform XYZ
            solutions (None for general models).
        energy: mean-field energy.
        phase: ``normal``, ``broken`` or ``general``.
        critical_field: B_c for uniform XYZ models, else None.
        factorizing_field: B_s when a common anisotropy exists, else None.
        anisotropy: the common ratio chi, else None.
        spin: common spin quantum number when uniform, else None.
        iterations / residual: iterative-solver diagnostics.
    """

    n: int
    local_fields: np.ndarray
    magnitudes: np.ndarray
    frames: np.ndarray
    spin_directions: np.ndarray
    energy: float
    phase: str
    tilt: float | None = None
    critical_field: float | None = None
    factorizing_field: float | None = None
    anisotropy: float | None = None
    spin: float | None = None
    iterations: int = 0
    residual: float = 0.0


def _rotation_about_y(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _frame_from_direction(zhat: np.ndarray) -> np.ndarray:
    """Deterministic local frame with its z column along ``zhat``.

    The x column is the lab x axis projected orthogonal to zhat (falling back
    to the lab z axis when zhat is nearly parallel to x), which reproduces a
    rotation about y for directions in the xz plane.
    """
    ref = np.array([1.0, 0.0, 0.0])
    if abs(zhat @ ref) > 0.9:
        ref = np.array([0.0, 0.0, 1.0])
    x = ref - (ref @ zhat) * zhat
    x /= np.linalg.norm(x)
    y = np.cross(zhat, x)
    return np.column_stack([x, y, zhat])


def check_ferromagnetic_convention(model: XYZModelTI, tol: float = 1e-12) -> None:
    """Raise unless J_x(l) >= 0 and |J_y(l)| <= J_x(l) for every separation."""
    if np.any(model.jx < -tol) or np.any(np.abs(model.jy) > model.jx + tol):
        raise MeanFieldError(
            "phase logic requires the ferromagnetic-type convention "
            "J_x(l) >= 0 and |J_y(l)| <= J_x(l)"
        )


def common_anisotropy(model: XYZModelTI, rtol: float = 1e-9) -> float | None:
    """The separation-independent ratio (J_y - J_z)/(J_x - J_z), or None."""
    num = (model.jy - model.jz)[1:]
    den = (model.jx - model.jz)[1:]
    scale = max(1.0, float(np.max(np.abs(den))), float(np.max(np.abs(num))))
    live = np.abs(den) > rtol * scale
    if not np.any(live):
        return None
    chis = num[live] / den[live]
    if np.ptp(chis) > rtol * max(1.0, float(np.max(np.abs(chis)))):
        return None
    if np.any(np.abs(num[~live]) > rtol * scale):
        return None
    return float(chis[0])


def factorizing_field(model: XYZModelTI) -> float | None:
    """B_s = B_c sqrt(chi) when a common anisotropy chi in [0, 1] exists."""
    chi = common_anisotropy(model)
    if chi is None or not (0.0 <= chi <= 1.0):
        return None
    jx0, _, jz0 = model.totals
    bc = jx0 - jz0
    if bc <= 0.0:
        return None
    return float(bc * np.sqrt(chi))


def solve_uniform(model: XYZModelTI) -> MeanFieldSolution:
    """Closed-form uniform mean field for the XYZ family.

    Branch selection is the domain test |B| vs B_c; the broken branch returns
    the canonical representative theta in (0, pi/2] (its parity partner is the
    reflection theta -> -theta).  B = 0 gives theta = pi/2 exactly.
    """
    check_ferromagnetic_convention(model)
    jx0, jy0, jz0 = model.totals
    bc = jx0 - jz0
    b = model.b

    if abs(b) >= bc:
        lam = abs(b) + jz0
        if lam <= 0.0:
            raise MeanFieldError(f"normal-phase local field lambda = {lam} <= 0: degenerate model")
        phase = PHASE_NORMAL
        theta = 0.0 if b >= 0 else np.pi
    else:
        lam = jx0
        if lam <= 0.0 or bc <= 0.0:
            raise MeanFieldError("broken phase requested for a degenerate model (B_c <= 0)")
        theta = float(np.arccos(np.clip(b / bc, -1.0, 1.0)))
        phase = PHASE_BROKEN

    zhat = np.array([np.sin(theta), 0.0, np.cos(theta)])
    if phase == PHASE_NORMAL:
        zhat = np.array([0.0, 0.0, 1.0 if b >= 0 else -1.0])
    lam_vec = lam * zhat
    energy = -(model.n * model.s / 2.0) * (lam + b * zhat[2])

    frame = _rotation_about_y(theta)
    chi = common_anisotropy(model)
    return MeanFieldSolution(
        n=model.n,
        local_fields=_readonly(np.tile(lam_vec, (model.n, 1))),
        magnitudes=_readonly(np.full(model.n, lam)),
        frames=_readonly(np.tile(frame, (model.n, 1, 1))),
        spin_directions=_readonly(np.tile(-zhat, (model.n, 1))),
        energy=float(energy),
        phase=phase,
        tilt=theta,
        critical_field=float(bc),
        factorizing_field=factorizing_field(model),
        anisotropy=chi,
        spin=model.s,
    )


def solve_general_iterative(
    sm: SpinModel,
    initial_directions=None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    mixing: float = 0.5,
) -> MeanFieldSolution:
    """Damped fixed-point iteration of the self-consistency equations.

    ``initial_directions`` are unit guesses for the lambda^i directions
    (default: along B^i where nonzero, else +z).  The update is mixed,
    lambda <- (1 - m) lambda_old + m lambda_new, to damp oscillations near the
    critical field.  Raises on non-convergence or a vanishing local field.
    """
    if not 0.0 < mixing <= 1.0:
        raise MeanFieldError(f"mixing must lie in (0, 1], got {mixing}")
    n = sm.n
    if initial_directions is None:
        dirs = np.where(
            (np.linalg.norm(sm.fields, axis=1) > 0)[:, None],
            sm.fields,
            np.tile([0.0, 0.0, 1.0], (n, 1)),
        )
    else:
        dirs = np.asarray(initial_directions, dtype=float)
        if dirs.shape != (n, 3):
            raise MeanFieldError(f"initial directions must have shape (n, 3), got {dirs.shape}")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-8):
            raise MeanFieldError("initial directions must be unit vectors")
    norms = np.linalg.norm(dirs, axis=1)
    lam = dirs / norms[:, None]

    scale = max(1.0, float(np.max(np.abs(sm.fields))), float(np.max(np.abs(sm.couplings))))
    residual = np.inf
    for it in range(1, max_iter + 1):
        norms = np.linalg.norm(lam, axis=1)
        if np.any(norms < 1e-12 * scale):
            i = int(np.argmin(norms))
            raise MeanFieldError(f"local field vanished at site {i}: frame is ill-defined")
        savg = -sm.spins[:, None] * lam / norms[:, None]
        lam_new = sm.fields - np.einsum("iajb,jb->ia", sm.couplings, savg)
        residual = float(np.max(np.linalg.norm(lam_new - lam, axis=1)))
        lam = (1.0 - mixing) * lam + mixing * lam_new
        if residual < tol:
            break
    else:
        raise MeanFieldError(
            f"mean field did not converge in {max_iter} iterations", residual=residual
        )

    norms = np.linalg.norm(lam, axis=1)
    if np.any(norms < 1e-12 * scale):
        i = int(np.argmin(norms))
        raise MeanFieldError(f"local field vanished at site {i}: frame is ill-defined")
    zhat = lam / norms[:, None]
    frames = np.stack([_frame_from_direction(z) for z in zhat])
    savg_dir = -zhat
    energy = 0.5 * float(
        np.sum((lam + sm.fields) * (sm.spins[:, None] * savg_dir))
    )
    spin = float(sm.spins[0]) if np.ptp(sm.spins) == 0.0 else None
    return MeanFieldSolution(
        n=n,
        local_fields=_readonly(lam),
        magnitudes=_readonly(norms),
        frames=_readonly(frames),
        spin_directions=_readonly(savg_dir),
        energy=energy,
        phase=PHASE_GENERAL,
        spin=spin,
        iterations=it,
        residual=residual,
    )


def mf_energy(sm: SpinModel, sol: MeanFieldSolution) -> float:
    """Mean-field energy 1/2 sum_i (lambda^i + B^i) . <s_i>."""
    savg = sm.spins[:, None] * sol.spin_directions
    return 0.5 * float(np.sum((sol.local_fields + sm.fields) * savg))


def aligned_trial_energy(sm: SpinModel) -> float:
    """Energy of the product state with every spin against its field.

    Sites with zero field keep the -z direction.  Serves as a variational
    upper bound on the converged mean-field energy.
    """
    zdir = np.tile([0.0, 0.0, 1.0], (sm.n, 1))
    norms = np.linalg.norm(sm.fields, axis=1)
    dirs = np.where((norms > 0)[:, None], sm.fields / np.where(norms == 0, 1.0, norms)[:, None], zdir)
    savg = -sm.spins[:, None] * dirs
    field_term = float(np.sum(sm.fields * savg))
    pair_term = 0.5 * float(np.einsum("ia,iajb,jb->", savg, sm.couplings, savg))
    return field_term - pair_term

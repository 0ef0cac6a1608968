"""Spin-array models: general quadratic couplings and the transverse-field XYZ family.

Two representations are used throughout the engine:

* ``SpinModel`` is an arbitrary finite array of spins s_i in a per-site field
  B^{i,mu}, coupled through a quadratic tensor J^{i mu, j nu} that enters the
  energy as

      H = sum_{i,mu} B^{i mu} s_{i mu}
          - 1/2 sum_{i != j} sum_{mu,nu} J^{i mu, j nu} s_{i mu} s_{j nu}.

  The tensor is symmetric under pair exchange, J^{i mu, j nu} = J^{j nu, i mu},
  and carries no self-couplings.  Ising, XY, XYZ and antisymmetric
  (Dzyaloshinskii-Moriya type, J^{i mu, j nu} = -J^{i nu, j mu}) exchanges of
  arbitrary range all fit this form.

* ``XYZModelTI`` is the translationally invariant XYZ specialization on a
  cyclic array: separation profiles J_mu(l) and a uniform transverse field B.
  Couplings are stored in spin-rescaled units (physical coupling divided by
  s), which makes the mean-field and RPA layers independent of the spin
  quantum number; only the exact oracle reinstates s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError

GEOMETRY_GENERAL = "general"
GEOMETRY_CYCLIC = "cyclic-1d"
GEOMETRY_COMPLETE = "complete-graph"

_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}

#: |Im J^k| <= REAL_TOL * max(1, |Re J^k|) is treated as real.
REAL_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def _is_half_integer(s: float) -> bool:
    return s > 0 and abs(2.0 * s - round(2.0 * s)) < 1e-12


@dataclass(frozen=True)
class SpinModel:
    """General finite spin array with quadratic couplings.

    Attributes:
        n: number of sites.
        spins: (n,) half-integer spin quantum numbers s_i.
        fields: (n, 3) magnetic field vectors B^i (energy units).
        couplings: (n, 3, n, 3) coupling tensor J[i, mu, j, nu], pair-exchange
            symmetric with vanishing diagonal blocks.
        geometry: one of ``general``, ``cyclic-1d``, ``complete-graph``.
    """

    n: int
    spins: np.ndarray
    fields: np.ndarray
    couplings: np.ndarray
    geometry: str = GEOMETRY_GENERAL

    def coupling_block(self, i: int, j: int) -> np.ndarray:
        """3x3 coupling matrix between sites i and j."""
        return self.couplings[i, :, j, :]


def build_general(n, spins, fields, couplings, geometry=GEOMETRY_GENERAL) -> SpinModel:
    """Validate and assemble a :class:`SpinModel`.

    ``couplings`` may be a dense (n, 3, n, 3) array or a mapping
    ``{(i, mu, j, nu): value}`` with axes given as 'x'/'y'/'z' or 0/1/2.
    Entries are required for i != j only; if just one member of a
    pair-exchange couple (i mu, j nu) / (j nu, i mu) is supplied, the other is
    filled in by symmetry.  Conflicting values for the two members raise.
    """
    n = int(n)
    if n < 1:
        raise ModelError("need at least one site")
    spins = np.broadcast_to(np.asarray(spins, dtype=float), (n,))
    for i, s in enumerate(spins):
        if not _is_half_integer(s):
            raise ModelError(f"spin at site {i} is {s}; must be a positive half-integer")
    fields = np.asarray(fields, dtype=float)
    if fields.shape == (3,):
        fields = np.tile(fields, (n, 1))
    if fields.shape != (n, 3):
        raise ModelError(f"fields must have shape (n, 3) or (3,), got {fields.shape}")

    if isinstance(couplings, dict):
        J = _couplings_from_entries(n, couplings)
    else:
        J = _couplings_from_array(n, np.asarray(couplings, dtype=float))

    diag = np.einsum("iaib->iab", J)
    if np.any(diag != 0.0):
        i = int(np.argwhere(np.any(diag != 0.0, axis=(1, 2)))[0][0])
        raise ModelError(f"self-coupling supplied at site {i}")

    if geometry not in (GEOMETRY_GENERAL, GEOMETRY_CYCLIC, GEOMETRY_COMPLETE):
        raise ModelError(f"unknown geometry tag {geometry!r}")

    return SpinModel(
        n=n,
        spins=_readonly(spins),
        fields=_readonly(fields),
        couplings=_readonly(J),
        geometry=geometry,
    )


def _couplings_from_entries(n, entries) -> np.ndarray:
    J = np.zeros((n, 3, n, 3))
    seen = {}
    for key, val in entries.items():
        i, mu, j, nu = key
        try:
            a, b = _AXES[mu], _AXES[nu]
        except KeyError:
            raise ModelError(f"unknown axis in coupling key {key!r}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ModelError(f"site index out of range in coupling key {key!r}")
        if i == j:
            raise ModelError(f"self-coupling supplied: J[{i},{mu},{j},{nu}]")
        mirror = (j, b, i, a)
        if mirror in seen and not np.isclose(seen[mirror], val, rtol=1e-12, atol=1e-15):
            raise ModelError(
                f"conflicting pair-exchange entries: J[{i},{mu},{j},{nu}]={val} "
                f"vs J[{j},{nu},{i},{mu}]={seen[mirror]}"
            )
        seen[(i, a, j, b)] = val
        J[i, a, j, b] = val
        J[j, b, i, a] = val
    return J


def _couplings_from_array(n, J) -> np.ndarray:
    if J.shape != (n, 3, n, 3):
        raise ModelError(f"couplings must have shape (n, 3, n, 3), got {J.shape}")
    Jt = J.transpose(2, 3, 0, 1)
    if np.allclose(J, Jt, rtol=1e-12, atol=1e-15):
        return 0.5 * (J + Jt)
    lower = np.tril_indices(n, k=-1)
    if not np.any(J[lower[0], :, lower[1], :]):
        # one triangle supplied; mirror it
        return J + Jt
    raise ModelError("coupling tensor is neither pair-exchange symmetric nor one-triangle")


@dataclass(frozen=True)
class XYZModelTI:
    """Cyclic translationally invariant XYZ array in a transverse field.

    Separation profiles ``jx``, ``jy``, ``jz`` have length n with the l=0
    entry zero and obey the cyclic convention J_mu(l) = J_mu(n-l).  They are
    stored in spin-rescaled units.  ``b`` is the uniform transverse field.
    """

    n: int
    s: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    b: float

    @property
    def totals(self) -> tuple[float, float, float]:
        """Total strengths (J_x^0, J_y^0, J_z^0) = sum_l J_mu(l)."""
        return float(self.jx.sum()), float(self.jy.sum()), float(self.jz.sum())

    def with_field(self, b: float) -> "XYZModelTI":
        """Same couplings at a different transverse field."""
        return XYZModelTI(self.n, self.s, self.jx, self.jy, self.jz, float(b))

    def is_complete_graph(self) -> bool:
        """True when every off-diagonal separation carries the same coupling."""
        if self.n < 2:
            return False
        return all(
            np.ptp(p[1:]) == 0.0 for p in (self.jx, self.jy, self.jz)
        )


def build_xyz_ti(n, s, jx, jy, jz, b) -> XYZModelTI:
    """Validate and assemble an :class:`XYZModelTI` from separation profiles."""
    n = int(n)
    if n < 2:
        raise ModelError("translationally invariant model needs n >= 2")
    if not _is_half_integer(s):
        raise ModelError(f"spin {s} must be a positive half-integer")
    profs = []
    for name, p in (("jx", jx), ("jy", jy), ("jz", jz)):
        p = np.asarray(p, dtype=float)
        if p.shape != (n,):
            raise ModelError(f"{name} profile must have length n={n}, got shape {p.shape}")
        if p[0] != 0.0:
            raise ModelError(f"{name}(0) must vanish (no self-coupling)")
        mirrored = p[(-np.arange(n)) % n]
        if not np.allclose(p, mirrored, rtol=1e-12, atol=1e-15):
            raise ModelError(f"{name}(l) != {name}(n-l): profile breaks the cyclic convention")
        profs.append(_readonly(p))
    return XYZModelTI(n=n, s=float(s), jx=profs[0], jy=profs[1], jz=profs[2], b=float(b))


def xyz_pair(jx, jy, jz, b, s=0.5) -> XYZModelTI:
    """Two-site XYZ model with couplings (J_x, J_y, J_z)."""
    return build_xyz_ti(2, s, [0.0, jx], [0.0, jy], [0.0, jz], b)


def fully_connected_xyz(n, jx, jy, jz, b, s=0.5) -> XYZModelTI:
    """Uniformly connected array, J_mu(l) = J_mu / (n-1) for l != 0.

    The 1/(n-1) scaling keeps the energy per site finite as n grows.
    """
    profs = []
    for j in (jx, jy, jz):
        p = np.full(n, j / (n - 1))
        p[0] = 0.0
        profs.append(p)
    return build_xyz_ti(n, s, profs[0], profs[1], profs[2], b)


def nearest_neighbor_xyz(n, jx, jy, jz, b, s=0.5) -> XYZModelTI:
    """Cyclic chain with nearest-neighbor couplings only."""
    profs = []
    for j in (jx, jy, jz):
        p = np.zeros(n)
        p[1] = j
        p[n - 1] = j
        profs.append(p)
    return build_xyz_ti(n, s, profs[0], profs[1], profs[2], b)


@dataclass(frozen=True)
class FourierCouplings:
    """Momentum-space coupling table J_mu^k = sum_l exp(i 2 pi k l / n) J_mu(l).

    Real when J_mu(l) = J_mu(n-l).  ``hopping_k`` and ``pairing_k`` are the
    normal-phase combinations (J_x^k + J_y^k)/2 and (J_x^k - J_y^k)/2.
    """

    n: int
    jx_k: np.ndarray
    jy_k: np.ndarray
    jz_k: np.ndarray

    @property
    def hopping_k(self) -> np.ndarray:
        return (self.jx_k + self.jy_k) / 2.0

    @property
    def pairing_k(self) -> np.ndarray:
        return (self.jx_k - self.jy_k) / 2.0


def _phase_matrix(n: int, sign: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(sign * 2j * np.pi * np.outer(k, k) / n)


def _real_checked(a: np.ndarray, what: str) -> np.ndarray:
    bound = REAL_TOL * np.maximum(1.0, np.abs(a.real))
    if np.any(np.abs(a.imag) > bound):
        worst = float(np.max(np.abs(a.imag)))
        raise ModelError(f"{what} has imaginary part {worst:.3e}; profile violates J(l)=J(n-l)")
    return np.ascontiguousarray(a.real)


def fourier_couplings(model: XYZModelTI) -> FourierCouplings:
    """Direct O(n^2) discrete Fourier transform of the coupling profiles."""
    ph = _phase_matrix(model.n, +1)
    out = []
    for name, p in (("J_x^k", model.jx), ("J_y^k", model.jy), ("J_z^k", model.jz)):
        out.append(_readonly(_real_checked(ph @ p, name)))
    return FourierCouplings(n=model.n, jx_k=out[0], jy_k=out[1], jz_k=out[2])


def inverse_fourier_couplings(fc: FourierCouplings) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Separation profiles recovered from a momentum table."""
    ph = _phase_matrix(fc.n, -1) / fc.n
    return tuple(_real_checked(ph @ jk, "J_mu(l)") for jk in (fc.jx_k, fc.jy_k, fc.jz_k))


def to_spin_model(model: XYZModelTI) -> SpinModel:
    """Embed the rescaled XYZ model as a general :class:`SpinModel`.

    The physical tensor is J^{i mu, j mu} = J_mu(i-j) / s, so that the
    Hamiltonian carries the 1/(2s) prefactor on the double sum.
    """
    n = model.n
    sep = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    J = np.zeros((n, 3, n, 3))
    for a, prof in enumerate((model.jx, model.jy, model.jz)):
        J[:, a, :, a] = prof[sep] / model.s
    fields = np.tile([0.0, 0.0, model.b], (n, 1))
    geometry = GEOMETRY_COMPLETE if model.is_complete_graph() else GEOMETRY_CYCLIC
    return build_general(n, model.s, fields, J, geometry=geometry)


def xyz_from_spin_model(sm: SpinModel) -> XYZModelTI:
    """Extract the XYZ translationally invariant form of a SpinModel.

    Raises ModelError when the model is not a uniform-spin cyclic XYZ array in
    a uniform transverse field.
    """
    n = sm.n
    s = float(sm.spins[0])
    if np.ptp(sm.spins) != 0.0:
        raise ModelError("non-uniform spins: not translationally invariant")
    if np.any(sm.fields[:, :2] != 0.0) or np.ptp(sm.fields[:, 2]) != 0.0:
        raise ModelError("field is not a uniform transverse field")
    J = sm.couplings
    for a in range(3):
        for bx in range(3):
            if a != bx and np.any(J[:, a, :, bx] != 0.0):
                raise ModelError("cross-axis couplings present: not an XYZ model")
    sep = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    profs = []
    for a in range(3):
        block = J[:, a, :, a] * s
        prof = np.zeros(n)
        for l in range(1, n):
            vals = block[sep == l]
            if np.ptp(vals) > 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
                raise ModelError("couplings depend on more than the separation")
            prof[l] = vals[0]
        profs.append(prof)
    return build_xyz_ti(n, s, profs[0], profs[1], profs[2], float(sm.fields[0, 2]))

"""Exact ground-state entanglement oracles.

Two independent routes validate the RPA engine:

* a dense oracle that composes the Hamiltonian with sparse Kronecker products
  of local spin matrices and diagonalizes the dense matrix (desk-scale cap on
  the product dimension), returning the ground energy, the reduced density of
  any subsystem, its von Neumann entropy in bits and negativities from the
  exact partial transpose;

* a collective oracle for the uniformly connected spin-1/2 array, where the
  Hamiltonian is a polynomial in the total-spin operators and the ground
  state lives in the (n+1)-dimensional maximal-spin multiplet.  Reduced
  densities of L sites follow from the splitting of symmetric states,

      |n/2, M> = sum_{kL} sqrt(C(L,kL) C(n-L,k-kL) / C(n,k)) |L: kL> |n-L: k-kL>,

  with k the total number of raised spins; binomials are evaluated in the log
  domain beyond n = 60 to avoid overflow.

Both oracles work with physical (unrescaled) couplings; use
``model.to_spin_model`` to take a rescaled XYZ model across.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.special import gammaln

from .errors import OracleError
from .model import SpinModel, XYZModelTI

DEFAULT_DIM_CAP = 4096

#: ground levels closer than this (relative) are reported as degenerate
DEGENERACY_TOL = 1e-12


def spin_matrices(s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense (2s+1)-dimensional spin matrices (Sx, Sy, Sz), m descending."""
    d = int(round(2 * s)) + 1
    m = np.arange(s, -s - 1.0, -1.0)
    raise_amp = np.sqrt(s * (s + 1.0) - m[1:] * (m[1:] + 1.0))
    sp_ = np.zeros((d, d))
    sp_[np.arange(d - 1), np.arange(1, d)] = raise_amp
    sm_ = sp_.T
    sx = 0.5 * (sp_ + sm_)
    sy = -0.5j * (sp_ - sm_)
    sz = np.diag(m)
    return sx, sy, sz


def _site_operators(sm: SpinModel):
    """Sparse embeddings of (s_ix, s_iy, s_iz) for every site."""
    dims = [int(round(2 * s)) + 1 for s in sm.spins]
    total = int(np.prod(dims))
    ops = []
    for i, d in enumerate(dims):
        before = int(np.prod(dims[:i])) if i else 1
        after = total // (before * d)
        sx, sy, sz = spin_matrices(sm.spins[i])
        trio = []
        for o in (sx, sy, sz):
            full = sp.kron(sp.identity(before, format="csr"),
                           sp.kron(sp.csr_matrix(o), sp.identity(after, format="csr")))
            trio.append(full.tocsr())
        ops.append(trio)
    return dims, ops


def build_hamiltonian(sm: SpinModel) -> np.ndarray:
    """Dense Hamiltonian matrix of a :class:`SpinModel`."""
    dims, ops = _site_operators(sm)
    total = int(np.prod(dims))
    h = sp.csr_matrix((total, total), dtype=complex)
    for i in range(sm.n):
        for a in range(3):
            if sm.fields[i, a] != 0.0:
                h = h + sm.fields[i, a] * ops[i][a]
    for i in range(sm.n):
        for j in range(i + 1, sm.n):
            block = sm.couplings[i, :, j, :]
            if not np.any(block):
                continue
            for a in range(3):
                for b in range(3):
                    if block[a, b] != 0.0:
                        # the double sum counts (i,j) and (j,i); symmetry folds
                        # them into a single term with unit weight
                        h = h - block[a, b] * (ops[i][a] @ ops[j][b])
    hd = np.asarray(h.todense())
    if np.max(np.abs(hd.imag)) < 1e-14 * max(1.0, np.max(np.abs(hd.real))):
        hd = np.ascontiguousarray(hd.real)
    return hd


def parity_diagonal(sm: SpinModel) -> np.ndarray:
    """Diagonal of P_z = exp[i pi sum_i (s_iz - s_i)]; entries are +-1."""
    dims = [int(round(2 * s)) + 1 for s in sm.spins]
    par = np.ones(1)
    for d in dims:
        k = np.arange(d)  # m = s - k, so m - s = -k
        par = np.kron(par, (-1.0) ** k)
    return par


@dataclass(frozen=True)
class DenseGroundState:
    """Ground level of the dense oracle.

    ``energies``/``parities`` hold the lowest computed levels; ``degenerate``
    flags a gap below tolerance, in which case both members are reported
    rather than one being picked silently.
    """

    energy: float
    psi: np.ndarray
    parity: float
    degenerate: bool
    energies: np.ndarray
    parities: np.ndarray
    dims: tuple


def dense_ground_state(sm: SpinModel, dim_cap: int = DEFAULT_DIM_CAP,
                       levels: int = 4) -> DenseGroundState:
    """Lowest eigenpairs of the dense Hamiltonian with parity labels."""
    dims = [int(round(2 * s)) + 1 for s in sm.spins]
    total = int(np.prod(dims))
    if total > dim_cap:
        raise OracleError(f"product dimension {total} exceeds cap {dim_cap}")
    h = build_hamiltonian(sm)
    k = min(levels, total)
    evals, evecs = scipy.linalg.eigh(h, subset_by_index=[0, k - 1])
    par = parity_diagonal(sm)
    parities = np.array([
        float(np.real(np.vdot(evecs[:, j], par * evecs[:, j]))) for j in range(k)
    ])
    scale = max(1.0, float(abs(evals[0])))
    degenerate = k > 1 and (evals[1] - evals[0]) < DEGENERACY_TOL * scale
    psi = evecs[:, 0]
    if np.iscomplexobj(psi) and np.max(np.abs(psi.imag)) < 1e-12:
        psi = psi.real
    return DenseGroundState(
        energy=float(evals[0]),
        psi=psi,
        parity=float(np.round(parities[0])) if abs(parities[0]) > 0.99 else float(parities[0]),
        degenerate=bool(degenerate),
        energies=evals,
        parities=parities,
        dims=tuple(dims),
    )


def amplitude_matrix(psi: np.ndarray, dims, keep) -> np.ndarray:
    """Reshape |psi> into a (kept sites) x (rest) matrix; rho_A = mat mat†.

    Its singular values sigma give the Schmidt spectrum: the eigenvalues of
    rho_A are sigma^2.  Working with sigma avoids the sqrt-of-noise loss when
    quantities like tr sqrt(rho_A) are needed.
    """
    n = len(dims)
    keep = list(keep)
    rest = [i for i in range(n) if i not in keep]
    perm = keep + rest
    t = psi.reshape(dims).transpose(perm)
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d_keep, -1)


def reduced_density(psi: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace of |psi><psi| keeping the sites in ``keep`` (in order)."""
    mat = amplitude_matrix(psi, dims, keep)
    return mat @ mat.conj().T


def vn_entropy_bits(rho: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-14]
    return float(-np.sum(evals * np.log2(evals)))


def _schmidt_entropy_bits(sigma: np.ndarray) -> float:
    p = sigma[sigma > 1e-9] ** 2
    return float(-np.sum(p * np.log2(p)))


def _schmidt_global_negativity(sigma: np.ndarray) -> float:
    return 0.5 * (float(np.sum(sigma)) ** 2 - 1.0)


def partial_transpose_density(rho: np.ndarray, dim_b: int, dim_c: int) -> np.ndarray:
    """Transpose the second factor of a (dim_b * dim_c)-dimensional density."""
    t = rho.reshape(dim_b, dim_c, dim_b, dim_c)
    return t.transpose(0, 3, 2, 1).reshape(dim_b * dim_c, dim_b * dim_c)


def matrix_negativity(rho: np.ndarray, dim_b: int, dim_c: int) -> float:
    """N = -(sum of negative eigenvalues) of the partial transpose."""
    evals = np.linalg.eigvalsh(partial_transpose_density(rho, dim_b, dim_c))
    return float(-np.sum(evals[evals < 0.0]))


def exact_entanglement(sm: SpinModel, sites, split=None,
                       dim_cap: int = DEFAULT_DIM_CAP) -> dict:
    """Ground energy, subsystem entropy and negativity from dense diagonalization.

    Without ``split`` the negativity refers to the (A, complement) bipartition
    of the pure ground state; with ``split=(B, C)`` (site labels partitioning
    A) it is the negativity of the partial transpose of rho_A over C.
    """
    gs = dense_ground_state(sm, dim_cap=dim_cap)
    sites = list(sites)
    amp = amplitude_matrix(gs.psi, gs.dims, sites)
    sigma = scipy.linalg.svdvals(amp)
    out = {
        "energy": gs.energy,
        "entropy": _schmidt_entropy_bits(sigma),
        "parity": gs.parity,
        "degenerate": gs.degenerate,
        "energies": gs.energies,
    }
    if split is None:
        out["negativity"] = _schmidt_global_negativity(sigma)
    else:
        b_sites, c_sites = list(split[0]), list(split[1])
        if sorted(b_sites + c_sites) != sorted(sites):
            raise OracleError("split halves must partition the subsystem")
        ordered = b_sites + c_sites
        rho_bc = reduced_density(gs.psi, gs.dims, ordered)
        dim_b = int(np.prod([gs.dims[i] for i in b_sites]))
        dim_c = int(np.prod([gs.dims[i] for i in c_sites]))
        out["negativity"] = matrix_negativity(rho_bc, dim_b, dim_c)
    return out


# ---------------------------------------------------------------------------
# Collective (maximal-spin multiplet) oracle for the fully connected s=1/2 array
# ---------------------------------------------------------------------------


def _log_comb(n: int, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def _branch_weights(n: int, L: int, k_left: np.ndarray, k_right: np.ndarray) -> np.ndarray:
    """sqrt(C(L,kL) C(n-L,kR) / C(n,kL+kR)) with log-domain fallback."""
    if n <= 60:
        return np.sqrt(np.array([
            comb(L, kl) * comb(n - L, kr) / comb(n, kl + kr)
            for kl, kr in zip(k_left.ravel(), k_right.ravel())
        ])).reshape(k_left.shape)
    logw = _log_comb(L, k_left) + _log_comb(n - L, k_right) - _log_comb(n, k_left + k_right)
    return np.exp(0.5 * logw)


@dataclass(frozen=True)
class CollectiveGroundState:
    """Ground state of the uniformly connected s=1/2 array in the Dicke basis.

    ``amplitudes[k]`` multiplies the state with k raised spins,
    M = k - n/2, k = 0..n.
    """

    n: int
    amplitudes: np.ndarray
    energy: float
    parity: float
    degenerate: bool
    energies: np.ndarray


def collective_ground_state(model: XYZModelTI) -> CollectiveGroundState:
    """Diagonalize the fully connected s=1/2 model in the maximal-spin sector.

    The uniform coupling c_mu = J_mu(l != 0) gives (physical units, s = 1/2)

        H = B S_z - sum_mu (c_mu / s / 2) (S_mu^2 - n/4).

    Couplings are stored rescaled, so c_mu/s/2 = c_mu for s = 1/2.
    """
    if model.s != 0.5:
        raise OracleError("collective oracle requires s = 1/2")
    if not model.is_complete_graph():
        raise OracleError("collective oracle requires uniform all-to-all couplings")
    n = model.n
    cx, cy, cz = model.jx[1], model.jy[1], model.jz[1]
    dim = n + 1
    j = n / 2.0
    m = np.arange(-j, j + 1.0)  # index k: M = k - n/2
    raise_amp = np.sqrt(j * (j + 1.0) - m[:-1] * (m[:-1] + 1.0))
    s_plus = np.zeros((dim, dim))
    s_plus[np.arange(1, dim), np.arange(dim - 1)] = raise_amp
    s_minus = s_plus.T
    sx = 0.5 * (s_plus + s_minus)
    sy_im = 0.5 * (s_plus - s_minus)  # S_y = -i/2 (S+ - S-) = -i * sy_im
    sz = np.diag(m)
    # S_y^2 = -(sy_im)^2 is real, so the whole H is real symmetric
    h = model.b * sz
    h = h - cx * (sx @ sx - n / 4.0 * np.eye(dim))
    h = h - cy * (-(sy_im @ sy_im) - n / 4.0 * np.eye(dim))
    h = h - cz * (sz @ sz - n / 4.0 * np.eye(dim))
    evals, evecs = scipy.linalg.eigh(h)
    par = (-1.0) ** (n - np.arange(dim))  # sum_i (m_i - s_i) = k - n
    parities = np.array([float(evecs[:, i] @ (par * evecs[:, i])) for i in range(min(4, dim))])
    scale = max(1.0, float(abs(evals[0])))
    degenerate = dim > 1 and (evals[1] - evals[0]) < DEGENERACY_TOL * scale
    return CollectiveGroundState(
        n=n,
        amplitudes=evecs[:, 0],
        energy=float(evals[0]),
        parity=float(np.round(parities[0])) if abs(parities[0]) > 0.99 else float(parities[0]),
        degenerate=bool(degenerate),
        energies=evals[: min(4, dim)],
    )


def dicke_reduced_density(state: CollectiveGroundState, size: int, split=None) -> dict:
    """Reduced density of L sites of the collective state, entropy, negativity.

    ``size`` is L; with ``split=m`` the (m, L-m) negativity is evaluated by
    embedding rho_L into the product of the two symmetric sectors and
    transposing the second factor.
    """
    n, L = state.n, int(size)
    if not 1 <= L <= n:
        raise OracleError(f"subsystem size {L} outside 1..{n}")
    r = n - L
    k_left = np.arange(L + 1)[:, None]
    k_right = np.arange(r + 1)[None, :]
    amp = state.amplitudes[k_left + k_right]  # (L+1, r+1)
    w = _branch_weights(n, L, np.broadcast_to(k_left, amp.shape),
                        np.broadcast_to(k_right, amp.shape))
    a = amp * w
    rho_l = a @ a.T
    sigma = scipy.linalg.svdvals(a)
    out = {"rho": rho_l, "entropy": _schmidt_entropy_bits(sigma)}
    if split is None:
        out["negativity"] = _schmidt_global_negativity(sigma)
        return out

    m = int(split)
    if not 1 <= m < L:
        raise OracleError(f"split {m} outside 1..{L - 1}")
    p = L - m
    # isometry sym(L) -> sym(m) x sym(p)
    t = np.zeros(((m + 1) * (p + 1), L + 1))
    for kb in range(m + 1):
        for kc in range(p + 1):
            kl = kb + kc
            wgt = _branch_weights(L, m, np.array([[kb]]), np.array([[kc]]))[0, 0]
            t[kb * (p + 1) + kc, kl] = wgt
    rho_emb = t @ rho_l @ t.T
    out["negativity"] = matrix_negativity(rho_emb, m + 1, p + 1)
    return out

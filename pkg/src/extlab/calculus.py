"""Boundary-map calculus connecting the two extension parametrisations.

Implements, generically over a Model: the canonical boundary maps at the
spectral point zero and their imaginary-point family, both direct-sum
decompositions of D(S*), the gap metric between deficiency subspaces, and
the two reconstruction procedures (unitary parameter from the extension,
self-adjoint relative parameter from the unitary family by extrapolation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, models
from .errors import (ConsistencyFailure, DimensionMismatch, EpsOutOfRange,
                     ExtrapolationDivergence, InsufficientProbes, NotInDomain,
                     NotUnitary)
from .models import HilbertElement, Model, inner, norm

EPS_MIN, EPS_MAX = 1e-5, 0.5
RECON_TOL = 1e-8          # direct-sum membership defect
UNITARY_TOL = 1e-7
DOMAIN_RANK_TOL = 1e-7    # limit vectors below this (relative) are "T = infinity" directions
EXTRAP_TOL = 1e-5


def _check_eps(eps):
    if not (EPS_MIN <= eps <= EPS_MAX):
        raise EpsOutOfRange(f"eps = {eps} outside [{EPS_MIN}, {EPS_MAX}]")
    return float(eps)


# -- kernel projections ------------------------------------------------------

def kernel_coords(model: Model, g: HilbertElement, z) -> np.ndarray:
    """Coordinates of P_{ker(S*-z)} g in the orthonormal deficiency basis."""
    basis = model.deficiency_basis(z)
    return np.array([inner(b, g) for b in basis])


def project_kernel(model: Model, g: HilbertElement, z) -> HilbertElement:
    basis = model.deficiency_basis(z)
    out = model.zero()
    for b in basis:
        out = out + inner(b, g) * b
    return out


# -- boundary maps -----------------------------------------------------------

def gamma0(model: Model, g: HilbertElement) -> HilbertElement:
    """g - S_F^{-1} S* g, the value-type boundary map into ker S*."""
    return g - model.distinguished_resolvent(model.apply_adjoint(g))


def gamma1(model: Model, g: HilbertElement) -> HilbertElement:
    """P_{ker S*} S* g, the derivative-type boundary map."""
    return project_kernel(model, model.apply_adjoint(g), 0.0)


def gamma1_eps(model: Model, g: HilbertElement, eps, sign: str) -> HilbertElement:
    """P_{ker(S* -+ i eps)} (S* +- i eps) g; sign '-' projects onto
    ker(S* - i eps), sign '+' onto ker(S* + i eps)."""
    eps = _check_eps(eps)
    if sign not in ("-", "+"):
        raise ValueError(f"sign must be '-' or '+', got {sign!r}")
    z = 1j * eps if sign == "-" else -1j * eps
    shifted = model.apply_adjoint(g, -z)  # (S* + z-bar) g = (S* -+(-) i eps) g
    return project_kernel(model, shifted, z)


def upsilon_eps(model: Model, g: HilbertElement, eps) -> HilbertElement:
    """(Gamma1eps- - Gamma1eps+) / (2 i eps) = u_eps - v_eps."""
    eps = _check_eps(eps)
    diff = gamma1_eps(model, g, eps, "-") - gamma1_eps(model, g, eps, "+")
    return (1.0 / (2j * eps)) * diff


def gamma0_eps(model: Model, g: HilbertElement, eps) -> HilbertElement:
    return gamma0(model, upsilon_eps(model, g, eps))


# -- decompositions ----------------------------------------------------------

@dataclass(frozen=True)
class VnDecomposition:
    """g = f_eps + u_eps - v_eps with f_eps in D(S-bar) and
    u_eps, v_eps in the deficiency spaces at +- i eps."""
    f_eps: HilbertElement
    u_eps: HilbertElement
    v_eps: HilbertElement
    eps: float


@dataclass(frozen=True)
class KvbDecomposition:
    """g = f + S_F^{-1} u1 + u0 with f in D(S-bar) and u0, u1 in ker S*."""
    f: HilbertElement
    u1: HilbertElement
    u0: HilbertElement


def decompose_vn(model: Model, g: HilbertElement, eps) -> VnDecomposition:
    eps = _check_eps(eps)
    u_eps = (1.0 / (2j * eps)) * gamma1_eps(model, g, eps, "-")
    v_eps = (1.0 / (2j * eps)) * gamma1_eps(model, g, eps, "+")
    f_eps = g - u_eps + v_eps
    if not model.closure_membership(f_eps, tol=RECON_TOL):
        raise ConsistencyFailure("regular part of the imaginary-point "
                                 "decomposition has nonvanishing traces")
    return VnDecomposition(f_eps, u_eps, v_eps, eps)


def decompose_kvb(model: Model, g: HilbertElement) -> KvbDecomposition:
    u0 = gamma0(model, g)
    u1 = gamma1(model, g)
    f = g - model.distinguished_resolvent(u1) - u0
    if not model.closure_membership(f, tol=RECON_TOL):
        raise ConsistencyFailure("regular part of the canonical "
                                 "decomposition has nonvanishing traces")
    return KvbDecomposition(f, u1, u0)


# -- subspace gap ------------------------------------------------------------

def subspace_gap(model: Model, a_vectors, b_vectors):
    """Directed gaps and the symmetric gap between the spans of two finite
    vector lists, via Gram matrices on the joint span."""
    a = linalg.orthonormalize(list(a_vectors), inner)
    b = linalg.orthonormalize(list(b_vectors), inner)

    def directed(p, q):
        if not p:
            return 0.0
        if not q:
            return 1.0
        c = np.array([[inner(qj, pi) for pi in p] for qj in q])
        m = np.eye(len(p)) - c.conj().T @ c
        w, _ = linalg.hermitian_eigen(m)
        return math.sqrt(min(max(w[-1], 0.0), 1.0))

    dab = directed(a, b)
    dba = directed(b, a)
    return dab, dba, max(dab, dba)


def projection_gap_norm(model: Model, eps, sign: str) -> float:
    """Operator norm of P_{ker(S* -+ i eps)} - P_{ker S*}.

    The difference of two finite-rank orthogonal projections is Hermitian
    with range inside the joint span of the two subspaces, so the norm is
    the largest |eigenvalue| of its matrix in an orthonormal basis of that
    span."""
    eps = _check_eps(eps)
    z = 1j * eps if sign == "-" else -1j * eps
    ka = model.deficiency_basis(z)
    kb = model.deficiency_basis(0.0)
    joint = linalg.orthonormalize(ka + kb, inner)

    def proj_matrix(basis):
        c = np.array([[inner(e, b) for b in basis] for e in joint])
        return c @ c.conj().T

    diff = proj_matrix(ka) - proj_matrix(kb)
    w, _ = linalg.hermitian_eigen(diff)
    return float(np.abs(w).max())


# -- extension parameters ----------------------------------------------------

@dataclass(frozen=True)
class VnParameter:
    """Unitary parameter matrix in the orthonormal deficiency bases at z and
    z-bar; for deficiency index 1 the phase theta is exposed directly."""
    z: complex
    matrix: np.ndarray

    @property
    def theta(self) -> float:
        if self.matrix.shape != (1, 1):
            raise DimensionMismatch("theta is defined only for deficiency index 1")
        return float(np.angle(self.matrix[0, 0])) % (2.0 * math.pi)


@dataclass(frozen=True)
class KvbParameter:
    """Relative parameter: Hermitian matrix of T on an orthonormal basis of
    its domain inside ker S*, plus the orthogonal complement directions."""
    domain_basis: list
    t_matrix: np.ndarray
    complement_basis: list
    asymmetry: float = 0.0


def vn_components(model: Model, ext: models.Extension, g: HilbertElement, eps):
    """(u_eps, U_eps u_eps, f_eps) of g in the domain of the extension."""
    eps = _check_eps(eps)
    sg = ext.apply(g)  # raises NotInDomain when g fails the boundary conditions
    u = (1.0 / (2j * eps)) * project_kernel(model, sg + (1j * eps) * g, 1j * eps)
    uu = (1.0 / (2j * eps)) * project_kernel(model, sg + (-1j * eps) * g, -1j * eps)
    f = g - u + uu
    if not model.closure_membership(f, tol=RECON_TOL):
        raise ConsistencyFailure("regular component failed the closure traces")
    return u, uu, f


def _reconstruct_u_from_images(model, z, pairs):
    """Solve U X = Y in the orthonormal deficiency bases at z and z-bar,
    where pairs yield (image at z, image at z-bar) per probe."""
    d = model.deficiency_index
    x = np.array([kernel_coords(model, p, z) for p, _ in pairs]).T
    y = np.array([kernel_coords(model, q, z.conjugate()) for _, q in pairs]).T
    svals = np.linalg.svd(x, compute_uv=False)
    # rank relative to the size of the generating pair, not of the images:
    # probes from the closure domain have images that are pure rounding noise
    scale = max(max(norm(p) for p, _ in pairs), 1e-30)
    if len(svals) < d or svals[d - 1] <= 1e-10 * scale:
        raise InsufficientProbes(
            f"probe images span rank {int(np.sum(svals > 1e-10 * svals[0]))} < {d}")
    u = y @ np.linalg.pinv(x)
    defect = np.abs(u.conj().T @ u - np.eye(d)).max()
    if defect > UNITARY_TOL:
        raise NotUnitary(f"unitarity defect {defect:.3e}")
    return VnParameter(z=complex(z), matrix=u)


def reconstruct_U(model: Model, ext: models.Extension, z, probes) -> VnParameter:
    """Unitary parameter of the extension at the spectral point z = i*eps,
    solved from U P_{ker(S*-z)}(S~ - z-bar) g = P_{ker(S*-z-bar)}(S~ - z) g
    over the probes."""
    z = complex(z)
    _check_eps(abs(z.imag))
    if abs(z.real) > 1e-14 or z.imag <= 0:
        raise ValueError(f"z restricted to the positive imaginary axis, got {z}")
    pairs = []
    for g in probes:
        sg = ext.apply(g)
        pairs.append((sg - z.conjugate() * g, sg - z * g))
    return _reconstruct_u_from_images(model, z, pairs)


def kvb_components(model: Model, ext: models.Extension, g: HilbertElement):
    """(f, u, Tu + w) of g relative to the distinguished extension."""
    sg = ext.apply(g)
    u = g - model.distinguished_resolvent(sg)
    tu_w = project_kernel(model, sg, 0.0)
    f = model.distinguished_resolvent(sg - tu_w)
    recon = f + model.distinguished_resolvent(tu_w) + u
    scale = max(norm(g), 1.0)
    if norm(recon - g) > RECON_TOL * scale:
        raise ConsistencyFailure("canonical components do not reassemble g")
    return f, u, tu_w


# -- extrapolation -----------------------------------------------------------

def richardson_pair(v_coarse, v_fine, eps_coarse, eps_fine):
    """Limit at eps = 0 of a quantity with O(eps) error, from two samples.
    For eps_fine = eps_coarse / 2 this is the classical 2 v(e/2) - v(e)."""
    den = eps_coarse - eps_fine
    return (eps_coarse / den) * v_fine + (-eps_fine / den) * v_coarse


def extrapolate_to_zero(eps_grid, values, order=2):
    """Neville extrapolation to eps = 0 through the last (order + 1) samples.
    Works on anything with + and scalar *."""
    pts = list(zip(eps_grid, values))[-(order + 1):]
    tab = [v for _, v in pts]
    es = [e for e, _ in pts]
    for lvl in range(1, len(tab)):
        for i in range(len(tab) - lvl):
            e0, e1 = es[i], es[i + lvl]
            tab[i] = (e0 / (e0 - e1)) * tab[i + 1] + (-e1 / (e0 - e1)) * tab[i]
    return tab[0]


def reconstruct_T(model: Model, ext: models.Extension, probes, eps_grid) -> KvbParameter:
    """Recover the relative parameter of the extension from its unitary
    family: per probe, extrapolate to eps = 0 the pair

        a_eps = (1 - S_F^{-1} S*)(u_eps - U_eps u_eps)   -> u
        b_eps = i eps (u_eps + U_eps u_eps)              -> T u + w

    then assemble the Hermitian matrix of T on the span of the limits."""
    eps_grid = [_check_eps(e) for e in eps_grid]
    if len(eps_grid) < 3 or any(a <= b for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing with >= 3 points")
    if not probes:
        raise InsufficientProbes("no probes supplied")

    limits = []
    for g in probes:
        a_vals, b_vals = [], []
        for eps in eps_grid:
            u, uu, _ = vn_components(model, ext, g, eps)
            duu = u - uu
            a_vals.append(duu - model.distinguished_resolvent(model.apply_adjoint(duu)))
            b_vals.append((1j * eps) * (u + uu))
        a0 = richardson_pair(a_vals[-2], a_vals[-1], eps_grid[-2], eps_grid[-1])
        b0 = richardson_pair(b_vals[-2], b_vals[-1], eps_grid[-2], eps_grid[-1])
        a0_prev = richardson_pair(a_vals[-3], a_vals[-2], eps_grid[-3], eps_grid[-2])
        b0_prev = richardson_pair(b_vals[-3], b_vals[-2], eps_grid[-3], eps_grid[-2])
        resid = max(norm(a0 - a0_prev) / max(norm(a0), 1.0),
                    norm(b0 - b0_prev) / max(norm(b0), 1.0))
        if resid > EXTRAP_TOL:
            raise ExtrapolationDivergence(f"extrapolation residual {resid:.3e}")
        limits.append((a0, b0))

    probe_scale = max(max(norm(g) for g in probes), 1e-30)
    domain_vecs = [a for a, _ in limits if norm(a) >= DOMAIN_RANK_TOL * probe_scale]
    domain_basis = linalg.orthonormalize(domain_vecs, inner,
                                         rank_tol=DOMAIN_RANK_TOL)
    kernel = model.deficiency_basis(0.0)
    residual = []
    for k in kernel:
        r = k
        for q in domain_basis:
            r = r - inner(q, r) * q
        residual.append(r)
    complement_basis = linalg.orthonormalize(residual, inner,
                                             rank_tol=DOMAIN_RANK_TOL)

    nd = len(domain_basis)
    if nd == 0:
        return KvbParameter([], np.zeros((0, 0), dtype=complex), complement_basis)
    # T x = P_domain b over the probe limits, least squares in coordinates
    x = np.array([[inner(q, a) for a, _ in limits] for q in domain_basis])
    y = np.array([[inner(q, b) for _, b in limits] for q in domain_basis])
    t_raw = y @ np.linalg.pinv(x)
    asym = float(np.abs(t_raw - t_raw.conj().T).max())
    t = (t_raw + t_raw.conj().T) / 2.0
    return KvbParameter(domain_basis, t, complement_basis, asymmetry=asym)


def build_kvb_domain_vector(model: Model, kvb: KvbParameter, f: HilbertElement,
                            u_coords, w_coords) -> HilbertElement:
    """g = f + S_F^{-1}(T u + w) + u for u, w given by coordinates in the
    parameter's bases; f must lie in D(S-bar)."""
    u_coords = np.asarray(u_coords, dtype=complex)
    w_coords = np.asarray(w_coords, dtype=complex)
    if u_coords.shape != (len(kvb.domain_basis),):
        raise DimensionMismatch(f"expected {len(kvb.domain_basis)} domain coordinates")
    if w_coords.shape != (len(kvb.complement_basis),):
        raise DimensionMismatch(f"expected {len(kvb.complement_basis)} complement coordinates")
    if not model.closure_membership(f):
        raise ConsistencyFailure("f is not in the domain of the closure")
    u = model.zero()
    for c, q in zip(u_coords, kvb.domain_basis):
        u = u + complex(c) * q
    tu_w = model.zero()
    if len(kvb.domain_basis):
        tcoords = kvb.t_matrix @ u_coords
        for c, q in zip(tcoords, kvb.domain_basis):
            tu_w = tu_w + complex(c) * q
    for c, r in zip(w_coords, kvb.complement_basis):
        tu_w = tu_w + complex(c) * r
    return f + model.distinguished_resolvent(tu_w) + u


def extension_from_vn(model: Model, vn: VnParameter) -> models.Extension:
    """Extension encoded by a unitary parameter at z = i*eps: the domain is
    D(S-bar) + span{u_i - U u_i} over the deficiency basis at z, expressed as
    homogeneous boundary conditions via the trace span of those generators."""
    z = complex(vn.z)
    d = model.deficiency_index
    if vn.matrix.shape != (d, d):
        raise DimensionMismatch(f"expected a {d}x{d} unitary parameter")
    minus = model.deficiency_basis(z)
    plus = model.deficiency_basis(z.conjugate())
    gens = []
    for i in range(d):
        g = minus[i]
        for j in range(d):
            g = g - complex(vn.matrix[j, i]) * plus[j]
        gens.append(g)
    traces = np.array([model.boundary_trace(g) for g in gens])
    _, s, vh = np.linalg.svd(traces)
    rank = int(np.sum(s > 1e-10 * s[0]))
    rows = vh[rank:].conj()
    cons = lambda tr: [complex(np.dot(w, np.asarray(tr, dtype=complex))) for w in rows]
    return models.Extension(f"from_vn@{z.imag:g}", model, cons)


def kvb_to_vn(model: Model, kvb: KvbParameter, z) -> VnParameter:
    """Unitary parameter at z = i*eps of the extension encoded by a relative
    parameter, via spanning probes built from its canonical data."""
    z = complex(z)
    _check_eps(abs(z.imag))
    if abs(z.real) > 1e-14 or z.imag <= 0:
        raise ValueError(f"z restricted to the positive imaginary axis, got {z}")
    nd, nw = len(kvb.domain_basis), len(kvb.complement_basis)
    probes = []
    for i in range(nd):
        e = np.zeros(nd)
        e[i] = 1.0
        probes.append(build_kvb_domain_vector(model, kvb, model.zero(), e, np.zeros(nw)))
    for j in range(nw):
        e = np.zeros(nw)
        e[j] = 1.0
        probes.append(build_kvb_domain_vector(model, kvb, model.zero(), np.zeros(nd), e))
    probes.append(models._closure_element(model))
    pairs = []
    for g in probes:
        sg = model.apply_adjoint(g)  # probes are in D(S~) by construction
        pairs.append((sg - z.conjugate() * g, sg - z * g))
    return _reconstruct_u_from_images(model, z, pairs)

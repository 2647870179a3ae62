"""Concrete operator models and their self-adjoint extensions.

Two models ship: the half-line Schrodinger operator -d^2/dx^2 + 1 with
compactly supported core (deficiency index 1), and its two-half-line variant
on L2(R-) (+) L2(R+) (deficiency index 2).  The left half-line channel is
stored reflected onto [0, inf), so a single ExpPoly engine serves both
channels; the derivative sign flip lives entirely in boundary_trace.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import exppoly as ep
from .errors import NotInDomain
from .exppoly import ExpPoly

TRACE_TOL = 1e-9


@dataclass(frozen=True)
class HilbertElement:
    """Tuple of ExpPoly channels; channel 0 of a two-channel element is the
    left half-line function reflected onto [0, inf)."""
    channels: tuple

    def __add__(self, other):
        return HilbertElement(tuple(a + b for a, b in zip(self.channels, other.channels, strict=True)))

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, c):
        return HilbertElement(tuple(complex(c) * p for p in self.channels))

    __rmul__ = __mul__

    def is_zero(self):
        return all(p.is_zero() for p in self.channels)

    def __repr__(self):
        return "HilbertElement(" + ", ".join(repr(p) for p in self.channels) + ")"


def inner(a: HilbertElement, b: HilbertElement) -> complex:
    """Channel-wise sum of half-line inner products (reflection is unitary)."""
    return sum((ep.inner_product(p, q)
                for p, q in zip(a.channels, b.channels, strict=True)), complex(0))


def norm(a: HilbertElement) -> float:
    return math.sqrt(max(inner(a, a).real, 0.0))


def element(*channels) -> HilbertElement:
    return HilbertElement(tuple(channels))


def _decay(z):
    """Principal-branch sqrt(1 - z); the decay rate of ker(S* - z)."""
    w = cmath.sqrt(1.0 - complex(z))
    assert w.real > 0
    return w


class Model:
    """Operator family descriptor: adjoint action, deficiency bases,
    distinguished (Friedrichs) resolvent, closure-range solve, traces."""

    def __init__(self, name, channel_count):
        self.name = name
        self.channel_count = channel_count
        self.deficiency_index = channel_count
        self.lower_bound = 1.0

    def zero(self):
        return HilbertElement((ExpPoly.zero(),) * self.channel_count)

    def apply_adjoint(self, g: HilbertElement, z=0.0) -> HilbertElement:
        """(S* - z) g, channel-wise -g'' + g - z g."""
        return HilbertElement(tuple(ep.apply_shifted(p, z) for p in g.channels))

    def deficiency_basis(self, z):
        """Orthonormal basis of ker(S* - z), one vector per channel.

        Each basis vector is sqrt(2 Re w) e^{-w x} on its channel with
        w = sqrt(1 - z); for z = i*eps this reproduces the normalization
        sqrt(2) * kappa_eps."""
        w = _decay(z)
        c = math.sqrt(2.0 * w.real)
        vecs = []
        for ch in range(self.channel_count):
            polys = [ExpPoly.zero()] * self.channel_count
            polys[ch] = ExpPoly.single(c, 0, w)
            vecs.append(HilbertElement(tuple(polys)))
        return vecs

    def distinguished_resolvent(self, f: HilbertElement) -> HilbertElement:
        """S_F^{-1} f: channel-wise decaying solve with vanishing value trace."""
        return HilbertElement(tuple(ep.solve_resolvent(p, 0.0, "dirichlet")
                                    for p in f.channels))

    def closure_solve(self, f: HilbertElement) -> HilbertElement:
        """Inverse of the closure on its range; NotInRange when f has a
        component along ker S*."""
        return HilbertElement(tuple(ep.solve_resolvent(p, 0.0, "doublezero")
                                    for p in f.channels))

    def closure_membership(self, g: HilbertElement, tol=TRACE_TOL) -> bool:
        """True when both traces vanish on every channel."""
        scale = max(1.0, max(abs(t) for t in self.raw_traces(g)))
        return all(abs(t) <= tol * scale for t in self.raw_traces(g))

    def raw_traces(self, g: HilbertElement):
        """Stored-representation traces (value, derivative) per channel."""
        out = []
        for p in g.channels:
            v0, d0 = p.boundary_values()
            out.extend([v0, d0])
        return out

    def boundary_trace(self, g: HilbertElement):
        """Physical traces.  Half-line: (g(0), g'(0)).  Two half-lines:
        (g-(0), g-'(0), g+(0), g+'(0)) with the reflection sign applied."""
        raise NotImplementedError

    def __repr__(self):
        return f"Model({self.name!r}, d={self.deficiency_index})"


class _HalfLine(Model):
    def __init__(self):
        super().__init__("halfline", 1)

    def boundary_trace(self, g):
        v0, d0 = g.channels[0].boundary_values()
        return (v0, d0)


class _TwoHalfLines(Model):
    def __init__(self):
        super().__init__("twohalflines", 2)

    def boundary_trace(self, g):
        lv, ld = g.channels[0].boundary_values()
        rv, rd = g.channels[1].boundary_values()
        # left channel stored reflected: g-(0) = check(0), g-'(0) = -check'(0)
        return (lv, -ld, rv, rd)


def make_halfline_model() -> Model:
    return _HalfLine()


def make_twohalflines_model() -> Model:
    return _TwoHalfLines()


MODELS = {"halfline": make_halfline_model, "twohalflines": make_twohalflines_model}


@dataclass(frozen=True)
class Extension:
    """Self-adjoint extension given by homogeneous linear boundary conditions.

    constraints maps the boundary_trace tuple to a list of complex numbers
    that all vanish exactly on members of the domain."""
    name: str
    model: Model
    constraints: object = field(repr=False)

    def constraint_values(self, g: HilbertElement):
        return self.constraints(self.model.boundary_trace(g))

    def membership(self, g: HilbertElement, tol=TRACE_TOL) -> bool:
        traces = self.model.boundary_trace(g)
        scale = max(1.0, max(abs(t) for t in traces))
        return all(abs(c) <= tol * scale for c in self.constraint_values(g))

    def apply(self, g: HilbertElement) -> HilbertElement:
        """S~ g = S* g, after checking the boundary conditions."""
        if not self.membership(g):
            vals = [abs(c) for c in self.constraint_values(g)]
            raise NotInDomain(f"{self.name}: boundary defect {max(vals):.3e}")
        return self.model.apply_adjoint(g)


def make_friedrichs_extension(model: Model) -> Extension:
    """Membership: all value traces vanish."""
    if model.channel_count == 1:
        cons = lambda tr: [tr[0]]
    else:
        cons = lambda tr: [tr[0], tr[2]]
    return Extension("friedrichs", model, cons)


def make_salpha_extension(model: Model, alpha: float) -> Extension:
    """Point interaction of strength alpha at the origin:
    g+(0) = g-(0) = g0 and g+'(0) - g-'(0) = alpha * g0."""
    if model.channel_count != 2:
        raise ValueError("salpha extensions live on the two-half-line model")
    a = float(alpha)
    cons = lambda tr: [tr[2] - tr[0], tr[3] - tr[1] - a * tr[2]]
    return Extension(f"salpha:{a:g}", model, cons)


def make_extension(model: Model, spec: str) -> Extension:
    """Parse an extension spec: 'friedrichs' or 'salpha:<alpha>'."""
    if spec == "friedrichs":
        return make_friedrichs_extension(model)
    if spec.startswith("salpha:"):
        return make_salpha_extension(model, float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown extension spec {spec!r}")


def apply_extension(ext: Extension, g: HilbertElement) -> HilbertElement:
    return ext.apply(g)


def canonical_probes(model: Model, ext: Extension, rng=None):
    """Domain elements whose deficiency images span ker(S* -+ i eps).

    Built from the 2d-dimensional family span{S_F^{-1} k_i, k_i} over the
    ker S* basis by solving the extension's boundary constraints, plus one
    element of the closure domain."""
    kbasis = model.deficiency_basis(0.0)
    gens = [model.distinguished_resolvent(k) for k in kbasis] + list(kbasis)
    rows = []
    ncons = len(ext.constraint_values(model.zero() + gens[0]))  # constraint count
    mat = np.zeros((ncons, len(gens)), dtype=complex)
    for j, h in enumerate(gens):
        mat[:, j] = ext.constraint_values(h)
    # orthonormal basis of the constraint nullspace
    _, s, vh = np.linalg.svd(mat)
    rank = int(np.sum(s > 1e-12 * (s[0] if len(s) else 1.0)))
    null = vh[rank:].conj()
    probes = []
    for coeffs in null:
        g = model.zero()
        for c, h in zip(coeffs, gens):
            g = g + complex(c) * h
        probes.append(g)
    probes.append(_closure_element(model, rng))
    return probes


def _closure_element(model: Model, rng=None):
    """A fixed or randomized element of D(S-bar) (both traces zero)."""
    if rng is None:
        polys = [ExpPoly.single(1.0, 2, 1.0 + 0.25 * ch) for ch in range(model.channel_count)]
        return HilbertElement(tuple(polys))
    polys = []
    for _ in range(model.channel_count):
        lam = complex(rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5))
        c = complex(rng.standard_normal(), rng.standard_normal())
        polys.append(ExpPoly.single(c, 2, lam))
    return HilbertElement(tuple(polys))


def random_adjoint_element(model: Model, rng, terms=3) -> HilbertElement:
    """Seeded generic element of D(S*): random coefficients, powers <= 2,
    rates with positive real part.  Traces are generically nonzero."""
    polys = []
    for _ in range(model.channel_count):
        p = ExpPoly.zero()
        for _ in range(terms):
            lam = complex(rng.uniform(0.4, 2.2), rng.uniform(-0.8, 0.8))
            c = complex(rng.standard_normal(), rng.standard_normal())
            p = p + ExpPoly.single(c, int(rng.integers(0, 3)), lam)
        polys.append(p)
    return HilbertElement(tuple(polys))

"""Exact algebra of exponential polynomials on the half line.

An ExpPoly represents f(x) = sum_k c_k x^{m_k} e^{-lam_k x} on [0, inf) with
Re lam_k > 0, so f and all its derivatives are square integrable.  The class
is closed under addition, scalar multiplication, differentiation, conjugation
and the shifted Schrodinger action -f'' + f - z f, and inner products have a
closed form, so every computation downstream of this module is exact up to
floating-point rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from mpmath import mp, mpc

from .errors import NotInRange

RATE_TOL = 1e-8     # relative tolerance for merging rates / resonance detection
COEFF_TOL = 1e-12   # relative to the largest coefficient, for dropping terms
TRACE_TOL = 1e-9    # boundary-trace decisions (range membership)


@dataclass(frozen=True)
class Term:
    """One summand c * x^power * e^{-rate*x} with Re(rate) > 0."""
    coeff: complex
    power: int
    rate: complex


def _same_rate(a: complex, b: complex) -> bool:
    return abs(a - b) <= RATE_TOL * (1.0 + abs(a))


def _canonicalize(terms):
    """Merge coincident (power, rate) pairs, drop negligible coefficients,
    sort lexicographically by (Re rate, Im rate, power)."""
    merged = []
    for t in terms:
        if t.coeff == 0:
            continue
        for i, s in enumerate(merged):
            if s.power == t.power and _same_rate(s.rate, t.rate):
                merged[i] = Term(s.coeff + t.coeff, s.power, s.rate)
                break
        else:
            merged.append(t)
    if not merged:
        return ()
    cmax = max(abs(t.coeff) for t in merged)
    kept = [t for t in merged if abs(t.coeff) > COEFF_TOL * cmax]
    kept.sort(key=lambda t: (t.rate.real, t.rate.imag, t.power))
    return tuple(kept)


class ExpPoly:
    """Finite sum of Term values in canonical form.  Immutable."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        object.__setattr__(self, "terms", _canonicalize(terms))

    def __setattr__(self, *_):
        raise AttributeError("ExpPoly is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def single(coeff, power, rate):
        coeff = complex(coeff)
        rate = complex(rate)
        if power < 0 or int(power) != power:
            raise ValueError(f"power must be a nonnegative integer, got {power}")
        if coeff != 0 and rate.real <= 0:
            raise ValueError(f"Re(rate) must be positive, got {rate}")
        return ExpPoly([Term(coeff, int(power), rate)])

    @staticmethod
    def zero():
        return ExpPoly()

    # -- ring/vector operations -------------------------------------------

    def __add__(self, other):
        return ExpPoly(self.terms + other.terms)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, c):
        c = complex(c)
        return ExpPoly([Term(c * t.coeff, t.power, t.rate) for t in self.terms])

    __rmul__ = __mul__

    def conjugate(self):
        return ExpPoly([Term(t.coeff.conjugate(), t.power, t.rate.conjugate())
                        for t in self.terms])

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, ExpPoly) and (self - other).is_zero()

    def __hash__(self):
        return hash(len(self.terms))

    def __repr__(self):
        if not self.terms:
            return "ExpPoly(0)"
        bits = [f"({t.coeff:.6g})*x^{t.power}*exp(-({t.rate:.6g})x)"
                for t in self.terms]
        return "ExpPoly(" + " + ".join(bits) + ")"

    # -- calculus ----------------------------------------------------------

    def derivative(self):
        out = []
        for t in self.terms:
            if t.power > 0:
                out.append(Term(t.coeff * t.power, t.power - 1, t.rate))
            out.append(Term(-t.coeff * t.rate, t.power, t.rate))
        return ExpPoly(out)

    def boundary_values(self):
        """Return (f(0), f'(0)), exact from the coefficients."""
        v0 = sum((t.coeff for t in self.terms if t.power == 0), complex(0))
        d0 = complex(0)
        for t in self.terms:
            if t.power == 1:
                d0 += t.coeff
            if t.power == 0:
                d0 -= t.coeff * t.rate
        return v0, d0

    def __call__(self, x):
        """Point evaluation; used by the quadrature oracle."""
        return sum((t.coeff * x ** t.power * cmath.exp(-t.rate * x)
                    for t in self.terms), complex(0))

    def max_coeff(self):
        return max((abs(t.coeff) for t in self.terms), default=0.0)


# -- inner product ---------------------------------------------------------

def inner_product(p: ExpPoly, q: ExpPoly) -> complex:
    """L2(0, inf) inner product, anti-linear in the first entry.

    Uses int_0^inf x^n e^{-a x} dx = n! / a^{n+1} with Re(a) > 0 termwise.
    The sum is evaluated in 40-digit arithmetic: coefficients of size 1/eps
    routinely cancel down to O(eps) here, which double precision cannot
    survive at the small end of the supported eps range.
    """
    with mp.workdps(40):
        acc = mpc(0)
        for s in p.terms:
            cs = mpc(s.coeff.conjugate())
            for t in q.terms:
                n = s.power + t.power
                a = mpc(s.rate.conjugate()) + mpc(t.rate)
                acc += cs * mpc(t.coeff) * math.factorial(n) / a ** (n + 1)
        return complex(acc)


def norm(p: ExpPoly) -> float:
    return math.sqrt(max(inner_product(p, p).real, 0.0))


# -- operator action and resolvent solves ----------------------------------

def apply_shifted(p: ExpPoly, z: complex) -> ExpPoly:
    """(-d^2/dx^2 + 1 - z) p, exact."""
    return ExpPoly(p.terms) - p.derivative().derivative() - complex(z) * p


def _check_accepted_z(z: complex):
    z = complex(z)
    if abs(z.real) > 1e-14 or abs(z.imag) > 0.5 + 1e-14:
        raise ValueError(f"z must be 0 or +/-i*eps with eps <= 0.5, got {z}")
    w = cmath.sqrt(1.0 - z)
    if w.real <= 0:
        raise ValueError(f"principal branch violated for z = {z}")
    return z, w


def _particular_solution(group, omega):
    """Undetermined-coefficients solve of (-d2 + omega^2) u = sum of the group,
    all terms sharing one rate mu.  Raises the degree by one when resonant."""
    mu = group[0].rate
    top = max(t.power for t in group)
    rhs = [complex(0)] * (top + 1)
    for t in group:
        rhs[t.power] += t.coeff
    beta = omega * omega - mu * mu
    resonant = abs(mu - omega) <= RATE_TOL * (1.0 + abs(omega))
    if not resonant:
        # match x^j: beta*a_j + 2(j+1) mu a_{j+1} - (j+2)(j+1) a_{j+2} = rhs_j
        a = [complex(0)] * (top + 1)
        for j in range(top, -1, -1):
            val = rhs[j]
            if j + 1 <= top:
                val -= 2.0 * (j + 1) * mu * a[j + 1]
            if j + 2 <= top:
                val += (j + 2) * (j + 1) * a[j + 2]
            a[j] = val / beta
        return [Term(c, k, mu) for k, c in enumerate(a) if c != 0]
    # resonant: beta = 0 effectively; 2(j+1) mu a_{j+1} - (j+2)(j+1) a_{j+2} = rhs_j
    a = [complex(0)] * (top + 2)
    for j in range(top, -1, -1):
        val = rhs[j]
        if j + 2 <= top + 1:
            val += (j + 2) * (j + 1) * a[j + 2]
        a[j + 1] = val / (2.0 * (j + 1) * mu)
    return [Term(c, k, mu) for k, c in enumerate(a) if c != 0]


def solve_resolvent(f: ExpPoly, z: complex, bc: str) -> ExpPoly:
    """Solve (-u'' + u - z u) = f with decaying u on [0, inf).

    bc = "dirichlet": impose u(0) = 0 (the distinguished resolvent).
    bc = "doublezero": impose u(0) = 0 and require u'(0) = 0 as well,
    raising NotInRange when the derivative trace cannot be matched.
    """
    if bc not in ("dirichlet", "doublezero"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    z, omega = _check_accepted_z(z)
    # group the right-hand side by rate
    groups = []
    for t in f.terms:
        for g in groups:
            if _same_rate(g[0].rate, t.rate):
                g.append(t)
                break
        else:
            groups.append([t])
    part = []
    for g in groups:
        part.extend(_particular_solution(g, omega))
    u = ExpPoly(part)
    # homogeneous correction c * e^{-omega x} to enforce u(0) = 0
    v0, _ = u.boundary_values()
    u = u - v0 * ExpPoly.single(1.0, 0, omega)
    if bc == "doublezero":
        _, d0 = u.boundary_values()
        scale = max(f.max_coeff(), u.max_coeff(), 1.0)
        if abs(d0) > TRACE_TOL * scale:
            raise NotInRange(
                f"derivative trace {abs(d0):.3e} exceeds tolerance; "
                "right-hand side is not in the range of the closure")
    return u


# -- serialization ---------------------------------------------------------

def to_records(p: ExpPoly):
    """JSON-friendly list of term records."""
    return [{"re_coeff": t.coeff.real, "im_coeff": t.coeff.imag,
             "power": t.power,
             "re_rate": t.rate.real, "im_rate": t.rate.imag}
            for t in p.terms]


def from_records(records) -> ExpPoly:
    return ExpPoly([Term(complex(r["re_coeff"], r["im_coeff"]), int(r["power"]),
                         complex(r["re_rate"], r["im_rate"])) for r in records])

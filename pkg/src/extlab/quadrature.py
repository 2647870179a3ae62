"""Adaptive-quadrature oracle for the closed-form inner products.

Independent check of exppoly.inner_product: integrates conj(p) * q
numerically on a truncated interval whose tail is provably negligible for
exponentially decaying integrands.
"""

from __future__ import annotations

from scipy.integrate import quad

from .exppoly import ExpPoly


def _cutoff(p: ExpPoly, q: ExpPoly) -> float:
    """Upper limit X with |integrand tail| < ~1e-14: the integrand decays
    like x^M e^{-r x} with r the slowest combined decay rate."""
    if not p.terms or not q.terms:
        return 1.0
    r = min(t.rate.real for t in p.terms) + min(t.rate.real for t in q.terms)
    m = max((t.power for t in p.terms), default=0) + max((t.power for t in q.terms), default=0)
    return min((40.0 + 12.0 * m) / r, 2000.0)


def quad_inner(p: ExpPoly, q: ExpPoly, tol: float = 1e-12) -> complex:
    """Numerical L2(0, inf) inner product (anti-linear in p)."""
    if p.is_zero() or q.is_zero():
        return complex(0)
    x_max = _cutoff(p, q)

    def integrand(x, part):
        val = p(x).conjugate() * q(x)
        return val.real if part == 0 else val.imag

    re, _ = quad(integrand, 0.0, x_max, args=(0,), epsabs=tol, epsrel=tol, limit=400)
    im, _ = quad(integrand, 0.0, x_max, args=(1,), epsabs=tol, epsrel=tol, limit=400)
    return complex(re, im)

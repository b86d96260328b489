"""Vector fields built from symbolic expressions.

The central constructor is synthesize(): given curve functions psi_i with
damping terms f_i, g_i it produces the field

    xdot = sum_i (dpsi_i/dy + psi_i f_i) prod_{j != i} psi_j
    ydot = sum_i (-dpsi_i/dx + psi_i g_i) prod_{j != i} psi_j

whose flow keeps every curve {psi_i = 0} invariant: on curve i the other
summands carry a psi_i factor and the remaining term is tangent to the
curve.  Cusp vanishing multiplies both components by smooth bump profiles
s(d/eps) = 1 - exp(-(d/eps)^2), one per marked point, so the field is
exactly zero there and essentially unchanged a few eps away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import expressions as ex
from .expressions import Expr, parse_expr, diff, variables_of

__all__ = [
    "CurveSpec",
    "VectorField",
    "synthesize",
    "apply_cusp_vanishing",
    "builtin_forced_oscillator",
    "check_matching",
]


def _as_expr(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, str):
        return parse_expr(v)
    if isinstance(v, (int, float)):
        return ex.Const(float(v))
    raise TypeError(f"expected expression or text, got {type(v).__name__}")


@dataclass(frozen=True)
class CurveSpec:
    """A closed curve {psi = 0} with its damping terms.

    psi may depend on x and y only; the construction treats curves as
    autonomous.  f and g control the transverse stability of the curve
    (they multiply psi, so they never move the curve itself).
    """

    psi: Expr
    f: Expr = ex.ZERO
    g: Expr = ex.ZERO
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "psi", _as_expr(self.psi))
        object.__setattr__(self, "f", _as_expr(self.f))
        object.__setattr__(self, "g", _as_expr(self.g))
        bad = variables_of(self.psi) - {"x", "y"}
        if bad:
            raise ValueError(
                f"curve function may depend on x and y only, found {sorted(bad)}"
            )


class VectorField:
    """Planar field (xdot, ydot) given by two expressions in x, y, t.

    eval() goes through compiled closures; the expression trees stay
    available for symbolic Jacobians (variational equations) and for code
    generation in the grid kernels.
    """

    def __init__(self, fx, fy, curves=(), cusp_points=(), epsilon=None, name=""):
        self.fx = _as_expr(fx)
        self.fy = _as_expr(fy)
        self.curves = tuple(curves)
        self.cusp_points = tuple(cusp_points)
        self.epsilon = epsilon
        self.name = name
        self._fx_c = ex.compile_expr(self.fx)
        self._fy_c = ex.compile_expr(self.fy)
        self._jac_c = None

    @classmethod
    def from_strings(cls, fx_text, fy_text, name=""):
        return cls(parse_expr(fx_text), parse_expr(fy_text), name=name)

    def eval(self, x, y, t=0.0):
        return self._fx_c(x, y, t), self._fy_c(x, y, t)

    @property
    def is_autonomous(self):
        return "t" not in (variables_of(self.fx) | variables_of(self.fy))

    def jacobian_exprs(self):
        return (
            (diff(self.fx, "x"), diff(self.fx, "y")),
            (diff(self.fy, "x"), diff(self.fy, "y")),
        )

    def jacobian_eval(self, x, y, t=0.0):
        if self._jac_c is None:
            (axx, axy), (ayx, ayy) = self.jacobian_exprs()
            self._jac_c = (
                ex.compile_expr(axx),
                ex.compile_expr(axy),
                ex.compile_expr(ayx),
                ex.compile_expr(ayy),
            )
        axx, axy, ayx, ayy = self._jac_c
        return (
            (axx(x, y, t), axy(x, y, t)),
            (ayx(x, y, t), ayy(x, y, t)),
        )

    def scaled(self, factor):
        """Multiply both components by a scalar expression.

        For a positive factor this reparameterizes time along orbits of an
        autonomous field without moving them.
        """
        factor = _as_expr(factor)
        return VectorField(
            ex.mul(self.fx, factor),
            ex.mul(self.fy, factor),
            curves=self.curves,
            cusp_points=self.cusp_points,
            epsilon=self.epsilon,
            name=self.name,
        )

    def negated(self):
        return VectorField(
            ex.neg(self.fx), ex.neg(self.fy), name=f"-({self.name})"
        )

    def __repr__(self):
        return f"VectorField(xdot={self.fx}, ydot={self.fy})"


def synthesize(curves):
    """Build the field carrying the given curves as invariant sets.

    The empty product convention makes k = 1 give
    (dpsi/dy + psi f, -dpsi/dx + psi g) directly.
    """
    curves = [c if isinstance(c, CurveSpec) else CurveSpec(*c) for c in curves]
    if len(curves) < 1:
        raise ValueError("synthesize needs at least one curve")
    fx_terms = []
    fy_terms = []
    for i, ci in enumerate(curves):
        others = ex.ONE
        for j, cj in enumerate(curves):
            if j != i:
                others = ex.mul(others, cj.psi)
        fx_i = ex.add(diff(ci.psi, "y"), ex.mul(ci.psi, ci.f))
        fy_i = ex.add(ex.neg(diff(ci.psi, "x")), ex.mul(ci.psi, ci.g))
        fx_terms.append(ex.mul(fx_i, others))
        fy_terms.append(ex.mul(fy_i, others))
    fx = fx_terms[0]
    fy = fy_terms[0]
    for term in fx_terms[1:]:
        fx = ex.add(fx, term)
    for term in fy_terms[1:]:
        fy = ex.add(fy, term)
    return VectorField(fx, fy, curves=curves)


def _bump(px, py, epsilon):
    d2 = ex.add(
        ex.pow_(ex.sub(ex.X, ex.Const(px)), 2),
        ex.pow_(ex.sub(ex.Y, ex.Const(py)), 2),
    )
    return ex.sub(ex.ONE, ex.exp(ex.neg(ex.div(d2, ex.Const(epsilon * epsilon)))))


def apply_cusp_vanishing(field, points, epsilon):
    """Force exact zeros at the given points.

    Multiplies both components by prod_i (1 - exp(-(d_i/eps)^2)); existing
    zeros are preserved, the factor is 1 - 1/e at distance eps and within
    1e-40 of 1 beyond about 10 eps.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    factor = ex.ONE
    for (px, py) in points:
        factor = ex.mul(factor, _bump(float(px), float(py), float(epsilon)))
    out = field.scaled(factor)
    out.cusp_points = tuple((float(px), float(py)) for (px, py) in points)
    out.epsilon = float(epsilon)
    return out


def builtin_forced_oscillator(H, g):
    """Second-order oscillator in first-order form.

    xdot = y - H(x), ydot = -g(t, x); H is the integrated damping and g the
    (typically time-periodic) restoring/forcing term.
    """
    H = _as_expr(H)
    g = _as_expr(g)
    bad = variables_of(H) - {"x"}
    if bad:
        raise ValueError(f"H may depend on x only, found {sorted(bad)}")
    bad = variables_of(g) - {"x", "t"}
    if bad:
        raise ValueError(f"g may depend on x and t only, found {sorted(bad)}")
    return VectorField(ex.sub(ex.Y, H), ex.neg(g), name="forced-oscillator")


def check_matching(field, dom, n_samples=25, t=0.0):
    """Largest boundary matching defect over all segments.

    For each segment samples interior points q, maps them by the segment
    transition and compares the field there against the pushforward of the
    field at q.  Zero (to rounding) means the field descends to the closed
    surface; the residual is reported, not enforced.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    worst = 0.0
    for seg in dom.segments:
        tr = dom.transition(seg.index)
        for k in range(n_samples):
            s = (k + 0.5) / n_samples
            q = seg.point_at(s)
            image = tr.apply(q)
            w_q = field.eval(q[0], q[1], t)
            w_im = field.eval(image[0], image[1], t)
            pushed = tr.push(w_q)
            r = math.hypot(w_im[0] - pushed[0], w_im[1] - pushed[1])
            if r > worst:
                worst = r
    return worst

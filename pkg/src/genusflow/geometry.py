"""Upper-half-plane maps and the flattened fundamental domain.

The surface is presented as a rectangle whose 4p boundary segments are glued
in pairs by affine transitions.  For genus 1 the rectangle is the flat unit
torus and the transitions are translations; for higher genus the segments
follow the standard pairing word and each transition is the orientation
preserving affine map carrying a segment onto its partner (reversed, so the
composition of a transition with its partner's is the identity).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mobius",
    "AffineMap",
    "Segment",
    "RectDomain",
    "PoleError",
    "ReduceError",
    "chart_to_rectangle",
    "standard_domain",
    "shear_torus_domain",
    "reduce_to_domain",
]

_POLE_TOL = 1e-14


class PoleError(ValueError):
    """Moebius map evaluated at (or too close to) its pole."""


class ReduceError(RuntimeError):
    """reduce_to_domain failed to land inside after the iteration cap."""


@dataclass(frozen=True)
class Mobius:
    """Real Moebius map z -> (az+b)/(cz+d), stored normalized to det 1.

    Normalization divides by sqrt(det) and fixes the overall sign so that
    a >= 0, with c > 0 breaking the tie when a == 0.  Determinant must be
    positive (upper half-plane preserving).
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(self.a), float(self.b), float(self.c), float(self.d))
        det = a * d - b * c
        if det <= 1e-300:
            raise ValueError(f"Moebius map needs positive determinant, got {det}")
        s = math.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        if a < 0 or (a == 0 and c < 0):
            a, b, c, d = -a, -b, -c, -d
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    def det(self):
        return self.a * self.d - self.b * self.c

    def apply(self, z):
        """Evaluate at a complex point (or an (x, y) pair)."""
        z = _as_complex(z)
        den = self.c * z + self.d
        if abs(den) < _POLE_TOL:
            raise PoleError(f"point {z} is at the pole of {self}")
        return (self.a * z + self.b) / den

    def pushforward(self, z, v):
        """Image of tangent vector v at z; returns (new_base, new_vector).

        The derivative of a det-1 map is 1/(cz+d)^2, acting on v by complex
        multiplication.
        """
        z = _as_complex(z)
        v = _as_complex(v)
        den = self.c * z + self.d
        if abs(den) < _POLE_TOL:
            raise PoleError(f"point {z} is at the pole of {self}")
        return self.apply(z), v / (den * den)

    def compose(self, other):
        """self after other: (self.compose(other))(z) == self(other(z))."""
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)

    def almost_equal(self, other, tol=1e-12):
        return (
            abs(self.a - other.a) < tol
            and abs(self.b - other.b) < tol
            and abs(self.c - other.c) < tol
            and abs(self.d - other.d) < tol
        )

    def __str__(self):
        return f"[{self.a:.6g} {self.b:.6g}; {self.c:.6g} {self.d:.6g}]"


def _as_complex(z):
    if isinstance(z, complex):
        return z
    if isinstance(z, (tuple, list, np.ndarray)) and len(z) == 2:
        return complex(float(z[0]), float(z[1]))
    return complex(z)


def chart_to_rectangle(r, theta, alpha):
    """Flatten the (r, theta) wedge onto rectangle coordinates.

    x runs 0..pi as theta runs alpha..pi-alpha; y is the radius unchanged.
    """
    if not 0.0 < alpha < math.pi / 2:
        raise ValueError(f"alpha must lie in (0, pi/2), got {alpha}")
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if theta < alpha or theta > math.pi - alpha:
        raise ValueError(
            f"theta={theta} outside [{alpha}, {math.pi - alpha}]"
        )
    x = math.pi / (math.pi - 2.0 * alpha) * (theta - alpha)
    return x, r


# ----------------------------------------------------------------------
# Rectangle domains


@dataclass(frozen=True)
class AffineMap:
    """q -> M q + c with M a 2x2 matrix, acting on points and tangents."""

    m: tuple  # ((m11, m12), (m21, m22))
    offset: tuple  # (c1, c2)

    def apply(self, q):
        x, y = float(q[0]), float(q[1])
        (m11, m12), (m21, m22) = self.m
        c1, c2 = self.offset
        return (m11 * x + m12 * y + c1, m21 * x + m22 * y + c2)

    def push(self, v):
        vx, vy = float(v[0]), float(v[1])
        (m11, m12), (m21, m22) = self.m
        return (m11 * vx + m12 * vy, m21 * vx + m22 * vy)

    def inverse(self):
        (m11, m12), (m21, m22) = self.m
        det = m11 * m22 - m12 * m21
        inv = ((m22 / det, -m12 / det), (-m21 / det, m11 / det))
        cx, cy = self.offset
        ox = -(inv[0][0] * cx + inv[0][1] * cy)
        oy = -(inv[1][0] * cx + inv[1][1] * cy)
        return AffineMap(inv, (ox, oy))

    @property
    def matrix(self):
        return np.array(self.m, dtype=float)

    def is_translation(self, tol=1e-12):
        (m11, m12), (m21, m22) = self.m
        return (
            abs(m11 - 1) < tol
            and abs(m22 - 1) < tol
            and abs(m12) < tol
            and abs(m21) < tol
        )


@dataclass(frozen=True)
class Segment:
    """Boundary segment, endpoints in counterclockwise boundary order."""

    index: int  # 1-based position in the boundary cycle
    p0: tuple
    p1: tuple
    edge: str  # 'left' | 'bottom' | 'right' | 'top'

    @property
    def length(self):
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    def direction(self):
        L = self.length
        return ((self.p1[0] - self.p0[0]) / L, (self.p1[1] - self.p0[1]) / L)

    def inward_normal(self):
        ux, uy = self.direction()
        return (-uy, ux)

    def point_at(self, s):
        """Point at arclength fraction s in [0, 1]."""
        return (
            self.p0[0] + s * (self.p1[0] - self.p0[0]),
            self.p0[1] + s * (self.p1[1] - self.p0[1]),
        )


def _pair_transition(seg_i, seg_j):
    """Affine map carrying seg_i onto seg_j with reversed orientation.

    Maps seg_i's start to seg_j's end and the outward side of seg_i to the
    inward side of seg_j; paired transitions built this way are exact mutual
    inverses.
    """
    ui = seg_i.direction()
    ni = seg_i.inward_normal()
    uj = seg_j.direction()
    nj = seg_j.inward_normal()
    scale = seg_j.length / seg_i.length
    # M = -scale * [uj nj] [ui ni]^{-1}; the frames are orthonormal so the
    # inverse of [ui ni] is its transpose.
    fi_inv = ((ui[0], ui[1]), (ni[0], ni[1]))
    fj = ((uj[0], nj[0]), (uj[1], nj[1]))
    m = tuple(
        tuple(
            -scale * sum(fj[r][k] * fi_inv[k][cc] for k in range(2))
            for cc in range(2)
        )
        for r in range(2)
    )
    q1 = seg_j.p1
    c = (
        q1[0] - (m[0][0] * seg_i.p0[0] + m[0][1] * seg_i.p0[1]),
        q1[1] - (m[1][0] * seg_i.p0[0] + m[1][1] * seg_i.p0[1]),
    )
    # snap exact zeros/ones so torus transitions come out as exact translations
    def snap(v):
        for target in (0.0, 1.0, -1.0):
            if abs(v - target) < 1e-14:
                return target
        return v

    m = tuple(tuple(snap(e) for e in row) for row in m)
    return AffineMap(m, c)


@dataclass(frozen=True)
class RectDomain:
    """Rectangle with glued boundary segments.

    pairing is the involution on 1..4p; transitions[i-1] carries segment i
    onto segment pairing[i] and is the exact inverse of its partner's
    transition.  cusps are the segment endpoints (equilibria of any smooth
    surface field when cusp vanishing is on).
    """

    genus: int
    x0: float
    x1: float
    y0: float
    y1: float
    segments: tuple
    pairing: tuple  # pairing[i-1] is the 1-based partner of segment i
    transitions: tuple
    cusps: tuple

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    @property
    def n_segments(self):
        return len(self.segments)

    def partner(self, i):
        return self.pairing[i - 1]

    def transition(self, i):
        """Plane map applied when a trajectory exits through segment i."""
        return self.transitions[i - 1]

    def min_segment_length(self):
        return min(s.length for s in self.segments)

    def contains(self, q, tol=0.0):
        x, y = q
        return (
            self.x0 - tol <= x <= self.x1 + tol
            and self.y0 - tol <= y <= self.y1 + tol
        )

    def boundary_violation(self, q):
        """Largest signed distance outside the rectangle (<= 0 means inside)."""
        x, y = q
        return max(self.x0 - x, x - self.x1, self.y0 - y, y - self.y1)

    def exit_segment(self, q):
        """Segment index (1-based) whose edge the point q has left through.

        Picks the edge with the largest violation, then the segment on that
        edge containing the projection of q.  Returns 0 when q is inside.
        """
        x, y = q
        viols = (
            ("left", self.x0 - x),
            ("right", x - self.x1),
            ("bottom", self.y0 - y),
            ("top", y - self.y1),
        )
        edge, worst = max(viols, key=lambda ev: ev[1])
        if worst <= 0.0:
            return 0
        along = y if edge in ("left", "right") else x
        best = 0
        best_d = math.inf
        for seg in self.segments:
            if seg.edge != edge:
                continue
            lo = min(seg.p0[1], seg.p1[1]) if edge in ("left", "right") else min(
                seg.p0[0], seg.p1[0]
            )
            hi = max(seg.p0[1], seg.p1[1]) if edge in ("left", "right") else max(
                seg.p0[0], seg.p1[0]
            )
            d = max(lo - along, along - hi, 0.0)
            if d < best_d:
                best_d = d
                best = seg.index
        return best

    def nearest_cusp(self, q):
        """(distance, cusp point) for the closest marker point."""
        best = None
        best_d = math.inf
        for m in self.cusps:
            d = math.hypot(q[0] - m[0], q[1] - m[1])
            if d < best_d:
                best_d = d
                best = m
        return best_d, best

    def clamp(self, q, tol=1e-12):
        """Snap coordinates within tol outside the rectangle onto it."""
        x = min(max(q[0], self.x0), self.x1) if (
            self.x0 - tol <= q[0] <= self.x1 + tol
        ) else q[0]
        y = min(max(q[1], self.y0), self.y1) if (
            self.y0 - tol <= q[1] <= self.y1 + tol
        ) else q[1]
        return (x, y)

    def apply_word(self, q, word):
        """Apply recorded transitions to a point, in order."""
        for letter in word:
            t = self.transition(abs(letter))
            if letter < 0:
                t = t.inverse()
            q = t.apply(q)
        return q

    def apply_word_inverse(self, q, word):
        """Undo a recorded word (inverse transitions in reverse order)."""
        for letter in reversed(word):
            t = self.transition(abs(letter))
            if letter > 0:
                t = t.inverse()
            q = t.apply(q)
        return q

    def word_matrix(self, word):
        """Linear part of the composed word as a 2x2 array."""
        m = np.eye(2)
        for letter in word:
            t = self.transition(abs(letter))
            if letter < 0:
                t = t.inverse()
            m = t.matrix @ m
        return m


def _standard_pairing(p):
    """Involution for the word a1 b1 a1' b1' ... around the boundary cycle."""
    sigma = [0] * (4 * p)
    for m in range(p):
        base = 4 * m
        sigma[base + 0] = base + 3
        sigma[base + 2] = base + 1
        sigma[base + 1] = base + 4
        sigma[base + 3] = base + 2
    return tuple(sigma)


def _build_domain(genus, x0, x1, y0, y1, segments, pairing):
    transitions = []
    seg_by_index = {s.index: s for s in segments}
    for s in segments:
        transitions.append(_pair_transition(s, seg_by_index[pairing[s.index - 1]]))
    cusp_set = []
    seen = set()
    for s in segments:
        for pt in (s.p0, s.p1):
            key = (round(pt[0], 12), round(pt[1], 12))
            if key not in seen:
                seen.add(key)
                cusp_set.append(pt)
    return RectDomain(
        genus=genus,
        x0=x0,
        x1=x1,
        y0=y0,
        y1=y1,
        segments=tuple(segments),
        pairing=pairing,
        transitions=tuple(transitions),
        cusps=tuple(cusp_set),
    )


def standard_domain(p, height_range=(1.0, 2.0)):
    """Fundamental rectangle for a genus-p surface.

    p = 1 is the flat unit torus (translation transitions).  For p >= 2 the
    rectangle has width pi; the left and right edges are single segments and
    the bottom/top edges are split into 2p-1 pieces, giving 4p segments glued
    by the standard pairing word.  Boundary-cycle order (and hence segment
    numbering) starts at the left edge and runs counterclockwise.
    """
    if p < 1:
        raise ValueError(f"genus must be >= 1, got {p}")
    if p == 1:
        segments = [
            Segment(1, (0.0, 1.0), (0.0, 0.0), "left"),
            Segment(2, (0.0, 0.0), (1.0, 0.0), "bottom"),
            Segment(3, (1.0, 0.0), (1.0, 1.0), "right"),
            Segment(4, (1.0, 1.0), (0.0, 1.0), "top"),
        ]
        return _build_domain(1, 0.0, 1.0, 0.0, 1.0, segments, (3, 4, 1, 2))

    y0, y1 = float(height_range[0]), float(height_range[1])
    if not y1 > y0:
        raise ValueError("height_range must be increasing")
    w = math.pi
    npieces = 2 * p - 1
    segments = []
    segments.append(Segment(1, (0.0, y1), (0.0, y0), "left"))
    idx = 2
    for k in range(npieces):
        segments.append(
            Segment(
                idx,
                (w * k / npieces, y0),
                (w * (k + 1) / npieces, y0),
                "bottom",
            )
        )
        idx += 1
    segments.append(Segment(idx, (w, y0), (w, y1), "right"))
    idx += 1
    for k in range(npieces):
        segments.append(
            Segment(
                idx,
                (w * (npieces - k) / npieces, y1),
                (w * (npieces - k - 1) / npieces, y1),
                "top",
            )
        )
        idx += 1
    return _build_domain(p, 0.0, w, y0, y1, segments, _standard_pairing(p))


def shear_torus_domain(shear, width=1.0, y0=0.0, height=1.0):
    """Torus with a sheared horizontal identification.

    Crossing the right edge maps (x, y) -> (x - width, y - shear); vertical
    identification is the plain translation.  Used for oscillator fields that
    are invariant under (x, y) -> (x + width, y + shear).
    """
    w = float(width)
    y1 = y0 + float(height)
    segments = [
        Segment(1, (0.0, y1), (0.0, y0), "left"),
        Segment(2, (0.0, y0), (w, y0), "bottom"),
        Segment(3, (w, y0), (w, y1), "right"),
        Segment(4, (w, y1), (0.0, y1), "top"),
    ]
    eye = ((1.0, 0.0), (0.0, 1.0))
    transitions = (
        AffineMap(eye, (w, shear)),   # exit left: shift right and up by shear
        AffineMap(eye, (0.0, y1 - y0)),
        AffineMap(eye, (-w, -shear)),
        AffineMap(eye, (0.0, -(y1 - y0))),
    )
    cusps = ((0.0, y0), (w, y0), (w, y1), (0.0, y1))
    return RectDomain(
        genus=1,
        x0=0.0,
        x1=w,
        y0=y0,
        y1=y1,
        segments=tuple(segments),
        pairing=(3, 4, 1, 2),
        transitions=transitions,
        cusps=cusps,
    )


def reduce_to_domain(q, dom, max_applications=100):
    """Map a point back into the rectangle, recording the transitions used.

    Returns (point, word) where word lists the 1-based indices of the
    segments whose transitions were applied, in order.  Raises ReduceError
    if the point fails to land inside after max_applications steps.
    """
    word = []
    point = (float(q[0]), float(q[1]))
    for _ in range(max_applications):
        seg = dom.exit_segment(point)
        if seg == 0:
            return dom.clamp(point), word
        point = dom.transition(seg).apply(point)
        word.append(seg)
    raise ReduceError(
        f"point {q} not reduced after {max_applications} transition applications"
    )

"""The double parameter map over a region bounded by two trimming curves.

A point (s, t) in the unit square is first sent into the surface parameter
square (u, v) by blending the bottom curve C_I(s) and the top curve C_II(s)
linearly in t, then through the surface into model space:

    (u, v)(s, t) = (1 - t) * C_I(s) + t * C_II(s)
    x(s, t)      = S(u(s, t), v(s, t))

The straight closing edges at s = 0 and s = 1 are implied by the blend and
never stored. First and second derivatives are chained exactly; the mixed
second derivative uses the symmetric two-variable chain rule, which is what
central finite differences reproduce.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidGeometryError, SingularMapError
from .nurbs import NurbsCurve, NurbsSurface

_BP_TOL = 1e-12
_CONTAIN_TOL = 1e-9
_SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class MapDerivatives:
    """Blend map value and derivatives at one (s, t).

    d2uv_dt2 is identically zero because the blend is linear in t. When the
    query sits exactly on an interior knot of a trimming curve, the s
    derivatives are the right-sided limits and on_breakpoint is set.
    """

    uv: np.ndarray
    duv_ds: np.ndarray
    duv_dt: np.ndarray
    d2uv_ds2: np.ndarray | None = None
    d2uv_dt2: np.ndarray | None = None
    d2uv_dsdt: np.ndarray | None = None
    on_breakpoint: bool = False

    @property
    def det(self):
        """Signed parameter-space Jacobian det d(u,v)/d(s,t)."""
        return float(
            self.duv_ds[0] * self.duv_dt[1] - self.duv_ds[1] * self.duv_dt[0]
        )


@dataclass(frozen=True)
class CompositeDerivatives:
    """Model-space point and derivatives of the composite map at one (s, t)."""

    x: np.ndarray
    dx_ds: np.ndarray
    dx_dt: np.ndarray
    d2x_ds2: np.ndarray | None = None
    d2x_dt2: np.ndarray | None = None
    d2x_dsdt: np.ndarray | None = None
    jacobian_scale: float = 0.0


@dataclass(frozen=True)
class Breakpoint:
    """Interior s-knot of a trimming curve with its continuity class."""

    s: float
    continuity: int


@dataclass(frozen=True)
class RegionReport:
    """Grid sweep diagnostics produced by validate_region."""

    grid_n: int
    containment_violations: tuple
    min_det: float
    max_det: float
    min_abs_det: float
    sign_change: bool
    min_curve_gap: float

    @property
    def ok(self):
        return not self.containment_violations and not self.sign_change

    def summary(self):
        lines = [
            f"grid {self.grid_n}x{self.grid_n}:"
            f" {'OK' if self.ok else 'INVALID'}",
            f"  det range [{self.min_det:.6g}, {self.max_det:.6g}],"
            f" min |det| = {self.min_abs_det:.6g}",
            f"  min gap between trimming curves = {self.min_curve_gap:.6g}",
        ]
        if self.sign_change:
            lines.append("  jacobian sign change: fold-over or degeneracy detected")
        if self.containment_violations:
            s, t, u, v = self.containment_violations[0]
            lines.append(
                f"  {len(self.containment_violations)} blend point(s) outside the"
                f" unit square, first at (s,t)=({s:.4g},{t:.4g}) ->"
                f" (u,v)=({u:.6g},{v:.6g})"
            )
        return "\n".join(lines)


def _as_parameter_curve(curve, name):
    """Accept a 2D curve, or a 3D one whose z coordinate is identically zero."""
    if curve.dim == 2:
        return curve
    z = curve.control_points[:, 2]
    if np.max(np.abs(z)) > _CONTAIN_TOL:
        raise InvalidGeometryError(
            f"{name} trimming curve must live in the parameter plane "
            f"(max |z| = {np.max(np.abs(z)):.3g})"
        )
    return NurbsCurve(curve.knot_vector, curve.control_points[:, :2], curve.weights)


class TrimmedRegion:
    """A surface with two parameter-space trimming curves defining the map."""

    def __init__(self, surface, curve_bottom, curve_top):
        if not isinstance(surface, NurbsSurface):
            raise InvalidGeometryError("surface must be a NurbsSurface")
        bottom = _as_parameter_curve(curve_bottom, "bottom")
        top = _as_parameter_curve(curve_top, "top")
        for name, c in (("bottom", bottom), ("top", top)):
            pts = c.control_points
            if np.any(pts < -_CONTAIN_TOL) or np.any(pts > 1.0 + _CONTAIN_TOL):
                raise InvalidGeometryError(
                    f"{name} trimming curve control points must lie in the unit "
                    f"square (found {pts.min():.6g}..{pts.max():.6g})"
                )
        self.surface = surface
        self.curve_bottom = bottom
        self.curve_top = top
        self._breakpoints = _merge_breakpoints(bottom, top)

    def breakpoints(self):
        """Interior s-knots of both curves, deduplicated, worst continuity."""
        return list(self._breakpoints)

    def _check_st(self, s, t):
        if not (-_BP_TOL <= s <= 1.0 + _BP_TOL) or not (-_BP_TOL <= t <= 1.0 + _BP_TOL):
            raise DomainError(f"(s, t) = ({s}, {t}) outside the unit square")
        return min(max(s, 0.0), 1.0), min(max(t, 0.0), 1.0)

    def _blend(self, s, t, order):
        b = self.curve_bottom.evaluate(s, order)
        tp = self.curve_top.evaluate(s, order)
        uv = (1.0 - t) * b.value + t * tp.value
        duv_ds = (1.0 - t) * b.d1 + t * tp.d1
        duv_dt = tp.value - b.value
        flagged = any(abs(s - bp.s) <= _BP_TOL for bp in self._breakpoints)
        if order < 2:
            return MapDerivatives(uv, duv_ds, duv_dt, on_breakpoint=flagged)
        return MapDerivatives(
            uv,
            duv_ds,
            duv_dt,
            d2uv_ds2=(1.0 - t) * b.d2 + t * tp.d2,
            d2uv_dt2=np.zeros(2),
            d2uv_dsdt=tp.d1 - b.d1,
            on_breakpoint=flagged,
        )

    def map_point(self, s, t):
        """Blend map with first derivatives at (s, t)."""
        s, t = self._check_st(s, t)
        return self._blend(s, t, 1)

    def map_second_derivatives(self, s, t):
        """Blend map with first and second derivatives at (s, t)."""
        s, t = self._check_st(s, t)
        return self._blend(s, t, 2)

    def composite_eval(self, s, t, order=2):
        """Model-space point and chained derivatives of x(u(s,t), v(s,t))."""
        if order not in (0, 1, 2):
            raise DomainError(f"derivative order must be 0, 1 or 2, got {order}")
        s, t = self._check_st(s, t)
        m = self._blend(s, t, max(order, 1) if order < 2 else 2)
        # the blend can overshoot [0,1] by roundoff only
        u = min(max(float(m.uv[0]), 0.0), 1.0)
        v = min(max(float(m.uv[1]), 0.0), 1.0)
        sd = self.surface.evaluate(u, v, max(order, 1) if order < 2 else 2)
        us, vs = m.duv_ds
        ut, vt = m.duv_dt
        dx_ds = sd.du * us + sd.dv * vs
        dx_dt = sd.du * ut + sd.dv * vt
        scale = float(np.linalg.norm(np.cross(dx_ds, dx_dt)))
        if scale < _SINGULAR_TOL:
            raise SingularMapError(s, t, scale)
        if order < 2:
            return CompositeDerivatives(sd.value, dx_ds, dx_dt, jacobian_scale=scale)
        uss, vss = m.d2uv_ds2
        ust, vst = m.d2uv_dsdt
        d2x_ds2 = (
            sd.duu * us * us
            + 2.0 * sd.duv * us * vs
            + sd.dvv * vs * vs
            + sd.du * uss
            + sd.dv * vss
        )
        d2x_dt2 = sd.duu * ut * ut + 2.0 * sd.duv * ut * vt + sd.dvv * vt * vt
        d2x_dsdt = (
            sd.duu * us * ut
            + sd.duv * (us * vt + ut * vs)
            + sd.dvv * vs * vt
            + sd.du * ust
            + sd.dv * vst
        )
        return CompositeDerivatives(
            sd.value, dx_ds, dx_dt, d2x_ds2, d2x_dt2, d2x_dsdt, scale
        )

    def validate(self, grid_n=32):
        """Sweep an (n+1) x (n+1) grid; report-only, never raises."""
        if grid_n < 4:
            raise DomainError(f"grid_n must be at least 4, got {grid_n}")
        svals = np.linspace(0.0, 1.0, grid_n + 1)
        tvals = np.linspace(0.0, 1.0, grid_n + 1)
        violations = []
        min_det = math.inf
        max_det = -math.inf
        min_abs = math.inf
        min_gap = math.inf
        for s in svals:
            b = self.curve_bottom.evaluate(s, 1)
            tp = self.curve_top.evaluate(s, 1)
            min_gap = min(min_gap, float(np.linalg.norm(tp.value - b.value)))
            duv_dt = tp.value - b.value
            for t in tvals:
                uv = (1.0 - t) * b.value + t * tp.value
                duv_ds = (1.0 - t) * b.d1 + t * tp.d1
                if np.any(uv < -_CONTAIN_TOL) or np.any(uv > 1.0 + _CONTAIN_TOL):
                    if len(violations) < 16:
                        violations.append((float(s), float(t), float(uv[0]), float(uv[1])))
                det = float(duv_ds[0] * duv_dt[1] - duv_ds[1] * duv_dt[0])
                min_det = min(min_det, det)
                max_det = max(max_det, det)
                min_abs = min(min_abs, abs(det))
        sign_change = not (min_det > 0.0 or max_det < 0.0)
        return RegionReport(
            grid_n,
            tuple(violations),
            min_det,
            max_det,
            min_abs,
            sign_change,
            min_gap,
        )


def _merge_breakpoints(bottom, top):
    """Union of interior knots with the minimum continuity class per location."""
    entries = []
    for curve in (bottom, top):
        p = curve.degree
        values, mults = curve.knot_vector.interior()
        for value, mult in zip(values, mults):
            entries.append((value, p - mult))
    entries.sort()
    merged = []
    for value, cont in entries:
        if merged and abs(value - merged[-1][0]) <= _BP_TOL:
            merged[-1] = (merged[-1][0], min(merged[-1][1], cont))
        else:
            merged.append((value, cont))
    return tuple(Breakpoint(s, c) for s, c in merged)


def map_point(region, s, t):
    """Functional alias for TrimmedRegion.map_point."""
    return region.map_point(s, t)


def map_second_derivatives(region, s, t):
    """Functional alias for TrimmedRegion.map_second_derivatives."""
    return region.map_second_derivatives(s, t)


def composite_eval(region, s, t, order=2):
    """Functional alias for TrimmedRegion.composite_eval."""
    return region.composite_eval(s, t, order)


def validate_region(region, grid_n=32):
    """Functional alias for TrimmedRegion.validate."""
    return region.validate(grid_n)


def breakpoints(region):
    """Functional alias for TrimmedRegion.breakpoints."""
    return region.breakpoints()

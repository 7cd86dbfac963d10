"""B-spline geometry: basis functions, curve evaluation/fitting and draft-tube synthesis.

A draft-tube design is described by three planar B-spline curves along the
centreline station axis: roof elevation, floor elevation and duct half-width.
Control-point offsets form the design vector; the first two control points of
every curve stay fixed so the inlet is never modified.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

__all__ = [
    "GeometryError",
    "BSplineCurve",
    "CrossSection",
    "ReferenceGeometry",
    "DesignVector",
    "DraftTubeDesign",
    "basis",
    "eval_curve",
    "fit_curve",
    "clamped_knots",
    "synthesize",
    "areas",
    "cross_section_area",
    "load_reference",
    "scenario_bounds",
    "N_STATIONS",
]

# Number of interpolated cross-sections used to describe a synthesized design.
N_STATIONS = 84

# Dense sampling used to express curves as functions of the station coordinate.
_N_DENSE = 801


class GeometryError(ValueError):
    """Raised for invalid geometric input (bounds, crossings, degenerate sections)."""


# ---------------------------------------------------------------------------
# B-spline primitives
# ---------------------------------------------------------------------------

def basis(i: int, k: int, t: float, knots) -> float:
    """Cox-de Boor basis function N_{i,k}(t) of order ``k`` (degree ``k - 1``).

    The order-1 base case is the indicator of the half-open span
    [t_i, t_{i+1}); degenerate 0/0 weights resolve to 0.
    """
    knots = np.asarray(knots, dtype=float)
    if i < 0 or i + k >= len(knots):
        raise IndexError(f"basis index {i} out of range for order {k} "
                         f"and {len(knots)} knots")
    if np.any(np.diff(knots) < 0):
        raise GeometryError("knot vector must be non-decreasing")
    if k == 1:
        return 1.0 if knots[i] <= t < knots[i + 1] else 0.0
    left = 0.0
    den = knots[i + k - 1] - knots[i]
    if den > 0.0:
        left = (t - knots[i]) / den * basis(i, k - 1, t, knots)
    right = 0.0
    den = knots[i + k] - knots[i + 1]
    if den > 0.0:
        right = (knots[i + k] - t) / den * basis(i + 1, k - 1, t, knots)
    return left + right


def clamped_knots(n_ctrl: int, k: int) -> np.ndarray:
    """Clamped knot vector on [0, 1] with evenly spaced internal knots.

    Length is ``n_ctrl + k``: the first and last knots repeat ``k`` times so
    the curve interpolates its end control points.
    """
    if n_ctrl < k:
        raise GeometryError(f"need at least {k} control points, got {n_ctrl}")
    n_internal = n_ctrl - k
    internal = np.linspace(0.0, 1.0, n_internal + 2)[1:-1]
    return np.concatenate([np.zeros(k), internal, np.ones(k)])


@dataclass(frozen=True)
class BSplineCurve:
    """Planar B-spline of order ``k`` (k = degree + 1, so k=3 is quadratic)."""

    k: int
    control_points: np.ndarray  # (n_ctrl, 2)
    knots: np.ndarray

    def __post_init__(self):
        cp = np.asarray(self.control_points, dtype=float)
        kn = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "control_points", cp)
        object.__setattr__(self, "knots", kn)
        if cp.ndim != 2 or cp.shape[1] != 2:
            raise GeometryError("control points must be an (n, 2) array")
        if len(cp) < self.k:
            raise GeometryError("fewer control points than the curve order")
        if len(kn) != len(cp) + self.k:
            raise GeometryError(
                f"knot vector length {len(kn)} != n_ctrl + k = {len(cp) + self.k}")
        if np.any(np.diff(kn) < 0):
            raise GeometryError("knot vector must be non-decreasing")

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[self.k - 1]), float(self.knots[len(self.control_points)])

    def with_offsets(self, dy: np.ndarray) -> "BSplineCurve":
        """Return a copy with per-control-point vertical offsets applied."""
        cp = self.control_points.copy()
        cp[:, 1] += dy
        return BSplineCurve(self.k, cp, self.knots)


def basis_matrix(curve_knots, n_ctrl: int, k: int, ts) -> np.ndarray:
    """Matrix B with B[j, i] = N_{i,k}(ts[j]); the right domain end is closed."""
    knots = np.asarray(curve_knots, dtype=float)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    t_lo, t_hi = knots[k - 1], knots[n_ctrl]
    if np.any(ts < t_lo - 1e-12) or np.any(ts > t_hi + 1e-12):
        raise GeometryError("parameter outside the valid knot range")
    # Closed right end: evaluate t == t_hi just inside the last span.
    eps = (t_hi - t_lo) * 1e-12
    ts = np.minimum(ts, t_hi - eps)
    # Vectorized Cox-de Boor over all indices.
    m = len(knots) - 1
    N = np.zeros((len(ts), m))
    for i in range(m):
        N[:, i] = (knots[i] <= ts) & (ts < knots[i + 1])
    for order in range(2, k + 1):
        N_next = np.zeros_like(N)
        for i in range(m - order + 1):
            den1 = knots[i + order - 1] - knots[i]
            den2 = knots[i + order] - knots[i + 1]
            term = 0.0
            if den1 > 0.0:
                term = (ts - knots[i]) / den1 * N[:, i]
            if den2 > 0.0:
                term = term + (knots[i + order] - ts) / den2 * N[:, i + 1]
            N_next[:, i] = term
        N = N_next
    return N[:, :n_ctrl]


def eval_curve(curve: BSplineCurve, t) -> np.ndarray:
    """Evaluate C(t) = sum_i P_i N_{i,k}(t); accepts a scalar or an array."""
    scalar = np.isscalar(t)
    B = basis_matrix(curve.knots, len(curve.control_points), curve.k, t)
    pts = B @ curve.control_points
    return pts[0] if scalar else pts


def fit_curve(points, n_ctrl: int, k: int = 3, pinned=None) -> tuple[BSplineCurve, float]:
    """Least-squares fit of a clamped B-spline through ``points``.

    Chord-length parameter assignment. ``pinned`` optionally fixes the first
    two control points to the given (2, 2) coordinates. Returns the curve and
    the RMS residual.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError("points must be an (n, 2) array")
    if len(pts) < n_ctrl:
        raise GeometryError("need at least as many points as control points")
    knots = clamped_knots(n_ctrl, k)
    chord = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = chord.sum()
    if total <= 0:
        raise GeometryError("degenerate point set: zero total chord length")
    u = np.concatenate([[0.0], np.cumsum(chord) / total])
    B = basis_matrix(knots, n_ctrl, k, u)
    if pinned is not None:
        pinned = np.asarray(pinned, dtype=float)
        rhs = pts - B[:, :2] @ pinned
        sol, _, rank, _ = np.linalg.lstsq(B[:, 2:], rhs, rcond=None)
        if rank < n_ctrl - 2:
            raise GeometryError("rank-deficient fitting system")
        cp = np.vstack([pinned, sol])
    else:
        cp, _, rank, _ = np.linalg.lstsq(B, pts, rcond=None)
        if rank < n_ctrl:
            raise GeometryError("rank-deficient fitting system")
    curve = BSplineCurve(k, cp, knots)
    resid = eval_curve(curve, u) - pts
    rms = float(np.sqrt(np.mean(np.sum(resid ** 2, axis=1))))
    return curve, rms


# ---------------------------------------------------------------------------
# Draft-tube geometry
# ---------------------------------------------------------------------------

_KINDS = ("circular", "ellipsoidal", "rounded-rectangle")


@dataclass(frozen=True)
class CrossSection:
    """One duct cross-section: half-width w, half-height h, corner radii."""

    station: float
    w: float
    h: float
    r_r: float
    r_f: float
    angle: float
    kind: str

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise GeometryError(f"non-positive section dimensions at x={self.station}")
        if self.r_r < 0 or self.r_f < 0:
            raise GeometryError("corner radii must be non-negative")
        lim = min(self.w, self.h) + 1e-9
        if self.r_r > lim or self.r_f > lim:
            raise GeometryError("corner radius exceeds min(w, h)")
        if self.kind not in _KINDS:
            raise GeometryError(f"unknown section kind {self.kind!r}")


@dataclass(frozen=True)
class ReferenceGeometry:
    """Baseline design: roof/floor/width curves plus station metadata."""

    roof: BSplineCurve
    floor: BSplineCurve
    width: BSplineCurve
    stations: list  # list of CrossSection rows from the data file

    def __post_init__(self):
        if len(self.roof.control_points) != 9 or len(self.floor.control_points) != 9:
            raise GeometryError("roof and floor curves need exactly 9 control points")
        if len(self.width.control_points) != 6:
            raise GeometryError("width curve needs exactly 6 control points")
        xs = _dense_x(self.roof)
        if np.any(_curve_y(self.roof, xs) <= _curve_y(self.floor, xs)):
            raise GeometryError("reference roof must stay above the floor")


@dataclass(frozen=True)
class DesignVector:
    """Control-point offsets (meters) with per-component bounds.

    Length 14 covers roof R1..R7 and floor F1..F7; length 18 appends the
    width offsets W1..W4.
    """

    offsets: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.offsets, dtype=float)
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        object.__setattr__(self, "offsets", x)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        if len(x) not in (14, 18):
            raise GeometryError(f"design vector length must be 14 or 18, got {len(x)}")
        if lb.shape != x.shape or ub.shape != x.shape:
            raise GeometryError("bounds must match the offset vector shape")
        if np.any(lb > ub):
            raise GeometryError("lower bound exceeds upper bound")
        if np.any(x < lb - 1e-12) or np.any(x > ub + 1e-12):
            raise GeometryError("offset outside its bounds")

    @property
    def dim(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class DraftTubeDesign:
    """A synthesized design: displaced curves and sampled cross-sections."""

    roof: BSplineCurve
    floor: BSplineCurve
    width: BSplineCurve
    sections: tuple
    offsets: np.ndarray = field(default=None)


def scenario_bounds(scenario: str) -> tuple[np.ndarray, np.ndarray]:
    """Optimization-variable limits for scenarios I.a, I.b, II.a and II.b.

    Unconstrained cases allow +-0.25 m everywhere; the internally constrained
    cases (b) keep roof offsets non-positive, floor offsets non-negative and
    width offsets non-positive so designs stay inside the reference envelope.
    """
    scenario = scenario.strip()
    if scenario == "I.a":
        lb = np.full(14, -0.25)
        ub = np.full(14, 0.25)
    elif scenario == "II.a":
        lb = np.full(18, -0.25)
        ub = np.full(18, 0.25)
    elif scenario == "I.b":
        lb = np.concatenate([np.full(7, -0.25), np.zeros(7)])
        ub = np.concatenate([np.zeros(7), np.full(7, 0.25)])
    elif scenario == "II.b":
        lb = np.concatenate([np.full(7, -0.25), np.zeros(7), np.full(4, -0.25)])
        ub = np.concatenate([np.zeros(7), np.full(7, 0.25), np.zeros(4)])
    else:
        raise GeometryError(f"unknown scenario {scenario!r}")
    return lb, ub


def _dense_x(curve: BSplineCurve, n: int = _N_DENSE) -> np.ndarray:
    lo, hi = curve.domain
    ts = np.linspace(lo, hi, n)
    return eval_curve(curve, ts)[:, 0]


def _curve_y(curve: BSplineCurve, xs, n: int = _N_DENSE) -> np.ndarray:
    """Curve height as a function of the station coordinate.

    Control-point x positions are never offset, so x(t) is monotone and the
    curve is a graph over the station axis; a dense sample plus linear
    interpolation inverts it.
    """
    lo, hi = curve.domain
    ts = np.linspace(lo, hi, n)
    pts = eval_curve(curve, ts)
    return np.interp(xs, pts[:, 0], pts[:, 1])


def synthesize(reference: ReferenceGeometry, x: DesignVector) -> DraftTubeDesign:
    """Apply control-point offsets to the reference and sample cross-sections.

    Roof and floor control points move vertically (R1..R7, F1..F7), width
    control points laterally (W1..W4); the first two control points of every
    curve stay fixed. Raises if the roof crosses the floor anywhere.
    """
    off = x.offsets
    roof_dy = np.concatenate([[0.0, 0.0], off[0:7]])
    floor_dy = np.concatenate([[0.0, 0.0], off[7:14]])
    if x.dim == 18:
        width_dy = np.concatenate([[0.0, 0.0], off[14:18]])
    else:
        width_dy = np.zeros(6)
    roof = reference.roof.with_offsets(roof_dy)
    floor = reference.floor.with_offsets(floor_dy)
    width = reference.width.with_offsets(width_dy)

    x_lo = max(roof.domain[0], floor.domain[0], width.domain[0])
    xs_r = _dense_x(roof)
    xs = np.linspace(xs_r[0], xs_r[-1], N_STATIONS)
    roof_y = _curve_y(roof, xs)
    floor_y = _curve_y(floor, xs)
    if np.any(roof_y <= floor_y):
        raise GeometryError("roof crosses the floor for this offset vector")
    w = _curve_y(width, xs)
    if np.any(w <= 0):
        raise GeometryError("non-positive duct width for this offset vector")
    h = 0.5 * (roof_y - floor_y)

    ref_st = np.array([s.station for s in reference.stations])
    ref_rr = np.array([s.r_r for s in reference.stations])
    ref_rf = np.array([s.r_f for s in reference.stations])
    ref_ang = np.array([s.angle for s in reference.stations])
    r_r = np.interp(xs, ref_st, ref_rr)
    r_f = np.interp(xs, ref_st, ref_rf)
    angle = np.interp(xs, ref_st, ref_ang)

    sections = []
    for j in range(N_STATIONS):
        lim = min(w[j], h[j])
        # Radii interpolate between adjacent reference sections, clamped so
        # the rounded corners always fit inside the section.
        rr = min(r_r[j], lim)
        rf = min(r_f[j], lim)
        if j == 0:
            kind = "circular"
        elif j == N_STATIONS - 1:
            kind = "rounded-rectangle"
        elif abs(w[j] - h[j]) < 1e-9 and rr >= lim - 1e-9:
            kind = "circular"
        elif rr >= lim - 1e-9 and rf >= lim - 1e-9:
            kind = "ellipsoidal"
        else:
            kind = "rounded-rectangle"
        sections.append(CrossSection(float(xs[j]), float(w[j]), float(h[j]),
                                     float(rr), float(rf), float(angle[j]), kind))
    return DraftTubeDesign(roof, floor, width, tuple(sections), off.copy())


def cross_section_area(section: CrossSection) -> float:
    """Area of one cross-section.

    Circular sections use pi*w^2; rounded rectangles use 4wh minus the two
    roof and two floor corner cut-offs, (4 - pi)/2 * (r_r^2 + r_f^2), which
    degenerates to the circle/ellipse area when the radii reach min(w, h).
    """
    if section.kind == "circular":
        return math.pi * section.w ** 2
    if section.kind == "ellipsoidal":
        return math.pi * section.w * section.h
    return (4.0 * section.w * section.h
            - (4.0 - math.pi) / 2.0 * (section.r_r ** 2 + section.r_f ** 2))


def station_profiles(design: DraftTubeDesign):
    """Roof, floor and width values sampled at the design's stations."""
    xs = np.array([s.station for s in design.sections])
    roof_y = _curve_y(design.roof, xs)
    floor_y = _curve_y(design.floor, xs)
    w = np.array([s.w for s in design.sections])
    return xs, roof_y, floor_y, w


def areas(design: DraftTubeDesign) -> dict:
    """Bulk quantities feeding the synthetic evaluator.

    Returns inlet/outlet areas, the centreline (mid-curve) arc length and the
    mean wall slope in radians.
    """
    first, last = design.sections[0], design.sections[-1]
    a_in = cross_section_area(first)
    a_out = cross_section_area(last)
    if a_in <= 0 or a_out <= 0:
        raise GeometryError("degenerate inlet or outlet section")
    xs = np.array([s.station for s in design.sections])
    h = np.array([s.h for s in design.sections])
    w = np.array([s.w for s in design.sections])
    roof_y = _curve_y(design.roof, xs)
    floor_y = _curve_y(design.floor, xs)
    mid = 0.5 * (roof_y + floor_y)
    length = float(np.sum(np.sqrt(np.diff(xs) ** 2 + np.diff(mid) ** 2)))
    dh = np.gradient(h, xs)
    dw = np.gradient(w, xs)
    slope = float(np.mean(np.arctan(0.5 * (np.abs(dh) + np.abs(dw)))))
    return {"A_in": float(a_in), "A_out": float(a_out),
            "length": length, "mean_slope": slope}


# ---------------------------------------------------------------------------
# Reference geometry persistence
# ---------------------------------------------------------------------------

def _read_curves_file(fh) -> dict:
    """Parse the curve file: blocks of 'curve,<name>,<order>' then rows."""
    curves = {}
    name, order, rows, knots = None, None, [], None

    def flush():
        if name is not None:
            curves[name] = BSplineCurve(order, np.array(rows), np.array(knots))

    for raw in fh:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if parts[0] == "curve":
            flush()
            name, order = parts[1], int(parts[2])
            rows, knots = [], None
        elif parts[0] == "knots":
            knots = [float(v) for v in parts[1:]]
        else:
            rows.append([float(parts[0]), float(parts[1])])
    flush()
    return curves


def load_reference(stations_path=None, curves_path=None) -> ReferenceGeometry:
    """Load the reference geometry; defaults to the packaged synthetic design."""
    if stations_path is None or curves_path is None:
        pkg = resources.files("drafttube").joinpath("data")
        stations_path = stations_path or pkg / "reference_stations.csv"
        curves_path = curves_path or pkg / "reference_curves.csv"
    stations = []
    with open(stations_path, newline="") as fh:
        for row in csv.DictReader(fh):
            stations.append(CrossSection(
                float(row["station"]), float(row["w"]), float(row["h"]),
                float(row["r_r"]), float(row["r_f"]), float(row["angle"]),
                row["kind"]))
    with open(curves_path) as fh:
        curves = _read_curves_file(fh)
    return ReferenceGeometry(curves["roof"], curves["floor"], curves["width"],
                             stations)

"""Entire functions with prescribed zero density that witness the
upper bound on the lower frame constant near critical density.

The construction, for spacing ``a`` close to 1:

* pick a radius ``R`` in the admissibility window so the zero budget
  ``pi * (1 - R**-1.5) * R**2`` is an exact integer ``n_R``;
* place ``q_R`` zeros on the dilated lattice ``(m + i n) / b`` inside
  the disk of radius ``R - 3`` (``b**2 = 1 - R**-1.5``);
* split the rest of the disk (minus the unit cells of those inner
  zeros) into ``p_R = n_R - q_R`` angular sectors of equal area
  ``b**-2`` and put one zero at each sector's centroid.

The resulting product ``F(z) = z * prod(1 - z/zeta)`` concentrates its
weighted mass in the disk while its lattice samples stay of unit size,
so the ratio of lattice mass to integral mass, divided by ``1 - a**2``,
stays bounded — the quantity reported as ``ratio_over_gap``.

Sector splitting is deterministic: the region is rasterized on a grid
of cell size ``1/(64 b)`` aligned with the inner unit cells, boundary
cells are refined 16x16 by a center-inclusion test, and areas are
normalized to the exact total.  The region is first cut into radial
rings: an inner collar wide enough to cover the jagged boundary of
the excluded cells plus a band of clean annulus (so every sector
centroid stays inside its own sector), then rings of roughly unit
width (at atom granularity, with the straddling cell subdivided so
ring areas are exact multiples of the sector area).  Each ring is
swept angularly from 0, with cut angles solved by bisection and
exact half-plane clipping of straddled raster cells, so every sector
area is exact to bisection precision.  The radial pre-cut keeps
sector diameters of order one for every spacing: a single global
sweep would stack all sector centroids on one mid-annulus circle at
ever-closer spacing as ``a`` grows, carving deep log-magnitude
trenches between them and breaking the uniformity of the potential
defect across spacings.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .bargmann import PlanarQuadrature, ZeroBased
from .errors import (AreaMismatchError, ConvergenceError,
                     NoIntegerInRangeError, RegimeError,
                     RimNotNegligibleError)
from .numerics import KahanAccumulator, kahan_sum
from .phase_space import PI, SquareLattice

__all__ = [
    "RadiusSelection",
    "SectorPartition",
    "ExtremalFunction",
    "ExtremalReport",
    "select_radius",
    "inner_zeros",
    "partition_annulus",
    "build_extremal",
    "logabs_Fa",
    "u_R_eval",
    "norms_and_ratio",
    "defect_sup",
    "truncated_sigma_identity",
    "extremal_report",
]

TWO_PI = 2.0 * PI


@dataclasses.dataclass(frozen=True)
class RadiusSelection:
    """Disk radius and zero budget for one spacing ``a``."""

    a: float
    R: float
    b2: float
    n_R: int
    q_R: int
    p_R: int

    @property
    def b(self) -> float:
        return math.sqrt(self.b2)


@dataclasses.dataclass(frozen=True)
class SectorPartition:
    """Equal-area sectors of the clipped disk, ring by ring.

    ``ring_sizes[j]`` sectors live in the ``j``-th radial ring;
    ``cuts[j]`` holds their ``ring_sizes[j] + 1`` cut angles starting
    at 0 and ending at 2*pi.  ``areas``, ``centroids`` and
    ``diameters`` are flattened in ring-major order and have
    ``p_R = sum(ring_sizes)`` entries.
    """

    ring_radii: np.ndarray
    ring_sizes: np.ndarray
    cuts: tuple
    areas: np.ndarray
    centroids: np.ndarray
    diameters: np.ndarray
    target_area: float


@dataclasses.dataclass(frozen=True)
class ExtremalFunction:
    """Zero set and stable log-magnitude evaluator of the product."""

    selection: RadiusSelection
    partition: SectorPartition
    zeros: np.ndarray
    product: ZeroBased

    def logabs(self, z):
        return self.product.logabs(z)


@dataclasses.dataclass(frozen=True)
class ExtremalReport:
    """Norms, their ratio against the density gap, and defects."""

    a: float
    selection: RadiusSelection
    fock_norm_sq: float
    lattice_norm_sq: float
    ratio: float
    ratio_over_gap: float
    defect_sup: float
    tail_integral: float

    ROW_FIELDS = ("a", "R", "n_R", "q_R", "p_R", "fock_norm_sq",
                  "lattice_norm_sq", "ratio", "ratio_over_gap",
                  "defect_sup", "tail_integral")

    def as_row(self) -> dict:
        sel = self.selection
        return {
            "a": self.a,
            "R": sel.R,
            "n_R": sel.n_R,
            "q_R": sel.q_R,
            "p_R": sel.p_R,
            "fock_norm_sq": self.fock_norm_sq,
            "lattice_norm_sq": self.lattice_norm_sq,
            "ratio": self.ratio,
            "ratio_over_gap": self.ratio_over_gap,
            "defect_sup": self.defect_sup,
            "tail_integral": self.tail_integral,
        }


# ---------------------------------------------------------------------------
# radius selection and inner zeros


def _zero_budget(radius: float) -> float:
    return PI * (1.0 - radius ** -1.5) * radius * radius


def select_radius(a: float) -> RadiusSelection:
    """Pick the smallest admissible integer zero budget and solve for R.

    The admissibility window is ``2(1-a^2) < R^{-3/2} < 4(1-a^2)``;
    the budget function is strictly increasing in R on it, so the
    smallest integer strictly inside the budget interval fixes R
    uniquely (bisection to 1e-12).
    """
    if not 0.98 < a < 1.0:
        raise RegimeError(
            "construction requires 0.98 < a < 1, got %r" % (a,))
    gap = 1.0 - a * a
    r_lo = (4.0 * gap) ** (-2.0 / 3.0)
    r_hi = (2.0 * gap) ** (-2.0 / 3.0)
    f_lo = _zero_budget(r_lo)
    f_hi = _zero_budget(r_hi)
    n = math.floor(f_lo) + 1
    if not f_lo < n < f_hi:
        raise NoIntegerInRangeError(
            "no integer zero budget inside (%.9g, %.9g)" % (f_lo, f_hi))
    lo, hi = r_lo, r_hi
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if _zero_budget(mid) < n:
            lo = mid
        else:
            hi = mid
    radius = 0.5 * (lo + hi)
    if abs(_zero_budget(radius) - n) > 1e-9:
        raise ConvergenceError("zero-budget equation not solved to 1e-9")
    decay = radius ** -1.5
    if not 2.0 * gap < decay < 4.0 * gap:
        raise ConvergenceError("selected radius left the admissible window")
    b2 = 1.0 - decay
    rin = math.sqrt(b2) * (radius - 3.0)
    span = int(math.floor(max(rin, 0.0))) + 1
    grid = np.arange(-span, span + 1)
    mm, nn = np.meshgrid(grid, grid, indexing="ij")
    q = int(np.count_nonzero(mm * mm + nn * nn < rin * rin))
    p = n - q
    if p < 1:
        raise NoIntegerInRangeError("inner zeros exhaust the budget: p_R < 1")
    return RadiusSelection(a=a, R=radius, b2=b2, n_R=n, q_R=q, p_R=p)


def inner_zeros(sel: RadiusSelection) -> np.ndarray:
    """Dilated lattice points strictly inside radius ``R - 3``.

    Sorted by (modulus, real index, imaginary index); the origin is
    always first.
    """
    b = sel.b
    rin = b * (sel.R - 3.0)
    span = int(math.floor(max(rin, 0.0))) + 1
    grid = np.arange(-span, span + 1)
    mm, nn = np.meshgrid(grid, grid, indexing="ij")
    keep = mm * mm + nn * nn < rin * rin
    m = mm[keep]
    n = nn[keep]
    order = np.lexsort((n, m, m * m + n * n))
    zeros = (m[order] + 1j * n[order]) / b
    if zeros.size != sel.q_R:
        raise ConvergenceError("inner zero count disagrees with selection")
    return zeros


# ---------------------------------------------------------------------------
# rasterization of the clipped disk


def _raster_atoms(sel: RadiusSelection, raster_subdiv: int,
                  rim_subdiv: int):
    """Axis-aligned rectangles covering disk(R) minus the inner cells.

    Returns (cx, cy, hx, hy) center/half-width arrays.  The raster
    pitch divides the inner-cell side, so inner-cell boundaries lie on
    raster lines and no rectangle straddles one.  Cells crossing the
    outer circle are refined ``rim_subdiv`` times per axis with a
    center-inclusion test; each refined row is merged into one
    rectangle (a row meets the disk in a single interval).
    """
    radius = sel.R
    b = sel.b
    s = 1.0 / (b * raster_subdiv)
    half = 0.5 * s
    rin2 = (b * (radius - 3.0)) ** 2
    r2 = radius * radius
    i_hi = int(math.ceil(radius / s)) + 1
    centers = (np.arange(-i_hi, i_hi) + 0.5) * s

    parts_cx = []
    parts_cy = []
    parts_hx = []
    parts_hy = []
    rim_cx = []
    rim_cy = []

    block = 256
    for start in range(0, centers.size, block):
        cy = centers[start:start + block][:, None]
        cx = centers[None, :]
        dx = np.maximum(np.abs(cx) - half, 0.0)
        dy = np.maximum(np.abs(cy) - half, 0.0)
        rmin2 = dx * dx + dy * dy
        ox = np.abs(cx) + half
        oy = np.abs(cy) + half
        rmax2 = ox * ox + oy * oy
        fully_in = rmax2 <= r2
        mi = np.rint(cx * b)
        ni = np.rint(cy * b)
        inner = mi * mi + ni * ni < rin2
        keep = fully_in & ~inner
        if np.any(keep):
            yy, xx = np.nonzero(keep)
            parts_cx.append(cx[0, xx])
            parts_cy.append(cy[yy, 0])
        rim = (rmin2 < r2) & ~fully_in
        if np.any(rim):
            yy, xx = np.nonzero(rim)
            rim_cx.append(cx[0, xx])
            rim_cy.append(cy[yy, 0])

    n_full = sum(c.size for c in parts_cx)
    full_cx = np.concatenate(parts_cx) if parts_cx else np.empty(0)
    full_cy = np.concatenate(parts_cy) if parts_cy else np.empty(0)
    full_h = np.full(n_full, half)

    out_cx = [full_cx]
    out_cy = [full_cy]
    out_hx = [full_h]
    out_hy = [full_h.copy()]

    if rim_cx:
        rcx = np.concatenate(rim_cx)
        rcy = np.concatenate(rim_cy)
        sub = s / rim_subdiv
        sub_half = 0.5 * sub
        offsets = (np.arange(rim_subdiv) + 0.5) * sub - half
        # sub-centers along x for every rim cell: (n_rim, rim_subdiv)
        sx = rcx[:, None] + offsets[None, :]
        for j in range(rim_subdiv):
            sy = rcy + offsets[j]
            room = r2 - sy * sy
            inside = sx * sx < room[:, None]
            count = inside.sum(axis=1)
            has = count > 0
            if not np.any(has):
                continue
            first = np.argmax(inside[has], axis=1)
            cnt = count[has]
            lo = sx[has, first]
            hi = sx[has, first + cnt - 1]
            out_cx.append(0.5 * (lo + hi))
            out_cy.append(np.full(cnt.size, 0.0) + sy[has])
            out_hx.append(cnt * sub_half)
            out_hy.append(np.full(cnt.size, sub_half))

    cx = np.concatenate(out_cx)
    cy = np.concatenate(out_cy)
    hx = np.concatenate(out_hx)
    hy = np.concatenate(out_hy)
    return cx, cy, hx, hy


def _corner_angles(cx, cy, hx, hy):
    """Per-rectangle min/max corner angle, continuous in [0, 2*pi].

    Corner angles are unwrapped relative to the center angle, so a
    rectangle touching the positive real axis from below ends exactly
    at 2*pi rather than jumping to 0.  No rectangle contains the
    origin (the central inner cell is excluded), so spans stay small.
    """
    theta_c = np.arctan2(cy, cx)
    theta_c = np.where(theta_c < 0.0, theta_c + TWO_PI, theta_c)
    tmin = np.full(cx.shape, np.inf)
    tmax = np.full(cx.shape, -np.inf)
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            raw = np.arctan2(cy + sy * hy, cx + sx * hx)
            d = raw - theta_c
            d = np.mod(d + PI, TWO_PI) - PI
            t = theta_c + d
            np.minimum(tmin, t, out=tmin)
            np.maximum(tmax, t, out=tmax)
    return theta_c, tmin, tmax


def _tri_clip(xs, ys, ds):
    """Area and first moment of the ``d < 0`` side of triangles.

    ``xs, ys, ds`` have shape (3, n): vertex coordinates and signed
    distances to the clip line.  Uses the lone-vertex closed form: the
    clipped piece (or its complement) is the sub-triangle spanned by
    the vertex whose sign differs from the other two.
    """
    full = 0.5 * np.abs((xs[1] - xs[0]) * (ys[2] - ys[0])
                        - (xs[2] - xs[0]) * (ys[1] - ys[0]))
    gx = (xs[0] + xs[1] + xs[2]) / 3.0
    gy = (ys[0] + ys[1] + ys[2]) / 3.0
    neg = (ds < 0.0).sum(axis=0)

    lone = np.where(neg == 1, np.argmin(ds, axis=0), np.argmax(ds, axis=0))
    cols = np.arange(ds.shape[1])
    dl = ds[lone, cols]
    dm = ds[(lone + 1) % 3, cols]
    dn = ds[(lone + 2) % 3, cols]
    xl = xs[lone, cols]
    xm = xs[(lone + 1) % 3, cols]
    xn = xs[(lone + 2) % 3, cols]
    yl = ys[lone, cols]
    ym = ys[(lone + 1) % 3, cols]
    yn = ys[(lone + 2) % 3, cols]

    den_m = dl - dm
    den_n = dl - dn
    safe_m = np.where(den_m != 0.0, den_m, 1.0)
    safe_n = np.where(den_n != 0.0, den_n, 1.0)
    tm = np.where(den_m != 0.0, dl / safe_m, 0.0)
    tn = np.where(den_n != 0.0, dl / safe_n, 0.0)
    frac = tm * tn
    px = xl + tm * (xm - xl)
    py = yl + tm * (ym - yl)
    qx = xl + tn * (xn - xl)
    qy = yl + tn * (yn - yl)
    sub_area = full * frac
    sub_gx = (xl + px + qx) / 3.0
    sub_gy = (yl + py + qy) / 3.0

    area = np.where(neg == 3, full,
                    np.where(neg == 0, 0.0,
                             np.where(neg == 1, sub_area, full - sub_area)))
    mx = np.where(neg == 3, full * gx,
                  np.where(neg == 0, 0.0,
                           np.where(neg == 1, sub_area * sub_gx,
                                    full * gx - sub_area * sub_gx)))
    my = np.where(neg == 3, full * gy,
                  np.where(neg == 0, 0.0,
                           np.where(neg == 1, sub_area * sub_gy,
                                    full * gy - sub_area * sub_gy)))
    return area, mx, my


def _rect_clip(cx, cy, hx, hy, phi):
    """Area/moment of rectangle parts on the ``angle < phi`` side."""
    sp = math.sin(phi)
    cp = math.cos(phi)
    x0, x1 = cx - hx, cx + hx
    y0, y1 = cy - hy, cy + hy

    def dist(x, y):
        return y * cp - x * sp

    area = np.zeros(cx.shape)
    mx = np.zeros(cx.shape)
    my = np.zeros(cx.shape)
    tris = (((x0, y0), (x1, y0), (x1, y1)),
            ((x0, y0), (x1, y1), (x0, y1)))
    for tri in tris:
        xs = np.stack([v[0] for v in tri])
        ys = np.stack([v[1] for v in tri])
        ds = np.stack([dist(v[0], v[1]) for v in tri])
        a, m1, m2 = _tri_clip(xs, ys, ds)
        area += a
        mx += m1
        my += m2
    return area, mx, my


class _AngularSweep:
    """Cumulative area/moment of raster atoms below a cut angle."""

    def __init__(self, cx, cy, hx, hy, weight_scale):
        theta_c, tmin, tmax = _corner_angles(cx, cy, hx, hy)
        self.max_span = float(np.max(tmax - tmin)) if cx.size else 0.0
        order = np.argsort(tmax, kind="stable")
        self.cx = cx[order]
        self.cy = cy[order]
        self.hx = hx[order]
        self.hy = hy[order]
        self.tmin = tmin[order]
        self.tmax = tmax[order]
        self.theta_c = theta_c[order]
        self.scale = weight_scale
        w = 4.0 * self.hx * self.hy * weight_scale
        self.cum_w = np.concatenate([[0.0], np.cumsum(w)])
        self.cum_mx = np.concatenate([[0.0], np.cumsum(w * self.cx)])
        self.cum_my = np.concatenate([[0.0], np.cumsum(w * self.cy)])
        self.total = float(self.cum_w[-1])

    def _straddlers(self, phi):
        k = np.searchsorted(self.tmax, phi, side="right")
        hi = np.searchsorted(self.tmax, phi + self.max_span + 1e-12,
                             side="right")
        if hi <= k:
            return k, slice(k, k), np.empty(0, bool)
        sl = slice(k, hi)
        mask = self.tmin[sl] < phi
        return k, sl, mask

    def area(self, phi):
        k, sl, mask = self._straddlers(phi)
        out = float(self.cum_w[k])
        if mask.any():
            a, _, _ = _rect_clip(self.cx[sl][mask], self.cy[sl][mask],
                                 self.hx[sl][mask], self.hy[sl][mask], phi)
            out += float(np.sum(a)) * self.scale
        return out

    def area_moment(self, phi):
        k, sl, mask = self._straddlers(phi)
        out = float(self.cum_w[k])
        outx = float(self.cum_mx[k])
        outy = float(self.cum_my[k])
        if mask.any():
            a, mx, my = _rect_clip(self.cx[sl][mask], self.cy[sl][mask],
                                   self.hx[sl][mask], self.hy[sl][mask], phi)
            out += float(np.sum(a)) * self.scale
            outx += float(np.sum(mx)) * self.scale
            outy += float(np.sum(my)) * self.scale
        return out, outx, outy


def _sector_diameters(sweep: _AngularSweep, cuts: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(cuts, sweep.theta_c, side="right") - 1,
                  0, cuts.size - 2)
    order = np.argsort(idx, kind="stable")
    sorted_idx = idx[order]
    bounds = np.searchsorted(sorted_idx, np.arange(cuts.size))
    diams = np.zeros(cuts.size - 1)
    for k in range(cuts.size - 1):
        members = order[bounds[k]:bounds[k + 1]]
        if members.size == 0:
            continue
        pts = np.column_stack([sweep.cx[members], sweep.cy[members]])
        if pts.shape[0] > 3:
            try:
                hull = ConvexHull(pts)
                members = members[hull.vertices]
            except QhullError:
                pass
        cx = sweep.cx[members]
        cy = sweep.cy[members]
        hx = sweep.hx[members]
        hy = sweep.hy[members]
        xs = np.concatenate([cx - hx, cx + hx, cx + hx, cx - hx])
        ys = np.concatenate([cy - hy, cy - hy, cy + hy, cy + hy])
        dx = xs[:, None] - xs[None, :]
        dy = ys[:, None] - ys[None, :]
        diams[k] = math.sqrt(float(np.max(dx * dx + dy * dy)))
    return diams


def _split_rects(cx, cy, hx, hy, per_axis):
    """Subdivide rectangles into regular grids of subrectangles."""
    offs = (2.0 * np.arange(per_axis) + 1.0) / per_axis - 1.0
    pair = np.stack(np.meshgrid(offs, offs, indexing="ij"), axis=-1)
    ox = pair[..., 0].ravel()
    oy = pair[..., 1].ravel()
    scx = (np.atleast_1d(cx)[:, None] + ox[None, :] * np.atleast_1d(hx)[:, None]).ravel()
    scy = (np.atleast_1d(cy)[:, None] + oy[None, :] * np.atleast_1d(hy)[:, None]).ravel()
    shx = np.repeat(np.atleast_1d(hx) / per_axis, per_axis * per_axis)
    shy = np.repeat(np.atleast_1d(hy) / per_axis, per_axis * per_axis)
    return scx, scy, shx, shy


def _take_prefix(scx, scy, shx, shy, need, scale, depth=1):
    """Split radius-sorted subatoms into (prefix of area `need`, rest).

    The one subatom straddling the cumulative target is recursively
    subdivided so the prefix area misses `need` by at most half the
    finest subatom, a few parts in 1e7 of a sector.
    """
    sr = np.hypot(scx, scy)
    sorder = np.argsort(sr, kind="stable")
    scx, scy, shx, shy, sr = (scx[sorder], scy[sorder],
                              shx[sorder], shy[sorder], sr[sorder])
    scum = np.cumsum(4.0 * shx * shy * scale)
    j = int(np.searchsorted(scum, need))
    if j >= len(scum):
        return ((scx, scy, shx, shy),
                tuple(np.empty(0) for _ in range(4)), float(sr[-1]))
    before = scum[j - 1] if j > 0 else 0.0
    if depth > 0:
        fcx, fcy, fhx, fhy = _split_rects(scx[j], scy[j], shx[j], shy[j], 4)
        (pcx, pcy, phx, phy), (qcx, qcy, qhx, qhy), r_cut = _take_prefix(
            fcx, fcy, fhx, fhy, need - before, scale, depth - 1)
        pre = (np.concatenate([scx[:j], pcx]), np.concatenate([scy[:j], pcy]),
               np.concatenate([shx[:j], phx]), np.concatenate([shy[:j], phy]))
        suf = (np.concatenate([qcx, scx[j + 1:]]),
               np.concatenate([qcy, scy[j + 1:]]),
               np.concatenate([qhx, shx[j + 1:]]),
               np.concatenate([qhy, shy[j + 1:]]))
        return pre, suf, r_cut
    # deepest level: the prefix whose area is closer to `need` wins
    if scum[j] - need <= need - before:
        j += 1
    return ((scx[:j], scy[:j], shx[:j], shy[:j]),
            (scx[j:], scy[j:], shx[j:], shy[j:]),
            float(sr[j - 1]) if j > 0 else float(sr[0]))


def _ring_split(cx, cy, hx, hy, scale, target, sel):
    """Assign atoms to radial rings holding whole numbers of sectors.

    The innermost ring is a collar covering the jagged inner boundary
    (excluded-cell corners reach ``R - 3 + sqrt(2)/(2b)``) plus a
    safety band of clean annulus, so that the mass of any sector
    crossing an excluded cell sits mostly above the cell and its
    centroid cannot fall inside one.  The clean annulus above the
    collar is cut into rings of roughly unit width.  Each ring
    boundary is an equal-area circle: every atom straddling it is
    subdivided 8x8 and the subatoms assigned by center radius (with a
    final nested split pinning the ring area to a fraction of the
    finest subatom), so ring membership is stable under raster
    refinement and each ring's area is an exact multiple of the
    sector area.
    """
    p_total = sel.p_R
    b = sel.b
    r = np.hypot(cx, cy)
    if p_total < 2:
        return [(cx, cy, hx, hy)], [p_total], np.array(
            [float(np.min(r)), float(np.max(r))])
    jag_clear = sel.R - 3.0 + (math.sqrt(0.5) + 0.6) / b
    width = sel.R - jag_clear
    n_above = max(1, int(round(width * b)))

    order = np.argsort(r, kind="stable")
    cx, cy, hx, hy, r = cx[order], cy[order], hx[order], hy[order], r[order]
    w = 4.0 * hx * hy * scale
    cum = np.cumsum(w)
    nominal = jag_clear + (np.arange(n_above) / n_above) * width
    # sectors per ring from the area accumulated below each nominal radius
    idx_nom = np.searchsorted(r, nominal)
    cum_sectors = np.rint(cum[np.maximum(idx_nom - 1, 0)] / target)
    cum_sectors = np.clip(cum_sectors, 1, p_total - 1).astype(int)
    cum_sectors = np.maximum.accumulate(cum_sectors)
    ring_counts = np.diff(np.concatenate([[0], cum_sectors, [p_total]]))
    keep = ring_counts > 0
    ring_counts = ring_counts[keep]
    cum_sectors = np.cumsum(ring_counts)[:-1]
    if len(ring_counts) == 1:
        return [(cx, cy, hx, hy)], [p_total], np.array(
            [float(r[0]), float(r[-1])])

    band_halfw = float(np.max(np.hypot(hx, hy))) + 1e-5
    rings = []
    radii = [float(r[0])]
    start = 0
    carry = None  # subatoms spilled over from the previous boundary
    for n_below in cum_sectors:
        want = n_below * target
        i = int(np.searchsorted(cum, want))
        r0 = float(r[i])
        i0 = max(int(np.searchsorted(r, r0 - band_halfw)), start)
        i1 = max(int(np.searchsorted(r, r0 + band_halfw)), i + 1)
        scx, scy, shx, shy = _split_rects(
            cx[i0:i1], cy[i0:i1], hx[i0:i1], hy[i0:i1], 8)
        need = want - (cum[i0 - 1] if i0 > 0 else 0.0)
        pre, suf, r_cut = _take_prefix(scx, scy, shx, shy, need, scale)
        part = (
            np.concatenate([cx[start:i0], pre[0]]),
            np.concatenate([cy[start:i0], pre[1]]),
            np.concatenate([hx[start:i0], pre[2]]),
            np.concatenate([hy[start:i0], pre[3]]),
        )
        if carry is not None:
            part = tuple(np.concatenate([c, p]) for c, p in zip(carry, part))
        rings.append(part)
        radii.append(r_cut)
        carry = suf
        start = i1
    last = (cx[start:], cy[start:], hx[start:], hy[start:])
    if carry is not None:
        last = tuple(np.concatenate([c, p]) for c, p in zip(carry, last))
    rings.append(last)
    radii.append(float(r[-1]))
    return rings, list(ring_counts), np.asarray(radii)


def partition_annulus(sel: RadiusSelection, raster_subdiv: int = 64,
                      rim_subdiv: int = 16) -> SectorPartition:
    """Split the clipped disk into ``p_R`` equal-area sectors.

    Radial rings of roughly unit width are cut first, then each ring
    is swept angularly; this keeps sector diameters of order one and
    sector centroids spread out for every spacing.  Raises
    AreaMismatchError when the rasterized area differs from the exact
    total ``p_R / b^2`` by more than 1e-4 relative (grid too coarse,
    or an inconsistent selection).
    """
    if sel.p_R < 1:
        raise ValueError("need at least one sector")
    target = 1.0 / sel.b2
    exact_total = sel.p_R * target
    cx, cy, hx, hy = _raster_atoms(sel, raster_subdiv, rim_subdiv)
    raw_total = float(np.sum(4.0 * hx * hy))
    if abs(raw_total - exact_total) > 1e-4 * exact_total:
        raise AreaMismatchError(
            "rasterized area %.12g vs exact %.12g exceeds 1e-4 relative"
            % (raw_total, exact_total))
    scale = exact_total / raw_total

    rings, ring_counts, ring_radii = _ring_split(
        cx, cy, hx, hy, scale, target, sel)

    all_areas = []
    all_centroids = []
    all_diams = []
    all_cuts = []
    for (rcx, rcy, rhx, rhy), n_k in zip(rings, ring_counts):
        sweep = _AngularSweep(rcx, rcy, rhx, rhy, scale)
        cuts = np.empty(n_k + 1)
        cuts[0] = 0.0
        cuts[-1] = TWO_PI
        for k in range(1, n_k):
            want = k * target
            lo, hi = cuts[k - 1], TWO_PI
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if sweep.area(mid) < want:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-14:
                    break
            cuts[k] = 0.5 * (lo + hi)
        cum = np.empty(n_k + 1)
        momx = np.empty(n_k + 1)
        momy = np.empty(n_k + 1)
        cum[0] = momx[0] = momy[0] = 0.0
        cum[-1], momx[-1], momy[-1] = sweep.area_moment(TWO_PI)
        for k in range(1, n_k):
            cum[k], momx[k], momy[k] = sweep.area_moment(cuts[k])
        areas = np.diff(cum)
        if np.max(np.abs(areas - target)) > 1e-6 * target:
            raise AreaMismatchError(
                "sector areas drift beyond 1e-6 relative")
        centroids = (np.diff(momx) + 1j * np.diff(momy)) / areas
        ang = np.angle(centroids)
        ang = np.where(ang < 0.0, ang + TWO_PI, ang)
        if np.any(ang < cuts[:-1] - 1e-9) or np.any(ang > cuts[1:] + 1e-9):
            raise AreaMismatchError(
                "a sector centroid left its angular range")
        all_areas.append(areas)
        all_centroids.append(centroids)
        all_diams.append(_sector_diameters(sweep, cuts))
        all_cuts.append(cuts)

    centroids = np.concatenate(all_centroids)
    if np.any(np.abs(centroids) > sel.R):
        raise AreaMismatchError("a sector centroid left the disk")
    b = sel.b
    rin2 = (b * (sel.R - 3.0)) ** 2
    mi = np.rint(centroids.real * b)
    ni = np.rint(centroids.imag * b)
    swallowed = ((mi * mi + ni * ni < rin2)
                 & (np.abs(centroids.real * b - mi) < 0.5)
                 & (np.abs(centroids.imag * b - ni) < 0.5))
    if np.any(swallowed):
        raise AreaMismatchError("a sector centroid fell inside an inner cell")

    return SectorPartition(ring_radii=ring_radii,
                           ring_sizes=np.asarray(ring_counts, dtype=int),
                           cuts=tuple(all_cuts),
                           areas=np.concatenate(all_areas),
                           centroids=centroids,
                           diameters=np.concatenate(all_diams),
                           target_area=target)


# ---------------------------------------------------------------------------
# the product, its potential, and reports


def build_extremal(sel: RadiusSelection,
                   partition: SectorPartition = None) -> ExtremalFunction:
    if partition is None:
        partition = partition_annulus(sel)
    zeros = np.concatenate([inner_zeros(sel), partition.centroids])
    if zeros.size != sel.n_R:
        raise ConvergenceError("zero multiset size disagrees with n_R")
    return ExtremalFunction(selection=sel, partition=partition,
                            zeros=zeros, product=ZeroBased(zeros))


def logabs_Fa(fa: ExtremalFunction, z):
    """log|F(z)| by compensated block products; -inf exactly on zeros."""
    return fa.logabs(z)


def u_R_eval(R: float, z):
    """Radial potential of the uniform unit-density measure on disk(R).

    Equals pi*|z|^2/2 inside the disk and continues with
    pi*R^2*(log|z| - log R + 1/2) outside; both branches agree on the
    rim.  It is the exact integral of log|1 - z/w| over the disk.
    """
    if R <= 0:
        raise ValueError("need R > 0")
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    r = np.abs(np.atleast_1d(z))
    inside = 0.5 * PI * r * r
    with np.errstate(divide="ignore"):
        outside = PI * R * R * (np.log(np.maximum(r, 1e-300))
                                - math.log(R) + 0.5)
    out = np.where(r <= R, inside, outside)
    return float(out[0]) if scalar else out


def norms_and_ratio(fa: ExtremalFunction, sel: RadiusSelection,
                    grid: PlanarQuadrature = None, margin: float = 6.0,
                    defect_eps: float = 0.2,
                    defect_step: float = 0.1) -> ExtremalReport:
    """Weighted planar norm, lattice sample norm, and their ratio.

    The planar integrand is exp(2 log|F| - pi |z|^2); the lattice norm
    sums the same expression over spacing-``a`` lattice points within
    ``R + margin`` (beyond which samples are below 1e-16 of the peak
    by Gaussian domination).  ``tail_integral`` is the planar integral
    restricted to ``|z| > R - 4``.
    """
    radius = sel.R
    if grid is None:
        grid = PlanarQuadrature(dr=0.04, r_out=radius + margin)
    if grid.r_out < radius + margin - 1e-12:
        raise ValueError("quadrature must extend to R + margin")
    total = KahanAccumulator()
    tail = KahanAccumulator()
    peak = 0.0
    rim_max = 0.0
    rim_from = grid.r_out - grid.dr
    for z, w, r in grid.iter_chunks():
        vals = np.exp(2.0 * fa.logabs(z) - PI * r * r)
        total.add_array(vals * w)
        outer = r > radius - 4.0
        if np.any(outer):
            tail.add_array(vals[outer] * w[outer])
        peak = max(peak, float(np.max(vals)))
        at_rim = r >= rim_from
        if np.any(at_rim):
            rim_max = max(rim_max, float(np.max(vals[at_rim])))
    if rim_max > 1e-16 * peak:
        raise RimNotNegligibleError(
            "integrand at the rim is %.3g of peak; enlarge the grid"
            % (rim_max / peak,))
    fock = total.total
    pts = SquareLattice(sel.a).points(radius + margin)
    samples = np.exp(2.0 * fa.logabs(pts) - PI * np.abs(pts) ** 2)
    lattice = kahan_sum(samples)
    gap = 1.0 - sel.a * sel.a
    ratio = lattice / fock
    dsup = defect_sup(fa, sel, eps=defect_eps,
                      sample_grid_step=defect_step)
    return ExtremalReport(a=sel.a, selection=sel, fock_norm_sq=fock,
                          lattice_norm_sq=lattice, ratio=ratio,
                          ratio_over_gap=ratio / gap, defect_sup=dsup,
                          tail_integral=tail.total)


def defect_sup(fa: ExtremalFunction, sel: RadiusSelection,
               eps: float = 0.2, sample_grid_step: float = 0.1) -> float:
    """Largest gap between log|F| and its smoothed potential.

    Sampled on a square grid of the stated step over |z| <= R + 5,
    keeping points farther than ``eps`` from every zero.
    """
    if eps <= 0:
        raise ValueError("need eps > 0")
    if sample_grid_step <= 0:
        raise ValueError("need a positive grid step")
    radius = sel.R
    reach = radius + 5.0
    n = int(math.floor(reach / sample_grid_step))
    coords = np.arange(-n, n + 1) * sample_grid_step
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    z = (xx + 1j * yy).ravel()
    keep = np.abs(z) <= reach
    z = z[keep]
    tree = cKDTree(np.column_stack([fa.zeros.real, fa.zeros.imag]))
    dist, _ = tree.query(np.column_stack([z.real, z.imag]), k=1)
    z = z[dist > eps]
    worst = 0.0
    step = 1 << 18
    for start in range(0, z.size, step):
        chunk = z[start:start + step]
        dev = np.abs(fa.logabs(chunk)
                     - sel.b2 * u_R_eval(radius, chunk))
        worst = max(worst, float(np.max(dev)))
    return worst


def truncated_sigma_identity(sel_or_zeros, z: complex):
    """Plain log-product versus the convergence-factor form.

    For zero sets symmetric under multiplication by i the two agree:
    the linear and quadratic factor exponents sum to zero.  Passing an
    explicit asymmetric zero list exposes the difference
    Re(z*S1 + z^2*S2/2).
    """
    if isinstance(sel_or_zeros, RadiusSelection):
        zeros = inner_zeros(sel_or_zeros)
    else:
        zeros = np.asarray(sel_or_zeros, dtype=complex)
    plain = ZeroBased(zeros).logabs(z)
    nz = zeros[zeros != 0]
    z = complex(z)
    if nz.size:
        inv = 1.0 / nz
        s1 = kahan_sum(inv.real) + 1j * kahan_sum(inv.imag)
        inv2 = inv * inv
        s2 = kahan_sum(inv2.real) + 1j * kahan_sum(inv2.imag)
        correction = (z * s1 + 0.5 * z * z * s2).real
    else:
        correction = 0.0
    return plain, plain + correction


def extremal_report(a: float, dr: float = 0.04, margin: float = 6.0,
                    defect_eps: float = 0.2, defect_step: float = 0.1,
                    raster_subdiv: int = 64,
                    rim_subdiv: int = 16) -> ExtremalReport:
    """Full pipeline: select, partition, build, and measure."""
    sel = select_radius(a)
    partition = partition_annulus(sel, raster_subdiv=raster_subdiv,
                                  rim_subdiv=rim_subdiv)
    fa = build_extremal(sel, partition)
    grid = PlanarQuadrature(dr=dr, r_out=sel.R + margin)
    return norms_and_ratio(fa, sel, grid=grid, margin=margin,
                           defect_eps=defect_eps, defect_step=defect_step)

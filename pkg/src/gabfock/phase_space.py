"""Time-frequency primitives on the real line.

Conventions.  A phase-space point zeta = (x, xi) acts on f in L2(R) by

    (pi_zeta f)(t) = exp(2 pi i xi t) f(t - x),

and is identified with the complex number z = x + i xi when convenient.
The Gaussian window is g0(t) = exp(-pi t^2) (so ||g0||^2 = 2^{-1/2});
Hermite functions h_n are normalized to an orthonormal basis of L2 with
h_0 = 2^{1/4} g0.  The Wiener amalgam norm used for the synthesis-bound
chain is ||f||_W = sum_k sup_{t in [0,1]} |f(t+k)|.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import EnvelopeMissingError, ExtentTooSmallError

PI = math.pi

# relative size at the grid rim above which a quadrature is rejected
RIM_TOLERANCE = 1e-12

# golden ratio step for the one-dimensional sup refinement
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PhasePoint:
    """Point (x, xi) of the time-frequency plane."""

    x: float
    xi: float

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        return cls(z.real, z.imag)

    def to_complex(self):
        return complex(self.x, self.xi)

    def abs2(self):
        return self.x * self.x + self.xi * self.xi


def _as_phase_point(zeta):
    if isinstance(zeta, PhasePoint):
        return zeta
    if isinstance(zeta, (tuple, list)) and len(zeta) == 2:
        return PhasePoint(float(zeta[0]), float(zeta[1]))
    return PhasePoint.from_complex(zeta)


@dataclass(frozen=True)
class SquareLattice:
    """Square lattice a Z^2, identified with {a(m + i n)} in C.

    a is the spacing in time units; rho is an optional default
    enumeration radius (in the same units as |lambda|).
    """

    a: float
    rho: float = 0.0

    def __post_init__(self):
        if not (self.a > 0):
            raise ValueError("lattice spacing must be positive")
        if self.rho < 0:
            raise ValueError("enumeration radius must be >= 0")

    def points(self, rho: Optional[float] = None) -> np.ndarray:
        """Complex lattice points with |lambda| <= rho.

        Deterministic order: increasing |lambda|, ties broken
        lexicographically by (m, n).
        """
        r = self.rho if rho is None else float(rho)
        if r < 0:
            raise ValueError("enumeration radius must be >= 0")
        bound = int(math.floor(r / self.a + 1e-12))
        if bound < 0:
            return np.zeros(0, dtype=complex)
        rng = np.arange(-bound, bound + 1)
        m, n = np.meshgrid(rng, rng, indexing="ij")
        m = m.ravel()
        n = n.ravel()
        norm2 = m * m + n * n
        keep = self.a * self.a * norm2 <= r * r * (1 + 1e-15)
        m, n, norm2 = m[keep], n[keep], norm2[keep]
        order = np.lexsort((n, m, norm2))
        return self.a * (m[order] + 1j * n[order])

    def nearest_distance(self, z) -> np.ndarray:
        """Distance from z (array ok) to the full lattice a Z^2."""
        z = np.asarray(z, dtype=complex)
        m = np.round(z.real / self.a)
        n = np.round(z.imag / self.a)
        return np.abs(z - self.a * (m + 1j * n))


class GaussianWindow:
    """g0(t) = exp(-pi t^2); its own exact decay envelope."""

    label = "gaussian"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-PI * t * t)

    def envelope(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-PI * r * r)


class SechWindow:
    """g1(t) = 1 / cosh(pi gamma t), gamma > 0.

    The function is even and strictly decreasing in |t|, so it serves
    as its own envelope.
    """

    label = "sech"

    def __init__(self, gamma: float = 1.0):
        if not (gamma > 0):
            raise ValueError("sech window needs gamma > 0")
        self.gamma = float(gamma)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 / np.cosh(PI * self.gamma * t)

    def envelope(self, r):
        r = np.asarray(r, dtype=float)
        return 1.0 / np.cosh(PI * self.gamma * r)


Window = Union[GaussianWindow, SechWindow]


@dataclass(frozen=True)
class LineQuadrature:
    """Uniform grid rule on [-extent, extent] with weight = step.

    For integrands of the form (entire function) x exp(-pi t^2) the
    trapezoidal error decays like exp(-c / step^2), so the default
    step 1/64 is far below every tolerance used here; accuracy is
    limited by the extent, which callers must choose to cover the
    integrand's mass (see gaussian_tail_bound).
    """

    step: float = 1.0 / 64.0
    extent: float = 8.0

    def __post_init__(self):
        if not (self.step > 0 and self.extent > 0):
            raise ValueError("quadrature step and extent must be positive")

    def nodes(self) -> np.ndarray:
        k = int(math.floor(self.extent / self.step + 1e-9))
        return np.arange(-k, k + 1) * self.step

    def integrate(self, values) -> complex:
        return complex(np.add.reduce(np.asarray(values))) * self.step

    def gaussian_tail_bound(self, amplitude: float = 1.0, kappa: float = 1.0) -> float:
        """Bound on the omitted mass of amplitude * exp(-pi kappa t^2)
        beyond the extent; decreasing in the extent."""
        return amplitude * math.erfc(math.sqrt(PI * kappa) * self.extent) / math.sqrt(kappa)


def line_quadrature_for(rho: Optional[float] = None) -> LineQuadrature:
    """Default rule: step 1/64, extent max(8, rho + 6)."""
    extent = 8.0 if rho is None else max(8.0, float(rho) + 6.0)
    return LineQuadrature(extent=extent)


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------

def hermite_matrix(count: int, t) -> np.ndarray:
    """Rows h_0 .. h_{count-1} evaluated on the grid t.

    Three-term recurrence seeded with h_0 = 2^{1/4} exp(-pi t^2):

        h_{n+1}(t) = 2 sqrt(pi/(n+1)) t h_n(t) - sqrt(n/(n+1)) h_{n-1}(t)
    """
    if count < 1:
        raise ValueError("need at least one basis function")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((count, t.size), dtype=float)
    out[0] = 2.0 ** 0.25 * np.exp(-PI * t * t)
    if count > 1:
        out[1] = 2.0 * math.sqrt(PI) * t * out[0]
    for n in range(1, count - 1):
        out[n + 1] = (2.0 * math.sqrt(PI / (n + 1)) * t * out[n]
                      - math.sqrt(n / (n + 1)) * out[n - 1])
    return out


def hermite_eval(n: int, t):
    """h_n on the grid t (scalar in, scalar out)."""
    if n < 0:
        raise ValueError("Hermite index must be >= 0")
    scalar = np.isscalar(t) or np.ndim(t) == 0
    vals = hermite_matrix(n + 1, t)[n]
    return float(vals[0]) if scalar else vals


def hermite_series(coeffs, t):
    """sum_n coeffs[n] h_n(t) on the grid t."""
    coeffs = np.asarray(coeffs)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("coefficient vector must be non-empty and 1-D")
    scalar = np.isscalar(t) or np.ndim(t) == 0
    vals = coeffs @ hermite_matrix(coeffs.size, t)
    return complex(vals[0]) if scalar and np.iscomplexobj(coeffs) else (
        float(vals[0]) if scalar else vals)


def _series_callable(f) -> Callable:
    """Accept either a callable or a Hermite coefficient vector."""
    if callable(f):
        return f
    coeffs = np.asarray(f)
    return lambda t: hermite_series(coeffs, t)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def tf_shift(f, zeta, t):
    """(pi_zeta f)(t) = exp(2 pi i xi t) f(t - x)."""
    p = _as_phase_point(zeta)
    fn = _series_callable(f)
    t = np.asarray(t, dtype=float)
    return np.exp(2j * PI * p.xi * t) * fn(t - p.x)


def _check_rim(integrand_abs, what: str):
    peak = float(np.max(integrand_abs)) if integrand_abs.size else 0.0
    if peak == 0.0:
        return
    rim = max(float(integrand_abs[0]), float(integrand_abs[-1]))
    if rim > RIM_TOLERANCE * peak:
        raise ExtentTooSmallError(
            f"{what}: integrand at the grid rim is {rim / peak:.2e} of its "
            "peak; increase the quadrature extent")


def gabor_coefficient(f, w: Window, zeta, quad: Optional[LineQuadrature] = None) -> complex:
    """<f, pi_zeta w> by line quadrature.

    f may be a Hermite coefficient vector or a callable; w is a window
    (real-valued).  The quadrature extent must cover both the mass of f
    and the shifted window, which is checked via the preconditions and
    a rim test on the assembled integrand.
    """
    p = _as_phase_point(zeta)
    if quad is None:
        quad = LineQuadrature()
    if quad.extent < abs(p.x) + 4.0:
        raise ExtentTooSmallError(
            f"quadrature extent {quad.extent} too small for shift x={p.x:+.3f}"
            " (need extent >= |x| + 4)")
    fn = _series_callable(f)
    t = quad.nodes()
    integrand = (np.asarray(fn(t), dtype=complex)
                 * np.conj(np.exp(2j * PI * p.xi * t))
                 * np.asarray(w(t - p.x), dtype=float))
    _check_rim(np.abs(integrand), "gabor_coefficient")
    return quad.integrate(integrand)


def _cell_sup(fn, lo: np.ndarray, hi: np.ndarray, sup_grid: int) -> np.ndarray:
    """sup of |fn| on each interval [lo_i, hi_i]: dense grid followed by
    one golden-section refinement pass around the grid maximum."""
    offsets = np.linspace(0.0, 1.0, sup_grid + 1)
    pts = lo[:, None] + (hi - lo)[:, None] * offsets[None, :]
    vals = np.abs(fn(pts.ravel())).reshape(pts.shape)
    best = vals.max(axis=1)
    arg = vals.argmax(axis=1)
    step = (hi - lo) / sup_grid
    a = lo + np.maximum(arg - 1, 0) * step
    b = lo + np.minimum(arg + 1, sup_grid) * step
    # golden-section maximization of |fn|, vectorized over cells
    for _ in range(48):
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        keep_left = np.abs(fn(c)) >= np.abs(fn(d))
        a = np.where(keep_left, a, c)
        b = np.where(keep_left, d, b)
    mid = 0.5 * (a + b)
    return np.maximum(best, np.abs(fn(mid)))


def amalgam_norm(f, envelope: Optional[Callable] = None,
                 sup_grid: int = 256, k_max: int = 12) -> float:
    """Wiener amalgam norm sum_k sup_{[0,1]} |f(t+k)| with certified tail.

    The cells k in [-k_max, k_max] are measured on a grid of sup_grid
    points per cell plus a golden-section refinement; the remaining
    cells are bounded by the envelope E, which must satisfy
    |f(t)| <= E(|t|) with E nonincreasing.  Windows pass their exact
    envelope; for fitted duals use a fitted Gaussian envelope.
    """
    if isinstance(f, (GaussianWindow, SechWindow)) and envelope is None:
        envelope = f.envelope
    if envelope is None:
        raise EnvelopeMissingError(
            "amalgam_norm needs a decay envelope to certify the tail")
    fn = _series_callable(f)
    lows = np.arange(-k_max, k_max + 1, dtype=float)
    sups = _cell_sup(fn, lows, lows + 1.0, sup_grid)
    main = float(np.add.reduce(np.sort(sups)))  # small-to-large for accuracy
    if main == 0.0 and float(envelope(0.0)) == 0.0:
        return 0.0
    # cells k >= k_max+1 sit beyond k; cells k <= -(k_max+1) beyond |k+1|
    tail = 0.0
    k = k_max
    while True:
        term = float(envelope(float(k))) + float(envelope(float(k + 1)))
        tail += term
        k += 1
        if term <= 1e-18 * (main + tail) or term == 0.0:
            break
        if k > k_max + 100000:
            raise EnvelopeMissingError(
                "envelope tail did not converge within 1e5 cells")
    return main + tail


GAUSSIAN = GaussianWindow()


def gaussian_l2_norm_sq() -> float:
    """||g0||^2 = integral exp(-2 pi t^2) dt = 2^{-1/2}."""
    return 2.0 ** -0.5

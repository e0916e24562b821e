"""Archimedean measure lab: potential grids, discrete Laplacian densities,
escape-time images, empirical torsion histograms, and discrepancy statistics.

The potential on a parameter grid is the archimedean escape rate of the
cleared section lift, fiber by fiber.  Its distributional Laplacian (5-point
stencil, 1/(2 pi) normalization calibrated so the discrete Laplacian of
log|t| has unit mass) realizes the limiting measure of torsion parameters;
dividing by twice the divisor degree makes it a probability density because
the escape rate is twice the local height.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ConfigError, DegenerateInputError
from .heights_ff import cleared_section, divisor_DEP

DEFAULT_EXCLUSION = 1e-3
DEFAULT_GRID_DEPTH = 26


def thread_count():
    env = os.environ.get("HAUTEUR_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"HAUTEUR_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise ConfigError("HAUTEUR_THREADS must be positive")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int
    exclusion_radius: float = DEFAULT_EXCLUSION

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DegenerateInputError("grid rectangle is empty")
        if self.nx < 2 or self.ny < 2:
            raise DegenerateInputError("grid needs at least 2x2 nodes")

    @property
    def hx(self):
        return (self.re_max - self.re_min) / self.nx

    @property
    def hy(self):
        return (self.im_max - self.im_min) / self.ny

    @property
    def cell_area(self):
        return self.hx * self.hy

    def nodes(self):
        """Complex nodes, row-major from (re_min, im_max): rows top-down.

        Pixel convention: the step is the cell width, nodes sit on the left
        and top cell edges (re_min + k*hx, im_max - j*hy), and the right and
        bottom rectangle edges carry no node.  On dyadic rectangles this
        keeps the nodes exactly representable: the Figure rectangles put the
        rational torsion parameters on grid nodes at the stated resolutions.
        """
        xs = self.re_min + self.hx * np.arange(self.nx)
        ys = self.im_max - self.hy * np.arange(self.ny)
        return xs[None, :] + 1j * ys[:, None]


@dataclass(frozen=True)
class DensityGrid:
    spec: GridSpec
    values: np.ndarray          # ny x nx, nonnegative
    mass: float
    normalization: Fraction

    def cell_masses(self):
        return self.values * self.spec.cell_area


@dataclass(frozen=True)
class EscapeImage:
    spec: GridSpec
    marks: np.ndarray           # ny x nx booleans
    threshold: float
    max_iter: int


# ---------------------------------------------------------------------------
# Potential grid
# ---------------------------------------------------------------------------


def _lift_coeff_grids(cs, t):
    """Evaluate the lift coefficient polynomials on the node array."""
    def ev(zp):
        cfs = [float(c) for c in zp.coeffs]
        acc = np.full_like(t, complex(cfs[-1]) if cfs else 0.0)
        for c in cfs[-2::-1]:
            acc = acc * t + c
        return acc

    f1 = [ev(c) for c in cs.lift_f1]
    f2 = [ev(c) for c in cs.lift_f2]
    return f1, f2, ev(cs.A0), ev(cs.B0)


def _escape_rate_block(cs, t, depth):
    """Vectorized archimedean escape rate of the section lift over nodes t."""
    f1, f2, a, b = _lift_coeff_grids(cs, t)
    with np.errstate(all="ignore"):
        m0 = np.maximum(np.abs(a), np.abs(b))
        G = np.log(m0)
        a = a / m0
        b = b / m0
        for k in range(1, depth + 1):
            a2, b2 = a * a, b * b
            a3, b3 = a2 * a, b2 * b
            v1 = f1[0] * a2 * a2 + f1[2] * a2 * b2 + f1[3] * a * b3 + f1[4] * b2 * b2
            v2 = f2[1] * a3 * b + f2[2] * a2 * b2 + f2[3] * a * b3 + f2[4] * b2 * b2
            m = np.maximum(np.abs(v1), np.abs(v2))
            G = G + np.log(m) * (4.0 ** (-k))
            a = v1 / m
            b = v2 / m
    return G


def grid_potential(E, x_P, spec, depth=DEFAULT_GRID_DEPTH, threads=None):
    """Escape-rate potential at each node; excluded/failed nodes are NaN.

    Exclusion disks of spec.exclusion_radius are carved around every finite
    singular parameter.  Nodes are processed in fixed row blocks so the
    output is independent of the thread schedule.
    """
    cs = cleared_section(E, x_P)
    t = spec.nodes()
    sing = E.singular_parameters().all_finite_complex()
    nthreads = threads or thread_count()
    rows = np.array_split(np.arange(spec.ny), max(1, min(nthreads * 4, spec.ny)))

    def work(idx):
        return _escape_rate_block(cs, t[idx], depth)

    if nthreads > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(work, rows))
    else:
        parts = [work(idx) for idx in rows]
    G = np.vstack(parts)
    G[~np.isfinite(G)] = np.nan
    for s in sing:
        G[np.abs(t - s) < spec.exclusion_radius] = np.nan
    return G


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------


def laplacian_density(potential, spec, normalization):
    """Discrete-Laplacian density of a potential grid, clamped nonnegative.

    The 5-point stencil divided by 2*pi*h^2 makes the Laplacian of log|t|
    integrate to 1; the potential here is the escape rate (twice the local
    height) so the mass normalization divides by 2*deg as well.
    """
    G = np.asarray(potential, dtype=float)
    if G.shape != (spec.ny, spec.nx):
        raise DegenerateInputError("potential shape does not match the grid")
    lap = np.full_like(G, np.nan)
    hx2, hy2 = spec.hx ** 2, spec.hy ** 2
    lap[1:-1, 1:-1] = (
        (G[1:-1, 2:] + G[1:-1, :-2] - 2 * G[1:-1, 1:-1]) / hx2
        + (G[2:, 1:-1] + G[:-2, 1:-1] - 2 * G[1:-1, 1:-1]) / hy2
    )
    dens = lap / (2 * math.pi)
    norm = Fraction(normalization)
    scale = 2 * float(norm) if norm != 0 else 1.0
    dens = dens / scale
    dens = np.where(np.isfinite(dens), np.clip(dens, 0.0, None), 0.0)
    mass = float(np.sum(dens) * spec.cell_area)
    return DensityGrid(spec=spec, values=dens, mass=mass, normalization=norm)


def empirical_measure(ts, spec):
    """Histogram of the full root multiset on the grid.

    Cell masses sum to the in-rectangle fraction; the remainder is the
    escaped mass (roots outside the rectangle), so the full measure has
    total mass 1.
    """
    roots = np.asarray(ts.roots, dtype=complex)
    mults = np.asarray(ts.multiplicities, dtype=float)
    if len(roots) == 0:
        raise DegenerateInputError("empty root set")
    total = float(np.sum(mults))
    xe = spec.re_min + spec.hx * np.arange(spec.nx + 1)
    ye = spec.im_max - spec.hy * np.arange(spec.ny + 1)
    # bin on -im so the first axis runs from im_max downward (row-major top)
    hist, _, _ = np.histogram2d(-roots.imag, roots.real,
                                bins=(-ye, xe), weights=mults)
    vals = hist / total / spec.cell_area
    mass = float(np.sum(vals) * spec.cell_area)
    return DensityGrid(spec=spec, values=vals, mass=mass, normalization=Fraction(1))


def discrepancy(a, b, smoothed=False, sigma=2.0):
    """Half the L1 distance of the normalized cell-mass arrays, in [0, 1].

    With smoothed=True both mass arrays get one Gaussian blur pass (width
    sigma cells) before comparison, damping histogram quantization.
    """
    if a.spec != b.spec:
        raise DegenerateInputError("density grids live on different grids")
    pa = a.cell_masses()
    pb = b.cell_masses()
    pa = np.where(np.isfinite(pa), pa, 0.0)
    pb = np.where(np.isfinite(pb), pb, 0.0)
    if pa.sum() <= 0 or pb.sum() <= 0:
        raise DegenerateInputError("cannot normalize a zero-mass grid")
    pa = pa / pa.sum()
    pb = pb / pb.sum()
    if smoothed:
        pa = gaussian_filter(pa, sigma=sigma, mode="constant")
        pb = gaussian_filter(pb, sigma=sigma, mode="constant")
        pa = pa / pa.sum()
        pb = pb / pb.sum()
    return 0.5 * float(np.sum(np.abs(pa - pb)))


# ---------------------------------------------------------------------------
# Escape-time renderer
# ---------------------------------------------------------------------------


def escape_time_image(E, x_P, spec, threshold=10000.0, max_iter=8):
    """Mark nodes where |f_t^n(x(P_t))| >= threshold for some n <= max_iter.

    The iteration runs on affine x-coordinates of the original model; a
    division blow-up (the orbit hits infinity) counts as escaped.  Nodes
    where a coefficient or the section has a pole are left unmarked: there
    is no fiber data there.  Pure elementwise binary64 arithmetic in a fixed
    order, so the output is bit-deterministic.
    """
    t = spec.nodes()

    def ev_rat(f):
        num = np.zeros_like(t)
        for c in reversed(f.num.coeffs):
            num = num * t + complex(c)
        den = np.zeros_like(t)
        for c in reversed(f.den.coeffs):
            den = den * t + complex(c)
        with np.errstate(all="ignore"):
            return num / den

    with np.errstate(all="ignore"):
        avals = [ev_rat(a) for a in E.coefficients]
        a1, a2, a3, a4, a6 = avals
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        x = ev_rat(x_P)
        valid = np.isfinite(x)
        for v in avals:
            valid &= np.isfinite(v)
        marks = np.zeros(t.shape, dtype=bool)
        for _ in range(max_iter):
            x2 = x * x
            phi = x2 * x2 - b4 * x2 - 2 * b6 * x - b8
            psi = 4 * x2 * x + b2 * x2 + 2 * b4 * x + b6
            x = phi / psi
            escaped = ~np.isfinite(x) | (np.abs(x) >= threshold)
            marks |= valid & escaped
    return EscapeImage(spec=spec, marks=marks, threshold=float(threshold),
                       max_iter=int(max_iter))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_DARK = (12, 12, 32)
_YELLOW = (255, 221, 51)


def ppm_bytes_image(img):
    """Binary PPM (P6) of an EscapeImage, yellow marks on a dark ground."""
    h, w = img.marks.shape
    rgb = np.empty((h, w, 3), dtype=np.uint8)
    rgb[:] = _DARK
    rgb[img.marks] = _YELLOW
    return b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes()


def ppm_bytes_density(grid):
    """Binary PPM (P6) heatmap of a DensityGrid (yellow ramp on dark)."""
    v = np.where(np.isfinite(grid.values), grid.values, 0.0)
    top = float(v.max())
    scale = v / top if top > 0 else v
    h, w = v.shape
    rgb = np.empty((h, w, 3), dtype=np.uint8)
    for ch in range(3):
        lo, hi = _DARK[ch], _YELLOW[ch]
        rgb[:, :, ch] = np.round(lo + (hi - lo) * scale).astype(np.uint8)
    return b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes()


def density_csv(grid):
    """CSV (re, im, value) rows in grid order, 17 significant digits."""
    t = grid.spec.nodes()
    lines = ["re,im,value"]
    vals = grid.values
    for i in range(grid.spec.ny):
        for j in range(grid.spec.nx):
            lines.append(
                f"{t[i, j].real:.17g},{t[i, j].imag:.17g},{vals[i, j]:.17g}"
            )
    return "\n".join(lines) + "\n"

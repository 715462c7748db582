"""Polarized curves: uniformly sampled curves with a quadratic differential.

A polarized curve is an immersion x: [s0, s1] -> R^n together with the
polarization ds^2/m, stored as samples of x, x' and m on a uniform
grid.  Derivatives are either supplied in closed form by the curve
families or reconstructed by fourth-order finite differences, and all
downstream integrators interpolate these samples cubically, keeping
every numerical route at O(h^4).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, GeometryError, PolarizationError

# Fourth-order one-sided first-derivative stencils (times 12 h).
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0])
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0])


@dataclass(frozen=True)
class Grid:
    """Uniform parameter grid with N nodes on [s0, s1]."""

    s0: float
    s1: float
    num: int

    def __post_init__(self):
        if self.num < 5:
            raise GeometryError(f"grid needs at least 5 nodes, got {self.num}")
        if not self.s1 > self.s0:
            raise GeometryError("grid interval is empty")

    @property
    def h(self) -> float:
        return (self.s1 - self.s0) / (self.num - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.s0, self.s1, self.num)

    def refined(self, factor: int = 2) -> "Grid":
        """Same interval with the step divided by ``factor``."""
        return Grid(self.s0, self.s1, (self.num - 1) * factor + 1)


def derivative_samples(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Fourth-order finite-difference derivative along axis 0."""
    f = np.asarray(values, dtype=float)
    if f.shape[0] != grid.num:
        raise DimensionError("sample count does not match grid")
    h = grid.h
    df = np.empty_like(f)
    df[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    df[0] = np.tensordot(_EDGE0, f[:5], axes=(0, 0)) / (12.0 * h)
    df[1] = np.tensordot(_EDGE1, f[:5], axes=(0, 0)) / (12.0 * h)
    df[-1] = -np.tensordot(_EDGE0, f[-1:-6:-1], axes=(0, 0)) / (12.0 * h)
    df[-2] = -np.tensordot(_EDGE1, f[-1:-6:-1], axes=(0, 0)) / (12.0 * h)
    return df


def cubic_interp(values: np.ndarray, grid: Grid, s: np.ndarray) -> np.ndarray:
    """Piecewise-cubic Lagrange interpolation of grid samples at points s.

    Uses the 4-node stencil around each query point, clamped at the
    boundary, so the error is O(h^4) with smooth data.
    """
    f = np.asarray(values, dtype=float)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = (s - grid.s0) / grid.h
    base = np.clip(np.floor(t).astype(int) - 1, 0, grid.num - 4)
    u = t - base
    # Lagrange basis on nodes 0,1,2,3 evaluated at u.
    u0, u1, u2, u3 = u, u - 1.0, u - 2.0, u - 3.0
    w = np.stack(
        [
            u1 * u2 * u3 / -6.0,
            u0 * u2 * u3 / 2.0,
            u0 * u1 * u3 / -2.0,
            u0 * u1 * u2 / 6.0,
        ]
    )
    idx = base[None, :] + np.arange(4)[:, None]
    gathered = f[idx]  # (4, K, ...)
    w = w.reshape(w.shape + (1,) * (gathered.ndim - 2))
    return np.sum(w * gathered, axis=0)


@dataclass
class PolarizedCurve:
    """Sampled polarized curve (x, ds^2/m) in R^n.

    Attributes
    ----------
    n : ambient dimension (2 <= n <= 4 for the Clifford machinery).
    grid : uniform parameter grid.
    x : (N, n) position samples.
    xprime : (N, n) derivative samples.
    m : (N,) polarization denominator, nonvanishing, either sign.
    """

    n: int
    grid: Grid
    x: np.ndarray
    xprime: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.xprime = np.asarray(self.xprime, dtype=float)
        self.m = np.asarray(self.m, dtype=float)
        if self.x.shape != (self.grid.num, self.n):
            raise DimensionError(f"x has shape {self.x.shape}, expected {(self.grid.num, self.n)}")
        if self.xprime.shape != self.x.shape:
            raise DimensionError("xprime shape does not match x")
        if self.m.shape != (self.grid.num,):
            raise DimensionError("m must be sampled per node")
        speed = np.linalg.norm(self.xprime, axis=1)
        if np.min(speed) <= 1e-12 * max(np.max(speed), 1.0):
            raise GeometryError("curve is not immersed: x' vanishes somewhere")
        if np.any(self.m == 0.0) or np.min(np.abs(self.m)) <= 1e-300:
            raise PolarizationError("polarization denominator m vanishes")

    @property
    def speed2(self) -> np.ndarray:
        return np.sum(self.xprime * self.xprime, axis=1)

    def with_polarization(self, m: np.ndarray | float) -> "PolarizedCurve":
        m = np.broadcast_to(np.asarray(m, dtype=float), (self.grid.num,)).copy()
        return replace(self, m=m)

    def reversed_orientation(self) -> "PolarizedCurve":
        return replace(
            self, x=self.x[::-1].copy(), xprime=-self.xprime[::-1], m=self.m[::-1].copy()
        )


def from_samples(
    x: np.ndarray,
    grid: Grid,
    m: np.ndarray | float = 1.0,
    xprime: np.ndarray | None = None,
) -> PolarizedCurve:
    """Curve from position samples; derivatives by finite differences if absent."""
    x = np.asarray(x, dtype=float)
    if xprime is None:
        xprime = derivative_samples(x, grid)
    m = np.broadcast_to(np.asarray(m, dtype=float), (grid.num,)).copy()
    return PolarizedCurve(n=x.shape[1], grid=grid, x=x, xprime=np.asarray(xprime, float), m=m)


def make_circle(radius: float, grid: Grid, n: int = 2, m: np.ndarray | float = 1.0) -> PolarizedCurve:
    """Circle of given radius in the first two coordinates, angle parameter."""
    if radius <= 0:
        raise GeometryError("radius must be positive")
    if n < 2:
        raise DimensionError("circles need n >= 2")
    s = grid.nodes()
    x = np.zeros((grid.num, n))
    x[:, 0] = radius * np.cos(s)
    x[:, 1] = radius * np.sin(s)
    xp = np.zeros_like(x)
    xp[:, 0] = -radius * np.sin(s)
    xp[:, 1] = radius * np.cos(s)
    mm = np.broadcast_to(np.asarray(m, dtype=float), (grid.num,)).copy()
    return PolarizedCurve(n=n, grid=grid, x=x, xprime=xp, m=mm)


def make_helix(radius: float, pitch: float, grid: Grid, m: np.ndarray | float = 1.0) -> PolarizedCurve:
    """Helix (r cos s, r sin s, p s); zero pitch degenerates to the circle."""
    s = grid.nodes()
    x = np.stack([radius * np.cos(s), radius * np.sin(s), pitch * s], axis=1)
    xp = np.stack([-radius * np.sin(s), radius * np.cos(s), np.full_like(s, pitch)], axis=1)
    mm = np.broadcast_to(np.asarray(m, dtype=float), (grid.num,)).copy()
    return PolarizedCurve(n=3, grid=grid, x=x, xprime=xp, m=mm)


def make_line(
    grid: Grid,
    direction: np.ndarray | None = None,
    origin: np.ndarray | None = None,
    n: int = 2,
    m: np.ndarray | float = 1.0,
) -> PolarizedCurve:
    d = np.zeros(n) if direction is None else np.asarray(direction, dtype=float)
    if direction is None:
        d[0] = 1.0
    o = np.zeros(n) if origin is None else np.asarray(origin, dtype=float)
    s = grid.nodes()
    x = o[None, :] + s[:, None] * d[None, :]
    xp = np.broadcast_to(d, x.shape).copy()
    mm = np.broadcast_to(np.asarray(m, dtype=float), (grid.num,)).copy()
    return PolarizedCurve(n=n, grid=grid, x=x, xprime=xp, m=mm)


def make_curve(family: str, grid: Grid, **params) -> PolarizedCurve:
    """Dispatch constructor used by the command line interface."""
    if family == "circle":
        return make_circle(params.pop("radius", 1.0), grid, **params)
    if family == "helix":
        return make_helix(params.pop("radius", 1.0), params.pop("pitch", 0.0), grid, **params)
    if family == "line":
        return make_line(grid, **params)
    raise GeometryError(f"unknown curve family {family!r}")


def arc_length_polarization(curve: PolarizedCurve) -> PolarizedCurve:
    """Polarization with m = 1/(x', x'), i.e. ds^2/m = |dx|^2."""
    return curve.with_polarization(1.0 / curve.speed2)


def tractrix_pair(
    y: PolarizedCurve, mu: float, unit_speed_tol: float = 1e-8
) -> tuple[PolarizedCurve, PolarizedCurve]:
    """Darboux pair x± = y ± y'/(2 sqrt(mu)) from an arclength curve.

    The input must be unit speed; the output pair carries the common
    arc-length polarization m = 1/(x', x') and has constant tangent
    cross ratio mu/m, separation |x+ - x-| = 1/sqrt(mu).
    """
    if mu <= 0:
        raise GeometryError("tractrix construction needs mu > 0")
    speed = np.sqrt(y.speed2)
    if np.max(np.abs(speed - 1.0)) > unit_speed_tol:
        raise GeometryError("tractrix construction needs a unit-speed curve")
    ysecond = derivative_samples(y.xprime, y.grid)
    half = 1.0 / (2.0 * np.sqrt(mu))
    curves = []
    for sign in (+1.0, -1.0):
        x = y.x + sign * half * y.xprime
        xp = y.xprime + sign * half * ysecond
        m = 1.0 / np.sum(xp * xp, axis=1)
        curves.append(PolarizedCurve(n=y.n, grid=y.grid, x=x, xprime=xp, m=m))
    plus, minus = curves
    return minus, plus

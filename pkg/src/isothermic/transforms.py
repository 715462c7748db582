"""Christoffel duality and the Calapso transformation for curves.

The Christoffel dual of a polarized curve integrates

    (x*)' = (m x')^{-1} = x' / (m |x'|^2),

an involution up to translation that exchanges the roles of the two
curves in a Darboux pair: if x^ is a Darboux transform of x with
parameter mu, then

    x^* = x* + (x^ - x)^{-1} / mu

is simultaneously dual to x^ and a Darboux transform of x* (same mu).

The Calapso transformation trivializes the connection family: the
orthogonal frame field T^t solves T' = -T A(s, t), and <T^t xi> is a
new curve in the conformal sphere.  Composition, the intertwining with
the Darboux gauge, and permutability with Darboux transforms are all
verified as s-constancy of comparison maps (the statements hold up to a
global Moebius transformation).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import clifford as cl
from . import minkowski as mk
from .curves import Grid, PolarizedCurve, cubic_interp
from .darboux import (
    LightConeSection,
    connection_samples,
    euclidean_section,
    gauge_matrix,
    is_darboux_pair,
)
from .errors import DimensionError, GeometryError, PolarizationError


def christoffel_dual(
    curve: PolarizedCurve,
    anchor: np.ndarray | None = None,
    substeps: int = 1,
) -> PolarizedCurve:
    """Christoffel dual by RK4 integration of (x*)' = x'/(m |x'|^2).

    The dual is defined up to translation; ``anchor`` fixes x*(s0)
    (default: origin).  The polarization is inherited unchanged.
    """
    if np.any(curve.m == 0.0):
        raise PolarizationError("polarization vanishes; dual derivative undefined")
    if anchor is None:
        anchor = np.zeros(curve.n)
    anchor = np.asarray(anchor, dtype=float)
    if anchor.shape != (curve.n,):
        raise DimensionError(f"anchor must be a point of R^{curve.n}")

    h_eff = curve.grid.h / substeps
    num_steps = (curve.grid.num - 1) * substeps
    s_all = curve.grid.s0 + 0.5 * h_eff * np.arange(2 * num_steps + 1)
    stride = 2 * substeps
    xp_all = cubic_interp(curve.xprime, curve.grid, s_all)
    m_all = cubic_interp(curve.m, curve.grid, s_all)
    xp_all[::stride] = curve.xprime
    m_all[::stride] = curve.m
    if np.any(np.sign(m_all) != np.sign(m_all[0])):
        raise PolarizationError("polarization changes sign inside the interval")
    rhs_all = xp_all / (m_all * np.sum(xp_all * xp_all, axis=1))[:, None]

    out = np.empty((num_steps + 1, curve.n))
    out[0] = anchor
    y = anchor
    for k in range(num_steps):
        j = 2 * k
        # RHS is independent of the state; RK4 degenerates to Simpson.
        y = y + (h_eff / 6.0) * (rhs_all[j] + 4.0 * rhs_all[j + 1] + rhs_all[j + 2])
        out[k + 1] = y
    return PolarizedCurve(
        n=curve.n,
        grid=curve.grid,
        x=out[::substeps],
        xprime=rhs_all[::stride].copy(),
        m=curve.m.copy(),
    )


def dual_defect(curve: PolarizedCurve, dual: PolarizedCurve) -> float:
    """Pointwise defect of the duality relation (x*)' (m x') = 1."""
    n = curve.n
    prod = cl.geometric_product(
        cl.vector_coeffs(dual.xprime),
        cl.vector_coeffs(curve.m[:, None] * curve.xprime),
        n,
    )
    prod[:, 0] -= 1.0
    return float(np.max(np.abs(prod)))


def christoffel_darboux_permute(
    curve: PolarizedCurve,
    dual: PolarizedCurve,
    transform: PolarizedCurve,
    mu: float,
) -> PolarizedCurve:
    """Dual of a Darboux transform, with no integration.

    Given x, its dual x*, and a mu-Darboux transform x^, the curve
    x^* = x* + (x^ - x)^{-1}/mu is dual to x^ and a mu-Darboux
    transform of x*.  The derivative is exact: (x^*)' = (m x^')^{-1}.
    """
    if mu == 0.0:
        raise GeometryError("mu = 0 admits no Darboux-permuted dual")
    secant = transform.x - curve.x
    scale = max(float(np.max(np.abs(curve.x))), float(np.max(np.abs(transform.x))), 1.0)
    x_star_hat = dual.x + cl.vector_inverse(secant, ref_scale=scale) / mu
    xprime = transform.xprime / (
        curve.m * np.sum(transform.xprime**2, axis=1)
    )[:, None]
    return PolarizedCurve(
        n=curve.n, grid=curve.grid, x=x_star_hat, xprime=xprime, m=curve.m.copy()
    )


@dataclass
class CalapsoFrameField:
    """Sampled trivializing gauge T^t(s) of the connection family.

    ``T`` holds (num, n+2, n+2) matrices with T(s0) equal to the given
    initial frame; each T(s) preserves the Minkowski form up to the
    integrator drift reported by ``metric_drift``.
    """

    grid: Grid
    t: float
    T: np.ndarray

    @property
    def n(self) -> int:
        return self.T.shape[-1] - 2

    def metric_drift(self) -> float:
        return mk.orthogonality_residual(self.T)

    def inverse_at(self, k: int) -> np.ndarray:
        return np.linalg.inv(self.T[k])


def _metric_correct(t_mat: np.ndarray, g: np.ndarray) -> np.ndarray:
    """One re-orthogonalization step toward T^T G T = G.

    The iteration T(3 Id - G T^T G T)/2 is second order: a defect E
    maps to -(3/4) E^2 + O(E^3).
    """
    inner = g @ t_mat.T @ g @ t_mat
    return t_mat @ (1.5 * np.eye(t_mat.shape[0]) - 0.5 * inner)


def integrate_calapso(
    source: PolarizedCurve | LightConeSection,
    t: float,
    T0: np.ndarray | None = None,
    substeps: int = 1,
    correction_every: int | None = 50,
    m: np.ndarray | None = None,
) -> tuple[CalapsoFrameField, LightConeSection]:
    """Solve T' = -T A(s, t) and return (frame field, transformed curve).

    The transformed curve is the section s -> T(s) xi(s) with the exact
    derivative T (xi' - A xi).  ``correction_every`` applies the metric
    re-orthogonalization after every so many steps (None disables it).

    Accepts a raw light-cone section in place of a curve (with ``m``
    supplied); the coefficient A only sees the null line, so iterated
    transforms should stay in lift form instead of projecting through a
    chart that the intermediate curve may cross at infinity.
    """
    if isinstance(source, PolarizedCurve):
        sec = euclidean_section(source)
        grid, n = source.grid, source.n
    else:
        sec = source
        grid, n = source.grid, source.n
        if m is None:
            raise GeometryError("a polarization m is required alongside a bare section")
    a_all, h = connection_samples(source, m, t, substeps)
    d = n + 2
    if T0 is None:
        T0 = np.eye(d)
    T0 = np.asarray(T0, dtype=float)
    if T0.shape != (d, d):
        raise DimensionError(f"initial frame must be ({d}, {d})")
    g = mk.metric_matrix(n)
    num_steps = (len(a_all) - 1) // 2
    out = np.empty((num_steps + 1, d, d))
    out[0] = T0
    y = T0
    for k in range(num_steps):
        j = 2 * k
        k1 = -y @ a_all[j]
        k2 = -(y + 0.5 * h * k1) @ a_all[j + 1]
        k3 = -(y + 0.5 * h * k2) @ a_all[j + 1]
        k4 = -(y + h * k3) @ a_all[j + 2]
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if correction_every and (k + 1) % correction_every == 0:
            y = _metric_correct(y, g)
        out[k + 1] = y
    frames = CalapsoFrameField(grid=grid, t=t, T=out[::substeps].copy())
    node_idx = 2 * substeps * np.arange(grid.num)
    xi_new = np.einsum("kij,kj->ki", frames.T, sec.xi)
    xiprime = sec.derivative()
    covariant = xiprime - np.einsum("kij,kj->ki", a_all[node_idx], sec.xi)
    xiprime_new = np.einsum("kij,kj->ki", frames.T, covariant)
    section = LightConeSection(
        grid=grid, xi=xi_new, xiprime=xiprime_new, normalization="raw"
    )
    return frames, section


def calapso_curve(
    curve: PolarizedCurve, t: float, substeps: int = 1, correction_every: int | None = 50
) -> PolarizedCurve:
    """The Calapso-transformed curve projected back to R^n.

    The polarization is carried over unchanged (the transformation
    preserves the parameter s and the polarized structure).
    """
    _, section = integrate_calapso(
        curve, t, substeps=substeps, correction_every=correction_every
    )
    return section.to_curve(curve.m)


def transported_section_drift(
    frames: CalapsoFrameField, section: LightConeSection
) -> float:
    """Projective s-variation of T(s) applied to a section.

    For a mu-parallel section and frames at t = mu the image line is
    constant; the returned number is the worst projective gap from the
    initial line.
    """
    moved = np.einsum("kij,kj->ki", frames.T, section.xi)
    return mk.projective_gap(moved, np.broadcast_to(moved[0], moved.shape))


def _constancy_residual(mats: np.ndarray) -> float:
    base = mats[0]
    scale = max(float(np.max(np.linalg.norm(mats, axis=(-2, -1)))), 1e-300)
    return float(np.max(np.linalg.norm(mats - base, axis=(-2, -1))) / scale)


def verify_calapso_composition(
    curve: PolarizedCurve,
    tau: float,
    t: float,
    substeps: int = 1,
) -> float:
    """s-constancy residual of T~^t T^tau (T^(tau+t))^{-1}.

    T~^t is the Calapso field of the tau-transformed curve; the product
    differs from T^(tau+t) by a constant Moebius transformation, so the
    comparison map must be s-independent.  The second field is
    integrated on the raw transformed section, which stays smooth even
    when the intermediate curve sweeps through the chart's infinity.
    """
    frames_tau, section_tau = integrate_calapso(curve, tau, substeps=substeps)
    frames_t, _ = integrate_calapso(section_tau, t, substeps=substeps, m=curve.m)
    frames_sum, _ = integrate_calapso(curve, tau + t, substeps=substeps)
    prod = frames_t.T @ frames_tau.T @ np.linalg.inv(frames_sum.T)
    return _constancy_residual(prod)


def verify_calapso_intertwine(
    curve: PolarizedCurve,
    transform: PolarizedCurve,
    mu: float,
    t: float,
    substeps: int = 1,
) -> float:
    """s-constancy residual of T^^t Gamma(1 - t/mu) (T^t)^{-1}.

    T^^t belongs to the Darboux transform; conjugating by the pair's
    gauge map must reproduce T^t up to a constant map.
    """
    if t == mu:
        raise GeometryError("t = mu degenerates the pair gauge")
    frames, _ = integrate_calapso(curve, t, substeps=substeps)
    frames_hat, _ = integrate_calapso(transform, t, substeps=substeps)
    sec = euclidean_section(curve)
    sec_hat = euclidean_section(transform)
    gamma = gauge_matrix(
        sec.xi, sec_hat.xi, np.full(curve.grid.num, 1.0 - t / mu)
    )
    prod = frames_hat.T @ gamma @ np.linalg.inv(frames.T)
    return _constancy_residual(prod)


def calapso_darboux_permute(
    curve: PolarizedCurve,
    transform: PolarizedCurve,
    mu: float,
    tau: float,
    substeps: int = 1,
) -> tuple[PolarizedCurve, PolarizedCurve]:
    """Calapso transform of a Darboux pair, transported by one frame.

    Both curves are moved with the T^tau of the base curve, which keeps
    them suitably positioned: the results form a Darboux pair with
    parameter mu - tau (verify with ``is_darboux_pair``).
    """
    if tau == mu:
        raise GeometryError("tau = mu collapses the transformed pair to a point")
    if tau == 0.0:
        return curve, transform
    frames, section = integrate_calapso(curve, tau, substeps=substeps)
    new_base = section.to_curve(curve.m)
    sec_hat = euclidean_section(transform)
    moved = np.einsum("kij,kj->ki", frames.T, sec_hat.xi)
    # (T xihat)' = T (xihat' - A xihat) with A the base-curve coefficient.
    a_nodes = connection_samples(curve, None, tau, 1)[0][::2]
    covariant = sec_hat.xiprime - np.einsum("kij,kj->ki", a_nodes, sec_hat.xi)
    moved_prime = np.einsum("kij,kj->ki", frames.T, covariant)
    hat_section = LightConeSection(grid=curve.grid, xi=moved, xiprime=moved_prime)
    new_hat = hat_section.to_curve(transform.m)
    return new_base, new_hat

"""Semi-discrete isothermic surfaces over path domains.

A surface here is an ordered stack of polarized curves on one shared
grid with one shared polarization, consecutive layers forming Darboux
pairs with constant edge parameters mu.  The module certifies that
structure, produces Moutard lifts, materializes the family of flat
connections attached to the surface, and applies the surface-level
Darboux, Calapso, and Christoffel transforms layer by layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import minkowski as mk
from .curves import Grid, PolarizedCurve, derivative_samples
from .darboux import (
    LightConeSection,
    connection_samples,
    euclidean_section,
    gauge_matrix,
    integrate_parallel_section,
    is_darboux_pair,
    verify_gauge_relation,
)
from .errors import (
    DegenerateSecantError,
    DimensionError,
    GeometryError,
    PointAtInfinityError,
    PolarizationError,
    SignPropagationError,
    SingularEncounterError,
    VerificationError,
)
from .transforms import christoffel_dual, integrate_calapso

__all__ = [
    "SemiDiscreteSurface",
    "EdgeReport",
    "IsothermicReport",
    "MoutardLift",
    "SurfaceConnection",
    "build_surface",
    "check_isothermic",
    "moutard_lift",
    "surface_connection",
    "surface_darboux",
    "surface_calapso",
    "calapso_trivialization_residuals",
    "surface_christoffel",
]


@dataclass
class SemiDiscreteSurface:
    """Ordered curves x_0, ..., x_M with edge parameters mu_{i,i+1}.

    All curves share one grid and one polarization m; the mu list has
    one constant per adjacent pair.  Geometric isothermicity (each pair
    actually being Darboux) is certified by ``check_isothermic``, not
    enforced here, so deliberately broken data can still be built and
    diagnosed.
    """

    curves: list[PolarizedCurve]
    mu: list[float]
    _lifts: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.curves) == 0:
            raise DimensionError("a surface needs at least one curve")
        if len(self.mu) != len(self.curves) - 1:
            raise DimensionError(
                f"{len(self.curves)} curves need {len(self.curves) - 1} edge parameters, "
                f"got {len(self.mu)}"
            )
        base = self.curves[0]
        for k, c in enumerate(self.curves[1:], start=1):
            if c.n != base.n:
                raise DimensionError(f"curve {k} lives in R^{c.n}, curve 0 in R^{base.n}")
            if c.grid != base.grid:
                raise GeometryError(f"curve {k} is sampled on a different grid")
            scale = max(1.0, float(np.max(np.abs(base.m))))
            if np.max(np.abs(c.m - base.m)) > 1e-10 * scale:
                raise PolarizationError("curves must share one polarization m")
        self.mu = [float(v) for v in self.mu]
        for i, v in enumerate(self.mu):
            if not np.isfinite(v) or v == 0.0:
                raise GeometryError(f"edge parameter mu[{i}] must be finite and nonzero")

    @property
    def n(self) -> int:
        return self.curves[0].n

    @property
    def grid(self) -> Grid:
        return self.curves[0].grid

    @property
    def m(self) -> np.ndarray:
        return self.curves[0].m

    @property
    def num_layers(self) -> int:
        return len(self.curves)

    def lift(self, i: int) -> LightConeSection:
        """Euclidean light-cone lift of curve i, cached."""
        if i not in self._lifts:
            self._lifts[i] = euclidean_section(self.curves[i])
        return self._lifts[i]


def build_surface(
    seed: PolarizedCurve,
    layers: list[tuple[float, np.ndarray]],
    substeps: int = 1,
    check: bool = True,
    tol: float = 1e-6,
) -> SemiDiscreteSurface:
    """Stack Darboux transforms of ``seed`` into a surface.

    Each layer is given by (mu, initial point); the next curve is the
    parallel-section transform of the previous one.  With ``check`` the
    result is certified isothermic before being returned.
    """
    curves = [seed]
    mu: list[float] = []
    for k, (mu_k, point) in enumerate(layers):
        mu_k = float(mu_k)
        if mu_k == 0.0:
            raise GeometryError(f"layer {k}: mu must be nonzero")
        point = np.asarray(point, dtype=float)
        top = curves[-1]
        if point.shape == (seed.n,) and np.max(np.abs(point - top.x[0])) < 1e-12:
            raise DegenerateSecantError(f"layer {k}: initial point equals the curve start")
        try:
            section = integrate_parallel_section(top, mu_k, point, substeps=substeps)
            curves.append(section.to_curve(top.m))
        except SingularEncounterError as exc:
            raise SingularEncounterError(exc.s, f"layer {k}: {exc}") from exc
        except (PointAtInfinityError, GeometryError) as exc:
            raise type(exc)(f"layer {k}: {exc}") from exc
        mu.append(mu_k)
    surface = SemiDiscreteSurface(curves=curves, mu=mu)
    if check:
        report = check_isothermic(surface, tol=tol)
        if not report.ok:
            raise VerificationError(
                f"built surface fails the isothermicity check on edges {report.offending}"
            )
    return surface


@dataclass
class EdgeReport:
    """Certificate for one edge: recovered mu and its defects."""

    mu: float
    declared_mu: float
    spread: float
    reality: float
    mu_defect: float
    nu_residual: float | None
    ok: bool


@dataclass
class IsothermicReport:
    edges: list[EdgeReport]
    tol: float

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.edges)

    @property
    def recovered_mu(self) -> list[float]:
        return [e.mu for e in self.edges]

    @property
    def offending(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if not e.ok]


def check_isothermic(surface: SemiDiscreteSurface, tol: float = 1e-6) -> IsothermicReport:
    """Per-edge Darboux certificates for the whole stack.

    Each edge reports the reality and constancy residuals of the
    tangent cross ratio times m, the recovered mu against the declared
    one, and (where m (x', x') > 0 on both layers) the factorization
    check mu^2 = (nu_i nu_j / (dx, dx))^2 with nu = sqrt(m (x', x')).
    """
    m = surface.m
    edges = []
    for i, declared in enumerate(surface.mu):
        a, b = surface.curves[i], surface.curves[i + 1]
        fit = is_darboux_pair(a, b, tol=tol)
        denom = max(1.0, abs(fit.mu))
        mu_defect = abs(fit.mu - declared) / denom
        wa, wb = m * a.speed2, m * b.speed2
        nu_residual = None
        if np.min(wa) > 0.0 and np.min(wb) > 0.0:
            d = b.x - a.x
            dd = np.sum(d * d, axis=1)
            if np.min(dd) <= 0.0:
                raise DegenerateSecantError(f"edge {i}: coincident samples")
            phi = np.sqrt(wa * wb) / dd
            nu_residual = float(np.max(np.abs(phi - abs(fit.mu))) / denom)
        ok = (
            fit.spread <= tol
            and fit.reality <= tol
            and mu_defect <= tol
            and (nu_residual is None or nu_residual <= tol)
        )
        edges.append(
            EdgeReport(
                mu=fit.mu,
                declared_mu=declared,
                spread=fit.spread,
                reality=fit.reality,
                mu_defect=mu_defect,
                nu_residual=nu_residual,
                ok=ok,
            )
        )
    return IsothermicReport(edges=edges, tol=tol)


@dataclass
class MoutardLift:
    """Per-curve lifts xi = +-x / nu with nu = sqrt(m (x', x')).

    The scaling makes m (xi', xi') identically 1; the signs make
    mu_{ij} (xi_i, xi_j) negative on every edge.  The reported residual
    lists certify the normalization, the pairing identity
    (xi_i, xi_j) = -1/(2 mu_{ij}), and the vanishing of the mixed-area
    element of each edge.
    """

    sections: list[LightConeSection]
    signs: list[int]
    normalization_residual: list[float]
    pairing_residual: list[float]
    area_residual: list[float]


def _wedge_norm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Frobenius norm of a wedge b per sample row."""
    outer = np.einsum("ki,kj->kij", a, b)
    elem = outer - outer.transpose(0, 2, 1)
    return np.linalg.norm(elem, axis=(1, 2))


def moutard_lift(surface: SemiDiscreteSurface) -> MoutardLift:
    """Rescale the Euclidean lifts to the Moutard normalization."""
    m = surface.m
    grid = surface.grid
    sections: list[LightConeSection] = []
    scaled: list[tuple[np.ndarray, np.ndarray]] = []
    for k, curve in enumerate(surface.curves):
        w = m * curve.speed2
        if np.min(w) <= 0.0:
            raise PolarizationError(
                f"curve {k}: m (x', x') must be positive for the Moutard normalization"
            )
        nu = np.sqrt(w)
        nuprime = derivative_samples(nu, grid)
        base = surface.lift(k)
        xi = base.xi / nu[:, None]
        xiprime = base.xiprime / nu[:, None] - (nuprime / w)[:, None] * base.xi
        scaled.append((xi, xiprime))

    signs = [1]
    for mu_i in surface.mu:
        signs.append(signs[-1] * (1 if mu_i > 0 else -1))

    normalization = []
    for k, (xi, xiprime) in enumerate(scaled):
        s = float(signs[k])
        section = LightConeSection(
            grid=grid, xi=s * xi, xiprime=s * xiprime, normalization="moutard"
        )
        normalization.append(float(np.max(np.abs(m * mk.norm2(section.xiprime) - 1.0))))
        sections.append(section)

    pairing = []
    area = []
    for i, mu_i in enumerate(surface.mu):
        xi_a, xi_b = sections[i].xi, sections[i + 1].xi
        vals = mk.inner(xi_a, xi_b)
        if np.max(mu_i * vals) >= 0.0:
            raise SignPropagationError(
                f"edge {i}: the sign condition mu (xi_i, xi_j) < 0 fails along s; "
                "the data does not admit a Moutard lift"
            )
        pairing.append(float(np.max(np.abs(vals + 1.0 / (2.0 * mu_i)))))
        mean_prime = 0.5 * (sections[i].xiprime + sections[i + 1].xiprime)
        area.append(float(np.max(_wedge_norm(mean_prime, xi_b - xi_a))))
    return MoutardLift(
        sections=sections,
        signs=signs,
        normalization_residual=normalization,
        pairing_residual=pairing,
        area_residual=area,
    )


@dataclass
class SurfaceConnection:
    """Materialized connection family at one parameter t.

    ``edge_maps[i]`` holds the per-sample gauge map of edge (i, i+1)
    carrying sections over curve i+1 to sections over curve i;
    ``coefficients[k]`` holds the per-sample derivative coefficient
    along curve k.  ``flatness[i]`` is the gauge-relation residual of
    edge i, the certificate that edge maps intertwine the curve
    coefficients.
    """

    t: float
    edge_maps: list[np.ndarray]
    coefficients: list[np.ndarray]
    flatness: list[float]


def _check_spectral_parameter(surface: SemiDiscreteSurface, t: float) -> None:
    for i, mu_i in enumerate(surface.mu):
        if t == mu_i:
            raise GeometryError(
                f"parameter t = {t} equals the parameter of edge {i}; the edge gauge degenerates"
            )


def surface_connection(surface: SemiDiscreteSurface, t: float) -> SurfaceConnection:
    """Edge gauge maps and curve coefficients at parameter t, certified flat."""
    _check_spectral_parameter(surface, t)
    coefficients = [
        connection_samples(c, None, t, 1)[0][::2] for c in surface.curves
    ]
    edge_maps = []
    flatness = []
    for i, mu_i in enumerate(surface.mu):
        r = 1.0 - t / mu_i
        edge_maps.append(gauge_matrix(surface.lift(i + 1).xi, surface.lift(i).xi, r))
        flatness.append(
            verify_gauge_relation(surface.curves[i], surface.curves[i + 1], t, mu_i)
        )
    return SurfaceConnection(
        t=t, edge_maps=edge_maps, coefficients=coefficients, flatness=flatness
    )


def surface_darboux(
    surface: SemiDiscreteSurface,
    mu: float,
    point: np.ndarray,
    substeps: int = 1,
) -> SemiDiscreteSurface:
    """Darboux transform of the whole surface with vertical parameter mu.

    The section over curve 0 is integrated from ``point``; across each
    edge it is carried by the inverse edge gauge map, which lands on
    the fourth point of the corresponding Bianchi quad.  The result
    keeps the original edge parameters; each vertical pair
    (x_i, xhat_i) is Darboux with parameter mu.
    """
    mu = float(mu)
    _check_spectral_parameter(surface, mu)
    section = integrate_parallel_section(surface.curves[0], mu, point, substeps=substeps)
    sections = [section]
    for i, mu_i in enumerate(surface.mu):
        r = 1.0 - mu / mu_i
        carry = gauge_matrix(surface.lift(i + 1).xi, surface.lift(i).xi, 1.0 / r)
        xi_next = np.einsum("kab,kb->ka", carry, sections[i].xi)
        sections.append(
            LightConeSection(grid=surface.grid, xi=xi_next, normalization="parallel")
        )
    curves = [sec.to_curve(surface.m) for sec in sections]
    return SemiDiscreteSurface(curves=curves, mu=list(surface.mu))


def _chain_frames(
    surface: SemiDiscreteSurface,
    t: float,
    substeps: int,
    correction_every: int,
) -> list[np.ndarray]:
    """Trivializing frames per layer: T_0 integrated, then pushed by edge maps."""
    frames, _ = integrate_calapso(
        surface.curves[0], t, substeps=substeps, correction_every=correction_every
    )
    chain = [frames.T]
    for i, mu_i in enumerate(surface.mu):
        r = 1.0 - t / mu_i
        gmap = gauge_matrix(surface.lift(i + 1).xi, surface.lift(i).xi, r)
        chain.append(np.einsum("kab,kbc->kac", chain[i], gmap))
    return chain


def surface_calapso(
    surface: SemiDiscreteSurface,
    t: float,
    substeps: int = 1,
    correction_every: int = 50,
) -> SemiDiscreteSurface:
    """Calapso transform of the surface: every edge parameter drops by t."""
    if t == 0.0:
        return SemiDiscreteSurface(curves=list(surface.curves), mu=list(surface.mu))
    _check_spectral_parameter(surface, t)
    chain = _chain_frames(surface, t, substeps, correction_every)
    curves = []
    for k, curve in enumerate(surface.curves):
        lift = surface.lift(k)
        a_nodes = connection_samples(curve, None, t, 1)[0][::2]
        covariant = lift.xiprime - np.einsum("kab,kb->ka", a_nodes, lift.xi)
        xi = np.einsum("kab,kb->ka", chain[k], lift.xi)
        xiprime = np.einsum("kab,kb->ka", chain[k], covariant)
        section = LightConeSection(grid=surface.grid, xi=xi, xiprime=xiprime)
        curves.append(section.to_curve(surface.m))
    return SemiDiscreteSurface(curves=curves, mu=[v - t for v in surface.mu])


def calapso_trivialization_residuals(
    surface: SemiDiscreteSurface,
    t: float,
    substeps: int = 1,
    correction_every: int = 50,
) -> list[float]:
    """Construction-independent re-check of the frame chaining.

    For each layer j > 0 the chained frame T_0 Gamma_{01} ... must agree
    with a frame integrated directly along curve j up to a constant
    map, so M(s) = chained(s) inverse(direct(s)) is tested for
    s-constancy.
    """
    if t == 0.0:
        return [0.0] * (surface.num_layers - 1)
    _check_spectral_parameter(surface, t)
    chain = _chain_frames(surface, t, substeps, correction_every)
    residuals = []
    for j in range(1, surface.num_layers):
        direct, _ = integrate_calapso(
            surface.curves[j], t, substeps=substeps, correction_every=correction_every
        )
        m_stack = np.einsum("kab,kbc->kac", chain[j], np.linalg.inv(direct.T))
        scale = max(float(np.linalg.norm(m_stack[0])), 1e-300)
        residuals.append(float(np.max(np.linalg.norm(m_stack - m_stack[0], axis=(1, 2)))) / scale)
    return residuals


def surface_christoffel(
    surface: SemiDiscreteSurface,
    substeps: int = 1,
) -> tuple[SemiDiscreteSurface, list[float]]:
    """Christoffel dual surface and its edge/smooth consistency residuals.

    Curve 0 is dualized by integration; every next layer is positioned
    pointwise by inverting the edge secant, d z = d x / (mu (dx, dx)).
    Dual derivatives come from the smooth equation, so integrating them
    from the same start must reproduce the edge positions; the maximum
    gap per edge is returned alongside the dual surface.
    """
    m = surface.m
    duals = [christoffel_dual(surface.curves[0], substeps=substeps)]
    consistency = []
    for i, mu_i in enumerate(surface.mu):
        a, b = surface.curves[i], surface.curves[i + 1]
        d = b.x - a.x
        dd = np.sum(d * d, axis=1)
        scale = float(np.max(dd))
        if np.min(dd) <= 1e-24 * max(scale, 1.0):
            raise DegenerateSecantError(f"edge {i}: secant vanishes; dual edge rule undefined")
        z = duals[i].x + d / (mu_i * dd)[:, None]
        zprime = b.xprime / (m * b.speed2)[:, None]
        duals.append(
            PolarizedCurve(n=surface.n, grid=surface.grid, x=z, xprime=zprime, m=m.copy())
        )
        smooth = christoffel_dual(b, anchor=z[0], substeps=substeps)
        consistency.append(float(np.max(np.linalg.norm(smooth.x - z, axis=1))))
    return SemiDiscreteSurface(curves=duals, mu=list(surface.mu)), consistency

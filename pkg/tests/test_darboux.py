"""Darboux transform tests.

Core claims:
    - the Riccati route and the parallel-section route produce the same
      transform, with fourth-order agreement in the step size
    - closed-form pairs (concentric circles, tractrix companion) are
      certified by a constant real tangent cross ratio
    - is_darboux_pair recovers mu, is_ribaucour certifies tangent circle
      contact, and the gauge relation ties the two flat connections
    - parallel sections stay on the light cone and detect degenerate data
"""

import numpy as np
import pytest

import isothermic.minkowski as mk
from isothermic.clifford import nonscalar_norm, scalar_part
from isothermic.curves import Grid, make_circle
from isothermic.darboux import (
    connection_matrix,
    connection_samples,
    euclidean_section,
    gauge_matrix,
    integrate_parallel_section,
    integrate_riccati,
    is_darboux_pair,
    is_ribaucour,
    parallel_residual,
    tangent_cross_ratio,
    verify_gauge_relation,
)
from isothermic.errors import DimensionError, GeometryError
from isothermic.fixtures import concentric_pair, tractrix_circle_pair, unit_circle


def _route_agreement(num: int) -> float:
    grid = Grid(0.0, 1.0, num)
    c = make_circle(1.0, grid)
    p0 = np.array([2.0, 0.0])
    riccati = integrate_riccati(c, -2.0, p0)
    section = integrate_parallel_section(c, -2.0, mk.euclidean_lift(p0))
    projected = section.to_curve(c.m)
    return float(np.max(np.linalg.norm(riccati.x - projected.x, axis=1)))


def test_riccati_matches_parallel_section():
    assert _route_agreement(1001) < 1e-10


def test_route_agreement_fourth_order():
    ratio = _route_agreement(101) / _route_agreement(201)
    assert 12.0 < ratio < 20.0


def test_concentric_circles_cross_ratio():
    a, b = concentric_pair()
    cr = tangent_cross_ratio(a, b)
    assert np.max(np.abs(scalar_part(cr) + 2.0)) < 1e-13
    assert np.max(nonscalar_norm(cr)) < 1e-13


def test_tractrix_pair_cross_ratio():
    y, yhat = tractrix_circle_pair()
    cr = tangent_cross_ratio(y, yhat)
    assert np.max(np.abs(scalar_part(cr) - 0.5)) < 1e-10
    assert np.max(nonscalar_norm(cr)) < 1e-10


def test_is_darboux_pair_recovers_mu():
    c = unit_circle()
    hat = integrate_riccati(c, -2.0, np.array([2.0, 0.0]))
    fit = is_darboux_pair(c, hat)
    assert abs(fit.mu + 2.0) < 1e-12
    assert fit.spread < 1e-12
    assert fit.reality < 1e-12


def test_is_ribaucour():
    c = unit_circle()
    hat = integrate_riccati(c, -2.0, np.array([2.0, 0.0]))
    ok, contact = is_ribaucour(c, hat)
    assert ok
    assert contact < 1e-12
    # a shifted copy shares tangent directions at equal parameters but the
    # contact circle degenerates only when the curves actually touch
    other = integrate_riccati(c, 1.0, np.array([0.3, -0.4]))
    fit = is_darboux_pair(c, other)
    assert abs(fit.mu - 1.0) < 1e-12


def test_parallel_section_stays_null():
    c = unit_circle()
    sec = integrate_parallel_section(c, -2.0, np.array([2.0, 0.0]))
    assert np.max(np.abs(mk.norm2(sec.xi))) < 1e-10
    assert parallel_residual(sec, c, -2.0) < 1e-10


def test_parallel_residual_flags_wrong_parameter():
    c = unit_circle()
    sec = integrate_parallel_section(c, -2.0, np.array([2.0, 0.0]))
    assert parallel_residual(sec, c, 1.3) > 1e-3


def test_gauge_relation():
    c = unit_circle()
    hat = integrate_riccati(c, -2.0, np.array([2.0, 0.0]))
    assert verify_gauge_relation(c, hat, 0.7, -2.0) < 1e-9


def test_gauge_matrix_swaps_lines():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(2)
    y = rng.standard_normal(2) + 3.0
    xi = mk.euclidean_lift(x)
    eta = mk.euclidean_lift(y)
    g = gauge_matrix(xi, eta, 0.25)
    assert mk.projective_gap(g @ xi, xi) < 1e-12
    assert mk.projective_gap(g @ eta, eta) < 1e-12
    # scaling parts: xi by 1/r, eta by r
    assert np.max(np.abs(g @ xi - xi / 0.25)) < 1e-12
    assert np.max(np.abs(g @ eta - 0.25 * eta)) < 1e-12


def test_connection_matrix_is_metric_skew():
    c = unit_circle()
    sec = euclidean_section(c)
    A = connection_matrix(sec.xi, sec.xiprime, c.m, -2.0)
    assert A.shape == (c.grid.num, c.n + 2, c.n + 2)
    # infinitesimal isometry: A^T G + G A = 0
    G = mk.metric_matrix(c.n)
    sym = np.einsum("kji,jl->kil", A, G) + np.einsum("ij,kjl->kil", G, A)
    assert np.max(np.abs(sym)) < 1e-11


def test_connection_substeps_shape():
    c = unit_circle()
    a_all, h = connection_samples(c, None, -2.0, 2)
    assert len(a_all) == 4 * (c.grid.num - 1) + 1
    assert abs(h - c.grid.h / 2.0) < 1e-15


def test_initial_point_validation():
    c = unit_circle()
    with pytest.raises((DimensionError, GeometryError)):
        integrate_parallel_section(c, -2.0, np.zeros(5))


def test_to_curve_requires_matching_polarization():
    c = unit_circle()
    sec = integrate_parallel_section(c, -2.0, np.array([2.0, 0.0]))
    hat = sec.to_curve(c.m)
    fit = is_darboux_pair(c, hat)
    assert abs(fit.mu + 2.0) < 1e-10

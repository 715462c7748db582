"""Calapso and Christoffel transform tests.

Core claims:
    - the Calapso frame solves dT = -T A with O(h^4) metric drift, kept
      small by periodic re-orthonormalization
    - T^mu transports the Darboux section of parameter mu to a constant line
    - composition T^(s+t) = gauge-equivalent T^s then T^t, and the
      intertwining with Darboux transforms, hold up to constant gauges
    - Calapso shifts the Darboux parameter: the transformed pair has mu - tau
    - the Christoffel dual is an involution up to translation and closes a
      permutability square with any Darboux transform
"""

import numpy as np
import pytest

import isothermic.minkowski as mk
from isothermic.curves import Grid, make_circle
from isothermic.darboux import integrate_parallel_section, integrate_riccati, is_darboux_pair
from isothermic.errors import GeometryError
from isothermic.fixtures import unit_circle
from isothermic.transforms import (
    calapso_curve,
    calapso_darboux_permute,
    christoffel_darboux_permute,
    christoffel_dual,
    dual_defect,
    integrate_calapso,
    transported_section_drift,
    verify_calapso_composition,
    verify_calapso_intertwine,
)


def test_metric_drift_small():
    c = unit_circle()
    frames, _ = integrate_calapso(c, 0.7, correction_every=50)
    G = mk.metric_matrix(c.n)
    gram = np.einsum("kia,ij,kjb->kab", frames.T, G, frames.T)
    assert np.max(np.abs(gram - G)) < 1e-10


def test_metric_drift_correction_matters_on_long_runs():
    c = unit_circle()
    frames_off, _ = integrate_calapso(c, 0.7, correction_every=None)
    frames_on, _ = integrate_calapso(c, 0.7, correction_every=10)
    G = mk.metric_matrix(c.n)

    def drift(T):
        gram = np.einsum("kia,ij,kjb->kab", T, G, T)
        return float(np.max(np.abs(gram - G)))

    assert drift(frames_on.T) <= drift(frames_off.T) + 1e-12


def test_transported_darboux_section_is_constant():
    c = unit_circle()
    section = integrate_parallel_section(c, -2.0, mk.euclidean_lift(np.array([2.0, 0.0])))
    frames, _ = integrate_calapso(c, -2.0)
    assert transported_section_drift(frames, section) < 1e-10


def test_transported_drift_flags_wrong_parameter():
    c = unit_circle()
    section = integrate_parallel_section(c, -2.0, mk.euclidean_lift(np.array([2.0, 0.0])))
    frames, _ = integrate_calapso(c, 0.9)
    assert transported_section_drift(frames, section) > 1e-4


def test_calapso_composition():
    c = unit_circle()
    assert verify_calapso_composition(c, 0.4, 0.3) < 1e-10


def test_calapso_intertwine():
    c = unit_circle()
    hat = integrate_riccati(c, -2.0, np.array([2.0, 0.0]))
    assert verify_calapso_intertwine(c, hat, -2.0, 0.5) < 1e-10


def test_calapso_parameter_shift():
    c = unit_circle()
    hat = integrate_riccati(c, -2.0, np.array([2.0, 0.0]))
    new_base, new_hat = calapso_darboux_permute(c, hat, -2.0, 0.7)
    fit = is_darboux_pair(new_base, new_hat)
    assert abs(fit.mu - (-2.7)) < 1e-10
    assert fit.spread < 1e-10


def test_calapso_at_zero_is_identity():
    c = unit_circle()
    moved = calapso_curve(c, 0.0)
    assert np.max(np.abs(moved.x - c.x)) < 1e-12


def test_calapso_preserves_polarization():
    c = unit_circle()
    moved = calapso_curve(c, 0.6)
    assert np.max(np.abs(moved.m - c.m)) < 1e-12
    assert moved.grid == c.grid


def test_christoffel_dual_defect():
    c = unit_circle()
    dual = christoffel_dual(c)
    assert dual_defect(c, dual) < 1e-12


def test_christoffel_dual_is_involution():
    c = unit_circle()
    again = christoffel_dual(christoffel_dual(c))
    assert np.max(np.abs(again.xprime - c.xprime)) < 1e-12
    # up to translation only
    offsets = again.x - c.x
    assert np.max(np.abs(offsets - offsets[0])) < 1e-10


def test_christoffel_dual_of_unit_circle_is_unit_circle():
    # x' / (m |x'|^2) = x' for the unit circle with m = 1
    c = unit_circle()
    dual = christoffel_dual(c, anchor=c.x[0])
    assert np.max(np.abs(dual.x - c.x)) < 1e-10


def test_christoffel_darboux_square():
    c = unit_circle()
    hat = integrate_riccati(c, -2.0, np.array([2.0, 0.0]))
    dual = christoffel_dual(c)
    hatstar = christoffel_darboux_permute(c, dual, hat, -2.0)
    assert dual_defect(hat, hatstar) < 1e-12
    fit = is_darboux_pair(dual, hatstar)
    assert abs(fit.mu + 2.0) < 1e-12
    assert fit.spread < 1e-12


def test_calapso_larger_arc_still_converges():
    # quarter-turn arc at moderate resolution keeps certificates tight
    grid = Grid(0.0, float(np.pi / 2.0), 629)
    c = make_circle(1.0, grid)
    assert verify_calapso_composition(c, 0.4, 0.3) < 1e-8


def test_dual_rejects_sign_changing_polarization():
    grid = Grid(0.0, 1.0, 101)
    c = make_circle(1.0, grid)
    m = np.ones(grid.num)
    m[50:] = -1.0
    with pytest.raises(GeometryError):
        christoffel_dual(c.with_polarization(m))

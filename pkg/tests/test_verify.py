import math

import numpy as np
import pytest

from exactflow import axisym as ax, threed as td
from exactflow.core import FlowState, GasLaw, StencilError
from exactflow.verify import (
    ResidualReport,
    convergence_order,
    euler_residual_3d,
    euler_residual_axisym,
    invariants_along_curve,
    perturb_pressure,
)
from exactflow import chaplygin as ch

PZ = ax.AxisymParams(m=0.5, gamma=1.4, c1=1.0, c2=-0.7)
G14 = td.ThreeDParams(m=0.5, n=0.3, gamma=1.4, c1=1.0, c2=-1.0, b=0.5, x_sign=1)


def uniform(*_):
    return FlowState(0.3, -0.2, 1.1, 1.7, 2.0)


def test_uniform_flow_3d():
    r = euler_residual_3d(uniform, (0.1, 0.2, 0.3), 1e-3, 1.4)
    assert isinstance(r, ResidualReport)
    assert r.max == 0.0
    assert r.names == ("continuity", "momentum_x", "momentum_y", "momentum_z", "energy")


def test_uniform_flow_axisym():
    f = lambda z, r: FlowState(0.7, 0.0, 0.0, 1.2, 3.0)
    assert euler_residual_axisym(f, (0.4, 1.0), 1e-3, 1.4).max == 0.0


def test_axisym_continuity_hand_case():
    f = lambda z, r: FlowState(0.0, r, 0.0, 1.0, 1.0)
    r = euler_residual_axisym(f, (0.0, 0.8), 1e-3, 1.4)
    assert r.residuals[0] == pytest.approx(2.0, abs=1e-12)


def test_axisym_needs_offset_from_axis():
    f = lambda z, r: FlowState(0.0, r, 0.0, 1.0, 1.0)
    with pytest.raises(StencilError):
        euler_residual_axisym(f, (0.0, 5e-4), 1e-3, 1.4)


def test_closed_form_axisym_second_order():
    f = ax.closed_form_field(PZ)
    res = convergence_order(lambda p, h: euler_residual_axisym(f, p, h, 1.4), (1.0, 1.0))
    assert 1.8 <= res.order <= 2.2


def test_closed_form_3d_second_order():
    f = td.closed_form_field(G14)
    res = convergence_order(lambda p, h: euler_residual_3d(f, p, h, 1.4), (1.0, 1.2, 0.5))
    assert 1.8 <= res.order <= 2.2
    assert euler_residual_3d(f, (1.0, 1.2, 0.5), 1e-3, 1.4).max_normalized <= 1e-5


def test_perturbed_pressure_limit():
    f = td.closed_form_field(G14)
    g = perturb_pressure(f, 0.1)
    pt = (1.0, 1.2, 0.5)
    r = euler_residual_3d(g, pt, 1e-4, 1.4)
    # x-momentum picks up d/dx(0.1 x p) = 0.1 p
    assert r.residuals[1] == pytest.approx(0.1 * f(*pt).p, rel=1e-4)
    res = convergence_order(lambda p, h: euler_residual_3d(g, p, h, 1.4), pt)
    assert abs(res.order) < 0.2


def test_chaplygin_energy_term():
    # a sonic Chaplygin state is uniform here, so all residuals vanish with that law too
    law = GasLaw.chaplygin(1.0)
    assert euler_residual_3d(uniform, (0, 0, 0), 1e-3, law=law).max == 0.0


def test_saturation_flag():
    s = ch.PotentialSampler(lambda x, y, z: x + 2 * y, mp_safe=True)
    res = convergence_order(lambda p, h: ch.potential_residual(s, p, h), (0.1, 0.2, 0.3))
    assert res.saturated and res.order is None
    assert res.within()
    assert not res.within(allow_saturated=False)


def test_convergence_order_validation():
    with pytest.raises(Exception):
        convergence_order(lambda p, h: h, (0,), (1e-2, 1e-3))
    with pytest.raises(Exception):
        convergence_order(lambda p, h: h, (0,), (1e-2, 1e-3, 5e-4))
    assert convergence_order(lambda p, h: 3 * h ** 2, (0,)).order == pytest.approx(2.0)


def test_orientation_invariance():
    f = td.closed_form_field(G14)
    pt = (1.0, 1.2, 0.5)

    def swapped(y, x, z):
        s = f(x, y, z)
        return FlowState(s.v, s.u, s.w, s.rho, s.p)

    a = euler_residual_3d(f, pt, 1e-3, 1.4)
    b = euler_residual_3d(swapped, (1.2, 1.0, 0.5), 1e-3, 1.4)
    assert a.magnitudes[0] == pytest.approx(b.magnitudes[0], rel=1e-12)
    assert a.magnitudes[1] == pytest.approx(b.magnitudes[2], rel=1e-12)
    assert a.magnitudes[4] == pytest.approx(b.magnitudes[4], rel=1e-12)


def test_continuity_additive_in_density():
    vel = lambda x, y, z: (x * y, z - x, y * y)
    rho_a = lambda x, y, z: 1 + x * x
    rho_b = lambda x, y, z: 2 + math.sin(y * z)

    def field(rho):
        return lambda x, y, z: FlowState(*vel(x, y, z), rho(x, y, z), 1.0)

    pt = (0.3, 0.4, 0.5)
    ra = euler_residual_3d(field(rho_a), pt, 1e-3, 1.4).residuals[0]
    rb = euler_residual_3d(field(rho_b), pt, 1e-3, 1.4).residuals[0]
    rab = euler_residual_3d(field(lambda *p: rho_a(*p) + rho_b(*p)), pt, 1e-3, 1.4).residuals[0]
    assert rab == pytest.approx(ra + rb, rel=1e-12)


def test_invariants_constant_state():
    curve = np.random.default_rng(1).uniform(0, 1, (10, 3))
    assert invariants_along_curve(uniform, curve, 1.4) == (0.0, 0.0)


def test_invariants_along_ray_drift():
    f = ax.closed_form_field(PZ)
    ray = np.array([(1.0, 1.0 + 0.1 * k) for k in range(11)])
    d1, d2 = invariants_along_curve(f, ray, 1.4)
    assert max(d1, d2) > 1e-3


def test_report_dict():
    r = euler_residual_3d(uniform, (0.1, 0.2, 0.3), 1e-3, 1.4)
    d = r.as_dict()
    assert set(d["residuals"]) == set(r.names)
    assert d["h"] == 1e-3

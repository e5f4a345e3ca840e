"""Self-similar axisymmetric flows: closed forms against numerical integration.

Run: python3 demos/axisymmetric_jets.py
"""

import numpy as np

from exactflow import axisym as ax
from exactflow.odeint import integrate
from exactflow.streamtrace import trace
from exactflow.verify import convergence_order, euler_residual_axisym, invariants_along_curve

params = ax.AxisymParams(m=0.5, gamma=1.4, c1=1.0, c2=-0.7)
print("p depends on z only; reduced profile in r")
for r in (0.5, 1.0, 2.0):
    s = ax.closed_form_pz(params, r)
    print(f"  r={r}: U={s.U:.6f} V={s.V:.6f} Q={s.Q:.6f} P={s.P:.6f}  integrals={ax.first_integrals_pz(params, s, r)}")

field = ax.closed_form_field(params)
res = convergence_order(lambda p, h: euler_residual_axisym(field, p, h, params.gamma), (1.0, 1.0))
print(f"Euler residual order of the physical field: {res.order:.3f}")

# perturb the closed-form data so that c3 != 0, then integrate
y0 = ax.closed_form_pz(params, 1.0).as_array() * [1, 1.05, 1, 1]
tr = integrate(ax.reduced_rhs(params), y0, (1.0, 2.0), step=1e-3)
c = np.array([ax.first_integrals_pz(params, y, t) for t, y in zip(tr.t, tr.y)])
print(f"c3 = {c[0, 2]:.6f}; integral drift over [1, 2]: {np.max(np.abs(c - c[0])):.2e}")

curve = trace(field, (1.0, 1.0), (0, 1), step=1e-3)
k = [ax.streamline_constant(params, z, r) for z, r in curve.points]
print(f"streamline constant spread: {np.ptp(k):.2e}; invariant drift: {max(invariants_along_curve(field, curve.points, 1.4)):.2e}")

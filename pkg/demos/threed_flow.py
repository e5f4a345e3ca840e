"""A three-dimensional self-similar flow and its streamlines.

Run: python3 demos/threed_flow.py
"""

import numpy as np

from exactflow import threed as td
from exactflow.odeint import integrate
from exactflow.streamtrace import align_by_coordinate, trace
from exactflow.verify import convergence_order, euler_residual_3d

params = td.ThreeDParams(m=0.5, n=0.3, gamma=1.4, c1=1.0, c2=-1.0, b=0.5, x_sign=1)
print(f"X-equation rate A = {params.A:.6f}")
for z in (0.3, 0.6, 0.9):
    s = td.reconstruct_3d(params, z)
    print(f"  z={z}: U={s.U:.5f} V={s.V:.5f} W={s.W:.5f} Q={s.Q:.5f} P={s.P:.5f}")

field = td.closed_form_field(params)
res = convergence_order(lambda p, h: euler_residual_3d(field, p, h, params.gamma), (1.0, 1.2, 0.5))
print(f"Euler residual order: {res.order:.3f}")

y0 = td.reconstruct_3d(params, 0.5).as_array()
for literal in (False, True):
    tr = integrate(td.reduced_rhs(params, literal_e5=literal), y0, (0.5, 1.5), step=1e-3)
    c2 = [td.first_integrals_3d(params, y)[1] for y in tr.y]
    label = "P-free energy equation" if literal else "energy equation"
    print(f"{label}: pressure integral drift {np.ptp(c2):.2e}")

seed = np.array([1.0, 1.2, 0.5])
curve = trace(field, seed, (0, 1), step=1e-3)
ref = lambda x: td.streamlines_3d_parametric(1.4, *seed[:2], seed[2] + params.b, [np.log(x)], b=params.b)[0]
print(f"traced streamline vs parametric family: {align_by_coordinate(curve.points, ref):.2e}")

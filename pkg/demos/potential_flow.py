"""Sonic potential flow of a Chaplygin gas from an implicit family of planes.

Run: python3 demos/potential_flow.py
"""

from exactflow import chaplygin as ch
from exactflow.core import GasLaw, sound_speed_squared
from exactflow.verify import convergence_order

# a(phi) x + b(phi) y + c(phi) z + d(phi) = 0
family = ch.polynomial_family([1, 0.3], [0.5, 0.1], [0.2, -0.4, 0.1], [0.3, 1])
sampler = ch.implicit_sampler(family, bracket=(-5, 5))
law = GasLaw.chaplygin(1.0, b=0.5)
field = ch.chaplygin_field(sampler, law)

pt = (0.3, 0.2, 0.1)
state = field(*pt)
print(f"phi{pt} = {sampler(*pt):.12f}")
print(f"state: u={state.velocity}, rho={state.rho:.6f}, p={state.p:.6f}")
print(f"|u|^2 - c^2 = {state.speed_squared - sound_speed_squared(law, state):.2e}")

for h in (1e-2, 1e-3, 1e-4):
    print(f"h={h:g}: normalized potential residual {ch.potential_residual(sampler, pt, h, normalized=True):.3e}")
order = convergence_order(lambda p, h: ch.potential_residual(sampler, p, h, normalized=True), pt)
print(f"observed order {order.order:.3f}")

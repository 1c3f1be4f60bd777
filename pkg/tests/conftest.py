"""Shared builders for the test suite."""

import math

import numpy as np

from impulse_gcac.schedule import ImpulseSchedule
from impulse_gcac.spectral import Controller, CoupledSystem, SpectralDomain


def make_system(coupling, gains, supports=None, length=math.pi, modes=32):
    """System with the given coupling and gain matrices.

    supports defaults to the full interval for every controller.
    """
    coupling = np.asarray(coupling, dtype=float)
    domain = SpectralDomain(length=length, modes=modes)
    if supports is None:
        supports = [(0.0, length)] * len(gains)
    controllers = [
        Controller(gain=np.asarray(g, dtype=float), support=tuple(s))
        for g, s in zip(gains, supports)
    ]
    return CoupledSystem(coupling=coupling, controllers=controllers, domain=domain)


def two_component_invariant_system(modes=32, support=None):
    """n=2 system whose first component is untouched by the single actuator.

    Coupling equals the first diffusion eigenvalue times the identity, and
    the actuator feeds only the second component, so the first component of
    mode 1 is exactly conserved by both the flow and every impulse.
    """
    length = math.pi
    lam1 = (math.pi / length) ** 2
    supports = [support if support is not None else (0.0, length / 2.0)]
    return make_system(
        lam1 * np.eye(2),
        [np.array([[0.0], [1.0]])],
        supports=supports,
        length=length,
        modes=modes,
    )


def unit_schedule():
    """Impulses at 1, 2, 3, ...: one actuator per period of length 1."""
    return ImpulseSchedule(base_times=(1.0,))

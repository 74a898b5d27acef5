"""Simulation suite for interacting ellipsoidal particles suspended in a flow.

The package covers three levels of description of the same system:

* microscopic Langevin dynamics of N soft-repelling ellipses (``particles``),
* hydrodynamic moment-closure PDEs on position-angle and position lattices
  (``qmodel``, ``rhomodel``), solved with a first-order finite-volume scheme
  (``fv``),
* the overdamped drift limit of the position-level system (``rhomodel``).

``stats`` provides the empirical-measure post-processing used to compare the
levels, ``stationary`` the fixed-point equilibrium solver and decay-rate
fitting, and ``cli`` a scenario-driven command line front end.
"""

from ellipsim.potential import PotentialParams
from ellipsim.flow import FlowField, FlowSample
from ellipsim.external import ExternalPotentials
from ellipsim.particles import DynamicsParams, MicroRun, ParticleEnsemble

__all__ = [
    "PotentialParams",
    "FlowField",
    "FlowSample",
    "ExternalPotentials",
    "DynamicsParams",
    "MicroRun",
    "ParticleEnsemble",
]

__version__ = "0.1.0"

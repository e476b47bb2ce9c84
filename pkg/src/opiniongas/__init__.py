"""Kinetic Monte Carlo simulator and analytical toolkit for bounded opinions.

Opinions m in (-1, 1) exchange in pairs like unit-mass particles of a
(1+1)-dimensional relativistic gas (momentum p = m gamma(m), metric
diag(1, -1)): binary inelastic exchanges with a momentum-conserving
random kick, plus an exact drift toward an external party. The package
provides the particle solver (dsmc), the moment diagnostics
(diagnostics), the thermal equilibrium (equilibrium), the closed-form
cooling/heating companions (theory), the special functions they need
(specfun), and a scenario CLI (cli, presets, runio).
"""

__version__ = "0.1.0"

from . import collision, diagnostics, dsmc, equilibrium, kinematics, specfun, theory

__all__ = [
    "__version__",
    "collision",
    "diagnostics",
    "dsmc",
    "equilibrium",
    "kinematics",
    "specfun",
    "theory",
]

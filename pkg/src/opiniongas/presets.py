"""Scenario presets for every published experiment of the model.

Nine ensemble scenarios (a1-a4, b1, b2, c1, c2 and the six-case d-grid)
plus two analytic tabulations (fig1, fig2) and the fig7 overlay group.
Uniform initial populations use equal probability weight per opinion
range ("uniformly populated in ..." ranges); all runs use 1e5 particles
and the exchange rate A = 1 unless overridden.

Horizons follow the time axes of the corresponding published figures,
except c2 with a weak kick, where the strongly boosted converged state
(mbar ~ 0.98) slows cooling by a factor ~ gamma * psi-suppression ~ 30
and chi needs t ~ 2.5e3 to settle at its balance value ~ 360.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsmc import SimConfig, UniformRanges

__all__ = ["PRESET_NAMES", "TabulationJob", "RunGroup", "build_preset", "dgrid_seed"]

PRESET_NAMES = ("a1", "a2", "a3", "a4", "b1", "b2", "c1", "c2", "d-grid", "fig1", "fig2", "fig7")

_BASE_SEED = 20240801

# opinion ranges (lo, hi, weight)
_EXTREME_BOTH = ((0.99, 1.0, 0.5), (-1.0, -0.99, 0.5))
_EXTREME_SKEW_09 = ((0.99, 1.0, 0.5), (-1.0, -0.9, 0.5))
_EXTREME_SKEW_08 = ((0.99, 1.0, 0.5), (-1.0, -0.8, 0.5))
_BROAD_08 = ((0.8, 1.0, 0.5), (-1.0, -0.8, 0.5))
_FULL = ((-1.0, 1.0, 1.0),)


@dataclass(frozen=True)
class TabulationJob:
    """Analytic grid job: which rate parameter, over which (chi, c/P) grid."""

    kind: str  # "psi1" | "psi2"
    chis: tuple[float, ...]
    seconds: tuple[float, ...]  # c values for psi1, P values for psi2


@dataclass(frozen=True)
class RunGroup:
    """A named family of runs executed together (d-grid, fig7)."""

    name: str
    members: tuple[tuple[str, SimConfig], ...]
    figures: tuple[str, ...] = ()


def dgrid_seed(master: int, index: int) -> int:
    """Independent per-member seed derived from the master seed."""
    return int(np.random.SeedSequence(master, spawn_key=(index,)).generate_state(1)[0])


def _apply(config_kwargs: dict, overrides: dict) -> dict:
    unknown = set(overrides) - {
        "lambda_", "delta_amp", "a_rate", "b_rate", "m_party", "n_particles",
        "dt", "t_end", "seed", "output_every", "collision_kernel", "init",
    }
    if unknown:
        raise ValueError(f"unknown override(s): {sorted(unknown)}")
    out = dict(config_kwargs)
    out.update(overrides)
    return out


def build_preset(name: str, **overrides):
    """Expand a preset name into a SimConfig, TabulationJob, or RunGroup.

    Keyword overrides replace the corresponding SimConfig fields (for the
    groups, every member).
    """
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; available: {PRESET_NAMES}")

    if name == "fig1":
        chis = tuple(np.geomspace(1e-2, 1e3, 121))
        return TabulationJob(kind="psi1", chis=chis, seconds=(0.0, 0.5, 1.0, 2.0, 5.0))
    if name == "fig2":
        chis = tuple(np.geomspace(1e-2, 1e3, 121))
        return TabulationJob(kind="psi2", chis=chis, seconds=(0.0, 0.5, 1.0, 2.0))

    if name == "d-grid":
        members = []
        idx = 0
        for delta_amp, b_rate, t_end in ((1.0, 0.1, 120.0), (11.5, 1.0, 30.0)):
            for m_party in (0.0, 0.5, 0.8):
                kwargs = _apply(
                    dict(
                        lambda_=0.0, delta_amp=delta_amp, b_rate=b_rate, m_party=m_party,
                        t_end=t_end, init=UniformRanges(_BROAD_08),
                        seed=dgrid_seed(_BASE_SEED, idx),
                    ),
                    overrides,
                )
                tag = f"mp{m_party:g}_da{delta_amp:g}_b{b_rate:g}".replace(".", "p")
                members.append((tag, SimConfig(**kwargs)))
                idx += 1
        return RunGroup(name="d-grid", members=tuple(members), figures=("fig18-left", "fig18-right", "fig19"))

    if name == "fig7":
        left = build_preset("a1", **overrides)
        right = build_preset("a3", **overrides)
        return RunGroup(name="fig7", members=(("a1", left), ("a3", right)),
                        figures=("fig7-left", "fig7-right"))

    table = {
        "a1": dict(lambda_=0.0, delta_amp=0.0, b_rate=0.0, t_end=17.7,
                   init=UniformRanges(_EXTREME_BOTH), seed=_BASE_SEED + 1),
        "a2": dict(lambda_=0.0, delta_amp=0.0, b_rate=0.0, t_end=177.0,
                   init=UniformRanges(_EXTREME_SKEW_09), seed=_BASE_SEED + 2),
        "a3": dict(lambda_=1.0, delta_amp=0.0, b_rate=0.1, m_party=0.0, t_end=80.0,
                   init=UniformRanges(_EXTREME_BOTH), seed=_BASE_SEED + 3),
        "a4": dict(lambda_=1.0, delta_amp=0.0, b_rate=0.1, m_party=0.97, t_end=80.0,
                   init=UniformRanges(_EXTREME_SKEW_08), seed=_BASE_SEED + 4),
        "b1": dict(lambda_=1.0, delta_amp=1.0, b_rate=0.0, t_end=177.0,
                   init=UniformRanges(_FULL), seed=_BASE_SEED + 5),
        "b2": dict(lambda_=1.0, delta_amp=1.0, b_rate=0.0, t_end=177.0,
                   init=UniformRanges(_EXTREME_SKEW_08), seed=_BASE_SEED + 6),
        "c1": dict(lambda_=0.0, delta_amp=1.0, b_rate=0.0, t_end=60.0,
                   init=UniformRanges(_BROAD_08), seed=_BASE_SEED + 7),
        "c2": dict(lambda_=0.0, delta_amp=1.0, b_rate=0.0, t_end=3000.0,
                   init=UniformRanges(_EXTREME_SKEW_08), seed=_BASE_SEED + 8),
    }
    kwargs = table[name]
    if name == "c2" and overrides.get("delta_amp", kwargs["delta_amp"]) > 2.0 and "t_end" not in overrides:
        kwargs = dict(kwargs, t_end=150.0)  # strong kick converges fast
    return SimConfig(**_apply(kwargs, overrides))

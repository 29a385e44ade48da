"""Closed-form grids for the single-qubit figures.

Every panel is a 100 x 100 grid written as ``x,y,value`` rows sorted by
``(x, y)``. Panels:

* fig1  QSL ``tau^R_alpha`` (a) and ``tau^H_alpha`` (b) over (tau, alpha), delta/v = 0.5
* fig2  normalized merits ``delta_l / max(delta_l)``, Renyi (a-c) and Tsallis (d-f)
* fig3  Tsallis QSL over (tau, alpha) for delta/v in {0.5, 1, 5, 10}
* fig4  Renyi QSL over (tau, alpha), same ratios
* fig5  relative-entropy QSL over (tau, delta/v) for four mixed states
* fig6  min-relative-entropy QSL over (tau, delta/v) for four pure states

All use ``H_t = n_t . sigma`` with the sweep rate ``v = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .bounds import VALIDITY_TOL, GConvention
from .qubit import QubitBlochSpec, merit_closed_grid, qsl_closed_grid

GRID_SIZE = 100
FIG_TAUS = np.linspace(0.1, 10.0, GRID_SIZE)
FIG_ALPHAS = np.linspace(0.01, 0.99, GRID_SIZE)
FIG_RATIOS = np.linspace(0.1, 10.0, GRID_SIZE)
SWEEP_RATE = 1.0
BASE_STATE = (0.25, math.pi / 4, math.pi / 4)
RATIOS = (0.5, 1.0, 5.0, 10.0)
RE_STATES = ((0.25, math.pi / 4, math.pi / 4), (0.25, math.pi / 3, math.pi / 4),
             (0.5, math.pi / 4, math.pi / 4), (0.5, math.pi / 3, math.pi / 4))
PURE_ANGLES = ((math.pi / 4, math.pi / 4), (math.pi / 3, math.pi / 4),
               (math.pi / 4, math.pi / 3), (math.pi / 3, math.pi / 3))
PANELS = "abcdef"


@dataclass
class Panel:
    name: str
    quantity: str
    x_name: str
    y_name: str
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(x), len(y))
    params: Dict[str, object] = field(default_factory=dict)
    flags: Tuple[str, ...] = ()

    def rows(self) -> List[tuple]:
        return [(float(xv), float(yv), float(self.values[i, j]))
                for i, xv in enumerate(self.x) for j, yv in enumerate(self.y)]

    def violations(self) -> int:
        """Grid points breaking the panel's invariant (QSL <= tau, or merit in [0, 1])."""
        v = self.values
        if self.quantity.startswith("merit"):
            return int(np.sum((v < 0) | (v > 1)) + (0 if v.max() == 1.0 else 1))
        tau = self.x[:, None] if self.x_name == "tau" else self.y[None, :]
        return int(np.sum(v > tau + VALIDITY_TOL))


def _lz(r, theta, phi, ratio):
    return QubitBlochSpec.lz(r, theta, phi, ratio * SWEEP_RATE, SWEEP_RATE)


def _alpha_panels(fig, family, ratios, steps, convention, quantity):
    out = []
    for p, ratio in zip(PANELS, ratios):
        g = qsl_closed_grid(_lz(*BASE_STATE, ratio), FIG_ALPHAS, FIG_TAUS, family, steps, convention)
        out.append(Panel(f"{fig}_{p}", quantity, "tau", "alpha", FIG_TAUS, FIG_ALPHAS, g["max"],
                         {"state": BASE_STATE, "delta_over_v": ratio, "family": family},
                         tuple(sorted(g["flags"]))))
    return out


def _ratio_panels(fig, family, states, steps, quantity):
    out = []
    for p, (r, theta, phi) in zip(PANELS, states):
        vals = np.empty((FIG_TAUS.size, FIG_RATIOS.size))
        flags = set()
        for j, ratio in enumerate(FIG_RATIOS):
            g = qsl_closed_grid(_lz(r, theta, phi, ratio), None, FIG_TAUS, family, steps)
            vals[:, j] = g["max"][:, 0]
            flags |= g["flags"]
        out.append(Panel(f"{fig}_{p}", quantity, "tau", "delta_over_v", FIG_TAUS, FIG_RATIOS, vals,
                         {"state": (r, theta, phi), "family": family}, tuple(sorted(flags))))
    return out


def fig1(steps=512, convention=GConvention.MAINTEXT):
    a = _alpha_panels("fig1", "RRE", (0.5,), steps, convention, "qsl_renyi")
    b = _alpha_panels("fig1", "TRE", (0.5,), steps, convention, "qsl_tsallis")
    b[0].name = "fig1_b"
    return a + b


def fig2(steps=512, convention=GConvention.MAINTEXT):
    spec = _lz(*BASE_STATE, 0.5)
    out = []
    names = iter(PANELS)
    for family, label in (("RRE", "renyi"), ("TRE", "tsallis")):
        deltas = merit_closed_grid(spec, FIG_ALPHAS, FIG_TAUS, family, steps, convention)
        for l, d in enumerate(deltas, start=1):
            out.append(Panel(f"fig2_{next(names)}", f"merit_{label}_{l}", "tau", "alpha", FIG_TAUS, FIG_ALPHAS,
                             d / d.max(), {"state": BASE_STATE, "delta_over_v": 0.5, "family": family,
                                           "merit": l, "max_delta": float(d.max())}))
    return out


def fig3(steps=512, convention=GConvention.MAINTEXT):
    return _alpha_panels("fig3", "TRE", RATIOS, steps, convention, "qsl_tsallis")


def fig4(steps=512, convention=GConvention.MAINTEXT):
    return _alpha_panels("fig4", "RRE", RATIOS, steps, convention, "qsl_renyi")


def fig5(steps=512, convention=None):
    return _ratio_panels("fig5", "RE", RE_STATES, steps, "qsl_relative_entropy")


def fig6(steps=512, convention=None):
    return _ratio_panels("fig6", "Min", [(1.0, th, ph) for th, ph in PURE_ANGLES], steps, "qsl_min")


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}

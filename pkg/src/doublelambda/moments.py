"""Closed moment equations for (n1, n2, <a1 a2>) and the entanglement observables."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .coefficients import MasterCoefficients, RateConstants
from .errors import EmptyWindow, StepFailure, UndefinedG2


@dataclass(frozen=True)
class MomentState:
    """Mean photon numbers and pair correlation ``w = <a1 a2>`` at time ``t``.

    ``<a1^+ a2^+>`` is always ``conj(w)``.
    """

    n1: float
    n2: float
    w: complex
    t: float = 0.0

    @classmethod
    def vacuum(cls, t: float = 0.0) -> MomentState:
        return cls(0.0, 0.0, 0j, t)


@dataclass(frozen=True)
class PhaseWindow:
    lo: float
    hi: float
    clipped_lo: float
    clipped_hi: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class EntanglementReport:
    duan_d: float
    g2: float | None
    phi21: float
    window_lo: float | None
    window_hi: float | None
    entangled: bool
    alpha1: complex = 0j
    alpha2: complex = 0j
    necessary_condition: bool | None = None


def moment_drift(state: MomentState, mc: MasterCoefficients, rc: RateConstants) -> MomentState:
    """Time derivative of the moments; returned as a ``MomentState`` at ``state.t``."""
    em = complex(math.cos(mc.phi), -math.sin(mc.phi))  # e^{-i phi}
    w = state.w
    dn1 = state.n1 * rc.k1 + 2.0 * (em * rc.c12 * w).real + 2.0 * mc.c_gain1.real
    dn2 = state.n2 * rc.k2 + 2.0 * (em * rc.c32 * w).real + 2.0 * mc.c_gain2.real
    dw = rc.k12 * w + em.conjugate() * (
        state.n1 * rc.c32.conjugate() + state.n2 * rc.c12.conjugate() - mc.c2.conjugate()
    )
    return MomentState(float(dn1), float(dn2), complex(dw), state.t)


def drift_system(mc: MasterCoefficients, rc: RateConstants, phi: float | None = None):
    """Real linear system ``dx/dt = A x + b`` for ``x = (n1, n2, Re w, Im w)``."""
    phi = mc.phi if phi is None else phi
    em = complex(math.cos(phi), -math.sin(phi))
    ep = em.conjugate()
    p1 = em * rc.c12
    p2 = em * rc.c32
    q1 = ep * rc.c32.conjugate()
    q2 = ep * rc.c12.conjugate()
    k = rc.k12
    a = np.array(
        [
            [rc.k1, 0.0, 2 * p1.real, -2 * p1.imag],
            [0.0, rc.k2, 2 * p2.real, -2 * p2.imag],
            [q1.real, q2.real, k.real, -k.imag],
            [q1.imag, q2.imag, k.imag, k.real],
        ]
    )
    src = -ep * mc.c2.conjugate()
    b = np.array([2 * mc.c_gain1.real, 2 * mc.c_gain2.real, src.real, src.imag])
    return a, b


def evolve_moments(
    initial: MomentState,
    mc: MasterCoefficients,
    rc: RateConstants,
    t_end: float,
    tol: float = 1e-9,
    t_eval=None,
) -> list[MomentState]:
    """Integrate the moment equations with an adaptive Dormand-Prince 8(5,3) pair.

    Integration runs in the co-rotating variable ``u = w exp(-i phi)``, whose
    equations contain no phase; ``w`` is rebuilt as ``u exp(i phi)``.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    a, b = drift_system(mc, rc, phi=0.0)
    rot = complex(math.cos(mc.phi), math.sin(mc.phi))
    u0 = initial.w / rot
    y0 = np.array([initial.n1, initial.n2, u0.real, u0.imag])
    t0 = initial.t
    if t_eval is None:
        t_eval = np.linspace(t0, t0 + t_end, 201)
    t_eval = np.asarray(t_eval, dtype=float)

    sol = solve_ivp(
        lambda _t, y: a @ y + b,
        (t0, t0 + t_end),
        y0,
        method="DOP853",
        t_eval=t_eval,
        rtol=tol,
        atol=tol * 1e-3,
    )
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        raise StepFailure(f"moment integration failed: {sol.message}")
    out = []
    for t, (n1, n2, ur, ui) in zip(sol.t, sol.y.T):
        out.append(MomentState(float(n1), float(n2), complex(ur, ui) * rot, float(t)))
    return out


def g2_of_state(state: MomentState) -> float:
    prod = state.n1 * state.n2
    if not prod > 0:
        raise UndefinedG2("g2 undefined: a mode has zero (or negative) occupation")
    return abs(state.w) ** 2 / prod + 1.0


def phase_window(n1: float, n2: float, g2: float) -> PhaseWindow:
    """Range of ``cos(phi21)`` for which a vacuum-seeded state is inseparable."""
    if not (g2 > 1 and n1 > 0 and n2 > 0):
        raise ValueError("phase window requires g2 > 1 and n1, n2 > 0")
    denom = 2.0 * math.sqrt(n1 * n2 * (g2 - 1.0))
    lo = -(n1 + n2 + 1.0) / denom
    hi = -(n1 + n2) / denom
    if hi <= -1.0:
        raise EmptyWindow(f"upper bound {hi:.6g} <= -1")
    return PhaseWindow(lo, hi, max(lo, -1.0), min(hi, 1.0))


def duan_from_phase(
    n1: float, n2: float, g2: float, cos_phi21: float,
    alpha1: complex = 0j, alpha2: complex = 0j,
) -> float:
    corr = 2.0 * math.sqrt(max(n1 * n2 * (g2 - 1.0), 0.0)) * cos_phi21
    coh = abs(alpha1) ** 2 + abs(alpha2) ** 2 + 2.0 * (alpha1 * alpha2).real
    return 2.0 * (1.0 + n1 + n2 + corr - coh)


def duan_parameter(
    state: MomentState, alpha1: complex = 0j, alpha2: complex = 0j
) -> EntanglementReport:
    """Duan variance sum ``D`` and the derived phase information."""
    phi21 = math.atan2(state.w.imag, state.w.real) if state.w != 0 else 0.0
    try:
        g2 = g2_of_state(state)
    except UndefinedG2:
        g2 = None
    # phase form; sqrt(n1 n2 (g2 - 1)) is |w|, taken directly so that g2 -> 1
    # does not lose the correlation to rounding
    coh = abs(alpha1) ** 2 + abs(alpha2) ** 2 + 2.0 * (alpha1 * alpha2).real
    d = 2.0 * (1.0 + state.n1 + state.n2 + 2.0 * abs(state.w) * math.cos(phi21) - coh)

    lo = hi = None
    if g2 is not None and g2 > 1:
        try:
            win = phase_window(state.n1, state.n2, g2)
            lo, hi = win.lo, win.hi
        except EmptyWindow:
            pass
    necessary = 2.0 * state.w.real < -(state.n1 + state.n2)
    return EntanglementReport(
        duan_d=float(d),
        g2=g2,
        phi21=phi21,
        window_lo=lo,
        window_hi=hi,
        entangled=bool(0.0 < d < 2.0),
        alpha1=complex(alpha1),
        alpha2=complex(alpha2),
        necessary_condition=bool(necessary),
    )

"""Stationary moments: closed form, independent linear solve, stability, verdict."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .coefficients import MasterCoefficients, RateConstants
from .errors import DisregardedUnstable, SingularDrift, SingularM
from .moments import EntanglementReport, MomentState, drift_system, duan_parameter

SINGULAR_M_REL = 1e-12
BOUNDARY_M_REL = 1e-8


@dataclass(frozen=True)
class SteadyMoments:
    n1: float
    n2: float
    e_amplitude: complex
    m_denominator: complex
    w: complex
    stable: bool
    drift_eigenvalues: tuple
    boundary: bool = False

    def as_state(self) -> MomentState:
        return MomentState(self.n1, self.n2, self.w, math.inf)


def _scale(mc: MasterCoefficients, rc: RateConstants) -> float:
    return max(abs(rc.k1), abs(rc.k2), abs(rc.k12), abs(rc.c12), abs(rc.c32), abs(mc.c2), 1e-300)


def m_denominator(rc: RateConstants) -> complex:
    k1, k2, k12, c12, c32 = rc.k1, rc.k2, rc.k12, rc.c12, rc.c32
    k12c, c12c, c32c = k12.conjugate(), c12.conjugate(), c32.conjugate()
    x = (k1 * k12c + k2 * k12) * (c12c * c32)
    return x + x.conjugate() - (c12 * c32c - c12c * c32) ** 2 - k1 * k2 * k12 * k12c


def classify_stability(mc: MasterCoefficients, rc: RateConstants):
    """``(stable, eigenvalues)`` of the 4x4 real drift matrix."""
    a, _ = drift_system(mc, rc)
    eig = np.linalg.eigvals(a)
    eig = tuple(sorted((complex(v) for v in eig), key=lambda z: (z.real, z.imag)))
    return bool(max(v.real for v in eig) < 0.0), eig


def steady_closed_form(mc: MasterCoefficients, rc: RateConstants) -> SteadyMoments:
    k1, k2, k12, c12, c32 = rc.k1, rc.k2, rc.k12, rc.c12, rc.c32
    k12c, c12c, c32c = k12.conjugate(), c12.conjugate(), c32.conjugate()
    c2, c2c = mc.c2, mc.c2.conjugate()
    g1 = 2.0 * mc.c_gain1.real
    g2 = 2.0 * mc.c_gain2.real

    m = m_denominator(rc)
    scale4 = _scale(mc, rc) ** 4
    if abs(m) <= SINGULAR_M_REL * scale4:
        raise SingularM(f"|M| = {abs(m):.3e} is at the non-steady boundary")

    e_num = (
        -c32c * (k2 * k12c + c12c * c32 - c12 * c32c) * g1
        - c12c * (k1 * k12c + c12 * c32c - c12c * c32) * g2
        + c2c * (k1 * c12 * c32c + k2 * c32 * c12c)
        - c2c * k1 * k2 * k12c
        - c2 * c32c * c12c * (k1 + k2)
    )
    e = e_num / m

    y1 = c12c * c32 * k12c
    n1 = (
        g1 * (k2 * k12 * k12c - (y1 + y1.conjugate()))
        + g2 * c12c * c12 * (k12c + k12)
        + c2c * c12 * (k2 * k12c + (c12c * c32 - c12 * c32c))
        + c2 * c12c * (k2 * k12 + (c12 * c32c - c12c * c32))
    ) / m
    y2 = c32c * c12 * k12c
    n2 = (
        g2 * (k1 * k12 * k12c - (y2 + y2.conjugate()))
        + g1 * c32c * c32 * (k12c + k12)
        + c2c * c32 * (k1 * k12c + (c12 * c32c - c12c * c32))
        + c2 * c32c * (k1 * k12 + (c12c * c32 - c12 * c32c))
    ) / m

    stable, eig = classify_stability(mc, rc)
    w = e * complex(math.cos(mc.phi), math.sin(mc.phi))
    return SteadyMoments(
        n1=float(n1.real),
        n2=float(n2.real),
        e_amplitude=complex(e),
        m_denominator=complex(m),
        w=complex(w),
        stable=stable,
        drift_eigenvalues=eig,
        boundary=bool(abs(m) <= BOUNDARY_M_REL * scale4),
    )


def steady_linear_solve(mc: MasterCoefficients, rc: RateConstants) -> SteadyMoments:
    """Stationary point of the real 4-vector drift, found by direct solve."""
    a, b = drift_system(mc, rc)
    try:
        x = np.linalg.solve(a, -b)
    except np.linalg.LinAlgError as exc:
        raise SingularDrift(str(exc)) from exc
    resid = np.linalg.norm(a @ x + b)
    ref = max(np.linalg.norm(a) * np.linalg.norm(x), np.linalg.norm(b), 1e-300)
    if not np.all(np.isfinite(x)) or resid > 1e-12 * ref:
        raise SingularDrift(f"drift solve residual {resid:.3e}")
    w = complex(x[2], x[3])
    stable, eig = classify_stability(mc, rc)
    e = w * complex(math.cos(mc.phi), -math.sin(mc.phi))
    m = m_denominator(rc)
    return SteadyMoments(
        n1=float(x[0]),
        n2=float(x[1]),
        e_amplitude=e,
        m_denominator=m,
        w=w,
        stable=stable,
        drift_eigenvalues=eig,
        boundary=bool(abs(m) <= BOUNDARY_M_REL * _scale(mc, rc) ** 4),
    )


def entanglement_verdict(sm: SteadyMoments) -> EntanglementReport:
    """Vacuum-input Duan verdict at a stable stationary point."""
    if not sm.stable:
        raise DisregardedUnstable("steady state is dynamically unstable")
    n1, n2, w = sm.n1, sm.n2, sm.w
    d = 2.0 * (1.0 + n1 + n2 + 2.0 * w.real)
    report = duan_parameter(MomentState(n1, n2, w))
    # report D from the moment form; the g2/phase form agrees to rounding
    return replace(report, duan_d=d, entangled=bool(0.0 < d < 2.0))


def rotate_phase(sm: SteadyMoments, phi: float) -> SteadyMoments:
    """Same stationary point with the laser phase set to ``phi`` (n unchanged)."""
    return replace(sm, w=sm.e_amplitude * complex(math.cos(phi), math.sin(phi)))

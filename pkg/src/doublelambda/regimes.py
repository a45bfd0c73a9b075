"""Closed-form analyzers for the two limiting schemes.

* REIT (Raman-EIT): strong resonant control, weak far-detuned pump.  The master
  equation collapses onto a single squeezing rate ``xi`` with ``C2 = -C4 = i*xi``.
* DRR (double resonant Raman): equal Rabi frequencies, zero detunings, real
  coefficients.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .atom_bloch import AtomParams, AtomSteadyState, solve_atom_steady_state
from .coefficients import (
    MasterCoefficients,
    build_coefficients,
    rate_constants,
    with_kappa,
)
from .errors import DoubleLambdaError, NonSteady, PoleAtXiSquared, ZeroDetuning
from .steady_state import rotate_phase, steady_closed_form

POLE_TOL = 1e-12
REIT_VALIDITY_RATIO = 5.0


class ReitValidityWarning(UserWarning):
    """Parameters are outside the strong-control, far-detuned REIT limit."""


# ---------------------------------------------------------------- REIT


@dataclass(frozen=True)
class ReitAnalysis:
    xi: float
    kappa_product_gap: float
    n1: float
    n2: float
    w_magnitude: float
    w: complex
    condition_lhs: float
    duan_d: float
    entangled: bool
    stable: bool
    case_label: str


def reit_valid(params: AtomParams) -> bool:
    ref = max(params.omega_p, params.gamma)
    return (abs(params.omega_c) >= REIT_VALIDITY_RATIO * ref
            and abs(params.delta_p) >= REIT_VALIDITY_RATIO * ref)


def reit_xi(params: AtomParams, warn: bool = True) -> float:
    """Parametric coupling rate; its sign follows the pump detuning."""
    if params.delta_p == 0:
        raise ZeroDetuning("REIT rate needs a nonzero pump detuning")
    if warn and not reit_valid(params):
        warnings.warn(
            "REIT limit needs omega_c, |delta| >> omega_p, gamma", ReitValidityWarning,
            stacklevel=2,
        )
    num = params.g_a * params.g_s * params.omega_p * params.omega_c
    return num / (params.delta_p * (params.gamma * params.gamma_bc + params.omega_c**2))


def reit_case_label(xi: float, kappa_s: float, kappa_a: float) -> str:
    """One of the four sign cases ``xi<0|xi>0`` x ``kk<xi2|kk>xi2``."""
    sx = "xi<0" if xi < 0 else "xi>0"
    sk = "kk<xi2" if kappa_s * kappa_a < xi * xi else "kk>xi2"
    return f"{sx},{sk}"


def reit_steady(xi: float, kappa_s: float, kappa_a: float, theta_t: float):
    """``(n1, n2, w)`` of the REIT closed forms."""
    kk = kappa_s * kappa_a
    gap = kk - xi * xi
    if abs(gap) <= POLE_TOL * max(kk, xi * xi):
        raise PoleAtXiSquared("kappa_s*kappa_a equals xi^2")
    ksum = kappa_s + kappa_a
    n1 = xi * xi * kappa_a / (ksum * gap)
    n2 = xi * xi * kappa_s / (ksum * gap)
    w = complex(math.cos(theta_t), math.sin(theta_t)) * 1j * xi * kk / (ksum * gap)
    return n1, n2, w


def reit_condition_lhs(xi: float, kappa_s: float, kappa_a: float, theta_t: float) -> float:
    kk = kappa_s * kappa_a
    gap = kk - xi * xi
    if abs(gap) <= POLE_TOL * max(kk, xi * xi):
        raise PoleAtXiSquared("kappa_s*kappa_a equals xi^2")
    return xi * (xi - kk / (kappa_s + kappa_a) * 2.0 * math.sin(theta_t)) / gap


def reit_analyze_xi(xi: float, kappa_s: float, kappa_a: float, theta_t: float) -> ReitAnalysis:
    n1, n2, w = reit_steady(xi, kappa_s, kappa_a, theta_t)
    lhs = reit_condition_lhs(xi, kappa_s, kappa_a, theta_t)
    gap = kappa_s * kappa_a - xi * xi
    return ReitAnalysis(
        xi=xi,
        kappa_product_gap=gap,
        n1=n1,
        n2=n2,
        w_magnitude=abs(w),
        w=w,
        condition_lhs=lhs,
        duan_d=2.0 * (1.0 + n1 + n2 + 2.0 * w.real),
        entangled=bool(lhs < 0),
        stable=bool(gap > 0),
        case_label=reit_case_label(xi, kappa_s, kappa_a),
    )


def reit_analyze(params: AtomParams, theta_t: float) -> ReitAnalysis:
    xi = reit_xi(params)
    return reit_analyze_xi(xi, params.kappa_s, params.kappa_a, theta_t)


def reit_coefficients(xi: float, kappa_s: float, kappa_a: float, phi: float = 0.0) -> MasterCoefficients:
    """Master coefficients of the strict REIT limit."""
    return MasterCoefficients(
        c_loss1=complex(kappa_s), c_gain1=0j, c_loss2=complex(kappa_a), c_gain2=0j,
        c1=0j, c2=1j * xi, c3=0j, c4=-1j * xi,
        kappa_s=kappa_s, kappa_a=kappa_a, phi=phi,
    )


def reit_tune_kappa(params: AtomParams, safety: float, mc: MasterCoefficients | None = None):
    """Equal cavity dampings placed just above the pole, ``kappa^2 = safety*|C2|^2``."""
    if not safety > 1:
        raise ValueError("safety must exceed 1")
    if mc is None:
        mc = build_coefficients(params).master
    kappa = math.sqrt(safety) * abs(mc.c2)
    return kappa, kappa


@dataclass(frozen=True)
class ScanRow:
    phi: float
    omega_c: float
    duan_d: float
    n1: float
    n2: float
    stable: bool
    entangled: bool
    kappa: float
    error: str = ""


def reit_scan_column(base: AtomParams, omega_c: float, phis, safety: float) -> list[ScanRow]:
    """All ``phi`` points of one ``omega_c`` column with tuned cavity damping.

    Photon numbers do not depend on ``phi``; the pair correlation is rotated.
    """
    phis = [float(p) for p in phis]
    params = base.replace(omega_c=float(omega_c))
    try:
        cs = build_coefficients(params)
        ks, ka = reit_tune_kappa(params, safety, cs.master)
        mc = with_kappa(cs.master, ks, ka)
        sm = steady_closed_form(mc, rate_constants(mc))
    except (DoubleLambdaError, ValueError, ArithmeticError) as exc:
        nan = float("nan")
        msg = f"{type(exc).__name__}: {exc}"
        return [ScanRow(p, float(omega_c), nan, nan, nan, False, False, nan, msg) for p in phis]
    rows = []
    for p in phis:
        w = rotate_phase(sm, p).w
        d = 2.0 * (1.0 + sm.n1 + sm.n2 + 2.0 * w.real)
        rows.append(ScanRow(p, float(omega_c), d, sm.n1, sm.n2, sm.stable,
                            bool(sm.stable and 0.0 < d < 2.0), ks))
    return rows


def reit_scan(base: AtomParams, phis, omega_cs, safety: float = 1.01) -> list[ScanRow]:
    """Rows ordered by ``omega_c`` then ``phi``."""
    out = []
    for oc in omega_cs:
        out.extend(reit_scan_column(base, oc, phis, safety))
    return out


# ---------------------------------------------------------------- DRR


@dataclass(frozen=True)
class DrrCoefficients:
    """Symmetric resonant coefficients; ``c3 = c1`` and ``c4 = 2*c1 - c2``."""

    c1: float
    c2: float
    c12: float
    c_loss: float
    c_gain: float
    z: float


@dataclass(frozen=True)
class DrrAnalysis:
    n_mean: float
    w: complex
    xi_bracket: float
    duan_d: float
    steady_exists: bool
    condition_holds: bool
    coefficients: DrrCoefficients


def _check_symmetric(params: AtomParams, tol: float = 1e-12) -> None:
    scale = max(abs(params.omega_p), abs(params.omega_c), 1.0)
    if (abs(params.omega_p - params.omega_c) > tol * scale
            or params.delta_p != 0 or params.delta_c != 0
            or params.kappa_s != params.kappa_a or params.g_s != params.g_a):
        raise ValueError("DRR analysis needs omega_p == omega_c, zero detunings, "
                         "equal couplings and equal cavity dampings")


def drr_coefficients(params: AtomParams, atom: AtomSteadyState | None = None) -> DrrCoefficients:
    """Resonant symmetric closed forms for ``C1, C2, C_loss, C_gain``."""
    _check_symmetric(params)
    if atom is None:
        atom = solve_atom_steady_state(params)
    g2 = params.g_s * params.g_a
    gam = params.gamma
    t_ad, t_bc = 2.0 * gam, params.gamma_bc
    i = params.omega_p**2
    z = gam * (t_ad * t_bc * gam + 2.0 * i * (t_ad + t_bc))
    paa, pbb, pcc, pdd = atom.p_aa, atom.p_bb, atom.p_cc, atom.p_dd
    c1 = g2 * i / z * 2.0 * (t_bc * pcc + t_ad * paa)
    c2 = g2 * i / z * 2.0 * (t_bc * paa + t_ad * (2.0 * paa - pcc))
    c_loss = g2 * (i * t_bc / z * paa + t_ad * (gam * t_bc + i) / z * pbb) + params.kappa_s
    c_gain = g2 * (t_bc * (gam * t_ad + i) / z * pdd + i * t_ad / z * pcc)
    return DrrCoefficients(c1, c2, c1 - c2, c_loss, c_gain, z)


def drr_master_coefficients(dc: DrrCoefficients, kappa: float, phi: float = 0.0) -> MasterCoefficients:
    return MasterCoefficients(
        c_loss1=complex(dc.c_loss), c_gain1=complex(dc.c_gain),
        c_loss2=complex(dc.c_loss), c_gain2=complex(dc.c_gain),
        c1=complex(dc.c1), c2=complex(dc.c2), c3=complex(dc.c1), c4=complex(2 * dc.c1 - dc.c2),
        kappa_s=kappa, kappa_a=kappa, phi=phi,
    )


def drr_steady(dc: DrrCoefficients, theta_t: float):
    """``(n_mean, xi_bracket, w)`` of the DRR closed forms; raises ``NonSteady``."""
    net = dc.c_gain - dc.c_loss
    # symmetric-subspace drift eigenvalues are 2*(net +- c12)
    if net + abs(dc.c12) >= 0:
        raise NonSteady(
            f"no steady state: C_gain - C_loss + |C12| = {net + abs(dc.c12):.6g} >= 0"
        )
    den = dc.c12**2 - net**2
    n = (dc.c_gain * net + 0.5 * dc.c2 * dc.c12) / den
    xi = (dc.c1 * dc.c_gain - 0.5 * dc.c2 * (dc.c_gain + dc.c_loss)) / den
    w = -complex(math.cos(theta_t), math.sin(theta_t)) * xi
    return n, xi, w


def drr_analyze(params: AtomParams, theta_t: float, atom: AtomSteadyState | None = None) -> DrrAnalysis:
    dc = drr_coefficients(params, atom)
    n, xi, w = drr_steady(dc, theta_t)
    d = 2.0 * (1.0 + 2.0 * n + 2.0 * w.real)
    return DrrAnalysis(
        n_mean=n,
        w=w,
        xi_bracket=xi,
        duan_d=d,
        steady_exists=True,
        condition_holds=bool(2.0 * n < 2.0 * xi * math.cos(theta_t)),
        coefficients=dc,
    )


@dataclass(frozen=True)
class DrrScanReport:
    min_d: float
    argmin: tuple | None
    n_points: int
    n_stable: int
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations


def drr_no_entanglement_scan(
    omegas, kappas, thetas, g: float = 1.0, gamma: float = 1.0, gamma_bc: float = 0.0,
    tol: float = 1e-9,
) -> DrrScanReport:
    """Minimum Duan parameter over stable symmetric-DRR points, full pipeline.

    Each point runs the Bloch solve and the general coefficient builder; the
    stationary moments come from the general closed form.  Points with
    ``D < 2 - tol`` are returned as violations.
    """
    thetas = np.asarray(list(thetas), dtype=float)
    rot = np.exp(1j * thetas)
    best, arg = math.inf, None
    n_points = n_stable = 0
    violations = []
    for om in omegas:
        for kap in kappas:
            n_points += len(thetas)
            params = AtomParams(
                omega_p=float(om), omega_c=float(om), gamma=gamma, gamma_bc=gamma_bc,
                g_s=g, g_a=g, kappa_s=float(kap), kappa_a=float(kap),
            )
            mc = build_coefficients(params).master
            rc = rate_constants(mc)
            try:
                sm = steady_closed_form(mc, rc)
            except DoubleLambdaError:
                continue
            if not sm.stable:
                continue
            n_stable += len(thetas)
            d = 2.0 * (1.0 + sm.n1 + sm.n2 + 2.0 * (sm.e_amplitude * rot).real)
            i = int(np.argmin(d))
            if d[i] < best:
                best, arg = float(d[i]), (float(om), float(kap), float(thetas[i]))
            for j in np.nonzero(d < 2.0 - tol)[0]:
                violations.append((float(om), float(kap), float(thetas[j]), float(d[j])))
    return DrrScanReport(best, arg, n_points, n_stable, violations)

"""Master-equation coefficients of the double-Lambda two-photon laser.

Pipeline: dressed denominators -> one-photon response elements ``C_{ab,cd}``
-> gain/loss/squeezing coefficients -> moment-equation rate constants.

Dressed denominators use ``T_xy = gamma_xy + i * offset_xy`` with

* ``T_ac = gamma + i*delta_c``
* ``T_ad = 2*gamma + i*(delta_c - delta_p)``
* ``T_bc = gamma_bc``  (both cavity modes Raman resonant with the b-c transition)
* ``T_db = gamma + i*delta_p``

which makes every ``T`` real at zero laser detuning.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .atom_bloch import AtomParams, AtomSteadyState, solve_atom_steady_state
from .errors import SingularZ

RELATION_TOL = 1e-12


@dataclass(frozen=True)
class DressedDenominators:
    t_ac: complex
    t_ad: complex
    t_bc: complex
    t_db: complex
    i_p: float
    i_c: float
    z: complex


@dataclass(frozen=True)
class CMatrixElements:
    c_ac_ac: complex
    c_ac_ad: complex
    c_ac_bc: complex
    c_ac_bd: complex
    c_bd_ac: complex
    c_bd_ad: complex
    c_bd_bc: complex
    c_bd_bd: complex

    def as_dict(self) -> dict[str, complex]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class MasterCoefficients:
    """Coefficients of the two-mode master equation.

    ``c_loss*`` already contain the bare cavity damping ``kappa_*``.
    """

    c_loss1: complex
    c_gain1: complex
    c_loss2: complex
    c_gain2: complex
    c1: complex
    c2: complex
    c3: complex
    c4: complex
    kappa_s: float
    kappa_a: float
    phi: float = 0.0

    def replace(self, **changes) -> MasterCoefficients:
        return replace(self, **changes)

    @property
    def relation_residual(self) -> float:
        """``|C1 + C3 - C2 - C4|`` relative to the largest squeezing coefficient."""
        scale = max(abs(self.c1), abs(self.c2), abs(self.c3), abs(self.c4))
        if scale == 0.0:
            return 0.0
        return abs(self.c1 + self.c3 - self.c2 - self.c4) / scale

    def check_relation(self, tol: float = RELATION_TOL) -> None:
        if self.relation_residual > tol:
            raise ValueError(
                f"C1 + C3 != C2 + C4 (relative residual {self.relation_residual:.3e})"
            )

    @property
    def scale(self) -> float:
        vals = (self.c_loss1, self.c_gain1, self.c_loss2, self.c_gain2,
                self.c1, self.c2, self.c3, self.c4)
        return max(abs(v) for v in vals)

    @classmethod
    def pure_loss(cls, kappa_s: float, kappa_a: float, phi: float = 0.0) -> MasterCoefficients:
        return cls(kappa_s, 0j, kappa_a, 0j, 0j, 0j, 0j, 0j, kappa_s, kappa_a, phi)


@dataclass(frozen=True)
class RateConstants:
    k1: float
    k2: float
    k12: complex
    c12: complex
    c32: complex


def dressed_denominators(params: AtomParams) -> DressedDenominators:
    g = params.gamma
    t_ac = complex(g, params.delta_c)
    t_ad = complex(2 * g, params.delta_c - params.delta_p)
    t_bc = complex(params.gamma_bc, 0.0)
    t_db = complex(g, params.delta_p)
    i_p = params.omega_p**2
    i_c = params.omega_c**2
    ac, ad, bc = t_ac.conjugate(), t_ad.conjugate(), t_bc.conjugate()
    z = (
        ac * ad * bc * t_db
        + i_p * ac * ad
        + i_p * bc * t_db
        + i_c * ac * bc
        + i_c * ad * t_db
        + (i_p - i_c) ** 2
    )
    return DressedDenominators(t_ac, t_ad, t_bc, t_db, i_p, i_c, z)


def c_matrix_elements(d: DressedDenominators, params: AtomParams) -> CMatrixElements:
    scale = max(abs(d.t_ac), abs(d.t_ad), abs(d.t_bc), abs(d.t_db), d.i_p, d.i_c, 1e-300)
    if abs(d.z) < 1e-300 * scale**4:
        raise SingularZ("Z vanishes; response elements undefined")
    op, oc = params.omega_p, params.omega_c
    ac, ad, bc, db = d.t_ac.conjugate(), d.t_ad.conjugate(), d.t_bc.conjugate(), d.t_db
    ip, ic, z = d.i_p, d.i_c, d.z
    return CMatrixElements(
        c_ac_ac=(ad * bc * db + ip * ad + ic * bc) / z,
        c_ac_ad=-1j * op * (bc * db + ip - ic) / z,
        c_ac_bc=-1j * oc * (-ad * db + ip - ic) / z,
        c_ac_bd=oc * op * (bc + ad) / z,
        c_bd_ac=op * oc * (bc + ad) / z,
        c_bd_ad=-1j * oc * (-ac * bc + ip - ic) / z,
        c_bd_bc=-1j * op * (ac * ad + ip - ic) / z,
        c_bd_bd=(ac * ad * bc + ip * bc + ic * ad) / z,
    )


def master_coefficients(
    elems: CMatrixElements, atom: AtomSteadyState, params: AtomParams
) -> MasterCoefficients:
    e = elems
    gs2, ga2 = params.g_s**2, params.g_a**2
    c_loss1 = gs2 * (e.c_bd_ad * atom.p_ab + e.c_bd_bd * atom.p_bb) + params.kappa_s
    c_gain1 = gs2 * (e.c_bd_bd * atom.p_dd + e.c_bd_bc * atom.p_dc)
    c_loss2 = ga2 * (e.c_ac_ac * atom.p_cc + e.c_ac_ad * atom.p_cd) + params.kappa_a
    c_gain2 = ga2 * (e.c_ac_ac * atom.p_aa + e.c_ac_bc * atom.p_ba)

    acbd = e.c_ac_bd.conjugate()
    acbc = e.c_ac_bc.conjugate()
    acad = e.c_ac_ad.conjugate()
    j1 = e.c_bd_ac * atom.p_cc + acbd * atom.p_dd + (e.c_bd_ad + acbc) * atom.p_cd
    j2 = e.c_bd_ac * atom.p_aa + acbd * atom.p_dd + e.c_bd_bc * atom.p_ba + acbc * atom.p_cd
    j3 = e.c_bd_ac * atom.p_aa + acbd * atom.p_bb + (e.c_bd_bc + acad) * atom.p_ba
    j4 = e.c_bd_ac * atom.p_cc + acbd * atom.p_bb + e.c_bd_ad * atom.p_cd + acad * atom.p_ba
    gg = params.g_a * params.g_s
    return MasterCoefficients(
        c_loss1=complex(c_loss1),
        c_gain1=complex(c_gain1),
        c_loss2=complex(c_loss2),
        c_gain2=complex(c_gain2),
        c1=complex(gg * j1),
        c2=complex(gg * j2),
        c3=complex(gg * j3),
        c4=complex(gg * j4),
        kappa_s=params.kappa_s,
        kappa_a=params.kappa_a,
        phi=params.phi,
    )


def rate_constants(mc: MasterCoefficients) -> RateConstants:
    k1 = 2.0 * (mc.c_gain1 - mc.c_loss1).real
    k2 = 2.0 * (mc.c_gain2 - mc.c_loss2).real
    k12 = mc.c_gain2 + mc.c_gain1.conjugate() - (mc.c_loss2 + mc.c_loss1.conjugate())
    return RateConstants(
        k1=float(k1), k2=float(k2), k12=complex(k12),
        c12=mc.c1 - mc.c2, c32=mc.c3 - mc.c2,
    )


@dataclass(frozen=True)
class CoefficientSet:
    """Everything produced by one pass of the pipeline for a parameter point."""

    params: AtomParams
    atom: AtomSteadyState
    denominators: DressedDenominators
    elements: CMatrixElements
    master: MasterCoefficients
    rates: RateConstants


def build_coefficients(
    params: AtomParams, atom: AtomSteadyState | None = None
) -> CoefficientSet:
    if atom is None:
        atom = solve_atom_steady_state(params)
    d = dressed_denominators(params)
    elems = c_matrix_elements(d, params)
    mc = master_coefficients(elems, atom, params)
    return CoefficientSet(params, atom, d, elems, mc, rate_constants(mc))


def with_kappa(mc: MasterCoefficients, kappa_s: float, kappa_a: float) -> MasterCoefficients:
    """Swap the bare cavity damping inside ``c_loss1/2`` for new values."""
    return mc.replace(
        c_loss1=mc.c_loss1 - mc.kappa_s + kappa_s,
        c_loss2=mc.c_loss2 - mc.kappa_a + kappa_a,
        kappa_s=kappa_s,
        kappa_a=kappa_a,
    )


def random_master_coefficients(
    rng, scale: float = 0.1, kappa: float = 1.0, phi: float | None = None,
    require_stable: bool = True, max_tries: int = 1000,
) -> MasterCoefficients:
    """Random coefficient set obeying ``C1 + C3 = C2 + C4``.

    Gains get nonnegative real parts; losses sit near ``kappa``.  With
    ``require_stable`` draws are repeated until the moment drift is stable.
    """
    from .steady_state import classify_stability

    def z(s):
        return complex(s * rng.normal(), s * rng.normal())

    for _ in range(max_tries):
        c1, c2, c3 = z(scale), z(scale), z(scale)
        cg1 = complex(abs(scale * rng.normal()), 0.2 * scale * rng.normal())
        cg2 = complex(abs(scale * rng.normal()), 0.2 * scale * rng.normal())
        ks = kappa * (1.0 + 0.5 * rng.random())
        ka = kappa * (1.0 + 0.5 * rng.random())
        mc = MasterCoefficients(
            c_loss1=ks + z(0.2 * scale), c_gain1=cg1,
            c_loss2=ka + z(0.2 * scale), c_gain2=cg2,
            c1=c1, c2=c2, c3=c3, c4=c1 + c3 - c2,
            kappa_s=ks, kappa_a=ka,
            phi=float(rng.uniform(0, 2 * np.pi)) if phi is None else phi,
        )
        if not require_stable or classify_stability(mc, rate_constants(mc))[0]:
            return mc
    raise RuntimeError("no stable draw found")

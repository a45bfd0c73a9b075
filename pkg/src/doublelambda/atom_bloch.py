"""Laser-driven four-level double-Lambda atom: Bloch generator and steady state.

Level indices are ``a=0, b=1, c=2, d=3``.  The pump couples c<->d, the control
couples b<->a; the cavity modes (d<->b Stokes, a<->c anti-Stokes) are not part
of this solve.  Density matrices are vectorized row-major, ``vec(rho)[4*i + j]
== rho[i, j]``, so ``vec(A @ rho @ B) == kron(A, B.T) @ vec(rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateKernel, SolverFailure

A, B, C, D = 0, 1, 2, 3
LEVELS = "abcd"
NULL_TOL = 1e-10
_TRACE_ROW = np.eye(4).reshape(16)


@dataclass(frozen=True)
class AtomParams:
    """Physical parameters, all rates in units of the radiative decay scale ``gamma``.

    ``phi`` is the controllable sum of the pump and control laser phases.
    """

    omega_p: float
    omega_c: float
    delta_p: float = 0.0
    delta_c: float = 0.0
    gamma: float = 1.0
    gamma_bc: float = 0.0
    g_s: float = 1.0
    g_a: float = 1.0
    kappa_s: float = 1.0
    kappa_a: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.gamma_bc < 0:
            raise ValueError("gamma_bc must be non-negative")
        if self.kappa_s <= 0 or self.kappa_a <= 0:
            raise ValueError("cavity damping rates must be positive")

    def replace(self, **changes) -> AtomParams:
        return replace(self, **changes)

    @property
    def coherence_rates(self) -> dict[str, float]:
        """Decay rates of the atomic coherences implied by the dissipation model."""
        g = self.gamma
        return {"ab": g, "ac": g, "db": g, "dc": g, "ad": 2 * g, "bc": self.gamma_bc}


@dataclass(frozen=True)
class AtomSteadyState:
    p_aa: float
    p_bb: float
    p_cc: float
    p_dd: float
    p_ab: complex
    p_ba: complex
    p_cd: complex
    p_dc: complex
    residual: float = 0.0

    @classmethod
    def from_matrix(cls, rho: np.ndarray, residual: float = 0.0) -> AtomSteadyState:
        return cls(
            p_aa=float(rho[A, A].real),
            p_bb=float(rho[B, B].real),
            p_cc=float(rho[C, C].real),
            p_dd=float(rho[D, D].real),
            p_ab=complex(rho[A, B]),
            p_ba=complex(rho[B, A]),
            p_cd=complex(rho[C, D]),
            p_dc=complex(rho[D, C]),
            residual=residual,
        )

    @property
    def populations(self) -> np.ndarray:
        return np.array([self.p_aa, self.p_bb, self.p_cc, self.p_dd])


def hamiltonian(params: AtomParams) -> np.ndarray:
    """Rotating-frame Hamiltonian; detunings are laser minus atomic frequency."""
    h = np.zeros((4, 4), dtype=complex)
    h[A, A] = -params.delta_c
    h[D, D] = -params.delta_p
    h[D, C] = h[C, D] = -params.omega_p
    h[A, B] = h[B, A] = -params.omega_c
    return h


def _dissipator(params: AtomParams) -> np.ndarray:
    eye = np.eye(4)
    out = np.zeros((16, 16), dtype=complex)
    # each excited level decays at rate gamma into each ground level
    for upper in (A, D):
        for lower in (B, C):
            jump = np.zeros((4, 4))
            jump[lower, upper] = 1.0
            jj = jump.T @ jump
            out += params.gamma * (
                np.kron(jump, jump) - 0.5 * np.kron(jj, eye) - 0.5 * np.kron(eye, jj.T)
            )
    # pure dephasing acts on the ground-state coherence only
    out[4 * B + C, 4 * B + C] -= params.gamma_bc
    out[4 * C + B, 4 * C + B] -= params.gamma_bc
    return out


def build_bloch_generator(params: AtomParams) -> np.ndarray:
    """Return the 16x16 generator ``L`` with ``d vec(rho)/dt = L @ vec(rho)``."""
    h = hamiltonian(params)
    eye = np.eye(4)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T)) + _dissipator(params)


def kernel_dimension(generator: np.ndarray, tol: float = NULL_TOL) -> int:
    s = np.linalg.svd(generator, compute_uv=False)
    return int(np.sum(s <= tol * max(s[0], 1.0)))


def _check_hermitian_trace(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def solve_atom_steady_state(
    params: AtomParams, initial: np.ndarray | None = None
) -> AtomSteadyState:
    """Steady state of the laser-driven atom.

    The null vector is found from the bordered system
    ``[[L, t], [t^T, 0]] [x, lam] = [0, 1]`` with ``t`` the trace row.  When the
    null space is degenerate (undriven atom) an ``initial`` 4x4 density matrix
    selects the stationary state reached from it.
    """
    gen = build_bloch_generator(params)
    nullity = kernel_dimension(gen)
    if nullity > 1:
        if initial is None:
            raise DegenerateKernel(
                f"Bloch generator has a {nullity}-dimensional kernel; pass an initial state"
            )
        rho0 = np.asarray(initial, dtype=complex).reshape(16)
        # every non-stationary mode decays at least as fast as min(gamma, gamma_bc > 0)
        rates = [params.gamma] + ([params.gamma_bc] if params.gamma_bc > 0 else [])
        x = expm(gen * (200.0 / min(rates))) @ rho0
    else:
        bordered = np.zeros((17, 17), dtype=complex)
        bordered[:16, :16] = gen
        bordered[:16, 16] = _TRACE_ROW
        bordered[16, :16] = _TRACE_ROW
        rhs = np.zeros(17, dtype=complex)
        rhs[16] = 1.0
        x = np.linalg.solve(bordered, rhs)[:16]

    rho = _check_hermitian_trace(x.reshape(4, 4))
    residual = float(np.linalg.norm(gen @ rho.reshape(16)))
    if residual > NULL_TOL:
        raise SolverFailure(f"steady-state residual {residual:.3e} exceeds {NULL_TOL:g}")
    return AtomSteadyState.from_matrix(rho, residual)

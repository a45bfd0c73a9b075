"""Brute-force two-mode density-matrix evolution in a truncated Fock basis.

This is an independent check on the closed moment equations: the master
equation is applied term by term to the full density matrix and the moments
are read back from it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .coefficients import MasterCoefficients
from .errors import StepFailure, TruncationOverflow
from .fock_backend import master_rhs
from .moments import MomentState

DEFAULT_N_MAX = 12
DEFAULT_LEAK_BUDGET = 1e-6
ESCALATION_STEP = 4
MAX_ESCALATIONS = 2
POSITIVITY_TOL = -1e-8


class PositivityWarning(UserWarning):
    """The evolved density matrix acquired a negative eigenvalue."""


@dataclass(frozen=True)
class TruncatedState:
    """Two-mode density matrix stored as ``rho[n1, n2, m1, m2]``."""

    n_max: int
    rho: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        dim = self.n_max + 1
        if self.rho.shape != (dim, dim, dim, dim):
            raise ValueError(f"rho must have shape {(dim,) * 4}, got {self.rho.shape}")

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** 2

    @property
    def matrix(self) -> np.ndarray:
        return self.rho.reshape(self.dim, self.dim)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def hermiticity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m - m.conj().T)))

    @property
    def populations(self) -> np.ndarray:
        """Photon-number distribution ``P(n1, n2)``."""
        return np.einsum("abab->ab", self.rho).real

    @property
    def leak(self) -> float:
        p = self.populations
        return float(p[-1, :].sum() + p[:-1, -1].sum())

    def min_eigenvalue(self) -> float:
        m = self.matrix
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def vacuum(n_max: int = DEFAULT_N_MAX) -> TruncatedState:
    dim = n_max + 1
    rho = np.zeros((dim,) * 4, dtype=complex)
    rho[0, 0, 0, 0] = 1.0
    return TruncatedState(n_max, rho)


def from_pure(amplitudes: dict, n_max: int = DEFAULT_N_MAX) -> TruncatedState:
    """Pure state from ``{(n1, n2): amplitude}``; normalized on construction."""
    dim = n_max + 1
    psi = np.zeros((dim, dim), dtype=complex)
    for (n1, n2), amp in amplitudes.items():
        psi[n1, n2] = amp
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("empty state")
    psi /= norm
    return TruncatedState(n_max, np.einsum("ab,cd->abcd", psi, psi.conj()))


def embed(state: TruncatedState, n_max: int) -> TruncatedState:
    """Copy ``state`` into a larger truncation."""
    if n_max < state.n_max:
        raise ValueError("can only embed into a larger space")
    dim, k = n_max + 1, state.n_max + 1
    rho = np.zeros((dim,) * 4, dtype=complex)
    rho[:k, :k, :k, :k] = state.rho
    return TruncatedState(n_max, rho, state.t)


def _coeff_vector(mc: MasterCoefficients) -> np.ndarray:
    e = complex(math.cos(mc.phi), -math.sin(mc.phi))
    return np.array(
        [mc.c_loss1, mc.c_gain1, mc.c_loss2, mc.c_gain2,
         e * mc.c1, e * mc.c2, e * mc.c3, e * mc.c4],
        dtype=complex,
    )


def apply_master_rhs(state: TruncatedState, mc: MasterCoefficients) -> np.ndarray:
    """``d rho / dt`` as a tensor of the same shape as ``state.rho``.

    ``c_loss1/2`` already carry the cavity damping, so no separate cavity term
    is added.
    """
    return master_rhs(np.ascontiguousarray(state.rho), _coeff_vector(mc))


def moments_from_fock(state: TruncatedState) -> MomentState:
    rho = state.rho
    num = np.arange(state.n_max + 1, dtype=float)
    p = state.populations
    n1 = float(num @ p.sum(axis=1))
    n2 = float(p.sum(axis=0) @ num)
    sq = np.sqrt(num[1:])
    # <a1 a2> = sum sqrt(n1+1) sqrt(n2+1) rho[n1+1, n2+1, n1, n2]
    sub = np.einsum("abab->ab", rho[1:, 1:, :-1, :-1])
    w = complex(np.sum(sq[:, None] * sq[None, :] * sub))
    return MomentState(n1, n2, w, state.t)


@dataclass
class FockRun:
    states: list
    moments: list
    max_leak: float
    min_eigenvalue: float
    max_trace_error: float
    n_max: int
    warnings: list = field(default_factory=list)

    @property
    def final(self) -> TruncatedState:
        return self.states[-1]


def evolve_fock_trajectory(
    initial: TruncatedState,
    mc: MasterCoefficients,
    t_end: float,
    tol: float = 1e-10,
    t_eval=None,
    leak_budget: float = DEFAULT_LEAK_BUDGET,
    keep_states: bool = False,
) -> FockRun:
    """Integrate the truncated master equation with DOP853 on complex data."""
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    shape = initial.rho.shape
    coeffs = _coeff_vector(mc)
    t0 = initial.t
    if t_eval is None:
        t_eval = np.linspace(t0, t0 + t_end, 51)
    t_eval = np.asarray(t_eval, dtype=float)

    def rhs(_t, y):
        return master_rhs(y.reshape(shape), coeffs).reshape(-1)

    sol = solve_ivp(
        rhs, (t0, t0 + t_end), initial.rho.reshape(-1).astype(complex),
        method="DOP853", t_eval=t_eval, rtol=tol, atol=tol * 1e-2,
    )
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        raise StepFailure(f"Fock integration failed: {sol.message}")

    states, moms, notes = [], [], []
    max_leak, min_eig, max_trace_err = 0.0, math.inf, 0.0
    for k, t in enumerate(sol.t):
        rho = sol.y[:, k].reshape(shape)
        rho = 0.5 * (rho + rho.transpose(2, 3, 0, 1).conj())
        st = TruncatedState(initial.n_max, rho, float(t))
        max_leak = max(max_leak, st.leak)
        max_trace_err = max(max_trace_err, abs(st.trace - 1.0))
        moms.append(moments_from_fock(st))
        if keep_states or k == len(sol.t) - 1:
            states.append(st)
        if st.leak > leak_budget:
            raise TruncationOverflow(
                f"edge population {st.leak:.3e} exceeds budget {leak_budget:.1e} "
                f"at t={t:.4g} with n_max={initial.n_max}",
                n_max=initial.n_max, leak=st.leak,
            )
    for st in (states if keep_states else states[-1:]):
        min_eig = min(min_eig, st.min_eigenvalue())
    if min_eig < POSITIVITY_TOL:
        msg = f"density matrix not positive: min eigenvalue {min_eig:.3e}"
        notes.append(msg)
        warnings.warn(msg, PositivityWarning, stacklevel=2)
    return FockRun(states, moms, max_leak, min_eig, max_trace_err, initial.n_max, notes)


def evolve_fock(
    initial: TruncatedState,
    mc: MasterCoefficients,
    t_end: float,
    tol: float = 1e-10,
    leak_budget: float = DEFAULT_LEAK_BUDGET,
) -> TruncatedState:
    """Final state after ``t_end``; raises ``TruncationOverflow`` on leakage."""
    return evolve_fock_trajectory(initial, mc, t_end, tol, leak_budget=leak_budget).final


def evolve_fock_escalating(
    initial: TruncatedState,
    mc: MasterCoefficients,
    t_end: float,
    tol: float = 1e-10,
    t_eval=None,
    leak_budget: float = DEFAULT_LEAK_BUDGET,
    max_escalations: int = MAX_ESCALATIONS,
) -> FockRun:
    """Retry with ``n_max + 4`` on leak overflow, at most ``max_escalations`` times."""
    state = initial
    for attempt in range(max_escalations + 1):
        try:
            return evolve_fock_trajectory(state, mc, t_end, tol, t_eval, leak_budget)
        except TruncationOverflow:
            if attempt == max_escalations:
                raise
            state = embed(state, state.n_max + ESCALATION_STEP)
    raise AssertionError("unreachable")

"""Dual alternating-direction solver.

Works on the dual of each model and recovers the primal iterate from the
multiplier. One sweep updates z -> y -> x:

    z+ = P(A* y + x/beta)          componentwise projection, model's dual set
    y+ = model-specific update of (A z+ - (A x - b)/beta)
    x+ = x - gamma beta (z+ - A* y+)

The y-updates are exact minimizers only when A A* = I, which every partial
transform operator here satisfies; A x is then maintained by the identity
A x+ = A x - gamma beta (A z+ - y+) so each sweep costs exactly one forward
and one adjoint application. For general operators an experimental variant
replaces the exact y-update with one steepest-descent step with exact
steplength (``dadm_nonorth_step``), at three applications per sweep.

The l1/l1 model is solved as basis pursuit on the augmented operator
[A, nu I]/sqrt(1+nu^2); nonnegative models only swap the z-projection to
the half-space Re(z) <= w and clip the final output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, StepSizeError
from ..models import Diagnostics, l1_norm, reformulate_l1l1, relchg, relerr
from ..operators import as_complex_vector
from ..prox import project_halfspace, project_linf_ball, shrink_l2
from .common import CountingOperator, RunRecord, SolverOptions, check_finite

__all__ = ["DadmParams", "DadmState", "GOLDEN_RATIO",
           "dadm_bp_step", "dadm_bpdn_step", "dadm_qp_step",
           "dadm_nonorth_step", "dadm_solve"]

GOLDEN_RATIO = (1.0 + np.sqrt(5.0)) / 2.0
DEFAULT_GAMMA = 1.618


@dataclass(frozen=True, eq=False)
class DadmParams:
    """Validated parameters for the dual solver.

    ``halfspace_prefix`` marks how many leading components of z project onto
    the half-space Re(z) <= w instead of the magnitude ball |z| <= w: 0 for
    the plain models, n for nonnegative ones, and the signal-block length
    for the reformulated nonnegative l1/l1 model.
    """

    beta: float
    gamma: float
    mu: float = 0.0
    delta: float = 0.0
    weights: np.ndarray | None = None
    halfspace_prefix: int = 0

    def __post_init__(self):
        if not (self.beta > 0):
            raise StepSizeError(f"beta must be positive, got {self.beta}")
        if not (0 < self.gamma < GOLDEN_RATIO):
            raise StepSizeError(
                f"gamma must lie in (0, (1+sqrt(5))/2), got {self.gamma}")
        if self.mu < 0 or self.delta < 0:
            raise StepSizeError("mu and delta must be nonnegative")
        if self.mu > 0 and self.delta > 0:
            raise StepSizeError("mu and delta are mutually exclusive")
        if self.halfspace_prefix < 0:
            raise StepSizeError("halfspace_prefix must be nonnegative")

    @classmethod
    def from_operator(cls, A, b, *, gamma=None, beta=None, mu=0.0, delta=0.0,
                      weights=None, halfspace_prefix=0):
        """Fill the standard defaults: gamma=1.618, beta=||b||_1/m."""
        gamma = DEFAULT_GAMMA if gamma is None else float(gamma)
        if beta is None:
            b_l1 = float(np.sum(np.abs(b)))
            beta = b_l1 / A.m if b_l1 > 0 else 1.0
        return cls(beta=float(beta), gamma=gamma, mu=float(mu), delta=float(delta),
                   weights=weights, halfspace_prefix=int(halfspace_prefix))


@dataclass
class DadmState:
    """Iterate of the dual solver with its two cached products."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    k: int = 0
    Ax: np.ndarray | None = None
    Aty: np.ndarray | None = None


def _project_dual(v, p):
    """Project onto the model's dual feasible set, componentwise."""
    w = 1.0 if p.weights is None else p.weights
    k = p.halfspace_prefix
    if k == 0:
        return project_linf_ball(v, w)
    if k >= v.shape[0]:
        return project_halfspace(v, w)
    w_head = w if np.ndim(w) == 0 else w[:k]
    w_tail = w if np.ndim(w) == 0 else w[k:]
    return np.concatenate([project_halfspace(v[:k], w_head),
                           project_linf_ball(v[k:], w_tail)])


def _fill_caches(state, A):
    if state.Aty is None:
        state.Aty = A.adjoint(state.y)
    if state.Ax is None:
        state.Ax = A.apply(state.x)
    return state


def _dadm_sweep(state, A, b, p, y_rule):
    if not A.orthonormal_rows:
        raise StepSizeError("exact dual steps require orthonormal rows (A A* = I); "
                            "see dadm_nonorth_step for the general-operator variant")
    state = _fill_caches(state, A)
    z_new = _project_dual(state.Aty + state.x / p.beta, p)
    Az = A.apply(z_new)
    y_new = y_rule(Az - (state.Ax - b) / p.beta, p)
    Aty_new = A.adjoint(y_new)
    x_new = state.x - p.gamma * p.beta * (z_new - Aty_new)
    # Exact under A A* = I; keeps the sweep at two applications.
    Ax_new = state.Ax - p.gamma * p.beta * (Az - y_new)
    check_finite(x_new, y_new, state.k + 1)
    return DadmState(x=x_new, y=y_new, z=z_new, k=state.k + 1, Ax=Ax_new, Aty=Aty_new)


def dadm_qp_step(state, A, b, p):
    """One sweep for the quadratically penalized model (needs p.mu > 0)."""
    if not (p.mu > 0):
        raise StepSizeError("dadm_qp_step needs mu > 0")
    return _dadm_sweep(state, A, b, p, lambda v, p: (p.beta / (p.mu + p.beta)) * v)


def dadm_bpdn_step(state, A, b, p):
    """One sweep for the delta-ball constrained model."""
    return _dadm_sweep(state, A, b, p, lambda v, p: shrink_l2(v, p.delta / p.beta))


def dadm_bp_step(state, A, b, p):
    """One sweep for the equality-constrained model."""
    return _dadm_sweep(state, A, b, p, lambda v, p: v)


def dadm_nonorth_step(state, A, b, p):
    """General-operator sweep: steepest descent with exact steplength on y.

    Supports mu >= 0 (bp and qp); the delta-ball model has no closed
    steplength and is rejected. Experimental: always run under a finite
    iteration cap. Costs three operator applications per sweep.
    """
    if p.delta > 0:
        raise ConfigError("the steepest-descent dual step supports only the bp and qp models")
    state = _fill_caches(state, A)
    z_new = _project_dual(state.Aty + state.x / p.beta, p)
    g = p.mu * state.y + state.Ax - b + p.beta * A.apply(state.Aty - z_new)
    g_sq = float(np.linalg.norm(g) ** 2)
    if g_sq > 0.0:
        Atg = A.adjoint(g)
        denom = p.mu * g_sq + p.beta * float(np.linalg.norm(Atg) ** 2)
        if denom > 0.0:
            alpha = g_sq / denom
            y_new = state.y - alpha * g
            Aty_new = state.Aty - alpha * Atg
        else:
            # g lies in the null space of A* with mu = 0: no curvature along
            # it, leave y alone rather than taking an unbounded step.
            y_new, Aty_new = state.y, state.Aty
    else:
        y_new, Aty_new = state.y, state.Aty
    x_new = state.x - p.gamma * p.beta * (z_new - Aty_new)
    Ax_new = A.apply(x_new)
    check_finite(x_new, y_new, state.k + 1)
    return DadmState(x=x_new, y=y_new, z=z_new, k=state.k + 1, Ax=Ax_new, Aty=Aty_new)


_STEPS = {"bp": dadm_bp_step, "bpdn": dadm_bpdn_step, "qp": dadm_qp_step}


def _dadm_diag(state, x_prev, A, b, p, family, extract, x_true):
    misfit = state.Ax - b
    x_l1 = l1_norm(state.x, p.weights)
    if family == "qp":
        rp_norm = float(np.linalg.norm(misfit + p.mu * state.y))
    elif family == "bpdn":
        rp_norm = max(0.0, float(np.linalg.norm(misfit)) - p.delta)
    else:
        rp_norm = float(np.linalg.norm(misfit))
    b_norm = float(np.linalg.norm(b))
    r_p = rp_norm / (b_norm if b_norm > 0 else 1.0)
    r_d = float(np.linalg.norm(state.Aty - state.z)) / np.sqrt(A.m)

    if family == "qp":
        y_sq = float(np.linalg.norm(state.y) ** 2)
        delta_gap = float(np.real(np.vdot(b, state.y))) - p.mu * y_sq - x_l1
        f_p = x_l1 + 0.5 * p.mu * y_sq
        gap = abs(delta_gap) / (f_p if f_p > 0 else 1.0)
        objective = x_l1 + 0.5 * float(np.linalg.norm(misfit) ** 2) / p.mu
        res = max(r_p, r_d, gap)
    else:
        gap = np.nan
        objective = x_l1
        res = max(r_p, r_d)

    err = relerr(extract(state.x), x_true) if x_true is not None else np.nan
    return Diagnostics(r_p=r_p, r_d=r_d, gap=gap, res=res,
                       relchg=relchg(state.x, x_prev), objective=objective, relerr=err)


def dadm_solve(model, A, b, opts=None):
    """Run the dual solver on any of the eight models.

    The l1/l1 families are rewritten as basis pursuit on the augmented
    operator before iterating; their history rows (relative change,
    residues, objective) then describe the augmented problem, while
    ``relerr`` and the returned x always live in the original signal space.
    Nonnegative models clip Re(x) at zero on output.

    Operators without orthonormal rows are rejected unless
    ``opts.allow_nonorthonormal`` requests the experimental steepest-descent
    variant (bp and qp only).

    Returns
    -------
    RunRecord
    """
    opts = opts if opts is not None else SolverOptions()
    b = as_complex_vector(b, A.m)
    n_signal = A.n

    if model.family == "l1l1":
        op, data = reformulate_l1l1(A, b, model.nu)
        family = "bp"
        if model.weights is None:
            weights = None
        else:
            weights = np.concatenate([model.weights, np.ones(A.m)])
        halfspace_prefix = n_signal if model.nonneg else 0
        nu = model.nu

        def extract(xh):
            return xh[:n_signal] / nu
    else:
        op, data = A, b
        family = model.family
        weights = model.weights
        halfspace_prefix = n_signal if model.nonneg else 0

        def extract(xh):
            return xh

    counting = CountingOperator(op)
    params = DadmParams.from_operator(
        op, data, gamma=opts.gamma, beta=opts.beta, mu=model.mu,
        delta=model.delta, weights=weights, halfspace_prefix=halfspace_prefix)

    if op.orthonormal_rows:
        step = _STEPS[family]
    elif opts.allow_nonorthonormal:
        if family == "bpdn":
            raise ConfigError("the steepest-descent dual variant does not cover the bpdn model")
        step = dadm_nonorth_step
    else:
        raise ConfigError(
            "dual solver needs an orthonormal-rows operator for exact steps; "
            "set allow_nonorthonormal=True to opt into the experimental variant")

    n, m = op.n, op.m
    if opts.x0 is None:
        x0 = np.zeros(n, dtype=np.complex128)
        Ax0 = np.zeros(m, dtype=np.complex128)
    else:
        x0 = as_complex_vector(opts.x0, n)
        Ax0 = counting.apply(x0)
    if opts.y0 is None:
        y0 = np.zeros(m, dtype=np.complex128)
        Aty0 = np.zeros(n, dtype=np.complex128)
    else:
        y0 = as_complex_vector(opts.y0, m)
        Aty0 = counting.adjoint(y0)
    state = DadmState(x=x0, y=y0, z=np.zeros(n, dtype=np.complex128), k=0,
                      Ax=Ax0, Aty=Aty0)

    history, aat_history = [], []
    status = "max_iter"
    t0 = time.perf_counter()
    for _ in range(opts.max_iter):
        x_prev = state.x
        state = step(state, counting, data, params)
        diag = _dadm_diag(state, x_prev, counting, data, params, family,
                          extract, opts.x_true)
        history.append(diag)
        aat_history.append(counting.count)
        if opts.stop_satisfied(diag):
            status = "converged"
            break
    seconds = time.perf_counter() - t0

    x_final = extract(state.x)
    if model.nonneg:
        x_final = np.maximum(x_final.real, 0.0).astype(np.complex128)
    return RunRecord(solver="dadm", model=model.describe(), status=status,
                     iterations=state.k, aat=counting.count, seconds=seconds,
                     x=x_final, history=history, aat_history=aat_history)

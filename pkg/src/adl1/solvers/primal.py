"""Primal alternating-direction solver.

Splits the misfit into an explicit residual variable r, then sweeps
r -> x -> y each iteration:

    r+ = model-specific residual update using (y/beta - (A x - b))
    x+ = Shrink(x - tau g, tau/beta),  g = A*(A x + r+ - b - y/beta)
    y+ = y - gamma beta (A x+ + r+ - b)

The x-update already sees the new r. Each iteration costs one forward and
one adjoint application (A x+ is cached for the next sweep). Convergence
requires tau lambda_max(A*A) + gamma < 2, enforced at parameter
construction; no orthonormality of A is needed, which makes this the
fallback solver for general dense operators.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError, StepSizeError
from ..models import Diagnostics, compute_res, l1_norm, relchg, relerr
from ..operators import as_complex_vector
from ..prox import project_l2_ball, project_linf_ball, shrink
from .common import CountingOperator, RunRecord, SolverOptions, check_finite

__all__ = ["PadmParams", "PadmState", "padm_bp_step", "padm_bpdn_step", "padm_qp_step", "padm_solve"]

DEFAULT_TAU = 0.8
DEFAULT_GAMMA = 1.199


@dataclass(frozen=True, eq=False)
class PadmParams:
    """Validated step sizes for the primal solver.

    Build through ``from_operator`` in normal use: it fills the standard
    defaults (tau=0.8, gamma=1.199, beta=2m/||b||_1) and enforces the
    convergence guard tau lambda_max + gamma < 2 unless explicitly
    overridden.
    """

    beta: float
    gamma: float
    tau: float
    mu: float = 0.0
    delta: float = 0.0
    weights: np.ndarray | None = None
    lambda_max: float | None = None

    def __post_init__(self):
        if not (self.beta > 0):
            raise StepSizeError(f"beta must be positive, got {self.beta}")
        if not (self.tau > 0):
            raise StepSizeError(f"tau must be positive, got {self.tau}")
        if not (0 < self.gamma < 2):
            raise StepSizeError(f"gamma must lie in (0, 2), got {self.gamma}")
        if self.mu < 0 or self.delta < 0:
            raise StepSizeError("mu and delta must be nonnegative")
        if self.mu > 0 and self.delta > 0:
            raise StepSizeError("mu and delta are mutually exclusive")

    @classmethod
    def from_operator(cls, A, b, *, tau=None, gamma=None, beta=None,
                      mu=0.0, delta=0.0, weights=None, enforce=True):
        """Fill defaults from (A, b) and run the convergence guard.

        Raises StepSizeError when tau lambda_max(A*A) + gamma >= 2, unless
        ``enforce`` is False (the guard and its lambda_max estimate are then
        skipped entirely).
        """
        tau = DEFAULT_TAU if tau is None else float(tau)
        gamma = DEFAULT_GAMMA if gamma is None else float(gamma)
        if beta is None:
            b_l1 = float(np.sum(np.abs(b)))
            beta = 2.0 * A.m / b_l1 if b_l1 > 0 else 1.0
        lam = None
        if enforce:
            lam = A.lambda_max()
            if tau * lam + gamma >= 2.0:
                raise StepSizeError(
                    f"step sizes violate tau*lambda_max + gamma < 2: "
                    f"{tau} * {lam:.6g} + {gamma} = {tau * lam + gamma:.6g}")
        return cls(beta=float(beta), gamma=gamma, tau=tau, mu=float(mu),
                   delta=float(delta), weights=weights, lambda_max=lam)


@dataclass
class PadmState:
    """Iterate of the primal solver. ``Ax`` caches A @ x."""

    x: np.ndarray
    r: np.ndarray
    y: np.ndarray
    k: int = 0
    Ax: np.ndarray | None = None


def _padm_sweep(state, A, b, p, r_new):
    Ax = state.Ax if state.Ax is not None else A.apply(state.x)
    g = A.adjoint(Ax + r_new - b - state.y / p.beta)
    thresh = p.tau / p.beta if p.weights is None else (p.tau / p.beta) * p.weights
    x_new = shrink(state.x - p.tau * g, thresh)
    Ax_new = A.apply(x_new)
    y_new = state.y - p.gamma * p.beta * (Ax_new + r_new - b)
    check_finite(x_new, y_new, state.k + 1)
    return PadmState(x=x_new, r=r_new, y=y_new, k=state.k + 1, Ax=Ax_new)


def padm_qp_step(state, A, b, p):
    """One sweep for the quadratically penalized model (needs p.mu > 0)."""
    if not (p.mu > 0):
        raise StepSizeError("padm_qp_step needs mu > 0")
    Ax = state.Ax if state.Ax is not None else A.apply(state.x)
    if state.Ax is None:
        state = replace(state, Ax=Ax)
    coeff = p.mu * p.beta / (1.0 + p.mu * p.beta)
    r_new = coeff * (state.y / p.beta - (Ax - b))
    return _padm_sweep(state, A, b, p, r_new)


def padm_bpdn_step(state, A, b, p):
    """One sweep for the delta-ball constrained model."""
    Ax = state.Ax if state.Ax is not None else A.apply(state.x)
    if state.Ax is None:
        state = replace(state, Ax=Ax)
    r_new = project_l2_ball(state.y / p.beta - (Ax - b), p.delta)
    return _padm_sweep(state, A, b, p, r_new)


def padm_bp_step(state, A, b, p):
    """One sweep for the equality-constrained model (r pinned at zero)."""
    return _padm_sweep(state, A, b, p, np.zeros(A.m, dtype=np.complex128))


_STEPS = {"bp": padm_bp_step, "bpdn": padm_bpdn_step, "qp": padm_qp_step}


def _padm_diag(state, x_prev, A, b, p, model, opts):
    misfit = state.Ax - b
    if model.family == "qp":
        rp_norm = float(np.linalg.norm(misfit + p.mu * state.y))
        objective = l1_norm(state.x, p.weights) + 0.5 * float(np.linalg.norm(misfit) ** 2) / p.mu
    elif model.family == "bpdn":
        rp_norm = max(0.0, float(np.linalg.norm(misfit)) - p.delta)
        objective = l1_norm(state.x, p.weights)
    else:
        rp_norm = float(np.linalg.norm(misfit))
        objective = l1_norm(state.x, p.weights)
    b_norm = float(np.linalg.norm(b))
    r_p = rp_norm / (b_norm if b_norm > 0 else 1.0)

    if opts.stop == "res":
        # The primal solver has no dual auxiliary; measure dual feasibility
        # of the multiplier directly. Costs one adjoint per iteration on top
        # of the usual two applications.
        Aty = A.adjoint(state.y)
        z = project_linf_ball(Aty, 1.0 if p.weights is None else p.weights)
        full = compute_res(state.x, state.y, z, A, b, p.mu, delta=p.delta,
                           weights=p.weights, Ax=state.Ax, Aty=Aty,
                           x_prev=x_prev,
                           x_true=opts.x_true)
        return full
    err = relerr(state.x, opts.x_true) if opts.x_true is not None else np.nan
    return Diagnostics(r_p=r_p, r_d=np.nan, gap=np.nan, res=np.nan,
                       relchg=relchg(state.x, x_prev), objective=objective, relerr=err)


def padm_solve(model, A, b, opts=None):
    """Run the primal solver on a bp, bpdn, or qp model.

    Parameters
    ----------
    model : ModelSpec
        One of the three plain families. The l1/l1 and nonnegative models
        are handled by the dual solver (via reformulation and the modified
        dual projection) and are rejected here.
    A : SensingOperator
    b : array_like
        Length-m data vector.
    opts : SolverOptions, optional

    Returns
    -------
    RunRecord
        Status "converged" when the stopping rule fired, else "max_iter".
    """
    opts = opts if opts is not None else SolverOptions()
    if model.family not in _STEPS:
        raise ConfigError("the l1/l1 model runs through the dual solver after reformulation")
    if model.nonneg:
        raise ConfigError("nonnegative models run through the dual solver")
    b = as_complex_vector(b, A.m)
    counting = CountingOperator(A)
    params = PadmParams.from_operator(
        A, b, tau=opts.tau, gamma=opts.gamma, beta=opts.beta,
        mu=model.mu, delta=model.delta, weights=model.weights,
        enforce=opts.enforce_step_condition)

    n, m = A.n, A.m
    if opts.x0 is None:
        x0 = np.zeros(n, dtype=np.complex128)
        Ax0 = np.zeros(m, dtype=np.complex128)
    else:
        x0 = as_complex_vector(opts.x0, n)
        Ax0 = counting.apply(x0)
    y0 = np.zeros(m, dtype=np.complex128) if opts.y0 is None else as_complex_vector(opts.y0, m)
    state = PadmState(x=x0, r=np.zeros(m, dtype=np.complex128), y=y0, k=0, Ax=Ax0)

    step = _STEPS[model.family]
    history, aat_history = [], []
    status = "max_iter"
    t0 = time.perf_counter()
    for _ in range(opts.max_iter):
        x_prev = state.x
        state = step(state, counting, b, params)
        diag = _padm_diag(state, x_prev, counting, b, params, model, opts)
        history.append(diag)
        aat_history.append(counting.count)
        if opts.stop_satisfied(diag):
            status = "converged"
            break
    seconds = time.perf_counter() - t0
    return RunRecord(solver="padm", model=model.describe(), status=status,
                     iterations=state.k, aat=counting.count, seconds=seconds,
                     x=state.x, history=history, aat_history=aat_history)

"""Shared solver plumbing: options, run records, matvec accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DivergenceError
from ..models import Diagnostics

__all__ = ["SolverOptions", "RunRecord", "CountingOperator"]

STOP_RULES = ("relchg", "res")


@dataclass
class SolverOptions:
    """Knobs shared by every solver.

    beta/gamma/tau default to None, meaning "use the solver's standard rule"
    (penalty from ||b||_1, steplengths from the published defaults). ``stop``
    selects the termination test: relative change of iterates or the
    optimality residue. ``x_true`` is optional instrumentation; when given,
    each history row carries the relative error against it (percent).
    """

    beta: float | None = None
    gamma: float | None = None
    tau: float | None = None
    tol: float = 1e-6
    max_iter: int = 1000
    stop: str = "relchg"
    x0: np.ndarray | None = None
    y0: np.ndarray | None = None
    x_true: np.ndarray | None = None
    enforce_step_condition: bool = True
    allow_nonorthonormal: bool = False
    literal_threshold: bool = False

    def __post_init__(self):
        if self.stop not in STOP_RULES:
            raise ConfigError(f"stop must be one of {STOP_RULES}, got {self.stop!r}")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.tol < 0:
            raise ConfigError("tol must be nonnegative")

    def stop_satisfied(self, diag):
        if self.stop == "relchg":
            return diag.relchg < self.tol
        return diag.res < self.tol


@dataclass
class RunRecord:
    """Everything one solve produced.

    ``aat`` counts operator applications (forward plus adjoint) made by the
    solve loop itself: exactly 2 per iteration for the alternating-direction
    solvers under default settings. Spectral setup is memoized on the
    operator and final-quality metrics are recomputed by callers, so neither
    is charged here. ``history[k]`` describes iterate k+1; ``aat_history[k]``
    is the cumulative count after that iteration.
    """

    solver: str
    model: str
    status: str
    iterations: int
    aat: int
    seconds: float
    x: np.ndarray
    history: list[Diagnostics] = field(default_factory=list)
    aat_history: list[int] = field(default_factory=list)

    @property
    def converged(self):
        return self.status == "converged"

    def final(self):
        if not self.history:
            raise ValueError("run has no recorded iterations")
        return self.history[-1]

    def to_dict(self, include_history=True):
        """JSON-ready summary. The solution vector is stored separately."""
        d = {
            "solver": self.solver,
            "model": self.model,
            "status": self.status,
            "iterations": self.iterations,
            "aat": self.aat,
            "seconds": self.seconds,
        }
        if include_history:
            cols = {}
            for name in ("r_p", "r_d", "gap", "res", "relchg", "objective", "relerr"):
                cols[name] = [float(getattr(h, name)) for h in self.history]
            cols["aat"] = [int(a) for a in self.aat_history]
            d["history"] = cols
        return d


class CountingOperator:
    """Thin wrapper that counts forward and adjoint applications."""

    def __init__(self, op):
        self.op = op
        self.count = 0

    @property
    def m(self):
        return self.op.m

    @property
    def n(self):
        return self.op.n

    @property
    def orthonormal_rows(self):
        return self.op.orthonormal_rows

    def apply(self, x):
        self.count += 1
        return self.op.apply(x)

    def adjoint(self, y):
        self.count += 1
        return self.op.adjoint(y)

    def lambda_max(self, **kw):
        # Setup cost, memoized on the wrapped operator; not counted.
        return self.op.lambda_max(**kw)


def check_finite(x, y, k):
    """Raise DivergenceError if an iterate went nonfinite at iteration k."""
    if not (np.all(np.isfinite(x.real)) and np.all(np.isfinite(x.imag))):
        raise DivergenceError(f"primal iterate became nonfinite at iteration {k}")
    if not (np.all(np.isfinite(y.real)) and np.all(np.isfinite(y.imag))):
        raise DivergenceError(f"multiplier became nonfinite at iteration {k}")

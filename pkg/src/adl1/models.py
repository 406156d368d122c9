"""Problem catalog and run diagnostics.

Four model families, each with an optional nonnegativity constraint and
optional positive weights on the l1 term (eight models total):

- ``bp``     min ||x||_1           s.t. Ax = b
- ``bpdn``   min ||x||_1           s.t. ||Ax - b||_2 <= delta
- ``qp``     min ||x||_1 + ||Ax - b||_2^2 / (2 mu)
- ``l1l1``   min ||x||_1 + ||Ax - b||_1 / nu

The l1/l1 model is solved by rewriting it as basis pursuit on the augmented
operator [A, nu I]/sqrt(1+nu^2), which keeps orthonormal rows whenever A has
them; see ``reformulate_l1l1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .operators import AugmentedOperator

__all__ = [
    "ModelSpec",
    "Diagnostics",
    "compute_res",
    "relchg",
    "relerr",
    "snr_db",
    "l1_norm",
    "objective_value",
    "reformulate_l1l1",
    "extract_l1l1",
]

FAMILIES = ("bp", "bpdn", "qp", "l1l1")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """One of the eight supported l1 models.

    Exactly one of mu/delta/nu is meaningful, selected by ``family``.
    ``weights`` replaces ||x||_1 by sum(w_i |x_i|) and must be positive.
    """

    family: str
    mu: float = 0.0
    delta: float = 0.0
    nu: float = 0.0
    nonneg: bool = False
    weights: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown model family {self.family!r}, expected one of {FAMILIES}")
        if self.family == "qp" and not (self.mu > 0):
            raise ConfigError("qp model needs mu > 0")
        if self.family == "bpdn" and self.delta < 0:
            raise ConfigError("bpdn model needs delta >= 0")
        if self.family == "l1l1" and not (self.nu > 0):
            raise ConfigError("l1l1 model needs nu > 0")
        for name in ("mu", "delta", "nu"):
            val = getattr(self, name)
            if val != 0.0 and name != self._param_name():
                raise ConfigError(f"{name} is not a parameter of the {self.family} model")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.ndim != 1 or np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise ConfigError("weights must be a 1-D vector of positive finite values")
            object.__setattr__(self, "weights", w)

    def _param_name(self):
        return {"bp": "", "bpdn": "delta", "qp": "mu", "l1l1": "nu"}[self.family]

    @classmethod
    def bp(cls, nonneg=False, weights=None):
        return cls("bp", nonneg=nonneg, weights=weights)

    @classmethod
    def bpdn(cls, delta, nonneg=False, weights=None):
        return cls("bpdn", delta=float(delta), nonneg=nonneg, weights=weights)

    @classmethod
    def qp(cls, mu, nonneg=False, weights=None):
        return cls("qp", mu=float(mu), nonneg=nonneg, weights=weights)

    @classmethod
    def l1l1(cls, nu, nonneg=False, weights=None):
        return cls("l1l1", nu=float(nu), nonneg=nonneg, weights=weights)

    def describe(self):
        """Short label like ``qp(mu=0.0001)`` used in reports."""
        name = self._param_name()
        inner = f"{name}={getattr(self, name):g}" if name else ""
        tag = f"{self.family}({inner})"
        if self.nonneg:
            tag += "+nonneg"
        if self.weights is not None:
            tag += "+weighted"
        return tag

    def to_dict(self):
        d = {"family": self.family, "nonneg": self.nonneg}
        name = self._param_name()
        if name:
            d[name] = float(getattr(self, name))
        if self.weights is not None:
            d["weights"] = [float(w) for w in self.weights]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        family = d.pop("family", None)
        if family not in FAMILIES:
            raise ConfigError(f"model config needs a family in {FAMILIES}, got {family!r}")
        nonneg = bool(d.pop("nonneg", False))
        weights = d.pop("weights", None)
        if weights is not None:
            weights = np.asarray(weights, dtype=np.float64)
        kwargs = {}
        for name in ("mu", "delta", "nu"):
            if name in d:
                kwargs[name] = float(d.pop(name))
        if d:
            raise ConfigError(f"unknown model config keys: {sorted(d)}")
        return cls(family, nonneg=nonneg, weights=weights, **kwargs)


def l1_norm(x, weights=None):
    """sum |x_i|, or sum w_i |x_i| when weights are given."""
    mag = np.abs(x)
    if weights is None:
        return float(np.sum(mag))
    return float(np.dot(weights, mag))


def objective_value(model, A, b, x, Ax=None):
    """Objective of ``model`` at x. ``Ax`` may be passed to avoid a matvec."""
    val = l1_norm(x, model.weights)
    if model.family in ("qp", "l1l1"):
        if Ax is None:
            Ax = A.apply(x)
        misfit = Ax - b
        if model.family == "qp":
            val += float(np.linalg.norm(misfit) ** 2) / (2.0 * model.mu)
        else:
            val += float(np.sum(np.abs(misfit))) / model.nu
    return float(val)


@dataclass
class Diagnostics:
    """Optimality residues and progress measures at one iterate.

    Residues follow the primal-dual system of the penalized model:
    r_p = Ax + mu y - b (relative to ||b||), r_d = A*y - z (norm scaled by
    sqrt(m)), and the duality gap ratio |Delta|/f_p with
    Delta = Re(b* y) - mu ||y||^2 - ||x||_1 and f_p = ||x||_1 + mu ||y||^2 / 2.
    ``res`` is the max of the available components. Fields that do not apply
    (gap for the mu = 0 models, relerr without ground truth) are NaN.
    """

    r_p: float
    r_d: float
    gap: float
    res: float
    relchg: float
    objective: float
    relerr: float


def relchg(x_new, x_old):
    """Relative change ||x_new - x_old|| / ||x_old||.

    Falls back to ||x_new|| when the previous iterate is zero (normal at the
    cold start).
    """
    denom = np.linalg.norm(x_old)
    diff = np.linalg.norm(np.asarray(x_new) - np.asarray(x_old))
    if denom == 0.0:
        return float(diff)
    return float(diff / denom)


def relerr(x, x_true):
    """Relative error against the ground truth, in percent."""
    denom = np.linalg.norm(x_true)
    if denom == 0.0:
        raise ValueError("relerr undefined: ground truth has zero norm")
    return float(100.0 * np.linalg.norm(np.asarray(x) - np.asarray(x_true)) / denom)


def snr_db(b, p):
    """SNR of data b against noise p: 20 log10(||b - mean(b)|| / ||p||).

    Returns +inf for zero noise and -inf for constant data.
    """
    b = np.asarray(b)
    num = np.linalg.norm(b - np.mean(b))
    den = np.linalg.norm(p)
    if den == 0.0:
        return np.inf
    if num == 0.0:
        return -np.inf
    return float(20.0 * np.log10(num / den))


def compute_res(x, y, z, A, b, mu, *, delta=0.0, weights=None,
                Ax=None, Aty=None, x_prev=None, x_true=None):
    """Optimality diagnostics for a primal-dual iterate (x, y, z).

    Parameters
    ----------
    x, y, z : ndarray
        Primal iterate, multiplier, and dual auxiliary (z approximates A*y
        inside the unit-magnitude ball).
    A : SensingOperator
    b : ndarray
    mu : float
        Penalty parameter; 0 selects the constrained models, where the gap
        component is omitted (NaN) because the r = mu y identification that
        defines it degenerates.
    delta : float, keyword
        Ball radius for bpdn-style feasibility: with mu = 0 and delta > 0 the
        primal residue is dist(Ax, delta-ball around b) / ||b||.
    weights : ndarray, keyword
        Positive l1 weights, defaults to 1.
    Ax, Aty : ndarray, keyword
        Cached products A x and A* y; computed when omitted.
    x_prev, x_true : ndarray, keyword
        Fill ``relchg`` and ``relerr`` (percent) when available.

    Returns
    -------
    Diagnostics
        Residues are relative; when ||b|| = 0 the primal residue falls back
        to the absolute norm with a warning.
    """
    if Ax is None:
        Ax = A.apply(x)
    if Aty is None:
        Aty = A.adjoint(y)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        warnings.warn("b is zero; primal residue uses the absolute norm", RuntimeWarning, stacklevel=2)
        b_norm = 1.0

    misfit = Ax - b
    if mu > 0:
        rp_norm = float(np.linalg.norm(misfit + mu * y))
    elif delta > 0:
        rp_norm = max(0.0, float(np.linalg.norm(misfit)) - delta)
    else:
        rp_norm = float(np.linalg.norm(misfit))
    r_p = rp_norm / b_norm

    r_d = float(np.linalg.norm(Aty - z)) / np.sqrt(A.m)

    x_l1 = l1_norm(x, weights)
    if mu > 0:
        y_sq = float(np.linalg.norm(y) ** 2)
        delta_gap = float(np.real(np.vdot(b, y))) - mu * y_sq - x_l1
        f_p = x_l1 + 0.5 * mu * y_sq
        gap = abs(delta_gap) / (f_p if f_p > 0 else 1.0)
        objective = x_l1 + 0.5 * float(np.linalg.norm(misfit) ** 2) / mu
        res = max(r_p, r_d, gap)
    else:
        gap = np.nan
        objective = x_l1
        res = max(r_p, r_d)

    chg = relchg(x, x_prev) if x_prev is not None else np.nan
    err = relerr(x, x_true) if x_true is not None else np.nan
    return Diagnostics(r_p=r_p, r_d=r_d, gap=gap, res=res,
                       relchg=chg, objective=objective, relerr=err)


def reformulate_l1l1(A, b, nu):
    """Rewrite the l1/l1 model as basis pursuit on augmented variables.

    min ||x||_1 + ||Ax-b||_1/nu  ==  min ||xh||_1 s.t. Ah xh = bh, up to the
    factor nu, with Ah = [A, nu I]/sqrt(1+nu^2), bh = nu b/sqrt(1+nu^2), and
    xh = (nu x; b - Ax). Ah keeps orthonormal rows when A has them.

    Returns
    -------
    (AugmentedOperator, ndarray)
    """
    Ah = AugmentedOperator(A, nu)
    bh = (nu / np.sqrt(1.0 + nu * nu)) * np.asarray(b, dtype=np.complex128)
    return Ah, bh


def extract_l1l1(xh, n, nu):
    """Recover the signal block from an augmented-variable solution: xh[:n]/nu."""
    xh = np.asarray(xh)
    if xh.shape[0] <= n:
        raise ValueError(f"augmented solution must be longer than n={n}, got {xh.shape[0]}")
    return xh[:n] / nu

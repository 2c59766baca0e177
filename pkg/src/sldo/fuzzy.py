"""Interval type-2 TSK network with constant consequents (A2-C0).

Two inputs, I and J Gaussian interval sets, K = I*J rules in row-major (i, j)
order. The crisp output blends the lower and upper normalized firing
strengths with a weight q instead of running Karnik-Mendel type reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from sldo.errors import DegenerateFiringError, InvalidArgumentError

UNDERFLOW_FLOOR = 1e-300


class T2MembershipFn:
    """A bank of interval Gaussian sets for one input.

    Parameters live in one (4, n) block with rows c_lower, c_upper,
    sigma_lower, sigma_upper so lower and upper sets update together.
    """

    __slots__ = ("params",)

    def __init__(self, c_lower, c_upper, sigma_lower, sigma_upper):
        rows = [np.atleast_1d(np.asarray(v, dtype=float)) for v in (c_lower, c_upper, sigma_lower, sigma_upper)]
        n = rows[0].size
        if any(r.ndim != 1 or r.size != n for r in rows):
            raise InvalidArgumentError("membership parameter arrays differ in length")
        self.params = np.vstack(rows)

    @classmethod
    def from_params(cls, params: np.ndarray) -> "T2MembershipFn":
        obj = cls.__new__(cls)
        obj.params = params
        return obj

    c_lower = property(lambda self: self.params[0])
    c_upper = property(lambda self: self.params[1])
    sigma_lower = property(lambda self: self.params[2])
    sigma_upper = property(lambda self: self.params[3])

    def __len__(self) -> int:
        return self.params.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, T2MembershipFn) and np.array_equal(self.params, other.params)

    def __repr__(self) -> str:
        return f"T2MembershipFn(params={self.params.tolist()})"

    def flat(self) -> np.ndarray:
        return self.params.ravel().copy()


class T2nfsNet:
    """Network parameters.

    Both input banks share one (4, I + J) block (input-1 columns first) so the
    learner can update them in a single pass; ``mf1``/``mf2`` are views.
    """

    __slots__ = ("params", "n1", "f", "q", "type1")

    def __init__(self, mf1: T2MembershipFn, mf2: T2MembershipFn, f, q: float = 0.5, type1: bool = False):
        f = np.asarray(f, dtype=float).ravel().copy()
        if f.size != len(mf1) * len(mf2):
            raise InvalidArgumentError(f"need K = I*J = {len(mf1) * len(mf2)} consequents, got {f.size}")
        self.params = np.hstack([mf1.params, mf2.params])
        self.n1 = len(mf1)
        self.f = f
        self.q = float(q)
        self.type1 = bool(type1)

    @classmethod
    def trusted(cls, params, n1, f, q, type1=False) -> "T2nfsNet":
        """Construct without validation or copies; for the learner's per-step updates."""
        obj = cls.__new__(cls)
        obj.params, obj.n1, obj.f, obj.q, obj.type1 = params, n1, f, q, type1
        return obj

    def replace(self, **changes) -> "T2nfsNet":
        kw = dict(mf1=self.mf1, mf2=self.mf2, f=self.f, q=self.q, type1=self.type1)
        kw.update(changes)
        return T2nfsNet(**kw)

    @property
    def mf1(self) -> T2MembershipFn:
        return T2MembershipFn.from_params(self.params[:, : self.n1])

    @property
    def mf2(self) -> T2MembershipFn:
        return T2MembershipFn.from_params(self.params[:, self.n1 :])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n1, self.params.shape[1] - self.n1

    def input_vector(self, xi1: float, xi2: float) -> np.ndarray:
        """Per-column input values matching the parameter block layout."""
        xi = np.empty(self.params.shape[1])
        xi[: self.n1] = xi1
        xi[self.n1 :] = xi2
        return xi

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, T2nfsNet)
            and self.n1 == other.n1
            and np.array_equal(self.params, other.params)
            and np.array_equal(self.f, other.f)
            and self.q == other.q
            and self.type1 == other.type1
        )

    def __repr__(self) -> str:
        I, J = self.shape
        return f"T2nfsNet(I={I}, J={J}, q={self.q}, type1={self.type1})"

    def flat(self) -> np.ndarray:
        """All parameters: input-1 bank, input-2 bank, consequents, q."""
        return np.concatenate([self.mf1.flat(), self.mf2.flat(), self.f, [self.q]])

    def flat_names(self) -> list:
        names = []
        for inp, mf in ((1, self.mf1), (2, self.mf2)):
            for kind in ("c_lower", "c_upper", "sigma_lower", "sigma_upper"):
                names += [f"{kind}_{inp}{i + 1}" for i in range(len(mf))]
        I, J = self.shape
        names += [f"f_{i + 1}{j + 1}" for i in range(I) for j in range(J)]
        return names + ["q"]


@dataclass(frozen=True)
class FiringState:
    w_lower: np.ndarray
    w_upper: np.ndarray
    wt_lower: Optional[np.ndarray] = None
    wt_upper: Optional[np.ndarray] = None


def eval_membership(mf: T2MembershipFn, xi: float):
    """Lower and upper Gaussian grades exp(-((xi - c) / sigma)^2)."""
    p = mf.params
    mu = np.exp(-np.square((xi - p[:2]) / p[2:]))
    return mu[0], mu[1]


def firing_strengths(mu1, mu2) -> FiringState:
    """Product firing strengths; ``mu1``/``mu2`` are (lower, upper) pairs of arrays."""
    w_lower = np.outer(mu1[0], mu2[0]).ravel()
    w_upper = np.outer(mu1[1], mu2[1]).ravel()
    return FiringState(w_lower, w_upper)


def normalize(w: np.ndarray) -> np.ndarray:
    total = w.sum()
    if not total >= UNDERFLOW_FLOOR:
        raise DegenerateFiringError(
            f"firing strengths sum to {total:g}; inputs lie outside every membership support"
        )
    return w / total


def network_output(net: T2nfsNet, xi1: float, xi2: float):
    """Return (tau_n, firing) where tau_n = q F.wt_lower + (1 - q) F.wt_upper."""
    p = net.params
    n1 = net.n1
    xi = np.empty(p.shape[1])
    xi[:n1] = xi1
    xi[n1:] = xi2
    mu = np.exp(-np.square((xi - p[:2]) / p[2:]))
    # rows: lower, upper; columns: rules in row-major (i, j) order
    w = (mu[:, :n1, None] * mu[:, None, n1:]).reshape(2, -1)
    totals = w.sum(axis=1)
    if not totals.min() >= UNDERFLOW_FLOOR:
        raise DegenerateFiringError(
            f"firing strengths sum to {totals.min():g}; inputs lie outside every membership support"
        )
    wt = w / totals[:, None]
    fw = wt @ net.f
    q = net.q
    tau_n = q * fw[0] + (1.0 - q) * fw[1]
    return float(tau_n), FiringState(w[0], w[1], wt[0], wt[1])


def init_network(
    I: int = 3,
    J: int = 3,
    range1=(-5.0, 5.0),
    range2=(-5.0, 5.0),
    sigma_ratio: float = 1.2,
    q0: float = 0.5,
) -> T2nfsNet:
    """Uniform grid of centers, width = grid spacing (upper set wider), zero consequents."""

    def bank(n, lo, hi):
        if n < 1:
            raise InvalidArgumentError("need at least one membership function per input")
        if not hi > lo:
            raise InvalidArgumentError(f"empty input range [{lo}, {hi}]")
        centers = np.linspace(lo, hi, n) if n > 1 else np.array([(lo + hi) / 2.0])
        spacing = (hi - lo) / (n - 1) if n > 1 else hi - lo
        sig = np.full(n, spacing)
        return T2MembershipFn(centers.copy(), centers.copy(), sig, sig * sigma_ratio)

    if not 0.0 <= q0 <= 1.0:
        raise InvalidArgumentError(f"q0 must lie in [0, 1], got {q0}")
    return T2nfsNet(bank(I, *range1), bank(J, *range2), np.zeros(I * J), q0)


def downgrade_to_type1(net: T2nfsNet) -> T2nfsNet:
    """Tie lower and upper sets at their midpoints; later adaptation keeps them tied."""

    def tie(mf):
        c = (mf.c_lower + mf.c_upper) / 2.0
        s = (mf.sigma_lower + mf.sigma_upper) / 2.0
        return T2MembershipFn(c, c, s, s)

    return net.replace(mf1=tie(net.mf1), mf2=tie(net.mf2), type1=True)

"""Work-transformation dynamics of a multi-round development process.

A product architecture is a set of ``n`` modules plus directed design rules.
A rule ``(i, j)`` means module ``i`` receives rework from module ``j``: in the
round-``k`` work transformation matrix ``A_k`` the entry in row ``i``, column
``j`` is nonzero and multiplies ``P_j(k-1)``.  The diagonal carries the module
completion rates.  One investment round maps the remaining-work vector via
``P(k) = A_k P(k-1)``.

Design-rule investments cumulate across rounds: the off-diagonal entry at
round ``k`` is the running product of the per-round rule values.  Two
cumulation conventions are supported:

``literal``
    entry = ``prod_{l<=k} gamma[e, l]`` (untouched rules decay geometrically,
    since each round multiplies in another factor below one).
``ratio``
    entry = ``gamma_init[e] * prod_{l<=k} (gamma[e, l] / gamma_init[e])``
    (untouched rules keep their initial strength; only the invested fraction
    compounds).

All types are immutable after construction; every function here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODES = ("literal", "ratio")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown cumulation mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class ProductArchitecture:
    """Module count, directed design rules, and initial parameter values.

    ``edges[e] = (i, j)`` uses 0-based module indices and names the matrix
    entry (row i, column j); ``i != j``.  ``phi_init[i]`` is the initial
    completion rate of module ``i`` in (0, 1]; ``gamma_init[e]`` the initial
    strength of rule ``e`` (positive).
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    phi_init: np.ndarray
    gamma_init: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("module count must be >= 1")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) is not a design rule")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        phi = np.asarray(self.phi_init, dtype=float)
        gam = np.asarray(self.gamma_init, dtype=float)
        if phi.shape != (self.n,):
            raise ValueError(f"phi_init must have shape ({self.n},), got {phi.shape}")
        if gam.shape != (len(edges),):
            raise ValueError(
                f"gamma_init must have shape ({len(edges)},), got {gam.shape}"
            )
        if not np.all((phi > 0.0) & (phi <= 1.0)):
            raise ValueError("phi_init entries must lie in (0, 1]")
        if not np.all(gam > 0.0):
            raise ValueError("gamma_init entries must be strictly positive")
        object.__setattr__(self, "phi_init", _freeze(phi))
        object.__setattr__(self, "gamma_init", _freeze(gam))

    @property
    def n_rules(self) -> int:
        return len(self.edges)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.edges)}

    def rows_cols(self) -> tuple[np.ndarray, np.ndarray]:
        """Row/column index arrays of the off-diagonal entries."""
        if not self.edges:
            empty = np.zeros(0, dtype=int)
            return empty, empty
        rows = np.array([i for i, _ in self.edges], dtype=int)
        cols = np.array([j for _, j in self.edges], dtype=int)
        return rows, cols

    @staticmethod
    def uniform(n, edges, phi_init=0.5, gamma_init=0.05) -> "ProductArchitecture":
        """Architecture with one shared initial value per parameter family."""
        edges = tuple(edges)
        return ProductArchitecture(
            n=n,
            edges=edges,
            phi_init=np.full(n, float(phi_init)),
            gamma_init=np.full(len(edges), float(gamma_init)),
        )


@dataclass(frozen=True)
class RoundBounds:
    """Per-round box bounds on the decision variables.

    Shapes: ``phi_lo``/``phi_hi`` are (n, T); ``gamma_lo``/``gamma_hi`` are
    (n_rules, T).  Every interval satisfies 0 < lo <= hi.
    """

    phi_lo: np.ndarray
    phi_hi: np.ndarray
    gamma_lo: np.ndarray
    gamma_hi: np.ndarray
    T: int

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("round count T must be >= 1")
        for name in ("phi_lo", "phi_hi", "gamma_lo", "gamma_hi"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        for lo, hi, what in (
            (self.phi_lo, self.phi_hi, "phi"),
            (self.gamma_lo, self.gamma_hi, "gamma"),
        ):
            if lo.shape != hi.shape or lo.ndim != 2 or lo.shape[1] != self.T:
                raise ValueError(f"{what} bounds must both be (n_elements, T={self.T})")
            if not np.all(lo > 0.0):
                raise ValueError(f"{what} lower bounds must be strictly positive")
            if not np.all(lo <= hi):
                raise ValueError(f"{what} bounds violate lo <= hi")

    @staticmethod
    def from_epsilon(arch: ProductArchitecture, T: int, epsilon: float) -> "RoundBounds":
        """Bounds [epsilon * initial, initial] for every element and round."""
        if not (0.0 < epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        phi_hi = np.tile(arch.phi_init[:, None], (1, T))
        gam_hi = np.tile(arch.gamma_init[:, None], (1, T))
        return RoundBounds(
            phi_lo=epsilon * phi_hi,
            phi_hi=phi_hi,
            gamma_lo=epsilon * gam_hi,
            gamma_hi=gam_hi,
            T=T,
        )


@dataclass(frozen=True)
class DecisionVariables:
    """Per-round module rates ``phi`` (n, T) and rule values ``gamma`` (n_rules, T)."""

    phi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if phi.ndim != 2 or gamma.ndim != 2 or phi.shape[1] != gamma.shape[1]:
            raise ValueError("phi and gamma must be 2-D with a shared round axis")
        if not (np.all(phi > 0.0) and np.all(gamma > 0.0)):
            raise ValueError("decision variables must be strictly positive")
        object.__setattr__(self, "phi", _freeze(phi))
        object.__setattr__(self, "gamma", _freeze(gamma))

    @property
    def T(self) -> int:
        return self.phi.shape[1]

    def within(self, bounds: RoundBounds, rtol: float = 1e-9) -> bool:
        """Whether every entry lies inside its bound interval (small slack)."""
        return bool(
            np.all(self.phi >= bounds.phi_lo * (1 - rtol))
            and np.all(self.phi <= bounds.phi_hi * (1 + rtol))
            and np.all(self.gamma >= bounds.gamma_lo * (1 - rtol))
            and np.all(self.gamma <= bounds.gamma_hi * (1 + rtol))
        )

    @staticmethod
    def at_initial(arch: ProductArchitecture, T: int) -> "DecisionVariables":
        """The uninvested point: every round at the architecture's initial values."""
        return DecisionVariables(
            phi=np.tile(arch.phi_init[:, None], (1, T)),
            gamma=np.tile(arch.gamma_init[:, None], (1, T)),
        )


@dataclass(frozen=True)
class WorkTrajectory:
    """Remaining-work vectors ``P[k]`` for k = 0..T; ``P[0]`` is the start state."""

    P: np.ndarray  # (T+1, n)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2:
            raise ValueError("trajectory must be (T+1, n)")
        if np.any(P < 0.0):
            raise ValueError("remaining work cannot be negative")
        object.__setattr__(self, "P", _freeze(P))

    @property
    def T(self) -> int:
        return self.P.shape[0] - 1

    @property
    def n(self) -> int:
        return self.P.shape[1]


def rule_strengths(
    arch: ProductArchitecture, dv: DecisionVariables, mode: str = "literal"
) -> np.ndarray:
    """Cumulated off-diagonal strengths, shape (n_rules, T); column k-1 feeds A_k."""
    _check_mode(mode)
    if arch.n_rules == 0:
        return np.zeros((0, dv.T))
    cum = np.cumprod(dv.gamma, axis=1)
    if mode == "literal":
        return cum
    # ratio: gamma_init * prod(gamma_l / gamma_init) = gamma_init**(1-k) * prod(gamma_l)
    T = dv.T
    powers = arch.gamma_init[:, None] ** (1.0 - np.arange(1, T + 1)[None, :])
    return powers * cum


def build_wtm(
    arch: ProductArchitecture,
    dv: DecisionVariables,
    k: int,
    mode: str = "literal",
) -> np.ndarray:
    """Dense work transformation matrix ``A_k`` for round ``k`` (1-based)."""
    if not (1 <= k <= dv.T):
        raise ValueError(f"round index {k} outside 1..{dv.T}")
    A = np.diag(dv.phi[:, k - 1]).astype(float)
    if arch.n_rules:
        rows, cols = arch.rows_cols()
        A[rows, cols] = rule_strengths(arch, dv, mode)[:, k - 1]
    return A


def propagate(
    arch: ProductArchitecture,
    dv: DecisionVariables,
    p0: np.ndarray,
    mode: str = "literal",
) -> WorkTrajectory:
    """Run ``P(k) = A_k P(k-1)`` for k = 1..T from the start state ``p0``."""
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (arch.n,):
        raise ValueError(f"p0 must have shape ({arch.n},), got {p0.shape}")
    if np.any(p0 <= 0.0):
        raise ValueError("p0 entries must be strictly positive")
    if dv.phi.shape[0] != arch.n or dv.gamma.shape[0] != arch.n_rules:
        raise ValueError("decision variables do not match the architecture")
    T = dv.T
    strengths = rule_strengths(arch, dv, mode)
    rows, cols = arch.rows_cols()
    P = np.empty((T + 1, arch.n))
    P[0] = p0
    for k in range(1, T + 1):
        prev = P[k - 1]
        nxt = dv.phi[:, k - 1] * prev
        if arch.n_rules:
            nxt = nxt + np.bincount(
                rows, weights=strengths[:, k - 1] * prev[cols], minlength=arch.n
            )
        P[k] = nxt
    return WorkTrajectory(P=P)


def total_remaining(traj: WorkTrajectory, k: int) -> float:
    """Sum of remaining work over modules after round ``k``."""
    if not (0 <= k <= traj.T):
        raise ValueError(f"round index {k} outside 0..{traj.T}")
    return float(np.sum(traj.P[k]))


def performance(traj: WorkTrajectory, k: int) -> float:
    """Reciprocal of the total remaining work; undefined (raises) at zero."""
    total = total_remaining(traj, k)
    if total <= 0.0:
        raise ValueError("performance is undefined when no work remains")
    return 1.0 / total


def completion_rate(traj: WorkTrajectory, k: int) -> float:
    """Fraction of the total remaining work cleared by round ``k+1``."""
    if not (0 <= k < traj.T):
        raise ValueError(f"round index {k} outside 0..{traj.T - 1}")
    before = total_remaining(traj, k)
    if before <= 0.0:
        raise ValueError("completion rate is undefined on zero remaining work")
    return (before - total_remaining(traj, k + 1)) / before


def completion_rate_series(traj: WorkTrajectory) -> np.ndarray:
    """completion_rate(traj, k) for k = 0..T-1 as one array."""
    return np.array([completion_rate(traj, k) for k in range(traj.T)])

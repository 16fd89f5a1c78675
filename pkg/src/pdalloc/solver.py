"""Budget- and performance-constrained allocation via a log-barrier method.

Both problems become convex after the change of variables ``phi = exp(x)``,
``gamma = exp(y)``: the log of the total remaining work and the log of each
round's positive cost part are log-sum-exps of affine functions of ``(x, y)``.
The barrier method minimizes ``objective + (1/t) * barrier`` over a growing
schedule of ``t``, with a limited-memory quasi-Newton (two-loop L-BFGS) inner
loop and Armijo backtracking.

Gradients of the dynamic objective are computed by one forward pass of the
work recursion and one adjoint (reverse) pass — cost O(T * (n + n_rules)) —
never by symbolic expansion.  Everything here is deterministic: no random
restarts, fixed iteration order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .costs import CostModel, RoundCost, round_cost
from .wtm import (
    DecisionVariables,
    ProductArchitecture,
    RoundBounds,
    WorkTrajectory,
    completion_rate_series,
    propagate,
)


class InfeasibleError(ValueError):
    """The constraint set admits no (strictly) feasible point."""


@dataclass(frozen=True)
class LogPoint:
    """Decision variables in log space: x = log phi (n, T), y = log gamma (m, T)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, float))
        object.__setattr__(self, "y", np.asarray(self.y, float))

    @staticmethod
    def from_decisions(dv: DecisionVariables) -> "LogPoint":
        return LogPoint(x=np.log(dv.phi), y=np.log(dv.gamma))

    def to_decisions(self) -> DecisionVariables:
        return DecisionVariables(phi=np.exp(self.x), gamma=np.exp(self.y))


@dataclass(frozen=True)
class SolverConfig:
    """Barrier-method knobs; defaults follow standard interior-point practice."""

    t0: float = 1.0
    mu: float = 10.0
    inner_tol: float = 1e-8
    outer_tol: float = 1e-8
    max_inner: int = 2000
    max_outer: int = 40
    alpha: float = 0.3
    beta: float = 0.7
    shrink: float = 1e-3
    memory: int = 40

    def __post_init__(self):
        if self.t0 <= 0 or self.mu <= 1:
            raise ValueError("need t0 > 0 and mu > 1")
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not (0 < self.alpha < 0.5 and 0 < self.beta < 1):
            raise ValueError("need 0 < alpha < 0.5 and 0 < beta < 1")
        if self.shrink <= 0:
            raise ValueError("feasibility shrink must be positive")


@dataclass(frozen=True)
class SolverDiagnostics:
    outer_iterations: int
    inner_iterations: int
    kkt_residual: float
    duality_gap: float
    barrier_t: float
    n_variables: int
    n_constraints: int
    message: str = ""


@dataclass(frozen=True)
class SolutionReport:
    """Optimal decisions plus everything the analyses derive from them."""

    problem: str
    status: str  # "optimal" | "stalled" | "iteration-limit"
    decisions: DecisionVariables
    objective: float  # total remaining work (budget) / total cost (performance)
    epigraph: float  # attained log-total-remaining (budget) / total cost (performance)
    trajectory: WorkTrajectory
    round_costs: tuple[RoundCost, ...]
    constraint_active: tuple[bool, ...]
    diagnostics: SolverDiagnostics
    wall_time: float

    @property
    def completion_rates(self) -> np.ndarray:
        return completion_rate_series(self.trajectory)


# ---------------------------------------------------------------------------
# numeric kernel: forward/adjoint dynamics and vectorized cost pieces
# ---------------------------------------------------------------------------


class _Kernel:
    """Precomputed index/coefficient arrays for one problem instance.

    Works on the full flattened log grid z = [x.ravel(), y.ravel()] of length
    (n + n_rules) * T; masking to free variables happens one layer up.
    """

    def __init__(self, arch, T, p0, costs: CostModel, mode: str):
        self.arch = arch
        self.T = T
        self.n = arch.n
        self.m = arch.n_rules
        self.p0 = np.asarray(p0, float)
        self.mode = mode
        self.rows, self.cols = arch.rows_cols()
        self.lx0 = np.log(arch.phi_init)
        self.ly0 = np.log(arch.gamma_init) if self.m else np.zeros(0)
        mc, mp, mconst = costs.module_arrays(arch)
        rc, rp, rconst = costs.rule_arrays(arch)
        self.mc, self.mp = mc, mp
        self.rc, self.rp = rc, rp
        self.const_round = float(np.sum(mconst) + np.sum(rconst))
        if mode == "ratio" and self.m:
            # strength- and gradient-shared constant: gamma_init**(1-k)
            ks = np.arange(1, T + 1)
            self.ratio_scale = arch.gamma_init[:, None] ** (1.0 - ks[None, :])
        else:
            self.ratio_scale = None

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nT = self.n * self.T
        x = z[:nT].reshape(self.n, self.T)
        y = z[nT:].reshape(self.m, self.T)
        return x, y

    def join(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.concatenate([x.ravel(), y.ravel()])

    def _strengths(self, y: np.ndarray) -> np.ndarray:
        if self.m == 0:
            return np.zeros((0, self.T))
        s = np.exp(np.cumsum(y, axis=1))
        if self.ratio_scale is not None:
            s = self.ratio_scale * s
        return s

    def forward(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Trajectory P (T+1, n), phis (n, T), strengths (m, T)."""
        x, y = self.split(z)
        phis = np.exp(x)
        s = self._strengths(y)
        P = np.empty((self.T + 1, self.n))
        P[0] = self.p0
        for k in range(1, self.T + 1):
            prev = P[k - 1]
            nxt = phis[:, k - 1] * prev
            if self.m:
                nxt = nxt + np.bincount(
                    self.rows, weights=s[:, k - 1] * prev[self.cols], minlength=self.n
                )
            P[k] = nxt
        return P, phis, s

    def dynamics(self, z: np.ndarray, need_grad: bool = True):
        """F = log sum_i P_i(T) and its gradient on the full grid."""
        P, phis, s = self.forward(z)
        S = float(np.sum(P[self.T]))
        F = math.log(S)
        if not need_grad:
            return F, None
        lam = np.full(self.n, 1.0 / S)
        gx = np.empty((self.n, self.T))
        ec = np.empty((self.m, self.T)) if self.m else None
        for k in range(self.T, 0, -1):
            prev = P[k - 1]
            gx[:, k - 1] = lam * prev * phis[:, k - 1]
            if self.m:
                sk = s[:, k - 1]
                ec[:, k - 1] = lam[self.rows] * prev[self.cols] * sk
                lam = phis[:, k - 1] * lam + np.bincount(
                    self.cols, weights=sk * lam[self.rows], minlength=self.n
                )
            else:
                lam = phis[:, k - 1] * lam
        if self.m:
            # y_{e,l} appears in every round k >= l of the cumulated product
            gy = np.cumsum(ec[:, ::-1], axis=1)[:, ::-1]
        else:
            gy = np.zeros((0, self.T))
        return F, self.join(gx, gy)

    def cost_positive(self, z: np.ndarray):
        """Per-round positive cost parts plus per-element monomial values."""
        x, y = self.split(z)
        fplus = self.mc[:, None] * np.exp(-self.mp[:, None] * (x - self.lx0[:, None]))
        gplus = (
            self.rc[:, None] * np.exp(-self.rp[:, None] * (y - self.ly0[:, None]))
            if self.m
            else np.zeros((0, self.T))
        )
        per_round = fplus.sum(axis=0) + (gplus.sum(axis=0) if self.m else 0.0)
        return per_round, fplus, gplus

    def budget_constraint(self, k: int, budget: float):
        """log B_k^+ - log(budget + B_k^-) <= 0 as a (value, grad) callable."""
        rhs = math.log(budget + self.const_round)

        def fn(z, need_grad=True):
            per_round, fplus, gplus = self.cost_positive(z)
            bp = float(per_round[k])
            val = math.log(bp) - rhs
            if not need_grad:
                return val, None
            gx = np.zeros((self.n, self.T))
            gy = np.zeros((self.m, self.T))
            gx[:, k] = -self.mp * fplus[:, k] / bp
            if self.m:
                gy[:, k] = -self.rp * gplus[:, k] / bp
            return val, self.join(gx, gy)

        return fn

    def total_cost_objective(self, z: np.ndarray, need_grad: bool = True):
        """log sum_k B_k^+ (same argmin as the total cost)."""
        per_round, fplus, gplus = self.cost_positive(z)
        S = float(np.sum(per_round))
        val = math.log(S)
        if not need_grad:
            return val, None
        gx = -self.mp[:, None] * fplus / S
        gy = -self.rp[:, None] * gplus / S if self.m else np.zeros((0, self.T))
        return val, self.join(gx, gy)


def objective_and_gradient_budget(
    arch: ProductArchitecture,
    bounds: RoundBounds,
    p0,
    point: LogPoint,
    mode: str = "literal",
) -> tuple[float, LogPoint]:
    """log of the total remaining work at the decisions exp(point), with its
    adjoint gradient in the same (x, y) layout."""
    if point.x.shape != (arch.n, bounds.T) or point.y.shape != (
        arch.n_rules,
        bounds.T,
    ):
        raise ValueError("point shape does not match the architecture/bounds")
    if not (
        np.all(point.x >= np.log(bounds.phi_lo) - 1e-9)
        and np.all(point.x <= np.log(bounds.phi_hi) + 1e-9)
        and np.all(point.y >= np.log(bounds.gamma_lo) - 1e-9)
        and np.all(point.y <= np.log(bounds.gamma_hi) + 1e-9)
    ):
        raise ValueError("point lies outside the log box")
    kern = _Kernel(arch, bounds.T, p0, CostModel(), mode)
    F, g = kern.dynamics(kern.join(point.x, point.y))
    gx, gy = kern.split(g)
    return F, LogPoint(x=gx.copy(), y=gy.copy())


# ---------------------------------------------------------------------------
# generic barrier method
# ---------------------------------------------------------------------------


@dataclass
class BarrierResult:
    z: np.ndarray
    converged: bool
    status: str
    outer_iterations: int
    inner_iterations: int
    grad_norm: float
    gap: float
    t: float
    noise_floor: float = 0.0


# worst acceptable gradient norm of an intermediate centering stage: above
# this the central-path warm start is unreliable and the solve is aborted
_CENTERING_GATE = 1e-4


def _barrier_value_grad(objective, constraints, lo, hi, z, t, need_grad):
    """objective + (1/t) * log-barrier; +inf outside the strict interior.

    With need_grad, returns (value, gradient, constraint slacks, constraint
    gradients) so callers can reuse the constraint evaluations.
    """
    sl = z - lo
    sh = hi - z
    if np.any(sl <= 0.0) or np.any(sh <= 0.0):
        return (math.inf, None, None, None) if need_grad else (math.inf, None)
    gvals = []
    ggrads = []
    for c in constraints:
        v, g = c(z, need_grad)
        if not v < 0.0:  # catches nan as well
            return (math.inf, None, None, None) if need_grad else (math.inf, None)
        gvals.append(v)
        ggrads.append(g)
    fv, fg = objective(z, need_grad)
    if not math.isfinite(fv):
        return (math.inf, None, None, None) if need_grad else (math.inf, None)
    val = fv + (1.0 / t) * (
        -sum(math.log(-v) for v in gvals)
        - float(np.sum(np.log(sl)))
        - float(np.sum(np.log(sh)))
    )
    if not need_grad:
        return val, None
    grad = fg.copy()
    for v, g in zip(gvals, ggrads):
        grad += (1.0 / t) * g / (-v)
    grad += (1.0 / t) * (-1.0 / sl + 1.0 / sh)
    return val, grad, gvals, ggrads


_EPS = float(np.finfo(float).eps)


def _gradient_noise_floor(constraints, lo, hi, z, t):
    """Attainable accuracy of the barrier gradient at z, in double precision.

    Each barrier term contributes a coefficient 1/(t * slack); the slack of a
    near-active term is a difference of O(1) quantities, so its absolute
    rounding error is O(eps * scale), which propagates to a gradient-component
    noise of about t * lambda^2 * eps * scale.  Independent noise terms add in
    quadrature.  Below this level a smaller gradient norm is not numerically
    meaningful; the matching curvature growth keeps the iterate itself
    accurate, only the stopping signal saturates.
    """
    sq = 0.0
    for c in constraints:
        v, g = c(z, True)
        lam = 1.0 / (t * max(-v, 1e-300))
        sq += (lam * lam * (1.0 + float(np.linalg.norm(g)))) ** 2
    lam_lo = 1.0 / (t * (z - lo))
    lam_hi = 1.0 / (t * (hi - z))
    scale = 1.0 + np.abs(z)
    sq += float(np.sum((lam_lo**2 * scale) ** 2) + np.sum((lam_hi**2 * scale) ** 2))
    return 32.0 * _EPS * t * math.sqrt(sq)


def _line_search(objective, constraints, lo, hi, z, d, val, grad, gnorm, t, config, step):
    """Backtracking search along d.

    Uses the Armijo test while its decrement is representable; once the
    decrement falls below the value's rounding resolution, falls back to
    accepting steps that do not increase the value (within noise) and shrink
    the gradient norm.  Returns (step, trial_val, trial_grad) or None.
    """
    slope = float(grad.dot(d))
    noise = 8.0 * _EPS * (1.0 + abs(val))
    dn = float(np.linalg.norm(d))
    zn = 1.0 + float(np.linalg.norm(z))
    for _ in range(200):
        if step * dn < 1e-18 * zn:
            return None
        trial = z + step * d
        if config.alpha * step * (-slope) >= noise:
            tval, _ = _barrier_value_grad(objective, constraints, lo, hi, trial, t, False)
            if tval <= val + config.alpha * step * slope:
                tval, tgrad, gv, gg = _barrier_value_grad(
                    objective, constraints, lo, hi, trial, t, True
                )
                return step, tval, tgrad, gv, gg
        else:
            tval, tgrad, gv, gg = _barrier_value_grad(
                objective, constraints, lo, hi, trial, t, True
            )
            if (
                tval <= val + noise
                and tgrad is not None
                and float(np.linalg.norm(tgrad)) <= (1 - 1e-3) * gnorm
            ):
                return step, tval, tgrad, gv, gg
        step *= config.beta
    return None


def _center(objective, constraints, lo, hi, z, t, config):
    """Minimize the barrier objective at fixed t with L-BFGS + backtracking.

    Returns (z, grad_norm, iterations, exhausted): ``exhausted`` means the
    line search ran out of representable progress before the gradient-norm
    test fired, which at the double-precision floor is the expected finish.
    """
    val, grad, gvals, ggrads = _barrier_value_grad(
        objective, constraints, lo, hi, z, t, True
    )
    if not math.isfinite(val):
        raise ValueError("centering started outside the strict interior")
    mem: list[tuple[np.ndarray, np.ndarray, float]] = []
    iters = 0
    exhausted = False
    while iters < config.max_inner:
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= config.inner_tol:
            break
        # diagonal seed matrix: exact box-barrier curvature plus the diagonal
        # of each constraint-barrier Gauss-Newton term plus the scalar secant
        # estimate for everything else; this keeps directions from slamming
        # into nearly active bounds at large t
        if mem:
            s, yv, _ = mem[-1]
            gamma_scale = float(s.dot(yv) / yv.dot(yv))
        else:
            gamma_scale = 1.0 / max(1.0, gnorm)
        curv = (1.0 / (z - lo) ** 2 + 1.0 / (hi - z) ** 2) / t
        for v, g in zip(gvals, ggrads):
            curv = curv + (g / v) ** 2 / t
        h0 = 1.0 / (1.0 / gamma_scale + curv)
        # two-loop recursion: d = -H grad
        q = grad.copy()
        alphas = []
        for s, yv, rho in reversed(mem):
            a = rho * float(s.dot(q))
            alphas.append(a)
            q -= a * yv
        q *= h0
        for (s, yv, rho), a in zip(mem, reversed(alphas)):
            b = rho * float(yv.dot(q))
            q += s * (a - b)
        d = -q
        if float(grad.dot(d)) >= 0.0:  # stale curvature: preconditioned descent
            mem.clear()
            d = -h0 * grad
        # largest step keeping the box strictly feasible
        with np.errstate(divide="ignore"):
            steps_hi = np.where(d > 0, (hi - z) / d, math.inf)
            steps_lo = np.where(d < 0, (lo - z) / d, math.inf)
        t_box = float(min(np.min(steps_hi), np.min(steps_lo)))
        step0 = min(1.0, 0.99 * t_box)
        hit = _line_search(
            objective, constraints, lo, hi, z, d, val, grad, gnorm, t, config, step0
        )
        if hit is None:
            if mem:
                mem.clear()
                continue  # one steepest-descent retry from the same point
            exhausted = True
            break
        step, val_new, grad_new, gvals, ggrads = hit
        z_new = z + step * d
        s = z_new - z
        yv = grad_new - grad
        sty = float(s.dot(yv))
        if sty > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)):
            mem.append((s, yv, 1.0 / sty))
            if len(mem) > config.memory:
                mem.pop(0)
        z, val, grad = z_new, val_new, grad_new
        iters += 1
    return z, float(np.linalg.norm(grad)), iters, exhausted


def barrier_minimize(
    objective,
    constraints,
    lo: np.ndarray,
    hi: np.ndarray,
    z0: np.ndarray,
    config: SolverConfig = SolverConfig(),
) -> BarrierResult:
    """Interior-point minimizer of ``objective`` subject to ``G_j(z) < 0`` and
    box bounds, starting from the strictly feasible ``z0``.

    Callables take ``(z, need_grad=True)`` and return ``(value, grad-or-None)``.
    """
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    z = np.asarray(z0, float).copy()
    if np.any(z <= lo) or np.any(z >= hi):
        raise InfeasibleError("start point violates the open box")
    for c in constraints:
        v, _ = c(z, False)
        if not v < 0.0:
            raise InfeasibleError("start point is not strictly feasible")
    m_count = len(constraints) + 2 * z.size
    t = config.t0
    inner_total = 0
    gnorm = math.inf
    floor = 0.0
    status = "iteration-limit"
    outer = 0
    for outer in range(1, config.max_outer + 1):
        z, gnorm, iters, exhausted = _center(
            objective, constraints, lo, hi, z, t, config
        )
        inner_total += iters
        if gnorm > config.inner_tol:
            floor = _gradient_noise_floor(constraints, lo, hi, z, t)
            if gnorm > max(_CENTERING_GATE, floor):
                # genuinely bad centering: continuing the schedule would drift
                status = "stalled"
                break
        if m_count / t <= config.outer_tol:
            if gnorm <= max(config.inner_tol, floor):
                status = "optimal"
            else:
                status = "stalled"
            break
        t *= config.mu
    gap = m_count / t
    converged = status == "optimal"
    return BarrierResult(
        z=z,
        converged=converged,
        status=status,
        outer_iterations=outer,
        inner_iterations=inner_total,
        grad_norm=gnorm,
        gap=gap,
        t=t,
        noise_floor=floor,
    )


# ---------------------------------------------------------------------------
# problem assembly
# ---------------------------------------------------------------------------


def _check_instance(arch, bounds, p0, budgets=None):
    if bounds.phi_lo.shape[0] != arch.n or bounds.gamma_lo.shape[0] != arch.n_rules:
        raise ValueError("bounds do not match the architecture")
    if np.any(bounds.phi_hi > arch.phi_init[:, None] * (1 + 1e-9)):
        raise ValueError("inconsistent bounds: phi upper bound exceeds the initial value")
    if arch.n_rules and np.any(
        bounds.gamma_hi > arch.gamma_init[:, None] * (1 + 1e-9)
    ):
        raise ValueError("inconsistent bounds: gamma upper bound exceeds the initial value")
    p0 = np.asarray(p0, float)
    if p0.shape != (arch.n,) or np.any(p0 <= 0):
        raise ValueError("p0 must be a strictly positive length-n vector")
    if budgets is not None:
        budgets = np.asarray(budgets, float)
        if budgets.shape != (bounds.T,):
            raise ValueError(f"budgets must have length T={bounds.T}")
        if np.any(budgets < 0):
            raise ValueError("budgets must be nonnegative")
    return p0, budgets


class _FreeSpace:
    """Mapping between the free subvector and the full log grid."""

    def __init__(self, kern, bounds, free_x, free_y, fixed_lin_x, fixed_lin_y):
        self.kern = kern
        self.free = np.concatenate([free_x.ravel(), free_y.ravel()])
        self.fixed_full = np.concatenate(
            [np.log(fixed_lin_x).ravel(), np.log(fixed_lin_y).ravel()]
        )
        self.fixed_lin_x = fixed_lin_x
        self.fixed_lin_y = fixed_lin_y
        self.lo = np.concatenate(
            [np.log(bounds.phi_lo).ravel(), np.log(bounds.gamma_lo).ravel()]
        )[self.free]
        self.hi = np.concatenate(
            [np.log(bounds.phi_hi).ravel(), np.log(bounds.gamma_hi).ravel()]
        )[self.free]

    @property
    def dim(self) -> int:
        return int(np.sum(self.free))

    def full(self, zfree: np.ndarray) -> np.ndarray:
        z = self.fixed_full.copy()
        z[self.free] = zfree
        return z

    def wrap(self, fn):
        def wrapped(zfree, need_grad=True):
            val, grad = fn(self.full(zfree), need_grad)
            return val, (grad[self.free] if grad is not None else None)

        return wrapped

    def decisions(self, zfree: np.ndarray) -> DecisionVariables:
        z = self.full(zfree)
        x, y = self.kern.split(z)
        nT = self.kern.n * self.kern.T
        phi = np.where(self.free[:nT].reshape(x.shape), np.exp(x), self.fixed_lin_x)
        gamma = np.where(self.free[nT:].reshape(y.shape), np.exp(y), self.fixed_lin_y)
        return DecisionVariables(phi=phi, gamma=gamma)


def _report(problem, status, arch, costs, dv, p0, mode, diag, wall, budgets=None):
    traj = propagate(arch, dv, p0, mode)
    rcs = tuple(round_cost(arch, dv, costs, k) for k in range(1, dv.T + 1))
    total_remaining_T = float(np.sum(traj.P[-1]))
    if problem == "budget":
        objective = total_remaining_T
        epigraph = math.log(total_remaining_T)
        active = tuple(
            bool(budgets[k] - rcs[k].total <= 1e-4 * max(1.0, budgets[k]))
            for k in range(dv.T)
        )
    else:
        objective = float(sum(rc.total for rc in rcs))
        epigraph = objective
        active = (True,)
    return SolutionReport(
        problem=problem,
        status=status,
        decisions=dv,
        objective=objective,
        epigraph=epigraph,
        trajectory=traj,
        round_costs=rcs,
        constraint_active=active,
        diagnostics=diag,
        wall_time=wall,
    )


def _trivial_diag(space_dim, n_constraints):
    return SolverDiagnostics(
        outer_iterations=0,
        inner_iterations=0,
        kkt_residual=0.0,
        duality_gap=0.0,
        barrier_t=math.inf,
        n_variables=space_dim,
        n_constraints=n_constraints,
        message="solved without barrier iterations",
    )


def solve_budget(
    arch: ProductArchitecture,
    bounds: RoundBounds,
    p0,
    costs: CostModel,
    budgets,
    config: SolverConfig = SolverConfig(),
    mode: str = "literal",
) -> SolutionReport:
    """Minimize the total remaining work subject to per-round spending caps."""
    start = time.perf_counter()
    p0, budgets = _check_instance(arch, bounds, p0, budgets)
    T, n, m = bounds.T, arch.n, arch.n_rules
    kern = _Kernel(arch, T, p0, costs, mode)

    free_x = np.ones((n, T), bool)
    free_y = np.ones((m, T), bool)
    fixed_x = bounds.phi_hi.copy()
    fixed_y = bounds.gamma_hi.copy()
    for k in range(T):
        if budgets[k] == 0.0:
            # a zero-budget round has no interior: pin it to the zero-cost point
            if np.any(bounds.phi_hi[:, k] < arch.phi_init * (1 - 1e-9)) or (
                m and np.any(bounds.gamma_hi[:, k] < arch.gamma_init * (1 - 1e-9))
            ):
                raise InfeasibleError(
                    f"round {k + 1} has zero budget but its bounds exclude the "
                    "zero-cost point"
                )
            free_x[:, k] = False
            free_y[:, k] = False
            fixed_x[:, k] = arch.phi_init
            if m:
                fixed_y[:, k] = arch.gamma_init
    width_x = np.log(bounds.phi_hi) - np.log(bounds.phi_lo)
    width_y = np.log(bounds.gamma_hi) - np.log(bounds.gamma_lo)
    free_x &= width_x > 1e-12
    free_y &= width_y > 1e-12

    space = _FreeSpace(kern, bounds, free_x, free_y, fixed_x, fixed_y)
    cons_rounds = [k for k in range(T) if budgets[k] > 0.0]
    constraints = [kern.budget_constraint(k, float(budgets[k])) for k in cons_rounds]

    if space.dim == 0:
        dv = DecisionVariables(phi=fixed_x, gamma=fixed_y)
        diag = _trivial_diag(0, len(constraints))
        return _report(
            "budget", "optimal", arch, costs, dv, p0, mode,
            diag, time.perf_counter() - start, budgets,
        )

    # strictly feasible start: shrink below the zero-cost anchor
    wrapped_cons = [space.wrap(c) for c in constraints]
    width = space.hi - space.lo
    delta = np.minimum(config.shrink, 0.5 * width)
    z0 = None
    scale = 1.0
    for _ in range(60):
        cand = space.hi - delta * scale
        if all(c(cand, False)[0] < -1e-12 for c in wrapped_cons):
            z0 = cand
            break
        scale *= 0.3
    if z0 is None:
        raise InfeasibleError("no strictly feasible start for the budget problem")

    result = barrier_minimize(
        space.wrap(kern.dynamics),
        wrapped_cons,
        space.lo,
        space.hi,
        z0,
        config,
    )
    dv = space.decisions(result.z)
    diag = SolverDiagnostics(
        outer_iterations=result.outer_iterations,
        inner_iterations=result.inner_iterations,
        kkt_residual=result.grad_norm,
        duality_gap=result.gap,
        barrier_t=result.t,
        n_variables=space.dim,
        n_constraints=len(constraints),
        message=result.status,
    )
    return _report(
        "budget", result.status, arch, costs, dv, p0, mode,
        diag, time.perf_counter() - start, budgets,
    )


def solve_performance(
    arch: ProductArchitecture,
    bounds: RoundBounds,
    p0,
    costs: CostModel,
    target: float,
    config: SolverConfig = SolverConfig(),
    mode: str = "literal",
) -> SolutionReport:
    """Minimize the total investment subject to remaining work <= target."""
    start = time.perf_counter()
    if target <= 0.0:
        raise ValueError("the remaining-work target must be positive")
    p0, _ = _check_instance(arch, bounds, p0)
    T, n, m = bounds.T, arch.n, arch.n_rules
    kern = _Kernel(arch, T, p0, costs, mode)

    # no investment needed if the uninvested run already meets the target
    init_in_box = bool(
        np.all(bounds.phi_lo <= arch.phi_init[:, None] * (1 + 1e-12))
        and np.all(bounds.phi_hi >= arch.phi_init[:, None] * (1 - 1e-12))
        and (
            m == 0
            or (
                np.all(bounds.gamma_lo <= arch.gamma_init[:, None] * (1 + 1e-12))
                and np.all(bounds.gamma_hi >= arch.gamma_init[:, None] * (1 - 1e-12))
            )
        )
    )
    if init_in_box:
        dv0 = DecisionVariables.at_initial(arch, T)
        traj0 = propagate(arch, dv0, p0, mode)
        if float(np.sum(traj0.P[-1])) <= target:
            diag = _trivial_diag(0, 1)
            return _report(
                "performance", "optimal", arch, costs, dv0, p0, mode,
                diag, time.perf_counter() - start,
            )

    # infeasibility check at the most aggressive point
    dv_lo = DecisionVariables(phi=bounds.phi_lo, gamma=bounds.gamma_lo)
    best = float(np.sum(propagate(arch, dv_lo, p0, mode).P[-1]))
    if best > target * (1 + 1e-12):
        raise InfeasibleError(
            f"remaining work at the most aggressive decisions is {best:.6g} > "
            f"target {target:.6g}"
        )

    free_x = np.log(bounds.phi_hi) - np.log(bounds.phi_lo) > 1e-12
    free_y = np.log(bounds.gamma_hi) - np.log(bounds.gamma_lo) > 1e-12
    space = _FreeSpace(kern, bounds, free_x, free_y, bounds.phi_hi, bounds.gamma_hi)
    log_target = math.log(target)

    def perf_constraint(z, need_grad=True):
        v, g = kern.dynamics(z, need_grad)
        return v - log_target, g

    if space.dim == 0:
        dv = DecisionVariables(phi=bounds.phi_hi, gamma=bounds.gamma_hi)
        if float(np.sum(propagate(arch, dv, p0, mode).P[-1])) > target * (1 + 1e-9):
            raise InfeasibleError("all variables fixed and the target is unreachable")
        diag = _trivial_diag(0, 1)
        return _report(
            "performance", "optimal", arch, costs, dv, p0, mode,
            diag, time.perf_counter() - start,
        )

    wrapped_con = space.wrap(perf_constraint)
    width = space.hi - space.lo
    delta = np.minimum(config.shrink, 0.5 * width)
    z0 = None
    scale = 1.0
    for _ in range(60):
        cand = space.lo + delta * scale
        if wrapped_con(cand, False)[0] < -1e-12:
            z0 = cand
            break
        scale *= 0.3
    if z0 is None:
        raise InfeasibleError("no strictly feasible start for the performance problem")

    result = barrier_minimize(
        space.wrap(kern.total_cost_objective),
        [wrapped_con],
        space.lo,
        space.hi,
        z0,
        config,
    )
    dv = space.decisions(result.z)
    diag = SolverDiagnostics(
        outer_iterations=result.outer_iterations,
        inner_iterations=result.inner_iterations,
        kkt_residual=result.grad_norm,
        duality_gap=result.gap,
        barrier_t=result.t,
        n_variables=space.dim,
        n_constraints=1,
        message=result.status,
    )
    return _report(
        "performance", result.status, arch, costs, dv, p0, mode,
        diag, time.perf_counter() - start,
    )

"""Investment-cost functions for modules and design rules.

Costs are evaluated on the normalized ratio ``u = value / initial`` in
[epsilon, 1]: an element cost is ``c_eff * (u**-p - omega**-p)``, zero at the
uninvested point (u = 1, omega = 1) and growing steeply as the ratio drops
toward epsilon.  The positive part ``c_eff * u**-p`` is a monomial in the
decision variable, which is what makes the budget constraints log-convex.

Two normalizations for the coefficient:

``unit-coefficient``
    ``c_eff = c`` exactly as specified.
``unit-max-cost``
    ``c_eff = 1 / (epsilon**-p - 1)`` so the fully improved element costs 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wtm import DecisionVariables, ProductArchitecture

NORMALIZATIONS = ("unit-coefficient", "unit-max-cost")

# Relative slack accepted when validating values against their interval; the
# solver hands back points a rounding error away from the exact bounds.
_BOUND_RTOL = 1e-9


@dataclass(frozen=True)
class CostSpec:
    """Shape parameters of one element's cost curve."""

    c: float = 1.0
    p: float = 1.0
    omega: float = 1.0
    epsilon: float = 0.1
    normalization: str = "unit-coefficient"

    def __post_init__(self):
        if self.c <= 0.0:
            raise ValueError("coefficient c must be positive")
        if self.p <= 0.0:
            raise ValueError("shape exponent p must be positive")
        if self.omega <= 0.0:
            raise ValueError("reference value omega must be positive")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(
                f"unknown normalization {self.normalization!r}; "
                f"expected one of {NORMALIZATIONS}"
            )

    @property
    def coeff(self) -> float:
        """Effective coefficient after normalization."""
        if self.normalization == "unit-max-cost":
            return 1.0 / (self.epsilon ** -self.p - 1.0)
        return self.c

    @property
    def const_part(self) -> float:
        """Constant subtracted from the monomial part: c_eff * omega**-p."""
        return self.coeff * self.omega ** -self.p


def element_cost(spec: CostSpec, value: float, init: float) -> float:
    """Cost of tuning one element from ``init`` down to ``value``."""
    if init <= 0.0:
        raise ValueError("initial value must be positive")
    u = value / init
    if u > 1.0 + _BOUND_RTOL:
        raise ValueError(
            f"value {value} exceeds the initial value {init}: negative investment"
        )
    if u < spec.epsilon * (1.0 - _BOUND_RTOL):
        raise ValueError(
            f"value {value} is below the fully improved bound "
            f"{spec.epsilon * init} (epsilon = {spec.epsilon})"
        )
    u = min(u, 1.0)
    return spec.coeff * u ** -spec.p - spec.const_part


def element_cost_positive(spec: CostSpec, value: float, init: float) -> float:
    """The monomial part ``c_eff * (value/init)**-p`` of the element cost."""
    if init <= 0.0 or value <= 0.0:
        raise ValueError("value and initial value must be positive")
    return spec.coeff * (value / init) ** -spec.p


@dataclass(frozen=True)
class CostModel:
    """Global default cost spec plus per-module / per-rule overrides.

    ``module_overrides`` maps a module index to a CostSpec; ``rule_overrides``
    maps a directed edge ``(i, j)`` to a CostSpec.
    """

    default: CostSpec = CostSpec()
    module_overrides: tuple[tuple[int, CostSpec], ...] = ()
    rule_overrides: tuple[tuple[tuple[int, int], CostSpec], ...] = ()

    def module_spec(self, i: int) -> CostSpec:
        for idx, spec in self.module_overrides:
            if idx == i:
                return spec
        return self.default

    def rule_spec(self, edge: tuple[int, int]) -> CostSpec:
        for e, spec in self.rule_overrides:
            if e == edge:
                return spec
        return self.default

    def module_arrays(self, arch: ProductArchitecture):
        """(coeff, p, const) per module, vectorized."""
        specs = [self.module_spec(i) for i in range(arch.n)]
        return (
            np.array([s.coeff for s in specs]),
            np.array([s.p for s in specs]),
            np.array([s.const_part for s in specs]),
        )

    def rule_arrays(self, arch: ProductArchitecture):
        """(coeff, p, const) per rule, vectorized."""
        specs = [self.rule_spec(e) for e in arch.edges]
        return (
            np.array([s.coeff for s in specs]),
            np.array([s.p for s in specs]),
            np.array([s.const_part for s in specs]),
        )


@dataclass(frozen=True)
class RoundCost:
    """Costs of one investment round, split per the monomial decomposition."""

    module_costs: np.ndarray  # f_i, shape (n,)
    rule_costs: np.ndarray  # g_e, shape (n_rules,)
    total: float  # B_k
    positive: float  # B_k^+
    constant: float  # B_k^-

    def __post_init__(self):
        object.__setattr__(self, "module_costs", np.asarray(self.module_costs, float))
        object.__setattr__(self, "rule_costs", np.asarray(self.rule_costs, float))


def round_cost(
    arch: ProductArchitecture,
    dv: DecisionVariables,
    costs: CostModel,
    k: int,
) -> RoundCost:
    """Total investment of round ``k`` (1-based) plus its positive/constant split."""
    if not (1 <= k <= dv.T):
        raise ValueError(f"round index {k} outside 1..{dv.T}")
    mod = np.array(
        [
            element_cost(costs.module_spec(i), dv.phi[i, k - 1], arch.phi_init[i])
            for i in range(arch.n)
        ]
    )
    rule = np.array(
        [
            element_cost(costs.rule_spec(e), dv.gamma[e_idx, k - 1], arch.gamma_init[e_idx])
            for e_idx, e in enumerate(arch.edges)
        ]
    )
    mod_plus = np.array(
        [
            element_cost_positive(costs.module_spec(i), dv.phi[i, k - 1], arch.phi_init[i])
            for i in range(arch.n)
        ]
    )
    rule_plus = np.array(
        [
            element_cost_positive(
                costs.rule_spec(e), dv.gamma[e_idx, k - 1], arch.gamma_init[e_idx]
            )
            for e_idx, e in enumerate(arch.edges)
        ]
    )
    _, _, mconst = costs.module_arrays(arch)
    _, _, rconst = costs.rule_arrays(arch)
    positive = float(np.sum(mod_plus) + np.sum(rule_plus))
    constant = float(np.sum(mconst) + np.sum(rconst))
    return RoundCost(
        module_costs=mod,
        rule_costs=rule,
        total=float(np.sum(mod) + np.sum(rule)),
        positive=positive,
        constant=constant,
    )


def total_cost(
    arch: ProductArchitecture, dv: DecisionVariables, costs: CostModel
) -> float:
    """Sum of round costs over all rounds."""
    return float(sum(round_cost(arch, dv, costs, k).total for k in range(1, dv.T + 1)))

"""Symbolic monomial/posynomial algebra over named decision variables.

This is the desk-scale oracle: it expands the remaining-work recursion into an
exact posynomial in the per-round decision variables, so small instances of the
numeric propagation and of the log-domain objective (value and gradient) can be
certified against an independent symbolic computation.  The production solver
never builds these symbols.

Variable ids are hashable tokens; the expansion below uses
``("phi", module_index, round)`` and ``("gamma", edge_index, round)`` with
1-based rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping

from .wtm import ProductArchitecture

TERM_GUARD = 10**6


@dataclass(frozen=True)
class Monomial:
    """coeff * prod(v ** exponents[v]); coeff strictly positive."""

    coeff: float
    exponents: Mapping[Hashable, float]

    def __post_init__(self):
        if self.coeff <= 0.0:
            raise ValueError("monomial coefficient must be positive")
        exps = {v: float(a) for v, a in self.exponents.items() if a != 0.0}
        object.__setattr__(self, "exponents", exps)

    def key(self) -> frozenset:
        return frozenset(self.exponents.items())

    def eval(self, x: Mapping[Hashable, float]) -> float:
        out = self.coeff
        for v, a in self.exponents.items():
            out *= x[v] ** a
        return out


def _merged(terms) -> tuple[Monomial, ...]:
    acc: dict[frozenset, tuple[float, Mapping]] = {}
    for t in terms:
        k = t.key()
        if k in acc:
            acc[k] = (acc[k][0] + t.coeff, acc[k][1])
        else:
            acc[k] = (t.coeff, t.exponents)
    return tuple(Monomial(c, e) for c, e in acc.values())


@dataclass(frozen=True)
class Posynomial:
    """A sum of monomials; the empty term tuple represents the zero function."""

    terms: tuple[Monomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", _merged(self.terms))

    @staticmethod
    def zero() -> "Posynomial":
        return Posynomial(())

    @staticmethod
    def constant(c: float) -> "Posynomial":
        return Posynomial((Monomial(c, {}),))

    @staticmethod
    def variable(v: Hashable, coeff: float = 1.0) -> "Posynomial":
        return Posynomial((Monomial(coeff, {v: 1.0}),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set:
        out: set = set()
        for t in self.terms:
            out.update(t.exponents)
        return out

    def eval(self, x: Mapping[Hashable, float]) -> float:
        return sum(t.eval(x) for t in self.terms)

    def __add__(self, other: "Posynomial") -> "Posynomial":
        return poly_add(self, other)

    def __mul__(self, other: "Posynomial") -> "Posynomial":
        return poly_mul(self, other)


def poly_add(a: Posynomial, b: Posynomial) -> Posynomial:
    return Posynomial(a.terms + b.terms)


def poly_mul(a: Posynomial, b: Posynomial) -> Posynomial:
    out = []
    for ta in a.terms:
        for tb in b.terms:
            exps = dict(ta.exponents)
            for v, e in tb.exponents.items():
                exps[v] = exps.get(v, 0.0) + e
            out.append(Monomial(ta.coeff * tb.coeff, exps))
    return Posynomial(tuple(out))


def poly_scale(a: Posynomial, s: float) -> Posynomial:
    if s <= 0.0:
        raise ValueError("scale factor must be positive")
    return Posynomial(tuple(Monomial(t.coeff * s, t.exponents) for t in a.terms))


def poly_sum(polys) -> Posynomial:
    out = Posynomial.zero()
    for p in polys:
        out = poly_add(out, p)
    return out


def symbolic_remaining_work(
    arch: ProductArchitecture,
    T: int,
    p0,
    mode: str = "literal",
) -> list[Posynomial]:
    """Remaining work after round T, exactly, one posynomial per module.

    Raises if the running term count would exceed the 10^6-term guard; the
    oracle is only meant for small instances.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if mode not in ("literal", "ratio"):
        raise ValueError(f"unknown cumulation mode {mode!r}")
    if len(p0) != arch.n:
        raise ValueError("p0 length must equal the module count")
    incoming = [[] for _ in range(arch.n)]
    for e_idx, (r, c) in enumerate(arch.edges):
        incoming[r].append((e_idx, c))
    state = [Posynomial.constant(float(v)) for v in p0]
    for k in range(1, T + 1):
        # project the post-round term count before doing any work
        sizes = [len(p.terms) for p in state]
        projected = sum(
            sizes[i] + sum(sizes[c] for _, c in incoming[i]) for i in range(arch.n)
        )
        if projected > TERM_GUARD:
            raise OverflowError(
                f"symbolic expansion would exceed {TERM_GUARD} terms at round {k} "
                f"(projected {projected})"
            )
        nxt: list[Posynomial] = []
        for i in range(arch.n):
            acc = poly_mul(Posynomial.variable(("phi", i, k)), state[i])
            for e_idx, c in incoming[i]:
                # cumulated strength: prod over rounds 1..k, with the ratio
                # convention rescaled by gamma_init**(1-k)
                coeff = 1.0 if mode == "literal" else arch.gamma_init[e_idx] ** (1.0 - k)
                exps = {("gamma", e_idx, l): 1.0 for l in range(1, k + 1)}
                strength = Posynomial((Monomial(coeff, exps),))
                acc = poly_add(acc, poly_mul(strength, state[c]))
            nxt.append(acc)
        state = nxt
    return state


def log_domain_eval(poly: Posynomial, x: Mapping[Hashable, float]) -> float:
    """log f(exp[x]) evaluated stably via a max-shifted log-sum-exp."""
    if poly.is_zero:
        raise ValueError("log-domain value of the zero posynomial is undefined")
    logs = [
        math.log(t.coeff) + sum(a * x[v] for v, a in t.exponents.items())
        for t in poly.terms
    ]
    top = max(logs)
    return top + math.log(sum(math.exp(s - top) for s in logs))


def log_domain_grad(
    poly: Posynomial, x: Mapping[Hashable, float]
) -> dict[Hashable, float]:
    """Gradient of log f(exp[x]): softmax-weighted exponent averages."""
    if poly.is_zero:
        raise ValueError("log-domain gradient of the zero posynomial is undefined")
    logs = [
        math.log(t.coeff) + sum(a * x[v] for v, a in t.exponents.items())
        for t in poly.terms
    ]
    top = max(logs)
    weights = [math.exp(s - top) for s in logs]
    z = sum(weights)
    grad: dict[Hashable, float] = {}
    for w, t in zip(weights, poly.terms):
        for v, a in t.exponents.items():
            grad[v] = grad.get(v, 0.0) + (w / z) * a
    return grad

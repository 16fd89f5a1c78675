import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pdalloc.posy import (
    Monomial,
    Posynomial,
    log_domain_eval,
    log_domain_grad,
    poly_add,
    poly_mul,
    poly_scale,
    poly_sum,
    symbolic_remaining_work,
)
from pdalloc.wtm import DecisionVariables, ProductArchitecture, propagate


def mono(c, **exps):
    return Posynomial((Monomial(c, exps),))


class TestAlgebra:
    def test_add_merges_terms(self):
        p = poly_add(mono(2, x=1), mono(3, x=1))
        assert len(p.terms) == 1
        assert p.terms[0].coeff == 5.0

    def test_mul_adds_exponents(self):
        p = poly_mul(mono(1, x=1), mono(1, y=2))
        assert len(p.terms) == 1
        assert p.terms[0].exponents == {"x": 1.0, "y": 2.0}

    def test_binomial_square(self):
        xy = poly_add(mono(1, x=1), mono(1, y=1))
        sq = poly_mul(xy, xy)
        by_key = {t.key(): t.coeff for t in sq.terms}
        assert by_key[frozenset({("x", 2.0)})] == 1.0
        assert by_key[frozenset({("x", 1.0), ("y", 1.0)})] == 2.0
        assert by_key[frozenset({("y", 2.0)})] == 1.0

    def test_scale_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            poly_scale(mono(1, x=1), 0.0)

    def test_monomial_requires_positive_coeff(self):
        with pytest.raises(ValueError):
            Monomial(-1.0, {})

    def test_eval(self):
        p = poly_add(mono(2, x=2), mono(1, y=-1))
        assert_allclose(p.eval({"x": 3.0, "y": 4.0}), 18.0 + 0.25)


class TestSymbolicRemainingWork:
    def test_single_module_two_rounds(self):
        arch = ProductArchitecture.uniform(1, [])
        polys = symbolic_remaining_work(arch, 2, [1.0])
        assert len(polys) == 1
        (term,) = polys[0].terms
        assert term.exponents == {("phi", 0, 1): 1.0, ("phi", 0, 2): 1.0}
        assert term.coeff == 1.0

    def test_symmetric_pair_one_round(self):
        arch = ProductArchitecture.uniform(2, [(0, 1), (1, 0)])
        polys = symbolic_remaining_work(arch, 1, [1.0, 1.0])
        keys = {t.key() for t in polys[0].terms}
        assert keys == {
            frozenset({(("phi", 0, 1), 1.0)}),
            frozenset({(("gamma", 0, 1), 1.0)}),
        }

    def test_matches_numeric_propagation(self):
        arch = ProductArchitecture.uniform(2, [(0, 1), (1, 0)])
        polys = symbolic_remaining_work(arch, 2, [1.0, 1.0], mode="literal")
        point = {("phi", i, k): 0.5 for i in range(2) for k in (1, 2)}
        point.update({("gamma", e, k): 0.05 for e in range(2) for k in (1, 2)})
        for p in polys:
            assert_allclose(p.eval(point), 0.276375, rtol=1e-14)

    def test_oracle_equivalence_random_instances(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(1, 4))
            pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
            edges = []
            if pairs:
                k = int(rng.integers(0, len(pairs) + 1))
                if k:
                    edges = [pairs[i] for i in rng.choice(len(pairs), k, replace=False)]
            arch = ProductArchitecture.uniform(
                n, edges,
                phi_init=rng.uniform(0.3, 1.0),
                gamma_init=rng.uniform(0.02, 0.2),
            )
            T = int(rng.integers(1, 3))
            mode = "literal" if rng.random() < 0.5 else "ratio"
            phi = rng.uniform(0.05, 0.3, (n, T))
            gamma = rng.uniform(0.002, 0.02, (len(edges), T))
            p0 = rng.uniform(0.5, 2.0, n)
            traj = propagate(arch, DecisionVariables(phi=phi, gamma=gamma), p0, mode)
            polys = symbolic_remaining_work(arch, T, p0, mode)
            point = {("phi", i, k + 1): phi[i, k] for i in range(n) for k in range(T)}
            point.update(
                {("gamma", e, k + 1): gamma[e, k] for e in range(len(edges)) for k in range(T)}
            )
            for i in range(n):
                assert_allclose(polys[i].eval(point), traj.P[T][i], rtol=1e-12)

    def test_term_guard_trips(self):
        # a dense 101-module net projects past the term budget at round 2
        n = 101
        edges = [(i, j) for i in range(n) for j in range(n) if i != j]
        arch = ProductArchitecture.uniform(n, edges)
        with pytest.raises(OverflowError, match="terms"):
            symbolic_remaining_work(arch, 2, np.ones(n))


class TestLogDomain:
    def test_single_unit_monomial(self):
        assert log_domain_eval(mono(1, x=1), {"x": 0.0}) == 0.0

    def test_doubled_exponential(self):
        p = poly_add(mono(1, x=1), mono(1, x=1))
        for x in (-3.0, 0.0, 2.5):
            assert_allclose(log_domain_eval(p, {"x": x}), math.log(2) + x, rtol=1e-14)

    def test_overflow_guard(self):
        p = poly_add(mono(1, x=1), mono(1, y=1))
        val = log_domain_eval(p, {"x": 700.0, "y": 700.0})
        assert math.isfinite(val)
        assert_allclose(val, 700.0 + math.log(2.0), rtol=1e-14)

    def test_zero_posynomial_raises(self):
        with pytest.raises(ValueError):
            log_domain_eval(Posynomial.zero(), {})
        with pytest.raises(ValueError):
            log_domain_grad(Posynomial.zero(), {})

    def test_midpoint_convexity(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            nvars = int(rng.integers(1, 5))
            names = [f"v{i}" for i in range(nvars)]
            terms = []
            for _ in range(int(rng.integers(1, 6))):
                exps = {
                    v: float(rng.uniform(-3, 3))
                    for v in names
                    if rng.random() < 0.7
                }
                terms.append(Monomial(float(rng.uniform(0.1, 5.0)), exps))
            p = Posynomial(tuple(terms))
            z1 = {v: float(rng.uniform(-2, 2)) for v in names}
            z2 = {v: float(rng.uniform(-2, 2)) for v in names}
            zm = {v: 0.5 * (z1[v] + z2[v]) for v in names}
            fm = log_domain_eval(p, zm)
            f1 = log_domain_eval(p, z1)
            f2 = log_domain_eval(p, z2)
            assert fm <= 0.5 * (f1 + f2) + 1e-9

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            nvars = int(rng.integers(1, 4))
            names = [f"v{i}" for i in range(nvars)]
            terms = []
            for _ in range(int(rng.integers(1, 5))):
                exps = {v: float(rng.uniform(-2, 2)) for v in names}
                terms.append(Monomial(float(rng.uniform(0.1, 3.0)), exps))
            p = Posynomial(tuple(terms))
            x = {v: float(rng.uniform(-1, 1)) for v in names}
            grad = log_domain_grad(p, x)
            h = 1e-6
            for v in names:
                xp = dict(x)
                xm = dict(x)
                xp[v] += h
                xm[v] -= h
                fd = (log_domain_eval(p, xp) - log_domain_eval(p, xm)) / (2 * h)
                assert_allclose(grad.get(v, 0.0), fd, rtol=1e-6, atol=1e-9)

    def test_poly_sum(self):
        total = poly_sum([mono(1, x=1), mono(2, x=1), mono(1, y=1)])
        assert len(total.terms) == 2

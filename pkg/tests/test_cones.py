import json
from fractions import Fraction as F
from itertools import permutations

import numpy as np
import pytest

from pcoh import kleisli, pcs
from pcoh.algebra import EMPTY, Multiset, SparseVec
from pcoh.cones import (DEFAULT_SCHEDULE, HALF_LINE, MP, ConeSpace, Partition, bernstein_check,
                        common_refinement, derivative, derivative_at_zero, diff, extract_coefficients,
                        find_grouping, from_callable, from_morphism, is_prestable, is_refinement,
                        orthant, pcs_cone, phi, remainder, scalar_fn, taylor_partial, to_float,
                        uniform_phi)
from pcoh.cones.differences import random_directions, random_point
from pcoh.errors import DomainError, EstimationError, StructuralError

from oracles import exp_like, mixed_derivative, random_coeff_table, scale_into_unit_ball

NAT2, NAT3 = pcs_cone(pcs.nat(2)), pcs_cone(pcs.nat(3))
E_INV = MP.exp(-1)


def morphism_from_table(table, dom, cod, D):
    return kleisli.Morphism(dom, cod, D, {(Multiset.from_elements(e), b): q for (e, b), q in table.items()})


def random_series(rng, dom=pcs.nat(3), cod=pcs.nat(2), D=3, density=0.4):
    table = scale_into_unit_ball(random_coeff_table(rng, list(dom.web), list(cod.web), D, density),
                                 list(dom.web), list(cod.web))
    return morphism_from_table(table, dom, cod, D), table


def example_m(W=4):
    co = {(EMPTY, 0): F(1, 2), (Multiset.of(0), 1): F(1, 2)}
    for i in range(1, W):
        co[(Multiset.of(0, i), 0)] = F(1, 2)
    return kleisli.Morphism(pcs.nat(W), pcs.nat(W), 2, co)


def as_dict(point, web):
    return {a: v for a, v in zip(web, point) if v}


SQUARE = scalar_fn(lambda x: x * x, exact=True, degree=2, name="square")
CONCAVE = scalar_fn(lambda x: x * (1 - x), exact=True, degree=2, name="x(1-x)")


class TestNorms:
    def test_examples(self):
        assert NAT3.norm((0, 0, 0)) == 0
        assert NAT3.norm((F(1, 3),) * 3) == 1
        assert HALF_LINE.norm((F(3, 4),)) == F(3, 4)
        assert orthant(3).norm((F(1, 5), F(1, 2), 0)) == F(1, 2)

    def test_pcs_cone_matches_pcs_norm(self):
        rng = np.random.default_rng(1)
        desc = pcs.product(pcs.BOOL, pcs.nat(2))
        space = pcs_cone(desc)
        for _ in range(20):
            x = tuple(F(int(v), 6) for v in rng.integers(0, 7, size=space.dim))
            assert space.norm(x) == pcs.norm(SparseVec(desc.web, dict(zip(desc.web, x))), desc)

    def test_local_norm_examples(self):
        assert NAT2.local_norm((F(1, 2), 0), [(0, 0)]) == 0
        assert HALF_LINE.local_norm((F(1, 2),), [(F(1, 4),)]) == F(1, 2)
        assert NAT2.local_norm((F(1, 2), 0), [(F(1, 4), F(1, 4))]) == 1

    def test_local_norm_domain(self):
        with pytest.raises(DomainError):
            HALF_LINE.local_norm((1,), [(F(1, 4),)])

    def test_cone_axioms_on_samples(self):
        rng = np.random.default_rng(2)
        for space in (NAT3, orthant(3), pcs_cone(pcs.product(pcs.BOOL, pcs.ONE))):
            for _ in range(20):
                x, y = random_point(space, rng), random_point(space, rng)
                c = F(int(rng.integers(0, 5)), 3)
                s = tuple(a + b for a, b in zip(x, y))
                assert space.norm(tuple(c * a for a in x)) == c * space.norm(x)
                assert space.norm(s) <= space.norm(x) + space.norm(y)
                assert space.norm(x) <= space.norm(s)

    def test_lattice_ops(self):
        assert ConeSpace.meet((1, F(1, 2)), (F(1, 3), 1)) == (F(1, 3), F(1, 2))
        assert ConeSpace.join((1, F(1, 2)), (F(1, 3), 1)) == (1, 1)


class TestDifferences:
    def test_rank_zero_and_one(self):
        assert diff(SQUARE, 0, (F(1, 3),), []).signed == (F(1, 9),)
        assert diff(SQUARE, 1, (F(1, 3),), [(F(1, 3),)]).signed == (F(4, 9) - F(1, 9),)

    def test_square_second_difference(self):
        assert diff(SQUARE, 2, (0,), [(F(1, 4),), (F(1, 4),)]).signed == (F(1, 8),)

    def test_precondition(self):
        with pytest.raises(DomainError):
            diff(SQUARE, 1, (F(1, 2),), [(F(3, 4),)])

    def test_symmetry_and_recurrence(self):
        rng = np.random.default_rng(3)
        for _ in range(8):
            f = from_morphism(random_series(rng)[0])
            x = random_point(f.dom, rng)
            us = random_directions(f.dom, x, 3, rng)
            d = diff(f, 3, x, us).signed
            for perm in permutations(us):
                assert diff(f, 3, x, list(perm)).signed == d
            shifted = tuple(a + b for a, b in zip(x, us[2]))
            rec = tuple(p - q for p, q in zip(diff(f, 2, shifted, us[:2]).signed, diff(f, 2, x, us[:2]).signed))
            assert rec == d

    def test_matches_symbolic_oracle_for_degree_n(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            m, table = random_series(rng, D=2)
            top = {k: q for k, q in table.items() if len(k[0]) == 2}
            f = from_morphism(morphism_from_table(top, m.dom, m.cod, 2))
            x = random_point(f.dom, rng)
            us = random_directions(f.dom, x, 2, rng)
            want = mixed_derivative(top, as_dict(x, m.dom.web), [as_dict(u, m.dom.web) for u in us])
            assert as_dict(diff(f, 2, x, us).signed, m.cod.web) == want


class TestPrestability:
    def test_morphisms_pass(self):
        rng = np.random.default_rng(5)
        for _ in range(3):
            v = is_prestable(from_morphism(random_series(rng)[0]), 3, 40, 1)
            assert v.passed and v.exact and all(v.min_signed[n] >= 0 for n in (1, 2, 3))

    def test_concave_fails_at_two(self):
        v = is_prestable(CONCAVE, 3, 200, 0)
        assert not v.passed and 2 in v.failed_ranks
        w = v.witnesses[2]
        x = (F(w["x"][0]),)
        us = [(F(u[0]),) for u in w["us"]]
        assert HALF_LINE.local_norm(x, us) <= 1
        assert diff(CONCAVE, 2, x, us).signed[0] < 0

    def test_constant(self):
        v = is_prestable(scalar_fn(lambda x: F(1, 3), exact=True), 3, 20, 0)
        assert v.passed and all(v.min_signed[n] == 0 for n in (1, 2, 3))

    def test_float_mode(self):
        f = scalar_fn(lambda x: MP.exp(x) - 1)
        v = is_prestable(f, 2, 30, 0)
        assert v.passed and not v.exact

    def test_verdict_json(self):
        obj = json.loads(json.dumps(is_prestable(CONCAVE, 2, 20, 0).to_json()))
        assert obj["passed"] is False and "2" in obj["witnesses"]


class TestPartitions:
    def test_trivial_coarse(self):
        p1 = Partition.of([(F(1, 4), 0), (0, F(1, 3)), (F(1, 8), F(1, 8))])
        assert common_refinement(p1, Partition((p1.target,), p1.target)).same_multiset(p1)

    def test_same_partition(self):
        p1 = Partition.of([(F(1, 4), 0, 1), (F(1, 2), F(1, 3), 0)])
        assert common_refinement(p1, p1).same_multiset(p1)

    def test_different_targets_rejected(self):
        with pytest.raises(StructuralError):
            common_refinement(Partition.of([(1, 0)]), Partition.of([(0, 1)]))

    def test_bad_partition_rejected(self):
        with pytest.raises(StructuralError):
            Partition(((F(1, 2),),), (1,))

    def test_random_instances_refine_both(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            target = tuple(F(int(v), 12) for v in rng.integers(1, 13, size=3))
            p1, p2 = split(rng, target, 3), split(rng, target, 2)
            r = common_refinement(p1, p2)
            assert r.target == target and sum_parts(r) == target
            assert is_refinement(r, p1) and is_refinement(r, p2)

    def test_grouping_negative(self):
        fine = Partition.of([(F(1, 2), F(1, 2))])
        coarse = Partition.of([(F(1, 2), 0), (0, F(1, 2))])
        assert find_grouping(fine, coarse) is None

    def test_phi_of_refinement_is_smaller(self):
        rng = np.random.default_rng(7)
        f = from_morphism(random_series(rng, dom=pcs.nat(3), cod=pcs.nat(2), D=3, density=0.6)[0])
        x = (F(1, 10), F(1, 20), 0)
        for _ in range(10):
            target = tuple(F(int(v), 40) for v in rng.integers(1, 9, size=3))
            p1, p2 = split(rng, target, 3), split(rng, target, 2)
            r = common_refinement(p1, p2)
            low = phi(f, x, [r])
            for p in (p1, p2):
                assert all(a <= b for a, b in zip(low, phi(f, x, [p])))

    def test_uniform_phi_matches_phi(self):
        u = (F(1, 4),)
        assert uniform_phi(SQUARE, (F(1, 4),), [u], 4) == phi(SQUARE, (F(1, 4),), [Partition.uniform(u, 4)])


def split(rng, target, k):
    """Random partition of ``target`` into ``k`` parts, coordinatewise cuts."""
    cols = []
    for t in target:
        cuts = sorted(F(int(c), 12) * t for c in rng.integers(0, 13, size=k - 1))
        bounds = [F(0)] + cuts + [t]
        cols.append([b - a for a, b in zip(bounds, bounds[1:])])
    parts = [tuple(col[i] for col in cols) for i in range(k)]
    return Partition(tuple(parts), target)


def sum_parts(p):
    return tuple(sum(col) for col in zip(*p.parts))


class TestDerivative:
    def test_square_trace(self):
        tr = derivative(SQUARE, 1, (F(1, 4),), [(F(1, 2),)])
        assert tr.schedule == list(DEFAULT_SCHEDULE)
        assert all(b <= a for a, b in zip(tr.phi, tr.phi[1:]))
        # Phi(m) = 2 x h + h^2 / m
        assert tr.phi == [(F(1, 4) + F(1, 4 * m),) for m in DEFAULT_SCHEDULE]
        assert abs(tr.estimate[0] - F(1, 4)) < 1e-4

    def test_richardson_is_exact_for_quadratic(self):
        tr = derivative(SQUARE, 1, (F(1, 4),), [(F(1, 2),)], schedule=[1, 2, 4], richardson=True)
        assert tr.estimate == (F(1, 4),)

    def test_trace_json(self):
        tr = derivative(SQUARE, 1, (F(1, 4),), [(F(1, 2),)], schedule=[1, 2])
        assert tr.to_json() == {"schedule": [1, 2], "phi": ["1/2", "3/8"], "estimate": "3/8", "richardson": False}

    def test_linear_second_derivative_vanishes(self):
        lin = scalar_fn(lambda x: x / 3, exact=True, degree=1)
        tr = derivative(lin, 2, (F(1, 10),), [(F(1, 4),), (F(1, 5),)])
        assert all(p == (0,) for p in tr.phi)

    def test_increasing_trace_rejected(self):
        with pytest.raises(EstimationError):
            derivative(CONCAVE, 1, (0,), [(F(1, 4),)], schedule=[1, 2, 4])

    def test_bounds_between_zero_and_difference(self):
        rng = np.random.default_rng(8)
        for _ in range(4):
            f = from_morphism(random_series(rng)[0])
            x = random_point(f.dom, rng)
            us = random_directions(f.dom, x, 2, rng)
            d = diff(f, 2, x, us).signed
            for p in derivative(f, 2, x, us, schedule=[1, 2, 4, 8]).phi:
                assert all(0 <= a <= b for a, b in zip(p, d))

    def test_matches_symbolic_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(4):
            m, table = random_series(rng, D=3)
            f = from_morphism(m)
            x = random_point(f.dom, rng, radius=F(1, 2))
            us = random_directions(f.dom, x, 2, rng)
            want = mixed_derivative(table, as_dict(x, m.dom.web), [as_dict(u, m.dom.web) for u in us])
            est = derivative(f, 2, x, us, richardson=True).estimate
            for b, v in zip(m.cod.web, est):
                assert abs(v - want.get(b, 0)) < 1e-9

    def test_homogeneity(self):
        f = from_morphism(example_m(3))
        x, u = (F(1, 10), 0, 0), (F(1, 5), F(1, 5), 0)
        d1 = derivative(f, 1, x, [u], richardson=True).estimate
        half = tuple(a / 2 for a in u)
        d2 = derivative(f, 1, x, [half], richardson=True).estimate
        assert all(abs(2 * b - a) < 1e-9 for a, b in zip(d1, d2))


class TestDerivativeAtZero:
    def test_constant(self):
        g = from_callable(NAT2, HALF_LINE, lambda x: (F(1, 3),), exact=True, degree=0)
        assert derivative_at_zero(g, [(1, 0)], mode="exact-poly") == (0,)
        assert derivative_at_zero(g, [(1, 0)]) == (0,)

    def test_product_monomial(self):
        m = kleisli.Morphism(pcs.nat(2), pcs.ONE, 2, {(Multiset.of(0, 1), "*"): 1})
        g = from_morphism(m)
        for mode in ("exact-poly", "scaling-limit"):
            assert derivative_at_zero(g, [(1, 0), (0, 1)], mode=mode) == (1,)

    def test_example_m_mixed_second(self):
        g = from_morphism(example_m(4))
        for mode in ("exact-poly", "scaling-limit"):
            val = derivative_at_zero(g, [(1, 0, 0, 0), (0, 1, 0, 0)], mode=mode)
            assert val[0] == F(1, 2) and all(v == 0 for v in val[1:])

    def test_float_matches_exact(self):
        rng = np.random.default_rng(10)
        m, _ = random_series(rng)
        exact, approx = from_morphism(m), from_morphism(m, exact=False)
        dirs = [(1, 0, 0), (0, 0, 1), (0, 0, 1)]
        want = derivative_at_zero(exact, dirs, mode="exact-poly")
        got = derivative_at_zero(approx, dirs, tol=1e-10, j_max=48)
        assert all(abs(to_float(a) - b) < 1e-6 for a, b in zip(want, got))

    def test_exact_poly_needs_degree(self):
        with pytest.raises(StructuralError):
            derivative_at_zero(scalar_fn(lambda x: x), [(1,)], mode="exact-poly")

    def test_non_convergence(self):
        g = scalar_fn(lambda x: MP.sqrt(x))
        with pytest.raises(EstimationError):
            derivative_at_zero(g, [(F(1, 2),)], j_max=5)


class TestTaylor:
    def test_rank_zero(self):
        f = from_morphism(example_m(3))
        assert taylor_partial(f, 0, (F(1, 3), 0, 0)) == f((0, 0, 0))

    def test_square(self):
        for N in (2, 3, 5):
            assert taylor_partial(SQUARE, N, (F(1, 2),)) == (F(1, 4),)
            assert taylor_partial(SQUARE, N, (F(1, 2),), mode="partition", schedule=[1, 2, 4],
                                  richardson=True) == (F(1, 4),)

    def test_morphism_full_degree_equals_apply(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            m, _ = random_series(rng)
            f = from_morphism(m)
            x = random_point(f.dom, rng)
            y = kleisli.apply(m, SparseVec(m.dom.web, dict(zip(m.dom.web, x))))
            assert taylor_partial(f, 3, x) == tuple(y[b] for b in m.cod.web)

    def test_monotone_and_bounded(self):
        rng = np.random.default_rng(12)
        m, _ = random_series(rng)
        f = from_morphism(m)
        x = random_point(f.dom, rng)
        fx = f(x)
        prev = None
        for N in range(5):
            t = taylor_partial(f, N, x)
            assert all(a <= b for a, b in zip(t, fx))
            if prev is not None:
                assert all(a <= b for a, b in zip(prev, t))
            prev = t

    def test_base_shift(self):
        f = from_morphism(example_m(3))
        b, d = (F(1, 10), 0, 0), (F(1, 5), F(1, 10), 0)
        assert taylor_partial(f, 2, d, base=b) == f(tuple(p + q for p, q in zip(b, d)))

    def test_remainder_bounds(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            m, _ = random_series(rng)
            f = from_morphism(m)
            x = random_point(f.dom, rng, radius=F(2, 5))
            y = random_point(f.dom, rng, radius=F(2, 5))
            s = tuple(a + b for a, b in zip(x, y))
            for N in range(5):
                whole = remainder(f, N, s)
                r1, r2 = remainder(f, N, x, base=y), remainder(f, N, y, base=x)
                assert all(b <= a and c <= a for a, b, c in zip(whole, r1, r2))
                if N >= m.max_degree:
                    # partial sums are the whole series here
                    assert all(a <= b + c for a, b, c in zip(whole, r1, r2))

    def test_upper_bound_needs_full_series(self):
        x, y = (F(1, 4),), (F(1, 4),)
        assert remainder(SQUARE, 1, (F(1, 2),)) == (F(1, 4),)
        assert remainder(SQUARE, 1, x, base=y)[0] + remainder(SQUARE, 1, y, base=x)[0] == F(1, 8)

    def test_outside_ball(self):
        with pytest.raises(DomainError):
            taylor_partial(SQUARE, 1, (1,))


class TestBernstein:
    def test_exp_like(self):
        f = scalar_fn(lambda x: E_INV * exp_like(x), degree=6, name="exp6")
        rep = bernstein_check(f, (F(1, 2),), 6, tol=1e-6, richardson=True)
        assert rep.passed and rep.final < 1e-6

    def test_morphism_exact_zero(self):
        rng = np.random.default_rng(14)
        m, _ = random_series(rng)
        f = from_morphism(m)
        rep = bernstein_check(f, random_point(f.dom, rng), 3)
        assert rep.passed and rep.remainders[-1] == (0, 0)

    def test_at_zero(self):
        rep = bernstein_check(SQUARE, (0,), 0)
        assert rep.passed and rep.remainders == [(0,)]

    def test_concave_reported(self):
        rep = bernstein_check(CONCAVE, (F(1, 2),), 2)
        assert rep.remainders[1] == (F(-1, 4),)
        assert not rep.nonnegative and not rep.passed

    def test_json(self):
        obj = bernstein_check(SQUARE, (F(1, 2),), 2).to_json()
        assert obj["remainders"] == [["1/4"], ["1/4"], ["0"]] and obj["passed"]


class TestExtraction:
    def test_constant(self):
        g = from_callable(NAT2, NAT2, lambda x: (0, F(2, 3)), exact=True, degree=0)
        m = extract_coefficients(g, 2)
        assert m.coeffs == {(EMPTY, 1): F(2, 3)}

    def test_example_m(self):
        m = example_m(4)
        assert extract_coefficients(from_morphism(m), 2) == m
        assert extract_coefficients(from_morphism(m, exact=False), 2, mode="scaling-limit", j_max=48) == m

    def test_round_trip_exact(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            m, _ = random_series(rng)
            assert extract_coefficients(from_morphism(m), 3) == m

    def test_apply_agrees(self):
        rng = np.random.default_rng(16)
        m, _ = random_series(rng)
        got = extract_coefficients(from_morphism(m, exact=False), 3, mode="scaling-limit", tol=1e-10, j_max=48)
        for key, q in m.coeffs.items():
            assert abs(to_float(got[key]) - to_float(q)) < 1e-6

    def test_black_box_is_flagged_heuristic(self, caplog):
        g = from_callable(NAT2, NAT2, lambda x: (x[0] * x[1], 0), exact=True, degree=2, name="xy")
        with caplog.at_level("WARNING"):
            m = extract_coefficients(g, 2)
        assert m.coeffs == {(Multiset.of(0, 1), 0): 1}
        assert "heuristic" in caplog.text

    def test_needs_pcs_cones(self):
        with pytest.raises(StructuralError):
            extract_coefficients(SQUARE, 2)

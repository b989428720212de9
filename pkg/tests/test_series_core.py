"""series_core: degree sets, h/D recurrences, cycle index sums.

The key oracle here is brute force over S_k: enumerate all cycle types
(integer partitions), count the permutations of each type, and sum the
power-sum weights directly.  The recurrences must reproduce that sum.
"""

import math
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyatree.errors import (
    Divergent,
    MalformedTail,
    MissingZero,
    NoBranchingDegree,
    TruncationTooShort,
)
from polyatree.series_core import (
    DegreeSet,
    ExactSeries,
    PowerSumTable,
    complete_homogeneous,
    cycle_index_eval,
    cycle_index_partial,
    fixpoint_free_weight,
    shifted_cycle_index,
    span,
    validate,
)


# ---------------------------------------------------------------------------
# oracle: sum over S_k grouped by cycle type
# ---------------------------------------------------------------------------

def _partitions(k, max_part=None):
    """Yield integer partitions of k as {part: multiplicity} dicts."""
    if max_part is None:
        max_part = k
    if k == 0:
        yield {}
        return
    for part in range(min(k, max_part), 0, -1):
        for rest in _partitions(k - part, part):
            d = dict(rest)
            d[part] = d.get(part, 0) + 1
            yield d


def brute_force_h(p_values, k, *, fixpoint_free=False):
    """h_k (or D_k) by explicit summation over all cycle types of S_k."""
    total = 0.0
    for ctype in _partitions(k):
        if fixpoint_free and ctype.get(1, 0) > 0:
            continue
        # permutations with this cycle type: k! / prod(i^m_i * m_i!)
        denom = 1
        weight = 1.0
        for i, m in ctype.items():
            denom *= (i ** m) * math.factorial(m)
            weight *= p_values[i - 1] ** m
        total += weight / denom
    return total


small_p = st.lists(
    st.floats(min_value=0.0, max_value=3.0, allow_nan=False), min_size=8, max_size=8
)


class TestWeightRecurrences:
    def test_h_monomial_power(self):
        # p = (s, 0, 0, ...): only the identity permutation contributes
        p = PowerSumTable((2.5, 0, 0, 0, 0, 0))
        for k in range(6):
            assert complete_homogeneous(p, k) == pytest.approx(
                2.5 ** k / math.factorial(k), rel=1e-14
            )

    def test_h_all_ones(self):
        # sum h_k t^k = exp(sum t^i/i) = 1/(1-t)  =>  h_k = 1
        p = PowerSumTable((1.0,) * 12)
        for k in range(12):
            assert complete_homogeneous(p, k) == pytest.approx(1.0, rel=1e-12)

    def test_h_worked_example(self):
        p = PowerSumTable((2.0, 3.0))
        assert complete_homogeneous(p, 2) == pytest.approx(3.5, abs=1e-15)

    def test_d_base_cases(self):
        p = PowerSumTable((7.0, 1.0, 4.0))
        assert fixpoint_free_weight(p, 0) == 1.0
        assert fixpoint_free_weight(p, 1) == 0.0

    def test_d_single_two_cycle(self):
        p = PowerSumTable((0.0, 1.0))
        assert fixpoint_free_weight(p, 2) == pytest.approx(0.5, abs=1e-15)

    def test_d_all_ones_m3(self):
        # the two 3-cycles of S_3 weigh 2/3! = 1/3
        p = PowerSumTable((1.0, 1.0, 1.0))
        assert fixpoint_free_weight(p, 3) == pytest.approx(1.0 / 3.0, abs=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(small_p)
    def test_h_matches_brute_force(self, values):
        p = PowerSumTable(tuple(values))
        for k in range(9):
            expect = brute_force_h(values, k)
            got = complete_homogeneous(p, k)
            assert got == pytest.approx(expect, rel=1e-12, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(small_p)
    def test_d_matches_brute_force(self, values):
        p = PowerSumTable(tuple(values))
        for m in range(9):
            expect = brute_force_h(values, m, fixpoint_free=True)
            got = fixpoint_free_weight(p, m)
            assert got == pytest.approx(expect, rel=1e-12, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(min_value=0.0, max_value=2.0), min_size=12, max_size=12))
    def test_fixpoint_count_decomposition(self, values):
        # h_k = sum_j p_1^j/j! * D_{k-j}: split permutations by fixpoint count
        p = PowerSumTable(tuple(values))
        for k in range(13):
            total = sum(
                values[0] ** j / math.factorial(j) * fixpoint_free_weight(p, k - j)
                for j in range(k + 1)
            )
            assert complete_homogeneous(p, k) == pytest.approx(total, rel=1e-12, abs=1e-12)

    def test_truncation_guard(self):
        p = PowerSumTable((1.0, 1.0))
        with pytest.raises(TruncationTooShort):
            complete_homogeneous(p, 3)
        with pytest.raises(TruncationTooShort):
            fixpoint_free_weight(p, 3)

    def test_memo_is_thread_safe(self):
        p = PowerSumTable((0.5,) * 40)
        results = []

        def fill():
            results.append([p.h(k) for k in range(41)])

        threads = [threading.Thread(target=fill) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r == results[0] for r in results)


class TestDegreeSet:
    def test_validate_ok(self):
        validate(DegreeSet((0, 2)))

    def test_validate_no_branching(self):
        with pytest.raises(NoBranchingDegree):
            validate(DegreeSet((0, 1)))

    def test_validate_missing_zero(self):
        with pytest.raises(MissingZero):
            validate(DegreeSet((2, 3)))

    def test_validate_tail_overlap(self):
        with pytest.raises(MalformedTail):
            validate(DegreeSet((0, 5), tail_from=3))

    def test_span_examples(self):
        assert span(DegreeSet((0, 2))) == 2
        assert span(DegreeSet((0, 2, 3))) == 1
        assert span(DegreeSet((0, 4, 6))) == 2
        assert span(DegreeSet((0,), tail_from=3)) == 1
        assert span(DegreeSet((), tail_from=0)) == 1

    def test_parse_grammar(self):
        assert DegreeSet.parse("0,2") == DegreeSet((0, 2))
        assert DegreeSet.parse("0,2,5") == DegreeSet((0, 2, 5))
        assert DegreeSet.parse("0,3+") == DegreeSet((0,), tail_from=3)
        assert DegreeSet.parse("0+") == DegreeSet((), tail_from=0)

    def test_parse_rejects_garbage(self):
        for bad in ("", "0,", "0,x", "3+,0", "0,-2", "0,2+5"):
            with pytest.raises(MalformedTail):
                DegreeSet.parse(bad)

    def test_parse_str_roundtrip(self):
        for text in ("0,2", "0,2,5", "0,3+", "0+", "0,1,4"):
            assert str(DegreeSet.parse(text)) == text

    def test_membership_and_iteration(self):
        om = DegreeSet.parse("0,3+")
        assert 0 in om and 3 in om and 100 in om
        assert 1 not in om and 2 not in om
        assert list(om.degrees_upto(5)) == [0, 3, 4, 5]

    def test_negative_entry_rejected(self):
        with pytest.raises(MalformedTail):
            DegreeSet((-1, 0, 2))


class TestCycleIndexEval:
    def test_only_leaf_degree(self):
        p = PowerSumTable((9.0, 9.0))
        value, cert = cycle_index_eval(DegreeSet((0, 2)), PowerSumTable((0.0, 0.0)))
        assert value == pytest.approx(1.0)  # h_0 + h_2(0,0) = 1
        value, cert = cycle_index_eval(DegreeSet((0,), tail_from=2), PowerSumTable((0.0, 0.0)))
        assert value == pytest.approx(1.0)
        assert cert == pytest.approx(0.0)

    def test_exp_closed_form(self):
        p = PowerSumTable((1.7, 0.0, 0.0))
        value, cert = cycle_index_eval(DegreeSet((), tail_from=0), p)
        assert value == pytest.approx(math.exp(1.7), rel=1e-14)

    def test_finite_worked_example(self):
        p = PowerSumTable((2.0, 3.0))
        value, cert = cycle_index_eval(DegreeSet((0, 2)), p)
        assert value == pytest.approx(4.5, abs=1e-14)
        assert cert == 0.0

    @settings(max_examples=40, deadline=None)
    @given(small_p, st.sets(st.integers(min_value=0, max_value=8), min_size=1))
    def test_finite_matches_brute_force(self, values, degrees):
        degrees = degrees | {0, 2}
        omega = DegreeSet(tuple(degrees))
        p = PowerSumTable(tuple(values))
        expect = sum(brute_force_h(values, k) for k in degrees)
        got, cert = cycle_index_eval(omega, p)
        assert cert == 0.0
        assert got == pytest.approx(expect, rel=1e-12, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.0, max_value=0.6), min_size=8, max_size=8),
        st.integers(min_value=0, max_value=6),
    )
    def test_tail_matches_truncated_direct_sum(self, values, K):
        # exp closed form minus corrections == direct sum of many h_k
        omega = DegreeSet((), tail_from=K) if K == 0 else DegreeSet((0,), tail_from=max(K, 2))
        # give the table enough indices to sum h_k far out
        vals = tuple(values) + (0.0,) * 152
        p = PowerSumTable(vals)
        got, cert = cycle_index_eval(omega, p)
        direct = sum(p.h(k) for k in range(161) if k in omega)
        # with p_i <= 0.6 and i <= 8 the h_k decay at least like e^(-k/3)
        assert got == pytest.approx(direct, rel=1e-10, abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(small_p, st.integers(min_value=0, max_value=7), st.floats(min_value=0.01, max_value=1.0))
    def test_monotone_in_each_p(self, values, axis, bump):
        omega = DegreeSet((0, 2, 3, 5, 7))
        base = PowerSumTable(tuple(values))
        bumped_vals = list(values)
        bumped_vals[axis] += bump
        bumped = PowerSumTable(tuple(bumped_vals))
        v0, _ = cycle_index_eval(omega, base)
        v1, _ = cycle_index_eval(omega, bumped)
        assert v1 >= v0 - 1e-12

    def test_divergent_tail(self):
        p = PowerSumTable((1.0, 1.0), tail_bound=math.inf)
        with pytest.raises(Divergent):
            cycle_index_eval(DegreeSet((), tail_from=0), p)
        # finite sets never need the tail
        value, cert = cycle_index_eval(DegreeSet((0, 2)), p)
        assert value == pytest.approx(1.0 + brute_force_h([1.0, 1.0], 2))

    def test_k_max_guard(self):
        p = PowerSumTable((1.0,) * 10)
        with pytest.raises(TruncationTooShort):
            cycle_index_eval(DegreeSet((0, 9)), p, k_max=5)


class TestCycleIndexPartial:
    def test_constant_has_zero_partial(self):
        p = PowerSumTable((2.0, 3.0))
        assert cycle_index_partial(DegreeSet((0, 2)), PowerSumTable((0.0, 0.0)), 2, 1) == 0.5
        # shifting past every admissible degree leaves nothing: the "constant" case
        assert shifted_cycle_index(DegreeSet((0, 2)), p, 3) == 0.0

    def test_exp_partial_is_self(self):
        p = PowerSumTable((0.9, 0.4, 0.2, 0.05))
        omega = DegreeSet((), tail_from=0)
        z, _ = cycle_index_eval(omega, p)
        assert cycle_index_partial(omega, p, 1, 1) == pytest.approx(z, rel=1e-12)

    def test_worked_partial(self):
        p = PowerSumTable((2.0, 3.0))
        assert cycle_index_partial(DegreeSet((0, 2)), p, 1, 1) == pytest.approx(2.0)

    @settings(max_examples=40, deadline=None)
    @given(small_p)
    def test_partial_matches_finite_difference(self, values):
        omega = DegreeSet((0, 2, 4, 5))
        p = PowerSumTable(tuple(values))
        exact = cycle_index_partial(omega, p, 1, 1)
        eps = 1e-6
        up = list(values)
        down = list(values)
        up[0] += eps
        down[0] = max(down[0] - eps, 0.0)
        v_up, _ = cycle_index_eval(omega, PowerSumTable(tuple(up)))
        v_dn, _ = cycle_index_eval(omega, PowerSumTable(tuple(down)))
        fd = (v_up - v_dn) / (up[0] - down[0])
        assert exact == pytest.approx(fd, rel=2e-6, abs=2e-6)

    def test_second_partial_axis_guard(self):
        p = PowerSumTable((1.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            cycle_index_partial(DegreeSet((0, 2)), p, 2, 2)


class TestExactSeries:
    def test_mul_truncates_exactly(self):
        a = ExactSeries((1, 1, 1), 2)
        b = ExactSeries((1, 2), 2)
        c = a * b
        assert c.coeffs == (1, 3, 3)

    def test_compose_power(self):
        a = ExactSeries((0, 1, 2, 3), 6)
        b = a.compose_power(2)
        assert b.coeffs == (0, 0, 1, 0, 2, 0, 3)

    def test_divexact(self):
        a = ExactSeries((2, 4, 6), 2)
        assert a.divexact(2).coeffs == (1, 2, 3)
        with pytest.raises(ArithmeticError):
            ExactSeries((1, 2), 1).divexact(2)

    def test_add_sub_roundtrip(self):
        a = ExactSeries((5, 7, 11), 2)
        b = ExactSeries((1, 2, 3), 2)
        assert ((a + b) - b) == a

    def test_big_integers_survive(self):
        big = 10 ** 60
        a = ExactSeries((big, big), 1)
        assert (a * a).coeffs == (big * big, 2 * big * big)

    def test_coefficient_guard(self):
        with pytest.raises(TruncationTooShort):
            ExactSeries((1,), 0)[1]

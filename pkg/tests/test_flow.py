import math
import random
from fractions import Fraction

import pytest

from latflow.errors import InvalidInputError
from latflow.flow import (
    FlowTime,
    LineSegmentSpec,
    ext2_constant,
    flow_ext2,
    flow_standard,
    g,
    phi,
    segment_sup,
    unipotent_factor,
    vandermonde_check,
)
from latflow.scalars import F64, RATIONAL, IntegerVec3, mat_det, mat_mul, mat_vec

RATIONAL_LINE = LineSegmentSpec(Fraction(1, 2), Fraction(1, 3),
                                Fraction(0), Fraction(1), RATIONAL)


def random_rational_line(rng):
    a = Fraction(rng.randint(-20, 20), rng.randint(1, 12))
    b = Fraction(rng.randint(-20, 20), rng.randint(1, 12))
    return LineSegmentSpec(a, b, Fraction(0), Fraction(1), RATIONAL)


def test_interval_must_be_increasing():
    with pytest.raises(InvalidInputError):
        LineSegmentSpec(0.0, 0.0, 1.0, 1.0, F64)


def test_phi_matrix_shape():
    line = LineSegmentSpec(Fraction(1), Fraction(2), Fraction(0), Fraction(4), RATIONAL)
    m = phi(line, Fraction(3))
    assert m[0][1] == 3
    assert m[0][2] == 5  # 1*3 + 2
    assert m[1] == (0, 1, 0) and m[2] == (0, 0, 1)
    assert mat_det(m) == 1


def test_phi_at_zero_third_column():
    # phi(0) e3 = (b, 0, 1): the (2,3) entry of phi is 0
    m = phi(RATIONAL_LINE, Fraction(0))
    assert mat_vec(m, (Fraction(0), Fraction(0), Fraction(1))) == \
        (Fraction(1, 3), 0, 1)
    assert m[0][1] == 0


def test_g_identity_at_zero():
    assert g(FlowTime.of(0.0), RATIONAL) == \
        ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_g_at_one():
    m = g(FlowTime.of(1.0), F64)
    assert m[0][0] == pytest.approx(math.e ** 2, rel=1e-15)
    assert m[1][1] == pytest.approx(1 / math.e, rel=1e-15)


def test_g_log_entries_sum_zero():
    for t in (0.0, 1.0, -3.5, 55.26):
        assert sum(FlowTime.of(t).log_entries()) == 0.0


def test_g_exact_determinant():
    # symbolic scale: e^t = 7/5 exactly, det = (7/5)^2 (5/7)(5/7) = 1
    t = FlowTime.from_exp(Fraction(7, 5))
    assert mat_det(g(t, RATIONAL)) == 1


def test_g_float_determinant_within_tolerance():
    for t in (-12.0, -5.0, 1.0, 7.5, 12.0):
        assert abs(mat_det(g(FlowTime.of(t), F64)) - 1) <= 1e-12


def test_flow_standard_closed_form_matches_matrix_path():
    rng = random.Random(5)
    for _ in range(100):
        line = random_rational_line(rng)
        t = FlowTime.from_exp(Fraction(rng.randint(1, 40), rng.randint(1, 7)))
        s = Fraction(rng.randint(0, 10), 10)
        v = IntegerVec3(rng.randint(-9, 9), rng.randint(-9, 9), rng.randint(-9, 9))
        if v.is_zero():
            continue
        pt = flow_standard(line, s, t, v)
        direct = mat_vec(mat_mul(g(t, RATIONAL), phi(line, s)), tuple(Fraction(x) for x in v))
        assert pt.coords() == direct  # exact in rational mode


def test_flow_standard_matches_matrix_path_f64():
    rng = random.Random(6)
    line = LineSegmentSpec(0.3, 0.7, 0.0, 1.0, F64)
    for _ in range(100):
        t = FlowTime.of(rng.uniform(0, 12))
        s = rng.uniform(0, 1)
        v = IntegerVec3(rng.randint(-9, 9), rng.randint(-9, 9), rng.randint(1, 9))
        pt = flow_standard(line, s, t, v)
        direct = mat_vec(mat_mul(g(t, F64), phi(line, s)), tuple(float(x) for x in v))
        for got, want in zip(pt.coords(), direct):
            assert got == pytest.approx(want, rel=1e-10, abs=1e-280)


def test_flow_standard_matches_matrix_path_bigfloat():
    from latflow.scalars import bigfloat, exact_ratio
    mode = bigfloat(192)
    rng = random.Random(44)
    line = LineSegmentSpec(mode.sqrt(2), mode.sqrt(3), mode.from_int(0),
                           mode.from_int(1), mode)
    for _ in range(20):
        t = FlowTime.of(rng.uniform(0, 12))
        s = mode.from_fraction(Fraction(rng.randint(0, 100), 100))
        v = IntegerVec3(rng.randint(-9, 9), rng.randint(-9, 9), rng.randint(1, 9))
        pt = flow_standard(line, s, t, v)
        with mode.workprec():
            direct = mat_vec(mat_mul(g(t, mode), phi(line, s)), tuple(v))
            errs = [abs(float(got - want)) <= 1e-30 * max(1.0, abs(float(want)))
                    for got, want in zip(pt.coords(), direct)]
        assert all(errs)


def test_flow_standard_rational_divergence_vector():
    # v = (-p1, -p2, q) kills s: phi(s) v = (0, -p2, q) for every s, t
    v = IntegerVec3(-2, -3, 6)
    for u in (Fraction(1), Fraction(7, 2), Fraction(100)):
        t = FlowTime.from_exp(u)
        for s in (Fraction(0), Fraction(1, 2), Fraction(1)):
            pt = flow_standard(RATIONAL_LINE, s, t, v)
            assert pt.coords() == (0, -3 / u, 6 / u)


def test_flow_standard_example_values():
    # t = 2: coordinates (0, -3 e^-2, 6 e^-2), sup-norm 6 e^-2 ~ 0.8120
    line = LineSegmentSpec(0.5, float(Fraction(1, 3)), 0.0, 1.0, F64)
    pt = flow_standard(line, 0.25, FlowTime.of(2.0), IntegerVec3(-2, -3, 6))
    x, y, z = pt.coords()
    assert x == pytest.approx(0.0, abs=1e-15)
    assert y == pytest.approx(-3 * math.exp(-2), rel=1e-14)
    assert z == pytest.approx(6 * math.exp(-2), rel=1e-14)
    assert 6 * math.exp(-2) == pytest.approx(0.8120116994196762, rel=1e-12)


def test_flow_identity_vector():
    pt = flow_standard(RATIONAL_LINE, Fraction(0), FlowTime.from_exp(Fraction(1)),
                       IntegerVec3(1, 0, 0))
    assert pt.coords() == (1, 0, 0)


def test_flow_rejects_zero_vector():
    with pytest.raises(InvalidInputError):
        flow_standard(RATIONAL_LINE, Fraction(0), FlowTime.of(0.0), IntegerVec3(0, 0, 0))
    with pytest.raises(InvalidInputError):
        flow_ext2(RATIONAL_LINE, Fraction(0), FlowTime.of(0.0), IntegerVec3(0, 0, 0))


def test_first_coordinate_is_affine_in_s():
    rng = random.Random(8)
    line = random_rational_line(rng)
    t = FlowTime.from_exp(Fraction(5, 2))
    v = IntegerVec3(3, -4, 7)
    # fit through two points, predict the rest exactly
    p0 = flow_standard(line, Fraction(0), t, v).first_coord()
    p1 = flow_standard(line, Fraction(1), t, v).first_coord()
    for k in range(2, 12):
        s = Fraction(k, 11)
        expect = p0 + (p1 - p0) * s
        assert flow_standard(line, s, t, v).first_coord() == expect


def test_ext2_fixed_vectors():
    # e12 is phi-invariant and expands by e^t
    t = FlowTime.from_exp(Fraction(3))
    out = flow_ext2(RATIONAL_LINE, Fraction(1, 2), t, IntegerVec3(1, 0, 0))
    assert out == (3, 0, 0)
    # e13 at t = 0 is unchanged
    out = flow_ext2(RATIONAL_LINE, Fraction(1, 2), FlowTime.from_exp(Fraction(1)),
                    IntegerVec3(0, 0, 1))
    assert out == (0, 0, 1)


def test_ext2_e23_example():
    # w = e23, (a,b) = (1,0), s = 2, t = 0 -> (-2, 1, 2)
    line = LineSegmentSpec(Fraction(1), Fraction(0), Fraction(0), Fraction(3), RATIONAL)
    out = flow_ext2(line, Fraction(2), FlowTime.from_exp(Fraction(1)),
                    IntegerVec3(0, 1, 0))
    assert out == (-2, 1, 2)


def test_segment_sup_rational_witness_is_s_independent():
    v = IntegerVec3(-2, -3, 6)
    for u in (Fraction(1), Fraction(3), Fraction(20), Fraction(1000)):
        t = FlowTime.from_exp(u)
        assert segment_sup(RATIONAL_LINE, t, v) == Fraction(6) / u


def test_segment_sup_degenerate_interval_matches_pointwise():
    line = LineSegmentSpec(0.3, 0.7, 0.0, 1e-9, F64)
    t = FlowTime.of(0.0)
    v = IntegerVec3(2, -1, 4)
    sup = segment_sup(line, t, v)
    pt = max(abs(c) for c in flow_standard(line, 0.0, t, v).coords())
    assert sup == pytest.approx(pt, rel=1e-8)


def test_segment_sup_rejects_zero():
    with pytest.raises(InvalidInputError):
        segment_sup(RATIONAL_LINE, FlowTime.of(0.0), IntegerVec3(0, 0, 0))


def test_ext2_constant_values():
    def const(s1, s2):
        line = LineSegmentSpec(Fraction(1), Fraction(0), Fraction(s1), Fraction(s2), RATIONAL)
        return ext2_constant(line)

    assert const(0, 1) == Fraction(1, 2)
    assert const(0, 2) == 1
    assert const(-1, 1) == 1


def test_ext2_lower_bound_random_integer_vectors():
    rng = random.Random(17)
    intervals = [(Fraction(0), Fraction(1)), (Fraction(-1), Fraction(1)),
                 (Fraction(1, 4), Fraction(3, 4))]
    for s1, s2 in intervals:
        line = LineSegmentSpec(Fraction(1, 2), Fraction(1, 3), s1, s2, RATIONAL)
        c_i = ext2_constant(line)
        for _ in range(200):
            w = IntegerVec3(rng.randint(-100, 100), rng.randint(-100, 100),
                            rng.randint(-100, 100))
            if w.is_zero():
                continue
            for k in (0, 1, 4, 8):
                u = Fraction(3) ** k  # e^t = 3^k, t = k ln 3 >= 0
                t = FlowTime.from_exp(u)
                assert segment_sup(line, t, w, rep="ext2") >= c_i * u


def test_unipotent_reparametrization_identity():
    rng = random.Random(23)
    for _ in range(25):
        line = random_rational_line(rng)
        u = Fraction(rng.randint(1, 30), rng.randint(1, 9))
        t = FlowTime.from_exp(u)
        s0 = line.s1
        s = Fraction(rng.randint(0, 10), 10)
        r = u ** 3 * (s - s0)
        lhs = mat_mul(g(t, RATIONAL), phi(line, s))
        rhs = mat_mul(unipotent_factor(r, line.a, RATIONAL),
                      mat_mul(g(t, RATIONAL), phi(line, s0)))
        assert lhs == rhs


def test_vandermonde_examples():
    line = LineSegmentSpec(Fraction(0), Fraction(0), Fraction(0), Fraction(1), RATIONAL)
    t = FlowTime.from_exp(Fraction(1))
    chk = vandermonde_check([1, 0], t, line)
    assert chk.lhs == 1 and chk.rhs == Fraction(1, 2) and chk.passed
    chk = vandermonde_check([0, 1], t, line)
    assert chk.lhs == 1 and chk.rhs == Fraction(1, 2) and chk.passed


def test_vandermonde_all_ones_and_random():
    rng = random.Random(29)
    line = LineSegmentSpec(Fraction(0), Fraction(0), Fraction(0), Fraction(1), RATIONAL)
    for m in range(1, 7):
        t = FlowTime.from_exp(Fraction(rng.randint(1, 12)))
        assert vandermonde_check([1] * (m + 1), t, line).passed
        for _ in range(20):
            w = [rng.randint(-50, 50) for _ in range(m + 1)]
            if all(c == 0 for c in w):
                continue
            assert vandermonde_check(w, t, line).passed


def test_vandermonde_rejects_bad_input():
    line = LineSegmentSpec(Fraction(0), Fraction(0), Fraction(0), Fraction(1), RATIONAL)
    with pytest.raises(InvalidInputError):
        vandermonde_check([0, 0, 0], FlowTime.of(0.0), line)
    with pytest.raises(InvalidInputError):
        vandermonde_check([5], FlowTime.of(0.0), line)

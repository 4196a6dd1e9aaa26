"""Inequality engine: builders, evaluation, baselines, counterexample hunts.

The 1x1 consistency tests compare every chain term against the plain-float
reference in scalar_oracle, which shares no code with the package.
"""

import math

import numpy as np
import pytest

import scalar_oracle as oracle
from loewner_lab.errors import (
    HypothesisViolation,
    ShapeMismatch,
    UnknownRelaxation,
    UnknownTheorem,
)
from loewner_lab.chains import (
    THEOREMS,
    baseline_chain,
    build_chain,
    evaluate_chain,
    geometric_interpolant,
    hunt_counterexample,
    resolve_theorem,
    sample_instance_for,
)
from loewner_lab.functions import (
    FunctionDescriptor,
    Interval,
    exp_function,
    power_function,
    tilde_t,
)
from loewner_lab.hermitian import (
    HermitianMatrix,
    apply_scalar_function,
    loewner_leq,
)
from loewner_lab.instances import (
    MercerInstance,
    MidpointInstance,
    QuadrupleInstance,
    SumRelation,
    sample_mercer_family,
    sample_quadruple,
)
from loewner_lab.maps import IdentityMap, sample_map
from loewner_lab.seeding import spawn_rng


def one(v):
    return HermitianMatrix([[float(v)]])


def scalar(mat):
    return float(mat.entries[0, 0].real)


WORKED = QuadrupleInstance(A=one(0), B=one(2), C=one(2), D=one(5),
                           m=1.0, M=3.0, relation=SumRelation.SUM_LEQ)
WORKED_NONNEG = QuadrupleInstance(A=one(0), B=one(2), C=one(2), D=one(5),
                                  m=1.0, M=3.0, relation=SumRelation.SUM_LEQ,
                                  nonneg_A=True)


# -- worked examples ----------------------------------------------------------


def test_lc_quad_worked_chain_values():
    chain = build_chain("lc-quad", WORKED, exp_function())
    values = [scalar(t) for t in chain.terms]
    e = math.e
    expected = [2 * e**2, 2 * e**2, e + e**3, 1 + e**5, 1 + e**5]
    for got, want in zip(values, expected):
        assert got == pytest.approx(want, rel=1e-12)
    report = evaluate_chain(chain, 1e-9)
    assert report.passed
    assert [lk.equality for lk in report.links] == [True, False, False, True]
    assert report.links[1].min_eigenvalue == pytest.approx(e + e**3 - 2 * e**2, rel=1e-10)
    assert report.links[2].min_eigenvalue == pytest.approx(1 + e**5 - e - e**3, rel=1e-10)


def test_sq_quad_worked_chain_values():
    chain = build_chain("sq-quad", WORKED_NONNEG, power_function(2))
    assert scalar(chain.terms[0]) == pytest.approx(10.0, abs=1e-12)
    assert scalar(chain.terms[1]) == pytest.approx(14.0, abs=1e-11)
    assert evaluate_chain(chain, 1e-9).passed


def test_two_term_chain_equal_terms_pass_with_equality():
    a = HermitianMatrix([[1.0, 0.5], [0.5, 2.0]])
    from loewner_lab.chains import ExpressionChain

    chain = ExpressionChain(theorem="LC-QUAD", terms=(a, a), labels=("x", "x"))
    rep = evaluate_chain(chain, 1e-9)
    assert rep.passed and rep.links[0].equality


def test_reversed_chain_fails():
    chain = build_chain("lc-quad", WORKED, exp_function())
    from loewner_lab.chains import ExpressionChain

    flipped = ExpressionChain(
        theorem="LC-QUAD", terms=tuple(reversed(chain.terms)),
        labels=tuple(reversed(chain.labels)),
    )
    rep = evaluate_chain(flipped, 1e-9)
    assert not rep.passed
    assert rep.links[1].min_eigenvalue < 0


# -- scalar-oracle consistency on 1x1 instances -------------------------------


def fn_pairs_for(spec):
    if spec.power_predicate is not None:
        if "p <= 0" in spec.power_description:
            return [(power_function(-1), oracle.RECIP)]
        return [(power_function(2), oracle.SQUARE), (power_function(3), oracle.CUBE)]
    if spec.required_class == "superquadratic":
        return [(power_function(2), oracle.SQUARE), (power_function(3), oracle.CUBE)]
    if spec.required_class == "log-convex":
        return [(exp_function(), oracle.EXP), (power_function(-1), oracle.RECIP)]
    return [(exp_function(), oracle.EXP), (power_function(2), oracle.SQUARE)]


def oracle_terms(tid, inst, sf):
    m, M = inst.m, inst.M
    if isinstance(inst, QuadrupleInstance):
        a, b, c, d = (scalar(inst.A), scalar(inst.B), scalar(inst.C), scalar(inst.D))
        return {
            "LC-QUAD": lambda: oracle.lc_quad_terms(sf, a, b, c, d, m, M),
            "LC-POW": lambda: oracle.lc_quad_terms(sf, a, b, c, d, m, M),
            "LC-MAP": lambda: oracle.lc_quad_terms(sf, a, b, c, d, m, M),
            "LC-MAP-V2": lambda: oracle.lc_quad_terms(sf, a, b, c, d, m, M),
            "LC-MAP-V3": lambda: oracle.lc_quad_terms(sf, a, b, c, d, m, M),
            "MOS-BASE": lambda: oracle.mos_base_terms(sf, a, b, c, d),
            "SQ-MAP": lambda: oracle.sq_map_terms(sf, a, b, c, d, m, M),
            "SQ-POW": lambda: oracle.sq_map_terms(sf, a, b, c, d, m, M),
            "SQ-MAP-V2": lambda: oracle.sq_map_terms(sf, a, b, c, d, m, M),
            "SQ-MAP-V3": lambda: oracle.sq_map_terms(sf, a, b, c, d, m, M),
            "SQ-QUAD": lambda: oracle.sq_quad_terms(sf, a, b, c, d, m, M),
        }[tid]()
    if isinstance(inst, MidpointInstance):
        a, d = scalar(inst.A), scalar(inst.D)
        if tid == "LC-MID":
            return oracle.lc_mid_terms(sf, a, d, m, M)
        return oracle.sq_mid_terms(sf, a, d, m, M)
    if isinstance(inst, MercerInstance):
        bs = [scalar(b) for b in inst.B_list]
        ws = [mp.weight for mp in inst.family.maps]
        return {
            "JM-BASE": lambda: oracle.jm_base_terms(sf, bs, ws, m, M),
            "LC-MERCER": lambda: oracle.lc_mercer_terms(sf, bs, ws, m, M),
            "SQ-MERCER": lambda: oracle.sq_mercer_terms(sf, bs, ws, m, M),
        }[tid]()
    quads = [(scalar(q.A), scalar(q.B), scalar(q.C), scalar(q.D)) for q in inst.quadruples]
    ws = [mp.weight for mp in inst.family.maps]
    return {
        "LC-MULTI": lambda: oracle.lc_multi_terms(sf, quads, ws, m, M),
        "SQ-MULTI-A": lambda: oracle.sq_multi_a_terms(sf, quads, ws, m, M),
        "SQ-MULTI-B": lambda: oracle.sq_multi_b_terms(sf, quads, ws, m, M),
    }[tid]()


@pytest.mark.parametrize("tid", sorted(THEOREMS))
def test_scalar_consistency_on_1x1(tid):
    spec = THEOREMS[tid]
    for idx, (f, sf) in enumerate(fn_pairs_for(spec)):
        for k in range(6):
            rng = spawn_rng(640 + idx, k)
            inst = sample_instance_for(spec, f, 1, 1.0, 2.0, rng)
            maps = (
                sample_map(("identity", "pinching", "compression", "mixed")[k % 4], 1, rng)
                if spec.map_mode == "single" else None
            )
            chain = build_chain(tid, inst, f, maps)
            got = [scalar(t) for t in chain.terms]
            want = oracle_terms(tid, inst, sf)
            assert len(got) == len(want)
            for g_val, w_val in zip(got, want):
                assert g_val == pytest.approx(w_val, rel=1e-12, abs=1e-12), (tid, f.id, k)


# -- structural expectations ---------------------------------------------------


def test_chain_lengths_match_registry_shapes():
    expected = {
        "JM-BASE": 2, "MOS-BASE": 2,
        "LC-QUAD": 5, "LC-POW": 5, "LC-MID": 5,
        "LC-MAP": 5, "LC-MAP-V2": 5, "LC-MAP-V3": 5, "LC-MULTI": 5,
        "LC-MERCER": 3,
        "SQ-MAP": 2, "SQ-POW": 2, "SQ-MAP-V2": 2, "SQ-MAP-V3": 2,
        "SQ-MULTI-A": 2, "SQ-MULTI-B": 2, "SQ-MERCER": 2, "SQ-QUAD": 2, "SQ-MID": 2,
    }
    assert set(expected) == set(THEOREMS)
    for tid, spec in THEOREMS.items():
        f = fn_pairs_for(spec)[0][0]
        rng = spawn_rng(99, hash(tid) % 1000)
        inst = sample_instance_for(spec, f, 2, 1.0, 2.0, rng)
        maps = sample_map("mixed", 2, rng) if spec.map_mode == "single" else None
        chain = build_chain(tid, inst, f, maps)
        assert len(chain.terms) == expected[tid], tid


def test_lc_mercer_final_term_is_endpoint_sum():
    f = exp_function()
    inst = sample_mercer_family(3, 2, 0.5, 2.0, seed=3)
    chain = build_chain("lc-mercer", inst, f)
    endpoint = (f(inst.m) + f(inst.M)) * HermitianMatrix.identity(chain.terms[-1].dim)
    gap = np.linalg.norm(chain.terms[-1].entries - endpoint.entries)
    assert gap <= 1e-10 * max(1.0, endpoint.fro_norm)
    # the tent weight vanishes at both endpoints, which is what collapses it
    assert tilde_t(inst.m, inst.m, inst.M) == pytest.approx(0.0)
    assert tilde_t(inst.M, inst.m, inst.M) == pytest.approx(0.0)


def test_equality_links_for_exp():
    for seed in range(5):
        inst = sample_quadruple(3, 0.5, 2.0, SumRelation.SUM_LEQ, seed=seed)
        rep = evaluate_chain(build_chain("lc-quad", inst, exp_function()), 1e-9)
        assert rep.passed
        assert rep.links[0].equality and rep.links[3].equality


def test_commutation_shortcut_matches_factor_product():
    # the compiled interpolant term equals the product of its three
    # functional-calculus factors, which commute as functions of one matrix
    f = power_function(-1)
    inst = sample_quadruple(4, 1.0, 2.0, SumRelation.EQUAL, seed=9)
    m, M = inst.m, inst.M
    g = geometric_interpolant(f, m, M)
    compiled = apply_scalar_function(inst.B, g)

    from loewner_lab.functions import kf_constant

    kf = kf_constant(f, m, M)
    factors = [
        FunctionDescriptor(id="k^w", domain=Interval.real_line(), classes=frozenset(),
                           eval_fn=lambda t: kf ** tilde_t(t, m, M)),
        FunctionDescriptor(id="fm^w", domain=Interval.real_line(), classes=frozenset(),
                           eval_fn=lambda t: f(m) ** ((M - t) / (M - m))),
        FunctionDescriptor(id="fM^w", domain=Interval.real_line(), classes=frozenset(),
                           eval_fn=lambda t: f(M) ** ((t - m) / (M - m))),
    ]
    mats = [apply_scalar_function(inst.B, fd).entries for fd in factors]
    product = HermitianMatrix(mats[0] @ mats[1] @ mats[2])
    err = np.linalg.norm(compiled.entries - product.entries)
    assert err <= 1e-10 * max(1.0, compiled.fro_norm)


def test_condition_monotone_in_d():
    # under condition (i), growing D keeps the chain passing
    rng = np.random.default_rng(33)
    inst = sample_quadruple(3, 1.0, 2.0, SumRelation.SUM_LEQ, seed=4)
    f = exp_function()
    assert evaluate_chain(build_chain("lc-quad", inst, f), 1e-9).passed
    for _ in range(5):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        bigger = QuadrupleInstance(
            A=inst.A, B=inst.B, C=inst.C,
            D=inst.D + HermitianMatrix(g @ g.conj().T),
            m=inst.m, M=inst.M, relation=inst.relation,
        )
        assert evaluate_chain(build_chain("lc-quad", bigger, f), 1e-9).passed


def test_refinement_sandwich_on_random_instances():
    # first term matches the baseline left side, last the baseline right
    # side, and every middle term sits between them
    for tid in ("LC-QUAD", "LC-MAP", "LC-MAP-V2", "LC-MAP-V3", "LC-MULTI"):
        spec = THEOREMS[tid]
        f = exp_function()
        rng = spawn_rng(55, hash(tid) % 997)
        inst = sample_instance_for(spec, f, 3, 0.5, 2.0, rng)
        maps = sample_map("mixed", 3, rng) if spec.map_mode == "single" else None
        chain = build_chain(tid, inst, f, maps)
        base = baseline_chain(tid, inst, f, maps)
        assert np.allclose(chain.terms[0].entries, base.terms[0].entries)
        assert np.allclose(chain.terms[-1].entries, base.terms[-1].entries)
        assert evaluate_chain(base, 1e-9).passed
        for middle in chain.terms[1:-1]:
            assert loewner_leq(base.terms[0], middle, 1e-9).is_leq
            assert loewner_leq(middle, base.terms[-1], 1e-9).is_leq


def test_sq_refinement_tightens_baseline():
    f = power_function(2)
    for tid in ("SQ-MAP", "SQ-MAP-V2", "SQ-MAP-V3", "SQ-QUAD", "SQ-MID"):
        spec = THEOREMS[tid]
        rng = spawn_rng(56, hash(tid) % 997)
        inst = sample_instance_for(spec, f, 2, 1.0, 2.0, rng)
        maps = sample_map("compression:k=2", 2, rng) if spec.map_mode == "single" else None
        chain = build_chain(tid, inst, f, maps)
        base = baseline_chain(tid, inst, f, maps)
        assert evaluate_chain(chain, 1e-9).passed
        assert evaluate_chain(base, 1e-9).passed
        # refined left side dominates the baseline left side; refined right
        # side is dominated by the baseline right side
        assert loewner_leq(base.terms[0], chain.terms[0], 1e-9).is_leq
        assert loewner_leq(chain.terms[-1], base.terms[-1], 1e-9).is_leq


# -- hypothesis validation ------------------------------------------------------


def test_unknown_theorem():
    with pytest.raises(UnknownTheorem):
        build_chain("lc-nope", WORKED, exp_function())


def test_theorem_lookup_case_insensitive():
    assert resolve_theorem("Lc-Quad").id == "LC-QUAD"


def test_function_class_mismatch():
    with pytest.raises(HypothesisViolation) as err:
        build_chain("sq-map", WORKED_NONNEG, exp_function(), IdentityMap(1))
    assert "function class mismatch" in str(err.value)


def test_power_requirement():
    with pytest.raises(HypothesisViolation):
        build_chain("lc-pow", WORKED, exp_function())
    with pytest.raises(HypothesisViolation):
        inst = sample_quadruple(1, 1.0, 2.0, SumRelation.EQUAL, nonneg_A=True, seed=0)
        build_chain("sq-pow", inst, power_function(1.5), IdentityMap(1))


def test_shape_mismatch_instance_kind():
    with pytest.raises(ShapeMismatch):
        build_chain("lc-mid", WORKED, exp_function())


def test_map_required():
    inst = sample_quadruple(2, 1.0, 2.0, SumRelation.EQUAL, seed=1)
    with pytest.raises(ShapeMismatch):
        build_chain("lc-map", inst, exp_function())


def test_equal_sum_hypothesis_enforced():
    inst = sample_quadruple(2, 1.0, 2.0, SumRelation.SUM_LEQ, seed=2)
    with pytest.raises(HypothesisViolation) as err:
        build_chain("lc-map", inst, exp_function(), IdentityMap(2))
    assert "A+D = B+C" in str(err.value)


def test_condition_hypothesis_enforced():
    # decreasing f with a sum-leq instance satisfies neither condition
    inst = sample_quadruple(1, 1.0, 2.0, SumRelation.SUM_LEQ, nonneg_A=True, seed=3)
    with pytest.raises(HypothesisViolation) as err:
        build_chain("lc-quad", inst, power_function(-1))
    assert "condition" in str(err.value)


def test_invalid_spectra_rejected():
    bad = QuadrupleInstance(A=one(2.5), B=one(1.5), C=one(1.5), D=one(3),
                            m=1.0, M=2.0, relation=SumRelation.SUM_LEQ)
    with pytest.raises(HypothesisViolation):
        build_chain("lc-quad", bad, exp_function())


# -- counterexample hunting -----------------------------------------------------


def test_hunt_finds_reciprocal_counterexample():
    res = hunt_counterexample("lc-quad", "cond-i-f", 2000, 7, power_function(-1))
    assert res is not None
    assert not res.report.passed
    # the failing instance satisfies the sum clause of condition (i) but
    # inverts the endpoint comparison, which is what was relaxed
    inst = res.instance
    assert loewner_leq(inst.B + inst.C, inst.A + inst.D, 1e-9).is_leq
    assert 1.0 / inst.m > 1.0 / inst.M


def test_hunt_clean_hypotheses_find_nothing():
    assert hunt_counterexample("lc-quad", None, 400, 7, power_function(-1)) is None
    assert hunt_counterexample("lc-quad", None, 400, 8, exp_function()) is None


def test_hunt_zero_budget():
    assert hunt_counterexample("lc-quad", "cond-i-f", 0, 7, power_function(-1)) is None


def test_hunt_equal_sum_relaxation_on_map_theorem():
    res = hunt_counterexample("lc-map", "equal-sum", 2000, 13, exp_function(),
                              map_spec="mixed")
    assert res is not None and not res.report.passed


def test_hunt_unknown_relaxation():
    with pytest.raises(UnknownRelaxation):
        hunt_counterexample("lc-quad", "drop-everything", 10, 0, exp_function())
    with pytest.raises(UnknownRelaxation):
        hunt_counterexample("lc-quad", "equal-sum", 10, 0, exp_function())
    with pytest.raises(UnknownRelaxation):
        hunt_counterexample("lc-map", "cond-i-f", 10, 0, exp_function())
    with pytest.raises(UnknownRelaxation):
        hunt_counterexample("lc-mid", "cond-i-f", 10, 0, exp_function())


def test_hunt_deterministic():
    a = hunt_counterexample("lc-quad", "cond-i-f", 500, 21, power_function(-1))
    b = hunt_counterexample("lc-quad", "cond-i-f", 500, 21, power_function(-1))
    assert a is not None and b is not None
    assert a.attempt_index == b.attempt_index
    assert a.instance.digest() == b.instance.digest()

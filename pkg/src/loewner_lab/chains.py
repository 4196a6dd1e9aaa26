"""Compile inequality statements into chains of Hermitian terms, evaluate
the positive-semidefinite verdict of every adjacent link, and hunt for
counterexamples under relaxed hypotheses.

Term compilation rule: every operator-valued sub-expression in the registry
depends on exactly one operator argument, so each compiles to a single
scalar function applied by functional calculus; sums across different
operator arguments are then plain matrix sums.  No products of functions of
two different (non-commuting) operators ever arise.

Three scalar shapes recur:

* the chord through (m, f(m)) and (M, f(M)), applied affinely;
* the geometric interpolant g(t) = K^w(t) f(m)^(M-t)/(M-m) f(M)^(t-m)/(M-m)
  with K = f((m+M)/2)^2 / (f(m) f(M)) and w(t) the tent weight vanishing at
  m and M, which sits between f and the chord on [m, M] for log-convex f
  (and on the other side outside [m, M]);
* the superquadratic penalty h(t) = ((M-t) f(t-m) + (t-m) f(M-t)) / (M-m),
  the amount by which the chord over-estimates a superquadratic f on [m, M].

Registry ids (case-insensitive):

    JM-BASE    MOS-BASE
    LC-QUAD    LC-POW     LC-MID     LC-MAP     LC-MAP-V2  LC-MAP-V3
    LC-MULTI   LC-MERCER
    SQ-MAP     SQ-POW     SQ-MAP-V2  SQ-MAP-V3
    SQ-MULTI-A SQ-MULTI-B SQ-MERCER  SQ-QUAD    SQ-MID

On the multi-map variants SQ-MULTI-B and SQ-MERCER the per-operator penalty
is applied inside each map (sum_i Phi_i(h(B_i))).  Forming h from
sum_i Phi_i(f(B_i)) instead looks tempting but mixes functions of two
different operators (the product is not even Hermitian) and the resulting
claim is false already for scalars: f(t) = t^2, (A,B,C,D) = (0, 1.5, 1.5, 3)
with (m, M) = (1, 3) gives left side 6.75 against right side 6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    HypothesisViolation,
    ShapeMismatch,
    UnknownRelaxation,
    UnknownTheorem,
)
from .functions import (
    CONVEX,
    LOG_CONVEX,
    SUPERQUADRATIC,
    FunctionDescriptor,
    Interval,
    interpolation_constants,
    tilde_t,
)
from .hermitian import (
    DEFAULT_PSD_TOL,
    EQUALITY_TOL,
    HermitianMatrix,
    apply_scalar_function,
    loewner_leq,
    spectral_bounds,
)
from .instances import (
    MercerInstance,
    MidpointInstance,
    MultiQuadrupleInstance,
    QuadrupleInstance,
    SumRelation,
    sample_mercer_family,
    sample_midpoint,
    sample_quadruple,
    sample_quadruple_family,
    validate_instance,
)
from .maps import MapFamily, PositiveUnitalMap, sample_map
from .seeding import spawn_rng

RELAXATIONS = ("cond-i-f", "cond-i-sum", "cond-ii-f", "cond-ii-sum", "equal-sum")


# ---------------------------------------------------------------------------
# Scalar building blocks
# ---------------------------------------------------------------------------


def chord_coefficients(f: FunctionDescriptor, m: float, M: float) -> tuple[float, float]:
    """Slope and intercept of the line through (m, f(m)) and (M, f(M))."""
    fm, fM = f(m), f(M)
    slope = (fM - fm) / (M - m)
    intercept = (fm * M - fM * m) / (M - m)
    return slope, intercept


def geometric_interpolant(f: FunctionDescriptor, m: float, M: float) -> FunctionDescriptor:
    """The K-weighted geometric mean of f(m) and f(M); requires f > 0 at
    m, (m+M)/2, and M.  Defined on f's whole domain."""
    consts = interpolation_constants(f, m, M)
    fm, fM = f(m), f(M)
    log_k = math.log(consts.kf)
    log_fm = math.log(fm)
    log_fM = math.log(fM)
    width = M - m

    def g(t: float) -> float:
        w_hi = (t - m) / width
        return math.exp(tilde_t(t, m, M) * log_k + (1.0 - w_hi) * log_fm + w_hi * log_fM)

    return FunctionDescriptor(
        id=f"geom[{f.id};{m:g},{M:g}]",
        domain=f.domain,
        classes=frozenset(),
        eval_fn=g,
    )


def superquadratic_penalty(f: FunctionDescriptor, m: float, M: float) -> FunctionDescriptor:
    """h(t) = ((M-t) f(t-m) + (t-m) f(M-t)) / (M-m) on [m, M]."""
    width = M - m

    def h(t: float) -> float:
        return ((M - t) * f(t - m) + (t - m) * f(M - t)) / width

    return FunctionDescriptor(
        id=f"penalty[{f.id};{m:g},{M:g}]",
        domain=Interval.closed(m, M),
        classes=frozenset(),
        eval_fn=h,
    )


def _affine(x: HermitianMatrix, slope: float, intercept: float) -> HermitianMatrix:
    return slope * x + intercept * HermitianMatrix.identity(x.dim)


# ---------------------------------------------------------------------------
# Chain and report types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpressionChain:
    """Ordered Hermitian terms asserted pairwise comparable, ascending."""

    theorem: str
    terms: tuple
    labels: tuple
    instance_digest: str = ""

    def __post_init__(self):
        if len(self.terms) < 2:
            raise ShapeMismatch("a chain needs at least two terms")
        dims = {t.dim for t in self.terms}
        if len(dims) != 1:
            raise ShapeMismatch(f"chain terms live in different dimensions: {sorted(dims)}")


@dataclass(frozen=True)
class LinkReport:
    lower_label: str
    upper_label: str
    min_eigenvalue: float
    diff_fro_norm: float
    verdict: str
    equality: bool
    tolerance_used: float

    @property
    def holds(self) -> bool:
        return self.min_eigenvalue >= -self.tolerance_used


@dataclass(frozen=True)
class ChainReport:
    theorem: str
    links: tuple
    passed: bool
    tolerance: float
    instance_digest: str = ""
    seed: int | None = None

    @property
    def min_link_eigenvalue(self) -> float:
        return min(link.min_eigenvalue for link in self.links)

    @property
    def equality_links(self) -> int:
        return sum(1 for link in self.links if link.equality)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "passed": self.passed,
            "tolerance": float(self.tolerance),
            "instance_digest": self.instance_digest,
            "seed": self.seed,
            "links": [
                {
                    "lower": lk.lower_label,
                    "upper": lk.upper_label,
                    "min_eigenvalue": float(lk.min_eigenvalue),
                    "diff_fro_norm": float(lk.diff_fro_norm),
                    "verdict": lk.verdict,
                    "equality": lk.equality,
                    "tolerance_used": float(lk.tolerance_used),
                }
                for lk in self.links
            ],
        }


def evaluate_chain(chain: ExpressionChain, tol: float = DEFAULT_PSD_TOL,
                   seed: int | None = None) -> ChainReport:
    """Check every adjacent pair in the Loewner order.

    A link holds when the smallest eigenvalue of (upper - lower) stays above
    minus the effective tolerance; it is flagged an equality when the
    difference is negligible relative to the terms.
    """
    links = []
    ok = True
    for lo, hi, l_lo, l_hi in zip(chain.terms, chain.terms[1:], chain.labels, chain.labels[1:]):
        verdict = loewner_leq(lo, hi, tol)
        diff_norm = float(np.linalg.norm(hi.entries - lo.entries))
        equality = diff_norm <= EQUALITY_TOL * max(1.0, lo.fro_norm, hi.fro_norm)
        holds = verdict.min_eigenvalue_of_difference >= -verdict.tolerance_used
        ok = ok and holds
        links.append(
            LinkReport(
                lower_label=l_lo,
                upper_label=l_hi,
                min_eigenvalue=verdict.min_eigenvalue_of_difference,
                diff_fro_norm=diff_norm,
                verdict=verdict.relation.value,
                equality=equality,
                tolerance_used=verdict.tolerance_used,
            )
        )
    return ChainReport(
        theorem=chain.theorem,
        links=tuple(links),
        passed=ok,
        tolerance=tol,
        instance_digest=chain.instance_digest,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Hypothesis checks
# ---------------------------------------------------------------------------


def _f_leq(a: float, b: float, tol: float) -> bool:
    return a <= b + tol * max(1.0, abs(a), abs(b))


def _check_sum_condition(inst: QuadrupleInstance, f: FunctionDescriptor,
                         tol: float, relaxed: str | None) -> None:
    """Condition (i): B+C <= A+D and f(m) <= f(M); condition (ii) is the
    mirror image.  ``relaxed`` names the single clause to skip."""
    fm, fM = f(inst.m), f(inst.M)
    verdict = loewner_leq(inst.B + inst.C, inst.A + inst.D, tol)
    sum_leq, sum_geq = verdict.is_leq, verdict.is_geq
    f_i = _f_leq(fm, fM, tol)
    f_ii = _f_leq(fM, fm, tol)
    if relaxed == "cond-i-f":
        if not sum_leq:
            raise HypothesisViolation("condition (i) sum clause", "B+C <= A+D fails")
        return
    if relaxed == "cond-i-sum":
        if not f_i:
            raise HypothesisViolation("condition (i) f clause", f"f(m)={fm} > f(M)={fM}")
        return
    if relaxed == "cond-ii-f":
        if not sum_geq:
            raise HypothesisViolation("condition (ii) sum clause", "A+D <= B+C fails")
        return
    if relaxed == "cond-ii-sum":
        if not f_ii:
            raise HypothesisViolation("condition (ii) f clause", f"f(M)={fM} > f(m)={fm}")
        return
    if (sum_leq and f_i) or (sum_geq and f_ii):
        return
    raise HypothesisViolation(
        "neither condition (i) nor (ii)",
        f"sum_leq={sum_leq}, sum_geq={sum_geq}, f(m)={fm}, f(M)={fM}",
    )


def _check_equal_sum(inst: QuadrupleInstance, tol: float, relaxed: str | None) -> None:
    if relaxed == "equal-sum":
        return
    lhs = inst.B + inst.C
    rhs = inst.A + inst.D
    gap = float(np.linalg.norm(rhs.entries - lhs.entries))
    if gap > tol * max(1.0, lhs.fro_norm + rhs.fro_norm):
        raise HypothesisViolation("A+D = B+C", f"difference norm {gap:.3e}")


def _check_nonneg(matrices, tol: float, what: str) -> None:
    for name, mat in matrices:
        lo = spectral_bounds(mat)[0]
        if lo < -tol * max(1.0, mat.fro_norm):
            raise HypothesisViolation(f"0 <= {what}", f"lambda_min({name}) = {lo!r}")


def _require_class(f: FunctionDescriptor, cls: str) -> None:
    if cls not in f.classes:
        raise HypothesisViolation("function class mismatch", f"{f.id} is not {cls}")


def _require_power(f: FunctionDescriptor, predicate, description: str) -> None:
    p = f.params.get("p")
    if p is None or not predicate(p):
        raise HypothesisViolation("function class mismatch", f"{f.id} is not {description}")


def _single_map(maps, dim: int) -> PositiveUnitalMap:
    if not isinstance(maps, PositiveUnitalMap):
        raise ShapeMismatch("this theorem needs a single positive unital map")
    if maps.input_dim != dim:
        raise ShapeMismatch(f"map expects dim {maps.input_dim}, instance has dim {dim}")
    return maps


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------
# Each builder returns (labels, terms) for the full chain; the baseline
# builders return the two-term envelope with every refinement stripped.


def _lc_pieces(inst, f):
    g = geometric_interpolant(f, inst.m, inst.M)
    slope, intercept = chord_coefficients(f, inst.m, inst.M)
    return g, slope, intercept


def _build_lc_quad(inst: QuadrupleInstance, f, maps):
    g, slope, intercept = _lc_pieces(inst, f)
    fB = apply_scalar_function(inst.B, f)
    fC = apply_scalar_function(inst.C, f)
    gB = apply_scalar_function(inst.B, g)
    gC = apply_scalar_function(inst.C, g)
    chord = _affine(inst.B + inst.C, slope, 2.0 * intercept)
    gA = apply_scalar_function(inst.A, g)
    gD = apply_scalar_function(inst.D, g)
    fA = apply_scalar_function(inst.A, f)
    fD = apply_scalar_function(inst.D, f)
    labels = ("f(B)+f(C)", "g(B)+g(C)", "chord(B+C)", "g(A)+g(D)", "f(A)+f(D)")
    return labels, (fB + fC, gB + gC, chord, gA + gD, fA + fD)


def _build_lc_mid(inst: MidpointInstance, f, maps):
    g, slope, intercept = _lc_pieces(inst, f)
    w = inst.midpoint()
    fW = apply_scalar_function(w, f)
    gW = apply_scalar_function(w, g)
    chord = _affine(w, slope, intercept)
    gAD = 0.5 * (apply_scalar_function(inst.A, g) + apply_scalar_function(inst.D, g))
    fAD = 0.5 * (apply_scalar_function(inst.A, f) + apply_scalar_function(inst.D, f))
    labels = ("f(W)", "g(W)", "chord(W)", "(g(A)+g(D))/2", "(f(A)+f(D))/2")
    return labels, (fW, gW, chord, gAD, fAD)


def _build_lc_map(inst: QuadrupleInstance, f, maps):
    phi = _single_map(maps, inst.dim)
    g, slope, intercept = _lc_pieces(inst, f)
    pB, pC = phi.apply(inst.B), phi.apply(inst.C)
    pA, pD = phi.apply(inst.A), phi.apply(inst.D)
    t1 = phi.apply(apply_scalar_function(inst.B, f)) + phi.apply(apply_scalar_function(inst.C, f))
    t2 = phi.apply(apply_scalar_function(inst.B, g)) + phi.apply(apply_scalar_function(inst.C, g))
    t3 = _affine(pB + pC, slope, 2.0 * intercept)
    t4 = apply_scalar_function(pA, g) + apply_scalar_function(pD, g)
    t5 = apply_scalar_function(pA, f) + apply_scalar_function(pD, f)
    labels = ("P(f(B))+P(f(C))", "P(g(B))+P(g(C))", "chord(P(B+C))",
              "g(P(A))+g(P(D))", "f(P(A))+f(P(D))")
    return labels, (t1, t2, t3, t4, t5)


def _build_lc_map_v2(inst: QuadrupleInstance, f, maps):
    phi = _single_map(maps, inst.dim)
    g, slope, intercept = _lc_pieces(inst, f)
    pB, pC = phi.apply(inst.B), phi.apply(inst.C)
    t1 = apply_scalar_function(pB, f) + apply_scalar_function(pC, f)
    t2 = apply_scalar_function(pB, g) + apply_scalar_function(pC, g)
    t3 = _affine(pB + pC, slope, 2.0 * intercept)
    t4 = phi.apply(apply_scalar_function(inst.A, g)) + phi.apply(apply_scalar_function(inst.D, g))
    t5 = phi.apply(apply_scalar_function(inst.A, f)) + phi.apply(apply_scalar_function(inst.D, f))
    labels = ("f(P(B))+f(P(C))", "g(P(B))+g(P(C))", "chord(P(B+C))",
              "P(g(A))+P(g(D))", "P(f(A))+P(f(D))")
    return labels, (t1, t2, t3, t4, t5)


def _build_lc_map_v3(inst: QuadrupleInstance, f, maps):
    phi = _single_map(maps, inst.dim)
    g, slope, intercept = _lc_pieces(inst, f)
    pB, pC = phi.apply(inst.B), phi.apply(inst.C)
    pA, pD = phi.apply(inst.A), phi.apply(inst.D)
    t1 = phi.apply(apply_scalar_function(inst.B, f)) + apply_scalar_function(pC, f)
    t2 = phi.apply(apply_scalar_function(inst.B, g)) + apply_scalar_function(pC, g)
    t3 = _affine(pB + pC, slope, 2.0 * intercept)
    t4 = apply_scalar_function(pA, g) + phi.apply(apply_scalar_function(inst.D, g))
    t5 = apply_scalar_function(pA, f) + phi.apply(apply_scalar_function(inst.D, f))
    labels = ("P(f(B))+f(P(C))", "P(g(B))+g(P(C))", "chord(P(B+C))",
              "g(P(A))+P(g(D))", "f(P(A))+P(f(D))")
    return labels, (t1, t2, t3, t4, t5)


def _family_sums(inst: MultiQuadrupleInstance):
    fam = inst.family
    bbar = fam.apply_sum([q.B for q in inst.quadruples])
    cbar = fam.apply_sum([q.C for q in inst.quadruples])
    abar = fam.apply_sum([q.A for q in inst.quadruples])
    dbar = fam.apply_sum([q.D for q in inst.quadruples])
    return fam, bbar, cbar, abar, dbar


def _build_lc_multi(inst: MultiQuadrupleInstance, f, maps):
    g, slope, intercept = _lc_pieces(inst, f)
    fam, bbar, cbar, abar, dbar = _family_sums(inst)
    sum_fB = fam.apply_sum([apply_scalar_function(q.B, f) for q in inst.quadruples])
    sum_gB = fam.apply_sum([apply_scalar_function(q.B, g) for q in inst.quadruples])
    sum_gD = fam.apply_sum([apply_scalar_function(q.D, g) for q in inst.quadruples])
    sum_fD = fam.apply_sum([apply_scalar_function(q.D, f) for q in inst.quadruples])
    t1 = sum_fB + apply_scalar_function(cbar, f)
    t2 = sum_gB + apply_scalar_function(cbar, g)
    t3 = _affine(bbar + cbar, slope, 2.0 * intercept)
    t4 = apply_scalar_function(abar, g) + sum_gD
    t5 = apply_scalar_function(abar, f) + sum_fD
    labels = ("S_i P_i(f(B_i)) + f(S_i P_i(C_i))", "S_i P_i(g(B_i)) + g(S_i P_i(C_i))",
              "chord(S_i P_i(B_i+C_i))", "g(S_i P_i(A_i)) + S_i P_i(g(D_i))",
              "f(S_i P_i(A_i)) + S_i P_i(f(D_i))")
    return labels, (t1, t2, t3, t4, t5)


def _mercer_combination(inst: MercerInstance):
    fam = inst.family
    bbar = fam.apply_sum(list(inst.B_list))
    w = (inst.M + inst.m) * HermitianMatrix.identity(fam.output_dim) - bbar
    return fam, bbar, w


def _build_lc_mercer(inst: MercerInstance, f, maps):
    g, _, _ = _lc_pieces(inst, f)
    fam, bbar, w = _mercer_combination(inst)
    sum_fB = fam.apply_sum([apply_scalar_function(b, f) for b in inst.B_list])
    sum_gB = fam.apply_sum([apply_scalar_function(b, g) for b in inst.B_list])
    t1 = sum_fB + apply_scalar_function(w, f)
    t2 = sum_gB + apply_scalar_function(w, g)
    t3 = (f(inst.m) + f(inst.M)) * HermitianMatrix.identity(w.dim)
    labels = ("S_i P_i(f(B_i)) + f(W)", "S_i P_i(g(B_i)) + g(W)", "f(m)+f(M)")
    return labels, (t1, t2, t3)


def _build_jm_base(inst: MercerInstance, f, maps):
    fam, bbar, w = _mercer_combination(inst)
    sum_fB = fam.apply_sum([apply_scalar_function(b, f) for b in inst.B_list])
    t1 = apply_scalar_function(w, f)
    t2 = (f(inst.m) + f(inst.M)) * HermitianMatrix.identity(w.dim) - sum_fB
    return ("f(W)", "f(m)+f(M) - S_i P_i(f(B_i))"), (t1, t2)


def _build_mos_base(inst: QuadrupleInstance, f, maps):
    phi = _single_map(maps, inst.dim)
    t1 = apply_scalar_function(phi.apply(inst.B), f) + apply_scalar_function(phi.apply(inst.C), f)
    t2 = phi.apply(apply_scalar_function(inst.A, f)) + phi.apply(apply_scalar_function(inst.D, f))
    return ("f(P(B))+f(P(C))", "P(f(A))+P(f(D))"), (t1, t2)


# -- superquadratic chains ---------------------------------------------------


def _sq_pieces(inst, f):
    h = superquadratic_penalty(f, inst.m, inst.M)
    gap = f(inst.M - inst.m) / (inst.M - inst.m)
    return h, gap


def _sq_outer_corrections(f, gap, m, M, A, D, phi=None):
    """Corrections attached to the A/D side.

    With a map: Phi(f(mI - A)) + gap * (mI - Phi(A)) and the mirror for D.
    Without (phi None): f applied directly to the shifted operators.
    """
    eye_in = HermitianMatrix.identity(A.dim)
    shift_a = m * eye_in - A
    shift_d = D - M * eye_in
    f_a = apply_scalar_function(shift_a, f)
    f_d = apply_scalar_function(shift_d, f)
    if phi is not None:
        f_a = phi.apply(f_a)
        f_d = phi.apply(f_d)
        lin_a = gap * (m * HermitianMatrix.identity(phi.output_dim) - phi.apply(A))
        lin_d = gap * (phi.apply(D) - M * HermitianMatrix.identity(phi.output_dim))
    else:
        lin_a = gap * shift_a
        lin_d = gap * shift_d
    return f_a + lin_a + f_d + lin_d


def _build_sq_map(inst: QuadrupleInstance, f, maps):
    phi = _single_map(maps, inst.dim)
    h, gap = _sq_pieces(inst, f)
    pB, pC = phi.apply(inst.B), phi.apply(inst.C)
    lhs = apply_scalar_function(pB, f) + apply_scalar_function(pC, f)
    rhs = (
        phi.apply(apply_scalar_function(inst.A, f))
        + phi.apply(apply_scalar_function(inst.D, f))
        - apply_scalar_function(pB, h)
        - apply_scalar_function(pC, h)
        - _sq_outer_corrections(f, gap, inst.m, inst.M, inst.A, inst.D, phi)
    )
    return ("f(P(B))+f(P(C))", "P(f(A))+P(f(D)) - penalties"), (lhs, rhs)


def _build_sq_map_v2(inst: QuadrupleInstance, f, maps):
    phi = _single_map(maps, inst.dim)
    h, gap = _sq_pieces(inst, f)
    pA, pD = phi.apply(inst.A), phi.apply(inst.D)
    eye_out = HermitianMatrix.identity(phi.output_dim)
    lhs = phi.apply(apply_scalar_function(inst.B, f)) + phi.apply(apply_scalar_function(inst.C, f))
    shift_a = inst.m * eye_out - pA
    shift_d = pD - inst.M * eye_out
    rhs = (
        apply_scalar_function(pA, f)
        + apply_scalar_function(pD, f)
        - phi.apply(apply_scalar_function(inst.B, h))
        - phi.apply(apply_scalar_function(inst.C, h))
        - apply_scalar_function(shift_a, f) - gap * shift_a
        - apply_scalar_function(shift_d, f) - gap * shift_d
    )
    return ("P(f(B))+P(f(C))", "f(P(A))+f(P(D)) - penalties"), (lhs, rhs)


def _build_sq_map_v3(inst: QuadrupleInstance, f, maps):
    # Mixed placement: the B argument enters through f(P(B)), so its penalty
    # is h(P(B)); the C argument enters through P(f(C)), so its penalty sits
    # inside the map.  A and D mirror that pairing.
    phi = _single_map(maps, inst.dim)
    h, gap = _sq_pieces(inst, f)
    pB = phi.apply(inst.B)
    pA, pD = phi.apply(inst.A), phi.apply(inst.D)
    eye_out = HermitianMatrix.identity(phi.output_dim)
    eye_in = HermitianMatrix.identity(inst.dim)
    lhs = apply_scalar_function(pB, f) + phi.apply(apply_scalar_function(inst.C, f))
    shift_d = pD - inst.M * eye_out
    rhs = (
        phi.apply(apply_scalar_function(inst.A, f))
        + apply_scalar_function(pD, f)
        - apply_scalar_function(pB, h)
        - phi.apply(apply_scalar_function(inst.C, h))
        - phi.apply(apply_scalar_function(inst.m * eye_in - inst.A, f))
        - gap * (inst.m * eye_out - pA)
        - apply_scalar_function(shift_d, f) - gap * shift_d
    )
    return ("f(P(B))+P(f(C))", "P(f(A))+f(P(D)) - penalties"), (lhs, rhs)


def _sq_family_outer(inst: MultiQuadrupleInstance, f, gap, abar, dbar):
    fam = inst.family
    eye_in = HermitianMatrix.identity(inst.dim)
    eye_out = HermitianMatrix.identity(fam.output_dim)
    sum_fa = fam.apply_sum(
        [apply_scalar_function(inst.m * eye_in - q.A, f) for q in inst.quadruples]
    )
    sum_fd = fam.apply_sum(
        [apply_scalar_function(q.D - inst.M * eye_in, f) for q in inst.quadruples]
    )
    lin = gap * ((inst.m * eye_out - abar) + (dbar - inst.M * eye_out))
    return sum_fa + sum_fd + lin


def _build_sq_multi_a(inst: MultiQuadrupleInstance, f, maps):
    h, gap = _sq_pieces(inst, f)
    fam, bbar, cbar, abar, dbar = _family_sums(inst)
    lhs = (
        apply_scalar_function(bbar, f)
        + apply_scalar_function(cbar, f)
        + apply_scalar_function(bbar, h)
        + apply_scalar_function(cbar, h)
    )
    sum_fA = fam.apply_sum([apply_scalar_function(q.A, f) for q in inst.quadruples])
    sum_fD = fam.apply_sum([apply_scalar_function(q.D, f) for q in inst.quadruples])
    rhs = sum_fA + sum_fD - _sq_family_outer(inst, f, gap, abar, dbar)
    labels = ("f(Bbar)+f(Cbar) + penalties", "S_i P_i(f(A_i))+S_i P_i(f(D_i)) - penalties")
    return labels, (lhs, rhs)


def _build_sq_multi_b(inst: MultiQuadrupleInstance, f, maps):
    h, gap = _sq_pieces(inst, f)
    fam, bbar, cbar, abar, dbar = _family_sums(inst)
    sum_fB = fam.apply_sum([apply_scalar_function(q.B, f) for q in inst.quadruples])
    sum_hB = fam.apply_sum([apply_scalar_function(q.B, h) for q in inst.quadruples])
    lhs = (
        sum_fB
        + apply_scalar_function(cbar, f)
        + sum_hB
        + apply_scalar_function(cbar, h)
    )
    eye_out = HermitianMatrix.identity(fam.output_dim)
    sum_fD = fam.apply_sum([apply_scalar_function(q.D, f) for q in inst.quadruples])
    sum_fd_shift = fam.apply_sum(
        [apply_scalar_function(q.D - inst.M * HermitianMatrix.identity(inst.dim), f)
         for q in inst.quadruples]
    )
    shift_abar = inst.m * eye_out - abar
    rhs = (
        apply_scalar_function(abar, f)
        + sum_fD
        - apply_scalar_function(shift_abar, f)
        - gap * shift_abar
        - sum_fd_shift
        - gap * (dbar - inst.M * eye_out)
    )
    labels = ("S_i P_i(f(B_i)) + f(Cbar) + penalties",
              "f(Abar) + S_i P_i(f(D_i)) - penalties")
    return labels, (lhs, rhs)


def _build_sq_mercer(inst: MercerInstance, f, maps):
    h, gap = _sq_pieces(inst, f)
    fam, bbar, w = _mercer_combination(inst)
    sum_hB = fam.apply_sum([apply_scalar_function(b, h) for b in inst.B_list])
    sum_fB = fam.apply_sum([apply_scalar_function(b, f) for b in inst.B_list])
    lhs = apply_scalar_function(w, f) + sum_hB + apply_scalar_function(w, h)
    rhs = (f(inst.m) + f(inst.M) - 2.0 * f(0.0)) * HermitianMatrix.identity(w.dim) - sum_fB
    labels = ("f(W) + penalties", "f(m)+f(M)-2f(0) - S_i P_i(f(B_i))")
    return labels, (lhs, rhs)


def _build_sq_quad(inst: QuadrupleInstance, f, maps):
    h, gap = _sq_pieces(inst, f)
    lhs = (
        apply_scalar_function(inst.B, f)
        + apply_scalar_function(inst.C, f)
        + apply_scalar_function(inst.B, h)
        + apply_scalar_function(inst.C, h)
    )
    rhs = (
        apply_scalar_function(inst.A, f)
        + apply_scalar_function(inst.D, f)
        - _sq_outer_corrections(f, gap, inst.m, inst.M, inst.A, inst.D)
    )
    return ("f(B)+f(C) + penalties", "f(A)+f(D) - penalties"), (lhs, rhs)


def _build_sq_mid(inst: MidpointInstance, f, maps):
    h, gap = _sq_pieces(inst, f)
    w = inst.midpoint()
    lhs = apply_scalar_function(w, f) + apply_scalar_function(w, h)
    rhs = 0.5 * (
        apply_scalar_function(inst.A, f)
        + apply_scalar_function(inst.D, f)
        - _sq_outer_corrections(f, gap, inst.m, inst.M, inst.A, inst.D)
    )
    return ("f(W) + penalty", "(f(A)+f(D))/2 - penalties"), (lhs, rhs)


# -- baselines ---------------------------------------------------------------


def _baseline_from_chain(builder):
    def base(inst, f, maps):
        labels, terms = builder(inst, f, maps)
        return (labels[0], labels[-1]), (terms[0], terms[-1])

    return base


def _baseline_sq_map(inst, f, maps):
    phi = _single_map(maps, inst.dim)
    t1 = apply_scalar_function(phi.apply(inst.B), f) + apply_scalar_function(phi.apply(inst.C), f)
    t2 = phi.apply(apply_scalar_function(inst.A, f)) + phi.apply(apply_scalar_function(inst.D, f))
    return ("f(P(B))+f(P(C))", "P(f(A))+P(f(D))"), (t1, t2)


def _baseline_sq_map_v2(inst, f, maps):
    phi = _single_map(maps, inst.dim)
    t1 = phi.apply(apply_scalar_function(inst.B, f)) + phi.apply(apply_scalar_function(inst.C, f))
    t2 = apply_scalar_function(phi.apply(inst.A), f) + apply_scalar_function(phi.apply(inst.D), f)
    return ("P(f(B))+P(f(C))", "f(P(A))+f(P(D))"), (t1, t2)


def _baseline_sq_map_v3(inst, f, maps):
    phi = _single_map(maps, inst.dim)
    t1 = apply_scalar_function(phi.apply(inst.B), f) + phi.apply(apply_scalar_function(inst.C, f))
    t2 = phi.apply(apply_scalar_function(inst.A, f)) + apply_scalar_function(phi.apply(inst.D), f)
    return ("f(P(B))+P(f(C))", "P(f(A))+f(P(D))"), (t1, t2)


def _baseline_sq_multi_a(inst, f, maps):
    fam, bbar, cbar, abar, dbar = _family_sums(inst)
    t1 = apply_scalar_function(bbar, f) + apply_scalar_function(cbar, f)
    t2 = fam.apply_sum([apply_scalar_function(q.A, f) for q in inst.quadruples]) + fam.apply_sum(
        [apply_scalar_function(q.D, f) for q in inst.quadruples]
    )
    return ("f(Bbar)+f(Cbar)", "S_i P_i(f(A_i))+S_i P_i(f(D_i))"), (t1, t2)


def _baseline_sq_multi_b(inst, f, maps):
    fam, bbar, cbar, abar, dbar = _family_sums(inst)
    t1 = fam.apply_sum([apply_scalar_function(q.B, f) for q in inst.quadruples]) + (
        apply_scalar_function(cbar, f)
    )
    t2 = apply_scalar_function(abar, f) + fam.apply_sum(
        [apply_scalar_function(q.D, f) for q in inst.quadruples]
    )
    return ("S_i P_i(f(B_i))+f(Cbar)", "f(Abar)+S_i P_i(f(D_i))"), (t1, t2)


def _baseline_sq_quad(inst, f, maps):
    t1 = apply_scalar_function(inst.B, f) + apply_scalar_function(inst.C, f)
    t2 = apply_scalar_function(inst.A, f) + apply_scalar_function(inst.D, f)
    return ("f(B)+f(C)", "f(A)+f(D)"), (t1, t2)


def _baseline_sq_mid(inst, f, maps):
    w = inst.midpoint()
    t1 = apply_scalar_function(w, f)
    t2 = 0.5 * (apply_scalar_function(inst.A, f) + apply_scalar_function(inst.D, f))
    return ("f(W)", "(f(A)+f(D))/2"), (t1, t2)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremSpec:
    id: str
    description: str
    instance_kind: str  # quadruple | multi | mercer | midpoint
    map_mode: str  # none | single | family
    required_class: str
    condition: str  # equal-sum | either-condition | none
    builder: object
    baseline: object
    needs_nonneg: bool = False
    power_predicate: object = None
    power_description: str = ""


def _spec(id, description, kind, map_mode, cls, condition, builder, baseline=None,
          needs_nonneg=False, power_predicate=None, power_description=""):
    return TheoremSpec(
        id=id,
        description=description,
        instance_kind=kind,
        map_mode=map_mode,
        required_class=cls,
        condition=condition,
        builder=builder,
        baseline=baseline or _baseline_from_chain(builder),
        needs_nonneg=needs_nonneg,
        power_predicate=power_predicate,
        power_description=power_description,
    )


THEOREMS: dict[str, TheoremSpec] = {
    t.id: t
    for t in [
        _spec("JM-BASE", "two-term Mercer baseline for convex f",
              "mercer", "family", CONVEX, "none", _build_jm_base),
        _spec("MOS-BASE", "two-term map baseline for convex f",
              "quadruple", "single", CONVEX, "equal-sum", _build_mos_base),
        _spec("LC-QUAD", "five-term log-convex chain, no maps",
              "quadruple", "none", LOG_CONVEX, "either-condition", _build_lc_quad),
        _spec("LC-POW", "LC-QUAD specialized to t^p with p <= 0",
              "quadruple", "none", LOG_CONVEX, "either-condition", _build_lc_quad,
              power_predicate=lambda p: p <= 0, power_description="a power with p <= 0"),
        _spec("LC-MID", "five-term log-convex chain at the midpoint pair",
              "midpoint", "none", LOG_CONVEX, "none", _build_lc_mid),
        _spec("LC-MAP", "five-term log-convex chain, map inside on B,C side",
              "quadruple", "single", LOG_CONVEX, "equal-sum", _build_lc_map),
        _spec("LC-MAP-V2", "five-term log-convex chain, map outside on B,C side",
              "quadruple", "single", LOG_CONVEX, "equal-sum", _build_lc_map_v2),
        _spec("LC-MAP-V3", "five-term log-convex chain, mixed placement",
              "quadruple", "single", LOG_CONVEX, "equal-sum", _build_lc_map_v3),
        _spec("LC-MULTI", "five-term log-convex chain over a map family",
              "multi", "family", LOG_CONVEX, "none", _build_lc_multi),
        _spec("LC-MERCER", "three-term Mercer interpolation for log-convex f",
              "mercer", "family", LOG_CONVEX, "none", _build_lc_mercer),
        _spec("SQ-MAP", "superquadratic refinement, map inside",
              "quadruple", "single", SUPERQUADRATIC, "equal-sum", _build_sq_map,
              baseline=_baseline_sq_map, needs_nonneg=True),
        _spec("SQ-POW", "SQ-MAP specialized to t^p with p >= 2",
              "quadruple", "single", SUPERQUADRATIC, "equal-sum", _build_sq_map,
              baseline=_baseline_sq_map, needs_nonneg=True,
              power_predicate=lambda p: p >= 2, power_description="a power with p >= 2"),
        _spec("SQ-MAP-V2", "superquadratic refinement, map outside",
              "quadruple", "single", SUPERQUADRATIC, "equal-sum", _build_sq_map_v2,
              baseline=_baseline_sq_map_v2, needs_nonneg=True),
        _spec("SQ-MAP-V3", "superquadratic refinement, mixed placement",
              "quadruple", "single", SUPERQUADRATIC, "equal-sum", _build_sq_map_v3,
              baseline=_baseline_sq_map_v3, needs_nonneg=True),
        _spec("SQ-MULTI-A", "superquadratic family refinement, combinations outside",
              "multi", "family", SUPERQUADRATIC, "none", _build_sq_multi_a,
              baseline=_baseline_sq_multi_a, needs_nonneg=True),
        _spec("SQ-MULTI-B", "superquadratic family refinement, mixed placement",
              "multi", "family", SUPERQUADRATIC, "none", _build_sq_multi_b,
              baseline=_baseline_sq_multi_b, needs_nonneg=True),
        _spec("SQ-MERCER", "superquadratic Mercer refinement",
              "mercer", "family", SUPERQUADRATIC, "none", _build_sq_mercer,
              baseline=_build_jm_base, needs_nonneg=True),
        _spec("SQ-QUAD", "superquadratic refinement under condition (i)/(ii)",
              "quadruple", "none", SUPERQUADRATIC, "either-condition", _build_sq_quad,
              baseline=_baseline_sq_quad, needs_nonneg=True),
        _spec("SQ-MID", "superquadratic refinement at the midpoint pair",
              "midpoint", "none", SUPERQUADRATIC, "none", _build_sq_mid,
              baseline=_baseline_sq_mid, needs_nonneg=True),
    ]
}

_KIND_TYPES = {
    "quadruple": QuadrupleInstance,
    "multi": MultiQuadrupleInstance,
    "mercer": MercerInstance,
    "midpoint": MidpointInstance,
}


def resolve_theorem(theorem_id: str) -> TheoremSpec:
    spec = THEOREMS.get(str(theorem_id).upper())
    if spec is None:
        raise UnknownTheorem(f"unknown theorem id {theorem_id!r}")
    return spec


def _check_hypotheses(spec: TheoremSpec, inst, f: FunctionDescriptor, maps,
                      tol: float, relaxed: str | None) -> None:
    expected = _KIND_TYPES[spec.instance_kind]
    if not isinstance(inst, expected):
        raise ShapeMismatch(
            f"{spec.id} expects a {expected.__name__}, got {type(inst).__name__}"
        )
    violations = validate_instance(inst, tol)
    if violations:
        raise HypothesisViolation("instance invariants", violations[0])
    if relaxed is not None:
        if relaxed not in RELAXATIONS:
            raise UnknownRelaxation(f"unknown relaxation {relaxed!r}")
        applies = "equal-sum" if spec.condition == "equal-sum" else (
            RELAXATIONS[:4] if spec.condition == "either-condition" else ()
        )
        if relaxed not in applies:
            raise UnknownRelaxation(f"relaxation {relaxed!r} does not apply to {spec.id}")
    _require_class(f, spec.required_class)
    if spec.power_predicate is not None:
        _require_power(f, spec.power_predicate, spec.power_description)
    if spec.needs_nonneg:
        if inst.m < 0:
            raise HypothesisViolation("0 <= m", f"m = {inst.m}")
        if isinstance(inst, QuadrupleInstance):
            _check_nonneg([("A", inst.A)], tol, "A")
        elif isinstance(inst, MidpointInstance):
            _check_nonneg([("A", inst.A)], tol, "A")
        elif isinstance(inst, MultiQuadrupleInstance):
            _check_nonneg([(f"A_{i}", q.A) for i, q in enumerate(inst.quadruples)], tol, "A_i")
    if spec.condition == "equal-sum" and isinstance(inst, QuadrupleInstance):
        _check_equal_sum(inst, tol, relaxed)
    elif spec.condition == "either-condition":
        _check_sum_condition(inst, f, tol, relaxed)
    if spec.map_mode == "single" and not isinstance(maps, PositiveUnitalMap):
        raise ShapeMismatch(f"{spec.id} needs a single positive unital map")
    if spec.map_mode == "family" and not isinstance(getattr(inst, "family", None), MapFamily):
        raise ShapeMismatch(f"{spec.id} needs an instance carrying a map family")


def build_chain(theorem, instance, f: FunctionDescriptor, maps=None, *,
                relaxed: str | None = None, tol: float = DEFAULT_PSD_TOL) -> ExpressionChain:
    """Compile the registered chain for this theorem on a concrete instance.

    Hypotheses are checked first (HypothesisViolation / ShapeMismatch name
    the failing condition); ``relaxed`` skips exactly one named clause,
    which is how the counterexample hunter probes necessity.
    """
    spec = resolve_theorem(theorem if isinstance(theorem, str) else theorem.id)
    _check_hypotheses(spec, instance, f, maps, tol, relaxed)
    labels, terms = spec.builder(instance, f, maps)
    return ExpressionChain(
        theorem=spec.id, terms=tuple(terms), labels=tuple(labels),
        instance_digest=instance.digest(),
    )


def baseline_chain(theorem, instance, f: FunctionDescriptor, maps=None, *,
                   tol: float = DEFAULT_PSD_TOL) -> ExpressionChain:
    """The two-term envelope of the theorem with every refinement stripped;
    the full chain passing implies this passes."""
    spec = resolve_theorem(theorem if isinstance(theorem, str) else theorem.id)
    _check_hypotheses(spec, instance, f, maps, tol, None)
    labels, terms = spec.baseline(instance, f, maps)
    return ExpressionChain(
        theorem=f"{spec.id}:baseline", terms=tuple(terms), labels=tuple(labels),
        instance_digest=instance.digest(),
    )


# ---------------------------------------------------------------------------
# Instance policy shared by the hunter and the campaign runner
# ---------------------------------------------------------------------------


def condition_relation(f: FunctionDescriptor, m: float, M: float) -> SumRelation:
    """The sum direction that matches f's slope sign on [m, M]: condition (i)
    wants B+C <= A+D when f(m) <= f(M), condition (ii) the reverse."""
    return SumRelation.SUM_LEQ if f(m) <= f(M) else SumRelation.SUM_GEQ


def needs_nonneg_instances(spec: TheoremSpec, f: FunctionDescriptor) -> bool:
    return spec.needs_nonneg or f.domain.lo >= 0.0


def sample_instance_for(spec: TheoremSpec, f: FunctionDescriptor, dim: int,
                        m: float, M: float, rng, *, family_size: int = 3,
                        relation: SumRelation | None = None):
    """Sample an instance matching the theorem's shape and hypotheses."""
    nonneg = needs_nonneg_instances(spec, f)
    if spec.instance_kind == "quadruple":
        if relation is None:
            relation = (SumRelation.EQUAL if spec.condition == "equal-sum"
                        else condition_relation(f, m, M))
        return sample_quadruple(dim, m, M, relation, nonneg_A=nonneg, seed=rng)
    if spec.instance_kind == "multi":
        return sample_quadruple_family(family_size, dim, m, M, nonneg_A=nonneg, seed=rng)
    if spec.instance_kind == "mercer":
        return sample_mercer_family(family_size, dim, m, M, seed=rng)
    if spec.instance_kind == "midpoint":
        return sample_midpoint(dim, m, M, nonneg_A=nonneg, seed=rng)
    raise ShapeMismatch(f"no sampler for instance kind {spec.instance_kind}")


_RELAX_RELATION = {
    # Relaxation -> relation to sample so that only the named clause breaks.
    "cond-i-f": SumRelation.SUM_LEQ,
    "cond-i-sum": SumRelation.SUM_GEQ,
    "cond-ii-f": SumRelation.SUM_GEQ,
    "cond-ii-sum": SumRelation.SUM_LEQ,
}


@dataclass(frozen=True)
class HuntResult:
    instance: object
    report: ChainReport
    attempts: int
    attempt_index: int


def hunt_counterexample(theorem, relaxation: str | None, budget: int, seed: int,
                        f: FunctionDescriptor, *, map_spec: str = "identity",
                        dims=(1, 2, 3), m: float = 1.0, M: float = 2.0,
                        tol: float = DEFAULT_PSD_TOL) -> HuntResult | None:
    """Sample up to ``budget`` instances violating only the named hypothesis
    and return the first whose chain fails, or None.

    With ``relaxation=None`` the instances satisfy all hypotheses, so a
    non-None result would witness a bug rather than a sharp hypothesis.
    """
    spec = resolve_theorem(theorem)
    if relaxation is not None:
        if relaxation not in RELAXATIONS:
            raise UnknownRelaxation(f"unknown relaxation {relaxation!r}")
        if spec.condition == "equal-sum":
            if relaxation != "equal-sum":
                raise UnknownRelaxation(f"{relaxation!r} does not apply to {spec.id}")
        elif spec.condition == "either-condition":
            if relaxation == "equal-sum":
                raise UnknownRelaxation(f"{relaxation!r} does not apply to {spec.id}")
        else:
            raise UnknownRelaxation(f"{spec.id} has no relaxable hypotheses")
    dims = tuple(dims)
    for attempt in range(budget):
        rng = spawn_rng(seed, attempt)
        dim = dims[attempt % len(dims)]
        if relaxation is None:
            relation = None
        elif relaxation == "equal-sum":
            relation = SumRelation.SUM_LEQ if attempt % 2 == 0 else SumRelation.SUM_GEQ
        else:
            relation = _RELAX_RELATION[relaxation]
        inst = sample_instance_for(spec, f, dim, m, M, rng, relation=relation)
        maps = sample_map(map_spec, dim, rng) if spec.map_mode == "single" else None
        chain = build_chain(spec.id, inst, f, maps, relaxed=relaxation, tol=tol)
        report = evaluate_chain(chain, tol, seed=seed)
        if not report.passed:
            return HuntResult(instance=inst, report=report,
                              attempts=attempt + 1, attempt_index=attempt)
    return None

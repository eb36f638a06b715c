import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qcorr.absolute import (
    AbsoluteVerdict,
    Method,
    OrderingPair,
    Property,
    absolutely_classical_cc,
    absolutely_classical_cq,
    absolutely_classical_qc,
    absolutely_local,
    absolutely_nonneg_cond_entropy,
    absolutely_ppt,
    absolutely_product,
    absolutely_separable_2xn,
    absolutely_unsteerable3,
    absolutely_unsteerable3_exact,
    absolutely_zero_discord,
    absolutely_zero_super_discord,
    batch_margin,
    closed_form_verdict,
    conjugate_matrix,
    falsify_absolute,
    necessary_family_step1,
    ordinary_margin,
    orderings,
    unsteerable3_exact_margin,
    unsteerable3_margin,
)
from qcorr.errors import BadSpectrum, BudgetExhausted, DimensionMismatch, UnsupportedDims
from qcorr.linalg import Spectrum
from qcorr.states import (
    UnitaryMatrix,
    bell,
    bell_diagonal,
    gisin,
    haar_unitaries,
    make_density,
    maximally_mixed,
    random_density,
    werner,
)

from conftest import seeds

MIXED = [0.25] * 4
PURE = [1.0, 0.0, 0.0, 0.0]


def werner_spec(w):
    return [(1 + 3 * w) / 4] + [(1 - w) / 4] * 3


def gisin_spec(lam):
    return [lam, (1 - lam) / 2, (1 - lam) / 2, 0.0]


def spectra(n, seed):
    return np.sort(np.random.default_rng(seed).dirichlet(np.ones(4), size=n), axis=1)[:, ::-1]


class TestSeparable:
    def test_maximally_mixed(self):
        v = absolutely_separable_2xn(MIXED)
        assert v.holds and v.margin == pytest.approx(0.5) and v.method is Method.CLOSED_FORM

    @pytest.mark.parametrize("w", [-1 / 3, 0.0, 0.2, 1 / 3 - 1e-9, 1 / 3 + 1e-9, 0.5, 1.0])
    def test_werner(self, w):
        assert absolutely_separable_2xn(werner_spec(w)).holds == (w <= 1 / 3)

    def test_gisin_never_analytic(self):
        # d4 = 0, so the margin is d3 - d1, which is zero only at lambda = 1/3
        for lam in np.linspace(0, 1, 201):
            d = np.sort(gisin_spec(lam))[::-1]
            v = absolutely_separable_2xn(gisin_spec(lam))
            assert v.margin == pytest.approx(d[2] - d[0], abs=1e-15)
            assert v.holds == math.isclose(lam, 1 / 3, abs_tol=1e-12)

    def test_qubit_qutrit(self):
        assert absolutely_separable_2xn([1 / 6] * 6, n=3).holds
        assert not absolutely_separable_2xn([0.5, 0.1, 0.1, 0.1, 0.1, 0.1], n=3).holds
        assert absolutely_separable_2xn([0.2, 0.2, 0.15, 0.15, 0.15, 0.15], n=3).margin == pytest.approx(
            -(0.2 - 0.15 - 2 * 0.15)
        )

    @pytest.mark.parametrize("bad", [[0.5, 0.5, 0.5, -0.5], [0.3, 0.3, 0.3], [0.5, 0.5, 0.1, 0.1], [np.nan, 1, 0, 0]])
    def test_bad_spectrum(self, bad):
        with pytest.raises(BadSpectrum):
            absolutely_separable_2xn(bad)

    def test_unsorted_input_is_sorted(self):
        assert absolutely_separable_2xn([0.1, 0.4, 0.2, 0.3]).margin == absolutely_separable_2xn(
            [0.4, 0.3, 0.2, 0.1]
        ).margin


class TestPPT:
    def test_ordering_counts(self):
        assert len(orderings(2)) == 6
        assert len(orderings(3)) == 4320

    def test_ordering_pair_validation(self):
        OrderingPair(((1, 1), (1, 2), (2, 2)), ((1, 2),))
        with pytest.raises(ValueError):
            OrderingPair(((1, 1), (1, 1), (2, 2)), ((1, 2),))
        with pytest.raises(ValueError):
            OrderingPair(((1, 1), (1, 2), (2, 2)), ())

    def test_examples(self):
        assert absolutely_ppt(MIXED).holds
        assert not absolutely_ppt(PURE).holds

    def test_equivalent_to_separable(self):
        for d in spectra(2000, 3):
            sep, ppt = absolutely_separable_2xn(d), absolutely_ppt(d)
            if abs(sep.margin) > 1e-9:
                assert sep.holds == ppt.holds

    def test_two_by_three(self):
        assert absolutely_ppt([1 / 6] * 6, (2, 3)).holds
        for d in np.sort(np.random.default_rng(0).dirichlet(np.ones(6), size=200), axis=1)[:, ::-1]:
            sep, ppt = absolutely_separable_2xn(d, 3), absolutely_ppt(d, (2, 3))
            if abs(sep.margin) > 1e-9:
                assert sep.holds == ppt.holds

    def test_three_by_three(self):
        v = absolutely_ppt([1 / 9] * 9, (3, 3))
        assert v.holds and v.details["n_orderings"] == 4320
        assert not absolutely_ppt([1.0] + [0.0] * 8, (3, 3)).holds

    def test_unsupported(self):
        with pytest.raises(UnsupportedDims):
            absolutely_ppt([1 / 16] * 16, (4, 4))


class TestLocal:
    @pytest.mark.parametrize("w", [0.0, 0.5, 0.7, 0.71, 0.9])
    def test_werner(self, w):
        assert absolutely_local(werner_spec(w)).holds == (w <= 1 / math.sqrt(2))

    @pytest.mark.parametrize("lam", [0.2, 0.7, 0.71, 0.95])
    def test_gisin(self, lam):
        assert absolutely_local(gisin_spec(lam)).holds == (lam <= 1 / math.sqrt(2))

    def test_mixed(self):
        assert absolutely_local(MIXED).margin == pytest.approx(1.0)


class TestUnsteerable:
    @pytest.mark.parametrize("w", [0.0, 0.5, 0.577, 0.578, 0.9])
    def test_werner(self, w):
        assert absolutely_unsteerable3(werner_spec(w)).holds == (w <= 1 / math.sqrt(3))
        assert absolutely_unsteerable3_exact(werner_spec(w)).holds == (w <= 1 / math.sqrt(3))

    @pytest.mark.parametrize("lam", [0.3, 0.66, 0.67, 0.9])
    def test_gisin(self, lam):
        assert absolutely_unsteerable3(gisin_spec(lam)).holds == (lam <= 2 / 3)

    def test_gisin_exact_boundary(self):
        lam = (1 + math.sqrt(3)) / 4
        assert absolutely_unsteerable3_exact(gisin_spec(lam)).margin == pytest.approx(0, abs=1e-12)

    def test_mixed(self):
        assert absolutely_unsteerable3(MIXED).holds

    def test_symmetric(self):
        d = np.array([0.5, 0.3, 0.15, 0.05])
        for p in ([3, 1, 0, 2], [2, 3, 1, 0]):
            assert unsteerable3_margin(d[p]) == pytest.approx(unsteerable3_margin(d))
            assert unsteerable3_exact_margin(d[p]) == pytest.approx(unsteerable3_exact_margin(d))

    def test_purity_form(self):
        d = spectra(500, 9)
        assert_allclose(unsteerable3_margin(d), 2 - 4 * np.sum(d * d, axis=1), atol=1e-14)

    def test_formula_is_sufficient_for_exact(self):
        d = spectra(100_000, 10)
        assert np.all(unsteerable3_exact_margin(d)[unsteerable3_margin(d) >= 0] >= -1e-12)

    def test_exact_value_is_attained(self):
        # the maximizing Bell-diagonal state sits in the orbit and reaches the bound
        from qcorr.criteria import steering_value

        d = np.array([0.55, 0.3, 0.1, 0.05])
        best = max(steering_value(bell_diagonal(*np.roll(d, k)))[0] for k in range(4))
        assert best == pytest.approx(1 - unsteerable3_exact_margin(d), abs=1e-12)


class TestEntropy:
    def test_werner_root(self):
        from scipy.optimize import brentq

        w0 = brentq(lambda w: 3 * (1 - w) * math.log2(1 - w) + (1 + 3 * w) * math.log2(1 + 3 * w) - 4, 0.5, 0.9)
        assert w0 == pytest.approx(0.7476, abs=1e-4)
        assert absolutely_nonneg_cond_entropy(werner_spec(w0)).margin == pytest.approx(0, abs=1e-12)

    def test_gisin_boundary(self):
        from scipy.optimize import brentq

        lam = brentq(lambda x: absolutely_nonneg_cond_entropy(gisin_spec(x)).margin, 0.5, 0.99)
        assert lam == pytest.approx(0.7729, abs=1e-4)

    def test_pure(self):
        v = absolutely_nonneg_cond_entropy(PURE)
        assert not v.holds and v.margin == pytest.approx(-1)


class TestZeroDiscord:
    ALIASES = [
        absolutely_zero_discord,
        absolutely_classical_cc,
        absolutely_classical_cq,
        absolutely_classical_qc,
        absolutely_product,
        absolutely_zero_super_discord,
    ]

    @pytest.mark.parametrize("f", ALIASES)
    def test_mixed(self, f):
        assert f(MIXED).holds

    @pytest.mark.parametrize("f", ALIASES)
    @pytest.mark.parametrize("w", [-0.1, 1e-6, 0.5])
    def test_werner_nonzero(self, f, w):
        assert not f(werner_spec(w)).holds

    def test_werner_zero_only(self):
        assert absolutely_zero_discord(werner_spec(0.0)).holds
        assert absolutely_zero_discord(werner_spec(1e-10)).holds

    def test_gisin_never(self):
        for lam in np.linspace(0, 1, 50):
            assert not absolutely_zero_discord(gisin_spec(lam)).holds

    def test_deviation_reported(self):
        assert absolutely_zero_discord([0.4, 0.2, 0.2, 0.2]).details["max_deviation"] == pytest.approx(0.15)


class TestStep1:
    def test_examples(self):
        assert necessary_family_step1(MIXED)
        assert necessary_family_step1([0.4, 0.4, 0.1, 0.1])
        assert necessary_family_step1(Spectrum.from_values([0.4, 0.1, 0.1, 0.4]))
        assert not necessary_family_step1([0.7, 0.1, 0.1, 0.1])

    @given(st.floats(0, 0.5))
    def test_family_members(self, d2):
        assert necessary_family_step1([0.5 - d2, d2, d2, 0.5 - d2])

    def test_wrong_length(self):
        with pytest.raises(BadSpectrum):
            necessary_family_step1([0.5, 0.5])


class TestVerdict:
    def test_counterexample_cannot_hold(self):
        with pytest.raises(ValueError):
            AbsoluteVerdict(True, 0.1, Method.SEARCH, UnitaryMatrix(np.eye(4)))

    def test_as_dict(self):
        d = absolutely_zero_discord(MIXED).as_dict()
        assert d["holds"] is True and d["method"] == "closed-form"


def test_lifted_hierarchy():
    from qcorr.absolute import local_margin, separable_margin, zero_discord_margin

    d = spectra(100_000, 21)
    sep = separable_margin(d) >= 0
    st3 = unsteerable3_margin(d) >= 0
    loc = local_margin(d) >= -1e-12
    assert np.all(st3[sep])
    assert np.all(loc[st3 & (unsteerable3_margin(d) >= 0)])
    assert np.all(sep[zero_discord_margin(d) >= 0])


CHECKS = [
    (absolutely_separable_2xn, Property.SEPARABLE),
    (absolutely_local, Property.LOCAL),
    (absolutely_unsteerable3_exact, Property.UNSTEERABLE3),
    (absolutely_nonneg_cond_entropy, Property.NONNEG_COND_ENTROPY),
    (absolutely_zero_discord, Property.ZERO_DISCORD),
]


@pytest.mark.parametrize("closed, prop", CHECKS, ids=[p.value for _, p in CHECKS])
def test_absolute_implies_ordinary(closed, prop):
    rng = np.random.default_rng(5)
    passing = [werner_spec(0.0), MIXED]
    for d in spectra(3000, 6):
        if closed(d).holds and len(passing) < 12:
            passing.append(list(d))
    us = haar_unitaries(100, 4, seed=rng)
    for d in passing:
        ms = us @ np.diag(d).astype(complex) @ np.conj(np.swapaxes(us, -1, -2))
        assert np.all(batch_margin(prop, ms) >= -1e-9)


def _test_states(n):
    rng = np.random.default_rng(99)
    out = []
    for k in range(n):
        rho = random_density(rank=k % 4 + 1, seed=1000 + k).matrix
        p = rng.uniform(0, 1)
        out.append(make_density(p * rho + (1 - p) * np.eye(4) / 4))
    return out


@pytest.mark.slow
@pytest.mark.parametrize("closed, prop", CHECKS, ids=[p.value for _, p in CHECKS])
def test_search_agrees_with_closed_form(closed, prop):
    missed = []
    for k, rho in enumerate(_test_states(200)):
        spec = np.linalg.eigvalsh(rho.matrix)
        expected = closed(spec)
        found = falsify_absolute(rho, prop, budget=5000, seed=k)
        if found.counterexample is not None:
            # no false positives, and the witness really breaks the property
            assert not expected.holds
            assert ordinary_margin(prop, conjugate_matrix(rho, found.counterexample)) < -1e-6
        elif not expected.holds:
            missed.append(expected.margin)
    print(f"{prop.value}: {len(missed)} missed counterexamples, margins {missed}")
    assert all(abs(m) < 1e-3 for m in missed), missed


def test_purity_bound_has_no_false_negatives():
    # wherever the purity form holds, no conjugation steers
    for k, rho in enumerate(_test_states(40)):
        if absolutely_unsteerable3(np.linalg.eigvalsh(rho.matrix)).holds:
            assert falsify_absolute(rho, Property.UNSTEERABLE3, budget=2000, seed=k).holds


class TestFalsify:
    def test_werner_separability(self):
        v = falsify_absolute(werner(0.5), Property.SEPARABLE, budget=5000, seed=1)
        assert not v.holds and v.method is Method.SEARCH

    def test_separable_representative_of_werner_spectrum(self):
        rho = make_density(np.diag(werner_spec(0.5)).astype(complex))
        assert ordinary_margin(Property.SEPARABLE, rho) > 0
        v = falsify_absolute(rho, Property.SEPARABLE, budget=5000, seed=1)
        assert v.counterexample is not None
        assert ordinary_margin(Property.SEPARABLE, conjugate_matrix(rho, v.counterexample)) < -1e-6

    @pytest.mark.parametrize("prop", list(Property))
    def test_maximally_mixed_fixed_point(self, prop):
        v = falsify_absolute(maximally_mixed(), prop, budget=3000, seed=2)
        assert v.holds and v.counterexample is None
        assert v.details["evaluated"] == 3000

    def test_gisin_zero_discord_representative(self):
        # diagonal in the product basis with the gisin spectrum: classical-classical
        rho = make_density(np.diag(gisin_spec(0.5)).astype(complex))
        assert ordinary_margin(Property.ZERO_DISCORD, rho) >= -1e-12
        v = falsify_absolute(rho, Property.ZERO_DISCORD, budget=10_000, seed=3)
        assert v.counterexample is not None
        assert ordinary_margin(Property.ZERO_DISCORD, conjugate_matrix(rho, v.counterexample)) < -1e-6
        assert np.linalg.eigvalsh(gisin(0.5, math.pi / 4).matrix) == pytest.approx(np.sort(gisin_spec(0.5)))

    def test_counterexample_preserves_spectrum(self):
        rho = bell("phi+")
        v = falsify_absolute(rho, Property.LOCAL, budget=100, seed=0)
        out = conjugate_matrix(rho, v.counterexample)
        assert_allclose(np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(rho.matrix), atol=1e-12)
        assert v.margin < -1e-6

    @given(seeds)
    def test_reproducible(self, seed):
        rho = werner(0.4)
        a = falsify_absolute(rho, Property.SEPARABLE, budget=2000, seed=seed)
        b = falsify_absolute(rho, Property.SEPARABLE, budget=2000, seed=seed)
        assert a.margin == b.margin
        assert_allclose(a.counterexample.matrix, b.counterexample.matrix)

    def test_strict_budget(self):
        with pytest.raises(BudgetExhausted) as info:
            falsify_absolute(maximally_mixed(), Property.LOCAL, budget=500, seed=0, strict=True)
        assert info.value.best_margin == pytest.approx(2.0)

    def test_requires_two_qubits(self):
        with pytest.raises(DimensionMismatch):
            falsify_absolute(random_density((2, 3), seed=0), Property.SEPARABLE)

    def test_closed_form_dispatch(self):
        assert closed_form_verdict("local", MIXED).holds
        assert not closed_form_verdict(Property.PRODUCT, werner_spec(0.2)).holds

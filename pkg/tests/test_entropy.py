import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcorr.entropy import (
    batch_entropy,
    conditional_entropy,
    entropy_of_eigenvalues,
    entropy_report,
    mutual_information,
    shannon,
    von_neumann,
)
from qcorr.errors import NotAProbabilityVector, NotPSD
from qcorr.linalg import tensor
from qcorr.states import (
    bell,
    conjugate,
    gisin,
    haar_unitary,
    make_density,
    maximally_mixed,
    random_density,
    random_pure,
    werner,
)

from conftest import seeds


def xlog2x(x):
    return x * math.log2(x) if x > 0 else 0.0


@pytest.mark.parametrize("p,h", [([1, 0, 0, 0], 0.0), ([0.5, 0.5], 1.0), ([0.25] * 4, 2.0)])
def test_shannon_values(p, h):
    assert shannon(p) == pytest.approx(h, abs=1e-15)


@pytest.mark.parametrize("p", [[0.5, 0.6], [1.2, -0.2], []])
def test_shannon_rejects(p):
    with pytest.raises(NotAProbabilityVector):
        shannon(p)


def test_clamps_psd_noise():
    assert entropy_of_eigenvalues([1.0, -1e-13]) == 0.0
    with pytest.raises(NotPSD):
        entropy_of_eigenvalues([1.1, -0.1])


class TestVonNeumann:
    def test_pure(self):
        assert von_neumann(bell("phi+")) == pytest.approx(0, abs=1e-12)

    def test_maximally_mixed(self):
        assert von_neumann(maximally_mixed()) == pytest.approx(2)

    @pytest.mark.parametrize("w", [-1 / 3, 0.2, 0.5, 0.9])
    def test_werner(self, w):
        expect = -3 * xlog2x((1 - w) / 4) - xlog2x((1 + 3 * w) / 4)
        assert von_neumann(werner(w)) == pytest.approx(expect, abs=1e-12)

    def test_against_matrix_log(self):
        for s in range(1000):
            rho = random_density(seed=s)
            w, v = np.linalg.eigh(rho.matrix)
            logm = v @ np.diag(np.log2(np.clip(w, 1e-300, None))) @ v.conj().T
            direct = -np.trace(rho.matrix @ logm).real
            assert abs(von_neumann(rho) - direct) < 1e-10
            assert abs(von_neumann(rho) - shannon(rho.spectrum.values)) < 1e-10

    @given(seeds)
    def test_unitary_invariance(self, seed):
        rho = random_density(seed=seed)
        u = haar_unitary(4, seed=seed ^ 0xABCDEF)
        assert abs(von_neumann(conjugate(rho, u)) - von_neumann(rho)) < 1e-9


class TestReport:
    def test_bell(self):
        r = entropy_report(bell("phi+"))
        assert r.cond_B_given_A == pytest.approx(-1, abs=1e-12)
        assert r.cond_A_given_B == pytest.approx(-1, abs=1e-12)
        assert r.mutual == pytest.approx(2, abs=1e-12)

    def test_product(self):
        a = random_density((2, 1), seed=1).matrix
        b = random_density((3, 1), seed=2).matrix
        assert mutual_information(make_density(tensor(a, b), (2, 3))) == pytest.approx(0, abs=1e-12)

    @pytest.mark.parametrize("lam,theta", [(0.2, 0.3), (0.6, math.pi / 4), (0.9, 1.2), (0.95, 0.1)])
    def test_gisin_table_formula(self, lam, theta):
        # Table expression, with the missing "+" inside the first reduced-state log restored
        h = (1 - lam) / 2
        x, y = h + lam * math.cos(theta) ** 2, h + lam * math.sin(theta) ** 2
        expect = -2 * xlog2x(h) - xlog2x(lam) + xlog2x(x) + xlog2x(y)
        rho = gisin(lam, theta)
        assert conditional_entropy(rho, "B") == pytest.approx(expect, abs=1e-12)
        assert conditional_entropy(rho, "A") == pytest.approx(expect, abs=1e-12)

    @given(seeds)
    def test_identities_and_bounds(self, seed):
        r = entropy_report(random_density(seed=seed))
        assert abs(r.mutual - (r.s_A + r.s_B - r.s_joint)) < 1e-9
        assert -r.s_B - 1e-9 <= r.cond_A_given_B <= r.s_A + 1e-9
        assert -r.s_A - 1e-9 <= r.cond_B_given_A <= r.s_B + 1e-9
        assert r.mutual >= -1e-9

    def test_bounds_many(self):
        for s in range(1000):
            r = entropy_report(random_density(seed=s))
            assert -r.s_B - 1e-9 <= r.cond_A_given_B <= r.s_A + 1e-9

    @given(seeds)
    def test_pure_marginals_equal(self, seed):
        r = entropy_report(random_pure((2, 3), seed=seed))
        assert abs(r.s_A - r.s_B) < 1e-9

    def test_as_dict(self):
        d = entropy_report(werner(0.3)).as_dict()
        assert set(d) == {"s_joint", "s_A", "s_B", "cond_A_given_B", "cond_B_given_A", "mutual"}


@given(st.lists(st.floats(0.001, 1), min_size=2, max_size=6))
def test_batch_entropy_matches(values):
    p = np.array(values) / np.sum(values)
    assert batch_entropy(p[None])[0] == pytest.approx(shannon(p), abs=1e-12)

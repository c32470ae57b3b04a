"""Acceptance sweeps at full size; every test here is marked slow."""

import pytest

from models.multiindex import TailSpec, random_q
from schemas.config import RunConfig
from services.fock import gram, isometry_residual, positivity_certificate
from services.verification_suites import (
    DualSuite,
    FockSuite,
    NormalOrderSuite,
    RunContext,
    TailSuite,
)

TAIL_Q_VALUES = [0.0, 0.5, (0.5, 0.4)]


def context_for(payload: dict) -> RunContext:
    config = RunConfig.model_validate(payload)
    return RunContext(config=config, q_matrix=config.q_matrix(), max_workers=2)


def two_letter_q(value) -> list:
    re, im = value if isinstance(value, tuple) else (value, 0.0)
    return [[None, [re, im]], [[re, -im], None]]


def failures(records) -> list:
    return [(record.name, record.error, record.witness) for record in records if not record.passed]


@pytest.mark.slow
class TestRewriteAcceptance:
    """Rewrite engine against the closed form, and rewrite-system health."""

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_exhaustive_two_letters(self, seed):
        """Test every pair |a|, |b| <= 4 over two letters."""
        context = context_for(
            {
                "d": 2,
                "random_q": {"max_modulus": 0.9, "seed": seed},
                "normal_order": {"max_length": 4, "random_pairs": 0, "seed": seed},
            }
        )
        outcome = NormalOrderSuite(context).check_oracle_equivalence()
        assert outcome.passed, outcome.witness
        assert outcome.metrics["pairs"] == 31**2

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_random_three_letters(self, seed):
        """Test 200 random pairs of length <= 5 over three letters."""
        context = context_for(
            {
                "d": 3,
                "random_q": {"max_modulus": 0.9, "seed": seed},
                "normal_order": {"max_length": 0, "random_pairs": 200, "random_length": 5, "seed": seed},
            }
        )
        outcome = NormalOrderSuite(context).check_oracle_equivalence()
        assert outcome.passed, outcome.witness
        assert outcome.metrics["pairs"] == 201

    def test_termination_and_confluence(self):
        """Test 1000 random words of length <= 12 under both strategies."""
        context = context_for({"d": 3, "random_q": {"max_modulus": 0.9, "seed": 5}})
        suite = NormalOrderSuite(context)
        termination = suite.check_termination()
        assert termination.passed, termination.witness
        assert termination.metrics["words"] == 1000
        confluence = suite.check_confluence()
        assert confluence.passed, confluence.witness


@pytest.mark.slow
class TestFockAcceptance:
    """Gram positivity, J_k isometry and the relations on the Fock space."""

    @pytest.mark.parametrize("d,top", [(2, 6), (3, 5)])
    def test_gram_positivity(self, d, top):
        """Test positive blocks for ten Q draws with |q_ij| <= 0.9."""
        smallest = float("inf")
        for seed in range(10):
            Q = random_q(d, 0.9, seed)
            for n in range(top + 1):
                certificate = positivity_certificate(gram(n, Q))
                assert certificate.ok, (seed, n, certificate.min_eigenvalue)
                smallest = min(smallest, certificate.min_eigenvalue)
        assert smallest > 0

    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("tail", [TailSpec((), (2,)), TailSpec((1,), (2, 1))])
    def test_embedding_isometry(self, d, tail):
        """Test J_k^H G_(k+1) J_k = G_k for k <= 5."""
        Q = random_q(d, 0.7, seed=d)
        grams = {}
        for k in range(6):
            assert isometry_residual(k, tail, Q, grams) < 1e-10

    @pytest.mark.parametrize("d", [2, 3])
    def test_operator_relations(self, d):
        """Test adjointness, isometry and q-commutation on levels <= 5."""
        context = context_for(
            {"d": d, "random_q": {"max_modulus": 0.7, "seed": 4}, "fock_depth": 5}
        )
        suite = FockSuite(context)
        for check in (suite.check_adjointness, suite.check_isometry, suite.check_commutation):
            outcome = check()
            assert outcome.passed, outcome.witness

    def test_fock_vacuum(self):
        """Test the one-dimensional vacuum of the depth-4 Fock window."""
        context = context_for({"d": 2, "random_q": {"max_modulus": 0.7, "seed": 2}, "fock_depth": 4})
        outcome = DualSuite(context).check_vacuum("fock")
        assert outcome.passed
        assert outcome.metrics["kernel_dim"] == 1


@pytest.mark.slow
class TestTailAcceptance:
    """Tail representation windows with L = M = 4."""

    @pytest.mark.parametrize("ref", [";2", ";1,2"])
    @pytest.mark.parametrize("q", TAIL_Q_VALUES)
    def test_tail_suite(self, ref, q):
        """Test positivity, adjointness, relations and fixed points."""
        context = context_for(
            {"d": 2, "q_entries": two_letter_q(q), "tail": {"ref": ref, "L": 4, "M": 4}}
        )
        assert not failures(TailSuite(context).run())

    @pytest.mark.parametrize("ref", [";2", ";1,2"])
    @pytest.mark.parametrize("q", TAIL_Q_VALUES)
    def test_tail_has_no_vacuum(self, ref, q):
        """Test a trivial kernel with the smallest singular value above 1e-3."""
        context = context_for(
            {"d": 2, "q_entries": two_letter_q(q), "tail": {"ref": ref, "L": 4, "M": 4}}
        )
        outcome = DualSuite(context).check_vacuum("tail")
        assert outcome.passed
        assert outcome.metrics["kernel_dim"] == 0
        assert outcome.metrics["min_singular"] > 1e-3

    @pytest.mark.parametrize("ref", [";2", ";1,2"])
    def test_transitivity(self, ref):
        """Test s_mu T*_nu e_(nu x) = e_(mu x) between labels with a common tail."""
        context = context_for(
            {"d": 2, "q_entries": two_letter_q((0.5, 0.4)), "tail": {"ref": ref, "L": 4, "M": 4}}
        )
        outcome = DualSuite(context).check_transitivity()
        assert outcome.passed, outcome.witness
        assert outcome.metrics["pairs"] > 0

    def test_decay_outside_the_reference_class(self):
        """Test that P_n(1^inf) kills 2^inf window vectors within the window depth."""
        context = context_for(
            {"d": 2, "q_entries": two_letter_q(0.5), "tail": {"ref": ";2", "L": 4, "M": 4}}
        )
        suite = DualSuite(context)
        outcome = suite.check_decay("tail_decay_cross_class", context.contrast)
        assert outcome.passed, outcome.witness
        assert outcome.metrics["final_max"] < 1e-6


@pytest.mark.slow
class TestDualAcceptance:
    """Biorthogonality of the dual isometries with |q_ij| <= 0.7."""

    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("kind", ["fock", "tail"])
    def test_biorthogonality(self, d, kind):
        """Test T_j^* s_k = delta_jk I on Fock (N = 4) and tail (L = M = 4) windows."""
        context = context_for(
            {
                "d": d,
                "random_q": {"max_modulus": 0.7, "seed": 0},
                "fock_depth": 4,
                "tail": {"ref": ";2", "L": 4, "M": 4},
            }
        )
        outcome = DualSuite(context).check_biorthogonality(kind)
        assert outcome.passed, outcome.witness
        assert outcome.metrics["max_residual"] < 1e-8

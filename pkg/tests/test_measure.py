import numpy as np
import pytest

from conftest import random_density
from discordlab import measure, states
from discordlab.errors import BadSpec, ConditionalOnNullEvent


@pytest.fixture(scope="module")
def pset():
    return measure.standard_projector_set()


class TestStandardProjectorSet:
    def test_ordering(self, pset):
        assert pset.labels[:4] == ("HH", "HV", "VH", "VV")
        assert pset.labels[9] == "DD"  # slot 10, 1-based
        assert pset.labels[15] == "LL"  # slot 16
        assert len(set(pset.labels)) == 16

    def test_projectors_rank1_hermitian_idempotent(self, pset):
        for proj in pset.projectors:
            assert np.max(np.abs(proj - proj.conj().T)) <= 1e-12
            assert np.max(np.abs(proj @ proj - proj)) <= 1e-12
            assert np.trace(proj).real == pytest.approx(1.0, abs=1e-12)

    def test_informationally_complete(self, pset):
        # Oracle: explicit rank of the probability design matrix.
        assert np.linalg.matrix_rank(measure.design_matrix(pset)) == 16

    def test_basis_projector_on_hh(self, pset):
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0
        probs = measure.born_probabilities(rho, pset)
        assert probs[0] == pytest.approx(1.0)

    def test_first_four_sum_to_one(self, pset):
        rng = np.random.default_rng(2)
        for _ in range(10):
            probs = measure.born_probabilities(random_density(rng), pset)
            assert probs[:4].sum() == pytest.approx(1.0, abs=1e-12)


class TestBornProbabilities:
    def test_maximally_mixed(self):
        probs = measure.born_probabilities(np.eye(4) / 4)
        assert np.allclose(probs, 0.25)

    def test_bell_phi(self):
        probs = measure.born_probabilities(states.bell("phi"))
        assert np.allclose(probs[:4], [0.5, 0.0, 0.0, 0.5], atol=1e-14)

    def test_werner_half_basis_probs(self):
        # Matrix elements of the p=1/2 depolarized state, frozen by hand:
        # diag = (3/8, 1/8, 1/8, 3/8).
        probs = measure.born_probabilities(states.werner(0.5, "phi"))
        assert probs[0] == pytest.approx(3 / 8, abs=1e-14)
        assert probs[1] == pytest.approx(1 / 8, abs=1e-14)

    def test_linearity(self):
        rng = np.random.default_rng(4)
        r1, r2 = random_density(rng), random_density(rng)
        for alpha in (0.0, 0.3, 0.9):
            mixed = alpha * r1 + (1 - alpha) * r2
            p = measure.born_probabilities(mixed)
            p12 = alpha * measure.born_probabilities(r1) + (1 - alpha) * measure.born_probabilities(r2)
            assert np.max(np.abs(p - p12)) <= 1e-12


class TestPoissonSampling:
    def test_zero_mean_always_zero(self):
        rng = np.random.default_rng(0)
        assert all(measure.poisson_sample(0.0, rng) == 0 for _ in range(100))

    @pytest.mark.parametrize("lam", [5.0, 100.0])  # both sampler regimes
    def test_mean_and_variance(self, lam):
        rng = np.random.default_rng(int(lam))
        draws = measure.poisson_counts(np.full(10_000, lam), rng).astype(float)
        assert abs(draws.mean() - lam) <= 3.0 * np.sqrt(lam / 10_000)
        assert abs(draws.var(ddof=1) - lam) <= 0.1 * lam

    def test_sample_counts_reproducible(self):
        probs = measure.born_probabilities(states.werner(0.7))
        a = measure.sample_counts(probs, 40_000, 123)
        b = measure.sample_counts(probs, 40_000, 123)
        assert np.array_equal(a.counts, b.counts)
        assert a.seed == 123

    def test_sample_counts_zero_channels_stay_zero(self):
        probs = measure.born_probabilities(states.bell("phi"))
        rec = measure.sample_counts(probs, 40_000, 5)
        assert rec.counts[1] == 0 and rec.counts[2] == 0

    def test_exact_counts(self):
        probs = measure.born_probabilities(states.bell("phi"))
        rec = measure.exact_counts(probs, 10**6)
        assert rec.counts[0] == 500_000
        assert rec.n_total == 10**6
        assert rec.seed is None


class TestCountRecord:
    def test_n_total_is_basis_sum(self):
        probs = measure.born_probabilities(states.werner(0.3))
        rec = measure.sample_counts(probs, 40_000, 9)
        assert rec.n_total == int(rec.counts[:4].sum())

    def test_inconsistent_n_total_rejected(self):
        with pytest.raises(BadSpec, match="n_total"):
            measure.CountRecord(
                labels=measure.PROJECTOR_ORDER, counts=np.ones(16, dtype=int), n_total=999
            )

    def test_json_roundtrip(self, tmp_path):
        probs = measure.born_probabilities(states.phase_damped(0.6))
        rec = measure.sample_counts(probs, 20_000, 77)
        path = tmp_path / "counts.json"
        rec.save(path)
        back = measure.CountRecord.load(path)
        assert back.labels == rec.labels
        assert np.array_equal(back.counts, rec.counts)
        assert back.n_total == rec.n_total and back.seed == 77

    def test_missing_field_named(self):
        with pytest.raises(BadSpec, match="'counts'"):
            measure.CountRecord.from_dict({"labels": [], "n_total": 0})

    def test_resample_deterministic(self):
        probs = measure.born_probabilities(states.werner(0.5))
        base = measure.exact_counts(probs, 40_000)
        a = measure.resample_counts(base, 42)
        b = measure.resample_counts(base, 42)
        assert np.array_equal(a.counts, b.counts)
        assert not np.array_equal(a.counts, base.counts)


class TestMeasurementAxis:
    def test_range_validation(self):
        with pytest.raises(ValueError):
            measure.MeasurementAxis(-0.1, 0.0)
        with pytest.raises(ValueError):
            measure.MeasurementAxis(0.1, 7.0)

    def test_z_axis_projectors(self):
        p0, p1 = measure.axis_projectors(measure.Z_AXIS)
        assert np.allclose(p0, np.diag([1.0, 0.0]))
        assert np.allclose(p1, np.diag([0.0, 1.0]))

    def test_x_axis_projectors(self):
        p0, _ = measure.axis_projectors(measure.MeasurementAxis(np.pi / 2, 0.0))
        assert np.allclose(p0, np.full((2, 2), 0.5))

    def test_completeness_orthogonality_random_axes(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            axis = measure.MeasurementAxis(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            p0, p1 = measure.axis_projectors(axis)
            assert np.max(np.abs(p0 + p1 - np.eye(2))) <= 1e-12
            assert np.max(np.abs(p0 @ p1)) <= 1e-12
            assert np.trace(p0).real == pytest.approx(1.0, abs=1e-12)

    def test_canonical_axis_folds_hemisphere(self):
        t, f = measure.canonical_axis(np.pi - 0.1, 0.5, hemisphere=True)
        assert t == pytest.approx(0.1)
        assert f == pytest.approx(0.5 + np.pi)


class TestConditionalState:
    def test_bell_z_measurement(self):
        p, cond = measure.conditional_state(states.bell("phi"), measure.Z_AXIS, 0, "A")
        assert p == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(cond, np.diag([1.0, 0.0]), atol=1e-12)

    def test_maximally_mixed(self):
        axis = measure.MeasurementAxis(1.1, 2.2)
        p, cond = measure.conditional_state(np.eye(4) / 4, axis, 1, "A")
        assert p == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(cond, np.eye(2) / 2, atol=1e-12)

    def test_phase_damped_keeps_z_correlations(self):
        # Oracle: explicit expansion; dephasing leaves the diagonal intact,
        # so conditioning on H yields the pure |H> partner state.
        rho = states.phase_damped(0.5, "phi")
        p, cond = measure.conditional_state(rho, measure.Z_AXIS, 0, "A")
        assert p == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(cond, np.diag([1.0, 0.0]), atol=1e-12)

    def test_outcome_probabilities_sum_to_one(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            rho = random_density(rng)
            axis = measure.MeasurementAxis(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            for party in ("A", "B"):
                p0, _ = measure.conditional_state(rho, axis, 0, party)
                p1, _ = measure.conditional_state(rho, axis, 1, party)
                assert p0 + p1 == pytest.approx(1.0, abs=1e-12)

    def test_null_event_raises(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0  # |HH><HH|
        with pytest.raises(ConditionalOnNullEvent):
            measure.conditional_state(rho, measure.Z_AXIS, 1, "A")


class TestPartialCounts:
    def test_exact_bell_structure(self):
        rec = measure.simulate_partial_counts(states.bell("phi"), 40_000)
        # Outcome H on A forces H on B; D and L are unbiased on the partner.
        assert rec.counts[0, 0] == 5000 and rec.counts[0, 1] == 0
        assert rec.counts[0, 2] == 2500 and rec.counts[0, 3] == 2500
        assert rec.seed is None

    def test_sampled_reproducible(self):
        a = measure.simulate_partial_counts(states.werner(0.6), 40_000, rng_seed=3)
        b = measure.simulate_partial_counts(states.werner(0.6), 40_000, rng_seed=3)
        assert np.array_equal(a.counts, b.counts)

    def test_json_roundtrip(self, tmp_path):
        rec = measure.simulate_partial_counts(states.phase_damped(0.4), 20_000, rng_seed=11)
        path = tmp_path / "partial.json"
        rec.save(path)
        back = measure.PartialCountRecord.load(path)
        assert np.array_equal(back.counts, rec.counts)
        assert back.axis.theta == rec.theta

    def test_missing_field_named(self):
        with pytest.raises(BadSpec, match="'n_total'"):
            measure.PartialCountRecord.from_dict({"theta": 0.0, "phi": 0.0, "counts": [[1] * 4] * 2})

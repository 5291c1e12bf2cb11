import numpy as np
import pytest

from discordlab import states
from discordlab.errors import BadSpec, NotPSD, OutOfRange
from discordlab.qmat import partial_trace, validate_density_matrix

P_GRID = np.linspace(0.0, 1.0, 11)


def _purity(rho):
    return float(np.trace(rho @ rho).real)


def test_bell_phi_entries():
    rho = states.bell("phi")
    assert rho[0, 0] == pytest.approx(0.5)
    assert rho[3, 3] == pytest.approx(0.5)
    assert rho[0, 3] == pytest.approx(0.5)
    assert np.count_nonzero(np.abs(rho) > 1e-15) == 4


def test_bell_psi_entries():
    rho = states.bell("psi")
    assert rho[1, 1] == pytest.approx(0.5)
    assert rho[2, 2] == pytest.approx(0.5)
    assert rho[1, 2] == pytest.approx(0.5)


def test_bell_is_pure():
    assert _purity(states.bell("phi")) == pytest.approx(1.0)
    assert _purity(states.bell("psi")) == pytest.approx(1.0)


def test_source_state_at_pi_over_4_is_bell():
    assert np.allclose(states.source_state(np.pi / 4, 0.0), states.bell("phi"), atol=1e-15)


def test_source_state_product_limit():
    rho = states.source_state(0.0, 1.3)
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 0] = 1.0
    assert np.allclose(rho, expected, atol=1e-15)


def test_werner_limits():
    assert np.allclose(states.werner(0.0), np.diag([0.25, 0.25, 0.25, 0.25]))
    assert np.allclose(states.werner(1.0, "phi"), states.bell("phi"))


def test_werner_half_matrix():
    # Frozen from the direct mixture expansion at p = 1/2.
    rho = states.werner(0.5, "phi")
    assert np.allclose(np.diag(rho).real, [3 / 8, 1 / 8, 1 / 8, 3 / 8], atol=1e-15)
    assert rho[0, 3] == pytest.approx(0.25)
    assert rho[3, 0] == pytest.approx(0.25)


def _dephase_oracle(rho):
    # Independent oracle: sum_kj P_kj rho P_kj with P_kj = |k><k| (x) |j><j|.
    out = np.zeros_like(rho)
    for k in range(2):
        for j in range(2):
            pk = np.zeros((2, 2))
            pk[k, k] = 1.0
            pj = np.zeros((2, 2))
            pj[j, j] = 1.0
            proj = np.kron(pk, pj)
            out += proj @ rho @ proj
    return out


def test_phase_damped_limits():
    assert np.allclose(states.phase_damped(1.0, "psi"), states.bell("psi"))
    assert np.allclose(states.phase_damped(0.0, "phi"), np.diag([0.5, 0.0, 0.0, 0.5]))


def test_phase_damped_half_against_projector_expansion():
    b = states.bell("phi")
    expected = 0.5 * b + 0.5 * _dephase_oracle(b)
    rho = states.phase_damped(0.5, "phi")
    assert np.allclose(rho, expected, atol=1e-15)
    assert np.allclose(np.diag(rho).real, [0.5, 0.0, 0.0, 0.5])
    assert rho[0, 3] == pytest.approx(0.25)


def test_mixing_param_bounds():
    with pytest.raises(OutOfRange):
        states.werner(1.2)
    with pytest.raises(OutOfRange):
        states.phase_damped(-0.1)


def test_x_state_maximally_mixed():
    assert np.allclose(states.x_state(0.0, 0.0, 0.0), np.eye(4) / 4)


@pytest.mark.parametrize("kind", ["phi", "psi"])
@pytest.mark.parametrize("family", ["werner", "damped"])
def test_x_state_family_identities(family, kind):
    for p in (0.0, 0.3, 0.5, 0.9, 1.0):
        c1, c2, c3 = states.x_coeffs(family, kind, p)
        built = states.x_state(c1, c2, c3)
        ref = states.werner(p, kind) if family == "werner" else states.phase_damped(p, kind)
        assert np.max(np.abs(built - ref)) <= 1e-12


def test_x_state_rejects_unphysical():
    with pytest.raises(NotPSD):
        states.x_state(1.0, 1.0, 1.0)


def test_purity_relations_on_grid():
    for p in P_GRID:
        assert _purity(states.werner(p)) == pytest.approx((1 + 3 * p * p) / 4, abs=1e-12)
        assert _purity(states.phase_damped(p)) == pytest.approx((1 + p * p) / 2, abs=1e-12)


def test_marginals_maximally_mixed():
    for p in P_GRID:
        for rho in (states.werner(p, "psi"), states.phase_damped(p, "phi")):
            for keep in ("A", "B"):
                assert np.allclose(partial_trace(rho, keep), np.eye(2) / 2, atol=1e-12)


def test_purity_to_p_boundaries():
    assert states.purity_to_p(0.25, "werner") == pytest.approx(0.0)
    assert states.purity_to_p(1.0, "damped") == pytest.approx(1.0)


def test_purity_to_p_at_083():
    # sqrt((4*0.83 - 1)/3), frozen from the algebraic inversion
    assert states.purity_to_p(0.83, "werner") == pytest.approx(0.879394, abs=1e-6)


def test_purity_roundtrip():
    for p in P_GRID:
        for family in ("werner", "damped"):
            mu = states.purity_from_p(p, family)
            assert states.purity_to_p(mu, family) == pytest.approx(p, abs=1e-12)


def test_purity_to_p_domain():
    with pytest.raises(OutOfRange):
        states.purity_to_p(0.2, "werner")
    with pytest.raises(OutOfRange):
        states.purity_to_p(0.4, "damped")


def test_all_factories_return_valid_states():
    for p in (0.0, 0.4, 1.0):
        for kind in ("phi", "psi"):
            validate_density_matrix(states.werner(p, kind))
            validate_density_matrix(states.phase_damped(p, kind))
    validate_density_matrix(states.source_state(0.7, 2.1))


class TestParseStateSpec:
    def test_named_families(self):
        spec = states.parse_state_spec("werner:phi:0.83")
        assert spec.family == "werner" and spec.kind == "phi"
        assert spec.mu == pytest.approx(0.83)
        assert np.allclose(spec.rho, states.werner(spec.p, "phi"))

    def test_fraction_purity(self):
        spec = states.parse_state_spec("damped:psi:2/3")
        assert spec.mu == pytest.approx(2 / 3)

    def test_bell(self):
        spec = states.parse_state_spec("bell:psi")
        assert spec.kind == "psi" and spec.p == 1.0
        assert np.allclose(spec.rho, states.bell("psi"))

    def test_x_coefficients(self):
        spec = states.parse_state_spec("x:0.5,-0.5,1.0")
        assert np.allclose(spec.rho, states.x_state(0.5, -0.5, 1.0))

    @pytest.mark.parametrize(
        "bad",
        ["werner:phi", "werner:zeta:0.83", "damped:psi:0.3", "x:1,2", "foo:bar", "werner:phi:abc"],
    )
    def test_rejects(self, bad):
        with pytest.raises(BadSpec):
            states.parse_state_spec(bad)

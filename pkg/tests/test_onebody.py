import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from histlat.errors import InvalidArgumentError
from histlat.lattice import make_lattice, onebody_pt, shift_matrix
from histlat.onebody import (OneBodyOperator, build_j, build_pt_full, build_v, commutator_pt_time,
                             conjugation_symmetry, convergence_order, evolution_operator,
                             frequency_mode, gaussian_packet, physical_modes, translate_physical,
                             verify_diag)
from histlat.quadratic import oscillator


def commensurate_h(rng, lat, M):
    kmax = max(1, lat.n_sites // 2)
    k = rng.integers(-kmax, kmax + 1, size=M)
    q, _ = np.linalg.qr(rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M)))
    return q @ np.diag(2 * np.pi * k / lat.period) @ q.conj().T


class TestBuilders:
    def test_pt_single_site_three_modes(self):
        np.testing.assert_allclose(build_pt_full(make_lattice(1, 1.0), 3).matrix, np.zeros((3, 3)), atol=1e-15)

    def test_pt_reduces_for_one_mode(self):
        lat = make_lattice(2, 1.0)
        np.testing.assert_array_equal(build_pt_full(lat, 1).matrix, onebody_pt(lat))

    def test_pt_kron_spectrum(self):
        lat = make_lattice(4, 1.0)
        ev = np.linalg.eigvalsh(build_pt_full(lat, 2).matrix)
        np.testing.assert_allclose(ev, np.repeat(lat.omegas, 2), atol=1e-13)

    def test_j_trivial_theory(self):
        lat = make_lattice(4, 0.5)
        np.testing.assert_array_equal(build_j(lat, np.zeros((2, 2))).matrix, build_pt_full(lat, 2).matrix)

    def test_j_two_sites(self):
        j = build_j(make_lattice(2, 1.0), [[np.pi]]).matrix
        np.testing.assert_allclose(j, [[-1.5 * np.pi, 0.5 * np.pi], [0.5 * np.pi, -1.5 * np.pi]], atol=1e-14)
        np.testing.assert_allclose(np.linalg.eigvalsh(j), [-2 * np.pi, -np.pi], atol=1e-14)

    def test_j_four_site_spectrum(self):
        lat = make_lattice(4, 1.0)
        w0 = 0.37
        np.testing.assert_allclose(np.linalg.eigvalsh(build_j(lat, [[w0]]).matrix), lat.omegas - w0, atol=1e-13)

    def test_j_bitwise_kron(self):
        lat = make_lattice(5, 0.3)
        h = np.array([[1.0, 0.2j], [-0.2j, -0.5]])
        direct = np.kron(onebody_pt(lat), np.eye(2)) - np.kron(np.eye(5), h)
        assert np.array_equal(build_j(lat, h).matrix, direct)

    def test_j_rejects_non_hermitian(self):
        with pytest.raises(InvalidArgumentError):
            build_j(make_lattice(2, 1.0), [[0.0, 1.0], [0.0, 0.0]])

    def test_v_trivial(self):
        np.testing.assert_allclose(build_v(make_lattice(3, 1.0), np.zeros((2, 2))).matrix, np.eye(6))

    def test_v_two_sites(self):
        v = build_v(make_lattice(2, 1.0), [[np.pi]], t0=-1.0).matrix
        np.testing.assert_allclose(v, np.diag([1, -1]), atol=1e-15)

    def test_v_time_dependent_unitary(self):
        lat = make_lattice(8, 0.5)
        h = lambda t: np.array([[np.pi * (1 + t / lat.period)]])
        v = build_v(lat, h, n_substeps=64).matrix
        assert np.abs(v.conj().T @ v - np.eye(8)).max() <= 1e-10

    def test_time_ordering_matches_integral(self):
        # commuting 1x1 generator: U = exp(-i int h), midpoint rule is exact for linear h
        T = 4.0
        h = lambda t: np.array([[np.pi * (1 + t / T)]])
        U = evolution_operator(h, 1.5, -2.0, 64, 0.5)
        integral = np.pi * (3.5 + (1.5**2 - 4.0) / (2 * T))
        np.testing.assert_allclose(U, [[np.exp(-1j * integral)]], atol=1e-12)
        np.testing.assert_allclose(evolution_operator(h, -2.0, 1.5, 64, 0.5), U.conj().T, atol=1e-12)

    def test_basis_round_trip(self):
        lat = make_lattice(6, 0.4)
        op = build_j(lat, [[0.3]])
        f = op.to_frequency()
        assert f.basis_tag == "frequency"
        np.testing.assert_allclose(np.diag(f.matrix).real, lat.omegas - 0.3, atol=1e-13)
        np.testing.assert_allclose(f.to_site().matrix, op.matrix, atol=1e-13)
        with pytest.raises(InvalidArgumentError):
            OneBodyOperator(np.array([[0, 1], [0, 0]]), lat, hermitian=True)


class TestDiag:
    def test_trivial(self):
        r = verify_diag(make_lattice(4, 1.0), np.zeros((1, 1)))
        assert r.residuals["residual"] <= 1e-14 and r.passed

    def test_two_site_dense_oracle(self):
        lat = make_lattice(2, 1.0)
        v = np.diag([1.0, -1.0])
        S = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_array_equal(v.T @ S @ v, [[0, -1], [-1, 0]])
        rhs = sla.expm(-1j * np.array([[-1.5, 0.5], [0.5, -1.5]]) * np.pi)
        np.testing.assert_allclose(rhs, [[0, -1], [-1, 0]], atol=1e-14)
        assert verify_diag(lat, [[np.pi]], t0=-1.0).residuals["residual"] <= 1e-12

    def test_generator_form_aliasing(self):
        r = verify_diag(make_lattice(2, 1.0), [[np.pi]], t0=-1.0, form="generator")
        assert r.metadata["generator_residual"] > 1
        assert r.residuals["spectral_residual"] <= 1e-12
        assert r.passed and not r.expected_nonzero

    def test_incommensurate_flagged(self):
        r = verify_diag(make_lattice(4, 1.0), [[1.0]], form="generator")
        assert r.expected_nonzero and r.status == "flagged"
        r = verify_diag(make_lattice(4, 1.0), [[1.0]])
        assert r.expected_nonzero and r.residuals["residual"] > 1e-3

    def test_unknown_form(self):
        with pytest.raises(InvalidArgumentError):
            verify_diag(make_lattice(2, 1.0), [[0.0]], form="weird")

    @pytest.mark.parametrize("N", [2, 4, 8, 16])
    @pytest.mark.parametrize("M", [1, 2])
    def test_commensurate_grid(self, N, M):
        lat = make_lattice(N, 1.0)
        h = commensurate_h(np.random.default_rng(N * 10 + M), lat, M)
        r = verify_diag(lat, h)
        assert r.residuals["residual"] <= 1e-10 and r.status == "pass"

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 3), st.integers(0, 2**31), st.floats(0.1, 2.0))
    def test_property_any_commensurate(self, N, M, seed, dt):
        lat = make_lattice(N, dt)
        h = commensurate_h(np.random.default_rng(seed), lat, M)
        assert verify_diag(lat, h, t0=lat.times[N // 2]).residuals["residual"] <= 1e-9


class TestPhysicalModes:
    def test_trivial_theory_uniform(self):
        lat = make_lattice(5, 1.0)
        u = physical_modes(lat, [[0.0]])
        assert u.shape == (5, 1)
        np.testing.assert_allclose(np.abs(u[:, 0]), np.full(5, 1 / np.sqrt(5)), atol=1e-14)
        np.testing.assert_allclose(u[:, 0] / u[0, 0], np.ones(5), atol=1e-13)

    def test_single_oscillator_phases(self):
        lat = make_lattice(4, 1.0)
        w0 = np.pi / 2
        u = physical_modes(lat, [[w0]])
        assert u.shape == (4, 1)
        expected = np.exp(-1j * w0 * (lat.times - lat.t_start)) / 2
        np.testing.assert_allclose(u[:, 0], expected, atol=1e-14)
        # the opposite phase winding is not annihilated by j
        j = build_j(lat, [[w0]]).matrix
        assert np.linalg.norm(j @ expected) <= 1e-13
        assert np.linalg.norm(j @ expected.conj()) > 1.0

    def test_incommensurate_empty(self):
        assert physical_modes(make_lattice(4, 1.0), [[1.0]]).shape == (4, 0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 10), st.integers(1, 3), st.integers(0, 2**31))
    def test_kernel_and_orthonormal(self, N, M, seed):
        lat = make_lattice(N, 0.7)
        h = commensurate_h(np.random.default_rng(seed), lat, M)
        u = physical_modes(lat, h)
        j = build_j(lat, h).matrix
        assert np.linalg.norm(j @ u) <= 1e-10
        np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[1]), atol=1e-10)
        ev = np.linalg.eigvalsh(j)
        assert u.shape[1] == int(np.sum(np.abs(ev) < 1e-9))

    def test_frequency_mode_zero_is_physical(self):
        lat = make_lattice(6, 0.5)
        h = np.array([[2 * np.pi / 3]])
        f = frequency_mode(lat, h, 0)
        assert np.linalg.norm(build_j(lat, h).matrix @ f) <= 1e-12


class TestTranslate:
    def test_zero_shift(self):
        r = translate_physical(make_lattice(4, 1.0), oscillator(np.pi / 2, 0.0), 0.0)
        assert r.residuals["residual"] <= 1e-15

    def test_phase_of_plain_oscillator(self):
        r = translate_physical(make_lattice(4, 1.0), oscillator(np.pi / 2, 0.0), 1.0)
        assert r.passed
        np.testing.assert_allclose(r.metadata["phases"][0], np.exp(-1j * np.pi / 2), atol=1e-14)

    def test_pairing(self):
        H = oscillator(5 * np.pi / 8, 3 * np.pi / 8)
        r = translate_physical(make_lattice(4, 1.0), H, 1.0)
        assert r.residuals["residual"] <= 1e-9 and not r.expected_nonzero

    def test_full_period_is_identity(self):
        H = oscillator(5 * np.pi / 8, 3 * np.pi / 8)
        lat = make_lattice(4, 1.0)
        r = translate_physical(lat, H, lat.period)
        assert r.residuals["residual"] <= 1e-9
        np.testing.assert_allclose(r.metadata["phases"], [1, 1], atol=1e-12)

    def test_incommensurate_flagged(self):
        r = translate_physical(make_lattice(4, 1.0), oscillator(1.0, 0.2), 1.0)
        assert r.expected_nonzero


class TestTimeCommutator:
    def values(self, sizes):
        out = []
        for n in sizes:
            lat = make_lattice(n, 1.0)
            f = gaussian_packet(lat, lat.period / 8)
            out.append(abs(commutator_pt_time(lat, f, f)))
        return out

    def test_n64_bound_and_decrease(self):
        v = self.values([64, 128, 256])
        assert v[0] <= 1e-3
        assert v[1] < v[0] and v[2] < v[1]

    def test_edge_site_is_large(self):
        lat = make_lattice(16, 1.0)
        e = np.zeros(16)
        e[0] = 1.0
        assert abs(commutator_pt_time(lat, e, e)) > 0.5


class TestConjugation:
    def test_constant_generator(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        r = conjugation_symmetry(make_lattice(8, 0.5), a + a.conj().T)
        assert r.residuals["commutator"] <= 1e-10 and r.passed

    def test_zero_generator(self):
        r = conjugation_symmetry(make_lattice(8, 0.5), np.zeros((1, 1)))
        assert max(r.residuals.values()) <= 1e-13

    def seeded_residuals(self, scheme, sizes, T=8.0):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        m = 0.5 * (a + a.conj().T)
        return [conjugation_symmetry(make_lattice(n, T / n), lambda t: t * m, scheme).residuals["conjugation"]
                for n in sizes]

    def test_forward_ratio_two(self):
        r = self.seeded_residuals("forward", [64, 128])
        assert 1.8 <= r[0] / r[1] <= 2.2

    def test_central_order_at_least_first(self):
        sizes = [64, 128, 256]
        r = self.seeded_residuals("central", sizes)
        assert convergence_order(r, [8.0 / n for n in sizes]) >= 0.9

    def test_unknown_scheme(self):
        with pytest.raises(InvalidArgumentError):
            conjugation_symmetry(make_lattice(4, 1.0), lambda t: t * np.eye(1), "backward")


def test_shift_of_pt_matches_expm_for_many_modes():
    lat = make_lattice(6, 0.5)
    p = build_pt_full(lat, 2).matrix
    np.testing.assert_allclose(sla.expm(-1j * lat.dt * p), np.kron(shift_matrix(lat), np.eye(2)), atol=1e-13)

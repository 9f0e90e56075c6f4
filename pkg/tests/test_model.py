import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from nhje.algebra import I2, SX, SY, SZ, dagger
from nhje.errors import DomainError, InvalidInputError
from nhje.model import (
    DriveProtocol, HybridParams, energy_basis, frame_rotation, h_apt, h_hybrid, h_pt, h_relative, h_rotated,
    h_rotated_relative, h_total, hybrid_parts, parity_exchange, su2_rotation,
)

from oracles import APT, HYB, PT

angles = st.floats(-10, 10, allow_nan=False)
rates = st.floats(0, 0.5, allow_nan=False)


class TestHybridHamiltonian:
    def test_pt_endpoint(self):
        np.testing.assert_allclose(h_hybrid(HybridParams(0.03, 0.02, PT)), h_pt(0.03, 0.02), atol=1e-17)

    def test_apt_endpoint(self):
        np.testing.assert_array_equal(h_hybrid(HybridParams(0.03, 0.02, APT)), h_apt(0.03, 0.02))

    def test_hermitian_midpoint(self):
        H = h_hybrid(HybridParams(1.0, 0.0, HYB))
        np.testing.assert_allclose(H, (SX - SZ) / math.sqrt(2), atol=1e-15)

    @given(rates, rates, angles)
    def test_split(self, J, g, th):
        herm, anti = hybrid_parts(HybridParams(J, g, th))
        np.testing.assert_allclose(herm, dagger(herm), atol=0)
        np.testing.assert_allclose(anti, -dagger(anti), atol=0)

    @given(rates, rates, angles)
    def test_eigenvalues(self, J, g, th):
        H = h_hybrid(HybridParams(J, g, th))
        # characteristic polynomial of a traceless 2x2: lambda^2 + det H
        assert abs(H[0, 0] + H[1, 1]) < 1e-15
        det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
        assert abs(-det - (J * J - g * g)) < 1e-12

    @given(rates, rates, angles)
    def test_periodic(self, J, g, th):
        a = h_hybrid(HybridParams(J, g, th))
        b = h_hybrid(HybridParams(J, g, th + 2 * math.pi))
        np.testing.assert_allclose(a, b, atol=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(InvalidInputError):
            HybridParams(-0.1, 0.0, 0.0)


class TestRotation:
    def test_identity_at_zero(self):
        np.testing.assert_array_equal(su2_rotation(0.0), I2)

    def test_maps_apt_to_pt(self):
        U = su2_rotation(PT)
        np.testing.assert_allclose(U @ h_apt(0.03, 0.02) @ dagger(U), h_pt(0.03, 0.02), atol=1e-13)

    @given(rates, rates, angles)
    def test_conjugation(self, J, g, th):
        U = su2_rotation(th)
        np.testing.assert_allclose(U @ h_apt(J, g) @ dagger(U), h_hybrid(HybridParams(J, g, th)), atol=1e-13)

    @given(angles)
    def test_unitary_unit_det(self, th):
        U = su2_rotation(th)
        np.testing.assert_allclose(U @ dagger(U), I2, atol=1e-14)
        assert abs(np.linalg.det(U) - 1) < 1e-14

    @given(angles)
    def test_is_y_exponential(self, th):
        from scipy.linalg import expm

        np.testing.assert_allclose(su2_rotation(th), expm(0.5j * th * SY), atol=1e-14)


class TestEnergyBasis:
    def test_apt(self):
        eb = energy_basis(0.0)
        np.testing.assert_array_equal(eb.e_minus, [-1, 0])
        np.testing.assert_array_equal(eb.e_plus, [0, 1])

    def test_pt(self):
        eb = energy_basis(PT)
        r = 1 / math.sqrt(2)
        np.testing.assert_allclose(eb.e_minus, [-r, r], atol=1e-16)
        np.testing.assert_allclose(eb.e_plus, [r, r], atol=1e-16)

    @given(angles)
    def test_orthonormal(self, th):
        eb = energy_basis(th)
        assert abs(np.vdot(eb.e_plus, eb.e_plus) - 1) < 1e-14
        assert abs(np.vdot(eb.e_minus, eb.e_minus) - 1) < 1e-14
        assert abs(np.vdot(eb.e_plus, eb.e_minus)) < 1e-14
        np.testing.assert_allclose(eb.n_HM, [math.sin(th), 0, -math.cos(th)])

    @given(rates, angles)
    def test_eigenvectors(self, J, th):
        herm, _ = hybrid_parts(HybridParams(J, 0.3, th))
        eb = energy_basis(th)
        np.testing.assert_allclose(herm @ eb.e_plus, J * eb.e_plus, atol=1e-13)
        np.testing.assert_allclose(herm @ eb.e_minus, -J * eb.e_minus, atol=1e-13)

    def test_label_lookup(self):
        eb = energy_basis(0.3)
        assert eb.vector("+") is eb.e_plus
        with pytest.raises(InvalidInputError):
            eb.vector("0")


class TestParityExchange:
    def test_pt(self):
        np.testing.assert_allclose(parity_exchange(PT), -SZ, atol=1e-16)

    def test_apt(self):
        np.testing.assert_array_equal(parity_exchange(APT), -SX)

    @given(rates, rates, angles)
    def test_antisymmetry_of_hamiltonian(self, J, g, th):
        P = parity_exchange(th)
        H = h_hybrid(HybridParams(J, g, th))
        np.testing.assert_allclose(P @ H.conj() @ P, -H, atol=1e-13)

    @given(angles)
    def test_swaps_eigenstates(self, th):
        P = parity_exchange(th)
        eb = energy_basis(th)
        np.testing.assert_allclose(P @ eb.e_plus, eb.e_minus, atol=1e-14)
        np.testing.assert_allclose(P @ eb.e_minus, eb.e_plus, atol=1e-14)
        np.testing.assert_allclose(P @ P, I2, atol=1e-14)
        np.testing.assert_array_equal(P, dagger(P))
        assert abs(np.trace(P)) < 1e-15


class TestProtocols:
    def test_constant(self):
        p = DriveProtocol.constant(0.03, 20)
        for t in (0, 7.3, 20):
            np.testing.assert_allclose(h_total(t, p, 0.02), 0.03 * SX + 0.02j * SZ - 0.02j * I2, atol=1e-17)

    def test_triangle_peak_and_ends(self):
        p = DriveProtocol.triangle(0.03, 0.06, 30)
        assert p.coupling(15) == pytest.approx(0.06, abs=1e-15)
        assert p.coupling(0) == pytest.approx(0.03, abs=1e-15)
        assert p.coupling(30) == pytest.approx(0.03, abs=1e-15)
        assert p.coupling(7.5) == pytest.approx(0.045, abs=1e-15)
        assert p.J_initial == p.J_final == 0.03 and p.J_peak == 0.06

    def test_sin_quarter_period(self):
        p = DriveProtocol.sin_detuning(0.12, 0.5, 26.7)
        assert p.detuning(26.7 / 4) == pytest.approx(0.5, abs=1e-15)
        assert p.coupling(3.0) == 0.12

    def test_sin_integral_vanishes(self):
        p = DriveProtocol.sin_detuning(0.12, 0.5, 34.6)
        val, _ = quad(p.detuning, 0, p.T)
        assert abs(val) < 1e-12

    def test_outside_interval(self):
        p = DriveProtocol.constant(0.03, 10)
        with pytest.raises(DomainError):
            h_total(10.5, p, 0.02)
        with pytest.raises(DomainError):
            h_relative(-1, p, 0.02)

    @pytest.mark.parametrize("kw", [
        dict(kind="ConstantJ", T=0.0, J1=0.03),
        dict(kind="ConstantJ", T=10, J1=-1),
        dict(kind="TriangleJ", T=10, Jmin=0.06, Jmax=0.03),
        dict(kind="Wobble", T=10),
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInputError):
            DriveProtocol(**kw)

    @pytest.mark.parametrize("p", [
        DriveProtocol.constant(0.03, 12.0),
        DriveProtocol.triangle(0.03, 0.06, 30.0),
        DriveProtocol.sin_detuning(0.12, 0.5, 26.7),
    ])
    def test_config_round_trip(self, p):
        assert DriveProtocol.from_config(p.to_config()) == p

    def test_with_duration(self):
        p = DriveProtocol.sin_detuning(0.12, 0.5, 10).with_duration(20)
        assert p.T == 20 and p.J2 == 0.12
        assert p.detuned and not DriveProtocol.constant(0.1, 1).detuned


class TestRotatedFrame:
    protos = [DriveProtocol.constant(0.03, 30), DriveProtocol.triangle(0.03, 0.06, 30),
              DriveProtocol.sin_detuning(0.12, 0.5, 30)]

    @pytest.mark.parametrize("proto", protos)
    def test_explicit_form(self, proto):
        for th in (0.0, 0.4, HYB, PT, 2.9):
            for t in (0.0, 3.1, 17.0):
                J, D, g = proto.coupling(t), proto.detuning(t), 0.02
                expected = (J * (math.sin(th) * SX - math.cos(th) * SZ)
                            + (D / 2 + 1j * g) * (math.cos(th) * SX + math.sin(th) * SZ) - 1j * g * I2)
                np.testing.assert_allclose(h_rotated(t, proto, g, th), expected, atol=1e-15)

    @pytest.mark.parametrize("proto", protos)
    def test_conjugation_of_lab_frame(self, proto, rng):
        for th in rng.uniform(-4, 4, size=20):
            t = rng.uniform(0, proto.T)
            R = frame_rotation(th)
            np.testing.assert_allclose(R @ h_total(t, proto, 0.02) @ dagger(R), h_rotated(t, proto, 0.02, th),
                                       atol=1e-13)

    def test_lab_frame_is_pt_endpoint(self):
        p = DriveProtocol.sin_detuning(0.12, 0.5, 30)
        np.testing.assert_allclose(h_rotated(4.0, p, 0.02, PT), h_total(4.0, p, 0.02), atol=1e-16)

    @pytest.mark.parametrize("th, ref", [(PT, h_pt), (APT, h_apt)])
    def test_zero_detuning_reduces_to_family(self, th, ref):
        p = DriveProtocol.triangle(0.03, 0.06, 30)
        for t in (0.0, 10.0, 22.5):
            np.testing.assert_allclose(h_rotated_relative(t, p, 0.02, th), ref(p.coupling(t), 0.02), atol=1e-17)

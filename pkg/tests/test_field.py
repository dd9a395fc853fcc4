import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonwave import snapshot, spectral
from photonwave.clifford import SIGMA, project_diag
from photonwave.currents import inner_product, riesz_tensor
from photonwave.dynamics import equation_residual, time_derivative
from photonwave.errors import (
    BadMagic, ConstraintError, HeaderError, PayloadLengthMismatch, PreconditionError,
    TruncatedSnapshot, ValidationError,
)
from photonwave.field import (
    ComponentFields, GridSpec, PhotonField, PhysicsConfig, assemble, disassemble, gauge_check,
    gauge_generator, gauge_transform, plane_wave_state, potential_state, random_field, validate,
)

G8 = GridSpec((8, 8, 8))
CIRC = np.array([1, 1j, 0]) / np.sqrt(2)


def grad(grid, f):
    return spectral.ifft(1j * grid.wave_vectors * spectral.fft(f)[..., None])


def curl(grid, a):
    return spectral.ifft(1j * np.cross(grid.wave_vectors, spectral.fft(a)))


def div(grid, a):
    return spectral.ifft(1j * np.einsum("...k,...k->...", grid.wave_vectors, spectral.fft(a)))


def random_components(rng, shape):
    r3 = lambda: rng.normal(size=shape + (3,))  # noqa: E731
    c3 = lambda: rng.normal(size=shape + (3,)) + 1j * rng.normal(size=shape + (3,))  # noqa: E731
    c = lambda: rng.normal(size=shape) + 1j * rng.normal(size=shape)  # noqa: E731
    return ComponentFields(r3(), r3(), r3(), r3(), c(), c(), c3(), c3())


class TestGridAndPhysics:
    def test_grid_basics(self):
        g = GridSpec((4, 2, 1), (1.0, 2.0, 3.0))
        assert g.shape == (4, 2, 1)
        assert np.allclose(g.spacing, (0.25, 1.0, 3.0))
        assert g.cell_volume == pytest.approx(0.75)
        assert g.volume == pytest.approx(6.0)
        assert g.wave_vectors.shape == (4, 2, 1, 3)
        assert np.allclose(g.wave_vectors[1, 0, 0], [2 * np.pi, 0, 0])

    @pytest.mark.parametrize("n", [(0, 1, 1), (2, 2), (-1, 2, 2)])
    def test_bad_grid(self, n):
        with pytest.raises(ValidationError):
            GridSpec(n)

    def test_bad_length(self):
        with pytest.raises(ValidationError):
            GridSpec((2, 2, 2), (1.0, 0.0, 1.0))

    @pytest.mark.parametrize("kw", [{"hbar": 0}, {"c": -1}, {"m_flash": float("nan")}])
    def test_bad_physics(self, kw):
        with pytest.raises(ValidationError):
            PhysicsConfig(**kw)

    def test_field_shape_checked_and_read_only(self):
        with pytest.raises(ValidationError):
            PhotonField(G8, np.zeros((4, 4, 4, 4, 4)))
        psi = PhotonField.zeros(G8)
        with pytest.raises(ValueError):
            psi.values[0, 0, 0, 0, 0] = 1


class TestAssembly:
    def test_zero(self):
        psi = assemble(ComponentFields.zeros(G8.n), G8)
        assert not np.any(psi.values)
        c = disassemble(psi)
        assert not np.any(c.e_plus) and not np.any(c.a_minus)

    def test_electric_field_example(self):
        c = ComponentFields.zeros(G8.n)
        c.e_plus[...] = [1, 0, 0]
        psi = assemble(c, G8)
        assert np.allclose(psi.psi_plus, 1j * SIGMA[1])
        for blk in (psi.psi_minus, psi.chi_plus, psi.chi_minus):
            assert not np.any(blk)

    def test_disassemble_example(self):
        v = np.zeros(G8.n + (4, 4), complex)
        v[..., 2:4, 2:4] = -1j * SIGMA[3]
        c = disassemble(PhotonField(G8, v))
        assert np.allclose(c.e_minus, [0, 0, 1]) and np.allclose(c.b_minus, 0)

    def test_roundtrip(self, rng):
        g = GridSpec((3, 2, 2))
        c = random_components(rng, g.n)
        c2 = disassemble(assemble(c, g))
        for name in ("e_plus", "b_plus", "e_minus", "b_minus", "phi_plus", "phi_minus", "a_plus", "a_minus"):
            assert np.allclose(getattr(c, name), getattr(c2, name), atol=1e-12), name
        psi = random_field(4, G8, 2.5, branch=None)
        assert np.allclose(assemble(disassemble(psi), G8).values, psi.values, atol=1e-12)

    def test_trace_constraint(self):
        v = np.zeros(G8.n + (4, 4), complex)
        v[..., 0, 0] = 1
        with pytest.raises(ConstraintError):
            disassemble(PhotonField(G8, v))

    def test_complex_e_rejected(self):
        c = ComponentFields.zeros(G8.n)
        bad = ComponentFields(c.e_plus + 1j, c.b_plus, c.e_minus, c.b_minus, c.phi_plus, c.phi_minus,
                              c.a_plus, c.a_minus)
        with pytest.raises(ValidationError):
            assemble(bad, G8)


class TestValidation:
    def test_plane_wave(self):
        psi = plane_wave_state(G8, [0, 0, 2], 1, CIRC)
        rep = validate(psi)
        assert rep.transversality_linf <= 1e-12 and rep.trace_linf <= 1e-12 and rep.ok()

    def test_longitudinal_field(self):
        k = np.array([0, 0, 1.0])
        x = G8.coordinates
        c = ComponentFields.zeros(G8.n)
        c.e_plus[...] = np.cos(x @ k)[..., None] * k
        assert validate(assemble(c, G8)).transversality_linf == pytest.approx(1.0)

    def test_random_field(self):
        rep = validate(random_field(1, G8, 3.0))
        assert rep.trace_linf <= 1e-12 and rep.transversality_linf <= 1e-12


class TestConstructors:
    def test_plane_wave_density_constant(self):
        psi = plane_wave_state(G8, [0, 0, 2], 1, CIRC)
        tau00 = riesz_tensor(psi).upper[..., 0, 0]
        c = disassemble(psi)
        expect = 0.5 * (np.sum(c.e_plus**2, -1) + np.sum(c.b_plus**2, -1))
        assert np.allclose(tau00, expect, atol=1e-14)
        assert np.allclose(tau00, 0.5 * np.linalg.norm(CIRC) ** 2, atol=1e-14)

    def test_plane_wave_rejections(self):
        with pytest.raises(ValidationError):
            plane_wave_state(G8, [0, 0, 0.5], 1, CIRC)  # off lattice
        with pytest.raises(ValidationError):
            plane_wave_state(G8, [0, 0, 2], 1, [0, 0, 1])  # purely longitudinal
        with pytest.raises(ValidationError):
            plane_wave_state(G8, [0, 0, 2], 1, [1, 0, 0])  # mixed helicity, no branch
        with pytest.raises(ValidationError):
            plane_wave_state(G8, [0, 0, 2], 2, CIRC)

    def test_plane_wave_branch_explicit(self):
        psi = plane_wave_state(G8, [0, 0, 2], 1, [1, 0, 0], branch=-1)
        assert equation_residual(psi, -1).linf <= 1e-12
        assert equation_residual(psi, 1).linf > 0.1

    @pytest.mark.parametrize("maker", [
        lambda: plane_wave_state(G8, [0, 0, 2], 1, CIRC),
        lambda: plane_wave_state(G8, [1, 1, 0], -1, [1, -1, 1j * np.sqrt(2)], branch=1),
        lambda: random_field(2, G8, 2.5, branch=None),
        lambda: potential_state(G8, 3, 1.5),
    ])
    def test_potential_relations(self, maker):
        psi = maker()
        ph = psi.physics
        pref = ph.hbar / (ph.m_flash * ph.c)
        c = disassemble(psi)
        d = time_derivative(psi)
        vec = lambda blk: 0.5 * np.einsum("kab,...ba->...k", SIGMA[1:], blk)  # noqa: E731
        phi_p, phi_m = c.phi_plus, c.phi_minus
        dphi_p = 0.5 * np.trace(d[..., 2:4, 0:2], axis1=-2, axis2=-1)
        dphi_m = 0.5 * np.trace(d[..., 0:2, 2:4], axis1=-2, axis2=-1)
        da_p, da_m = -vec(d[..., 2:4, 0:2]), vec(d[..., 0:2, 2:4])
        # Lorenz gauge
        assert np.max(np.abs(dphi_p / ph.c + div(G8, c.a_plus))) <= 1e-10
        assert np.max(np.abs(dphi_m / ph.c + div(G8, c.a_minus))) <= 1e-10
        # field strengths from potentials
        E_p = pref * (-grad(G8, phi_p) - da_p / ph.c)
        E_m = pref * (-grad(G8, phi_m) - da_m / ph.c)
        assert np.max(np.abs(E_p + 1j * pref * curl(G8, c.a_plus) - c.f_plus)) <= 1e-10
        assert np.max(np.abs(E_m - 1j * pref * curl(G8, c.a_minus) - np.conj(c.f_minus))) <= 1e-10

    def test_random_field_deterministic(self):
        a = random_field(5, G8, 2.0)
        b = random_field(5, G8, 2.0)
        assert a.values.tobytes() == b.values.tobytes()
        assert not np.array_equal(a.values, random_field(6, G8, 2.0).values)

    def test_random_field_norm_positive(self):
        phi = random_field(7, G8, 2.0).diag()
        assert inner_product(phi, phi).real > 0

    def test_random_field_amplitude(self):
        psi = random_field(7, G8, 2.0, amplitude=3.0)
        rms = np.sqrt(np.sum(np.abs(project_diag(psi.fourier())) ** 2))
        assert rms == pytest.approx(3.0)

    def test_random_field_respects_cutoff(self):
        hat = random_field(1, G8, 1.5).fourier()
        kn = np.linalg.norm(G8.wave_vectors, axis=-1)
        peak = np.max(np.abs(hat))
        assert np.max(np.abs(hat[kn > 1.5])) <= 1e-14 * peak
        assert np.max(np.abs(hat[kn == 0])) <= 1e-14 * peak

    def test_potential_state_has_real_potentials(self):
        c = disassemble(potential_state(G8, 1, 1.5))
        for a in (c.phi_plus, c.phi_minus, c.a_plus, c.a_minus):
            assert np.max(np.abs(np.imag(a))) <= 1e-14


class TestGauge:
    def test_zero_generator(self):
        psi = random_field(1, G8, 2.0)
        g = gauge_transform(psi, PhotonField.zeros(G8))
        assert np.array_equal(g.values, psi.values)

    @pytest.mark.parametrize("kind", ["general", "scalar"])
    def test_diagonal_blocks_untouched(self, kind):
        psi = random_field(1, G8, 2.0)
        ups = gauge_generator(G8, 9, 2.0, kind=kind)
        assert gauge_check(ups) <= 1e-14
        g = gauge_transform(psi, ups)
        assert np.array_equal(project_diag(g.values), project_diag(psi.values))
        assert np.max(np.abs(g.values - psi.values)) > 1e-3

    def test_plane_wave_residual_unchanged(self):
        psi = plane_wave_state(G8, [0, 2, 0], 1, [1j, 0, 1] / np.sqrt(2), branch=1)
        ups = gauge_generator(G8, 3, 2.0)
        before = equation_residual(psi).linf
        after = equation_residual(gauge_transform(psi, ups)).linf
        assert abs(before - after) <= 1e-10

    def test_invalid_generator(self, rng):
        ups = PhotonField(G8, rng.normal(size=G8.n + (4, 4)))
        with pytest.raises(PreconditionError):
            gauge_transform(random_field(1, G8, 2.0), ups)

    def test_bad_kind(self):
        with pytest.raises(ValidationError):
            gauge_generator(G8, 1, 2.0, kind="other")


class TestFieldArithmetic:
    def test_linear_ops(self):
        a, b = random_field(1, G8, 2.0), random_field(2, G8, 2.0)
        assert np.allclose((a + b).values - b.values, a.values)
        assert np.allclose((a - b).values, a.values - b.values)
        assert np.allclose((a * 2).values, 2 * a.values)
        assert np.allclose((-a).values, -a.values)

    def test_incompatible_grids(self):
        with pytest.raises(ValidationError):
            PhotonField.zeros(G8) + PhotonField.zeros(GridSpec((4, 4, 4)))


class TestSnapshot:
    def test_roundtrip_bit_exact(self, tmp_path):
        psi = random_field(3, G8, 2.0, physics=PhysicsConfig(2.0, 3.0, 0.5)).with_values(
            random_field(3, G8, 2.0).values, time=1.25)
        path = tmp_path / "s.phwf"
        snapshot.save(psi, path)
        back = snapshot.load(path)
        assert back.values.tobytes() == psi.values.tobytes()
        assert back.grid == psi.grid and back.time == psi.time and back.physics == psi.physics
        assert [p.name for p in tmp_path.iterdir()] == ["s.phwf"]

    def test_bad_magic(self):
        data = bytearray(snapshot.encode(PhotonField.zeros(GridSpec((2, 2, 2)))))
        data[0:1] = b"X"
        with pytest.raises(BadMagic, match="bad magic"):
            snapshot.decode(bytes(data))

    def test_payload_mismatch(self):
        big = snapshot.encode(PhotonField.zeros(G8))
        small = snapshot.encode(PhotonField.zeros(GridSpec((4, 4, 4))))
        hlen = len(big) - G8.size * 256
        with pytest.raises(PayloadLengthMismatch, match="payload length mismatch"):
            snapshot.decode(big[:hlen] + small[len(small) - 4**3 * 256:])

    def test_truncated(self):
        data = snapshot.encode(PhotonField.zeros(GridSpec((2, 2, 2))))
        with pytest.raises(TruncatedSnapshot):
            snapshot.decode(data[:7])
        with pytest.raises(TruncatedSnapshot):
            snapshot.decode(data[:20])
        with pytest.raises(TruncatedSnapshot):
            snapshot.decode(data[:-3])

    def test_bad_header(self):
        data = snapshot.MAGIC + snapshot._LEN.pack(4) + b"{]}x"
        with pytest.raises(HeaderError):
            snapshot.decode(data)

    @given(st.binary(max_size=64))
    def test_garbage_never_crashes_uncontrolled(self, blob):
        with pytest.raises((BadMagic, TruncatedSnapshot, HeaderError, PayloadLengthMismatch)):
            snapshot.decode(blob)

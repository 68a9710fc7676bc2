import math

import numpy as np
import pytest

from ctvtomo.geometry import GridMismatchError, Volume, make_grid
from ctvtomo.phantom import (
    CrackSpec,
    NoiseSpec,
    add_noise,
    column_interior_mask,
    make_column_phantom,
    psnr,
)
from ctvtomo.projector import Sinogram, make_scan_geometry, project


class TestCrackSpec:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            CrackSpec(kind="spiral", width=0.2)

    def test_nonpositive_width_rejected(self):
        with pytest.raises(ValueError):
            CrackSpec(kind="radial", width=0.0)


class TestColumnPhantom:
    def test_plain_cylinder_is_binary_and_area_accurate(self):
        grid = make_grid(32, 32, 4, 0.1)
        radius = 1.0  # 10 voxels
        vol = make_column_phantom(grid, radius)
        assert set(np.unique(vol.values)) == {0.0, 1.0}
        count = vol.values.sum()
        expected = math.pi * radius**2 * grid.nz / grid.voxel_spacing**2
        assert abs(count - expected) <= 0.02 * expected

    def test_concentric_crack_gives_two_nonzero_levels(self):
        grid = make_grid(40, 40, 3, 0.1)
        crack = CrackSpec(kind="concentric", radius=1.0, width=0.3, contrast=0.5)
        vol = make_column_phantom(grid, 1.8, [crack])
        levels = set(np.unique(vol.values))
        assert levels == {0.0, 0.5, 1.0}
        assert (vol.values == 0.5).any()

    def test_radial_crack_mirror_symmetry(self):
        # crack along the +x half-plane: the phantom is symmetric under y -> -y
        grid = make_grid(33, 33, 2, 0.1)
        crack = CrackSpec(kind="radial", angle_deg=0.0, width=0.25)
        vol = make_column_phantom(grid, 1.4, [crack])
        assert np.array_equal(vol.values, vol.values[:, ::-1, :])
        assert (vol.values == 0.0).any()

    def test_transverse_crack_spans_the_column(self):
        grid = make_grid(24, 24, 24, 0.1)
        crack = CrackSpec(kind="transverse", z_position=0.2, tilt_deg=10.0, width=0.2)
        vol = make_column_phantom(grid, 1.0, [crack])
        carved = vol.values == 0.0
        inside = make_column_phantom(grid, 1.0).values == 1.0
        assert (carved & inside).sum() > 0
        # every x-y column inside the cylinder is crossed by the tilted plane
        crossed = (carved & inside).any(axis=2)
        assert np.array_equal(crossed, inside.any(axis=2))

    def test_bitwise_reproducible(self):
        grid = make_grid(20, 20, 5, 0.1)
        cracks = [CrackSpec(kind="radial", angle_deg=40.0, width=0.2)]
        a = make_column_phantom(grid, 0.8, cracks)
        b = make_column_phantom(grid, 0.8, cracks)
        assert np.array_equal(a.values, b.values)

    def test_column_must_fit_in_grid(self):
        grid = make_grid(16, 16, 2, 0.1)
        with pytest.raises(ValueError):
            make_column_phantom(grid, 0.9)  # 16 voxels * 0.1 / 2 = 0.8 max

    def test_out_of_column_concentric_crack_rejected(self):
        grid = make_grid(32, 32, 2, 0.1)
        crack = CrackSpec(kind="concentric", radius=1.1, width=0.3)
        with pytest.raises(ValueError):
            make_column_phantom(grid, 1.2, [crack])

    def test_out_of_grid_transverse_crack_rejected(self):
        grid = make_grid(32, 32, 4, 0.1)
        crack = CrackSpec(kind="transverse", z_position=5.0, width=0.2)
        with pytest.raises(ValueError):
            make_column_phantom(grid, 1.2, [crack])

    def test_subvoxel_crack_width_rejected(self):
        grid = make_grid(32, 32, 2, 0.1)
        crack = CrackSpec(kind="radial", width=0.05)
        with pytest.raises(ValueError):
            make_column_phantom(grid, 1.2, [crack])

    def test_interior_mask_avoids_cracks_and_rim(self):
        grid = make_grid(48, 48, 8, 0.1)
        cracks = [
            CrackSpec(kind="radial", angle_deg=30.0, width=0.2),
            CrackSpec(kind="concentric", radius=1.0, width=0.2),
        ]
        vol = make_column_phantom(grid, 1.8, cracks)
        mask = column_interior_mask(grid, 1.8, cracks, margin_voxels=2)
        assert mask.any()
        assert (vol.values[mask] == 1.0).all()
        # nothing within two voxels of the rim
        rim = make_column_phantom(grid, 1.8).values == 0.0
        assert not (mask & rim).any()


class TestAddNoise:
    def geometry(self, rows=50, channels=600):
        return make_scan_geometry(make_grid(8, 8, rows, 0.1), (0.0,), 0.001, channels)

    def test_zero_sigma_is_identity(self):
        rng = np.random.default_rng(0)
        geom = self.geometry(4, 20)
        sino = Sinogram(geom, rng.random(geom.shape))
        out = add_noise(sino, NoiseSpec(relative_sigma=0.0, seed=5))
        assert np.array_equal(out.values, sino.values)

    def test_sample_sigma_matches_target(self):
        rng = np.random.default_rng(1)
        geom = self.geometry()  # 1 view * 50 rows * 600 channels... too small
        # use >= 1e5 entries
        grid = make_grid(8, 8, 200, 0.1)
        geom = make_scan_geometry(grid, (0.0, 90.0), 0.001, 500)
        clean = Sinogram(geom, rng.random(geom.shape))
        spec = NoiseSpec(relative_sigma=0.02, seed=9)
        target = 0.02 * (clean.values.max() - clean.values.min())
        noisy = add_noise(clean, spec)
        delta = noisy.values - clean.values
        assert delta.size >= 1e5
        assert abs(delta.std() - target) <= 0.02 * target
        assert abs(delta.mean()) <= 3 * target / math.sqrt(delta.size)

    def test_deterministic_per_seed_and_distinct_across_seeds(self):
        rng = np.random.default_rng(2)
        geom = self.geometry(20, 300)
        clean = Sinogram(geom, rng.random(geom.shape))
        a = add_noise(clean, NoiseSpec(0.02, seed=3))
        b = add_noise(clean, NoiseSpec(0.02, seed=3))
        c = add_noise(clean, NoiseSpec(0.02, seed=4))
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)
        # same clean part: the difference fields are pure noise,
        # independent across seeds
        na = (a.values - clean.values).reshape(-1)
        nc = (c.values - clean.values).reshape(-1)
        assert abs(np.corrcoef(na, nc)[0, 1]) < 0.01

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(relative_sigma=-0.1)


class TestPsnr:
    def test_exact_match_is_infinite(self):
        grid = make_grid(8, 8, 2, 0.1)
        vol = make_column_phantom(grid, 0.3)
        assert psnr(vol, vol) == math.inf

    def test_uniform_offset_closed_form(self):
        grid = make_grid(10, 10, 2, 0.1)
        reference = Volume(grid, np.ones(grid.shape))
        recon = Volume(grid, np.ones(grid.shape) + 0.1)
        assert psnr(recon, reference) == pytest.approx(20.0)

    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(4)
        grid = make_grid(9, 7, 3, 0.2)
        recon = Volume(grid, rng.random(grid.shape))
        reference = Volume(grid, rng.random(grid.shape) + 0.5)
        mse = np.mean((recon.values - reference.values) ** 2)
        expected = 10 * math.log10(reference.values.max() ** 2 / mse)
        assert psnr(recon, reference) == pytest.approx(expected, rel=1e-12)

    def test_grid_mismatch_rejected(self):
        a = Volume.zeros(make_grid(4, 4, 2, 0.1))
        b = Volume.zeros(make_grid(4, 4, 2, 0.2))
        with pytest.raises(GridMismatchError):
            psnr(a, b)


def test_noisy_projection_pipeline_smoke():
    grid = make_grid(32, 32, 6, 0.1)
    vol = make_column_phantom(
        grid, 1.2, [CrackSpec(kind="radial", angle_deg=18.0, width=0.2)]
    )
    geom = make_scan_geometry(grid, (18.0, 162.0, 234.0, 306.0), 0.05)
    clean = project(vol, geom)
    noisy = add_noise(clean, NoiseSpec(0.02, seed=0))
    assert noisy.values.shape == geom.shape
    assert not np.array_equal(noisy.values, clean.values)

"""Cracked-column phantom, sparse-view projection, and the noise model.

Builds the stock phantom (a homogeneous cylinder with radial, transverse
and concentric cracks), forward-projects it with the 4-view parallel-beam
geometry, adds 2%-of-range Gaussian noise, and writes a figure comparing
the clean and noisy sinograms plus a phantom cross section.

Run from the repository root:

    python3 demos/01_phantom_and_projection.py
"""
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import ctvtomo as ct
from ctvtomo.config import default_cracks

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# %% The simulation grid: desk-scale version of the full setup.
grid = ct.make_grid(64, 64, 32, spacing=0.097)
radius = 2.2  # mm
cracks = default_cracks(radius)
phantom = ct.make_column_phantom(grid, radius, cracks)
print(f"phantom: {grid.nx}x{grid.ny}x{grid.nz} voxels, "
      f"column radius {radius} mm, {len(cracks)} cracks")

# %% Four parallel-beam views; the detector pitch is half the voxel pitch.
geom = ct.make_scan_geometry(grid, (18.0, 162.0, 234.0, 306.0), 0.049)
clean = ct.project(phantom, geom)
noisy = ct.add_noise(clean, ct.NoiseSpec(relative_sigma=0.02, seed=0))
sigma = 0.02 * (clean.values.max() - clean.values.min())
print(f"sinogram: {geom.num_views} views x {geom.num_rows} rows x "
      f"{geom.num_channels} channels; noise sigma = {sigma:.4f}")

# %% A mid-column slice and the central-row sinogram profiles.
fig, axes = plt.subplots(1, 3, figsize=(13, 4))
mid_z = grid.nz // 2
axes[0].imshow(phantom.values[:, :, mid_z].T, origin="lower", cmap="gray")
axes[0].set_title(f"phantom, z slice {mid_z}")
axes[0].set_xlabel("i")
axes[0].set_ylabel("j")

offsets = geom.channel_offsets()
for v, angle in enumerate(geom.angles_deg):
    axes[1].plot(offsets, clean.values[v, mid_z], label=f"{angle:g} deg")
axes[1].set_title("clean line integrals (central row)")
axes[1].set_xlabel("detector offset [mm]")
axes[1].legend(fontsize=8)

axes[2].plot(offsets, clean.values[0, mid_z], label="clean")
axes[2].plot(offsets, noisy.values[0, mid_z], lw=0.7, label="noisy")
axes[2].set_title("first view with 2%-of-range noise")
axes[2].set_xlabel("detector offset [mm]")
axes[2].legend(fontsize=8)

fig.tight_layout()
fig.savefig(OUT / "01_phantom_and_projection.png", dpi=130)
print(f"wrote {OUT / '01_phantom_and_projection.png'}")

# %% The same artifacts as portable files (what the CLI pipeline writes).
ct.volio.write_volume(OUT / "phantom.raw", phantom)
ct.volio.write_sinogram(OUT / "sino_noisy.raw", noisy, {"seed": 0})
ct.volio.export_slices(phantom, "z", [mid_z], OUT, stem="phantom", depth=16)
print(f"wrote raw volume, sinogram and PGM slice into {OUT}/")

"""Raw float32 volume/sinogram files with text sidecars, and PGM slice export.

Array files are flat little-endian IEEE float32 with no header.  Volumes
are laid out k-outer / j-middle / i-inner; sinograms view-outer /
row-middle / channel-inner.  Every array file ``foo.raw`` is accompanied
by ``foo.raw.meta``, a line-oriented ``key = value`` text file carrying
the shape, the physical geometry, and free-form provenance keys, so the
binary is self-describing and the metadata diffs cleanly.

Slice images are binary PGM (P5), 8- or 16-bit, with a linear window from
volume min to max unless an explicit window is given; 16-bit samples are
big-endian as the format requires.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import Volume, VoxelGrid
from .projector import ScanGeometry, Sinogram

_AXIS_NAMES = {"x": 0, "y": 1, "z": 2}


def _write_meta(path: Path, entries: dict) -> None:
    lines = [f"{key} = {value}" for key, value in entries.items()]
    path.write_text("\n".join(lines) + "\n")


def _read_meta(path: Path) -> dict:
    entries = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def _meta_path(path) -> Path:
    return Path(str(path) + ".meta")


def write_volume(path, vol: Volume, extra: dict | None = None) -> Path:
    """Write ``vol`` as raw f32le plus a ``.meta`` sidecar; returns the raw path."""
    path = Path(path)
    raw = np.ascontiguousarray(vol.values.transpose(2, 1, 0), dtype="<f4")
    path.write_bytes(raw.tobytes())
    grid = vol.grid
    entries = {
        "format": "volume/raw-f32le/v1",
        "order": "k-outer j-middle i-inner",
        "nx": grid.nx,
        "ny": grid.ny,
        "nz": grid.nz,
        "voxel_spacing": repr(grid.voxel_spacing),
        "center_x": repr(grid.center_x),
        "center_y": repr(grid.center_y),
    }
    entries.update(extra or {})
    _write_meta(_meta_path(path), entries)
    return path


def read_volume(path) -> tuple[Volume, dict]:
    """Read a raw volume and its sidecar; returns (volume, metadata dict)."""
    path = Path(path)
    meta = _read_meta(_meta_path(path))
    if meta.get("format") != "volume/raw-f32le/v1":
        raise ValueError(f"{path}: unsupported format {meta.get('format')!r}")
    grid = VoxelGrid(
        int(meta["nx"]),
        int(meta["ny"]),
        int(meta["nz"]),
        float(meta["voxel_spacing"]),
        float(meta.get("center_x", 0.0)),
        float(meta.get("center_y", 0.0)),
    )
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    if raw.size != grid.num_voxels:
        raise ValueError(
            f"{path}: file holds {raw.size} values, metadata promises {grid.num_voxels}"
        )
    values = raw.reshape(grid.nz, grid.ny, grid.nx).transpose(2, 1, 0)
    return Volume(grid, values), meta


def write_sinogram(path, sino: Sinogram, extra: dict | None = None) -> Path:
    path = Path(path)
    raw = np.ascontiguousarray(sino.values, dtype="<f4")
    path.write_bytes(raw.tobytes())
    geom = sino.geometry
    entries = {
        "format": "sinogram/raw-f32le/v1",
        "order": "view-outer row-middle channel-inner",
        "angles_deg": ", ".join(repr(a) for a in geom.angles_deg),
        "num_channels": geom.num_channels,
        "num_rows": geom.num_rows,
        "detector_spacing": repr(geom.detector_spacing),
    }
    entries.update(extra or {})
    _write_meta(_meta_path(path), entries)
    return path


def read_sinogram(path) -> tuple[Sinogram, dict]:
    path = Path(path)
    meta = _read_meta(_meta_path(path))
    if meta.get("format") != "sinogram/raw-f32le/v1":
        raise ValueError(f"{path}: unsupported format {meta.get('format')!r}")
    geom = ScanGeometry(
        tuple(float(a) for a in meta["angles_deg"].split(",")),
        int(meta["num_channels"]),
        int(meta["num_rows"]),
        float(meta["detector_spacing"]),
    )
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    expected = geom.num_views * geom.num_rows * geom.num_channels
    if raw.size != expected:
        raise ValueError(f"{path}: file holds {raw.size} values, metadata promises {expected}")
    return Sinogram(geom, raw.reshape(geom.shape)), meta


def write_pgm(path, image: np.ndarray, window=None, depth: int = 8) -> Path:
    """Write a 2D array as binary PGM with a linear gray window.

    ``window`` is (lo, hi); values at/below lo map to black, at/above hi to
    the maximum gray level.  Defaults to the image min/max.  A constant
    image maps to black.
    """
    if depth not in (8, 16):
        raise ValueError(f"depth must be 8 or 16, got {depth}")
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"image must be 2D, got shape {image.shape}")
    lo, hi = window if window is not None else (image.min(), image.max())
    if hi < lo:
        raise ValueError(f"window high {hi} below low {lo}")
    maxval = 255 if depth == 8 else 65535
    if hi == lo:
        gray = np.zeros(image.shape, dtype=np.int64)
    else:
        gray = np.rint((image - lo) / (hi - lo) * maxval).astype(np.int64)
        gray = np.clip(gray, 0, maxval)
    dtype = np.uint8 if depth == 8 else ">u2"  # 16-bit PGM is big-endian
    height, width = image.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(gray.astype(dtype).tobytes())
    return path


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a binary PGM written by :func:`write_pgm`; returns (gray, maxval)."""
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1  # single whitespace after maxval
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    gray = np.frombuffer(data, dtype=dtype, offset=pos, count=width * height)
    return gray.reshape(height, width).astype(np.int64), maxval


def slice_image(vol: Volume, axis: str, index: int) -> np.ndarray:
    """Extract one cross-section as a 2D image array.

    Axis "z" gives image[row=j, col=i]; "y" gives image[row=k, col=i];
    "x" gives image[row=k, col=j].  Raises ``IndexError`` when the index
    is out of range.
    """
    if axis not in _AXIS_NAMES:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    ax = _AXIS_NAMES[axis]
    n = vol.grid.shape[ax]
    if not 0 <= index < n:
        raise IndexError(f"slice index {index} out of range for axis {axis} (size {n})")
    if axis == "z":
        return vol.values[:, :, index].T
    if axis == "y":
        return vol.values[:, index, :].T
    return vol.values[index, :, :].T


def export_slices(
    vol: Volume,
    axis: str,
    indices,
    out_dir,
    stem: str = "slice",
    depth: int = 8,
    window=None,
) -> list[Path]:
    """Write one PGM per requested slice; returns the created paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if window is None:
        window = (float(vol.values.min()), float(vol.values.max()))
    paths = []
    for index in indices:
        image = slice_image(vol, axis, index)
        path = out_dir / f"{stem}_{axis}{index:04d}.pgm"
        paths.append(write_pgm(path, image, window=window, depth=depth))
    return paths

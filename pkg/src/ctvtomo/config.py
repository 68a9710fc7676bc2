"""Run configuration: a line-oriented ``key = value`` file with sections.

The format is INI-style (parsed with :mod:`configparser`): one section per
pipeline stage plus one ``[crack:NAME]`` section per crack.  Every key has
a default, so a config file only needs to state what differs from the
desk-scale profile.  ``default_config(paper_scale=True)`` switches the
defaults to the full-size 121x121x100 setup.

Grammar (see README for the full key list)::

    [grid]
    nx = 64
    ny = 64
    nz = 32
    voxel_spacing = 0.097

    [scan]
    angles_deg = 18, 162, 234, 306
    detector_spacing = 0.049
    num_channels = auto

    [crack:example]
    kind = radial
    angle_deg = 18
    width = 0.25
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace
from pathlib import Path

from .geometry import VoxelGrid
from .phantom import CrackSpec
from .regularizer import CtvWeights, TvWeights

METHODS = ("tv", "ctv", "none")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one simulate/reconstruct run needs, in physical units."""

    grid: VoxelGrid
    angles_deg: tuple[float, ...]
    detector_spacing: float
    num_channels: int | None  # None = smallest count covering the grid
    column_radius: float
    cracks: tuple[CrackSpec, ...]
    input_volume: str | None
    relative_sigma: float
    method: str
    tv: TvWeights
    ctv: CtvWeights
    max_iters: int
    extrapolation: float
    nonneg: bool
    norm_iters: int
    stop_tol: float | None
    output_dir: str
    seed: int
    warm_start: str | None

    def validate(self) -> None:
        """Check cross-field consistency and that referenced files exist."""
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if len(self.angles_deg) == 0:
            raise ConfigError("scan needs at least one view angle")
        if not self.detector_spacing > 0:
            raise ConfigError(f"detector_spacing must be > 0, got {self.detector_spacing}")
        if self.relative_sigma < 0:
            raise ConfigError(f"relative_sigma must be >= 0, got {self.relative_sigma}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        for label, path in (("input_volume", self.input_volume), ("warm_start", self.warm_start)):
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{label} file not found: {path}")


# Weight defaults come from the grid search in the acceptance experiment
# (see tests/test_acceptance.py); they are a sane starting point for the
# desk-scale geometry, not universal constants.
_DESK = dict(
    nx=64,
    ny=64,
    nz=32,
    column_radius=2.2,
    ctv=CtvWeights(angular=1.6e-2, radial=5e-4, axial=5e-4),
    tv=TvWeights.shared(1.4e-3),
)
_PAPER = dict(
    nx=121,
    ny=121,
    nz=100,
    column_radius=4.0,
    ctv=CtvWeights(angular=1.6e-2, radial=5e-4, axial=5e-4),
    tv=TvWeights.shared(1.4e-3),
)


def default_cracks(column_radius: float, view_angle_deg: float = 18.0) -> tuple[CrackSpec, ...]:
    """The stock crack set: two radial (one aligned with a view, one
    orthogonal to it), one tilted transverse, one concentric."""
    return (
        CrackSpec(kind="radial", angle_deg=view_angle_deg, width=0.25),
        CrackSpec(kind="radial", angle_deg=view_angle_deg + 90.0, width=0.25),
        CrackSpec(kind="transverse", z_position=0.3, tilt_deg=8.0, tilt_azimuth_deg=45.0, width=0.25),
        CrackSpec(kind="concentric", radius=0.6 * column_radius, width=0.2),
    )


def default_config(paper_scale: bool = False) -> RunConfig:
    """Desk-scale defaults, or the full-size profile with ``paper_scale``."""
    profile = _PAPER if paper_scale else _DESK
    grid = VoxelGrid(profile["nx"], profile["ny"], profile["nz"], 0.097)
    return RunConfig(
        grid=grid,
        angles_deg=(18.0, 162.0, 234.0, 306.0),
        detector_spacing=0.049,
        num_channels=None,
        column_radius=profile["column_radius"],
        cracks=default_cracks(profile["column_radius"]),
        input_volume=None,
        relative_sigma=0.02,
        method="ctv",
        tv=profile["tv"],
        ctv=profile["ctv"],
        max_iters=500,
        extrapolation=1.0,
        nonneg=True,
        norm_iters=50,
        stop_tol=None,
        output_dir="out",
        seed=0,
        warm_start=None,
    )


def _get(parser, section, key, cast, fallback):
    if not parser.has_option(section, key):
        return fallback
    raw = parser.get(section, key).strip()
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _angles(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in raw.split(",") if part.strip())


def _optional_int(raw: str):
    return None if raw.lower() in ("auto", "none") else int(raw)


def _optional_float(raw: str):
    return None if raw.lower() in ("none", "off") else float(raw)


def _optional_path(raw: str):
    return None if raw.lower() in ("none", "") else raw


def _bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


_CRACK_FLOAT_KEYS = (
    "width",
    "contrast",
    "angle_deg",
    "z_position",
    "tilt_deg",
    "tilt_azimuth_deg",
    "radius",
)


def _parse_crack(parser, section) -> CrackSpec:
    if not parser.has_option(section, "kind"):
        raise ConfigError(f"[{section}] is missing 'kind'")
    kwargs = {"kind": parser.get(section, "kind").strip()}
    for key in _CRACK_FLOAT_KEYS:
        if parser.has_option(section, key):
            kwargs[key] = _get(parser, section, key, float, None)
    try:
        return CrackSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse config text on top of ``base`` (defaults to the desk profile)."""
    cfg = base if base is not None else default_config()
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    known = {"grid", "scan", "phantom", "noise", "reconstruct", "run"}
    for section in parser.sections():
        if section not in known and not section.startswith("crack:"):
            raise ConfigError(f"unknown config section [{section}]")

    if parser.has_section("grid"):
        try:
            grid = VoxelGrid(
                _get(parser, "grid", "nx", int, cfg.grid.nx),
                _get(parser, "grid", "ny", int, cfg.grid.ny),
                _get(parser, "grid", "nz", int, cfg.grid.nz),
                _get(parser, "grid", "voxel_spacing", float, cfg.grid.voxel_spacing),
                _get(parser, "grid", "center_x", float, cfg.grid.center_x),
                _get(parser, "grid", "center_y", float, cfg.grid.center_y),
            )
        except ValueError as exc:
            raise ConfigError(f"[grid]: {exc}") from exc
        cfg = replace(cfg, grid=grid)

    cfg = replace(
        cfg,
        angles_deg=_get(parser, "scan", "angles_deg", _angles, cfg.angles_deg),
        detector_spacing=_get(parser, "scan", "detector_spacing", float, cfg.detector_spacing),
        num_channels=_get(parser, "scan", "num_channels", _optional_int, cfg.num_channels),
        column_radius=_get(parser, "phantom", "column_radius", float, cfg.column_radius),
        input_volume=_get(parser, "phantom", "input_volume", _optional_path, cfg.input_volume),
        relative_sigma=_get(parser, "noise", "relative_sigma", float, cfg.relative_sigma),
        method=_get(parser, "reconstruct", "method", str, cfg.method),
        max_iters=_get(parser, "reconstruct", "max_iters", int, cfg.max_iters),
        extrapolation=_get(parser, "reconstruct", "extrapolation", float, cfg.extrapolation),
        nonneg=_get(parser, "reconstruct", "nonneg", _bool, cfg.nonneg),
        norm_iters=_get(parser, "reconstruct", "norm_iters", int, cfg.norm_iters),
        stop_tol=_get(parser, "reconstruct", "stop_tol", _optional_float, cfg.stop_tol),
        warm_start=_get(parser, "reconstruct", "warm_start", _optional_path, cfg.warm_start),
        output_dir=_get(parser, "run", "output_dir", str, cfg.output_dir),
        seed=_get(parser, "run", "seed", int, cfg.seed),
    )

    try:
        tv = TvWeights(
            _get(parser, "reconstruct", "lambda_x", float, cfg.tv.x),
            _get(parser, "reconstruct", "lambda_y", float, cfg.tv.y),
            _get(parser, "reconstruct", "lambda_z", float, cfg.tv.z),
        )
        if parser.has_option("reconstruct", "lambda"):
            tv = TvWeights.shared(_get(parser, "reconstruct", "lambda", float, None))
        ctv = CtvWeights(
            _get(parser, "reconstruct", "lambda_angular", float, cfg.ctv.angular),
            _get(parser, "reconstruct", "lambda_radial", float, cfg.ctv.radial),
            _get(parser, "reconstruct", "lambda_axial", float, cfg.ctv.axial),
        )
    except ValueError as exc:
        raise ConfigError(f"[reconstruct]: {exc}") from exc
    cfg = replace(cfg, tv=tv, ctv=ctv)

    crack_sections = [s for s in parser.sections() if s.startswith("crack:")]
    if crack_sections or parser.has_option("phantom", "cracks"):
        if parser.has_option("phantom", "cracks") and parser.get("phantom", "cracks").strip().lower() == "none":
            cracks: tuple[CrackSpec, ...] = ()
        else:
            cracks = tuple(_parse_crack(parser, s) for s in crack_sections)
        cfg = replace(cfg, cracks=cracks)

    return cfg


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), base=base)


def serialize_config(cfg: RunConfig) -> str:
    """Render a config as text; ``parse_config(serialize_config(c)) == c``."""
    out = io.StringIO()

    def section(name, pairs):
        out.write(f"[{name}]\n")
        for key, value in pairs:
            out.write(f"{key} = {value}\n")
        out.write("\n")

    section(
        "grid",
        [
            ("nx", cfg.grid.nx),
            ("ny", cfg.grid.ny),
            ("nz", cfg.grid.nz),
            ("voxel_spacing", repr(cfg.grid.voxel_spacing)),
            ("center_x", repr(cfg.grid.center_x)),
            ("center_y", repr(cfg.grid.center_y)),
        ],
    )
    section(
        "scan",
        [
            ("angles_deg", ", ".join(repr(a) for a in cfg.angles_deg)),
            ("detector_spacing", repr(cfg.detector_spacing)),
            ("num_channels", "auto" if cfg.num_channels is None else cfg.num_channels),
        ],
    )
    phantom_pairs = [("column_radius", repr(cfg.column_radius))]
    if cfg.input_volume is not None:
        phantom_pairs.append(("input_volume", cfg.input_volume))
    if not cfg.cracks:
        phantom_pairs.append(("cracks", "none"))
    section("phantom", phantom_pairs)
    for idx, crack in enumerate(cfg.cracks):
        section(
            f"crack:{idx}",
            [("kind", crack.kind)]
            + [(key, repr(getattr(crack, key))) for key in _CRACK_FLOAT_KEYS],
        )
    section("noise", [("relative_sigma", repr(cfg.relative_sigma))])
    reconstruct_pairs = [
        ("method", cfg.method),
        ("lambda_x", repr(cfg.tv.x)),
        ("lambda_y", repr(cfg.tv.y)),
        ("lambda_z", repr(cfg.tv.z)),
        ("lambda_angular", repr(cfg.ctv.angular)),
        ("lambda_radial", repr(cfg.ctv.radial)),
        ("lambda_axial", repr(cfg.ctv.axial)),
        ("max_iters", cfg.max_iters),
        ("extrapolation", repr(cfg.extrapolation)),
        ("nonneg", "true" if cfg.nonneg else "false"),
        ("norm_iters", cfg.norm_iters),
        ("stop_tol", "none" if cfg.stop_tol is None else repr(cfg.stop_tol)),
    ]
    if cfg.warm_start is not None:
        reconstruct_pairs.append(("warm_start", cfg.warm_start))
    section("reconstruct", reconstruct_pairs)
    section("run", [("output_dir", cfg.output_dir), ("seed", cfg.seed)])
    return out.getvalue()


def save_config(path, cfg: RunConfig) -> None:
    Path(path).write_text(serialize_config(cfg))

"""Flat key-value run configuration with typed sections.

Document format: one ``section.key = value`` per line, ``#`` comments,
blank lines ignored.  Unknown keys are a hard error, every key has a
default, and parse(serialize(config)) is the identity.  Keys that carry a
physical dimension embed the unit in their name (``_us``, ``_um``,
``_rad_per_us``) so documents stay unambiguous.
"""

from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import dataclass, field, replace
from pathlib import Path

from .dynamics import Grid1D, SignalEnvelope
from .errors import ConfigError
from .gpe import GpeParams
from .medium import MediumKind, MediumParams
from .schedule import ControlSchedule
from .units import rad_per_us_from_hz

EXPERIMENTS = ("groupvel", "propagate", "store", "imbalance", "mediums",
               "gpe-soliton", "gpe-split", "feasibility")
PRESETS = ("none", "desk-storage")


@dataclass(frozen=True)
class MediumConfig:
    g_tilde_rad_per_us: float = 5e-5
    length_um: float = 1000.0
    c_um_per_us: float = 2.998e8
    n_a: float = 1.5e6
    n_b: float = 1.5e6
    gamma_a_rad_per_us: float = 0.0
    gamma_b_rad_per_us: float = 0.0
    gamma_e_rad_per_us: float = rad_per_us_from_hz(5.7e6)
    gamma_g_rad_per_us: float = rad_per_us_from_hz(97.0)
    one_photon_detuning_rad_per_us: float = 0.0
    two_photon_detuning_rad_per_us: float = 0.0


@dataclass(frozen=True)
class ScheduleConfig:
    form: str = "tanh"
    omega0_rad_per_us: float = 10.0 * math.pi
    t_down_us: float = 15.0
    t_up_us: float = 125.0
    rate_per_us: float = 0.15
    table_times_us: tuple = ()
    table_values_rad_per_us: tuple = ()


@dataclass(frozen=True)
class CurveConfig:
    t_end_us: float = 140.0
    points: int = 281


@dataclass(frozen=True)
class GridConfig:
    z_min_um: float = 0.0
    z_max_um: float = 200.0
    n_z: int = 1024
    dt_us: float = 0.0        # 0 selects dt = cfl * dz / c
    cfl: float = 1.0
    t_end_us: float = 140.0
    snapshot_stride: int = 20


@dataclass(frozen=True)
class PulseConfig:
    center_um: float = 40.0
    rms_width_um: float = 8.0
    peak_amplitude: float = 1.0


@dataclass(frozen=True)
class GpeConfig:
    mass_a_us_per_um2: float = 0.5
    mass_b_us_per_um2: float = 0.5
    u_gg_rad_um_per_us: float = 1.0
    u_ab_rad_um_per_us: float = 0.0
    potential_rad_per_us: float = 0.0
    n_a_per_um: float = 0.0
    n_b_per_um: float = 0.0
    background_amp: float = 1.0
    background_decay_per_us: float = 0.0
    nonlinearity: str = "self-consistent"


@dataclass(frozen=True)
class GpeGridConfig:
    z_min_um: float = -50.0
    z_max_um: float = 50.0
    n_z: int = 2048
    dt_us: float = 0.005
    t_end_us: float = 10.0
    snapshot_stride: int = 20


@dataclass(frozen=True)
class SolitonConfig:
    q: float = 0.8
    z0_um: float = 0.0
    direction: int = 1
    seed_separation_widths: float = 3.0


@dataclass(frozen=True)
class SweepConfig:
    n_total: float = 3.0e6
    etas: tuple = (1.0, 2.0, 15.0)
    kinds: tuple = ("atomic-eit", "homonuclear-dimer",
                    "heteronuclear-dimer", "heteronuclear-trimer")
    n_scan_min: float = 1.0e5
    n_scan_max: float = 1.0e7
    n_scan_points: int = 25


@dataclass(frozen=True)
class FeasibilityConfig:
    t_s_us: float = 1.0
    t_storage_us: float = 110.0
    threshold: float = 0.1


@dataclass(frozen=True)
class RunSection:
    force: bool = False
    substeps: int = 0         # 0 selects the automatic subcycle count
    advection: str = "upwind"
    gnuplot: bool = False


_SECTION_TYPES: dict[str, type] = {
    "medium": MediumConfig,
    "schedule": ScheduleConfig,
    "curve": CurveConfig,
    "grid": GridConfig,
    "pulse": PulseConfig,
    "gpe": GpeConfig,
    "gpegrid": GpeGridConfig,
    "soliton": SolitonConfig,
    "sweep": SweepConfig,
    "feasibility": FeasibilityConfig,
    "run": RunSection,
}

# keys the desk-storage preset rewrites before explicit keys apply
_DESK_STORAGE_PRESET = {
    "medium.g_tilde_rad_per_us": 3.0e-3,
    "medium.length_um": 200.0,
    "medium.c_um_per_us": 2.0,
    "medium.n_a": 1000.0,
    "medium.n_b": 1000.0,
    "medium.gamma_a_rad_per_us": 0.0,
    "medium.gamma_b_rad_per_us": 0.0,
    "medium.gamma_e_rad_per_us": 0.0,
    "medium.gamma_g_rad_per_us": 0.0,
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "groupvel"
    preset: str = "none"
    medium: MediumConfig = field(default_factory=MediumConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    curve: CurveConfig = field(default_factory=CurveConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    gpe: GpeConfig = field(default_factory=GpeConfig)
    gpegrid: GpeGridConfig = field(default_factory=GpeGridConfig)
    soliton: SolitonConfig = field(default_factory=SolitonConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    feasibility: FeasibilityConfig = field(default_factory=FeasibilityConfig)
    run: RunSection = field(default_factory=RunSection)

    # ---- domain-object builders -------------------------------------

    def to_medium_params(self) -> MediumParams:
        m = self.medium
        try:
            return MediumParams(
                g_tilde=m.g_tilde_rad_per_us,
                L=m.length_um,
                c=m.c_um_per_us,
                N_a=m.n_a,
                N_b=m.n_b,
                gamma_a=m.gamma_a_rad_per_us,
                gamma_b=m.gamma_b_rad_per_us,
                gamma_e=m.gamma_e_rad_per_us,
                gamma_g=m.gamma_g_rad_per_us,
                Delta=m.one_photon_detuning_rad_per_us,
                delta=m.two_photon_detuning_rad_per_us,
            )
        except ValueError as exc:
            raise ConfigError(f"medium: {exc}") from exc

    def to_schedule(self) -> ControlSchedule:
        s = self.schedule
        try:
            if s.form == "tanh":
                return ControlSchedule.tanh_ramp(
                    omega0=s.omega0_rad_per_us, t_down=s.t_down_us,
                    t_up=s.t_up_us, rate=s.rate_per_us)
            if s.form == "table":
                if not s.table_times_us:
                    raise ValueError("table form requires schedule.table_times_us")
                return ControlSchedule.tabulated(s.table_times_us,
                                                 s.table_values_rad_per_us)
        except ValueError as exc:
            raise ConfigError(f"schedule: {exc}") from exc
        raise ConfigError(f"schedule.form: unknown form {s.form!r}")

    def to_grid(self) -> Grid1D:
        g = self.grid
        c = self.medium.c_um_per_us
        try:
            if g.dt_us > 0:
                return Grid1D(z_min=g.z_min_um, z_max=g.z_max_um, n_z=g.n_z,
                              dt=g.dt_us, t_end=g.t_end_us)
            return Grid1D.for_speed(z_min=g.z_min_um, z_max=g.z_max_um,
                                    n_z=g.n_z, c=c, t_end=g.t_end_us, cfl=g.cfl)
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc

    def to_pulse(self, grid: Grid1D) -> SignalEnvelope:
        p = self.pulse
        try:
            return SignalEnvelope.gaussian(grid, center=p.center_um,
                                           rms_width=p.rms_width_um,
                                           amplitude=p.peak_amplitude)
        except ValueError as exc:
            raise ConfigError(f"pulse: {exc}") from exc

    def to_gpe_params(self) -> GpeParams:
        g = self.gpe
        try:
            return GpeParams(
                m_a=g.mass_a_us_per_um2, m_b=g.mass_b_us_per_um2,
                u_gg=g.u_gg_rad_um_per_us, u_ab=g.u_ab_rad_um_per_us,
                v_ext=g.potential_rad_per_us,
                n_a=g.n_a_per_um, n_b=g.n_b_per_um,
                background_amp=g.background_amp,
            )
        except ValueError as exc:
            raise ConfigError(f"gpe: {exc}") from exc

    def to_gpe_grid(self) -> Grid1D:
        g = self.gpegrid
        try:
            return Grid1D(z_min=g.z_min_um, z_max=g.z_max_um, n_z=g.n_z,
                          dt=g.dt_us, t_end=g.t_end_us)
        except ValueError as exc:
            raise ConfigError(f"gpegrid: {exc}") from exc

    def to_soliton_spec_kwargs(self) -> dict:
        s = self.soliton
        if not 0.0 < s.q <= 1.0:
            raise ConfigError("soliton.q: must lie in (0, 1]")
        if s.direction not in (-1, 1):
            raise ConfigError("soliton.direction: must be +1 or -1")
        return {"q": s.q, "z0": s.z0_um, "direction": s.direction}

    def sweep_kinds(self) -> list[MediumKind]:
        out = []
        for name in self.sweep.kinds:
            try:
                out.append(MediumKind(name))
            except ValueError as exc:
                raise ConfigError(f"sweep.kinds: unknown medium kind {name!r}") from exc
        return out

    def validate(self) -> "RunConfig":
        """Check every physical invariant reachable from the document."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"experiment: {self.experiment!r} is not one of {', '.join(EXPERIMENTS)}")
        if self.preset not in PRESETS:
            raise ConfigError(f"preset: {self.preset!r} is not one of {', '.join(PRESETS)}")
        self.to_medium_params()
        self.to_schedule()
        self.to_grid()
        self.to_gpe_params()
        self.to_gpe_grid()
        self.to_soliton_spec_kwargs()
        self.sweep_kinds()
        if self.curve.points < 2:
            raise ConfigError("curve.points: need at least two samples")
        if self.curve.t_end_us <= 0:
            raise ConfigError("curve.t_end_us: must be positive")
        if self.sweep.n_total <= 0:
            raise ConfigError("sweep.n_total: must be positive")
        for eta in self.sweep.etas:
            if not isinstance(eta, (int, float)):
                raise ConfigError("sweep.etas: expected a comma-separated list of numbers")
            if eta <= 0:
                raise ConfigError(
                    "sweep.etas: all imbalance ratios must be positive")
        for name, values in (("schedule.table_times_us", self.schedule.table_times_us),
                             ("schedule.table_values_rad_per_us",
                              self.schedule.table_values_rad_per_us)):
            for v in values:
                if not isinstance(v, (int, float)):
                    raise ConfigError(f"{name}: expected a comma-separated list of numbers")
        if not 0 < self.sweep.n_scan_min < self.sweep.n_scan_max:
            raise ConfigError("sweep.n_scan_min/max: need 0 < min < max")
        if self.sweep.n_scan_points < 2:
            raise ConfigError("sweep.n_scan_points: need at least two")
        if self.feasibility.t_s_us <= 0:
            raise ConfigError("feasibility.t_s_us: must be positive")
        if self.feasibility.t_storage_us < 0:
            raise ConfigError("feasibility.t_storage_us: must be nonnegative")
        if self.feasibility.threshold <= 0:
            raise ConfigError("feasibility.threshold: must be positive")
        if self.gpe.nonlinearity not in ("self-consistent", "frozen"):
            raise ConfigError("gpe.nonlinearity: must be self-consistent or frozen")
        if self.gpe.background_decay_per_us < 0:
            raise ConfigError("gpe.background_decay_per_us: must be nonnegative")
        if self.soliton.seed_separation_widths < 0:
            raise ConfigError("soliton.seed_separation_widths: must be nonnegative")
        if self.run.substeps < 0:
            raise ConfigError("run.substeps: must be nonnegative (0 = automatic)")
        if self.run.advection not in ("upwind", "muscl"):
            raise ConfigError("run.advection: must be upwind or muscl")
        if self.grid.snapshot_stride < 1 or self.gpegrid.snapshot_stride < 1:
            raise ConfigError("snapshot_stride: must be at least 1")
        return self


def _field_types(section_cls: type) -> dict[str, type]:
    hints = typing.get_type_hints(section_cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(section_cls)}


def _parse_value(key: str, text: str, pytype: type):
    text = text.strip()
    try:
        if pytype is float:
            return float(text)
        if pytype is int:
            return int(text)
        if pytype is bool:
            if text.lower() in ("true", "false"):
                return text.lower() == "true"
            raise ValueError("expected true or false")
        if pytype is str:
            return text
        if pytype is tuple:
            if not text:
                return ()
            items = [tok.strip() for tok in text.split(",")]
            try:
                return tuple(float(tok) for tok in items)
            except ValueError:
                return tuple(items)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r} as {pytype.__name__}") from exc
    raise ConfigError(f"{key}: unsupported value type {pytype!r}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _apply_pairs(config: RunConfig, pairs: list[tuple[str, str]]) -> RunConfig:
    # the preset rewires defaults, so resolve it before any other key
    for key, raw in pairs:
        if key == "preset":
            preset = raw.strip()
            if preset not in PRESETS:
                raise ConfigError(f"preset: {preset!r} is not one of {', '.join(PRESETS)}")
            config = replace(config, preset=preset)
            if preset == "desk-storage":
                config = _apply_pairs(
                    config, [(k, _format_value(v)) for k, v in _DESK_STORAGE_PRESET.items()])
    for key, raw in pairs:
        if key == "preset":
            continue
        if key == "experiment":
            config = replace(config, experiment=raw.strip())
            continue
        if "." not in key:
            raise ConfigError(f"unknown key {key!r}")
        section_name, field_name = key.split(".", 1)
        section_cls = _SECTION_TYPES.get(section_name)
        if section_cls is None:
            raise ConfigError(f"unknown key {key!r}")
        types = _field_types(section_cls)
        if field_name not in types:
            raise ConfigError(f"unknown key {key!r}")
        value = _parse_value(key, raw, types[field_name])
        section = replace(getattr(config, section_name), **{field_name: value})
        config = replace(config, **{section_name: section})
    return config


def parse_pairs(pairs: list[tuple[str, str]], base: RunConfig | None = None) -> RunConfig:
    config = RunConfig() if base is None else base
    return _apply_pairs(config, pairs).validate()


def parse_config(text: str) -> RunConfig:
    """Parse a key-value document into a fully validated RunConfig."""
    pairs: list[tuple[str, str]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        pairs.append((key, raw))
    return parse_pairs(pairs)


def serialize_config(config: RunConfig) -> str:
    """Canonical full-document form; parse(serialize(c)) == c."""
    lines = [f"experiment = {config.experiment}", f"preset = {config.preset}"]
    for section_name, section_cls in _SECTION_TYPES.items():
        section = getattr(config, section_name)
        for f in dataclasses.fields(section_cls):
            lines.append(f"{section_name}.{f.name} = "
                         f"{_format_value(getattr(section, f.name))}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path | None,
                overrides: list[str] | None = None) -> RunConfig:
    """Config from an optional file plus repeatable key=value overrides."""
    pairs: list[tuple[str, str]] = []
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        config = parse_config(text)
    else:
        config = RunConfig()
    if overrides:
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            key, _, raw = item.partition("=")
            pairs.append((key.strip(), raw))
    return parse_pairs(pairs, base=config)

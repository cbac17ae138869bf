"""INI-style run configuration, bundled presets and model construction.

Sections are ``tia``, ``interface``, ``receiver``, ``channel``, ``detector``,
``protocol`` and ``sweep``. Keys outside a section must be dotted
(``detector.responsivity = 1.0``). Lists are comma separated; the sweep
``lengths`` key also accepts ``start:stop:count``. ``none`` (or ``auto``)
clears an optional value.
"""

from __future__ import annotations

import configparser
import os
import re
import types
import typing
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValidationError
from .keyrate import ChannelParams, DetectorParams, ProtocolParams, QkdScenario
from .noise import InterfaceModel, TiaNoiseDesign, TransistorParams
from .receiver import ReceiverSpec, clearance_db, xi_det_snu
from .sweep import TiaPreset

PRESET_ENV = "QKDRX_PRESET_DIR"
TIA_PRESETS = ("mono-1G5", "mono-5G", "mono-10G", "hetero-1G5", "hetero-5G", "hetero-10G")
SCENARIO_PRESETS = ("baseline", "optimized")

_TOP = "__top__"


@dataclass(frozen=True)
class TiaSection:
    # defaults reproduce the calibrated mono-1G5 preset
    label: str = "mono-1G5"
    bandwidth: float = 1.48e9
    r_f: float = 27826.013505369683
    beta_dc: float = 250.0
    f_t: float = 210e9
    r_b: float = 374.0513668296152
    c_tr: float = 3.2081155328236355e-15
    i_c: float = 2.9010446551157978e-05
    temperature: float = 300.0
    cd_photodiode_only: bool = False
    ref_mean_rsd: float | None = 0.89e-12
    ref_rms: float | None = 31.9e-9


@dataclass(frozen=True)
class InterfaceSection:
    kind: str = "monolithic"
    c_pd: float = 10e-15
    c_pad: float = 100e-15
    n_pads: int = 0


@dataclass(frozen=True)
class ReceiverSection:
    lo_power: float = 10e-3
    wavelength: float = 1550e-9
    electronic_psd: float = 0.89e-12**2
    bandwidth: float = 1.48e9
    cmrr_db: float = 40.0


@dataclass(frozen=True)
class ChannelSection:
    length_km: float = 10.0
    attenuation_db_per_km: float = 0.23
    extra_loss_db: float = 0.0
    xi_rx_snu: float = 0.03


@dataclass(frozen=True)
class DetectorSection:
    coupling_loss_db: float = 3.0
    responsivity: float = 0.7
    # none: derive from the receiver clearance
    xi_det_snu: float | None = None


@dataclass(frozen=True)
class ProtocolSection:
    v_mod: float = 6.0
    beta_rec: float = 0.96
    symbol_rate: float = 250e6


@dataclass(frozen=True)
class SweepSection:
    lengths: tuple[float, ...] = tuple(np.linspace(0.0, 60.0, 301).tolist())
    xi_values: tuple[float, ...] = (0.01, 0.02, 0.03, 0.04)
    rsd_values: tuple[float, ...] = (0.89e-12, 1.85e-12, 3.2e-12, 3.5e-12, 7.05e-12, 19.68e-12)
    responsivities: tuple[float, ...] = (0.7, 1.0)
    presets: tuple[str, ...] = TIA_PRESETS
    workers: int = 1
    max_points: int = 10**6
    refine_cutoff: bool = False


SECTIONS = {
    "tia": TiaSection,
    "interface": InterfaceSection,
    "receiver": ReceiverSection,
    "channel": ChannelSection,
    "detector": DetectorSection,
    "protocol": ProtocolSection,
    "sweep": SweepSection,
}


@dataclass(frozen=True)
class RunConfig:
    tia: TiaSection = field(default_factory=TiaSection)
    interface: InterfaceSection = field(default_factory=InterfaceSection)
    receiver: ReceiverSection = field(default_factory=ReceiverSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    protocol: ProtocolSection = field(default_factory=ProtocolSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    preset: str | None = field(default=None, compare=False)
    out: str | None = field(default=None, compare=False)
    format: str = field(default="csv", compare=False)
    given: frozenset = field(default=frozenset(), compare=False)

    # -- model construction ------------------------------------------------

    def design(self) -> TiaNoiseDesign:
        t, i = self.tia, self.interface
        with _naming({"kind": "interface.kind", "c_pd": "interface.c_pd",
                      "c_pad": "interface.c_pad", "n_pads": "interface.n_pads"}, "tia"):
            transistor = TransistorParams(t.beta_dc, t.f_t, t.r_b, t.c_tr, t.i_c)
            try:
                interface = InterfaceModel(i.kind, i.c_pd, i.c_pad, i.n_pads)
            except ValueError as exc:
                if isinstance(exc, ValidationError):
                    raise
                raise ValidationError("kind", f"unknown integration kind {i.kind!r}") from exc
            return TiaNoiseDesign(t.r_f, transistor, interface, t.temperature, t.bandwidth,
                                  t.label, t.cd_photodiode_only)

    def tia_preset(self) -> TiaPreset:
        return TiaPreset(self.design(), self.tia.ref_mean_rsd, self.tia.ref_rms)

    def receiver_spec(self, responsivity: float | None = None) -> ReceiverSpec:
        r, d = self.receiver, self.detector
        mapping = {"responsivity": "detector.responsivity",
                   "lo_path_loss_db": "detector.coupling_loss_db"}
        with _naming(mapping, "receiver"):
            return ReceiverSpec(
                responsivity=d.responsivity if responsivity is None else responsivity,
                lo_power=r.lo_power,
                lo_path_loss_db=d.coupling_loss_db,
                wavelength=r.wavelength,
                electronic_psd=r.electronic_psd,
                bandwidth=r.bandwidth,
            )

    def detector_params(self) -> DetectorParams:
        d = self.detector
        xi_det = d.xi_det_snu
        if xi_det is None:
            cl = clearance_db(self.receiver_spec())
            if cl is None:
                raise ConfigError("detector.xi_det_snu: cannot derive detection noise "
                                  "without LO power (receiver.lo_power = 0)")
            xi_det = xi_det_snu(cl)
        with _naming({}, "detector"):
            return DetectorParams(d.coupling_loss_db, d.responsivity, xi_det)

    def channel_params(self) -> ChannelParams:
        c = self.channel
        with _naming({}, "channel"):
            return ChannelParams(c.length_km, c.attenuation_db_per_km, c.extra_loss_db)

    def protocol_params(self) -> ProtocolParams:
        p = self.protocol
        with _naming({}, "protocol"):
            return ProtocolParams(p.v_mod, p.beta_rec, p.symbol_rate)

    def scenario(self) -> QkdScenario:
        with _naming({"xi_rx": "channel.xi_rx_snu"}, "channel"):
            return QkdScenario(self.channel_params(), self.detector_params(),
                               self.protocol_params(), self.channel.xi_rx_snu)

    def validate(self) -> "RunConfig":
        """Build every model object once; raises ConfigError naming section.key."""
        self.design()
        self.receiver_spec()
        self.scenario()
        s = self.sweep
        with _naming({}, "sweep"):
            if s.workers < 1:
                raise ValidationError("workers", "must be >= 1")
            if s.max_points < 1:
                raise ValidationError("max_points", "must be >= 1")
            for name in ("lengths", "xi_values", "rsd_values", "responsivities", "presets"):
                if not getattr(s, name):
                    raise ValidationError(name, "must not be empty")
            if any(v < 0 for v in s.lengths) or any(v < 0 for v in s.xi_values):
                raise ValidationError("lengths", "lengths and xi values must be >= 0")
            if any(v <= 0 for v in s.rsd_values):
                raise ValidationError("rsd_values", "must be > 0")
            unknown = [p for p in s.presets if p not in TIA_PRESETS]
            if unknown:
                raise ValidationError("presets", f"unknown TIA presets {unknown}")
        if self.format not in ("csv", "md"):
            raise ConfigError(f"unknown output format {self.format!r}")
        return self

    def provenance(self) -> dict:
        # worker count never changes results, so it stays out of the header
        config = to_dict(self)
        del config["sweep"]["workers"]
        return {"preset": self.preset, "config": config}


class _naming:
    """Re-raise ValidationError as ConfigError with a ``section.key`` name."""

    def __init__(self, mapping: dict, section: str):
        self.mapping = mapping
        self.section = section

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None and issubclass(exc_type, ValidationError):
            name = self.mapping.get(exc.field, f"{self.section}.{exc.field}")
            msg = str(exc).split(": ", 1)[-1]
            raise ConfigError(f"{name}: {msg}") from exc
        return False


# -- text conversion -------------------------------------------------------

_NONE = ("none", "auto")


def _convert(text: str, tp, where: str):
    text = text.strip()
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if text.lower() in _NONE:
            return None
        return _convert(text, args[0], where)
    if origin is tuple:
        (inner, _) = typing.get_args(tp)
        if inner is float and re.fullmatch(r"[^,]+:[^,]+:[^,]+", text):
            start, stop, count = text.split(":")
            n = _convert(count, int, where)
            if n < 1:
                raise ConfigError(f"{where}: linspace count must be >= 1")
            return tuple(np.linspace(_convert(start, float, where), _convert(stop, float, where), n).tolist())
        items = [s for s in (p.strip() for p in text.split(",")) if s]
        return tuple(_convert(s, inner, where) for s in items)
    try:
        if tp is bool:
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(text)
        if tp is int:
            return int(text)
        if tp is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {text!r} as {tp.__name__}") from None
    return text


def _render_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if len(value) > 2 and all(isinstance(v, float) for v in value):
            grid = tuple(np.linspace(value[0], value[-1], len(value)).tolist())
            if grid == value:
                return f"{value[0]!r}:{value[-1]!r}:{len(value)}"
        return ", ".join(_render_value(v) for v in value)
    return str(value)


def to_dict(config: RunConfig, sections=None) -> dict:
    out = {}
    for name in sections or SECTIONS:
        sec = getattr(config, name)
        out[name] = {f.name: _render_value(getattr(sec, f.name)) for f in fields(sec)}
    return out


def render(config: RunConfig, sections=None) -> str:
    """INI text that parses back to an equal RunConfig."""
    chunks = []
    for name, values in to_dict(config, sections).items():
        chunks.append(f"[{name}]")
        chunks += [f"{k} = {v}" for k, v in values.items()]
        chunks.append("")
    return "\n".join(chunks)


def _read_ini(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#", ";"),
                                       empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(f"[{_TOP}]\n" + text)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"syntax error: {line.strip()!r}", line=lineno - 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]",
                          line=exc.lineno - 1 if exc.lineno else None) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]",
                          line=exc.lineno - 1 if exc.lineno else None) from None
    except configparser.Error as exc:
        raise ConfigError(f"syntax error: {exc}") from None
    return parser


def parse_config(text: str, base: RunConfig | None = None, validate: bool = True) -> RunConfig:
    """Parse INI text on top of ``base`` (defaults when omitted)."""
    config = base or RunConfig()
    parser = _read_ini(text)
    updates: dict[str, dict[str, str]] = {}
    for key, value in parser.items(_TOP, raw=True) if parser.has_section(_TOP) else []:
        if "." not in key:
            raise ConfigError(f"top-level key {key!r} must be written as section.key")
        sec, sub = key.split(".", 1)
        updates.setdefault(sec, {})[sub] = value
    for sec in parser.sections():
        if sec == _TOP:
            continue
        for key, value in parser.items(sec, raw=True):
            updates.setdefault(sec, {})[key] = value

    given = set(config.given)
    for sec, values in updates.items():
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        cls = SECTIONS[sec]
        hints = typing.get_type_hints(cls)
        changes = {}
        for key, raw in values.items():
            if key not in hints:
                raise ConfigError(f"unknown key {sec}.{key}")
            changes[key] = _convert(raw, hints[key], f"{sec}.{key}")
        config = replace(config, **{sec: replace(getattr(config, sec), **changes)})
        given.add(sec)
    config = replace(config, given=frozenset(given))
    return config.validate() if validate else config


# -- presets ---------------------------------------------------------------

def preset_dir() -> Path | None:
    env = os.environ.get(PRESET_ENV)
    return Path(env) if env else None


def preset_text(name: str) -> str:
    if not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        raise ConfigError(f"invalid preset name {name!r}")
    override = preset_dir()
    if override is not None:
        path = override / f"{name}.ini"
        if path.is_file():
            return path.read_text()
    res = resources.files("qkdrx.data").joinpath("presets", f"{name}.ini")
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}")
    return res.read_text()


def available_presets() -> list[str]:
    names = {p.name[:-4] for p in resources.files("qkdrx.data").joinpath("presets").iterdir()
             if p.name.endswith(".ini")}
    override = preset_dir()
    if override is not None and override.is_dir():
        names |= {p.stem for p in override.glob("*.ini")}
    return sorted(names)


def load_preset(name: str, base: RunConfig | None = None) -> RunConfig:
    try:
        config = parse_config(preset_text(name), base)
    except ConfigError as exc:
        raise ConfigError(f"preset {name}: {exc}") from exc
    return replace(config, preset=name)


def tia_presets(names=TIA_PRESETS) -> list[TiaPreset]:
    return [load_preset(n).tia_preset() for n in names]

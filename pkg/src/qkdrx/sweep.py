"""Deterministic parameter sweeps with a fixed tabular output contract.

Rows are emitted in axis declaration order with the last axis varying
fastest. Floats are written with 9 significant digits, so a rerun with the
same inputs gives byte-identical output whatever the worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .keyrate import ChannelParams, DetectorParams, ProtocolParams, QkdScenario, secure_key_rate
from .noise import IntegrationKind, TiaNoiseDesign, integrate_rms, mean_rsd
from .receiver import ReceiverSpec, clearance_db, xi_det_snu

MAX_POINTS = 10**6
CUTOFF_XTOL_KM = 1e-3

SKR_COLUMNS = (
    "length_km", "xi_rx_snu", "t_channel", "t_total", "xi_in_snu",
    "i_ab_bits", "chi_be_bits", "key_fraction_bits", "skr_bits_per_s",
)


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


@dataclass
class Axis:
    name: str
    unit: str
    values: tuple[float, ...]

    def __post_init__(self):
        self.values = tuple(float(v) for v in self.values)
        if not self.values:
            raise ValueError(f"axis {self.name!r} is empty")
        d = np.diff(self.values)
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError(f"axis {self.name!r} values must be strictly monotone")

    @classmethod
    def linspace(cls, name: str, unit: str, start: float, stop: float, count: int) -> "Axis":
        return cls(name, unit, tuple(np.linspace(start, stop, count)))


def check_size(axes: Sequence[Axis], max_points: int = MAX_POINTS) -> int:
    n = math.prod(len(a.values) for a in axes)
    if n > max_points:
        raise ValueError(f"grid has {n} points, cap is {max_points}")
    return n


@dataclass
class SweepResult:
    schema: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    cutoffs: dict = field(default_factory=dict)
    version: int = 1

    def header_line(self) -> str:
        prov = json.dumps(self.provenance, sort_keys=True, separators=(",", ":"))
        return (f"schema={self.schema} version={self.version} "
                f"artifact_version={__version__} provenance={prov}")

    def to_csv(self) -> str:
        lines = [f"# {self.header_line()}", ",".join(self.columns)]
        lines += [",".join(fmt(v) for v in row) for row in self.rows]
        lines += [f"# {note}" for note in self.notes]
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        lines = [f"<!-- {self.header_line()} -->", "",
                 "| " + " | ".join(self.columns) + " |",
                 "|" + "---|" * len(self.columns)]
        lines += ["| " + " | ".join(fmt(v) for v in row) + " |" for row in self.rows]
        if self.notes:
            lines.append("")
            lines += [f"- {note}" for note in self.notes]
        return "\n".join(lines) + "\n"

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def sweep_clearance(
    rsd_values: Sequence[float],
    spec: ReceiverSpec | None = None,
    responsivities: Sequence[float] = (0.7, 1.0),
    provenance: dict | None = None,
) -> SweepResult:
    """Clearance vs. electronic RSD, one column per responsivity."""
    spec = spec or ReceiverSpec()
    axis = Axis("rsd", "A/sqrt(Hz)", rsd_values)
    if any(v <= 0 for v in axis.values):
        raise ValueError("RSD values must be > 0")
    cols = ["rsd_a_per_sqrt_hz"] + [f"clearance_db_r{fmt(r)}" for r in responsivities]
    result = SweepResult("sweep_clearance", tuple(cols), provenance=dict(provenance or {}))
    for rsd in axis.values:
        row = [rsd]
        for r in responsivities:
            row.append(clearance_db(replace(spec, responsivity=r, electronic_psd=rsd * rsd)))
        result.rows.append(tuple(row))
    return result


def _skr_row(point: tuple[float, float], base: QkdScenario) -> tuple:
    length, xi = point
    scenario = replace(base, channel=replace(base.channel, length_km=length), xi_rx=xi)
    r = secure_key_rate(scenario)
    return (length, xi, r.t_channel, r.t_total, r.xi_in, r.i_ab, r.chi_be, r.key_fraction, r.skr)


def _refine_cutoff(base: QkdScenario, xi: float, lo: float, hi: float) -> float:
    def raw(length: float) -> float:
        s = replace(base, channel=replace(base.channel, length_km=length), xi_rx=xi)
        return secure_key_rate(s).raw_key_fraction

    if raw(lo) <= 0:
        return lo
    return brentq(raw, lo, hi, xtol=CUTOFF_XTOL_KM)


def sweep_skr(
    lengths: Sequence[float],
    xi_values: Sequence[float],
    detector: DetectorParams | None = None,
    protocol: ProtocolParams | None = None,
    channel: ChannelParams | None = None,
    workers: int = 1,
    refine_cutoff: bool = False,
    max_points: int = MAX_POINTS,
    provenance: dict | None = None,
) -> SweepResult:
    """Key rate over (length, xi_rx); also records the zero-key cutoff per xi.

    The cutoff is the first grid length with zero key fraction, or with
    ``refine_cutoff`` the root of the unclamped key fraction to ~1e-3 km.
    """
    axes = [Axis("length_km", "km", lengths), Axis("xi_rx_snu", "SNU", xi_values)]
    check_size(axes, max_points)
    base = QkdScenario(channel or ChannelParams(), detector or DetectorParams(),
                       protocol or ProtocolParams())
    points = [(L, xi) for L in axes[0].values for xi in axes[1].values]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: _skr_row(p, base), points))
    else:
        rows = [_skr_row(p, base) for p in points]

    result = SweepResult("sweep_skr", SKR_COLUMNS, rows, provenance=dict(provenance or {}))
    n_xi = len(axes[1].values)
    for j, xi in enumerate(axes[1].values):
        kf = [rows[i * n_xi + j][7] for i in range(len(axes[0].values))]
        cut = next((i for i, k in enumerate(kf) if k == 0.0), None)
        if cut is None:
            value = None
        elif refine_cutoff and cut > 0:
            value = _refine_cutoff(base, xi, axes[0].values[cut - 1], axes[0].values[cut])
        else:
            value = axes[0].values[cut]
        result.cutoffs[xi] = value
        shown = "none" if value is None else fmt(value)
        result.notes.append(f"cutoff xi_rx_snu={fmt(xi)} length_km={shown}")
    return result


@dataclass(frozen=True)
class TiaPreset:
    """A TIA design with its published reference noise figures."""

    design: TiaNoiseDesign
    ref_mean_rsd: float | None = None
    ref_rms: float | None = None

    @property
    def band(self) -> str:
        # presets are named <kind>-<band>, e.g. mono-1G5
        return self.design.label.rsplit("-", 1)[-1]


DESIGN_COLUMNS = (
    "label", "kind", "bandwidth_hz", "mean_rsd_model", "i_rms_model",
    "mean_rsd_ref", "i_rms_ref", "mean_rsd_rel_dev", "i_rms_rel_dev",
    "increases_with_bw", "below_hetero_at_bw",
)


def _rel(model: float, ref: float | None) -> float | None:
    return None if ref is None else (model - ref) / ref


def compare_designs(presets: Sequence[TiaPreset], provenance: dict | None = None) -> SweepResult:
    """Model vs. reference noise per preset, with ordering checks.

    ``increases_with_bw``: both metrics exceed those of the next-lower
    bandwidth preset of the same integration kind (blank for the lowest).
    ``below_hetero_at_bw``: for monolithic rows, both metrics are below the
    heterogeneous preset of the same band (blank when there is none).
    """
    result = SweepResult("compare_designs", DESIGN_COLUMNS, provenance=dict(provenance or {}))
    metrics = {}
    for p in presets:
        d = p.design
        metrics[d.label] = (mean_rsd(d), integrate_rms(d))

    for p in presets:
        d = p.design
        rsd, rms = metrics[d.label]
        same_kind = sorted(
            (q for q in presets if q.design.interface.kind is d.interface.kind),
            key=lambda q: q.design.bandwidth,
        )
        lower = [q for q in same_kind if q.design.bandwidth < d.bandwidth]
        increases = None
        if lower:
            lrsd, lrms = metrics[lower[-1].design.label]
            increases = rsd > lrsd and rms > lrms
        below = None
        if d.interface.kind is IntegrationKind.MONOLITHIC:
            twins = [q for q in presets
                     if q.design.interface.kind is IntegrationKind.HETEROGENEOUS and q.band == p.band]
            if twins:
                hrsd, hrms = metrics[twins[0].design.label]
                below = rsd < hrsd and rms < hrms
        result.rows.append((
            d.label, d.interface.kind.value, d.bandwidth, rsd, rms,
            p.ref_mean_rsd, p.ref_rms, _rel(rsd, p.ref_mean_rsd), _rel(rms, p.ref_rms),
            increases, below,
        ))
    return result


def clearance_table(spec: ReceiverSpec, responsivities: Sequence[float],
                    provenance: dict | None = None) -> SweepResult:
    """Clearance and detection noise for a single receiver at several responsivities."""
    cols = ("responsivity_a_per_w", "electronic_rsd_a_per_sqrt_hz", "lo_power_w",
            "lo_path_loss_db", "clearance_db", "semiclassical_clearance_db", "xi_det_snu")
    result = SweepResult("clearance", cols, provenance=dict(provenance or {}))
    for r in responsivities:
        s = replace(spec, responsivity=r)
        cl = clearance_db(s)
        result.rows.append((
            r, math.sqrt(s.electronic_psd), s.lo_power, s.lo_path_loss_db, cl,
            clearance_db(s, variant="semiclassical"),
            None if cl is None else xi_det_snu(cl),
        ))
    return result

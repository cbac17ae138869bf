"""Balanced-receiver figures of merit and the commercial detector dataset."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources

from .constants import Q, db_from_ratio, ideal_responsivity
from .errors import DomainError, ValidationError

CMRR_CAP_DB = 120.0
MIN_CLEARANCE_DB = 10.0
MIN_CMRR_DB = 30.0

DATASHEET_FILE = "table1_detectors.csv"


@dataclass(frozen=True)
class ReceiverSpec:
    responsivity: float = 0.7
    lo_power: float = 10e-3
    lo_path_loss_db: float = 3.0
    wavelength: float = 1550e-9
    electronic_psd: float = (0.89e-12) ** 2
    bandwidth: float = 1.48e9

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValidationError("wavelength", "must be > 0")
        r_max = ideal_responsivity(self.wavelength)
        if not 0 < self.responsivity <= r_max:
            raise ValidationError(
                "responsivity", f"must lie in (0, {r_max:.4f}] A/W at this wavelength"
            )
        if self.lo_power < 0:
            raise ValidationError("lo_power", "must be >= 0")
        if not self.electronic_psd > 0:
            raise ValidationError("electronic_psd", "must be > 0")
        if not self.bandwidth > 0:
            raise ValidationError("bandwidth", "must be > 0")

    @property
    def quantum_efficiency(self) -> float:
        return self.responsivity / ideal_responsivity(self.wavelength)

    @property
    def power_at_photodiodes(self) -> float:
        return self.lo_power * 10.0 ** (-self.lo_path_loss_db / 10.0)


def shot_noise_psd(responsivity: float, optical_power_at_pds: float) -> float:
    """Semiclassical shot-noise PSD 2 q R P in A^2/Hz."""
    if responsivity < 0 or optical_power_at_pds < 0:
        raise DomainError("responsivity and optical power must be >= 0")
    return 2.0 * Q * responsivity * optical_power_at_pds


def clearance_db(spec: ReceiverSpec, variant: str = "quantum") -> float | None:
    """Shot-noise clearance over electronic noise in dB.

    ``variant="quantum"`` references the LO shot noise to the vacuum level,
    i.e. weights 2qRP by the quantum efficiency, so clearance grows as R^2.
    ``variant="semiclassical"`` uses 2qRP / S_elec directly.
    Returns ``None`` when there is no LO light and hence no clearance.
    """
    shot = shot_noise_psd(spec.responsivity, spec.power_at_photodiodes)
    if shot == 0:
        return None
    if variant == "quantum":
        shot *= spec.quantum_efficiency
    elif variant != "semiclassical":
        raise ValueError(f"unknown clearance variant {variant!r}")
    return db_from_ratio(shot / spec.electronic_psd)


def nep(rsd: float, responsivity: float) -> float:
    """Noise-equivalent power in W/sqrt(Hz)."""
    if not responsivity > 0:
        raise DomainError("responsivity must be > 0")
    return rsd / responsivity


def cmrr_db(i1: float, i2: float, cap_db: float = CMRR_CAP_DB) -> float:
    """Common-mode rejection of two photocurrents, positive is better.

    Computed from the current ratio, hence 20*log10. Perfect balance returns
    ``cap_db``, which should be read as "at least cap_db".
    """
    if i1 < 0 or i2 < 0:
        raise DomainError("photocurrents must be >= 0")
    total = i1 + i2
    if total == 0:
        raise DomainError("CMRR undefined with both photocurrents zero")
    diff = abs(i1 - i2)
    if diff == 0:
        return cap_db
    return min(cap_db, -20.0 * math.log10(diff / total))


def xi_det_snu(clearance: float) -> float:
    """Electronic noise variance in shot-noise units for a clearance in dB."""
    return 10.0 ** (-clearance / 10.0)


@dataclass(frozen=True)
class RequirementCheck:
    passed: bool
    failures: tuple[str, ...] = ()


def meets_cvqkd_requirements(clearance: float, cmrr: float) -> RequirementCheck:
    failures = []
    if not clearance >= MIN_CLEARANCE_DB:
        failures.append(f"QCNR {clearance:.2f} dB below {MIN_CLEARANCE_DB:g} dB")
    if not cmrr > MIN_CMRR_DB:
        failures.append(f"CMRR {cmrr:.2f} dB not above {MIN_CMRR_DB:g} dB")
    return RequirementCheck(not failures, tuple(failures))


@dataclass(frozen=True)
class DatasheetEntry:
    name: str
    bandwidth_mhz: float
    nep_pw_sqrthz: float
    cmrr_db: float
    candidate: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("bandwidth_mhz", "nep_pw_sqrthz", "cmrr_db"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be > 0")


def load_datasheets() -> list[DatasheetEntry]:
    """Bundled commercial balanced-detector table, in file order."""
    text = resources.files("qkdrx.data").joinpath(DATASHEET_FILE).read_text()
    rows = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    return [
        DatasheetEntry(r["name"], float(r["bw_mhz"]), float(r["nep_pw_sqrthz"]), float(r["cmrr_db"]))
        for r in rows
    ]


def compare_datasheets(
    candidate: DatasheetEntry | None = None,
    min_bandwidth_mhz: float = 0.0,
) -> list[DatasheetEntry]:
    """Rank detectors by NEP (ascending), ties broken by wider bandwidth."""
    entries = load_datasheets()
    if candidate is not None:
        entries.append(DatasheetEntry(candidate.name, candidate.bandwidth_mhz,
                                      candidate.nep_pw_sqrthz, candidate.cmrr_db, candidate=True))
    entries = [e for e in entries if e.bandwidth_mhz >= min_bandwidth_mhz]
    return sorted(entries, key=lambda e: (e.nep_pw_sqrthz, -e.bandwidth_mhz))

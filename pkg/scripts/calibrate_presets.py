"""Regenerate the bundled TIA preset files.

Each preset starts from one reference input transistor, gets its collector
current and device scale from ``optimize_bias`` and its feedback resistor
from ``calibrate_feedback`` so the integrated rms noise equals the published
simulation value. Run from the repository root:

    python scripts/calibrate_presets.py src/qkdrx/data/presets
"""

import sys
from dataclasses import replace
from pathlib import Path

from qkdrx.config import RunConfig, TiaSection, InterfaceSection, ReceiverSection, render
from qkdrx.noise import InterfaceModel, TiaNoiseDesign, TransistorParams, calibrate_feedback

REFERENCE = TransistorParams(beta_dc=250.0, f_t=210e9, r_b=60.0, c_tr=20e-15, i_c=100e-6)
I_C_RANGE = (1e-6, 50e-3)
SCALE_RANGE = (0.05, 50.0)
N_GRID = 801

# label, monolithic?, -3 dB bandwidth, mean RSD, integrated rms
TABLE = [
    ("mono-1G5", True, 1.48e9, 0.89e-12, 31.9e-9),
    ("mono-5G", True, 4.95e9, 1.85e-12, 109e-9),
    ("mono-10G", True, 10.05e9, 3.2e-12, 262e-9),
    ("hetero-1G5", False, 1.5e9, 3.5e-12, 110.5e-9),
    ("hetero-5G", False, 5e9, 7.05e-12, 493e-9),
    ("hetero-10G", False, 10.6e9, 19.68e-12, 790e-9),
]


def calibrate(label, mono, bw, rsd, rms):
    interface = InterfaceModel.monolithic() if mono else InterfaceModel.heterogeneous()
    start = TiaNoiseDesign(1e6, REFERENCE, interface, bandwidth=bw, label=label)
    d = calibrate_feedback(start, rms, I_C_RANGE, SCALE_RANGE, N_GRID, N_GRID).design
    t = d.transistor
    base = RunConfig()
    return replace(
        base,
        tia=TiaSection(label, bw, d.r_f, t.beta_dc, t.f_t, t.r_b, t.c_tr, t.i_c,
                       d.temperature, False, rsd, rms),
        interface=InterfaceSection(interface.kind.value, interface.c_pd, interface.c_pad,
                                   interface.n_pads),
        receiver=replace(base.receiver, electronic_psd=rsd * rsd, bandwidth=bw),
    )


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for row in TABLE:
        cfg = calibrate(*row)
        text = (f"# {row[0]}: calibrated by scripts/calibrate_presets.py\n"
                + render(cfg, ("tia", "interface", "receiver")))
        (out / f"{row[0]}.ini").write_text(text)
        print(row[0], cfg.tia)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/qkdrx/data/presets")

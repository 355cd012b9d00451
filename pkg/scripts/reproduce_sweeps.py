"""Sweep every netlist in scripts/netlists and the 12-cell fitted cascade,
writing CSV + SVG pairs and a one-line summary per run.

    python scripts/reproduce_sweeps.py [--out sweeps]
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from wavetrap.analysis import FrequencyGrid, sweep, swing
from wavetrap.dispersion import LineModel
from wavetrap.netlist import parse_file
from wavetrap.network import Cascade
from wavetrap.plot import sweep_svg
from wavetrap.synthesis import DelayTarget, fit_trapper, period_window

HERE = Path(__file__).parent


@dataclass(frozen=True)
class CascadeConfig:
    f_peak: float = 6.34e9
    delta_tau: float = 10e-9
    order: int = 3
    cells: int = 12
    width_a: float = 0.01778
    eps_r: float = 3.38
    points: int = 4001


def _emit(result, out: Path, stem: str, title: str) -> None:
    with open(out / f"{stem}.csv", "w", newline="\n") as fp:
        result.write_csv(fp)
    (out / f"{stem}.svg").write_text(sweep_svg(result, title=title))
    rep = swing(result)
    peaks = ", ".join(f"{f / 1e9:.3f}" for f, _ in rep.peaks) or "none"
    print(f"{stem:<18} swing {rep.delta_tau * 1e9:8.3f} ns   peaks [GHz]: {peaks}")


def run_netlists(out: Path) -> None:
    for path in sorted((HERE / "netlists").glob("*.dds")):
        net = parse_file(path)
        result = sweep(net.root, net.sweeps[0].grid)
        _emit(result, out, path.stem, path.name)


def run_cascade(out: Path, cfg: CascadeConfig) -> None:
    model = LineModel.waveguide(cfg.width_a, cfg.eps_r)
    fit = fit_trapper(DelayTarget(cfg.f_peak, cfg.delta_tau, model, m=cfg.order))
    print(f"fitted cell: k={fit.k:.5f} L1={fit.L1 * 1e3:.3f} mm L2={fit.L2 * 1e3:.3f} mm m={fit.m}")
    lo, hi = period_window(model, fit.trapper.round_trip_length, fit.m)
    result = sweep(Cascade((fit.trapper,), repeat=cfg.cells), FrequencyGrid(lo, hi, cfg.points))
    _emit(result, out, f"cascade_x{cfg.cells}", f"{cfg.cells} fitted cells")


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("sweeps"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    run_netlists(args.out)
    run_cascade(args.out, CascadeConfig())


if __name__ == "__main__":
    main()

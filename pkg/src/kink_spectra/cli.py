"""``kink-spectra`` command line: ``run`` and ``validate`` subcommands.

Outputs of ``run`` (all in ``--out``):

* ``summary.json``   per-mode constants, series coefficients and kinds
* ``bs_sweep.csv``   one row per (eps, branch) root, see ``birman_schwinger.CSV_COLUMNS``
* ``evolution.csv``  time series of the cross-check run (only with ``--evolve``)
* ``report.txt``     one paragraph per mode naming the matched case

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 degenerate mode.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import birman_schwinger as bs
from . import evolution as evo
from .config import RunConfig, load_config
from .corrector import ChannelBasis
from .errors import ConfigValidationError, KinkSpectraError, ParseError
from .gamma import check_decay, check_parity
from .models import validate_model
from .operator1d import Grid1D, discrete_modes, h0_spectrum

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_DEGENERATE = 0, 2, 3, 4

CASE_TEXT = {
    2: "case 2: Lambda* > 0, K2 > 0; both points +-i kappa* move to eigenvalues",
    3: "case 3: Lambda* > 0, K2 < 0; both points +-i kappa* move to resonances",
    4: "case 4: Lambda* < 0, K1 != 0; one eigenvalue and one resonance",
    5: "case 5: Lambda* < 0, K1 = 0, K2 > 0; both points +-kappa* move to resonances",
    6: "case 6: Lambda* < 0, K1 = 0, K2 < 0; both points +-kappa* move to eigenvalues",
}
DEGENERATE_TEXT = "degenerate (K1=K2=0), outside the classified cases"


def _c(z):
    return {"re": float(z.real), "im": float(z.imag)}


@dataclass
class Bundle:
    summary: dict
    roots: list = field(default_factory=list)
    series: evo.TimeSeries | None = None
    report: list = field(default_factory=list)
    exit_code: int = EXIT_OK


def _select(modes, selector):
    if selector == "all":
        return list(modes)
    if selector >= len(modes):
        raise ConfigValidationError("modes", f"index {selector} but only {len(modes)} discrete modes")
    return [modes[selector]]


def _mode_entry(cfg: RunConfig, basis: ChannelBasis, gamma_values, lam_1d: float):
    tol = cfg.tolerances
    rr = bs.ReducedResolvent(basis, gamma_values)
    K1, K2 = rr.constants(1)
    pred = asy.predict(basis.star, basis.lam_star, K1, K2, vanish_tol=tol["vanish"])
    entry = asy.summary_dict(pred)
    entry["lambda_star_grid1d"] = lam_1d
    entry["status"] = "degenerate" if pred.degenerate else "ok"
    entry["table_kinds"] = ({asy.branch_label(b): k for b, k in table.items()}
                            if (table := asy.classify_by_table(pred)) else None)
    return rr, pred, entry


def _sweep(cfg: RunConfig, rr, pred):
    out, rows = {}, []
    for b in asy.BRANCHES:
        bp = pred.branches[b]
        res = bs.eps_sweep(rr, b, cfg.eps_list, bp.c1, bp.c2, check_uniqueness=False)
        rows.extend(res.roots)
        out[asy.branch_label(b)] = {
            "fitted_order": None if math.isnan(res.fitted_order) else res.fitted_order,
            "deviations": [float(d) for d in res.deviations],
            "kinds": [r.kind for r in res.roots],
            "kinds_match_prediction": all(r.kind == bp.kind_at(r.eps) for r in res.roots),
            "max_residual": max(r.residual for r in res.roots),
        }
    return out, rows


def _evolve(cfg: RunConfig, model, gamma, basis: ChannelBasis, rr, pred):
    ev = cfg.evolution
    b = ev["branch"]
    bp = pred.branches[b]
    root = bs.solve_k(rr, ev["eps"], b, bp.k_series(ev["eps"]), check_uniqueness=False)
    gx = basis.grid_x
    gy = Grid1D(ev["Ly"], ev["Ny"])
    setup = evo.EvolutionSetup.build(model, gamma, ev["eps"], gx, gy,
                                     sponge_width=(ev["sponge_width_x"], ev["sponge_width_y"]),
                                     sponge_strength=ev["sponge_strength"],
                                     window_fraction=ev["window_fraction"])
    omega = abs(root.lam.imag)
    seed = ev["seed"] if root.kind == asy.EIGENVALUE else "gaussian"
    if seed == "mode":
        wide = ChannelBasis(basis.spectrum, gy, basis.star)
        psi = bs.reconstruct_mode(bs.ReducedResolvent(wide, gamma.on_grid(gx.nodes, gy.nodes)), root)
        state = evo.seed_from_mode(psi, root.lam, setup.dt)
    else:
        state = evo.seed_mode(basis.psi_star, ev["Ly"] / 4, gx, gy, setup.dt, omega=omega)
    _, series = evo.run(setup, state, ev["t_end"], sample_every=ev["sample_every"],
                        omega=omega if omega > 1e-8 else None)
    values = series.amplitude if omega > 1e-8 else series.norm
    fit = evo.measure_rate(series.t, values, skip=ev["skip"])
    e0 = series.energy[0]
    closure = series.energy + series.gamma_work + series.sponge_work - e0
    info = {
        "mode": basis.star, "branch": asy.branch_label(b), "eps": ev["eps"], "seed": seed,
        "bs_lambda": _c(root.lam), "bs_kind": root.kind,
        "series_lambda": _c(bp.lambda_at(ev["eps"])),
        "measured_rate": fit.rate, "fit_r2": fit.r2,
        "sign_agrees": bool(np.sign(fit.rate) == np.sign(root.lam.real)),
        "ratio_to_bs": fit.rate / root.lam.real if root.lam.real != 0 else None,
        "ledger_closure": float(np.max(np.abs(closure)) / abs(e0)) if e0 != 0 else None,
    }
    return info, series


def run_pipeline(cfg: RunConfig, modes=None, run_bs=None, run_evolution=None) -> Bundle:
    """Execute the full chain; returns everything that gets written to disk."""
    selector = cfg.modes if modes is None else modes
    run_bs = cfg.run_bs if run_bs is None else run_bs
    run_evolution = cfg.run_evolution if run_evolution is None else run_evolution
    tol = cfg.tolerances

    model = cfg.field_model()
    gamma = cfg.gamma_spec()
    g1, gx, gy = cfg.grids()
    if gx.n_points * gy.n_points > tol["max_unknowns"]:
        raise ConfigValidationError("grid2d", f"Nx*Ny = {gx.n_points * gy.n_points} exceeds "
                                              f"tolerances.max_unknowns = {tol['max_unknowns']}")
    model_report = validate_model(model, g1, tol["model"]) if model.has_kink else None
    decay = check_decay(gamma, np.linspace(0.5, max(gx.half_length, gy.half_length), 40))
    sample = np.linspace(-min(gx.half_length, gy.half_length), min(gx.half_length, gy.half_length), 41)
    scale = float(np.max(np.abs(gamma.on_grid(sample, sample)))) or 1.0
    check_parity(gamma, sample, sample, tol=1e-12 * scale)

    spec1 = h0_spectrum(model, g1)
    modes1 = discrete_modes(spec1.pairs(), model.lambda_e)
    spec_x = h0_spectrum(model, gx)
    modes_x = discrete_modes(spec_x.pairs(), model.lambda_e)
    gamma_values = gamma.on_grid(gx.nodes, gy.nodes)

    summary = {
        "model": model.name,
        "lambda_e": model.lambda_e,
        "config": cfg.as_dict(),
        "kink_residual": None if model_report is None else model_report.kink_residual,
        "gamma_parity": gamma.parity.value,
        "gamma_decay_ratio": decay.ratio,
        "discrete_spectrum": [p.lam for p in modes1],
        "modes": [],
        "evolution": None,
    }
    bundle = Bundle(summary)
    report = [f"model {model.name}: Lambda_e = {model.lambda_e:g}, "
              f"{len(modes1)} discrete eigenvalue(s) {', '.join(f'{p.lam:.6g}' for p in modes1)}",
              f"gamma {gamma.params.get('family')}: parity {gamma.parity.value}", ""]
    evolve_target = None
    for pair in _select(modes1, selector):
        j = pair.index
        if j >= len(modes_x):
            raise ConfigValidationError("grid2d", f"mode {j} is not resolved on the 2D grid")
        if abs(pair.lam) < tol["zero_mode"]:
            summary["modes"].append({"mode": j, "lambda_star_grid1d": pair.lam, "status": "skipped-zero-mode"})
            report += [f"mode {j}: Lambda* = {pair.lam:.3e} is a zero mode; skipped (the point does not move)", ""]
            continue
        basis = ChannelBasis(spec_x, gy, j)
        rr, pred, entry = _mode_entry(cfg, basis, gamma_values, pair.lam)
        lines = [f"mode {j}: Lambda* = {pred.lambda_star:.10g} (1D grid {pair.lam:.10g}), "
                 f"K1 = {pred.K1:.6e}, K2 = {pred.K2.real:.6e}{pred.K2.imag:+.6e}i"]
        if pred.degenerate:
            bundle.exit_code = EXIT_DEGENERATE
            lines.append(f"  {DEGENERATE_TEXT}")
        elif pred.extended_regime:
            st, _ = asy.case_table(pred.lambda_star, pred.K1, pred.K2.real,
                                   tol["vanish"] * max(abs(pred.K1), abs(pred.K2)))
            entry["case_from_real_part"] = st
            lines.append("  complex K2 (open channels), extended regime; kinds from the series")
            if st is not None:
                lines.append(f"  sign pattern with Re K2 matches {CASE_TEXT[st]}")
        elif pred.statement is not None:
            lines.append(f"  matched {CASE_TEXT[pred.statement]}")
        else:
            lines.append("  no case matched at leading order")
        for b, bp in pred.branches.items():
            lines.append(f"  branch {asy.branch_label(b)}: lambda(0) = {bp.lambda0:.6g}, kind {bp.kind}")
        if run_bs and not pred.degenerate:
            entry["bs"], rows = _sweep(cfg, rr, pred)
            bundle.roots.extend(rows)
            for lab, s in entry["bs"].items():
                lines.append(f"  BS sweep {lab}: order {s['fitted_order']}, kinds {s['kinds']}, "
                             f"agree with series: {s['kinds_match_prediction']}")
            if evolve_target is None:
                evolve_target = (basis, rr, pred)
        elif not pred.degenerate and evolve_target is None:
            evolve_target = (basis, rr, pred)
        summary["modes"].append(entry)
        report += lines + [""]

    if run_evolution:
        if evolve_target is None:
            report.append("evolution: no non-degenerate mode selected; skipped")
        else:
            info, series = _evolve(cfg, model, gamma, *evolve_target)
            summary["evolution"] = info
            bundle.series = series
            report.append(f"evolution (mode {info['mode']}, branch {info['branch']}, eps {info['eps']:g}): "
                          f"measured rate {info['measured_rate']:.6e}, BS Re lambda "
                          f"{info['bs_lambda']['re']:.6e}, sign agrees: {info['sign_agrees']}")
    summary["exit_code"] = bundle.exit_code
    bundle.report = report
    return bundle


def write_bundle(bundle: Bundle, out_dir, run_bs: bool) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(bundle.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if run_bs:
        bs.write_roots_csv(out / "bs_sweep.csv", bundle.roots)
    if bundle.series is not None:
        bundle.series.write_csv(out / "evolution.csv")
    (out / "report.txt").write_text("\n".join(bundle.report).rstrip() + "\n", encoding="utf-8")


def _parse_modes(text: str):
    if text == "all":
        return "all"
    try:
        idx = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'all' or a mode index") from None
    if idx < 0:
        raise argparse.ArgumentTypeError("mode index must be non-negative")
    return idx


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kink-spectra",
                                     description="Spectra of 2D kinks under a localized damping perturbation.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the pipeline on a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory (default: config 'out')")
    run.add_argument("--modes", type=_parse_modes, default=None, help="'all' or a discrete-mode index")
    run.add_argument("--no-bs", action="store_true", help="skip the Birman-Schwinger sweep")
    run.add_argument("--evolve", action="store_true", help="add the time-domain cross-check")
    val = sub.add_parser("validate", help="check a config file without running")
    val.add_argument("config", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ParseError, ConfigValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        try:
            cfg.field_model()
            cfg.gamma_spec()
            cfg.grids()
        except (KinkSpectraError, ValueError, KeyError, TypeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{args.config}: ok")
        return EXIT_OK

    run_bs = cfg.run_bs and not args.no_bs
    try:
        bundle = run_pipeline(cfg, modes=args.modes, run_bs=run_bs, run_evolution=cfg.run_evolution or args.evolve)
    except ConfigValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KinkSpectraError as exc:
        print(f"numerical failure in {exc.module}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_bundle(bundle, args.out or cfg.out, run_bs)
    print("\n".join(bundle.report))
    return bundle.exit_code


if __name__ == "__main__":
    sys.exit(main())

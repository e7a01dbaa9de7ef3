"""Command-line front end: ``fluxlru <command> [options]``.

Every command writes its tables (CSV or JSON), optional SVG plots and a
``manifest.json`` listing each output with its SHA-256 hash.  Exit codes:
0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analytics, dynamics, pulse, stabilizer, svg
from .errors import NUMERICAL_ERRORS, ConfigError, FluxLRUError, NoEvents
from .hilbert import DeviceParams, bundled_config_path, read_config

log = logging.getLogger("fluxlru")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
INITIAL = {"g": (0, 0, 0), "e": (1, 0, 0), "f": (2, 0, 0)}


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    started: str
    finished: str = ""
    files: list = field(default_factory=list)

    def add(self, path):
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.files.append({"path": Path(path).name, "sha256": digest})

    def write(self, out_dir):
        self.finished = _now()
        path = Path(out_dir) / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, default=_jsonable) + "\n")
        return path


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return str(x)


class Emitter:
    """Writes tables, JSON and plots into the output directory and records them."""

    def __init__(self, out_dir, fmt, plot, manifest):
        self.out = Path(out_dir)
        self.fmt = fmt
        self.plot = plot
        self.manifest = manifest

    def table(self, stem, header, columns):
        if self.fmt == "csv":
            path = self.out / f"{stem}.csv"
            pulse.write_columns(path, header, columns)
        else:
            path = self.out / f"{stem}.json"
            data = {h: np.asarray(c, dtype=float).tolist() for h, c in zip(header, columns)}
            path.write_text(json.dumps(data, indent=1) + "\n")
        self.manifest.add(path)
        return path

    def json(self, stem, obj):
        path = self.out / f"{stem}.json"
        path.write_text(json.dumps(obj, indent=2, default=_jsonable) + "\n")
        self.manifest.add(path)
        return path

    def line(self, stem, x, series, **kw):
        if self.plot == "svg":
            path = self.out / f"{stem}.svg"
            svg.line_plot(path, x, series, **kw)
            self.manifest.add(path)

    def heatmap(self, stem, x, y, z, **kw):
        if self.plot == "svg":
            path = self.out / f"{stem}.svg"
            svg.heatmap(path, x, y, z, **kw)
            self.manifest.add(path)


def _overrides(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _config_values(args):
    path = args.config or bundled_config_path()
    try:
        values = read_config(path)
    except ConfigError as exc:
        # an unreadable file is an I/O failure, not a bad value
        if isinstance(exc.__cause__, OSError):
            raise exc.__cause__ from None
        raise
    values.update(_overrides(args.set))
    return values


def _device(values):
    return DeviceParams.from_mapping(values)


def _operating_point(dev, args):
    """Pulse at the requested (omega_m, omega_a) with calibrated flux amplitude."""
    omega_m = args.omega_m if args.omega_m is not None else float(dev.extras.get("omega_m", 564))
    if args.D is not None:
        D = args.D
    else:
        omega_a = args.omega_a if args.omega_a is not None else float(dev.extras.get("omega_a", 128))
        D = pulse.calibrate_flux_amplitude(dev, omega_a, omega_m=omega_m, sigma=args.sigma)
    return pulse.FluxPulse(omega_m=omega_m, tau=args.tau, sigma=args.sigma, tau_B=args.tau_B, D=D)


def cmd_landscape(args, values, emit):
    dev = _device(values)
    wm = np.linspace(*args.omega_m_grid[:2], int(args.omega_m_grid[2]))
    wa = np.linspace(*args.omega_a_grid[:2], int(args.omega_a_grid[2]))
    res = dynamics.landscape(dev, wm, wa, fixed_duration=args.duration, sigma=args.sigma,
                             workers=args.threads, max_excitation=args.max_excitation)
    mm, jj = np.meshgrid(np.arange(len(wm)), np.arange(len(wa)), indexing="ij")
    mm, jj = mm.ravel(), jj.ravel()
    emit.table("landscape", ["omega_m (MHz)", "D (rad)", "omega_a (MHz)", "omega_a_linear (MHz)", "P_f"],
               [res.omega_m_axis[mm], res.D[jj], res.omega_a[jj], res.omega_a_linear[jj], res.Pf.ravel()])
    chains = dynamics.extract_resonances(res, threshold=args.threshold)
    report = {"chains": [{"slope": r.slope, "intercept": r.intercept, "depth": r.depth,
                          "points": r.points} for r in chains]}
    at = float(dev.extras.get("omega_a", np.median(wa)))
    if len(chains) >= 2:
        report["doublet_separation_MHz"] = dynamics.doublet_separation(chains, at)
        report["doublet_at_omega_a"] = at
    emit.json("resonances", report)
    emit.heatmap("landscape", wm, wa, res.Pf, title="final P_f", xlabel="omega_m (MHz)",
                 ylabel="omega_a (MHz)")
    for r in chains:
        print(f"chain slope {r.slope:.3f} intercept {r.intercept:.1f} MHz depth {r.depth:.2e}")
    if "doublet_separation_MHz" in report:
        print(f"doublet separation at omega_a={at:g} MHz: {report['doublet_separation_MHz']:.1f} MHz")


def cmd_evolve(args, values, emit):
    dev = _device(values)
    p = _operating_point(dev, args)
    times = np.arange(0.0, p.duration + 1e-9, args.dt_out)
    traj = dynamics.evolve(None, dev, p, INITIAL[args.initial], times, max_excitation=args.max_excitation)
    emit.table("populations", ["t (ns)", "P_g", "P_e", "P_f"], [traj.t, *traj.P.T])
    emit.json("evolve", {"pulse": asdict(p), "step_ns": traj.h, "final": traj.P[-1]})
    emit.line("populations", traj.t, {"P_g": traj.P_g, "P_e": traj.P_e, "P_f": traj.P_f},
              title="transmon populations", xlabel="t (ns)", ylabel="population")
    print(f"final P_g={traj.P_g[-1]:.4e} P_e={traj.P_e[-1]:.4e} P_f={traj.P_f[-1]:.4e}")


def cmd_tau_scan(args, values, emit):
    dev = _device(values)
    p = _operating_point(dev, args)
    r = dynamics.find_tau_lru(dev, p, INITIAL[args.initial], scan=tuple(args.scan), step=args.step,
                              max_excitation=args.max_excitation)
    emit.table("tau_scan", ["tau (ns)", "P_f"], [r.scan_tau, r.scan_Pf])
    emit.json("tau_lru", {"tau_lru": r.tau_lru, "total_duration": r.total_duration, "Pf_min": r.Pf_min,
                          "omega_m": p.omega_m, "D": p.D})
    emit.line("tau_scan", r.scan_tau, {"P_f": r.scan_Pf}, title="final P_f", xlabel="plateau (ns)",
              ylabel="P_f", ylog=True)
    print(f"tau_lru = {r.tau_lru:.2f} ns (total {r.total_duration:.2f} ns), P_f = {r.Pf_min:.2e}")


def cmd_spectrum(args, values, emit):
    dev = _device(values)
    p = _operating_point(dev, args)
    idle = pulse.frequency_calculator(dev).transition(0.0, args.transition)

    def spectrum(pp):
        fr = pulse.instantaneous_frequency(dev, pulse.flux_trajectory(pp, args.dt), args.transition)
        return pulse.sideband_spectrum(fr, baseline=idle)

    spec = spectrum(p)
    emit.table("spectrum", ["frequency (MHz)", "magnitude (GHz)"], [spec.freqs, spec.magnitude])
    series = {f"sigma={p.sigma:g} ns": spec.magnitude}
    report = {"pulse": asdict(p), "transition": args.transition, "df_MHz": spec.df}
    if args.compare_sigma is not None:
        ref = spectrum(p.with_(sigma=args.compare_sigma))
        series[f"sigma={args.compare_sigma:g} ns"] = np.interp(spec.freqs, ref.freqs, ref.magnitude)
        if args.probe is not None:
            a = float(np.interp(args.probe, spec.freqs, spec.magnitude))
            b = float(np.interp(args.probe, ref.freqs, ref.magnitude))
            report.update(probe_MHz=args.probe, magnitude=a, magnitude_compare=b,
                          suppression=b / a if a > 0 else float("inf"))
            print(f"magnitude at {args.probe:g} MHz: {a:.3e} vs {b:.3e} (suppression {b / a:.3g}x)")
    emit.json("spectrum", report)
    emit.line("spectrum", spec.freqs, series, title=f"{args.transition} frequency spectrum",
              xlabel="frequency (MHz)", ylabel="|DFT|", ylog=True)


def cmd_rb(args, values, emit):
    model = analytics.ErrorModel(args.p_depol, args.interleaved_error, args.leakage)
    lengths = analytics.default_lengths(args.max_length, args.n_lengths)
    ref = analytics.simulate_rb(model, lengths, args.seeds, args.seed, False, args.shots)
    inter = analytics.simulate_rb(model, lengths, args.seeds, args.seed, True, args.shots)
    r = analytics.irb_fit(ref, inter)
    emit.table("rb_curves", ["length", "reference", "reference_std", "interleaved", "interleaved_std"],
               [lengths, ref.mean, ref.std, inter.mean, inter.std])
    emit.json("rb_result", r.to_dict())
    emit.line("rb_curves", lengths, {"reference": ref.mean, "interleaved": inter.mean},
              title="sequence survival", xlabel="Clifford length", ylabel="survival")
    print(f"interleaved error = {100 * r.error_int:.4f} % +- {100 * r.sigma_error_int:.4f} %")


def _stab_config(values, args, lru):
    cfg = stabilizer.StabilizerConfig.from_mapping(values)
    changes = {"lru_enabled": lru, "rng_seed": args.seed}
    if args.shots is not None:
        changes["n_shots"] = args.shots
    if args.cycles is not None:
        changes["n_cycles"] = args.cycles
    if args.f_policy is not None:
        changes["f_policy"] = args.f_policy
    return cfg.with_(**changes)


def _stab_run(cfg, threads):
    if threads <= 1:
        return stabilizer.run_all_inputs(cfg)
    seeds = [cfg.with_(rng_seed=cfg.rng_seed * 4 + k) for k in range(len(stabilizer.INPUT_STATES))]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(stabilizer.run_cycles, seeds, stabilizer.INPUT_STATES))


def _stab_summary(records):
    curves = stabilizer.leakage_population(records)
    sig = stabilizer.mean_syndrome(records)
    rej, kept = stabilizer.leakage_reject(records)
    try:
        life, life_sem = stabilizer.leakage_lifetime(records)
    except NoEvents:
        life, life_sem = float("nan"), float("nan")
    return curves, sig, rej, kept, {"aux_Pf_final": float(curves.aux[-1]), "sigma_final": float(sig[-1]),
                                    "rejected_sigma_final": float(rej[-1]), "lifetime_cycles": life,
                                    "lifetime_sem": life_sem}


def cmd_stabilizer(args, values, emit):
    modes = {"on": [True], "off": [False], "diff": [False, True]}[args.lru]
    summary = {}
    curves_by = {}
    for lru in modes:
        tag = "lru_on" if lru else "lru_off"
        cfg = _stab_config(values, args, lru)
        records = _stab_run(cfg, args.threads)
        curves, sig, rej, kept, s = _stab_summary(records)
        s["f_policy"] = cfg.f_policy
        summary[tag] = s
        curves_by[tag] = curves
        emit.table(f"stabilizer_{tag}", ["cycle", "aux_Pf", "aux_Pf_sem", "data1_Pf", "data2_Pf", "sigma",
                                          "sigma_rejected", "retained"],
                   [curves.cycles, curves.aux, curves.aux_sem, curves.data[:, 0], curves.data[:, 1], sig,
                    rej, kept])
        print(f"{tag}: aux P_f(final)={s['aux_Pf_final']:.3e} lifetime={s['lifetime_cycles']:.2f} cycles "
              f"sigma(final)={s['sigma_final']:.4f}")
    if args.lru == "diff":
        off, on = summary["lru_off"]["aux_Pf_final"], summary["lru_on"]["aux_Pf_final"]
        ratio = off / on if on > 0 else float("inf")
        summary["reduction_factor"] = ratio
        summary["factor_of_ten_check"] = bool(ratio >= 5.0)
        verdict = "PASS" if ratio >= 5.0 else "FAIL"
        print(f"leakage reduction factor {ratio:.1f} (factor-of-ten check, ratio >= 5): {verdict}")
    emit.json("stabilizer_summary", summary)
    cycles = next(iter(curves_by.values())).cycles
    emit.line("stabilizer_leakage", cycles, {k: c.aux for k, c in curves_by.items()},
              title="auxiliary |f> population", xlabel="cycle", ylabel="P_f", ylog=True)


def _pulse_args(p):
    p.add_argument("--omega-m", type=float, default=None, help="modulation frequency (MHz)")
    p.add_argument("--omega-a", type=float, default=None, help="modulation amplitude of f_ge (MHz)")
    p.add_argument("--D", type=float, default=None, help="flux amplitude, overrides --omega-a")
    p.add_argument("--tau", type=float, default=34.5, help="plateau duration (ns)")
    p.add_argument("--sigma", type=float, default=5.0, help="Gaussian kernel width (ns)")
    p.add_argument("--tau-B", dest="tau_B", type=float, default=None, help="edge buffer (ns), default 2 sigma")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key = value config file (default: bundled qubit A)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
    common.add_argument("--out", default="fluxlru_out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=int(os.environ.get("FLUXLRU_THREADS", "1")))
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--plot", choices=("none", "svg"), default="none")
    common.add_argument("--max-excitation", type=int, default=4, help="dressed subspace truncation")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fluxlru", description="Flux-modulated leakage reduction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("landscape", parents=[common], help="final P_f over (omega_m, omega_a)")
    p.add_argument("--omega-m-grid", nargs=3, type=float, default=[520, 580, 15], metavar=("START", "STOP", "N"))
    p.add_argument("--omega-a-grid", nargs=3, type=float, default=[80, 150, 8], metavar=("START", "STOP", "N"))
    p.add_argument("--duration", type=float, default=100.0, help="fixed total pulse duration (ns)")
    p.add_argument("--sigma", type=float, default=5.0)
    p.add_argument("--threshold", type=float, default=0.5, help="P_f level below which minima count")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("evolve", parents=[common], help="population dynamics during one pulse")
    _pulse_args(p)
    p.add_argument("--initial", choices=sorted(INITIAL), default="f")
    p.add_argument("--dt-out", type=float, default=0.5, help="output spacing (ns)")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("tau-scan", parents=[common], help="locate the first P_f minimum in plateau duration")
    _pulse_args(p)
    p.add_argument("--initial", choices=sorted(INITIAL), default="f")
    p.add_argument("--scan", nargs=2, type=float, default=[4.0, 60.0], metavar=("START", "STOP"))
    p.add_argument("--step", type=float, default=2.0)
    p.set_defaults(func=cmd_tau_scan)

    p = sub.add_parser("spectrum", parents=[common], help="DFT of the instantaneous transition frequency")
    _pulse_args(p)
    p.add_argument("--transition", choices=("ge", "ef"), default="ef")
    p.add_argument("--dt", type=float, default=0.02, help="sampling step (ns)")
    p.add_argument("--compare-sigma", type=float, default=None, help="second kernel width to overlay")
    p.add_argument("--probe", type=float, default=None, help="frequency (MHz) at which to compare magnitudes")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("rb", parents=[common], help="simulated interleaved randomized benchmarking")
    p.add_argument("--p-depol", type=float, default=0.002, help="depolarizing probability per Clifford")
    p.add_argument("--interleaved-error", type=float, default=0.0025)
    p.add_argument("--leakage", type=float, default=0.0)
    p.add_argument("--seeds", type=int, default=30)
    p.add_argument("--max-length", type=int, default=1000)
    p.add_argument("--n-lengths", type=int, default=20)
    p.add_argument("--shots", type=int, default=None)
    p.set_defaults(func=cmd_rb)

    p = sub.add_parser("stabilizer", parents=[common], help="repeated weight-2 stabilizer cycles")
    p.add_argument("--lru", choices=("on", "off", "diff"), default="diff")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--cycles", type=int, default=None)
    p.add_argument("--f-policy", choices=stabilizer.F_POLICIES, default=None)
    p.set_defaults(func=cmd_stabilizer)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        values = _config_values(args)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(args.command, dict(values), args.seed, _now())
        emit = Emitter(args.out, args.format, args.plot, manifest)
        args.func(args, values, emit)
        manifest.write(args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FluxLRUError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""``bench`` command line: budget, simulate, correlate and sweep subcommands.

Exit codes: 0 success, 2 validation, 3 infeasible, 4 I/O or stream format.
"""

import argparse
import csv
import hashlib
import io
import json
import sys

from . import __version__
from .biphoton import bandwidth_from_width
from .budget import (
    CorrelationSummary,
    budget_from_measurements,
    cs_violation,
    forward_coincidences,
    forward_singles,
    g2_peak,
    heralded_g2,
)
from .config import load_config
from .correlate import (
    auto_correlate,
    cross_correlate,
    peak_and_window,
    signal_to_accidental_g2,
    window_g2,
    zero_delay,
)
from .errors import ConfigError, NoPeakError, SfwmError, StreamFormatError
from .montecarlo import ANTISTOKES, STOKES, simulate_stream
from .streamio import read_stream, stream_bytes, write_stream_csv
from .sweep import AXES, run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _emit(report, fmt, out=None):
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["quantity", "value"])
        for key, value in report.items():
            writer.writerow([key, value])
        text = buf.getvalue()
    else:
        width = max(len(k) for k in report) if report else 0
        text = "".join(f"{k:<{width}}  {_text(v)}\n" for k, v in report.items())
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _text(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _correlation_figures(report, g2_cross, g2_ss, g2_asas):
    if g2_ss is None or g2_asas is None:
        return
    summary = CorrelationSummary.from_measurements(g2_cross, g2_ss, g2_asas)
    report["g2_ss"] = g2_ss
    report["g2_asas"] = g2_asas
    report["cs_factor"] = summary.cs_factor
    report["g2_heralded"] = summary.g2_heralded


def cmd_budget(args):
    measured = [args.m_s, args.m_as, args.coincidences]
    if any(v is not None for v in measured):
        needed = {
            "--m-s": args.m_s,
            "--m-as": args.m_as,
            "--coincidences": args.coincidences,
            "--eta-s": args.eta_s,
            "--eta-as": args.eta_as,
            "--b-s": args.b_s,
            "--b-as": args.b_as,
            "--window-ns": args.window_ns,
        }
        missing = [k for k, v in needed.items() if v is None]
        if missing:
            raise ConfigError(f"measured-rates mode needs {', '.join(missing)}")
        b = budget_from_measurements(
            args.m_s,
            args.m_as,
            args.coincidences,
            args.eta_s,
            args.eta_as,
            args.b_s,
            args.b_as,
            args.window_ns * 1e-9,
        )
        mode = "solved"
    elif args.config:
        b = load_config(args.config).budget.budget()
        mode = "forward"
    else:
        raise ConfigError("give --config or the measured-rates flags")

    m_s, m_as = forward_singles(b)
    c_sg, c_ns = forward_coincidences(b)
    g2 = g2_peak(b)
    report = {
        "mode": mode,
        "P_hz": b.pair_rate,
        "N_S_hz": b.noise_stokes,
        "N_AS_hz": b.noise_antistokes,
        "eta_S": b.eta_stokes,
        "eta_AS": b.eta_antistokes,
        "B_S_hz": b.background_stokes,
        "B_AS_hz": b.background_antistokes,
        "window_ns": b.window * 1e9,
        "M_S_hz": m_s,
        "M_AS_hz": m_as,
        "C_sg_hz": c_sg,
        "C_ns_hz": c_ns,
        "C_hz": c_sg + c_ns,
        "g2_peak": g2,
    }
    if b.residual_noise is not None:
        report["raman_S_hz"], report["raman_AS_hz"] = b.raman_stokes, b.raman_antistokes
    _correlation_figures(report, g2, args.g2_ss, args.g2_asas)
    _emit(report, args.format, args.out)
    return EXIT_OK


def cmd_simulate(args):
    cfg = load_config(args.config)
    sim = cfg.simulation
    duration = args.duration if args.duration is not None else sim.duration_s
    seed = args.seed if args.seed is not None else sim.seed
    w, _ = cfg.waveform_model()
    stream = simulate_stream(
        cfg.budget.budget(),
        w,
        duration,
        seed,
        thermal=sim.thermal(),
        max_events=sim.max_events,
        workers=args.threads,
    )
    data = stream_bytes(stream)
    try:
        with open(args.out, "wb") as fh:
            fh.write(data)
        if args.csv:
            write_stream_csv(stream, args.csv)
    except OSError as exc:
        print(f"bench simulate: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    counts = stream.counts()
    report = {
        "out": args.out,
        "duration_s": duration,
        "seed": seed,
        "records": len(stream),
        "stokes_clicks": counts[STOKES],
        "antistokes_clicks": counts[ANTISTOKES],
        "stokes_rate_hz": counts[STOKES] / duration,
        "antistokes_rate_hz": counts[ANTISTOKES] / duration,
        "sha256": hashlib.sha256(data).hexdigest(),
    }
    _emit(report, args.format)
    return EXIT_OK


def cmd_correlate(args):
    cfg = load_config(args.config) if args.config else None
    duration = args.duration
    if duration is None and cfg is not None:
        duration = cfg.simulation.duration_s
    first = read_stream(args.streams[0], duration)
    if len(args.streams) == 2:
        second = read_stream(args.streams[1], duration or first.duration)
        s1, s2 = first, second
    else:
        s1, s2 = first.channel(STOKES), first.channel(ANTISTOKES)

    bin_w = args.bin_ps * 1e-12
    tau_range = args.range_ns * 1e-9
    hist = cross_correlate(s1, s2, bin_w, tau_range, workers=args.threads)
    if args.out:
        hist.to_csv(args.out)

    report = {
        "stokes_rate_hz": hist.rates[0],
        "antistokes_rate_hz": hist.rates[1],
        "duration_s": hist.duration,
        "bin_ps": args.bin_ps,
    }
    try:
        peak = peak_and_window(hist)
    except NoPeakError as exc:
        tail, tail_err = window_g2(hist, hist.tau_min, hist.tau_max)
        report["note"] = f"no correlation peak; mean g2 = {tail:.4f} +- {tail_err:.4f} (consistent with 1 if uncorrelated)"
        _emit(report, args.format)
        print(f"bench correlate: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    window = args.window_ns * 1e-9 if args.window_ns else peak.fwhm_window
    g2_sa, g2_sa_err = signal_to_accidental_g2(hist, window)
    report.update(
        {
            "g2_peak_bin": peak.g2_peak,
            "g2_peak_bin_stderr": peak.g2_peak_stderr,
            "peak_tau_ns": peak.peak_tau * 1e9,
            "fwhm_window_ns": peak.fwhm_window * 1e9,
            "coincidences_in_window_hz": peak.coincidences_in_window,
            "window_ns": window * 1e9,
            "g2_signal_to_accidental": g2_sa,
            "g2_signal_to_accidental_stderr": g2_sa_err,
            "bandwidth_mhz": bandwidth_from_width(peak.fwhm_window) / 1e6,
        }
    )
    if args.auto:
        auto_bin = args.auto_window_ps * 1e-12
        g2_auto = []
        for k, (name, stream) in enumerate((("g2_ss", s1), ("g2_asas", s2))):
            h_auto = auto_correlate(stream, auto_bin, auto_bin, seed=args.seed + k, workers=args.threads)
            g, err = zero_delay(h_auto)
            report[name], report[f"{name}_stderr"] = g, err
            g2_auto.append(g)
        if min(g2_auto) > 0:
            report["cs_factor"] = cs_violation(peak.g2_peak, *g2_auto)
            report["g2_heralded"] = heralded_g2(g2_auto[1], peak.g2_peak)
        else:
            report["auto_note"] = "no zero-delay autocorrelation counts; acquire longer for C-S factor"
    _emit(report, args.format)
    return EXIT_OK


def cmd_sweep(args):
    cfg = load_config(args.config)
    result = run_sweep(cfg, args.axis, args.start, args.stop, args.steps, workers=args.threads)
    text = result.to_csv()
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"bench sweep: cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="bench", description="Warm-vapor SFWM photon-pair source toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_help="output path"):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--format", choices=("json", "csv", "text"), default="text")

    b = sub.add_parser("budget", help="forward rates or inverse noise budget")
    common(b, "write the report here instead of stdout")
    b.add_argument("--m-s", type=float, help="measured Stokes singles [Hz]")
    b.add_argument("--m-as", type=float, help="measured anti-Stokes singles [Hz]")
    b.add_argument("--coincidences", "-C", type=float, help="measured coincidence rate [Hz]")
    b.add_argument("--eta-s", type=float)
    b.add_argument("--eta-as", type=float)
    b.add_argument("--b-s", type=float, help="Stokes background [Hz]")
    b.add_argument("--b-as", type=float, help="anti-Stokes background [Hz]")
    b.add_argument("--window-ns", type=float, help="coincidence window [ns]")
    b.add_argument("--g2-ss", type=float, help="measured Stokes autocorrelation")
    b.add_argument("--g2-asas", type=float, help="measured anti-Stokes autocorrelation")
    b.set_defaults(func=cmd_budget)

    s = sub.add_parser("simulate", help="write a synthetic timestamp stream")
    common(s, "binary stream file")
    s.add_argument("--seed", type=int)
    s.add_argument("--duration", type=float, help="override simulation.duration_s [s]")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--csv", help="also write a (timestamp_ps, channel) CSV")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("correlate", help="g2 histogram from stream file(s)")
    common(c, "histogram CSV")
    c.add_argument("streams", nargs="+", help="one two-channel stream, or two single-detector streams")
    c.add_argument("--bin-ps", type=float, default=200.0)
    c.add_argument("--range-ns", type=float, default=200.0)
    c.add_argument("--window-ns", type=float, help="coincidence window; default = peak FWHM")
    c.add_argument("--duration", type=float, help="acquisition time [s]; default from config or last record")
    c.add_argument("--auto", action="store_true", help="also estimate autocorrelations by HBT splitting")
    c.add_argument("--auto-window-ps", type=float, default=486.0)
    c.add_argument("--seed", type=int, default=0, help="seed for HBT splitting")
    c.add_argument("--threads", type=int, default=1)
    c.set_defaults(func=cmd_correlate)

    w = sub.add_parser("sweep", help="model sweep as CSV")
    common(w, "CSV path; default stdout")
    w.add_argument("--axis", choices=tuple(AXES), required=True)
    w.add_argument("--start", type=float, required=True)
    w.add_argument("--stop", type=float, required=True)
    w.add_argument("--steps", type=int, required=True)
    w.add_argument("--threads", type=int, default=1)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("simulate", "sweep") and not args.config:
        parser.error(f"{args.command} requires --config")
    if args.command == "simulate" and not args.out:
        parser.error("simulate requires --out")
    if args.command == "correlate" and len(args.streams) > 2:
        parser.error("correlate takes one or two stream files")
    try:
        return args.func(args)
    except StreamFormatError as exc:
        print(f"bench {args.command}: format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"bench {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except SfwmError as exc:
        print(f"bench {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

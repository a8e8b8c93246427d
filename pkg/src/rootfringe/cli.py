"""Command-line entry point: simulate, demodulate, bench and diffusion.

Exit codes: 0 success, 2 invalid input or flags, 3 I/O failure,
4 carrier errors, 5 field too small for the window.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field


from . import bench, diffusion, synth
from .errors import InputError, IoFailure, RootFringeError
from .rasters import FieldRaster, read_csv, read_field, read_pgm, write_csv, write_field
from .rootmusic import BORDER_POLICIES, ROOT_METHODS, EstimatorConfig
from .pipeline import retrieve_phase
from .spectral import CarrierSpec, demodulate_to_analytic

try:
    from importlib.metadata import version as _pkg_version

    VERSION = _pkg_version("artifact")
except Exception:  # not installed
    VERSION = "0.0.0"

SNR_DEFINITION = (
    "snr_db = 10*log10(A^2/sigma^2), A = 1, sigma^2 = total variance of "
    "circular complex white Gaussian noise; numpy PCG64 seeded per trial"
)

# config keys that never change numeric output
_VOLATILE_KEYS = ("out", "threads")


@dataclass
class RunManifest:
    command: list
    config: dict
    version: str = VERSION
    timestamp: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat())
    extra: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        stable = {k: v for k, v in self.config.items() if k not in _VOLATILE_KEYS}
        blob = json.dumps(stable, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def write(self, out_dir) -> None:
        doc = {
            "command": self.command,
            "config": self.config,
            "config_hash": self.config_hash,
            "version": self.version,
            "timestamp": self.timestamp,
        }
        doc.update(self.extra)
        _write_json(os.path.join(out_dir, "manifest.json"), doc)


def _write_json(path, doc) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def _ensure_dir(path) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {path}: {exc}") from exc


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _carrier(text: str) -> CarrierSpec:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("carrier must be fx,fy,radius")
    try:
        return CarrierSpec(*(float(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _config(args) -> dict:
    skip = {"func", "handler"}
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        out[k] = asdict(v) if isinstance(v, CarrierSpec) else v
    return out


def _estimator(args) -> EstimatorConfig:
    try:
        return EstimatorConfig(L=args.L, border_policy=args.border, root_method=args.root_method)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# ---- subcommands ----

def cmd_simulate(args, argv) -> int:
    spec = synth.PhantomSpec(
        kind=args.phantom,
        amplitude=args.amplitude,
        size=args.size,
        seed=args.seed,
        snr_db=args.snr,
    )
    truth, field_ = synth.make_phantom(spec)
    _ensure_dir(args.out)
    write_field(os.path.join(args.out, "truth.fr1"), FieldRaster.from_real(truth.values))
    write_field(os.path.join(args.out, "field.fr1"), FieldRaster.from_complex(field_))
    RunManifest(argv, _config(args), extra={"snr_definition": SNR_DEFINITION}).write(args.out)
    return 0


def _load_input(args):
    """Complex field from an FR1 file, or from a PGM through the carrier filter."""
    try:
        with open(args.input, "rb") as fh:
            magic = fh.read(3)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if magic.startswith(b"P5"):
        if args.carrier is None:
            raise InputError("PGM input needs --carrier fx,fy,radius")
        img = read_pgm(args.input)
        field_, path = demodulate_to_analytic(img, args.carrier, return_path=True)
        return field_, {"input_kind": "pgm", "carrier_path": path}
    raster = read_field(args.input)
    if raster.channels != 2:
        raise InputError(f"{args.input}: expected a complex (2-channel) field")
    return raster.to_complex(), {"input_kind": "fr1"}


def cmd_demodulate(args, argv) -> int:
    cfg = _estimator(args)
    field_, info = _load_input(args)
    wrapped, unwrapped, diag = retrieve_phase(field_, cfg, args.threads)
    _ensure_dir(args.out)
    write_field(os.path.join(args.out, "wrapped.fr1"), FieldRaster.from_real(wrapped.values))
    write_field(os.path.join(args.out, "unwrapped.fr1"), FieldRaster.from_real(unwrapped.values))
    _write_json(os.path.join(args.out, "diagnostics.json"), {**diag, **info, "L": cfg.L})
    RunManifest(argv, _config(args)).write(args.out)
    return 0


def _progress(rec) -> None:
    print(f"  {rec.param_name}={rec.param_value} rmse={rec.rmse} wall_ms={rec.wall_ms}", file=sys.stderr)


def cmd_bench(args, argv) -> int:
    _ensure_dir(args.out)
    if args.which == "rmse-vs-snr":
        recs = bench.rmse_vs_snr(args.snr_list, L=args.L, phantom=args.phantom, trials=args.trials,
                                 seed=args.seed, size=args.size, threads=args.threads, progress=_progress)
        header = ["snr_db", "rmse_rad", "trials", "seed"]
        name = "rmse_vs_snr.csv"
    elif args.which == "window-sweep":
        recs = bench.window_sweep(args.L_list, snr=args.snr, phantom=args.phantom, trials=args.trials,
                                  seed=args.seed, size=args.size, threads=args.threads, progress=_progress)
        header = ["L", "rmse_rad", "trials", "seed"]
        name = "window_sweep.csv"
    else:
        recs = bench.scaling(args.sizes, args.threads_list, L=args.L, repeats=args.repeats,
                             seed=args.seed, progress=_progress)
        header = ["size", "threads", "wall_ms", "trials", "seed"]
        name = "scaling.csv"
    write_csv(os.path.join(args.out, name), header, recs)
    extra = {"snr_definition": SNR_DEFINITION, "physical_cores": bench.physical_cores()}
    RunManifest(argv, _config(args), extra=extra).write(args.out)
    return 0


def _read_stack(stack_dir):
    index = os.path.join(stack_dir, "frames.csv")
    header, rows = read_csv(index)
    if header[:2] != ["file", "time_s"]:
        raise InputError(f"{index}: header must start with file,time_s")
    frames = []
    for row in rows:
        try:
            t = float(row[1])
        except (IndexError, ValueError) as exc:
            raise InputError(f"{index}: bad row {row}") from exc
        raster = read_field(os.path.join(stack_dir, row[0]))
        if raster.channels != 1:
            raise InputError(f"{row[0]}: expected a real unwrapped phase raster")
        frames.append((t, raster.to_real()))
    return frames


def cmd_diffusion(args, argv) -> int:
    try:
        with open(args.geometry) as fh:
            geom = diffusion.parse_geometry(fh.read())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    frames = _read_stack(args.stack)
    times, stack, profiles = diffusion.stack_series(frames, subtract_first=args.subtract_first)
    _ensure_dir(args.out)
    for i, phi in enumerate(stack):
        grad = geom.gain * phi
        write_field(os.path.join(args.out, f"gradient_{i:03d}.fr1"), FieldRaster.from_real(grad))
    header, rows = diffusion.profile_table(times, profiles * geom.gain)
    write_csv(os.path.join(args.out, "profiles.csv"), header, rows)
    RunManifest(argv, _config(args), extra={"gain_per_m": geom.gain}).write(args.out)
    return 0


# ---- parser ----

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rootfringe", description="Windowed root-MUSIC fringe phase retrieval")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a ground-truthed phantom")
    s.add_argument("--size", type=int, default=512)
    s.add_argument("--phantom", choices=synth.PHANTOM_KINDS, default="gaussian-peaks")
    s.add_argument("--amplitude", type=float, default=None, help="radians; default depends on phantom")
    s.add_argument("--snr", type=float, default=None, help="dB; omit for a noiseless field")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="sim")
    s.set_defaults(handler=cmd_simulate)

    d = sub.add_parser("demodulate", help="estimate wrapped and unwrapped phase")
    d.add_argument("--in", dest="input", required=True, help="FR1 complex field or P5 PGM")
    d.add_argument("--carrier", type=_carrier, default=None, help="fx,fy,radius in cycles/pixel (PGM only)")
    d.add_argument("--L", type=_positive_int, default=5)
    d.add_argument("--threads", type=_positive_int, default=1)
    d.add_argument("--border", choices=BORDER_POLICIES, default="replicate")
    d.add_argument("--root-method", choices=ROOT_METHODS, default="aberth")
    d.add_argument("--out", default="phase")
    d.set_defaults(handler=cmd_demodulate)

    b = sub.add_parser("bench", help="benchmark sweeps")
    bsub = b.add_subparsers(dest="which", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="bench")
    common.add_argument("--threads", type=_positive_int, default=1)

    r = bsub.add_parser("rmse-vs-snr", parents=[common])
    r.add_argument("--snr-list", type=_float_list, default=[-5, 0, 5, 10, 15, 20])
    r.add_argument("--L", type=_positive_int, default=5)
    r.add_argument("--phantom", choices=synth.PHANTOM_KINDS, default="gaussian-peaks")
    r.add_argument("--trials", type=_positive_int, default=3)
    r.add_argument("--size", type=int, default=512)

    w = bsub.add_parser("window-sweep", parents=[common])
    w.add_argument("--L-list", type=_int_list, default=list(range(1, 9)))
    w.add_argument("--snr", type=float, default=0.0)
    w.add_argument("--phantom", choices=synth.PHANTOM_KINDS, default="gaussian-peaks")
    w.add_argument("--trials", type=_positive_int, default=3)
    w.add_argument("--size", type=int, default=512)

    c = bsub.add_parser("scaling", parents=[common])
    c.add_argument("--sizes", type=_int_list, default=[256, 512, 1024])
    c.add_argument("--threads-list", type=_int_list, default=[1, 2, 4, 8])
    c.add_argument("--L", type=_positive_int, default=3)
    c.add_argument("--repeats", type=_positive_int, default=5)
    b.set_defaults(handler=cmd_bench)

    f = sub.add_parser("diffusion", help="index-gradient maps and profiles from an unwrapped stack")
    f.add_argument("--stack", required=True, help="directory with frames.csv (file,time_s) and FR1 frames")
    f.add_argument("--geometry", required=True, help="key = value file: f_x, n0, L_cell, mu, pixel_pitch")
    f.add_argument("--subtract-first", action="store_true", help="reference every frame to the first")
    f.add_argument("--out", default="diffusion")
    f.set_defaults(handler=cmd_diffusion)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.handler(args, argv)
    except RootFringeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

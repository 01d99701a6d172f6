"""Command-line runner: ``tfdiffuse case1|case2|case3|irmix ...``.

Precedence is profile defaults < ``--config`` JSON file < explicit flags.
Errors are reported on stderr as one JSON object ``{"error": class, "message": ...}``
with a class-specific exit status.
"""

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import arrays as arr_mod
from . import benchmarks as bm
from . import directivity as dv
from . import irtools
from .errors import ConfigError, DomainError, FitError, FormatError, TfDiffuseError, UndefinedFieldError
from .medium import Medium
from .reports import write_reports
from .wavefield import OCTAVE_CENTERS

EXIT_CODES = {
    "ConfigError": 2,
    "DomainError": 3,
    "UndefinedFieldError": 3,
    "WrongModelError": 3,
    "FitError": 3,
    "FormatError": 4,
    "OSError": 5,
    "TruncatedFileError": 5,
}


class UsageError(ConfigError):
    """Bad command-line usage."""


class _Once(argparse.Action):
    """Store action that rejects a repeated flag."""

    def __call__(self, parser, namespace, values, option_string=None):
        if getattr(namespace, "_seen_" + self.dest, False):
            raise UsageError(f"{option_string} given more than once")
        setattr(namespace, "_seen_" + self.dest, True)
        setattr(namespace, self.dest, values)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_bands(values):
    out = []
    for v in values:
        for tok in str(v).split(","):
            if not tok.strip():
                continue
            try:
                b = float(tok)
            except ValueError as exc:
                raise UsageError(f"--bands: not a number: {tok!r}") from exc
            if b not in OCTAVE_CENTERS:
                raise UsageError(f"--bands: {tok} is not an octave centre {OCTAVE_CENTERS}")
            out.append(b)
    return tuple(out)


def parse_range(text):
    """``start:stop:step`` (inclusive stop) or a comma list."""
    try:
        if ":" in text:
            a, b, s = (float(t) for t in text.split(":"))
            if s <= 0:
                raise ValueError("step must be positive")
            n = int(np.floor((b - a) / s + 1e-9)) + 1
            return tuple(round(a + i * s, 10) for i in range(n))
        return tuple(float(t) for t in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--eta: cannot parse {text!r} ({exc})") from exc


def build_parser():
    p = _Parser(prog="tfdiffuse", description="Diffuseness benchmarks for simulated and measured microphone arrays.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for case in (1, 2, 3):
        c = sub.add_parser(f"case{case}", help=f"run benchmark case {case}")
        c.add_argument("--array", action=_Once, choices=arr_mod.ARRAY_NAMES)
        c.add_argument("--bands", action=_Once, nargs="+", metavar="HZ")
        c.add_argument("--profile", action=_Once, choices=bm.PROFILES)
        c.add_argument("--seed", action=_Once, type=int)
        c.add_argument("--out", action=_Once, default=None)
        c.add_argument("--jobs", action=_Once, type=int)
        c.add_argument("--config", action=_Once, help="JSON file with configuration keys")
        c.add_argument("--directivity", action=_Once, help="coefficient table (band_hz, a0..a8)")
        c.add_argument("--synthesis-order", action=_Once, type=int, dest="synthesis_order")
        c.add_argument("--rho", action=_Once, type=float)
        c.add_argument("--c", action=_Once, type=float)
    m = sub.add_parser("irmix", help="mix measured anechoic and reverberant responses")
    m.add_argument("--beam", action=_Once, required=True)
    m.add_argument("--diffuse", action=_Once, required=True)
    m.add_argument("--array", action=_Once, choices=arr_mod.ARRAY_NAMES, required=True)
    m.add_argument("--eta", action=_Once, default="0:1:0.1")
    m.add_argument("--bands", action=_Once, nargs="+", metavar="HZ")
    m.add_argument("--directivity", action=_Once)
    m.add_argument("--out", action=_Once, default=None)
    return p


_FLAG_KEYS = ("array", "bands", "seed", "jobs", "directivity", "synthesis_order", "rho", "c")


@dataclass(frozen=True)
class RunConfig:
    """Resolved command: a benchmark configuration or the irmix arguments, plus the output directory."""

    command: str
    out: str
    case: bm.CaseConfig = None
    irmix: argparse.Namespace = None


def parse_config(argv, file_values=None):
    """Resolve ``argv`` (and an optional dict of file values) into a :class:`RunConfig`."""
    args = build_parser().parse_args(argv)
    out = args.out or f"out/{args.command}"
    if args.command == "irmix":
        return RunConfig("irmix", out, irmix=args)
    return RunConfig(args.command, out, case=_case_config(args, file_values))


def _case_config(args, file_values):
    case = int(args.command[-1])
    values = dict(file_values or {})
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        values.update(loaded)
    values.pop("case", None)
    profile = args.profile or values.pop("profile", None) or "paper"
    values.pop("profile", None)
    for key in _FLAG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = parse_bands(v) if key == "bands" else v
    if "array" not in values:
        raise UsageError("--array is required")
    array = values.pop("array")
    return bm.CaseConfig.for_profile(case, array, profile, **values)


def run_irmix(args):
    d = None if args.directivity is None else dv.load_coefficients(args.directivity)
    array = arr_mod.make_array(args.array, d)
    etas = parse_range(args.eta)
    bands = parse_bands(args.bands) if args.bands else OCTAVE_CENTERS
    beam = irtools.load_wav(args.beam)
    diffuse = irtools.load_wav(args.diffuse)
    if not args.bands:
        # default bands: keep those the recordings can resolve
        bands = tuple(b for b in bands if b * np.sqrt(2.0) <= beam.rate / 2 and beam.n_samples >= beam.rate * np.sqrt(2.0) / b)
    medium = Medium()
    pairs = irtools.irmix(beam, diffuse, array, etas, bands, medium)
    config = {
        "command": "irmix",
        "beam": args.beam,
        "diffuse": args.diffuse,
        "array": args.array,
        "eta": list(etas),
        "bands": list(bands),
        "directivity": args.directivity,
        "rho": medium.rho,
        "c": medium.c,
    }
    res = bm.CaseResult("irmix", args.array, bands, ("eta",), (), config)
    res.records = [(g, rep, {}) for g, rep in pairs]
    return res


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        run = parse_config(argv)
        res = run_irmix(run.irmix) if run.irmix is not None else bm.run_case(run.case)
        for path in write_reports(res, run.out):
            print(path)
        return 0
    except (TfDiffuseError, OSError) as exc:
        name = type(exc).__name__
        if isinstance(exc, UsageError):
            name = "ConfigError"
        code = EXIT_CODES.get(name)
        if code is None:
            for base in (ConfigError, FormatError, UndefinedFieldError, DomainError, FitError, OSError):
                if isinstance(exc, base):
                    code = EXIT_CODES[base.__name__]
                    break
            else:
                code = 1
        print(json.dumps({"error": name, "message": str(exc)}), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error,
3 construction refused below the tracking level ``k0``.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from ._json import dumps, format_float
from .analysis import regularity_estimate, run_suite, smoothness_comparison
from .cascade import basic_limit_function, tabulate_scaling, wavelet_function
from .errors import NsdaubError, TrackingError
from .factory import (
    FilterFamily,
    exp_filter,
    filter_equivalence_gap,
    k0_detect,
    normalization_gap,
)
from .nsdwt import CoeffPyramid, analyze, synthesize, transform_filters
from .schemes import FrequencySet, MaskFamily, exp_interp_mask

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Parsed options of one invocation; serializes canonically."""

    command: str = ""
    lambdas: list = field(default_factory=list)
    n: int = 1
    k: list = field(default_factory=lambda: [0])
    K: int = 10
    m: int = 0
    J: int = 4
    root_side: str = "outside"
    track: bool = True
    what: str = "phi"
    k_max: int = 12
    omega_max_exp: int = 12
    perturb: float | None = None
    perturb_index: int = 0
    action: str = ""
    input: str = ""
    output: str = ""

    def to_json(self) -> str:
        return dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_mapping(json.loads(text))

    @classmethod
    def from_mapping(cls, doc: dict, base: "RunConfig | None" = None) -> "RunConfig":
        cfg = base if base is not None else cls()
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key, val in doc.items():
            setattr(cfg, key, val)
        cfg.normalize()
        return cfg

    def normalize(self) -> None:
        self.lambdas = [float(v) for v in self.lambdas]
        self.n = int(self.n)
        self.k = [int(v) for v in (self.k if isinstance(self.k, (list, tuple)) else [self.k])]
        for name in ("K", "m", "J", "k_max", "omega_max_exp", "perturb_index"):
            setattr(self, name, int(getattr(self, name)))
        self.perturb = None if self.perturb is None else float(self.perturb)
        self.track = bool(self.track)

    def freqs(self) -> FrequencySet:
        if self.n < 1:
            raise UsageError(f"n must be at least 1, got {self.n}")
        lams = self.lambdas if self.lambdas else [0.0] * self.n
        if len(lams) != self.n:
            raise UsageError(f"expected {self.n} frequencies, got {len(lams)}")
        if not all(np.isfinite(lams)):
            raise UsageError("frequencies must be finite")
        return FrequencySet(lams)


def _parse_lambdas(tokens) -> list:
    out = []
    for tok in tokens:
        for part in str(tok).replace(",", " ").split():
            try:
                out.append(float(part))
            except ValueError as exc:
                raise UsageError(f"invalid frequency {part!r}") from exc
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None, help="half-order n (number of frequencies)")
    p.add_argument("--lambdas", nargs="+", default=None,
                   help="frequencies; repeats encode multiplicity ('1 1' or '1,1')")
    p.add_argument("--config", default=None, help="JSON file whose keys override the flags")
    p.add_argument("--output", default=None, help="write to this file instead of stdout")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsdaub", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("masks", help="level masks of the interpolatory scheme")
    _common(p)
    p.add_argument("--k", type=int, nargs="+", default=None, help="levels")

    p = sub.add_parser("filter", help="low-pass and wavelet filters at one level")
    _common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--side", dest="root_side", choices=["outside", "inside"], default=None)
    p.add_argument("--no-track", dest="track", action="store_false", default=None)

    p = sub.add_parser("cascade", help="dyadic samples as CSV x,value")
    _common(p)
    p.add_argument("--what", choices=["blf", "phi", "psi"], default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--side", dest="root_side", choices=["outside", "inside"], default=None)

    p = sub.add_parser("verify", help="run the verification suite")
    _common(p)
    p.add_argument("--kmax", dest="k_max", type=int, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--side", dest="root_side", choices=["outside", "inside"], default=None)
    p.add_argument("--perturb", type=float, default=None, help="add this to one filter coefficient")
    p.add_argument("--perturb-index", dest="perturb_index", type=int, default=None)

    p = sub.add_parser("regularity", help="Fourier-decay regularity estimates")
    _common(p)
    p.add_argument("--omega-max-exp", dest="omega_max_exp", type=int, default=None)
    p.add_argument("--side", dest="root_side", choices=["outside", "inside"], default=None)

    p = sub.add_parser("transform", help="non-stationary wavelet transform")
    _common(p)
    p.add_argument("action", choices=["analyze", "synthesize"])
    p.add_argument("--input", required=True)
    p.add_argument("--J", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--side", dest="root_side", choices=["outside", "inside"], default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if args.lambdas is not None:
        cfg.lambdas = _parse_lambdas(args.lambdas)
    skip = {"command", "lambdas", "config", "dump_config"}
    for key, val in vars(args).items():
        if key in skip or val is None:
            continue
        setattr(cfg, key, val)
    if args.n is None and cfg.lambdas:
        cfg.n = len(cfg.lambdas)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        doc.pop("command", None)
        cfg = RunConfig.from_mapping(doc, cfg)
    cfg.normalize()
    return cfg


# ------------------------------------------------------------ commands


def _coeff_map(poly, lo, hi) -> dict:
    return {str(d): float(c) for d, c in zip(range(lo, hi + 1), poly.dense(lo, hi))}


def cmd_masks(cfg: RunConfig) -> tuple:
    freqs = cfg.freqs()
    N = 2 * freqs.n - 1
    if any(k < 0 for k in cfg.k):
        raise UsageError("levels must be nonnegative")
    masks = [{"level": k, "coeffs": _coeff_map(exp_interp_mask(freqs, k), -N, N)} for k in cfg.k]
    return dumps({"n": freqs.n, "lambdas": list(freqs.lambdas), "masks": masks}), EXIT_OK


def cmd_filter(cfg: RunConfig) -> tuple:
    freqs = cfg.freqs()
    k = cfg.k[0]
    if k < 0:
        raise UsageError("level must be nonnegative")
    report = k0_detect(freqs)
    f = exp_filter(freqs, k, cfg.root_side, cfg.track)
    doc = {
        "level": k,
        "n": freqs.n,
        "lambdas": list(freqs.lambdas),
        "root_side": cfg.root_side,
        "tracked": cfg.track,
        "mu": f.mu_dict(),
        "nu": f.nu_dict(),
        "chosen_roots": [[r.real, r.imag] for r in f.chosen_roots],
        "k0": report.k0,
        "k0_conditions": {key: v for key, v in report.conditions.items()},
        "k0_radius_constant": report.C,
        "gaps": {
            "filter_equivalence": filter_equivalence_gap(freqs, k, cfg.root_side),
            "normalization": normalization_gap(freqs, k),
        },
    }
    return dumps(doc), EXIT_OK


def cmd_cascade(cfg: RunConfig) -> tuple:
    freqs = cfg.freqs()
    if cfg.K < 1:
        raise UsageError("K must be at least 1")
    if cfg.what == "blf":
        samples = basic_limit_function(MaskFamily(freqs), cfg.m, cfg.K)
    else:
        fam = FilterFamily(freqs, cfg.root_side)
        if cfg.what == "phi":
            samples = tabulate_scaling(fam, cfg.m, cfg.K)
        else:
            samples = wavelet_function(tabulate_scaling(fam, cfg.m + 1, cfg.K), fam.filter(cfg.m))
    lines = [f"{format_float(x)},{format_float(v)}" for x, v in zip(samples.x, samples.values)]
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple:
    freqs = cfg.freqs()
    perturb = None if cfg.perturb is None else (cfg.perturb_index, cfg.perturb)
    if perturb is not None and not 0 <= cfg.perturb_index < 2 * freqs.n:
        raise UsageError(f"perturb index must lie in 0..{2 * freqs.n - 1}")
    rep = run_suite(freqs, k_max=cfg.k_max, K=cfg.K, perturb=perturb, root_side=cfg.root_side, m=cfg.m)
    return dumps(rep.as_dict()), EXIT_OK if rep.passed else EXIT_FAIL


def cmd_regularity(cfg: RunConfig) -> tuple:
    freqs = cfg.freqs()
    E = cfg.omega_max_exp
    if not 6 <= E <= 20:
        raise UsageError("omega-max-exp must lie in 6..20")
    s_exp, s_cls, ok = smoothness_comparison(freqs, freqs.n, E, cfg.root_side)
    doc = {
        "n": freqs.n,
        "lambdas": list(freqs.lambdas),
        "masks": {
            "exponential": regularity_estimate(MaskFamily(freqs), 0, E).as_dict(),
            "classical": regularity_estimate(MaskFamily.classical(freqs.n), 0, E).as_dict(),
        },
        "filters": {
            "exponential": regularity_estimate(FilterFamily(freqs, cfg.root_side), 0, E).as_dict(),
            "classical": regularity_estimate(FilterFamily.classical(freqs.n, cfg.root_side), 0, E).as_dict(),
        },
        "comparison": {"s_exp": s_exp, "s_classical": s_cls, "pass": ok},
    }
    return dumps(doc), EXIT_OK


def _read_signal(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        return np.array([float(r.split(",")[-1]) for r in rows])
    except ValueError as exc:
        raise UsageError(f"{path} is not a one-value-per-line CSV: {exc}") from exc


def cmd_transform(cfg: RunConfig) -> tuple:
    freqs = cfg.freqs()
    fam = FilterFamily(freqs, cfg.root_side)
    if cfg.action == "analyze":
        x = _read_signal(cfg.input)
        if len(x) == 0 or len(x) % (2 ** cfg.J):
            raise UsageError(f"signal length {len(x)} is not divisible by 2^{cfg.J}")
        pyr = analyze(x, transform_filters(fam, cfg.m, cfg.J), cfg.J)
        return dumps(pyr.as_dict()), EXIT_OK
    try:
        with open(cfg.input, encoding="utf-8") as fh:
            pyr = CoeffPyramid.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read pyramid {cfg.input}: {exc}") from exc
    y = synthesize(pyr, transform_filters(fam, pyr.m, pyr.J))
    return "\n".join(format_float(v) for v in y) + "\n", EXIT_OK


COMMANDS = {
    "masks": cmd_masks,
    "filter": cmd_filter,
    "cascade": cmd_cascade,
    "verify": cmd_verify,
    "regularity": cmd_regularity,
    "transform": cmd_transform,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            sys.stdout.write(cfg.to_json())
            return EXIT_OK
        text, code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"nsdaub: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrackingError as exc:
        print(f"nsdaub: refused: {exc} (k0 = {exc.k0})", file=sys.stderr)
        return EXIT_REFUSED
    except (NsdaubError, ValueError) as exc:
        print(f"nsdaub: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.output:
        try:
            with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"nsdaub: error: cannot write {cfg.output}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

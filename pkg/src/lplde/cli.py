"""Command line front end.

Every subcommand writes one table (CSV) or document (JSON) to ``--output``
or standard output.  Exit status is 0 on success, 1 for invalid
configurations and 2 when a computation fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .core import (
    DUFFING,
    OCTIC,
    SEXTIC,
    VAN_DER_POL,
    Convention,
    ProblemSpec,
    expand,
    extract_kappa,
    fit_kappa_decay,
    fourier_coefficients,
)
from .errors import ConfigError, LPLDEError
from .oracle import (
    energy_defect,
    error_metric,
    exact_period_conservative,
    period_error,
    potential,
    vdp_limit_cycle,
)
from .pms import pms_search, third_order_lambda_sq, vdp_lambda_fit
from .ring import MIN_PRECISION, BigFloat, scalar_to_str

FAMILIES = {"duffing": DUFFING, "sextic": SEXTIC, "octic": OCTIC, "vdp": VAN_DER_POL}
LAMBDA_MODES = ("fixed", "third-order", "pms", "vdp-fit")
DIGITS = 20


@dataclass
class RunConfig:
    """Validated options of one invocation."""

    subcommand: str
    family: str = "duffing"
    mu: str = "1"
    amplitude: str = "1"
    order: int = 10
    lambda_mode: str | None = None
    lambda_sq: str | None = None
    fmt: str = "csv"
    output: str | None = None
    precision: int = 256
    convention: str = Convention.AMPLITUDE_AT_ZERO.value
    exact: bool = True
    mus: list = field(default_factory=list)
    amplitudes: list = field(default_factory=list)
    points: int = 200
    lambda_max: str | None = None
    harmonics: int = 5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        vdp = self.family == "vdp"
        if self.lambda_mode is None:
            self.lambda_mode = "pms" if vdp else "third-order"
        if self.lambda_mode not in LAMBDA_MODES:
            raise ConfigError(f"unknown lambda mode {self.lambda_mode!r}")
        if self.lambda_mode == "third-order" and vdp:
            raise ConfigError("lambda mode 'third-order' needs a conservative family")
        if self.lambda_mode == "vdp-fit" and not vdp:
            raise ConfigError("lambda mode 'vdp-fit' is only for the Van der Pol family")
        if self.lambda_mode == "fixed" and self.lambda_sq is None:
            raise ConfigError("lambda mode 'fixed' needs --lambda-sq")
        if self.order < 0:
            raise ConfigError("order must be non-negative")
        if self.precision < MIN_PRECISION:
            raise ConfigError(f"precision must be at least {MIN_PRECISION} bits")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        try:
            self.conv = Convention(self.convention)
        except ValueError:
            raise ConfigError(f"unknown convention {self.convention!r}") from None
        for name in ("mu", "amplitude"):
            _parse_number(getattr(self, name), name)


def _parse_number(text: str, name: str = "value") -> Fraction:
    """Exact rational from ``'3/4'``, ``'0.99'`` or ``'1e4'``."""
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot read {name} {text!r} as a number") from None


def _fmt(x, digits: int = DIGITS) -> str:
    if isinstance(x, BigFloat):
        return x.to_decimal(digits)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _spec(cfg: RunConfig, mu: Fraction, A: Fraction, order: int) -> ProblemSpec:
    family = FAMILIES[cfg.family]
    exact = cfg.exact and family is not VAN_DER_POL
    conv = (lambda v: v) if exact else (lambda v: BigFloat(v, cfg.precision))
    spec = ProblemSpec(
        family,
        conv(mu),
        conv(A) if family is not VAN_DER_POL else 1,
        conv(Fraction(0)),
        order,
        convention=cfg.conv,
    )
    return spec.replace(lambda_sq=_lambda_sq(cfg, spec, order))


def _lambda_sq(cfg: RunConfig, spec: ProblemSpec, order: int):
    ring_value = (lambda v: v) if spec.ring.exact else (lambda v: BigFloat(v, cfg.precision))
    mode = cfg.lambda_mode
    if mode == "fixed":
        return ring_value(_parse_number(cfg.lambda_sq, "lambda_sq"))
    if mode == "third-order":
        return third_order_lambda_sq(spec.family, spec.mu, spec.amplitude)
    if mode == "vdp-fit":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lam = vdp_lambda_fit(spec.mu, cfg.precision)
        return lam * lam
    result = pms_search(spec, order, precision=cfg.precision)
    opt = result.lambda_sq_opt
    return opt if not spec.ring.exact else Fraction(float(opt))


# --------------------------------------------------------------------------
# subcommands; each returns (columns, rows, document)


def cmd_solve(cfg: RunConfig):
    mu, A = _parse_number(cfg.mu), _parse_number(cfg.amplitude)
    spec = _spec(cfg, mu, A, cfg.order)
    result = expand(spec)
    x = result.solution()
    modes = [(k, x.cos_coeff(k), x.sin_coeff(k)) for k in sorted(x.harmonics())]
    doc = {
        "family": cfg.family,
        "mu": cfg.mu,
        "amplitude": None if spec.is_vdp else cfg.amplitude,
        "order": cfg.order,
        "lambda_sq": scalar_to_str(spec.lambda_sq),
        "omega_sq": scalar_to_str(result.omega_sq_total()),
        "period": scalar_to_str(result.period()),
        "freq_coeffs": [scalar_to_str(c) for c in result.freq_coeffs],
        "modes": [[k, scalar_to_str(c), scalar_to_str(s)] for k, c, s in modes],
    }
    rows = [[k, _fmt(c), _fmt(s)] for k, c, s in modes]
    return ["harmonic", "cos", "sin"], rows, doc


def cmd_table1(cfg: RunConfig):
    mu, A = _parse_number(cfg.mu), _parse_number(cfg.amplitude)
    spec = ProblemSpec(DUFFING, mu, A, Fraction(1), cfg.order)
    result = expand(spec)
    rows = [[n, _fmt(extract_kappa(result, n))] for n in range(2, cfg.order + 1, 2)]
    doc = {"kappa": {str(n): k for n, k in rows}}
    return ["n", "kappa"], rows, doc


def cmd_kappa_fit(cfg: RunConfig):
    mu, A = _parse_number(cfg.mu), _parse_number(cfg.amplitude)
    result = expand(ProblemSpec(DUFFING, mu, A, Fraction(1), cfg.order))
    kappas = [(n, extract_kappa(result, n)) for n in range(2, cfg.order + 1, 2)]
    prefactor, rate = fit_kappa_decay(kappas)
    doc = {"prefactor": prefactor, "rate": rate, "order": cfg.order}
    return ["prefactor", "rate"], [[repr(prefactor), repr(rate)]], doc


def cmd_table2(cfg: RunConfig):
    mus = cfg.mus or [str(m) for m in range(1, 11)]
    rows = []
    for text in mus:
        mu = _parse_number(text, "mu")
        spec = ProblemSpec(VAN_DER_POL, BigFloat(mu, cfg.precision), 1, BigFloat(0, cfg.precision), cfg.order)
        spec = spec.replace(lambda_sq=_lambda_sq(cfg, spec, cfg.order))
        T_approx = expand(spec).period()
        T_exact = vdp_limit_cycle(mu, precision=cfg.precision).period
        rows.append([text, _fmt(T_approx, 12), _fmt(T_exact, 12), _fmt(period_error(T_approx, T_exact), 6),
                     _fmt(spec.lambda_sq.sqrt(), 12)])
    doc = {"order": cfg.order, "rows": rows}
    return ["mu", "T_approx", "T_exact", "error_percent", "lambda"], rows, doc


def cmd_error_curve(cfg: RunConfig):
    if cfg.family == "vdp":
        raise ConfigError("error-curve covers the conservative families; use table2 for Van der Pol")
    N = FAMILIES[cfg.family].N
    mus = cfg.mus or [cfg.mu]
    amps = cfg.amplitudes or [cfg.amplitude]
    rows = []
    for mu_text in mus:
        for a_text in amps:
            mu, A = _parse_number(mu_text, "mu"), _parse_number(a_text, "A")
            result = expand(_spec(cfg, mu, A, cfg.order))
            exact = exact_period_conservative(N, mu, A, precision=cfg.precision).omega_sq_exact
            for n in range(cfg.order + 1):
                delta = error_metric(result.omega_sq_total(n), exact)
                log_delta = float("-inf") if not delta else math.log10(float(delta))
                rows.append([mu_text, a_text, n, repr(log_delta)])
    doc = {"family": cfg.family, "rows": rows}
    return ["mu", "A", "order", "log10_error"], rows, doc


def cmd_fourier_compare(cfg: RunConfig):
    mu, A = _parse_number(cfg.mu), _parse_number(cfg.amplitude)
    spec = _spec(cfg, mu, A, cfg.order)
    result = expand(spec)
    n_max = cfg.harmonics
    rows = []
    if spec.is_vdp:
        oracle = vdp_limit_cycle(mu, n_fourier=n_max, precision=cfg.precision, phase="fundamental")
        x = result.solution()
        for n in range(n_max):
            k = 2 * n + 1
            for kind, approx, exact in (("cos", x.cos_coeff(k), oracle.fourier_cos[n]),
                                        ("sin", x.sin_coeff(k), oracle.fourier_sin[n])):
                approx_f, exact_f = float(approx), float(exact)
                ratio = approx_f / exact_f if exact_f else float("nan")
                rows.append([n, kind, repr(approx_f), repr(exact_f), repr(ratio)])
    else:
        oracle = exact_period_conservative(spec.family.N, mu, A, precision=cfg.precision, n_fourier=n_max)
        approx = fourier_coefficients(result)
        for n in range(n_max):
            a = float(approx[n]) if n < len(approx) else 0.0
            e = float(oracle.fourier_cos[n])
            rows.append([n, "cos", repr(a), repr(e), repr(a / e if e else float("nan"))])
    doc = {"family": cfg.family, "order": cfg.order, "rows": rows}
    return ["n", "kind", "c_approx", "c_exact", "ratio"], rows, doc


def cmd_energy_scan(cfg: RunConfig):
    if cfg.family == "vdp":
        raise ConfigError("energy-scan needs a conservative family")
    mu, A = _parse_number(cfg.mu), _parse_number(cfg.amplitude)
    p = cfg.precision
    template = ProblemSpec(FAMILIES[cfg.family], BigFloat(mu, p), BigFloat(A, p), BigFloat(0, p), cfg.order,
                           convention=cfg.conv)
    if cfg.lambda_max is not None:
        lam_max = float(_parse_number(cfg.lambda_max, "lambda_max"))
    else:
        lam_max = 3 * float(pms_search(template, cfg.order, precision=p).lambda_opt)
    if cfg.points < 2 or not lam_max > 0:
        raise ConfigError("energy-scan needs at least two points and a positive lambda range")
    V = potential(template.family.N, template.mu, template.amplitude)
    rows = []
    for i in range(cfg.points):
        lam = lam_max * i / (cfg.points - 1)
        result = expand(template.replace(lambda_sq=BigFloat(lam * lam, p)))
        defect = energy_defect(result)
        w2 = result.omega_sq_total()
        v = result.solution().differentiate().evaluate(BigFloat(math.pi / 2, p), p)
        energy = w2 * v * v / 2
        rows.append([repr(lam), _fmt(energy, 15), _fmt(defect, 15)])
    doc = {"exact_energy": _fmt(V, 15), "rows": rows}
    return ["lambda", "energy", "defect"], rows, doc


COMMANDS = {
    "solve": cmd_solve,
    "table1": cmd_table1,
    "table2": cmd_table2,
    "error-curve": cmd_error_curve,
    "fourier-compare": cmd_fourier_compare,
    "energy-scan": cmd_energy_scan,
    "kappa-fit": cmd_kappa_fit,
}

DEFAULT_ORDERS = {"table1": 20, "table2": 44, "kappa-fit": 50, "energy-scan": 3, "fourier-compare": 50}
DEFAULT_PARAMS = {"table1": ("4/3", "1"), "kappa-fit": ("4/3", "1")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lplde", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", default="duffing", choices=sorted(FAMILIES))
        p.add_argument("--mu", default=None)
        p.add_argument("--A", dest="amplitude", default=None)
        p.add_argument("--order", type=int, default=None)
        p.add_argument("--lambda-mode", choices=LAMBDA_MODES, default=None)
        p.add_argument("--lambda-sq", default=None)
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        p.add_argument("--output", "-o", default=None)
        p.add_argument("--precision", type=int, default=None,
                       help="bits of big-float precision (default: $LPLDE_PRECISION or 256)")
        p.add_argument("--convention", default=Convention.AMPLITUDE_AT_ZERO.value,
                       choices=[c.value for c in Convention])
        p.add_argument("--float", dest="exact", action="store_false",
                       help="big-float arithmetic instead of exact rationals")
        p.add_argument("--mus", nargs="+", default=None)
        p.add_argument("--As", dest="amplitudes", nargs="+", default=None)
        p.add_argument("--points", type=int, default=200)
        p.add_argument("--lambda-max", default=None)
        p.add_argument("--harmonics", type=int, default=5)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    name = args.subcommand
    mu_default, a_default = DEFAULT_PARAMS.get(name, ("1", "1"))
    precision = args.precision
    if precision is None:
        try:
            precision = int(os.environ.get("LPLDE_PRECISION", "256"))
        except ValueError:
            raise ConfigError("LPLDE_PRECISION must be an integer") from None
    return RunConfig(
        subcommand=name,
        family="vdp" if name == "table2" else args.family,
        mu=args.mu if args.mu is not None else mu_default,
        amplitude=args.amplitude if args.amplitude is not None else a_default,
        order=args.order if args.order is not None else DEFAULT_ORDERS.get(name, 10),
        lambda_mode=args.lambda_mode,
        lambda_sq=args.lambda_sq,
        fmt=args.fmt,
        output=args.output,
        precision=precision,
        convention=args.convention,
        exact=args.exact,
        mus=args.mus or [],
        amplitudes=args.amplitudes or [],
        points=args.points,
        lambda_max=args.lambda_max,
        harmonics=args.harmonics,
    )


def render(columns, rows, doc, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def run(cfg: RunConfig) -> str:
    """Execute ``cfg`` and return the rendered output."""
    columns, rows, doc = COMMANDS[cfg.subcommand](cfg)
    text = render(columns, rows, doc, cfg.fmt)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        text = run(cfg)
    except ConfigError as exc:
        print(f"lplde: configuration error: {exc}", file=sys.stderr)
        return 1
    except (LPLDEError, ArithmeticError, ValueError) as exc:
        print(f"lplde: {args.subcommand} failed: {exc}", file=sys.stderr)
        return 2
    if not cfg.output:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Batch command-line front end.

Subcommands:
  codes       list, build, or export the shipped benchmark codes
  simulate    Monte Carlo codeword-error-rate sweep -> CSV + summary table
  verify      decode every (or a sample of) low-weight error pattern(s)
  iter-table  mean BP iterations per injected error weight

All commands are non-interactive. ``simulate`` reads an optional JSON run
config; command-line flags override config values, which override the
builtin defaults (the shipped decoder parameters). Exit codes: 0 success,
1 failure (including a FAIL verdict from verify), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import sim
from .codes import (
    BUILTIN_NAMES,
    CodeValidationError,
    CssCode,
    ManifestError,
    build_builtin,
    load_code,
    save_code,
)
from .decoders import DECODER_NAMES

_DECODER_OPT_KEYS = (
    "max_iters", "alpha", "prior_p", "t_root", "t_branch", "eta",
    "osd_order", "lam", "t1", "t2", "legs", "candidates", "gamma_c", "gamma_w",
)

_SIM_DEFAULTS = {
    "p": "0.01",
    "failures": 100,
    "max_trials": 1_000_000,
    "seed": 0,
    "workers": 1,
    "prior": "marginal",
    "out": "sweep.csv",
}


@dataclass
class RunConfig:
    """Normalized simulate configuration after the three-layer merge."""

    code: str
    decoder: str
    p: str
    failures: int
    max_trials: int
    seed: int
    workers: int
    prior: str
    out: str
    decoder_options: dict

    def normalized(self) -> dict:
        d = asdict(self)
        d["decoder_options"] = dict(sorted(self.decoder_options.items()))
        return d


def resolve_code(spec: str) -> CssCode:
    """A builtin name, else a manifest path."""
    if spec in BUILTIN_NAMES:
        return build_builtin(spec)
    path = Path(spec)
    if path.exists():
        return load_code(path)
    raise CodeValidationError(
        f"unknown code {spec!r}: not a builtin ({', '.join(BUILTIN_NAMES)}) "
        "and no such manifest file"
    )


def merge_run_config(args: argparse.Namespace) -> RunConfig:
    """flag > config file > builtin default."""
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SystemExit(f"error: cannot read config {args.config}: {exc}")

    def pick(key, default):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in file_cfg:
            return file_cfg[key]
        return default

    code = pick("code", None)
    decoder = pick("decoder", None)
    if code is None or decoder is None:
        raise SystemExit("error: --code and --decoder are required (flag or config file)")
    options = {}
    for key in _DECODER_OPT_KEYS:
        val = pick(key, None)
        if val is not None:
            options[key] = val
    return RunConfig(
        code=code,
        decoder=decoder,
        p=str(pick("p", _SIM_DEFAULTS["p"])),
        failures=int(pick("failures", _SIM_DEFAULTS["failures"])),
        max_trials=int(pick("max_trials", _SIM_DEFAULTS["max_trials"])),
        seed=int(pick("seed", _SIM_DEFAULTS["seed"])),
        workers=int(pick("workers", _SIM_DEFAULTS["workers"])),
        prior=str(pick("prior", _SIM_DEFAULTS["prior"])),
        out=str(pick("out", _SIM_DEFAULTS["out"])),
        decoder_options=options,
    )


def _add_decoder_flags(p: argparse.ArgumentParser):
    p.add_argument("--decoder", choices=DECODER_NAMES)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--alpha", type=float, help="fixed min-sum scale; default is the adaptive schedule")
    p.add_argument("--prior-p", dest="prior_p", type=float)
    p.add_argument("--t-root", dest="t_root", type=int)
    p.add_argument("--t-branch", dest="t_branch", type=int)
    p.add_argument("--eta", type=int)
    p.add_argument("--osd-order", dest="osd_order", type=int, choices=(0, 1, 2))
    p.add_argument("--lambda", dest="lam", type=int)
    p.add_argument("--t1", type=int)
    p.add_argument("--t2", type=int)
    p.add_argument("--legs", type=int)
    p.add_argument("--candidates", type=int)
    p.add_argument("--gamma-c", dest="gamma_c", type=float)
    p.add_argument("--gamma-w", dest="gamma_w", type=float)


def _decoder_options(args) -> dict:
    return {k: getattr(args, k) for k in _DECODER_OPT_KEYS if getattr(args, k, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qldpcdec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_codes = sub.add_parser("codes", help="list/build/export benchmark codes")
    codes_sub = p_codes.add_subparsers(dest="codes_command", required=True)
    codes_sub.add_parser("list", help="print the shipped codes")
    p_build = codes_sub.add_parser("build", help="construct and validate one code")
    p_build.add_argument("name")
    p_export = codes_sub.add_parser("export", help="write a code manifest")
    p_export.add_argument("name")
    p_export.add_argument("path")

    p_sim = sub.add_parser("simulate", help="Monte Carlo CER sweep")
    p_sim.add_argument("--config", help="JSON run config (flags override it)")
    p_sim.add_argument("--code")
    p_sim.add_argument("--p", help="comma-separated physical error rates")
    p_sim.add_argument("--failures", type=int)
    p_sim.add_argument("--max-trials", dest="max_trials", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--workers", type=int)
    p_sim.add_argument("--prior", choices=("marginal", "raw-p"))
    p_sim.add_argument("--out")
    _add_decoder_flags(p_sim)

    p_ver = sub.add_parser("verify", help="decode all low-weight patterns")
    p_ver.add_argument("--code", required=True)
    p_ver.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p_ver.add_argument("--samples", type=int, default=10_000)
    p_ver.add_argument("--weights", help="comma list; default 1..t")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--budget", type=int, default=500_000)
    _add_decoder_flags(p_ver)

    p_it = sub.add_parser("iter-table", help="mean BP iterations vs error weight")
    p_it.add_argument("--code", required=True)
    p_it.add_argument("--ne", required=True, help="comma list of error weights")
    p_it.add_argument("--samples", type=int, default=10_000)
    p_it.add_argument("--seed", type=int, default=0)
    p_it.add_argument("--out", help="also write the table as CSV here")
    _add_decoder_flags(p_it)

    return parser


def cmd_codes(args) -> int:
    if args.codes_command == "list":
        for name in BUILTIN_NAMES:
            code = build_builtin(name)
            print(f"{name} {code.params_str()} t={code.t} xi={code.xi}")
        return 0
    if args.codes_command == "build":
        code = resolve_code(args.name)
        print(f"{code.name} {code.params_str()} t={code.t} xi={code.xi} "
              f"Hx={code.H_x.rows}x{code.H_x.cols} Hz={code.H_z.rows}x{code.H_z.cols}")
        return 0
    if args.codes_command == "export":
        code = resolve_code(args.name)
        save_code(code, args.path)
        print(f"wrote {args.path}")
        return 0
    raise AssertionError("unreachable")


def cmd_simulate(args) -> int:
    cfg = merge_run_config(args)
    code = resolve_code(cfg.code)
    if cfg.decoder not in DECODER_NAMES:
        raise SystemExit(f"error: unknown decoder {cfg.decoder!r}")
    try:
        p_list = [float(tok) for tok in cfg.p.split(",") if tok]
    except ValueError:
        raise SystemExit(f"error: bad --p list {cfg.p!r}")
    spec = sim.DecoderSpec.make(cfg.decoder, **cfg.decoder_options)
    spec.build(code)  # fail on bad decoder params before simulating
    points = sim.run_monte_carlo(
        code, spec, p_list, failure_target=cfg.failures, max_trials=cfg.max_trials,
        seed=cfg.seed, workers=cfg.workers, prior_mode=cfg.prior,
    )
    sim.write_sweep_csv(cfg.out, code, cfg.decoder, cfg.seed, points)
    print(f"{'p':>10} {'trials':>9} {'failures':>9} {'cer':>12} "
          f"{'ci_low':>10} {'ci_high':>10} {'bp_iters':>10}")
    for pt in points:
        print(f"{pt.p:>10.6g} {pt.trials:>9} {pt.failures:>9} {pt.cer:>12.4e} "
              f"{pt.ci_low:>10.3e} {pt.ci_high:>10.3e} {pt.mean_bp_iterations:>10.2f}")
    print(f"wrote {cfg.out}")
    return 0


def cmd_verify(args) -> int:
    code = resolve_code(args.code)
    if not args.decoder:
        raise SystemExit("error: --decoder is required")
    weights = [int(w) for w in args.weights.split(",")] if args.weights else None
    spec = sim.DecoderSpec.make(args.decoder, **_decoder_options(args))
    prior_p = args.prior_p if args.prior_p is not None else 0.01
    report = sim.verify_up_to_t(
        code, spec, mode=args.mode, samples=args.samples, seed=args.seed,
        weights=weights, budget=args.budget, prior_p=prior_p,
    )
    print(report.to_text())
    return 0 if report.passed else 1


def cmd_iter_table(args) -> int:
    code = resolve_code(args.code)
    if not args.decoder:
        raise SystemExit("error: --decoder is required")
    n_e_list = [int(tok) for tok in args.ne.split(",") if tok]
    spec = sim.DecoderSpec.make(args.decoder, **_decoder_options(args))
    rows = sim.iteration_table(
        code, spec, n_e_list, samples_per_weight=args.samples, seed=args.seed,
        prior_p=args.prior_p if args.prior_p is not None else 0.01,
    )
    print(f"{'n_e':>5} {'samples':>9} {'mean_bp_iters':>14}")
    for row in rows:
        print(f"{row.n_e:>5} {row.samples:>9} {row.mean_bp_iterations:>14.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("code,decoder,n_e,samples,mean_bp_iters\n")
            for row in rows:
                fh.write(f"{code.name},{args.decoder},{row.n_e},{row.samples},"
                         f"{row.mean_bp_iterations!r}\n")
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "codes":
            return cmd_codes(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "iter-table":
            return cmd_iter_table(args)
    except (CodeValidationError, ManifestError, sim.BudgetExceededError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())

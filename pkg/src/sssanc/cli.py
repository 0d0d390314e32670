"""Command-line entry point: run, theory, gen-noise, oracle.

Exit codes: 0 success, 1 configuration error, 2 every trial diverged,
3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import AllTrialsDiverged, ConfigError, DomainError, IngestionError
from .harness import oracle_agreement, run_experiment, theory_report
from .noise import NoiseSpec, RngStream
from .scenario import _NOISE_KEYS, load_scenario, parse_noise_spec

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3


def _noise_from_arg(text):
    """A noise spec from a file with a [noise] section or 'kind:key=value,...'."""
    p = Path(text)
    if p.is_file():
        return parse_noise_spec(p.read_text(), base_dir=p.parent)
    kind, _, rest = text.partition(":")
    kw = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value in noise spec, got {item!r}")
        key = key.strip()
        if kind in _NOISE_KEYS and key not in _NOISE_KEYS[kind] + ("added_variance",):
            raise ConfigError(f"not a parameter of '{kind}' noise", key=key)
        value = value.strip()
        if key in ("path", "format"):
            kw[key] = value
        elif key == "switch_at":
            kw[key] = int(value)
        else:
            try:
                kw[key] = float(value)
            except ValueError:
                raise ConfigError(f"bad value {value!r}", key=key) from None
    return NoiseSpec(kind=kind.strip(), **kw)


def cmd_run(args):
    scenario = load_scenario(args.scenario)
    out = Path(args.out) if args.out else Path("runs") / scenario.name
    res = run_experiment(scenario, out, seed=args.seed, trials=args.trials,
                         write_trials=not args.aggregate_only)
    anr = res.aggregate["anr_db"]
    tail = anr[-min(1000, len(anr)):]
    print(f"{scenario.name}: {res.used} trials averaged, {res.excluded} excluded "
          f"(diverged: {res.diverged_trials})")
    print(f"final mean ANR over last {len(tail)} iterations: {np.nanmean(tail):.3f} dB")
    print(f"wrote {len(res.files)} files to {out}")
    return EXIT_OK


def cmd_theory(args):
    sys.stdout.write(theory_report(args.L, args.mu, args.sigma_e2, args.sigma_f2))
    return EXIT_OK


def cmd_gen_noise(args):
    spec = _noise_from_arg(args.spec)
    x = spec.generate(args.n, RngStream(args.seed, args.stream).generator(0))
    text = "".join(f"{v!r}\n" for v in x.tolist())
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_oracle(args):
    scenario = load_scenario(args.scenario)
    rep = oracle_agreement(scenario, trial=args.trial, seed=args.seed,
                           iterations=args.iterations)
    print(f"selection agreement: {rep.agreement:.6f} ({rep.matches}/{rep.iterations} ticks)")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the configuration-error code, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="sssanc", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write CSV output")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.add_argument("--aggregate-only", action="store_true",
                   help="skip the per-trial CSV files")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("theory", help="closed-form step-size theory")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma-e2", type=float)
    p.add_argument("--sigma-f2", type=float)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("gen-noise", help="write reference-noise samples as text")
    p.add_argument("spec", help="noise file/scenario, or kind:key=value,...")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_noise)

    p = sub.add_parser("oracle", help="compare diagonal and full-matrix trend selections")
    p.add_argument("scenario")
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AllTrialsDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (IngestionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

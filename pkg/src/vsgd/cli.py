"""Command-line front end: run experiments, sweeps, benchmarks, and checks.

    vsgd run    --optimizer vsgd --problem quad --steps 100 --seed 1 --out d/
    vsgd sweep  --optimizer vsgd --problem logreg --lr 0.001,0.01 \
                --weight-decay 0,0.01 --seed 1,2,3 --steps 500 --out d/
    vsgd verify [--suite oracle]
    vsgd bench  [--problem quad:dim=1000000] [--steps 1000]

A config file (--config FILE, flat key=value lines mirroring the long flag
names) supplies defaults; explicit flags override it.  --out falls back to
the VSGD_OUT_DIR environment variable.  Exit codes: 0 success, 1
verification or run failure, 2 I/O or configuration error.
"""
from __future__ import annotations

import argparse
import itertools
import os
import sys
from dataclasses import dataclass, field

from .config import HyperParams
from .errors import ConfigError
from .harness import OPTIMIZER_NAMES, RunConfig, run, summarize
from .traceio import write_csv
from .verify import SUITES, run_suites

__all__ = ["CliConfig", "parse_args", "main", "entry"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


@dataclass
class CliConfig:
    command: str
    out_dir: str | None = None
    run_configs: list[RunConfig] = field(default_factory=list)
    suites: list[str] | None = None  # verify
    bench_optimizers: tuple[str, str] = ("vsgd", "adam")


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="vsgd", description="Variational SGD experiment runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p: argparse.ArgumentParser, lists: bool) -> None:
        as_list = str if lists else float
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument(
            "--optimizer",
            choices=sorted(OPTIMIZER_NAMES),
            default="vsgd",
        )
        p.add_argument("--problem", default="quad")
        p.add_argument("--lr", type=as_list, default=None, help="learning rate")
        p.add_argument("--gamma", type=float, default=None, help="prior strength")
        p.add_argument("--kg", type=float, default=None, help="variance ratio K_g")
        p.add_argument("--kh", type=float, default=None, help="variance ratio K_h")
        p.add_argument("--kappa1", type=float, default=None)
        p.add_argument("--kappa2", type=float, default=None)
        p.add_argument("--kappa", type=float, default=None)
        p.add_argument("--weight-decay", type=as_list, default=None)
        p.add_argument("--steps", type=int, default=1000)
        p.add_argument("--seed", type=as_list, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--record-stride", type=int, default=1)
        p.add_argument("--scheduler", default="none", help="'none' or 'halve:K'")

    p_run = sub.add_parser("run", help="execute one configured run")
    add_run_flags(p_run, lists=False)

    p_sweep = sub.add_parser(
        "sweep", help="cross-product over comma-separated lr/weight-decay/seed"
    )
    add_run_flags(p_sweep, lists=True)

    p_verify = sub.add_parser("verify", help="run the property suites")
    p_verify.add_argument(
        "--suite", action="append", choices=sorted(SUITES), default=None
    )

    p_bench = sub.add_parser("bench", help="per-step wallclock, vsgd vs adam")
    add_run_flags(p_bench, lists=False)
    p_bench.set_defaults(problem="quad:dim=1000000")
    return parser, {"run": p_run, "sweep": p_sweep, "bench": p_bench}


def _apply_config_file(
    subparsers: dict[str, argparse.ArgumentParser], argv: list[str]
) -> None:
    """Load --config key=value pairs as subparser defaults; flags still win."""
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    known = {
        "optimizer", "problem", "lr", "gamma", "kg", "kh", "kappa1", "kappa2",
        "kappa", "weight_decay", "steps", "seed", "out", "record_stride",
        "scheduler",
    }
    defaults: dict[str, str] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown config line {raw.strip()!r}")
        defaults[key] = value.strip()
    # route through the same type conversions as the flags
    typed: dict[str, object] = {}
    for key, value in defaults.items():
        if key in ("steps", "record_stride"):
            typed[key] = int(value)
        elif key in ("gamma", "kg", "kh", "kappa1", "kappa2", "kappa"):
            typed[key] = float(value)
        elif key in ("lr", "weight_decay", "seed"):
            typed[key] = value  # coerced later; may carry a sweep list
        else:
            typed[key] = value
    # subcommand parsers own the flags, so the defaults must land there
    for p in subparsers.values():
        p.set_defaults(**typed)


def _hp_from_ns(ns, lr: float, weight_decay: float) -> HyperParams:
    kwargs = dict(eta=lr, weight_decay=weight_decay)
    for flag, fieldname in (
        ("gamma", "gamma"),
        ("kg", "k_g"),
        ("kh", "k_h"),
        ("kappa1", "kappa1"),
        ("kappa2", "kappa2"),
        ("kappa", "kappa"),
    ):
        value = getattr(ns, flag)
        if value is not None:
            kwargs[fieldname] = value
    return HyperParams(**kwargs)


def _floats(raw, default: float) -> list[float]:
    if raw is None:
        return [default]
    if isinstance(raw, float):
        return [raw]
    return [float(tok) for tok in str(raw).split(",") if tok != ""]


def _ints(raw, default: int) -> list[int]:
    return [int(v) for v in _floats(raw, float(default))]


def parse_args(argv: list[str]) -> CliConfig:
    """Parse (and fully validate) a command line into a CliConfig.

    argparse usage problems exit with status 2; semantic problems raise
    ConfigError, which main() also maps to exit status 2.
    """
    parser, subparsers = _build_parser()
    _apply_config_file(subparsers, list(argv))
    ns = parser.parse_args(list(argv))

    if ns.command == "verify":
        return CliConfig(command="verify", suites=ns.suite)

    out_dir = ns.out or os.environ.get("VSGD_OUT_DIR") or None
    if ns.command in ("run", "sweep") and not out_dir:
        raise ConfigError("an output directory is required (--out or VSGD_OUT_DIR)")

    lrs = _floats(ns.lr, default=0.01)
    decays = _floats(ns.weight_decay, default=0.0)
    seeds = _ints(ns.seed, default=0)
    if ns.command in ("run", "bench"):
        for name, values in (("--lr", lrs), ("--weight-decay", decays), ("--seed", seeds)):
            if len(values) != 1:
                raise ConfigError(f"{name} takes a single value for {ns.command}")

    configs = [
        RunConfig(
            optimizer=ns.optimizer,
            problem=ns.problem,
            steps=ns.steps,
            seed=seed,
            hp=_hp_from_ns(ns, lr, decay),
            record_stride=ns.record_stride,
            scheduler=ns.scheduler,
        )
        for lr, decay, seed in itertools.product(lrs, decays, seeds)
    ]
    if ns.command == "bench":
        configs = [
            RunConfig(
                optimizer=name,
                problem=ns.problem,
                steps=ns.steps,
                seed=seeds[0],
                hp=_hp_from_ns(ns, lrs[0], decays[0]),
                record_stride=max(ns.steps // 10, 1),
                scheduler=ns.scheduler,
            )
            for name in ("vsgd", "adam")
        ]
    return CliConfig(command=ns.command, out_dir=out_dir, run_configs=configs)


def _slug(config: RunConfig) -> str:
    problem = "".join(c if c.isalnum() else "-" for c in config.problem)
    return (
        f"{config.optimizer}_{problem}_lr{config.hp.eta:g}"
        f"_wd{config.hp.weight_decay:g}_seed{config.seed}"
    )


def _cmd_run(cfg: CliConfig) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    failed = False
    summary_rows = []
    for rc in cfg.run_configs:
        result = run(rc)
        path = os.path.join(cfg.out_dir, _slug(rc) + ".csv")
        write_csv(result.traces, path)
        metrics = summarize(result)
        status = "DIVERGED" if result.diverged else "ok"
        print(
            f"{_slug(rc)}: {status} final_loss={metrics.final_loss:.6g} "
            f"best_loss={metrics.best_loss:.6g} "
            f"sec_per_step={metrics.wallclock_per_step:.3e} -> {path}"
        )
        summary_rows.append((rc, metrics, result.diverged))
        failed = failed or result.diverged
    if len(summary_rows) > 1:
        spath = os.path.join(cfg.out_dir, "sweep_summary.csv")
        with open(spath, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(
                "optimizer,problem,lr,weight_decay,seed,final_loss,best_loss,"
                "sec_per_step,diverged\n"
            )
            for rc, metrics, diverged in summary_rows:
                fh.write(
                    f"{rc.optimizer},{rc.problem},{rc.hp.eta!r},"
                    f"{rc.hp.weight_decay!r},{rc.seed},{metrics.final_loss!r},"
                    f"{metrics.best_loss!r},{metrics.wallclock_per_step!r},"
                    f"{int(diverged)}\n"
                )
        print(f"sweep summary -> {spath}")
    return EXIT_FAILURE if failed else EXIT_OK


def _cmd_verify(cfg: CliConfig) -> int:
    results = run_suites(cfg.suites)
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
        all_ok = all_ok and r.passed
    return EXIT_OK if all_ok else EXIT_FAILURE


def _cmd_bench(cfg: CliConfig) -> int:
    per_step = {}
    for rc in cfg.run_configs:
        result = run(rc)
        metrics = summarize(result)
        per_step[rc.optimizer] = metrics.wallclock_per_step
        print(f"{rc.optimizer}: {metrics.wallclock_per_step * 1e3:.3f} ms/step")
    ratio = per_step["vsgd"] / per_step["adam"]
    print(f"vsgd/adam per-step ratio: {ratio:.3f}")
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        path = os.path.join(cfg.out_dir, "bench.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("optimizer,sec_per_step\n")
            for name, sec in per_step.items():
                fh.write(f"{name},{sec!r}\n")
        print(f"bench table -> {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
        if cfg.command == "verify":
            return _cmd_verify(cfg)
        if cfg.command == "bench":
            return _cmd_bench(cfg)
        return _cmd_run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

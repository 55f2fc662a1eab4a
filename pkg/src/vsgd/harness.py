"""Training loop, trajectory recording, and run metrics.

A RunConfig pins (optimizer, problem, steps, seed, hyperparameters,
scheduler, record stride); ``run`` executes it deterministically — traces
from the same config and seed are bitwise identical — and ``summarize``
reduces a RunResult to scalar metrics.  Runs stop early with a diverged
flag when the loss leaves the finite range.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import baselines, constant, core, second_order
from .config import HyperParams
from .errors import ConfigError
from .problems import Problem, make_problem
from .rng import make_rng

__all__ = [
    "RunConfig",
    "StepTrace",
    "RunResult",
    "Metrics",
    "OPTIMIZER_NAMES",
    "make_stepper",
    "parse_scheduler",
    "run",
    "summarize",
]

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class RunConfig:
    optimizer: str
    problem: str
    steps: int
    seed: int
    hp: HyperParams = field(default_factory=HyperParams)
    record_stride: int = 1
    scheduler: str = "none"
    momentum: float = 0.9  # sgdm only
    beta1: float = 0.9  # adam/amsgrad only
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ConfigError(
                f"unknown optimizer {self.optimizer!r}; expected one of {sorted(OPTIMIZER_NAMES)}"
            )
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.record_stride < 1:
            raise ConfigError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.hp.weight_decay > 0 and self.optimizer != "vsgd":
            raise ConfigError(
                "weight_decay is only supported by the vsgd optimizer"
            )
        parse_scheduler(self.scheduler)  # fail fast on bad specs


@dataclass
class StepTrace:
    """One recorded iteration: scalars only, plus optimizer state summaries."""

    t: int
    loss: float
    grad_norm: float
    theta_norm: float
    mean_b_g: float | None = None
    mean_b_ghat: float | None = None
    mean_sigma2: float | None = None


@dataclass
class RunResult:
    config: RunConfig
    traces: list[StepTrace]
    diverged: bool
    steps_run: int
    initial_loss: float
    wallclock_seconds: float


@dataclass
class Metrics:
    final_loss: float
    best_loss: float
    steps_to_threshold: int | None
    wallclock_per_step: float


def parse_scheduler(spec: str) -> Callable[[int], float]:
    """'none' or 'halve:K' -> per-step learning-rate multiplier."""
    if spec == "none":
        return lambda t: 1.0
    kind, _, arg = spec.partition(":")
    if kind == "halve" and arg:
        try:
            every = int(arg)
        except ValueError:
            every = 0
        if every >= 1:
            return lambda t: 0.5 ** ((t - 1) // every)
    raise ConfigError(f"bad scheduler spec {spec!r}; expected 'none' or 'halve:K'")


class _VsgdStepper:
    def __init__(self, dim: int, cfg: RunConfig):
        self.hp = cfg.hp
        self.state = core.init_state(dim, cfg.hp)

    def step(self, theta, g_hat, eta):
        hp = self.hp if eta == self.hp.eta else replace(self.hp, eta=eta)
        _, theta = core.vsgd_step(self.state, theta, g_hat, hp)
        return theta

    def summaries(self):
        sigma2 = core.state_sigma2(self.state)
        return {
            "mean_b_g": float(np.mean(self.state.b_g)),
            "mean_b_ghat": float(np.mean(self.state.b_ghat)),
            "mean_sigma2": float(np.mean(sigma2)),
        }


class _ConstantVsgdStepper:
    def __init__(self, dim: int, cfg: RunConfig):
        self.hp = cfg.hp
        self.state = constant.init_constant_state(dim, cfg.hp)

    def step(self, theta, g_hat, eta):
        hp = self.hp if eta == self.hp.eta else replace(self.hp, eta=eta)
        _, theta = constant.cvsgd_step(self.state, theta, g_hat, hp)
        return theta

    def summaries(self):
        sigma2 = (self.state.b_ghat / self.state.a_ghat) / (self.hp.k_g + 1.0)
        return {
            "mean_b_ghat": float(np.mean(self.state.b_ghat)),
            "mean_sigma2": float(np.mean(sigma2)),
        }


class _SecondOrderStepper:
    def __init__(self, dim: int, cfg: RunConfig):
        self.hp = cfg.hp
        self.state = second_order.init_so_state(dim, cfg.hp)

    def step(self, theta, g_hat, eta):
        hp = self.hp if eta == self.hp.eta else replace(self.hp, eta=eta)
        _, theta = second_order.so_vsgd_step(self.state, theta, g_hat, hp)
        return theta

    def summaries(self):
        st = self.state
        sigma2_g = st.b_ghat * st.b_g / (st.a * (st.b_ghat + st.b_g))
        return {
            "mean_b_g": float(np.mean(st.b_g)),
            "mean_b_ghat": float(np.mean(st.b_ghat)),
            "mean_sigma2": float(np.mean(sigma2_g)),
        }


class _AdamStepper:
    amsgrad = False

    def __init__(self, dim: int, cfg: RunConfig):
        self.params = baselines.AdamParams(
            eta=cfg.hp.eta, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.adam_eps
        )
        self.state = baselines.init_adam_state(dim, amsgrad=self.amsgrad)

    def step(self, theta, g_hat, eta):
        params = (
            self.params if eta == self.params.eta else replace(self.params, eta=eta)
        )
        step_fn = baselines.amsgrad_step if self.amsgrad else baselines.adam_step
        _, theta = step_fn(self.state, theta, g_hat, params)
        return theta

    def summaries(self):
        return {}


class _AmsgradStepper(_AdamStepper):
    amsgrad = True


class _SgdmStepper:
    def __init__(self, dim: int, cfg: RunConfig):
        self.eta = cfg.hp.eta
        self.momentum = cfg.momentum
        self.state = baselines.init_momentum_state(dim)

    def step(self, theta, g_hat, eta):
        params = baselines.SgdmParams(eta=eta, momentum=self.momentum)
        _, theta = baselines.sgdm_step(self.state, theta, g_hat, params)
        return theta

    def summaries(self):
        return {}


class _SgdStepper:
    def __init__(self, dim: int, cfg: RunConfig):
        pass

    def step(self, theta, g_hat, eta):
        return baselines.sgd_step(theta, g_hat, eta)

    def summaries(self):
        return {}


class _NsgdStepper(_SgdStepper):
    def step(self, theta, g_hat, eta):
        return baselines.normalized_sgd_step(theta, g_hat, eta)


_STEPPERS = {
    "vsgd": _VsgdStepper,
    "constant-vsgd": _ConstantVsgdStepper,
    "so-vsgd": _SecondOrderStepper,
    "adam": _AdamStepper,
    "amsgrad": _AmsgradStepper,
    "sgd": _SgdStepper,
    "sgdm": _SgdmStepper,
    "nsgd": _NsgdStepper,
}
OPTIMIZER_NAMES = frozenset(_STEPPERS)


def make_stepper(name: str, dim: int, cfg: RunConfig):
    try:
        factory = _STEPPERS[name]
    except KeyError:
        raise ConfigError(f"unknown optimizer {name!r}") from None
    return factory(dim, cfg)


def run(config: RunConfig, problem: Problem | None = None) -> RunResult:
    """Execute one configured run; deterministic given (config, seed)."""
    if problem is None:
        problem = make_problem(config.problem)
    scale = parse_scheduler(config.scheduler)
    stepper = make_stepper(config.optimizer, problem.dim, config)
    rng = make_rng(config.seed)
    theta = problem.theta0.astype(np.float64).copy()
    initial_loss = float(problem.loss(theta))

    traces: list[StepTrace] = []
    diverged = False
    steps_run = 0
    start = time.perf_counter()
    for t in range(1, config.steps + 1):
        g_hat = problem.sample_grad(theta, rng)
        theta = stepper.step(theta, g_hat, config.hp.eta * scale(t))
        steps_run = t
        loss = float(problem.loss(theta))
        bad = not np.isfinite(loss) or abs(loss) > DIVERGENCE_LIMIT
        if bad or t % config.record_stride == 0 or t == config.steps:
            traces.append(
                StepTrace(
                    t=t,
                    loss=loss,
                    grad_norm=float(np.linalg.norm(g_hat)),
                    theta_norm=float(np.linalg.norm(theta)),
                    **stepper.summaries(),
                )
            )
        if bad:
            diverged = True
            break
    wallclock = time.perf_counter() - start
    return RunResult(
        config=config,
        traces=traces,
        diverged=diverged,
        steps_run=steps_run,
        initial_loss=initial_loss,
        wallclock_seconds=wallclock,
    )


def summarize(result: RunResult, threshold: float | None = None) -> Metrics:
    """Scalar metrics of a run; pure aggregation over the recorded traces."""
    if not result.traces:
        raise ValueError("cannot summarize a run with no recorded traces")
    losses = [tr.loss for tr in result.traces]
    steps_to_threshold: int | None = None
    if threshold is not None:
        if result.initial_loss < threshold:
            steps_to_threshold = 0
        else:
            steps_to_threshold = next(
                (tr.t for tr in result.traces if tr.loss < threshold), None
            )
    return Metrics(
        final_loss=losses[-1],
        best_loss=min(losses),
        steps_to_threshold=steps_to_threshold,
        wallclock_per_step=result.wallclock_seconds / max(result.steps_run, 1),
    )

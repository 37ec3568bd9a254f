"""Deterministic learning-rate schedules and early stopping.

Two schedulers are modelled as explicit state machines so their trajectories
can be simulated and plotted without running any training:

* the one-cycle policy, which anneals the LR from ``max_lr / div_factor`` up
  to ``max_lr`` over the first ``pct_start`` of the step budget and back down
  to ``max_lr / (div_factor * final_div_factor)``, ignoring every metric; and
* the reduce-on-plateau policy, which multiplies the LR by ``factor`` each
  time the validation loss fails to improve for more than ``epochs_patience``
  consecutive observations.

The one-cycle curve is evaluated on the integer step grid 0..total_steps-1
with the peak placed at ``round(pct_start * (total_steps - 1))``, so the
start, peak and final values are met exactly at grid points.  With the
defaults (75 epochs, one step per epoch, pct_start 0.3) the peak lands on
step 22, i.e. the 23rd epoch.

"Improvement" for the plateau rule means beating the best seen loss by more
than the relative ``threshold`` (equal loss is not an improvement); early
stopping uses plain strict improvement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import NonFiniteLoss, StepOutOfRange

ANNEAL_COSINE = "cosine"
ANNEAL_LINEAR = "linear"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def _check_finite(value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteLoss(f"loss must be finite, got {value}")
    return value


@dataclass(frozen=True)
class OneCycleConfig:
    max_lr: float
    total_epochs: int = 75
    steps_per_epoch: int = 1
    pct_start: float = 0.3
    anneal: str = ANNEAL_COSINE
    div_factor: float = 25.0
    final_div_factor: float = 1e4

    def __post_init__(self):
        _require(self.max_lr > 0, "max_lr must be positive")
        _require(self.total_epochs >= 1, "total_epochs must be positive")
        _require(self.steps_per_epoch >= 1, "steps_per_epoch must be positive")
        _require(0.0 < self.pct_start < 1.0, "pct_start must lie in (0, 1)")
        _require(self.anneal in (ANNEAL_COSINE, ANNEAL_LINEAR),
                 f"anneal must be cosine or linear, got {self.anneal!r}")
        _require(self.div_factor > 1.0, "div_factor must exceed 1")
        _require(self.final_div_factor > 1.0, "final_div_factor must exceed 1")
        _require(self.total_steps >= 3, "schedule needs at least 3 steps")

    @property
    def total_steps(self) -> int:
        return self.total_epochs * self.steps_per_epoch

    @property
    def initial_lr(self) -> float:
        return self.max_lr / self.div_factor

    @property
    def final_lr(self) -> float:
        return self.max_lr / (self.div_factor * self.final_div_factor)

    @property
    def peak_step(self) -> int:
        peak = round(self.pct_start * (self.total_steps - 1))
        return min(max(peak, 1), self.total_steps - 2)


@dataclass(frozen=True)
class PlateauConfig:
    initial_lr: float
    factor: float = 0.1
    epochs_patience: int = 3
    threshold: float = 1e-4
    min_lr: float = 0.0

    def __post_init__(self):
        _require(self.initial_lr > 0, "initial_lr must be positive")
        _require(0.0 < self.factor < 1.0, "factor must lie in (0, 1)")
        _require(self.epochs_patience >= 0, "epochs_patience must be nonnegative")
        _require(self.threshold >= 0.0, "threshold must be nonnegative")
        _require(0.0 <= self.min_lr < self.initial_lr,
                 "min_lr must be nonnegative and below initial_lr")


@dataclass(frozen=True)
class EarlyStopConfig:
    epochs_stop: int = 6

    def __post_init__(self):
        _require(self.epochs_stop >= 1, "epochs_stop must be at least 1")


def _anneal(kind: str, start: float, end: float, pct: float) -> float:
    if pct <= 0.0:
        return start
    if pct >= 1.0:
        return end
    if kind == ANNEAL_COSINE:
        return end + (start - end) / 2.0 * (math.cos(math.pi * pct) + 1.0)
    return start + (end - start) * pct


def one_cycle_lr_at(cfg: OneCycleConfig, step: int) -> float:
    """LR of the one-cycle policy at an integer step, a pure function."""
    if not 0 <= step < cfg.total_steps:
        raise StepOutOfRange(
            f"step {step} outside schedule of {cfg.total_steps} steps")
    peak, last = cfg.peak_step, cfg.total_steps - 1
    if step <= peak:
        return _anneal(cfg.anneal, cfg.initial_lr, cfg.max_lr, step / peak)
    return _anneal(cfg.anneal, cfg.max_lr, cfg.final_lr, (step - peak) / (last - peak))


class OneCycleScheduler:
    """Stateful stepper over the pure one-cycle curve."""

    kind = "one_cycle"

    def __init__(self, config: OneCycleConfig):
        self.config = config
        self.step_count = 0
        self.current_lr = one_cycle_lr_at(config, 0)

    def step(self) -> float:
        """Return the LR for the current step and advance the counter."""
        lr = one_cycle_lr_at(self.config, self.step_count)
        self.current_lr = lr
        self.step_count += 1
        return lr


class PlateauScheduler:
    """Reduce-on-plateau state machine driven by validation-loss observations."""

    kind = "plateau"

    def __init__(self, config: PlateauConfig):
        self.config = config
        self.current_lr = config.initial_lr
        self.best_loss: Optional[float] = None
        self.bad_epochs = 0
        self.step_count = 0

    def _improved(self, val_loss: float) -> bool:
        if self.best_loss is None:
            return True
        return val_loss < self.best_loss * (1.0 - self.config.threshold)

    def observe(self, val_loss: float) -> float:
        """Feed one validation loss; returns the LR in force afterwards."""
        val_loss = _check_finite(val_loss)
        self.step_count += 1
        if self._improved(val_loss):
            self.best_loss = val_loss
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
        if self.bad_epochs > self.config.epochs_patience:
            self.current_lr = max(self.current_lr * self.config.factor,
                                  self.config.min_lr)
            self.bad_epochs = 0
        return self.current_lr


class EarlyStopping:
    """Counts consecutive non-improving epochs; fires at ``epochs_stop``."""

    def __init__(self, config: EarlyStopConfig = EarlyStopConfig()):
        self.config = config
        self.best_loss: Optional[float] = None
        self.streak = 0

    def observe(self, val_loss: float) -> bool:
        """Feed one validation loss; True means training should stop now."""
        val_loss = _check_finite(val_loss)
        if self.best_loss is None or val_loss < self.best_loss:
            self.best_loss = val_loss
            self.streak = 0
            return False
        self.streak += 1
        return self.streak >= self.config.epochs_stop


@dataclass(frozen=True)
class TrajectoryRow:
    epoch: int                      # 1-based
    lr: float
    train_loss: Optional[float]
    val_loss: float
    stopped: bool


Trajectory = list  # list[TrajectoryRow]


def simulate_schedule(
    config: OneCycleConfig | PlateauConfig,
    val_losses: Sequence[float],
    early: Optional[EarlyStopConfig] = None,
    train_losses: Optional[Sequence[float]] = None,
) -> list[TrajectoryRow]:
    """Replay a loss trace through a scheduler, one row per epoch.

    The LR column holds, for the one-cycle policy, the pure curve sampled at
    each epoch's first step (so it never depends on the losses) and, for the
    plateau policy, the LR in force after observing that epoch's loss.  When
    early stopping fires the row is flagged and the trajectory ends there.
    """
    if train_losses is not None and len(train_losses) != len(val_losses):
        raise ValueError("train_losses and val_losses must have equal length")
    if isinstance(config, OneCycleConfig) and len(val_losses) > config.total_epochs:
        raise StepOutOfRange(
            f"trace of {len(val_losses)} epochs exceeds the "
            f"{config.total_epochs}-epoch one-cycle budget")

    plateau = PlateauScheduler(config) if isinstance(config, PlateauConfig) else None
    stopper = EarlyStopping(early) if early is not None else None
    rows: list[TrajectoryRow] = []
    for i, val_loss in enumerate(val_losses):
        val_loss = _check_finite(val_loss)
        if plateau is not None:
            lr = plateau.observe(val_loss)
        else:
            lr = one_cycle_lr_at(config, i * config.steps_per_epoch)
        stopped = stopper.observe(val_loss) if stopper is not None else False
        rows.append(TrajectoryRow(
            epoch=i + 1,
            lr=lr,
            train_loss=None if train_losses is None else float(train_losses[i]),
            val_loss=val_loss,
            stopped=stopped,
        ))
        if stopped:
            break
    return rows

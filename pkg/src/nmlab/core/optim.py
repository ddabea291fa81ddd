"""Full-batch Gradient Descent and Adam, the training loop, and the
seeded multi-trial harness behind the 2-h-1 convergence table.

Trials are identified by (base seed, cell index, trial index); each
trial's initial parameters come from its own SplitMix64 stream, so a
table is a pure function of its ``ExperimentConfig`` no matter how many
worker processes compute it.
"""

from __future__ import annotations

import multiprocessing
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from enum import StrEnum
from typing import Protocol, Self

import numpy as np
import sentry_sdk
import structlog
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from nmlab.core.datasets import BuiltinName, Dataset, Task, builtin
from nmlab.core.exceptions import InvalidInputError
from nmlab.core.logging import logging_settings, setup_logging
from nmlab.core.models import ColumnMeta, ResultTable
from nmlab.core.rng import SplitMix64, mix_seed
from nmlab.core.tinynet import (
    Activation,
    Classifier,
    TwoH1Params,
    predict_proba,
    sigmoid,
    two_h1_flat_loss_and_grad,
)

DEFAULT_MAX_STEPS = 50_000
DEFAULT_GD_LR = {Activation.SIGMOID: 0.5, Activation.RELU: 0.05}
DEFAULT_ADAM_LR = 1e-3
INIT_LOW, INIT_HIGH = -1.0, 1.0
INIT_SCHEME = "iid uniform(-1, 1) from splitmix64(mix(base_seed, cell, trial))"


class OptimizerKind(StrEnum):
    GD = "gd"
    ADAM = "adam"


class SuccessKind(StrEnum):
    ZERO_TRAIN_ERROR = "zero_train_error"
    LOSS_BELOW = "loss_below"


class SuccessRule(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: SuccessKind = SuccessKind.ZERO_TRAIN_ERROR
    threshold: PositiveFloat | None = None

    @model_validator(mode="after")
    def _threshold_required(self) -> Self:
        if self.kind == SuccessKind.LOSS_BELOW and self.threshold is None:
            msg = "loss_below success rule needs a threshold"
            raise ValueError(msg)
        return self

    def satisfied(self, loss: float, logits: np.ndarray, y: np.ndarray) -> bool:
        if self.kind == SuccessKind.LOSS_BELOW:
            assert self.threshold is not None
            return loss < self.threshold
        return bool(np.all((sigmoid(logits) > 0.5) == (y == 1.0)))


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: OptimizerKind = OptimizerKind.GD
    learning_rate: PositiveFloat = DEFAULT_GD_LR[Activation.SIGMOID]
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: PositiveFloat = 1e-8
    max_steps: int = Field(default=DEFAULT_MAX_STEPS, ge=1)
    success_rule: SuccessRule = SuccessRule()
    # one step = one epoch of per-point updates in a seeded order
    stochastic: bool = False

    @classmethod
    def default_for(cls, kind: OptimizerKind, activation: Activation) -> OptimizerConfig:
        lr = DEFAULT_ADAM_LR if kind == OptimizerKind.ADAM else DEFAULT_GD_LR[activation]
        return cls(kind=kind, learning_rate=lr)


class Optimizer(Protocol):
    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray: ...


class GradientDescent:
    def __init__(self, learning_rate: float) -> None:
        self.learning_rate = learning_rate

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return theta - self.learning_rate * grad


class Adam:
    """Adam with bias-corrected moment estimates."""

    def __init__(
        self,
        size: int,
        learning_rate: float = DEFAULT_ADAM_LR,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = np.zeros(size)
        self.v = np.zeros(size)

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return theta - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(cfg: OptimizerConfig, size: int) -> Optimizer:
    if cfg.kind == OptimizerKind.ADAM:
        return Adam(size, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    return GradientDescent(cfg.learning_rate)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


class TrialResult(BaseModel):
    seed: int
    converged: bool
    diverged: bool = False
    final_loss: float | None
    final_accuracy: float
    steps_used: int
    terminal_grad_norm: float | None


def init_params(activation: Activation | str, h: int, seed: int) -> TwoH1Params:
    """2-h-1 parameters drawn iid uniform on [-1, 1] from a SplitMix64 stream."""
    if h < 1:
        msg = f"Hidden width must be >= 1, got {h}"
        raise InvalidInputError(msg)
    theta = SplitMix64(seed).uniform(INIT_LOW, INIT_HIGH, 4 * h + 1)
    return TwoH1Params.from_flat(Activation(activation), h, theta)


def _finite(*values: float | np.ndarray) -> bool:
    return all(bool(np.all(np.isfinite(v))) for v in values)


def train(
    p0: TwoH1Params,
    d: Dataset,
    cfg: OptimizerConfig,
    seed: int = 0,
) -> tuple[TrialResult, TwoH1Params | None]:
    """Run one training trial; returns the result and final parameters.

    The success rule is checked before every update. Non-finite values
    end the trial as diverged and the final parameters are None.
    """
    if d.task != Task.CLASSIFICATION:
        msg = "Training a 2-h-1 classifier needs a classification dataset"
        raise InvalidInputError(msg)
    X, y = d.x, d.y
    activation, h = p0.activation, p0.h
    theta = p0.flatten()
    opt = make_optimizer(cfg, theta.size)
    order_rng = np.random.default_rng(seed) if cfg.stochastic else None

    steps = 0
    converged = False
    diverged = False
    with np.errstate(all="ignore"):
        while True:
            value, grad, logits = two_h1_flat_loss_and_grad(activation, h, theta, X, y)
            if not _finite(value, grad, theta):
                diverged = True
                break
            if cfg.success_rule.satisfied(value, logits, y):
                converged = True
                break
            if steps >= cfg.max_steps:
                break
            if order_rng is not None:
                for i in order_rng.permutation(d.n):
                    _, g_i, _ = two_h1_flat_loss_and_grad(
                        activation, h, theta, X[i : i + 1], y[i : i + 1]
                    )
                    theta = opt.step(theta, g_i)
            else:
                theta = opt.step(theta, grad)
            steps += 1

    if diverged:
        structlog.get_logger().warning("training diverged", seed=seed, step=steps)
        result = TrialResult(
            seed=seed,
            converged=False,
            diverged=True,
            final_loss=None,
            final_accuracy=0.0,
            steps_used=steps,
            terminal_grad_norm=None,
        )
        return result, None

    correct = (sigmoid(logits) > 0.5) == (y == 1.0)
    result = TrialResult(
        seed=seed,
        converged=converged,
        final_loss=value,
        final_accuracy=float(np.mean(correct)),
        steps_used=steps,
        terminal_grad_norm=float(np.linalg.norm(grad)),
    )
    return result, TwoH1Params.from_flat(activation, h, theta)


# ---------------------------------------------------------------------------
# Convergence table
# ---------------------------------------------------------------------------


class ExperimentConfig(BaseModel):
    """Everything a convergence table depends on."""

    model_config = ConfigDict(frozen=True)

    trials: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0)
    h_min: int = Field(default=2, ge=1)
    h_max: int = Field(default=7, ge=1)
    datasets: tuple[BuiltinName, ...] = (BuiltinName.XOR, BuiltinName.FXOR)
    activations: tuple[Activation, ...] = (Activation.RELU, Activation.SIGMOID)
    optimizers: tuple[OptimizerKind, ...] = (OptimizerKind.ADAM, OptimizerKind.GD)
    max_steps: int = Field(default=DEFAULT_MAX_STEPS, ge=1)
    gd_lr_sigmoid: PositiveFloat = DEFAULT_GD_LR[Activation.SIGMOID]
    gd_lr_relu: PositiveFloat = DEFAULT_GD_LR[Activation.RELU]
    adam_lr: PositiveFloat = DEFAULT_ADAM_LR
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: PositiveFloat = 1e-8
    stochastic: bool = False

    @model_validator(mode="after")
    def _check_ranges(self) -> Self:
        if self.h_max < self.h_min:
            msg = f"h_max ({self.h_max}) must be >= h_min ({self.h_min})"
            raise ValueError(msg)
        for name in self.datasets:
            if builtin(name).task != Task.CLASSIFICATION:
                msg = f"Dataset {name} is not a classification dataset"
                raise ValueError(msg)
        return self

    def optimizer_config(self, kind: OptimizerKind, activation: Activation) -> OptimizerConfig:
        if kind == OptimizerKind.ADAM:
            lr = self.adam_lr
        elif activation == Activation.SIGMOID:
            lr = self.gd_lr_sigmoid
        else:
            lr = self.gd_lr_relu
        return OptimizerConfig(
            kind=kind,
            learning_rate=lr,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
            max_steps=self.max_steps,
            stochastic=self.stochastic,
        )

    def cells(self) -> list[Cell]:
        cells = []
        for h in range(self.h_min, self.h_max + 1):
            for dataset in self.datasets:
                for activation in self.activations:
                    for optimizer in self.optimizers:
                        cells.append(
                            Cell(
                                index=len(cells),
                                h=h,
                                dataset=dataset,
                                activation=activation,
                                optimizer=optimizer,
                            )
                        )
        return cells


class Cell(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    h: int
    dataset: BuiltinName
    activation: Activation
    optimizer: OptimizerKind


class CellResult(BaseModel):
    h: int
    dataset: BuiltinName
    activation: Activation
    optimizer: OptimizerKind
    trials: int
    successes: int
    diverged: int
    fraction: float


TABLE_COLUMNS = ("h", "dataset", "activation", "optimizer", "trials", "successes", "fraction")


class ConvergenceTable(BaseModel):
    config: ExperimentConfig
    init_scheme: str = INIT_SCHEME
    cells: list[CellResult]

    def cell(
        self,
        h: int,
        dataset: BuiltinName | str,
        activation: Activation | str,
        optimizer: OptimizerKind | str,
    ) -> CellResult:
        for c in self.cells:
            if (c.h, c.dataset, c.activation, c.optimizer) == (h, dataset, activation, optimizer):
                return c
        msg = f"No cell for h={h} {dataset}/{activation}/{optimizer}"
        raise KeyError(msg)

    def to_result_table(self) -> ResultTable:
        numeric = {"h", "trials", "successes", "fraction"}
        return ResultTable(
            title="2-h-1 convergence rate",
            columns=[
                ColumnMeta(name=name, kind="number" if name in numeric else "text")
                for name in TABLE_COLUMNS
            ],
            rows=[
                (
                    c.h,
                    c.dataset.value,
                    c.activation.value,
                    c.optimizer.value,
                    c.trials,
                    c.successes,
                    c.fraction,
                )
                for c in self.cells
            ],
        )


def trial_seed(base_seed: int, cell_index: int, trial_index: int) -> int:
    return mix_seed(base_seed, cell_index, trial_index)


def run_cell(cfg: ExperimentConfig, cell: Cell) -> CellResult:
    d = builtin(cell.dataset)
    opt_cfg = cfg.optimizer_config(cell.optimizer, cell.activation)
    successes = 0
    diverged = 0
    for trial in range(cfg.trials):
        seed = trial_seed(cfg.seed, cell.index, trial)
        result, _ = train(init_params(cell.activation, cell.h, seed), d, opt_cfg, seed=seed)
        successes += result.converged
        diverged += result.diverged
        structlog.get_logger().debug(
            "trial finished",
            cell=cell.index,
            trial=trial,
            converged=result.converged,
            steps=result.steps_used,
        )
    return CellResult(
        h=cell.h,
        dataset=cell.dataset,
        activation=cell.activation,
        optimizer=cell.optimizer,
        trials=cfg.trials,
        successes=successes,
        diverged=diverged,
        fraction=successes / cfg.trials,
    )


def run_table(cfg: ExperimentConfig, threads: int = 1) -> ConvergenceTable:
    """Compute the full cross-product grid of convergence rates.

    ``threads`` > 1 spreads cells over worker processes; the result is
    identical to the inline run because seeds never depend on scheduling.
    """
    log = structlog.get_logger()
    if threads < 1:
        msg = f"threads must be >= 1, got {threads}"
        raise InvalidInputError(msg)
    cells = cfg.cells()
    log.info("running convergence table", cells=len(cells), trials=cfg.trials, threads=threads)

    with sentry_sdk.start_span(op="table1", description=f"{len(cells)} cells"):
        if threads == 1:
            results = []
            for cell in cells:
                with sentry_sdk.start_span(
                    op="table1.cell",
                    description=f"h={cell.h} {cell.dataset}/{cell.activation}/{cell.optimizer}",
                ):
                    results.append(run_cell(cfg, cell))
        else:
            # spawned workers start with an unconfigured structlog
            with ProcessPoolExecutor(
                max_workers=threads,
                mp_context=multiprocessing.get_context("spawn"),
                initializer=setup_logging,
                initargs=logging_settings(),
            ) as pool:
                results = list(pool.map(run_cell, [cfg] * len(cells), cells))

    for result in results:
        log.info(
            "cell finished",
            h=result.h,
            dataset=result.dataset.value,
            activation=result.activation.value,
            optimizer=result.optimizer.value,
            fraction=result.fraction,
        )

    return ConvergenceTable(config=cfg, cells=results)


# ---------------------------------------------------------------------------
# Decision-surface sampling
# ---------------------------------------------------------------------------


class Grid(BaseModel):
    """Model outputs on a regular grid, row-major with y as the outer index."""

    xs: list[float]
    ys: list[float]
    values: list[list[float]]

    @property
    def resolution(self) -> int:
        return len(self.xs)

    def points(self) -> list[tuple[float, float, float]]:
        return [
            (x, y, self.values[j][i])
            for j, y in enumerate(self.ys)
            for i, x in enumerate(self.xs)
        ]

    def to_result_table(self) -> ResultTable:
        return ResultTable(
            columns=[ColumnMeta(name=n, kind="number") for n in ("x", "y", "output")],
            rows=self.points(),
        )

    def affine_r2(
        self, box: tuple[float, float, float, float] | None = None
    ) -> float:
        """R^2 of the best affine fit a + b*x + c*y over grid points in box.

        A constant grid is reported as perfectly affine.
        """
        pts = np.array(self.points())
        if box is not None:
            x_min, x_max, y_min, y_max = box
            keep = (
                (pts[:, 0] >= x_min)
                & (pts[:, 0] <= x_max)
                & (pts[:, 1] >= y_min)
                & (pts[:, 1] <= y_max)
            )
            pts = pts[keep]
        if pts.shape[0] < 3:
            msg = "Affine fit needs at least 3 grid points inside the box"
            raise InvalidInputError(msg)
        design = np.column_stack([np.ones(pts.shape[0]), pts[:, 0], pts[:, 1]])
        target = pts[:, 2]
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        ss_res = float(np.sum((target - design @ coef) ** 2))
        ss_tot = float(np.sum((target - target.mean()) ** 2))
        if ss_tot == 0.0:
            return 1.0
        return 1.0 - ss_res / ss_tot


def sample_grid(
    p: Classifier,
    bounds: Sequence[float],
    resolution: int,
) -> Grid:
    """Evaluate a 2-input classifier on a resolution x resolution grid.

    bounds is (x_min, x_max, y_min, y_max); endpoints are included.
    """
    if resolution < 2:
        msg = f"Grid resolution must be >= 2, got {resolution}"
        raise InvalidInputError(msg)
    if len(bounds) != 4:
        msg = f"Bounds must be (x_min, x_max, y_min, y_max), got {list(bounds)}"
        raise InvalidInputError(msg)
    x_min, x_max, y_min, y_max = (float(b) for b in bounds)
    if not (x_min < x_max and y_min < y_max):
        msg = f"Empty bounds box {list(bounds)}"
        raise InvalidInputError(msg)
    xs = np.linspace(x_min, x_max, resolution)
    ys = np.linspace(y_min, y_max, resolution)
    gx, gy = np.meshgrid(xs, ys)
    X = np.column_stack([gx.ravel(), gy.ravel()])
    out = predict_proba(p, X).reshape(resolution, resolution)
    return Grid(xs=xs.tolist(), ys=ys.tolist(), values=out.tolist())

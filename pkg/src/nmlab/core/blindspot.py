"""Blind spots of deep ReLU regression and the escape from them.

A layer is saturated when every unit's pre-activation is strictly
negative on every datapoint. Then no gradient reaches that layer or
anything before it, the model output is the same for every input, and
training can at best move that constant to the label mean. On a decent
dataset ``construct_better`` builds parameters that beat the mean.

Layers are numbered from 1 (W_1, b_1 is the first layer); datapoint
indices are 0-based.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import structlog
from pydantic import BaseModel

from nmlab.core.datasets import Dataset, input_groups, is_decent, mean_label
from nmlab.core.exceptions import ArchitectureError, InvalidInputError, NotDecentError
from nmlab.core.models import DeepReluWeights, deep_weights
from nmlab.core.optim import OptimizerConfig, OptimizerKind, SuccessKind, make_optimizer
from nmlab.core.tinynet import (
    DeepReluParams,
    deep_pre_activations,
    deep_relu_loss,
    deep_relu_outputs,
    grad_deep_relu_loss,
)

MIN_FIRST_WIDTH = 3
SEPARATION_MARGIN = 2.5
TIE_TOL = 1e-9
DEFAULT_PROBE_STEPS = 5000
_MAX_DIRECTION_DRAWS = 1000


def detect_saturation(p: DeepReluParams, d: Dataset) -> list[int]:
    """1-based indices of ReLU layers dead on the whole dataset."""
    return [
        n
        for n, pre in enumerate(deep_pre_activations(p, d.x), start=1)
        if bool(np.all(pre < 0.0))
    ]


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


class DeepTrainResult(BaseModel):
    steps_used: int
    final_loss: float
    diverged: bool = False


def train_deep_relu(
    p: DeepReluParams, d: Dataset, cfg: OptimizerConfig
) -> tuple[DeepReluParams, DeepTrainResult]:
    """Full-batch training on the squared-error loss for cfg.max_steps steps.

    Stops early only under a loss_below success rule. On divergence the
    last finite parameters are returned.
    """
    theta = p.flatten()
    opt = make_optimizer(cfg, theta.size)
    rule = cfg.success_rule
    current = p
    value = deep_relu_loss(p, d)
    steps = 0
    diverged = False
    with np.errstate(all="ignore"):
        while steps < cfg.max_steps:
            if rule.kind == SuccessKind.LOSS_BELOW and rule.threshold is not None:
                if value < rule.threshold:
                    break
            theta = opt.step(theta, grad_deep_relu_loss(current, d))
            if not np.all(np.isfinite(theta)):
                diverged = True
                break
            current = p.with_flat(theta)
            value = deep_relu_loss(current, d)
            steps += 1
            if not np.isfinite(value):
                diverged = True
                break
    if diverged:
        structlog.get_logger().warning("deep relu training diverged", step=steps)
    return current, DeepTrainResult(steps_used=steps, final_loss=value, diverged=diverged)


class SaturationProbeReport(BaseModel):
    saturated_layers: list[int]
    probed_layer: int
    steps: int
    learning_rate: float
    frozen_unchanged: bool
    output_constant: bool
    constant_output: float
    mean_label: float
    mean_gap: float
    initial_loss: float
    final_loss: float


def probe_learning_rate(p: DeepReluParams, d: Dataset, layer: int) -> float:
    """lr = 0.1 / (N (1 + S)), S the squared norm of layers after ``layer``."""
    downstream = sum(
        float(np.sum(W * W) + np.sum(b * b)) for W, b in p.layers[layer:]
    )
    return 0.1 / (d.n * (1.0 + downstream))


def saturated_training_probe(
    p: DeepReluParams,
    d: Dataset,
    steps: int = DEFAULT_PROBE_STEPS,
    learning_rate: float | None = None,
    optimizer: OptimizerKind = OptimizerKind.GD,
) -> SaturationProbeReport:
    """Train from a saturated point and report what moved.

    The saturated layer's weights must come back unchanged and the output
    must be the same for every datapoint; after enough steps that constant
    approaches the label mean.
    """
    saturated = detect_saturation(p, d)
    if not saturated:
        msg = "No saturated layer: the saturated training probe needs a blind-spot start"
        raise InvalidInputError(msg)
    if steps < 0:
        msg = f"steps must be >= 0, got {steps}"
        raise InvalidInputError(msg)
    layer = saturated[0]
    lr = learning_rate if learning_rate is not None else probe_learning_rate(p, d, layer)

    trained = p
    if steps > 0:
        cfg = OptimizerConfig(kind=optimizer, learning_rate=lr, max_steps=steps)
        trained, _ = train_deep_relu(p, d, cfg)

    W0, b0 = p.layers[layer - 1]
    W1, b1 = trained.layers[layer - 1]
    out = deep_relu_outputs(trained, d.x)
    target = mean_label(d)
    report = SaturationProbeReport(
        saturated_layers=saturated,
        probed_layer=layer,
        steps=steps,
        learning_rate=lr,
        frozen_unchanged=bool(np.array_equal(W0, W1) and np.array_equal(b0, b1)),
        output_constant=bool(np.all(out == out[0])),
        constant_output=float(out[0]),
        mean_label=target,
        mean_gap=abs(float(out[0]) - target),
        initial_loss=deep_relu_loss(p, d),
        final_loss=deep_relu_loss(trained, d),
    )
    structlog.get_logger().info(
        "saturated training probe",
        layer=layer,
        frozen=report.frozen_unchanged,
        constant=report.output_constant,
        mean_gap=report.mean_gap,
    )
    return report


# ---------------------------------------------------------------------------
# Escaping the blind spot
# ---------------------------------------------------------------------------


def _others(d: Dataset, r: int) -> np.ndarray:
    key = d.x[r].tobytes()
    return np.array([row.tobytes() != key for row in d.x])


def find_separating_vector(d: Dataset, r: int, seed: int = 0) -> tuple[np.ndarray, float]:
    """v and gamma = v.x_r with |v.(x_s - x_r)| > 2 for every x_s != x_r.

    1-D data uses u = 1; otherwise random unit directions are drawn until
    no projection ties x_r within TIE_TOL. v is u scaled so the smallest
    projected gap becomes SEPARATION_MARGIN.
    """
    if not 0 <= r < d.n:
        msg = f"Witness index {r} out of range for {d.n} points"
        raise InvalidInputError(msg)
    x_r = d.x[r]
    diffs = d.x[_others(d, r)] - x_r
    if diffs.shape[0] == 0:
        v = np.zeros(d.d)
        v[0] = 1.0
        return v, float(v @ x_r)

    if d.d == 1:
        u = np.array([1.0])
        gap = float(np.min(np.abs(diffs @ u)))
    else:
        rng = np.random.default_rng(seed)
        best_u: np.ndarray | None = None
        gap = 0.0
        for _ in range(_MAX_DIRECTION_DRAWS):
            cand = rng.standard_normal(d.d)
            cand /= np.linalg.norm(cand)
            cand_gap = float(np.min(np.abs(diffs @ cand)))
            if cand_gap > gap:
                best_u, gap = cand, cand_gap
            if cand_gap > TIE_TOL:
                break
        if best_u is None or gap <= 0.0:
            msg = f"Could not separate point {r} from the rest of the dataset"
            raise InvalidInputError(msg)
        u = best_u
    v = (SEPARATION_MARGIN / gap) * u
    return v, float(v @ x_r)


def _group_means(d: Dataset, r: int) -> tuple[float, float]:
    """(nu, mu): label mean on the x_r group and on everything else."""
    groups = input_groups(d)
    members = groups[d.x[r].tobytes()]
    mask = np.zeros(d.n, dtype=bool)
    mask[members] = True
    nu = float(np.mean(d.y[mask]))
    mu = float(np.mean(d.y[~mask]))
    return nu, mu


def construct_better(
    d: Dataset,
    arch: DeepReluParams | Sequence[int],
    seed: int = 0,
) -> DeepReluParams:
    """Parameters outputting nu on the witness group and mu elsewhere.

    ``arch`` is either a parameter object whose shape is reused or the
    list of hidden widths (first width >= 3). Layers after the second
    carry the signal shifted by 1 + |mu| + |nu| so identity ReLU layers
    pass it unchanged; the final layer removes the shift.
    """
    hidden = list(arch.widths[:-1]) if isinstance(arch, DeepReluParams) else list(arch)
    if isinstance(arch, DeepReluParams) and arch.input_dim != d.d:
        msg = f"Architecture expects {arch.input_dim}-D inputs, dataset has d={d.d}"
        raise ArchitectureError(msg)
    if not hidden or hidden[0] < MIN_FIRST_WIDTH:
        msg = f"First hidden layer needs at least {MIN_FIRST_WIDTH} units, got {hidden[:1]}"
        raise ArchitectureError(msg)
    if any(w < 1 for w in hidden):
        msg = f"Hidden widths must be positive, got {hidden}"
        raise ArchitectureError(msg)

    decent, r = is_decent(d)
    if not decent or r is None:
        msg = "Dataset is not decent: every input group has the global label mean"
        raise NotDecentError(msg)
    nu, mu = _group_means(d, r)
    if nu == mean_label(d):
        msg = "Witness group mean equals the global mean"
        raise NotDecentError(msg)

    v, gamma = find_separating_vector(d, r, seed)
    m1 = hidden[0]
    W1 = np.zeros((m1, d.d))
    b1 = np.full(m1, -1.0)
    W1[0], W1[1], W1[2] = v, 2.0 * v, v
    b1[:3] = (-gamma + 1.0, -2.0 * gamma, -gamma - 1.0)
    first_row = np.zeros(m1)
    first_row[:3] = (nu - mu, mu - nu, nu - mu)

    layers: list[tuple[np.ndarray, np.ndarray]] = [(W1, b1)]
    if len(hidden) == 1:
        layers.append((first_row.reshape(1, m1), np.array([mu])))
        return DeepReluParams(layers=tuple(layers))

    offset = 1.0 + abs(mu) + abs(nu)
    W2 = np.zeros((hidden[1], m1))
    b2 = np.full(hidden[1], -1.0)
    W2[0] = first_row
    b2[0] = mu + offset
    layers.append((W2, b2))
    for prev, width in zip(hidden[1:-1], hidden[2:], strict=True):
        W = np.zeros((width, prev))
        b = np.full(width, -1.0)
        W[0, 0] = 1.0
        b[0] = 0.0
        layers.append((W, b))
    W_out = np.zeros((1, hidden[-1]))
    W_out[0, 0] = 1.0
    layers.append((W_out, np.array([-offset])))
    return DeepReluParams(layers=tuple(layers))


class BlindSpotReport(BaseModel):
    saturated_layers: list[int]
    is_decent: bool
    witness_r: int | None
    mean_label: float
    loss_at_theta: float
    mean_predictor_loss: float
    nu: float | None = None
    mu: float | None = None
    loss_at_constructed: float | None = None
    constructed: DeepReluWeights | None = None
    note: str | None = None
    probe: SaturationProbeReport | None = None


def analyze(p: DeepReluParams, d: Dataset, seed: int = 0) -> BlindSpotReport:
    """Saturation, decency and, when it helps, the constructed escape."""
    saturated = detect_saturation(p, d)
    decent, r = is_decent(d)
    ybar = mean_label(d)
    base = deep_relu_loss(p, d)
    report = BlindSpotReport(
        saturated_layers=saturated,
        is_decent=decent,
        witness_r=r,
        mean_label=ybar,
        loss_at_theta=base,
        mean_predictor_loss=float(np.sum((d.y - ybar) ** 2)),
    )
    if not decent or r is None:
        report.note = "dataset is not decent; the mean predictor cannot be beaten this way"
        return report
    if p.k < 2 or p.widths[0] < MIN_FIRST_WIDTH:
        report.note = f"first layer has fewer than {MIN_FIRST_WIDTH} units"
        return report

    better = construct_better(d, p, seed)
    better_loss = deep_relu_loss(better, d)
    report.nu, report.mu = _group_means(d, r)
    if better_loss < base:
        report.loss_at_constructed = better_loss
        report.constructed = deep_weights(better)
    else:
        report.note = "parameters already beat the constructed point"
    return report

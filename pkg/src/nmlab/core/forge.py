"""Counterexample forging: move the datapoints until fixed weights are critical.

The objective is F(d) = ||grad_p L(p_fixed, d)||^2. Its gradient over the
data coordinates is taken by central finite differences, and plain
gradient descent with a halving line search drives it toward zero.
Labels never move. The weights are classified spectrally afterwards.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Literal

import numpy as np
import sentry_sdk
import structlog
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat

from nmlab.core.certify import (
    DEFAULT_TOL_EIG_REL,
    DEFAULT_TOL_GRAD,
    Certificate,
    classify_critical,
)
from nmlab.core.datasets import Dataset, DatasetFile, Task, from_model, to_model
from nmlab.core.exceptions import InvalidInputError, NonSmoothPointError
from nmlab.core.tinynet import gradient, kink_points, loss

if TYPE_CHECKING:
    from nmlab.core.tinynet import ParamVector

DESCENT_TOL = 1e-12


class ForgeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    step_size: PositiveFloat = 10.0
    max_iters: int = Field(default=100_000, ge=0)
    target_gradnorm: PositiveFloat = 1e-8
    fd_step: PositiveFloat = 1e-6
    # labels are never optimized; kept so reports state it
    freeze_labels: Literal[True] = True
    max_halvings: int = Field(default=60, ge=1)
    log_every: int = Field(default=1000, ge=1)


class ForgeResult(BaseModel):
    dataset: DatasetFile
    objective_trace: list[float]
    final_gradnorm: float
    iterations: int
    converged: bool
    stalled: bool = False
    certificate: Certificate | None = None
    certificate_error: str | None = None

    def final_dataset(self) -> Dataset:
        return from_model(self.dataset)


def grad_norm_objective(p_fixed: ParamVector, d: Dataset) -> float:
    """Squared Euclidean norm of the weight gradient at p_fixed."""
    kinks = kink_points(p_fixed, d)
    if kinks:
        point, unit = kinks[0]
        raise NonSmoothPointError(point, unit)
    g = gradient(p_fixed, d)
    return float(g @ g)


def data_gradient(p_fixed: ParamVector, d: Dataset, fd_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the objective over all input coordinates.

    Returned with the shape of ``d.x``.
    """
    x = d.x
    flat = x.ravel()
    grad = np.empty_like(flat)
    for k in range(flat.size):
        up = flat.copy()
        down = flat.copy()
        up[k] += fd_step
        down[k] -= fd_step
        f_up = grad_norm_objective(p_fixed, d.with_inputs(up.reshape(x.shape)))
        f_down = grad_norm_objective(p_fixed, d.with_inputs(down.reshape(x.shape)))
        grad[k] = (f_up - f_down) / (2.0 * fd_step)
    return grad.reshape(x.shape)


def _try_objective(p_fixed: ParamVector, d: Dataset, x: np.ndarray) -> float | None:
    if not np.all(np.isfinite(x)):
        return None
    try:
        value = grad_norm_objective(p_fixed, d.with_inputs(x))
    except NonSmoothPointError:
        return None
    return value if np.isfinite(value) else None


def forge(
    p_fixed: ParamVector,
    d0: Dataset,
    cfg: ForgeConfig | None = None,
    tol_grad: float = DEFAULT_TOL_GRAD,
    tol_eig_rel: float = DEFAULT_TOL_EIG_REL,
) -> ForgeResult:
    """Descend F over the data until ||grad|| < target or the budget runs out.

    Every accepted step satisfies F_new <= F_old; a step is halved until
    that holds and reset to ``cfg.step_size`` on the next iteration.
    """
    cfg = cfg or ForgeConfig()
    log = structlog.get_logger()
    target = cfg.target_gradnorm**2

    d = d0
    value = grad_norm_objective(p_fixed, d)
    trace = [value]
    iterations = 0
    stalled = False

    with sentry_sdk.start_span(op="forge", description=f"{d0.n} points"):
        while value >= target and iterations < cfg.max_iters:
            g = data_gradient(p_fixed, d, cfg.fd_step)
            if not np.any(g):
                stalled = True
                break
            step = cfg.step_size
            accepted: tuple[np.ndarray, float] | None = None
            for _ in range(cfg.max_halvings):
                candidate = d.x - step * g
                new_value = _try_objective(p_fixed, d, candidate)
                if new_value is not None and new_value <= value:
                    accepted = (candidate, new_value)
                    break
                step /= 2.0
            if accepted is None:
                stalled = True
                break
            d = d.with_inputs(accepted[0])
            value = accepted[1]
            trace.append(value)
            iterations += 1
            if iterations % cfg.log_every == 0:
                log.debug("forge progress", iteration=iterations, objective=value, step=step)

    converged = value < target
    certificate = None
    certificate_error = None
    try:
        certificate = classify_critical(p_fixed, d, tol_grad=tol_grad, tol_eig_rel=tol_eig_rel)
    except NonSmoothPointError as exc:
        certificate_error = exc.message

    log.info(
        "forge finished",
        iterations=iterations,
        converged=converged,
        stalled=stalled,
        gradnorm=float(np.sqrt(value)),
        classification=certificate.classification.value if certificate else None,
    )
    return ForgeResult(
        dataset=to_model(d),
        objective_trace=trace,
        final_gradnorm=float(np.sqrt(value)),
        iterations=iterations,
        converged=converged,
        stalled=stalled,
        certificate=certificate,
        certificate_error=certificate_error,
    )


# ---------------------------------------------------------------------------
# Starting configurations
# ---------------------------------------------------------------------------


def perturb_dataset(d: Dataset, eps: float, seed: int) -> Dataset:
    """Add iid uniform(-eps, eps) noise to every input coordinate."""
    if eps < 0:
        msg = f"Perturbation radius must be >= 0, got {eps}"
        raise InvalidInputError(msg)
    rng = np.random.default_rng(seed)
    return d.with_inputs(d.x + rng.uniform(-eps, eps, size=d.x.shape))


def random_dataset(n: int, seed: int, box: float = 5.0) -> Dataset:
    """n points uniform in [-box, box]^2, first half labelled 1."""
    if n < 2:
        msg = f"A random classification start needs at least 2 points, got {n}"
        raise InvalidInputError(msg)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box, box, size=(n, 2))
    y = np.where(np.arange(n) < (n + 1) // 2, 1.0, 0.0)
    return Dataset(x=x, y=y, task=Task.CLASSIFICATION)


# ---------------------------------------------------------------------------
# Escape probe
# ---------------------------------------------------------------------------


class ProbeReport(BaseModel):
    radius: float
    base_loss: float
    random_directions: int
    random_descending: int
    coordinate_directions: int
    coordinate_descending: int
    min_delta: float

    @property
    def descending(self) -> int:
        return self.random_descending + self.coordinate_descending

    @property
    def fraction_descending(self) -> float:
        total = self.random_directions + self.coordinate_directions
        return self.descending / total if total else 0.0


def escape_probe(
    p: ParamVector,
    d: Dataset,
    n_directions: int = 10_000,
    radius: float = 1e-3,
    seed: int = 0,
    descent_tol: float = DESCENT_TOL,
) -> ProbeReport:
    """Count directions along which the loss drops by more than descent_tol.

    Probes n_directions random unit directions plus +/- every coordinate
    axis, all scaled to ``radius``.
    """
    if n_directions < 0 or radius < 0:
        msg = "n_directions and radius must be non-negative"
        raise InvalidInputError(msg)
    theta = p.flatten()
    base = loss(p, d)
    rng = np.random.default_rng(seed)

    def delta_at(direction: np.ndarray) -> float:
        return loss(p.with_flat(theta + radius * direction), d) - base

    random_deltas = []
    for _ in range(n_directions):
        u = rng.standard_normal(theta.size)
        u /= np.linalg.norm(u)
        random_deltas.append(delta_at(u))

    coord_deltas = []
    for k in range(theta.size):
        for sign in (1.0, -1.0):
            e = np.zeros(theta.size)
            e[k] = sign
            coord_deltas.append(delta_at(e))

    all_deltas = random_deltas + coord_deltas
    return ProbeReport(
        radius=radius,
        base_loss=base,
        random_directions=n_directions,
        random_descending=sum(delta < -descent_tol for delta in random_deltas),
        coordinate_directions=len(coord_deltas),
        coordinate_descending=sum(delta < -descent_tol for delta in coord_deltas),
        min_delta=min(all_deltas),
    )

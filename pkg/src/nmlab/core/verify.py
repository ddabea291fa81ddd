"""Self-contained checks of the embedded minima and constructions.

Each claim is re-derived from the constants in ``nmlab.core.constants``
and the builtin datasets; nothing is read from disk. Failures are data
(``ClaimStatus.FAILED``), never exceptions.
"""

from __future__ import annotations

from collections.abc import Callable
from enum import StrEnum
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, Field

from nmlab.core import constants as K
from nmlab.core.blindspot import (
    construct_better,
    detect_saturation,
    saturated_training_probe,
    train_deep_relu,
)
from nmlab.core.certify import (
    Classification,
    certify_relu_min_exact,
    classify_critical,
    region_least_squares,
)
from nmlab.core.datasets import BuiltinName, Dataset, Task, builtin, mean_label
from nmlab.core.exit_codes import ExitCode
from nmlab.core.forge import escape_probe
from nmlab.core.optim import OptimizerConfig
from nmlab.core.tinynet import (
    DeepReluParams,
    ReluRegParams,
    Sigmoid221Params,
    accuracy,
    deep_relu_loss,
    deep_relu_outputs,
    likelihood,
    nll_loss,
    relu_loss,
)


class ClaimId(StrEnum):
    THM1 = "thm1"
    PROP1 = "prop1"
    PROP2 = "prop2"
    PROP3 = "prop3"
    BLINDSPOT = "blindspot"
    LEMMA1 = "lemma1"


class ClaimStatus(StrEnum):
    CONFIRMED = "confirmed"
    CONFIRMED_WITH_CORRECTION = "confirmed_with_correction"
    FAILED = "failed"


class Correction(BaseModel):
    """A substitution applied to a printed point, with both evaluations."""

    target: str
    substitution: str
    before: dict[str, Any]
    after: dict[str, Any]


class VerificationReport(BaseModel):
    claim: ClaimId
    status: ClaimStatus
    summary: str
    details: dict[str, Any] = Field(default_factory=dict)
    corrections: list[Correction] = Field(default_factory=list)

    @property
    def exit_code(self) -> ExitCode:
        if self.status == ClaimStatus.FAILED:
            return ExitCode.GENERAL_ERROR
        return ExitCode.SUCCESS


def _close(value: float, expected: float, tol: float) -> bool:
    return abs(value - expected) <= tol


def _sigmoid_point(p: Sigmoid221Params, d: Dataset) -> dict[str, float]:
    return {
        "loss": nll_loss(p, d),
        "likelihood": likelihood(p, d),
        "accuracy": accuracy(p, d),
    }


def _status(ok: bool, corrected: bool = False) -> ClaimStatus:
    if not ok:
        return ClaimStatus.FAILED
    return ClaimStatus.CONFIRMED_WITH_CORRECTION if corrected else ClaimStatus.CONFIRMED


def _probe(p: ReluRegParams, d: Dataset, n_directions: int) -> dict[str, Any]:
    report = escape_probe(p, d, n_directions=n_directions, radius=K.PROBE_RADIUS)
    return {
        "radius": report.radius,
        "directions": report.random_directions + report.coordinate_directions,
        "descending": report.descending,
        "min_delta": report.min_delta,
    }


# ---------------------------------------------------------------------------
# Claims
# ---------------------------------------------------------------------------


def _sigmoid_points(
    hat: Sigmoid221Params, zero: Sigmoid221Params, d: Dataset
) -> dict[str, dict[str, Any]]:
    return {
        "w_hat": _sigmoid_point(hat, d)
        | {"classification": classify_critical(hat, d).classification.value},
        "w_zero": _sigmoid_point(zero, d),
    }


def verify_thm1(n_directions: int = K.PROBE_DIRECTIONS) -> VerificationReport:
    """2-2-1 sigmoid minimum on sigmoid10 plus the better non-critical point.

    The printed points are tried first; when they miss the printed loss
    or are not a minimum, the transposed reading is used and reported as
    a correction. The printed Hessian spectrum is compared but does not
    decide the status beyond marking it corrected.
    """
    d = builtin(BuiltinName.SIGMOID10)
    corrections: list[Correction] = []

    printed = _sigmoid_points(K.W_HAT_PRINTED, K.W_ZERO_PRINTED, d)
    hat_p, zero_p, stalled_p = K.W_HAT_PRINTED, K.W_ZERO_PRINTED, K.W_STALLED_PRINTED
    printed_ok = (
        printed["w_hat"]["classification"] == Classification.LOCAL_MINIMUM.value
        and _close(printed["w_hat"]["loss"], K.W_HAT_LOSS, K.SIGMOID_LOSS_TOL)
        and _close(printed["w_zero"]["loss"], K.W_ZERO_LOSS, K.SIGMOID_LOSS_TOL)
    )
    if not printed_ok:
        hat_p, zero_p, stalled_p = K.W_HAT, K.W_ZERO, K.W_STALLED
        corrections.append(
            Correction(
                target="sigmoid points",
                substitution=K.SIGMOID_CORRECTION,
                before=printed,
                after=_sigmoid_points(hat_p, zero_p, d),
            )
        )

    cert = classify_critical(hat_p, d)
    zero_cert = classify_critical(zero_p, d)
    hat = _sigmoid_point(hat_p, d)
    zero = _sigmoid_point(zero_p, d)
    stalled = _sigmoid_point(stalled_p, d)

    expected = np.array(K.W_HAT_HESSIAN_EIGENVALUES)
    got = np.array(cert.eigenvalues)
    rel_err = np.abs(got - expected) / np.abs(expected)
    spectrum_reproduced = bool(np.all(rel_err <= K.SPECTRUM_REL_TOL))

    checks = {
        "local_minimum": cert.classification == Classification.LOCAL_MINIMUM,
        "loss": _close(hat["loss"], K.W_HAT_LOSS, K.SIGMOID_LOSS_TOL),
        "accuracy": hat["accuracy"] == K.W_HAT_ACCURACY,
        "better_point_loss": _close(zero["loss"], K.W_ZERO_LOSS, K.SIGMOID_LOSS_TOL),
        "better_point_accuracy": zero["accuracy"] == K.W_ZERO_ACCURACY,
        "better_point_not_critical": zero_cert.classification == Classification.NOT_CRITICAL,
        "not_global": zero["loss"] < hat["loss"],
    }
    stalled_matches = _close(
        stalled["loss"], K.W_STALLED_LOSS, K.SIGMOID_LOSS_TOL
    ) and stalled["accuracy"] == K.W_STALLED_ACCURACY
    ok = all(checks.values())
    if ok and not spectrum_reproduced:
        structlog.get_logger().warning(
            "printed hessian spectrum not reproduced",
            max_relative_error=float(np.max(rel_err)),
        )
    return VerificationReport(
        claim=ClaimId.THM1,
        status=_status(ok, corrected=bool(corrections) or not spectrum_reproduced),
        summary=(
            f"W_hat {cert.classification.value}, loss {hat['loss']:.6f}, "
            f"accuracy {hat['accuracy']:.1f}; better point loss {zero['loss']:.6f}; "
            f"printed spectrum {'reproduced' if spectrum_reproduced else 'not reproduced'}"
        ),
        details={
            "checks": checks,
            "certificate": cert.model_dump(mode="json"),
            "w_hat": hat,
            "spectrum": {
                "printed": list(K.W_HAT_HESSIAN_EIGENVALUES),
                "computed": got.tolist(),
                "relative_error": rel_err.tolist(),
                "reproduced": spectrum_reproduced,
            },
            "w_zero": zero | {"classification": zero_cert.classification.value},
            # auxiliary: reported, never patched, does not affect status
            "stalled_point": stalled | {"matches_printed": stalled_matches},
        },
        corrections=corrections,
    )


def verify_prop1(n_directions: int = K.PROBE_DIRECTIONS) -> VerificationReport:
    d = builtin(BuiltinName.D1)
    minimum_loss = relu_loss(K.D1_MINIMUM, d)
    comparator_loss = relu_loss(K.D1_COMPARATOR, d)
    proof = certify_relu_min_exact(K.D1_MINIMUM, d)
    comparator_proof = certify_relu_min_exact(K.D1_COMPARATOR, d)
    checks = {
        "minimum_loss": _close(minimum_loss, K.D1_MINIMUM_LOSS, K.RELU_LOSS_TOL),
        "comparator_loss": _close(comparator_loss, K.D1_COMPARATOR_LOSS, K.RELU_LOSS_TOL),
        "not_global": comparator_loss < minimum_loss,
        "cases_certified": proof.certified and len(proof.cases) == 2,
        "constant_term": all(
            _close(case.constant_term, K.D1_MINIMUM_LOSS, K.RELU_LOSS_TOL)
            for case in proof.cases
        ),
    }
    return VerificationReport(
        claim=ClaimId.PROP1,
        status=_status(all(checks.values())),
        summary=(
            f"loss {minimum_loss:g} at the minimum, {comparator_loss:g} at the comparator; "
            f"{len(proof.cases)} activation cases certified={proof.certified}"
        ),
        details={
            "checks": checks,
            "proof": proof.model_dump(mode="json"),
            "comparator_certified": comparator_proof.certified,
            "probe": _probe(K.D1_MINIMUM, d, n_directions),
        },
    )


def _relu_eval(p: ReluRegParams, d: Dataset) -> dict[str, Any]:
    proof = certify_relu_min_exact(p, d)
    return {"params": p.flatten().tolist(), "loss": relu_loss(p, d), "certified": proof.certified}


def verify_prop2(n_directions: int = K.PROBE_DIRECTIONS) -> VerificationReport:
    """Perfect fit and a suboptimal minimum with two units on D2."""
    d = builtin(BuiltinName.D2)
    corrections: list[Correction] = []

    printed_global = _relu_eval(K.D2_GLOBAL_PRINTED, d)
    global_point = K.D2_GLOBAL_PRINTED
    if printed_global["loss"] >= K.PERFECT_FIT_TOL:
        corrected = _relu_eval(K.D2_GLOBAL, d)
        corrections.append(
            Correction(
                target="global",
                substitution=K.D2_CORRECTION,
                before=printed_global,
                after=corrected,
            )
        )
        global_point = K.D2_GLOBAL
    global_loss = relu_loss(global_point, d)

    printed_sub = _relu_eval(K.D2_SUBOPTIMAL_PRINTED, d)
    sub_point = K.D2_SUBOPTIMAL_PRINTED
    if not printed_sub["certified"]:
        corrected = _relu_eval(K.D2_SUBOPTIMAL, d)
        corrections.append(
            Correction(
                target="suboptimal",
                substitution=K.D2_CORRECTION,
                before=printed_sub,
                after=corrected,
            )
        )
        sub_point = K.D2_SUBOPTIMAL
    sub_proof = certify_relu_min_exact(sub_point, d)
    sub_loss = relu_loss(sub_point, d)
    probe = _probe(sub_point, d, n_directions)

    checks = {
        "perfect_fit": global_loss < K.PERFECT_FIT_TOL,
        "suboptimal_certified": sub_proof.certified,
        "suboptimal_worse": sub_loss > global_loss,
        "suboptimal_probe_stable": probe["descending"] == 0,
    }
    which = "corrected" if corrections else "printed"
    return VerificationReport(
        claim=ClaimId.PROP2,
        status=_status(all(checks.values()), corrected=bool(corrections)),
        summary=(
            f"perfect fit on {which} weights (loss {global_loss:.3g}); "
            f"suboptimal minimum loss {sub_loss:.6f}"
        ),
        details={
            "checks": checks,
            "global_loss": global_loss,
            "suboptimal_loss": sub_loss,
            "suboptimal_proof": sub_proof.model_dump(mode="json"),
            "probe": probe,
        },
        corrections=corrections,
    )


def verify_prop3(n_directions: int = K.PROBE_DIRECTIONS) -> VerificationReport:
    """Two minima on D3 that split the input line differently."""
    d = builtin(BuiltinName.D3)
    points = {"better": K.D3_BETTER, "worse": K.D3_WORSE}
    expected = {"better": K.D3_BETTER_LOSS, "worse": K.D3_WORSE_LOSS}
    details: dict[str, Any] = {}
    checks: dict[str, bool] = {}
    for name, p in points.items():
        value = relu_loss(p, d)
        regions = region_least_squares(p, d)
        proof = certify_relu_min_exact(p, d)
        probe = _probe(p, d, n_directions)
        checks[f"{name}_loss"] = _close(value, expected[name], K.RELU_LOSS_TOL)
        checks[f"{name}_regions_optimal"] = all(r.optimal for r in regions)
        checks[f"{name}_certified"] = proof.certified
        checks[f"{name}_probe_stable"] = probe["descending"] == 0
        details[name] = {
            "loss": value,
            "regions": [r.model_dump(mode="json") for r in regions],
            "proof_cases": len(proof.cases),
            "probe": probe,
        }
    better_loss = details["better"]["loss"]
    worse_loss = details["worse"]["loss"]
    checks["ordering"] = better_loss < worse_loss
    details["checks"] = checks
    return VerificationReport(
        claim=ClaimId.PROP3,
        status=_status(all(checks.values())),
        summary=f"better minimum loss {better_loss:.6f} < worse minimum loss {worse_loss:.6f}",
        details=details,
    )


def saturated_d1_start() -> DeepReluParams:
    """A 1-3-1 ReLU net whose hidden layer is dead on D1."""
    return DeepReluParams(
        layers=(
            (np.zeros((3, 1)), np.full(3, -1.0)),
            (np.array([[0.5, -0.5, 0.25]]), np.array([0.0])),
        )
    )


def verify_blindspot(n_directions: int = K.PROBE_DIRECTIONS) -> VerificationReport:
    """Saturated training stalls at the mean; the construction beats it on D1."""
    d = builtin(BuiltinName.D1)
    ybar = mean_label(d)
    mean_loss = float(np.sum((d.y - ybar) ** 2))

    start = saturated_d1_start()
    probe_report = saturated_training_probe(start, d)
    cfg = OptimizerConfig(learning_rate=probe_report.learning_rate, max_steps=probe_report.steps)
    trained, _ = train_deep_relu(start, d, cfg)
    escape = escape_probe(trained, d, n_directions=n_directions, radius=1e-3)

    better = construct_better(d, [3])
    outputs = deep_relu_outputs(better, d.x)
    better_loss = deep_relu_loss(better, d)
    checks = {
        "frozen_unchanged": probe_report.frozen_unchanged,
        "output_constant": probe_report.output_constant,
        "converged_to_mean": probe_report.mean_gap <= 1e-6,
        "saturated_point_probe_stable": escape.descending == 0,
        "construction_beats_mean": better_loss < mean_loss,
        "construction_not_saturated": not detect_saturation(better, d),
    }
    return VerificationReport(
        claim=ClaimId.BLINDSPOT,
        status=_status(all(checks.values())),
        summary=(
            f"saturated start stalls at {probe_report.constant_output:.6f} "
            f"(mean {ybar:g}, loss {mean_loss:g}); construction reaches loss {better_loss:.6f}"
        ),
        details={
            "checks": checks,
            "probe": probe_report.model_dump(mode="json"),
            "escape_probe_descending": escape.descending,
            "constructed_outputs": outputs.tolist(),
            "constructed_loss": better_loss,
            "mean_predictor_loss": mean_loss,
        },
    )


def constant_input_dataset() -> Dataset:
    return Dataset(
        x=np.full((4, 1), 2.0),
        y=np.array([1.0, 2.0, 4.0, 5.0]),
        task=Task.REGRESSION,
    )


def lemma1_start(seed: int = 0) -> DeepReluParams:
    rng = np.random.default_rng(seed)
    return DeepReluParams(
        layers=(
            (rng.uniform(-1.0, 1.0, (3, 1)), rng.uniform(-1.0, 1.0, 3)),
            (rng.uniform(-1.0, 1.0, (1, 3)), rng.uniform(-1.0, 1.0, 1)),
        )
    )


def constant_input_lr(p: DeepReluParams, d: Dataset) -> float:
    """Step size small enough for stable descent on a constant-input set."""
    scale = float(p.flatten() @ p.flatten())
    radius = float(np.max(np.sum(d.x * d.x, axis=1)))
    return 0.1 / (d.n * (1.0 + scale) * (1.0 + radius))


def verify_lemma1(n_directions: int = K.PROBE_DIRECTIONS, steps: int = 20_000) -> VerificationReport:
    """Training on identical inputs ends at the label mean."""
    d = constant_input_dataset()
    ybar = mean_label(d)
    results = []
    for seed in range(3):
        start = lemma1_start(seed)
        cfg = OptimizerConfig(learning_rate=constant_input_lr(start, d), max_steps=steps)
        trained, _ = train_deep_relu(start, d, cfg)
        out = deep_relu_outputs(trained, d.x)
        results.append(
            {
                "seed": seed,
                "output": float(out[0]),
                "constant": bool(np.all(out == out[0])),
                "gap": abs(float(out[0]) - ybar),
            }
        )
    checks = {
        "constant_output": all(r["constant"] for r in results),
        "mean_reached": all(r["gap"] <= 1e-6 for r in results),
    }
    return VerificationReport(
        claim=ClaimId.LEMMA1,
        status=_status(all(checks.values())),
        summary=f"{len(results)} trainings on identical inputs, label mean {ybar:g}",
        details={"checks": checks, "runs": results, "mean_label": ybar},
    )


VERIFIERS: dict[ClaimId, Callable[..., VerificationReport]] = {
    ClaimId.THM1: verify_thm1,
    ClaimId.PROP1: verify_prop1,
    ClaimId.PROP2: verify_prop2,
    ClaimId.PROP3: verify_prop3,
    ClaimId.BLINDSPOT: verify_blindspot,
    ClaimId.LEMMA1: verify_lemma1,
}


def verify(claim: ClaimId | str, n_directions: int = K.PROBE_DIRECTIONS) -> VerificationReport:
    claim_id = ClaimId(claim)
    report = VERIFIERS[claim_id](n_directions=n_directions)
    structlog.get_logger().info("claim verified", claim=claim_id.value, status=report.status.value)
    return report


def verify_all(n_directions: int = K.PROBE_DIRECTIONS) -> list[VerificationReport]:
    return [verify(claim, n_directions) for claim in ClaimId]

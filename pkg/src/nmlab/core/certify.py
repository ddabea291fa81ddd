"""Symmetric eigensolver and critical-point certification.

Spectral certificates cover smooth points: gradient norm, Hessian
spectrum, and a Morse-style verdict under explicit tolerances. Points of
ReLU regression that sit on activation kinks are handled exactly by
enumerating activation cases (``certify_relu_min_exact``).
"""

from __future__ import annotations

import itertools
import math
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np
import structlog
from pydantic import BaseModel

from nmlab.core.exceptions import InvalidInputError, UnsupportedConfigurationError
from nmlab.core.tinynet import (
    HESSIAN_STEP,
    KINK_TOL,
    LossKind,
    ReluRegParams,
    check_loss_kind,
    gradient,
    hessian,
    loss,
    loss_kind_of,
    relu_loss,
    relu_pre_activations,
    relu_residuals,
)

if TYPE_CHECKING:
    from nmlab.core.datasets import Dataset
    from nmlab.core.tinynet import ParamVector

DEFAULT_TOL_GRAD = 1e-5
DEFAULT_TOL_EIG_REL = 1e-8
MAX_BOUNDARY_POINTS_PER_UNIT = 2

_JACOBI_REL_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100


class Classification(StrEnum):
    NOT_CRITICAL = "not_critical"
    LOCAL_MINIMUM = "local_minimum"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


class Certificate(BaseModel):
    """Machine-checkable record of a critical-point verdict."""

    grad_inf_norm: float
    eigenvalues: list[float]
    classification: Classification
    tol_grad: float
    tol_eig: float
    loss_at_point: float
    morse_index: int
    policy_note: str = (
        "tolerances are nmlab defaults unless overridden; printed coordinates "
        "are treated as the candidate point"
    )


# ---------------------------------------------------------------------------
# Eigensolver
# ---------------------------------------------------------------------------


def _rotate(A: np.ndarray, V: np.ndarray, p: int, q: int) -> None:
    """Zero A[p, q] with one Jacobi rotation, in place."""
    apq = A[p, q]
    if apq == 0.0:
        return
    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
    t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    col_p = A[:, p].copy()
    col_q = A[:, q].copy()
    A[:, p] = c * col_p - s * col_q
    A[:, q] = s * col_p + c * col_q
    row_p = A[p, :].copy()
    row_q = A[q, :].copy()
    A[p, :] = c * row_p - s * row_q
    A[q, :] = s * row_p + c * row_q
    A[p, q] = 0.0
    A[q, p] = 0.0

    vp = V[:, p].copy()
    vq = V[:, q].copy()
    V[:, p] = c * vp - s * vq
    V[:, q] = s * vp + c * vq


def _off_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off, "fro"))


def eig_sym(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, Q) with A ~= Q diag(lam) Q^T and the
    eigenvector for lam[i] in column i. The input is symmetrized first.
    """
    A = np.array(A, dtype=np.float64, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        msg = f"eig_sym expects a square matrix, got shape {A.shape}"
        raise InvalidInputError(msg)
    if not np.all(np.isfinite(A)):
        msg = "eig_sym expects finite entries"
        raise InvalidInputError(msg)
    A = (A + A.T) / 2.0
    n = A.shape[0]
    V = np.eye(n)
    threshold = _JACOBI_REL_TOL * float(np.linalg.norm(A, "fro"))

    for _ in range(_JACOBI_MAX_SWEEPS):
        if _off_norm(A) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(A, V, p, q)
    else:
        structlog.get_logger().warning(
            "jacobi sweep limit reached", off_norm=_off_norm(A), threshold=threshold
        )

    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


# ---------------------------------------------------------------------------
# Spectral classification
# ---------------------------------------------------------------------------


def classify_spectrum(
    grad_inf_norm: float,
    eigenvalues: np.ndarray,
    tol_grad: float = DEFAULT_TOL_GRAD,
    tol_eig_rel: float = DEFAULT_TOL_EIG_REL,
) -> tuple[Classification, float]:
    """Decision rule; returns (verdict, tau)."""
    tau = tol_eig_rel * max(1.0, float(eigenvalues[-1]))
    if grad_inf_norm > tol_grad:
        return Classification.NOT_CRITICAL, tau
    if eigenvalues[0] >= tau:
        return Classification.LOCAL_MINIMUM, tau
    if eigenvalues[0] <= -tau:
        return Classification.SADDLE, tau
    return Classification.DEGENERATE, tau


def classify_critical(
    p: ParamVector,
    d: Dataset,
    loss_kind: LossKind | str | None = None,
    tol_grad: float = DEFAULT_TOL_GRAD,
    tol_eig_rel: float = DEFAULT_TOL_EIG_REL,
    fd_step: float = HESSIAN_STEP,
) -> Certificate:
    """Certify p as minimum, saddle, degenerate, or not critical."""
    log = structlog.get_logger()
    kind = LossKind(loss_kind) if loss_kind is not None else loss_kind_of(p)
    check_loss_kind(p, kind)

    H = hessian(p, d, kind, step=fd_step)
    g = gradient(p, d)
    grad_inf = float(np.max(np.abs(g)))
    lam, _ = eig_sym(H)
    verdict, tau = classify_spectrum(grad_inf, lam, tol_grad, tol_eig_rel)
    value = loss(p, d)
    log.info(
        "certified point",
        classification=verdict.value,
        grad_inf_norm=grad_inf,
        min_eigenvalue=float(lam[0]),
        loss=value,
    )
    return Certificate(
        grad_inf_norm=grad_inf,
        eigenvalues=[float(v) for v in lam],
        classification=verdict,
        tol_grad=tol_grad,
        tol_eig=tau,
        loss_at_point=value,
        morse_index=int(np.sum(lam <= -tau)),
    )


# ---------------------------------------------------------------------------
# Exact certification of ReLU regression minima
# ---------------------------------------------------------------------------


class BoundaryPoint(BaseModel):
    point: int
    unit: int
    active: bool


class CaseReport(BaseModel):
    """One activation case: loss = constant + 2 linear.theta + theta^T Q theta."""

    boundary: list[BoundaryPoint]
    variables: list[str]
    quadratic_form: list[list[float]]
    quadratic_eigenvalues: list[float]
    linear_term: list[float]
    constant_term: float
    psd: bool
    linear_vanishes: bool
    certified: bool


class ReluProofReport(BaseModel):
    params: list[float]
    base_loss: float
    cases: list[CaseReport]
    certified: bool


def _variable_names(m: int) -> list[str]:
    return [f"alpha{j}" for j in range(m)] + [f"beta{j}" for j in range(m)] + ["z"]


def certify_relu_min_exact(p: ReluRegParams, d: Dataset) -> ReluProofReport:
    """Mechanized case analysis for a candidate ReLU regression minimum.

    Per unit j the loss depends on (v_j w_j, v_j b_j) only, so with
    alpha_j = v_j w_j - (v_j w_j)_0, beta_j = v_j b_j - (v_j b_j)_0 and
    z = delta_c, every residual is affine in theta = (alpha, beta, z) once
    the activation pattern is fixed. Points on a kink contribute zero at
    the base point in either state, so each case shares the base
    residuals r_0. A case is certified when its linear term vanishes and
    its quadratic form is PSD, which makes loss >= base loss on the case.
    """
    S = relu_pre_activations(p, d)
    r0 = relu_residuals(p, d)
    base = relu_loss(p, d)
    m = p.m
    x = d.x[:, 0]

    on_kink = np.abs(S) <= KINK_TOL
    per_unit = np.sum(on_kink, axis=0)
    if np.any(per_unit > MAX_BOUNDARY_POINTS_PER_UNIT):
        unit = int(np.argmax(per_unit))
        msg = (
            f"Unit {unit} has {int(per_unit[unit])} datapoints on its kink; "
            f"exact certification supports at most {MAX_BOUNDARY_POINTS_PER_UNIT}"
        )
        raise UnsupportedConfigurationError(msg)
    pairs = [(int(i), int(j)) for i, j in zip(*np.nonzero(on_kink), strict=True)]

    names = _variable_names(m)
    tol_lin = 1e-9 * (1.0 + base)
    cases: list[CaseReport] = []
    for states in itertools.product((True, False), repeat=len(pairs)):
        active = S > KINK_TOL
        for (i, j), state in zip(pairs, states, strict=True):
            active[i, j] = state

        # rows a_i: d residual_i / d theta
        rows = np.zeros((d.n, 2 * m + 1))
        rows[:, :m] = active * x[:, None]
        rows[:, m : 2 * m] = active
        rows[:, 2 * m] = 1.0
        Q = rows.T @ rows
        lin = rows.T @ r0
        q_eigs, _ = eig_sym(Q)
        psd = bool(q_eigs[0] >= -1e-10 * (1.0 + float(np.linalg.norm(Q, "fro"))))
        lin_ok = bool(np.max(np.abs(lin)) <= tol_lin)
        cases.append(
            CaseReport(
                boundary=[
                    BoundaryPoint(point=i, unit=j, active=state)
                    for (i, j), state in zip(pairs, states, strict=True)
                ],
                variables=names,
                quadratic_form=Q.tolist(),
                quadratic_eigenvalues=[float(v) for v in q_eigs],
                linear_term=[float(v) for v in lin],
                constant_term=base,
                psd=psd,
                linear_vanishes=lin_ok,
                certified=psd and lin_ok,
            )
        )

    certified = all(case.certified for case in cases)
    structlog.get_logger().info(
        "exact relu certification", cases=len(cases), certified=certified, base_loss=base
    )
    return ReluProofReport(
        params=[float(v) for v in p.flatten()],
        base_loss=base,
        cases=cases,
        certified=certified,
    )


class RegionFit(BaseModel):
    """Least-squares status of the points sharing one activation pattern."""

    pattern: list[int]
    points: list[int]
    residual_sum: float
    residual_moment: float
    perfect_fit: bool
    optimal: bool


def region_least_squares(p: ReluRegParams, d: Dataset, tol: float = 1e-9) -> list[RegionFit]:
    """Group points by active-unit set and test each group's affine fit.

    Inside one group the model is affine in x; it is the least-squares
    optimum for the group iff residuals are orthogonal to (1, x). Points on
    a kink count as inactive for that unit.
    """
    S = relu_pre_activations(p, d)
    r = relu_residuals(p, d)
    x = d.x[:, 0]
    groups: dict[tuple[int, ...], list[int]] = {}
    for i in range(d.n):
        pattern = tuple(int(j) for j in np.flatnonzero(S[i] > KINK_TOL))
        groups.setdefault(pattern, []).append(i)

    fits = []
    for pattern, idx in groups.items():
        ri = r[idx]
        rsum = math.fsum(ri.tolist())
        rmom = math.fsum((ri * x[idx]).tolist())
        perfect = bool(np.max(np.abs(ri)) <= tol)
        scale = 1.0 + float(np.max(np.abs(x[idx])))
        # with no active unit the model is a constant, so only the sum matters
        stationary = abs(rsum) <= tol and (not pattern or abs(rmom) <= tol * scale)
        fits.append(
            RegionFit(
                pattern=list(pattern),
                points=idx,
                residual_sum=rsum,
                residual_moment=rmom,
                perfect_fit=perfect,
                optimal=perfect or stationary,
            )
        )
    return fits

"""The tiny architectures: forward passes, losses, analytic gradients, Hessians.

Four parameter families share one flat-vector protocol (``flatten`` /
``with_flat``):

- ``Sigmoid221Params``: 2-2-1 sigmoid classifier, flat order
  [w00, w01, b0, w10, w11, b1, v0, v1, c].
- ``TwoH1Params``: 2-h-1 classifier with ReLU or sigmoid hidden units,
  flat order [w_j0, w_j1, b_j for each unit j] + v + [c]. For h=2 this is
  exactly the Sigmoid221 order.
- ``ReluRegParams``: 1-D regression with m ReLU units, flat order
  [w_1..w_m, b_1..b_m, v_1..v_m, c].
- ``DeepReluParams``: k affine layers with ReLU between them, flat order
  per layer W (row-major) then b.

Classification loss is the mean negative log-likelihood; regression
loss is the sum of squared residuals. ReLU'(0) is taken as 0.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum
from functools import singledispatch
from typing import TYPE_CHECKING, ClassVar, Protocol, Self

import numpy as np

from nmlab.core.datasets import Task
from nmlab.core.exceptions import ArchitectureError, InvalidInputError, NonSmoothPointError

if TYPE_CHECKING:
    from nmlab.core.datasets import Dataset

KINK_TOL = 1e-9
HESSIAN_STEP = 1e-5


class Activation(StrEnum):
    RELU = "relu"
    SIGMOID = "sigmoid"


class LossKind(StrEnum):
    NLL = "nll"
    MSE = "mse"


class ParamVector(Protocol):
    """Anything with a canonical flat ordering."""

    @property
    def size(self) -> int: ...

    def flatten(self) -> np.ndarray: ...

    def with_flat(self, theta: np.ndarray) -> Self: ...


def _frozen(a: np.ndarray | list[float] | tuple[float, ...], ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        msg = f"Expected a {ndim}-D array, got shape {arr.shape}"
        raise ArchitectureError(msg)
    if not np.all(np.isfinite(arr)):
        msg = "Parameters must be finite"
        raise InvalidInputError(msg)
    arr.flags.writeable = False
    return arr


def _check_flat(theta: np.ndarray, size: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (size,):
        msg = f"Expected a flat vector of length {size}, got shape {theta.shape}"
        raise ArchitectureError(msg)
    return theta


def _finite_scalar(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        msg = f"Parameter {name} must be finite, got {value!r}"
        raise InvalidInputError(msg)
    return value


class _FlatEquality:
    def flatten(self) -> np.ndarray:
        raise NotImplementedError

    def _shape_key(self) -> tuple[object, ...]:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        assert isinstance(other, _FlatEquality)
        return self._shape_key() == other._shape_key() and bool(
            np.array_equal(self.flatten(), other.flatten())
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._shape_key(), self.flatten().tobytes()))


# ---------------------------------------------------------------------------
# Parameter families
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Sigmoid221Params(_FlatEquality):
    w00: float
    w01: float
    b0: float
    w10: float
    w11: float
    b1: float
    v0: float
    v1: float
    c: float

    FLAT_NAMES: ClassVar[tuple[str, ...]] = ("w00", "w01", "b0", "w10", "w11", "b1", "v0", "v1", "c")

    def __post_init__(self) -> None:
        for name in self.FLAT_NAMES:
            object.__setattr__(self, name, _finite_scalar(getattr(self, name), name))

    @property
    def size(self) -> int:
        return 9

    def flatten(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in self.FLAT_NAMES])

    @classmethod
    def from_flat(cls, theta: np.ndarray) -> Sigmoid221Params:
        theta = _check_flat(theta, 9)
        return cls(*(float(t) for t in theta))

    def with_flat(self, theta: np.ndarray) -> Sigmoid221Params:
        return self.from_flat(theta)

    @classmethod
    def zeros(cls) -> Sigmoid221Params:
        return cls.from_flat(np.zeros(9))

    def to_two_h1(self) -> TwoH1Params:
        return TwoH1Params(
            activation=Activation.SIGMOID,
            W1=np.array([[self.w00, self.w01], [self.w10, self.w11]]),
            b1=np.array([self.b0, self.b1]),
            v=np.array([self.v0, self.v1]),
            c=self.c,
        )

    def _shape_key(self) -> tuple[object, ...]:
        return ()


@dataclass(frozen=True, eq=False)
class TwoH1Params(_FlatEquality):
    activation: Activation
    W1: np.ndarray
    b1: np.ndarray
    v: np.ndarray
    c: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "activation", Activation(self.activation))
        W1 = _frozen(self.W1, 2)
        b1 = _frozen(self.b1, 1)
        v = _frozen(self.v, 1)
        h = W1.shape[0]
        if h < 1 or W1.shape[1] != 2 or b1.shape != (h,) or v.shape != (h,):
            msg = (
                f"Inconsistent 2-h-1 shapes: W1 {W1.shape}, b1 {b1.shape}, v {v.shape}"
            )
            raise ArchitectureError(msg)
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "c", _finite_scalar(self.c, "c"))

    @property
    def h(self) -> int:
        return int(self.W1.shape[0])

    @property
    def size(self) -> int:
        return 4 * self.h + 1

    def flatten(self) -> np.ndarray:
        per_unit = np.column_stack([self.W1, self.b1]).ravel()
        return np.concatenate([per_unit, self.v, [self.c]])

    def with_flat(self, theta: np.ndarray) -> TwoH1Params:
        return self.from_flat(self.activation, self.h, theta)

    @classmethod
    def from_flat(cls, activation: Activation, h: int, theta: np.ndarray) -> TwoH1Params:
        theta = _check_flat(theta, 4 * h + 1)
        per_unit = theta[: 3 * h].reshape(h, 3)
        return cls(
            activation=activation,
            W1=per_unit[:, :2],
            b1=per_unit[:, 2],
            v=theta[3 * h : 4 * h],
            c=float(theta[4 * h]),
        )

    @classmethod
    def zeros(cls, activation: Activation, h: int) -> TwoH1Params:
        return cls.from_flat(activation, h, np.zeros(4 * h + 1))

    def _shape_key(self) -> tuple[object, ...]:
        return (self.activation.value, self.h)


@dataclass(frozen=True, eq=False)
class ReluRegParams(_FlatEquality):
    w: np.ndarray
    b: np.ndarray
    v: np.ndarray
    c: float

    def __post_init__(self) -> None:
        w = _frozen(self.w, 1)
        b = _frozen(self.b, 1)
        v = _frozen(self.v, 1)
        m = w.shape[0]
        if m < 1 or b.shape != (m,) or v.shape != (m,):
            msg = f"ReLU regression needs m >= 1 and equal lengths, got w {w.shape}, b {b.shape}, v {v.shape}"
            raise ArchitectureError(msg)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "c", _finite_scalar(self.c, "c"))

    @property
    def m(self) -> int:
        return int(self.w.shape[0])

    @property
    def size(self) -> int:
        return 3 * self.m + 1

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.w, self.b, self.v, [self.c]])

    def with_flat(self, theta: np.ndarray) -> ReluRegParams:
        return self.from_flat(self.m, theta)

    @classmethod
    def from_flat(cls, m: int, theta: np.ndarray) -> ReluRegParams:
        theta = _check_flat(theta, 3 * m + 1)
        return cls(w=theta[:m], b=theta[m : 2 * m], v=theta[2 * m : 3 * m], c=float(theta[3 * m]))

    def _shape_key(self) -> tuple[object, ...]:
        return (self.m,)


@dataclass(frozen=True, eq=False)
class DeepReluParams(_FlatEquality):
    """Layers (W_n, b_n), n = 1..k; ReLU after every layer but the last."""

    layers: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self) -> None:
        if not self.layers:
            msg = "Deep ReLU model needs at least one layer"
            raise ArchitectureError(msg)
        frozen: list[tuple[np.ndarray, np.ndarray]] = []
        prev_out: int | None = None
        for n, (W, b) in enumerate(self.layers, start=1):
            Wf = _frozen(W, 2)
            bf = _frozen(b, 1)
            if bf.shape != (Wf.shape[0],):
                msg = f"Layer {n}: bias shape {bf.shape} does not match W {Wf.shape}"
                raise ArchitectureError(msg)
            if prev_out is not None and Wf.shape[1] != prev_out:
                msg = f"Layer {n}: expects {Wf.shape[1]} inputs, previous layer gives {prev_out}"
                raise ArchitectureError(msg)
            prev_out = Wf.shape[0]
            frozen.append((Wf, bf))
        if prev_out != 1:
            msg = f"Final layer must have a scalar output, got width {prev_out}"
            raise ArchitectureError(msg)
        object.__setattr__(self, "layers", tuple(frozen))

    @property
    def k(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return int(self.layers[0][0].shape[1])

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(int(W.shape[0]) for W, _ in self.layers)

    @property
    def size(self) -> int:
        return sum(W.size + b.size for W, b in self.layers)

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.concatenate([W.ravel(), b]) for W, b in self.layers])

    def with_flat(self, theta: np.ndarray) -> DeepReluParams:
        theta = _check_flat(theta, self.size)
        layers = []
        offset = 0
        for W, b in self.layers:
            Wn = theta[offset : offset + W.size].reshape(W.shape)
            offset += W.size
            bn = theta[offset : offset + b.size]
            offset += b.size
            layers.append((Wn, bn))
        return DeepReluParams(layers=tuple(layers))

    def _shape_key(self) -> tuple[object, ...]:
        return tuple(W.shape for W, _ in self.layers)


# ---------------------------------------------------------------------------
# Elementwise helpers
# ---------------------------------------------------------------------------


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Logistic function, accurate in both tails."""
    return np.exp(-np.logaddexp(0.0, -z))


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _require_finite_input(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        msg = "Input must be finite"
        raise InvalidInputError(msg)


def _require_task(d: Dataset, task: Task) -> None:
    if d.task != task:
        msg = f"Expected a {task.value} dataset, got {d.task.value}"
        raise InvalidInputError(msg)


# ---------------------------------------------------------------------------
# Classifiers (Sigmoid221 and 2-h-1)
# ---------------------------------------------------------------------------


Classifier = Sigmoid221Params | TwoH1Params


def _as_two_h1(p: Classifier) -> TwoH1Params:
    return p.to_two_h1() if isinstance(p, Sigmoid221Params) else p


def _hidden(p: TwoH1Params, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Z = X @ p.W1.T + p.b1
    A = sigmoid(Z) if p.activation == Activation.SIGMOID else relu(Z)
    return Z, A


def classifier_logits(p: Classifier, X: np.ndarray) -> np.ndarray:
    net = _as_two_h1(p)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != 2:
        msg = f"Classifier expects inputs of shape (N, 2), got {X.shape}"
        raise InvalidInputError(msg)
    _require_finite_input(X)
    _, A = _hidden(net, X)
    return A @ net.v + net.c


def predict_proba(p: Classifier, X: np.ndarray) -> np.ndarray:
    return sigmoid(classifier_logits(p, X))


def forward_two_h1(p: TwoH1Params, x: np.ndarray | tuple[float, float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (2,):
        msg = f"Expected a 2-vector input, got shape {x.shape}"
        raise InvalidInputError(msg)
    return float(predict_proba(p, x.reshape(1, 2))[0])


def forward_sigmoid221(p: Sigmoid221Params, x: np.ndarray | tuple[float, float]) -> float:
    return forward_two_h1(p.to_two_h1(), x)


def _nll_terms(z: np.ndarray, y: np.ndarray) -> np.ndarray:
    # -[y log s(z) + (1 - y) log(1 - s(z))] written on the logit
    return np.logaddexp(0.0, z) - y * z


def nll_loss(p: Classifier, d: Dataset) -> float:
    """Mean negative log-likelihood over the dataset."""
    _require_task(d, Task.CLASSIFICATION)
    z = classifier_logits(p, d.x)
    return float(np.mean(_nll_terms(z, d.y)))


def likelihood(p: Classifier, d: Dataset) -> float:
    """Per-point geometric-mean likelihood, exp(-nll_loss)."""
    return float(np.exp(-nll_loss(p, d)))


def accuracy(p: Classifier, d: Dataset) -> float:
    _require_task(d, Task.CLASSIFICATION)
    correct = (predict_proba(p, d.x) > 0.5) == (d.y == 1.0)
    return float(np.mean(correct))


def two_h1_flat_loss_and_grad(
    activation: Activation,
    h: int,
    theta: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean NLL, flat gradient, and logits straight from a flat vector.

    No validation: training loops call this on every step and must be able
    to observe non-finite values instead of having them rejected.
    """
    per_unit = theta[: 3 * h].reshape(h, 3)
    W1, b1 = per_unit[:, :2], per_unit[:, 2]
    v, c = theta[3 * h : 4 * h], theta[4 * h]
    Z = X @ W1.T + b1
    A = sigmoid(Z) if activation == Activation.SIGMOID else relu(Z)
    z = A @ v + c
    value = float(np.mean(_nll_terms(z, y)))

    delta = (sigmoid(z) - y) / X.shape[0]
    dc = np.sum(delta)
    dv = A.T @ delta
    dA = np.outer(delta, v)
    if activation == Activation.SIGMOID:
        dZ = dA * A * (1.0 - A)
    else:
        dZ = dA * (Z > 0.0)
    dW1 = dZ.T @ X
    db1 = np.sum(dZ, axis=0)
    grad = np.concatenate([np.column_stack([dW1, db1]).ravel(), dv, [dc]])
    return value, grad, z


def nll_loss_and_grad(p: Classifier, d: Dataset) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss, flat gradient, and logits in one pass."""
    _require_task(d, Task.CLASSIFICATION)
    net = _as_two_h1(p)
    return two_h1_flat_loss_and_grad(net.activation, net.h, net.flatten(), d.x, d.y)


def grad_nll(p: Classifier, d: Dataset) -> np.ndarray:
    return nll_loss_and_grad(p, d)[1]


# ---------------------------------------------------------------------------
# 1-D ReLU regression
# ---------------------------------------------------------------------------


def relu_pre_activations(p: ReluRegParams, d: Dataset) -> np.ndarray:
    """(N, m) matrix of w_j x_i + b_j."""
    if d.d != 1:
        msg = f"ReLU regression expects 1-D inputs, got d={d.d}"
        raise InvalidInputError(msg)
    return np.outer(d.x[:, 0], p.w) + p.b


def relu_outputs(p: ReluRegParams, d: Dataset) -> np.ndarray:
    return relu(relu_pre_activations(p, d)) @ p.v + p.c


def relu_residuals(p: ReluRegParams, d: Dataset) -> np.ndarray:
    return relu_outputs(p, d) - d.y


def relu_loss(p: ReluRegParams, d: Dataset) -> float:
    """Sum of squared residuals."""
    _require_task(d, Task.REGRESSION)
    r = relu_residuals(p, d)
    return float(r @ r)


def grad_relu_loss(p: ReluRegParams, d: Dataset) -> np.ndarray:
    _require_task(d, Task.REGRESSION)
    S = relu_pre_activations(p, d)
    A = relu(S)
    r = A @ p.v + p.c - d.y
    dout = 2.0 * r
    dS = np.outer(dout, p.v) * (S > 0.0)
    dw = dS.T @ d.x[:, 0]
    db = np.sum(dS, axis=0)
    dv = A.T @ dout
    dc = np.sum(dout)
    return np.concatenate([dw, db, dv, [dc]])


# ---------------------------------------------------------------------------
# Deep ReLU regression
# ---------------------------------------------------------------------------


def _deep_forward(p: DeepReluParams, X: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.input_dim:
        msg = f"Deep ReLU model expects inputs of dimension {p.input_dim}, got shape {X.shape}"
        raise InvalidInputError(msg)
    _require_finite_input(X)
    hs = [X]
    pre: list[np.ndarray] = []
    h = X
    for W, b in p.layers[:-1]:
        s = h @ W.T + b
        pre.append(s)
        h = relu(s)
        hs.append(h)
    W, b = p.layers[-1]
    out = (h @ W.T + b)[:, 0]
    return hs, pre, out


def deep_relu_outputs(p: DeepReluParams, X: np.ndarray) -> np.ndarray:
    return _deep_forward(p, X)[2]


def deep_pre_activations(p: DeepReluParams, X: np.ndarray) -> list[np.ndarray]:
    """Pre-activations W_n h_{n-1} + b_n of every ReLU layer, each (N, width)."""
    return _deep_forward(p, X)[1]


def forward_deep_relu(p: DeepReluParams, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape != (p.input_dim,):
        msg = f"Expected a {p.input_dim}-vector input, got shape {x.shape}"
        raise InvalidInputError(msg)
    return float(deep_relu_outputs(p, x.reshape(1, -1))[0])


def deep_relu_loss(p: DeepReluParams, d: Dataset) -> float:
    r = deep_relu_outputs(p, d.x) - d.y
    return float(r @ r)


def grad_deep_relu_loss(p: DeepReluParams, d: Dataset) -> np.ndarray:
    hs, pre, out = _deep_forward(p, d.x)
    g = (2.0 * (out - d.y))[:, None]
    grads: list[np.ndarray] = []
    for n in range(p.k - 1, -1, -1):
        W, _ = p.layers[n]
        if n < p.k - 1:
            g = g * (pre[n] > 0.0)
        grads.append(np.concatenate([(g.T @ hs[n]).ravel(), np.sum(g, axis=0)]))
        g = g @ W
    return np.concatenate(grads[::-1])


# ---------------------------------------------------------------------------
# Generic dispatch, kinks, Hessian
# ---------------------------------------------------------------------------


@singledispatch
def loss(p: object, d: Dataset) -> float:
    msg = f"No loss defined for {type(p).__name__}"
    raise ArchitectureError(msg)


@singledispatch
def gradient(p: object, d: Dataset) -> np.ndarray:
    msg = f"No gradient defined for {type(p).__name__}"
    raise ArchitectureError(msg)


@loss.register
def _(p: Sigmoid221Params, d: Dataset) -> float:
    return nll_loss(p, d)


@loss.register
def _(p: TwoH1Params, d: Dataset) -> float:
    return nll_loss(p, d)


@loss.register
def _(p: ReluRegParams, d: Dataset) -> float:
    return relu_loss(p, d)


@loss.register
def _(p: DeepReluParams, d: Dataset) -> float:
    return deep_relu_loss(p, d)


@gradient.register
def _(p: Sigmoid221Params, d: Dataset) -> np.ndarray:
    return grad_nll(p, d)


@gradient.register
def _(p: TwoH1Params, d: Dataset) -> np.ndarray:
    return grad_nll(p, d)


@gradient.register
def _(p: ReluRegParams, d: Dataset) -> np.ndarray:
    return grad_relu_loss(p, d)


@gradient.register
def _(p: DeepReluParams, d: Dataset) -> np.ndarray:
    return grad_deep_relu_loss(p, d)


def loss_kind_of(p: object) -> LossKind:
    if isinstance(p, (Sigmoid221Params, TwoH1Params)):
        return LossKind.NLL
    if isinstance(p, (ReluRegParams, DeepReluParams)):
        return LossKind.MSE
    msg = f"Unknown parameter family {type(p).__name__}"
    raise ArchitectureError(msg)


def check_loss_kind(p: object, loss_kind: LossKind | str) -> None:
    expected = loss_kind_of(p)
    if LossKind(loss_kind) != expected:
        msg = f"{type(p).__name__} is trained with the {expected.value} loss, not {loss_kind}"
        raise ArchitectureError(msg)


def kink_points(p: object, d: Dataset, tol: float = KINK_TOL) -> list[tuple[int, int]]:
    """(point, unit) pairs whose ReLU pre-activation is within tol of zero.

    Units of deep models are numbered consecutively across layers.
    """
    if isinstance(p, ReluRegParams):
        blocks = [relu_pre_activations(p, d)]
    elif isinstance(p, DeepReluParams):
        blocks = deep_pre_activations(p, d.x)
    elif isinstance(p, TwoH1Params) and p.activation == Activation.RELU:
        blocks = [_hidden(p, d.x)[0]]
    else:
        return []
    S = np.hstack(blocks) if blocks else np.empty((d.n, 0))
    rows, cols = np.nonzero(np.abs(S) <= tol)
    return sorted(zip(rows.tolist(), cols.tolist(), strict=True))


def hessian_from_gradient(
    grad_fn: Callable[[np.ndarray], np.ndarray],
    theta: np.ndarray,
    step: float = HESSIAN_STEP,
) -> np.ndarray:
    """Central differences of an analytic gradient, symmetrized."""
    theta = np.asarray(theta, dtype=np.float64)
    n = theta.shape[0]
    H = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        H[:, j] = (grad_fn(theta + e) - grad_fn(theta - e)) / (2.0 * step)
    return (H + H.T) / 2.0


def hessian(
    p: ParamVector,
    d: Dataset,
    loss_kind: LossKind | str | None = None,
    step: float = HESSIAN_STEP,
) -> np.ndarray:
    """Loss Hessian at p; raises NonSmoothPointError at ReLU kinks."""
    if loss_kind is not None:
        check_loss_kind(p, loss_kind)
    kinks = kink_points(p, d)
    if kinks:
        point, unit = kinks[0]
        raise NonSmoothPointError(point, unit)

    def grad_at(theta: np.ndarray) -> np.ndarray:
        return gradient(p.with_flat(theta), d)

    return hessian_from_gradient(grad_at, p.flatten(), step)

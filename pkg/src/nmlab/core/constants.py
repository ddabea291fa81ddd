"""Embedded parameter points, reference values and tolerances.

Every printed constant the verifiers depend on lives here, so auditing
them is a single diff. Coordinates are kept exactly as printed; where a
printed value needed a correction, both the printed and the corrected
point are stored and the substitution is named.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from nmlab.core.tinynet import ReluRegParams, Sigmoid221Params

# ---------------------------------------------------------------------------
# 2-2-1 sigmoid network on the sigmoid10 dataset
# ---------------------------------------------------------------------------

# Points are printed with w_ij meaning input i -> hidden unit j, while
# Sigmoid221Params.w_ij is hidden unit i <- input j. Read literally the
# printed minimum is not critical; the corrected points swap w01 and w10.
SIGMOID_CORRECTION = "w01 <-> w10 (printed w_ij read as input i -> hidden unit j)"


def _input_major(p: Sigmoid221Params) -> Sigmoid221Params:
    return replace(p, w01=p.w10, w10=p.w01)


# finite local minimum, accuracy 0.4
W_HAT_PRINTED = Sigmoid221Params(
    w00=1.05954587,
    w01=-0.05625762,
    b0=-0.050686,
    w10=-0.03749863,
    w11=1.09518945,
    b1=-0.06894291,
    v0=3.76921058,
    v1=-3.72139955,
    c=-0.0148436,
)
W_HAT = _input_major(W_HAT_PRINTED)
W_HAT_LOSS = 0.577738
W_HAT_LIKELIHOOD = 0.561166
W_HAT_ACCURACY = 0.4
# printed spectrum; the Hessian of the mean loss at W_HAT does not
# reproduce it, so it is reported next to the computed one, never required
W_HAT_HESSIAN_EIGENVALUES = (
    0.0007787149706922058,
    0.09566127257833993,
    0.1737731623214083,
    0.2206386654308471,
    0.4155934900503221,
    0.924604414747995,
    3.80355680178619,
    4.572940690876952,
    6.39109880722351,
)

# better point with accuracy 0.8; not itself a minimum. Its second
# coordinate is printed under a repeated w00 label and read as w01.
W_ZERO_PRINTED = Sigmoid221Params(
    w00=5.67526388,
    w01=0.50532424,
    b0=3.23905253,
    w10=-68.69289398,
    w11=-5.17422295,
    b1=0.24047163,
    v0=-44.49337769,
    v1=45.87974167,
    c=-0.69310206,
)
W_ZERO = _input_major(W_ZERO_PRINTED)
W_ZERO_LOSS = 0.381913
W_ZERO_LIKELIHOOD = 0.682555
W_ZERO_ACCURACY = 0.8

# another suboptimal end point of training; printed with run-together
# "w11 -3.51..." and "v1-15.02..." read as negative values
W_STALLED_PRINTED = Sigmoid221Params(
    w00=22.3641243,
    w01=-12.53928375,
    b0=-35.75595093,
    w10=-44.85849762,
    w11=-3.51257443,
    b1=-23.58968163,
    v0=15.43178844,
    v1=-15.02632332,
    c=-0.40546528,
)
W_STALLED = _input_major(W_STALLED_PRINTED)
W_STALLED_LOSS = 0.475135
W_STALLED_LIKELIHOOD = 0.621801
W_STALLED_ACCURACY = 0.7

SIGMOID_LOSS_TOL = 1e-5
SPECTRUM_REL_TOL = 1e-3


def _relu(w: list[float], b: list[float], v: list[float], c: float) -> ReluRegParams:
    return ReluRegParams(w=np.array(w), b=np.array(b), v=np.array(v), c=c)


# ---------------------------------------------------------------------------
# One ReLU unit on D1
# ---------------------------------------------------------------------------

D1_MINIMUM = _relu([1.0], [-3.0], [1.0], 0.0)
D1_MINIMUM_LOSS = 18.0
D1_COMPARATOR = _relu([-7.0], [-4.0], [1.0], 0.0)
D1_COMPARATOR_LOSS = 14.0

# ---------------------------------------------------------------------------
# Two ReLU units on D2
# ---------------------------------------------------------------------------

# as printed: the second unit reads relu(-x - 8) and is dead on all of D2
D2_GLOBAL_PRINTED = _relu([-5.0, -1.0], [1.0, -8.0], [1.0, -1.0], -1.0)
D2_SUBOPTIMAL_PRINTED = _relu([-3.0, -1.0], [4.0 + 1.0 / 3.0, -10.0], [1.0, -1.0], -3.0)

# second unit's input weight flipped to +1
D2_CORRECTION = "w[1]: -1 -> +1 (second hidden unit input weight sign)"
D2_GLOBAL = _relu([-5.0, 1.0], [1.0, -8.0], [1.0, -1.0], -1.0)
D2_SUBOPTIMAL = _relu([-3.0, 1.0], [4.0 + 1.0 / 3.0, -10.0], [1.0, -1.0], -3.0)
D2_GLOBAL_LOSS = 0.0
D2_SUBOPTIMAL_LOSS = 8.0 / 3.0

# ---------------------------------------------------------------------------
# Three ReLU units on D3
# ---------------------------------------------------------------------------

D3_BETTER = _relu([-1.5, -1.5, 1.5], [1.0, 0.0, -13.0 - 1.0 / 6.0], [1.0, 1.0, -1.0], -1.0)
D3_BETTER_LOSS = 1.0 / 6.0
D3_WORSE = _relu([-2.0, 1.0, 1.0], [3.0 + 2.0 / 3.0, -10.0, -11.0], [1.0, -1.0, -1.0], -3.0)
D3_WORSE_LOSS = 2.0 / 3.0

RELU_LOSS_TOL = 1e-9
PERFECT_FIT_TOL = 1e-12

# escape probe settings used by the verifiers
PROBE_DIRECTIONS = 10_000
PROBE_RADIUS = 1e-4

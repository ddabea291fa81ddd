"""Tests for saturation detection, the saturated training probe and the escape construction."""

import numpy as np
import pytest

from nmlab.core.blindspot import (
    SEPARATION_MARGIN,
    analyze,
    construct_better,
    detect_saturation,
    find_separating_vector,
    probe_learning_rate,
    saturated_training_probe,
    train_deep_relu,
)
from nmlab.core.datasets import BuiltinName, Dataset, Task, builtin, input_groups, is_decent
from nmlab.core.exceptions import ArchitectureError, InvalidInputError, NotDecentError
from nmlab.core.optim import OptimizerConfig, SuccessKind, SuccessRule
from nmlab.core.tinynet import DeepReluParams, deep_relu_loss, deep_relu_outputs
from nmlab.core.verify import saturated_d1_start


@pytest.fixture
def saturated():
    return saturated_d1_start()


@pytest.mark.unit
class TestDetectSaturation:
    def test_dead_first_layer(self, saturated, d1):
        assert detect_saturation(saturated, d1) == [1]

    def test_constructed_point_is_alive(self, d1):
        assert detect_saturation(construct_better(d1, [3]), d1) == []

    def test_output_layer_never_counted(self, d1):
        p = DeepReluParams(layers=((np.array([[1.0]]), np.array([-100.0])),))
        assert detect_saturation(p, d1) == []


@pytest.mark.unit
class TestSaturatedTraining:
    def test_learning_rate(self, saturated, d1):
        assert probe_learning_rate(saturated, d1, 1) == pytest.approx(0.1 / (5 * 1.5625))

    def test_stalls_at_mean(self, saturated, d1):
        report = saturated_training_probe(saturated, d1, steps=2000)
        assert report.probed_layer == 1
        assert report.frozen_unchanged
        assert report.output_constant
        assert report.mean_label == pytest.approx(0.6)
        assert report.mean_gap <= 1e-6
        assert report.initial_loss == pytest.approx(23.0)
        assert report.final_loss == pytest.approx(21.2)

    def test_zero_steps(self, saturated, d1):
        report = saturated_training_probe(saturated, d1, steps=0)
        assert report.frozen_unchanged
        assert report.constant_output == 0.0

    def test_needs_saturated_start(self, d1):
        with pytest.raises(InvalidInputError, match="saturated"):
            saturated_training_probe(construct_better(d1, [3]), d1)

    def test_negative_steps(self, saturated, d1):
        with pytest.raises(InvalidInputError):
            saturated_training_probe(saturated, d1, steps=-1)

    def test_loss_rule_stops_early(self, saturated, d1):
        cfg = OptimizerConfig(
            learning_rate=0.01,
            max_steps=100,
            success_rule=SuccessRule(kind=SuccessKind.LOSS_BELOW, threshold=1e6),
        )
        trained, result = train_deep_relu(saturated, d1, cfg)
        assert result.steps_used == 0
        assert trained == saturated


@pytest.mark.unit
class TestSeparatingVector:
    def test_one_dimensional(self, d1):
        v, gamma = find_separating_vector(d1, 0)
        assert v.tolist() == [2.5]
        assert gamma == pytest.approx(12.5)

    def test_two_dimensional_margin(self):
        d = builtin(BuiltinName.FXOR)
        v, gamma = find_separating_vector(d, 1, seed=4)
        assert gamma == pytest.approx(float(v @ d.x[1]))
        gaps = np.abs((np.delete(d.x, 1, axis=0) - d.x[1]) @ v)
        assert gaps.min() >= SEPARATION_MARGIN - 1e-9

    def test_index_out_of_range(self, d1):
        with pytest.raises(InvalidInputError):
            find_separating_vector(d1, 5)


@pytest.mark.unit
class TestConstructBetter:
    def test_single_hidden_layer(self, d1):
        better = construct_better(d1, [3])
        np.testing.assert_allclose(deep_relu_outputs(better, d1.x), [2.0, 0.25, 0.25, 0.25, 0.25])
        assert deep_relu_loss(better, d1) == pytest.approx(18.75)

    def test_deeper_network(self, d1):
        better = construct_better(d1, [4, 2, 3])
        assert better.widths == (4, 2, 3, 1)
        np.testing.assert_allclose(
            deep_relu_outputs(better, d1.x), [2.0, 0.25, 0.25, 0.25, 0.25], atol=1e-12
        )

    def test_reuses_parameter_shape(self, saturated, d1):
        assert construct_better(d1, saturated).widths == saturated.widths

    def test_first_layer_too_narrow(self, d1):
        with pytest.raises(ArchitectureError):
            construct_better(d1, [2])

    def test_not_decent(self):
        d = Dataset(x=np.array([1.0, 2.0]), y=np.array([3.0, 3.0]), task=Task.REGRESSION)
        with pytest.raises(NotDecentError):
            construct_better(d, [3])


@pytest.mark.unit
class TestAnalyze:
    def test_saturated_start(self, saturated, d1):
        report = analyze(saturated, d1)
        assert report.saturated_layers == [1]
        assert report.is_decent
        assert report.witness_r == 0
        assert report.loss_at_theta == pytest.approx(23.0)
        assert report.mean_predictor_loss == pytest.approx(21.2)
        assert report.nu == pytest.approx(2.0)
        assert report.mu == pytest.approx(0.25)
        assert report.loss_at_constructed == pytest.approx(18.75)
        assert report.constructed is not None
        assert report.probe is None

    def test_not_decent(self, saturated):
        d = Dataset(x=np.array([1.0, 2.0]), y=np.array([3.0, 3.0]), task=Task.REGRESSION)
        report = analyze(saturated, d)
        assert not report.is_decent
        assert report.constructed is None
        assert "not decent" in report.note

    def test_already_better(self, d1):
        report = analyze(construct_better(d1, [3]), d1)
        assert report.constructed is None
        assert "already" in report.note


@pytest.mark.slow
def test_construction_beats_mean_on_random_datasets():
    rng = np.random.default_rng(2024)
    with_repeats = 0
    for _ in range(200):
        n = int(rng.integers(3, 21))
        dim = int(rng.integers(1, 5))
        x = rng.normal(size=(n, dim))
        # tail rows repeat earlier inputs with their own labels
        n_dup = int(rng.integers(0, n // 3 + 1))
        for i in range(n - n_dup, n):
            x[i] = x[int(rng.integers(0, n - n_dup))]
        d = Dataset(x=x, y=rng.normal(size=n), task=Task.REGRESSION)
        groups = input_groups(d)
        with_repeats += any(len(members) > 1 for members in groups.values())

        decent, r = is_decent(d)
        assert decent
        witness = groups[d.x[r].tobytes()]
        mean_loss = float(np.sum((d.y - d.y.mean()) ** 2))
        for widths in ([3], [5, 3, 2]):
            better = construct_better(d, widths)
            assert deep_relu_loss(better, d) < mean_loss
            np.testing.assert_allclose(
                deep_relu_outputs(better, d.x)[witness], np.mean(d.y[witness]), atol=1e-9
            )
    assert with_repeats > 0

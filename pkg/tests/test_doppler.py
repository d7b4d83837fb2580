import math

import numpy as np
import pytest

from oamkit.design import design_equal_populations_n2
from oamkit.doppler import (
    LeakageError,
    default_duration,
    recover_weights,
    sidebands_from_weights,
    synthesize_beat_signal,
)
from oamkit.spectrum import WeightVector, pancake_weights


def round_trip(w, omega=1.0, n_max=None):
    s = sidebands_from_weights(w, omega)
    sig = synthesize_beat_signal(s)
    return recover_weights(sig, omega, max(w.weights) if n_max is None else n_max)


class TestSidebands:
    def test_pure_mode(self):
        s = sidebands_from_weights(WeightVector({1: 1.0}), 1.0)
        assert s.lines == ((1, 2.0, 1.0),)

    def test_two_modes(self):
        s = sidebands_from_weights(WeightVector({0: 0.5, 1: 0.5}), 1.0)
        assert s.lines == ((0, 0.0, 0.5), (1, 2.0, 0.5))

    def test_equal_populations(self):
        w = pancake_weights(design_equal_populations_n2(1.0, 0.8))
        s = sidebands_from_weights(w, 2.5)
        assert [dw for _, dw, _ in s.lines] == [0.0, 5.0, 10.0]
        assert np.allclose([p for _, _, p in s.lines], 1 / 3, atol=1e-12)

    def test_empty_modes_dropped(self):
        s = sidebands_from_weights(WeightVector({0: 0.5, 1: 0.0, 2: 0.5}), 1.0)
        assert [n for n, _, _ in s.lines] == [0, 2]

    @pytest.mark.parametrize("omega", [0.0, -1.0])
    def test_omega_positive(self, omega):
        with pytest.raises(ValueError):
            sidebands_from_weights(WeightVector({0: 1.0}), omega)


class TestBeat:
    def test_single_mode_frequency(self):
        omega, n = 0.7, 3
        sig = synthesize_beat_signal(sidebands_from_weights(WeightVector({n: 1.0}), omega))
        spec = np.abs(np.fft.rfft(sig.intensity - sig.intensity.mean()))
        freqs = 2 * np.pi * np.fft.rfftfreq(sig.t.size, 1 / sig.sample_rate)
        assert freqs[np.argmax(spec)] == pytest.approx(2 * n * omega)
        assert np.allclose(sig.intensity, 2 + 2 * np.cos(2 * n * omega * sig.t))

    def test_dft_line_at_four_omega(self):
        sig = synthesize_beat_signal(sidebands_from_weights(WeightVector({0: 0.5, 2: 0.5}), 1.0))
        spec = np.abs(np.fft.rfft(sig.intensity)) / sig.t.size
        cycles = round(sig.duration / math.pi)
        assert spec[2 * cycles] > 0.1
        others = np.delete(spec, [0, 2 * cycles])
        assert others.max() < 1e-10

    def test_default_record(self):
        sig = synthesize_beat_signal(sidebands_from_weights(WeightVector({0: 0.5, 1: 0.5}), 2.0))
        assert sig.duration == pytest.approx(default_duration(2.0))
        assert default_duration(2.0) == pytest.approx(32 * math.pi)

    def test_zero_duration(self):
        with pytest.raises(ValueError):
            synthesize_beat_signal(sidebands_from_weights(WeightVector({1: 1.0}), 1.0), duration=0.0)

    def test_nyquist(self):
        s = sidebands_from_weights(WeightVector({3: 1.0}), 1.0)
        with pytest.raises(ValueError):
            synthesize_beat_signal(s, sample_rate=3.0)


class TestRecover:
    @pytest.mark.parametrize(
        "weights",
        [
            {0: 1 / 3, 1: 1 / 3, 2: 1 / 3},
            {0: 0.0, 1: 0.5, 2: 0.5},
            {0: 0.5, 1: 0.0, 2: 0.5},
            {0: 0.2, 1: 0.8},
            {0: 0.05, 1: 0.1, 2: 0.15, 3: 0.3, 4: 0.4},
        ],
    )
    def test_round_trip(self, weights):
        w = WeightVector(weights)
        rec = round_trip(w)
        assert max(abs(rec.weights[n] - w[n]) for n in w.weights) < 1e-6
        assert not rec.flagged

    @pytest.mark.parametrize("n", [0, 1, 4])
    def test_pure_mode(self, n):
        rec = round_trip(WeightVector({n: 1.0}))
        assert rec.weights[n] == pytest.approx(1, abs=1e-6)

    def test_dirichlet_n10(self, rng):
        for _ in range(5):
            p = rng.dirichlet(np.ones(11))
            w = WeightVector(dict(enumerate(p)))
            rec = round_trip(w, omega=1.3)
            assert np.abs(rec.weights.as_array(0, 10) - p).max() < 1e-6

    def test_truncated_model_flags(self):
        rec = round_trip(WeightVector({0: 0.4, 1: 0.3, 3: 0.3}), n_max=1)
        assert rec.flagged

    def test_leakage(self):
        s = sidebands_from_weights(WeightVector({0: 0.5, 1: 0.5}), 1.0)
        sig = synthesize_beat_signal(s, duration=10.3)
        with pytest.raises(LeakageError):
            recover_weights(sig, 1.0, 1)

    def test_bad_arguments(self):
        sig = synthesize_beat_signal(sidebands_from_weights(WeightVector({1: 1.0}), 1.0))
        with pytest.raises(ValueError):
            recover_weights(sig, 0.0, 1)
        with pytest.raises(ValueError):
            recover_weights(sig, 1.0, -1)

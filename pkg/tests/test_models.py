import math
import numpy as np
import pytest

from src.core.exceptions import UnknownModel
from src.core.experiment import TimingClass
from src.physics.models import (MODELS, HiddenState, HiddenStates, Outcome,
                                Setting, analytic_correlation, get_model,
                                local_correlation, singlet_correlation)
from src.utils.geometry import CHSH_ALICE_SETTINGS, CHSH_BOB_SETTINGS

CHSH_PAIRS = [(a, b) for a in CHSH_ALICE_SETTINGS for b in CHSH_BOB_SETTINGS]
ALL_TIMINGS = list(TimingClass)


@pytest.fixture
def rng():
    return np.random.default_rng(20100612)


def correlation_of(x, y):
    return float(np.mean(x.astype(float) * y))


def test_registry_and_unknown_model():
    assert sorted(MODELS) == ["local", "quantum", "suarez-scarani"]
    assert get_model("suarez-scarani").model_id == "suarez-scarani"
    with pytest.raises(UnknownModel):
        get_model("pr-box")


def test_setting_is_canonicalised():
    assert abs(Setting(-math.pi / 4).angle - 7 * math.pi / 4) < 1e-12
    assert Setting(2 * math.pi).angle == 0.0
    assert 0.0 <= Setting(-1e-300).angle < 2 * math.pi
    with pytest.raises(ValueError):
        Setting(float("inf"))


def test_hidden_state_invariants():
    HiddenState(0.0, (0.0, 0.5))
    with pytest.raises(ValueError):
        HiddenState(2 * math.pi, (0.1, 0.2))
    with pytest.raises(ValueError):
        HiddenState(1.0, (1.0, 0.2))


def test_respond_is_deterministic():
    h = HiddenState(1.234, (0.3, 0.8))
    a, b = Setting(0.0), Setting(math.pi / 4)
    for model_id in MODELS:
        model = get_model(model_id)
        for timing in ALL_TIMINGS:
            first = model.respond(a, b, timing, h)
            assert first == model.respond(a, b, timing, h)
            assert all(isinstance(o, Outcome) for o in first)


def test_local_model_sign_functions():
    model = get_model("local")
    # cos(lambda - a) > 0 -> x = +1, and y = -sgn(cos(lambda - b))
    x, y = model.respond(Setting(0.0), Setting(math.pi), TimingClass.AFTER_AFTER,
                         HiddenState(0.1, (0.9, 0.9)))
    assert (x, y) == (Outcome.PLUS, Outcome.PLUS)


def test_quantum_model_uses_aux_only():
    model = get_model("quantum")
    a, b = Setting(0.0), Setting(0.0)
    x, y = model.respond(a, b, TimingClass.BEFORE_BEFORE, HiddenState(3.0, (0.2, 0.99)))
    assert (x, y) == (Outcome.PLUS, Outcome.MINUS)
    x, y = model.respond(a, b, TimingClass.BEFORE_BEFORE, HiddenState(0.5, (0.7, 0.0)))
    assert (x, y) == (Outcome.MINUS, Outcome.PLUS)


def test_perfect_anticorrelation_for_every_model_and_timing(rng):
    hidden = HiddenStates.draw(rng, 100_000)
    for a in rng.uniform(-10.0, 10.0, size=5):
        setting = Setting(a)
        for model_id in MODELS:
            for timing in ALL_TIMINGS:
                x, y = get_model(model_id).respond_batch(setting, setting, timing, hidden)
                assert np.all(x == -y), (model_id, timing)


def test_local_correlation_matches_numeric_integration():
    lam = (np.arange(1_000_000) + 0.5) * (2 * math.pi / 1_000_000)
    hidden = HiddenStates(lam, np.zeros((len(lam), 2)))
    model = get_model("local")
    for a, b in [(0.0, 0.3), (0.0, math.pi / 4), (math.pi / 2, -math.pi / 4),
                 (1.0, 1.0 + math.pi), (5.0, 0.2)]:
        x, y = model.respond_batch(a, b, TimingClass.AFTER_AFTER, hidden)
        assert abs(correlation_of(x, y) - float(local_correlation(a, b))) < 2e-5


def test_closed_forms_at_chsh_angles():
    local = [float(local_correlation(a, b)) for a, b in CHSH_PAIRS]
    quantum = [float(singlet_correlation(a, b)) for a, b in CHSH_PAIRS]
    assert local == pytest.approx([-0.5, -0.5, -0.5, 0.5])
    root = 1 / math.sqrt(2)
    assert quantum == pytest.approx([-root, -root, -root, root])
    s_local = local[0] + local[1] + local[2] - local[3]
    assert abs(s_local + 2.0) < 1e-12


def test_analytic_correlation_by_timing():
    a, b = CHSH_PAIRS[0]
    assert analytic_correlation("suarez-scarani", a, b, TimingClass.BEFORE_BEFORE) == \
        pytest.approx(-0.5)
    for timing in (TimingClass.ALICE_FIRST, TimingClass.BOB_FIRST, TimingClass.AFTER_AFTER):
        assert analytic_correlation("suarez-scarani", a, b, timing) == \
            pytest.approx(-1 / math.sqrt(2))
    assert analytic_correlation("local", a, b, TimingClass.ALICE_FIRST) == pytest.approx(-0.5)


def test_empirical_correlations_follow_closed_forms(rng):
    n = 200_000
    hidden = HiddenStates.draw(rng, n)
    for model_id in MODELS:
        model = get_model(model_id)
        for timing in ALL_TIMINGS:
            for a, b in CHSH_PAIRS:
                x, y = model.respond_batch(a, b, timing, hidden)
                expected = float(model.correlation(a, b, timing))
                stderr = math.sqrt((1 - expected**2) / n)
                assert abs(correlation_of(x, y) - expected) < 4 * stderr, (model_id, timing)


def test_marginals_are_uniform(rng):
    """Non-signaling at the distribution level: P(x=+1) = P(y=+1) = 1/2."""
    n = 1_000_000
    tol = 4 * math.sqrt(0.25 / n)
    hidden = HiddenStates.draw(rng, n)
    for model_id in MODELS:
        model = get_model(model_id)
        for timing in ALL_TIMINGS:
            for a, b in CHSH_PAIRS:
                x, y = model.respond_batch(a, b, timing, hidden)
                assert abs(np.mean(x > 0) - 0.5) < tol, (model_id, timing, a, b)
                assert abs(np.mean(y > 0) - 0.5) < tol, (model_id, timing, a, b)


def test_alice_marginal_ignores_bobs_setting(rng):
    """With shared hidden states, changing b must not move Alice's marginal."""
    n = 200_000
    tol = 4 * math.sqrt(1.0 / n)
    hidden = HiddenStates.draw(rng, n)
    a = CHSH_ALICE_SETTINGS[0]
    b1, b2 = CHSH_BOB_SETTINGS
    for model_id in MODELS:
        for timing in ALL_TIMINGS:
            model = get_model(model_id)
            x1, _ = model.respond_batch(a, b1, timing, hidden)
            x2, _ = model.respond_batch(a, b2, timing, hidden)
            assert abs(np.mean(x1 > 0) - np.mean(x2 > 0)) < tol


if __name__ == "__main__":
    pytest.main([__file__])

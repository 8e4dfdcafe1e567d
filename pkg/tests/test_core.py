import math
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from src.core.exceptions import (InvalidFrame, InvalidGeometry, NotSpacelike,
                                 TimingDegenerate)
from src.core.experiment import (ExperimentGeometry, TimingClass,
                                 classify_timing, critical_beta,
                                 frame_time_gaps, measurement_events)
from src.core.spacetime import (InertialFrame, SpacetimeEvent, boost,
                                boost_coordinates, interval_squared)
from src.utils.geometry import before_before_geometry, standard_geometry

coords = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
betas = st.floats(min_value=-0.99, max_value=0.99, allow_nan=False)


def symmetric_geometry(alice_beta=0.0, bob_beta=0.0):
    return ExperimentGeometry(source_z=0.0, alice_z=-1.0, bob_z=1.0,
                              alice_beta=alice_beta, bob_beta=bob_beta)


def test_identity_boost():
    e = boost(SpacetimeEvent(1.0, 0.0), InertialFrame(0.0))
    assert e == SpacetimeEvent(1.0, 0.0)


def test_boost_known_values():
    """gamma = 1.25 at beta = 0.6."""
    e = boost(SpacetimeEvent(1.0, 0.0), InertialFrame(0.6))
    assert abs(e.t - 1.25) < 1e-12
    assert abs(e.z + 0.75) < 1e-12


def test_frame_rejects_light_speed():
    with pytest.raises(InvalidFrame):
        InertialFrame(1.0)
    with pytest.raises(InvalidFrame):
        InertialFrame(-1.5)


def test_event_rejects_non_finite():
    with pytest.raises(ValueError):
        SpacetimeEvent(float("nan"), 0.0)


def test_interval_examples():
    origin = SpacetimeEvent(0.0, 0.0)
    assert interval_squared(origin, SpacetimeEvent(1.0, 0.0)) == 1.0
    assert interval_squared(origin, SpacetimeEvent(0.0, 1.0)) == -1.0
    assert interval_squared(origin, SpacetimeEvent(1.0, 1.0)) == 0.0


@given(coords, coords, coords, coords, betas)
def test_interval_is_boost_invariant(t1, z1, t2, z2, beta):
    e1, e2 = SpacetimeEvent(t1, z1), SpacetimeEvent(t2, z2)
    frame = InertialFrame(beta)
    before = interval_squared(e1, e2)
    after = interval_squared(boost(e1, frame), boost(e2, frame))
    scale = frame.gamma**2 * (max(abs(t1), abs(z1), abs(t2), abs(z2)) + 1.0)**2
    assert abs(after - before) <= 1e-12 * scale


@given(coords, coords, betas)
def test_boost_inverse_is_identity(t, z, beta):
    e = SpacetimeEvent(t, z)
    back = boost(boost(e, InertialFrame(beta)), InertialFrame(-beta))
    tol = 1e-12 * (1.0 + InertialFrame(beta).gamma**2 * (abs(t) + abs(z)))
    assert abs(back.t - t) <= tol
    assert abs(back.z - z) <= tol


def test_ten_thousand_random_boosts():
    """Interval invariance and boost inversion over 10^4 seeded random boosts."""
    rng = np.random.default_rng(2006)
    betas = rng.uniform(-0.95, 0.95, size=10_000)
    ts = rng.uniform(-10.0, 10.0, size=(10_000, 2))
    zs = rng.uniform(-10.0, 10.0, size=(10_000, 2))
    for beta, t, z in zip(betas, ts, zs):
        t_b, z_b = boost_coordinates(t, z, beta)
        before = (t[1] - t[0])**2 - (z[1] - z[0])**2
        after = (t_b[1] - t_b[0])**2 - (z_b[1] - z_b[0])**2
        assert abs(after - before) < 1e-9
        t_back, z_back = boost_coordinates(t_b, z_b, -beta)
        assert np.allclose(t_back, t, rtol=0.0, atol=1e-10)
        assert np.allclose(z_back, z, rtol=0.0, atol=1e-10)


def test_measurement_events_symmetric_arms():
    alice, bob = measurement_events(symmetric_geometry())
    assert alice == SpacetimeEvent(1.0, -1.0)
    assert bob == SpacetimeEvent(1.0, 1.0)


def test_measurement_events_standard_arms():
    alice, bob = measurement_events(standard_geometry())
    assert alice == SpacetimeEvent(0.9, 0.9)
    assert bob == SpacetimeEvent(1.0, -1.0)
    assert abs(interval_squared(alice, bob) - (0.01 - 3.61)) < 1e-12


def test_emission_time_shifts_events():
    g = ExperimentGeometry(source_z=0.0, alice_z=-1.0, bob_z=1.0, emission_t=5.0)
    alice, bob = measurement_events(g)
    assert alice.t == 6.0 and bob.t == 6.0


def test_geometry_invariants():
    with pytest.raises(InvalidGeometry) as excinfo:
        ExperimentGeometry(source_z=0.0, alice_z=-1.0, bob_z=1.0, alice_beta=1.5)
    assert excinfo.value.field == "alice_beta"
    with pytest.raises(InvalidGeometry):
        ExperimentGeometry(source_z=0.0, alice_z=0.0, bob_z=1.0)
    with pytest.raises(InvalidGeometry):
        ExperimentGeometry(source_z=0.0, alice_z=1.0, bob_z=1.0)
    with pytest.raises(InvalidGeometry):
        ExperimentGeometry(source_z=0.0, alice_z=-1.0, bob_z=float("inf"))


def test_before_before_classification():
    g = symmetric_geometry(alice_beta=-0.1, bob_beta=0.1)
    assert classify_timing(g) is TimingClass.BEFORE_BEFORE

    gamma = 1.0 / math.sqrt(1.0 - 0.01)
    assert abs(gamma - 1.00504) < 1e-5
    gap_alice, gap_bob = frame_time_gaps(g)
    # Alice's frame: Alice at gamma*0.9, Bob at gamma*1.1
    assert abs(gap_alice - gamma * 0.2) < 1e-12
    assert abs(gamma * 0.9 - 0.9045) < 1e-4
    assert abs(gamma * 1.1 - 1.1055) < 1e-4
    assert abs(gap_bob - gap_alice) < 1e-12


def test_standard_geometry_is_alice_first():
    assert classify_timing(standard_geometry()) is TimingClass.ALICE_FIRST
    assert classify_timing(standard_geometry().mirrored()) is TimingClass.BOB_FIRST


def test_reversed_velocities_give_after_after():
    g = symmetric_geometry(alice_beta=0.1, bob_beta=-0.1)
    assert classify_timing(g) is TimingClass.AFTER_AFTER


def test_canonical_before_before_geometry():
    g = before_before_geometry()
    assert (g.alice_beta, g.bob_beta) == (-0.1, 0.1)
    assert classify_timing(g) is TimingClass.BEFORE_BEFORE


def test_simultaneous_events_are_degenerate():
    with pytest.raises(TimingDegenerate):
        classify_timing(symmetric_geometry())


def test_epsilon_controls_degeneracy():
    g = symmetric_geometry(alice_beta=-1e-6, bob_beta=1e-6)
    assert classify_timing(g, epsilon=1e-9) is TimingClass.BEFORE_BEFORE
    with pytest.raises(TimingDegenerate):
        classify_timing(g, epsilon=1e-3)


def test_lightlike_events_rejected():
    g = ExperimentGeometry(source_z=0.0, alice_z=0.1, bob_z=5.0)
    with pytest.raises(NotSpacelike):
        classify_timing(g)
    with pytest.raises(NotSpacelike):
        critical_beta(g)


@given(betas, betas)
def test_party_swap_symmetry(alice_beta, bob_beta):
    g = ExperimentGeometry(source_z=0.0, alice_z=0.9, bob_z=-1.0,
                           alice_beta=alice_beta, bob_beta=bob_beta)
    gaps = frame_time_gaps(g)
    assume(min(abs(gaps[0]), abs(gaps[1])) > 1e-6)
    assert classify_timing(g.mirrored()) is classify_timing(g).swapped()


def test_critical_beta():
    assert critical_beta(symmetric_geometry()) == 0.0
    assert abs(critical_beta(standard_geometry()) - 0.1 / -1.9) < 1e-12


def test_receding_flips_order_past_critical_speed():
    """Alice stays first in her frame; Bob becomes first once faster than |critical_beta|."""
    g = standard_geometry()
    threshold = abs(critical_beta(g))
    assert classify_timing(g.receding(0.5 * threshold)) is TimingClass.ALICE_FIRST
    assert classify_timing(g.receding(2.0 * threshold)) is TimingClass.BEFORE_BEFORE


if __name__ == "__main__":
    pytest.main([__file__])

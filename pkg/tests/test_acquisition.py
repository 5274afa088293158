import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmoo_ecs.acquisition import (
    Criterion,
    McReferenceSet,
    ObservabilityModel,
    ObservedFront,
    expected_improvement,
    improvement_probabilities,
    p_observable,
    refresh_box,
    weighted_criterion,
)
from bmoo_ecs.pareto import ExtendedBox, weakly_dominated

from oracles import closed_form_ei


class FixedPosterior:
    """Stand-in surrogate returning prescribed means/stds for every x.

    ``means``/``stds`` may be callables of X for location-dependent posteriors.
    """

    def __init__(self, means, stds):
        self.means, self.stds = means, stds

    def predict(self, X):
        X = np.atleast_2d(X)
        m = self.means(X) if callable(self.means) else np.tile(self.means, (len(X), 1))
        s = self.stds(X) if callable(self.stds) else np.tile(self.stds, (len(X), 1))
        return np.asarray(m, dtype=float), np.asarray(s, dtype=float)


def _one_d_setup(n_points=16384, seed=0, y_star=1.0):
    box = ExtendedBox([-5.0], [5.0], np.zeros(0))
    front = ObservedFront.from_observations([[y_star]], np.zeros((1, 0)), box)
    refs = McReferenceSet.sample(box, front, np.random.default_rng(seed), n_points=n_points)
    return box, front, refs


# --- observability ------------------------------------------------------------

def test_observability_fractions():
    X = np.array([[0.0], [0.1], [0.2], [0.3], [0.4], [5.0], [6.0]])
    labels = [True, True, True, False, False, False, False]
    model = ObservabilityModel(X, labels, [0.0], [10.0], k=5)
    assert p_observable(model, np.array([0.2])) == pytest.approx(0.6)
    all_ok = ObservabilityModel(X[:5], [True] * 5, [0.0], [10.0])
    assert p_observable(all_ok, np.array([0.2])) == 1.0


def test_observability_with_fewer_points_than_k():
    model = ObservabilityModel(np.array([[0.0], [1.0]]), [True, False], [0.0], [1.0], k=5)
    for x in (0.0, 0.3, 1.0):
        assert p_observable(model, np.array([x])) == 0.5


def test_observability_empty_model_is_optimistic():
    model = ObservabilityModel(np.empty((0, 2)), [], [0, 0], [1, 1])
    assert p_observable(model, np.array([0.5, 0.5])) == 1.0


def test_observability_ties_use_insertion_order():
    # two labeled points at the same distance, k = 1: the first inserted wins
    X = np.array([[0.0], [2.0]])
    model = ObservabilityModel(X, [False, True], [0.0], [2.0], k=1)
    assert p_observable(model, np.array([1.0])) == 0.0
    model = ObservabilityModel(X[::-1], [True, False], [0.0], [2.0], k=1)
    assert p_observable(model, np.array([1.0])) == 1.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 30), k=st.integers(1, 7))
def test_observability_granularity(seed, n, k):
    rng = np.random.default_rng(seed)
    model = ObservabilityModel(rng.random((n, 3)), rng.random(n) < 0.5, np.zeros(3), np.ones(3), k=k)
    p = model.predict(rng.random((10, 3)))
    m = min(k, n)
    assert np.all((p >= 0) & (p <= 1))
    assert np.allclose(p * m, np.round(p * m))


# --- reference set ------------------------------------------------------------

def test_reference_points_inside_box_and_undominated():
    box = ExtendedBox([0.0, 0.0], [4.0, 4.0], [1.0, 2.0, 3.0])
    F = np.array([[1.0, 3.0], [2.0, 1.0]])
    C = np.array([[-1.0, -1.0, -1.0], [-0.5, -1.0, -2.0]])
    front = ObservedFront.from_observations(F, C, box)
    refs = McReferenceSet.sample(box, front, np.random.default_rng(0))
    Z = refs.objective_points
    assert Z.shape[0] >= 1000
    assert np.all((Z >= box.obj_lower) & (Z <= box.obj_upper))
    assert not weakly_dominated(Z, front.feasible_objectives).any()
    # once a feasible point exists the violation region is fully dominated
    assert refs.violation_points.shape[0] == 0
    # inclusion-exclusion: [1,4]x[3,4] and [2,4]x[1,4] overlap on [2,4]x[3,4]
    dominated_area = 3 * 1 + 2 * 3 - 2 * 1
    est = refs.objective_weight * Z.shape[0]
    assert est == pytest.approx(16 - dominated_area, rel=0.02)


def test_violation_refs_before_any_feasible_point():
    box = ExtendedBox([0.0], [1.0], [2.0, 2.0])
    F = np.array([[0.5], [0.6]])
    C = np.array([[1.0, 0.5], [0.2, 1.5]])
    front = ObservedFront.from_observations(F, C, box)
    refs = McReferenceSet.sample(box, front, np.random.default_rng(1))
    assert refs.objective_points.shape[0] == 0 and not refs.objective_active
    V = refs.violation_points
    assert np.all((V >= 0) & (V <= 2.0))
    assert not weakly_dominated(V, front.violations).any()
    # inclusion-exclusion over the two dominated rectangles in [0, 2]^2
    undominated = 4.0 - (1.0 * 1.5 + 1.8 * 0.5 - 1.0 * 0.5)
    assert refs.violation_weight * V.shape[0] == pytest.approx(undominated, rel=0.02)


def test_refresh_box_pads_feasible_range():
    F = np.array([[1.0, 10.0], [3.0, 20.0], [0.0, 0.0]])
    C = np.array([[-1.0], [-2.0], [5.0]])
    box = refresh_box(F, C, 2, pad=0.2)
    assert np.allclose(box.obj_lower, [1.0 - 0.4, 10.0 - 2.0])
    assert np.allclose(box.obj_upper, [3.0 + 0.4, 20.0 + 2.0])
    assert box.constraint_upper[0] >= 1.0


# --- criterion ----------------------------------------------------------------

@pytest.mark.parametrize("mu,sigma", [(0.5, 0.3), (1.5, 0.5), (0.0, 1.0), (1.2, 0.2), (-1.0, 2.0)])
def test_one_dimensional_reduction_matches_closed_form(mu, sigma):
    box, front, refs = _one_d_setup()
    ei = expected_improvement(FixedPosterior([mu], [sigma]), front, box, refs, np.zeros(1))
    assert ei == pytest.approx(closed_form_ei(mu, sigma, 1.0, -5.0), rel=0.05)


def test_degenerate_dominated_prediction_gives_zero():
    box, front, refs = _one_d_setup()
    assert expected_improvement(FixedPosterior([2.0], [0.0]), front, box, refs, np.zeros(1)) == 0.0
    ei = expected_improvement(FixedPosterior([0.0], [0.0]), front, box, refs, np.zeros(1))
    assert ei == pytest.approx(1.0, rel=0.01)


def test_no_feasible_point_ignores_objective_bounds():
    F = np.array([[0.5, 0.2]])
    C = np.array([[0.3, 0.4]])
    post = FixedPosterior([0.4, 0.4, 0.1, 0.2], [0.2, 0.2, 0.3, 0.3])
    values = []
    for lo in (-1.0, -100.0, 0.3):
        box = ExtendedBox([lo, lo], [1.0, 1.0], [1.0, 1.0])
        front = ObservedFront.from_observations(F, C, box)
        refs = McReferenceSet.sample(box, front, np.random.default_rng(3))
        values.append(expected_improvement(post, front, box, refs, np.zeros(2)))
    assert values[0] == values[1] == values[2] > 0


def test_adding_undominated_reference_never_decreases():
    _, _, refs = _one_d_setup(n_points=4096)
    crit = Criterion(FixedPosterior([0.2], [0.4]), refs, 1)
    base = crit.expected_improvement(np.zeros((1, 1)))[0]
    more = McReferenceSet(np.vstack([refs.objective_points, [[0.9]]]), refs.objective_weight,
                          refs.violation_points, refs.violation_weight, True)
    assert Criterion(FixedPosterior([0.2], [0.4]), more, 1).expected_improvement(np.zeros((1, 1)))[0] >= base


def test_weighting_by_observability():
    _, _, refs = _one_d_setup(n_points=4096)
    post = FixedPosterior([0.2], [0.4])
    X = np.array([[0.0], [0.1], [0.2], [0.3], [0.4]])
    labels = [True, True, True, False, False]
    obs = ObservabilityModel(X, labels, [0.0], [1.0])
    crit = Criterion(post, refs, 1, obs)
    ei = crit.expected_improvement(np.zeros((1, 1)))[0]
    assert weighted_criterion(crit, np.array([0.2])) == pytest.approx(0.6 * ei, rel=1e-15)
    never = Criterion(post, refs, 1, ObservabilityModel(X, [False] * 5, [0.0], [1.0]))
    assert weighted_criterion(never, np.array([0.2])) == 0.0
    always = Criterion(post, refs, 1, ObservabilityModel(X, [True] * 5, [0.0], [1.0]))
    assert weighted_criterion(always, np.array([0.2])) == ei


def test_criterion_non_negative_everywhere():
    rng = np.random.default_rng(4)
    box = ExtendedBox([0.0, 0.0], [1.0, 1.0], [1.0])
    F = rng.random((10, 2))
    C = rng.normal(size=(10, 1))
    front = ObservedFront.from_observations(F, C, box)
    refs = McReferenceSet.sample(box, front, rng)
    means = rng.normal(size=(200, 3))
    stds = rng.random((200, 3))
    values = improvement_probabilities(means, stds, refs, 2)
    assert np.all(values >= 0)


def test_argmax_invariant_to_common_output_scaling():
    from bmoo_ecs.surrogate import fit_surrogates
    rng = np.random.default_rng(5)
    X = rng.random((25, 2))
    Y = np.column_stack([np.sum(X**2, axis=1), np.sum((X - 1) ** 2, axis=1), 0.8 - X.sum(axis=1)])
    s = fit_surrogates(X, Y, rng=np.random.default_rng(0))
    cand = rng.random((300, 2))
    picks = []
    for alpha in (1.0, 7.0):
        Ya = alpha * Y
        box = refresh_box(Ya[:, :2], Ya[:, 2:], 2)
        front = ObservedFront.from_observations(Ya[:, :2], Ya[:, 2:], box)
        refs = McReferenceSet.sample(box, front, np.random.default_rng(9))
        crit = Criterion(s.scaled(alpha), refs, 2)
        picks.append(int(np.argmax(crit.expected_improvement(cand))))
    assert picks[0] == picks[1]


def test_estimator_converges_with_more_references():
    rng = np.random.default_rng(6)
    box = ExtendedBox([0.0, 0.0], [1.0, 1.0], np.zeros(0))
    F = rng.random((6, 2))
    front = ObservedFront.from_observations(F, np.zeros((6, 0)), box)
    xs = rng.random((10, 2))
    post = FixedPosterior(lambda X: 0.3 + 0.4 * X, lambda X: 0.1 + 0.2 * X)
    # estimator spread over independent reference sets at M and 2M
    def estimates(m, reps=12):
        out = []
        for r in range(reps):
            refs = McReferenceSet.sample(box, front, np.random.default_rng(100 + r), n_points=m)
            out.append(Criterion(post, refs, 2).expected_improvement(xs))
        return np.array(out)
    a, b = estimates(4096), estimates(8192)
    se = np.sqrt(a.var(axis=0, ddof=1) / a.shape[0] + b.var(axis=0, ddof=1) / b.shape[0])
    diff = np.abs(a.mean(axis=0) - b.mean(axis=0))
    assert np.all(diff <= 3 * se + 1e-12)
    single = np.abs(a[0] - b[0])
    assert np.all(single <= 3 * a.std(axis=0, ddof=1) + 1e-12)

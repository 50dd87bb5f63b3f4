import json
import math

import numpy as np
import pytest
from scipy.linalg import null_space
from scipy.optimize import minimize

from reurlab.entropy import (
    DiscreteDistribution,
    GriddedDensity,
    cross_entropy,
    differential_entropy,
    relative_entropy_discrete,
    shannon_entropy,
)
from reurlab.errors import InfeasibleError, UnsupportedFamilyError, ValidationError
from reurlab.maxent import (
    MomentConstraint,
    bessel_ratio,
    fit_boltzmann,
    fit_gaussian,
    fit_general_moments,
    fit_uniform,
    fit_von_mises,
    log_density,
    model_from_json,
    model_to_json,
    solve_moment_dual,
    to_density,
    to_distribution,
)

# independent oracles


def bessel_i0(x):
    total, term, k = 0.0, 1.0, 0
    while term > 1e-24 * max(total, 1.0):
        total += term
        k += 1
        term *= (x / 2.0) ** 2 / (k * k)
    return total


def bessel_i1(x):
    total, term, k = 0.0, x / 2.0, 0
    while term > 1e-24 * max(total, 1.0):
        total += term
        k += 1
        term *= (x / 2.0) ** 2 / (k * (k + 1))
    return total


def scalar_entropy(probs):
    return -sum(p * math.log(p) for p in probs if p > 0)


def gibbs_probs(outcomes, gamma):
    w = np.exp(-gamma * np.asarray(outcomes, dtype=float))
    return w / w.sum()


def dual_value(lam, outcomes, moment_rows, targets):
    scores = moment_rows @ lam
    shift = scores.max()
    return shift + math.log(np.exp(scores - shift).sum()) - float(lam @ targets)


def constrained_neighbors(rng, base, moment_rows, count):
    """Distributions sharing base's moments exactly, via null-space moves."""
    rows = np.vstack([np.ones(base.size), moment_rows])
    basis = null_space(rows)
    out = []
    while len(out) < count:
        z = rng.standard_normal(basis.shape[1])
        step = basis @ z
        scale = 0.5 * base.min() / max(np.abs(step).max(), 1e-300)
        p = base + scale * step
        if p.min() > 1e-12:
            out.append(p)
    return out


# uniform family


def test_fit_uniform_entropies():
    assert fit_uniform(6).entropy == pytest.approx(math.log(6), abs=1e-12)
    assert fit_uniform("circle").entropy == pytest.approx(math.log(2 * math.pi), abs=1e-12)
    assert fit_uniform((0.0, 0.5)).entropy == pytest.approx(-math.log(2), abs=1e-12)
    with pytest.raises(ValidationError):
        fit_uniform(0)
    with pytest.raises(ValidationError):
        fit_uniform((1.0, 1.0))
    with pytest.raises(ValidationError):
        fit_uniform("sphere")


def test_uniform_renders_flat():
    model = fit_uniform(4)
    p = to_distribution(model, [0.0, 1.0, 2.0, 3.0])
    assert np.allclose(p.probs, 0.25, atol=1e-15)


# boltzmann family


def test_fit_boltzmann_uniform_target():
    model = fit_boltzmann([0.0, 1.0, 2.0], target_mean=1.0)
    assert model.params["gamma"] == pytest.approx(0.0, abs=1e-10)
    assert model.entropy == pytest.approx(math.log(3), abs=1e-10)


def test_fit_boltzmann_recovers_unit_gamma():
    # mean of exp(-x)/Z over {0, 1} fed back in must return gamma = 1
    target = float(gibbs_probs([0.0, 1.0], 1.0) @ np.array([0.0, 1.0]))
    model = fit_boltzmann([0.0, 1.0], target_mean=target)
    assert model.params["gamma"] == pytest.approx(1.0, abs=1e-10)


def test_fit_boltzmann_near_hull_edge():
    outcomes = [0.0, 1.0, 2.0]
    model = fit_boltzmann(outcomes, target_mean=1.999)
    p = to_distribution(model, outcomes)
    assert p.mean() == pytest.approx(1.999, abs=1e-9)
    assert model.entropy < 0.02
    assert model.entropy == pytest.approx(scalar_entropy(p.probs), abs=1e-10)


def test_fit_boltzmann_random_targets_match_direct_normalization():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 8))
        outcomes = np.sort(rng.standard_normal(n) * 2)
        if np.unique(outcomes).size != n:
            continue
        lo, hi = outcomes.min(), outcomes.max()
        target = lo + (hi - lo) * rng.uniform(0.05, 0.95)
        model = fit_boltzmann(outcomes, target)
        p = to_distribution(model, outcomes)
        expected = gibbs_probs(outcomes, model.params["gamma"])
        assert np.allclose(p.probs, np.sort(expected[np.argsort(outcomes)]), atol=0) or \
            np.allclose(p.probs, expected[np.argsort(outcomes)], atol=1e-12)
        assert abs(p.mean() - target) <= 1e-9


def test_fit_boltzmann_infeasible_targets():
    with pytest.raises(InfeasibleError):
        fit_boltzmann([0.0, 1.0], target_mean=1.5)
    with pytest.raises(InfeasibleError):
        fit_boltzmann([0.0, 1.0], target_mean=1.0)  # open hull excludes endpoints
    with pytest.raises(ValidationError):
        fit_boltzmann([1.0], target_mean=1.0)


# general moment family


def test_single_mean_constraint_reduces_to_boltzmann():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        outcomes = np.sort(rng.uniform(-3, 3, n))
        if np.unique(outcomes).size != n:
            continue
        target = float(rng.uniform(outcomes.min() + 0.1, outcomes.max() - 0.1))
        general = fit_general_moments(outcomes, [MomentConstraint("power", target, 1)])
        boltz = fit_boltzmann(outcomes, target)
        pg = to_distribution(general, outcomes)
        pb = to_distribution(boltz, outcomes)
        assert np.abs(pg.probs - pb.probs).max() <= 1e-9
        assert general.params["multipliers"][0] == pytest.approx(
            -boltz.params["gamma"], abs=1e-8
        )


def test_symmetric_moments_give_uniform():
    outcomes = [-1.0, 0.0, 1.0]
    model = fit_general_moments(
        outcomes,
        [MomentConstraint("power", 0.0, 1), MomentConstraint("power", 2.0 / 3.0, 2)],
    )
    p = to_distribution(model, outcomes)
    assert np.allclose(p.probs, 1.0 / 3.0, atol=1e-10)


def test_mean_variance_fit_matches_independent_minimizer():
    outcomes = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    constraints = [MomentConstraint("power", 0.0, 1), MomentConstraint("power", 1.0, 2)]
    model = fit_general_moments(outcomes, constraints)
    rows = np.column_stack([outcomes, outcomes**2])
    targets = np.array([0.0, 1.0])
    res = minimize(
        dual_value, np.zeros(2), args=(outcomes, rows, targets),
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 5000},
    )
    assert np.abs(np.array(model.params["multipliers"]) - res.x).max() <= 1e-6
    p = to_distribution(model, outcomes)
    assert p.mean() == pytest.approx(0.0, abs=1e-10)
    assert p.moment(2) == pytest.approx(1.0, abs=1e-10)
    # entropy identity: S = -lambda0 - sum lambda_j t_j, and equals the
    # entropy of the rendered distribution
    lam = model.params["multipliers"]
    assert model.entropy == pytest.approx(
        -model.params["lambda0"] - lam[0] * 0.0 - lam[1] * 1.0, abs=1e-12
    )
    assert model.entropy == pytest.approx(scalar_entropy(p.probs), abs=1e-10)


def test_dual_descent_is_monotone():
    outcomes = np.linspace(-2, 2, 9)
    constraints = [MomentConstraint("power", 0.3, 1), MomentConstraint("power", 1.1, 2)]
    sol = solve_moment_dual(outcomes, constraints)
    path = sol["dual_path"]
    assert all(b <= a + 1e-12 for a, b in zip(path, path[1:]))
    assert sol["residual"] <= 1e-10
    assert sol["iterations"] >= 1


def test_general_moments_infeasible_target():
    with pytest.raises(InfeasibleError):
        fit_general_moments([0.0, 1.0], [MomentConstraint("power", 1.5, 1)])
    with pytest.raises(InfeasibleError):
        # variance above the maximum reachable on {-1, 1} with mean 0.9
        fit_general_moments(
            [-1.0, 0.0, 1.0],
            [MomentConstraint("power", 0.9, 1), MomentConstraint("power", 2.0, 2)],
        )


def test_degenerate_moment_functions_still_fit():
    # on {0, 1} the first and second powers coincide; the dual is rank
    # deficient but the fit must still hit the target
    outcomes = [0.0, 1.0]
    model = fit_general_moments(
        outcomes,
        [MomentConstraint("power", 0.3, 1), MomentConstraint("power", 0.3, 2)],
    )
    p = to_distribution(model, outcomes)
    assert p.probs[1] == pytest.approx(0.3, abs=1e-9)


def test_indicator_and_circular_constraints():
    outcomes = np.array([0.0, 1.0, 2.0, 3.0])
    model = fit_general_moments(outcomes, [MomentConstraint("indicator", 0.4, at=2.0)])
    p = to_distribution(model, outcomes)
    assert p.probs[2] == pytest.approx(0.4, abs=1e-10)
    # remaining mass splits evenly: nothing else is constrained
    assert np.allclose(p.probs[[0, 1, 3]], 0.2, atol=1e-10)

    angles = np.linspace(0, 2 * math.pi, 8, endpoint=False)
    model = fit_general_moments(angles, [MomentConstraint("cos", 0.5)])
    p = to_distribution(model, angles)
    assert float(p.probs @ np.cos(angles)) == pytest.approx(0.5, abs=1e-10)


def test_moment_constraint_validation():
    with pytest.raises(UnsupportedFamilyError):
        MomentConstraint("cubic", 0.0)
    with pytest.raises(ValidationError):
        MomentConstraint("power", math.inf)
    with pytest.raises(ValidationError):
        MomentConstraint("power", 0.0, degree=0)
    desc = MomentConstraint("indicator", 0.25, at=1.5).descriptor()
    again = MomentConstraint.from_descriptor(desc)
    assert again == MomentConstraint("indicator", 0.25, at=1.5)


# gaussian family


def test_fit_gaussian_entropies():
    assert fit_gaussian(0.0, 1.0).entropy == pytest.approx(
        0.5 * math.log(2 * math.pi * math.e), abs=1e-12
    )
    assert fit_gaussian(3.0, 1.0 / (2 * math.pi * math.e)).entropy == pytest.approx(
        0.0, abs=1e-12
    )
    # doubling sigma adds ln 2
    assert fit_gaussian(0.0, 4.0).entropy - fit_gaussian(0.0, 1.0).entropy == (
        pytest.approx(math.log(2), abs=1e-12)
    )
    with pytest.raises(InfeasibleError):
        fit_gaussian(0.0, 0.0)
    with pytest.raises(ValidationError):
        fit_gaussian(math.nan, 1.0)


def test_gaussian_renders_closed_form():
    model = fit_gaussian(0.5, 2.0)
    spacing = 1.0 / 64.0
    n = int(round(24 / spacing)) + 1
    grid = -11.5 + spacing * np.arange(n)
    f = to_density(model, grid)
    expected = np.exp(-((grid - 0.5) ** 2) / 4.0) / math.sqrt(4 * math.pi)
    assert np.abs(f.values - expected).max() <= 1e-12
    assert differential_entropy(f) == pytest.approx(model.entropy, abs=1e-7)


def test_gaussian_rejects_grid_missing_mass():
    model = fit_gaussian(0.0, 1.0)
    grid = np.linspace(-1.0, 1.0, 129)
    with pytest.raises(ValidationError):
        to_density(model, grid)


# von mises family


def test_bessel_ratio_against_series():
    for kappa in (0.3, 1.0, 5.0, 20.0):
        assert bessel_ratio(kappa) == pytest.approx(
            bessel_i1(kappa) / bessel_i0(kappa), abs=1e-12
        )
    assert bessel_ratio(0.0) == 0.0
    with pytest.raises(ValidationError):
        bessel_ratio(-1.0)


def test_fit_von_mises_examples():
    flat = fit_von_mises(0.0)
    assert flat.params["kappa"] == 0.0
    assert flat.entropy == pytest.approx(math.log(2 * math.pi), abs=1e-12)

    r = bessel_i1(1.0) / bessel_i0(1.0)  # about 0.44639
    model = fit_von_mises(r * np.exp(1j * 0.7))
    assert model.params["kappa"] == pytest.approx(1.0, abs=1e-9)
    assert model.params["mu"] == pytest.approx(0.7, abs=1e-12)

    with pytest.raises(InfeasibleError):
        fit_von_mises(1.0)
    with pytest.raises(InfeasibleError):
        fit_von_mises(0.3 + 0.999j)


def test_fit_von_mises_inversion_sweep():
    rng = np.random.default_rng(14)
    for _ in range(50):
        r = float(rng.uniform(0.01, 0.97))
        model = fit_von_mises(r)
        assert abs(bessel_ratio(model.params["kappa"]) - r) <= 1e-12


def test_von_mises_entropy_matches_quadrature():
    for kappa_moment in (0.2, bessel_i1(1.0) / bessel_i0(1.0), 0.8):
        model = fit_von_mises(kappa_moment * np.exp(1j * 1.3))
        n = 4096
        grid = 2 * math.pi * np.arange(n) / n
        f = to_density(model, grid, topology="circle")
        assert differential_entropy(f) == pytest.approx(model.entropy, abs=1e-8)


def test_von_mises_renders_closed_form():
    model = fit_von_mises(0.5)
    kappa = model.params["kappa"]
    n = 1024
    grid = 2 * math.pi * np.arange(n) / n
    f = to_density(model, grid, topology="circle")
    expected = np.exp(kappa * np.cos(grid)) / (2 * math.pi * bessel_i0(kappa))
    assert np.abs(f.values - expected).max() <= 1e-12


# rendering and log densities


def test_to_distribution_requires_matching_support():
    model = fit_boltzmann([0.0, 1.0], target_mean=0.4)
    with pytest.raises(ValueError):
        to_distribution(model, [0.0, 2.0])
    model = fit_uniform(3)
    with pytest.raises(ValueError):
        to_distribution(model, [0.0, 1.0])


def test_log_density_consistent_with_density():
    model = fit_gaussian(0.0, 1.5)
    spacing = 1.0 / 32.0
    grid = -12.0 + spacing * np.arange(int(round(24 / spacing)) + 1)
    f = to_density(model, grid)
    assert np.abs(np.exp(log_density(model, grid)) - f.values).max() <= 1e-12

    vm = fit_von_mises(0.4)
    n = 512
    circle = 2 * math.pi * np.arange(n) / n
    g = to_density(vm, circle, topology="circle")
    assert np.abs(np.exp(log_density(vm, circle, "circle")) - g.values).max() <= 1e-12


# model serialization


def test_model_json_round_trip_is_bit_exact():
    models = [
        fit_uniform(5),
        fit_boltzmann([0.0, 0.7, 1.3], target_mean=0.6),
        fit_general_moments(
            [-1.0, 0.0, 2.0],
            [MomentConstraint("power", 0.4, 1), MomentConstraint("power", 1.2, 2)],
        ),
        fit_gaussian(0.123456789012345, 2.71828182845904),
        fit_von_mises(0.37 * np.exp(0.9j)),
    ]
    for model in models:
        text = model_to_json(model)
        again = model_from_json(text)
        assert again.family == model.family
        assert again.entropy == model.entropy
        assert again.params == model.params
        assert again.support == model.support
        assert model_to_json(again) == text


# identities tying models to divergences


def test_cross_entropy_against_model_collapses():
    # for any p meeting the constraints, <-ln p_max> equals the model entropy
    rng = np.random.default_rng(25)
    outcomes = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    model = fit_boltzmann(outcomes, target_mean=1.4)
    base = to_distribution(model, outcomes).probs
    for p_vals in constrained_neighbors(rng, base, outcomes[None, :], 10):
        p = DiscreteDistribution(outcomes=outcomes, probs=p_vals)
        q = to_distribution(model, outcomes)
        assert cross_entropy(p, q) == pytest.approx(model.entropy, abs=1e-8)
        assert relative_entropy_discrete(p, q) == pytest.approx(
            model.entropy - shannon_entropy(p), abs=1e-8
        )


def test_mismatched_mean_correction_term():
    # fitting to a shifted target adds gamma * (mean(p) - target) to the
    # collapsed divergence
    outcomes = np.array([0.0, 1.0, 2.0])
    p = DiscreteDistribution(outcomes=outcomes, probs=[0.5, 0.3, 0.2])
    shifted_target = 1.1  # p.mean() is 0.7
    model = fit_boltzmann(outcomes, target_mean=shifted_target)
    q = to_distribution(model, outcomes)
    gamma = model.params["gamma"]
    expected = (
        -shannon_entropy(p)
        + model.entropy
        + gamma * (p.mean() - shifted_target)
    )
    assert relative_entropy_discrete(p, q) == pytest.approx(expected, abs=1e-8)


# entropy dominance: the fitted model maximizes entropy in its class


def test_entropy_dominance_discrete_families():
    rng = np.random.default_rng(33)
    outcomes = np.linspace(-2, 2, 7)

    boltz = fit_boltzmann(outcomes, target_mean=0.5)
    base = to_distribution(boltz, outcomes).probs
    for p_vals in constrained_neighbors(rng, base, outcomes[None, :], 100):
        assert scalar_entropy(p_vals) <= boltz.entropy + 1e-5
        assert abs(p_vals @ outcomes - 0.5) <= 1e-9

    rows = np.vstack([outcomes, outcomes**2])
    general = fit_general_moments(
        outcomes,
        [MomentConstraint("power", 0.2, 1), MomentConstraint("power", 1.3, 2)],
    )
    base = to_distribution(general, outcomes).probs
    for p_vals in constrained_neighbors(rng, base, rows, 100):
        assert scalar_entropy(p_vals) <= general.entropy + 1e-5

    uniform = fit_uniform(7)
    for _ in range(100):
        w = rng.random(7) + 1e-3
        assert scalar_entropy(w / w.sum()) <= uniform.entropy + 1e-5


def test_entropy_dominance_gaussian():
    # two-component mixtures with matched mean 0 and variance 1
    rng = np.random.default_rng(34)
    spacing = 1.0 / 128.0
    n = int(round(24 / spacing)) + 1
    grid = -12.0 + spacing * np.arange(n)
    target_entropy = fit_gaussian(0.0, 1.0).entropy
    found = 0
    while found < 100:
        w = float(rng.uniform(0.2, 0.8))
        mu1 = float(rng.uniform(-1.0, 1.0))
        s1 = float(rng.uniform(0.4, 1.2))
        mu2 = -w * mu1 / (1.0 - w)
        s2sq = (1.0 - w * (s1 * s1 + mu1 * mu1)) / (1.0 - w) - mu2 * mu2
        if s2sq < 0.05:
            continue
        s2 = math.sqrt(s2sq)
        vals = w * np.exp(-((grid - mu1) ** 2) / (2 * s1 * s1)) / (
            s1 * math.sqrt(2 * math.pi)
        ) + (1 - w) * np.exp(-((grid - mu2) ** 2) / (2 * s2 * s2)) / (
            s2 * math.sqrt(2 * math.pi)
        )
        f = GriddedDensity(start=grid[0], spacing=spacing, values=vals)
        assert differential_entropy(f) <= target_entropy + 1e-5
        found += 1


def test_entropy_dominance_von_mises():
    rng = np.random.default_rng(35)
    model = fit_von_mises(0.5)
    n = 512
    spacing = 2 * math.pi / n
    grid = spacing * np.arange(n)
    base = to_density(model, grid, topology="circle").values
    # circle quadrature is a plain rectangle rule, so moment rows are exact
    rows = np.vstack([np.cos(grid), np.sin(grid)]) * spacing
    ones = np.ones(n) * spacing
    basis = null_space(np.vstack([ones, rows]))
    checked = 0
    while checked < 100:
        z = rng.standard_normal(basis.shape[1])
        step = basis @ z
        scale = 0.5 * base.min() / max(np.abs(step).max(), 1e-300)
        vals = base + scale * step
        if vals.min() <= 1e-12:
            continue
        f = GriddedDensity(start=0.0, spacing=spacing, values=vals, topology="circle")
        assert differential_entropy(f) <= model.entropy + 1e-5
        checked += 1

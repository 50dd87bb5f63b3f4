"""Experiment drivers shared by the CLI and the HTTP service.

Every driver takes a validated request and returns a plain dict that the
canonical serializer can emit byte-identically for identical inputs, so
reports never contain wall-clock times or other run-dependent noise.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .angular import (
    AngularSystem,
    continuum_sweep,
    phase_state,
    reur_angular_experiment,
    verify_completeness,
)
from .entropy import (
    DiscreteDistribution,
    GriddedDensity,
    circular_moment,
    density_mean,
    density_variance,
    shannon_entropy,
)
from .errors import ValidationError
from .maxent import (
    MomentConstraint,
    bessel_ratio,
    fit_boltzmann,
    fit_gaussian,
    fit_general_moments,
    fit_uniform,
    fit_von_mises,
    model_to_json,
    to_distribution,
)
from .quantum import (
    maximally_mixed,
    measure_projective,
    random_density_matrix,
    random_orthonormal_basis,
    von_neumann_entropy,
)
from .reur import (
    evaluate_maassen_uffink,
    evaluate_reur_continuous,
    evaluate_reur_discrete,
    evaluate_reur_relative_only,
    robertson_strengthened,
    wavefunction_to_densities,
)
from .schemas import (
    AngularRequest,
    ContinuousRequest,
    MaxentFitRequest,
    VerifyRequest,
)
from .waves import (
    gaussian_packet,
    gaussian_superposition,
    oscillator_state,
    symmetric_grid,
)

VERIFY_RELATIONS = ("maassen_uffink", "reur_discrete", "reur_relative_only")
MAX_VIOLATION_ROWS = 100


# ---------------------------------------------------------------------------
# verify


def _fit_model_pair(family: str, p: DiscreteDistribution, q: DiscreteDistribution):
    """Fit one model per measured distribution, constraints from the data."""
    if family == "uniform":
        return fit_uniform(p.outcomes.size), fit_uniform(q.outcomes.size)
    if family == "boltzmann":
        return (
            fit_boltzmann(p.outcomes, p.mean()),
            fit_boltzmann(q.outcomes, q.mean()),
        )
    if family == "moments":
        return (
            fit_general_moments(
                p.outcomes,
                [
                    MomentConstraint("power", p.mean(), 1),
                    MomentConstraint("power", p.moment(2), 2),
                ],
            ),
            fit_general_moments(
                q.outcomes,
                [
                    MomentConstraint("power", q.mean(), 1),
                    MomentConstraint("power", q.moment(2), 2),
                ],
            ),
        )
    raise ValidationError(f"unknown model family {family!r}")


def run_verify(req: VerifyRequest) -> dict:
    """Evaluate the three discrete relations on seeded random instances.

    Instance i uses generator seed ``req.seed + i`` for everything it draws
    (rank, state, both bases), so any reported violation can be replayed as
    a one-instance run with that sub-seed. When ``flip_entropy_sign`` is
    set, the state-entropy term enters every bound with the wrong sign, in
    the direction that tightens it; this is a deliberate fault injection
    that must produce violations on any healthy sweep (negative control
    for the harness itself).
    """
    rows: list[dict] = []
    violations: list[dict] = []
    worst: dict | None = None
    inadmissible = 0
    index = 0
    for dim in req.dims:
        for _ in range(req.instances):
            sub_seed = req.seed + index
            rng = np.random.default_rng(sub_seed)
            rank = int(rng.integers(1, dim + 1))
            rho = random_density_matrix(dim, rank=rank, seed=rng)
            basis_a = random_orthonormal_basis(dim, seed=rng)
            basis_b = random_orthonormal_basis(dim, seed=rng)
            p = measure_projective(rho, basis_a)
            q = measure_projective(rho, basis_b)
            model_p, model_q = _fit_model_pair(req.models, p, q)
            s_rho = von_neumann_entropy(rho)
            reports = (
                evaluate_maassen_uffink(
                    rho, basis_a, basis_b, tolerance=req.tolerance
                ),
                evaluate_reur_discrete(
                    rho, basis_a, basis_b, model_p, model_q, tolerance=req.tolerance
                ),
                evaluate_reur_relative_only(
                    rho, basis_a, basis_b, model_p, model_q, tolerance=req.tolerance
                ),
            )
            for report in reports:
                gap = report.gap
                satisfied = report.satisfied
                if req.flip_entropy_sign:
                    gap = gap - 2.0 * s_rho
                    satisfied = bool(gap >= -req.tolerance)
                row = {
                    "index": index,
                    "sub_seed": sub_seed,
                    "dim": dim,
                    "rank": rank,
                    "relation_id": report.relation_id,
                    "lhs": report.lhs,
                    "rhs": report.rhs,
                    "gap": gap,
                    "satisfied": satisfied,
                    "model_inadmissible": report.model_inadmissible,
                    "c": report.c,
                    "lhs_terms": dict(report.lhs_terms),
                    "rhs_terms": dict(report.rhs_terms),
                }
                rows.append(row)
                if report.model_inadmissible:
                    inadmissible += 1
                if not satisfied:
                    violations.append(
                        {
                            "sub_seed": sub_seed,
                            "dim": dim,
                            "rank": rank,
                            "relation_id": report.relation_id,
                            "gap": gap,
                        }
                    )
                if math.isfinite(gap) and (worst is None or gap < worst["gap"]):
                    worst = {
                        "sub_seed": sub_seed,
                        "dim": dim,
                        "rank": rank,
                        "relation_id": report.relation_id,
                        "gap": gap,
                    }
            index += 1
    # construction order is already the canonical (index, relation) order
    rows.sort(key=lambda r: (r["index"], r["relation_id"]))
    return {
        "experiment": "verify",
        "config": req.model_dump(),
        "relations": list(VERIFY_RELATIONS),
        "instance_count": index,
        "evaluation_count": len(rows),
        "violation_count": len(violations),
        "inadmissible_count": inadmissible,
        "all_satisfied": not violations,
        "worst": worst,
        "violations": violations[:MAX_VIOLATION_ROWS],
        "rows": rows,
    }


# ---------------------------------------------------------------------------
# continuous


def _continuous_state(req: ContinuousRequest, x: np.ndarray) -> np.ndarray:
    if req.preset == "gaussian":
        return gaussian_packet(x)
    if req.preset == "squeezed":
        return gaussian_packet(x, sigma_x=req.alpha / math.sqrt(2.0))
    if req.preset == "hermite":
        return oscillator_state(req.order, x)
    return gaussian_superposition(x, req.separation)


def _spread_estimates(req: ContinuousRequest) -> tuple[float, float]:
    """Rough (sigma_x, sigma_k) used only to balance the grid extents."""
    root_half = 1.0 / math.sqrt(2.0)
    if req.preset == "gaussian":
        return root_half, root_half
    if req.preset == "squeezed":
        return req.alpha * root_half, root_half / req.alpha
    if req.preset == "hermite":
        s = math.sqrt(req.order + 0.5)
        return s, s
    return math.sqrt(0.5 + req.separation**2), root_half


def run_continuous(req: ContinuousRequest) -> dict:
    """Position-momentum bounds for one preset pure state.

    The grid spacing balances position and momentum tail coverage from the
    spread estimates; the density constructors then enforce the actual
    tail-mass contract, so a preset that outgrows the grid fails loudly.
    """
    sx_est, sk_est = _spread_estimates(req)
    n = req.grid_points
    spacing = math.sqrt(2.0 * math.pi * sx_est / (sk_est * n))
    x = symmetric_grid(n, spacing)
    psi = _continuous_state(req, x)
    f, g = wavefunction_to_densities(psi, x)
    model_f = fit_gaussian(density_mean(f), density_variance(f))
    model_g = fit_gaussian(density_mean(g), density_variance(g))
    s_rho = 0.0  # every preset is a pure state
    birula = evaluate_reur_continuous(
        f, g, s_rho, model_f, model_g, variant="birula", tolerance=req.tolerance
    )
    frank_lieb = evaluate_reur_continuous(
        f, g, s_rho, model_f, model_g, variant="frank_lieb", tolerance=req.tolerance
    )
    robertson = robertson_strengthened(f, g)
    robertson_ok = bool(
        robertson.sigma_product >= robertson.strengthened_bound - req.tolerance
    )
    return {
        "experiment": "continuous",
        "config": req.model_dump(),
        "grid": {
            "points": n,
            "spacing": spacing,
            "sigma_x_estimate": sx_est,
            "sigma_k_estimate": sk_est,
        },
        "reports": {
            "birula": birula.as_dict(),
            "frank_lieb": frank_lieb.as_dict(),
        },
        "robertson": {
            "sigma_x": robertson.sigma_x,
            "sigma_k": robertson.sigma_k,
            "sigma_product": robertson.sigma_product,
            "robertson_bound": robertson.robertson_bound,
            "strengthened_bound": robertson.strengthened_bound,
            "divergence_sum": robertson.divergence_sum,
            "satisfied": robertson_ok,
        },
        "all_satisfied": bool(
            birula.satisfied and frank_lieb.satisfied and robertson_ok
        ),
    }


# ---------------------------------------------------------------------------
# angular


def run_angular(req: AngularRequest) -> dict:
    """J-sweep of the angle / angular-momentum relations.

    Emits one row per (J, measurement mode) with the standard columns, the
    full sweep reports with the discrete-versus-continuous lhs difference,
    exact-quadrature completeness residuals at 2J+2 points, and an rhs
    invariance table across the requested measure rescalings.
    """

    def state_for(sys: AngularSystem):
        if req.state == "phase":
            return phase_state(sys, m_sigma=req.m_sigma, center=req.theta0)
        return maximally_mixed(sys.dim)

    entries = continuum_sweep(
        state_for,
        req.j_values,
        req.angle_model,
        req.momentum_model,
        req.grid_points,
        req.theta0,
    )
    rows: list[dict] = []
    sweep: list[dict] = []
    completeness: list[dict] = []
    scale_invariance: list[dict] = []
    all_ok = True
    for entry in entries:
        j = entry.two_j / 2.0
        sys = AngularSystem(two_j=entry.two_j, theta0=req.theta0)
        rho = state_for(sys)
        s_rho = von_neumann_entropy(rho)
        for mode, report in (
            ("discrete", entry.discrete),
            ("continuous", entry.continuous),
        ):
            rows.append(
                {
                    "J": j,
                    "mode": mode,
                    "c": report.c,
                    "S_rho": s_rho,
                    "lhs": report.lhs,
                    "rhs": report.rhs,
                    "gap": report.gap,
                    "satisfied": report.satisfied,
                }
            )
            all_ok = all_ok and report.satisfied
        sweep.append(
            {
                "J": j,
                "lhs_discrete_corrected": entry.lhs_discrete_corrected,
                "lhs_continuous": entry.continuous.lhs,
                "lhs_difference": entry.lhs_difference,
                "discrete": entry.discrete.as_dict(),
                "continuous": entry.continuous.as_dict(),
            }
        )
        quad_points = entry.two_j + 2
        completeness.append(
            {
                "J": j,
                "quad_points": quad_points,
                "residual": verify_completeness(sys, quad_points),
            }
        )
        base_rhs = None
        for scale in req.scale_r:
            report = reur_angular_experiment(
                sys,
                rho,
                req.angle_model,
                req.momentum_model,
                mode="continuous",
                scale_r=scale,
                grid_points=req.grid_points,
            )
            if base_rhs is None:
                base_rhs = report.rhs
            scale_invariance.append(
                {
                    "J": j,
                    "scale_r": scale,
                    "lhs": report.lhs,
                    "rhs": report.rhs,
                    "rhs_deviation": abs(report.rhs - base_rhs),
                }
            )
            all_ok = all_ok and report.satisfied
    return {
        "experiment": "angular",
        "config": req.model_dump(),
        "rows": rows,
        "sweep": sweep,
        "completeness": completeness,
        "scale_invariance": scale_invariance,
        "final_lhs_difference": sweep[-1]["lhs_difference"],
        "all_satisfied": bool(all_ok),
    }


# ---------------------------------------------------------------------------
# maxent fit


def _histogram_distribution(pairs: list[tuple[float, float]]) -> DiscreteDistribution:
    outcomes = np.array([float(a) for a, _ in pairs])
    weights = np.array([float(w) for _, w in pairs])
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValidationError("histogram weights must be finite and nonnegative")
    total = float(weights.sum())
    if total <= 0:
        raise ValidationError("histogram weights sum to zero")
    return DiscreteDistribution(outcomes=outcomes, probs=weights / total)


def _payload_density(payload) -> GriddedDensity:
    return GriddedDensity(
        start=payload.grid_start,
        spacing=payload.spacing,
        values=np.asarray(payload.values, dtype=float),
        topology=payload.topology,
    )


def _measured_constraints(
    dist: DiscreteDistribution, specs
) -> list[MomentConstraint]:
    out = []
    for spec in specs:
        probe = MomentConstraint(spec.kind, 0.0, spec.degree, spec.at)
        target = spec.target
        if target is None:
            target = float(np.sum(dist.probs * probe.values(dist.outcomes)))
        out.append(MomentConstraint(spec.kind, target, spec.degree, spec.at))
    return out


def run_maxent_fit(req: MaxentFitRequest) -> dict:
    """Fit the requested family and report the model with fit diagnostics."""
    dist: DiscreteDistribution | None = None
    density: GriddedDensity | None = None
    if req.histogram is not None:
        source = "histogram"
        dist = _histogram_distribution(req.histogram)
    elif req.density is not None:
        source = "density"
        density = _payload_density(req.density)
    else:
        source = "moment"

    residuals: list[float] = []
    diagnostics: dict = {}
    family = req.family
    if family == "uniform":
        if dist is not None:
            model = fit_uniform(int(dist.outcomes.size))
        elif density is not None and density.topology == "circle":
            model = fit_uniform("circle")
        elif density is not None:
            end = density.start + density.spacing * (density.values.size - 1)
            model = fit_uniform((density.start, end))
        else:
            raise ValidationError("the uniform family needs a histogram or density")
    elif family == "boltzmann":
        if dist is None:
            raise ValidationError("the boltzmann family needs a histogram")
        target = dist.mean()
        model = fit_boltzmann(dist.outcomes, target)
        rendered = to_distribution(model, dist.outcomes)
        residuals = [abs(rendered.mean() - target)]
        diagnostics["gamma"] = model.params["gamma"]
        diagnostics["target_mean"] = target
    elif family == "moments":
        if dist is None:
            raise ValidationError("the moments family needs a histogram")
        constraints = _measured_constraints(dist, req.constraints)
        model = fit_general_moments(dist.outcomes, constraints)
        rendered = to_distribution(model, dist.outcomes)
        residuals = [
            abs(float(np.sum(rendered.probs * mc.values(dist.outcomes))) - mc.target)
            for mc in constraints
        ]
        diagnostics["constraints"] = [mc.descriptor() for mc in constraints]
    elif family == "gaussian":
        if dist is not None:
            mean = dist.mean()
            variance = dist.moment(2) - mean**2
        elif density is not None and density.topology == "line":
            mean = density_mean(density)
            variance = density_variance(density)
        else:
            raise ValidationError(
                "the gaussian family needs a histogram or a line density"
            )
        model = fit_gaussian(mean, variance)
        diagnostics["mean"] = mean
        diagnostics["variance"] = variance
    else:  # von_mises
        if req.moment_modulus is not None:
            moment = req.moment_modulus * complex(
                math.cos(req.moment_angle), math.sin(req.moment_angle)
            )
        elif density is not None:
            if density.topology != "circle":
                raise ValidationError("the von_mises family needs a circular density")
            moment = circular_moment(density)
        else:
            moment = complex(
                float(np.sum(dist.probs * np.cos(dist.outcomes))),
                float(np.sum(dist.probs * np.sin(dist.outcomes))),
            )
        model = fit_von_mises(moment)
        kappa = model.params["kappa"]
        residuals = [abs(bessel_ratio(kappa) - abs(moment))]
        diagnostics["kappa"] = kappa
        diagnostics["moment_modulus"] = abs(moment)

    if dist is not None and model.family in ("uniform", "boltzmann", "general_moment"):
        rendered = to_distribution(model, dist.outcomes)
        diagnostics["entropy_deviation"] = abs(
            shannon_entropy(rendered) - model.entropy
        )
    diagnostics["constraint_residuals"] = residuals
    return {
        "experiment": "maxent_fit",
        "config": req.model_dump(),
        "source": source,
        "model": json.loads(model_to_json(model)),
        "diagnostics": diagnostics,
    }

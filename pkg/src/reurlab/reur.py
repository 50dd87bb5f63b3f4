"""Entropic uncertainty relations on relative-entropy ledgers.

Every evaluator returns a ReurReport whose lhs and rhs are sums of named
terms, so each inequality can be audited term by term. ``gap`` is the signed
slack in the relation's own direction (rhs - lhs for upper bounds, lhs - rhs
for the lower-bound entropy-sum relation) and ``satisfied`` means
gap >= -tolerance. Support-violating models give an infinite lhs; when the
rhs stays finite the report is flagged model-inadmissible rather than being
counted as a violation of the inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import (
    GriddedDensity,
    density_mean,
    density_variance,
    differential_entropy,
    relative_entropy_discrete,
    rescale_density,
    shannon_entropy,
)
from .errors import ValidationError
from .maxent import (
    MaxEntModel,
    fit_gaussian,
    log_density,
    to_density,
    to_distribution,
)
from .quantum import (
    DensityMatrix,
    OrthonormalBasis,
    Povm,
    basis_to_povm,
    max_overlap_povm,
    max_overlap_pvm,
    maximally_mixed,
    measure_povm,
    measure_projective,
    quantum_relative_entropy,
    von_neumann_entropy,
)
from .waves import TAIL_MASS_MAX, check_symmetric_grid, fourier_pair

DISCRETE_TOL = 1e-9
CONTINUOUS_TOL = 1e-5
TRIVIAL_SLACK = 1e-12

RELATION_IDS = (
    "robertson",
    "birula",
    "maassen_uffink",
    "frank_lieb",
    "reur_discrete",
    "reur_continuous",
    "reur_relative_only",
    "trivial_bound",
)
_LOWER_BOUND_IDS = frozenset({"maassen_uffink"})


@dataclass
class ReurReport:
    """Term-resolved record of one inequality evaluation."""

    relation_id: str
    lhs_terms: dict[str, float]
    rhs_terms: dict[str, float]
    lhs: float
    rhs: float
    gap: float
    satisfied: bool
    tolerance: float
    c: float
    direction: str
    trivial_bound: float | None = None
    model_inadmissible: bool = False
    fingerprint: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "relation_id": self.relation_id,
            "lhs_terms": dict(self.lhs_terms),
            "rhs_terms": dict(self.rhs_terms),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "satisfied": self.satisfied,
            "tolerance": self.tolerance,
            "c": self.c,
            "direction": self.direction,
            "trivial_bound": self.trivial_bound,
            "model_inadmissible": self.model_inadmissible,
            "fingerprint": dict(self.fingerprint),
        }


def make_report(
    relation_id: str,
    lhs_terms: dict[str, float],
    rhs_terms: dict[str, float],
    tolerance: float,
    c: float,
    trivial_bound: float | None = None,
    fingerprint: dict | None = None,
) -> ReurReport:
    """Assemble a report from term ledgers, handling infinities explicitly."""
    if relation_id not in RELATION_IDS:
        raise ValidationError(f"unknown relation id {relation_id!r}")
    if not (tolerance > 0.0):
        raise ValidationError("tolerance must be positive")
    direction = "lower" if relation_id in _LOWER_BOUND_IDS else "upper"
    lhs = math.fsum(lhs_terms.values()) if all(
        math.isfinite(v) for v in lhs_terms.values()
    ) else math.inf
    rhs = math.fsum(rhs_terms.values()) if all(
        math.isfinite(v) for v in rhs_terms.values()
    ) else math.inf
    inadmissible = False
    if math.isinf(lhs) and direction == "upper":
        if math.isinf(rhs):
            gap = 0.0  # vacuously tight
        else:
            gap = -math.inf
            inadmissible = True
    else:
        gap = (rhs - lhs) if direction == "upper" else (lhs - rhs)
    satisfied = bool(gap >= -tolerance)
    if trivial_bound is not None and math.isfinite(rhs):
        if rhs > trivial_bound + TRIVIAL_SLACK:
            raise RuntimeError(
                f"rhs {rhs!r} exceeds the trivial entropy-sum bound {trivial_bound!r}"
            )
    return ReurReport(
        relation_id=relation_id,
        lhs_terms={k: float(v) for k, v in lhs_terms.items()},
        rhs_terms={k: float(v) for k, v in rhs_terms.items()},
        lhs=float(lhs),
        rhs=float(rhs),
        gap=float(gap),
        satisfied=satisfied,
        tolerance=float(tolerance),
        c=float(c),
        direction=direction,
        trivial_bound=None if trivial_bound is None else float(trivial_bound),
        model_inadmissible=inadmissible,
        fingerprint=dict(fingerprint or {}),
    )


Measurement = OrthonormalBasis | Povm


def _measure(rho: DensityMatrix, meas: Measurement):
    if isinstance(meas, OrthonormalBasis):
        return measure_projective(rho, meas)
    if isinstance(meas, Povm):
        return measure_povm(rho, meas)
    raise TypeError(f"unsupported measurement type {type(meas).__name__}")


def incompatibility(meas_a: Measurement, meas_b: Measurement) -> float:
    """Overlap constant for any mix of projective and POVM measurements."""
    if isinstance(meas_a, OrthonormalBasis) and isinstance(meas_b, OrthonormalBasis):
        return max_overlap_pvm(meas_a, meas_b)
    pa = basis_to_povm(meas_a) if isinstance(meas_a, OrthonormalBasis) else meas_a
    pb = basis_to_povm(meas_b) if isinstance(meas_b, OrthonormalBasis) else meas_b
    if not isinstance(pa, Povm) or not isinstance(pb, Povm):
        raise TypeError("measurements must be bases or POVMs")
    return max_overlap_povm(pa, pb)


def evaluate_maassen_uffink(
    rho: DensityMatrix,
    meas_a: Measurement,
    meas_b: Measurement,
    tolerance: float = DISCRETE_TOL,
) -> ReurReport:
    """Entropy-sum lower bound S(p) + S(q) >= ln(1/c) + S(rho)."""
    p = _measure(rho, meas_a)
    q = _measure(rho, meas_b)
    c = incompatibility(meas_a, meas_b)
    s_rho = von_neumann_entropy(rho)
    return make_report(
        "maassen_uffink",
        lhs_terms={"S(p)": shannon_entropy(p), "S(q)": shannon_entropy(q)},
        rhs_terms={"ln(1/c)": -math.log(c), "S(rho)": s_rho},
        tolerance=tolerance,
        c=c,
        fingerprint={"dim": rho.dim},
    )


def evaluate_reur_discrete(
    rho: DensityMatrix,
    meas_a: Measurement,
    meas_b: Measurement,
    model_p: MaxEntModel,
    model_q: MaxEntModel,
    tolerance: float = DISCRETE_TOL,
) -> ReurReport:
    """Divergence-sum upper bound for two discrete measurements.

    S(p||p_max) + S(q||q_max) <= -ln(1/c) - S(rho) + S(p_max) + S(q_max).
    The rhs is also checked against the trivial entropy-sum bound
    S(p_max) + S(q_max), which it can never exceed.
    """
    p = _measure(rho, meas_a)
    q = _measure(rho, meas_b)
    p_max = to_distribution(model_p, p.outcomes)
    q_max = to_distribution(model_q, q.outcomes)
    c = incompatibility(meas_a, meas_b)
    s_rho = von_neumann_entropy(rho)
    trivial = model_p.entropy + model_q.entropy
    return make_report(
        "reur_discrete",
        lhs_terms={
            "S(p||p_max)": relative_entropy_discrete(p, p_max),
            "S(q||q_max)": relative_entropy_discrete(q, q_max),
        },
        rhs_terms={
            "-ln(1/c)": math.log(c),
            "-S(rho)": -s_rho,
            "S(p_max)": model_p.entropy,
            "S(q_max)": model_q.entropy,
        },
        tolerance=tolerance,
        c=c,
        trivial_bound=trivial,
        fingerprint={"dim": rho.dim, "model_p": model_p.family, "model_q": model_q.family},
    )


def evaluate_trivial_bound(
    rho: DensityMatrix,
    meas_a: Measurement,
    meas_b: Measurement,
    model_p: MaxEntModel,
    model_q: MaxEntModel,
    tolerance: float = DISCRETE_TOL,
) -> ReurReport:
    """Model-entropy-sum bound S(p||p_max) + S(q||q_max) <= S(p_max) + S(q_max).

    Holds whenever the models majorize the measured statistics in entropy;
    it is the incompatibility-free weakening of the divergence-sum bound.
    """
    p = _measure(rho, meas_a)
    q = _measure(rho, meas_b)
    p_max = to_distribution(model_p, p.outcomes)
    q_max = to_distribution(model_q, q.outcomes)
    c = incompatibility(meas_a, meas_b)
    return make_report(
        "trivial_bound",
        lhs_terms={
            "S(p||p_max)": relative_entropy_discrete(p, p_max),
            "S(q||q_max)": relative_entropy_discrete(q, q_max),
        },
        rhs_terms={"S(p_max)": model_p.entropy, "S(q_max)": model_q.entropy},
        tolerance=tolerance,
        c=c,
        fingerprint={"dim": rho.dim},
    )


def _aligned_model_state(
    basis: OrthonormalBasis, rendered_probs: np.ndarray, outcomes: np.ndarray
) -> DensityMatrix:
    # map model probabilities (sorted by outcome) back to basis-vector order
    idx = np.searchsorted(outcomes, basis.labels)
    probs = rendered_probs[idx]
    v = basis.vectors
    return DensityMatrix((v * probs) @ v.conj().T)


def evaluate_reur_relative_only(
    rho: DensityMatrix,
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    model_p: MaxEntModel,
    model_q: MaxEntModel,
    tolerance: float = DISCRETE_TOL,
) -> ReurReport:
    """Divergence-sum bound written purely in quantum relative entropies.

    S(p||p_max) + S(q||q_max)
        <= ln(c d) - S(rho || I/d) + S(rho || rho_X,max) + S(rho || rho_Z,max)
    where rho_X,max dephases the model in the measured basis. Requires
    projective measurements (the dephased model state needs a basis).
    """
    if not isinstance(basis_a, OrthonormalBasis) or not isinstance(
        basis_b, OrthonormalBasis
    ):
        raise TypeError("relative-entropy-only form requires orthonormal bases")
    p = measure_projective(rho, basis_a)
    q = measure_projective(rho, basis_b)
    p_max = to_distribution(model_p, p.outcomes)
    q_max = to_distribution(model_q, q.outcomes)
    c = max_overlap_pvm(basis_a, basis_b)
    d = rho.dim
    ln_cd = math.log(c * d)
    if ln_cd < -1e-12:
        raise RuntimeError(f"ln(c d) = {ln_cd!r} below its floor of 0")
    rho_x = _aligned_model_state(basis_a, p_max.probs, p_max.outcomes)
    rho_z = _aligned_model_state(basis_b, q_max.probs, q_max.outcomes)
    return make_report(
        "reur_relative_only",
        lhs_terms={
            "S(p||p_max)": relative_entropy_discrete(p, p_max),
            "S(q||q_max)": relative_entropy_discrete(q, q_max),
        },
        rhs_terms={
            "ln(c d)": ln_cd,
            "-S(rho||I/d)": -quantum_relative_entropy(rho, maximally_mixed(d)),
            "S(rho||rho_X_max)": quantum_relative_entropy(rho, rho_x),
            "S(rho||rho_Z_max)": quantum_relative_entropy(rho, rho_z),
        },
        tolerance=tolerance,
        c=c,
        fingerprint={"dim": d, "model_p": model_p.family, "model_q": model_q.family},
    )


# ---------------------------------------------------------------------------
# continuous position-momentum pipeline


def wavefunction_to_densities(
    psi: np.ndarray, x: np.ndarray
) -> tuple[GriddedDensity, GriddedDensity]:
    """Position and momentum densities of a normalized wavefunction.

    The grid must be symmetric, power-of-two sized, normalized to 1e-8, and
    long enough that both densities carry at most 1e-9 of mass on their two
    outermost samples per side (tails and aliasing guard).
    """
    n, dx = check_symmetric_grid(x)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (n,):
        raise ValidationError("wavefunction and grid sizes differ")
    f_vals = np.abs(psi) ** 2
    norm = float(f_vals.sum() * dx)
    if abs(norm - 1.0) > 1e-8:
        raise ValidationError(f"wavefunction norm is {norm!r}, expected 1")
    edge_f = float((f_vals[:2].sum() + f_vals[-2:].sum()) * dx)
    if edge_f > TAIL_MASS_MAX:
        raise ValidationError(
            f"position tails carry {edge_f:.3e} mass; enlarge the grid"
        )
    k, psi_hat = fourier_pair(psi, x)
    g_vals = np.abs(psi_hat) ** 2
    dk = float(k[1] - k[0])
    edge_g = float((g_vals[:2].sum() + g_vals[-2:].sum()) * dk)
    if edge_g > TAIL_MASS_MAX:
        raise ValidationError(
            f"momentum tails carry {edge_g:.3e} mass; refine the grid"
        )
    f = GriddedDensity(start=float(x[0]), spacing=dx, values=f_vals, topology="line")
    g = GriddedDensity(start=float(k[0]), spacing=dk, values=g_vals, topology="line")
    return f, g


def _gaussian_fit_for(density: GriddedDensity) -> MaxEntModel:
    return fit_gaussian(density_mean(density), density_variance(density))


def model_relative_entropy(density: GriddedDensity, model: MaxEntModel) -> float:
    """S(density || model) through the model's log pdf.

    Equivalent to rendering the model and calling the generic continuous
    divergence, but safe against pdf underflow in far tails (where rounding
    dust in the data would otherwise read as a support violation).
    """
    logpdf = log_density(model, density.grid, density.topology)
    cross = -density.quadrature(density.values * logpdf)
    return cross - differential_entropy(density)


def evaluate_reur_continuous(
    f: GriddedDensity,
    g: GriddedDensity,
    s_rho: float,
    model_f: MaxEntModel,
    model_g: MaxEntModel,
    variant: str = "frank_lieb",
    tolerance: float = CONTINUOUS_TOL,
) -> ReurReport:
    """Position-momentum divergence-sum bound against Gaussian models.

    variant "frank_lieb": lhs <= -S(rho) + 1 + ln(sigma_x sigma_k)
    variant "birula":     lhs <= ln 2 + ln(sigma_x sigma_k)
    where sigma values come from the fitted models. Models must be Gaussian.
    """
    if variant not in ("frank_lieb", "birula"):
        raise ValidationError(f"unknown continuous variant {variant!r}")
    if model_f.family != "gaussian" or model_g.family != "gaussian":
        raise ValidationError("continuous bounds need Gaussian models")
    if not (s_rho >= 0.0 and math.isfinite(s_rho)):
        raise ValidationError("state entropy must be finite and nonnegative")
    # rendering validates that the grids actually carry the models
    to_density(model_f, f.grid, topology="line")
    to_density(model_g, g.grid, topology="line")
    sigma_x = math.sqrt(model_f.params["variance"])
    sigma_k = math.sqrt(model_g.params["variance"])
    lhs_terms = {
        "S(f||f_max)": model_relative_entropy(f, model_f),
        "S(g||g_max)": model_relative_entropy(g, model_g),
    }
    if variant == "birula":
        rhs_terms = {
            "ln(2)": math.log(2.0),
            "ln(sigma_x*sigma_k)": math.log(sigma_x * sigma_k),
        }
    else:
        rhs_terms = {
            "-S(rho)": -s_rho,
            "+1": 1.0,
            "ln(sigma_x*sigma_k)": math.log(sigma_x * sigma_k),
        }
    trivial = model_f.entropy + model_g.entropy
    return make_report(
        variant,
        lhs_terms=lhs_terms,
        rhs_terms=rhs_terms,
        tolerance=tolerance,
        c=1.0 / (2.0 * math.pi),
        trivial_bound=trivial,
        fingerprint={
            "sigma_x": sigma_x,
            "sigma_k": sigma_k,
            "grid_points": int(f.values.size),
        },
    )


@dataclass
class RobertsonResult:
    """Spread product against the bare and divergence-strengthened floors."""

    sigma_x: float
    sigma_k: float
    sigma_product: float
    robertson_bound: float
    strengthened_bound: float
    divergence_sum: float


def robertson_strengthened(f: GriddedDensity, g: GriddedDensity) -> RobertsonResult:
    """Spread product floor (1/2) e^{S(f||f_max)+S(g||g_max)} from Gaussian models."""
    var_x = density_variance(f)
    var_k = density_variance(g)
    if var_x <= 0.0 or var_k <= 0.0:
        raise ValidationError("degenerate density: zero spread")
    model_f = _gaussian_fit_for(f)
    model_g = _gaussian_fit_for(g)
    to_density(model_f, f.grid)
    to_density(model_g, g.grid)
    divergence_sum = model_relative_entropy(f, model_f) + model_relative_entropy(
        g, model_g
    )
    sigma_x = math.sqrt(var_x)
    sigma_k = math.sqrt(var_k)
    return RobertsonResult(
        sigma_x=sigma_x,
        sigma_k=sigma_k,
        sigma_product=sigma_x * sigma_k,
        robertson_bound=0.5,
        strengthened_bound=0.5 * math.exp(divergence_sum),
        divergence_sum=divergence_sum,
    )


def continuous_general_report(
    f: GriddedDensity,
    g: GriddedDensity,
    s_rho: float,
    scale: float = 1.0,
    tolerance: float = CONTINUOUS_TOL,
) -> ReurReport:
    """General-form continuous bound under a reference-measure rescale x -> x/scale.

    The incompatibility constant becomes scale / (2 pi) while the position
    model entropy drops by ln(scale); the two shifts reach the rhs through
    independent floating-point paths, so rhs invariance across scales is a
    genuine cancellation check.
    """
    if not (scale > 0.0 and math.isfinite(scale)):
        raise ValidationError("scale must be positive and finite")
    f_s = rescale_density(f, scale) if scale != 1.0 else f
    model_f = _gaussian_fit_for(f_s)
    model_g = _gaussian_fit_for(g)
    to_density(model_f, f_s.grid)
    to_density(model_g, g.grid)
    c = scale / (2.0 * math.pi)
    return make_report(
        "reur_continuous",
        lhs_terms={
            "S(f||f_max)": model_relative_entropy(f_s, model_f),
            "S(g||g_max)": model_relative_entropy(g, model_g),
        },
        rhs_terms={
            "-ln(1/c)": math.log(c),
            "-S(rho)": -s_rho,
            "S(f_max)": model_f.entropy,
            "S(g_max)": model_g.entropy,
        },
        tolerance=tolerance,
        c=c,
        # the entropy-sum weakening assumes c <= 1; a large measure rescale
        # can push c above 1, where that floor no longer follows
        trivial_bound=(model_f.entropy + model_g.entropy) if c <= 1.0 else None,
        fingerprint={"scale": scale},
    )


@dataclass
class CovarianceCheck:
    base: ReurReport
    scaled: ReurReport
    rhs_deviation: float
    covariant: bool


def check_normalization_covariance(report_fn, alpha: complex) -> CovarianceCheck:
    """Verify rhs invariance when the reference measure rescales by |alpha|^2.

    ``report_fn(scale)`` must return the general-form continuous report for
    the given measure scale. alpha = 0 is rejected.
    """
    alpha = complex(alpha)
    scale = abs(alpha) ** 2
    if scale == 0.0:
        raise ValidationError("alpha must be nonzero")
    base = report_fn(1.0)
    scaled = report_fn(scale)
    deviation = abs(base.rhs - scaled.rhs)
    return CovarianceCheck(
        base=base,
        scaled=scaled,
        rhs_deviation=deviation,
        covariant=bool(deviation <= 1e-8),
    )

"""Maximum-entropy model fitting under moment constraints.

Closed forms are used where they exist (uniform, Gaussian, von Mises via the
Bessel-ratio inversion, Boltzmann via a one-dimensional monotone solve); the
general discrete case runs a damped Newton iteration on the convex dual.
Fitted models render onto requested outcome sets or grids and serialize to
JSON with exact float round-trips.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, i0e, i1e

from .entropy import DiscreteDistribution, GriddedDensity
from .errors import InfeasibleError, UnsupportedFamilyError, ValidationError
from .serialize import canonical_json

DUAL_RESIDUAL_TOL = 1e-10
BESSEL_RATIO_TOL = 1e-12
MAX_NEWTON_ITER = 200
RENDER_NORM_ATOL = 1e-9
GRID_MASS_MIN = 1.0 - 1e-9

FAMILIES = ("uniform", "boltzmann", "general_moment", "gaussian", "von_mises")
_CONSTRAINT_KINDS = ("power", "indicator", "cos", "sin")


@dataclass(frozen=True)
class MomentConstraint:
    """Equality constraint <m(x)> = target for one real-valued moment function.

    kinds: "power" (x**degree), "indicator" (1 at outcome ``at``),
    "cos" / "sin" (circular moments of angle-valued outcomes).
    """

    kind: str
    target: float
    degree: int = 1
    at: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _CONSTRAINT_KINDS:
            raise UnsupportedFamilyError(f"unknown moment kind {self.kind!r}")
        if not math.isfinite(self.target):
            raise ValidationError("moment target must be finite")
        if self.kind == "power" and self.degree < 1:
            raise ValidationError("power moments need degree >= 1")

    def values(self, outcomes: np.ndarray) -> np.ndarray:
        x = np.asarray(outcomes, dtype=float)
        if self.kind == "power":
            return x**self.degree
        if self.kind == "indicator":
            return (np.abs(x - self.at) <= 1e-12).astype(float)
        if self.kind == "cos":
            return np.cos(x)
        return np.sin(x)

    def descriptor(self) -> dict:
        out: dict = {"kind": self.kind, "target": self.target}
        if self.kind == "power":
            out["degree"] = self.degree
        if self.kind == "indicator":
            out["at"] = self.at
        return out

    @classmethod
    def from_descriptor(cls, payload: dict) -> "MomentConstraint":
        return cls(
            kind=str(payload["kind"]),
            target=float(payload["target"]),
            degree=int(payload.get("degree", 1)),
            at=float(payload.get("at", 0.0)),
        )


@dataclass
class MaxEntModel:
    """Fitted maximum-entropy model: family tag, parameters, entropy, support.

    ``entropy`` is the Shannon entropy (discrete families) or differential
    entropy (continuous families) of the model itself, in nats.
    """

    family: str
    params: dict
    entropy: float
    support: dict

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise UnsupportedFamilyError(f"unknown model family {self.family!r}")


# ---------------------------------------------------------------------------
# fitting


def fit_uniform(support) -> MaxEntModel:
    """Uniform model over a discrete set, an interval, or the circle.

    ``support`` is an int (number of outcomes), an (lower, upper) pair, or
    the string "circle".
    """
    if isinstance(support, bool):
        raise ValidationError("support must be a size, interval, or 'circle'")
    if isinstance(support, (int, np.integer)):
        size = int(support)
        if size < 1:
            raise ValidationError("discrete support needs at least one outcome")
        return MaxEntModel(
            family="uniform",
            params={},
            entropy=math.log(size),
            support={"kind": "discrete", "size": size},
        )
    if isinstance(support, str):
        if support != "circle":
            raise ValidationError(f"unknown uniform support {support!r}")
        return MaxEntModel(
            family="uniform",
            params={},
            entropy=math.log(2.0 * math.pi),
            support={"kind": "circle"},
        )
    lower, upper = (float(support[0]), float(support[1]))
    if not (upper > lower):
        raise ValidationError("interval support needs upper > lower")
    return MaxEntModel(
        family="uniform",
        params={},
        entropy=math.log(upper - lower),
        support={"kind": "interval", "lower": lower, "upper": upper},
    )


def _boltzmann_stats(outcomes: np.ndarray, gamma: float) -> tuple[float, float, float]:
    """log Z, mean, variance of exp(-gamma x) / Z over the outcomes."""
    expo = -gamma * outcomes
    shift = expo.max()
    weights = np.exp(expo - shift)
    z = weights.sum()
    p = weights / z
    mean = float(p @ outcomes)
    var = float(p @ (outcomes - mean) ** 2)
    return float(shift + math.log(z)), mean, var


def fit_boltzmann(outcomes, target_mean: float) -> MaxEntModel:
    """Exponential-family model exp(-gamma x)/Z matching a mean constraint.

    Solved by safeguarded Newton on gamma; the model mean is strictly
    decreasing in gamma, so bisection on an expanding bracket guarantees
    convergence to |mean - target| <= 1e-10.
    """
    x = np.asarray(outcomes, dtype=float).reshape(-1)
    if x.size < 2 or np.unique(x).size != x.size:
        raise ValidationError("need at least two distinct outcomes")
    if not math.isfinite(target_mean):
        raise ValidationError("target mean must be finite")
    if not (x.min() < target_mean < x.max()):
        raise InfeasibleError(
            f"target mean {target_mean!r} outside open hull "
            f"({x.min()!r}, {x.max()!r})"
        )
    gamma = 0.0
    lo, hi = None, None  # bracket: mean(lo) > target > mean(hi)
    for _ in range(MAX_NEWTON_ITER):
        log_z, mean, var = _boltzmann_stats(x, gamma)
        resid = mean - target_mean
        if abs(resid) <= DUAL_RESIDUAL_TOL:
            break
        if resid > 0:
            lo = gamma
        else:
            hi = gamma
        if var > 0:
            step = resid / var
        else:
            step = math.copysign(1.0, resid)
        nxt = gamma + step
        # fall back to bisection / bracket growth when Newton leaves the bracket
        if lo is not None and hi is not None:
            if not (min(lo, hi) < nxt < max(lo, hi)):
                nxt = 0.5 * (lo + hi)
        elif lo is not None and nxt <= lo:
            nxt = lo + max(1.0, 2.0 * abs(lo))
        elif hi is not None and nxt >= hi:
            nxt = hi - max(1.0, 2.0 * abs(hi))
        gamma = nxt
    else:
        raise InfeasibleError(
            f"Boltzmann fit did not converge, residual {resid:.3e}"
        )
    log_z, mean, _ = _boltzmann_stats(x, gamma)
    entropy = log_z + gamma * mean
    return MaxEntModel(
        family="boltzmann",
        params={"gamma": float(gamma), "log_z": float(log_z)},
        entropy=float(entropy),
        support={"kind": "discrete", "outcomes": [float(v) for v in x]},
    )


def solve_moment_dual(outcomes: np.ndarray, constraints: list[MomentConstraint]) -> dict:
    """Damped Newton on the dual of the discrete maximum-entropy problem.

    Minimizes log Z(lambda) - lambda . targets; gradient is the moment
    residual, Hessian the moment covariance. Returns a dict with the
    multipliers, log Z, residual, iteration count, and the dual value path
    (useful for checking monotone descent).
    """
    x = np.asarray(outcomes, dtype=float).reshape(-1)
    m = np.column_stack([c.values(x) for c in constraints])
    t = np.array([c.target for c in constraints])
    lam = np.zeros(len(constraints))

    def dual_parts(lam_vec):
        scores = m @ lam_vec
        shift = scores.max()
        w = np.exp(scores - shift)
        z = w.sum()
        p = w / z
        log_z = shift + math.log(z)
        return log_z - lam_vec @ t, p, log_z

    dual, p, log_z = dual_parts(lam)
    path = [float(dual)]
    iterations = 0
    for iterations in range(1, MAX_NEWTON_ITER + 1):
        grad = m.T @ p - t
        resid = np.abs(grad).max()
        if resid <= DUAL_RESIDUAL_TOL:
            break
        mp = m.T @ p
        hess = (m.T * p) @ m - np.outer(mp, mp)
        try:
            step = np.linalg.solve(
                hess + 1e-14 * np.eye(len(t)), -grad
            )
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
        alpha = 1.0
        for _ in range(60):
            trial = lam + alpha * step
            trial_dual, trial_p, trial_log_z = dual_parts(trial)
            if trial_dual <= dual + 1e-15:
                break
            alpha *= 0.5
        else:
            raise InfeasibleError(
                f"dual line search stalled at residual {resid:.3e}"
            )
        lam, dual, p, log_z = trial, trial_dual, trial_p, trial_log_z
        path.append(float(dual))
    grad = m.T @ p - t
    resid = float(np.abs(grad).max())
    if resid > DUAL_RESIDUAL_TOL:
        raise InfeasibleError(
            f"moment fit did not converge in {MAX_NEWTON_ITER} iterations, "
            f"residual {resid:.3e}"
        )
    return {
        "multipliers": lam,
        "log_z": float(log_z),
        "probs": p,
        "residual": resid,
        "iterations": iterations,
        "dual_path": path,
    }


def fit_general_moments(outcomes, constraints: list[MomentConstraint]) -> MaxEntModel:
    """Discrete maximum-entropy model for arbitrary equality moment constraints.

    The model is p(x) = exp(lambda_0 + sum_j lambda_j m_j(x)) with
    lambda_0 = -log Z; entropy equals -lambda_0 - sum_j lambda_j target_j.
    """
    x = np.asarray(outcomes, dtype=float).reshape(-1)
    if x.size < 2 or np.unique(x).size != x.size:
        raise ValidationError("need at least two distinct outcomes")
    if not constraints:
        raise ValidationError("need at least one moment constraint")
    solution = solve_moment_dual(x, constraints)
    lam = solution["multipliers"]
    lambda0 = -solution["log_z"]
    targets = np.array([c.target for c in constraints])
    entropy = -lambda0 - float(lam @ targets)
    return MaxEntModel(
        family="general_moment",
        params={
            "lambda0": float(lambda0),
            "multipliers": [float(v) for v in lam],
            "moments": [c.descriptor() for c in constraints],
        },
        entropy=entropy,
        support={"kind": "discrete", "outcomes": [float(v) for v in x]},
    )


def fit_gaussian(mean: float, variance: float) -> MaxEntModel:
    """Gaussian model; entropy is the closed form 0.5 ln(2 pi e variance)."""
    if not (math.isfinite(mean) and math.isfinite(variance)):
        raise ValidationError("mean and variance must be finite")
    if variance <= 0.0:
        raise InfeasibleError(f"variance must be positive, got {variance!r}")
    entropy = 0.5 * math.log(2.0 * math.pi * math.e * variance)
    return MaxEntModel(
        family="gaussian",
        params={"mean": float(mean), "variance": float(variance)},
        entropy=entropy,
        support={"kind": "line"},
    )


def bessel_ratio(kappa: float) -> float:
    """I1(kappa) / I0(kappa) via exponentially scaled Bessel functions."""
    if kappa < 0.0:
        raise ValidationError("concentration must be nonnegative")
    if kappa == 0.0:
        return 0.0
    return float(i1e(kappa) / i0e(kappa))


def fit_von_mises(moment: complex) -> MaxEntModel:
    """Von Mises model matching a first circular moment <e^{i phi}>.

    The concentration solves I1(kappa)/I0(kappa) = |moment| by safeguarded
    Newton (residual <= 1e-12); |moment| = 0 gives the uniform kappa = 0,
    |moment| >= 1 is infeasible.
    """
    moment = complex(moment)
    r = abs(moment)
    if not math.isfinite(r):
        raise ValidationError("circular moment must be finite")
    if r >= 1.0:
        raise InfeasibleError(f"circular moment modulus {r!r} must be < 1")
    mu = math.atan2(moment.imag, moment.real) % (2.0 * math.pi) if r > 0 else 0.0
    if r == 0.0:
        kappa = 0.0
    else:
        # Fisher's starting guesses keep Newton in its quadratic basin
        if r < 0.53:
            kappa = 2.0 * r + r**3 + 5.0 * r**5 / 6.0
        elif r < 0.85:
            kappa = -0.4 + 1.39 * r + 0.43 / (1.0 - r)
        else:
            kappa = 1.0 / (r**3 - 4.0 * r**2 + 3.0 * r)
        kappa = max(kappa, 1e-8)
        lo, hi = 0.0, None
        for _ in range(MAX_NEWTON_ITER):
            a = bessel_ratio(kappa)
            resid = a - r
            if abs(resid) <= BESSEL_RATIO_TOL:
                break
            if resid < 0:
                lo = kappa
            else:
                hi = kappa
            # d/dkappa of the ratio
            deriv = 1.0 - a / kappa - a * a
            nxt = kappa - resid / deriv if deriv > 0 else None
            if nxt is None or nxt <= lo or (hi is not None and nxt >= hi):
                nxt = 0.5 * (lo + hi) if hi is not None else 2.0 * kappa
            kappa = nxt
        else:
            raise InfeasibleError(
                f"Bessel-ratio inversion stalled, residual {resid:.3e}"
            )
    a = bessel_ratio(kappa)
    # ln(2 pi I0(k)) - k I1/I0, written with scaled Bessels to survive large k
    entropy = math.log(2.0 * math.pi) + math.log(float(i0e(kappa))) + kappa - kappa * a
    return MaxEntModel(
        family="von_mises",
        params={"kappa": float(kappa), "mu": float(mu)},
        entropy=float(entropy),
        support={"kind": "circle"},
    )


# ---------------------------------------------------------------------------
# rendering


def _model_weights(model: MaxEntModel, x: np.ndarray) -> np.ndarray:
    if model.family == "boltzmann":
        return np.exp(-model.params["gamma"] * x - model.params["log_z"])
    lam0 = model.params["lambda0"]
    lam = np.asarray(model.params["multipliers"], dtype=float)
    cons = [MomentConstraint.from_descriptor(d) for d in model.params["moments"]]
    scores = lam0 + sum(l * c.values(x) for l, c in zip(lam, cons))
    return np.exp(scores)


def to_distribution(model: MaxEntModel, outcomes) -> DiscreteDistribution:
    """Render a discrete model onto the requested outcome set."""
    x = np.asarray(outcomes, dtype=float).reshape(-1)
    if model.family == "uniform":
        if model.support["kind"] != "discrete":
            raise UnsupportedFamilyError(
                f"uniform model over {model.support['kind']} cannot render discretely"
            )
        size = model.support["size"]
        if x.size != size:
            raise ValidationError(f"model covers {size} outcomes, got {x.size}")
        return DiscreteDistribution(outcomes=x, probs=np.full(x.size, 1.0 / size))
    if model.family in ("boltzmann", "general_moment"):
        stored = np.asarray(model.support["outcomes"], dtype=float)
        if x.size != stored.size or not np.allclose(
            np.sort(x), np.sort(stored), rtol=0.0, atol=1e-12
        ):
            raise ValidationError("requested outcomes differ from the fitted support")
        probs = _model_weights(model, x)
        return DiscreteDistribution(outcomes=x, probs=probs)
    raise UnsupportedFamilyError(
        f"{model.family} is a continuous family; render with to_density"
    )


def to_density(model: MaxEntModel, grid, topology: str = "line") -> GriddedDensity:
    """Render a continuous model onto a uniform grid.

    Raises when the grid cannot carry the model: wrong topology, interval
    endpoints that do not match a uniform-interval support, or a line grid
    holding less than 1 - 1e-9 of a Gaussian's mass. The rendered values are
    the raw closed-form pdf; their quadrature normalization is checked to
    1e-9 rather than silently fixed, so inadequate grids fail loudly.
    """
    x = np.asarray(grid, dtype=float).reshape(-1)
    if x.size < 2:
        raise ValidationError("grid needs at least two points")
    steps = np.diff(x)
    spacing = steps[0]
    if spacing <= 0 or np.abs(steps - spacing).max() > 1e-9 * max(1.0, abs(spacing)):
        raise ValidationError("grid must be uniformly spaced and increasing")

    if model.family == "uniform":
        kind = model.support["kind"]
        if kind == "interval":
            if topology != "line":
                raise ValidationError("interval support needs line topology")
            lo, hi = model.support["lower"], model.support["upper"]
            if abs(x[0] - lo) > 1e-9 or abs(x[-1] - hi) > 1e-9:
                raise ValidationError(
                    "grid endpoints must match the interval support"
                )
            values = np.full(x.size, 1.0 / (hi - lo))
        elif kind == "circle":
            if topology != "circle":
                raise ValidationError("circular support needs circle topology")
            values = np.full(x.size, 1.0 / (2.0 * math.pi))
        else:
            raise UnsupportedFamilyError("discrete uniform cannot render as density")
    elif model.family == "gaussian":
        if topology != "line":
            raise ValidationError("Gaussian models render on line grids")
        mu = model.params["mean"]
        sigma = math.sqrt(model.params["variance"])
        mass = 0.5 * (
            erf((x[-1] - mu) / (sigma * math.sqrt(2.0)))
            - erf((x[0] - mu) / (sigma * math.sqrt(2.0)))
        )
        if mass < GRID_MASS_MIN:
            raise ValidationError(
                f"grid holds only {mass!r} of the Gaussian mass"
            )
        values = np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (
            sigma * math.sqrt(2.0 * math.pi)
        )
    elif model.family == "von_mises":
        if topology != "circle":
            raise ValidationError("von Mises models render on circle grids")
        kappa, mu = model.params["kappa"], model.params["mu"]
        # exp(k cos(t) - k) / (2 pi i0e(k)) avoids overflow at large k
        values = np.exp(kappa * (np.cos(x - mu) - 1.0)) / (
            2.0 * math.pi * float(i0e(kappa))
        )
    else:
        raise UnsupportedFamilyError(
            f"{model.family} is a discrete family; render with to_distribution"
        )

    density = GriddedDensity(
        start=float(x[0]), spacing=float(spacing), values=values, topology=topology
    )
    total = density.integral()
    if abs(total - 1.0) > RENDER_NORM_ATOL:
        raise ValidationError(
            f"rendered model integrates to {total!r}; grid too coarse or short"
        )
    return density


def log_density(model: MaxEntModel, grid, topology: str = "line") -> np.ndarray:
    """Log pdf of a continuous model on a grid, stable where the pdf underflows.

    Cross-entropy integrals against far tails need ln f_max directly: the
    rendered pdf rounds to zero beyond ~38 sigma while the log form stays
    finite everywhere.
    """
    x = np.asarray(grid, dtype=float).reshape(-1)
    if model.family == "gaussian":
        if topology != "line":
            raise ValidationError("Gaussian models render on line grids")
        mu = model.params["mean"]
        var = model.params["variance"]
        return -0.5 * (x - mu) ** 2 / var - 0.5 * math.log(2.0 * math.pi * var)
    if model.family == "von_mises":
        if topology != "circle":
            raise ValidationError("von Mises models render on circle grids")
        kappa, mu = model.params["kappa"], model.params["mu"]
        log_norm = math.log(2.0 * math.pi) + math.log(float(i0e(kappa))) + kappa
        return kappa * np.cos(x - mu) - log_norm
    if model.family == "uniform":
        kind = model.support["kind"]
        if kind == "interval":
            lo, hi = model.support["lower"], model.support["upper"]
            if x.min() < lo - 1e-9 or x.max() > hi + 1e-9:
                raise ValidationError("grid leaves the interval support")
            return np.full(x.size, -math.log(hi - lo))
        if kind == "circle":
            return np.full(x.size, -math.log(2.0 * math.pi))
        raise UnsupportedFamilyError("discrete uniform has no log density")
    raise UnsupportedFamilyError(f"{model.family} has no continuous log density")


# ---------------------------------------------------------------------------
# serialization


def model_to_json(model: MaxEntModel) -> str:
    payload = {
        "family": model.family,
        "parameters": model.params,
        "entropy": model.entropy,
        "support": model.support,
    }
    return canonical_json(payload)


def model_from_json(text: str) -> MaxEntModel:
    payload = json.loads(text)
    missing = {"family", "parameters", "entropy", "support"} - set(payload)
    if missing:
        raise ValidationError(f"model JSON missing keys: {sorted(missing)}")
    return MaxEntModel(
        family=str(payload["family"]),
        params=payload["parameters"],
        entropy=float(payload["entropy"]),
        support=payload["support"],
    )

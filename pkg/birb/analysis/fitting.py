"""
Decay Fitting
Per-depth averages, exponential fits, bootstrap errors and r_Omega conversions
"""

import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy.optimize import least_squares

from birb.core.config import settings
from birb.core.errors import DomainError, FitFailureError
from birb.core.logging import get_logger
from birb.engines.runner import Dataset
from birb.utils.helpers import derive_rng

logger = get_logger()

Convention = Literal["entanglement", "average-gate"]

# Fitted values closer than this to a bound count as sitting on it
BOUND_TOLERANCE = 1e-9


class DecayFit(BaseModel):
    """Fit of f_d = A p^d (+ B) with the derived layer error rate"""

    n: int
    depths: List[int]
    fbar: List[float]
    fbar_sigma: Optional[List[float]] = None
    A: float
    p: float = Field(ge=0.0, le=1.0)
    B: float = 0.0
    floor: bool = False
    residuals: List[float]
    convention: Convention = "entanglement"
    r_omega: float = Field(ge=0.0, le=1.0)
    r_omega_per_qubit: float
    sigma: Dict[str, float] = Field(default_factory=dict)
    bootstrap_failures: int = 0
    fit_status: str = "ok"

    def report(self, seed: Optional[int] = None) -> dict:
        """Fit report JSON object"""
        data = self.model_dump()
        data["seed"] = seed
        data["schema_version"] = settings.schema_version
        return data

    def table(self) -> pd.DataFrame:
        """(d, fbar, sigma) rows for plotting"""
        sigma = self.fbar_sigma if self.fbar_sigma is not None else [float("nan")] * len(self.depths)
        return pd.DataFrame({"d": self.depths, "fbar": self.fbar, "sigma": sigma})

    def write_csv(self, path: Union[str, Path]):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.table().to_csv(path, index=False)


# -- conversions ---------------------------------------------------------------


def r_omega(p: float, n: int, convention: Convention = "entanglement") -> float:
    """
    Layer error rate from the decay rate

    entanglement:  (4^n - 1)(1 - p) / 4^n
    average-gate:  (2^n - 1)(1 - p) / 2^n
    """
    if not -BOUND_TOLERANCE <= p <= 1.0 + BOUND_TOLERANCE:
        raise DomainError(f"decay rate must lie in [0, 1], got {p}")
    if convention not in ("entanglement", "average-gate"):
        raise DomainError(f"unknown convention {convention!r}")
    p = min(max(p, 0.0), 1.0)
    dim = 4**n if convention == "entanglement" else 2**n
    return (dim - 1) * (1.0 - p) / dim


def r_omega_per_qubit(r: float, n: int) -> float:
    """Per-qubit rescale 1 - (1 - r)^(1/n)"""
    return 1.0 - (1.0 - r) ** (1.0 / n)


def relative_deviation(
    r: float, eps: float, sigma_r: float = 0.0, sigma_eps: float = 0.0
) -> Tuple[float, float]:
    """
    delta_rel = (r - eps) / eps and its first-order propagated uncertainty
    """
    if eps == 0.0:
        raise DomainError("relative deviation from a zero error rate is undefined")
    delta = (r - eps) / eps
    sigma = math.sqrt(sigma_r**2 + (r * sigma_eps / eps) ** 2) / abs(eps)
    return delta, sigma


# -- per-depth statistics ------------------------------------------------------


def fbar(dataset: Dataset, depth: int) -> float:
    """Mean of the per-circuit estimates at one benchmark depth"""
    return float(np.mean(dataset.estimates(depth)))


def depth_statistics(dataset: Dataset) -> Tuple[List[int], np.ndarray, np.ndarray]:
    """(depths, fbar_d, standard error of fbar_d from circuit-to-circuit scatter)"""
    depths = dataset.depths()
    means, errors = [], []
    for d in depths:
        values = dataset.estimates(d)
        means.append(values.mean())
        errors.append(values.std(ddof=1) / math.sqrt(len(values)) if len(values) > 1 else 0.0)
    return depths, np.array(means), np.array(errors)


# -- fitting -------------------------------------------------------------------


def _seed_parameters(d: np.ndarray, y: np.ndarray, amplitude_max: float) -> Tuple[float, float]:
    # Log-linear regression on the positive points
    positive = y > 0
    if np.unique(d[positive]).size >= 2:
        slope, intercept = np.polyfit(d[positive], np.log(y[positive]), 1)
        a0, p0 = math.exp(intercept), math.exp(slope)
    else:
        a0, p0 = float(y.max()), 0.5
    return float(np.clip(a0, 1e-6, amplitude_max)), float(np.clip(p0, 1e-6, 1.0))


def fit_decay(
    points: Dict[int, float],
    n: int,
    weights: Optional[Dict[int, float]] = None,
    floor: bool = False,
    convention: Convention = "entanglement",
    sigma: Optional[Dict[int, float]] = None,
) -> DecayFit:
    """
    Least-squares fit of f_d = A p^d (+ B when `floor`)

    Seeded by a log-linear regression on positive points, refined by a
    bounded trust-region solve with A in [0, 1.1] and p in [0, 1].

    Raises:
        FitFailureError: fewer than two depths, no positive points, or the
            fit lands on the p = 0 or A = max bound
    """
    depths = sorted(points)
    if len(depths) < 2:
        raise FitFailureError(f"need at least two distinct depths, got {depths}")
    d = np.array(depths, dtype=float)
    y = np.array([points[k] for k in depths], dtype=float)
    if np.all(y <= 0):
        raise FitFailureError("every per-depth average is non-positive")

    w = np.ones_like(y) if weights is None else np.array([weights[k] for k in depths], dtype=float)
    root_w = np.sqrt(w)
    amplitude_max = settings.fit_amplitude_max
    a0, p0 = _seed_parameters(d, y, amplitude_max)

    if floor:

        def residuals(x):
            return root_w * (x[0] * x[1] ** d + x[2] - y)

        x0, lower, upper = [a0, p0, 0.0], [0.0, 0.0, -1.0], [amplitude_max, 1.0, 1.0]
    else:

        def residuals(x):
            return root_w * (x[0] * x[1] ** d - y)

        x0, lower, upper = [a0, p0], [0.0, 0.0], [amplitude_max, 1.0]

    result = least_squares(residuals, x0, bounds=(lower, upper), method="trf", ftol=1e-15, xtol=1e-15, gtol=1e-15)
    a, p = float(result.x[0]), float(result.x[1])
    b = float(result.x[2]) if floor else 0.0

    if p <= BOUND_TOLERANCE:
        raise FitFailureError(f"decay rate hit the lower bound (p={p:.3g})")
    if a >= amplitude_max - BOUND_TOLERANCE:
        raise FitFailureError(f"amplitude hit the upper bound (A={a:.3g})")

    r = r_omega(p, n, convention)
    return DecayFit(
        n=n,
        depths=depths,
        fbar=y.tolist(),
        fbar_sigma=[sigma[k] for k in depths] if sigma is not None else None,
        A=a,
        p=p,
        B=b,
        floor=floor,
        residuals=(a * p**d + b - y).tolist(),
        convention=convention,
        r_omega=r,
        r_omega_per_qubit=r_omega_per_qubit(r, n),
    )


def _fit_arrays(
    depths: List[int], means: np.ndarray, errors: np.ndarray, n: int, weighted: bool, floor: bool, convention
) -> DecayFit:
    weights = None
    if weighted and np.all(errors > 0):
        weights = {d: 1.0 / e**2 for d, e in zip(depths, errors)}
    points = dict(zip(depths, means.tolist()))
    sigma = dict(zip(depths, errors.tolist()))
    return fit_decay(points, n, weights=weights, floor=floor, convention=convention, sigma=sigma)


def fit_dataset(
    dataset: Dataset, weighted: bool = True, floor: bool = False, convention: Convention = "entanglement"
) -> DecayFit:
    """
    Fit the per-depth averages of a dataset

    Weights are 1/sigma^2 from circuit scatter; they are dropped when any
    depth has zero scatter (exact or noiseless data).
    """
    depths, means, errors = depth_statistics(dataset)
    fit = _fit_arrays(depths, means, errors, dataset.n, weighted, floor, convention)
    logger.info(f"Fitted {len(dataset)} circuits over {len(depths)} depths: p={fit.p:.6f}, r_omega={fit.r_omega:.6g}")
    return fit


# -- bootstrap -----------------------------------------------------------------


def _bootstrap_replicates(
    groups: List[np.ndarray],
    depths: List[int],
    n: int,
    seed: int,
    replicates: range,
    weighted: bool,
    floor: bool,
    convention,
) -> List[Optional[Tuple[float, float, float]]]:
    results = []
    for b in replicates:
        rng = derive_rng(seed, "bootstrap", b)
        means, errors = [], []
        for values in groups:
            sample = values[rng.integers(len(values), size=len(values))]
            means.append(sample.mean())
            errors.append(sample.std(ddof=1) / math.sqrt(len(sample)) if len(sample) > 1 else 0.0)
        try:
            fit = _fit_arrays(depths, np.array(means), np.array(errors), n, weighted, floor, convention)
            results.append((fit.A, fit.p, fit.r_omega))
        except FitFailureError:
            results.append(None)
    return results


def bootstrap(
    dataset: Dataset,
    samples: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
    weighted: bool = True,
    floor: bool = False,
    convention: Convention = "entanglement",
) -> Tuple[Dict[str, float], int]:
    """
    Bootstrap standard deviations of A, p and r_Omega

    Circuits are resampled with replacement within each depth; replicate b
    uses the substream (seed, "bootstrap", b).

    Returns:
        ({"A", "p", "r_omega"} -> sigma, number of failed replicate fits)
    """
    samples = samples or settings.bootstrap_samples
    workers = workers or settings.workers
    if samples < 100:
        raise DomainError(f"bootstrap needs at least 100 replicates, got {samples}")

    groups_by_depth = dataset.by_depth()
    depths = list(groups_by_depth)
    groups = [np.array([row.estimate for row in rows]) for rows in groups_by_depth.values()]
    n = dataset.n

    if workers == 1:
        results = _bootstrap_replicates(groups, depths, n, seed, range(samples), weighted, floor, convention)
    else:
        bounds = np.linspace(0, samples, workers + 1).astype(int)
        parts = Parallel(n_jobs=workers)(
            delayed(_bootstrap_replicates)(groups, depths, n, seed, range(lo, hi), weighted, floor, convention)
            for lo, hi in zip(bounds[:-1], bounds[1:])
        )
        results = [r for part in parts for r in part]

    fits = np.array([r for r in results if r is not None])
    failures = samples - len(fits)
    if failures:
        logger.warning(f"{failures} of {samples} bootstrap fits failed")
    if len(fits) < 2:
        raise FitFailureError("bootstrap produced fewer than two successful fits")
    sigma = dict(zip(("A", "p", "r_omega"), fits.std(axis=0, ddof=1).tolist()))
    return sigma, failures


def fit_with_bootstrap(
    dataset: Dataset,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    weighted: bool = True,
    floor: bool = False,
    convention: Convention = "entanglement",
) -> DecayFit:
    """Point fit plus bootstrap sigmas; the seed defaults to the dataset's"""
    fit = fit_dataset(dataset, weighted, floor, convention)
    if seed is None:
        seed = dataset.seed or 0
    sigma, failures = bootstrap(dataset, samples, seed, workers, weighted, floor, convention)
    return fit.model_copy(update={"sigma": sigma, "bootstrap_failures": failures})

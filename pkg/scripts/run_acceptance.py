"""
Acceptance Study Script
Runs the end-to-end benchmarking checks at configurable scale and writes a JSON summary

Run with: python scripts/run_acceptance.py [--only NAME ...] [--full] [--out summary.json]
"""

import argparse
import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

# Add package root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from birb.analysis.fitting import fit_dataset, fit_decay, fit_with_bootstrap, relative_deviation  # noqa: E402
from birb.analysis.oracle import epsilon_omega_oracle  # noqa: E402
from birb.analysis.planner import circuits_needed  # noqa: E402
from birb.analysis.superchannel import build_L_superchannel, exact_fbar  # noqa: E402
from birb.circuits.circuit import GateSetSpec  # noqa: E402
from birb.core.logging import get_logger, setup_logging  # noqa: E402
from birb.engines.dense import dense_expectation  # noqa: E402
from birb.engines.frame import frame_expectation, frame_run  # noqa: E402
from birb.engines.runner import run_design  # noqa: E402
from birb.noise.generators import ErrorGenerator, channel_from_generators, polarization  # noqa: E402
from birb.noise.models import (  # noqa: E402
    CompiledNoiseModel,
    NoiseModel,
    global_depolarizing,
    measurement_error_family,
    sample_random_model,
)
from birb.pauli.operator import all_paulis, commutes  # noqa: E402
from birb.sampler.design import ExperimentDesign  # noqa: E402
from birb.sampler.omega import OmegaSpec  # noqa: E402
from birb.utils.helpers import derive_rng, draw_seed, dumps_report, open_artifact  # noqa: E402

logger = get_logger()

SIMULATION_GATES = ["I", "XPI2", "YPI2"]
# Upper end of the error-scale sweep per qubit count
P_MAX = {1: 0.01875}
P_MAX_MULTI = 0.075


class Scale:
    """Sample counts for a run; --full uses the reference sizes"""

    def __init__(self, full: bool):
        self.full = full
        self.models = 20 if full else 4
        self.K = 100 if full else 30
        self.shots = 1000 if full else 300
        self.max_depth_exp = 8 if full else 6
        self.bootstrap = 1000 if full else 100
        self.sweep = 10 if full else 4
        self.planner_trials = 200 if full else 60
        self.cross_models = 50 if full else 8
        self.cross_shots = 100_000 if full else 20_000
        self.scale_K = 100 if full else 20
        self.qubits = (1, 2, 4) if full else (1, 2)

    @property
    def depths(self):
        return [0] + [2**j for j in range(self.max_depth_exp + 1)]


def _omega(n: int) -> OmegaSpec:
    # A single qubit has no edges to place two-qubit gates on
    return OmegaSpec(xi=0.5 if n > 1 else 0.0, gate_set=SIMULATION_GATES)


def _gate_set() -> GateSetSpec:
    return GateSetSpec(single_qubit_gates=SIMULATION_GATES)


def _design(n: int, depths, K: int, seed: int, variant: str = "birb") -> ExperimentDesign:
    return ExperimentDesign(n=n, depths=list(depths), K=K, omega=_omega(n), seed=seed, variant=variant)


def _engine(noise: NoiseModel, exact: bool) -> str:
    if noise.is_stochastic:
        return "frame"
    return "dense-exact" if exact else "dense"


# -- checks -------------------------------------------------------------------


def check_depolarizing(scale: Scale, seed: int) -> dict:
    """Exact-mode fit under global depolarizing noise recovers (15/16)(1 - gamma)"""
    gamma = 0.98
    start = time.perf_counter()
    design = _design(2, [0] + [2**j for j in range(9)], 30, seed)
    fit = fit_dataset(run_design(design, global_depolarizing(gamma), engine="dense-exact"))
    expected = 15 / 16 * (1 - gamma)
    deviation = abs(fit.r_omega - expected) / expected
    return {
        "passed": deviation <= 0.005,
        "r_omega": fit.r_omega,
        "expected": expected,
        "relative_deviation": deviation,
        "seconds": time.perf_counter() - start,
    }


def _consistency(family: str, scale: Scale, seed: int, qubits) -> pd.DataFrame:
    rng = derive_rng(seed, "acceptance", family)
    records = []
    for n in qubits:
        p_max = P_MAX.get(n, P_MAX_MULTI)
        for m in range(scale.models):
            p = float(rng.uniform(0.1 * p_max, p_max))
            noise = sample_random_model(family, n, p, _gate_set(), rng)
            model_seed = draw_seed(rng)
            design = _design(n, scale.depths, scale.K, model_seed)
            dataset = run_design(design, noise, engine=_engine(noise, exact=False), shots=scale.shots)
            fit = fit_with_bootstrap(dataset, samples=scale.bootstrap)
            oracle = epsilon_omega_oracle(
                _omega(n), noise, n, scale.depths, scale.K, model_seed, bootstrap_samples=scale.bootstrap
            )
            delta, sigma = relative_deviation(
                fit.r_omega, oracle.epsilon, fit.sigma["r_omega"], oracle.sigma.get("epsilon", 0.0)
            )
            records.append(
                {
                    "family": family,
                    "n": n,
                    "p": p,
                    "r_omega": fit.r_omega,
                    "epsilon": oracle.epsilon,
                    "delta_rel": delta,
                    "sigma_rel": sigma,
                    "z": delta / sigma if sigma > 0 else 0.0,
                }
            )
            logger.info(f"{family} n={n} model {m}: r={fit.r_omega:.5f} eps={oracle.epsilon:.5f} z={records[-1]['z']:+.2f}")
    return pd.DataFrame(records)


def check_stochastic_consistency(scale: Scale, seed: int) -> dict:
    """r_Omega agrees with eps_Omega within 3 sigma for random stochastic models"""
    frame = _consistency("stochastic", scale, seed, scale.qubits)
    within = float((frame["z"].abs() <= 3).mean())
    bias = float(frame["z"].mean())
    return {"passed": within >= 0.9 and abs(bias) <= 0.5, "within_3_sigma": within, "mean_z": bias, "models": len(frame)}


def check_coherent_consistency(scale: Scale, seed: int) -> dict:
    """Same 3 sigma agreement for combined and purely Hamiltonian models"""
    results = {}
    passed = True
    for family in ("both", "hamiltonian"):
        frame = _consistency(family, scale, seed, (1, 2))
        within = float((frame["z"].abs() <= 3).mean())
        results[family] = {"within_3_sigma": within, "median_sigma_rel": float(frame["sigma_rel"].median())}
        passed = passed and within >= 0.9
    results["hamiltonian_sigma_larger"] = (
        results["hamiltonian"]["median_sigma_rel"] > results["both"]["median_sigma_rel"]
    )
    results["passed"] = passed and results["hamiltonian_sigma_larger"]
    return results


def check_measurement_invariance(scale: Scale, seed: int) -> dict:
    """Readout error moves A but not the decay rate, measured in units of the bootstrap sigma"""
    rng = derive_rng(seed, "acceptance", "measurement")
    summary = {}
    passed = True
    for n in (1, 2, 3):
        gate_noise = sample_random_model("both", n, 0.5 * P_MAX.get(n, P_MAX_MULTI), _gate_set(), rng)
        oracle = epsilon_omega_oracle(_omega(n), gate_noise, n, scale.depths, scale.K, seed)
        design = _design(n, scale.depths, scale.K, seed)
        for kind in ("bitflip-all", "bitflip-single", "amplitude-damping-all", "amplitude-damping-single"):
            strengths = np.linspace(0.0001, 0.09, scale.sweep)
            amplitudes, z_scores = [], []
            for p_m in strengths:
                readout = measurement_error_family(kind, n, float(p_m), derive_rng(seed, "readout", kind, n))
                noise = gate_noise.model_copy(update={"measurement": readout})
                dataset = run_design(design, noise, engine="dense-exact")
                fit = fit_with_bootstrap(dataset, samples=scale.bootstrap, weighted=False)
                delta, sigma = relative_deviation(fit.r_omega, oracle.epsilon, fit.sigma["r_omega"])
                amplitudes.append(fit.A)
                z_scores.append(delta / sigma)
            (slope, _), covariance = np.polyfit(strengths, z_scores, 1, cov=True)
            slope_sigma = math.sqrt(covariance[0, 0])
            monotone = bool(np.all(np.diff(amplitudes) < 0))
            ok = abs(slope) <= 2 * slope_sigma + 1e-9 and monotone
            summary[f"n{n}-{kind}"] = {"slope": float(slope), "slope_sigma": slope_sigma, "A_decreasing": monotone}
            passed = passed and ok
            logger.info(f"n={n} {kind}: slope={slope:.3g}±{slope_sigma:.3g}, A decreasing={monotone}")
    summary["passed"] = passed
    return summary


def check_cross_engine(scale: Scale, seed: int) -> dict:
    """Pauli-frame shot means agree with dense exact expectations"""
    rng = derive_rng(seed, "acceptance", "cross-engine")
    worst = 0.0
    mismatches = 0
    for _ in range(scale.cross_models):
        n = int(rng.integers(1, 4))
        noise = sample_random_model("stochastic", n, float(rng.uniform(0.0, P_MAX_MULTI)), _gate_set(), rng)
        noise = noise.model_copy(update={"measurement": measurement_error_family("bitflip-all", n, 0.02, rng)})
        compiled = CompiledNoiseModel(noise, n)
        design = _design(n, [int(rng.integers(0, 33))], 1, draw_seed(rng))
        bc = design.build(design.depths[0], 0)
        exact = dense_expectation(bc, compiled=compiled)
        mean = float(frame_run(bc, noise, scale.cross_shots, rng, compiled).mean())
        sigma = math.sqrt(max(1 - exact**2, 1e-12) / scale.cross_shots)
        worst = max(worst, abs(mean - exact) / sigma)
        if abs(frame_expectation(bc, compiled) - exact) > 1e-10:
            mismatches += 1
    return {
        "passed": worst <= 5.0 and not mismatches,
        "worst_sigma": worst,
        "exact_mismatches": mismatches,
        "models": scale.cross_models,
    }


def _stabilizer_sum(s, p, n: int) -> int:
    """Sum of <psi|p|psi> over tensor-product stabilizer states stabilized by s"""
    s_label, p_label = s.to_label()[1:], p.to_label()[1:]

    def value(label: str, sign: int, chars, signs) -> int:
        result = sign
        for q, c in enumerate(label):
            if c == "I":
                continue
            if c != chars[q]:
                return 0
            result *= signs[q]
        return result

    total = 0
    for chars in itertools.product("XYZ", repeat=n):
        for signs in itertools.product((1, -1), repeat=n):
            if value(s_label, s.sign, chars, signs) == 1:
                total += value(p_label, p.sign, chars, signs)
    return total


def check_stabilizer_sums(scale: Scale, seed: int) -> dict:
    """Commuting s, p with p not in {I, s}: stabilizer-state sums vanish"""
    pairs = 0
    for n in (2, 3):
        paulis = list(all_paulis(n, include_identity=False))
        for s in paulis:
            for p in paulis:
                if p == s or not commutes(s, p):
                    continue
                pairs += 1
                if _stabilizer_sum(s, p, n) != 0:
                    return {"passed": False, "counterexample": [s.to_label(), p.to_label()]}
    return {"passed": True, "pairs": pairs}


def check_clifford_twirl(scale: Scale, seed: int) -> dict:
    """Clifford-group BiRB under gate-independent noise decays at the channel polarization"""
    rng = derive_rng(seed, "acceptance", "twirl")
    summary = {"passed": True}
    for n in (1, 2):
        support = tuple(range(n))
        labels = [pauli.to_label()[1:] for pauli in all_paulis(n, include_identity=False)]
        rates = rng.uniform(0.0, 0.01 / len(labels), len(labels))
        errors = [ErrorGenerator.stochastic(lab, float(r), qubits=support) for lab, r in zip(labels, rates)]
        gamma = polarization(channel_from_generators(errors, n, support))
        design = _design(n, [0] + [2**j for j in range(7)], max(scale.K, 100), seed, variant="clifford-group-birb")
        fit = fit_dataset(run_design(design, NoiseModel(layer_errors=errors), engine="dense-exact"), weighted=False)
        summary[f"n{n}"] = {"p_fit": fit.p, "gamma": gamma}
        summary["passed"] = summary["passed"] and abs(fit.p - gamma) <= 1e-3
    return summary


def check_superchannel(scale: Scale, seed: int) -> dict:
    """Second superchannel eigenvalue matches the fitted decay rate"""
    rng = derive_rng(seed, "acceptance", "lspec")
    omega = _omega(1)
    noiseless = build_L_superchannel(omega, None, 1)
    noise = sample_random_model("stochastic", 1, 0.01, _gate_set(), rng)
    report = build_L_superchannel(omega, noise, 1)
    depths = [0] + [2**j for j in range(7)]
    fit = fit_decay(exact_fbar(omega, noise, 1, depths), n=1)
    return {
        "passed": noiseless.unit_eigenvalue_count == 2 and abs(report.lam - fit.p) <= 1e-3,
        "lambda": report.lam,
        "p_fit": fit.p,
        "noiseless_unit_eigenvalues": noiseless.unit_eigenvalue_count,
    }


def check_planner(scale: Scale, seed: int) -> dict:
    """Planned circuit counts meet the (alpha, nu) guarantee on a depolarizing model"""
    nu, alpha, gamma, d = 0.05, 0.2, 0.98, 8
    target = gamma**d
    K = circuits_needed(nu, alpha, 1.0, gamma, d)
    failures = 0
    for trial in range(scale.planner_trials):
        design = _design(2, [d], K, seed + trial)
        dataset = run_design(design, global_depolarizing(gamma), engine="frame", shots=1)
        if abs(dataset.estimates(d).mean() - target) >= alpha * target:
            failures += 1
    rate = failures / scale.planner_trials
    return {"passed": circuits_needed(0.05, 0.1, 1.0, 1.0, 0) == 738 and rate <= nu, "K": K, "failure_rate": rate}


def check_scalability(scale: Scale, seed: int) -> dict:
    """Error-free 64-qubit BiRB on the frame engine returns +1 on every shot"""
    design = _design(64, [64], scale.scale_K, seed)
    timings = {}
    all_plus = True
    for workers in (1, 4):
        start = time.perf_counter()
        dataset = run_design(design, None, engine="frame", shots=100, workers=workers)
        timings[workers] = time.perf_counter() - start
        all_plus = all_plus and all(row.success_sum == row.shots for row in dataset.rows)
    speedup = timings[1] / timings[4]
    logger.info(f"64 qubits: {timings[1]:.1f}s on 1 worker, {timings[4]:.1f}s on 4 ({speedup:.1f}x)")
    return {
        "passed": all_plus and timings[1] < 60.0 * scale.scale_K / 100 and speedup >= 3.0,
        "seconds_1_worker": timings[1],
        "speedup_4_workers": speedup,
    }


CHECKS = {
    "depolarizing": check_depolarizing,
    "stochastic": check_stochastic_consistency,
    "coherent": check_coherent_consistency,
    "measurement": check_measurement_invariance,
    "cross-engine": check_cross_engine,
    "stabilizer-sums": check_stabilizer_sums,
    "twirl": check_clifford_twirl,
    "superchannel": check_superchannel,
    "planner": check_planner,
    "scalability": check_scalability,
}


def main():
    """Run the selected checks and write the summary"""
    parser = argparse.ArgumentParser(description="BiRB acceptance studies")
    parser.add_argument("--only", nargs="*", choices=sorted(CHECKS), default=None)
    parser.add_argument("--full", action="store_true", help="reference sample sizes (slow)")
    parser.add_argument("--seed", type=int, default=20240611)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    setup_logging()
    scale = Scale(args.full)
    names = args.only or list(CHECKS)
    logger.info(f"Running {len(names)} acceptance checks ({'full' if args.full else 'reduced'} scale)")

    results = {}
    for name in names:
        start = time.perf_counter()
        results[name] = CHECKS[name](scale, args.seed)
        status = "✓" if results[name]["passed"] else "✗"
        logger.info(f"{status} {name} ({time.perf_counter() - start:.1f}s)")

    failed = [name for name, result in results.items() if not result["passed"]]
    if args.out:
        with open_artifact(args.out, "wt") as f:
            f.write(dumps_report({"seed": args.seed, "full": args.full, "results": results}))
    if failed:
        logger.error(f"Failed checks: {', '.join(failed)}")
        return 1
    logger.info("All acceptance checks passed!")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""
Analysis Testing Script
Tests decay fitting, bootstrap errors, the planner, the eps_Omega oracle and the layer superchannel

Run with: pytest scripts/test_analysis.py
"""

import numpy as np
import pandas as pd
import pytest

from birb.analysis.fitting import (
    bootstrap,
    depth_statistics,
    fbar,
    fit_dataset,
    fit_decay,
    fit_with_bootstrap,
    r_omega,
    r_omega_per_qubit,
    relative_deviation,
)
from birb.analysis.oracle import circuit_polarizations, core_circuit_polarization, epsilon_omega_oracle
from birb.analysis.planner import PlannerInput, circuits_needed, plan_samples, two_depth_plan
from birb.analysis.superchannel import build_L_superchannel, exact_fbar
from birb.circuits.circuit import GateSetSpec
from birb.core.errors import CapabilityError, DomainError, FitFailureError
from birb.engines.runner import Dataset, DatasetRow, run_design
from birb.noise.generators import ErrorGenerator, channel_from_generators, polarization
from birb.noise.models import (
    CompiledNoiseModel,
    NoiseModel,
    global_depolarizing,
    measurement_error_family,
    sample_random_model,
)
from birb.pauli.operator import all_paulis
from birb.sampler.design import ExperimentDesign
from birb.sampler.omega import OmegaSpec, enumerate_omega_layers


def _noisy_dataset(rng, A=0.9, p=0.97, depths=(0, 2, 4, 8, 16), K=20, scatter=0.02):
    rows = []
    for d in depths:
        for i in range(K):
            value = float(np.clip(A * p**d + rng.normal(0.0, scatter), -1.0, 1.0))
            rows.append(DatasetRow(id=f"d{d}-k{i}", n=2, d=d, target="+ZZ", N=0, exact=value, seed=11))
    return Dataset(rows=rows)


# -- conversions ------------------------------------------------------------------


def test_r_omega():
    assert r_omega(0.99, 1) == pytest.approx(0.0075)
    assert r_omega(0.99, 1, "average-gate") == pytest.approx(0.005)
    assert r_omega(1.0, 3) == 0.0
    assert r_omega(0.9, 2) == pytest.approx(15 / 16 * 0.1)
    with pytest.raises(DomainError):
        r_omega(1.2, 1)
    with pytest.raises(DomainError):
        r_omega(-0.1, 1)
    with pytest.raises(DomainError):
        r_omega(0.9, 1, "diamond")


def test_r_omega_per_qubit():
    assert r_omega_per_qubit(0.19, 2) == pytest.approx(0.1)
    assert r_omega_per_qubit(0.05, 1) == pytest.approx(0.05)


def test_relative_deviation():
    delta, sigma = relative_deviation(0.011, 0.01, sigma_r=0.001)
    assert delta == pytest.approx(0.1)
    assert sigma == pytest.approx(0.1)
    with pytest.raises(DomainError):
        relative_deviation(0.01, 0.0)


# -- fitting ----------------------------------------------------------------------


def test_fit_recovers_exact_decay():
    points = {d: 0.9 * 0.97**d for d in (0, 2, 4, 8, 16, 32)}
    fit = fit_decay(points, n=2)
    assert fit.A == pytest.approx(0.9, abs=1e-6)
    assert fit.p == pytest.approx(0.97, abs=1e-6)
    assert fit.r_omega == pytest.approx(15 / 16 * 0.03, abs=1e-6)
    assert max(abs(r) for r in fit.residuals) < 1e-6


def test_fit_with_floor():
    points = {d: 0.8 * 0.95**d + 0.1 for d in (0, 2, 4, 8, 16, 32, 64, 128)}
    fit = fit_decay(points, n=1, floor=True)
    assert fit.floor
    assert fit.A == pytest.approx(0.8, abs=1e-4)
    assert fit.p == pytest.approx(0.95, abs=1e-4)
    assert fit.B == pytest.approx(0.1, abs=1e-4)


def test_fit_of_noiseless_data():
    fit = fit_decay({0: 1.0, 4: 1.0, 16: 1.0}, n=3)
    assert fit.p == pytest.approx(1.0, abs=1e-6)
    assert fit.r_omega == pytest.approx(0.0, abs=1e-6)


def test_fit_failures():
    with pytest.raises(FitFailureError):
        fit_decay({4: 0.5}, n=1)
    with pytest.raises(FitFailureError):
        fit_decay({0: 0.0, 4: -0.01, 8: -0.2}, n=1)


def test_depth_statistics(rng):
    dataset = _noisy_dataset(rng)
    depths, means, errors = depth_statistics(dataset)
    assert depths == [0, 2, 4, 8, 16]
    assert means[0] == pytest.approx(fbar(dataset, 0))
    assert np.all(errors > 0)


def test_fit_dataset(rng):
    dataset = _noisy_dataset(rng)
    fit = fit_dataset(dataset)
    assert fit.n == 2
    assert fit.p == pytest.approx(0.97, abs=0.01)
    assert fit.fbar_sigma is not None
    report = fit.report(seed=11)
    assert report["seed"] == 11
    assert report["fit_status"] == "ok"
    assert "schema_version" in report


def test_fitted_decay_rate_is_unbiased(rng):
    estimates = np.array([fit_dataset(_noisy_dataset(rng), weighted=False).p for _ in range(200)])
    standard_error = estimates.std(ddof=1) / np.sqrt(len(estimates))
    assert abs(estimates.mean() - 0.97) < 4 * standard_error + 1e-4


def test_fit_table_and_csv(rng, tmp_path):
    fit = fit_dataset(_noisy_dataset(rng))
    table = fit.table()
    assert list(table.columns) == ["d", "fbar", "sigma"]
    path = tmp_path / "fit.csv"
    fit.write_csv(path)
    assert pd.read_csv(path)["d"].tolist() == [0, 2, 4, 8, 16]


def test_bootstrap_is_deterministic(rng):
    dataset = _noisy_dataset(rng)
    sigma, failures = bootstrap(dataset, samples=200, seed=4)
    again, _ = bootstrap(dataset, samples=200, seed=4)
    assert sigma == again
    assert set(sigma) == {"A", "p", "r_omega"}
    assert all(v > 0 for v in sigma.values())
    assert failures == 0


def test_bootstrap_worker_count_does_not_change_results(rng):
    dataset = _noisy_dataset(rng)
    serial, _ = bootstrap(dataset, samples=120, seed=4, workers=1)
    parallel, _ = bootstrap(dataset, samples=120, seed=4, workers=2)
    for key in serial:
        assert serial[key] == pytest.approx(parallel[key], rel=1e-12)


def test_bootstrap_needs_enough_replicates(rng):
    with pytest.raises(DomainError):
        bootstrap(_noisy_dataset(rng), samples=50)


def test_fit_with_bootstrap(rng):
    fit = fit_with_bootstrap(_noisy_dataset(rng), samples=100)
    assert set(fit.sigma) == {"A", "p", "r_omega"}
    assert fit.sigma["r_omega"] == pytest.approx(15 / 16 * fit.sigma["p"], rel=1e-6)


# -- planner ----------------------------------------------------------------------


def test_circuits_needed():
    assert circuits_needed(0.05, 0.1, 1.0, 1.0, 0) == 738
    assert circuits_needed(0.05, 0.1, 1.0, 0.99, 10) == 903


def test_two_depth_plan():
    plan = two_depth_plan(0.05, 0.1, 1.0, 0.9)
    assert plan.d1 == 10
    assert plan.per_depth_accuracy == pytest.approx(0.5)
    assert plan.circuits_at_zero == 30
    assert plan.circuits_at_d1 == 243


def test_planner_domain():
    with pytest.raises(DomainError):
        two_depth_plan(0.05, 0.1, 1.0, 1.0)
    with pytest.raises(DomainError):
        circuits_needed(0.0, 0.1, 1.0, 1.0, 0)
    with pytest.raises(DomainError):
        circuits_needed(0.05, 0.1, 1.5, 1.0, 0)


def test_plan_samples():
    output = plan_samples(PlannerInput(nu=0.05, alpha=0.1, gamma_bar=0.9, beta=0.1))
    assert output.K == 738
    assert output.two_depth.d1 == 10
    assert plan_samples(PlannerInput(nu=0.05, alpha=0.1)).two_depth is None


# -- oracle -----------------------------------------------------------------------


def test_oracle_under_depolarizing_noise(omega):
    estimate = epsilon_omega_oracle(omega, global_depolarizing(0.95), 2, [0, 1, 2, 4, 8], 3, seed=1)
    assert estimate.p_rc == pytest.approx(0.95, abs=1e-6)
    assert estimate.epsilon == pytest.approx(0.046875, abs=1e-6)
    assert estimate.gamma_bar[0] == pytest.approx(1.0)


def test_oracle_without_noise(omega):
    estimate = epsilon_omega_oracle(omega, None, 2, [0, 2, 4], 2, seed=1)
    assert estimate.epsilon == pytest.approx(0.0, abs=1e-6)


def test_oracle_bootstrap_keys(omega, gate_set):
    noise = sample_random_model("stochastic", 2, 0.01, gate_set, np.random.default_rng(2))
    estimate = epsilon_omega_oracle(omega, noise, 2, [0, 2, 4, 8], 10, seed=5, bootstrap_samples=100)
    assert set(estimate.sigma) == {"A", "p", "epsilon"}
    assert 0 < estimate.epsilon < 0.1
    assert "schema_version" in estimate.report()


def test_circuit_polarizations_are_deterministic(omega, gate_set):
    noise = sample_random_model("both", 2, 0.01, gate_set, np.random.default_rng(2))
    first = circuit_polarizations(omega, noise, 2, [1, 3], 4, seed=8)
    second = circuit_polarizations(omega, noise, 2, [1, 3], 4, seed=8, workers=2)
    assert first.rows == second.rows
    assert all(row.shots == 0 for row in first.rows)


def test_oracle_capacity(omega):
    with pytest.raises(CapabilityError):
        circuit_polarizations(omega, None, 7, [0, 1], 1, seed=1)


# -- superchannel -----------------------------------------------------------------


def test_noiseless_superchannel_has_two_unit_eigenvalues(single_qubit_omega):
    report = build_L_superchannel(single_qubit_omega, None, 1)
    assert report.unit_eigenvalue_count == 2
    assert report.lam == pytest.approx(1.0)
    assert report.dimension == 16
    assert report.layer_count == 3
    assert "lambda" in report.report()


def test_depolarizing_superchannel(single_qubit_omega):
    report = build_L_superchannel(single_qubit_omega, global_depolarizing(0.9), 1)
    assert report.unit_eigenvalue_count == 1
    assert report.lam == pytest.approx(0.9, abs=1e-8)


def test_two_qubit_depolarizing_superchannel(omega):
    report = build_L_superchannel(omega, global_depolarizing(0.99), 2)
    assert report.dimension == 256
    assert report.lam == pytest.approx(0.99, abs=1e-8)


def test_exact_fbar_depolarizing(single_qubit_omega):
    values = exact_fbar(single_qubit_omega, global_depolarizing(0.9), 1, [3, 0, 1])
    assert list(values) == [3, 0, 1]
    for d, value in values.items():
        assert value == pytest.approx(0.9**d)


def test_exact_fbar_matches_layer_average(single_qubit_omega, rng):
    noise = sample_random_model("both", 1, 0.02, GateSetSpec(), rng)
    compiled = CompiledNoiseModel(noise, 1)
    expected = sum(
        probability * core_circuit_polarization([layer], 1, compiled)
        for layer, probability in enumerate_omega_layers(single_qubit_omega, 1)
    )
    assert exact_fbar(single_qubit_omega, noise, 1, [1])[1] == pytest.approx(expected, abs=1e-12)


def test_superchannel_monte_carlo(omega):
    report = build_L_superchannel(omega, global_depolarizing(0.97), 2, samples=30, seed=2)
    assert report.monte_carlo
    assert report.layer_count == 30


def test_superchannel_capacity(omega):
    with pytest.raises(CapabilityError):
        build_L_superchannel(omega, None, 3)


# -- end-to-end decay checks --------------------------------------------------------

SIMULATION_GATES = ["I", "XPI2", "YPI2"]


def _exact_design(n, depths, K, seed=3, variant="birb"):
    omega = OmegaSpec(xi=0.5 if n > 1 else 0.0, gate_set=SIMULATION_GATES)
    return ExperimentDesign(n=n, depths=list(depths), K=K, omega=omega, seed=seed, variant=variant)


@pytest.mark.slow
@pytest.mark.parametrize("n", [1, 2, 3])
def test_readout_error_moves_amplitude_not_decay_rate(n):
    gate_set = GateSetSpec(single_qubit_gates=SIMULATION_GATES)
    gate_noise = sample_random_model("stochastic", n, 0.01, gate_set, np.random.default_rng(n))
    design = _exact_design(n, [0, 2, 4, 8, 16], 30)
    clean = fit_dataset(run_design(design, gate_noise, engine="dense-exact"), weighted=False)
    for kind in ("bitflip-all", "bitflip-single"):
        readout = measurement_error_family(kind, n, 0.02, np.random.default_rng(n))
        noise = gate_noise.model_copy(update={"measurement": readout})
        fit = fit_dataset(run_design(design, noise, engine="dense-exact"), weighted=False)
        assert fit.A < clean.A
        assert fit.p == pytest.approx(clean.p, abs=2e-3)


@pytest.mark.slow
@pytest.mark.parametrize("n", [1, 2])
def test_clifford_group_variant_decays_at_the_channel_polarization(n, rng):
    support = tuple(range(n))
    labels = [pauli.to_label()[1:] for pauli in all_paulis(n, include_identity=False)]
    rates = rng.uniform(0.0, 0.01 / len(labels), len(labels))
    errors = [ErrorGenerator.stochastic(label, float(r), qubits=support) for label, r in zip(labels, rates)]
    gamma = polarization(channel_from_generators(errors, n, support))
    design = _exact_design(n, [0] + [2**j for j in range(7)], 100, variant="clifford-group-birb")
    fit = fit_dataset(run_design(design, NoiseModel(layer_errors=errors), engine="dense-exact"), weighted=False)
    assert fit.p == pytest.approx(gamma, abs=1e-3)


@pytest.mark.slow
def test_superchannel_eigenvalue_matches_fitted_decay(single_qubit_omega, rng):
    noise = sample_random_model("stochastic", 1, 0.01, GateSetSpec(single_qubit_gates=SIMULATION_GATES), rng)
    report = build_L_superchannel(single_qubit_omega, noise, 1)
    fit = fit_decay(exact_fbar(single_qubit_omega, noise, 1, [0] + [2**j for j in range(7)]), n=1)
    assert report.lam == pytest.approx(fit.p, abs=1e-3)

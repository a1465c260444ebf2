import math

import numpy as np
import pytest

from fqsvt.bands import detect_bands, exact_projectors, synthetic_band_spectrum
from fqsvt.blockenc import dilate_hermitian
from fqsvt.chebyshev import FilterSpec, heaviside_filter
from fqsvt.feedforward import (
    KrausExtraction,
    MeasurementRecord,
    channel_distance,
    extract_kraus,
    feedforward_query_count,
    mar_monitoring,
    run_1fqsvt,
    run_multiband,
)
from fqsvt.linalg import StateVector, eigh, hermitian_from_spectrum, rng
from fqsvt.qsp import PhaseFactorSet, _mirror, synthesize_symmetric, to_circuit


def random_symmetric(gen, degree):
    return PhaseFactorSet(_mirror(gen.uniform(-np.pi, np.pi, (degree + 2) // 2), degree), "su2")


def test_measurement_record_positions():
    record = MeasurementRecord((1, 0, 0, 1))
    assert record.band_bits == (1, 0)
    assert record.success_bits == (0, 1)
    assert record.failure_count == 1
    assert record.failed


def test_mar_deterministic_zero_branch():
    state = StateVector(2, [0.6, 0.8, 0.0, 0.0])
    branches = mar_monitoring(state, "enumerate")
    assert branches[0].probability == pytest.approx(1.0)
    assert branches[1].probability == pytest.approx(0.0)
    assert np.allclose(branches[0].state.amplitudes, state.amplitudes)


def test_mar_definition_branch_states():
    a = np.array([1.0, 0.0])
    b = np.array([0.0, 1.0])
    state = StateVector(2, np.concatenate([a, b]) / np.sqrt(2))
    branches = mar_monitoring(state, "enumerate")
    assert branches[0].probability == pytest.approx(0.5)
    assert branches[1].probability == pytest.approx(0.5)
    # The 1-branch is reset: |0> tensor b, still carrying its 1/sqrt(2) weight.
    assert np.allclose(branches[1].state.amplitudes, np.concatenate([b, [0, 0]]) / np.sqrt(2))


def test_mar_sampled_frequencies_match_enumerate():
    state = StateVector(2, np.array([0.8, 0.0, 0.6, 0.0]))
    hits = 0
    draws = 10000
    for t in range(draws):
        (branch,) = mar_monitoring(state, "sample", seed=5, stream=t)
        hits += branch.record.bits[0]
    p1 = 0.36
    sigma = math.sqrt(p1 * (1 - p1) / draws)
    assert abs(hits / draws - p1) <= 3 * sigma


def test_mar_rejects_zero_state():
    with pytest.raises(ValueError, match="zero-norm"):
        mar_monitoring(StateVector(1, [0.0, 0.0]))


def test_one_step_identity_polynomial_worked_example():
    h = np.diag([0.6, 0.3]).astype(complex)
    enc = dilate_hermitian(h)
    phi = to_circuit(PhaseFactorSet([0.0, 0.0], "su2"))
    leaves = {b.record.bits: b for b in
              run_1fqsvt(enc, phi, StateVector(1, [1, 0]), "enumerate")}
    assert leaves[(0, 0)].probability == pytest.approx(0.1296, abs=1e-12)
    assert leaves[(1, 0)].probability == pytest.approx(0.4096, abs=1e-12)
    p_fail = leaves[(0, 1)].probability + leaves[(1, 1)].probability
    assert p_fail == pytest.approx(0.4608, abs=1e-12)
    assert np.allclose(leaves[(0, 0)].state.amplitudes, [0.36, 0, 0, 0], atol=1e-12)
    assert np.allclose(leaves[(1, 0)].state.amplitudes, [-0.64, 0, 0, 0], atol=1e-12)


def test_one_step_t2_zero_crossing():
    # f = T2 vanishes at 1/sqrt(2): the (0,0) branch dies and (1,0) returns
    # the input with the physical minus sign.
    e = 1.0 / math.sqrt(2.0)
    h = np.diag([e, 0.2]).astype(complex)
    enc = dilate_hermitian(h)
    phi = to_circuit(PhaseFactorSet([0.0, 0.0, 0.0], "su2"))
    leaves = {b.record.bits: b for b in
              run_1fqsvt(enc, phi, StateVector(1, [1, 0]), "enumerate")}
    assert leaves[(0, 0)].probability <= 1e-12
    assert leaves[(1, 0)].probability == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(leaves[(1, 0)].state.amplitudes, [-1, 0, 0, 0], atol=1e-10)


def test_one_step_heaviside_keeps_low_eigenstate():
    eps = 1e-3
    filt = heaviside_filter(FilterSpec(0.5, 0.4, eps))
    phi = to_circuit(synthesize_symmetric(filt, 1e-11))
    h = np.diag([0.2, 0.85]).astype(complex)
    enc = dilate_hermitian(h)
    leaves = {b.record.bits: b for b in
              run_1fqsvt(enc, phi, StateVector(1, [1, 0]), "enumerate")}
    assert leaves[(0, 0)].probability >= (1 - eps) ** 2
    assert np.linalg.norm(leaves[(0, 0)].state.amplitudes - np.array([1, 0, 0, 0])) < eps


def test_one_step_rejects_asymmetric_phases():
    enc = dilate_hermitian(np.diag([0.3, 0.6]))
    phi = to_circuit(PhaseFactorSet([0.4, 0.0, 0.1], "su2"))
    with pytest.raises(ValueError, match="symmetric"):
        run_1fqsvt(enc, phi, StateVector(1, [1, 0]))


def test_one_step_sample_mode_returns_single_leaf():
    enc = dilate_hermitian(np.diag([0.6, 0.3]))
    phi = to_circuit(PhaseFactorSet([0.0, 0.0], "su2"))
    (leaf,) = run_1fqsvt(enc, phi, StateVector(1, [1, 0]), "sample", seed=3)
    assert len(leaf.record.bits) == 2


def test_multiband_two_band_worked_example():
    gen = rng(21)
    h = hermitian_from_spectrum([0.1, 0.9], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.5)
    enc = dilate_hermitian(h)
    amp = (spec.vectors[:, 0] + spec.vectors[:, 1]) / math.sqrt(2)
    tree = run_multiband(enc, structure, 1e-2, StateVector(1, amp))
    leaves = {l.record.bits: l for l in tree.leaves}
    eps = tree.round_eps
    assert leaves[(0, 0)].probability == pytest.approx(0.5, abs=3 * eps)
    assert leaves[(1, 0)].probability == pytest.approx(0.5, abs=3 * eps)
    s00 = leaves[(0, 0)].state.amplitudes[:2]
    s10 = leaves[(1, 0)].state.amplitudes[:2]
    assert np.linalg.norm(s00 - spec.vectors[:, 0] / math.sqrt(2)) < eps
    assert np.linalg.norm(s10 + spec.vectors[:, 1] / math.sqrt(2)) < eps
    assert leaves[(0, 0)].claimed_band == 0
    assert leaves[(1, 0)].claimed_band == 1


def test_multiband_four_bands_uniform_input():
    gen = rng(22)
    h = hermitian_from_spectrum([0.05, 0.35, 0.65, 0.95], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.2)
    enc = dilate_hermitian(h)
    amp = spec.vectors.sum(axis=1) / 2.0
    tree = run_multiband(enc, structure, 4e-2, StateVector(2, amp))
    assert tree.rounds == 2
    assert len(tree.leaves) == 16
    success = {l.claimed_band: l for l in tree.leaves if not l.failed}
    for band in range(4):
        assert success[band].probability == pytest.approx(0.25, abs=5e-3)
    total = sum(l.probability for l in tree.leaves)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_multiband_probability_conserved_at_every_depth():
    gen = rng(23)
    h = hermitian_from_spectrum([0.05, 0.35, 0.65, 0.95], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.2)
    enc = dilate_hermitian(h)
    amp = spec.vectors.sum(axis=1) / 2.0
    tree = run_multiband(enc, structure, 4e-2, StateVector(2, amp))
    # Sibling probabilities sum to the parent's: group leaves by prefix.
    by_prefix: dict = {}
    for leaf in tree.leaves:
        for cut in (0, 2, 4):
            by_prefix.setdefault(leaf.record.bits[:cut], 0.0)
            by_prefix[leaf.record.bits[:cut]] += leaf.probability
    assert by_prefix[()] == pytest.approx(1.0, abs=1e-10)
    for prefix, weight in by_prefix.items():
        if len(prefix) == 2:
            children = sum(
                v for k, v in by_prefix.items() if len(k) == 4 and k[:2] == prefix
            )
            assert children == pytest.approx(weight, abs=1e-10)


def test_multiband_three_bands_never_claims_missing_band():
    gen = rng(24)
    h = hermitian_from_spectrum([0.1, 0.5, 0.88, 0.92], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.3)
    assert structure.band_count == 3
    enc = dilate_hermitian(h)
    amp = spec.vectors[:, :3].sum(axis=1) / math.sqrt(3)
    tree = run_multiband(enc, structure, 2e-2, StateVector(2, amp))
    claimed = {l.claimed_band for l in tree.leaves}
    assert claimed <= {0, 1, 2}
    # The upper subtree stops after one round.
    upper = [l for l in tree.leaves if l.record.bits[:1] == (1,)]
    assert all(len(l.record.bits) == 2 for l in upper)


def test_multiband_single_band_trivial_tree():
    gen = rng(25)
    h = hermitian_from_spectrum([0.4, 0.45, 0.5, 0.55], gen)
    structure = detect_bands(eigh(h).values, min_gap=0.3)
    assert structure.band_count == 1
    tree = run_multiband(dilate_hermitian(h), structure, 1e-2,
                         StateVector(2, eigh(h).vectors[:, 0]))
    assert len(tree.leaves) == 1
    assert tree.leaves[0].claimed_band == 0
    assert tree.query_count == 0


def test_multiband_band_supported_input_claims_its_band():
    gen = rng(26)
    h = hermitian_from_spectrum([0.1, 0.5, 0.9, 0.95], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.3)
    enc = dilate_hermitian(h)
    target_band = 1
    amp = spec.vectors[:, 1]
    tree = run_multiband(enc, structure, 1e-2, StateVector(2, amp),
                         mode="sample", seed=9, trajectories=200)
    hits = sum(1 for l in tree.leaves if l.claimed_band == target_band and not l.failed)
    assert hits / 200 >= 1.0 - 8 * tree.rounds * tree.round_eps - 0.03


def test_tree_height_is_log2_band_count():
    gen = rng(27)
    for count, dim in ((2, 2), (4, 4), (8, 8)):
        h = hermitian_from_spectrum(synthetic_band_spectrum(count), gen)
        spec = eigh(h)
        structure = detect_bands(spec.values, target_bands=count)
        tree = run_multiband(dilate_hermitian(h), structure, 1e-1,
                             StateVector(int(math.log2(dim)), spec.vectors[:, 0]))
        assert tree.rounds == math.ceil(math.log2(count))
        assert max(len(l.record.bits) for l in tree.leaves) == 2 * tree.rounds


def test_extract_kraus_completeness_and_projectors():
    gen = rng(28)
    h = hermitian_from_spectrum([0.1, 0.9], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.5)
    enc = dilate_hermitian(h)
    amp = (spec.vectors[:, 0] + spec.vectors[:, 1]) / math.sqrt(2)
    tree = run_multiband(enc, structure, 1e-2, StateVector(1, amp))
    kraus = extract_kraus(tree)
    assert kraus.completeness_residual <= 1e-9
    projectors = exact_projectors(spec, structure)
    for band, op in kraus.success_projectors().items():
        assert np.linalg.norm(op - projectors[band], 2) <= tree.round_eps


def test_extract_kraus_branch_linearity():
    gen = rng(29)
    h = hermitian_from_spectrum([0.1, 0.9], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.5)
    enc = dilate_hermitian(h)
    amp = (0.6 * spec.vectors[:, 0] + 0.8 * spec.vectors[:, 1])
    tree = run_multiband(enc, structure, 1e-2, StateVector(1, amp))
    kraus = extract_kraus(tree)
    by_record = dict(zip([r.bits for r in kraus.records], kraus.operators))
    for leaf in tree.leaves:
        predicted = by_record[leaf.record.bits] @ amp
        assert np.max(np.abs(predicted - leaf.state.amplitudes)) <= 1e-10


def test_extract_kraus_failure_weight_bounded():
    gen = rng(30)
    h = hermitian_from_spectrum([0.05, 0.35, 0.65, 0.95], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.2)
    enc = dilate_hermitian(h)
    eps = 1e-3
    for band in range(4):
        tree = run_multiband(enc, structure, 0.0, StateVector(2, spec.vectors[:, band]),
                             round_eps=eps)
        failed_weight = sum(l.probability for l in tree.leaves if l.failed)
        assert failed_weight <= 2 * math.sqrt(2) * eps * tree.rounds * 1.1


def test_extract_kraus_requires_enumerate_tree():
    gen = rng(31)
    h = hermitian_from_spectrum([0.1, 0.9], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.5)
    tree = run_multiband(dilate_hermitian(h), structure, 1e-2,
                         StateVector(1, spec.vectors[:, 0]), mode="sample", seed=1)
    with pytest.raises(ValueError, match="enumerate"):
        extract_kraus(tree)


def test_channel_distance_zero_for_exact_projectors():
    gen = rng(32)
    h = hermitian_from_spectrum([0.2, 0.8], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.4)
    projectors = exact_projectors(spec, structure)
    kraus = KrausExtraction(
        records=[MeasurementRecord((0, 0)), MeasurementRecord((1, 0))],
        operators=[p.copy() for p in projectors],
        claimed_bands=[0, 1],
        failed=[False, False],
        completeness_residual=0.0,
        system_dim=2,
    )
    assert channel_distance(kraus, projectors, samples=8, seed=1) <= 1e-12


def test_channel_distance_roughly_linear_in_budget():
    # Eigenvalues pinned at the window edges keep the filter error at its
    # eps/4 design point; the proxy then tracks the budget with scaling
    # exponent near 1 (trimmed degrees quantize, so single halvings jitter).
    gen = rng(33)
    h = hermitian_from_spectrum([0.25, 0.75], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.4)
    enc = dilate_hermitian(h)
    amp = spec.vectors[:, 0]
    projectors = exact_projectors(spec, structure)
    eps_hi, eps_lo = 4e-3, 2.5e-4
    proxies = []
    for eps in (eps_hi, eps_lo):
        tree = run_multiband(enc, structure, 0.0, StateVector(1, amp), round_eps=eps)
        proxies.append(channel_distance(extract_kraus(tree), projectors, samples=12, seed=2))
    exponent = math.log(proxies[0] / proxies[1]) / math.log(eps_hi / eps_lo)
    assert 0.5 <= exponent <= 1.5


def test_query_count_formula():
    assert feedforward_query_count(1, 50) == 0
    assert feedforward_query_count(4, 50) == 200
    assert feedforward_query_count(5, 50) == 300
    with pytest.raises(ValueError):
        feedforward_query_count(0, 10)


def test_tree_json_shape():
    gen = rng(34)
    h = hermitian_from_spectrum([0.1, 0.9], gen)
    spec = eigh(h)
    structure = detect_bands(spec.values, min_gap=0.5)
    tree = run_multiband(dilate_hermitian(h), structure, 1e-2,
                         StateVector(1, spec.vectors[:, 0]))
    doc = tree.to_json()
    assert doc["L"] == 2
    assert all(set(leaf) == {"record", "prob", "claimed_band", "failed"}
               for leaf in doc["leaves"])

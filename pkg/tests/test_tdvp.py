"""Tests for the windowed projector engine.

Expectations come from two independent oracles: the dense statevector path
(exact unitaries applied by index permutation) and from-scratch block
contractions recomputed here with a different tensordot ordering than the
engine's einsum calls.
"""

import numpy as np
import pytest

from mpsim.circuits import Circuit, GateOp, heisenberg_1d
from mpsim.gates import build_generator_mpo, gate_generator, gate_unitary
from mpsim.mps import (
    apply_single_qubit_gate,
    canonical_form_residuals,
    norm,
    product_state,
    shift_center,
)
from mpsim.oracle import (
    dense_basis_state,
    fidelity,
    generator_dense,
    mps_to_dense,
    random_mps,
    run_circuit_dense,
)
from mpsim.tebd import GateLog, TebdConfig, run_circuit_tebd
from mpsim.tdvp import (
    UNBOUNDED_CHI,
    EffectiveHamiltonian,
    Environment,
    TdvpConfig,
    Window,
    expand_window_bonds,
    local_1tdvp_apply_gate,
    local_2tdvp_apply_gate,
    run_circuit_tdvp,
    window_for_span,
)

EXACT = TdvpConfig(s_max=0.0, chi_max=UNBOUNDED_CHI)

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def rzz_op(span: tuple[int, int], theta: float) -> GateOp:
    return GateOp(name="rzz", qubits=span, params=(theta,))


def windowed_mpo(g: GateOp, num_sites: int):
    gen = gate_generator(g)
    win = window_for_span(gen.span, num_sites)
    return build_generator_mpo(gen, (win.lo, win.hi)), win


def left_block_oracle(psi, env: Environment, upto: int) -> np.ndarray:
    """From-scratch left block over [lo, upto] with independent ordering."""
    lo = env.window.lo
    chi = psi.tensor(lo).shape[1]
    block = np.eye(chi, dtype=complex)[:, np.newaxis, :]
    for site in range(lo, upto + 1):
        t = psi.tensor(site)
        w = env.mpo_tensor(site)
        step = np.tensordot(block, t, axes=([2], [1]))  # (b, m, q, z)
        step = np.tensordot(step, w, axes=([1, 2], [2, 1]))  # (b, z, p, w)
        step = np.tensordot(t.conj(), step, axes=([0, 1], [2, 0]))  # (c, z, w)
        block = step.transpose(0, 2, 1)
    return block


def right_block_oracle(psi, env: Environment, downto: int) -> np.ndarray:
    """From-scratch right block over [downto, hi] with independent ordering."""
    hi = env.window.hi
    chi = psi.tensor(hi).shape[2]
    block = np.eye(chi, dtype=complex)[:, np.newaxis, :]
    for site in range(hi, downto - 1, -1):
        t = psi.tensor(site)
        w = env.mpo_tensor(site)
        step = np.tensordot(t, block, axes=([2], [2]))  # (q, a, c, w)
        step = np.tensordot(step, w, axes=([0, 3], [1, 3]))  # (a, c, p, m)
        step = np.tensordot(t.conj(), step, axes=([0, 2], [2, 1]))  # (b, a, m)
        block = step.transpose(0, 2, 1)
    return block


# ----------------------------------------------------------------------- Window


def test_window_for_span_interior():
    win = window_for_span((3, 4), 8)
    assert (win.lo, win.hi) == (2, 5)
    assert win.gate_span == (3, 4)


def test_window_for_span_clamps_at_edges():
    assert window_for_span((1, 2), 8).lo == 1
    assert window_for_span((7, 8), 8).hi == 8
    assert window_for_span((1, 8), 8) == Window(lo=1, hi=8, gate_span=(1, 8))


def test_window_rejects_span_outside_chain():
    with pytest.raises(ValueError):
        window_for_span((3, 9), 8)
    with pytest.raises(ValueError):
        Window(lo=3, hi=5, gate_span=(2, 4))


def test_config_validation():
    with pytest.raises(ValueError):
        TdvpConfig(krylov_max=1)
    with pytest.raises(ValueError):
        TdvpConfig(s_max=-1e-9)
    with pytest.raises(ValueError):
        TdvpConfig(chi_max=0)


# ------------------------------------------------------------------ Environment


def test_environment_boundary_blocks_are_identity_deltas():
    psi = random_mps(6, chi=4, seed=1)
    shift_center(psi, 1)
    mpo, win = windowed_mpo(rzz_op((2, 4), 0.7), 6)
    env = Environment(psi, mpo, win)
    chi_hi = psi.tensor(win.hi).shape[2]
    np.testing.assert_array_equal(
        env.right_of(win.hi), np.eye(chi_hi, dtype=complex)[:, np.newaxis, :]
    )
    chi_lo = psi.tensor(win.lo).shape[1]
    np.testing.assert_array_equal(
        env.left, np.eye(chi_lo, dtype=complex)[:, np.newaxis, :]
    )


def test_environment_right_blocks_match_scratch_contraction():
    psi = random_mps(7, chi=4, seed=3)
    shift_center(psi, 1)
    mpo, win = windowed_mpo(rzz_op((2, 5), 1.1), 7)
    env = Environment(psi, mpo, win)
    for site in range(win.lo, win.hi):
        expected = right_block_oracle(psi, env, site + 1)
        assert np.linalg.norm(env.right_of(site) - expected) <= 1e-12


def test_environment_incremental_left_matches_scratch_contraction():
    psi = random_mps(7, chi=4, seed=5)
    mpo, win = windowed_mpo(rzz_op((2, 5), 0.9), 7)
    shift_center(psi, win.lo)
    env = Environment(psi, mpo, win)
    for site in range(win.lo, win.hi):
        shift_center(psi, site + 1)  # makes site left-canonical
        env.absorb_left(psi.tensor(site), site)
        expected = left_block_oracle(psi, env, site)
        assert np.linalg.norm(env.left - expected) <= 1e-12


def test_environment_rejects_mismatched_mpo_window():
    psi = random_mps(6, chi=3, seed=2)
    shift_center(psi, 1)
    gen = gate_generator(rzz_op((2, 4), 0.7))
    mpo = build_generator_mpo(gen, (2, 4))
    with pytest.raises(ValueError):
        Environment(psi, mpo, window_for_span((2, 4), 6))


# -------------------------------------------------------------- EffectiveHamiltonian


def test_two_site_effective_hamiltonian_is_dense_generator_on_full_window():
    # N = 2 window: trivial environments, H_eff must equal the bare generator
    psi = random_mps(2, chi=2, seed=4)
    shift_center(psi, 1)
    g = rzz_op((1, 2), 1.3)
    mpo, win = windowed_mpo(g, 2)
    env = Environment(psi, mpo, win)
    h = EffectiveHamiltonian(env.left, env.right_of(2), (env.mpo_tensor(1), env.mpo_tensor(2)))
    dense = generator_dense(gate_generator(g), 2)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    np.testing.assert_allclose(h.matvec(x), dense @ x, atol=1e-13)


@pytest.mark.parametrize("arity", [1, 2])
def test_effective_hamiltonian_is_hermitian(arity):
    psi = random_mps(6, chi=4, seed=11)
    mpo, win = windowed_mpo(rzz_op((2, 4), 0.8), 6)
    shift_center(psi, win.lo)
    env = Environment(psi, mpo, win)
    n = win.lo + 1
    shift_center(psi, n)
    env.absorb_left(psi.tensor(win.lo), win.lo)
    if arity == 2:
        h = EffectiveHamiltonian(
            env.left, env.right_of(n + 1), (env.mpo_tensor(n), env.mpo_tensor(n + 1))
        )
    else:
        h = EffectiveHamiltonian(env.left, env.right_of(n), (env.mpo_tensor(n),))
    dim = int(np.prod(h.shape()))
    rng = np.random.default_rng(42)
    for _ in range(5):
        u = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        lhs = np.vdot(u, h.matvec(v))
        rhs = np.conj(np.vdot(v, h.matvec(u)))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


# ---------------------------------------------------------- expand_window_bonds


def test_expand_window_bonds_preserves_state_and_form():
    psi = random_mps(7, chi=2, seed=6)
    win = window_for_span((3, 5), 7)
    shift_center(psi, win.lo)
    reference = mps_to_dense(psi)
    before = [psi.tensor(s).copy() for s in range(1, 8)]
    expand_window_bonds(psi, win, chi_max=UNBOUNDED_CHI)
    assert psi.center == win.lo
    assert np.linalg.norm(mps_to_dense(psi).amplitudes - reference.amplitudes) <= 1e-12
    assert max(canonical_form_residuals(psi)) <= 1e-10
    for site in list(range(1, win.lo)) + list(range(win.hi + 1, 8)):
        np.testing.assert_array_equal(psi.tensor(site), before[site - 1])


def test_expand_window_bonds_respects_capacity_caps():
    psi = random_mps(7, chi=2, seed=7)
    win = window_for_span((3, 5), 7)
    shift_center(psi, win.lo)
    chis_before = psi.bond_dims()
    expand_window_bonds(psi, win, chi_max=UNBOUNDED_CHI)
    d = 2
    chi_left = before_lo = chis_before[win.lo - 2] if win.lo > 1 else 1
    chi_right = chis_before[win.hi - 1] if win.hi < 7 else 1
    for bond in range(win.lo, win.hi):
        chi = psi.bond_dims()[bond - 1]
        assert chi <= d * chis_before[bond - 1]
        assert chi <= chi_left * d ** (bond - win.lo + 1)
        assert chi <= chi_right * d ** (win.hi - bond)


def test_expand_window_bonds_honors_chi_max():
    psi = random_mps(7, chi=3, seed=8)
    win = window_for_span((2, 6), 7)
    shift_center(psi, win.lo)
    expand_window_bonds(psi, win, chi_max=4)
    assert all(chi <= 4 for chi in psi.bond_dims())


def test_expand_window_bonds_saturates_at_reachable_rank():
    # each call grows a bond by at most a factor d; repeated calls stop at
    # the rank reachable through the fixed bonds outside the window
    psi = random_mps(7, chi=2, seed=9)
    win = window_for_span((3, 5), 7)
    shift_center(psi, win.lo)
    reference = mps_to_dense(psi)
    chi_left = psi.tensor(win.lo).shape[1]
    chi_right = psi.tensor(win.hi).shape[2]
    for _ in range(6):
        expand_window_bonds(psi, win, chi_max=UNBOUNDED_CHI)
    fixed_point = [t.copy() for t in psi.tensors]
    expand_window_bonds(psi, win, chi_max=UNBOUNDED_CHI)
    for old, new in zip(fixed_point, psi.tensors):
        np.testing.assert_array_equal(old, new)
    for bond in range(win.lo, win.hi):
        cap = min(2 ** (bond - win.lo + 1) * chi_left, 2 ** (win.hi - bond) * chi_right)
        assert psi.bond_dims()[bond - 1] == cap
    assert np.linalg.norm(mps_to_dense(psi).amplitudes - reference.amplitudes) <= 1e-12
    assert max(canonical_form_residuals(psi)) <= 1e-10


# ------------------------------------------------------------ local_2tdvp_apply_gate


def test_zero_angle_generator_leaves_state_unchanged():
    psi = random_mps(6, chi=3, seed=10)
    reference = mps_to_dense(psi)
    mpo, win = windowed_mpo(rzz_op((2, 3), 0.0), 6)
    shift_center(psi, win.lo)
    local_2tdvp_apply_gate(psi, mpo, win, EXACT)
    assert psi.center == win.hi
    assert np.linalg.norm(mps_to_dense(psi).amplitudes - reference.amplitudes) <= 1e-12


def test_cnot_on_plus_control_builds_bell_pair():
    psi = product_state(4, 2, [0, 0, 0, 0])
    apply_single_qubit_gate(psi, 2, HADAMARD)
    g = GateOp(name="cx", qubits=(2, 3), params=())
    mpo, win = windowed_mpo(g, 4)
    shift_center(psi, win.lo)
    local_2tdvp_apply_gate(psi, mpo, win, EXACT)
    circuit = Circuit(
        num_qubits=4,
        gates=[GateOp(name="h", qubits=(2,), params=()), g],
        layer_marks=[2],
    )
    expected = run_circuit_dense(circuit, dense_basis_state(4, [0] * 4))
    assert fidelity(mps_to_dense(psi), expected) >= 1.0 - 1e-10


def test_long_range_gate_applies_without_swaps():
    psi = random_mps(7, chi=4, seed=12)
    theta = 0.77
    g = rzz_op((2, 5), theta)
    mpo, win = windowed_mpo(g, 7)
    shift_center(psi, win.lo)
    reference = mps_to_dense(psi)
    expected = generator_dense(gate_generator(g), 7)
    local_2tdvp_apply_gate(psi, mpo, win, EXACT)
    import scipy.linalg

    target = scipy.linalg.expm(-1j * expected) @ reference.amplitudes
    from mpsim.oracle import DenseState

    assert fidelity(mps_to_dense(psi), DenseState(7, target)) >= 1.0 - 1e-8


def test_center_misplaced_is_rejected():
    psi = random_mps(6, chi=3, seed=13)
    mpo, win = windowed_mpo(rzz_op((2, 4), 0.5), 6)
    shift_center(psi, win.hi)
    with pytest.raises(ValueError):
        local_2tdvp_apply_gate(psi, mpo, win, EXACT)


def test_tensors_outside_window_untouched_bit_for_bit():
    psi = random_mps(8, chi=4, seed=14)
    mpo, win = windowed_mpo(rzz_op((4, 5), 0.9), 8)
    shift_center(psi, win.lo)
    outside = {
        s: psi.tensor(s).copy()
        for s in range(1, 9)
        if s < win.lo or s > win.hi
    }
    local_2tdvp_apply_gate(psi, mpo, win, EXACT)
    for site, t in outside.items():
        np.testing.assert_array_equal(psi.tensor(site), t)


def test_norm_preserved_without_truncation():
    psi = random_mps(6, chi=4, seed=15)
    mpo, win = windowed_mpo(rzz_op((2, 5), 1.7), 6)
    shift_center(psi, win.lo)
    norm_in = norm(psi)
    local_2tdvp_apply_gate(psi, mpo, win, EXACT)
    assert abs(norm(psi) - norm_in) <= 1e-8


@pytest.mark.parametrize(
    "g",
    [
        rzz_op((2, 3), 1.21),
        GateOp(name="rxx", qubits=(3, 5), params=(0.64,)),
        GateOp(name="cx", qubits=(1, 2), params=()),
        GateOp(name="cz", qubits=(4, 6), params=()),
    ],
    ids=["rzz-nn", "rxx-range2", "cx-edge", "cz-range2-end"],
)
def test_exact_on_saturated_manifold(g):
    psi = random_mps(6, chi=64, seed=16)
    assert psi.bond_dims() == [2, 4, 8, 4, 2]
    reference = mps_to_dense(psi)
    mpo, win = windowed_mpo(g, 6)
    shift_center(psi, win.lo)
    import scipy.linalg

    target = scipy.linalg.expm(-1j * generator_dense(gate_generator(g), 6))
    from mpsim.oracle import DenseState

    expected = DenseState(6, target @ reference.amplitudes)
    local_2tdvp_apply_gate(psi, mpo, win, EXACT)
    assert fidelity(mps_to_dense(psi), expected) >= 1.0 - 1e-8


# ------------------------------------------------------------ local_1tdvp_apply_gate


def test_one_site_zero_angle_is_identity():
    psi = random_mps(6, chi=4, seed=17)
    g = rzz_op((3, 4), 0.0)
    gen = gate_generator(g)
    mpo = build_generator_mpo(gen, gen.span)
    shift_center(psi, 3)
    reference = mps_to_dense(psi)
    local_1tdvp_apply_gate(psi, mpo, gen.span, EXACT)
    assert psi.center == 4
    assert np.linalg.norm(mps_to_dense(psi).amplitudes - reference.amplitudes) <= 1e-12


def test_one_site_exact_on_saturated_manifold():
    psi = random_mps(6, chi=64, seed=18)
    g = rzz_op((3, 4), 0.9)
    gen = gate_generator(g)
    mpo = build_generator_mpo(gen, gen.span)
    shift_center(psi, 3)
    reference = mps_to_dense(psi)
    chis_before = psi.bond_dims()
    norm_in = norm(psi)
    local_1tdvp_apply_gate(psi, mpo, gen.span, EXACT)
    import scipy.linalg

    target = scipy.linalg.expm(-1j * generator_dense(gen, 6))
    from mpsim.oracle import DenseState

    expected = DenseState(6, target @ reference.amplitudes)
    assert fidelity(mps_to_dense(psi), expected) >= 1.0 - 1e-8
    assert psi.bond_dims() == chis_before
    assert abs(norm(psi) - norm_in) <= 1e-8


def test_one_site_requires_center_at_span_start():
    psi = random_mps(6, chi=4, seed=19)
    g = rzz_op((3, 4), 0.4)
    gen = gate_generator(g)
    mpo = build_generator_mpo(gen, gen.span)
    shift_center(psi, 1)
    with pytest.raises(ValueError):
        local_1tdvp_apply_gate(psi, mpo, gen.span, EXACT)


# ----------------------------------------------------------------- run_circuit_tdvp


def test_single_qubit_circuit_matches_tebd_bitwise():
    gates = [
        GateOp(name="h", qubits=(1,), params=()),
        GateOp(name="rx", qubits=(3,), params=(0.3,)),
        GateOp(name="u3", qubits=(2,), params=(0.1, 0.2, 0.3)),
    ]
    circuit = Circuit(num_qubits=3, gates=gates, layer_marks=[3])
    cfg_tebd = TebdConfig(s_max=0.0, chi_max=2**30)
    out_tebd, _ = run_circuit_tebd(circuit, product_state(3, 2, [0] * 3), cfg_tebd)
    out_tdvp, _ = run_circuit_tdvp(circuit, product_state(3, 2, [0] * 3), EXACT)
    for a, b in zip(out_tebd.tensors, out_tdvp.tensors):
        np.testing.assert_array_equal(a, b)


def test_one_periodic_trotter_step_matches_dense_oracle():
    circuit = heisenberg_1d(8, 1.0, 1.0, 0.1, 1, periodic=True)
    cfg = TdvpConfig(s_max=1e-12, chi_max=UNBOUNDED_CHI)
    log = GateLog()
    out, metrics = run_circuit_tdvp(circuit, product_state(8, 2, [0] * 8), cfg, log=log)
    expected = run_circuit_dense(circuit, dense_basis_state(8, [0] * 8))
    assert fidelity(mps_to_dense(out), expected) >= 1.0 - 1e-8
    assert log.swaps == 0
    assert len(metrics) == 1
    assert metrics[0].cost == sum(chi**3 for chi in metrics[0].bond_dims)


def test_swap_gate_falls_back_to_direct_contraction():
    gates = [
        GateOp(name="h", qubits=(1,), params=()),
        GateOp(name="swap", qubits=(1, 2), params=()),
    ]
    circuit = Circuit(num_qubits=3, gates=gates, layer_marks=[2])
    log = GateLog()
    out, _ = run_circuit_tdvp(circuit, product_state(3, 2, [0] * 3), EXACT, log=log)
    assert log.swaps == 1
    expected = run_circuit_dense(circuit, dense_basis_state(3, [0] * 3))
    assert fidelity(mps_to_dense(out), expected) >= 1.0 - 1e-12


def test_descending_qubit_gate_matches_dense_oracle():
    gates = [
        GateOp(name="h", qubits=(4,), params=()),
        GateOp(name="cx", qubits=(4, 2), params=()),
    ]
    circuit = Circuit(num_qubits=5, gates=gates, layer_marks=[2])
    out, _ = run_circuit_tdvp(circuit, product_state(5, 2, [0] * 5), EXACT)
    expected = run_circuit_dense(circuit, dense_basis_state(5, [0] * 5))
    assert fidelity(mps_to_dense(out), expected) >= 1.0 - 1e-10


def test_engine_rejects_size_mismatch():
    circuit = heisenberg_1d(6, 1.0, 1.0, 0.1, 1)
    with pytest.raises(ValueError):
        run_circuit_tdvp(circuit, product_state(5, 2, [0] * 5), EXACT)

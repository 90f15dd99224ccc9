"""Dense-statevector reference implementations for small-N validation.

This module is an independent code path: it never calls the MPS engines.
Amplitude ordering is big-endian, site 1 varies slowest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .gates import ProductGenerator, SumGenerator, gate_unitary
from .mps import MPS, shift_center

MAX_DENSE_SITES = 14
MAX_PROJECTOR_SITES = 8


@dataclass
class DenseState:
    """Full statevector over num_sites qudits."""

    num_sites: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.num_sites > MAX_DENSE_SITES:
            raise ValueError(f"dense representation capped at {MAX_DENSE_SITES} sites")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a vector")

    @property
    def local_dim(self) -> int:
        d = round(len(self.amplitudes) ** (1.0 / self.num_sites))
        return int(d)


def dense_basis_state(num_sites: int, basis_labels: list[int], local_dim: int = 2) -> DenseState:
    """One-hot statevector |basis_labels>."""
    index = 0
    for label in basis_labels:
        if not 0 <= label < local_dim:
            raise ValueError(f"basis label {label} out of range")
        index = index * local_dim + label
    amplitudes = np.zeros(local_dim**num_sites, dtype=complex)
    amplitudes[index] = 1.0
    return DenseState(num_sites=num_sites, amplitudes=amplitudes)


def _apply_dense_gate(psi: np.ndarray, num_sites: int, d: int, u: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    """Apply a 1- or 2-qubit unitary to the reshaped statevector."""
    tensor = psi.reshape((d,) * num_sites)
    axes = [q - 1 for q in qubits]
    k = len(axes)
    u_tensor = u.reshape((d,) * (2 * k))
    moved = np.tensordot(u_tensor, tensor, axes=(list(range(k, 2 * k)), axes))
    moved = np.moveaxis(moved, list(range(k)), axes)
    return moved.reshape(-1)


def run_circuit_dense(circuit: Circuit, psi0: DenseState) -> DenseState:
    """Exact gate-by-gate statevector evolution."""
    if circuit.num_qubits != psi0.num_sites:
        raise ValueError(
            f"circuit has {circuit.num_qubits} qubits, state has {psi0.num_sites} sites"
        )
    d = psi0.local_dim
    amps = psi0.amplitudes.copy()
    for g in circuit.gates:
        amps = _apply_dense_gate(amps, psi0.num_sites, d, gate_unitary(g), g.qubits)
    return DenseState(num_sites=psi0.num_sites, amplitudes=amps)


def mps_to_dense(psi: MPS) -> DenseState:
    """Contract an MPS into its dense statevector."""
    if psi.num_sites > MAX_DENSE_SITES:
        raise ValueError(f"dense representation capped at {MAX_DENSE_SITES} sites")
    block = np.ones((1, 1), dtype=complex)
    for t in psi.tensors:
        block = np.einsum("xa,qab->xqb", block, t, optimize=True)
        block = block.reshape(block.shape[0] * block.shape[1], block.shape[2])
    return DenseState(num_sites=psi.num_sites, amplitudes=block[:, 0])


def fidelity(a: DenseState, b: DenseState) -> float:
    """|<a|b>|^2 normalized by both norms; phase-insensitive overlap."""
    if a.num_sites != b.num_sites:
        raise ValueError("states have different site counts")
    na = np.linalg.norm(a.amplitudes)
    nb = np.linalg.norm(b.amplitudes)
    if na == 0.0 or nb == 0.0:
        raise ValueError("fidelity undefined for a zero vector")
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2 / (na**2 * nb**2)
    return float(min(1.0, overlap))


def random_mps(num_sites: int, local_dim: int = 2, chi: int = 4, seed: int = 0) -> MPS:
    """Normalized random MPS with bond dims min(chi, maximal rank).

    Canonicalized with the center at site 1; used by validation harnesses
    and tests.
    """
    rng = np.random.default_rng(seed)
    bonds = [1]
    for n in range(1, num_sites):
        bonds.append(min(chi, local_dim ** min(n, num_sites - n)))
    bonds.append(1)
    tensors = []
    for n in range(num_sites):
        shape = (local_dim, bonds[n], bonds[n + 1])
        tensors.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    psi = MPS(tensors=tensors, center=num_sites)
    shift_center(psi, 1)
    c = psi.tensor(1)
    psi.set_tensor(1, c / np.linalg.norm(c))
    return psi


def _left_isometries(psi: MPS) -> list[np.ndarray]:
    """Dense isometries L_n (d^n, chi_n) spanning the left block bases."""
    gauged = shift_center(psi.copy(), psi.num_sites)
    isometries = [np.ones((1, 1), dtype=complex)]
    for n in range(1, psi.num_sites):
        prev = isometries[n - 1]
        step = np.einsum("xa,qab->xqb", prev, gauged.tensor(n), optimize=True)
        isometries.append(step.reshape(-1, step.shape[2]))
    return isometries


def _right_isometries(psi: MPS) -> dict[int, np.ndarray]:
    """Dense isometries R_m (d^{N-m+1}, chi_{m-1}) spanning right blocks [m..N]."""
    gauged = shift_center(psi.copy(), 1)
    N = psi.num_sites
    isometries = {N + 1: np.ones((1, 1), dtype=complex)}
    for m in range(N, 1, -1):
        nxt = isometries[m + 1]
        step = np.einsum("qab,xb->qxa", gauged.tensor(m), nxt, optimize=True)
        isometries[m] = step.reshape(-1, step.shape[2])
    return isometries


def dense_tangent_projector_2site(
    psi: MPS,
    v: DenseState,
    mode: str = "global",
    window: tuple[int, int] | None = None,
) -> DenseState:
    """Apply the dense two-site tangent-space projector of psi to v.

    In global mode the projector sums forward terms over n = 1..N and
    subtracts backward terms over n = 1..N-1, where the forward term is
    P_L[1:n-1] (x) I_n (x) I_{n+1} (x) P_R[n+2:N] and the backward term
    is P_L[1:n] (x) I_{n+1} (x) P_R[n+2:N]; factors falling outside the
    chain are dropped. Local mode restricts to a window (lo, hi): forward
    n = lo..hi-1, backward n = lo..hi-2.

    The block projectors P_L / P_R are built from the state's canonical
    block bases; gauge handling is internal.
    """
    N = psi.num_sites
    d = psi.local_dim
    if N > MAX_PROJECTOR_SITES:
        raise ValueError(f"dense projector capped at {MAX_PROJECTOR_SITES} sites")
    if v.num_sites != N:
        raise ValueError("state and vector site counts differ")
    if mode not in ("global", "local"):
        raise ValueError(f"mode must be global or local, got {mode!r}")
    if mode == "local":
        if window is None:
            raise ValueError("local mode needs a window")
        lo, hi = window
        if not 1 <= lo < hi <= N:
            raise ValueError(f"window {window} outside the chain")
        forward_range = range(lo, hi)
        backward_range = range(lo, hi - 1)
    else:
        forward_range = range(1, N + 1)
        backward_range = range(1, N)

    left_iso = _left_isometries(psi)
    right_iso = _right_isometries(psi)

    def projector_left(n: int) -> np.ndarray:
        iso = left_iso[n]
        return iso @ iso.conj().T

    def projector_right(m: int) -> np.ndarray:
        iso = right_iso[m]
        return iso @ iso.conj().T

    def term(p_left_sites: int, open_sites: int, p_right_from: int) -> np.ndarray:
        open_dim = d ** min(open_sites, N - p_left_sites)
        matrix = np.kron(projector_left(p_left_sites), np.eye(open_dim))
        if p_right_from <= N:
            matrix = np.kron(matrix, projector_right(p_right_from))
        return matrix

    out = np.zeros_like(v.amplitudes)
    for n in forward_range:
        out += term(n - 1, 2, n + 2) @ v.amplitudes
    for n in backward_range:
        out -= term(n, 1, n + 2) @ v.amplitudes
    return DenseState(num_sites=N, amplitudes=out)


def generator_dense(gen: ProductGenerator | SumGenerator, num_sites: int, d: int = 2) -> np.ndarray:
    """Dense Hermitian matrix of a two-site generator padded with identities."""
    k, kq = gen.span
    if isinstance(gen, ProductGenerator):
        pairs = [(gen.factor_left, gen.factor_right)]
    else:
        pairs = list(gen.terms)
    total = np.zeros((d**num_sites, d**num_sites), dtype=complex)
    for left_factor, right_factor in pairs:
        matrix = np.ones((1, 1), dtype=complex)
        for site in range(1, num_sites + 1):
            if site == k:
                factor = left_factor
            elif site == kq:
                factor = right_factor
            else:
                factor = np.eye(d)
            matrix = np.kron(matrix, factor)
        total += matrix
    return gen.coefficient * total


def windowed_projection_residual(psi: MPS, gen: ProductGenerator | SumGenerator) -> float:
    """Relative mismatch between the global and windowed projections of H|psi>.

    The window is the generator span padded by one site on each side,
    clamped to the chain. Returns ||(P_global - P_window) H psi|| / ||H psi||,
    or 0 when H annihilates the state.
    """
    N = psi.num_sites
    k, kq = gen.span
    h = generator_dense(gen, N, psi.local_dim)
    v = DenseState(N, h @ mps_to_dense(psi).amplitudes)
    scale = float(np.linalg.norm(v.amplitudes))
    if scale == 0.0:
        return 0.0
    lo, hi = max(1, k - 1), min(N, kq + 1)
    projected_global = dense_tangent_projector_2site(psi, v, "global")
    projected_local = dense_tangent_projector_2site(psi, v, "local", (lo, hi))
    gap = projected_global.amplitudes - projected_local.amplitudes
    return float(np.linalg.norm(gap) / scale)

"""Windowed projector engine: gate application by a local two-site sweep.

A two-qubit gate with product generator H = c * H_k (x) H_{k+q} is applied
as one unit-timestep evolution projected onto the MPS manifold. The
projection only has support on the window [k-1, k+q+1] (clamped to the
chain), so a single left-to-right sweep over that window suffices:

  for n = lo .. hi-1:
    evolve the merged pair (n, n+1) by exp(-i H_eff) (Lanczos),
    split by truncated SVD moving the center to n+1,
    if n+1 < hi: evolve the new center by exp(+i H_eff) backward.

Long-range gates need no SWAP routing; identity padding in the generator
MPO carries the interaction across the window. SWAP gates themselves have
no product generator and fall back to direct contraction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import tebd
from .circuits import Circuit
from .gates import (
    GATE_ARITY,
    GeneratorMPO,
    ProductGenerator,
    build_generator_mpo,
    gate_generator,
    gate_unitary,
    oriented_unitary,
)
from .linalg import TruncationReport, lanczos_expm_apply, qr_orthonormalize
from .metrics import ProbeSpec, StepMetrics, capture_step
from .mps import (
    MPS,
    apply_single_qubit_gate,
    merge_two_sites,
    shift_center,
    split_two_sites,
)

UNBOUNDED_CHI = tebd.UNBOUNDED_CHI


@dataclass
class TdvpConfig:
    """Truncation and Krylov settings for the windowed projector engine."""

    s_max: float = 0.0
    chi_max: int = UNBOUNDED_CHI
    krylov_max: int = 25
    krylov_tol: float = 1e-12
    record_metrics: bool = True

    def __post_init__(self) -> None:
        if self.s_max < 0:
            raise ValueError(f"s_max must be >= 0, got {self.s_max}")
        if self.chi_max < 1:
            raise ValueError(f"chi_max must be >= 1, got {self.chi_max}")
        if self.krylov_max < 2:
            raise ValueError(f"krylov_max must be >= 2, got {self.krylov_max}")


@dataclass(frozen=True)
class Window:
    """Sweep range [lo, hi] around a gate span (clamped to the chain)."""

    lo: int
    hi: int
    gate_span: tuple[int, int]

    def __post_init__(self) -> None:
        k, kq = self.gate_span
        if not self.lo <= k <= kq <= self.hi:
            raise ValueError(f"window [{self.lo}, {self.hi}] does not contain span {self.gate_span}")


def window_for_span(span: tuple[int, int], num_sites: int) -> Window:
    """The gate window [k-1, k+q+1] clamped to [1, N]."""
    k, kq = span
    if not 1 <= k < kq <= num_sites:
        raise ValueError(f"span {span} outside 1..{num_sites}")
    return Window(lo=max(1, k - 1), hi=min(num_sites, kq + 1), gate_span=span)


class Environment:
    """Left/right contraction blocks of (bra MPS, MPO, ket MPS) over a window.

    Block legs are ordered (bra bond, mpo bond, ket bond). The boundary
    blocks are identity deltas over the window's edge bonds (scalar 1 at
    a chain end). Right blocks are built once from the tensors right of
    the center; the left block grows as the sweep absorbs updated sites.
    """

    def __init__(self, psi: MPS, mpo: GeneratorMPO, window: Window) -> None:
        lo, hi = window.lo, window.hi
        if mpo.window != (lo, hi):
            raise ValueError(f"MPO window {mpo.window} does not match sweep window {(lo, hi)}")
        self.window = window
        self.mpo = mpo
        left_dim = psi.tensor(lo).shape[1]
        self.left = np.eye(left_dim, dtype=complex)[:, np.newaxis, :]
        right_dim = psi.tensor(hi).shape[2]
        self._right: dict[int, np.ndarray] = {
            hi: np.eye(right_dim, dtype=complex)[:, np.newaxis, :]
        }
        for n in range(hi - 1, lo - 1, -1):
            self._right[n] = self._absorb_right(
                self._right[n + 1], psi.tensor(n + 1), self.mpo_tensor(n + 1)
            )

    def mpo_tensor(self, site: int) -> np.ndarray:
        return self.mpo.site_tensors[site - self.window.lo]

    def right_of(self, site: int) -> np.ndarray:
        """Block contracting everything right of site (sites site+1 .. hi)."""
        return self._right[site]

    def absorb_left(self, site_tensor: np.ndarray, site: int) -> None:
        """Grow the left block by an (updated, left-canonical) site tensor."""
        w = self.mpo_tensor(site)
        self.left = np.einsum(
            "pbc,pqmw,bma,qaz->cwz",
            site_tensor.conj(),
            w,
            self.left,
            site_tensor,
            optimize=True,
        )

    @staticmethod
    def _absorb_right(block: np.ndarray, site_tensor: np.ndarray, w: np.ndarray) -> np.ndarray:
        return np.einsum(
            "pbc,pqmw,cwz,qaz->bma",
            site_tensor.conj(),
            w,
            block,
            site_tensor,
            optimize=True,
        )


class EffectiveHamiltonian:
    """Environment blocks plus MPO tensors as a Hermitian map on site tensors.

    arity 2 acts on a merged pair (p1, p2, left, right), arity 1 on one
    site tensor (p, left, right), arity 0 on a bond matrix (left, right).
    """

    def __init__(self, left: np.ndarray, right: np.ndarray, mpo_tensors: tuple[np.ndarray, ...]):
        self.left = left
        self.right = right
        self.mpo_tensors = mpo_tensors
        self.arity = len(mpo_tensors)

    def shape(self) -> tuple[int, ...]:
        d = self.mpo_tensors[0].shape[0] if self.arity else None
        chi_l = self.left.shape[2]
        chi_r = self.right.shape[2]
        if self.arity == 2:
            return (d, d, chi_l, chi_r)
        if self.arity == 1:
            return (d, chi_l, chi_r)
        return (chi_l, chi_r)

    def matvec(self, flat: np.ndarray) -> np.ndarray:
        x = flat.reshape(self.shape())
        if self.arity == 2:
            w1, w2 = self.mpo_tensors
            t = np.tensordot(self.left, x, axes=([2], [2]))  # (bl, m0, p1, p2, r)
            t = np.tensordot(t, w1, axes=([1, 2], [2, 1]))  # (bl, p2, r, p1', m1)
            t = np.tensordot(t, w2, axes=([4, 1], [2, 1]))  # (bl, r, p1', p2', m2)
            t = np.tensordot(t, self.right, axes=([1, 4], [2, 1]))  # (bl, p1', p2', br)
            return t.transpose(1, 2, 0, 3).reshape(-1)
        if self.arity == 1:
            (w,) = self.mpo_tensors
            t = np.tensordot(self.left, x, axes=([2], [1]))  # (bl, m0, p, r)
            t = np.tensordot(t, w, axes=([1, 2], [2, 1]))  # (bl, r, p', m1)
            t = np.tensordot(t, self.right, axes=([1, 3], [2, 1]))  # (bl, p', br)
            return t.transpose(1, 0, 2).reshape(-1)
        t = np.tensordot(self.left, x, axes=([2], [0]))  # (bl, m, r)
        t = np.tensordot(t, self.right, axes=([2, 1], [2, 1]))  # (bl, br)
        return t.reshape(-1)


COMPLETION_SEED = 0x5EED


def expand_window_bonds(psi: MPS, win: Window, chi_max: int) -> MPS:
    """Pad the window bonds up to the sweep's two-site capacity.

    Each grown bond keeps its directions and gains fresh ones that carry
    zero weight on their left, so the represented state and the center
    (required at win.lo) are unchanged; the sweep's own splits re-truncate
    whatever stays unused. The completions are drawn in general position
    rather than from a QR of the padded tensors: structured states can
    otherwise leave a long-range generator with no matrix element between
    any pair of Schmidt vectors, freezing the sweep into a mean-field
    update. Seeded so runs are reproducible.
    """
    d = psi.local_dim
    chi_left = psi.tensor(win.lo).shape[1]
    chi_right = psi.tensor(win.hi).shape[2]
    targets: dict[int, int] = {}
    for bond in range(win.lo, win.hi):
        chi = psi.tensor(bond).shape[2]
        # rank reachable through the fixed bonds just outside the window
        cap = min(
            chi_left * d ** (bond - win.lo + 1), chi_right * d ** (win.hi - bond)
        )
        target = min(d * chi, cap, chi_max)
        if target > chi:
            targets[bond] = target
    if not targets:
        return psi
    rng = np.random.default_rng(COMPLETION_SEED)
    for site in range(win.lo, win.hi + 1):
        t = psi.tensor(site)
        _, old_l, old_r = t.shape
        new_l = targets.get(site - 1, old_l)
        new_r = targets.get(site, old_r)
        if new_l == old_l and new_r == old_r:
            continue
        out = np.zeros((d, new_l, new_r), dtype=complex)
        out[:, :old_l, :old_r] = t
        if new_l > old_l:
            # complete the right-orthonormal rows of a non-center site
            kept = out[:, :old_l, :].transpose(1, 0, 2).reshape(old_l, d * new_r)
            fresh = rng.standard_normal((new_l - old_l, d * new_r)).astype(complex)
            fresh += 1j * rng.standard_normal(fresh.shape)
            fresh -= (fresh @ kept.conj().T) @ kept
            q, _ = qr_orthonormalize(fresh.conj().T)
            rows = q.conj().T.reshape(new_l - old_l, d, new_r)
            out[:, old_l:, :] = rows.transpose(1, 0, 2)
        psi.set_tensor(site, out)
    return psi


def local_2tdvp_apply_gate(
    psi: MPS, gen: GeneratorMPO, win: Window, cfg: TdvpConfig
) -> tuple[MPS, list[TruncationReport]]:
    """One-sweep two-site projected evolution of exp(-i H) over a window.

    Requires the center at win.lo. Tensors outside [lo, hi] are untouched
    and the center ends at win.hi.
    """
    if psi.center != win.lo:
        raise ValueError(f"center must sit at window start {win.lo}, is at {psi.center}")
    expand_window_bonds(psi, win, cfg.chi_max)
    env = Environment(psi, gen, win)
    reports: list[TruncationReport] = []
    for n in range(win.lo, win.hi):
        theta = merge_two_sites(psi, n)
        h_pair = EffectiveHamiltonian(
            env.left, env.right_of(n + 1), (env.mpo_tensor(n), env.mpo_tensor(n + 1))
        )
        evolved = lanczos_expm_apply(
            h_pair.matvec, theta.reshape(-1), -1j, cfg.krylov_max, cfg.krylov_tol
        ).reshape(theta.shape)
        report = split_two_sites(
            psi, n, evolved, s_max=cfg.s_max, chi_max=cfg.chi_max, center_to=n + 1
        )
        reports.append(report)
        env.absorb_left(psi.tensor(n), n)
        if n + 1 < win.hi:
            h_site = EffectiveHamiltonian(
                env.left, env.right_of(n + 1), (env.mpo_tensor(n + 1),)
            )
            m = psi.tensor(n + 1)
            back = lanczos_expm_apply(
                h_site.matvec, m.reshape(-1), +1j, cfg.krylov_max, cfg.krylov_tol
            ).reshape(m.shape)
            psi.set_tensor(n + 1, back)
    return psi, reports


def local_1tdvp_apply_gate(
    psi: MPS, gen: GeneratorMPO, span: tuple[int, int], cfg: TdvpConfig
) -> MPS:
    """Fixed-rank single-site variant over the bare gate span [k, k+q].

    Bond dimensions are unchanged: sites evolve forward one at a time,
    QR-split, and the bond matrix evolves backward. Requires the center
    at k; it ends at k+q.
    """
    k, kq = span
    if psi.center != k:
        raise ValueError(f"center must sit at span start {k}, is at {psi.center}")
    win = Window(lo=k, hi=kq, gate_span=span)
    env = Environment(psi, gen, win)
    for n in range(k, kq + 1):
        m = psi.tensor(n)
        h_site = EffectiveHamiltonian(env.left, env.right_of(n), (env.mpo_tensor(n),))
        evolved = lanczos_expm_apply(
            h_site.matvec, m.reshape(-1), -1j, cfg.krylov_max, cfg.krylov_tol
        ).reshape(m.shape)
        if n == kq:
            psi.set_tensor(n, evolved)
            psi.center = n
            break
        d, left, right = evolved.shape
        q, r = qr_orthonormalize(evolved.reshape(d * left, right))
        psi.set_tensor(n, q.reshape(d, left, q.shape[1]))
        env.absorb_left(psi.tensor(n), n)
        h_bond = EffectiveHamiltonian(env.left, env.right_of(n), ())
        bond = lanczos_expm_apply(
            h_bond.matvec, r.reshape(-1), +1j, cfg.krylov_max, cfg.krylov_tol
        ).reshape(r.shape)
        nxt = psi.tensor(n + 1)
        psi.set_tensor(n + 1, np.tensordot(bond, nxt, axes=(1, 1)).transpose(1, 0, 2))
        psi.center = n + 1
    return psi


def run_circuit_tdvp(
    circuit: Circuit,
    psi0: MPS,
    cfg: TdvpConfig,
    probes: ProbeSpec | None = None,
    log: tebd.GateLog | None = None,
) -> tuple[MPS, list[StepMetrics]]:
    """Apply a circuit with the windowed projector engine.

    Single-qubit gates contract directly into their site tensor. Product
    generator gates (any range) go through the local two-site sweep with
    no SWAP routing. SWAP gates fall back to direct contraction and are
    the only thing counted in log.swaps. psi0 is evolved in place.
    """
    if circuit.num_qubits != psi0.num_sites:
        raise ValueError(
            f"circuit has {circuit.num_qubits} qubits, state has {psi0.num_sites} sites"
        )
    psi = psi0
    probes = probes if probes is not None else ProbeSpec()
    log = log if log is not None else tebd.GateLog()
    tebd_cfg = tebd.TebdConfig(s_max=cfg.s_max, chi_max=cfg.chi_max, record_metrics=False)
    metrics: list[StepMetrics] = []
    marks = list(circuit.layer_marks) if cfg.record_metrics else []
    next_mark = 0
    segment_start = time.perf_counter()
    for position, g in enumerate(circuit.gates, start=1):
        if GATE_ARITY[g.name] == 1:
            apply_single_qubit_gate(psi, g.qubits[0], gate_unitary(g))
        elif g.name == "swap":
            k, kq, u = oriented_unitary(g)
            if kq == k + 1:
                _, report = tebd.apply_nn_gate(psi, k, u, tebd_cfg)
                log.discarded_weight += report.discarded_weight
            else:
                tebd.apply_long_range_gate(psi, k, kq, u, tebd_cfg, log)
            log.swaps += 1
        else:
            gen = gate_generator(g)
            assert isinstance(gen, ProductGenerator)
            win = window_for_span(gen.span, psi.num_sites)
            shift_center(psi, win.lo)
            mpo = build_generator_mpo(gen, (win.lo, win.hi))
            _, reports = local_2tdvp_apply_gate(psi, mpo, win, cfg)
            log.discarded_weight += sum(r.discarded_weight for r in reports)
        if next_mark < len(marks) and marks[next_mark] == position:
            elapsed_ms = (time.perf_counter() - segment_start) * 1e3
            metrics.append(
                capture_step(psi, next_mark + 1, probes, log.discarded_weight, elapsed_ms)
            )
            next_mark += 1
            segment_start = time.perf_counter()
    return psi, metrics

"""Matrix product state with canonical-form management.

Site tensors are rank-3 arrays indexed (physical, left bond, right bond).
Sites are numbered 1..N in every public interface; the outer bonds have
dimension 1. An MPS carries an orthogonality center: tensors left of it
satisfy the left canonical condition, tensors right of it the right one.

Operations mutate the passed state in place and return it; callers that
need the original unchanged should copy() first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import TruncationReport, qr_orthonormalize, truncated_svd


@dataclass
class MPS:
    """Chain of rank-3 site tensors with an orthogonality center.

    Attributes:
        tensors: Site tensors, entry n-1 holding site n as (phys, left, right).
        center: 1-based site index of the orthogonality center.
    """

    tensors: list[np.ndarray]
    center: int

    @property
    def num_sites(self) -> int:
        return len(self.tensors)

    @property
    def local_dim(self) -> int:
        return self.tensors[0].shape[0]

    def tensor(self, site: int) -> np.ndarray:
        """Tensor at 1-based site index."""
        return self.tensors[site - 1]

    def set_tensor(self, site: int, value: np.ndarray) -> None:
        self.tensors[site - 1] = value

    def bond_dims(self) -> list[int]:
        """Interior bond dimensions chi_1 .. chi_{N-1}."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MPS":
        return MPS(tensors=[t.copy() for t in self.tensors], center=self.center)


def product_state(num_sites: int, local_dim: int, basis_labels: list[int]) -> MPS:
    """Unentangled computational-basis state with all bond dimensions 1.

    Args:
        num_sites: Chain length N >= 1.
        local_dim: Physical dimension d (2 for qubits).
        basis_labels: Per-site basis index, each in [0, d).

    Returns:
        MPS for |basis_labels> with center at site 1 and unit norm.
    """
    if len(basis_labels) != num_sites:
        raise ValueError(f"expected {num_sites} labels, got {len(basis_labels)}")
    tensors = []
    for label in basis_labels:
        if not 0 <= label < local_dim:
            raise ValueError(f"basis label {label} out of range for d={local_dim}")
        t = np.zeros((local_dim, 1, 1), dtype=complex)
        t[label, 0, 0] = 1.0
        tensors.append(t)
    return MPS(tensors=tensors, center=1)


def _orthonormalize_left(psi: MPS, site: int) -> None:
    """Left-orthonormalize the tensor at site, absorbing R into site + 1."""
    m = psi.tensor(site)
    d, left, right = m.shape
    q, r = qr_orthonormalize(m.reshape(d * left, right))
    psi.set_tensor(site, q.reshape(d, left, q.shape[1]))
    nxt = psi.tensor(site + 1)
    psi.set_tensor(site + 1, np.tensordot(r, nxt, axes=(1, 1)).transpose(1, 0, 2))


def _orthonormalize_right(psi: MPS, site: int) -> None:
    """Right-orthonormalize the tensor at site, absorbing L into site - 1."""
    m = psi.tensor(site)
    d, left, right = m.shape
    # rows = left bond, columns = (phys, right); QR of the conjugate transpose
    y = m.transpose(1, 0, 2).reshape(left, d * right)
    q, r = qr_orthonormalize(y.conj().T)
    k = q.shape[1]
    psi.set_tensor(site, q.conj().T.reshape(k, d, right).transpose(1, 0, 2))
    prv = psi.tensor(site - 1)
    psi.set_tensor(site - 1, np.tensordot(prv, r.conj().T, axes=(2, 0)))


def shift_center(psi: MPS, target: int) -> MPS:
    """Move the orthogonality center to the target site.

    The represented state is unchanged; flank tensors are re-gauged into
    their canonical forms along the way.
    """
    if not 1 <= target <= psi.num_sites:
        raise ValueError(f"target site {target} outside 1..{psi.num_sites}")
    while psi.center < target:
        _orthonormalize_left(psi, psi.center)
        psi.center += 1
    while psi.center > target:
        _orthonormalize_right(psi, psi.center)
        psi.center -= 1
    return psi


def norm(psi: MPS) -> float:
    """Norm of the represented state via full transfer contraction.

    Does not rely on canonical form and never mutates the state.
    """
    env = np.ones((1, 1), dtype=complex)
    for m in psi.tensors:
        env = np.einsum("qac,ab,qbd->cd", m.conj(), env, m, optimize=True)
    return float(np.sqrt(max(env[0, 0].real, 0.0)))


def apply_single_qubit_gate(psi: MPS, site: int, u: np.ndarray, strict: bool = False) -> MPS:
    """Contract a d x d operator into the tensor at the given site.

    Bond dimensions and the center position are unchanged (a unitary on
    the physical leg preserves both canonical conditions).

    Args:
        psi: State to update in place.
        site: 1-based target site.
        u: d x d matrix.
        strict: When True, reject non-unitary u.
    """
    if not 1 <= site <= psi.num_sites:
        raise ValueError(f"site {site} outside 1..{psi.num_sites}")
    d = psi.local_dim
    if u.shape != (d, d):
        raise ValueError(f"operator shape {u.shape} does not match local dim {d}")
    if strict and np.linalg.norm(u.conj().T @ u - np.eye(d)) > 1e-12:
        raise ValueError("operator is not unitary")
    psi.set_tensor(site, np.tensordot(u, psi.tensor(site), axes=(1, 0)))
    return psi


def expectation_two_site(psi: MPS, site: int, op_a: np.ndarray, op_b: np.ndarray) -> float:
    """Normalized expectation <psi| A_site B_{site+1} |psi> / <psi|psi>.

    Read-only and gauge-independent (contracts the full chain).

    Args:
        psi: State to probe.
        site: 1-based left site of the adjacent pair.
        op_a: Hermitian d x d operator at site.
        op_b: Hermitian d x d operator at site + 1.
    """
    if not 1 <= site <= psi.num_sites - 1:
        raise ValueError(f"pair ({site}, {site + 1}) outside the chain")
    num = np.ones((1, 1), dtype=complex)
    den = np.ones((1, 1), dtype=complex)
    for n, m in enumerate(psi.tensors, start=1):
        den = np.einsum("qac,ab,qbd->cd", m.conj(), den, m, optimize=True)
        if n == site:
            op = op_a
        elif n == site + 1:
            op = op_b
        else:
            op = None
        if op is None:
            num = np.einsum("qac,ab,qbd->cd", m.conj(), num, m, optimize=True)
        else:
            num = np.einsum("pac,pq,ab,qbd->cd", m.conj(), op, num, m, optimize=True)
    value = num[0, 0] / den[0, 0]
    if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def merge_two_sites(psi: MPS, site: int) -> np.ndarray:
    """Contract sites (site, site+1) into one tensor (p1, p2, left, right)."""
    a = psi.tensor(site)
    b = psi.tensor(site + 1)
    return np.tensordot(a, b, axes=(2, 1)).transpose(0, 2, 1, 3)


def split_two_sites(
    psi: MPS,
    site: int,
    theta: np.ndarray,
    s_max: float,
    chi_max: int,
    center_to: int,
    renormalize: bool = True,
) -> TruncationReport:
    """Split a merged pair tensor back into sites (site, site+1) by SVD.

    Args:
        psi: State to update in place.
        site: 1-based left site of the pair.
        theta: Merged tensor (p1, p2, left, right).
        s_max: Truncation threshold (see linalg.truncated_svd).
        chi_max: Bond-dimension cap.
        center_to: Where to leave the center, site or site + 1.
        renormalize: Rescale kept singular values so the split preserves
            the pre-truncation norm.

    Returns:
        Truncation report for the new bond (raw discarded weight).
    """
    if center_to not in (site, site + 1):
        raise ValueError("center_to must be one of the split sites")
    d1, d2, left, right = theta.shape
    matrix = theta.transpose(0, 2, 1, 3).reshape(d1 * left, d2 * right)
    u, s, v_dag, report = truncated_svd(matrix, s_max=s_max, chi_max=chi_max)
    if renormalize:
        kept_norm = float(np.linalg.norm(s))
        total_norm = float(np.sqrt(kept_norm**2 + report.discarded_weight))
        if kept_norm > 0.0:
            s = s * (total_norm / kept_norm)
    k = len(s)
    if center_to == site:
        left_block = (u * s[np.newaxis, :]).reshape(d1, left, k)
        right_block = v_dag.reshape(k, d2, right).transpose(1, 0, 2)
    else:
        left_block = u.reshape(d1, left, k)
        right_block = (s[:, np.newaxis] * v_dag).reshape(k, d2, right).transpose(1, 0, 2)
    psi.set_tensor(site, left_block)
    psi.set_tensor(site + 1, right_block)
    psi.center = center_to
    return report


def truncate_bond(
    psi: MPS, bond: int, s_max: float, chi_max: int
) -> tuple[MPS, TruncationReport]:
    """Truncate the bond between sites bond and bond + 1.

    The center must sit on one of the two adjacent sites and stays on
    that side. The state is renormalized to unit norm; the discarded
    weight in the report refers to the pre-normalization Schmidt values.
    """
    if not 1 <= bond <= psi.num_sites - 1:
        raise ValueError(f"bond {bond} outside 1..{psi.num_sites - 1}")
    if psi.center not in (bond, bond + 1):
        raise ValueError(f"center {psi.center} not adjacent to bond {bond}")
    center_to = psi.center
    theta = merge_two_sites(psi, bond)
    report = split_two_sites(
        psi, bond, theta, s_max=s_max, chi_max=chi_max, center_to=center_to, renormalize=False
    )
    c = psi.tensor(psi.center)
    c_norm = float(np.linalg.norm(c))
    if c_norm > 0.0:
        psi.set_tensor(psi.center, c / c_norm)
    return psi, report


def canonical_form_residuals(psi: MPS) -> list[float]:
    """Per-site deviation from the canonical condition implied by the center.

    Entry n-1 is the contraction residual of site n: left condition for
    n < center, right condition for n > center, 0.0 at the center itself.
    """
    residuals = []
    for n, m in enumerate(psi.tensors, start=1):
        d, left, right = m.shape
        if n < psi.center:
            x = m.reshape(d * left, right)
            residuals.append(float(np.linalg.norm(x.conj().T @ x - np.eye(right))))
        elif n > psi.center:
            y = m.transpose(1, 0, 2).reshape(left, d * right)
            residuals.append(float(np.linalg.norm(y @ y.conj().T - np.eye(left))))
        else:
            residuals.append(0.0)
    return residuals


def save_mps_debug(psi: MPS, path: str) -> None:
    """Write the documented JSON debug dump (shapes + flattened entries)."""
    payload = {
        "num_sites": psi.num_sites,
        "local_dim": psi.local_dim,
        "center": psi.center,
        "tensors": [
            {
                "shape": list(t.shape),
                "re": t.real.ravel().tolist(),
                "im": t.imag.ravel().tolist(),
            }
            for t in psi.tensors
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_mps_debug(path: str) -> MPS:
    """Read an MPS from the JSON debug dump format."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    tensors = []
    for entry in payload["tensors"]:
        shape = tuple(entry["shape"])
        t = np.asarray(entry["re"], dtype=float) + 1j * np.asarray(entry["im"], dtype=float)
        tensors.append(t.reshape(shape))
    psi = MPS(tensors=tensors, center=int(payload["center"]))
    if psi.num_sites != payload["num_sites"] or psi.local_dim != payload["local_dim"]:
        raise ValueError("debug dump header inconsistent with tensor shapes")
    return psi

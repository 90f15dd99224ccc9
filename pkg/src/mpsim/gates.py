"""Gate library: unitaries, Hermitian generators, and window MPOs.

Every gate is viewed as one step of discrete time evolution g = exp(-i H)
with unit timestep. For the supported two-qubit gates except SWAP the
generator factorizes as coefficient * H_k (x) H_{k+q}, which is what the
windowed-projector engine consumes as a bond-dimension-1 MPO. SWAP's
generator is a sum of products and is the documented exception; engines
apply it by direct contraction.

Single-qubit rotations follow the half-angle convention
R_p(theta) = exp(-i (theta/2) P); U3(t1, t2, t3) = R_z(t1) R_y(t2) R_z(t3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

GATE_ARITY = {
    "rx": 1,
    "ry": 1,
    "rz": 1,
    "u3": 1,
    "h": 1,
    "x": 1,
    "cx": 2,
    "cz": 2,
    "rxx": 2,
    "ryy": 2,
    "rzz": 2,
    "swap": 2,
}

GATE_PARAM_COUNT = {
    "rx": 1,
    "ry": 1,
    "rz": 1,
    "u3": 3,
    "h": 0,
    "x": 0,
    "cx": 0,
    "cz": 0,
    "rxx": 1,
    "ryy": 1,
    "rzz": 1,
    "swap": 0,
}


@dataclass(frozen=True)
class GateOp:
    """One circuit element: gate name, 1-based target qubits, angles."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.name not in GATE_ARITY:
            raise ValueError(f"unknown gate name {self.name!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.qubits) != GATE_ARITY[self.name]:
            raise ValueError(
                f"gate {self.name} expects {GATE_ARITY[self.name]} qubits, got {self.qubits}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate {self.name} has repeated qubits {self.qubits}")
        if any(q < 1 for q in self.qubits):
            raise ValueError(f"qubit indices are 1-based, got {self.qubits}")
        if len(self.params) != GATE_PARAM_COUNT[self.name]:
            raise ValueError(
                f"gate {self.name} expects {GATE_PARAM_COUNT[self.name]} params, got {self.params}"
            )


@dataclass(frozen=True)
class ProductGenerator:
    """Generator coefficient * H_k (x) H_{k+q} of a two-qubit gate.

    The scalar is kept separate so the factors stay exactly Z, X, I - Z
    and so on. span is the ascending pair of target sites.
    """

    coefficient: float
    factor_left: np.ndarray
    factor_right: np.ndarray
    span: tuple[int, int]

    def two_site_matrix(self) -> np.ndarray:
        """Dense d^2 x d^2 generator in span order."""
        return self.coefficient * np.kron(self.factor_left, self.factor_right)


@dataclass(frozen=True)
class SumGenerator:
    """Sum-of-products generator; only SWAP needs this form.

    Not representable as a bond-dimension-1 MPO, so engines fall back to
    direct contraction for gates carrying it.
    """

    coefficient: float
    terms: tuple[tuple[np.ndarray, np.ndarray], ...]
    span: tuple[int, int]

    def two_site_matrix(self) -> np.ndarray:
        acc = np.zeros((4, 4), dtype=complex)
        for left, right in self.terms:
            acc += np.kron(left, right)
        return self.coefficient * acc


@dataclass(frozen=True)
class GeneratorMPO:
    """Identity-padded product generator over a window, MPO bond dimension 1.

    site_tensors[i] holds the rank-4 tensor (out, in, left, right) for
    window site window[0] + i; identity_sites flags the padding.
    """

    window: tuple[int, int]
    site_tensors: tuple[np.ndarray, ...]
    identity_sites: tuple[bool, ...]


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _two_pauli_rotation(theta: float, pauli: np.ndarray) -> np.ndarray:
    # (P (x) P)^2 = I, so the exponential has the closed cosine/sine form
    pp = np.kron(pauli, pauli)
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * pp


def gate_unitary(g: GateOp) -> np.ndarray:
    """Dense unitary of a gate, ordered (first qubit slowest)."""
    if g.name == "rx":
        return _rx(g.params[0])
    if g.name == "ry":
        return _ry(g.params[0])
    if g.name == "rz":
        return _rz(g.params[0])
    if g.name == "u3":
        t1, t2, t3 = g.params
        return _rz(t1) @ _ry(t2) @ _rz(t3)
    if g.name == "h":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if g.name == "x":
        return PAULI_X.copy()
    if g.name == "cx":
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    if g.name == "cz":
        return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    if g.name == "rxx":
        return _two_pauli_rotation(g.params[0], PAULI_X)
    if g.name == "ryy":
        return _two_pauli_rotation(g.params[0], PAULI_Y)
    if g.name == "rzz":
        return _two_pauli_rotation(g.params[0], PAULI_Z)
    if g.name == "swap":
        return _SWAP.copy()
    raise ValueError(f"unknown gate name {g.name!r}")


def gate_generator(g: GateOp) -> ProductGenerator | SumGenerator:
    """Hermitian generator of a two-qubit gate, exp(-i gen) = gate_unitary(g).

    The span is returned ascending; for directed gates (cx) the factors
    are attached to the correct site regardless of qubit order.
    """
    if GATE_ARITY[g.name] != 2:
        raise ValueError(f"gate {g.name} is single-qubit; apply it directly")
    first, second = g.qubits
    if g.name == "rxx":
        factors = (PAULI_X, PAULI_X)
        coefficient = g.params[0] / 2
    elif g.name == "ryy":
        factors = (PAULI_Y, PAULI_Y)
        coefficient = g.params[0] / 2
    elif g.name == "rzz":
        factors = (PAULI_Z, PAULI_Z)
        coefficient = g.params[0] / 2
    elif g.name == "cx":
        factors = (PAULI_I - PAULI_Z, PAULI_I - PAULI_X)
        coefficient = np.pi / 4
    elif g.name == "cz":
        factors = (PAULI_I - PAULI_Z, PAULI_I - PAULI_Z)
        coefficient = np.pi / 4
    elif g.name == "swap":
        terms = ((PAULI_X, PAULI_X), (PAULI_Y, PAULI_Y), (PAULI_Z, PAULI_Z), (-PAULI_I, PAULI_I))
        return SumGenerator(coefficient=np.pi / 4, terms=terms, span=(min(g.qubits), max(g.qubits)))
    else:
        raise ValueError(f"unknown gate name {g.name!r}")
    if first < second:
        span = (first, second)
    else:
        span = (second, first)
        factors = (factors[1], factors[0])
    return ProductGenerator(
        coefficient=float(coefficient),
        factor_left=factors[0],
        factor_right=factors[1],
        span=span,
    )


def build_generator_mpo(gen: ProductGenerator, window: tuple[int, int]) -> GeneratorMPO:
    """Spread a product generator over a window as a bond-dimension-1 MPO.

    Sites other than the generator span carry identities; the scalar
    coefficient is absorbed into the left factor site.

    Args:
        gen: Product generator with span (k, k+q).
        window: Inclusive site range (lo, hi) covering the span.
    """
    lo, hi = window
    k, kq = gen.span
    if not (lo <= k and kq <= hi):
        raise ValueError(f"window {window} does not cover generator span {gen.span}")
    if lo < 1:
        raise ValueError(f"window {window} leaves the chain")
    tensors = []
    flags = []
    for site in range(lo, hi + 1):
        if site == k:
            op = gen.coefficient * gen.factor_left
        elif site == kq:
            op = gen.factor_right
        else:
            op = PAULI_I
        tensors.append(op.astype(complex).reshape(2, 2, 1, 1))
        flags.append(site != k and site != kq)
    return GeneratorMPO(window=window, site_tensors=tuple(tensors), identity_sites=tuple(flags))


def oriented_unitary(g: GateOp) -> tuple[int, int, np.ndarray]:
    """Sorted qubit pair of a two-qubit gate and its unitary in that order."""
    if GATE_ARITY[g.name] != 2:
        raise ValueError(f"gate {g.name} is not two-qubit")
    a, b = g.qubits
    u = gate_unitary(g)
    if a < b:
        return a, b, u
    return b, a, _SWAP @ u @ _SWAP


def swap_unitary() -> np.ndarray:
    """Dense SWAP matrix (used by the TEBD routing network)."""
    return _SWAP.copy()

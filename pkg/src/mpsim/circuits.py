"""Benchmark circuit builders and the JSON circuit IR.

All builders emit 1-based qubit indices and append one layer mark (the
cumulative gate count) per Trotter step or ansatz layer.

Random circuits draw every angle from a single Philox stream keyed by the
seed, in gate emission order; Philox is counter-based and portable, so a
seed pins the circuit across platforms. The draw order is exactly the
order of the gates in the output.

Trotterized builders reconcile the half-angle gate convention with the
exp(-i dt J P (x) P) terms they implement: an emitted rotation angle of
2 * dt * J yields a generator coefficient of dt * J.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .gates import GateOp


@dataclass
class Circuit:
    """Ordered gate list over num_qubits sites with layer boundaries.

    layer_marks holds cumulative gate counts; entry j is the number of
    gates that make up the first j+1 layers.
    """

    num_qubits: int
    gates: list[GateOp]
    layer_marks: list[int]
    seed: int | None = None

    def __post_init__(self) -> None:
        for position, g in enumerate(self.gates, start=1):
            for q in g.qubits:
                if not 1 <= q <= self.num_qubits:
                    raise ValueError(
                        f"gate {position} ({g.name}): qubit {q} outside 1..{self.num_qubits}"
                    )
        marks = self.layer_marks
        if any(b <= a for a, b in zip(marks, marks[1:])):
            raise ValueError(f"layer_marks not strictly increasing: {marks}")
        if marks and (marks[0] < 1 or marks[-1] > len(self.gates)):
            raise ValueError(f"layer_marks {marks} outside the gate list")

    @property
    def num_layers(self) -> int:
        return len(self.layer_marks)


@dataclass
class IsingGrid:
    """Serpentine mapping of a rows x cols grid onto the chain.

    Odd rows (1-based) run left to right, even rows right to left, so
    horizontally adjacent cells always land on chain-adjacent indices.
    """

    rows: int
    cols: int
    snake_map: dict[tuple[int, int], int] = field(init=False)

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"degenerate grid {self.rows}x{self.cols}")
        self.snake_map = {}
        for row in range(1, self.rows + 1):
            for col in range(1, self.cols + 1):
                offset = col if row % 2 == 1 else self.cols - col + 1
                self.snake_map[(row, col)] = (row - 1) * self.cols + offset

    def chain_index(self, row: int, col: int) -> int:
        return self.snake_map[(row, col)]


def _sorted_pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def heisenberg_1d(
    num_qubits: int,
    coupling: float,
    transverse_field: float,
    dt: float,
    steps: int,
    periodic: bool = False,
) -> Circuit:
    """First-order Trotter circuit for the 1D Heisenberg model.

    Per step: R_z(2*dt*h) on every qubit, then for each Pauli pair term
    (zz, xx, yy) the even-odd pairs, the odd-even pairs, and with
    periodic=True the wrap-around pair (1, N), all at angle 2*dt*J.
    The wrap pair is skipped for N = 2 where it would duplicate an
    existing bond.
    """
    if num_qubits < 2:
        raise ValueError(f"need at least 2 qubits, got {num_qubits}")
    gates: list[GateOp] = []
    marks: list[int] = []
    theta_field = 2.0 * dt * transverse_field
    theta_pair = 2.0 * dt * coupling
    for _ in range(steps):
        for q in range(1, num_qubits + 1):
            gates.append(GateOp("rz", (q,), (theta_field,)))
        for name in ("rzz", "rxx", "ryy"):
            for k in range(1, num_qubits, 2):
                gates.append(GateOp(name, (k, k + 1), (theta_pair,)))
            for k in range(2, num_qubits, 2):
                gates.append(GateOp(name, (k, k + 1), (theta_pair,)))
            if periodic and num_qubits > 2:
                gates.append(GateOp(name, (1, num_qubits), (theta_pair,)))
        marks.append(len(gates))
    return Circuit(num_qubits=num_qubits, gates=gates, layer_marks=marks)


def ising_2d(
    rows: int, cols: int, coupling: float, transverse_field: float, dt: float, steps: int
) -> Circuit:
    """First-order Trotter circuit for the 2D transverse-field Ising model.

    Qubits live on a serpentine chain over the grid. Per step: R_x on all
    qubits, then R_zz on horizontal grid pairs (even-odd, then odd-even
    within each row) and on vertical pairs (even-odd, then odd-even
    within each column). Vertical pairs are long-range on the chain with
    distance at most 2*cols - 1.
    """
    grid = IsingGrid(rows=rows, cols=cols)
    num_qubits = rows * cols
    gates: list[GateOp] = []
    marks: list[int] = []
    theta_field = 2.0 * dt * transverse_field
    theta_pair = 2.0 * dt * coupling
    for _ in range(steps):
        for q in range(1, num_qubits + 1):
            gates.append(GateOp("rx", (q,), (theta_field,)))
        for col_start in (1, 2):
            for row in range(1, rows + 1):
                for col in range(col_start, cols, 2):
                    pair = _sorted_pair(grid.chain_index(row, col), grid.chain_index(row, col + 1))
                    gates.append(GateOp("rzz", pair, (theta_pair,)))
        for row_start in (1, 2):
            for row in range(row_start, rows, 2):
                for col in range(1, cols + 1):
                    pair = _sorted_pair(grid.chain_index(row, col), grid.chain_index(row + 1, col))
                    gates.append(GateOp("rzz", pair, (theta_pair,)))
        marks.append(len(gates))
    return Circuit(num_qubits=num_qubits, gates=gates, layer_marks=marks)


def qaoa(num_qubits: int, layers: int, seed: int) -> Circuit:
    """Random-angle QAOA-style circuit.

    Per layer: R_x on every qubit, then R_zz on even-odd and odd-even
    pairs. Every angle is an independent uniform draw from [-pi, pi].
    """
    if num_qubits < 2:
        raise ValueError(f"need at least 2 qubits, got {num_qubits}")
    if layers < 1:
        raise ValueError(f"need at least 1 layer, got {layers}")
    rng = np.random.Generator(np.random.Philox(seed))
    gates: list[GateOp] = []
    marks: list[int] = []
    for _ in range(layers):
        for q in range(1, num_qubits + 1):
            gates.append(GateOp("rx", (q,), (rng.uniform(-np.pi, np.pi),)))
        for k in range(1, num_qubits, 2):
            gates.append(GateOp("rzz", (k, k + 1), (rng.uniform(-np.pi, np.pi),)))
        for k in range(2, num_qubits, 2):
            gates.append(GateOp("rzz", (k, k + 1), (rng.uniform(-np.pi, np.pi),)))
        marks.append(len(gates))
    return Circuit(num_qubits=num_qubits, gates=gates, layer_marks=marks, seed=seed)


def hea(num_qubits: int, depth: int, seed: int, entangler: str = "cz") -> Circuit:
    """Hardware-efficient ansatz with a brickwork entangling pattern.

    Per layer: U3 with three fresh uniform angles on every qubit, then
    entanglers on even-odd pairs (odd layers) or odd-even pairs (even
    layers). The entangler is cz by default, cx optionally.
    """
    if num_qubits < 2:
        raise ValueError(f"need at least 2 qubits, got {num_qubits}")
    if depth < 1:
        raise ValueError(f"need at least depth 1, got {depth}")
    if entangler not in ("cz", "cx"):
        raise ValueError(f"entangler must be cz or cx, got {entangler!r}")
    rng = np.random.Generator(np.random.Philox(seed))
    gates: list[GateOp] = []
    marks: list[int] = []
    for layer in range(1, depth + 1):
        for q in range(1, num_qubits + 1):
            angles = tuple(rng.uniform(-np.pi, np.pi, size=3))
            gates.append(GateOp("u3", (q,), angles))
        start = 1 if layer % 2 == 1 else 2
        for k in range(start, num_qubits, 2):
            gates.append(GateOp(entangler, (k, k + 1)))
        marks.append(len(gates))
    return Circuit(num_qubits=num_qubits, gates=gates, layer_marks=marks, seed=seed)


def save_circuit(circuit: Circuit, path: str) -> None:
    """Serialize to the JSON circuit IR (version 1)."""
    payload = {
        "version": 1,
        "num_qubits": circuit.num_qubits,
        "seed": circuit.seed,
        "layer_marks": list(circuit.layer_marks),
        "gates": [
            {"name": g.name, "qubits": list(g.qubits), "params": list(g.params)}
            for g in circuit.gates
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_circuit(path: str) -> Circuit:
    """Parse and validate a JSON circuit IR file.

    Raises ValueError naming the offending gate position on any schema
    violation.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed circuit JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError("circuit IR must be a JSON object")
    if payload.get("version") != 1:
        raise ValueError(f"unsupported circuit IR version {payload.get('version')!r}")
    try:
        num_qubits = int(payload["num_qubits"])
        raw_gates = payload["gates"]
        raw_marks = payload.get("layer_marks", [])
    except KeyError as exc:
        raise ValueError(f"circuit IR missing field {exc}") from exc
    seed = payload.get("seed")
    gates = []
    for position, entry in enumerate(raw_gates, start=1):
        try:
            gate = GateOp(
                name=entry["name"],
                qubits=tuple(entry["qubits"]),
                params=tuple(entry.get("params", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"gate {position}: {exc}") from exc
        for q in gate.qubits:
            if not 1 <= q <= num_qubits:
                raise ValueError(
                    f"gate {position} ({gate.name}): qubit {q} outside 1..{num_qubits}"
                )
        gates.append(gate)
    marks = [int(m) for m in raw_marks]
    return Circuit(
        num_qubits=num_qubits,
        gates=gates,
        layer_marks=marks,
        seed=None if seed is None else int(seed),
    )

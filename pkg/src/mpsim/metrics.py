"""Per-layer metrics records shared by both engines."""

from __future__ import annotations

from dataclasses import dataclass

from .gates import PAULI_X
from .mps import MPS, expectation_two_site


@dataclass(frozen=True)
class ProbeSpec:
    """What to measure at each layer mark.

    correlator_site None means the center bond floor(N/2).
    """

    correlator_site: int | None = None

    def resolved_site(self, num_sites: int) -> int:
        return self.correlator_site if self.correlator_site is not None else num_sites // 2


@dataclass(frozen=True)
class StepMetrics:
    """One recorded layer: bond profile, cost, correlator, error budget."""

    step: int
    bond_dims: tuple[int, ...]
    cost: int
    correlator: float
    discarded_weight_cum: float
    wall_time_ms: float


def capture_step(
    psi: MPS,
    step: int,
    probes: ProbeSpec,
    discarded_weight_cum: float,
    wall_time_ms: float,
) -> StepMetrics:
    """Measure the state after a layer; cost is the exact cube sum."""
    bond_dims = tuple(psi.bond_dims())
    site = probes.resolved_site(psi.num_sites)
    if 1 <= site <= psi.num_sites - 1:
        correlator = expectation_two_site(psi, site, PAULI_X, PAULI_X)
    else:
        correlator = 0.0
    return StepMetrics(
        step=step,
        bond_dims=bond_dims,
        cost=sum(chi**3 for chi in bond_dims),
        correlator=correlator,
        discarded_weight_cum=discarded_weight_cum,
        wall_time_ms=wall_time_ms,
    )

"""Per-link throughput, delay and feasibility evaluation.

Two evaluators share the same link budget: a closed-form analytic model
(fast enough to sit inside the RL reward loop) and a slotted
discrete-event simulation of CBR sources on a shared round-robin medium
(used for reported metrics). The MAC abstraction is contention-free: each
frame occupies the medium for its air time plus a per-frame overhead. By
default the overhead is derived from the efficiency factor so that a
saturated link carries exactly efficiency * phy_rate, which keeps the two
evaluators consistent; a fixed overhead in seconds can be configured
instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DemandUnserviceable
from .geometry import GRAZE_TOL, Position3, has_los
from .radio import (
    DEFAULT_MCS_TABLE,
    McsEntry,
    NlosStreetParams,
    path_loss,
    select_mcs,
    snr_db,
)


@dataclass(frozen=True)
class MacParams:
    """Medium access constants.

    overhead=None derives the per-frame overhead from the efficiency
    factor ((1/eta - 1) * frame air time), coupling the DES to the
    analytic airtime model; a float fixes it in seconds instead.
    """

    efficiency: float = 0.7
    overhead: float | None = None
    packet_size: int = 1400  # bytes

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must be in (0, 1]")
        if self.overhead is not None and self.overhead < 0:
            raise ValueError("overhead must be >= 0")
        if self.packet_size <= 0:
            raise ValueError("packet_size must be > 0")

    @property
    def packet_bits(self) -> int:
        return 8 * self.packet_size

    def service_time(self, rate_mbps: float) -> float:
        """Medium time one frame occupies at the given PHY rate."""
        if rate_mbps <= 0:
            return math.inf
        t_air = self.packet_bits / (rate_mbps * 1e6)
        if self.overhead is None:
            return t_air + (1.0 / self.efficiency - 1.0) * t_air
        return t_air + self.overhead


@dataclass(frozen=True)
class UESpec:
    """A ground user with a constant-bitrate traffic demand."""

    id: int
    position: Position3
    demand: float  # Mbit/s
    required_mcs: int

    @classmethod
    def make(
        cls,
        id: int,
        position: Position3,
        demand: float,
        table: tuple[McsEntry, ...] = DEFAULT_MCS_TABLE,
    ) -> "UESpec":
        return cls(id, position, demand, required_mcs(demand, table))

    def __post_init__(self):
        if self.demand <= 0:
            raise ValueError("traffic demand must be > 0")


@dataclass(frozen=True)
class UELink:
    """Evaluated state of one UAV-UE link."""

    ue_id: int
    los: bool
    loss: float  # dB
    snr: float  # dB
    mcs: int | None
    phy_rate: float  # Mbit/s, 0 when no MCS is viable
    offered: float  # Mbit/s
    carried: float  # Mbit/s


@dataclass(frozen=True)
class LinkReport:
    links: tuple[UELink, ...]
    aggregate_throughput: float  # Mbit/s
    mean_delay: float  # s
    feasible: bool
    n_los: int


def required_mcs(
    demand: float, table: tuple[McsEntry, ...] = DEFAULT_MCS_TABLE
) -> int:
    """Smallest MCS index whose PHY rate covers the demand."""
    if demand <= 0:
        raise ValueError("demand must be > 0")
    for entry in table:
        if entry.phy_rate >= demand:
            return entry.index
    raise DemandUnserviceable(
        f"demand {demand} Mbit/s above the top PHY rate {table[-1].phy_rate}"
    )


def _effective_street(scenario) -> NlosStreetParams | None:
    # Obstacle-free venues use Friis for every link.
    return scenario.street if scenario.buildings else None


def evaluate_links(scenario, uav: Position3) -> list[UELink]:
    """Per-UE LoS, loss, SNR and MCS at a fixed UAV position (no carried)."""
    street = _effective_street(scenario)
    ue_xyz = getattr(scenario, "ue_xyz", None)
    if ue_xyz is not None and scenario.buildings:
        mask = _kernels.backend.los_mask(
            uav.x, uav.y, uav.z, ue_xyz, scenario.building_boxes, GRAZE_TOL
        )
        los_flags = [bool(v) for v in mask]
    else:
        los_flags = [
            has_los(uav, ue.position, scenario.buildings) for ue in scenario.ues
        ]
    out = []
    for ue, los in zip(scenario.ues, los_flags):
        loss = path_loss(uav, ue.position, los, scenario.radio, street)
        snr = snr_db(scenario.radio, loss)
        mcs = select_mcs(snr, scenario.mcs_table)
        out.append(
            UELink(
                ue_id=ue.id,
                los=los,
                loss=loss,
                snr=snr,
                mcs=mcs.index if mcs else None,
                phy_rate=mcs.phy_rate if mcs else 0.0,
                offered=ue.demand,
                carried=0.0,
            )
        )
    return out


def analytic_evaluate(scenario, uav: Position3) -> LinkReport:
    """Closed-form throughput/delay/feasibility at a UAV position.

    Airtime utilization U sums demand / (efficiency * phy_rate) over UEs
    with a viable MCS; demand is carried in full when U <= 1 and scaled by
    1/U otherwise. Delay uses a single-server utilization heuristic on the
    demand-weighted mean frame service time (smooth training signal only;
    the DES is authoritative for reported delay).
    """
    mac = scenario.mac
    eta = mac.efficiency
    links = evaluate_links(scenario, uav)

    utilization = 0.0
    for link in links:
        if link.mcs is not None:
            utilization += link.offered / (eta * link.phy_rate)

    carried_links = []
    aggregate = 0.0
    for link in links:
        if link.mcs is None:
            carried = 0.0
        elif utilization <= 1.0:
            carried = link.offered
        else:
            carried = link.offered / utilization
        aggregate += carried
        carried_links.append(
            UELink(
                ue_id=link.ue_id,
                los=link.los,
                loss=link.loss,
                snr=link.snr,
                mcs=link.mcs,
                phy_rate=link.phy_rate,
                offered=link.offered,
                carried=carried,
            )
        )

    viable = [l for l in carried_links if l.mcs is not None]
    if viable:
        demand_sum = sum(l.offered for l in viable)
        t_service = (
            sum(l.offered * mac.service_time(l.phy_rate) for l in viable)
            / demand_sum
        )
        mean_delay = t_service / (1.0 - min(utilization, 0.999))
    else:
        mean_delay = math.inf

    feasible = utilization <= 1.0
    min_snr = {e.index: e.min_snr for e in scenario.mcs_table}
    for ue, link in zip(scenario.ues, carried_links):
        if link.mcs is None or link.snr < min_snr[ue.required_mcs]:
            feasible = False
            break

    return LinkReport(
        links=tuple(carried_links),
        aggregate_throughput=aggregate,
        mean_delay=mean_delay,
        feasible=feasible,
        n_los=sum(1 for l in carried_links if l.los),
    )


def demand_feasible(scenario, uav: Position3) -> bool:
    """True iff every UE meets its demanded MCS and total airtime fits."""
    return analytic_evaluate(scenario, uav).feasible


@dataclass
class DesRunResult:
    carried: list[float]  # Mbit/s per UE
    aggregate: float  # Mbit/s
    delays: np.ndarray  # s, one entry per delivered packet


class DesSession:
    """A running discrete-event link simulation bound to one scenario.

    Packet arrival phases are drawn once from the seed; the per-UE service
    times are refreshed whenever the UAV moves. Each session owns its
    state and is single-threaded; run independent sessions for independent
    seeds.
    """

    def __init__(self, scenario, uav: Position3, seed: int, horizon: float):
        self.scenario = scenario
        mac = scenario.mac
        rng = np.random.default_rng(seed)
        intervals = [mac.packet_bits / (ue.demand * 1e6) for ue in scenario.ues]
        phases = [rng.uniform(0.0, iv) for iv in intervals]
        self.core = _kernels.backend.DesCore(
            intervals, phases, self._services(uav), horizon
        )
        self._intervals = intervals
        self._phases = phases
        self._horizon = horizon

    def _services(self, uav: Position3) -> list[float]:
        mac = self.scenario.mac
        return [
            mac.service_time(link.phy_rate)
            for link in evaluate_links(self.scenario, uav)
        ]

    def move(self, uav: Position3) -> None:
        self.core.set_service(self._services(uav))

    def advance(self, t_end: float) -> tuple[int, float, int]:
        """Run to t_end; returns (packets delivered, delay sum, packets) delta."""
        before = self.core.delivered_counts()
        sum_before = self.core.delay_sum
        count_before = self.core.delay_count
        self.core.advance(t_end)
        delivered = sum(self.core.delivered_counts()) - sum(before)
        return (
            delivered,
            self.core.delay_sum - sum_before,
            self.core.delay_count - count_before,
        )


def des_run(scenario, uav: Position3, duration: float, seed: int) -> DesRunResult:
    """One full DES run at a fixed UAV position.

    Deterministic in (scenario, uav, duration, seed): arrival phases come
    from the seed, everything else is closed-form.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    session = DesSession(scenario, uav, seed, horizon=duration)
    bits = scenario.mac.packet_bits

    bound = 0
    for iv, ph in zip(session._intervals, session._phases):
        if ph < duration:
            bound += int((duration - ph) / iv) + 1
    delays = np.empty(bound, dtype=np.float64)
    n_delivered = session.core.advance(duration, delays, 0)
    delivered = session.core.delivered_counts()
    carried = [d * bits / duration / 1e6 for d in delivered]
    return DesRunResult(
        carried=carried,
        aggregate=sum(carried),
        delays=delays[:n_delivered],
    )


def window_throughput(events, t_end: float, window: float) -> float:
    """Bits delivered in the trailing window divided by the window, Mbit/s.

    events: iterable of (completion_time_s, bits) delivery records.
    """
    if window <= 0:
        raise ValueError("window must be > 0")
    bits = sum(b for t, b in events if t_end - window < t <= t_end)
    return bits / window / 1e6

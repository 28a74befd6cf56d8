"""Path-loss models, SNR computation and SNR-driven MCS selection.

Models the 802.11ac link budget of Table-1-style setups: Friis for
obstacle-free venues, ITU-R P.1411 street-canyon LoS and over-rooftop
NLoS for built-up ones, and an ideal-rate-manager MCS pick (highest index
whose SNR threshold is met).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateGeometry
from .geometry import Position3

SPEED_OF_LIGHT = 2.99792458e8  # m/s
D_MIN = 0.1  # m, guards the log singularity at zero distance


@dataclass(frozen=True)
class RadioConfig:
    """Link-budget constants (defaults: 802.11ac channel 50, 160 MHz)."""

    frequency: float = 5.25e9  # Hz
    tx_power: float = 20.0  # dBm
    antenna_gain_tx: float = 0.0  # dBi
    antenna_gain_rx: float = 0.0  # dBi
    noise_floor: float = -85.0  # dBm
    channel_width: int = 160  # MHz
    guard_interval: int = 800  # ns
    spatial_streams: int = 1

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError("frequency must be > 0")
        if self.channel_width not in (20, 40, 80, 160):
            raise ValueError("channel_width must be one of 20/40/80/160 MHz")
        if self.spatial_streams != 1:
            raise ValueError("only one spatial stream is modeled")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency


@dataclass(frozen=True)
class McsEntry:
    index: int
    phy_rate: float  # Mbit/s
    min_snr: float  # dB


# VHT, 160 MHz, 1 spatial stream, GI 800 ns. The first four rates anchor
# the demand ladder (58.5/117/175.5/234); thresholds approximate an ideal
# rate manager and can be overridden per scenario.
DEFAULT_MCS_TABLE: tuple[McsEntry, ...] = (
    McsEntry(0, 58.5, 12.0),
    McsEntry(1, 117.0, 15.0),
    McsEntry(2, 175.5, 17.0),
    McsEntry(3, 234.0, 20.0),
    McsEntry(4, 351.0, 23.0),
    McsEntry(5, 468.0, 27.0),
    McsEntry(6, 526.5, 28.0),
    McsEntry(7, 585.0, 29.0),
    McsEntry(8, 702.0, 33.0),
    McsEntry(9, 780.0, 35.0),
)


def validate_mcs_table(table: tuple[McsEntry, ...]) -> None:
    for a, b in zip(table, table[1:]):
        if not (a.phy_rate < b.phy_rate and a.min_snr < b.min_snr):
            raise ValueError("MCS table must be strictly increasing")


@dataclass(frozen=True)
class NlosStreetParams:
    """Environment constants for the over-rooftop NLoS model."""

    avg_rooftop_height: float = 16.0  # m
    street_width: float = 20.0  # m
    building_separation: float = 40.0  # m
    street_orientation: float = 45.0  # degrees
    ue_antenna_height: float = 1.5  # m

    def __post_init__(self):
        if min(
            self.avg_rooftop_height,
            self.street_width,
            self.building_separation,
            self.ue_antenna_height,
        ) <= 0:
            raise ValueError("street parameters must be positive")
        if not 0.0 <= self.street_orientation <= 90.0:
            raise ValueError("street orientation must be within [0, 90] degrees")


def _check_distance(distance: float) -> None:
    if distance < D_MIN:
        raise DegenerateGeometry(
            f"link distance {distance:.3g} m below minimum {D_MIN} m"
        )


def friis_loss(distance: float, cfg: RadioConfig) -> float:
    """Free-space loss 20*log10(4*pi*d*f/c) in dB."""
    _check_distance(distance)
    return 20.0 * math.log10(
        4.0 * math.pi * distance * cfg.frequency / SPEED_OF_LIGHT
    )


def itu1411_los_loss(
    distance: float, cfg: RadioConfig, h_uav: float, h_ue: float
) -> float:
    """Median street-canyon LoS loss with a dual-slope breakpoint.

    Below the breakpoint R_bp = 4*h1*h2/lambda the slope is 20 dB/decade,
    beyond it 40 dB/decade; both branches meet at L_bp + 6.
    """
    _check_distance(distance)
    if not h_uav > h_ue > 0:
        raise DegenerateGeometry("need h_uav > h_ue > 0 for the LoS model")
    lam = cfg.wavelength
    r_bp = 4.0 * h_uav * h_ue / lam
    l_bp = abs(20.0 * math.log10(lam * lam / (8.0 * math.pi * h_uav * h_ue)))
    if distance <= r_bp:
        return l_bp + 6.0 + 20.0 * math.log10(distance / r_bp)
    return l_bp + 6.0 + 40.0 * math.log10(distance / r_bp)


def itu1411_nlos_rooftop_loss(
    distance: float,
    cfg: RadioConfig,
    h_uav: float,
    street: NlosStreetParams,
) -> float:
    """Over-rooftop NLoS loss: free space + rooftop-to-street + multi-screen.

    Follows the P.1411 over-rooftop formulation for suburban settings; the
    two diffraction terms are clamped at zero so the result never drops
    below free space.
    """
    _check_distance(distance)
    f_mhz = cfg.frequency / 1e6
    h_r = street.avg_rooftop_height
    h_m = street.ue_antenna_height
    w = street.street_width
    b = street.building_separation
    phi = street.street_orientation

    l_bf = friis_loss(distance, cfg)

    # Rooftop-to-street diffraction; vanishes if the mobile sits at or
    # above rooftop level.
    delta_hm = h_r - h_m
    if delta_hm > 0:
        if phi < 35.0:
            l_ori = -10.0 + 0.354 * phi
        elif phi < 55.0:
            l_ori = 2.5 + 0.075 * (phi - 35.0)
        else:
            l_ori = 4.0 - 0.114 * (phi - 55.0)
        l_rts = (
            -8.2
            - 10.0 * math.log10(w)
            + 10.0 * math.log10(f_mhz)
            + 20.0 * math.log10(delta_hm)
            + l_ori
        )
        l_rts = max(l_rts, 0.0)
    else:
        l_rts = 0.0

    # Multi-screen diffraction along the rooftops.
    delta_hb = h_uav - h_r
    d_km = distance / 1000.0
    if delta_hb > 0:
        l_bsh = -18.0 * math.log10(1.0 + delta_hb)
        k_a = 54.0
        k_d = 18.0
    else:
        l_bsh = 0.0
        if distance >= 500.0:
            k_a = 54.0 - 0.8 * delta_hb
        else:
            k_a = 54.0 - 1.6 * delta_hb * d_km
        k_d = 18.0 - 15.0 * delta_hb / h_r
    k_f = -4.0 + 0.7 * (f_mhz / 925.0 - 1.0)
    l_msd = (
        l_bsh
        + k_a
        + k_d * math.log10(d_km)
        + k_f * math.log10(f_mhz)
        - 9.0 * math.log10(b)
    )
    l_msd = max(l_msd, 0.0)

    return l_bf + l_rts + l_msd


def path_loss(
    uav: Position3,
    ue: Position3,
    los: bool,
    cfg: RadioConfig,
    street: NlosStreetParams | None,
) -> float:
    """Dispatch to the model matching the environment.

    street=None marks an obstacle-free venue (Friis for every link);
    otherwise LoS links use the street-canyon model and blocked links the
    over-rooftop one. Ground-level UEs fall back to the configured antenna
    height for the LoS height product.
    """
    d = uav.distance_to(ue)
    if street is None:
        return friis_loss(d, cfg)
    if los:
        h_ue = ue.z if ue.z > 0 else street.ue_antenna_height
        return itu1411_los_loss(d, cfg, uav.z, h_ue)
    return itu1411_nlos_rooftop_loss(d, cfg, uav.z, street)


def snr_db(cfg: RadioConfig, loss: float) -> float:
    """Received SNR in dB for a given path loss."""
    return (
        cfg.tx_power
        + cfg.antenna_gain_tx
        + cfg.antenna_gain_rx
        - loss
        - cfg.noise_floor
    )


def select_mcs(
    snr: float, table: tuple[McsEntry, ...] = DEFAULT_MCS_TABLE
) -> McsEntry | None:
    """Highest-index entry whose threshold is met; None below MCS0."""
    best = None
    for entry in table:
        if entry.min_snr <= snr:
            best = entry
        else:
            break
    return best

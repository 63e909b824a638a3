"""System parameters, unit conversions, and named profiles.

All dB/dBm quantities are stored as given on the dB scale and converted to
linear units through properties, so a config round-trips cleanly through
serialization.
"""

import math
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

# Rician factors beyond +-200 dB saturate to the pure-LoS / pure-reflection
# limits instead of overflowing.
_KAPPA_CLAMP_DB = 200.0


def db_to_lin(x_db):
    """10^(x/10)."""
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm):
    """10^((x-30)/10)."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of the full-duplex network under simulation.

    Dimensions follow the usual massive-MIMO convention: the base station
    transmits from bs_tx_ant antennas through tx_rf RF chains and receives on
    bs_rx_ant antennas through rx_rf chains, serving n_ul uplink and n_dl
    downlink users simultaneously.
    """

    # Array and RF-chain dimensions
    bs_tx_ant: int = 100
    bs_rx_ant: int = 50
    tx_rf: int = 32
    rx_rf: int = 32
    n_ul: int = 2
    n_dl: int = 2
    ul_ant: int = 5
    dl_ant: int = 5
    ul_streams: int = 2
    dl_streams: int = 2

    # Rate weights, one per user; None means all-ones.
    ul_weights: tuple = None
    dl_weights: tuple = None

    # Power and noise
    snr_db: float = -10.0
    bs_power_dbm: float = 23.0
    ue_power_dbm: float = 23.0
    bs_antenna_cap_w: float = None
    ue_antenna_cap_w: float = None

    # Hardware-distortion coefficients (limited dynamic range), in dB
    bs_tx_ldr_db: float = -60.0
    bs_rx_ldr_db: float = -60.0
    ue_tx_ldr_db: float = -60.0
    ue_rx_ldr_db: float = -60.0

    # Analog stage
    n_ps: int = 4096  # 12-bit uniform phase quantizer
    kron_dim_cap: int = 4096

    # Propagation
    rician_db: float = 50.0
    si_gain_db: float = 0.0
    array_sep_m: float = 0.2
    array_angle_rad: float = math.pi / 2.0
    carrier_ghz: float = 28.0
    n_clusters: int = 3
    n_rays: int = 3
    angle_spread_deg: float = 30.0

    # Baseline knobs
    hd_time_split: float = 0.5

    # ------------------------------------------------------------------
    # Derived quantities
    # ------------------------------------------------------------------

    @property
    def bs_power_w(self):
        return dbm_to_watts(self.bs_power_dbm)

    @property
    def ue_power_w(self):
        return dbm_to_watts(self.ue_power_dbm)

    @property
    def bs_noise_w(self):
        """Thermal noise variance at the base station, sigma_0^2 = alpha_0/SNR."""
        return self.bs_power_w / db_to_lin(self.snr_db)

    @property
    def ue_noise_w(self):
        """Thermal noise variance at each downlink user, sigma_j^2 = alpha_k/SNR."""
        return self.ue_power_w / db_to_lin(self.snr_db)

    @property
    def bs_tx_ldr(self):
        return db_to_lin(self.bs_tx_ldr_db)

    @property
    def bs_rx_ldr(self):
        return db_to_lin(self.bs_rx_ldr_db)

    @property
    def ue_tx_ldr(self):
        return db_to_lin(self.ue_tx_ldr_db)

    @property
    def ue_rx_ldr(self):
        return db_to_lin(self.ue_rx_ldr_db)

    @property
    def rician_lin(self):
        clamped = min(max(self.rician_db, -_KAPPA_CLAMP_DB), _KAPPA_CLAMP_DB)
        return db_to_lin(clamped)

    @property
    def si_gain_lin(self):
        """Loopback path gain relative to the unit-power user links.

        The transmit and receive arrays sit centimeters apart, so the
        loopback path can carry far more power than the user links; 0 dB
        keeps every link at equal average element power.
        """
        return db_to_lin(self.si_gain_db)

    @property
    def wavelength_m(self):
        return 299792458.0 / (self.carrier_ghz * 1e9)

    @property
    def bs_cap_w(self):
        """Per-antenna cap at the base station (uniform), alpha_0/M_0 default."""
        if self.bs_antenna_cap_w is not None:
            return self.bs_antenna_cap_w
        return self.bs_power_w / self.bs_tx_ant

    @property
    def ue_cap_w(self):
        """Per-antenna cap at each uplink user, alpha_k/M_k default."""
        if self.ue_antenna_cap_w is not None:
            return self.ue_antenna_cap_w
        return self.ue_power_w / self.ul_ant

    @property
    def angle_spread_rad(self):
        return math.radians(self.angle_spread_deg)

    def ul_weight(self, k):
        if self.ul_weights is None:
            return 1.0
        return float(self.ul_weights[k])

    def dl_weight(self, j):
        if self.dl_weights is None:
            return 1.0
        return float(self.dl_weights[j])

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def validate(self):
        """Raise ConfigError naming the offending field on any inconsistency."""
        pos_fields = [
            "bs_tx_ant", "bs_rx_ant", "tx_rf", "rx_rf",
            "ul_ant", "dl_ant", "ul_streams", "dl_streams", "n_ps",
        ]
        for name in pos_fields:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name}: must be a positive integer, got {value!r}")
        for name in ["n_ul", "n_dl"]:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ConfigError(f"{name}: must be a nonnegative integer, got {value!r}")
        if self.tx_rf > self.bs_tx_ant:
            raise ConfigError("tx_rf: cannot exceed bs_tx_ant")
        if self.rx_rf > self.bs_rx_ant:
            raise ConfigError("rx_rf: cannot exceed bs_rx_ant")
        if self.ul_streams > min(self.ul_ant, self.rx_rf):
            raise ConfigError(
                "ul_streams: must not exceed min(ul_ant, rx_rf), got "
                f"{self.ul_streams} > min({self.ul_ant}, {self.rx_rf})"
            )
        if self.dl_streams > min(self.dl_ant, self.tx_rf):
            raise ConfigError(
                "dl_streams: must not exceed min(dl_ant, tx_rf), got "
                f"{self.dl_streams} > min({self.dl_ant}, {self.tx_rf})"
            )
        if self.n_ul * self.ul_streams > self.rx_rf:
            raise ConfigError("ul_streams: total uplink streams exceed rx_rf chains")
        if self.n_dl * self.dl_streams > self.tx_rf:
            raise ConfigError("dl_streams: total downlink streams exceed tx_rf chains")
        for name in ["bs_tx_ldr_db", "bs_rx_ldr_db", "ue_tx_ldr_db", "ue_rx_ldr_db"]:
            if db_to_lin(getattr(self, name)) > 1.0 + 1e-12:
                raise ConfigError(f"{name}: distortion coefficient above 1.0 (0 dB)")
        if self.bs_cap_w <= 0 or self.ue_cap_w <= 0:
            raise ConfigError("bs_antenna_cap_w/ue_antenna_cap_w: caps must be > 0")
        if self.bs_power_w <= 0 or self.ue_power_w <= 0:
            raise ConfigError("bs_power_dbm/ue_power_dbm: budgets must be > 0")
        if not 0.0 < self.hd_time_split < 1.0:
            raise ConfigError("hd_time_split: must lie in (0, 1)")
        if self.n_ps & (self.n_ps - 1) != 0:
            raise ConfigError("n_ps: must be a power of two")
        if self.array_sep_m <= 0:
            raise ConfigError("array_sep_m: must be > 0")
        if not 0.0 < self.array_angle_rad <= math.pi / 2.0 + 1e-12:
            raise ConfigError("array_angle_rad: must lie in (0, pi/2]")
        for wname, count in [("ul_weights", self.n_ul), ("dl_weights", self.n_dl)]:
            weights = getattr(self, wname)
            if weights is not None:
                if len(weights) != count:
                    raise ConfigError(f"{wname}: expected {count} entries")
                if any(w <= 0 for w in weights):
                    raise ConfigError(f"{wname}: weights must be > 0")
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ConfigError("n_clusters/n_rays: must be >= 1")
        return self

    def replace(self, **changes):
        return replace(self, **changes)


def field_names():
    """All settable SystemConfig field names, for config-file validation."""
    return [f.name for f in fields(SystemConfig)]


# ----------------------------------------------------------------------
# Profiles
# ----------------------------------------------------------------------

def desk_profile(**overrides):
    """Small system that exercises every code path in seconds.

    16x8 base-station arrays with 4 RF chains per side, two single-stream
    users per direction; the vectorized analog update is a 64-dim problem.
    """
    base = dict(
        bs_tx_ant=16, bs_rx_ant=8, tx_rf=4, rx_rf=4,
        n_ul=2, n_dl=2, ul_ant=2, dl_ant=2, ul_streams=1, dl_streams=1,
    )
    base.update(overrides)
    return SystemConfig(**base).validate()


def paper_profile(**overrides):
    """Full-scale parameter set (100x50 arrays, 32 RF chains, 2 streams)."""
    return SystemConfig(**overrides).validate()


PROFILES = {"desk": desk_profile, "paper": paper_profile}

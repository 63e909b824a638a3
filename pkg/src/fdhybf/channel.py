"""Seeded generation of all propagation channels for one realization.

Direct, cross-interference and reflected self-interference channels follow a
clustered ray model over half-wavelength uniform linear arrays; the
self-interference channel adds a deterministic near-field line-of-sight
component mixed by the Rician factor.
"""

import math
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

__all__ = [
    "ArrayGeometry", "ClusterParams", "SiGeometry", "ChannelSet",
    "ula_response", "cluster_channel", "si_distance", "si_channel",
    "generate_channels", "channel_stream", "dump_channels", "load_channels",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array with half-wavelength element spacing."""
    num_elements: int

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("num_elements must be >= 1")


@dataclass(frozen=True)
class ClusterParams:
    """Cluster/ray counts and angular supports of the ray model."""
    n_clusters: int
    n_rays: int
    aoa_range: tuple = (-np.pi / 6.0, np.pi / 6.0)
    aod_range: tuple = (-np.pi / 6.0, np.pi / 6.0)

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("cluster and ray counts must be >= 1")
        for lo, hi in (self.aoa_range, self.aod_range):
            if not (-np.pi / 2.0 < lo <= hi < np.pi / 2.0):
                raise ValueError("angle ranges must lie within (-pi/2, pi/2)")


@dataclass(frozen=True)
class SiGeometry:
    """Transmit/receive array placement at the full-duplex node."""
    distance_m: float
    angle_rad: float
    rician_db: float
    wavelength_m: float

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError("distance_m must be > 0")
        if not 0.0 < self.angle_rad <= np.pi / 2.0 + 1e-12:
            raise ValueError("angle_rad must lie in (0, pi/2]")
        if self.wavelength_m <= 0:
            raise ValueError("wavelength_m must be > 0")


@dataclass
class ChannelSet:
    """All channel matrices of one realization plus the noise variances.

    ul[k] is the k-th uplink user's channel to the base-station receive array
    (bs_rx_ant x ul_ant); dl[j] the j-th downlink channel (dl_ant x bs_tx_ant);
    si the transmit-to-receive leakage at the base station
    (bs_rx_ant x bs_tx_ant); cross[j][k] the uplink-to-downlink interference
    channel (dl_ant x ul_ant).
    """
    ul: list
    dl: list
    si: np.ndarray
    cross: list
    noise_bs: float
    noise_ue: float
    seed: int
    realization: int

    def all_matrices(self):
        mats = list(self.ul) + list(self.dl) + [self.si]
        for row in self.cross:
            mats.extend(row)
        return mats


def ula_response(angle, n):
    """Array response [exp(j*pi*(m-1)*sin(angle))], m = 1..n, un-normalized."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = np.arange(n)
    return np.exp(1j * np.pi * m * np.sin(angle))


def cluster_channel(tx, rx, params, rng):
    """One draw of the clustered ray channel (rx.num_elements x tx.num_elements).

    H = sqrt(1/(N_c*N_p)) * sum_i alpha_i a_r(phi_i) a_t(theta_i)^T with
    alpha ~ CN(0,1) and angles uniform on the configured ranges. The prefactor
    normalizes so that E||H||_F^2 = (rx elements)*(tx elements): each rank-1
    outer product of un-normalized steering vectors carries Frobenius norm
    sqrt(rx.n*tx.n) and the ray gains average to unit power.
    """
    n_terms = params.n_clusters * params.n_rays
    gains = (rng.standard_normal(n_terms) + 1j * rng.standard_normal(n_terms))
    gains *= np.sqrt(0.5)
    aoa = rng.uniform(params.aoa_range[0], params.aoa_range[1], n_terms)
    aod = rng.uniform(params.aod_range[0], params.aod_range[1], n_terms)
    h = np.zeros((rx.num_elements, tx.num_elements), dtype=complex)
    for alpha, phi, theta in zip(gains, aoa, aod):
        h += alpha * np.outer(ula_response(phi, rx.num_elements),
                              ula_response(theta, tx.num_elements))
    return h / np.sqrt(n_terms)


def si_distance(m, n, geo):
    """Distance from transmit element n to receive element m of the same node.

    Law-of-cosines form: with a = D/tan(Theta) + (n-1)*lambda/2 and
    b = D/sin(Theta) + (m-1)*lambda/2, r^2 = a^2 + b^2 - 2ab*cos(Theta).
    """
    if m < 1 or n < 1:
        raise ValueError("element indices are 1-based")
    half_wl = geo.wavelength_m / 2.0
    cos_t = np.cos(geo.angle_rad)
    sin_t = np.sin(geo.angle_rad)
    a = geo.distance_m * cos_t / sin_t + (n - 1) * half_wl
    b = geo.distance_m / sin_t + (m - 1) * half_wl
    r_sq = a * a + b * b - 2.0 * a * b * cos_t
    if r_sq < 0.0:
        raise GeometryError(
            f"negative squared distance at element pair ({m}, {n}): {r_sq!r}"
        )
    return float(np.sqrt(r_sq))


def _los_component(geo, n_rx, n_tx):
    """Near-field line-of-sight matrix scaled to ||H||_F^2 = n_rx*n_tx exactly."""
    r = np.empty((n_rx, n_tx))
    for m in range(1, n_rx + 1):
        for n in range(1, n_tx + 1):
            r[m - 1, n - 1] = si_distance(m, n, geo)
    raw = np.exp(-2j * np.pi * r / geo.wavelength_m) / r
    rho = np.sqrt(n_rx * n_tx / np.sum(np.abs(raw) ** 2))
    return rho * raw


def si_channel(geo, params, n_rx, n_tx, rng):
    """Rician mixture of the deterministic LoS leakage and a reflected draw.

    Rician factors beyond +-200 dB clamp to the pure-LoS / pure-reflection
    limits.
    """
    kappa_db = min(max(geo.rician_db, -200.0), 200.0)
    kappa = 10.0 ** (kappa_db / 10.0)
    h_los = _los_component(geo, n_rx, n_tx)
    h_ref = cluster_channel(
        ArrayGeometry(n_tx), ArrayGeometry(n_rx), params, rng
    )
    return (np.sqrt(kappa / (kappa + 1.0)) * h_los
            + np.sqrt(1.0 / (kappa + 1.0)) * h_ref)


def channel_stream(seed, realization, link_id):
    """Independent deterministic RNG for one channel matrix.

    Streams are keyed by (seed, realization, link id) so adding a user never
    perturbs the draws of existing links, and schemes sharing a (seed,
    realization) pair consume identical channels.
    """
    key = zlib.crc32(link_id.encode("utf-8"))
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), int(realization), key])
    )


def generate_channels(cfg, seed, realization=0):
    """Draw every channel of one realization; pure in (cfg dims, seed, realization)."""
    params = ClusterParams(
        cfg.n_clusters, cfg.n_rays,
        (-cfg.angle_spread_rad, cfg.angle_spread_rad),
        (-cfg.angle_spread_rad, cfg.angle_spread_rad),
    )
    bs_tx = ArrayGeometry(cfg.bs_tx_ant)
    bs_rx = ArrayGeometry(cfg.bs_rx_ant)
    ue_tx = ArrayGeometry(cfg.ul_ant)
    ue_rx = ArrayGeometry(cfg.dl_ant)

    ul = [
        cluster_channel(ue_tx, bs_rx, params, channel_stream(seed, realization, f"ul-{k}"))
        for k in range(cfg.n_ul)
    ]
    dl = [
        cluster_channel(bs_tx, ue_rx, params, channel_stream(seed, realization, f"dl-{j}"))
        for j in range(cfg.n_dl)
    ]
    cross = [
        [
            cluster_channel(ue_tx, ue_rx, params,
                            channel_stream(seed, realization, f"x-{j}-{k}"))
            for k in range(cfg.n_ul)
        ]
        for j in range(cfg.n_dl)
    ]
    geo = SiGeometry(cfg.array_sep_m, cfg.array_angle_rad, cfg.rician_db,
                     cfg.wavelength_m)
    si = si_channel(geo, params, cfg.bs_rx_ant, cfg.bs_tx_ant,
                    channel_stream(seed, realization, "si-ref"))
    if cfg.si_gain_db != 0.0:
        si = math.sqrt(cfg.si_gain_lin) * si
    return ChannelSet(
        ul=ul, dl=dl, si=si, cross=cross,
        noise_bs=cfg.bs_noise_w, noise_ue=cfg.ue_noise_w,
        seed=int(seed), realization=int(realization),
    )


# ----------------------------------------------------------------------
# Text fixtures: one complex entry per line, row-major
# ----------------------------------------------------------------------

def dump_channels(channels, path):
    """Write a ChannelSet as plain text (round-trips bit-exactly)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# seed {channels.seed} realization {channels.realization}\n")
        fh.write(f"# noise_bs {float(channels.noise_bs)!r} "
                 f"noise_ue {float(channels.noise_ue)!r}\n")
        sections = [("ul", channels.ul), ("dl", channels.dl)]
        for name, mats in sections:
            for idx, mat in enumerate(mats):
                _dump_matrix(fh, f"{name}-{idx}", mat)
        _dump_matrix(fh, "si", channels.si)
        for j, row in enumerate(channels.cross):
            for k, mat in enumerate(row):
                _dump_matrix(fh, f"x-{j}-{k}", mat)


def _dump_matrix(fh, label, mat):
    fh.write(f"matrix {label} {mat.shape[0]} {mat.shape[1]}\n")
    for value in mat.ravel(order="C"):
        # repr of a Python float round-trips exactly; numpy scalars do not.
        fh.write(f"{float(value.real)!r} {float(value.imag)!r}\n")


def load_channels(path):
    """Read the dump_channels format back into plain dicts of matrices."""
    matrices = {}
    header = {}
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("# seed"):
            parts = line.split()
            header["seed"] = int(parts[2])
            header["realization"] = int(parts[4])
            i += 1
        elif line.startswith("# noise_bs"):
            parts = line.split()
            header["noise_bs"] = float(parts[2])
            header["noise_ue"] = float(parts[4])
            i += 1
        elif line.startswith("matrix "):
            _, label, rows, cols = line.split()
            rows, cols = int(rows), int(cols)
            data = np.empty(rows * cols, dtype=complex)
            for idx in range(rows * cols):
                re_s, im_s = lines[i + 1 + idx].split()
                data[idx] = float(re_s) + 1j * float(im_s)
            matrices[label] = data.reshape(rows, cols)
            i += 1 + rows * cols
        else:
            i += 1
    return header, matrices

"""Hexagonal multi-cell layouts, device placement, and large-scale fading gains.

Cells are hexagons of circumradius R centered on a triangular lattice, so
adjacent base stations are sqrt(3)*R apart.  Cell 0 sits at the origin and
further cells follow a deterministic spiral: ring 1 starting due east and
walking counterclockwise, then ring 2, and so on.  Large-scale gains follow
a log-distance path-loss law expressed in dB and are normalized by the
device transmit power, so the noise variance carries the power budget.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SQRT3 = np.sqrt(3.0)

# Axial steps walking counterclockwise around a ring, starting from the
# easternmost cell of the ring.
_RING_STEPS = ((-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0), (0, 1))

DEFAULT_MIN_DISTANCE_M = 5.0


@dataclass(frozen=True)
class CellLayout:
    """Base-station positions of a hexagonal multi-cell system.

    Attributes
    ----------
    num_cells : int
        Number of cells B.
    radius_m : float
        Hexagon circumradius R in meters.
    bs_positions : ndarray, shape (B, 2)
        Planar BS coordinates in meters, spiral ordered, BS 0 at the origin.
    rings : ndarray, shape (B,)
        Ring index of each cell in the spiral (0 for the center).
    """

    num_cells: int
    radius_m: float
    bs_positions: np.ndarray
    rings: np.ndarray


@dataclass(frozen=True)
class DevicePlacement:
    """Device locations, one block of N devices per cell.

    ``positions[j*N + n]`` is device n of cell j; ``home_cell`` holds j for
    every flat device index.
    """

    positions: np.ndarray  # (B*N, 2) meters
    home_cell: np.ndarray  # (B*N,) int
    devices_per_cell: int


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss in dB plus the power/noise budget.

    The implied path-loss exponent is ``slope_db_per_decade / 10`` and must
    exceed 2 for the inter-cell interference sums to stay bounded as the
    layout grows.
    """

    pl_db_at_1km: float = 128.1
    slope_db_per_decade: float = 37.6
    tx_power_dbm: float = 23.0
    noise_psd_dbm_hz: float = -169.0
    bandwidth_hz: float = 1e7
    d_min_m: float = DEFAULT_MIN_DISTANCE_M

    def __post_init__(self):
        if self.slope_db_per_decade / 10.0 <= 2.0:
            raise ParameterError(
                "path-loss exponent slope/10 must exceed 2, got "
                f"{self.slope_db_per_decade / 10.0:g}"
            )
        if self.d_min_m <= 0:
            raise ParameterError("d_min_m must be positive")

    def gain_at(self, distance_m):
        """Linear power gain at the given distance(s), clamped at d_min."""
        d = np.maximum(np.asarray(distance_m, dtype=float), self.d_min_m)
        pl_db = self.pl_db_at_1km + self.slope_db_per_decade * np.log10(d / 1000.0)
        return 10.0 ** (-pl_db / 10.0)

    @property
    def noise_variance(self):
        """Noise variance normalized by the transmit power (linear scale)."""
        noise_dbm = self.noise_psd_dbm_hz + 10.0 * np.log10(self.bandwidth_hz)
        return 10.0 ** ((noise_dbm - self.tx_power_dbm) / 10.0)


@dataclass(frozen=True)
class GainTensor:
    """Large-scale fading gains between every BS and every device.

    ``gains[b, i]`` is the transmit-power-normalized linear gain between BS b
    and flat device index i; ``noise_var`` uses the same normalization.
    """

    gains: np.ndarray  # (B, B*N)
    noise_var: float

    def __post_init__(self):
        g = np.asarray(self.gains)
        if not np.all(np.isfinite(g)) or np.any(g <= 0):
            raise ParameterError("gains must be strictly positive and finite")

    @property
    def num_cells(self):
        return self.gains.shape[0]

    @property
    def devices_per_cell(self):
        return self.gains.shape[1] // self.gains.shape[0]


def _spiral_axial(num_cells):
    """Axial (q, r) cell coordinates in spiral order, truncated to num_cells."""
    coords = [(0, 0)]
    ring = 1
    while len(coords) < num_cells:
        q, r = ring, 0
        for dq, dr in _RING_STEPS:
            for _ in range(ring):
                coords.append((q, r))
                q, r = q + dq, r + dr
        ring += 1
    return coords[:num_cells]


def build_hex_layout(num_cells, radius_m):
    """Build a spiral-ordered hexagonal layout of ``num_cells`` cells.

    Adjacent BS centers are exactly sqrt(3)*radius_m apart.
    """
    if num_cells < 1:
        raise ParameterError("num_cells must be at least 1")
    if radius_m <= 0:
        raise ParameterError("radius_m must be positive")
    spacing = SQRT3 * radius_m
    u = spacing * np.array([1.0, 0.0])
    v = spacing * np.array([0.5, SQRT3 / 2.0])
    axial = _spiral_axial(num_cells)
    positions = np.array([q * u + r * v for q, r in axial])
    rings = np.array([(abs(q) + abs(r) + abs(q + r)) // 2 for q, r in axial])
    return CellLayout(num_cells, float(radius_m), positions, rings)


def _inside_hexagon(x, y, radius):
    """Pointy-top hexagon membership test for center-relative coordinates."""
    return (np.abs(x) <= SQRT3 / 2.0 * radius) & (
        np.abs(y) <= radius - np.abs(x) / SQRT3
    )


def place_devices(layout, devices_per_cell, rng, d_min_m=DEFAULT_MIN_DISTANCE_M,
                  max_rounds=1000):
    """Drop devices uniformly in each hexagon, at least d_min from the BS.

    Uses rejection sampling from the bounding box; points closer than
    ``d_min_m`` to the home BS are resampled.
    """
    if devices_per_cell < 1:
        raise ParameterError("devices_per_cell must be at least 1")
    R = layout.radius_m
    B = layout.num_cells
    N = devices_per_cell
    positions = np.empty((B * N, 2))
    home = np.repeat(np.arange(B), N)
    for b in range(B):
        kept = np.empty((0, 2))
        for _ in range(max_rounds):
            need = N - kept.shape[0]
            if need == 0:
                break
            # acceptance rate is ~0.65, so 2x oversampling usually suffices
            cand = rng.uniform(-1.0, 1.0, size=(2 * need + 8, 2))
            cand[:, 0] *= SQRT3 / 2.0 * R
            cand[:, 1] *= R
            ok = _inside_hexagon(cand[:, 0], cand[:, 1], R)
            ok &= np.hypot(cand[:, 0], cand[:, 1]) >= d_min_m
            kept = np.vstack([kept, cand[ok][:need]])
        else:
            raise RuntimeError("rejection sampling failed to fill a hexagon")
        positions[b * N:(b + 1) * N] = layout.bs_positions[b] + kept
    return DevicePlacement(positions, home, N)


def compute_gains(layout, placement, model):
    """Large-scale gains for every (BS, device) pair under the path-loss model."""
    d = np.linalg.norm(
        placement.positions[None, :, :] - layout.bs_positions[:, None, :], axis=2
    )
    if not np.all(np.isfinite(d)):
        raise ParameterError("device positions produce non-finite distances")
    return GainTensor(model.gain_at(d), float(model.noise_variance))


def lemma3_sum(gains, b):
    """Sum over interfering cells of the strongest gain seen at BS b.

    Returns ``sum_{j != b} max_n gains[b, j*N + n]``; zero for a single cell.
    """
    B = gains.num_cells
    N = gains.devices_per_cell
    if not 0 <= b < B:
        raise ParameterError(f"cell index {b} out of range")
    per_cell_max = gains.gains[b].reshape(B, N).max(axis=1)
    return float(per_cell_max.sum() - per_cell_max[b])


def lemma3_ring_contributions(gains, layout, b):
    """Split the interference sum at BS b by spiral ring of the interferer.

    Returns (rings, contributions) where ``contributions[k]`` sums the
    strongest per-cell gains over interfering cells in ring ``rings[k]``.
    Ring 0 contributes only when b is not the center cell.
    """
    B = gains.num_cells
    N = gains.devices_per_cell
    per_cell_max = gains.gains[b].reshape(B, N).max(axis=1)
    rings = np.unique(layout.rings)
    contrib = np.zeros(rings.shape[0])
    for k, ring in enumerate(rings):
        mask = layout.rings == ring
        mask[b] = False
        contrib[k] = per_cell_max[mask].sum()
    return rings, contrib

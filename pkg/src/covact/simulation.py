"""Activity sampling, received-signal simulation, and covariance formation.

With activity vector a, gains g_b, and noise variance ``nv``, the L x M
signal received at BS b under i.i.d. Rayleigh fading is

    Y_b = sum_i a_i * sqrt(g_bi) * s_i * h_bi^T + W_b,

whose columns are i.i.d. complex Gaussian with covariance

    Sigma_b(a) = S diag(g_b * a) S^H + nv * I.

Sample covariances are Y_b Y_b^H / M.  Feeding model covariances directly
to the estimator plays the role of the infinite-antenna limit.

Complex Gaussian convention: unit-variance entries are
(randn + 1j*randn) / sqrt(2), so E|z|^2 = 1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class ActivityPattern:
    """Activity values for all B*N devices, cell-major flat ordering.

    Ground-truth patterns are binary with exactly K active devices per cell;
    estimates are soft values in [0, 1].
    """

    values: np.ndarray  # (B*N,) float in [0, 1]
    num_cells: int

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size % self.num_cells:
            raise ParameterError("values length must be a multiple of num_cells")
        if np.any(v < 0) or np.any(v > 1):
            raise ParameterError("activity values must lie in [0, 1]")

    @property
    def devices_per_cell(self):
        return self.values.size // self.num_cells

    @property
    def active_mask(self):
        return self.values > 0.5

    @property
    def is_binary(self):
        return bool(np.all((self.values == 0) | (self.values == 1)))

    @property
    def per_cell_support(self):
        """Active flat indices per cell (meaningful for binary patterns)."""
        mask = self.active_mask
        N = self.devices_per_cell
        return [np.flatnonzero(mask[b * N:(b + 1) * N]) + b * N
                for b in range(self.num_cells)]

    @property
    def inactive_set(self):
        return np.flatnonzero(~self.active_mask)


def sample_activity(num_cells, devices_per_cell, actives_per_cell, rng):
    """Draw a ground-truth pattern with exactly K uniform actives per cell."""
    if not 0 <= actives_per_cell <= devices_per_cell:
        raise ParameterError(
            f"actives_per_cell must be in [0, {devices_per_cell}], "
            f"got {actives_per_cell}"
        )
    values = np.zeros(num_cells * devices_per_cell)
    for b in range(num_cells):
        chosen = rng.choice(devices_per_cell, size=actives_per_cell, replace=False)
        values[b * devices_per_cell + chosen] = 1.0
    return ActivityPattern(values, num_cells)


@dataclass(frozen=True)
class CovarianceSet:
    """Per-BS Hermitian L x L covariance matrices (model or sample)."""

    matrices: np.ndarray  # (B, L, L) complex
    kind: str  # "model" | "sample"
    num_antennas: int | None = None


def simulate_received(sigs, gains, truth, num_antennas, rng):
    """Simulate the per-BS received signals for one coherence block.

    Returns an array of shape (B, L, M).  Channels are independent across
    base stations, devices, and antennas; noise entries have variance
    ``gains.noise_var``.
    """
    if num_antennas < 1:
        raise ParameterError("num_antennas must be at least 1")
    if not truth.is_binary:
        raise ParameterError("simulation requires a binary activity pattern")
    S = sigs.matrix
    L = sigs.length
    B = gains.num_cells
    M = num_antennas
    active = truth.active_mask
    S_act = S[:, active]
    g_act = gains.gains[:, active]
    noise_scale = np.sqrt(gains.noise_var / 2.0)
    out = np.empty((B, L, M), dtype=complex)
    for b in range(B):
        n_act = S_act.shape[1]
        h = (rng.standard_normal((n_act, M)) + 1j * rng.standard_normal((n_act, M)))
        h /= np.sqrt(2.0)
        w = noise_scale * (
            rng.standard_normal((L, M)) + 1j * rng.standard_normal((L, M))
        )
        out[b] = (S_act * np.sqrt(g_act[b])) @ h + w
    return out


def sample_covariance(signals):
    """Per-BS sample covariances Y_b Y_b^H / M."""
    signals = np.asarray(signals)
    if signals.ndim != 3:
        raise ParameterError("signals must have shape (B, L, M)")
    M = signals.shape[2]
    mats = signals @ signals.conj().transpose(0, 2, 1) / M
    return CovarianceSet(mats, "sample", M)


def model_covariance(sigs, gains, pattern, noise_var):
    """Per-BS model covariances S diag(g_b * a) S^H + noise_var * I.

    Accepts soft activity values; doubles as the infinite-antenna input for
    asymptotic experiments.
    """
    S = sigs.matrix
    L = sigs.length
    B = gains.num_cells
    a = pattern.values
    mats = np.empty((B, L, L), dtype=complex)
    eye = np.eye(L)
    for b in range(B):
        weighted = S * (gains.gains[b] * a)
        mats[b] = weighted @ S.conj().T + noise_var * eye
        mats[b] = 0.5 * (mats[b] + mats[b].conj().T)  # enforce exact hermitianity
    return CovarianceSet(mats, "model")

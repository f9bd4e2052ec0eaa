"""Analog beamforming stage built from slow time-varying departure angles.

The x/y directional-cosine plane is tiled by M quantized angle pairs whose
steering vectors form an orthonormal family. For every UE group we keep the
pairs whose cell touches the group's own angular support and no other
group's, then stack the corresponding steering vectors into the analog
beamformer. Entries stay constant-modulus (phase shifters only) and the
matrix is unitary by the orthogonality of the grid.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, GroupAngularSpec, angle_to_gamma, steering_vector
from .errors import DimensionError, InsufficientBeamsError

# Lattice resolution used to sample a support's image in the cosine plane.
COVER_SAMPLES = 64


@dataclass(frozen=True)
class QuantizedGrid:
    """Cell-center coordinates -1 + (2m-1)/M_axis along each array axis."""

    lambda_x: np.ndarray
    lambda_y: np.ndarray


def build_grid(geom: ArrayGeometry) -> QuantizedGrid:
    return QuantizedGrid(
        lambda_x=-1.0 + (2.0 * np.arange(1, geom.m_x + 1) - 1.0) / geom.m_x,
        lambda_y=-1.0 + (2.0 * np.arange(1, geom.m_y + 1) - 1.0) / geom.m_y,
    )


@dataclass(frozen=True)
class AodSupport:
    """Angular support of one UE group: its departure-angle box (degrees)."""

    group: int
    eaod_deg: tuple
    aaod_deg: tuple

    @classmethod
    def from_spec(cls, group: int, spec: GroupAngularSpec) -> "AodSupport":
        return cls(group=group, eaod_deg=spec.eaod_interval, aaod_deg=spec.aaod_interval)

    def gamma_samples(self, n: int = COVER_SAMPLES) -> np.ndarray:
        """(n*n, 2) lattice image of the angle box in the cosine plane."""
        theta = np.linspace(self.eaod_deg[0], self.eaod_deg[1], n)
        psi = np.linspace(self.aaod_deg[0], self.aaod_deg[1], n)
        tt, pp = np.meshgrid(theta, psi, indexing="ij")
        gx, gy = angle_to_gamma(tt.ravel(), pp.ravel())
        return np.column_stack([gx, gy])

    def mean_gamma(self) -> tuple:
        return angle_to_gamma(0.5 * sum(self.eaod_deg), 0.5 * sum(self.aaod_deg))


def _covered_cells(samples_1d: np.ndarray, m: int) -> list:
    """Cell indices along one axis whose closed cell touches each sample.

    Cell i spans [-1 + 2i/m, -1 + (2i+2)/m]; neighbours share an endpoint,
    so a sample exactly on a boundary belongs to both cells.
    """
    t = (samples_1d + 1.0) * m / 2.0
    lo = np.floor(t).astype(int)
    cols = [np.clip(lo, 0, m - 1)]
    on_edge = (t == lo) & (lo >= 1)
    if on_edge.any():
        cols.append(np.where(on_edge, np.clip(lo - 1, 0, m - 1), cols[0]))
    return cols


def _hit_mask(support: AodSupport, geom: ArrayGeometry, n: int = COVER_SAMPLES) -> np.ndarray:
    """(m_x, m_y) boolean mask of cells intersected by the support's image."""
    pts = support.gamma_samples(n)
    mask = np.zeros((geom.m_x, geom.m_y), dtype=bool)
    for ix in _covered_cells(pts[:, 0], geom.m_x):
        for iy in _covered_cells(pts[:, 1], geom.m_y):
            mask[ix, iy] = True
    return mask


def pair_covers(pair, support: AodSupport, geom: ArrayGeometry,
                n: int = COVER_SAMPLES) -> bool:
    """Whether the pair's cell intersects the support's cosine-plane image."""
    lam_x, lam_y = pair
    pts = support.gamma_samples(n)
    inside = (np.abs(pts[:, 0] - lam_x) <= 1.0 / geom.m_x) \
        & (np.abs(pts[:, 1] - lam_y) <= 1.0 / geom.m_y)
    return bool(inside.any())


def select_angle_pairs(supports, geom: ArrayGeometry, n_rf_per_group) -> list:
    """Choose per-group quantized angle pairs covering the group's support only.

    A pair qualifies for group g when its cell touches g's image and no other
    group's image, which makes the chosen sets disjoint by construction.
    Surplus qualifying pairs are ranked by cosine-plane distance to the
    group's mean angle (grid order breaks ties); a group with fewer
    qualifying pairs than RF chains raises InsufficientBeamsError.
    """
    grid = build_grid(geom)
    masks = [_hit_mask(s, geom) for s in supports]
    selected = []
    for g, support in enumerate(supports):
        qualifying = masks[g].copy()
        for t in range(len(supports)):
            if t != g:
                qualifying &= ~masks[t]
        idx = np.argwhere(qualifying)
        requested = n_rf_per_group[g]
        if len(idx) < requested:
            raise InsufficientBeamsError(g, requested, len(idx))
        cx, cy = support.mean_gamma()
        d2 = (grid.lambda_x[idx[:, 0]] - cx) ** 2 + (grid.lambda_y[idx[:, 1]] - cy) ** 2
        order = np.lexsort((idx[:, 1], idx[:, 0], d2))[:requested]
        selected.append([(float(grid.lambda_x[i]), float(grid.lambda_y[j]))
                         for i, j in idx[order]])
    return selected


@dataclass(frozen=True)
class RfBeamformer:
    """Analog beamformer: unit-modulus steering columns grouped per UE group."""

    f: np.ndarray
    group_pairs: list
    n_rf_per_group: list

    @property
    def n_rf(self) -> int:
        return self.f.shape[1]

    def group_slice(self, g: int) -> slice:
        start = sum(self.n_rf_per_group[:g])
        return slice(start, start + self.n_rf_per_group[g])


def build_rf_beamformer(pair_groups, geom: ArrayGeometry) -> RfBeamformer:
    """Stack steering vectors of the selected pairs, one block per group."""
    flat = [p for pairs in pair_groups for p in pairs]
    if len(set(flat)) != len(flat):
        raise ValueError("selected angle pairs must be pairwise distinct")
    cols = [steering_vector(geom, gx, gy) for gx, gy in flat]
    return RfBeamformer(
        f=np.stack(cols, axis=1),
        group_pairs=[list(p) for p in pair_groups],
        n_rf_per_group=[len(p) for p in pair_groups],
    )


def leakage(phi_t: np.ndarray, f_col: np.ndarray) -> float:
    """Residual power a beamformer column leaks into another group's paths."""
    phi_t = np.asarray(phi_t)
    f_col = np.asarray(f_col)
    if phi_t.shape[1] != f_col.shape[0]:
        raise DimensionError(f"cannot apply {phi_t.shape} to {f_col.shape}")
    return float(np.linalg.norm(phi_t @ f_col))


def build_for_groups(groups, geom: ArrayGeometry, n_rf_per_group) -> RfBeamformer:
    """Convenience: supports from group specs, pair selection, beamformer."""
    supports = [AodSupport.from_spec(g, spec) for g, spec in enumerate(groups)]
    if isinstance(n_rf_per_group, int):
        n_rf_per_group = [n_rf_per_group] * len(groups)
    pairs = select_angle_pairs(supports, geom, n_rf_per_group)
    return build_rf_beamformer(pairs, geom)

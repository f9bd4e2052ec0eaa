"""Geometric mmWave downlink channel generation.

A uniform rectangular array at the base station serves single-antenna UEs
clustered in groups. Each group owns a cluster of L scatterers drawn inside
its elevation/azimuth departure box; every UE of the group combines those L
phase-response vectors with its own complex path gains and a distance-based
amplitude decay. This keeps the group channel matrix exactly equal to the
product of its path-gain and phase-response factors, which the analog
beamforming stage relies on.

Angles are degrees at every public boundary; radians only appear inside
the trigonometric kernels.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DomainError


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform rectangular array, m_x by m_y elements, half-wavelength pitch."""

    m_x: int
    m_y: int
    d: float = 0.5

    def __post_init__(self):
        if self.m_x < 1 or self.m_y < 1:
            raise DomainError("array needs at least one element per axis")
        if self.d != 0.5:
            raise DomainError("element spacing is fixed at half a wavelength")

    @property
    def m(self) -> int:
        return self.m_x * self.m_y


@dataclass(frozen=True)
class GroupAngularSpec:
    """Mean departure angles and spreads for one UE group (degrees)."""

    mean_eaod_deg: float
    eaod_spread_deg: float
    mean_aaod_deg: float
    aaod_spread_deg: float
    ue_count: int

    def __post_init__(self):
        if self.eaod_spread_deg <= 0 or self.aaod_spread_deg <= 0:
            raise DomainError("angular spreads must be positive")
        if self.ue_count < 1:
            raise DomainError("each group needs at least one UE")
        lo = self.mean_eaod_deg - self.eaod_spread_deg
        hi = self.mean_eaod_deg + self.eaod_spread_deg
        if lo <= 0.0 or hi >= 180.0:
            raise DomainError("elevation interval must stay inside (0, 180) degrees")

    @property
    def eaod_interval(self) -> tuple:
        return (self.mean_eaod_deg - self.eaod_spread_deg,
                self.mean_eaod_deg + self.eaod_spread_deg)

    @property
    def aaod_interval(self) -> tuple:
        return (self.mean_aaod_deg - self.aaod_spread_deg,
                self.mean_aaod_deg + self.aaod_spread_deg)


@dataclass(frozen=True)
class PlacementBounds:
    """Scenario geometry the UE drops are drawn from (meters)."""

    horizontal_min_m: float = 10.0
    horizontal_max_m: float = 100.0
    bs_height_m: float = 10.0
    ue_height_min_m: float = 1.5
    ue_height_max_m: float = 2.5

    def __post_init__(self):
        if not (0 < self.horizontal_min_m < self.horizontal_max_m):
            raise DomainError("horizontal distance bounds must satisfy 0 < min < max")
        if not (self.ue_height_min_m <= self.ue_height_max_m):
            raise DomainError("UE height bounds inverted")


@dataclass(frozen=True)
class UePlacement:
    """One UE drop; the 3-D distance feeds the per-path amplitude decay."""

    horizontal_m: float
    bs_height_m: float
    ue_height_m: float

    @property
    def distance_3d_m(self) -> float:
        return math.hypot(self.horizontal_m, self.bs_height_m - self.ue_height_m)


@dataclass(frozen=True)
class ChannelRealization:
    """One fast-fading drop of the full downlink channel.

    h:            (K, M) channel matrix, row k belongs to UE k.
    per_group:    list of (gains, phases) with gains (K_g, L) and
                  phases (L, M); their product reproduces the group's rows
                  of ``h`` exactly.
    path_angles_deg: per-UE (L, 2) arrays of (elevation, azimuth) pairs.
    placements:   per-UE drop geometry.
    """

    h: np.ndarray
    per_group: list = field(repr=False)
    path_angles_deg: list = field(repr=False)
    placements: list = field(repr=False)


def angle_to_gamma(theta_deg: float, psi_deg: float):
    """Directional cosines (sin t cos p, sin t sin p) of a departure angle pair."""
    t = np.deg2rad(theta_deg)
    p = np.deg2rad(psi_deg)
    return np.sin(t) * np.cos(p), np.sin(t) * np.sin(p)


def phase_response(geom: ArrayGeometry, gamma_x: float, gamma_y: float) -> np.ndarray:
    """Array phase response: Kronecker product of the x and y steering factors.

    Element n of each factor carries exp(-j 2 pi d n gamma); all entries have
    unit magnitude.
    """
    if np.any(np.abs(gamma_x) > 1) or np.any(np.abs(gamma_y) > 1):
        raise DomainError("directional cosines must lie in [-1, 1]")
    ax = np.exp(-2j * np.pi * geom.d * gamma_x * np.arange(geom.m_x))
    ay = np.exp(-2j * np.pi * geom.d * gamma_y * np.arange(geom.m_y))
    return linalg.kronecker(ax, ay)


def steering_vector(geom: ArrayGeometry, gamma_x: float, gamma_y: float) -> np.ndarray:
    """Unit-power steering vector: conjugated phase response over sqrt(M)."""
    return phase_response(geom, gamma_x, gamma_y).conj() / math.sqrt(geom.m)


def draw_placement(rng: np.random.Generator, bounds: PlacementBounds) -> UePlacement:
    """Drop one UE uniformly in horizontal distance and height."""
    return UePlacement(
        horizontal_m=rng.uniform(bounds.horizontal_min_m, bounds.horizontal_max_m),
        bs_height_m=bounds.bs_height_m,
        ue_height_m=rng.uniform(bounds.ue_height_min_m, bounds.ue_height_max_m),
    )


def generate_channel(geom: ArrayGeometry, groups, placements, n_paths: int,
                     pathloss_exponent: float, rng: np.random.Generator,
                     pathloss_convention: str = "amplitude") -> ChannelRealization:
    """Draw one channel realization.

    Per group: L scatterer angle pairs uniform inside the group's mean+/-spread
    box, shared by the group's UEs so the (gains @ phases) factorization is
    exact. Per UE and path: complex normal gain with variance 1/L, scaled by
    tau^-eta (or tau^-eta/2 under the "power" pathloss convention), tau being
    the UE's 3-D distance.

    ``placements`` lists one UePlacement per UE, ordered to match the
    contiguous group blocks implied by ``groups``.
    """
    if pathloss_convention not in ("amplitude", "power"):
        raise DomainError(f"unknown pathloss convention {pathloss_convention!r}")
    exponent = pathloss_exponent if pathloss_convention == "amplitude" \
        else pathloss_exponent / 2.0
    k_total = sum(g.ue_count for g in groups)
    if len(placements) != k_total:
        raise DomainError(f"{len(placements)} placements for {k_total} UEs")

    h = np.zeros((k_total, geom.m), dtype=complex)
    per_group = []
    path_angles = []
    offset = 0
    for spec in groups:
        theta = rng.uniform(*spec.eaod_interval, size=n_paths)
        psi = rng.uniform(*spec.aaod_interval, size=n_paths)
        gx, gy = angle_to_gamma(theta, psi)
        phases = np.stack([phase_response(geom, gx[l], gy[l]) for l in range(n_paths)])
        angles = np.column_stack([theta, psi])

        gains = np.empty((spec.ue_count, n_paths), dtype=complex)
        for k in range(spec.ue_count):
            tau = placements[offset + k].distance_3d_m
            z = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) \
                * math.sqrt(0.5 / n_paths)
            gains[k] = tau**-exponent * z
            path_angles.append(angles.copy())
        h[offset:offset + spec.ue_count] = gains @ phases
        per_group.append((gains, phases))
        offset += spec.ue_count

    return ChannelRealization(h=h, per_group=per_group,
                              path_angles_deg=path_angles,
                              placements=list(placements))

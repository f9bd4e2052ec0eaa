import pytest

from fairbeam.bb_stage import EffectiveChannel
from fairbeam.channel import ArrayGeometry, GroupAngularSpec, draw_placement, generate_channel
from fairbeam.config import parse_config
from fairbeam.harness import build_beamformer, child_rng
from fairbeam.metrics import noise_power_watt


def table_groups(n_groups=2, ue_per_group=5):
    """Default two-group angular layout: elevation 50 +/- 10, azimuths evenly spaced."""
    return [
        GroupAngularSpec(
            mean_eaod_deg=50.0, eaod_spread_deg=10.0,
            mean_aaod_deg=25.0 + 360.0 / n_groups * g, aaod_spread_deg=10.0,
            ue_count=ue_per_group,
        )
        for g in range(n_groups)
    ]


def tiny_config(**overrides):
    """Small, fast scenario used across harness/service/CLI tests."""
    data = {
        "k": 2,
        "n_rf_per_group": 2,
        "n_realizations": 2,
        "p_t_dbm": 20,
        "fairness": [0],
        "optimizer": {"algorithms": ["pso"], "n_agents": 8, "iterations": 2},
        "master_seed": 7,
    }
    data.update(overrides)
    return parse_config(data)


@pytest.fixture(scope="session")
def default_geometry():
    return ArrayGeometry(m_x=16, m_y=16)


@pytest.fixture(scope="session")
def small_effective_channel():
    """A fixed seeded K=3 effective channel for baseband-stage tests."""
    cfg = parse_config({"k": 4, "n_rf_per_group": 3, "p_t_dbm": 20})
    rf = build_beamformer(cfg)
    records_rng = child_rng(3, 0, 0)
    placements = [draw_placement(records_rng, cfg.placement_bounds()) for _ in range(cfg.k)]
    real = generate_channel(cfg.array_geometry(), cfg.resolved_groups(), placements,
                            cfg.n_paths, cfg.pathloss_exponent, records_rng)
    return EffectiveChannel(
        h_eff=real.h @ rf.f,
        noise_power_w=noise_power_watt(-174.0, 120e3),
        total_power_w=0.1,
    ), real, rf

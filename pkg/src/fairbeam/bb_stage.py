"""Digital baseband precoding and the fairness objective.

The baseband stage only sees the reduced effective channel (channel times
analog beamformer). A search agent is a plain float vector in [0,1]^(2K):
the first K entries are normalized per-UE powers, the last K are normalized
regularization weights. Both halves are rescaled so they sum to the transmit
power budget, and each UE's precoding column is the regularized-inverse
direction scaled by its allocated power. Evaluating an agent end to end
(precoder, SINR, rates, utility) is the objective every optimizer maximizes;
a batched variant evaluates a whole population in one shot.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, SingularMatrixError

# Agent components are floored here before normalization so all-zero halves
# still yield finite scaling; optimizer clipping can produce exact zeros.
AGENT_FLOOR = 1e-9

# Rates are floored inside the utility for alpha >= 1, where log/negative
# powers diverge at zero.
RATE_FLOOR = 1e-12


@dataclass(frozen=True)
class EffectiveChannel:
    """What the baseband stage knows: K x N_RF channel, noise and power budget."""

    h_eff: np.ndarray
    noise_power_w: float
    total_power_w: float

    def __post_init__(self):
        if self.noise_power_w <= 0 or self.total_power_w <= 0:
            raise DomainError("noise and transmit power must be positive")

    @property
    def k(self) -> int:
        return self.h_eff.shape[0]

    @property
    def n_rf(self) -> int:
        return self.h_eff.shape[1]


@dataclass(frozen=True)
class FairnessSpec:
    """Fairness level: alpha >= 0, or the max-min limit as a distinct mode."""

    alpha: float = 0.0
    max_min: bool = False

    def __post_init__(self):
        if not self.max_min and self.alpha < 0:
            raise DomainError("alpha must be non-negative")

    @property
    def label(self) -> str:
        if self.max_min:
            return "maxmin"
        return format(self.alpha, "g")

    @classmethod
    def parse(cls, value) -> "FairnessSpec":
        if isinstance(value, FairnessSpec):
            return value
        if isinstance(value, str) and value.strip().lower() in ("maxmin", "max-min", "max_min"):
            return cls(max_min=True)
        return cls(alpha=float(value))


@dataclass(frozen=True)
class BbPrecoder:
    """Baseband precoding matrix plus the power split that produced it."""

    b: np.ndarray
    powers_w: np.ndarray
    regularizers_w: np.ndarray


def effective_channel(h: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Channel seen from baseband: K x M times M x N_RF."""
    h, f = np.asarray(h), np.asarray(f)
    if h.ndim != 2 or f.ndim != 2 or h.shape[1] != f.shape[0]:
        raise DimensionError(f"cannot reduce channel {h.shape} with beamformer {f.shape}")
    return h @ f


def split_agent(agent: np.ndarray):
    """Floored (power, regularizer) halves of an agent vector."""
    agent = np.asarray(agent, dtype=float)
    if agent.ndim != 1 or agent.size % 2:
        raise DimensionError("agent must be a flat vector of even length 2K")
    k = agent.size // 2
    return np.maximum(agent[:k], AGENT_FLOOR), np.maximum(agent[k:], AGENT_FLOOR)


def normalization(agent: np.ndarray, p_t_watt: float):
    """Scalars that rescale each agent half to sum to the power budget."""
    p_hat, b_hat = split_agent(agent)
    return p_t_watt / p_hat.sum(), p_t_watt / b_hat.sum()


def bb_precoder(agent: np.ndarray, eff: EffectiveChannel) -> BbPrecoder:
    """Per-UE precoding columns of the parameterized optimal form.

    One regularized Gram matrix (identity plus the weighted sum of per-UE
    effective-channel outer products) is factored per agent; column k is the
    unit-norm solve direction scaled by the UE's allocated power.
    """
    p_hat, b_hat = split_agent(agent)
    if p_hat.size != eff.k:
        raise DimensionError(f"agent encodes {p_hat.size} UEs, channel has {eff.k}")
    eps1, eps2 = normalization(agent, eff.total_power_w)
    heff = eff.h_eff
    weights = eps2 * b_hat / eff.noise_power_w
    gram = np.eye(eff.n_rf) + (heff.conj().T * weights) @ heff
    try:
        directions = np.linalg.solve(gram, heff.conj().T)
    except np.linalg.LinAlgError as exc:  # unreachable for identity-plus-PSD
        raise SingularMatrixError(str(exc)) from exc
    norms = np.linalg.norm(directions, axis=0)
    norms = np.where(norms == 0.0, 1.0, norms)
    powers = eps1 * p_hat
    return BbPrecoder(
        b=directions / norms * np.sqrt(powers),
        powers_w=powers,
        regularizers_w=eps2 * b_hat,
    )


def sinr_per_ue(h: np.ndarray, f: np.ndarray, b: np.ndarray,
                noise_power_w: float) -> np.ndarray:
    """Per-UE SINR: intended power over interference plus noise."""
    coupling = effective_channel(h, f) @ np.asarray(b)
    power = np.abs(coupling) ** 2
    signal = np.diag(power)
    interference = power.sum(axis=1) - signal
    return signal / (interference + noise_power_w)


def rate_per_ue(sinr: np.ndarray) -> np.ndarray:
    """Shannon rate log2(1 + SINR) in bps/Hz."""
    return np.log2(1.0 + np.asarray(sinr, dtype=float))


def _utility_rows(rates: np.ndarray, spec: FairnessSpec) -> np.ndarray:
    """Utility of each row of an (n, K) rate matrix."""
    if spec.max_min:
        return rates.min(axis=1)
    if spec.alpha == 0.0:
        return rates.sum(axis=1)
    if spec.alpha == 1.0:
        return np.log(np.maximum(rates, RATE_FLOOR)).sum(axis=1)
    r = np.maximum(rates, RATE_FLOOR) if spec.alpha > 1.0 else rates
    return (r ** (1.0 - spec.alpha)).sum(axis=1) / (1.0 - spec.alpha)


def utility(rates, spec: FairnessSpec) -> float:
    """Fairness utility of a rate vector.

    alpha = 0 sums the rates, alpha = 1 sums their logs, other alpha use
    r^(1-alpha)/(1-alpha); the max-min mode returns the worst rate. Rates
    are floored for alpha >= 1 so zero-rate agents stay finite.
    """
    rates = np.asarray(rates, dtype=float)
    return float(_utility_rows(rates[None, :], spec)[0])


def rates_for_agent(agent: np.ndarray, eff: EffectiveChannel) -> np.ndarray:
    """Per-UE rates the agent's precoder achieves on the effective channel."""
    coupling = eff.h_eff @ bb_precoder(agent, eff).b
    power = np.abs(coupling) ** 2
    signal = np.diag(power)
    sinr = signal / (power.sum(axis=1) - signal + eff.noise_power_w)
    return rate_per_ue(sinr)


def objective(agent: np.ndarray, eff: EffectiveChannel, spec: FairnessSpec) -> float:
    """Fairness utility of one agent; the function the optimizers maximize."""
    return float(utility(rates_for_agent(agent, eff), spec))


def rates_batch(agents: np.ndarray, eff: EffectiveChannel) -> np.ndarray:
    """Per-UE rates for a population of agents, vectorized; (n, K)."""
    agents = np.atleast_2d(np.asarray(agents, dtype=float))
    n, dim = agents.shape
    k, n_rf = eff.k, eff.n_rf
    if dim != 2 * k:
        raise DimensionError(f"agents encode {dim // 2} UEs, channel has {k}")
    p_hat = np.maximum(agents[:, :k], AGENT_FLOOR)
    b_hat = np.maximum(agents[:, k:], AGENT_FLOOR)
    eps1 = eff.total_power_w / p_hat.sum(axis=1)
    eps2 = eff.total_power_w / b_hat.sum(axis=1)

    heff = eff.h_eff
    h_herm = heff.conj().T
    weights = eps2[:, None] * b_hat / eff.noise_power_w
    gram = np.einsum("rk,nk,ks->nrs", h_herm, weights, heff)
    gram += np.eye(n_rf)
    try:
        directions = np.linalg.solve(gram, np.broadcast_to(h_herm, (n, n_rf, k)))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms = np.where(norms == 0.0, 1.0, norms)
    b = directions / norms * np.sqrt(eps1[:, None] * p_hat)[:, None, :]

    coupling = np.matmul(np.broadcast_to(heff, (n, k, n_rf)), b)
    power = np.abs(coupling) ** 2
    signal = np.einsum("nkk->nk", power)
    interference = power.sum(axis=2) - signal
    return rate_per_ue(signal / (interference + eff.noise_power_w))


def objective_batch(agents: np.ndarray, eff: EffectiveChannel,
                    spec: FairnessSpec) -> np.ndarray:
    """Vectorized objective over a population; returns (n,) scores."""
    return _utility_rows(rates_batch(agents, eff), spec)


def uniform_agent(k: int) -> np.ndarray:
    """Equal-allocation agent: every component 0.5, so p_k = P_T/K."""
    return np.full(2 * k, 0.5)

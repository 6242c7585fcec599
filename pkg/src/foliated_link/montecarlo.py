"""
Monte Carlo estimation of the effective transmission rate (ETR).

Channel qubits (primal data on Alice's transmitted layers) survive with
probability ``eta(L0) = eta_r * 10**(-alpha0 * L0 / 10)``; every other
photon survives with ``sqrt(eta_r)``.

Randomness is counter-based: trial ``t`` owns a fixed Philox counter
window keyed by the seed, primal draws first and dual draws after.  A
trial's pattern therefore depends only on ``(seed, t, qubit)``, never on
batch size or thread count.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .codes import CssCode
from .decoding import EXACT, ErasurePattern, census_table, recoverable_batch
from .foliation import FoliatedChain, SyndromeSubgraph

ALPHA0_DB_PER_KM = 0.2
THREADS_ENV = "FOLIATED_LINK_THREADS"
BLOCK_TRIALS = 4096

STEANE_COEFFS = {3: 7, 4: 28, 5: 21, 6: 7, 7: 1}


@dataclass(frozen=True)
class LossModel:
    alpha0: float = ALPHA0_DB_PER_KM
    eta_r: float = 1.0
    l0_km: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta_r <= 1.0:
            raise ValueError(f"eta_r must lie in (0, 1], got {self.eta_r}")
        if self.l0_km < 0:
            raise ValueError(f"repeater spacing must be >= 0 km, got {self.l0_km}")
        if self.alpha0 < 0:
            raise ValueError("alpha0 must be >= 0")

    @property
    def channel_transmission(self) -> float:
        return channel_transmission(self.l0_km, self)

    @property
    def internal_transmission(self) -> float:
        return math.sqrt(self.eta_r)

    @property
    def channel_loss(self) -> float:
        return 1.0 - self.channel_transmission

    @property
    def internal_loss(self) -> float:
        return 1.0 - self.internal_transmission


def channel_transmission(L_km: float, model: LossModel) -> float:
    if L_km < 0:
        raise ValueError("distance must be >= 0")
    return model.eta_r * 10.0 ** (-model.alpha0 * L_km / 10.0)


def spacing_for_transmission(eta: float, alpha0: float = ALPHA0_DB_PER_KM) -> float:
    """Fiber length whose attenuation alone gives transmission ``eta``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmission must lie in (0, 1]")
    return -10.0 * math.log10(eta) / alpha0


def loss_probabilities(sub: SyndromeSubgraph, model: LossModel) -> np.ndarray:
    return np.where(sub.channel, model.channel_loss, model.internal_loss)


# random streams -----------------------------------------------------------


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def _blocks_per_trial(width: int) -> int:
    # Philox4x64 emits four doubles per counter step
    return max(1, (width + 3) // 4)


def trial_stream(seed: int, trial: int, width: int) -> np.random.Generator:
    """Generator positioned at the start of ``trial``'s counter window."""
    step = _blocks_per_trial(width)
    return np.random.Generator(np.random.Philox(key=_check_seed(seed), counter=trial * step))


def trial_uniforms(seed: int, start: int, count: int, width: int) -> np.ndarray:
    """Uniforms for trials ``start..start+count-1``, shape ``(count, width)``.

    Row ``i`` equals ``trial_stream(seed, start + i, width).random(width)``.
    """
    step = _blocks_per_trial(width)
    gen = np.random.Generator(np.random.Philox(key=_check_seed(seed), counter=start * step))
    return gen.random(count * step * 4).reshape(count, step * 4)[:, :width]


def sample_erasure(sub: SyndromeSubgraph, model: LossModel, stream: np.random.Generator) -> ErasurePattern:
    u = stream.random(sub.n_qubits)
    return ErasurePattern(sub.label, u < loss_probabilities(sub, model))


def sample_trial(chain: FoliatedChain, model: LossModel, seed: int, trial: int):
    """The (primal, dual) patterns ``estimate_etr`` uses for ``trial``."""
    width = chain.primal.n_qubits + chain.dual.n_qubits
    stream = trial_stream(seed, trial, width)
    return sample_erasure(chain.primal, model, stream), sample_erasure(chain.dual, model, stream)


# estimation ---------------------------------------------------------------


def configure_threads() -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = numba.config.NUMBA_NUM_THREADS
    n = limit if not cap else max(1, min(int(cap), limit))
    numba.set_num_threads(n)
    return n


@dataclass(frozen=True)
class SimResult:
    code: str
    hops: int
    eta_r: float
    l0_km: float
    alpha0: float
    trials: int
    seed: int
    decoder: str
    primal_successes: int
    dual_successes: int
    p_primal: float
    p_dual: float
    eta_eff: float
    stderr_primal: float
    stderr_dual: float
    stderr: float
    # per-logical marginal success rates
    p_primal_logical: list[float] = field(default_factory=list)
    p_dual_logical: list[float] = field(default_factory=list)

    @property
    def eta_eff_logical(self) -> list[float]:
        return [a * b for a, b in zip(self.p_primal_logical, self.p_dual_logical)]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> SimResult:
        return cls(**data)


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def _success_counts(sub, loss, uniforms, decoder):
    """(all-k successes, per-logical successes) for one block of trials."""
    if not np.any(loss > 0):
        t = uniforms.shape[0]
        return t, np.full(sub.k, t, dtype=np.int64)
    erased = uniforms < loss
    rec = recoverable_batch(sub, erased, decoder)
    return int(rec.all(axis=1).sum()), rec.sum(axis=0).astype(np.int64)


def estimate_etr(
    chain: FoliatedChain,
    model: LossModel,
    trials: int,
    seed: int,
    decoder: str = EXACT,
    block: int = BLOCK_TRIALS,
) -> SimResult:
    """Estimate primal/dual success probabilities and their product.

    Success on a subgraph means all k logicals are recoverable.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = _check_seed(seed)
    configure_threads()
    primal, dual = chain.primal, chain.dual
    width = primal.n_qubits + dual.n_qubits
    loss_p = loss_probabilities(primal, model)
    loss_d = loss_probabilities(dual, model)
    k = chain.code.k
    ok_p = ok_d = 0
    per_p = np.zeros(k, dtype=np.int64)
    per_d = np.zeros(k, dtype=np.int64)
    for start in range(0, trials, block):
        count = min(block, trials - start)
        u = trial_uniforms(seed, start, count, width)
        a, pa = _success_counts(primal, loss_p, u[:, : primal.n_qubits], decoder)
        b, pb = _success_counts(dual, loss_d, u[:, primal.n_qubits :], decoder)
        ok_p += a
        ok_d += b
        per_p += pa
        per_d += pb
    p_primal = ok_p / trials
    p_dual = ok_d / trials
    eta = p_primal * p_dual
    return SimResult(
        code=chain.code.name,
        hops=chain.hops,
        eta_r=float(model.eta_r),
        l0_km=float(model.l0_km),
        alpha0=float(model.alpha0),
        trials=int(trials),
        seed=seed,
        decoder=decoder,
        primal_successes=int(ok_p),
        dual_successes=int(ok_d),
        p_primal=p_primal,
        p_dual=p_dual,
        eta_eff=eta,
        stderr_primal=binomial_stderr(p_primal, trials),
        stderr_dual=binomial_stderr(p_dual, trials),
        stderr=binomial_stderr(eta, trials),
        p_primal_logical=[int(c) / trials for c in per_p],
        p_dual_logical=[int(c) / trials for c in per_d],
    )


# closed forms -------------------------------------------------------------


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")


def steane_single_hop_etr(eta: float) -> float:
    """Single-hop ETR of the Steane code with perfect repeaters."""
    _check_eta(eta)
    return sum(a * eta**j * (1.0 - eta) ** (7 - j) for j, a in STEANE_COEFFS.items())


def brute_force_single_hop_etr(code: CssCode, eta: float) -> float:
    """Exact single-hop ETR from the full erasure census (n <= 20)."""
    _check_eta(eta)
    table = census_table(code)
    n = code.n
    return sum(c * eta**j * (1.0 - eta) ** (n - j) for j, c in enumerate(table))

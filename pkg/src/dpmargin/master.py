"""Top-level mechanism: margin grid, candidate assembly, tuner dispatch.

The only data-dependent inputs to candidate construction are the public
quantities n, d and the norm bound; every projection matrix is sampled from
(master seed, candidate index) before the optimizer ever reads a feature.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from ._seeding import JL_SIGNS, child_seed
from .data import Dataset, geometric_margin_oracle, min_outliers_oracle
from .errors import SizeError
from .loss import LossSpec, empirical_risk
from .optimizer import LinearModel, jlgd
from .privacy import (
    compose_gdp,
    master_iter_budget,
    master_tnb_budget,
    per_candidate_budget,
    tnb_tune_privacy,
)
from .projection import IdentityMap, projection_dim, sample_jl
from .tuning import Candidate, ScoreSpec, TnbDist, iter_tune, priv_tune


@dataclass(frozen=True)
class MasterConfig:
    epsilon: float
    delta: float
    tuner: str = "iterate"  # "iterate" | "priv_tune"
    score_kind: str = "empirical_zero_one"
    output_mode: str | None = None  # default depends on score kind
    jl_failure_beta: float | None = None  # default 1/n^2
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.tuner not in ("iterate", "priv_tune"):
            raise ValueError(f"unknown tuner {self.tuner!r}")
        if self.score_kind not in ("empirical_zero_one", "penalized_population"):
            raise ValueError(f"unknown score kind {self.score_kind!r}")
        if self.output_mode not in (None, "averaged", "last_iterate"):
            raise ValueError(f"unknown output mode {self.output_mode!r}")

    def resolved_mode(self) -> str:
        if self.output_mode is not None:
            return self.output_mode
        # empirical score targets the expectation clause (averaged iterate);
        # the penalized score's guarantee is stated for the last iterate.
        return "averaged" if self.score_kind == "empirical_zero_one" else "last_iterate"


@dataclass(frozen=True)
class MasterResult:
    model: LinearModel
    gamma_out: float
    jl_seed_out: int | None
    ledger: dict = field(compare=False)


def margin_grid(n: int, b: float = 1.0) -> list[float]:
    """Doubling grid {b/n, 2b/n, ..., b 2^floor(log2 n)/n} plus b, deduplicated."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not b > 0:
        raise ValueError("b must be positive")
    grid = [b * (2.0**j) / n for j in range(int(math.floor(math.log2(n))) + 1)]
    if grid[-1] != b:  # n a power of two lands exactly on b
        grid.append(b)
    return grid


def build_candidates(n: int, d: int, b: float, beta: float, seed: int) -> list[Candidate]:
    """Sample one data-oblivious projection per grid margin.

    When the formula dimension reaches the ambient dimension, the identity
    map is used: it preserves margins exactly, strictly dominating the
    probabilistic guarantee, and keeps small-margin candidates computable.
    """
    grid = margin_grid(n, b)
    candidates = []
    for idx, gamma in enumerate(grid):
        k = projection_dim(gamma, n, len(grid), beta, b)
        if k >= d:
            phi = IdentityMap(d)
        else:
            phi = sample_jl(k, d, child_seed(seed, JL_SIGNS, idx))
        candidates.append(Candidate(gamma=gamma, phi=phi))
    return candidates


def dp_adaptive_margin(dataset: Dataset, cfg: MasterConfig) -> MasterResult:
    """Train a private linear classifier adapting to the best margin/outlier
    trade-off; needs only the dataset and the (epsilon, delta) budget.

    Every candidate's base run is the projected noisy descent at hinge
    parameter gamma/3.  The ledger states exactly the guarantee the chosen
    tuner grants: (eps, delta)-DP for the brute-force sweep,
    (eps + delta, delta)-DP for the advanced tuner.
    """
    n, d, b = dataset.n, dataset.dim, dataset.norm_bound
    if n < 2:
        raise ValueError("need n >= 2")
    norms = np.linalg.norm(dataset.features, axis=1)
    if norms.max() > b * (1 + 1e-12):
        raise ValueError("dataset is not clipped to its norm bound; run clip_norms")
    beta = cfg.jl_failure_beta if cfg.jl_failure_beta is not None else 1.0 / (n * n)
    candidates = build_candidates(n, d, b, beta, cfg.seed)
    grid_size = len(candidates)
    mode = cfg.resolved_mode()
    spec = ScoreSpec(cfg.score_kind)

    def base(candidate: Candidate, mu_run: float, run_seed: int) -> LinearModel:
        # gamma/3 is the margin-preservation target; hard-wired in master mode.
        model = jlgd(candidate.phi, candidate.gamma / 3.0, dataset, mu_run,
                     mode=mode, seed=run_seed)
        prov = dataclasses.replace(model.provenance, gamma=candidate.gamma)
        return LinearModel(model.weights, model.dim, prov)

    if cfg.tuner == "iterate":
        mu = master_iter_budget(cfg.epsilon, cfg.delta)
        model, winner = iter_tune(base, candidates, dataset, mu, spec,
                                  seed=cfg.seed, threads=cfg.threads)
        base_mu, noise_unit = per_candidate_budget(mu, grid_size)
        ledger = {
            "tuner": "iterate",
            "grid_size": grid_size,
            "mu": mu,
            "per_candidate_mu": base_mu,
            "score_noise_std": spec.sensitivity * noise_unit,
            "composed_mu": compose_gdp([base_mu] * (2 * grid_size)),
            "epsilon": cfg.epsilon,
            "delta": cfg.delta,
            "guarantee": f"({cfg.epsilon:g}, {cfg.delta:g})-DP",
        }
    else:
        mu, r = master_tnb_budget(cfg.epsilon, cfg.delta, grid_size, n)
        dist = TnbDist(eta=1.0, r=r)
        model, winner = priv_tune(base, candidates, dist, dataset, mu, spec,
                                  seed=cfg.seed, threads=cfg.threads)
        eps_total = tnb_tune_privacy(mu, r, cfg.delta, simplified=True)
        ledger = {
            "tuner": "priv_tune",
            "grid_size": grid_size,
            "mu": mu,
            "tnb_r": r,
            "per_run_mu": mu / math.sqrt(2.0),
            "score_noise_std": spec.sensitivity * math.sqrt(2.0) / mu,
            "epsilon": eps_total,
            "delta": cfg.delta,
            "guarantee": f"({eps_total:g}, {cfg.delta:g})-DP"
                         f" (= (epsilon + delta, delta) at epsilon = {cfg.epsilon:g})",
        }
    ledger["score_kind"] = cfg.score_kind
    ledger["output_mode"] = mode
    return MasterResult(model=model, gamma_out=winner.gamma,
                        jl_seed_out=winner.phi.seed, ledger=ledger)


def grid_competitiveness_check(dataset: Dataset, epsilon: float, tol: float = 1e-6) -> float:
    """Ratio of the doubling-grid objective minimum to the continuous one.

    Objective: |S_out|/(n gamma) + 1/(n gamma^2 epsilon), grid side evaluated
    through the exhaustive outlier oracle, continuous side over every removal
    subset with gamma the exact margin of the remainder.  Exhaustive: n <= 12.
    """
    n = dataset.n
    if n > 12:
        raise SizeError(f"competitiveness check capped at n=12, got {n}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")

    def objective(removed: int, gamma: float) -> float:
        return removed / (n * gamma) + 1.0 / (n * gamma * gamma * epsilon)

    grid_min = math.inf
    for gamma in margin_grid(n, dataset.norm_bound):
        count, _ = min_outliers_oracle(dataset, gamma, tol)
        grid_min = min(grid_min, objective(count, gamma))

    continuous_min = math.inf
    for mask in range(2**n - 1):  # mask encodes the removed set; keep >= 1 point
        keep = [i for i in range(n) if not (mask >> i) & 1]
        gamma = geometric_margin_oracle(dataset.subset(keep), tol)
        if gamma > tol:
            continuous_min = min(continuous_min, objective(n - len(keep), gamma))
    return grid_min / continuous_min


def model_to_json(result: MasterResult, cfg: MasterConfig) -> str:
    """Serialize (model + provenance + ledger); honours SOURCE_DATE_EPOCH."""
    stamp = int(os.environ.get("SOURCE_DATE_EPOCH", time.time()))
    prov = result.model.provenance
    doc = {
        "weights": [float(v) for v in result.model.weights],
        "d": result.model.dim,
        "gamma_out": result.gamma_out,
        "k": prov.k,
        "jl_seed": result.jl_seed_out,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "tuner": cfg.tuner,
        "score_kind": cfg.score_kind,
        "output_mode": cfg.resolved_mode(),
        "ledger": result.ledger,
        "timestamps": {"created_unix": stamp},
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def model_from_json(text: str) -> tuple[LinearModel, dict]:
    doc = json.loads(text)
    from .optimizer import Provenance

    prov = Provenance(gamma=doc.get("gamma_out"), jl_seed=doc.get("jl_seed"),
                      k=doc.get("k"), output_mode=doc.get("output_mode"))
    model = LinearModel(np.asarray(doc["weights"], dtype=np.float64), int(doc["d"]), prov)
    return model, doc


def training_risk(model: LinearModel, dataset: Dataset) -> float:
    """Averaged zero-one risk, the quantity the train command reports."""
    return empirical_risk(model.weights, dataset, LossSpec("zero_one"), "averaged")

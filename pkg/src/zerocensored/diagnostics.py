"""Simulation from a fitted model and the zero-count goodness-of-fit diagnostic.

Draws come from the latent normal, are mapped back through the exponent-one
transform, and out-of-simplex draws are pulled onto a face, exactly as the
model censors.  The diagnostic compares observed per-component zero counts
against Monte Carlo expectations under the fitted model, with a chi-square
discrepancy and an optional simulated p-value.

Determinism contract: every public operation takes an integer seed.  Rate
estimation runs in chunks of ``chunk_size`` latent draws; the chunk
generators are ``SeedSequence(seed).spawn(n_chunks)``, so the same seed with
the same chunk count reproduces results exactly (and chunks may be evaluated
in parallel without changing them).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dataset import CompositionalDataset
from .gaussian import MvnParams
from .geometry import TiedMinimumError
from .likelihood import FittedModel
from .simplex import inverse_alpha_transform

DEFAULT_CHUNK_SIZE = 1 << 17
#: Expected counts below this are pooled into a single leftover cell.
CHI_SQUARE_FLOOR = 0.5
MIN_RATE_SIMS = 10_000


def _latent_to_parts(latent: np.ndarray) -> np.ndarray:
    parts, _ = inverse_alpha_transform(latent, 1.0)
    return parts


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def _project_rows(parts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized boundary pull for rows with a negative part; returns (parts, zero_index)."""
    n_parts = parts.shape[1]
    mins = parts.min(axis=1)
    outside = mins < 0.0
    if outside.any():
        ties = (parts[outside] == mins[outside, None]).sum(axis=1) > 1
        if ties.any():
            raise TiedMinimumError("tied minimum parts in a simulated draw; cannot project")
        scale = 1.0 / (1.0 - n_parts * mins[outside])
        centre = 1.0 / n_parts
        pulled = centre + scale[:, None] * (parts[outside] - centre)
        idx = parts[outside].argmin(axis=1)
        pulled[np.arange(pulled.shape[0]), idx] = 0.0
        parts = parts.copy()
        parts[outside] = pulled
    zero_index = np.full(parts.shape[0], -1, dtype=int)
    zero_index[outside] = parts[outside].argmin(axis=1)
    exact = (~outside) & (mins == 0.0)
    if exact.any():
        zero_index[exact] = parts[exact].argmin(axis=1)
    return parts, zero_index


def simulate_compositions(n: int, model: MvnParams, n_parts: int, seed) -> CompositionalDataset:
    """Draw n compositions from the zero-censored model: latent normal, inverse transform, boundary pull."""
    if model.dim != n_parts - 1:
        raise ValueError(f"model dimension {model.dim} does not match {n_parts} parts")
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    d = model.dim
    rng = np.random.default_rng(seed)
    latent = model.mean + rng.standard_normal((int(n), d)) @ model.chol.T
    parts, zero_index = _project_rows(_latent_to_parts(latent))
    return CompositionalDataset(parts=parts, zero_index=zero_index)


def _zero_counts_for_draws(model: MvnParams, n_parts: int, n_draws: int, rng) -> np.ndarray:
    latent = model.mean + rng.standard_normal((n_draws, model.dim)) @ model.chol.T
    parts = _latent_to_parts(latent)
    mins = parts.min(axis=1)
    boundary = mins <= 0.0
    if not boundary.any():
        return np.zeros(n_parts, dtype=np.int64)
    sub = parts[boundary]
    if np.any((sub == mins[boundary, None]).sum(axis=1) > 1):
        raise TiedMinimumError("tied minimum parts in a simulated draw; cannot project")
    return np.bincount(sub.argmin(axis=1), minlength=n_parts).astype(np.int64)


def zero_rates(
    model: MvnParams,
    n_parts: int,
    n_sims: int,
    seed,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """Monte Carlo probability that a draw lands with its zero in component j, for each j.

    The rates sum to the overall boundary probability, which is at most 1.
    """
    if model.dim != n_parts - 1:
        raise ValueError(f"model dimension {model.dim} does not match {n_parts} parts")
    if n_sims < MIN_RATE_SIMS:
        raise ValueError(f"need at least {MIN_RATE_SIMS} simulations, got {n_sims}")
    n_chunks = math.ceil(n_sims / chunk_size)
    children = _seed_sequence(seed).spawn(n_chunks)
    counts = np.zeros(n_parts, dtype=np.int64)
    remaining = int(n_sims)
    for child in children:
        m = min(chunk_size, remaining)
        counts += _zero_counts_for_draws(model, n_parts, m, np.random.default_rng(child))
        remaining -= m
    return counts / float(n_sims)


@dataclass(frozen=True)
class ZeroDiagnostics:
    """Observed versus model-expected zero counts per component.

    ``observed_*``, ``chi_square`` and ``mc_pvalue`` are None when the
    diagnostic was built without data (expected side only).
    """

    expected_rates: np.ndarray
    expected_counts: np.ndarray
    n_observations: int
    n_sims: int
    seed: int
    names: tuple[str, ...] | None = None
    observed_counts: np.ndarray | None = None
    observed_rates: np.ndarray | None = None
    chi_square: float | None = None
    mc_pvalue: float | None = None
    n_replicates: int | None = None

    def to_dict(self) -> dict:
        def listify(a):
            return None if a is None else [float(v) for v in a]

        return {
            "names": list(self.names) if self.names is not None else None,
            "observed_counts": None
            if self.observed_counts is None
            else [int(v) for v in self.observed_counts],
            "expected_counts": listify(self.expected_counts),
            "observed_rates": listify(self.observed_rates),
            "expected_rates": listify(self.expected_rates),
            "chi_square": None if self.chi_square is None else float(self.chi_square),
            "mc_pvalue": None if self.mc_pvalue is None else float(self.mc_pvalue),
            "n_observations": int(self.n_observations),
            "n_sims": int(self.n_sims),
            "n_replicates": None if self.n_replicates is None else int(self.n_replicates),
            "seed": int(self.seed),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def table_text(self) -> str:
        """Aligned component/observed/estimated table (the classic zero-count layout)."""
        n_parts = self.expected_counts.size
        names = self.names if self.names is not None else tuple(f"comp{i + 1}" for i in range(n_parts))
        observed = (
            ["-"] * n_parts
            if self.observed_counts is None
            else [str(int(v)) for v in self.observed_counts]
        )
        estimated = [f"{v:.3f}" for v in self.expected_counts]
        rows = [
            ["Components", *names],
            ["Observed zeros", *observed],
            ["Estimated zeros", *estimated],
        ]
        widths = [max(len(row[j]) for row in rows) for j in range(n_parts + 1)]
        lines = ["  ".join(cell.rjust(widths[j]) for j, cell in enumerate(row)) for row in rows]
        return "\n".join(lines)


def expected_zero_table(model: FittedModel, n_obs: int, n_sims: int, seed, *, names=None) -> ZeroDiagnostics:
    """Expected zero counts for a sample of size n_obs under the fitted model."""
    if n_obs < 0:
        raise ValueError(f"need n_obs >= 0, got {n_obs}")
    rates = zero_rates(model.params, model.n_parts, n_sims, seed)
    return ZeroDiagnostics(
        expected_rates=rates,
        expected_counts=n_obs * rates,
        n_observations=int(n_obs),
        n_sims=int(n_sims),
        seed=seed if isinstance(seed, int) else -1,
        names=tuple(names) if names is not None else None,
    )


def chi_square_discrepancy(observed, expected, *, floor: float = CHI_SQUARE_FLOOR) -> float:
    """Sum of (obs - exp)^2 / exp over components, pooling sparse cells.

    Components with expected count below ``floor`` are pooled into a single
    leftover cell so the statistic stays defined for sparse tables.  A
    leftover cell with zero expectation contributes 0 when its observed count
    is also zero and +inf otherwise (an observation the model calls
    impossible).
    """
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape or obs.ndim != 1 or obs.size == 0:
        raise ValueError("observed and expected must be equal-length non-empty vectors")
    if np.any(exp < 0.0):
        raise ValueError("expected counts must be non-negative")
    keep = exp >= floor
    stat = float(np.sum((obs[keep] - exp[keep]) ** 2 / exp[keep]))
    pooled_obs = float(obs[~keep].sum())
    pooled_exp = float(exp[~keep].sum())
    if pooled_exp > 0.0:
        stat += (pooled_obs - pooled_exp) ** 2 / pooled_exp
    elif pooled_obs > 0.0:
        return math.inf
    return stat


def mc_pvalue(
    model: FittedModel,
    observed,
    n_obs: int,
    n_replicates: int,
    n_sims: int,
    seed,
) -> float:
    """Simulated p-value for the zero-count discrepancy, add-one convention.

    Replicate datasets of size n_obs are drawn from the fitted model; each is
    scored with ``chi_square_discrepancy`` against the model's expected table,
    and the p-value is (1 + #{replicate >= observed}) / (n_replicates + 1).
    Seed stream: child 0 of ``SeedSequence(seed)`` estimates the expected
    table, children 1..R drive the replicates.
    """
    if n_replicates < 99:
        raise ValueError(f"need at least 99 replicates, got {n_replicates}")
    observed = np.asarray(observed, dtype=float)
    n_parts = model.n_parts
    if observed.shape != (n_parts,):
        raise ValueError(f"observed counts must have length {n_parts}")
    children = _seed_sequence(seed).spawn(n_replicates + 1)
    rates = zero_rates(model.params, n_parts, n_sims, children[0])
    expected = n_obs * rates
    observed_stat = chi_square_discrepancy(observed, expected)
    exceed = 0
    params = model.params
    for child in children[1:]:
        counts = _zero_counts_for_draws(params, n_parts, int(n_obs), np.random.default_rng(child))
        if chi_square_discrepancy(counts, expected) >= observed_stat:
            exceed += 1
    return (1 + exceed) / (n_replicates + 1)


def diagnose(
    model: FittedModel,
    dataset: CompositionalDataset,
    *,
    n_sims: int,
    seed,
    n_replicates: int | None = None,
) -> ZeroDiagnostics:
    """Full zero-count diagnostic of a dataset against a fitted model."""
    if dataset.n_parts != model.n_parts:
        raise ValueError(
            f"dataset has {dataset.n_parts} components but the model expects {model.n_parts}"
        )
    table = expected_zero_table(model, dataset.n_obs, n_sims, seed, names=dataset.names)
    observed = dataset.observed_zero_counts()
    stat = chi_square_discrepancy(observed, table.expected_counts)
    pvalue = None
    if n_replicates is not None:
        pvalue = mc_pvalue(model, observed, dataset.n_obs, n_replicates, n_sims, seed)
    return ZeroDiagnostics(
        expected_rates=table.expected_rates,
        expected_counts=table.expected_counts,
        n_observations=dataset.n_obs,
        n_sims=int(n_sims),
        seed=seed if isinstance(seed, int) else -1,
        names=dataset.names,
        observed_counts=observed,
        observed_rates=observed / max(dataset.n_obs, 1),
        chi_square=stat,
        mc_pvalue=pvalue,
        n_replicates=n_replicates,
    )

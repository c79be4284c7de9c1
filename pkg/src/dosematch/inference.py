"""Randomization inference for the cluster-level sharp null.

The test statistic is the double rank sum: with q1 the global midranks of all
N doses and q2 the global midranks of all N aggregate responses,

    T = (1/N^2) * sum_k sum_j q1(Z_kj) * q2(R_kj.)

Under the sharp null the responses are fixed and the doses are uniformly and
independently permuted within each matched set; the reference distribution is
enumerated exhaustively when the permutation group is small (<= 10^6
assignments) and sampled otherwise (the "modified" test, which preserves the
level). The p-value uses the add-one convention, so it is exact under
sampling and always lies in (0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import permutations

import numpy as np
from scipy.stats import rankdata

from .errors import DimensionMismatch, EmptyCluster

__all__ = [
    "Alternative",
    "ClusteredStudy",
    "TestResult",
    "aggregate_clusters",
    "double_rank_statistic",
    "randomization_test",
    "EXHAUSTIVE_LIMIT",
]

EXHAUSTIVE_LIMIT = 10**6


class Alternative(Enum):
    LESS = "less"  # reject for small T: negative dose-response association
    GREATER = "greater"


@dataclass(frozen=True)
class ClusteredStudy:
    """K matched sets of clusters, each with a dose and an aggregate response.

    ``sets`` is a tuple of matched sets; each set is a tuple of
    (cluster_id, dose, aggregate_response) triples, at least two per set.
    """

    sets: tuple[tuple[tuple[str, float, float], ...], ...]

    def __post_init__(self):
        if not self.sets:
            raise DimensionMismatch("study must contain at least one matched set")
        for k, s in enumerate(self.sets):
            if len(s) < 2:
                raise DimensionMismatch(f"matched set {k} has fewer than 2 clusters")
            for cid, z, r in s:
                if not (np.isfinite(z) and np.isfinite(r)):
                    raise DimensionMismatch(f"non-finite dose/response in cluster {cid!r}")

    @property
    def n(self) -> int:
        return sum(len(s) for s in self.sets)

    def flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Doses, responses, and set offsets (length K+1) in input order."""
        doses = np.array([z for s in self.sets for (_, z, _) in s])
        resp = np.array([r for s in self.sets for (_, _, r) in s])
        offsets = np.cumsum([0] + [len(s) for s in self.sets])
        return doses, resp, offsets


@dataclass(frozen=True)
class TestResult:
    t_obs: float
    reference_draws: np.ndarray
    p_value: float
    draws: int
    seed: int
    alternative: Alternative
    exhaustive: bool

    def to_dict(self) -> dict:
        return {
            "t_obs": self.t_obs,
            "p_value": self.p_value,
            "draws": self.draws,
            "seed": self.seed,
            "alternative": self.alternative.value,
            "exhaustive": self.exhaustive,
        }


def aggregate_clusters(records) -> dict[str, float]:
    """Mean response per cluster from (cluster_id, response) records.

    With one record per cluster this reduces to the non-clustered case.
    """
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for cid, r in records:
        cid = str(cid)
        sums[cid] = sums.get(cid, 0.0) + float(r)
        counts[cid] = counts.get(cid, 0) + 1
    if not sums:
        raise EmptyCluster("no records to aggregate")
    return {cid: sums[cid] / counts[cid] for cid in sums}


def _midranks(x: np.ndarray) -> np.ndarray:
    return rankdata(x, method="average")


def double_rank_statistic(s: ClusteredStudy) -> float:
    doses, resp, _ = s.flat()
    n = doses.size
    q1 = _midranks(doses)
    q2 = _midranks(resp)
    return float(q1 @ q2) / (n * n)


def _group_size(offsets: np.ndarray) -> float:
    """Number of distinct within-set dose assignments, prod n_k! (may be huge)."""
    total = 1.0
    for k in range(offsets.size - 1):
        total *= math.factorial(int(offsets[k + 1] - offsets[k]))
        if total > 1e18:
            return total
    return total


def _exhaustive_distribution(q1: np.ndarray, q2: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """All values of sum q1(perm) * q2 over the full within-set permutation group.

    The statistic separates over sets, so the distribution is the convolution
    of per-set contribution lists (product order; deterministic).
    """
    totals = np.zeros(1)
    for k in range(offsets.size - 1):
        lo, hi = int(offsets[k]), int(offsets[k + 1])
        q1s, q2s = q1[lo:hi], q2[lo:hi]
        contribs = np.array([sum(a * b for a, b in zip(p, q2s)) for p in permutations(q1s)])
        totals = (totals[:, None] + contribs[None, :]).ravel()
    return totals


def randomization_test(
    s: ClusteredStudy,
    draws: int = 100000,
    seed: int = 0,
    alternative: Alternative = Alternative.LESS,
) -> TestResult:
    """Exact or Monte Carlo randomization test of the sharp null.

    Responses stay fixed; doses are independently uniformly permuted within
    each matched set. Exhaustive enumeration is used when the group has at
    most 10^6 elements, otherwise ``draws`` sampled assignments (per-set RNG
    substreams split from ``seed``, so results are thread-count independent).
    """
    if draws < 1:
        raise DimensionMismatch(f"draws must be >= 1, got {draws}")
    doses, resp, offsets = s.flat()
    n = doses.size
    q1 = _midranks(doses)
    q2 = _midranks(resp)
    t_obs_raw = float(q1 @ q2)

    exhaustive = _group_size(offsets) <= EXHAUSTIVE_LIMIT
    if exhaustive:
        ref_raw = _exhaustive_distribution(q1, q2, offsets)
    else:
        children = np.random.SeedSequence(seed).spawn(offsets.size - 1)
        ref_raw = np.zeros(draws)
        for k in range(offsets.size - 1):
            lo, hi = int(offsets[k]), int(offsets[k + 1])
            rng = np.random.default_rng(children[k])
            keys = rng.random((draws, hi - lo))
            idx = np.argsort(keys, axis=1, kind="stable")
            ref_raw += q1[lo:hi][idx] @ q2[lo:hi]

    m = ref_raw.size
    if alternative is Alternative.GREATER:
        count = int(np.sum(ref_raw >= t_obs_raw))
    else:
        count = int(np.sum(ref_raw <= t_obs_raw))
    p = (1 + count) / (1 + m)
    return TestResult(
        t_obs=t_obs_raw / (n * n),
        reference_draws=ref_raw / (n * n),
        p_value=p,
        draws=m,
        seed=seed,
        alternative=alternative,
        exhaustive=exhaustive,
    )

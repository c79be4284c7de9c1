"""Match-quality measures: pairwise and star homogeneity, weighted summaries,
dose separation, covariate balance, and brute-force oracles for small instances.

Conventions fixed here (the source text leaves them open):

* Quantiles use numpy's default linear interpolation (type 7).
* HM1/HM3 are plain averages over subclasses; HM2/HM4 use size-proportional
  weights (|subclass| - 1) normalized to sum to 1. The *unnormalized*
  size-proportional sum is what the optimizer minimizes, and is returned by
  :func:`weighted_measure` with the SUIT scheme.
* The covariate-balance measure SS averages per-subclass (high-dose mean -
  low-dose mean) differences over subclasses, per covariate, then sums the
  squares over covariates. Before matching the whole sample is one group
  split at the overall median dose.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distances import DistanceMatrix, UnitTable
from .errors import AbsentDistance, EmptySide, RefNotMember, TooLarge
from .subclassification import Subclass, Subclassification

__all__ = [
    "WeightingScheme",
    "Measure",
    "HomogeneityReport",
    "nu",
    "nu_star",
    "nu_star_min",
    "weighted_measure",
    "mu_dose",
    "balance_ss",
    "prematch_balance_ss",
    "mean_pairwise_distance",
    "brute_force_optimum",
    "report",
]


class WeightingScheme(Enum):
    CONST = "const"  # w(subclass) proportional to 1
    SUIT = "suit"  # w(subclass) = |subclass| - 1


class Measure(Enum):
    NU = "nu"  # average pairwise distance
    NU_STAR = "nu_star"  # average reference-to-member distance
    NU_STAR_MIN = "nu_star_min"  # best-reference star homogeneity


def _check_present(val: float, i: int, j: int) -> float:
    if np.isnan(val):
        raise AbsentDistance(f"distance ({i}, {j}) is absent (forbidden pair)")
    return float(val)


def _pair_sum(members: tuple[int, ...], dm: DistanceMatrix) -> float:
    """Sum of distances over unordered within-subclass pairs."""
    total = 0.0
    for i, j in itertools.combinations(members, 2):
        total += _check_present(dm.values[i, j], i, j)
    return total


def _star_sum(members: tuple[int, ...], ref: int, dm: DistanceMatrix) -> float:
    """Sum of distances from the reference to every other member."""
    total = 0.0
    for j in members:
        if j != ref:
            total += _check_present(dm.values[ref, j], ref, j)
    return total


def nu(subclass: Subclass | tuple[int, ...], dm: DistanceMatrix) -> float:
    """Average pairwise homogeneity: mean distance over ordered pairs."""
    members = subclass.members if isinstance(subclass, Subclass) else tuple(subclass)
    m = len(members)
    return 2.0 * _pair_sum(members, dm) / (m * (m - 1))


def nu_star(subclass: Subclass | tuple[int, ...], ref: int, dm: DistanceMatrix) -> float:
    """Star homogeneity: mean distance from the reference unit to the others."""
    members = subclass.members if isinstance(subclass, Subclass) else tuple(subclass)
    if ref not in members:
        raise RefNotMember(f"reference {ref} not in subclass {members}")
    return _star_sum(members, ref, dm) / (len(members) - 1)


def nu_star_min(subclass: Subclass | tuple[int, ...], dm: DistanceMatrix) -> tuple[float, int]:
    """Best-reference star homogeneity and its minimizer (lowest index on ties)."""
    members = subclass.members if isinstance(subclass, Subclass) else tuple(subclass)
    best = np.inf
    best_ref = -1
    for ref in sorted(members):
        val = _star_sum(members, ref, dm) / (len(members) - 1)
        if val < best:
            best = val
            best_ref = ref
    return float(best), best_ref


def weighted_measure(
    pi: Subclassification,
    dm: DistanceMatrix,
    scheme: WeightingScheme,
    measure: Measure,
    lam: float | None = None,
) -> float:
    """Weighted sum of a per-subclass homogeneity measure.

    CONST normalizes weights to sum to 1 (an average over subclasses). SUIT
    uses the raw weights |subclass| - 1, the optimization objective: under it
    the star measure equals the cost of the induced star edge cover. When
    ``lam`` is given, adds lam * sum(|subclass| - 2) (the cardinality
    penalty); lam=0 is a no-op.
    """
    terms = []
    for s in pi.subclasses:
        m = s.size
        if measure is Measure.NU:
            raw = 2.0 * _pair_sum(s.members, dm) / m  # (m-1) * nu
        elif measure is Measure.NU_STAR:
            raw = _star_sum(s.members, s.reference, dm)  # (m-1) * nu_star
        else:
            raw = min(_star_sum(s.members, r, dm) for r in s.members)
        terms.append((m, raw))
    if scheme is WeightingScheme.CONST:
        total = sum(raw / (m - 1) for m, raw in terms) / len(terms)
    else:
        # raw is already (m - 1) * per-subclass value; summing keeps exact
        # float equality with edge-cover costs for exactly representable inputs
        total = sum(raw for _, raw in terms)
    if lam is not None:
        total += lam * sum(m - 2 for m, _ in terms)
    return float(total)


def mu_dose(subclass: Subclass | tuple[int, ...], ref: int, z: np.ndarray) -> float:
    """Average absolute dose difference between the reference and the leaves."""
    members = subclass.members if isinstance(subclass, Subclass) else tuple(subclass)
    if ref not in members:
        raise RefNotMember(f"reference {ref} not in subclass {members}")
    z = np.asarray(z, dtype=np.float64)
    leaves = [j for j in members if j != ref]
    return float(np.mean([abs(z[ref] - z[j]) for j in leaves]))


def _high_low_means(doses: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Covariate means of the >=median-dose and <median-dose groups."""
    med = np.median(doses)
    high = doses >= med
    if not high.any() or high.all():
        raise EmptySide("median split produced an empty dose group")
    return x[high].mean(axis=0), x[~high].mean(axis=0)


def balance_ss(pi: Subclassification, u: UnitTable) -> float:
    """Overall covariate balance: per covariate, average over subclasses of the
    (high-dose mean - low-dose mean) difference; SS is the sum of squares."""
    diffs = np.zeros(u.d)
    for s in pi.subclasses:
        idx = np.array(s.members)
        hi, lo = _high_low_means(u.dose[idx], u.covariates[idx])
        diffs += hi - lo
    diffs /= len(pi.subclasses)
    return float(np.sum(diffs**2))


def prematch_balance_ss(u: UnitTable) -> float:
    """SS before matching: the whole sample split at the overall median dose."""
    hi, lo = _high_low_means(u.dose, u.covariates)
    return float(np.sum((hi - lo) ** 2))


def mean_pairwise_distance(dm: DistanceMatrix) -> float:
    """Mean of all off-diagonal present distances (pre-match summary)."""
    v = dm.values[np.triu_indices(dm.n, 1)]
    v = v[~np.isnan(v)]
    return float(v.mean())


def _partitions_min2(items: tuple[int, ...]):
    """All partitions of ``items`` into blocks of size >= 2, deterministically."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for r in range(1, len(rest) + 1):
        if len(rest) - r == 1:
            continue  # would strand a singleton
        for combo in itertools.combinations(rest, r):
            block = (first,) + combo
            remaining = tuple(x for x in rest if x not in combo)
            for sub in _partitions_min2(remaining):
                yield (block,) + sub


def brute_force_optimum(
    dm: DistanceMatrix,
    scheme: WeightingScheme,
    measure: Measure,
    lam: float = 0.0,
    max_n: int = 8,
) -> tuple[Subclassification, float]:
    """Exhaustive minimizer over all partitions into blocks >= 2 (and, for the
    star measures, all reference choices). Oracle for the optimality claims."""
    n = dm.n
    if n > max_n:
        raise TooLarge(f"brute force limited to {max_n} units, got {n}")
    best_val = np.inf
    best_pi: Subclassification | None = None
    for part in _partitions_min2(tuple(range(n))):
        subclasses = []
        for block in part:
            if measure is Measure.NU:
                ref = block[0]
            else:
                _, ref = nu_star_min(block, dm)
            subclasses.append(Subclass(block, reference=ref))
        pi = Subclassification(tuple(subclasses), unit_count=n)
        val = weighted_measure(pi, dm, scheme, measure, lam=lam)
        if val < best_val:
            best_val = val
            best_pi = pi
    if best_pi is None:
        raise TooLarge(f"no partition into blocks >= 2 exists for {n} units")
    return best_pi, float(best_val)


@dataclass(frozen=True)
class HomogeneityReport:
    """Summary of a match: pairwise-homogeneity quantiles, the four weighted
    homogeneity measures, dose-separation quantiles, balance, and set count."""

    nu_q25: float
    nu_q50: float
    nu_q75: float
    nu_q90: float
    hm1: float
    hm2: float
    hm3: float
    hm4: float
    mu_min: float
    mu_q25: float
    mu_q50: float
    mu_q75: float
    ss: float
    set_count: int

    def to_dict(self) -> dict:
        return {
            "nu_quantiles": {"25": self.nu_q25, "50": self.nu_q50, "75": self.nu_q75, "90": self.nu_q90},
            "hm1": self.hm1,
            "hm2": self.hm2,
            "hm3": self.hm3,
            "hm4": self.hm4,
            "mu_quantiles": {"min": self.mu_min, "25": self.mu_q25, "50": self.mu_q50, "75": self.mu_q75},
            "ss": self.ss,
            "set_count": self.set_count,
        }


def report(pi: Subclassification, dm_cov: DistanceMatrix, u: UnitTable) -> HomogeneityReport:
    """Assemble the full quality report for a subclassification.

    ``dm_cov`` must be the covariate-only (un-penalized) distance matrix: the
    report describes covariate homogeneity, not the penalized objective.
    """
    nus = np.array([nu(s, dm_cov) for s in pi.subclasses])
    star_mins = np.array([nu_star_min(s, dm_cov)[0] for s in pi.subclasses])
    sizes = np.array([s.size for s in pi.subclasses], dtype=np.float64)
    wsuit = (sizes - 1) / (sizes - 1).sum()
    mus = np.array([mu_dose(s, s.reference, u.dose) for s in pi.subclasses])
    q = np.quantile
    return HomogeneityReport(
        nu_q25=float(q(nus, 0.25)),
        nu_q50=float(q(nus, 0.50)),
        nu_q75=float(q(nus, 0.75)),
        nu_q90=float(q(nus, 0.90)),
        hm1=float(nus.mean()),
        hm2=float((wsuit * nus).sum()),
        hm3=float(star_mins.mean()),
        hm4=float((wsuit * star_mins).sum()),
        mu_min=float(mus.min()),
        mu_q25=float(q(mus, 0.25)),
        mu_q50=float(q(mus, 0.50)),
        mu_q75=float(q(mus, 0.75)),
        ss=balance_ss(pi, u),
        set_count=len(pi),
    )

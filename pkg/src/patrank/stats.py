"""Paired bootstrap significance testing and adjacency tier grouping.

The p-value is the fraction of resamples in which the declared higher-mean
system fails to beat the other, i.e. resampled mean difference <= 0. Exact
ties count toward p (conservative: identical systems come out p = 1.0).
p-values below resolution are printed as "< 1/B", never 0; the Bonferroni
footnote (alpha / number of comparisons) is reported but markers stay
uncorrected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, PairingError

#: Significance markers, strict thresholds.
MARKERS = (("***", 0.001), ("**", 0.01), ("*", 0.05))

_BLOCK = 512  # resamples per chunk; fixed so the RNG stream is reproducible


def marker_for(p: float) -> str:
    for mark, threshold in MARKERS:
        if p < threshold:
            return mark
    return "n.s."


@dataclass(frozen=True)
class BootstrapResult:
    mean_a: float
    mean_b: float
    diff: float
    p_value: float
    B: int
    seed: int
    n: int

    @property
    def marker(self) -> str:
        return marker_for(self.p_value)

    @property
    def p_str(self) -> str:
        """Display form; zero counts are reported below resolution."""
        if self.p_value == 0.0:
            return f"<{1.0 / self.B:g}"
        return f"{self.p_value:.4f}"


def _paired(scores_a: Sequence[float], scores_b: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise PairingError(f"score vectors must be 1-D and equal length, got {a.shape} vs {b.shape}")
    if a.shape[0] < 2:
        raise PairingError(f"need at least 2 paired scores, got {a.shape[0]}")
    return a, b


def paired_bootstrap(scores_a: Sequence[float], scores_b: Sequence[float], B: int = 10000, seed: int = 42) -> BootstrapResult:
    """Resample per-query score pairs B times with replacement; p is the
    fraction of resamples with mean(a) - mean(b) <= 0."""
    a, b = _paired(scores_a, scores_b)
    if B < 1:
        raise ConfigError(f"B must be >= 1, got {B}")
    d = a - b
    n = d.shape[0]
    rng = np.random.default_rng(seed)
    at_or_below = 0
    done = 0
    while done < B:
        m = min(_BLOCK, B - done)
        idx = rng.integers(0, n, size=(m, n))
        means = d[idx].mean(axis=1)
        at_or_below += int((means <= 0.0).sum())
        done += m
    return BootstrapResult(
        mean_a=float(a.mean()),
        mean_b=float(b.mean()),
        diff=float(a.mean() - b.mean()),
        p_value=at_or_below / B,
        B=B,
        seed=seed,
        n=n,
    )


def bootstrap_ci(scores: Sequence[float], B: int = 10000, level: float = 0.95, seed: int = 42) -> tuple[float, float]:
    """Percentile confidence interval of the resampled mean."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.shape[0] < 2:
        raise PairingError(f"need at least 2 scores, got shape {s.shape}")
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must be in (0, 1), got {level}")
    rng = np.random.default_rng(seed)
    n = s.shape[0]
    means = np.empty(B)
    done = 0
    while done < B:
        m = min(_BLOCK, B - done)
        idx = rng.integers(0, n, size=(m, n))
        means[done : done + m] = s[idx].mean(axis=1)
        done += m
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [tail, 1.0 - tail])
    return float(lo), float(hi)


def tier_group(
    systems: Sequence[tuple[str, Sequence[float]]],
    alpha: float = 0.05,
    B: int = 10000,
    seed: int = 42,
) -> list[list[str]]:
    """Group adjacent statistically indistinguishable systems into tiers.

    Input must already be sorted by mean, descending. A new tier starts
    wherever the adjacent paired bootstrap rejects at ``alpha``. Adjacency
    chaining is not a transitive equivalence relation, so tiers are
    presentation aids, not formal multi-model equivalence claims.
    """
    if not systems:
        return []
    means = [float(np.mean(np.asarray(s, dtype=np.float64))) for _, s in systems]
    for earlier, later in zip(means, means[1:]):
        if later > earlier + 1e-12:
            raise ConfigError("systems must be sorted by mean, descending")
    tiers: list[list[str]] = [[systems[0][0]]]
    for i in range(1, len(systems)):
        result = paired_bootstrap(systems[i - 1][1], systems[i][1], B=B, seed=seed)
        if result.p_value < alpha:
            tiers.append([systems[i][0]])
        else:
            tiers[-1].append(systems[i][0])
    return tiers


def bonferroni_note(alpha: float, comparisons: int) -> str:
    return f"Bonferroni-corrected threshold: alpha = {alpha:g}/{comparisons} = {alpha / comparisons:.6g} (markers are uncorrected)"

"""Small statistics helpers used by the Monte Carlo audits."""

import math
from statistics import NormalDist


def wilson_interval(successes, trials, confidence=0.99):
    """Two-sided Wilson score interval for a binomial proportion.

    The 99% upper limit is used throughout as a conservative estimate of a
    tail probability, so Monte Carlo noise cannot flip a pass/fail flag.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def wilson_upper(successes, trials, confidence=0.99):
    return wilson_interval(successes, trials, confidence)[1]

"""Complex Gaussian vectors and their concentration bounds.

A Gaussian vector in ``C^D`` has i.i.d. coefficients ``c_i ~ N_C(0, 1/D)``,
that is real and imaginary parts independent ``N(0, 1/(2D))``, so that
``E <g|g> = 1``.  Normal variates come from numpy's ziggurat sampler on a
PCG64 stream (see :mod:`gaussqc.rng`), an exact transform equivalent in
distribution to Box-Muller.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import rng as _rng
from .errors import DimensionMismatchError, DomainError
from .stats import wilson_upper

BOUND_NAMES = ("length", "projector_sum", "trA_plus", "trA_minus")


class GaussianSampler:
    """Source of Gaussian vectors in ``C^D``.

    Single-owner mutable state: give each parallel task its own sampler
    built from a derived substream.
    """

    def __init__(self, dim, seed=0, label="gaussian", index=0, generator=None):
        if dim < 1:
            raise DomainError("ambient dimension must be at least 1")
        self.dim = int(dim)
        self.rng = generator if generator is not None else _rng.generator(seed, label, index)

    def sample(self, count=None):
        """One vector (shape ``(D,)``) or ``count`` vectors as rows."""
        shape = (self.dim,) if count is None else (int(count), self.dim)
        return sample_gaussian_coefficients(self.rng, shape, self.dim)


def sample_gaussian_coefficients(rng, shape, dim):
    """Array of i.i.d. ``N_C(0, 1/dim)`` entries."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5 / dim)


def sample_gaussian_vector(sampler):
    return sampler.sample()


def fourier_conjugate_family(vectors, inverse=False):
    """Formal Fourier conjugate ``w_k = N^-1/2 sum_j exp(2 pi i jk/N) v_j``.

    ``vectors`` holds the family as rows, shape ``(N, D)``.  No
    normalisation or orthogonality is assumed.  ``inverse=True`` applies the
    conjugate-phase transform that undoes it.
    """
    v = np.asarray(vectors, dtype=complex)
    if v.ndim != 2 or v.shape[0] == 0:
        raise DimensionMismatchError("expected a non-empty (N, D) array of vectors")
    n = v.shape[0]
    jk = np.outer(np.arange(n), np.arange(n)) % n
    sign = -1 if inverse else 1
    phases = np.exp(sign * 2j * np.pi * jk / n) / math.sqrt(n)
    # phases is symmetric, so row k of phases @ v is w_k
    return phases @ v


# -- theoretical bounds -----------------------------------------------------

def tail_bound(bound_name, D=None, epsilon=None, r=None, K=None, trace_A=None):
    """Right-hand side of the Gaussian-vector tail bounds (natural exp).

    ``length``         ``2 exp(-eps^2 D / 6)``, for ``0 <= eps <= 1``
    ``projector_sum``  ``2 exp(-r K eps^2 / 6)``, for ``0 <= eps <= 1``
    ``trA_plus``       ``exp(-eps^2 tr(A) / 4)``, for ``0 <= eps <= 1/3``
    ``trA_minus``      same value as ``trA_plus``

    The value is returned as is; a result ``>= 1`` is a vacuous bound.
    """
    if bound_name not in BOUND_NAMES:
        raise DomainError(f"unknown bound {bound_name!r}")
    eps = float(epsilon)
    if bound_name in ("length", "projector_sum"):
        if not 0.0 <= eps <= 1.0:
            raise DomainError(f"epsilon={eps} outside [0, 1] for {bound_name}")
        if bound_name == "length":
            return 2.0 * math.exp(-eps * eps * D / 6.0)
        return 2.0 * math.exp(-r * K * eps * eps / 6.0)
    if not 0.0 <= eps <= 1.0 / 3.0:
        raise DomainError(f"epsilon={eps} outside [0, 1/3] for {bound_name}")
    return math.exp(-eps * eps * trace_A / 4.0)


@dataclass(frozen=True)
class TailBoundReport:
    bound_name: str
    epsilon: float
    theoretical: float
    empirical: float
    trials: int
    wilson_upper: float

    @property
    def vacuous(self):
        return self.theoretical >= 1.0

    @property
    def passed(self):
        return self.vacuous or self.wilson_upper <= self.theoretical

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


class TailExperiment:
    """One deviation event of the tail lemma, ready to be sampled.

    ``params`` keys: ``D`` (ambient dimension), ``epsilon``; ``r`` and ``K``
    for ``projector_sum``; for the ``trA`` bounds either ``A`` (a ``D x D``
    operator with ``0 <= A <= 1`` or its length-``D`` spectrum) or ``rank``
    for a rank-``rank`` projector.

    By unitary invariance ``<g|A|g>`` has the law of ``sum_i a_i |c_i|^2``
    with ``a_i`` the eigenvalues of ``A``, so coefficients are drawn
    directly in the eigenbasis of ``A``.
    """

    def __init__(self, bound_name, params):
        if bound_name not in BOUND_NAMES:
            raise DomainError(f"unknown bound {bound_name!r}")
        self.bound_name = bound_name
        self.D = int(params["D"])
        self.epsilon = float(params["epsilon"])
        if bound_name == "projector_sum":
            self.r = int(params["r"])
            self.K = int(params.get("K", 1))
            if not 1 <= self.r <= self.D:
                raise DomainError("projector rank must lie in [1, D]")
            self.theoretical = tail_bound("projector_sum", epsilon=self.epsilon, r=self.r, K=self.K)
        elif bound_name == "length":
            self.theoretical = tail_bound("length", D=self.D, epsilon=self.epsilon)
        else:
            self.weights = _spectrum_of_A(params, self.D)
            self.trace_A = float(self.weights.sum())
            self.theoretical = tail_bound(bound_name, epsilon=self.epsilon, trace_A=self.trace_A)

    def statistic(self, rng, trials=None):
        """Draw the relevant scalar statistic (``trials`` draws if given)."""
        lead = () if trials is None else (int(trials),)
        if self.bound_name == "length":
            c = sample_gaussian_coefficients(rng, lead + (self.D,), self.D)
            return np.sum(np.abs(c) ** 2, axis=-1)
        if self.bound_name == "projector_sum":
            # K vectors; only the r coordinates inside the projector matter
            c = sample_gaussian_coefficients(rng, lead + (self.K, self.D), self.D)
            return np.sum(np.abs(c[..., : self.r]) ** 2, axis=(-2, -1))
        c = sample_gaussian_coefficients(rng, lead + (self.D,), self.D)
        return np.abs(c) ** 2 @ self.weights

    def event(self, stat):
        eps = self.epsilon
        if self.bound_name == "length":
            return np.abs(stat - 1.0) > eps
        if self.bound_name == "projector_sum":
            mean = self.r * self.K / self.D
            return np.abs(stat - mean) > eps * mean
        mean = self.trace_A / self.D
        if self.bound_name == "trA_plus":
            return stat > (1.0 + eps) * mean
        return stat < (1.0 - eps) * mean


def _spectrum_of_A(params, D):
    if "A" in params and params["A"] is not None:
        a = np.asarray(params["A"])
        if a.ndim == 2:
            if a.shape != (D, D):
                raise DimensionMismatchError(f"A has shape {a.shape}, expected {(D, D)}")
            w = np.linalg.eigvalsh((a + a.conj().T) / 2)
        else:
            w = np.asarray(a, dtype=float)
            if w.shape != (D,):
                raise DimensionMismatchError(f"A spectrum has length {w.size}, expected {D}")
    else:
        rank = int(params.get("rank", D // 4))
        if not 1 <= rank <= D:
            raise DomainError("rank of A must lie in [1, D]")
        w = np.zeros(D)
        w[:rank] = 1.0
    if w.min() < -1e-10 or w.max() > 1 + 1e-10:
        raise DomainError("A must satisfy 0 <= A <= 1")
    return np.clip(w, 0.0, 1.0)


def empirical_tail(bound_name, params, trials, seed):
    """Monte Carlo frequency of a tail event plus its Wilson 99% upper limit.

    Trial ``i`` draws from substream ``(seed, "tail:<bound_name>", i)``, the
    same stream the experiment harness uses, so results agree across
    entry points.
    """
    if trials < 1000:
        raise DomainError("empirical_tail needs at least 1000 trials")
    exp = TailExperiment(bound_name, params)
    hits = 0
    for i in range(trials):
        stat = exp.statistic(_rng.generator(seed, f"tail:{bound_name}", i))
        hits += bool(exp.event(stat))
    return TailBoundReport(
        bound_name=bound_name,
        epsilon=exp.epsilon,
        theoretical=exp.theoretical,
        empirical=hits / trials,
        trials=int(trials),
        wilson_upper=wilson_upper(hits, trials),
    )


# -- moment generating function and the logarithm lemma --------------------

def mgf_reference(t, a, D):
    """``E exp(t a |c|^2) = 1 / (1 - t a / D)`` for ``c ~ N_C(0, 1/D)``."""
    if not 0.0 <= a <= 1.0:
        raise DomainError("a must lie in [0, 1]")
    x = t * a / D
    if x >= 1.0:
        raise DomainError(f"moment generating function diverges at t a / D = {x}")
    return 1.0 / (1.0 - x)


def mgf_empirical(t, a, D, samples, seed):
    rng = _rng.generator(seed, "mgf", 0)
    c = sample_gaussian_coefficients(rng, (samples,), D)
    return float(np.mean(np.exp(t * a * np.abs(c) ** 2)))


def log_lower_bound_check(delta, grid_negative=None, grid_positive=None, slack=0.0):
    """Check the two logarithm lower bounds pointwise on grids.

    ``ln(1+x) >= x - x^2 / (2 (1 - delta))`` on ``[-delta, 0]`` and
    ``ln(1+x) >= x - x^2/2`` on ``[0, 1]``.  Returns a dict with the
    minimum margin of each bound and an overall ``holds`` flag.
    """
    if not delta < 1:
        raise DomainError("delta must be < 1")
    if grid_negative is None:
        grid_negative = np.linspace(-max(delta, 0.0), 0.0, 1001)
    if grid_positive is None:
        grid_positive = np.linspace(0.0, 1.0, 1001)
    xn = np.asarray(grid_negative, dtype=float)
    xp = np.asarray(grid_positive, dtype=float)
    if xn.size and (xn.min() < -delta or xn.max() > 0):
        raise DomainError("negative grid must lie in [-delta, 0]")
    if xp.size and (xp.min() < 0 or xp.max() > 1):
        raise DomainError("positive grid must lie in [0, 1]")
    margin_n = np.log1p(xn) - (xn - xn ** 2 / (2 * (1 - delta)))
    margin_p = np.log1p(xp) - (xp - xp ** 2 / 2)
    min_n = float(margin_n.min()) if xn.size else math.inf
    min_p = float(margin_p.min()) if xp.size else math.inf
    return {
        "delta": float(delta),
        "min_margin_negative": min_n,
        "min_margin_positive": min_p,
        "holds": min_n >= -slack and min_p >= -slack,
    }

"""Entropy-typical subspaces of tensor powers and the i.i.d. reduction.

Typical sets are handled through type classes (symbol counts), so the
scalar reports stay cheap at ``n`` in the tens.  Dense projectors are only
materialised on request and are capped.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import qit
from .channels import StinespringIsometry
from .decoding import oneshot_preconditions
from .errors import CapacityError, DomainError

BOUNDARY_TOL = 1e-12
MAX_TYPES = 2_000_000
MAX_DENSE_DIM = 1 << 20
MAX_REDUCTION_DIM = 1 << 16


def _compositions(n, k):
    """All count vectors of length ``k`` summing to ``n``, lexicographic."""
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def _multinomial(counts):
    out = 1
    left = sum(counts)
    for c in counts:
        out *= math.comb(left, c)
        left -= c
    return out


@dataclass(frozen=True)
class TypeClass:
    counts: tuple
    log_prob: float
    multiplicity: int


@dataclass(frozen=True, eq=False)
class TypicalProjector:
    """The delta-typical subspace of ``n`` copies of a spectrum.

    ``types`` lists the typical type classes; ``log_prob`` is the base-2 log
    of the probability of any single sequence in the class.
    """

    base_spectrum: tuple
    n: int
    delta: float
    entropy: float
    types: tuple = field(repr=False)
    subspace_dim: int

    def contains(self, sequence):
        seq = list(sequence)
        if len(seq) != self.n:
            return False
        counts = tuple(seq.count(i) for i in range(len(self.base_spectrum)))
        return any(t.counts == counts for t in self.types)

    @property
    def weight(self):
        """``tr(rho^{(x)n} P_delta)``, summed over type classes."""
        return math.fsum(t.multiplicity * 2.0 ** t.log_prob for t in self.types)

    @property
    def max_log_prob(self):
        return max((t.log_prob for t in self.types), default=-math.inf)

    def mask(self):
        """Boolean membership over the ``d^n`` product eigenbasis."""
        d = len(self.base_spectrum)
        total = d ** self.n
        if total > MAX_DENSE_DIM:
            raise CapacityError("d**n", total, MAX_DENSE_DIM)
        digits = np.array(list(itertools.product(range(d), repeat=self.n)), dtype=int).reshape(total, self.n)
        counts = np.stack([(digits == i).sum(axis=1) for i in range(d)], axis=1)
        allowed = {t.counts for t in self.types}
        return np.array([tuple(row) in allowed for row in counts], dtype=bool)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["counts", "log_prob", "multiplicity"])
        for t in self.types:
            w.writerow([" ".join(map(str, t.counts)), repr(t.log_prob), t.multiplicity])
        return buf.getvalue()


def typical_projector(spectrum, n, delta):
    """Enumerate the delta-typical type classes of ``spectrum^{(x)n}``.

    A sequence is typical when ``|-(1/n) log2 p(x^n) - H| <= delta``;
    sequences on the edge (within ``BOUNDARY_TOL``) are included.
    """
    p = np.asarray(spectrum, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
        raise DomainError("spectrum must be a probability vector")
    if n < 1 or delta <= 0:
        raise DomainError("need n >= 1 and delta > 0")
    p = np.clip(p, 0.0, None)
    k = p.size
    n_types = math.comb(n + k - 1, k - 1)
    if n_types > MAX_TYPES:
        raise CapacityError("type classes", n_types, MAX_TYPES)
    H = qit.entropy_from_spectrum(p)
    logp = [math.log2(x) if x > 0 else -math.inf for x in p]
    types = []
    dim = 0
    for counts in _compositions(n, k):
        if any(c and lp == -math.inf for c, lp in zip(counts, logp)):
            continue
        lp = math.fsum(c * l for c, l in zip(counts, logp) if c)
        if abs(-lp / n - H) <= delta + BOUNDARY_TOL:
            m = _multinomial(counts)
            types.append(TypeClass(counts, lp, m))
            dim += m
    return TypicalProjector(tuple(float(x) for x in p), int(n), float(delta), H, tuple(types), dim)


def typicality_report(state, n, delta):
    """Dimension bound, operator bound and truncation weight for ``state^{(x)n}``.

    The operator bound ``P rho^{(x)n} P <= 2^{-n(H - delta)} P`` is checked on
    the diagonal, which is exact since ``P`` commutes with the tensor power.
    """
    spec = state if np.ndim(state) == 1 else qit.spectrum(qit.check_state(state))
    tp = typical_projector(spec, n, delta)
    H = tp.entropy
    dim_limit = 2.0 ** (n * (H + delta))
    op_limit_log = -n * (H - delta)
    weight = tp.weight
    return {
        "n": int(n),
        "delta": float(delta),
        "entropy": H,
        "subspace_dim": tp.subspace_dim,
        "dimension_limit": dim_limit,
        "dimension_bound_holds": tp.subspace_dim <= dim_limit,
        "max_log_prob": tp.max_log_prob,
        "operator_limit_log": op_limit_log,
        "operator_bound_holds": tp.max_log_prob <= op_limit_log + n * BOUNDARY_TOL,
        "weight": weight,
        "truncation_weight": max(0.0, 1.0 - weight),
    }


def typical_basis(rho, n, delta):
    """Eigenbasis and typical mask for ``rho^{(x)n}``.

    Returns ``(tp, basis, mask, probs)``: ``basis`` is the ``d^n x d^n``
    product eigenbasis (columns), ``probs`` the product eigenvalues.
    """
    w, v = np.linalg.eigh(qit.check_state(rho))
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    tp = typical_projector(w, n, delta)
    mask = tp.mask()
    basis = v
    probs = w
    for _ in range(n - 1):
        basis = np.kron(basis, v)
        probs = np.kron(probs, w)
    return tp, basis, mask, probs


def typical_projector_matrix(rho, n, delta):
    _, basis, mask, _ = typical_basis(rho, n, delta)
    b = basis[:, mask]
    return b @ b.conj().T


@dataclass(frozen=True, eq=False)
class IidReduction:
    rho_tilde: np.ndarray = field(repr=False)
    embedding: np.ndarray = field(repr=False)
    channel: StinespringIsometry = field(repr=False)
    P_B: np.ndarray = field(repr=False)
    P_E: np.ndarray = field(repr=False)
    params: dict
    measured_epsilon: float
    n: int
    delta: float
    entropies: dict
    recipe_N: float

    @property
    def feasible_N(self):
        """Largest code dimension supported by ``rho_tilde``."""
        return self.rho_tilde.shape[0]


def iid_reduction(V, rho, n, delta):
    """Reduce ``n`` uses of ``V`` with input ``rho`` to a one-shot instance.

    ``rho_tilde`` is the normalised truncation of ``rho^{(x)n}`` to its
    typical subspace, expressed in that subspace (dimension ``|A_delta|``);
    the returned channel is ``V^{(x)n}`` restricted to it.  ``P_B`` and
    ``P_E`` are the typical projectors of the single-copy output and
    environment states.
    """
    rho = qit.check_state(rho)
    out_dim = (V.dim_b * V.dim_e) ** n
    if out_dim > MAX_REDUCTION_DIM:
        raise CapacityError("(dim_b*dim_e)**n", out_dim, MAX_REDUCTION_DIM)
    rho_b = qit.partial_trace(V.apply(rho), (V.dim_b, V.dim_e), [0])
    rho_e = qit.partial_trace(V.apply(rho), (V.dim_b, V.dim_e), [1])
    tp_a, basis_a, mask_a, probs_a = typical_basis(rho, n, delta)
    if not mask_a.any():
        raise DomainError("input typical subspace is empty")
    embed = basis_a[:, mask_a]
    p = probs_a[mask_a]
    rho_tilde = np.diag(p / p.sum()).astype(complex)
    channel = V.tensor_power(n).restrict(embed)
    P_B = typical_projector_matrix(rho_b, n, delta)
    P_E = typical_projector_matrix(rho_e, n, delta)
    pre = oneshot_preconditions(channel, rho_tilde, P_B, P_E)
    HA = qit.entropy(rho)
    HB = qit.entropy(rho_b)
    HE = qit.entropy(rho_e)
    params = dict(pre)
    params.update(
        D_param_theory=2.0 ** (n * (HB - delta)),
        Delta_theory=2.0 ** (n * (HA - delta)),
        rank_PE_limit=2.0 ** (n * (HE + delta)),
    )
    return IidReduction(
        rho_tilde=rho_tilde,
        embedding=embed,
        channel=channel,
        P_B=P_B,
        P_E=P_E,
        params=params,
        measured_epsilon=pre["epsilon"],
        n=int(n),
        delta=float(delta),
        entropies={"A": HA, "B": HB, "E": HE, "coherent": HB - HE},
        recipe_N=2.0 ** (n * (HB - HE) - 3 * n * delta),
    )

"""Channels as Stinespring isometries ``V: A -> B (x) E``.

The output space is ordered ``B`` then ``E``: row ``b * dim_e + e`` of the
isometry matrix is the amplitude on ``|b>_B |e>_E``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import qit
from .errors import DimensionMismatchError, DomainError

CHANNEL_FAMILIES = ("identity", "dephasing", "depolarizing", "amplitude_damping", "erasure")


@dataclass(frozen=True, eq=False)
class StinespringIsometry:
    matrix: np.ndarray
    dim_a: int
    dim_b: int
    dim_e: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim_b * self.dim_e, self.dim_a):
            raise DimensionMismatchError(
                f"isometry shape {m.shape} != ({self.dim_b}*{self.dim_e}, {self.dim_a})"
            )
        if np.max(np.abs(m.conj().T @ m - np.eye(self.dim_a))) > qit.TOL_UNIT * max(1, self.dim_a):
            raise DomainError("V^dagger V differs from the identity")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, op):
        """``V op V^dagger`` on ``B (x) E``; ``op`` may be unnormalised."""
        return self.matrix @ op @ self.matrix.conj().T

    def apply_vector(self, psi):
        return self.matrix @ np.asarray(psi, dtype=complex)

    def tensor_power(self, n):
        """``V^{(x) n}`` with outputs reordered as ``B^n (x) E^n``."""
        if n < 1:
            raise DomainError("n must be at least 1")
        m = self.matrix
        out = m
        for _ in range(n - 1):
            out = np.kron(out, m)
        db, de = self.dim_b, self.dim_e
        # rows are (b1 e1 b2 e2 ...); move all b's before all e's
        t = out.reshape([db, de] * n + [self.dim_a ** n])
        perm = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)] + [2 * n]
        t = t.transpose(perm).reshape((db * de) ** n, self.dim_a ** n)
        return StinespringIsometry(t, self.dim_a ** n, db ** n, de ** n)

    def restrict(self, embedding):
        """Compose with an isometric embedding ``W: A' -> A`` (columns)."""
        w = np.asarray(embedding, dtype=complex)
        return StinespringIsometry(self.matrix @ w, w.shape[1], self.dim_b, self.dim_e)


def isometry_from_kraus(kraus):
    """Stinespring isometry ``V|psi> = sum_i K_i|psi> (x) |i>_E``."""
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise DomainError("need at least one Kraus operator")
    db, da = ks[0].shape
    if any(k.shape != (db, da) for k in ks):
        raise DimensionMismatchError("Kraus operators must share a shape")
    completeness = sum(k.conj().T @ k for k in ks)
    if np.max(np.abs(completeness - np.eye(da))) > qit.TOL_UNIT * max(1, da):
        raise DomainError("Kraus operators violate sum K^dagger K = I")
    de = len(ks)
    v = np.stack(ks, axis=1).reshape(db * de, da)
    return StinespringIsometry(v, da, db, de)


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name}={p} outside [0, 1]")


def _clock_shift(d):
    omega = np.exp(2j * np.pi / d)
    z = np.diag(omega ** np.arange(d))
    x = np.roll(np.eye(d), 1, axis=0)
    return x, z


def standard_channel(family, d=2, p=None, g=None):
    """Compile one of the test-bed channels to a Stinespring isometry.

    ``dephasing(p)``: ``{sqrt(1-p) I, sqrt(p) Z}`` with ``Z`` the clock
    matrix (Pauli Z for ``d=2``).  ``depolarizing(p)``:
    ``rho -> (1-p) rho + p I/d`` through the Weyl operators.
    ``amplitude_damping(g)``: qubit only.  ``erasure(p)``: output dimension
    ``d+1`` with flag state ``|d>``.
    """
    if family not in CHANNEL_FAMILIES:
        raise DomainError(f"unknown channel family {family!r}")
    if d < 1:
        raise DomainError("input dimension must be at least 1")
    eye = np.eye(d)
    if family == "identity":
        kraus = [eye]
    elif family == "dephasing":
        _check_prob("p", p)
        _, z = _clock_shift(d)
        kraus = [math.sqrt(1 - p) * eye, math.sqrt(p) * z]
    elif family == "depolarizing":
        _check_prob("p", p)
        x, z = _clock_shift(d)
        kraus = []
        for a in range(d):
            for b in range(d):
                w = 1 - p + p / d ** 2 if a == b == 0 else p / d ** 2
                op = np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
                kraus.append(math.sqrt(w) * op)
    elif family == "amplitude_damping":
        _check_prob("g", g)
        if d != 2:
            raise DomainError("amplitude damping is defined for d=2 only")
        kraus = [np.array([[1, 0], [0, math.sqrt(1 - g)]]), np.array([[0, math.sqrt(g)], [0, 0]])]
    else:
        _check_prob("p", p)
        embed = np.vstack([eye, np.zeros((1, d))])
        kraus = [math.sqrt(1 - p) * embed]
        for j in range(d):
            k = np.zeros((d + 1, d))
            k[d, j] = math.sqrt(p)
            kraus.append(k)
    return isometry_from_kraus(kraus)


def channel_from_spec(family, d=2, params=None):
    params = dict(params or {})
    return standard_channel(family, d, **params)


def _check_input(V, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (V.dim_a, V.dim_a):
        raise DimensionMismatchError(f"input shape {rho.shape} does not match dim_a={V.dim_a}")
    return rho


def apply_channel(V, op):
    """``tr_E V op V^dagger`` without any state validation."""
    op = _check_input(V, op)
    return qit.partial_trace(V.apply(op), (V.dim_b, V.dim_e), [0])


def apply_complement(V, op):
    op = _check_input(V, op)
    return qit.partial_trace(V.apply(op), (V.dim_b, V.dim_e), [1])


def channel_output(V, rho):
    return apply_channel(V, qit.check_state(_check_input(V, rho)))


def environment_output(V, rho):
    return apply_complement(V, qit.check_state(_check_input(V, rho)))


def coherent_information_channel(rho, V, base=2):
    """``I_c(rho; N) = H(B) - H(E)`` evaluated through the dilation."""
    rho = qit.check_state(_check_input(V, rho))
    out = V.apply(rho)
    dims = (V.dim_b, V.dim_e)
    hb = qit.entropy(qit.partial_trace(out, dims, [0]), base)
    he = qit.entropy(qit.partial_trace(out, dims, [1]), base)
    return hb - he


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted family ``{p_x, sigma_x}``; only the average must be a state."""

    weights: np.ndarray
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        m = np.asarray(self.members, dtype=complex)
        if m.ndim != 3 or m.shape[1] != m.shape[2] or m.shape[0] != w.size:
            raise DimensionMismatchError("members must be an (n, d, d) stack matching weights")
        if np.any(w < 0) or abs(w.sum() - 1) > qit.TOL_TR:
            raise DomainError("weights must be a probability vector")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", m)

    @classmethod
    def uniform(cls, members):
        m = np.asarray(members, dtype=complex)
        return cls(np.full(m.shape[0], 1.0 / m.shape[0]), m)

    @property
    def average(self):
        return np.einsum("x,xij->ij", self.weights, self.members)


def holevo_chi(ensemble, base=2):
    """``H(sum p_x sigma_x) - sum p_x H(sigma_x)``.

    Members whose trace is off by more than ``TOL_TR`` are renormalised
    inside their own entropy term.
    """
    avg = qit.check_state(ensemble.average)
    total = qit.entropy(avg, base)
    for p, sigma in zip(ensemble.weights, ensemble.members):
        if p == 0:
            continue
        tr = np.trace(sigma).real
        if abs(tr - 1) > qit.TOL_TR:
            sigma = sigma / tr
        total -= p * qit.entropy_from_spectrum(qit.spectrum(sigma), base)
    return float(total)

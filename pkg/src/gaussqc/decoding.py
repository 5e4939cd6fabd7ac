"""Measurement decoding and the information audit of a code.

The classical decoders are square-root ("pretty good") measurements.  The
audit evaluates, for a code sent through a channel, the entropic chain that
links decodability of two conjugate bases to decoupling of the reference
from the environment.
"""

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import qit
from .channels import Ensemble, holevo_chi
from .codes import check_same_ambient, encoder_isometry
from .errors import DimensionMismatchError, DomainError

LN2 = math.log(2)


@dataclass(frozen=True, eq=False)
class Povm:
    """POVM elements stacked as ``(M, d, d)``.

    When ``junk`` is set the last element completes the measurement on the
    complement of the decoder's support and always counts as an error.
    """

    elements: np.ndarray
    junk: bool = False

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise DimensionMismatchError("POVM elements must be an (M, d, d) stack")
        object.__setattr__(self, "elements", e)

    @property
    def outcomes(self):
        return self.elements.shape[0] - int(self.junk)

    def completeness_residual(self):
        d = self.elements.shape[1]
        return float(np.max(np.abs(self.elements.sum(axis=0) - np.eye(d))))


def pgm_povm(ensemble):
    """Square-root measurement ``L_j = rbar^-1/2 p_j sigma_j rbar^-1/2``.

    ``rbar`` is the ensemble average; the inverse square root is taken on
    its support and ``I - P_supp`` is appended as a junk outcome.
    """
    rbar = qit.hermitian_part(ensemble.average)
    if np.max(np.abs(rbar)) == 0:
        raise DomainError("ensemble average is zero")
    R = qit.invsqrtm_psd(rbar)
    elems = [R @ (p * s) @ R for p, s in zip(ensemble.weights, ensemble.members)]
    junk = np.eye(rbar.shape[0]) - qit.support_projector(rbar)
    has_junk = np.max(np.abs(junk)) > 1e-12
    if has_junk:
        elems.append(junk)
    return Povm(np.array(elems), junk=bool(has_junk))


def classical_error(states, povm):
    """Average error ``(1/N) sum_j tr[sigma_j (1 - L_j)]`` over the first N outcomes."""
    s = np.asarray(states, dtype=complex)
    N = s.shape[0]
    if povm.outcomes < N or s.shape[1:] != povm.elements.shape[1:]:
        raise DimensionMismatchError("states and POVM do not match")
    traces = np.real(np.einsum("jii->j", s))
    hits = np.real(np.einsum("jab,jba->j", s, povm.elements[:N]))
    err = float(np.mean(traces - hits))
    return min(max(err, 0.0), max(1.0, float(traces.max())))


def helstrom_error(s0, s1):
    """Optimal uniform-prior two-state error ``(1 - ||s0 - s1||_1 / 2) / 2``."""
    return 0.5 * (1 - 0.5 * qit.trace_distance(s0, s1))


def pgm_error(states, weights=None):
    """PGM error for a (normalised) family of output states."""
    s = np.asarray(states, dtype=complex)
    w = np.full(s.shape[0], 1.0 / s.shape[0]) if weights is None else np.asarray(weights)
    return classical_error(s, pgm_povm(Ensemble(w, s)))


def packing_bound(epsilon, eta):
    """Both forms ``(2 eps + 4 sqrt(eps) + 4 eta, 6 sqrt(eps) + 4 eta)``."""
    if epsilon < 0 or eta < 0:
        raise DomainError("epsilon and eta must be non-negative")
    return 2 * epsilon + 4 * math.sqrt(epsilon) + 4 * eta, 6 * math.sqrt(epsilon) + 4 * eta


# -- one-shot parameters ----------------------------------------------------

@dataclass
class OneShotParams:
    epsilon: float
    eta: float
    D_param: float
    Delta: float
    rank_PE: int
    N: int
    exponent_divisor: int = 6

    def __post_init__(self):
        if self.exponent_divisor not in (4, 6):
            raise DomainError("exponent_divisor must be 4 or 6")

    @property
    def lam(self):
        e, h, N = self.epsilon, self.eta, self.N
        return 9 * math.sqrt(e) + 7 * math.sqrt(h) + 3 * N * math.exp(-N * e * e / self.exponent_divisor)

    @property
    def max_code_dimension(self):
        return min(self.eta * self.D_param / self.rank_PE, self.eta * self.Delta)

    @property
    def size_ok(self):
        return self.N <= self.max_code_dimension and 0 < self.epsilon <= 1 / 3

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = self.lam
        return d

    def to_json(self):
        return json.dumps(_finite(self.to_dict()), sort_keys=True)


def bounds_from_lambda(lam, N):
    """Fidelity, Holevo and error bounds as functions of ``lambda`` and ``N``.

    Values that need ``H2(2 lambda)`` are ``nan`` when ``2 lambda > 1``;
    ``vacuous`` is set then, or when the error bound reaches the trivial
    value 2.
    """
    logN = math.log2(N)
    simplified = 7 * math.sqrt(logN) * lam ** 0.25
    if 2 * lam > 1:
        chi_floor = q_error = math.nan
    else:
        h = qit.binary_entropy(2 * lam)
        chi_floor = logN - h - 2 * lam * logN
        q_error = 2 * math.sqrt(2 * h + 4 * lam * logN)
    vacuous = not (q_error < 2)
    return {
        "lambda": lam,
        "chi_floor": chi_floor,
        "q_error": q_error,
        "q_error_simplified": simplified,
        "vacuous": vacuous,
    }


def oneshot_bounds(params):
    return bounds_from_lambda(params.lam, params.N)


def oneshot_preconditions(V, rho_tilde, P_B, P_E):
    """Measure the quantities the one-shot theorem assumes.

    Returns a dict with ``epsilon`` (``1 - tr V rho V^dag (P_B (x) P_E)``),
    ``D_param`` (reciprocal of the top eigenvalue of ``P_B N(rho) P_B``),
    ``Delta`` (reciprocal of the top eigenvalue of ``rho``) and ``rank_PE``.
    """
    rho = qit.check_state(rho_tilde)
    if rho.shape[0] != V.dim_a:
        raise DimensionMismatchError("rho_tilde does not match the channel input")
    P_B = np.asarray(P_B, dtype=complex)
    P_E = np.asarray(P_E, dtype=complex)
    if P_B.shape != (V.dim_b, V.dim_b) or P_E.shape != (V.dim_e, V.dim_e):
        raise DimensionMismatchError("projectors do not match the channel outputs")
    # work with M = V rho^{1/2} (BE x rank) so V rho V^dag is never formed
    w, v = np.linalg.eigh(rho)
    keep = w > qit.TOL_SUPP * w[-1]
    M = (V.matrix @ (v[:, keep] * np.sqrt(w[keep]))).reshape(V.dim_b, V.dim_e, -1)
    PM = np.einsum("ab,fe,bek->afk", P_B, P_E, M, optimize=True)
    weight = np.real(np.vdot(M, PM))
    nb = np.einsum("bek,cek->bc", M, M.conj())
    pinched = P_B @ nb @ P_B
    top_b = qit.spectrum(pinched)[-1] if V.dim_b else 0.0
    top_a = qit.spectrum(rho)[-1]
    return {
        "epsilon": float(max(0.0, 1 - weight)),
        "D_param": math.inf if top_b <= 0 else float(1 / top_b),
        "Delta": float(1 / top_a),
        "rank_PE": qit.rank(P_E) if np.any(P_E) else 0,
    }


def schmidt_support_projector(V, P_E, gamma):
    """Projector onto the support of ``tr_E |g'><g'|``, ``g' = (1 (x) P_E) V gamma``.

    Returns ``(projector, flagged)``; ``flagged`` is set when ``g'`` vanishes
    and the projector is zero.
    """
    P_E = np.asarray(P_E, dtype=complex)
    if P_E.shape != (V.dim_e, V.dim_e):
        raise DimensionMismatchError("P_E does not match the environment")
    m = V.apply_vector(gamma).reshape(V.dim_b, V.dim_e) @ P_E.T
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] <= 1e-14:
        return np.zeros((V.dim_b, V.dim_b), dtype=complex), True
    keep = s > qit.TOL_SUPP * s[0]
    uk = u[:, keep]
    return uk @ uk.conj().T, False


# -- joint state and information audit -------------------------------------

def joint_state(code, V):
    """``|Psi> = (1 (x) V U)|Phi_N>`` as a vector on ``R (x) B (x) E``."""
    check_same_ambient(code, V.dim_a)
    VU = V.matrix @ encoder_isometry(code)
    return VU.T.reshape(-1) / math.sqrt(code.N)


def output_states(V, vectors):
    """Channel outputs ``N(|v><v|)`` on ``B`` for row-stacked vectors."""
    m = np.asarray(vectors, dtype=complex) @ V.matrix.T
    m = m.reshape(-1, V.dim_b, V.dim_e)
    return np.einsum("jbe,jce->jbc", m, m.conj())


@dataclass
class InformationAudit:
    chi_basis: float
    chi_conjugate: float
    I_RB: float
    I_RE: float
    H_R: float
    duality_residual: float
    pinsker_slack: float
    uncertainty_slack: float
    fano_bound: float
    decoupling_distance: float

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, float(getattr(self, f.name)))

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(_finite(self.to_dict()), sort_keys=True)


def tripartite_quantities(psi, dims):
    """Entropies and mutual informations of a pure state on ``R B E``.

    Each marginal, including ``RB`` and ``RE``, is reduced and
    diagonalised on its own, so the duality residual is a genuine check.
    """
    dims = list(dims)
    H = {}
    for name, keep in (("R", [0]), ("B", [1]), ("E", [2]), ("RB", [0, 1]), ("RE", [0, 2])):
        H[name] = qit.entropy(qit.reduced_state(psi, dims, keep))
    I_RB = H["R"] + H["B"] - H["RB"]
    I_RE = H["R"] + H["E"] - H["RE"]
    return H, I_RB, I_RE


def decoupling_distance(psi, dims):
    """``|| Psi^{RE} - tau^R (x) Psi^E ||_1``."""
    dr, _, de = dims
    rho_re = qit.reduced_state(psi, dims, [0, 2])
    rho_e = qit.partial_trace(rho_re, (dr, de), [1])
    return qit.trace_distance(rho_re, np.kron(np.eye(dr) / dr, rho_e))


def pinsker_slack(psi, dims):
    """Nat-based ``I(R:E) - (||Psi^{RE} - tau (x) Psi^E||_1 / 2)^2`` and the distance."""
    dist = decoupling_distance(psi, dims)
    _, _, I_RE = tripartite_quantities(psi, dims)
    return I_RE * LN2 - (dist / 2) ** 2, dist


def information_audit(psi, code, V, measured_error=None):
    """Audit the decoupling chain for the joint state of ``code`` through ``V``.

    ``measured_error`` is the classical error of some decoder on the basis
    ensemble; if omitted, the PGM error on the basis outputs is used.  The
    Fano bound is ``log N - P_e log N - H2(P_e)``; Pinsker is checked in
    nats, everything else in bits.
    """
    check_same_ambient(code, V.dim_a)
    dims = (code.N, V.dim_b, V.dim_e)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != math.prod(dims):
        raise DimensionMismatchError("joint state does not match code and channel")
    H, I_RB, I_RE = tripartite_quantities(psi, dims)
    dist = decoupling_distance(psi, dims)
    sig = output_states(V, code.phi)
    sig_hat = output_states(V, code.phi_hat)
    chi0 = holevo_chi(Ensemble.uniform(sig))
    chi1 = holevo_chi(Ensemble.uniform(sig_hat))
    pe = pgm_error(sig) if measured_error is None else float(measured_error)
    pe = min(max(pe, 0.0), 1.0)
    logN = math.log2(code.N)
    return InformationAudit(
        chi_basis=chi0,
        chi_conjugate=chi1,
        I_RB=I_RB,
        I_RE=I_RE,
        H_R=H["R"],
        duality_residual=abs(2 * H["R"] - I_RB - I_RE),
        pinsker_slack=I_RE * LN2 - (dist / 2) ** 2,
        uncertainty_slack=I_RB - chi0 - chi1,
        fano_bound=logN - pe * logN - qit.binary_entropy(pe),
        decoupling_distance=dist,
    )


def gentle_measurement_check(rho, X, slack=1e-9):
    """Check ``||rho - sqrt(X) rho sqrt(X)||_1 <= 2 sqrt(eps) tr(rho)``.

    ``eps = tr(rho (1 - X)) / tr(rho)``.
    """
    rho = qit.check_positive(rho)
    X = qit.check_positive(X)
    if rho.shape != X.shape:
        raise DimensionMismatchError("rho and X differ in shape")
    if qit.spectrum(X)[-1] > 1 + qit.TOL_PSD:
        raise DomainError("X must satisfy X <= I")
    tr = np.trace(rho).real
    eps = max(0.0, np.trace(rho @ (np.eye(X.shape[0]) - X)).real / tr)
    sx = qit.sqrtm_psd(X)
    lhs = qit.trace_distance(rho, sx @ rho @ sx)
    rhs = 2 * math.sqrt(eps) * tr
    return {"epsilon": eps, "lhs": lhs, "rhs": rhs, "holds": lhs <= rhs + slack}


def _finite(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, float) and not math.isfinite(v):
            out[k] = None
        else:
            out[k] = v
    return out

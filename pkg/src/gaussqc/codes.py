"""Random subspace codes built from distorted Gaussian vectors.

Given an input state ``rho`` on a space of dimension ``D``, draw ``N``
Gaussian vectors ``g_j``, distort them to ``gamma_j = sqrt(D rho) g_j`` and
orthonormalise with the square-root recipe ``phi_j = Gamma^{-1/2} gamma_j``
where ``Gamma = sum_j |gamma_j><gamma_j|``.  The Fourier-conjugate basis
``phi_hat`` spans the same subspace.

Vector families are stored as rows of ``(N, D)`` arrays.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import qit
from . import rng as _rng
from .errors import DegenerateCodeError, DimensionMismatchError, DomainError
from .gaussian import fourier_conjugate_family, sample_gaussian_coefficients


@dataclass(frozen=True, eq=False)
class SubspaceCode:
    N: int
    ambient_dim: int
    rho_tilde: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    Gamma: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    phi_hat: np.ndarray = field(repr=False)
    seed: int = 0

    def to_json(self):
        """Debug dump with complex amplitudes as ``[re, im]`` pairs."""

        def enc(a):
            a = np.asarray(a, dtype=complex)
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return json.dumps(
            {
                "N": self.N,
                "ambient_dim": self.ambient_dim,
                "seed": self.seed,
                "rho_tilde": enc(self.rho_tilde),
                "g": enc(self.g),
                "gamma": enc(self.gamma),
                "phi": enc(self.phi),
                "phi_hat": enc(self.phi_hat),
            }
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)

        def dec(x):
            a = np.asarray(x, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        gamma = dec(d["gamma"])
        return cls(
            N=d["N"],
            ambient_dim=d["ambient_dim"],
            rho_tilde=dec(d["rho_tilde"]),
            g=dec(d["g"]),
            gamma=gamma,
            Gamma=gamma.T @ gamma.conj(),
            phi=dec(d["phi"]),
            phi_hat=dec(d["phi_hat"]),
            seed=d["seed"],
        )


def frame_operator(vectors):
    """``sum_j |v_j><v_j|`` for a row-stacked family."""
    v = np.asarray(vectors, dtype=complex)
    return v.T @ v.conj()


def build_random_code(rho_tilde, N, seed, generator=None):
    """Sample a code of dimension ``N`` for input state ``rho_tilde``.

    Raises
    ------
    DomainError
        If ``N`` exceeds the rank of ``rho_tilde``.
    DegenerateCodeError
        If ``Gamma`` has fewer than ``N`` eigenvalues above
        ``TOL_SUPP * max``; the code is reported, never repaired.
    """
    rho = qit.check_state(rho_tilde)
    D = rho.shape[0]
    N = int(N)
    if N < 1:
        raise DomainError("code dimension must be at least 1")
    if N > qit.rank(rho):
        raise DomainError(f"N={N} exceeds rank(rho_tilde)={qit.rank(rho)}")
    rng = generator if generator is not None else _rng.generator(seed, "code", 0)
    g = sample_gaussian_coefficients(rng, (N, D), D)
    distort = qit.sqrtm_psd(D * rho)
    gamma = g @ distort.T
    Gamma = frame_operator(gamma)
    Gamma = (Gamma + Gamma.conj().T) / 2
    if qit.rank(Gamma) < N:
        raise DegenerateCodeError("Gamma has rank below N", seed=seed)
    phi = gamma @ qit.invsqrtm_psd(Gamma).T
    return SubspaceCode(
        N=N,
        ambient_dim=D,
        rho_tilde=rho,
        g=g,
        gamma=gamma,
        Gamma=Gamma,
        phi=phi,
        phi_hat=fourier_conjugate_family(phi),
        seed=seed,
    )


def code_from_basis(basis, seed=0):
    """Wrap an orthonormal family (rows) as a code with ``gamma = phi``.

    Used to audit arbitrary, non-random bases of a subspace.
    """
    phi = np.asarray(basis, dtype=complex)
    N, D = phi.shape
    if np.max(np.abs(phi.conj() @ phi.T - np.eye(N))) > 1e-8:
        raise DomainError("basis rows must be orthonormal")
    P = frame_operator(phi)
    return SubspaceCode(
        N=N,
        ambient_dim=D,
        rho_tilde=np.eye(D) / D,
        g=phi * math.sqrt(N / D),
        gamma=phi.copy(),
        Gamma=P,
        phi=phi,
        phi_hat=fourier_conjugate_family(phi),
        seed=seed,
    )


def gram_matrix(code):
    """``S[j, k] = <gamma_j|gamma_k>``."""
    return code.gamma.conj() @ code.gamma.T


def encoder_isometry(code):
    """Matrix ``U`` with ``U|j> = |phi_j>`` (columns are the code basis)."""
    U = code.phi.T
    if np.max(np.abs(U.conj().T @ U - np.eye(code.N))) > 1e-8:
        raise DegenerateCodeError("code basis is not orthonormal", seed=code.seed)
    return U


def rank_one_trace_distance(a, b):
    """``|| |a><a| - |b><b| ||_1`` from norms and overlap alone.

    The difference has rank at most two with eigenvalues of opposite sign,
    so the trace norm is the eigenvalue gap
    ``sqrt((|a|^2 + |b|^2)^2 - 4 |<a|b>|^2)``.
    """
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    ov = abs(np.vdot(a, b)) ** 2
    return math.sqrt(max(0.0, (na + nb) ** 2 - 4 * ov))


@dataclass(frozen=True)
class CodeDiagnostics:
    epsilon: float
    eta: float
    min_length: float
    max_length: float
    max_cross_term: float
    gram: np.ndarray = field(repr=False)
    perturbation_avg: float
    chain_upper1: float
    decomposition: float
    overlap_deficit: float
    trace_sqrt_deficit: float
    sqrt_trick_value: float
    bound_value: float
    length_ok: bool
    cross_ok: bool

    @property
    def applicable(self):
        """Whether the length and cross-term hypotheses both hold."""
        return self.length_ok and self.cross_ok and self.epsilon <= 1 / 3

    @property
    def bound_holds(self):
        return self.perturbation_avg <= self.bound_value

    @property
    def violation(self):
        return self.applicable and not self.bound_holds


def code_diagnostics(code, epsilon, eta):
    """Perturbation diagnostics comparing ``phi_j`` with ``gamma_j``.

    Computes the average half trace distance between the rank-one
    operators ``phi_j`` and ``gamma_j`` directly, each intermediate
    quantity of the chain bounding it, and whether the hypotheses
    (lengths within ``1 +- eps``, cross terms at most ``(1+eps)^2 eta``)
    hold.  Violations are recorded, never raised.
    """
    if epsilon > 1 / 3:
        raise DomainError("epsilon must be at most 1/3")
    N = code.N
    S = gram_matrix(code)
    lengths = np.real(np.diag(S))
    off = np.abs(S) ** 2
    np.fill_diagonal(off, 0.0)
    cross = off.sum(axis=1)
    pert = np.mean([rank_one_trace_distance(p, g) / 2 for p, g in zip(code.phi, code.gamma)])
    overlaps = np.abs(np.einsum("jd,jd->j", code.phi.conj(), code.gamma))
    overlap_deficit = float(np.mean(1 - overlaps))
    # nonzero spectrum of Gamma from the N x N Gram matrix; the D - N
    # roundoff eigenvalues of Gamma would add spurious sqrt(1e-16) terms
    gamma_w = np.linalg.eigvalsh((S + S.conj().T) / 2)
    tr_sqrt = float(np.sum(np.sqrt(np.clip(gamma_w, 0, None))))
    trace_sqrt_deficit = 1 - tr_sqrt / N
    sqrt_trick = (N - 1.5 * lengths.sum() + 0.5 * np.sum(np.abs(S) ** 2)) / N
    decomposition = epsilon + trace_sqrt_deficit
    upper1 = math.sqrt(max(0.0, 2 * (1 + epsilon) * (epsilon + overlap_deficit)))
    return CodeDiagnostics(
        epsilon=float(epsilon),
        eta=float(eta),
        min_length=float(lengths.min()),
        max_length=float(lengths.max()),
        max_cross_term=float(cross.max()),
        gram=S,
        perturbation_avg=float(pert),
        chain_upper1=upper1,
        decomposition=float(decomposition),
        overlap_deficit=overlap_deficit,
        trace_sqrt_deficit=float(trace_sqrt_deficit),
        sqrt_trick_value=float(sqrt_trick),
        bound_value=3 * math.sqrt(epsilon) + 3 * math.sqrt(eta),
        length_ok=bool(np.all((lengths >= 1 - epsilon) & (lengths <= 1 + epsilon))),
        cross_ok=bool(cross.max() <= (1 + epsilon) ** 2 * eta),
    )


def measured_parameters(code):
    """Smallest ``(eps, eta)`` at which the code meets both hypotheses."""
    S = gram_matrix(code)
    lengths = np.real(np.diag(S))
    eps = float(np.max(np.abs(lengths - 1)))
    off = np.abs(S) ** 2
    np.fill_diagonal(off, 0.0)
    eta = float(off.sum(axis=1).max() / (1 + eps) ** 2)
    return eps, eta


def conjugate_consistency(code, tol=1e-10):
    """Check the alternative construction of the conjugate basis.

    (a) ``gamma_hat`` built from the conjugate seeds ``g_hat`` equals the
    conjugate family of ``gamma``; (b) the frame operator of
    ``gamma_hat`` equals ``Gamma``; (c) ``phi_hat = Gamma^{-1/2} gamma_hat``.
    """
    D = code.ambient_dim
    distort = qit.sqrtm_psd(D * code.rho_tilde)
    g_hat = fourier_conjugate_family(code.g)
    gamma_hat = g_hat @ distort.T
    res_a = float(np.max(np.abs(gamma_hat - fourier_conjugate_family(code.gamma))))
    res_b = float(np.max(np.abs(frame_operator(gamma_hat) - code.Gamma)))
    phi_hat_alt = gamma_hat @ qit.invsqrtm_psd(code.Gamma).T
    res_c = float(np.max(np.abs(phi_hat_alt - code.phi_hat)))
    scale = max(1.0, float(np.max(np.abs(code.Gamma))))
    return {
        "gamma_hat_residual": res_a,
        "Gamma_hat_residual": res_b,
        "phi_hat_residual": res_c,
        "ok": res_a <= tol * scale and res_b <= tol * scale and res_c <= tol * scale,
    }


def orthonormality_residual(vectors):
    v = np.asarray(vectors, dtype=complex)
    return float(np.max(np.abs(v.conj() @ v.T - np.eye(v.shape[0]))))


def check_same_ambient(code, dim):
    if code.ambient_dim != dim:
        raise DimensionMismatchError(f"code ambient dimension {code.ambient_dim} != {dim}")

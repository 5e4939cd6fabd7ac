"""Dense quantum-information primitives.

States and operators are plain complex :class:`numpy.ndarray` objects:
square ``(d, d)`` matrices for operators, 1-D length-``d`` arrays for
(possibly unnormalised) pure-state vectors.  Subsystem bookkeeping is done
with a ``dims`` sequence whose product is the ambient dimension; factor 0 is
the leftmost tensor factor.

Entropic quantities are in bits unless a ``base`` argument says otherwise.
"""

import math

import numpy as np

from .errors import DimensionMismatchError, DomainError

TOL_HERM = 1e-9
TOL_TR = 1e-9
TOL_PSD = 1e-10
TOL_SUPP = 1e-10
TOL_UNIT = 1e-10


# -- validation -------------------------------------------------------------

def _as_square(op):
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {op.shape}")
    return op


def hermitian_part(op):
    op = _as_square(op)
    return (op + op.conj().T) / 2


def check_positive(op, tol_herm=TOL_HERM, tol_psd=TOL_PSD):
    """Validate ``op`` as a positive operator; return its Hermitian part."""
    op = _as_square(op)
    if np.max(np.abs(op - op.conj().T), initial=0.0) > tol_herm:
        raise DomainError("operator is not Hermitian within tolerance")
    herm = (op + op.conj().T) / 2
    if op.shape[0] and np.linalg.eigvalsh(herm)[0] < -tol_psd:
        raise DomainError("operator has eigenvalues below -tol_psd")
    return herm


def check_state(rho, tol_tr=TOL_TR):
    """Validate ``rho`` as a density operator; return its Hermitian part."""
    herm = check_positive(rho)
    if abs(np.trace(herm).real - 1.0) > tol_tr:
        raise DomainError(f"trace {np.trace(herm).real!r} differs from 1")
    return herm


def spectrum(op, tol_psd=TOL_PSD):
    """Eigenvalues of a positive operator with roundoff negatives clamped to 0."""
    w = np.linalg.eigvalsh(hermitian_part(op))
    if w.size and w[0] < -tol_psd:
        raise DomainError(f"eigenvalue {w[0]!r} below -tol_psd")
    return np.clip(w, 0.0, None)


def _check_split(dim, dims):
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise DimensionMismatchError(f"subsystem dimensions must be positive: {dims}")
    if math.prod(dims) != dim:
        raise DimensionMismatchError(f"split {dims} does not factor dimension {dim}")
    return dims


# -- constructions ----------------------------------------------------------

def ket_to_dm(psi):
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def tensor_product(*ops):
    """Kronecker product of operators (or vectors), left factor first."""
    if not ops:
        raise ValueError("need at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(op, dims, keep):
    """Reduce ``op`` onto the subsystems listed in ``keep``.

    Parameters
    ----------
    op : ndarray, shape (d, d)
    dims : sequence of int
        Subsystem dimensions with ``prod(dims) == d``.
    keep : int or sequence of int
        Indices of the factors to keep, in the order they should appear.

    Returns
    -------
    ndarray
        The reduced operator on ``kron(dims[k] for k in keep)``.
    """
    op = _as_square(op)
    dims = _check_split(op.shape[0], dims)
    keep = [keep] if isinstance(keep, (int, np.integer)) else [int(k) for k in keep]
    n = len(dims)
    if len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise DimensionMismatchError(f"invalid keep indices {keep} for {n} subsystems")
    traced = [k for k in range(n) if k not in keep]
    t = op.reshape(dims + dims)
    perm = keep + traced + [n + k for k in keep] + [n + k for k in traced]
    dk = math.prod(dims[k] for k in keep)
    dt = math.prod(dims[k] for k in traced)
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def reduced_state(psi, dims, keep):
    """Reduced density operator of the pure vector ``psi`` on ``keep``.

    Works on the vector directly, so the full ``d x d`` projector is never
    formed.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    dims = _check_split(psi.size, dims)
    keep = [keep] if isinstance(keep, (int, np.integer)) else [int(k) for k in keep]
    traced = [k for k in range(len(dims)) if k not in keep]
    dk = math.prod(dims[k] for k in keep)
    m = psi.reshape(dims).transpose(keep + traced).reshape(dk, -1)
    return m @ m.conj().T


def maximally_entangled(n):
    """Unit vector ``(1/sqrt(n)) sum_j |jj>`` on ``C^n (x) C^n``."""
    if n < 1:
        raise DomainError("dimension must be at least 1")
    v = np.zeros(n * n, dtype=complex)
    v[:: n + 1] = 1 / math.sqrt(n)
    return v


def purify(rho):
    """Canonical purification ``sum_i sqrt(l_i) |i>_ref |v_i>`` of ``rho``.

    The reference is the left factor; ``partial_trace(ket_to_dm(out), (d, d), 1)``
    reproduces ``rho``.
    """
    rho = check_state(rho)
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    d = rho.shape[0]
    # row i of the (ref, sys) coefficient matrix is sqrt(w_i) v_i
    return (np.sqrt(w)[:, None] * v.T).reshape(d * d)


def fourier_matrix(n):
    """Unitary ``F[k, j] = exp(2 pi i j k / n) / sqrt(n)``, indices from 0."""
    if n < 1:
        raise DomainError("dimension must be at least 1")
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(2j * np.pi * (jk % n) / n) / math.sqrt(n)


# -- functional calculus ----------------------------------------------------

def operator_function(op, f, support_only=False, cutoff=TOL_SUPP):
    """Apply the scalar map ``f`` to the eigenvalues of a positive operator.

    With ``support_only`` set, ``f`` is evaluated only on eigenvalues above
    ``cutoff * max eigenvalue`` and the rest of the spectrum is mapped to 0.
    This is how inverse powers become pseudo-inverses on the support.
    """
    herm = check_positive(op)
    w, v = np.linalg.eigh(herm)
    w = np.clip(w, 0.0, None)
    if support_only:
        top = w[-1] if w.size else 0.0
        mask = w > cutoff * top if top > 0 else np.zeros_like(w, dtype=bool)
        fw = np.zeros_like(w)
        fw[mask] = f(w[mask])
    else:
        fw = f(w)
    return (v * fw) @ v.conj().T


def sqrtm_psd(op):
    return operator_function(op, np.sqrt)


def invsqrtm_psd(op, cutoff=TOL_SUPP):
    return operator_function(op, lambda x: x ** -0.5, support_only=True, cutoff=cutoff)


def support_projector(op, cutoff=TOL_SUPP):
    return operator_function(op, np.ones_like, support_only=True, cutoff=cutoff)


def rank(op, cutoff=TOL_SUPP):
    w = spectrum(op)
    if not w.size or w[-1] <= 0:
        return 0
    return int(np.count_nonzero(w > cutoff * w[-1]))


# -- entropies and distances ------------------------------------------------

def _log(x, base):
    return np.log(x) if base == "e" else np.log(x) / np.log(base)


def entropy_from_spectrum(p, base=2):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * _log(p, base)))


def entropy(rho, base=2):
    """Von Neumann entropy ``-sum l log l`` with ``0 log 0 = 0``."""
    return entropy_from_spectrum(spectrum(check_state(rho)), base)


def binary_entropy(x, base=2):
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary entropy argument {x!r} outside [0, 1]")
    return entropy_from_spectrum([x, 1.0 - x], base)


def trace_norm(op):
    return float(np.linalg.norm(np.asarray(op, dtype=complex), "nuc"))


def trace_distance(a, b):
    """Unhalved trace norm ``||a - b||_1``."""
    a = _as_square(a)
    b = _as_square(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    # fixed operand order makes the result exactly symmetric
    if a.tobytes() > b.tobytes():
        a, b = b, a
    diff = a - b
    if np.allclose(diff, diff.conj().T, atol=1e-13, rtol=0):
        return float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))
    return trace_norm(diff)


def relative_entropy(rho, sigma, base=2):
    """Quantum relative entropy ``tr rho (log rho - log sigma)``.

    Returns ``inf`` when the support of ``rho`` is not contained in that of
    ``sigma`` (weight of ``rho`` on the kernel of ``sigma`` above
    ``TOL_SUPP``).  Pass ``base="e"`` for nats.
    """
    rho = check_state(rho)
    sigma = check_state(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    ws, vs = np.linalg.eigh(sigma)
    ws = np.clip(ws, 0.0, None)
    on = ws > TOL_SUPP * ws[-1]
    diag = np.einsum("ia,ij,ja->a", vs.conj(), rho, vs).real
    if diag[~on].sum() > TOL_SUPP:
        return math.inf
    cross = float(np.dot(diag[on], _log(ws[on], base)))
    return max(0.0, -entropy_from_spectrum(spectrum(rho), base) - cross)


def mutual_information(rho, dims, base=2):
    """``H(A) + H(B) - H(AB)`` for a bipartite state with ``dims = (dA, dB)``."""
    rho = check_state(rho)
    if len(dims) != 2:
        raise DimensionMismatchError("mutual_information expects a bipartite split")
    _check_split(rho.shape[0], dims)
    ha = entropy(partial_trace(rho, dims, [0]), base)
    hb = entropy(partial_trace(rho, dims, [1]), base)
    return ha + hb - entropy(rho, base)


def coherent_information_state(rho, dims, base=2):
    """``I(A>B) = H(B) - H(AB)`` for ``dims = (dA, dB)``."""
    rho = check_state(rho)
    if len(dims) != 2:
        raise DimensionMismatchError("coherent information expects a bipartite split")
    _check_split(rho.shape[0], dims)
    return entropy(partial_trace(rho, dims, [1]), base) - entropy(rho, base)


# -- random test objects ----------------------------------------------------

def random_unitary(d, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(d_out, d_in, rng):
    z = (rng.standard_normal((d_out, d_in)) + 1j * rng.standard_normal((d_out, d_in)))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(d, rng):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density(d, rng, rank=None):
    """Random mixed state ``G G^dagger / tr``, ``G`` complex Gaussian ``d x rank``."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real

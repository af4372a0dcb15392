"""Dense complex 4x4 (and 2x2) Hermitian matrix core for two-qubit states.

Conventions used throughout the package:

* computational basis order |00>, |01>, |10>, |11>;
* partial transposition acts on the *second* qubit;
* all entropies and relative entropies are base 2 (bits), so a Bell state
  has exactly one bit of entanglement;
* an eigenvalue is treated as zero when it is below ``ZERO_EIG_REL`` times
  the largest eigenvalue of the same matrix.

Everything here is a pure function on immutable ndarray values; there is no
shared mutable state.
"""

import math

from dataclasses import dataclass

import numpy as np

HERM_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-12
ZERO_EIG_REL = 1e-10

# eigenvalues closer (relatively) than this are handled as one degenerate
# cluster when fixing eigenvectors
DEGENERACY_REL = 1e-12

_LN2 = math.log(2.0)


class DimensionError(ValueError):
    """Input does not have the expected 2x2 / 4x4 / length-4 shape."""


class ContractError(ValueError):
    """Input violates a documented precondition (hermiticity, trace, ...)."""


def dagger(m):
    return np.conj(np.asarray(m)).T


def outer(u, v=None):
    """|u><v| (|u><u| when v is omitted)."""
    u = np.asarray(u, dtype=complex)
    v = u if v is None else np.asarray(v, dtype=complex)
    return np.outer(u, np.conj(v))


def braket(u, m, v=None):
    """<u|M|v> as a complex scalar; v defaults to u."""
    u = np.asarray(u, dtype=complex)
    v = u if v is None else np.asarray(v, dtype=complex)
    return complex(np.vdot(u, np.asarray(m) @ v))


def _as_square(m, name="matrix"):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def hermiticity_defect(m):
    m = _as_square(m)
    return float(np.max(np.abs(m - dagger(m))))


def check_hermitian(m, tol=HERM_TOL, name="matrix"):
    m = _as_square(m, name)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ContractError(f"{name} is not Hermitian: max |M - M^dag| = {defect:.3e}")
    return m


def check_density_matrix(rho, name="rho"):
    """Validate Hermiticity, positivity and unit trace of a 4x4 state."""
    rho = check_hermitian(rho, HERM_TOL, name)
    if rho.shape != (4, 4):
        raise DimensionError(f"{name} must be 4x4, got {rho.shape}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-10:
        raise ContractError(f"{name} has trace {tr}, expected 1")
    wmin = float(np.linalg.eigvalsh((rho + dagger(rho)) / 2).min())
    if wmin < -PSD_TOL:
        raise ContractError(f"{name} has negative eigenvalue {wmin:.3e}")
    return rho


def is_density_matrix(rho):
    try:
        check_density_matrix(rho)
    except (DimensionError, ContractError):
        return False
    return True


def partial_transpose(m):
    """Transpose with respect to the second qubit.

    out[(i,a),(j,b)] = in[(i,b),(j,a)] for i,j,a,b in {0,1}.  The map is an
    involution, preserves trace and hermiticity, and its spectrum does not
    depend on which qubit is transposed.
    """
    m = _as_square(m)
    if m.shape != (4, 4):
        raise DimensionError(f"partial transpose needs a 4x4 matrix, got {m.shape}")
    return np.ascontiguousarray(
        m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ dagger(self.vectors)

    def apply(self, f):
        """Matrix function sum_i f(lambda_i) |i><i|."""
        fv = np.array([f(v) for v in self.values])
        return (self.vectors * fv) @ dagger(self.vectors)


def _fix_phases(vectors):
    """Make the largest-magnitude amplitude of each column real positive."""
    v = vectors.copy()
    for k in range(v.shape[1]):
        idx = int(np.argmax(np.abs(v[:, k])))
        a = v[idx, k]
        if abs(a) > 0:
            v[:, k] *= np.conj(a) / abs(a)
    return v


def _orthonormalize_cluster(vectors):
    """Deterministic basis of span(vectors): Gram-Schmidt of the standard
    basis projected into the subspace, in index order."""
    proj = vectors @ dagger(vectors)
    dim, k = vectors.shape
    out = []
    for j in range(dim):
        w = proj[:, j].copy()
        for u in out:
            w -= u * np.vdot(u, w)
        n = np.linalg.norm(w)
        if n > 1e-6:
            out.append(w / n)
        if len(out) == k:
            break
    if len(out) != k:
        # projected standard basis was too degenerate; keep the input basis
        return vectors
    return np.column_stack(out)


def eig_hermitian(m, tol=1e-10):
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    Output is deterministic for a fixed input: inside (nearly) degenerate
    eigenvalue clusters the eigenvectors are rebuilt by Gram-Schmidt against
    the standard basis in index order, and every eigenvector phase is fixed
    by making its largest-magnitude amplitude real positive.
    """
    m = check_hermitian(m, tol)
    h = (m + dagger(m)) / 2
    w, v = np.linalg.eigh(h)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()

    scale = max(float(np.max(np.abs(w))), 1.0)
    gap_tol = DEGENERACY_REL * scale
    i = 0
    n = len(w)
    while i < n:
        j = i + 1
        while j < n and abs(w[j - 1] - w[j]) <= gap_tol:
            j += 1
        if j - i > 1:
            v[:, i:j] = _orthonormalize_cluster(v[:, i:j])
        i = j
    v = _fix_phases(v)
    return SpectralDecomposition(values=w, vectors=v)


def von_neumann_entropy(rho):
    """S(rho) = -sum_i lambda_i log2 lambda_i in bits, with 0 log 0 = 0."""
    rho = check_density_matrix(rho)
    w = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    w = np.clip(w, 0.0, None)
    w = w[w > 0]
    return float(-(w * np.log2(w)).sum())


def relative_entropy(rho, sigma):
    """Quantum relative entropy S(rho||sigma) in bits.

    Returns +inf when the support of rho is not contained in the support of
    sigma (detected by <k|rho|k> > 1e-10 on a sigma eigenvector with
    eigenvalue below 1e-12).
    """
    rho = check_density_matrix(rho, "rho")
    sigma = check_density_matrix(sigma, "sigma")

    wr = np.clip(np.linalg.eigvalsh((rho + dagger(rho)) / 2), 0.0, None)
    wr = wr[wr > 0]
    tr_rho_log_rho = float((wr * np.log2(wr)).sum())

    dec = eig_hermitian(sigma)
    diag = np.real(np.einsum("ik,ij,jk->k", np.conj(dec.vectors), rho, dec.vectors))
    tr_rho_log_sigma = 0.0
    for lam, pk in zip(dec.values, diag):
        if lam < 1e-12:
            if pk > 1e-10:
                return math.inf
            continue
        tr_rho_log_sigma += pk * math.log2(lam)
    val = tr_rho_log_rho - tr_rho_log_sigma
    if val < -PSD_TOL:
        raise ContractError(f"relative entropy came out negative: {val:.3e}")
    return max(val, 0.0)


def trace_distance(a, b):
    """(1/2) tr |a - b|."""
    d = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    w = np.linalg.eigvalsh((d + dagger(d)) / 2)
    return float(np.abs(w).sum() / 2)


# ---------------------------------------------------------------------------
# random state generation (explicitly seeded; no global RNG state)
# ---------------------------------------------------------------------------

def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_unitary(rng, dim=2):
    """Haar-distributed unitary via phase-fixed QR of a Ginibre matrix."""
    rng = _rng(rng)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r).copy()
    ph = ph / np.abs(ph)
    return q * ph


def random_pure_state(rng, dim=4):
    rng = _rng(rng)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(rng, dim=4):
    """Ginibre-ensemble state: normalized A A^dag with iid Gaussian A."""
    rng = _rng(rng)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = a @ dagger(a)
    return m / np.trace(m).real


def random_product_state(rng):
    """Random |a> ⊗ |b> pure product state of two qubits."""
    rng = _rng(rng)
    return np.kron(random_pure_state(rng, 2), random_pure_state(rng, 2))


def random_separable_mixture(rng, n_terms=4):
    """Random convex mixture of pure product states (hence separable)."""
    rng = _rng(rng)
    w = rng.dirichlet(np.ones(n_terms))
    out = np.zeros((4, 4), dtype=complex)
    for p in w:
        v = random_product_state(rng)
        out += p * outer(v)
    return out


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def matrix_to_json(m):
    m = _as_square(m)
    return {
        "dim": int(m.shape[0]),
        "re": np.real(m).tolist(),
        "im": np.imag(m).tolist(),
    }


def matrix_from_json(obj):
    dim = int(obj["dim"])
    m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if m.shape != (dim, dim):
        raise DimensionError(f"matrix payload shape {m.shape} != dim {dim}")
    return m


def state_to_json(v):
    v = np.asarray(v, dtype=complex)
    return {"re": np.real(v).tolist(), "im": np.imag(v).tolist()}


def state_from_json(obj):
    v = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return v


__all__ = [
    "HERM_TOL",
    "PSD_TOL",
    "ZERO_EIG_REL",
    "DimensionError",
    "ContractError",
    "SpectralDecomposition",
    "dagger",
    "outer",
    "braket",
    "hermiticity_defect",
    "check_hermitian",
    "check_density_matrix",
    "is_density_matrix",
    "partial_transpose",
    "eig_hermitian",
    "von_neumann_entropy",
    "relative_entropy",
    "trace_distance",
    "random_unitary",
    "random_pure_state",
    "random_density_matrix",
    "random_product_state",
    "random_separable_mixture",
    "matrix_to_json",
    "matrix_from_json",
    "state_to_json",
    "state_from_json",
]

"""Inverse problem for the relative entropy of entanglement (REE).

A full-rank separable two-qubit state sigma whose partial transposition is
positive semidefinite and rank 3 (an *edge state*) is the closest separable
state (CSS) of a one-parameter family of entangled states

    rho(x) = sigma - x G(sigma),      0 < x <= x_max,

where G(sigma) is the divided-difference (logarithmic-mean) map built from
the kernel |phi> of sigma^Gamma:

    G = sum_ij G_ij |i><i| (|phi><phi|)^Gamma |j><j|,
    G_ij = lambda_i                                  if lambda_i = lambda_j,
    G_ij = (lambda_i - lambda_j) / ln(lambda_i/lambda_j)   otherwise,

with |i>, lambda_i the eigenvectors/eigenvalues of sigma.  The natural
logarithm is forced by the equal-eigenvalue branch: lambda_i is the
lambda_j -> lambda_i limit of the quotient only in base e.

For every such pair the REE has the closed form

    E_R(rho) = S(sigma) - S(rho) + x tr[(|phi><phi|)^Gamma sigma log2 sigma]

and Z = x (|phi><phi|)^Gamma is an entanglement witness with tr(Z sigma) = 0.
This module implements the kernel extraction, the G map, x_max, the closed
REE, the witness checks, the additivity conditions, and a seedable generator
of random edge states.
"""

import math

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .qmat import (
    PSD_TOL,
    ZERO_EIG_REL,
    ContractError,
    SpectralDecomposition,
    braket,
    check_density_matrix,
    dagger,
    eig_hermitian,
    outer,
    partial_transpose,
    random_density_matrix,
    relative_entropy,
    von_neumann_entropy,
)


class NotEdgeStateError(ValueError):
    """sigma^Gamma is full rank (or not PSD): sigma is not an edge state."""


class AmbiguousKernelError(ValueError):
    """sigma^Gamma has rank <= 2; the kernel vector is not unique.

    Such states must be handled as limits of full-rank edge-state families.
    """


class LowRankCssError(ValueError):
    """sigma itself is rank deficient; the generic G map needs full rank.

    Use a limiting family of full-rank edge states, or pass
    ``allow_low_rank=True`` to use the continuous zero-eigenvalue extension.
    """


class DegenerateCssError(ValueError):
    """G(sigma) vanishes: sigma generates no entangled family."""


class XRangeError(ValueError):
    """Requested x lies outside [0, x_max]."""


class WitnessViolationError(RuntimeError):
    """A witness verification check failed; ``check_id`` names which one."""

    def __init__(self, check_id, message):
        super().__init__(f"witness check '{check_id}' failed: {message}")
        self.check_id = check_id


class InconsistencyError(RuntimeError):
    """Two independent evaluations that must agree did not."""


def kernel_of_edge_state(sigma, psd_tol=1e-9):
    """Unit kernel vector |phi> of sigma^Gamma for an edge state sigma.

    The global phase is fixed by making the largest-magnitude amplitude real
    positive.  Raises NotEdgeStateError when sigma^Gamma is full rank or has
    a genuinely negative eigenvalue, and AmbiguousKernelError when the
    kernel has dimension >= 2.
    """
    sigma = check_density_matrix(sigma, "sigma")
    spt = partial_transpose(sigma)
    dec = eig_hermitian(spt)
    scale = max(float(dec.values.max()), 1e-300)
    if float(dec.values.min()) < -psd_tol:
        raise NotEdgeStateError(
            f"sigma^Gamma has negative eigenvalue {dec.values.min():.3e}; "
            "sigma is entangled, not a separable edge state"
        )
    zero = dec.values < ZERO_EIG_REL * scale
    n_zero = int(zero.sum())
    if n_zero == 0:
        raise NotEdgeStateError("sigma^Gamma is full rank; sigma is not an edge state")
    if n_zero > 1:
        raise AmbiguousKernelError(
            f"sigma^Gamma has rank {4 - n_zero} <= 2; kernel is not unique "
            "(use a limiting full-rank family)"
        )
    phi = dec.vectors[:, int(np.argmax(zero))].copy()
    res = float(np.linalg.norm(spt @ phi))
    if res > 1e-9:
        raise InconsistencyError(f"kernel residual ||sigma^Gamma phi|| = {res:.3e}")
    return phi


def schmidt_coefficients(phi):
    """Squared singular values (p0, p1) of the 2x2 amplitude matrix, p0 >= p1."""
    phi = np.asarray(phi, dtype=complex).reshape(2, 2)
    s = np.linalg.svd(phi, compute_uv=False)
    return float(s[0] ** 2), float(s[1] ** 2)


def is_kernel_entangled(phi, tol=1e-10):
    """(entangled?, p0) for a unit vector phi; entangled iff p0 < 1 - tol."""
    p0, _ = schmidt_coefficients(phi)
    return bool(p0 < 1.0 - tol), p0


def log_mean(a, b):
    """Logarithmic mean (a - b)/(ln a - ln b), continuous at a = b.

    Computed through log1p so nearly equal arguments lose no precision.
    """
    if a == b:
        return a
    r = (a - b) / b
    return b * r / math.log1p(r)


def build_g(sigma, phi, allow_low_rank=False):
    """Divided-difference map G(sigma) for an edge state with kernel phi.

    G is Hermitian and traceless, and does not depend on the choice of basis
    inside degenerate eigenspaces of sigma.  With ``allow_low_rank`` the
    kernel G_ij is extended by continuity (G_ij -> 0 when an eigenvalue
    vanishes), which reproduces the limit of full-rank edge-state families
    for the explicitly known low-rank CSSs.
    """
    dec = eig_hermitian(sigma)
    scale = max(float(dec.values.max()), 1e-300)
    zero = dec.values < ZERO_EIG_REL * scale
    if zero.any() and not allow_low_rank:
        raise LowRankCssError(
            "sigma is rank deficient; generic G needs full rank "
            "(pass allow_low_rank=True for the continuous extension)"
        )
    lam = np.clip(dec.values, 0.0, None)
    n = len(lam)
    k = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            if zero[i] or zero[j]:
                k[i, j] = 0.0
            else:
                k[i, j] = log_mean(lam[i], lam[j])
    phi_pt = partial_transpose(outer(phi))
    b = dagger(dec.vectors) @ phi_pt @ dec.vectors
    g = dec.vectors @ (k * b) @ dagger(dec.vectors)
    g = (g + dagger(g)) / 2
    tr = abs(np.trace(g))
    if not zero.any() and tr > 1e-10:
        raise InconsistencyError(f"G came out with trace {tr:.3e}, expected 0")
    return g


def x_max(sigma, g, eig_floor=-1e-12, precision=1e-12):
    """Largest x >= 0 keeping sigma - x G positive semidefinite.

    Found by bisection on the minimum eigenvalue; absolute precision on x is
    ``precision``.  Closed-form threshold expressions for particular
    families serve only as cross-checks against this value.
    """
    sigma = np.asarray(sigma, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if float(np.max(np.abs(g))) < 1e-14:
        raise DegenerateCssError("G(sigma) = 0: no entangled family is generated")

    def min_eig(x):
        m = sigma - x * g
        return float(np.linalg.eigvalsh((m + dagger(m)) / 2).min())

    lo = 0.0
    if min_eig(lo) < eig_floor:
        raise ContractError("sigma itself is not positive semidefinite")
    hi = 1.0
    for _ in range(80):
        if min_eig(hi) < eig_floor:
            break
        lo = hi
        hi *= 2.0
    else:
        raise DegenerateCssError("sigma - x G stays PSD out to x = 2^80")
    while hi - lo > precision:
        mid = (lo + hi) / 2
        if min_eig(mid) >= eig_floor:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class CssSolution:
    """Everything derived from one closest separable state sigma.

    sigma      -- the boundary separable state (4x4 density matrix)
    kernel     -- unit kernel |phi> of sigma^Gamma
    g          -- the map G(sigma), Hermitian and traceless
    xmax       -- admissible range of the family parameter is [0, xmax]
    spectral   -- spectral decomposition of sigma
    """

    sigma: np.ndarray
    kernel: np.ndarray
    g: np.ndarray
    xmax: float
    spectral: SpectralDecomposition

    def to_json(self):
        from .qmat import matrix_to_json, state_to_json

        return {
            "sigma": matrix_to_json(self.sigma),
            "kernel": state_to_json(self.kernel),
            "g": matrix_to_json(self.g),
            "x_max": self.xmax,
        }


def solve_css(sigma, allow_low_rank=False):
    """Bundle kernel, G and x_max for an edge state sigma."""
    sigma = check_density_matrix(sigma, "sigma")
    phi = kernel_of_edge_state(sigma)
    g = build_g(sigma, phi, allow_low_rank=allow_low_rank)
    xm = x_max(sigma, g)
    return CssSolution(
        sigma=sigma, kernel=phi, g=g, xmax=xm, spectral=eig_hermitian(sigma)
    )


def generate_rho(css, x, check_entangled=True):
    """rho(x) = sigma - x G(sigma); entangled for every x > 0 up to x_max."""
    if not (-1e-12 <= x <= css.xmax + 1e-12):
        raise XRangeError(f"x = {x} outside [0, {css.xmax}]")
    rho = css.sigma - x * css.g
    rho = (rho + dagger(rho)) / 2
    wmin = float(np.linalg.eigvalsh(rho).min())
    if wmin < -1e-10:
        raise InconsistencyError(f"rho(x) has negative eigenvalue {wmin:.3e}")
    if check_entangled and x >= 1e-6:
        ppt_min = float(np.linalg.eigvalsh(partial_transpose(rho)).min())
        if ppt_min >= 0.0:
            raise InconsistencyError(
                f"rho(x={x}) is PPT (min eig {ppt_min:.3e}); it should be entangled"
            )
    return rho


def ree_closed(rho, css, x, cross_check=True):
    """Closed-form REE of rho(x) = sigma - x G(sigma), in bits.

    E_R = S(sigma) - S(rho) + x tr[(|phi><phi|)^Gamma sigma log2 sigma].
    Every call cross-checks the value against a direct relative-entropy
    evaluation and raises InconsistencyError beyond 1e-9.
    """
    resid = float(np.max(np.abs(rho - (css.sigma - x * css.g))))
    if resid > 1e-10:
        raise ContractError(
            f"rho does not match sigma - x G for x={x} (max diff {resid:.3e})"
        )
    lam = np.clip(css.spectral.values, 0.0, None)
    lam_log = np.where(lam > 0, lam * np.log2(np.where(lam > 0, lam, 1.0)), 0.0)
    slog = (css.spectral.vectors * lam_log) @ dagger(css.spectral.vectors)
    phi_pt = partial_transpose(outer(css.kernel))
    corr = float(np.real(np.trace(phi_pt @ slog)))
    val = von_neumann_entropy(css.sigma) - von_neumann_entropy(rho) + x * corr
    if cross_check:
        direct = relative_entropy(rho, css.sigma)
        if not math.isfinite(direct) or abs(direct - val) > 1e-9:
            raise InconsistencyError(
                f"closed REE {val!r} disagrees with direct S(rho||sigma) {direct!r}"
            )
    return val


# ---------------------------------------------------------------------------
# entanglement witness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessOperator:
    """Z = x (|phi><phi|)^Gamma: tr(Z sigma') >= 0 on separables, tr(Z rho) < 0."""

    z: np.ndarray
    scale_x: float


def witness(css, x):
    if x <= 0:
        raise XRangeError(f"witness needs x > 0, got {x}")
    z = x * partial_transpose(outer(css.kernel))
    return WitnessOperator(z=(z + dagger(z)) / 2, scale_x=float(x))


def _divided_difference_matrix(values):
    n = len(values)
    k = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            k[i, j] = log_mean(values[i], values[j])
    return k


def verify_witness(w, rho, css, n_separable=10000, seed=7, identity_tol=1e-9):
    """Run the four witness checks; raise WitnessViolationError on failure.

    (a) x <i|(|phi><phi|)^Gamma|j> = delta_ij - <i|rho|j>/G_ij entrywise
        (natural-log divided differences, in sigma's eigenbasis);
    (b) tr(Z sigma) = 0;
    (c) tr(Z rho) < 0;
    (d) tr(Z sigma') >= -1e-12 over random separable mixtures.

    Returns a report dict with the measured extremes.
    """
    x = w.scale_x
    dec = css.spectral
    if float(dec.values.min()) < ZERO_EIG_REL * float(dec.values.max()):
        raise LowRankCssError("witness identity check needs full-rank sigma")

    phi_pt = partial_transpose(outer(css.kernel))
    v = dec.vectors
    lhs = x * (dagger(v) @ phi_pt @ v)
    rho_eig = dagger(v) @ rho @ v
    k = _divided_difference_matrix(np.clip(dec.values, 1e-300, None))
    rhs = np.eye(4) - rho_eig / k
    ident = float(np.max(np.abs(lhs - rhs)))
    if ident > identity_tol:
        raise WitnessViolationError("identity", f"max entrywise diff {ident:.3e}")

    tr_zs = float(np.real(np.trace(w.z @ css.sigma)))
    if abs(tr_zs) > 1e-9:
        raise WitnessViolationError("trace-sigma", f"tr(Z sigma) = {tr_zs:.3e}")

    tr_zr = float(np.real(np.trace(w.z @ rho)))
    if x > 1e-12 and tr_zr >= 0.0:
        raise WitnessViolationError("trace-rho", f"tr(Z rho) = {tr_zr:.3e} not < 0")

    rng = np.random.default_rng(seed)
    # pure product states are the extreme points of the separable set, so
    # sampling them bounds every mixture; mix a few anyway for good measure
    a = rng.standard_normal((n_separable, 2)) + 1j * rng.standard_normal((n_separable, 2))
    b = rng.standard_normal((n_separable, 2)) + 1j * rng.standard_normal((n_separable, 2))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    prod = np.einsum("ni,nj->nij", a, b).reshape(n_separable, 4)
    vals = np.real(np.einsum("ni,ij,nj->n", np.conj(prod), w.z, prod))
    min_sep = float(vals.min())
    if min_sep < -1e-12:
        raise WitnessViolationError("separable", f"min tr(Z sigma') = {min_sep:.3e}")

    return {
        "identity_max_diff": ident,
        "trace_sigma": tr_zs,
        "trace_rho": tr_zr,
        "min_separable": min_sep,
        "n_separable": int(n_separable),
    }


# ---------------------------------------------------------------------------
# additivity conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdditivityReport:
    """Commutation-based additivity flags for a generated (rho, sigma) pair.

    When [rho, sigma] = 0 the family simplifies to
    rho = sigma - x (|phi><phi|)^Gamma sigma and
    (rho sigma^-1)^Gamma = I - x |phi><phi|, whose minimum eigenvalue 1 - x
    is always >= -1 (weak additivity); the REE is strongly additive when
    additionally x <= 1.
    """

    commutes: bool
    x_value: float
    p0: float
    weakly_additive: Optional[bool]
    strongly_additive: Optional[bool]
    min_eig_check: Optional[float]
    commutator_norm: float


def additivity_check(rho, css, x, tol=1e-9):
    sigma = css.sigma
    phi_pt = partial_transpose(outer(css.kernel))
    c_rho_sigma = float(np.max(np.abs(rho @ sigma - sigma @ rho)))
    c_sigma_phi = float(np.max(np.abs(sigma @ phi_pt - phi_pt @ sigma)))
    commutes = c_rho_sigma <= tol
    if commutes != (c_sigma_phi <= tol):
        raise InconsistencyError(
            "commutation tests disagree: "
            f"||[rho,sigma]|| = {c_rho_sigma:.3e}, "
            f"||[sigma,(phi phi)^Gamma]|| = {c_sigma_phi:.3e}"
        )
    _, p0 = is_kernel_entangled(css.kernel)
    if not commutes:
        return AdditivityReport(
            commutes=False,
            x_value=float(x),
            p0=p0,
            weakly_additive=None,
            strongly_additive=None,
            min_eig_check=None,
            commutator_norm=c_rho_sigma,
        )

    simplified = sigma - x * (phi_pt @ sigma)
    resid = float(np.max(np.abs(rho - (simplified + dagger(simplified)) / 2)))
    if resid > tol:
        raise InconsistencyError(
            f"commuting pair does not satisfy rho = sigma - x (phi phi)^Gamma sigma "
            f"(max diff {resid:.3e})"
        )

    dec = css.spectral
    lam = np.clip(dec.values, 1e-300, None)
    sigma_inv = (dec.vectors * (1.0 / lam)) @ dagger(dec.vectors)
    direct = partial_transpose(rho @ sigma_inv)
    direct = (direct + dagger(direct)) / 2
    expected = np.eye(4) - x * outer(css.kernel)
    if float(np.max(np.abs(direct - expected))) > tol:
        raise InconsistencyError(
            "(rho sigma^-1)^Gamma differs from I - x |phi><phi| beyond tolerance"
        )
    min_eig = float(np.linalg.eigvalsh(direct).min())
    weakly = min_eig >= -1.0 - 1e-9
    if not weakly:
        raise InconsistencyError(
            f"(rho sigma^-1)^Gamma has eigenvalue {min_eig:.3e} < -1"
        )
    return AdditivityReport(
        commutes=True,
        x_value=float(x),
        p0=p0,
        weakly_additive=weakly,
        strongly_additive=bool(x <= 1.0 + 1e-12),
        min_eig_check=min_eig,
        commutator_norm=c_rho_sigma,
    )


# ---------------------------------------------------------------------------
# random edge states
# ---------------------------------------------------------------------------

def random_edge_state(rng, max_tries=200):
    """Random full-rank edge state: sigma PSD full rank, sigma^Gamma PSD rank 3.

    A Ginibre state mu with entangled partial transpose (min eig m < 0) is
    shifted to sigma = (mu + |m| I)/(1 + 4 |m|), which puts exactly one
    eigenvalue of sigma^Gamma at zero.  Takes a seed or Generator.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    for _ in range(max_tries):
        mu = random_density_matrix(rng)
        w = np.linalg.eigvalsh(partial_transpose(mu))
        m = float(w.min())
        if m >= -1e-12:
            continue
        sigma = (mu + abs(m) * np.eye(4)) / (1.0 + 4.0 * abs(m))
        sigma = (sigma + dagger(sigma)) / 2
        wg = np.linalg.eigvalsh(partial_transpose(sigma))
        # needs one clean zero: second-smallest eigenvalue well separated
        if wg[1] < 1e-6:
            continue
        phi = kernel_of_edge_state(sigma)
        entangled, _ = is_kernel_entangled(phi, tol=1e-8)
        if not entangled:
            continue
        return sigma
    raise RuntimeError(f"no edge state found in {max_tries} tries")


__all__ = [
    "NotEdgeStateError",
    "AmbiguousKernelError",
    "LowRankCssError",
    "DegenerateCssError",
    "XRangeError",
    "WitnessViolationError",
    "InconsistencyError",
    "CssSolution",
    "WitnessOperator",
    "AdditivityReport",
    "kernel_of_edge_state",
    "schmidt_coefficients",
    "is_kernel_entangled",
    "log_mean",
    "build_g",
    "x_max",
    "solve_css",
    "generate_rho",
    "ree_closed",
    "witness",
    "verify_witness",
    "additivity_check",
    "random_edge_state",
]

"""Named two-qubit state families, their closed-form closest separable
states, and numeric in-family inversion where no closed form exists.

Families (computational basis |00>, |01>, |10>, |11>):

* Bell-diagonal states and their CSS;
* the X-shaped edge family sigma_Z = diag(R1, [R2 Y; Y R3], R4) with
  Y = sqrt(R1 R4) e^{i phase}, its analytic G map, and the extremal state
  rho'_Z reached at x'_max = (R1+R4)/R1;
* Horodecki, Vedral-Plenio, generalized Vedral-Plenio, Gisin, generalized
  Horodecki, and Verstraete-Verschelde states;
* the symmetric-case inversion (R2 = R3) and the damped-Newton inversion
  for Gisin / generalized Horodecki states;
* the one-parameter family of Bell-state CSSs demonstrating that a Bell
  state has no unique closest separable state.
"""

import math

import numpy as np

from . import ree_core
from .qmat import (
    check_density_matrix,
    dagger,
    eig_hermitian,
    outer,
    partial_transpose,
    relative_entropy,
)
from .ree_core import CssSolution, generate_rho, solve_css, x_max


class SeparableStateError(ValueError):
    """The requested state is separable: it is its own CSS and has REE 0."""


class NoSolutionError(RuntimeError):
    """In-family root finding did not converge within the multistart budget."""


# ---------------------------------------------------------------------------
# bases and elementary states
# ---------------------------------------------------------------------------

KET_00, KET_01, KET_10, KET_11 = np.eye(4, dtype=complex)

PSI_PLUS = (KET_01 + KET_10) / math.sqrt(2)
PSI_MINUS = (KET_01 - KET_10) / math.sqrt(2)
PHI_PLUS = (KET_00 + KET_11) / math.sqrt(2)
PHI_MINUS = (KET_00 - KET_11) / math.sqrt(2)

_BELL_VECTORS = {
    "psi+": PSI_PLUS,
    "psi-": PSI_MINUS,
    "phi+": PHI_PLUS,
    "phi-": PHI_MINUS,
}

# partial transposition maps a Bell projector to (I - 2 P_partner)/2
BELL_PARTNER = {"psi+": "phi-", "phi-": "psi+", "psi-": "phi+", "phi+": "psi-"}

DEFAULT_BELL_ORDER = ("psi+", "psi-", "phi+", "phi-")


def bell_basis(order=DEFAULT_BELL_ORDER):
    """Columns beta_1..beta_4 of the Bell basis in the given label order."""
    if sorted(order) != sorted(DEFAULT_BELL_ORDER):
        raise ValueError(f"order must be a permutation of {DEFAULT_BELL_ORDER}")
    return np.column_stack([_BELL_VECTORS[k] for k in order])


def bell_diagonal_state(weights, order=DEFAULT_BELL_ORDER):
    """sum_i r_i |beta_i><beta_i| for a probability 4-vector r."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or (w < -1e-12).any() or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must be a probability 4-vector, got {weights}")
    b = bell_basis(order)
    return (b * w) @ dagger(b)


def pure_state(amplitudes):
    v = np.asarray(amplitudes, dtype=complex)
    if v.shape != (4,):
        raise ValueError("pure state needs 4 amplitudes")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-12:
        raise ValueError(f"amplitudes have norm {n}, expected 1")
    return v


def psi_p(P, phase=0.0):
    """|psi_P> = sqrt(P)|01> + e^{i phase} sqrt(1-P)|10>."""
    if not 0.0 <= P <= 1.0:
        raise ValueError(f"P must be in [0, 1], got {P}")
    return math.sqrt(P) * KET_01 + np.exp(1j * phase) * math.sqrt(1.0 - P) * KET_10


# ---------------------------------------------------------------------------
# Bell-diagonal CSS
# ---------------------------------------------------------------------------

def css_bell_diagonal(weights, order=DEFAULT_BELL_ORDER):
    """CSS of a Bell-diagonal state with dominant weight r1.

    For r1 >= 1/2 the CSS is  sigma = (1/2)|b1><b1|
    + sum_{i>=2} r_i/(2(1-r1)) |b_i><b_i|; for r1 < 1/2 the state is
    separable and is returned unchanged (REE 0).
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or (w < -1e-12).any() or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must be a probability 4-vector, got {weights}")
    r1 = w[0]
    if r1 < 0.5:
        return bell_diagonal_state(w, order)
    if r1 >= 1.0 - 1e-12:
        # a pure Bell state: every Bell-diagonal state with one eigenvalue
        # 1/2 works; pick the uniform representative
        cw = np.array([0.5, 1 / 6, 1 / 6, 1 / 6])
    else:
        rest = w[1:] / (2.0 * (1.0 - r1))
        cw = np.concatenate([[0.5], rest])
    return bell_diagonal_state(cw, order)


def bell_css_solution(k, order=DEFAULT_BELL_ORDER):
    """CssSolution for sigma = (1/2)|b1><b1| + (1/2k) sum k_i |b_i><b_i|.

    Valid for any k_i >= 0 (not all zero).  The kernel is the Bell state
    paired with b1 under partial transposition, and G is diagonal in the
    Bell basis: G = -(1/4)|b1><b1| + (1/2) sum_{i>=2} w_i |b_i><b_i| where
    w_i are the sigma weights.  This is the limit of full-rank edge
    families, so rank-deficient k (zero entries) is allowed.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (3,) or (k < 0).any() or k.sum() <= 0:
        raise ValueError(f"k must be 3 nonnegative numbers, not all 0, got {k}")
    w = np.concatenate([[0.5], k / (2.0 * k.sum())])
    sigma = bell_diagonal_state(w, order)
    b = bell_basis(order)
    kernel = _BELL_VECTORS[BELL_PARTNER[order[0]]]
    gw = np.concatenate([[-0.25], 0.5 * w[1:]])
    g = (b * gw) @ dagger(b)
    g = (g + dagger(g)) / 2
    xm = x_max(sigma, g)
    return CssSolution(
        sigma=sigma, kernel=kernel, g=g, xmax=xm, spectral=eig_hermitian(sigma)
    )


# ---------------------------------------------------------------------------
# the sigma_Z family
# ---------------------------------------------------------------------------

def _check_sigma_z_params(R, require_full_rank=False):
    R = np.asarray(R, dtype=float)
    if R.shape != (4,) or (R < -1e-12).any():
        raise ValueError(f"R must be 4 nonnegative numbers, got {R}")
    if abs(R.sum() - 1.0) > 1e-9:
        raise ValueError(f"R must sum to 1, got sum {R.sum()}")
    delta = R[1] * R[2] - R[0] * R[3]
    if delta < -1e-12:
        raise ValueError(
            f"positivity needs R2 R3 >= R1 R4; got R2 R3 - R1 R4 = {delta:.3e}"
        )
    if require_full_rank and (min(R) < 1e-12 or delta < 1e-12):
        raise ValueError("full-rank sigma_Z needs R_i > 0 and R2 R3 > R1 R4")
    return R


def sigma_z_state(R, phase=0.0):
    """The X-shaped edge state with diagonal R and coupling Y = sqrt(R1 R4)."""
    R = _check_sigma_z_params(R)
    r1, r2, r3, r4 = R
    y = math.sqrt(r1 * r4) * np.exp(1j * phase)
    m = np.array(
        [
            [r1, 0, 0, 0],
            [0, r2, y, 0],
            [0, np.conj(y), r3, 0],
            [0, 0, 0, r4],
        ],
        dtype=complex,
    )
    return m


def sigma_z_kernel(R, phase=0.0):
    """Kernel of sigma_Z^Gamma: (sqrt(R4)|00> - e^{-i phase} sqrt(R1)|11>)/N."""
    R = _check_sigma_z_params(R)
    r1, _, _, r4 = R
    n = r1 + r4
    if n <= 0:
        raise ValueError("kernel undefined for R1 = R4 = 0")
    v = np.zeros(4, dtype=complex)
    v[0] = math.sqrt(r4 / n)
    v[3] = -np.exp(-1j * phase) * math.sqrt(r1 / n)
    # fix global phase: largest amplitude real positive
    idx = int(np.argmax(np.abs(v)))
    a = v[idx]
    if abs(a) > 0:
        v = v * (np.conj(a) / abs(a))
    return v


def _sigma_z_scalars(R):
    """z, L, and the building blocks u = d z, w = d L used by the analytic G.

    L = ln(R2+R3-z) - ln(R2+R3+z) is evaluated through
    R2+R3-z = 4 (R2 R3 - Y^2)/(R2+R3+z) to stay accurate near the boundary
    R2 R3 = Y^2, where L -> -inf and d z -> 0.
    """
    r1, r2, r3, r4 = R
    y2 = r1 * r4
    s = r2 + r3
    diff = r2 - r3
    z = math.sqrt(diff * diff + 4.0 * y2)
    delta = r2 * r3 - y2
    n = r1 + r4
    w = 1.0 / (n * z * z)  # = d * L
    if delta <= 0.0:
        lval = -math.inf
        u = 0.0  # = d * z -> 0 as L -> -inf
    else:
        lval = math.log(4.0 * delta) - 2.0 * math.log(s + z)
        u = 1.0 / (n * z * lval)
    return z, lval, u, w


def analytic_g_sigma_z(R, phase=0.0):
    """Closed-form G(sigma_Z); matches the generic divided-difference map.

    With z = sqrt((R2-R3)^2 + 4 Y^2), L = ln(R2+R3-z) - ln(R2+R3+z) and
    1/d = (R1+R4) z^2 L:

        G11 = G44 = Y^2/(R1+R4)
        G22 = -2 Y^2 d [(R2-R3)(z + R2 L) + 2 Y^2 L]
        G33 = -2 G11 - G22
        G23 = -Y d [2 Y^2 (R2+R3) L - (R2-R3)^2 z]

    (diagonal indices in the |00>,|01>,|10>,|11> order; the off-diagonal
    element carries the phase of Y).
    """
    R = _check_sigma_z_params(R)
    r1, r2, r3, r4 = R
    y = math.sqrt(r1 * r4)
    y2 = r1 * r4
    n = r1 + r4
    if n <= 0:
        raise ValueError("analytic G undefined for R1 = R4 = 0")
    diff = r2 - r3
    z, _, u, w = _sigma_z_scalars(R)
    g11 = y2 / n
    g22 = -2.0 * y2 * (diff * u + (diff * r2 + 2.0 * y2) * w)
    g33 = -2.0 * g11 - g22
    g23 = -y * (2.0 * y2 * (r2 + r3) * w - diff * diff * u)
    g23c = g23 * np.exp(1j * phase)
    return np.array(
        [
            [g11, 0, 0, 0],
            [0, g22, g23c, 0],
            [0, np.conj(g23c), g33, 0],
            [0, 0, 0, g11],
        ],
        dtype=complex,
    )


def css_sigma_z(R, phase=0.0):
    """CssSolution for a sigma_Z edge state (kernel and G in closed form)."""
    R = _check_sigma_z_params(R)
    sigma = sigma_z_state(R, phase)
    check_density_matrix(sigma, "sigma_Z")
    kernel = sigma_z_kernel(R, phase)
    g = analytic_g_sigma_z(R, phase)
    xm = x_max(sigma, g)
    return CssSolution(
        sigma=sigma, kernel=kernel, g=g, xmax=xm, spectral=eig_hermitian(sigma)
    )


def sigma_z_x_bounds(R):
    """Closed-form candidates for x_max of the sigma_Z family (cross-checks).

    x' = (R1+R4)/max(R1,R4) keeps the smaller corner entry nonnegative.
    x'' is the first positive root of det of the middle block of
    sigma - x G, i.e. of  Dbar x^2 - f x + D = 0 with D = R2 R3 - Y^2,
    Dbar = G22 G33 - G23^2, f = R2 G33 + G22 R3 - 2 Y G23.  Both readings
    of the quadratic-root expression are reported; the parenthesized one,
    (f - sqrt(f^2 - 4 D Dbar))/(2 Dbar), is the actual root.  Bisection on
    the minimum eigenvalue remains the authoritative x_max.
    """
    R = _check_sigma_z_params(R)
    r1, r2, r3, r4 = R
    y = math.sqrt(r1 * r4)
    g = analytic_g_sigma_z(R)
    g22, g33, g23 = g[1, 1].real, g[2, 2].real, g[1, 2].real
    d_small = r2 * r3 - y * y
    d_bar = g22 * g33 - g23 * g23
    f = r2 * g33 + g22 * r3 - 2.0 * y * g23
    x_prime = (r1 + r4) / max(r1, r4) if max(r1, r4) > 0 else math.inf
    disc = f * f - 4.0 * d_small * d_bar
    root = math.sqrt(max(disc, 0.0))
    x_parenthesized = (f - root) / (2.0 * d_bar) if d_bar != 0 else (
        d_small / f if f != 0 else math.inf
    )
    x_literal = f - root / (2.0 * d_bar) if d_bar != 0 else math.inf
    sigma = sigma_z_state(R)
    xm = x_max(sigma, g)
    readings = {"parenthesized": x_parenthesized, "literal": x_literal}
    best = min(
        readings,
        key=lambda k: abs(min(x_prime, readings[k]) - xm)
        if math.isfinite(readings[k])
        else math.inf,
    )
    return {
        "x_prime": x_prime,
        "x_second_parenthesized": x_parenthesized,
        "x_second_literal": x_literal,
        "x_max_bisect": xm,
        "matching_reading": best,
    }


def rho_prime_z(R, phase=0.0):
    """Extremal state of the sigma_Z family at x' = (R1+R4)/R1 (needs R1 >= R4).

    Rank-deficient (the |11> corner reaches zero):

        r1 = R1 - R4
        r2 = R2 + (2 R4/z^2)(R2^2 - R2 R3 + 2 Y^2) + (2 R4 (R2-R3))/(L z)
        r3 = 1 - r1 - r2
        y  = [2 (R1+R2) R4 - (r2-R2)(R2-R3)] / (2 Y)

    The entries must coincide with generate_rho(css_sigma_z(R), x') to 1e-9
    (exercised by the dual-path tests).
    """
    R = _check_sigma_z_params(R)
    r1_, r2_, r3_, r4_ = R
    if r1_ < r4_ - 1e-12:
        raise ValueError(f"rho'_Z needs R1 >= R4, got R1={r1_}, R4={r4_}")
    if r1_ <= 0 or r4_ <= 0:
        raise ValueError("rho'_Z needs R1, R4 > 0")
    y_big = math.sqrt(r1_ * r4_)
    z, lval, _, _ = _sigma_z_scalars(R)
    diff = r2_ - r3_
    lterm = 0.0 if (diff == 0.0 or not math.isfinite(lval)) else (
        2.0 * r4_ * diff / (lval * z)
    )
    r2 = r2_ + (2.0 * r4_ / (z * z)) * (r2_ * r2_ - r2_ * r3_ + 2.0 * y_big * y_big)
    r2 += lterm
    r1 = r1_ - r4_
    r3 = 1.0 - r1 - r2
    y = (2.0 * (r1_ + r2_) * r4_ - (r2 - r2_) * diff) / (2.0 * y_big)

    xp = (r1_ + r4_) / r1_
    bounds = sigma_z_x_bounds(R)
    if xp > bounds["x_max_bisect"] + 1e-9:
        raise ValueError(
            f"x' = {xp:.6g} exceeds x_max = {bounds['x_max_bisect']:.6g}; "
            "the extremal state leaves the positive cone"
        )
    yc = y * np.exp(1j * phase)
    m = np.array(
        [
            [r1, 0, 0, 0],
            [0, r2, yc, 0],
            [0, np.conj(yc), r3, 0],
            [0, 0, 0, 0.0],
        ],
        dtype=complex,
    )
    return m


def invert_symmetric(r1, y):
    """Solve the symmetric family (R2 = R3) for the CSS parameters.

    Given the extremal-state entries r1 and y (with r2 = r3 = (1-r1)/2 and
    y <= r2):

        R4 = 4 r1 y^2 / ((1+r1)^2 - 4 y^2)
        R2 = R3 = r2 - R4
        R1 = r1 + R4

    For y = r2 this reproduces the CSS of the standard Horodecki state.
    """
    if not 0.0 <= r1 < 1.0:
        raise ValueError(f"r1 must be in [0, 1), got {r1}")
    r2 = (1.0 - r1) / 2.0
    if y < 0 or y > r2 + 1e-12:
        raise ValueError(f"y = {y} outside [0, r2 = {r2}]: not in the family")
    r4_big = 4.0 * r1 * y * y / ((1.0 + r1) ** 2 - 4.0 * y * y)
    r2_big = r2 - r4_big
    r1_big = r1 + r4_big
    if r2_big < -1e-12:
        raise ValueError("inversion left the parameter simplex (R2 < 0)")
    return np.array([r1_big, r2_big, r2_big, r4_big])


# ---------------------------------------------------------------------------
# low-rank closed forms: Horodecki, Vedral-Plenio, generalized VP, pure
# ---------------------------------------------------------------------------

def horodecki_state(p, sign=+1):
    """p |psi±><psi±| + (1-p)|00><00| (a Bell state mixed with an orthogonal
    separable state)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    bell = PSI_PLUS if sign >= 0 else PSI_MINUS
    return p * outer(bell) + (1.0 - p) * outer(KET_00)


def css_horodecki(p, sign=+1):
    """CSS of the Horodecki state: q'^2 |00><00| + 2 p'q' |psi±><psi±|
    + p'^2 |11><11| with p' = p/2, q' = 1 - p'."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    pp = p / 2.0
    qp = 1.0 - pp
    bell = PSI_PLUS if sign >= 0 else PSI_MINUS
    return (
        qp * qp * outer(KET_00) + 2.0 * pp * qp * outer(bell) + pp * pp * outer(KET_11)
    )


def vedral_plenio_state(p):
    """p |psi+><psi+| + (1-p)|01><01| (separable part *not* orthogonal)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return p * outer(PSI_PLUS) + (1.0 - p) * outer(KET_01)


def css_vedral_plenio(p):
    """(1 - p/2)|01><01| + (p/2)|10><10|."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return (1.0 - p / 2.0) * outer(KET_01) + (p / 2.0) * outer(KET_10)


def generalized_vp_state(p, P, phase=0.0):
    """p |psi_P><psi_P| + (1-p)|01><01|."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return p * outer(psi_p(P, phase)) + (1.0 - p) * outer(KET_01)


def css_generalized_vp(p, P):
    """(1-R3)|01><01| + R3|10><10| with R3 = p(1-P) (requires R3 <= 1/2)."""
    if not 0.0 <= p <= 1.0 or not 0.0 <= P <= 1.0:
        raise ValueError(f"p, P must be in [0, 1], got p={p}, P={P}")
    r3 = p * (1.0 - P)
    if r3 > 0.5 + 1e-12:
        raise ValueError(
            f"R3 = p(1-P) = {r3} > 1/2: relabel the qubits (swap |01> and |10>)"
        )
    return (1.0 - r3) * outer(KET_01) + r3 * outer(KET_10)


_SWAP2 = np.array([[0.0, 1.0], [1.0, 0.0]])


def css_pure(psi):
    """CSS of an arbitrary pure state.

    The state is reduced by local rotations to sqrt(P)|01> + sqrt(1-P)|10>
    via the SVD of its 2x2 amplitude matrix; the CSS is the rotated image
    of P|01><01| + (1-P)|10><10|.  Product states are their own CSS.
    """
    psi = pure_state(psi)
    a = psi.reshape(2, 2)
    u, s, vh = np.linalg.svd(a)
    big_p = float(s[0] ** 2)
    if big_p >= 1.0 - 1e-12:
        return outer(psi)
    w1 = u
    w2 = (_SWAP2 @ vh).T
    local = np.kron(w1, w2)
    core = big_p * outer(KET_01) + (1.0 - big_p) * outer(KET_10)
    sigma = local @ core @ dagger(local)
    return (sigma + dagger(sigma)) / 2


# ---------------------------------------------------------------------------
# Gisin and generalized Horodecki states (numeric in-family inversion)
# ---------------------------------------------------------------------------

def gisin_state(p, P, phase=0.0):
    """q|00><00| + p|psi_P><psi_P| + q|11><11| with q = (1-p)/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    q = (1.0 - p) / 2.0
    return q * outer(KET_00) + p * outer(psi_p(P, phase)) + q * outer(KET_11)


def generalized_horodecki_state(p, P, phase=0.0):
    """p|psi_P><psi_P| + (1-p)|00><00|."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return p * outer(psi_p(P, phase)) + (1.0 - p) * outer(KET_00)


def _is_entangled(rho, tol=1e-12):
    w = np.linalg.eigvalsh(partial_transpose(rho))
    return float(w.min()) < -tol


def _damped_newton(residual_fn, starts, tol=1e-10, max_iter=200):
    """Multistart damped Newton on a small residual; returns (params, resid).

    residual_fn maps a parameter vector to a residual vector of the same
    length, or None when the point is outside the admissible domain.
    """
    best = None
    for u0 in starts:
        u = np.array(u0, dtype=float)
        r = residual_fn(u)
        if r is None:
            continue
        for _ in range(max_iter):
            nr = float(np.max(np.abs(r)))
            if nr <= tol:
                break
            n = len(u)
            jac = np.empty((n, n))
            ok = True
            for k in range(n):
                h = 1e-7 * max(abs(u[k]), 1e-3)
                up = u.copy()
                up[k] += h
                um = u.copy()
                um[k] -= h
                rp = residual_fn(up)
                rm = residual_fn(um)
                if rp is None or rm is None:
                    # one-sided fallback at the domain boundary
                    if rp is None and rm is None:
                        ok = False
                        break
                    if rp is None:
                        jac[:, k] = (r - rm) / h
                    else:
                        jac[:, k] = (rp - r) / h
                    continue
                jac[:, k] = (rp - rm) / (2.0 * h)
            if not ok:
                break
            try:
                step = np.linalg.lstsq(jac, -r, rcond=None)[0]
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            improved = False
            for _ in range(40):
                cand = u + lam * step
                rc = residual_fn(cand)
                if rc is not None and float(np.max(np.abs(rc))) < nr:
                    u, r = cand, rc
                    improved = True
                    break
                lam /= 2.0
            if not improved:
                break
        nr = float(np.max(np.abs(r)))
        if best is None or nr < best[1]:
            best = (u.copy(), nr)
        if nr <= tol:
            return best
    if best is None:
        raise NoSolutionError("no admissible starting point")
    return best


def gisin_inversion(p, P, tol=1e-10):
    """Find the CSS of an entangled Gisin state inside the sigma_Z family.

    Unknowns (R1 = R4, R2, x); R3 = 1 - 2 R1 - R2 and Y = R1.  Targets are
    the |00> population q, the |01> population pP, and the |01><10|
    coherence p sqrt(P(1-P)).  Returns {"R": ..., "x": ..., "residual": ...}.
    """
    rho = gisin_state(p, P)
    if not _is_entangled(rho):
        raise SeparableStateError(
            f"Gisin state with p={p}, P={P} is separable (REE 0)"
        )
    q = (1.0 - p) / 2.0
    t_mid = p * P
    t_y = p * math.sqrt(P * (1.0 - P))

    if p >= 1.0 - 1e-12:
        if abs(P - 0.5) <= 1e-12:
            # Bell-state limit; the symmetric member of the CSS family
            r_sym = np.array([0.25, 0.25, 0.25, 0.25])
            return {"R": r_sym, "x": 2.0, "residual": 0.0}
        raise NoSolutionError(
            "p = 1 is the pure-state limit: the CSS is rank deficient "
            "(use css_pure) and lies outside the full-rank R1 = R4 family"
        )

    def residual(u):
        r1, r2, x = u
        r3 = 1.0 - 2.0 * r1 - r2
        if r1 <= 1e-12 or r2 <= 1e-12 or r3 <= 1e-12 or x <= 0 or x > 64:
            return None
        big_r = np.array([r1, r2, r3, r1])
        if big_r[1] * big_r[2] - big_r[0] * big_r[3] < 0.0:
            return None
        g = analytic_g_sigma_z(big_r)
        return np.array(
            [
                r1 - x * g[0, 0].real - q,
                r2 - x * g[1, 1].real - t_mid,
                r1 - x * g[1, 2].real - t_y,
            ]
        )

    starts = []
    for fr1 in (0.08, 0.35, 0.62, 0.9):
        r1 = q + fr1 * (0.5 - q) * 0.9 + 1e-3
        for fr2 in (0.35, 0.65):
            r2 = fr2 * (1.0 - 2.0 * r1)
            for x0 in (0.6, 1.4):
                starts.append((r1, r2, x0))
    u, resid = _damped_newton(residual, starts, tol=tol)
    if resid > tol:
        raise NoSolutionError(
            f"Gisin inversion stalled at residual {resid:.3e} for p={p}, P={P}"
        )
    r1, r2, x = u
    big_r = np.array([r1, r2, 1.0 - 2.0 * r1 - r2, r1])
    return {"R": big_r, "x": float(x), "residual": float(resid)}


def css_gisin(p, P):
    """CssSolution whose generated family contains the Gisin state."""
    sol = gisin_inversion(p, P)
    return css_sigma_z(sol["R"])


def generalized_horodecki_inversion(p, P, tol=1e-10):
    """CSS parameters for an entangled generalized Horodecki state.

    Unknowns (R1, R2, R3) with R4 = 1 - R1 - R2 - R3 and x pinned at
    x' = (R1+R4)/R1, matching the extremal-state entries (r1, r2, y) =
    (1-p, pP, p sqrt(P(1-P))).
    """
    rho = generalized_horodecki_state(p, P)
    if not _is_entangled(rho):
        raise SeparableStateError(
            f"generalized Horodecki state with p={p}, P={P} is separable (REE 0)"
        )
    if p >= 1.0 - 1e-12:
        raise NoSolutionError(
            "p = 1 is the pure-state limit: the CSS is rank deficient (css_pure)"
        )
    t1 = 1.0 - p
    t2 = p * P
    ty = p * math.sqrt(P * (1.0 - P))

    def entries(u):
        r1, r2, r3 = u
        r4 = 1.0 - r1 - r2 - r3
        if min(r1, r2, r3, r4) <= 1e-14 or r1 < r4:
            return None
        if r2 * r3 - r1 * r4 < 0.0:
            return None
        big_r = np.array([r1, r2, r3, r4])
        y_big = math.sqrt(r1 * r4)
        z, lval, _, _ = _sigma_z_scalars(big_r)
        diff = r2 - r3
        lterm = 0.0 if (diff == 0.0 or not math.isfinite(lval)) else (
            2.0 * r4 * diff / (lval * z)
        )
        e2 = r2 + (2.0 * r4 / (z * z)) * (r2 * r2 - r2 * r3 + 2.0 * y_big * y_big)
        e2 += lterm
        e1 = r1 - r4
        ey = (2.0 * (r1 + r2) * r4 - (e2 - r2) * diff) / (2.0 * y_big)
        return np.array([e1, e2, ey])

    def residual(u):
        e = entries(u)
        if e is None:
            return None
        return e - np.array([t1, t2, ty])

    starts = []
    for f4 in (0.2, 0.45, 0.7, 0.95):
        r4 = f4 * min(t1 + 0.25, 0.45) * 0.5 + 1e-3
        r1 = t1 + r4
        rest = 1.0 - r1 - r4
        if rest <= 0:
            continue
        for f2 in (0.3, 0.45, 0.6, 0.75):
            starts.append((r1, f2 * rest, (1.0 - f2) * rest))
    u, resid = _damped_newton(residual, starts, tol=tol)
    if resid > tol:
        raise NoSolutionError(
            f"generalized Horodecki inversion stalled at residual {resid:.3e} "
            f"for p={p}, P={P}"
        )
    r1, r2, r3 = u
    big_r = np.array([r1, r2, r3, 1.0 - r1 - r2 - r3])
    x = (big_r[0] + big_r[3]) / big_r[0]
    return {"R": big_r, "x": float(x), "residual": float(resid)}


def css_generalized_horodecki(p, P):
    """(CssSolution, x) reproducing the generalized Horodecki state."""
    sol = generalized_horodecki_inversion(p, P)
    return css_sigma_z(sol["R"]), sol["x"]


def binary_entropy(t):
    """H2(t) = -t log2 t - (1-t) log2 (1-t)."""
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return float(-t * math.log2(t) - (1.0 - t) * math.log2(1.0 - t))


def ree_generalized_horodecki(p, P):
    """REE of the generalized Horodecki state, in bits.

    Evaluates, with (R_i, Y) the CSS parameters from the in-family
    inversion, lambda± and N± the middle-block eigensystem of the CSS, and
    f± = N±[(lambda± - R3) sqrt(r2) + Y sqrt(r3)]:

        E = -H2(r1) - r1 log2 R1 - f-^2 log2 lambda- - f+^2 log2 lambda+

    The value is cross-checked against a direct relative-entropy evaluation
    on every call (1e-8).
    """
    if not 0.0 <= p <= 1.0 or not 0.0 <= P <= 1.0:
        raise ValueError(f"p, P must be in [0, 1], got p={p}, P={P}")
    rho = generalized_horodecki_state(p, P)
    if not _is_entangled(rho):
        return 0.0
    if p >= 1.0 - 1e-12:
        # pure-state limit: the REE is the entanglement entropy
        return binary_entropy(P)
    sol = generalized_horodecki_inversion(p, P)
    r1b, r2b, r3b, r4b = sol["R"]
    y = math.sqrt(r1b * r4b)
    s = r2b + r3b
    diff = r2b - r3b
    z = math.sqrt(diff * diff + 4.0 * r1b * r4b)
    delta = r2b * r3b - r1b * r4b
    lam_p = 0.5 * (s + z)
    lam_m = 2.0 * max(delta, 0.0) / (s + z)  # = (s - z)/2, cancellation-free
    r1 = 1.0 - p
    r2 = p * P
    r3 = p * (1.0 - P)

    def f_sq(lam):
        npm = 1.0 / math.sqrt((lam - r3b) ** 2 + y * y)
        f = npm * ((lam - r3b) * math.sqrt(r2) + y * math.sqrt(r3))
        return f * f

    val = -binary_entropy(r1)
    if r1 > 0:
        val -= r1 * math.log2(r1b)
    for lam in (lam_m, lam_p):
        fsq = f_sq(lam) if lam > 0 else 0.0
        if fsq > 1e-18:
            if lam <= 0:
                return math.inf
            val -= fsq * math.log2(lam)
    sigma = sigma_z_state(sol["R"])
    direct = relative_entropy(rho, sigma)
    if not math.isfinite(direct) or abs(direct - val) > 1e-8:
        raise ree_core.InconsistencyError(
            f"formula REE {val!r} disagrees with S(rho||sigma) = {direct!r}"
        )
    return val


# ---------------------------------------------------------------------------
# Verstraete-Verschelde state
# ---------------------------------------------------------------------------

def verstraete_state(c):
    """The concurrence-parameterized extremal state, defined for C <= 1/3:

        diag ((1+C)/2, [d+ C/2; C/2 d-], 0),
        d± = (1 - C ± sqrt(1 - 2C - 3C^2))/4.
    """
    if not 0.0 <= c <= 1.0 / 3.0 + 1e-15:
        raise ValueError(f"C must be in [0, 1/3], got {c}")
    disc = math.sqrt(max(1.0 - 2.0 * c - 3.0 * c * c, 0.0))
    dp = 0.25 * (1.0 - c + disc)
    dm = 0.25 * (1.0 - c - disc)
    return np.array(
        [
            [(1.0 + c) / 2.0, 0, 0, 0],
            [0, dp, c / 2.0, 0],
            [0, c / 2.0, dm, 0],
            [0, 0, 0, 0.0],
        ],
        dtype=complex,
    )


def verstraete_as_gh(c):
    """(p, P) such that the generalized Horodecki state equals the
    Verstraete-Verschelde state with concurrence C."""
    if not 0.0 < c <= 1.0 / 3.0 + 1e-15:
        raise ValueError(f"C must be in (0, 1/3], got {c}")
    disc = math.sqrt(max(1.0 - 2.0 * c - 3.0 * c * c, 0.0))
    dp = 0.25 * (1.0 - c + disc)
    p = (1.0 - c) / 2.0
    return p, dp / p


# ---------------------------------------------------------------------------
# Bell-state CSS nonuniqueness
# ---------------------------------------------------------------------------

def sigma_prime_bell():
    """(1/2)(|01><01| + |10><10|): a CSS of the Bell state |psi+>."""
    return 0.5 * (outer(KET_01) + outer(KET_10))


def sigma_dprime_bell():
    """(1/4)(|00><00| + 2|psi+><psi+| + |11><11|): another Bell-state CSS."""
    return 0.25 * (outer(KET_00) + 2.0 * outer(PSI_PLUS) + outer(KET_11))


def sigma_tprime_bell():
    """A Bell-state CSS that is not diagonal in the Bell basis:
    (1/4)(2|psi+><psi+| + |chi><chi| + |phi-><phi-|) with
    |chi> = (|psi-> + |phi+>)/sqrt(2)."""
    chi = (PSI_MINUS + PHI_PLUS) / math.sqrt(2)
    return 0.25 * (2.0 * outer(PSI_PLUS) + outer(chi) + outer(PHI_MINUS))


def bell_nonuniqueness_report(k_list=None, x=1.0, order=DEFAULT_BELL_ORDER):
    """Table demonstrating the nonuniqueness of the Bell-state CSS.

    Each row holds, for one CSS sigma of |b1>: S(b1||sigma), x_max, the
    deviation of the regenerated rho(x_max) from |b1><b1|, and at the given
    x < x_max the REE / negativity / concurrence / CHSH parameter M of
    rho(x) together with rho(x) itself (entanglement measures agree across
    rows; M and rho do not).
    """
    from .measures import concurrence, horodecki_m, negativity

    if k_list is None:
        k_list = [(1.0, 0.0, 0.0), (0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (2.0, 1.0, 0.5)]
    b1 = _BELL_VECTORS[order[0]]
    bell_proj = outer(b1)

    rows = []
    entries = [(f"k={tuple(float(v) for v in k)}", bell_css_solution(k, order))
               for k in k_list]
    entries.append(("sigma'''-rotated", solve_css(sigma_tprime_bell(), allow_low_rank=True)))
    for label, css in entries:
        s_bell = relative_entropy(bell_proj, css.sigma)
        rho_top = generate_rho(css, css.xmax)
        dev = float(np.max(np.abs(rho_top - bell_proj)))
        xq = min(x, css.xmax * 0.999999)
        rho_x = generate_rho(css, xq)
        lam1 = float(np.linalg.eigvalsh(rho_x).max())
        rows.append(
            {
                "label": label,
                "s_bell": s_bell,
                "x_max": css.xmax,
                "rho_xmax_dev": dev,
                "x": xq,
                "ree": ree_core.ree_closed(rho_x, css, xq),
                "negativity": negativity(rho_x),
                "concurrence": concurrence(rho_x),
                "horodecki_m": horodecki_m(rho_x),
                "lambda_1": lam1,
                "rho_x": rho_x,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# parameter samplers (used by verification suites and tests)
# ---------------------------------------------------------------------------

def sample_sigma_z_params(rng, min_entry=0.02, min_delta=0.005, min_z=0.02):
    """Random well-conditioned sigma_Z parameters R (a probability 4-vector
    with R2 R3 - R1 R4 and z bounded away from zero)."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    for _ in range(10000):
        big_r = rng.dirichlet(np.ones(4))
        if big_r.min() < min_entry:
            continue
        if big_r[1] * big_r[2] - big_r[0] * big_r[3] < min_delta:
            continue
        z = math.sqrt((big_r[1] - big_r[2]) ** 2 + 4 * big_r[0] * big_r[3])
        if z < min_z:
            continue
        return big_r
    raise RuntimeError("sigma_Z sampler failed to find admissible parameters")


def sample_bell_diagonal_weights(rng, r1_range=(0.55, 0.95), min_entry=0.005):
    """Random Bell-diagonal weights with a dominant first entry."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    for _ in range(10000):
        r1 = rng.uniform(*r1_range)
        rest = rng.dirichlet(np.ones(3)) * (1.0 - r1)
        if rest.min() < min_entry:
            continue
        return np.concatenate([[r1], rest])
    raise RuntimeError("Bell-diagonal sampler failed")


# ---------------------------------------------------------------------------
# CLI-facing dispatch
# ---------------------------------------------------------------------------

def make_state(family, **params):
    """Build a named family state from keyword parameters.

    Families: bell-diagonal(r), sigma-z(R[, phase]), horodecki(p[, sign]),
    vedral-plenio(p), generalized-vp(p, P), gisin(p, P),
    generalized-horodecki(p, P), verstraete(C), bell-css(k), pure(amplitudes).
    """
    f = family.lower().replace("_", "-")
    if f == "bell-diagonal":
        return bell_diagonal_state(params["r"])
    if f == "sigma-z":
        return sigma_z_state(params["R"], params.get("phase", 0.0))
    if f == "horodecki":
        return horodecki_state(params["p"], params.get("sign", +1))
    if f == "vedral-plenio":
        return vedral_plenio_state(params["p"])
    if f == "generalized-vp":
        return generalized_vp_state(params["p"], params["P"])
    if f == "gisin":
        return gisin_state(params["p"], params["P"])
    if f == "generalized-horodecki":
        return generalized_horodecki_state(params["p"], params["P"])
    if f == "verstraete":
        return verstraete_state(params["C"])
    if f == "bell-css":
        return css_bell_family(params["k"])
    if f == "pure":
        return outer(pure_state(params["amplitudes"]))
    raise ValueError(f"unknown family '{family}'")


def css_bell_family(k, order=DEFAULT_BELL_ORDER):
    """The Bell-state CSS sigma = (1/2)|b1><b1| + (1/2k) sum k_i |b_i><b_i|."""
    return bell_css_solution(k, order).sigma


def css_for_family(family, **params):
    """Closed-form (or in-family numeric) CSS of a named family state.

    Returns (sigma, extra) where extra carries x / x_max / residual details
    when the construction provides them.
    """
    f = family.lower().replace("_", "-")
    if f == "bell-diagonal":
        sigma = css_bell_diagonal(params["r"])
        return sigma, {}
    if f == "sigma-z":
        css = css_sigma_z(params["R"], params.get("phase", 0.0))
        return css.sigma, {"x_max": css.xmax}
    if f == "horodecki":
        return css_horodecki(params["p"], params.get("sign", +1)), {}
    if f == "vedral-plenio":
        return css_vedral_plenio(params["p"]), {}
    if f == "generalized-vp":
        return css_generalized_vp(params["p"], params["P"]), {}
    if f == "gisin":
        sol = gisin_inversion(params["p"], params["P"])
        return sigma_z_state(sol["R"]), {"x": sol["x"], "residual": sol["residual"]}
    if f == "generalized-horodecki":
        sol = generalized_horodecki_inversion(params["p"], params["P"])
        return sigma_z_state(sol["R"]), {"x": sol["x"], "residual": sol["residual"]}
    if f == "verstraete":
        p, big_p = verstraete_as_gh(params["C"])
        sol = generalized_horodecki_inversion(p, big_p)
        return sigma_z_state(sol["R"]), {"x": sol["x"], "residual": sol["residual"]}
    if f == "bell-css":
        css = bell_css_solution(params["k"])
        return css.sigma, {"x_max": css.xmax}
    if f == "pure":
        return css_pure(params["amplitudes"]), {}
    raise ValueError(f"no closed-form CSS for family '{family}'")

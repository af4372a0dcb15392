"""Dev scratch: verify analytic sigma_Z G sign, Bell kernel, sigma'''_Bell."""
import numpy as np
from qree.qmat import partial_transpose, outer, dagger, eig_hermitian
from qree.ree_core import kernel_of_edge_state, build_g, x_max, solve_css, generate_rho

np.set_printoptions(precision=6, suppress=True, linewidth=140)

K00, K01, K10, K11 = np.eye(4, dtype=complex)
PSIP = (K01 + K10) / np.sqrt(2)
PSIM = (K01 - K10) / np.sqrt(2)
PHIP = (K00 + K11) / np.sqrt(2)
PHIM = (K00 - K11) / np.sqrt(2)


def sigma_z(R, phase=0.0):
    R1, R2, R3, R4 = R
    Y = np.sqrt(R1 * R4) * np.exp(1j * phase)
    m = np.array(
        [[R1, 0, 0, 0], [0, R2, Y, 0], [0, np.conj(Y), R3, 0], [0, 0, 0, R4]],
        dtype=complex,
    )
    return m


def analytic_g(R, ybar_sign=+1):
    R1, R2, R3, R4 = R
    Y = np.sqrt(R1 * R4)
    z = np.sqrt((R2 - R3) ** 2 + 4 * R1 * R4)
    L = np.log(R2 + R3 - z) - np.log(R2 + R3 + z)
    d = 1.0 / ((R1 + R4) * z * z * L)
    Rb1 = Y * Y / (R1 + R4)
    Rb2 = -2 * Y * Y * d * ((R2 - R3) * (z + R2 * L) + 2 * Y * Y * L)
    Rb3 = -2 * Rb1 - Rb2
    Yb = ybar_sign * Y * d * (2 * Y * Y * (R2 + R3) * L - (R2 - R3) ** 2 * z)
    return np.array(
        [[Rb1, 0, 0, 0], [0, Rb2, Yb, 0], [0, Yb, Rb3, 0], [0, 0, 0, Rb1]],
        dtype=complex,
    )


R = (0.1, 0.4, 0.3, 0.2)
sig = sigma_z(R)
phi = kernel_of_edge_state(sig)
print("kernel:", phi)
print("expected kernel ~ (sqrt(R4)|00> - sqrt(R1)|11>)/sqrt(R1+R4):",
      np.sqrt(0.2 / 0.3), -np.sqrt(0.1 / 0.3))
G = build_g(sig, phi)
print("generic G:\n", G.real)
print("analytic G (paper sign):\n", analytic_g(R, +1).real)
print("analytic G (flipped Ybar):\n", analytic_g(R, -1).real)
print("max diff paper sign :", np.max(np.abs(G - analytic_g(R, +1))))
print("max diff flipped    :", np.max(np.abs(G - analytic_g(R, -1))))

# Bell-diagonal: sigma = 1/2 psi+ + 0.2 psi- + 0.2 phi+ + 0.1 phi-
sigB = 0.5 * outer(PSIP) + 0.2 * outer(PSIM) + 0.2 * outer(PHIP) + 0.1 * outer(PHIM)
phiB = kernel_of_edge_state(sigB)
print("\nBell kernel overlaps: psi+ %.3f psi- %.3f phi+ %.3f phi- %.3f" % (
    abs(np.vdot(PSIP, phiB)), abs(np.vdot(PSIM, phiB)),
    abs(np.vdot(PHIP, phiB)), abs(np.vdot(PHIM, phiB))))
GB = build_g(sigB, phiB)
cssB = solve_css(sigB)
print("x_max bell-diagonal:", cssB.xmax)
rho1 = generate_rho(cssB, 1.0)
print("rho(1) bell weights:", [np.real(np.vdot(b, rho1 @ b)) for b in (PSIP, PSIM, PHIP, PHIM)])
print("expected r1=(2+1)/4=0.75, r_i = R_i*(1-0.5)")

# sigma'''_Bell  (rotated CSS)
psi = (PSIM + PHIP) / np.sqrt(2)
sig3 = 0.25 * (2 * outer(PSIP) + outer(psi) + outer(PHIM))
w3 = np.linalg.eigvalsh(partial_transpose(sig3))
print("\nsigma''' partial transpose eigenvalues:", w3)
css3 = solve_css(sig3, allow_low_rank=True)
print("sigma''' x_max:", css3.xmax)
rho3 = generate_rho(css3, css3.xmax)
print("rho3 vs bell:", np.max(np.abs(rho3 - outer(PSIP))))

# numpy svd for psi+ amplitude matrix
A = PSIP.reshape(2, 2)
u, s, vh = np.linalg.svd(A)
print("\nsvd u:\n", u, "\ns:", s, "\nvh:\n", vh)

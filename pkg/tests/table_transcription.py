"""Straight row-by-row transcription of the certificate constants table.

This file is the independent oracle for the constants pipeline: every row is
typed out directly from the constants table, in table order, with no shared
code with ``src/``.  The pipeline must reproduce these values to 1e-12
relative on the reference inputs.  Keep this file dumb: no dataclasses, no
vectorization, one assignment per row.

Inputs dict keys
----------------
n         spatial dimension
a0, b0    lower/upper eigenvalue bounds of the metric (a0 < 1 < b0)
a1, b1    lower/upper eigenvalue bounds of the dual metric (a1 = 1/b0, b1 = 1/a0)
psi1      sup |psi'|   over the working region
psi2      sup |psi''|
psi3      sup |psi'''|         (used when rho == 1)
psi2_hoelder  Hoelder seminorm bound of psi''  (used when rho < 1)
Cl        lower bound for |d psi|
p1        lower bound for the principal symbol on d psi
dist      distance from the outer boundary to the observation region
g_c0      sup |g^{jk}|
g_c1      C^1 norm of g^{jk}
h_c0      sup |h^j|
q_c0      sup |q|
rho       Hoelder exponent in (0, 1]; rho == 1 selects the C^3 variant
chi1_d1   sup |chi_1'|
chi1_d2   sup |chi_1''|
"""

from __future__ import annotations

import math


def transcribe(inp: dict) -> dict:
    n = inp["n"]
    a0 = inp["a0"]
    b0 = inp["b0"]
    a1 = inp["a1"]
    b1 = inp["b1"]
    psi1 = inp["psi1"]
    psi2 = inp["psi2"]
    psi3 = inp.get("psi3", 0.0)
    psi2_hoelder = inp.get("psi2_hoelder", 0.0)
    Cl = inp["Cl"]
    p1 = inp["p1"]
    dist = inp["dist"]
    g_c0 = inp["g_c0"]
    g_c1 = inp["g_c1"]
    h_c0 = inp["h_c0"]
    q_c0 = inp["q_c0"]
    rho = inp["rho"]
    chi1_d1 = inp["chi1_d1"]
    chi1_d2 = inp["chi1_d2"]

    out = {}

    # |psi'|_{C^1} = sup|psi'| + sup|psi''|
    psi1_c1 = psi1 + psi2

    out["C3"] = 20.0 * (1.0 + n**2 * g_c1**2) * psi1_c1 * (1.0 + psi1**2)
    out["MP"] = 1.0
    out["M1"] = (out["MP"] + out["C3"]) * max(2.0 / a1**2, 1.0 / (2.0 * p1**2))
    out["M2"] = (2.0 / min(1.0, a1)) * (out["MP"] + out["C3"]) + ((b1 + a1) / 2.0) * out["M1"]
    out["lam"] = max(out["M1"], math.e, 2.0 * psi2 / Cl**2)
    out["phi0"] = math.exp(-1.0)
    out["phiM"] = math.e

    lam = out["lam"]
    phi0 = out["phi0"]
    phiM = out["phiM"]

    out["R1"] = min(1.0, dist, 1.0 / (lam * psi1))
    out["c100"] = 10.0 * (1.0 + n**4 * g_c1**2)

    # |lambda psi|_max: for rho == 1 the C^3 remark replaces n*|lambda psi|_max
    # by c_T = c_T1 + c_T2; we carry L with n*L = (that replacement).
    if rho == 1.0:
        cT1 = lam * phiM * (psi2 + lam * psi1**2)
        cT2 = lam * phiM * (3.0 * lam * psi1 * psi2 + lam**2 * psi1**3 + psi3)
        cT = cT1 + cT2
        L = cT / n
        hoelder_phi2 = cT
    else:
        psi_lip = psi1
        L = phiM * max(lam * psi2_hoelder, lam**2 * psi_lip * psi2, lam**3 * psi_lip * psi1**2)
        cT = n * L
        cT1 = lam * phiM * (psi2 + lam * psi1**2)
        hoelder_phi2 = 3.0 * L

    out["eps0"] = 1.0 / (2.0 * n * (lam * phiM * (psi2 + lam * psi1**2) + 4.0 * n * L))

    r2_cands = [
        out["R1"],
        Cl / (2.0 * phiM * (psi2 + lam * psi1**2 + 4.0 * n * L / lam)),
        (lam**2 * phiM * Cl**2 / (4.0 * n * L)) ** (1.0 / rho),
        (1.0 / (4.0 * out["c100"] * (n * L) ** 2 * out["M1"] * (1.0 + lam**2 * phiM**2 * psi1**2)))
        ** (1.0 / (2.0 + 2.0 * rho)),
        (1.0 / 8.0) * (out["eps0"] / math.sqrt(2.0 * out["M2"])) * math.sqrt(16.0 + 1.0 / 16.0),
        (
            lam * phi0
            / (
                4.0
                * out["c100"]
                * n
                * L
                * (1.0 + lam**2 * phiM**2 * psi1**2 + lam**2 * phiM**2 * (psi1 * psi2 + lam * psi1**3))
            )
        )
        ** (1.0 / rho),
    ]
    out["R2"] = min(r2_cands)
    R2 = out["R2"]

    out["sigma"] = 2.0 * n * L * R2**rho

    phi2_bound = lam * phiM * (psi2 + lam * psi1**2) + 4.0 * n * L * R2**rho
    phi1_bound = lam * phiM * psi1 + 5.0 * n * L * R2 ** (1.0 + rho)
    out["tau0"] = max(
        1.0,
        64.0
        * (4.0 * out["M1"] + 1.0 / (4.0 * lam * phi0))
        * (
            phi2_bound**2 * (1.0 + n**2 * g_c0) ** 2
            + n * h_c0**2 * (2.0 + 2.0 * phi1_bound**2)
            + 2.0 * q_c0**2
        ),
    )
    tau0 = out["tau0"]

    out["R"] = (1.0 / 4.0) * (16.0 + 1.0 / 16.0) ** (-0.5) * R2
    R = out["R"]

    if rho == 1.0:
        q_geom = (1.0 / 4.0) * (16.0 + 1.0 / 16.0) ** (-0.5)
        out["delta"] = cT * q_geom**2 * R2**3 / 8.0
    else:
        out["delta"] = n * (1.0 / 32.0) * (1.0 / (16.0 + 1.0 / 16.0)) * L * R2 ** (2.0 + rho)

    out["r"] = (
        n
        * lam**2
        * Cl**2
        * (1.0 / 4.0)
        * (1.0 / (16.0 + 1.0 / 16.0))
        * R2 ** (2.0 + rho)
        / (2.0 * math.e * (lam * phiM * psi1 + 5.0 * n * hoelder_phi2))
    )

    out["c1T"] = math.sqrt(4.0 * (4.0 * out["M1"] / tau0 + 1.0 / (4.0 * lam * phi0)))
    out["c133"] = (
        2.0
        * (1.0 + n**2 * g_c0)
        * (
            chi1_d2 / (tau0 * (4.0 * R) ** 2)
            + (chi1_d1 / (4.0 * R)) * (1.0 + lam * phiM * psi1 + 5.0 * n * L * R2 ** (1.0 + rho) + h_c0 / tau0)
        )
    )
    out["c2T"] = (0.5 + math.sqrt(2.0 * out["M2"])) * (1.0 + 2.0 * chi1_d1 / (tau0 * 4.0 * R)) + (
        out["c1T"] / math.sqrt(tau0)
    ) * out["c133"]

    return out


def filter_constants(alpha: float, c3: float, beta1: float) -> dict:
    """Localizer frequency-decay constants, transcribed directly."""
    out = {}
    out["c117"] = 1.0 / (math.e * c3) ** alpha
    out["c106"] = out["c117"] * (1.0 - 2.0 / beta1) ** alpha / 4.0
    out["c107"] = math.sqrt(
        c3
        * (8.0 / beta1)
        * math.gamma(1.0 / alpha)
        * (1.0 / (alpha * out["c117"] ** (1.0 / alpha)))
        * (1.0 / (alpha * out["c106"]) ** (1.0 / (alpha - 1.0)))
    )
    return out


def commutator_c106(alpha: float, c3: float) -> float:
    return 1.0 / ((3.0**alpha * 4.0) * (math.e * c3) ** alpha)


def beta_from_c3_tilde(alpha: float, c3_tilde: float) -> float:
    c117_tilde = 1.0 / (2.0 * c3_tilde) ** alpha
    return 2.0 + (4.0 / c117_tilde) ** (1.0 / alpha)


def c159(c156: float, alpha: float, N: int) -> float:
    return c156 ** (-1.0 / (alpha ** (N - 1) * (1.0 - alpha)))


def c165(c117_comm: float, alpha: float, beta: float) -> float:
    return c117_comm * beta**alpha / (3.0**alpha * 4.0)


def c170(n: int, vol_omega0: float, r: float, b1: float) -> float:
    d = n + 1
    omega_d = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    return vol_omega0 / (omega_d * (r / (4.0 * math.sqrt(max(b1, 1.0)))) ** d)


def c180(gamma: float, T: float, ell: float) -> float:
    return gamma**2 / (8.0 * (T - ell))


def t_ell_gamma(T: float, ell: float, gamma: float) -> float:
    return math.sqrt((T - ell) ** 2 - gamma**2) + ell

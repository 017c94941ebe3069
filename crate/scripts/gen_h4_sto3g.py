#!/usr/bin/env python3
"""Generate STO-3G FCIDUMP files for the H4 benchmark geometries.

The H4 model is a planar chain of four hydrogen atoms with all
nearest-neighbor separations fixed at 2.0 a.u.; a single parameter `alpha`
unfolds it from a square (alpha -> 0) to a linear chain (alpha = 0.5).
With legs opening at angle `pi/2 - alpha*pi` from the central bond:

    H1 = (-2 cos t, 2 sin t)   H4 = (2 + 2 cos t, 2 sin t)
    H2 = (0, 0)                H3 = (2, 0)          t = pi/2 - alpha*pi

The script runs a small RHF/STO-3G calculation, transforms the integrals
to the canonical MO basis, writes FCIDUMP files, and cross-checks each
file with an independent dense full-CI diagonalization in the
(N = 4, Sz = 0) sector.

Usage: python3 scripts/gen_h4_sto3g.py [outdir]
"""

import math
import sys

import numpy as np
from scipy.special import erf

# STO-3G hydrogen: exponents and contraction coefficients for normalized
# s primitives.
EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
COEFFS = np.array([0.15432897, 0.53532814, 0.44463454])


def h4_geometry(alpha):
    t = math.pi / 2.0 - alpha * math.pi
    c, s = 2.0 * math.cos(t), 2.0 * math.sin(t)
    return np.array(
        [
            [-c, s, 0.0],
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [2.0 + c, s, 0.0],
        ]
    )


def boys0(t):
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * erf(math.sqrt(t))


def contraction(center):
    """Normalized primitives (exponent, weight) of one STO-3G s function."""
    prims = []
    for a, d in zip(EXPONENTS, COEFFS):
        norm = (2.0 * a / math.pi) ** 0.75
        prims.append((a, d * norm, center))
    return prims


def s_prim(a, A, b, B):
    p = a + b
    mu = a * b / p
    r2 = float(np.dot(A - B, A - B))
    return (math.pi / p) ** 1.5 * math.exp(-mu * r2)


def t_prim(a, A, b, B):
    p = a + b
    mu = a * b / p
    r2 = float(np.dot(A - B, A - B))
    return mu * (3.0 - 2.0 * mu * r2) * s_prim(a, A, b, B)


def v_prim(a, A, b, B, C, Z):
    p = a + b
    mu = a * b / p
    r2 = float(np.dot(A - B, A - B))
    P = (a * A + b * B) / p
    pc2 = float(np.dot(P - C, P - C))
    return -Z * (2.0 * math.pi / p) * math.exp(-mu * r2) * boys0(p * pc2)


def eri_prim(a, A, b, B, c, C, d, D):
    p = a + b
    q = c + d
    mu = a * b / p
    nu = c * d / q
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / q
    rab2 = float(np.dot(A - B, A - B))
    rcd2 = float(np.dot(C - D, C - D))
    rpq2 = float(np.dot(P - Q, P - Q))
    pref = 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))
    return pref * math.exp(-mu * rab2 - nu * rcd2) * boys0(p * q / (p + q) * rpq2)


def integrals(geom):
    funcs = [contraction(geom[i]) for i in range(len(geom))]
    n = len(funcs)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            for a, da, A in funcs[i]:
                for b, db, B in funcs[j]:
                    S[i, j] += da * db * s_prim(a, A, b, B)
                    T[i, j] += da * db * t_prim(a, A, b, B)
                    for center in geom:
                        V[i, j] += da * db * v_prim(a, A, b, B, center, 1.0)
    # renormalize contractions
    scale = 1.0 / np.sqrt(np.diag(S))
    S = S * np.outer(scale, scale)
    T = T * np.outer(scale, scale)
    V = V * np.outer(scale, scale)
    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                        continue
                    val = 0.0
                    for a, da, A in funcs[i]:
                        for b, db, B in funcs[j]:
                            for c, dc, C in funcs[k]:
                                for d, dd, D in funcs[l]:
                                    val += da * db * dc * dd * eri_prim(a, A, b, B, c, C, d, D)
                    val *= scale[i] * scale[j] * scale[k] * scale[l]
                    for (p, q, r, s) in {
                        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
                    }:
                        eri[p, q, r, s] = val
    return S, T, V, eri


def nuclear_repulsion(geom):
    e = 0.0
    for i in range(len(geom)):
        for j in range(i):
            e += 1.0 / np.linalg.norm(geom[i] - geom[j])
    return e


def rhf(S, Hcore, eri, n_elec, max_iter=200, tol=1e-12):
    n = S.shape[0]
    n_occ = n_elec // 2
    s_vals, s_vecs = np.linalg.eigh(S)
    X = s_vecs @ np.diag(s_vals ** -0.5) @ s_vecs.T

    def solve(F):
        Fp = X.T @ F @ X
        e, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        return e, C

    e, C = solve(Hcore)
    D = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
    energy = 0.0
    errors, focks = [], []
    for it in range(max_iter):
        J = np.einsum("pqrs,rs->pq", eri, D)
        K = np.einsum("prqs,rs->pq", eri, D)
        F = Hcore + J - 0.5 * K
        err = F @ D @ S - S @ D @ F
        errors.append(err.ravel())
        focks.append(F.copy())
        if len(focks) > 8:
            errors.pop(0)
            focks.pop(0)
        if len(focks) > 1:
            m = len(focks)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = np.dot(errors[i], errors[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(B, rhs)[:m]
                F = sum(wi * fi for wi, fi in zip(w, focks))
            except np.linalg.LinAlgError:
                pass
        e, C = solve(F)
        D_new = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
        e_new = 0.5 * np.einsum("pq,pq->", D_new, Hcore + F)
        drift = np.max(np.abs(D_new - D))
        D = D_new
        if abs(e_new - energy) < tol and drift < math.sqrt(tol):
            energy = e_new
            break
        energy = e_new
    return energy, e, C


def mo_integrals(Hcore, eri, C):
    h_mo = C.T @ Hcore @ C
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, C, C, C, C, optimize=True)
    return h_mo, eri_mo


def write_fcidump(path, h_mo, eri_mo, e_nuc, n_elec, ms2=0):
    n = h_mo.shape[0]
    lines = [f"&FCI NORB={n},NELEC={n_elec},MS2={ms2},"]
    lines.append(" ORBSYM=" + "1," * n)
    lines.append(" ISYM=1,")
    lines.append("&END")
    seen = set()
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    key = tuple(sorted([(i, j), (k, l)]))
                    if key in seen:
                        continue
                    seen.add(key)
                    v = eri_mo[i, j, k, l]
                    if abs(v) > 1e-16:
                        lines.append(f"{v: .16E} {i+1:3d} {j+1:3d} {k+1:3d} {l+1:3d}")
    for i in range(n):
        for j in range(i + 1):
            v = h_mo[i, j]
            if abs(v) > 1e-16:
                lines.append(f"{v: .16E} {i+1:3d} {j+1:3d}   0   0")
    lines.append(f"{e_nuc: .16E}   0   0   0   0")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def dense_fci_ground(h_mo, eri_mo, e_nuc, n_elec):
    """Independent check: dense second-quantized Hamiltonian over 2n spin
    orbitals (interleaved a,b), restricted to the N = n_elec, Sz = 0
    sector."""
    n = h_mo.shape[0]
    n_modes = 2 * n
    dim = 1 << n_modes

    def ann(p):
        m = np.zeros((dim, dim))
        for b in range(dim):
            if b >> p & 1:
                sign = (-1) ** bin(b & ((1 << p) - 1)).count("1")
                m[b ^ (1 << p), b] = sign
        return m

    a = [ann(p) for p in range(n_modes)]
    ad = [m.T for m in a]
    H = e_nuc * np.eye(dim)
    mode = lambda sp, sigma: 2 * sp + sigma
    for p in range(n):
        for q in range(n):
            if abs(h_mo[p, q]) < 1e-16:
                continue
            for sigma in (0, 1):
                H += h_mo[p, q] * ad[mode(p, sigma)] @ a[mode(q, sigma)]
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    v = eri_mo[p, q, r, s]
                    if abs(v) < 1e-16:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            H += 0.5 * v * ad[mode(p, sigma)] @ ad[mode(r, tau)] @ a[
                                mode(s, tau)
                            ] @ a[mode(q, sigma)]
    alpha_mask = sum(1 << (2 * sp) for sp in range(n))
    sector = [
        b
        for b in range(dim)
        if bin(b).count("1") == n_elec
        and bin(b & alpha_mask).count("1") == n_elec // 2
    ]
    sub = H[np.ix_(sector, sector)]
    vals = np.linalg.eigvalsh(sub)
    return vals


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "data"
    cases = [(0.005, "h4_alpha0005.fcidump"), (0.500, "h4_alpha0500.fcidump")]
    for alpha, name in cases:
        geom = h4_geometry(alpha)
        S, T, V, eri = integrals(geom)
        e_nuc = nuclear_repulsion(geom)
        Hcore = T + V
        e_elec, orbital_energies, C = rhf(S, Hcore, eri, 4)
        e_rhf = e_elec + e_nuc
        h_mo, eri_mo = mo_integrals(Hcore, eri, C)
        path = f"{outdir}/{name}"
        write_fcidump(path, h_mo, eri_mo, e_nuc, 4)
        fci = dense_fci_ground(h_mo, eri_mo, e_nuc, 4)
        print(f"alpha={alpha}: E_RHF = {e_rhf:.6f}  E_FCI(N=4,Sz=0) = {fci[0]:.6f}")
        print(f"  orbital energies: {np.round(orbital_energies, 6)}")
        print(f"  RHF - FCI = {1e3*(e_rhf - fci[0]):.3f} mHa")
        print(f"  lowest sector eigenvalues: {np.round(fci[:4], 6)}")
        print(f"  wrote {path}")


if __name__ == "__main__":
    main()

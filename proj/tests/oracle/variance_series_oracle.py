#!/usr/bin/env python3
"""Independent oracle for the chaos-coefficient and variance-series tests.

Recomputes, with numpy/scipy/sympy only, the frozen values asserted in
tests/test_chaos.cpp for the 1-d unit-scale model: the sqrt of the
value-and-second-derivative covariance block, the d2 coefficient table, and
the per-order lag-integrated variance contributions u_q on [-8, 8].

Run: python3 variance_series_oracle.py
"""

import itertools
import math

import numpy as np
import sympy as sp
from scipy.integrate import quad
from scipy.linalg import sqrtm

# 1-d field, unit scale.  Component order (X', X, X'').
t = sp.symbols('t')
rho = sp.exp(-t**2 / 2)
dr = [sp.lambdify(t, sp.diff(rho, t, k)) for k in range(5)]

lam2 = 1.0
L1 = np.array([[1.0]])
L2 = np.array([[1.0, -1.0], [-1.0, 3.0]])
S1 = sqrtm(L1).real
S2 = sqrtm(L2).real
iS1 = np.linalg.inv(S1)
iS2 = np.linalg.inv(S2)
print('sqrt(L2) =', S2.tolist())

# Cross covariance E[vec(0) vec(nu)^T] for vec = (X', X, X''):
# entry (j, k) = (-1)^{o_j} rho^{(o_j + o_k)}(nu) with derivative orders
# o = (1, 0, 2), whitened on both sides.
o = [1, 0, 2]


def Kmat(nu):
    E = np.empty((3, 3))
    for j in range(3):
        for k in range(3):
            E[j, k] = (-1) ** o[j] * dr[o[j] + o[k]](nu)
    iS = np.zeros((3, 3))
    iS[0, 0] = iS1[0, 0]
    iS[1:, 1:] = iS2
    return iS @ E @ iS.T


def hermite(k, x):
    a, b = 1.0, 0.0  # He_k, He_{k-1}
    for i in range(k):
        a, b = x * a - i * b, a
    return a


def H0(k):
    if k % 2:
        return 0.0
    return (-1) ** (k // 2) * math.prod(range(1, k, 2)) if k else 1.0


def d1(a1):
    # Gradient-block coefficient: lam2^{-1/2} (2 pi)^{-1/2} He_{a1}(0) / a1!
    return lam2 ** -0.5 * (2 * math.pi) ** -0.5 * H0(a1) / math.factorial(a1)


# d2(b) = (1/b!) E[(S2 u)_1 (S2 u)_2 He_{b1}(u1) He_{b2}(u2)] for standard
# normal u; the integrand is a polynomial so order-8 quadrature is exact.
gh_x, gh_w = np.polynomial.hermite_e.hermegauss(8)
gh_w = gh_w / gh_w.sum()


def d2(b1, b2):
    s = 0.0
    for x1, w1 in zip(gh_x, gh_w):
        for x2, w2 in zip(gh_x, gh_w):
            w = S2 @ np.array([x1, x2])
            s += w1 * w2 * w[0] * w[1] * hermite(b1, x1) * hermite(b2, x2)
    return s / (math.factorial(b1) * math.factorial(b2))


print('d2 table (b1, b2, value):')
for b1 in range(4):
    for b2 in range(4):
        v = d2(b1, b2)
        if abs(v) > 1e-13:
            print(f'  d2({b1},{b2}) = {v:.17g}')


def d_full(a):
    return d1(a[0]) * d2(a[1], a[2])


def partitions(q, N):
    if N == 1:
        yield (q,)
        return
    for i in range(q + 1):
        for rest in partitions(q - i, N - 1):
            yield (i,) + rest


def mehler(a, b, K):
    # E[prod He_{a_i}(U_i) prod He_{b_j}(V_j)] with K_ij = E[U_i V_j]:
    # a! b! sum over nonnegative integer matrices M with row sums a and
    # column sums b of prod K^M / M!.
    if sum(a) != sum(b):
        return 0.0
    N = len(a)
    total = 0.0

    def rec(idx, rowrem, colrem, prod):
        nonlocal total
        if idx == N * N:
            total += prod
            return
        i, j = divmod(idx, N)
        lim = min(rowrem[i], colrem[j])
        for m in range(lim + 1):
            rowrem[i] -= m
            colrem[j] -= m
            # The last cell of a row must absorb the row remainder.
            if not (j == N - 1 and rowrem[i] != 0):
                rec(idx + 1, rowrem, colrem, prod * K[i, j] ** m / math.factorial(m))
            rowrem[i] += m
            colrem[j] += m

    rec(0, list(a), list(b), 1.0)
    afac = math.prod(math.factorial(x) for x in a)
    bfac = math.prod(math.factorial(x) for x in b)
    return afac * bfac * total


# Sanity: E[He_1(U_0) He_1(V_1)] = K_01.
Ktest = Kmat(0.7)
print('mehler sanity:', mehler((1, 0, 0), (0, 1, 0), Ktest), Ktest[0, 1])

Q = 10
dd = {}
for q in range(1, Q + 1):
    for a in partitions(q, 3):
        v = d_full(a)
        if abs(v) > 1e-14:
            dd[a] = v


def integrand(nu, q):
    K = Kmat(nu)
    s = 0.0
    for a, da in dd.items():
        if sum(a) != q:
            continue
        for b, db in dd.items():
            if sum(b) != q:
                continue
            s += da * db * mehler(a, b, K)
    return s


print('u_q (1-d, unit scale, lag domain [-8, 8]):')
tot = 0.0
for q in range(1, Q + 1):
    val, err = quad(lambda nu: integrand(nu, q), 0, 8, limit=200,
                    epsabs=1e-12, epsrel=1e-10)
    u = 2 * val
    tot += u
    print(f'  u_{q} = {u:.15g}   sigma2(<= {q}) = {tot:.15g}')

"""Shared fixture builders and independent oracles for the test suite."""

import cmath
import math
import random

import numpy as np

from bnftrace.blocks import ELLIPTIC, REAL_HYPERBOLIC, SpectrumBlocks
from bnftrace.fields import FloatField, RationalField
from bnftrace.qbnf import QuantumBNF
from bnftrace.series import MultiSeries, Orders, zseries


def rt1():
    """The exact rational round-trip fixture:
    n=1, mu(z) = 2 ln 2 + z, F = (1/7) iota^2 + h((1/3) iota + 1/5),
    orders iota<=4, z<=3, h<=3."""
    F = RationalField()
    blocks = SpectrumBlocks(F, [REAL_HYPERBOLIC], [F.from_int(2)])
    jet = zseries(F, 3, {1: F.one})
    Fser = MultiSeries(F, 1, Orders(4, 3, 3), {
        ((2,), 0, 0): F.from_rational("1/7"),
        ((1,), 0, 1): F.from_rational("1/3"),
        ((0,), 0, 1): F.from_rational("1/5"),
    })
    bnf = QuantumBNF(blocks, [jet], Fser)
    action = zseries(F, 3, {1: F.one})
    return F, bnf, action


def mixed_float_fixture(seed, with_jets=False):
    """n=2 blocks (mu_1 = ln 3 hyperbolic, theta_2 = 1 elliptic, canonical
    order) with a random F of total degree <= 3 at orders (3, 2, 2)."""
    F = FloatField()
    rng = random.Random(seed)
    blocks = SpectrumBlocks(F, [REAL_HYPERBOLIC, ELLIPTIC],
                            [cmath.exp(0.5 * math.log(3)), cmath.exp(0.5j)])
    terms = {}
    for l in range(0, 3):
        for a1 in range(4):
            for a2 in range(4):
                deg = a1 + a2 + l
                if deg > 3 or deg < 1:
                    continue
                if l == 0 and a1 + a2 < 2:
                    continue
                terms[((a1, a2), 0, l)] = complex(
                    rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.3
                if rng.random() < 0.7:
                    terms[((a1, a2), 1, l)] = rng.uniform(-1, 1) * 0.2 + 0j
                    terms[((a1, a2), 2, l)] = rng.uniform(-1, 1) * 0.1 + 0j
    Fser = MultiSeries(F, 2, Orders(3, 2, 2), terms)
    if with_jets:
        jets = [zseries(F, 2, {1: 0.11 + 0j, 2: -0.05 + 0j}),
                zseries(F, 2, {1: 0.07j, 2: 0.02j})]
    else:
        jets = [zseries(F, 2), zseries(F, 2)]
    return F, QuantumBNF(blocks, jets, Fser)


def random_hyperbolic_exp_half(field, n, rng, re_range=(0.5, 2.0)):
    out = []
    for _ in range(n):
        mu = rng.uniform(*re_range)
        out.append(field.exp(mu * 0.5))
    return out


def random_F_total_degree(field, n, rng, max_total=3, orders=(4, 0, 2),
                          scale=0.4):
    """Random F with l + |alpha| <= max_total, O(iota^2) at h^0, z-free."""
    terms = {}
    for l in range(0, max_total + 1):
        for alpha in _alphas(n, max_total - l):
            deg = sum(alpha) + l
            if deg < 1 or deg > max_total:
                continue
            if l == 0 and sum(alpha) < 2:
                continue
            terms[(alpha, 0, l)] = complex(rng.uniform(-1, 1),
                                           rng.uniform(-1, 1)) * scale
    return MultiSeries(field, n, Orders(*orders), terms)


def _alphas(n, max_deg):
    if n == 1:
        return [(a,) for a in range(max_deg + 1)]
    out = []
    for a1 in range(max_deg + 1):
        for a2 in range(max_deg + 1 - a1):
            out.append((a1, a2))
    return out


def brute_force_trace_coeffs(bnf, k, n_h, truncation=80):
    """Independent lattice-sum computation of the trace h-expansion at z=0.

    tr e^{-ikG/h} = sum_{m in N^n} e^{-k<m+e0/2, mu>} e^{-ik F(h y_m; h)/h}
    with y_m = (m + e0/2)/i, everything expanded in h with numpy -- no coth
    calculus, no f_j regrouping.  Returns coefficients *including* the
    constant phase factor e^{-ik f0(0)}.
    """
    f = bnf.field
    n = bnf.n
    E = [f.to_complex(x) for x in bnf.blocks.exp_half]
    grids = np.meshgrid(*[np.arange(truncation + 1)] * n, indexing="ij")
    y = [(-1j) * (g + 0.5) for g in grids]            # (m + 1/2)/i
    weight = np.ones_like(y[0], dtype=complex)
    for j in range(n):
        mu_j = 2 * cmath.log(E[j])
        weight = weight * np.exp(-(grids[j] + 0.5) * k * mu_j)
    # h-polynomial of F(h y; h)/h per lattice point
    g_layers = [np.zeros_like(weight) for _ in range(n_h + 1)]
    for (alpha, m, l), c in bnf.F.terms.items():
        if m != 0:
            continue
        j = l + sum(alpha) - 1
        if j > n_h:
            continue
        val = np.full_like(weight, f.to_complex(c))
        for jj, a in enumerate(alpha):
            if a:
                val = val * y[jj] ** a
        g_layers[j] = g_layers[j] + val
    mik = -1j * k
    # exp(mik * sum_j h^j g_j) = e^{mik g_0} * series in the nilpotent part
    coeffs = [np.exp(mik * g_layers[0])]
    nil = [mik * g for g in g_layers[1:]]             # h^1..h^{n_h} exponent
    series = [np.ones_like(weight)] + [np.zeros_like(weight)
                                       for _ in range(n_h)]
    power = [np.ones_like(weight)] + [np.zeros_like(weight)
                                      for _ in range(n_h)]
    fact = 1.0
    for m_ord in range(1, n_h + 1):
        new_power = [np.zeros_like(weight) for _ in range(n_h + 1)]
        for d1 in range(n_h + 1):
            for d2 in range(1, n_h + 1 - d1):
                new_power[d1 + d2] = new_power[d1 + d2] + power[d1] * nil[d2 - 1]
        power = new_power
        fact *= m_ord
        for d in range(n_h + 1):
            series[d] = series[d] + power[d] / fact
    out = []
    for d in range(n_h + 1):
        out.append(complex(np.sum(weight * coeffs[0] * series[d])))
    return out


def random_symplectic_2x2(rng):
    """Random element of Sp(2, R) = SL(2, R) via exp of a traceless matrix."""
    a = rng.uniform(-0.8, 0.8)
    b = rng.uniform(-0.8, 0.8)
    c = rng.uniform(-0.8, 0.8)
    A = np.array([[a, b], [c, -a]])
    from scipy.linalg import expm

    return expm(A)

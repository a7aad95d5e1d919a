"""Gauss rules on the reference elements and exact Legendre helpers.

The reference triangle is T = {(xi, eta): 0 < eta < xi < 1} and the
reference square is S = (0,1)^2.  Triangle rules are collapsed tensor
rules through the map (a, b) -> (a, a*b), which is exact for polynomials
when the orders are chosen accordingly.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0,1]; exact for degree 2n-1."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=None)
def square_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss rule with n^2 points on the unit square."""
    x, w = gauss_01(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pts, W.ravel()


@lru_cache(maxsize=None)
def triangle_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on T, exact for polynomials of degree 2n-2.

    Maps (a,b) in [0,1]^2 to (a, a*b) with Jacobian a; a polynomial of
    total degree d pulls back to degree <= 2d+1 in a and <= d in b, so
    n >= d+1 points per direction integrate it exactly.
    """
    x, w = gauss_01(n)
    A, B = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w) * A
    pts = np.column_stack([A.ravel(), (A * B).ravel()])
    return pts, W.ravel()


def reference_rule(kind: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    if kind == "tri":
        return triangle_rule(n)
    if kind == "quad":
        return square_rule(n)
    raise ValueError(f"unknown reference kind {kind!r}")


@lru_cache(maxsize=None)
def legendre_coeffs_exact(n: int) -> tuple[Fraction, ...]:
    """Monomial coefficients of the Legendre polynomial P_n on [-1,1], exact."""
    if n == 0:
        return (Fraction(1),)
    if n == 1:
        return (Fraction(0), Fraction(1))
    pm2 = legendre_coeffs_exact(n - 2)
    pm1 = legendre_coeffs_exact(n - 1)
    out = [Fraction(0)] * (n + 1)
    for k, c in enumerate(pm1):
        out[k + 1] += Fraction(2 * n - 1, n) * c
    for k, c in enumerate(pm2):
        out[k] -= Fraction(n - 1, n) * c
    return tuple(out)


def legendre_coeffs(n: int, exact: bool) -> np.ndarray:
    c = legendre_coeffs_exact(n)
    if exact:
        return np.array(c, dtype=object)
    return np.array([float(v) for v in c])


@lru_cache(maxsize=None)
def gauss_lobatto_nodes_01(p: int) -> np.ndarray:
    """The p+1 Gauss-Lobatto nodes on [0,1] (endpoints included), p >= 1."""
    if p < 1:
        raise ValueError("Gauss-Lobatto nodes need p >= 1")
    if p == 1:
        t = np.array([-1.0, 1.0])
    else:
        dleg = np.polynomial.legendre.legder([0.0] * p + [1.0])
        interior = np.polynomial.legendre.legroots(dleg)
        t = np.concatenate([[-1.0], np.sort(interior), [1.0]])
    return (t + 1.0) / 2.0


@lru_cache(maxsize=None)
def gl_node_poly_exact(p: int) -> tuple[Fraction, ...]:
    """Monic polynomial (exact coefficients) whose roots are the p+1
    Gauss-Lobatto nodes on [0,1]: proportional to x(x-1) P_p'(2x-1)."""
    if p < 1:
        raise ValueError("p >= 1 required")
    leg = legendre_coeffs_exact(p)
    # derivative of P_p, then substitute s = 2x-1
    dp = [k * c for k, c in enumerate(leg)][1:]  # coeffs of P_p' in s
    # expand sum dp[k] (2x-1)^k
    out = [Fraction(0)] * (p + 2)
    pw = [Fraction(1)]  # (2x-1)^0
    for k, c in enumerate(dp):
        if k > 0:
            new = [Fraction(0)] * (len(pw) + 1)
            for i, v in enumerate(pw):
                new[i] -= v
                new[i + 1] += 2 * v
            pw = new
        for i, v in enumerate(pw):
            out[i] += c * v
    # multiply by x(x-1) = x^2 - x
    res = [Fraction(0)] * (p + 2)
    for i, v in enumerate(out[: p]):
        res[i + 2] += v
        res[i + 1] -= v
    # out has degree p-1 (coeffs beyond are zero); res degree p+1
    lead = res[p + 1]
    if lead == 0:
        raise RuntimeError("node polynomial degenerated")
    return tuple(v / lead for v in res)


def gl_node_poly(p: int, exact: bool) -> np.ndarray:
    c = gl_node_poly_exact(p)
    if exact:
        return np.array(c, dtype=object)
    return np.array([float(v) for v in c])

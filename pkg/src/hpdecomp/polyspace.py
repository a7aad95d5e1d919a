"""Exact bivariate polynomial algebra on the reference elements and the
conforming variable-degree spaces built on a surface mesh.

Polynomials are stored as dense coefficient arrays c[i, j] multiplying
xi^i * eta^j.  Two coefficient modes are supported: ``exact`` uses
``fractions.Fraction`` entries (object dtype) so that operator identities
can be tested exactly; the default double mode uses float64.

The global space S^{p,1} couples elements through vertex hats and
hierarchical edge functions; the trace degree on a shared edge is the
minimum of the two adjacent element degrees.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .quadrature import legendre_coeffs

TRI = "tri"
QUAD = "quad"

TRI_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
QUAD_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

# local edges as ordered pairs of local vertex slots
TRI_EDGES = ((0, 1), (1, 2), (2, 0))
QUAD_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))


def _zero(exact: bool):
    return Fraction(0) if exact else 0.0


def _arr(shape, exact: bool):
    if exact:
        a = np.empty(shape, dtype=object)
        a[...] = Fraction(0)
        return a
    return np.zeros(shape)


def _as_number(v, exact: bool):
    if exact:
        return v if isinstance(v, Fraction) else Fraction(v)
    return float(v)


class RefPolynomial:
    """Polynomial on a reference element, dense monomial coefficients."""

    __slots__ = ("kind", "coeffs", "exact")

    def __init__(self, kind: str, coeffs: np.ndarray, exact: bool = False):
        self.kind = kind
        self.coeffs = coeffs
        self.exact = exact

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero(kind: str, exact: bool = False) -> "RefPolynomial":
        return RefPolynomial(kind, _arr((1, 1), exact), exact)

    @staticmethod
    def constant(kind: str, value, exact: bool = False) -> "RefPolynomial":
        a = _arr((1, 1), exact)
        a[0, 0] = _as_number(value, exact)
        return RefPolynomial(kind, a, exact)

    @staticmethod
    def monomial(kind: str, i: int, j: int, exact: bool = False) -> "RefPolynomial":
        a = _arr((i + 1, j + 1), exact)
        a[i, j] = _as_number(1, exact)
        return RefPolynomial(kind, a, exact)

    @staticmethod
    def from_coeffs(kind: str, coeffs, exact: bool = False) -> "RefPolynomial":
        rows = [list(r) for r in coeffs]
        n = len(rows)
        m = max(len(r) for r in rows)
        out = _arr((n, m), exact)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                out[i, j] = _as_number(v, exact)
        return RefPolynomial(kind, out, exact)

    def copy(self) -> "RefPolynomial":
        return RefPolynomial(self.kind, self.coeffs.copy(), self.exact)

    def to_double(self) -> "RefPolynomial":
        if not self.exact:
            return self
        return RefPolynomial(self.kind, self.coeffs.astype(float), False)

    def with_kind(self, kind: str) -> "RefPolynomial":
        """Reinterpret on another reference domain (same coefficients)."""
        return RefPolynomial(kind, self.coeffs, self.exact)

    # -- basic algebra ------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RefPolynomial):
            return other
        return RefPolynomial.constant(self.kind, other, self.exact)

    def __add__(self, other):
        other = self._coerce(other)
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        m = max(self.coeffs.shape[1], other.coeffs.shape[1])
        out = _arr((n, m), self.exact)
        out[: self.coeffs.shape[0], : self.coeffs.shape[1]] += self.coeffs
        out[: other.coeffs.shape[0], : other.coeffs.shape[1]] += other.coeffs
        return RefPolynomial(self.kind, out, self.exact)

    def __sub__(self, other):
        return self + (self._coerce(other) * -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, other):
        if isinstance(other, RefPolynomial):
            a, b = self.coeffs, other.coeffs
            out = _arr((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), self.exact)
            for (i, j), v in np.ndenumerate(a):
                if v:
                    out[i : i + b.shape[0], j : j + b.shape[1]] += v * b
            return RefPolynomial(self.kind, out, self.exact)
        v = _as_number(other, self.exact)
        return RefPolynomial(self.kind, self.coeffs * v, self.exact)

    __rmul__ = __mul__

    def scale(self):
        vals = [abs(v) for v in np.ravel(self.coeffs)]
        return max(vals, default=_zero(self.exact))

    def trim(self, tol: float = 0.0) -> "RefPolynomial":
        """Drop trailing zero rows/columns (|c| <= tol * scale in doubles)."""
        c = self.coeffs
        if self.exact:
            nz = np.array([[bool(v) for v in row] for row in c], dtype=bool)
        else:
            scale = float(np.max(np.abs(c))) if c.size else 0.0
            nz = np.abs(c) > tol * max(scale, 1e-300)
        if not nz.any():
            return RefPolynomial.zero(self.kind, self.exact)
        rows = np.where(nz.any(axis=1))[0]
        cols = np.where(nz.any(axis=0))[0]
        return RefPolynomial(self.kind, c[: rows[-1] + 1, : cols[-1] + 1], self.exact)

    def degree(self, tol: float = 1e-12) -> int:
        """Minimal valid degree bound: total degree on T, max degree on S."""
        t = self.trim(tol)
        if self.kind == TRI:
            return t.total_degree(tol)
        return max(t.coeffs.shape[0] - 1, t.coeffs.shape[1] - 1)

    def total_degree(self, tol: float = 1e-12) -> int:
        t = self.trim(tol)
        d = 0
        for (i, j), v in np.ndenumerate(t.coeffs):
            if v:
                d = max(d, i + j)
        return d

    # -- evaluation ---------------------------------------------------
    def __call__(self, xi, eta) -> float:
        return float(self.evaluate(np.array([[xi, eta]], dtype=float))[0])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an (n,2) array of reference coordinates."""
        pts = np.asarray(points, dtype=float)
        c = self.coeffs.astype(float) if self.exact else self.coeffs
        out = np.zeros(len(pts))
        xi, eta = pts[:, 0], pts[:, 1]
        for i in range(c.shape[0] - 1, -1, -1):
            row = np.zeros(len(pts))
            for j in range(c.shape[1] - 1, -1, -1):
                row = row * eta + c[i, j]
            out = out * xi + row
        return out

    def eval_exact(self, xi, eta):
        xi = Fraction(xi)
        eta = Fraction(eta)
        out = Fraction(0)
        for i in range(self.coeffs.shape[0] - 1, -1, -1):
            row = Fraction(0)
            for j in range(self.coeffs.shape[1] - 1, -1, -1):
                row = row * eta + self.coeffs[i, j]
            out = out * xi + row
        return out

    def value(self, xi, eta):
        if self.exact:
            return self.eval_exact(xi, eta)
        return self(xi, eta)

    # -- calculus -------------------------------------------------------
    def derivative(self, axis: int) -> "RefPolynomial":
        c = self.coeffs
        if axis == 0:
            if c.shape[0] == 1:
                return RefPolynomial.zero(self.kind, self.exact)
            out = _arr((c.shape[0] - 1, c.shape[1]), self.exact)
            for i in range(1, c.shape[0]):
                out[i - 1, :] = c[i, :] * i
        else:
            if c.shape[1] == 1:
                return RefPolynomial.zero(self.kind, self.exact)
            out = _arr((c.shape[0], c.shape[1] - 1), self.exact)
            for j in range(1, c.shape[1]):
                out[:, j - 1] = c[:, j] * j
        return RefPolynomial(self.kind, out, self.exact)

    # -- composition ---------------------------------------------------
    def compose_affine(self, A, b, kind: str | None = None) -> "RefPolynomial":
        """Exact coefficients of u(A x + b); A is 2x2, b is length 2."""
        exact = self.exact
        a00 = _as_number(A[0][0], exact)
        a01 = _as_number(A[0][1], exact)
        a10 = _as_number(A[1][0], exact)
        a11 = _as_number(A[1][1], exact)
        b0 = _as_number(b[0], exact)
        b1 = _as_number(b[1], exact)
        kind = kind or self.kind
        X = _arr((2, 2), exact)
        X[0, 0], X[1, 0], X[0, 1] = b0, a00, a01
        Y = _arr((2, 2), exact)
        Y[0, 0], Y[1, 0], Y[0, 1] = b1, a10, a11
        return self._substitute(RefPolynomial(kind, X, exact), RefPolynomial(kind, Y, exact), kind)

    def compose_duffy(self) -> "RefPolynomial":
        """u on T composed with the collapsing map S -> T,
        (xi,eta) -> (eta(1-xi)+xi, eta); output lives on S."""
        exact = self.exact
        X = _arr((2, 2), exact)
        X[1, 0] = _as_number(1, exact)
        X[0, 1] = _as_number(1, exact)
        X[1, 1] = _as_number(-1, exact)
        Y = _arr((1, 2), exact)
        Y[0, 1] = _as_number(1, exact)
        return self._substitute(RefPolynomial(QUAD, X, exact), RefPolynomial(QUAD, Y, exact), QUAD)

    def _substitute(self, pX: "RefPolynomial", pY: "RefPolynomial", kind: str) -> "RefPolynomial":
        c = self.coeffs
        n, m = c.shape
        xpows = [RefPolynomial.constant(kind, 1, self.exact)]
        for _ in range(1, n):
            xpows.append(xpows[-1] * pX)
        ypows = [RefPolynomial.constant(kind, 1, self.exact)]
        for _ in range(1, m):
            ypows.append(ypows[-1] * pY)
        out = RefPolynomial.zero(kind, self.exact)
        for (i, j), v in np.ndenumerate(c):
            if v:
                out = out + xpows[i] * ypows[j] * v
        return RefPolynomial(kind, out.coeffs, self.exact)

    # -- traces ----------------------------------------------------------
    def edge_trace(self, p0, p1) -> np.ndarray:
        """1D coefficients (in t) of u(p0 + t (p1 - p0)), t in [0,1]."""
        exact = self.exact
        d0 = _as_number(p1[0], exact) - _as_number(p0[0], exact)
        d1 = _as_number(p1[1], exact) - _as_number(p0[1], exact)
        comp = self.compose_affine([[d0, 0], [d1, 0]], [p0[0], p0[1]])
        return comp.coeffs[:, 0]

    # -- division ---------------------------------------------------------
    def divide_affine(self, c0, c1, c2):
        """Divide by the affine factor c0 + c1*xi + c2*eta.

        Returns (quotient, relative remainder magnitude).  Valid input is a
        polynomial that vanishes on the factor's zero line; the remainder
        measures how far the input is from that class.
        """
        exact = self.exact
        c0 = _as_number(c0, exact)
        c1 = _as_number(c1, exact)
        c2 = _as_number(c2, exact)
        if c1:
            q, rem = _div_primary(self.coeffs, c1, c0, c2, exact)
            quo = RefPolynomial(self.kind, q, exact)
        elif c2:
            qT, rem = _div_primary(self.coeffs.T.copy(), c2, c0, c1, exact)
            quo = RefPolynomial(self.kind, qT.T.copy(), exact)
        else:
            raise ValueError("factor must be non-constant")
        scale = self.scale()
        rem_mag = max((abs(v) for v in np.ravel(rem)), default=_zero(exact))
        rel = float(rem_mag) / max(float(scale), 1e-300)
        return quo.trim(), rel


def _div_primary(c, clead, c0, cother, exact: bool):
    """Long division of sum_i a_i(y) x^i by (clead*x + c0 + cother*y)."""
    n, m = c.shape
    mm = m + max(n - 1, 0) * (1 if cother else 0)
    work = _arr((n, mm), exact)
    work[:, :m] += c
    q = _arr((max(n - 1, 1), mm), exact)
    for i in range(n - 1, 0, -1):
        qi = work[i, :] / clead
        q[i - 1, :] += qi
        work[i - 1, :] -= qi * c0
        if cother:
            work[i - 1, 1:] -= qi[:-1] * cother
        work[i, :] = _arr((mm,), exact)
    return q, work[0, :]


def poly_compose_affine(u: RefPolynomial, A, b, kind: str | None = None) -> RefPolynomial:
    """Exact composition u(Ax + b); degree is preserved."""
    return u.compose_affine(A, b, kind)


def divide_1d(coeffs, root, exact: bool):
    """Synthetic division of a 1D polynomial by (t - root).

    Returns (quotient, remainder) with p(t) = (t - root) q(t) + remainder.
    """
    coeffs = list(coeffs)
    n = len(coeffs)
    root = _as_number(root, exact)
    if n == 1:
        return np.array([_zero(exact)], dtype=object if exact else float), coeffs[0]
    q = [_zero(exact)] * (n - 1)
    carry = coeffs[-1]
    for i in range(n - 2, -1, -1):
        q[i] = carry
        carry = coeffs[i] + carry * root
    return np.array(q, dtype=object if exact else float), carry


def poly1d_rem(coeffs, divisor, exact: bool):
    """Remainder of a 1D polynomial modulo a divisor (any nonzero lead)."""
    div = list(divisor)
    lead = div[-1]
    div = [d / lead for d in div]
    r = list(coeffs)
    dn = len(div) - 1
    while len(r) - 1 >= dn and len(r) > dn:
        ctop = r[-1]
        off = len(r) - 1 - dn
        for k in range(dn + 1):
            r[off + k] -= ctop * div[k]
        r.pop()
    return np.array(r, dtype=object if exact else float)


# ----------------------------------------------------------------------
# hierarchical shape functions
# ----------------------------------------------------------------------


def edge_kernel_1d(k: int, exact: bool = False) -> np.ndarray:
    """1D coefficients of N_k(t) = t (1-t) P_{k-2}(2t - 1), k >= 2."""
    if k < 2:
        raise ValueError("edge functions start at k = 2")
    leg = legendre_coeffs(k - 2, exact)
    out = np.array([_zero(exact)] * (k - 1), dtype=object if exact else float)
    pw = np.array([_as_number(1, exact)], dtype=object if exact else float)
    for i, c in enumerate(leg):
        if i > 0:
            new = np.array([_zero(exact)] * (len(pw) + 1), dtype=object if exact else float)
            new[: len(pw)] -= pw
            new[1:] += 2 * pw
            pw = new
        out[: len(pw)] = out[: len(pw)] + c * pw
    res = np.array([_zero(exact)] * (k + 1), dtype=object if exact else float)
    for i, c in enumerate(out):
        res[i + 1] += c
        res[i + 2] -= c
    return res


def poly_from_1d(kind: str, coeffs1d, tpoly: RefPolynomial) -> RefPolynomial:
    """Compose a 1D polynomial with a polynomial reference coordinate."""
    exact = tpoly.exact
    out = RefPolynomial.zero(kind, exact)
    pw = RefPolynomial.constant(kind, 1, exact)
    for i, c in enumerate(coeffs1d):
        if i > 0:
            pw = pw * tpoly
        if c:
            out = out + pw * c
    return out


def tri_barycentric(exact: bool = False) -> list[RefPolynomial]:
    """Affine hats on T for vertices (0,0), (1,0), (1,1)."""
    lam0 = RefPolynomial.from_coeffs(TRI, [[1], [-1]], exact)            # 1 - xi
    lam1 = RefPolynomial.from_coeffs(TRI, [[0, -1], [1, 0]], exact)      # xi - eta
    lam2 = RefPolynomial.from_coeffs(TRI, [[0, 1]], exact)               # eta
    return [lam0, lam1, lam2]


def quad_corner_hats(exact: bool = False) -> list[RefPolynomial]:
    xi = RefPolynomial.monomial(QUAD, 1, 0, exact)
    eta = RefPolynomial.monomial(QUAD, 0, 1, exact)
    one = RefPolynomial.constant(QUAD, 1, exact)
    return [
        (one - xi) * (one - eta),
        xi * (one - eta),
        xi * eta,
        (one - xi) * eta,
    ]


def local_shape_set(kind: str, p: int, edge_orders: tuple[int, ...],
                    edge_dirs: tuple[tuple[int, int], ...]) -> list[RefPolynomial]:
    """Shape functions for one element: vertex hats, edge functions up to
    the per-edge order, then interior bubbles for degree p.

    ``edge_dirs[i] = (la, lb)`` gives the local vertex slots of edge i in
    canonical (global) orientation, so edge traces match across elements.
    """
    exact = False
    shapes: list[RefPolynomial] = []
    if kind == TRI:
        lam = tri_barycentric()
        shapes.extend(lam)
        for (la, lb), pe in zip(edge_dirs, edge_orders):
            a, b = lam[la], lam[lb]
            diff = b - a
            for k in range(2, pe + 1):
                leg = legendre_coeffs(k - 2, exact)
                shapes.append(a * b * poly_from_1d(TRI, leg, diff))
        if p >= 3:
            bub = lam[0] * lam[1] * lam[2]
            d1 = lam[1] - lam[0]
            d2 = lam[2] * 2 - RefPolynomial.constant(TRI, 1)
            for i in range(0, p - 2):
                for j in range(0, p - 2 - i):
                    pi = poly_from_1d(TRI, legendre_coeffs(i, exact), d1)
                    pj = poly_from_1d(TRI, legendre_coeffs(j, exact), d2)
                    shapes.append(bub * pi * pj)
    else:
        shapes.extend(quad_corner_hats())
        xi = RefPolynomial.monomial(QUAD, 1, 0)
        eta = RefPolynomial.monomial(QUAD, 0, 1)
        one = RefPolynomial.constant(QUAD, 1)
        coords = {
            0: (xi, one - eta),
            1: (eta, xi),
            2: (one - xi, eta),
            3: (one - eta, one - xi),
        }
        for ei, ((la, lb), pe) in enumerate(zip(edge_dirs, edge_orders)):
            t, blend = coords[ei]
            if (la, lb) != QUAD_EDGES[ei]:
                t = one - t
            for k in range(2, pe + 1):
                shapes.append(blend * poly_from_1d(QUAD, edge_kernel_1d(k, exact), t))
        for i in range(2, p + 1):
            for j in range(2, p + 1):
                ni = poly_from_1d(QUAD, edge_kernel_1d(i, exact), xi)
                nj = poly_from_1d(QUAD, edge_kernel_1d(j, exact), eta)
                shapes.append(ni * nj)
    return shapes

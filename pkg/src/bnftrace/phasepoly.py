"""Polynomial maps on phase space, with the Lie machinery for map
normalization.

Variables are ordered (x_1..x_n, xi_1..xi_n); the bracket convention is

    {f, g} = sum_j d_{xi_j} f d_{x_j} g - d_{x_j} f d_{xi_j} g,

so the Hamiltonian flow of p moves x_j' = d_{xi_j} p, xi_j' = -d_{x_j} p,
matching H_p = sum d_xi p d_x - d_x p d_xi.  Everything is truncated at a
total polynomial degree carried explicitly, and coefficients live in a
field object from :mod:`bnftrace.fields`, so the same engine serves float
maps and exact rational fixtures.
"""

from .errors import DimensionMismatchError, SchemaError


class PhasePoly:
    """Polynomial in ``nvars`` variables truncated at total degree."""

    __slots__ = ("field", "nvars", "degree", "terms")

    def __init__(self, field, nvars, degree, terms=None):
        self.field = field
        self.nvars = nvars
        self.degree = degree
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != nvars:
                    raise DimensionMismatchError(
                        f"exponent {exps} has arity != {nvars}"
                    )
                if sum(exps) > degree or field.is_zero(c):
                    continue
                clean[exps] = c
        self.terms = clean

    @classmethod
    def zero(cls, field, nvars, degree):
        return cls(field, nvars, degree, {})

    @classmethod
    def scalar(cls, field, nvars, degree, value):
        return cls(field, nvars, degree, {(0,) * nvars: value})

    @classmethod
    def variable(cls, field, nvars, degree, i):
        e = [0] * nvars
        e[i] = 1
        return cls(field, nvars, degree, {tuple(e): field.one})

    def __add__(self, other):
        deg = min(self.degree, other.degree)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return PhasePoly(self.field, self.nvars, deg, terms)

    def __neg__(self):
        return PhasePoly(self.field, self.nvars, self.degree,
                         {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        deg = min(self.degree, other.degree)
        terms = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > deg:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                terms[e] = terms[e] + v if e in terms else v
        return PhasePoly(self.field, self.nvars, deg, terms)

    def scale(self, value):
        return PhasePoly(self.field, self.nvars, self.degree,
                         {e: value * c for e, c in self.terms.items()})

    def derive(self, i):
        terms = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                ne = list(e)
                ne[i] -= 1
                terms[tuple(ne)] = c * self.field.from_int(e[i])
        return PhasePoly(self.field, self.nvars, self.degree, terms)

    def eval(self, values):
        f = self.field
        total = f.zero
        for e, c in self.terms.items():
            v = c
            for val, p in zip(values, e):
                for _ in range(p):
                    v = v * val
            total = total + v
        return total

    def degree_part(self, d):
        return PhasePoly(self.field, self.nvars, self.degree,
                         {e: c for e, c in self.terms.items() if sum(e) == d})

    def min_degree(self):
        return min((sum(e) for e in self.terms), default=None)

    def max_coeff_abs(self):
        return max((self.field.abs(c) for c in self.terms.values()), default=0.0)

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f"<PhasePoly {len(self.terms)} terms deg<={self.degree}>"


def poisson(f, g, n):
    """{f, g} with the (x_1..x_n, xi_1..xi_n) variable layout."""
    out = PhasePoly.zero(f.field, f.nvars, min(f.degree, g.degree))
    for j in range(n):
        out = out + f.derive(n + j) * g.derive(j) - f.derive(j) * g.derive(n + j)
    return out


class PolyMap:
    """A polynomial map of phase space: 2n component polynomials."""

    __slots__ = ("field", "n", "degree", "comps")

    def __init__(self, field, n, degree, comps):
        if len(comps) != 2 * n:
            raise DimensionMismatchError("need 2n components")
        self.field = field
        self.n = n
        self.degree = degree
        self.comps = list(comps)

    @classmethod
    def identity(cls, field, n, degree):
        comps = [PhasePoly.variable(field, 2 * n, degree, i)
                 for i in range(2 * n)]
        return cls(field, n, degree, comps)

    @classmethod
    def from_linear(cls, field, n, degree, matrix):
        """matrix: 2n x 2n of field scalars (rows act on (x, xi))."""
        comps = []
        for i in range(2 * n):
            terms = {}
            for j in range(2 * n):
                c = matrix[i][j]
                if not field.is_zero(c):
                    e = [0] * (2 * n)
                    e[j] = 1
                    terms[tuple(e)] = c
            comps.append(PhasePoly(field, 2 * n, degree, terms))
        return cls(field, n, degree, comps)

    def compose(self, other):
        """self(other(w)), truncated."""
        if self.n != other.n:
            raise DimensionMismatchError("half-dimension mismatch")
        deg = min(self.degree, other.degree)
        f = self.field
        nv = 2 * self.n
        # cache powers of the inner components
        max_exp = [0] * nv
        for comp in self.comps:
            for e in comp.terms:
                for j, p in enumerate(e):
                    max_exp[j] = max(max_exp[j], p)
        pows = []
        for j in range(nv):
            lst = [PhasePoly.scalar(f, nv, deg, f.one)]
            for _ in range(max_exp[j]):
                lst.append(lst[-1] * other.comps[j])
            pows.append(lst)
        out = []
        for comp in self.comps:
            acc = PhasePoly.zero(f, nv, deg)
            for e, c in comp.terms.items():
                term = PhasePoly.scalar(f, nv, deg, c)
                for j, p in enumerate(e):
                    if p:
                        term = term * pows[j][p]
                acc = acc + term
            out.append(acc)
        return PolyMap(f, self.n, deg, out)

    def sub(self, other):
        return PolyMap(self.field, self.n, min(self.degree, other.degree),
                       [a - b for a, b in zip(self.comps, other.comps)])

    def eval(self, values):
        return [c.eval(values) for c in self.comps]

    def linear_matrix(self):
        """The Jacobian at the origin as a list-of-rows of field scalars."""
        f = self.field
        nv = 2 * self.n
        rows = []
        for comp in self.comps:
            row = []
            for j in range(nv):
                e = [0] * nv
                e[j] = 1
                row.append(comp.terms.get(tuple(e), f.zero))
            rows.append(row)
        return rows

    def max_degree_part(self, d):
        return [c.degree_part(d) for c in self.comps]

    def min_degree_above_linear(self):
        best = None
        for comp in self.comps:
            for e in comp.terms:
                s = sum(e)
                if s >= 2 and (best is None or s < best):
                    best = s
        return best

    def __repr__(self):
        return f"<PolyMap n={self.n} deg<={self.degree}>"


def ham_vector_field(chi, n):
    """Components of H_chi: (d_xi chi, -d_x chi)."""
    return [chi.derive(n + j) for j in range(n)] + \
           [-chi.derive(j) for j in range(n)]


def exp_ham(chi, n, degree):
    """The time-1 map of H_chi as a PolyMap, for chi of degree >= 3.

    Lie series w_i + sum_m H_chi^m(w_i)/m! terminates under truncation
    because each bracket with chi raises the degree by deg(chi) - 2 >= 1.
    """
    f = chi.field
    md = chi.min_degree()
    if md is not None and md < 3:
        raise SchemaError("exp_ham needs a generator of degree >= 3")
    nv = 2 * n
    comps = []
    for i in range(nv):
        w = PhasePoly.variable(f, nv, degree, i)
        acc = w
        cur = w
        m = 1
        while True:
            cur = poisson(chi, cur, n)
            if cur.is_zero():
                break
            acc = acc + cur.scale(f.factorial_inv(m))
            m += 1
            if m > degree + 2:
                break
        comps.append(acc)
    return PolyMap(f, n, degree, comps)


def iota_poly_to_phase(field, n, degree, iota_terms):
    """sum_m c_m prod_j (a_j b_j)^{m_j} as a PhasePoly in (a, b) layout."""
    terms = {}
    for m, c in iota_terms.items():
        e = list(m) + list(m)
        terms[tuple(e)] = c
    return PhasePoly(field, 2 * n, degree, terms)

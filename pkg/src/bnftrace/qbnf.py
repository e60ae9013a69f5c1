"""Quantum Birkhoff normal form data and the forward trace engine.

The normal form data is the pair (mu(z), F(iota, z; h)): classified
exponents with their z-jets, plus a truncated series F whose h^0 part is
O(iota^2).  Writing G = <iota, mu(z)> + F, the k-th power trace expands as

    tr U(z)^k = e^{ikS(z)/h} e^{-ik f0(z)} *
                exp(-ik sum_{j>=1} h^j f_j(z, i k^{-1} d/dmu))
                prod_j (1/2) csch(k mu_j / 2) |_{mu = mu(z)},

where f_j(z, y) = sum_{l + |alpha| = j+1} (F_l coefficient of iota^alpha) y^alpha
regroups F and f0(z) = F_1(z, 0).  The engine expands the exponential of
the (nilpotent) operator part, applies the resulting polynomial
differential operators through :mod:`bnftrace.hypcalc`, and Taylor-expands
along mu(z).

Phase conventions: the oscillatory prefactor e^{ikS(z)/h} is never mixed
into the h-expansion (the action series travels as metadata), and the
constant scalar phase e^{-ik f0(0)} is likewise factored out and stored in
``phase`` -- it is transcendental on the rational backend, and keeping it
symbolic is what makes the rational round trip bit-exact.  The z-dependent
part of the phase, exp(-ik (f0(z) - f0(0))), has polynomial coefficients
and is multiplied into the stored series.
"""

from . import hypcalc
from .blocks import require_nonresonant
from .errors import MathError, SchemaError
from .series import MultiSeries, Orders

DEFAULT_POLE_TOL = 1e-9


class QuantumBNF:
    """The data (mu(z), F(iota, z; h)).

    ``mu_jets`` are z-series for mu_j(z) - mu_j(0) (zero constant term);
    the constants live in ``blocks`` as half-exponentials.
    """

    __slots__ = ("field", "blocks", "mu_jets", "F")

    def __init__(self, blocks, mu_jets, F, validate=True):
        self.field = blocks.field
        self.blocks = blocks
        self.mu_jets = list(mu_jets)
        self.F = F
        if validate:
            self._validate()

    @property
    def n(self):
        return self.blocks.n

    def _validate(self):
        f = self.field
        if len(self.mu_jets) != self.n:
            raise SchemaError(
                f"expected {self.n} mu jets, got {len(self.mu_jets)}"
            )
        for jet in self.mu_jets:
            if jet.n_actions != 0:
                raise SchemaError("mu jets must be plain z-series")
            if not f.is_zero(jet.constant_term()):
                raise SchemaError(
                    "mu jets carry the z-dependence above mu(0); "
                    "constant terms belong to the blocks"
                )
        if self.F.n_actions != self.n:
            raise SchemaError(
                f"F has {self.F.n_actions} action slots, blocks have {self.n}"
            )
        for (alpha, _m, l), _c in self.F.terms.items():
            if l == 0 and sum(alpha) < 2:
                raise SchemaError(
                    "h^0 part of F must be O(iota^2): "
                    f"offending term iota^{alpha}"
                )

    def f_series(self, n_h, n_z):
        """Regroup F into sum_j h^j f_j(z, y) = F(h y, z; h)/h.

        The iota slots of the result hold y-powers.  Terms with
        l + |alpha| - 1 > n_h are dropped; products inside the exponential
        can still reach y-degree 2 n_h, hence the wide iota budget.
        """
        f = self.field
        orders = Orders(2 * n_h + 2, n_z, n_h)
        terms = {}
        for (alpha, m, l), c in self.F.terms.items():
            j = l + sum(alpha) - 1
            if j < 0:
                raise SchemaError("F violates the O(iota^2) normalization")
            if j > n_h or m > n_z:
                continue
            terms[(alpha, m, j)] = c
        return MultiSeries(f, self.n, orders, terms)

    def close_to(self, other, tol=None):
        if self.n != other.n or self.blocks.tags != other.blocks.tags:
            return False
        f = self.field
        ok = all(
            f.close(a, b, tol)
            for a, b in zip(self.blocks.exp_half, other.blocks.exp_half)
        )
        ok = ok and all(
            a.close_to(b, tol) for a, b in zip(self.mu_jets, other.mu_jets)
        )
        return ok and self.F.close_to(other.F, tol)


class TracePower:
    """Result of one trace_power call: stored series plus phase metadata.

    The represented trace is  e^{ikS(z)/h} * e^{-ik phase} * coeffs(z, h).
    """

    __slots__ = ("k", "phase", "coeffs")

    def __init__(self, k, phase, coeffs):
        self.k = k
        self.phase = phase
        self.coeffs = coeffs

    def __repr__(self):
        return f"<TracePower k={self.k} phase={self.phase!r}>"


class TraceData:
    """Per-power trace expansions with action and Maslov metadata."""

    __slots__ = ("field", "k_max", "action", "maslov", "phase", "coefficients")

    def __init__(self, field, k_max, action, maslov, phase, coefficients,
                 validate=True):
        self.field = field
        self.k_max = k_max
        self.action = action
        self.maslov = {int(k): int(v) % 4 for k, v in maslov.items()}
        self.phase = phase
        self.coefficients = dict(coefficients)
        if validate:
            self._validate()

    def _validate(self):
        if self.k_max < 1:
            raise SchemaError("k_max must be >= 1")
        if self.action.n_actions != 0:
            raise SchemaError("action must be a plain z-series")
        f = self.field
        for (_a, _m, _l), c in self.action.terms.items():
            im = f.to_complex(c).imag
            if abs(im) > 1e-12:
                raise SchemaError(f"action series must be real, found Im={im}")
        for k in range(1, self.k_max + 1):
            if k not in self.coefficients:
                raise SchemaError(f"missing trace coefficients for k={k}")

    def orders(self):
        s = self.coefficients[1]
        return Orders(0, s.orders.z, s.orders.h)


class LeadingTerm:
    """Geometric leading term: series plus the symbolic oscillatory factor."""

    __slots__ = ("series", "k", "maslov", "oscillatory")

    def __init__(self, series, k, maslov):
        self.series = series
        self.k = k
        self.maslov = maslov
        self.oscillatory = f"exp(i*{k}*I(z)/h)"

    def __repr__(self):
        return f"<LeadingTerm k={self.k} x {self.oscillatory}>"


def _check_trace_orders(bnf, orders):
    n_z, n_h = orders
    For = bnf.F.orders
    if n_h > For.h:
        raise SchemaError(
            f"trace h-order {n_h} exceeds F truncation h<={For.h}"
        )
    if n_h + 1 > For.iota:
        raise SchemaError(
            f"trace h-order {n_h} needs F iota-order >= {n_h + 1}, have {For.iota}"
        )
    if n_z > For.z:
        raise SchemaError(
            f"trace z-order {n_z} exceeds F truncation z<={For.z}"
        )


def trace_power(bnf, k, orders, pole_tol=DEFAULT_POLE_TOL):
    """Expansion of tr U(z)^k to the given (N_z, N_h) orders.

    Returns a :class:`TracePower`; see the module docstring for the exact
    phase convention.
    """
    if k < 1:
        raise SchemaError("k must be a positive integer")
    n_z, n_h = orders
    _check_trace_orders(bnf, orders)
    f = bnf.field
    n = bnf.n

    fs = bnf.f_series(n_h, n_z)

    # split off f_0(z): the h^0 layer, which must be y-independent
    f0_terms = {}
    for (alpha, m, l), c in fs.terms.items():
        if l == 0:
            if sum(alpha) != 0:
                raise SchemaError(
                    "h^0 layer of F(hy,z;h)/h must be y-independent; "
                    "the QuantumBNF is malformed"
                )
            f0_terms[((), m, 0)] = c
    # full order budget so later products do not truncate the h direction
    f0 = MultiSeries(f, 0, Orders(0, n_z, n_h), f0_terms)
    phase = f0.constant_term()
    f0plus = f0 - MultiSeries.scalar(f, 0, f0.orders, phase)

    minus_ik = -(f.i * f.from_int(k))

    # operator part: exp(-ik sum_{j>=1} h^j f_j(z, y))
    x_terms = {key: c for key, c in fs.terms.items() if key[2] >= 1}
    X = MultiSeries(f, n, fs.orders, x_terms)
    op = X.scale(minus_ik).exp_series()

    # z-dependent scalar phase
    pz = f0plus.scale(minus_ik).exp_series()

    # apply the operator monomials to the csch product along mu(z)
    ik_inv = f.i * f.inv(f.from_int(k))
    ealpha_cache = {}

    def e_alpha(alpha):
        if alpha not in ealpha_cache:
            expr = hypcalc.apply_derivatives(
                hypcalc.csch_product(f, n, k), alpha
            )
            ealpha_cache[alpha] = hypcalc.eval_series_in_z(
                expr, bnf.blocks.exp_half, bnf.mu_jets, n_z, pole_tol
            )
        return ealpha_cache[alpha]

    out = {}
    for (alpha, m, l), c in op.terms.items():
        da = sum(alpha)
        factor = c * ik_inv**da if da else c
        for ((), m2, _), ec in e_alpha(alpha).terms.items():
            mm = m + m2
            if mm > n_z:
                continue
            key = ((), mm, l)
            v = factor * ec
            out[key] = out[key] + v if key in out else v
    coeffs = MultiSeries(f, 0, Orders(0, n_z, n_h), out) * pz
    return TracePower(k, phase, coeffs)


def leading_term(action, maslov_nu, blocks, k, n_z, tol=DEFAULT_POLE_TOL,
                 mu_jets=None):
    """Leading geometric amplitude  e^{i nu pi/2} I'(z) / |det(dkappa^k - 1)|^{1/2}.

    The determinant magnitude factorizes over blocks as
    prod_j |2 sinh(k mu_j(z)/2)|, and every reciprocal factor is produced
    as a csch series (no series division).  The e^{ikI(z)/h} factor stays
    symbolic on the returned object.  ``mu_jets`` optionally supplies the
    z-dependence of the exponents; default is a z-independent orbit.
    """
    if k == 0:
        raise SchemaError("k must be nonzero")
    kk = abs(int(k))
    f = blocks.field
    orders = Orders(0, n_z, 0)
    deltas = mu_jets

    result = MultiSeries.scalar(f, 0, orders, f.i ** (int(maslov_nu) % 4))
    half = f.inv(f.from_int(2))
    j = 0
    while j < blocks.n:
        tag = blocks.tags[j]
        expr = hypcalc.csch_product(f, 1, kk)
        delta_j = [deltas[j]] if deltas is not None else None
        try:
            C = hypcalc.eval_series_in_z(
                expr, [blocks.exp_half[j]], delta_j, n_z, tol
            )
        except MathError as exc:
            raise MathError(
                f"degenerate orbit: |2 sinh(k mu_{j}/2)| below tolerance at k={k}"
            ) from exc
        if tag == "elliptic":
            # (1/2)csch(ik theta/2) = -i/(2 sin(k theta/2)); restore the
            # positive real magnitude 1/(2|sin|)
            E = blocks.exp_half[j]
            s2 = f.to_complex(E**kk - f.inv(E**kk))  # 2i sin(k theta/2)
            sign = 1 if s2.imag > 0 else -1
            result = result * C.scale(f.i * f.from_int(sign))
            j += 1
        elif tag == "real_hyperbolic":
            result = result * C
            j += 1
        else:  # complex hyperbolic pair: the pair product is already |.|^2
            delta_j2 = [deltas[j + 1]] if deltas is not None else None
            C2 = hypcalc.eval_series_in_z(
                hypcalc.csch_product(f, 1, kk),
                [blocks.exp_half[j + 1]], delta_j2, n_z, tol,
            )
            result = result * C * C2
            j += 2
    iprime = MultiSeries(f, 0, orders, action.derive("z").terms)
    return LeadingTerm(result * iprime, k, int(maslov_nu) % 4)


def make_trace_data(bnf, action, maslov, k_max, orders,
                    pole_tol=DEFAULT_POLE_TOL, resonance_order=10,
                    resonance_tol=1e-8):
    """Bundle trace_power outputs for k = 1..k_max into a TraceData."""
    if k_max < 1:
        raise SchemaError("k_max must be >= 1")
    require_nonresonant(bnf.blocks, resonance_order, resonance_tol)
    coefficients = {}
    phase = None
    for k in range(1, k_max + 1):
        tp = trace_power(bnf, k, orders, pole_tol)
        coefficients[k] = tp.coeffs
        phase = tp.phase
    maslov = {k: maslov.get(k, 0) if isinstance(maslov, dict) else maslov[k]
              for k in range(1, k_max + 1)}
    return TraceData(bnf.field, k_max, action, maslov, phase, coefficients)

"""Exact arithmetic for the curvature-expansion engine.

Three small algebraic types, built on fractions.Fraction:

  PiLaurent  -- finite sums  sum_e  q_e * pi^e  with rational q_e and
                integer (possibly negative) exponents e.
  NPoly      -- polynomials in the dimension symbol n with PiLaurent
                coefficients.  The expansion coefficients are polynomials
                in n (they enter through (n-1)(n-3) and its powers), and
                a polynomial in n is closed under the recurrence.
  TrigPoly   -- finite sums  p(x) cos(m x) + q(x) sin(m x)  with NPoly
                coefficient polynomials p, q.  Houses the eigenfunction
                corrections.

Everything here is exact: no floats enter until an eval method is called.
The definite integrals over [-pi/2, pi/2] are done by recursive integration
by parts, so quantities like  int x^2 cos^2 x = pi^3/24 - pi/4  come out as
exact PiLaurent values.

solve_resonant solves  y'' + mode^2 y = rhs  in trig-polynomials with the
Dirichlet and normalization conventions the series engine needs; the
Fredholm condition <rhs, base mode> = 0 is checked exactly first.
"""

from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, GapModelError, SolvabilityError


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class PiLaurent:
    """An exact number sum_e coeff[e] * pi^e (finitely many integer e)."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for e, v in coeffs.items():
                v = _as_fraction(v) if not isinstance(v, Fraction) else v
                if v != 0:
                    c[int(e)] = v
        self.c = c

    @classmethod
    def from_rational(cls, q):
        return cls({0: _as_fraction(q)})

    @classmethod
    def pi_power(cls, e, coeff=1):
        return cls({e: _as_fraction(coeff)})

    def is_zero(self):
        return not self.c

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        other = _pl(other)
        if other is NotImplemented:
            return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def __add__(self, other):
        other = _pl(other)
        if other is NotImplemented:
            return NotImplemented
        c = dict(self.c)
        for e, v in other.c.items():
            w = c.get(e, Fraction(0)) + v
            if w:
                c[e] = w
            else:
                c.pop(e, None)
        out = PiLaurent.__new__(PiLaurent)
        out.c = c
        return out

    __radd__ = __add__

    def __neg__(self):
        out = PiLaurent.__new__(PiLaurent)
        out.c = {e: -v for e, v in self.c.items()}
        return out

    def __sub__(self, other):
        other = _pl(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _pl(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = _as_fraction(other)
            if q == 0:
                return PiLaurent()
            out = PiLaurent.__new__(PiLaurent)
            out.c = {e: v * q for e, v in self.c.items()}
            return out
        if isinstance(other, PiLaurent):
            c = {}
            for e1, v1 in self.c.items():
                for e2, v2 in other.c.items():
                    e = e1 + e2
                    w = c.get(e, Fraction(0)) + v1 * v2
                    if w:
                        c[e] = w
                    else:
                        c.pop(e, None)
            out = PiLaurent.__new__(PiLaurent)
            out.c = c
            return out
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = _as_fraction(other)
            if q == 0:
                raise ZeroDivisionError("division by zero rational")
            return self * (1 / q)
        if isinstance(other, PiLaurent) and len(other.c) == 1:
            # division by a pure monomial q*pi^e is exact
            (e, v), = other.c.items()
            out = PiLaurent.__new__(PiLaurent)
            out.c = {ee - e: vv / v for ee, vv in self.c.items()}
            return out
        raise TypeError("PiLaurent division only by rationals or pi-monomials")

    def evalf(self):
        import math

        return float(sum(float(v) * math.pi**e for e, v in self.c.items()))

    def eval_mp(self, mp):
        """Evaluate with an mpmath context (arbitrary precision)."""
        total = mp.mpf(0)
        for e, v in self.c.items():
            total += mp.mpf(v.numerator) / mp.mpf(v.denominator) * mp.pi**e
        return total

    def to_json(self):
        return {str(e): [v.numerator, v.denominator] for e, v in sorted(self.c.items())}

    def __repr__(self):
        if not self.c:
            return "0"
        parts = []
        for e in sorted(self.c, reverse=True):
            v = self.c[e]
            if e == 0:
                parts.append(f"{v}")
            elif e == 1:
                parts.append(f"{v}*pi")
            else:
                parts.append(f"{v}*pi^{e}")
        return " + ".join(parts).replace("+ -", "- ")


def _pl(x):
    if isinstance(x, PiLaurent):
        return x
    if isinstance(x, (int, Fraction)):
        return PiLaurent.from_rational(x)
    return NotImplemented


PI = PiLaurent.pi_power(1)
HALF_PI = PiLaurent.pi_power(1, Fraction(1, 2))


class NPoly:
    """A polynomial in the dimension symbol n with PiLaurent coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for d, v in coeffs.items():
                v = _pl(v)
                if v is NotImplemented:
                    raise TypeError("NPoly coefficients must be PiLaurent or rational")
                if v:
                    c[int(d)] = v
        self.c = c

    @classmethod
    def from_scalar(cls, v):
        return cls({0: v})

    @classmethod
    def n_symbol(cls):
        return cls({1: 1})

    def is_zero(self):
        return not self.c

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        other = _np(other)
        if other is NotImplemented:
            return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash(frozenset((d, hash(v)) for d, v in self.c.items()))

    def __add__(self, other):
        other = _np(other)
        if other is NotImplemented:
            return NotImplemented
        c = dict(self.c)
        for d, v in other.c.items():
            w = c.get(d, PiLaurent()) + v
            if w:
                c[d] = w
            else:
                c.pop(d, None)
        out = NPoly.__new__(NPoly)
        out.c = c
        return out

    __radd__ = __add__

    def __neg__(self):
        out = NPoly.__new__(NPoly)
        out.c = {d: -v for d, v in self.c.items()}
        return out

    def __sub__(self, other):
        other = _np(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _np(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PiLaurent)):
            f = _pl(other)
            if not f:
                return NPoly()
            out = NPoly.__new__(NPoly)
            out.c = {d: v * f for d, v in self.c.items()}
            return out
        if isinstance(other, NPoly):
            c = {}
            for d1, v1 in self.c.items():
                for d2, v2 in other.c.items():
                    d = d1 + d2
                    w = c.get(d, PiLaurent()) + v1 * v2
                    if w:
                        c[d] = w
                    else:
                        c.pop(d, None)
            out = NPoly.__new__(NPoly)
            out.c = c
            return out
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / _as_fraction(other))
        raise TypeError("NPoly division only by rationals")

    def degree(self):
        return max(self.c) if self.c else -1

    def eval_n(self, n):
        """Exact evaluation at an integer n: returns a PiLaurent."""
        total = PiLaurent()
        for d, v in self.c.items():
            total = total + v * (_as_fraction(n) ** d)
        return total

    def evalf(self, n):
        return self.eval_n(n).evalf()

    def eval_mp(self, n, mp):
        return self.eval_n(n).eval_mp(mp)

    def to_json(self):
        return {str(d): v.to_json() for d, v in sorted(self.c.items())}

    def __repr__(self):
        if not self.c:
            return "0"
        parts = []
        for d in sorted(self.c, reverse=True):
            v = repr(self.c[d])
            if d == 0:
                parts.append(f"({v})")
            elif d == 1:
                parts.append(f"({v})*n")
            else:
                parts.append(f"({v})*n^{d}")
        return " + ".join(parts)


def _np(x):
    if isinstance(x, NPoly):
        return x
    if isinstance(x, (int, Fraction, PiLaurent)):
        return NPoly.from_scalar(x)
    return NotImplemented


# (n-1)(n-3) = n^2 - 4n + 3, the coupling polynomial of the perturbation
A_POLY = NPoly({2: 1, 1: -4, 0: 3})
N_MINUS_1 = NPoly({1: 1, 0: -1})


# sin(m pi/2), cos(m pi/2) as exact integers, by m mod 4
_SIN_HALF = (0, 1, 0, -1)
_COS_HALF = (1, 0, -1, 0)


@lru_cache(maxsize=None)
def _int_x_cos(j, m):
    """Exact integral of x^j cos(m x) over [-pi/2, pi/2] (m >= 0)."""
    if j % 2 == 1:
        return PiLaurent()
    if m == 0:
        return PiLaurent({j + 1: Fraction(2, (j + 1) * 2**(j + 1))})
    # by parts: [x^j sin(mx)/m] - (j/m) int x^{j-1} sin(mx)
    out = PiLaurent({j: Fraction(2 * _SIN_HALF[m % 4], m * 2**j)})
    if j > 0:
        out = out - _int_x_sin(j - 1, m) * Fraction(j, m)
    return out


@lru_cache(maxsize=None)
def _int_x_sin(j, m):
    """Exact integral of x^j sin(m x) over [-pi/2, pi/2] (m >= 1)."""
    if j % 2 == 0:
        return PiLaurent()
    # by parts: [-x^j cos(mx)/m] + (j/m) int x^{j-1} cos(mx)
    out = PiLaurent({j: Fraction(-2 * _COS_HALF[m % 4], m * 2**j)})
    out = out + _int_x_cos(j - 1, m) * Fraction(j, m)
    return out


class TrigPoly:
    """sum over (kind, m) of p(x)*cos(mx) or p(x)*sin(mx), p an NPoly-coefficient poly.

    terms: dict keyed by ("cos", m>=0) or ("sin", m>=1), values are lists of
    NPoly (index = power of x), trailing zeros stripped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for key, poly in terms.items():
                self._accumulate(key, poly)

    def _accumulate(self, key, poly):
        kind, m = key
        if kind not in ("cos", "sin") or m < 0:
            raise DomainError(f"bad trig basis {key!r}")
        if kind == "sin" and m == 0:
            return
        coeffs = [_np(p) for p in poly]
        cur = self.terms.get(key)
        if cur is None:
            cur = []
            self.terms[key] = cur
        for j, p in enumerate(coeffs):
            if p is NotImplemented:
                raise TypeError("TrigPoly coefficients must be NPoly-compatible")
            while len(cur) <= j:
                cur.append(NPoly())
            cur[j] = cur[j] + p
        self._trim(key)

    def _trim(self, key):
        cur = self.terms.get(key)
        if cur is None:
            return
        while cur and cur[-1].is_zero():
            cur.pop()
        if not cur:
            del self.terms[key]

    @classmethod
    def basis(cls, kind, m, coeff=1):
        return cls({(kind, m): [coeff]})

    @classmethod
    def zero(cls):
        return cls()

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return (self - other).is_zero()

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        out = TrigPoly()
        for key, poly in self.terms.items():
            out._accumulate(key, poly)
        for key, poly in other.terms.items():
            out._accumulate(key, poly)
        return out

    def __neg__(self):
        out = TrigPoly()
        for key, poly in self.terms.items():
            out.terms[key] = [-p for p in poly]
        return out

    def __sub__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, f):
        """Multiply by an NPoly / PiLaurent / rational scalar."""
        f = _np(f)
        out = TrigPoly()
        if f.is_zero():
            return out
        for key, poly in self.terms.items():
            newpoly = [p * f for p in poly]
            out._accumulate(key, newpoly)
        return out

    def mul_xpow(self, j):
        """Multiply by x^j."""
        out = TrigPoly()
        for key, poly in self.terms.items():
            out.terms[key] = [NPoly()] * j + list(poly)
        return out

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        out = TrigPoly()
        half = Fraction(1, 2)
        for (k1, m1), p1 in self.terms.items():
            for (k2, m2), p2 in other.terms.items():
                # polynomial product
                prod = [NPoly() for _ in range(len(p1) + len(p2) - 1)]
                for i, a in enumerate(p1):
                    if a.is_zero():
                        continue
                    for j, b in enumerate(p2):
                        prod[i + j] = prod[i + j] + a * b
                pieces = _product_to_sum(k1, m1, k2, m2)
                for kind, m, sign in pieces:
                    scaled = [p * (half * sign) for p in prod]
                    out._accumulate((kind, m), scaled)
        return out

    def derivative(self):
        out = TrigPoly()
        for (kind, m), poly in self.terms.items():
            dpoly = [poly[j] * j for j in range(1, len(poly))]
            if dpoly:
                out._accumulate((kind, m), dpoly)
            if m > 0:
                swapped = [p * m for p in poly]
                if kind == "cos":
                    out._accumulate(("sin", m), [-p for p in swapped])
                else:
                    out._accumulate(("cos", m), swapped)
        return out

    def integrate(self):
        """Exact definite integral over [-pi/2, pi/2]; returns an NPoly."""
        total = NPoly()
        for (kind, m), poly in self.terms.items():
            base = _int_x_cos if kind == "cos" else _int_x_sin
            for j, p in enumerate(poly):
                if p.is_zero():
                    continue
                val = base(j, m)
                if val:
                    total = total + p * val
        return total

    def eval_at_half_pi(self):
        """Exact value at x = pi/2; returns an NPoly."""
        total = NPoly()
        for (kind, m), poly in self.terms.items():
            tv = _SIN_HALF[m % 4] if kind == "sin" else _COS_HALF[m % 4]
            if tv == 0:
                continue
            for j, p in enumerate(poly):
                if p.is_zero():
                    continue
                total = total + p * PiLaurent({j: Fraction(tv, 2**j)})
        return total

    def parity(self):
        """"even", "odd", or None if mixed."""
        seen = set()
        for (kind, m), poly in self.terms.items():
            for j, p in enumerate(poly):
                if p.is_zero():
                    continue
                if kind == "cos":
                    seen.add("even" if j % 2 == 0 else "odd")
                else:
                    seen.add("even" if j % 2 == 1 else "odd")
        if len(seen) == 1:
            return seen.pop()
        return None

    def evalf(self, x, n):
        """Float evaluation at point x and integer dimension n."""
        import math

        total = 0.0
        for (kind, m), poly in self.terms.items():
            pv = 0.0
            for j in reversed(range(len(poly))):
                pv = pv * x + poly[j].evalf(n)
            trig = math.cos(m * x) if kind == "cos" else math.sin(m * x)
            total += pv * trig
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (kind, m) in sorted(self.terms):
            poly = self.terms[(kind, m)]
            ps = " + ".join(
                f"({p!r})" + ("" if j == 0 else f"*x^{j}" if j > 1 else "*x")
                for j, p in enumerate(poly)
                if not p.is_zero()
            )
            arg = "" if m == 1 else f"{m}*"
            bits.append(f"[{ps}]*{kind}({arg}x)")
        return " + ".join(bits)


def _product_to_sum(k1, m1, k2, m2):
    """Expand trig(m1 x)*trig(m2 x) as half-sum pieces: list of (kind, m, sign)."""
    out = []
    if k1 == "cos" and k2 == "cos":
        out.append(("cos", m1 + m2, 1))
        out.append(("cos", abs(m1 - m2), 1))
    elif k1 == "sin" and k2 == "sin":
        out.append(("cos", abs(m1 - m2), 1))
        out.append(("cos", m1 + m2, -1))
    else:
        # one sin, one cos; normalize so the sin carries ms
        ms, mc = (m1, m2) if k1 == "sin" else (m2, m1)
        out.append(("sin", ms + mc, 1))
        d = ms - mc
        if d > 0:
            out.append(("sin", d, 1))
        elif d < 0:
            out.append(("sin", -d, -1))
    return [(k, m, s) for (k, m, s) in out if not (k == "sin" and m == 0)]


def trig_integrate(t):
    """Exact integral of a TrigPoly over [-pi/2, pi/2] (public name)."""
    return t.integrate()


def solve_resonant(rhs, mode, parity):
    """Solve y'' + mode^2 y = rhs in trig-polynomials.

    Requirements enforced exactly: <rhs, base mode> = 0 (else SolvabilityError),
    the stated parity, Dirichlet y(+-pi/2) = 0, and the normalization that the
    degree-0 coefficient on the base-mode pair is zero.
    """
    if parity not in ("even", "odd"):
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")
    base_kind = "cos" if parity == "even" else "sin"
    base = TrigPoly.basis(base_kind, mode)
    proj = trig_integrate(rhs * base)
    if not proj.is_zero():
        raise SolvabilityError(
            f"resonant forcing: <rhs, {base_kind}({mode}x)> = {proj!r} != 0"
        )
    if not rhs.is_zero() and rhs.parity() != parity:
        raise DomainError(f"rhs parity {rhs.parity()!r} does not match {parity!r}")

    y = TrigPoly()
    for m in sorted({m for (_, m) in rhs.terms}):
        p = list(rhs.terms.get(("cos", m), []))
        s = list(rhs.terms.get(("sin", m), []))
        d = max(len(p), len(s)) - 1
        p += [NPoly()] * (d + 1 - len(p))
        s += [NPoly()] * (d + 1 - len(s))
        if m != mode:
            u, v = _solve_offresonant(p, s, d, m, mode)
        else:
            u, v = _solve_onresonant(p, s, d, m)
        if any(not q.is_zero() for q in u):
            y._accumulate(("cos", m), u)
        if any(not q.is_zero() for q in v):
            y._accumulate(("sin", m), v)

    # exact verification: the construction is triangular, so check everything
    residual = y.derivative().derivative() + y.scale(mode * mode) - rhs
    if not residual.is_zero():
        raise GapModelError("internal: solve_resonant residual not identically zero")
    if not y.eval_at_half_pi().is_zero():
        raise GapModelError("internal: solve_resonant violates the Dirichlet condition")
    if not y.is_zero() and y.parity() != parity:
        raise GapModelError("internal: solve_resonant parity drift")
    return y


def _solve_offresonant(p, s, d, m, mode):
    """Coefficients for frequency m != mode, solving top degree down."""
    w = mode * mode - m * m
    u = [NPoly() for _ in range(d + 1)]
    v = [NPoly() for _ in range(d + 1)]
    for j in range(d, -1, -1):
        pc = p[j]
        sc = s[j]
        if j + 1 <= d:
            pc = pc - v[j + 1] * (2 * m * (j + 1))
            sc = sc + u[j + 1] * (2 * m * (j + 1))
        if j + 2 <= d:
            pc = pc - u[j + 2] * ((j + 2) * (j + 1))
            sc = sc - v[j + 2] * ((j + 2) * (j + 1))
        u[j] = pc * Fraction(1, w)
        v[j] = sc * Fraction(1, w)
    return u, v


def _solve_onresonant(p, s, d, m):
    """Coefficients for the resonant frequency m == mode (degree raises by one).

    The degree-0 unknowns are the homogeneous pair; the normalization pins
    both to zero (no constant cos(mode x) / sin(mode x) contribution).
    """
    u = [NPoly() for _ in range(d + 2)]
    v = [NPoly() for _ in range(d + 2)]
    for j in range(d, -1, -1):
        pc = p[j]
        sc = s[j]
        if j + 2 <= d + 1:
            pc = pc - u[j + 2] * ((j + 2) * (j + 1))
            sc = sc - v[j + 2] * ((j + 2) * (j + 1))
        v[j + 1] = pc * Fraction(1, 2 * m * (j + 1))
        u[j + 1] = sc * Fraction(-1, 2 * m * (j + 1))
    return u, v


@lru_cache(maxsize=None)
def sec2_coeffs(M):
    """Exact rationals a_0..a_M with sec^2(x) = sum a_m x^{2m}.

    Computed by exact reciprocal of the cos^2 power series
    (cos^2 = (1 + cos 2x)/2, coefficient of x^{2j} is (-1)^j 4^j / (2 (2j)!)
    for j >= 1).
    """
    if M < 0:
        raise DomainError("order must be >= 0")
    cos2 = [Fraction(1)]
    fact = 1
    for j in range(1, M + 1):
        fact *= (2 * j) * (2 * j - 1)
        cos2.append(Fraction((-1) ** j * 4**j, 2 * fact))
    a = [Fraction(1)]
    for m in range(1, M + 1):
        acc = Fraction(0)
        for i in range(m):
            acc += a[i] * cos2[m - i]
        a.append(-acc)
    return tuple(a)

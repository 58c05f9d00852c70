"""Exact symbolic calculus for radially weighted polynomial spinors.

Terms have the shape

    c * x^alpha * |x|^k * ln(|x|)^p * (x.)^i * E_s

with c a Gaussian rational, alpha a monomial multi-index, k a rational radial
power, p in {0, 1} a log power, i in {0, 1} marking an outer Clifford factor
x., and E_s a standard fiber basis vector.  The flat Dirac operator
D = sum_j gamma_j d_j maps this class to itself, lowering the homogeneity
degree m + k + i by one, and admits exact preimages on the graded pieces used
here.  Everything below is exact: no floats enter any coefficient.

Grading convention: the space labelled (k, m, i) with k != 0 is spanned by the
log-free generators x^alpha |x|^k (x.)^i E_s with |alpha| = m, while the label
k = 0 covers the logarithmic spans (x^alpha ln|x| E_s for i = 0, and
x^alpha {1, ln|x|} x.E_s jointly for i = 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .clifford import FIBER_DIM, GAMMA_EXACT


class PreimageError(ValueError):
    """Raised when a term has no preimage inside the tracked closure."""


@dataclass(frozen=True)
class RationalComplex:
    """Gaussian rational a + b*i with exact Fraction parts."""

    re: Fraction
    im: Fraction

    @staticmethod
    def of(value) -> "RationalComplex":
        if isinstance(value, RationalComplex):
            return value
        if isinstance(value, complex):
            # Only exact small literals (e.g. 1j) are legitimate inputs here.
            re, im = Fraction(value.real), Fraction(value.imag)
            return RationalComplex(re, im)
        return RationalComplex(Fraction(value), Fraction(0))

    @staticmethod
    def _coerce(value):
        try:
            return RationalComplex.of(value)
        except (TypeError, ValueError):
            return None

    def __add__(self, other):
        other = RationalComplex._coerce(other)
        if other is None:
            return NotImplemented
        return RationalComplex(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        other = RationalComplex._coerce(other)
        if other is None:
            return NotImplemented
        return RationalComplex(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __mul__(self, other):
        other = RationalComplex._coerce(other)
        if other is None:
            return NotImplemented
        return RationalComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalComplex.of(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return RationalComplex(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"({self.re}+{self.im}i)"


ZERO_C = RationalComplex(Fraction(0), Fraction(0))
ONE_C = RationalComplex(Fraction(1), Fraction(0))


def _gamma_column(n: int, j: int, s: int):
    """Exact column of gamma_j: pairs (t, entry) with entry = (gamma_j)_{t,s} != 0."""
    out = []
    for t in range(FIBER_DIM):
        re, im = GAMMA_EXACT[n][j][t][s]
        if re or im:
            out.append((t, RationalComplex(Fraction(re), Fraction(im))))
    return out


# Term key: (mono, k, p, vec, spin); mono is an exponent tuple of length n.
def _term_key(mono, k, p, vec, spin):
    return (tuple(int(a) for a in mono), Fraction(k), int(p), int(vec), int(spin))


class RadialSpinor:
    """Finite exact sum of radial terms over a fixed ambient dimension."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        if n not in (2, 3):
            raise ValueError(f"ambient dimension must be 2 or 3, got {n}")
        self.n = n
        self.terms = {}
        if terms:
            for key, coeff in terms.items():
                self._accumulate(key, coeff)

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "RadialSpinor":
        return cls(n)

    @classmethod
    def term(cls, n, coeff, mono, k, log_power=0, vector=0, spin=0) -> "RadialSpinor":
        """Single term c * x^mono * |x|^k * ln^p * (x.)^i * E_spin."""
        mono = tuple(int(a) for a in mono)
        if len(mono) != n or any(a < 0 for a in mono):
            raise ValueError(f"monomial {mono} invalid for dimension {n}")
        if log_power not in (0, 1):
            raise ValueError("log powers beyond 1 are never needed; refusing to build one")
        if vector not in (0, 1):
            raise ValueError("vector flag must be 0 or 1")
        if not 0 <= spin < FIBER_DIM:
            raise ValueError(f"spin index out of range: {spin}")
        out = cls(n)
        out._accumulate(_term_key(mono, k, log_power, vector, spin), RationalComplex.of(coeff))
        return out

    def _accumulate(self, key, coeff):
        if key[2] not in (0, 1):
            raise AssertionError("log power left the {0,1} closure")
        cur = self.terms.get(key, ZERO_C) + coeff
        if cur.is_zero():
            self.terms.pop(key, None)
        else:
            self.terms[key] = cur

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "RadialSpinor") -> "RadialSpinor":
        if not isinstance(other, RadialSpinor) or other.n != self.n:
            return NotImplemented
        out = RadialSpinor(self.n, self.terms)
        for key, coeff in other.terms.items():
            out._accumulate(key, coeff)
        return out

    def __sub__(self, other: "RadialSpinor") -> "RadialSpinor":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "RadialSpinor":
        c = RationalComplex.of(scalar)
        out = RadialSpinor(self.n)
        if c.is_zero():
            return out
        for key, coeff in self.terms.items():
            out.terms[key] = coeff * c
        return out

    __mul__ = __rmul__

    def __neg__(self) -> "RadialSpinor":
        return (-1) * self

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RadialSpinor)
            and self.n == other.n
            and self.terms == other.terms
        )

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    # -- structure ---------------------------------------------------------

    def homogeneity_degree(self):
        """Common degree m + k + i of all terms, or None if mixed (log counts 0)."""
        degs = {sum(key[0]) + key[1] + key[3] for key in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def cells(self):
        """Set of graded labels (k, m, i) occupied by the terms.

        Logarithmic terms must sit at radial power zero; they share the k = 0
        label with the log-free |x|^0 terms of the same (m, i).
        """
        out = set()
        for (mono, k, p, vec, _spin) in self.terms:
            if p == 1 and k != 0:
                raise AssertionError(f"log term at radial power {k} is outside every cell")
            out.add((k, sum(mono), vec))
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return f"RadialSpinor(n={self.n}, 0)"
        bits = []
        for (mono, k, p, vec, spin), coeff in sorted(self.terms.items()):
            piece = [repr(coeff)]
            for axis, a in enumerate(mono):
                if a:
                    piece.append(f"x{axis + 1}" + (f"^{a}" if a > 1 else ""))
            if k:
                piece.append(f"|x|^{k}")
            if p:
                piece.append("ln|x|")
            if vec:
                piece.append("x.")
            piece.append(f"E{spin}")
            bits.append(" ".join(piece))
        return f"RadialSpinor(n={self.n}, " + " + ".join(bits) + ")"


# -- differential operators ----------------------------------------------


def partial_derivative(s: RadialSpinor, axis: int) -> RadialSpinor:
    """Exact coordinate partial d_axis applied to a radial spinor."""
    n = s.n
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range for dimension {n}")
    out = RadialSpinor(n)
    for (mono, k, p, vec, spin), c in s.terms.items():
        a = mono[axis]
        if a:
            lowered = tuple(m - (j == axis) for j, m in enumerate(mono))
            out._accumulate(_term_key(lowered, k, p, vec, spin), c * a)
        raised = tuple(m + (j == axis) for j, m in enumerate(mono))
        if k != 0:
            out._accumulate(_term_key(raised, k - 2, p, vec, spin), c * k)
        if p:
            out._accumulate(_term_key(raised, k - 2, p - 1, vec, spin), c * p)
        if vec:
            # d_axis (x . E_s) = gamma_axis E_s
            for t, w in _gamma_column(n, axis, spin):
                out._accumulate(_term_key(mono, k, p, 0, t), c * w)
    return out


def dirac_symbolic(s: RadialSpinor) -> RadialSpinor:
    """Flat Dirac operator D = sum_j gamma_j d_j, exactly.

    Closed term rules (f = x^alpha |x|^k ln^p, m = |alpha|):

      D(f E_s)    =  sum_j alpha_j x^(alpha-e_j) |x|^k ln^p (gamma_j E_s)
                   + k f' x.E_s + p f'' x.E_s
      D(f x.E_s)  = -(2m + n + k) f E_s - p (f with ln lowered) E_s
                   - sum_j alpha_j x^(alpha-e_j) |x|^k ln^p x.(gamma_j E_s)

    where f' lowers |x|^k to |x|^(k-2) and f'' additionally lowers the log.
    """
    n = s.n
    out = RadialSpinor(n)
    for (mono, k, p, vec, spin), c in s.terms.items():
        m = sum(mono)
        if vec == 0:
            for j, a in enumerate(mono):
                if a:
                    lowered = tuple(mm - (jj == j) for jj, mm in enumerate(mono))
                    for t, w in _gamma_column(n, j, spin):
                        out._accumulate(_term_key(lowered, k, p, 0, t), c * a * w)
            if k != 0:
                out._accumulate(_term_key(mono, k - 2, p, 1, spin), c * k)
            if p:
                out._accumulate(_term_key(mono, k - 2, p - 1, 1, spin), c * p)
        else:
            out._accumulate(_term_key(mono, k, p, 0, spin), c * (-(2 * m + n + k)))
            if p:
                out._accumulate(_term_key(mono, k, p - 1, 0, spin), c * (-p))
            for j, a in enumerate(mono):
                if a:
                    lowered = tuple(mm - (jj == j) for jj, mm in enumerate(mono))
                    for t, w in _gamma_column(n, j, spin):
                        out._accumulate(_term_key(lowered, k, p, 1, t), c * (-a) * w)
    return out


def _preimage_term(n, key, coeff, out: RadialSpinor):
    """Accumulate into `out` an exact D-preimage of the single term (key, coeff).

    Recursion follows the degree bookkeeping of the graded pieces: each step
    either strictly lowers the monomial degree m or strictly lowers the log
    power, so it terminates.  Raises PreimageError where no preimage exists in
    the tracked closure (structural constant zero, or a log power that would
    leave {0, 1}).
    """
    mono, k, p, vec, spin = key
    m = sum(mono)
    if vec == 0:
        denom = 2 * m + n + k
        if denom == 0:
            raise PreimageError(
                f"structural constant 2m+n+k vanishes at (k={k}, m={m}, i=0)"
            )
        lead = coeff / denom
        out._accumulate(_term_key(mono, k, p, 1, spin), -lead)
        # D(-lead * x^a |x|^k ln^p x.E_s) reproduces the target plus:
        #   + lead * p * x^a |x|^k ln^(p-1) E_s
        #   + lead * sum_j a_j x^(a-e_j) |x|^k ln^p x.(gamma_j E_s)
        if p:
            _preimage_term(n, _term_key(mono, k, p - 1, 0, spin), -lead * p, out)
        for j, a in enumerate(mono):
            if a:
                lowered = tuple(mm - (jj == j) for jj, mm in enumerate(mono))
                for t, w in _gamma_column(n, j, spin):
                    _preimage_term(n, _term_key(lowered, k, p, 1, t), -lead * a * w, out)
        return
    # vec == 1
    if k == -2:
        if p:
            raise PreimageError(
                "preimage of a log term at radial power -2 needs ln^2; outside closure"
            )
        out._accumulate(_term_key(mono, 0, 1, 0, spin), coeff)
        # D(c x^a ln|x| E_s) = target + c sum_j a_j x^(a-e_j) ln (gamma_j E_s)
        for j, a in enumerate(mono):
            if a:
                lowered = tuple(mm - (jj == j) for jj, mm in enumerate(mono))
                for t, w in _gamma_column(n, j, spin):
                    _preimage_term(n, _term_key(lowered, 0, 1, 0, t), -coeff * a * w, out)
        return
    q = k + 2
    lead = coeff / q
    out._accumulate(_term_key(mono, q, p, 0, spin), lead)
    # D(lead x^a |x|^q ln^p E_s) = target + lead p x^a |x|^k ln^(p-1) x.E_s
    #   + lead sum_j a_j x^(a-e_j) |x|^q ln^p (gamma_j E_s)
    if p:
        _preimage_term(n, _term_key(mono, k, p - 1, 1, spin), -lead * p, out)
    for j, a in enumerate(mono):
        if a:
            lowered = tuple(mm - (jj == j) for jj, mm in enumerate(mono))
            for t, w in _gamma_column(n, j, spin):
                _preimage_term(n, _term_key(lowered, q, p, 0, t), -lead * a * w, out)


def dirac_preimage(s: RadialSpinor):
    """Exact right inverse of the flat Dirac operator on the tracked classes.

    Returns (pre, remainder) with dirac_symbolic(pre) + remainder == s exactly;
    for every input inside the graded ranges handled here the remainder is
    zero.  Inputs outside the closure raise PreimageError.
    """
    out = RadialSpinor(s.n)
    for key, coeff in s.terms.items():
        _preimage_term(s.n, key, coeff, out)
    remainder = s - dirac_symbolic(out)
    return out, remainder


def laplacian_symbolic(s: RadialSpinor) -> RadialSpinor:
    """Componentwise flat Laplacian sum_j d_j d_j."""
    out = RadialSpinor(s.n)
    for j in range(s.n):
        out = out + partial_derivative(partial_derivative(s, j), j)
    return out


def _r2_power_expansion(n: int, mono, t: int):
    """Monomial expansion of x^mono * (x_1^2 + ... + x_n^2)^t, t >= 0."""
    out = {tuple(mono): Fraction(1)}
    for _ in range(t):
        nxt = {}
        for mo, c in out.items():
            for j in range(n):
                m2 = tuple(a + 2 * (i == j) for i, a in enumerate(mo))
                nxt[m2] = nxt.get(m2, Fraction(0)) + c
        out = nxt
    return out


def radial_normal_form(s: RadialSpinor) -> RadialSpinor:
    """Canonical representative modulo the term-class redundancies.

    Term-dict equality is finer than equality of functions, in two ways: the
    outer Clifford factor expands as x.E_s = sum_j x_j (gamma_j E_s), and
    radial weight can sit either in |x|^2 or in an explicit sum of squares.
    Both are eliminated here: every vec = 1 term is expanded through the
    gamma entries, then each family of terms sharing (log power, spin,
    homogeneity, k mod 2) is rewritten at the family's lowest radial power
    by expanding the excess |x|^(2t).  A spinor is zero as a function away
    from the origin iff its normal form has no terms.
    """
    families = {}
    for (mono, k, p, vec, spin), c in s.terms.items():
        if vec:
            for j in range(s.n):
                raised = tuple(a + (i == j) for i, a in enumerate(mono))
                for t, w in _gamma_column(s.n, j, spin):
                    key = (p, t, sum(raised) + k, k % 2)
                    families.setdefault(key, []).append((raised, k, c * w))
        else:
            key = (p, spin, sum(mono) + k, k % 2)
            families.setdefault(key, []).append((mono, k, c))
    out = RadialSpinor(s.n)
    for (p, spin, _h, _parity), terms in families.items():
        k_min = min(k for _mono, k, _c in terms)
        for mono, k, c in terms:
            t = int((k - k_min) / 2)
            for m2, w in _r2_power_expansion(s.n, mono, t).items():
                out._accumulate(_term_key(m2, k_min, p, 0, spin), c * w)
    return out


def second_order_check(s: RadialSpinor, lam) -> RadialSpinor:
    """(D - lam)(D + lam)s + Laplacian(s) + lam^2 s; identically zero.

    lam must be exact (int, Fraction, or RationalComplex).  The returned
    spinor is the normal form of the symbolic residual (the raw difference
    only cancels modulo |x|^2 = sum x_j^2), which callers assert to be zero.
    """
    lam = RationalComplex.of(lam)
    step = dirac_symbolic(s) + lam * s
    residual = dirac_symbolic(step) - lam * step
    return radial_normal_form(residual + laplacian_symbolic(s) + (lam * lam) * s)


# -- graded generators and the preimage ranges -----------------------------


def space_generators(n: int, k, m: int, vector: int):
    """Exact generators of the graded piece labelled (k, m, i).

    k != 0: x^alpha |x|^k (x.)^i E_s over all degree-m monomials and fiber
    indices.  k == 0: the logarithmic spans, x^alpha ln|x| E_s for i = 0 and
    x^alpha (1 - n ln|x|) x.E_s for i = 1.
    """
    k = Fraction(k)
    gens = []
    for mono in monomials(n, m):
        for spin in range(FIBER_DIM):
            if k != 0:
                gens.append(RadialSpinor.term(n, 1, mono, k, 0, vector, spin))
            elif vector == 0:
                gens.append(RadialSpinor.term(n, 1, mono, 0, 1, 0, spin))
            else:
                gens.append(
                    RadialSpinor.term(n, 1, mono, 0, 0, 1, spin)
                    + RadialSpinor.term(n, -n, mono, 0, 1, 1, spin)
                )
    return gens


def monomials(n: int, m: int):
    """All exponent multi-indices of total degree m in n variables."""
    if n == 1:
        return [(m,)]
    out = []
    for first in range(m, -1, -1):
        for rest in monomials(n - 1, m - first):
            out.append((first,) + rest)
    return out


def preimage_cells(k, m: int, vector: int):
    """Graded labels allowed to appear in a preimage of the (k, m, i) piece."""
    k = Fraction(k)
    cells = set()
    if vector == 0:
        for j in range(1, (m + 1) // 2 + 1):
            cells.add((k + 2 * j, m + 1 - 2 * j, 0))
        for j in range(0, m // 2 + 1):
            cells.add((k + 2 * j, m - 2 * j, 1))
    else:
        for j in range(0, m // 2 + 1):
            cells.add((k + 2 + 2 * j, m - 2 * j, 0))
        for j in range(1, (m + 1) // 2 + 1):
            cells.add((k + 2 * j, m + 1 - 2 * j, 1))
    return cells


def admissible_k_range(n: int, m: int, vector: int):
    """Integer radial powers k for which the (k, m, i) piece is invertible.

    i = 0 requires -n <= k and -n < k + m <= 0; i = 1 requires -n <= k and
    -n < k + m + 1 <= 0.
    """
    shift = m if vector == 0 else m + 1
    lo = max(-n, -n + 1 - shift)
    hi = -shift
    return range(lo, hi + 1)


# -- float evaluation (cross-checks against the numeric layers) ------------


def evaluate(s: RadialSpinor, x):
    """Evaluate a radial spinor at one point (floats; for tests and demos)."""
    import numpy as np

    from .clifford import clifford_mul, make_fiber

    x = np.asarray(x, dtype=float)
    if x.shape != (s.n,):
        raise ValueError(f"point must have shape ({s.n},)")
    r2 = float(x @ x)
    if r2 == 0.0:
        raise ValueError("radial terms are singular at the origin")
    fiber = make_fiber(s.n)
    out = np.zeros(FIBER_DIM, dtype=np.complex128)
    logr = 0.5 * np.log(r2)
    for (mono, k, p, vec, spin), c in s.terms.items():
        scale = complex(c)
        for axis, a in enumerate(mono):
            if a:
                scale *= x[axis] ** a
        scale *= r2 ** (float(k) / 2.0)
        if p:
            scale *= logr**p
        base = np.zeros(FIBER_DIM, dtype=np.complex128)
        base[spin] = 1.0
        if vec:
            base = clifford_mul(fiber, x, base)
        out = out + scale * base
    return out

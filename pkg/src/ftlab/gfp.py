"""Exact arithmetic over F_p: field elements, polynomials, linear codes,
syndrome decoding, and the interpolation functionals used by the
evaluation-code constructions.

Everything here is exact integer arithmetic mod a prime.  Scalars travel
as plain ints in [0, p); the :class:`FieldElement` wrapper exists for the
typed algebra surface and refuses mixed-modulus arithmetic.  Codes are
kept desk-scale on purpose: p <= 13, block length m <= 12, and minimum
distances are *verified* by enumeration at construction, never trusted.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_PRIME = 13
MAX_LENGTH = 12
# Enumeration guard: codes whose codeword count exceeds this are rejected
# rather than silently skipping distance verification.
MAX_ENUMERATION = 2_000_000


class FieldError(ValueError):
    """Raised for invalid field/code arithmetic (bad modulus, 0**-1, ...)."""


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def check_modulus(p: int) -> int:
    if not is_prime(p):
        raise FieldError(f"modulus {p} is not prime")
    if p > MAX_PRIME:
        raise FieldError(f"modulus {p} exceeds the supported bound {MAX_PRIME}")
    return p


@dataclass(frozen=True)
class FieldElement:
    """An element of F_p with exact modular arithmetic."""

    value: int
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise FieldError(
                    f"modulus mismatch: {self.modulus} vs {other.modulus}"
                )
            return other.value
        return int(other) % self.modulus

    def __add__(self, other):
        return FieldElement((self.value + self._coerce(other)) % self.modulus, self.modulus)

    def __sub__(self, other):
        return FieldElement((self.value - self._coerce(other)) % self.modulus, self.modulus)

    def __mul__(self, other):
        return FieldElement((self.value * self._coerce(other)) % self.modulus, self.modulus)

    def __neg__(self):
        return FieldElement(-self.value % self.modulus, self.modulus)

    def inv(self) -> "FieldElement":
        if self.value == 0:
            raise FieldError("zero has no multiplicative inverse")
        return FieldElement(pow(self.value, self.modulus - 2, self.modulus), self.modulus)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v == 0:
            raise FieldError("division by zero")
        return self * FieldElement(v, self.modulus).inv()

    def __pow__(self, e: int):
        return FieldElement(pow(self.value, e, self.modulus), self.modulus)

    def __int__(self):
        return self.value


class PrimeField:
    """Arithmetic context for F_p working on plain ints and numpy arrays."""

    def __init__(self, p: int):
        self.p = check_modulus(p)
        self._inv = [0] + [pow(a, p - 2, p) for a in range(1, p)]

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return self._inv[a]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def element(self, v: int) -> FieldElement:
        return FieldElement(v % self.p, self.p)

    # -- matrix helpers (numpy int64 arrays, entries reduced mod p) --------

    def reduce(self, mat) -> np.ndarray:
        return np.asarray(mat, dtype=np.int64) % self.p

    def rref(self, mat) -> tuple[np.ndarray, list[int]]:
        """Reduced row echelon form; returns (matrix, pivot column list)."""
        m = self.reduce(mat).copy()
        rows, cols = m.shape
        pivots: list[int] = []
        r = 0
        for c in range(cols):
            if r >= rows:
                break
            nz = np.nonzero(m[r:, c])[0]
            if nz.size == 0:
                continue
            pivot = r + int(nz[0])
            m[[r, pivot]] = m[[pivot, r]]
            m[r] = (m[r] * self.inv(int(m[r, c]))) % self.p
            for rr in range(rows):
                if rr != r and m[rr, c]:
                    m[rr] = (m[rr] - m[rr, c] * m[r]) % self.p
            pivots.append(c)
            r += 1
        return m, pivots

    def rank(self, mat) -> int:
        return len(self.rref(mat)[1])

    def nullspace(self, mat) -> np.ndarray:
        """Basis (rows) of the right nullspace of `mat` over F_p."""
        m = self.reduce(mat)
        rows, cols = m.shape
        rr, pivots = self.rref(m)
        free = [c for c in range(cols) if c not in pivots]
        basis = np.zeros((len(free), cols), dtype=np.int64)
        for i, fc in enumerate(free):
            basis[i, fc] = 1
            for r, pc in enumerate(pivots):
                basis[i, pc] = (-rr[r, fc]) % self.p
        return basis % self.p

    def in_rowspace(self, vec, mat) -> bool:
        m = self.reduce(mat)
        v = self.reduce(np.atleast_2d(vec))
        return self.rank(m) == self.rank(np.vstack([m, v]))


@dataclass(frozen=True)
class PolyFp:
    """Polynomial over F_p, coefficients in ascending degree order."""

    coeffs: tuple[int, ...]
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        c = tuple(v % self.modulus for v in self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c if c else (0,))

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial given degree -1."""
        if self.coeffs == (0,):
            return -1
        return len(self.coeffs) - 1

    def eval(self, alpha: int) -> int:
        """Horner evaluation at alpha."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * alpha + c) % self.modulus
        return acc

    def coefficient(self, i: int) -> int:
        return self.coeffs[i] if i < len(self.coeffs) else 0

    def __add__(self, other: "PolyFp") -> "PolyFp":
        if other.modulus != self.modulus:
            raise FieldError("modulus mismatch")
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyFp(
            tuple(self.coefficient(i) + other.coefficient(i) for i in range(n)),
            self.modulus,
        )

    def __mul__(self, other: "PolyFp") -> "PolyFp":
        if other.modulus != self.modulus:
            raise FieldError("modulus mismatch")
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyFp(tuple(out), self.modulus)

    def scale(self, c: int) -> "PolyFp":
        return PolyFp(tuple(v * c for v in self.coeffs), self.modulus)

    @staticmethod
    def from_roots(roots, p: int) -> "PolyFp":
        poly = PolyFp((1,), p)
        for r in roots:
            poly = poly * PolyFp((-r % p, 1), p)
        return poly

    @staticmethod
    def interpolate(points: list[tuple[int, int]], p: int) -> "PolyFp":
        """Unique polynomial of degree < len(points) through the points."""
        field = PrimeField(p)
        acc = PolyFp((0,), p)
        for i, (xi, yi) in enumerate(points):
            basis = PolyFp((1,), p)
            denom = 1
            for j, (xj, _) in enumerate(points):
                if j == i:
                    continue
                basis = basis * PolyFp((-xj % p, 1), p)
                denom = (denom * (xi - xj)) % p
            acc = acc + basis.scale(yi * field.inv(denom))
        return acc


def poly_eval(f: PolyFp, alpha: int) -> int:
    return f.eval(alpha)


def _check_points(alphas, p: int, allow_zero: bool = False) -> list[int]:
    pts = [a % p for a in alphas]
    if len(set(pts)) != len(pts):
        raise FieldError("evaluation points must be distinct")
    if not allow_zero and 0 in pts:
        raise FieldError("evaluation points must be nonzero")
    return pts


def lagrange_at_zero(alphas, p: int) -> list[int]:
    """Weights c_i with f(0) = sum_i c_i f(alpha_i) for all deg(f) <= m-1.

    c_i = prod_{j != i} alpha_j / (alpha_j - alpha_i).
    """
    pts = _check_points(alphas, p)
    field = PrimeField(p)
    weights = []
    for i, ai in enumerate(pts):
        num, den = 1, 1
        for j, aj in enumerate(pts):
            if j == i:
                continue
            num = (num * aj) % p
            den = (den * (aj - ai)) % p
        weights.append(field.div(num, den))
    return weights


def coeff_extract_weights(alphas, p: int, degree_index: int) -> list[int]:
    """Weights e_i with [x^k] f = sum_i e_i f(alpha_i) for all deg(f) <= m-1,
    where k = degree_index.  All weights must be nonzero; a zero weight means
    the evaluation-point set is unusable and is reported as an error.
    """
    pts = _check_points(alphas, p)
    m = len(pts)
    if not 0 <= degree_index < m:
        raise FieldError(f"degree index {degree_index} out of range for m={m}")
    field = PrimeField(p)
    weights = []
    for i, ai in enumerate(pts):
        numerator = PolyFp.from_roots([a for j, a in enumerate(pts) if j != i], p)
        denom = 1
        for j, aj in enumerate(pts):
            if j != i:
                denom = (denom * (ai - aj)) % p
        weights.append(field.mul(numerator.coefficient(degree_index), field.inv(denom)))
    if any(w == 0 for w in weights):
        raise FieldError(
            f"coefficient-extraction weight vanished for points {pts}; "
            "pick a different evaluation-point set"
        )
    return weights


def check_g_coefficient(alphas, p: int, d: int) -> int:
    """Coefficient of x^(2d) in prod_i (x - alpha_i).

    Returns the coefficient (possibly 0); callers reject point sets where
    it vanishes.
    """
    pts = _check_points(alphas, p)
    return PolyFp.from_roots(pts, p).coefficient(2 * d)


@dataclass(frozen=True)
class LinearCode:
    """Linear [m, k, d] code over F_p with verified minimum distance."""

    generator: np.ndarray
    parity_check: np.ndarray
    length: int
    dimension: int
    distance: int
    p: int

    @staticmethod
    def from_generator(rows, p: int) -> "LinearCode":
        field = PrimeField(p)
        g = field.reduce(np.atleast_2d(rows))
        k, m = g.shape
        if m > MAX_LENGTH:
            raise FieldError(f"code length {m} exceeds desk-scale bound {MAX_LENGTH}")
        if field.rank(g) != k:
            raise FieldError("generator rows are dependent")
        h = field.nullspace(g)
        d = LinearCode._min_weight(g, p)
        return LinearCode(g, h, m, k, d, p)

    @staticmethod
    def _min_weight(g: np.ndarray, p: int) -> int:
        k, m = g.shape
        if p**k > MAX_ENUMERATION:
            raise FieldError("code too large for exhaustive distance verification")
        best = m + 1
        for msg in itertools.product(range(p), repeat=k):
            if not any(msg):
                continue
            word = (np.array(msg, dtype=np.int64) @ g) % p
            best = min(best, int(np.count_nonzero(word)))
        return best

    def codewords(self) -> np.ndarray:
        """All p^k codewords, one per row."""
        msgs = np.array(
            list(itertools.product(range(self.p), repeat=self.dimension)),
            dtype=np.int64,
        )
        return (msgs @ self.generator) % self.p

    def syndrome(self, word) -> tuple[int, ...]:
        w = np.asarray(word, dtype=np.int64) % self.p
        return tuple(int(x) for x in (self.parity_check @ w) % self.p)

    def contains(self, word) -> bool:
        return all(s == 0 for s in self.syndrome(word))

    def dual(self) -> "LinearCode":
        return LinearCode.from_generator(self.parity_check, self.p)


@dataclass(frozen=True)
class SyndromeTable:
    """Map syndrome -> (coset leader, overflow flag).

    The leader is a minimum-weight coset representative.  The overflow flag
    marks syndromes whose leader weight exceeds the correction radius
    t = floor((d-1)/2); decoding still returns the leader so that the
    corrected word always lands in the code.
    """

    code: LinearCode
    entries: dict[tuple[int, ...], tuple[tuple[int, ...], bool]]

    @staticmethod
    def build(code: LinearCode) -> "SyndromeTable":
        p, m = code.p, code.length
        n_syndromes = p ** (m - code.dimension)
        if n_syndromes > MAX_ENUMERATION:
            raise FieldError("syndrome space too large for exhaustive table")
        radius = (code.distance - 1) // 2
        entries: dict[tuple[int, ...], tuple[tuple[int, ...], bool]] = {}
        for weight in range(m + 1):
            if len(entries) == n_syndromes:
                break
            for support in itertools.combinations(range(m), weight):
                for values in itertools.product(range(1, p), repeat=weight):
                    e = [0] * m
                    for pos, val in zip(support, values):
                        e[pos] = val
                    s = code.syndrome(e)
                    if s not in entries:
                        entries[s] = (tuple(e), weight > radius)
            # all weight-`weight` errors scanned before moving outward, so
            # every stored leader has minimum weight in its coset
        return SyndromeTable(code, entries)

    def lookup(self, syndrome: tuple[int, ...]) -> tuple[tuple[int, ...], bool]:
        return self.entries[tuple(syndrome)]


def syndrome_decode(word, code: LinearCode, table: SyndromeTable):
    """Return (corrected word, error vector, overflow flag)."""
    w = np.asarray(word, dtype=np.int64) % code.p
    if w.shape != (code.length,):
        raise FieldError(f"word length {w.shape} != code length {code.length}")
    e, overflow = table.lookup(code.syndrome(w))
    corrected = (w - np.array(e, dtype=np.int64)) % code.p
    return corrected, np.array(e, dtype=np.int64), overflow


@dataclass(frozen=True)
class ClassicalCodePair:
    """Nested pair C2 < C1 over F_p; the raw material for a CSS code.

    Both C1 and the dual of C2 must reach the design distance `distance`,
    which is what the two-basis quantum correction consumes.
    """

    c1: LinearCode
    c2: LinearCode
    p: int
    distance: int

    @staticmethod
    def build(g1_rows, g2_rows, p: int) -> "ClassicalCodePair":
        field = PrimeField(p)
        c1 = LinearCode.from_generator(g1_rows, p)
        c2 = LinearCode.from_generator(g2_rows, p)
        if c1.length != c2.length:
            raise FieldError("codes in a pair must share a length")
        for row in c2.generator:
            if not field.in_rowspace(row, c1.generator):
                raise FieldError("C2 is not a subcode of C1")
        if c2.dimension >= c1.dimension:
            raise FieldError("C2 must be a proper subcode of C1")
        d = min(c1.distance, c2.dual().distance)
        return ClassicalCodePair(c1, c2, p, d)

    @property
    def length(self) -> int:
        return self.c1.length

    def logical_dimension(self) -> int:
        return self.p ** (self.c1.dimension - self.c2.dimension)


# -- serialization -----------------------------------------------------------


def code_pair_to_json(pair: ClassicalCodePair, alphas=None) -> str:
    doc = {
        "p": pair.p,
        "m": pair.length,
        "k": pair.c1.dimension,
        "d": pair.distance,
        "G1": [[int(x) for x in row] for row in pair.c1.generator],
        "G2": [[int(x) for x in row] for row in pair.c2.generator],
    }
    if alphas is not None:
        doc["alphas"] = [int(a) for a in alphas]
    return json.dumps(doc, indent=2, sort_keys=True)


def code_pair_from_json(text: str) -> tuple[ClassicalCodePair, list[int] | None]:
    doc = json.loads(text)
    pair = ClassicalCodePair.build(doc["G1"], doc["G2"], doc["p"])
    if pair.length != doc["m"] or pair.c1.dimension != doc["k"]:
        raise FieldError("stored dimensions disagree with the matrices")
    if pair.distance != doc["d"]:
        raise FieldError(
            f"declared distance {doc['d']} but verified {pair.distance}"
        )
    return pair, doc.get("alphas")

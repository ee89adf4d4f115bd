# src/finite_field.py
# --------------------------------------------
# GF(2^C) arithmetic for payload symbols and the coefficient triplets used by
# the star-type codecs. The field is built by galois over the lexicographically
# smallest primitive polynomial of degree C; symbols travel as plain ints and
# the hot path uses exp/log tables read out of galois once per field size.

from dataclasses import dataclass
from functools import lru_cache

import galois
import numpy as np

from src.errors import ArgumentError, InfeasibleError

TABLE_LIMIT_BITS = 16


@lru_cache(maxsize=None)
def primitive_polynomial(bits: int) -> galois.Poly:
    return galois.primitive_poly(2, bits, method="min")


class GaloisField:
    """GF(2^bits) over a fixed primitive polynomial, operating on int symbols."""

    def __init__(self, bits: int):
        if bits < 1:
            raise ArgumentError(f"field size must be >= 1 bit, got {bits}")
        self.bits = bits
        self.order = 2**bits
        if bits == 1:
            # prime field: galois takes no modulus polynomial here
            self.poly = galois.Poly([1, 1])
            self.GF = galois.GF(2)
        else:
            self.poly = primitive_polynomial(bits)
            self.GF = galois.GF(self.order, irreducible_poly=self.poly)

        self._exp: np.ndarray | None = None
        self._log: np.ndarray | None = None
        if 1 < bits <= TABLE_LIMIT_BITS:
            nonzero = np.arange(1, self.order, dtype=np.int64)
            logs = np.asarray(self.GF(nonzero).log(), dtype=np.int64)
            exp = np.zeros(self.order - 1, dtype=np.int64)
            exp[logs] = nonzero
            log = np.zeros(self.order, dtype=np.int64)
            log[nonzero] = logs
            # doubled so exp[log x + log y] never needs a modulo
            self._exp = np.concatenate([exp, exp]).tolist()
            self._log = log.tolist()

    @property
    def poly_str(self) -> str:
        return str(self.poly)

    def check(self, x: int) -> int:
        if not 0 <= x < self.order:
            raise ArgumentError(f"symbol {x} outside GF(2^{self.bits})")
        return x

    def add(self, x: int, y: int) -> int:
        return x ^ y

    def mul(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        if self._exp is None:
            return int(self.GF(x) * self.GF(y))
        return self._exp[self._log[x] + self._log[y]]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^C)")
        if self._exp is None:
            return int(self.GF(x) ** -1)
        return self._exp[(self.order - 1 - self._log[x]) % (self.order - 1)]

    def div(self, x: int, y: int) -> int:
        return self.mul(x, self.inv(y))

    def dot(self, coeffs, symbols) -> int:
        acc = 0
        for k, w in zip(coeffs, symbols):
            acc ^= self.mul(k, w)
        return acc

    def solve2(self, c11: int, c12: int, c21: int, c22: int, y1: int, y2: int) -> tuple[int, int]:
        """Solve [c11 c12; c21 c22]·[u v]^T = [y1 y2]^T by Cramer's rule."""
        det = self.mul(c11, c22) ^ self.mul(c12, c21)
        if det == 0:
            raise AssertionError("singular 2x2 system; coefficient triplets violate the determinant condition")
        u = self.div(self.mul(y1, c22) ^ self.mul(y2, c12), det)
        v = self.div(self.mul(c11, y2) ^ self.mul(c21, y1), det)
        return u, v

    def random_symbols(self, rng: np.random.Generator, count: int) -> list[int]:
        return [int(v) for v in rng.integers(0, self.order, size=count)]

    def __repr__(self) -> str:
        return f"<GaloisField(bits={self.bits}, poly={self.poly_str!r})>"


@lru_cache(maxsize=None)
def field_for(bits: int) -> GaloisField:
    return GaloisField(bits)


@dataclass(frozen=True)
class FieldElement:
    value: int
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ArgumentError(f"field size must be >= 1 bit, got {self.bits}")
        if not 0 <= self.value < 2**self.bits:
            raise ArgumentError(f"value {self.value} does not fit GF(2^{self.bits})")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return add(self, other)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return mul(self, other)

    def __int__(self) -> int:
        return self.value


def _same_field(x: FieldElement, y: FieldElement) -> int:
    if x.bits != y.bits:
        raise ArgumentError(f"mismatched field sizes: GF(2^{x.bits}) vs GF(2^{y.bits})")
    return x.bits


def add(x: FieldElement, y: FieldElement) -> FieldElement:
    bits = _same_field(x, y)
    return FieldElement(x.value ^ y.value, bits)


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    bits = _same_field(x, y)
    return FieldElement(field_for(bits).mul(x.value, y.value), bits)


@dataclass(frozen=True)
class CoeffTriplets:
    """Coefficient sets a (even phase, k bit 0) and b (odd phase, k bit 1)."""

    a: tuple[int, int, int]
    b: tuple[int, int, int]
    bits: int

    def for_phase(self, phase: int) -> tuple[int, int, int]:
        return self.a if phase == 0 else self.b

    def det(self, i: int, j: int) -> int:
        f = field_for(self.bits)
        return f.mul(self.a[i], self.b[j]) ^ f.mul(self.a[j], self.b[i])


def triplets_valid(a, b, bits: int) -> bool:
    f = field_for(bits)
    if any(k == 0 for k in (*a, *b)):
        return False
    for i, j in ((0, 1), (0, 2), (1, 2)):
        if f.mul(a[i], b[j]) ^ f.mul(a[j], b[i]) == 0:
            return False
    return True


def choose_triplets(bits: int) -> CoeffTriplets:
    if bits < 1:
        raise ArgumentError(f"field size must be >= 1 bit, got {bits}")
    if bits == 1:
        raise InfeasibleError("GF(2) has a single nonzero element; no triplets satisfy the determinant condition")
    a = (1, 1, 1)
    b = (1, 2, 3)
    if not triplets_valid(a, b, bits):
        raise AssertionError(f"default triplets fail the determinant check in GF(2^{bits})")
    return CoeffTriplets(a=a, b=b, bits=bits)

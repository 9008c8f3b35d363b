"""Real Grassmann (exterior) algebra on ``N`` anticommuting generators.

A :class:`GrassmannNumber` is a finite sum of real multiples of basis
monomials ``g_{i1} g_{i2} ... g_{ik}`` with ``i1 < i2 < ... < ik``.  Monomials
are encoded as uint64 bitmasks, so at most 64 generators are supported.
Generators are numbered from 1 in every textual form (``g1``, ``g2``, ...);
bit ``k`` of a mask is generator ``k + 1``.

Values are immutable.  Arithmetic between values with different generator
counts raises :class:`~superteich.errors.GeneratorMismatchError`.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from . import _kernels
from .errors import GeneratorMismatchError, NonInvertibleError, ParityError

MAX_GENERATORS = 64
STORAGE_EPS = 1e-15
DEFAULT_TOL = 1e-9

_EMPTY_M = np.empty(0, dtype=np.uint64)
_EMPTY_C = np.empty(0, dtype=np.float64)


def _mask_of(indices: Iterable[int], n: int) -> tuple[int, int]:
    """Return (mask, sign) for a product of 1-based generator indices in the given order."""
    idx = list(indices)
    for i in idx:
        if not 1 <= i <= n:
            raise ValueError(f"generator index {i} outside 1..{n}")
    if len(set(idx)) != len(idx):
        return 0, 0
    # bubble-count inversions
    inv = sum(1 for p in range(len(idx)) for q in range(p + 1, len(idx)) if idx[p] > idx[q])
    mask = 0
    for i in idx:
        mask |= 1 << (i - 1)
    return mask, (-1 if inv % 2 else 1)


def _indices_of(mask: int) -> tuple[int, ...]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k + 1)
        mask >>= 1
        k += 1
    return tuple(out)


class GrassmannNumber:
    """Element of the real Grassmann algebra on ``n`` generators."""

    __slots__ = ("n", "masks", "coeffs")
    __array_priority__ = 100  # keep numpy scalars from broadcasting over us

    def __init__(self, n: int, terms: Mapping[Iterable[int], float] | None = None):
        if not 0 <= n <= MAX_GENERATORS:
            raise ValueError(f"number of generators must be in 0..{MAX_GENERATORS}, got {n}")
        self.n = n
        if not terms:
            self.masks, self.coeffs = _EMPTY_M, _EMPTY_C
            return
        ms, cs = [], []
        for key, coef in terms.items():
            mask, sign = _mask_of(key, n)
            if sign:
                ms.append(mask)
                cs.append(sign * float(coef))
        self.masks, self.coeffs = _kernels.merge_terms(
            np.array(ms, dtype=np.uint64), np.array(cs, dtype=np.float64), STORAGE_EPS
        )

    @classmethod
    def _raw(cls, n: int, masks: np.ndarray, coeffs: np.ndarray) -> "GrassmannNumber":
        obj = cls.__new__(cls)
        obj.n = n
        obj.masks = masks
        obj.coeffs = coeffs
        return obj

    # -- constructors -------------------------------------------------------

    @classmethod
    def scalar(cls, value: float, n: int) -> "GrassmannNumber":
        value = float(value)
        if abs(value) < STORAGE_EPS:
            return cls._raw(n, _EMPTY_M, _EMPTY_C)
        return cls._raw(n, np.zeros(1, dtype=np.uint64), np.array([value]))

    @classmethod
    def zero(cls, n: int) -> "GrassmannNumber":
        return cls._raw(n, _EMPTY_M, _EMPTY_C)

    @classmethod
    def one(cls, n: int) -> "GrassmannNumber":
        return cls.scalar(1.0, n)

    @classmethod
    def generator(cls, i: int, n: int, coeff: float = 1.0) -> "GrassmannNumber":
        """``coeff * g_i`` (``i`` is 1-based)."""
        if not 1 <= i <= n:
            raise ValueError(f"generator index {i} outside 1..{n}")
        return cls._raw(n, np.array([1 << (i - 1)], dtype=np.uint64), np.array([float(coeff)]))

    @classmethod
    def from_masks(cls, n: int, masks, coeffs) -> "GrassmannNumber":
        m = np.asarray(masks, dtype=np.uint64)
        c = np.asarray(coeffs, dtype=np.float64)
        limit = (1 << n) - 1 if n < 64 else (1 << 64) - 1
        if m.size and int(m.max()) > limit:
            raise ValueError("mask uses a generator beyond n")
        return cls._raw(n, *_kernels.merge_terms(m, c, STORAGE_EPS))

    # -- inspection ---------------------------------------------------------

    @property
    def body(self) -> float:
        if self.masks.size and self.masks[0] == 0:
            return float(self.coeffs[0])
        return 0.0

    @property
    def soul(self) -> "GrassmannNumber":
        if self.masks.size and self.masks[0] == 0:
            return GrassmannNumber._raw(self.n, self.masks[1:], self.coeffs[1:])
        return self

    def terms(self) -> dict[tuple[int, ...], float]:
        """Mapping from ascending 1-based index tuples to coefficients."""
        return {_indices_of(int(m)): float(c) for m, c in zip(self.masks, self.coeffs)}

    def grades(self) -> np.ndarray:
        return np.bitwise_count(self.masks)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def is_even(self) -> bool:
        return bool(np.all(self.grades() % 2 == 0))

    def is_odd(self) -> bool:
        return bool(np.all(self.grades() % 2 == 1))

    def parity(self) -> int | None:
        """0 for even, 1 for odd, None for mixed.  Zero counts as even."""
        if self.is_even():
            return 0
        if self.is_odd():
            return 1
        return None

    def even_part(self) -> "GrassmannNumber":
        keep = self.grades() % 2 == 0
        return GrassmannNumber._raw(self.n, self.masks[keep], self.coeffs[keep])

    def odd_part(self) -> "GrassmannNumber":
        keep = self.grades() % 2 == 1
        return GrassmannNumber._raw(self.n, self.masks[keep], self.coeffs[keep])

    def coefficient(self, *indices: int) -> float:
        mask, sign = _mask_of(indices, self.n)
        if not sign:
            return 0.0
        pos = np.searchsorted(self.masks, np.uint64(mask))
        if pos < self.masks.size and self.masks[pos] == mask:
            return sign * float(self.coeffs[pos])
        return 0.0

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def isclose(self, other, tol: float = DEFAULT_TOL) -> bool:
        return (self - other).max_abs() <= tol

    def with_generators(self, n: int) -> "GrassmannNumber":
        """Embed into (or restrict to, if unused generators are dropped) an algebra with ``n`` generators."""
        if n < self.n and self.masks.size and int(self.masks.max()) >> n:
            raise ValueError("value uses generators beyond the requested count")
        return GrassmannNumber._raw(n, self.masks, self.coeffs)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "GrassmannNumber":
        if isinstance(other, GrassmannNumber):
            if other.n != self.n:
                raise GeneratorMismatchError(f"generator counts differ: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return GrassmannNumber.scalar(float(other), self.n)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.masks.size:
            return self
        if not self.masks.size:
            return other
        m, c = _kernels.merge_terms(
            np.concatenate((self.masks, other.masks)),
            np.concatenate((self.coeffs, other.coeffs)),
            STORAGE_EPS,
        )
        return GrassmannNumber._raw(self.n, m, c)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannNumber._raw(self.n, self.masks, -self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return self.scale(float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        m, c = _kernels.mul_terms(self.masks, self.coeffs, other.masks, other.coeffs, STORAGE_EPS)
        return GrassmannNumber._raw(self.n, m, c)

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return self.scale(float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            if other == 0:
                raise NonInvertibleError("division by zero")
            return self.scale(1.0 / float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            return NotImplemented
        result = GrassmannNumber.one(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, factor: float) -> "GrassmannNumber":
        if factor == 0.0 or not self.coeffs.size:
            return GrassmannNumber.zero(self.n)
        c = self.coeffs * factor
        keep = np.abs(c) >= STORAGE_EPS
        if keep.all():
            return GrassmannNumber._raw(self.n, self.masks, c)
        return GrassmannNumber._raw(self.n, self.masks[keep], c[keep])

    def inverse(self) -> "GrassmannNumber":
        b = self.body
        if abs(b) < 1e-300:
            raise NonInvertibleError(f"cannot invert a supernumber with zero body: {self}")
        # 1/(b + s) = b^-1 * sum_k (-s/b)^k; the series terminates by nilpotency
        x = self.soul.scale(-1.0 / b)
        term = GrassmannNumber.one(self.n)
        total = term
        while True:
            term = term * x
            if not term.masks.size:
                break
            total = total + term
        return total.scale(1.0 / b)

    def sqrt(self) -> "GrassmannNumber":
        """Principal square root of an even value with positive body."""
        if not self.is_even():
            raise ParityError(f"sqrt needs an even argument, got {self}")
        b = self.body
        if b <= 0.0:
            raise NonInvertibleError(f"sqrt needs a positive body, got {b!r}")
        x = self.soul.scale(1.0 / b)
        term = GrassmannNumber.one(self.n)
        total = term
        coef = 1.0
        k = 0
        while True:
            term = term * x
            if not term.masks.size:
                break
            coef *= (0.5 - k) / (k + 1)  # binom(1/2, k + 1)
            k += 1
            total = total + term.scale(coef)
        return total.scale(math.sqrt(b))

    # -- comparison / hashing ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = GrassmannNumber.scalar(other, self.n)
        if not isinstance(other, GrassmannNumber):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.masks, other.masks)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None

    # -- text form ----------------------------------------------------------

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"GrassmannNumber(n={self.n}, {to_text(self)!r})"


class BodySoulDecomposition(NamedTuple):
    body: float
    soul: GrassmannNumber


# ---------------------------------------------------------------------------
# function-style API
# ---------------------------------------------------------------------------

def mul(x: GrassmannNumber, y: GrassmannNumber) -> GrassmannNumber:
    return x * y


def add(x: GrassmannNumber, y: GrassmannNumber) -> GrassmannNumber:
    return x + y


def inverse(x: GrassmannNumber) -> GrassmannNumber:
    return x.inverse()


def sqrt(x: GrassmannNumber) -> GrassmannNumber:
    return x.sqrt()


def decompose(x: GrassmannNumber) -> BodySoulDecomposition:
    return BodySoulDecomposition(x.body, x.soul)


def require_even(x: GrassmannNumber, what: str = "value") -> GrassmannNumber:
    if not x.is_even():
        raise ParityError(f"{what} must be even, got {x}")
    return x


def require_odd(x: GrassmannNumber, what: str = "value") -> GrassmannNumber:
    if not x.is_odd():
        raise ParityError(f"{what} must be odd, got {x}")
    return x


def as_grassmann(value, n: int) -> GrassmannNumber:
    if isinstance(value, GrassmannNumber):
        if value.n != n:
            raise GeneratorMismatchError(f"generator counts differ: {value.n} vs {n}")
        return value
    return GrassmannNumber.scalar(float(value), n)


# ---------------------------------------------------------------------------
# serialization:  "2.5*g1g3 - 1.0"
# ---------------------------------------------------------------------------

def to_text(x: GrassmannNumber) -> str:
    if not x.masks.size:
        return "0.0"
    order = list(range(x.masks.size))
    if x.masks[0] == 0:
        order = order[1:] + [0]  # constant term last
    parts = []
    for pos in order:
        c = float(x.coeffs[pos])
        mask = int(x.masks[pos])
        mono = "".join(f"g{i}" for i in _indices_of(mask))
        body = repr(abs(c)) if not mono else f"{abs(c)!r}*{mono}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan)\s*\*?\s*)?
        (?P<mono>(?:g\d+)*)\s*""",
    re.VERBOSE,
)


def parse(text: str, n: int) -> GrassmannNumber:
    """Inverse of :func:`to_text`.  Accepts ``+``/``-`` separated terms like ``-2*g1g3``."""
    text = text.strip()
    if not text:
        raise ValueError("empty Grassmann expression")
    pos = 0
    terms: dict[tuple[int, ...], float] = {}
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse Grassmann expression at {text[pos:]!r}")
        sign, coef, mono = m.group("sign"), m.group("coef"), m.group("mono")
        if sign is None and not first:
            raise ValueError(f"missing operator before {text[pos:]!r}")
        if coef is None and not mono:
            raise ValueError(f"empty term in {text!r}")
        value = float(coef) if coef is not None else 1.0
        if sign == "-":
            value = -value
        idx = tuple(int(s) for s in re.findall(r"g(\d+)", mono))
        mask, s = _mask_of(idx, n)
        if s:
            key = _indices_of(mask)
            terms[key] = terms.get(key, 0.0) + s * value
        pos = m.end()
        first = False
    return GrassmannNumber(n, terms)

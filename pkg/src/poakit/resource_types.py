"""Resource types (cost curve, distribution rule), basis families and tolls."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from .errors import ValidationError
from .scalar import format_scalar, parse_scalar

DEFAULT_BASIS_DIGITS = 40


@dataclass(frozen=True)
class ResourceType:
    """A (c, f) pair padded to ``c[0..n]`` and ``f[0..n+1]``.

    ``c[x]`` is the cost of a resource (of unit value) used by ``x`` players
    and ``f[x]`` is the share each of those players is charged.  The padding
    entries ``c[0]``, ``f[0]`` and ``f[n+1]`` are always zero.
    """

    name: str
    n: int
    c: tuple
    f: tuple

    def __post_init__(self):
        if len(self.c) != self.n + 1 or len(self.f) != self.n + 2:
            raise ValidationError(f"type {self.name!r}: padded curves have wrong length")
        if self.c[0] != 0 or self.f[0] != 0 or self.f[self.n + 1] != 0:
            raise ValidationError(f"type {self.name!r}: boundary entries must be zero")

    @property
    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.f) and all(v >= 0 for v in self.c)

    def scaled_rule(self, alpha, name: str | None = None) -> "ResourceType":
        """Same cost curve, distribution rule multiplied by ``alpha``."""
        alpha = parse_scalar(alpha)
        return make_type(name or self.name, self.n, self.c[1:], [alpha * v for v in self.f[1:-1]])

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "c": [format_scalar(v) for v in self.c[1:]],
            "f": [format_scalar(v) for v in self.f[1:-1]],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ResourceType":
        try:
            return make_type(data["name"], data["n"], data["c"], data["f"])
        except KeyError as exc:
            raise ValidationError(f"type descriptor missing field {exc.args[0]!r}") from None


def _curve(values, n, what):
    values = list(values)
    if len(values) != n:
        raise ValidationError(f"{what} has {len(values)} entries, expected {n}")
    return [parse_scalar(v) for v in values]


def make_type(name: str, n: int, c: Sequence, f: Sequence) -> ResourceType:
    """Build a type from ``c(1..n)`` and ``f(1..n)``; boundary zeros are added here."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    cs = _curve(c, n, "cost curve")
    fs = _curve(f, n, "distribution rule")
    zero = Fraction(0)
    return ResourceType(str(name), n, tuple([zero] + cs), tuple([zero] + fs + [zero]))


def congestion_type_from_latency(name: str, n: int, latency: Sequence) -> ResourceType:
    """Congestion edge as a resource: ``c(x) = x * l(x)`` and ``f(x) = l(x)``."""
    ell = _curve(latency, n, "latency")
    if any(v < 0 for v in ell):
        raise ValidationError(f"latency {name!r} has negative entries")
    return make_type(name, n, [x * v for x, v in enumerate(ell, start=1)], ell)


@dataclass(frozen=True)
class TypeSet:
    n: int
    types: tuple

    def __post_init__(self):
        if not self.types:
            raise ValidationError("a type set needs at least one type")
        names = [t.name for t in self.types]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate type names in {names}")
        for t in self.types:
            if t.n != self.n:
                raise ValidationError(f"type {t.name!r} has n={t.n}, type set has n={self.n}")

    def __iter__(self):
        return iter(self.types)

    def __len__(self):
        return len(self.types)

    def __getitem__(self, i):
        return self.types[i]

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.types]

    def to_json(self) -> dict:
        return {"n": self.n, "types": [t.to_json() for t in self.types]}

    @classmethod
    def from_json(cls, data) -> "TypeSet":
        if isinstance(data, list):
            types = [ResourceType.from_json(d) for d in data]
            if not types:
                raise ValidationError("empty type list")
            return cls(types[0].n, tuple(types))
        types = tuple(ResourceType.from_json(d) for d in data["types"])
        return cls(data.get("n", types[0].n if types else 0), types)


def type_set(*types: ResourceType) -> TypeSet:
    if not types:
        raise ValidationError("a type set needs at least one type")
    return TypeSet(types[0].n, tuple(types))


# --------------------------------------------------------------------------
# basis families

BASIS_FAMILIES = ("affine", "quadratic", "cubic", "sqrt", "log")


def _decimal_latency(kind, x, digits):
    with localcontext() as ctx:
        ctx.prec = digits + 10
        if kind == "sqrt":
            value = Decimal(x).sqrt()
        else:
            value = Decimal(x).ln() + 1
        ctx.prec = digits
        return Fraction(+value)


def basis_latencies(family: str, n: int, digits: int = DEFAULT_BASIS_DIGITS) -> list[tuple[str, list]]:
    """(name, latency values on 1..n) for every basis function of ``family``.

    Polynomial families of arbitrary degree are written ``"polynomial(d)"``.
    """
    degree = _polynomial_degree(family)
    if degree is not None:
        return [(_monomial_name(k), [Fraction(x) ** k for x in range(1, n + 1)])
                for k in range(degree, -1, -1)]
    if family == "sqrt":
        return [("sqrt(x)", [_decimal_latency("sqrt", x, digits) for x in range(1, n + 1)])]
    if family == "log":
        return [("log(x)+1", [_decimal_latency("log", x, digits) for x in range(1, n + 1)])]
    raise ValidationError(f"unknown basis family {family!r}")


def _monomial_name(k):
    return {0: "1", 1: "x"}.get(k, f"x^{k}")


def _polynomial_degree(family: str):
    named = {"affine": 1, "quadratic": 2, "cubic": 3}
    if family in named:
        return named[family]
    if family.startswith("polynomial(") and family.endswith(")"):
        try:
            d = int(family[len("polynomial("):-1])
        except ValueError:
            raise ValidationError(f"bad polynomial degree in {family!r}") from None
        if d < 1:
            raise ValidationError("polynomial degree must be >= 1")
        return d
    return None


def basis_types(family: str, n: int, digits: int = DEFAULT_BASIS_DIGITS) -> TypeSet:
    """Type set induced by a family of congestion latencies (affine -> {x, 1} ...)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    types = [congestion_type_from_latency(name, n, ell)
             for name, ell in basis_latencies(family, n, digits)]
    return TypeSet(n, tuple(types))


def toll_from_optimal_rule(latency: Sequence, f_star: Sequence) -> list[Fraction]:
    """Per-load toll ``f*(x) - l(x)``; negative entries are subsidies."""
    latency = list(latency)
    f_star = list(f_star)
    if len(latency) != len(f_star):
        raise ValidationError(f"latency has {len(latency)} entries, rule has {len(f_star)}")
    return [parse_scalar(fs) - parse_scalar(ell) for ell, fs in zip(latency, f_star)]


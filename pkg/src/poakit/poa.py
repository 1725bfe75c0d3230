"""Type-level linear programs for local resource allocation games.

Given a finite set of resource types and a player bound ``n``, the price of
anarchy of the whole class is ``1/rho*`` where ``rho*`` maximizes

    rho  s.t.  c(y) - rho c(x) + nu [(x-z) f(x) - (y-z) f(x+1)] >= 0,  nu >= 0

over every type and every load triple ``(x, y, z)`` in the index set.  The
same constraints with ``nu`` folded into ``f`` give the rule-design LP.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from . import lp
from .errors import NoFiniteBound, PoAError, ValidationError
from .resource_types import ResourceType, TypeSet, make_type
from .scalar import RATIONAL, FLOAT, format_scalar, parse_scalar

log = logging.getLogger(__name__)


class IndexTuple(NamedTuple):
    """Loads of one resource: ``x`` at equilibrium, ``y`` at the optimum, ``z`` in both."""

    x: int
    y: int
    z: int


def in_index_set(t: IndexTuple, n: int, restricted: bool = False) -> bool:
    x, y, z = t
    if min(x, y, z) < 0 or z > min(x, y) or not 1 <= x + y - z <= n:
        return False
    if restricted:
        return x + y - z == n or (x - z) * (y - z) * z == 0
    return True


def enumerate_index_set(n: int, restricted: bool = True) -> list[IndexTuple]:
    """All load triples of the (restricted) index set, lexicographic in (x, y, z)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    return [IndexTuple(x, y, z)
            for x in range(n + 1) for y in range(n + 1) for z in range(min(x, y) + 1)
            if in_index_set(IndexTuple(x, y, z), n, restricted)]


def deviation_gap(t: ResourceType, idx: IndexTuple):
    """``(x-z) f(x) - (y-z) f(x+1)``: equilibrium share minus deviation share on one resource."""
    x, y, z = idx
    return (x - z) * t.f[x] - (y - z) * t.f[x + 1]


def _check_types(types: TypeSet, n: Optional[int]) -> int:
    if n is None:
        return types.n
    if n != types.n:
        raise ValidationError(f"type set is defined for n={types.n}, asked for n={n}")
    return n


# --------------------------------------------------------------------------
# price of anarchy of a type set


@dataclass
class BindingConstraint:
    type: str
    index: IndexTuple
    dual: object
    type_index: int = 0

    def to_json(self):
        x, y, z = self.index
        return {"type": self.type, "x": x, "y": y, "z": z, "dual": format_scalar(self.dual)}


@dataclass
class PoAResult:
    n: int
    types: list
    rho: object
    nu: object
    poa: object
    lam: object = None
    mu: object = None
    attained: bool = False
    binding: list = field(default_factory=list)
    arithmetic: str = RATIONAL

    @property
    def bounded(self) -> bool:
        return self.poa is not None

    @property
    def support(self) -> list[BindingConstraint]:
        """Binding constraints carrying a nonzero dual weight."""
        return [b for b in self.binding if b.dual != 0]

    def to_json(self) -> dict:
        opt = lambda v: None if v is None else format_scalar(v)  # noqa: E731
        return {
            "n": self.n,
            "types": list(self.types),
            "poa": opt(self.poa),
            "rho": opt(self.rho),
            "nu": opt(self.nu),
            "lambda": opt(self.lam),
            "mu": opt(self.mu),
            "attained": self.attained,
            "binding": [b.to_json() for b in self.binding],
        }


def _poa_problem(types: TypeSet, index_set):
    problem = lp.LPProblem([0, 1], lower=[0, None])
    for ti, t in enumerate(types):
        for idx in index_set:
            # rho c(x) - nu g <= c(y)
            problem.add_row([-deviation_gap(t, idx), t.c[idx.x]], lp.LE, t.c[idx.y], (ti, idx))
    return problem


def _max_nu_at(problem: lp.LPProblem, rho, arithmetic):
    """Largest nu keeping every row feasible with rho fixed; None when unbounded."""
    fixed = lp.LPProblem([1], lower=[0])
    for row in problem.rows:
        coef_nu, coef_rho = row.coeffs
        fixed.add_row([coef_nu], lp.LE, row.rhs - coef_rho * rho, row.label)
    sol = lp.solve(fixed, arithmetic)
    if sol.status is lp.Status.UNBOUNDED:
        return None
    if not sol.optimal:
        raise PoAError(f"secondary LP at fixed rho failed: {sol.status.value}")
    return sol.primal[0]


def canonical_point(problem: lp.LPProblem, sol: lp.LPSolution, arithmetic: str):
    """(nu, rho, attained) with nu maximal on the optimal face.

    An unbounded ray in nu keeps the solver's own vertex (or nu = 1 if that
    vertex sits at nu = 0); any positive nu on the face is a valid certificate.
    """
    nu0, rho = sol.primal
    nu_max = _max_nu_at(problem, rho, arithmetic)
    if nu_max is None:
        nu = nu0 if nu0 > 0 else type(rho)(1)
        return nu, rho, True
    return nu_max, rho, nu_max > 0


def poa_lp(types: TypeSet, n: Optional[int] = None, *, restricted: bool = True,
           arithmetic: str = RATIONAL) -> PoAResult:
    """Exact price of anarchy of every ``n``-player game built from ``types``.

    ``restricted=False`` uses the full index set instead of the boundary
    subset (same value, more rows).  ``poa`` is None when ``rho* <= 0``,
    i.e. no finite bound exists.
    """
    n = _check_types(types, n)
    index_set = enumerate_index_set(n, restricted)
    problem = _poa_problem(types, index_set)
    sol = lp.solve(problem, arithmetic)
    if sol.status is lp.Status.UNBOUNDED:
        raise ValidationError("every cost curve is identically zero; the ratio is undefined")
    if not sol.optimal:
        raise PoAError(f"price-of-anarchy LP is {sol.status.value}")
    nu, rho, attained = canonical_point(problem, sol, arithmetic)
    bounded = rho > 0
    lam = mu = None
    if attained and bounded:
        lam = 1 / nu
        mu = 1 - rho / nu
    binding = []
    for i, row in enumerate(problem.rows):
        slack = row.rhs - row.coeffs[0] * nu - row.coeffs[1] * rho
        dual = sol.dual[i]
        if slack == 0 or dual != 0 or (arithmetic == FLOAT and abs(slack) <= 1e-9):
            ti, idx = row.label
            binding.append(BindingConstraint(types[ti].name, idx, dual, ti))
    return PoAResult(
        n=n,
        types=types.names,
        rho=rho,
        nu=nu,
        poa=1 / rho if bounded else None,
        lam=lam,
        mu=mu,
        attained=attained and bounded,
        binding=binding,
        arithmetic=arithmetic,
    )


def poa_lp_problem(types: TypeSet, n: Optional[int] = None, restricted: bool = True) -> lp.LPProblem:
    """The raw LP behind :func:`poa_lp`, variables ``[nu, rho]``; labels are ``(type index, IndexTuple)``."""
    n = _check_types(types, n)
    return _poa_problem(types, enumerate_index_set(n, restricted))


def gamma_value(types: TypeSet, n: Optional[int] = None, *, restricted: bool = True,
                arithmetic: str = RATIONAL):
    """Infimum of ``lam/(1-mu)`` over all (lam, mu) satisfying the per-resource inequalities

        (z-x) f(x) + (y-z) f(x+1) + c(x) <= lam c(y) + mu c(x).

    Solved in its own variables via the Charnes-Cooper substitution
    ``s = 1/(1-mu)``, ``L = lam s``, ``M = mu s``: minimize ``L`` subject to
    ``L c(y) + M c(x) - s h >= 0``, ``s - M = 1``, ``s, L >= 0``.
    """
    n = _check_types(types, n)
    problem = lp.LPProblem([-1, 0, 0], lower=[0, None, 0])  # variables L, M, s
    for t in types:
        for idx in enumerate_index_set(n, restricted):
            x, y, z = idx
            h = (z - x) * t.f[x] + (y - z) * t.f[x + 1] + t.c[x]
            problem.add_row([t.c[y], t.c[x], -h], lp.GE, 0, (t.name, idx))
    problem.add_row([0, -1, 1], lp.EQ, 1, "normalization")
    sol = lp.solve(problem, arithmetic)
    if sol.status is lp.Status.INFEASIBLE:
        raise NoFiniteBound("no (lambda, mu) satisfies the per-resource inequalities")
    if not sol.optimal:
        raise PoAError(f"gamma LP is {sol.status.value}")
    return sol.primal[0]


# --------------------------------------------------------------------------
# optimal distribution rules


@dataclass
class DesignedRule:
    name: str
    c: tuple            # c(1..n)
    f_star: Optional[tuple]   # f*(1..n)
    rho: object
    status: str = "optimal"

    @property
    def poa(self):
        if self.rho is None or self.rho <= 0:
            return None
        return 1 / self.rho

    @property
    def nonnegative(self) -> bool:
        return self.f_star is not None and all(v >= 0 for v in self.f_star)

    def resource_type(self) -> ResourceType:
        return make_type(self.name, len(self.c), self.c, self.f_star)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "rho": None if self.rho is None else format_scalar(self.rho),
            "poa": None if self.poa is None else format_scalar(self.poa),
            "f": None if self.f_star is None else [format_scalar(v) for v in self.f_star],
            "nonnegative": self.nonnegative,
        }


@dataclass
class DesignedRules:
    n: int
    rules: list
    nonneg: bool = False

    @property
    def poa(self):
        """Worst per-curve ratio; None if any curve has no finite bound."""
        values = [r.poa for r in self.rules]
        if any(v is None for v in values):
            return None
        return max(values)

    def type_set(self) -> TypeSet:
        return TypeSet(self.n, tuple(r.resource_type() for r in self.rules))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "nonneg": self.nonneg,
            "poa": None if self.poa is None else format_scalar(self.poa),
            "rules": [r.to_json() for r in self.rules],
        }


def design_problem(c: Sequence, n: int, nonneg: bool = False, restricted: bool = True) -> lp.LPProblem:
    """Rule-design LP for one cost curve; variables ``[f(1), ..., f(n), rho]``."""
    c = [Fraction(0)] + [parse_scalar(v) for v in c]
    if len(c) != n + 1:
        raise ValidationError(f"cost curve has {len(c) - 1} entries, expected {n}")
    lower = [0 if nonneg else None] * n + [None]
    problem = lp.LPProblem([0] * n + [1], lower=lower)
    for idx in enumerate_index_set(n, restricted):
        x, y, z = idx
        coeffs = [0] * (n + 1)
        # rho c(x) - (x-z) f(x) + (y-z) f(x+1) <= c(y); f(0) = f(n+1) = 0
        if 1 <= x <= n:
            coeffs[x - 1] -= x - z
        if 1 <= x + 1 <= n:
            coeffs[x] += y - z
        coeffs[n] = c[x]
        problem.add_row(coeffs, lp.LE, c[y], idx)
    return problem


def optimal_rules(costs, n: int, nonneg: bool = False, *, arithmetic: str = RATIONAL,
                  names: Optional[Sequence[str]] = None) -> DesignedRules:
    """Distribution rules minimizing the price of anarchy, one independent LP per cost curve.

    ``costs`` is a list of ``c(1..n)`` sequences, or of ResourceTypes whose
    cost curves are used.  With ``nonneg`` the rules are constrained to
    ``f >= 0``.
    """
    curves = []
    for k, item in enumerate(costs):
        if isinstance(item, ResourceType):
            curves.append((item.name, item.c[1:]))
        else:
            curves.append((names[k] if names else f"c{k + 1}", tuple(parse_scalar(v) for v in item)))
    rules = []
    for name, c in curves:
        sol = lp.solve(design_problem(c, n, nonneg), arithmetic)
        if sol.optimal:
            rules.append(DesignedRule(name, tuple(c), tuple(sol.primal[:n]), sol.primal[n]))
        else:
            log.warning("design LP for %s is %s", name, sol.status.value)
            rules.append(DesignedRule(name, tuple(c), None, None, sol.status.value))
    return DesignedRules(n, rules, nonneg)


def fixed_rule_panel(c: Sequence) -> dict:
    """Reference rules for a cost curve: equal share ``c(x)/x`` and marginal ``c(x) - c(x-1)``."""
    c = [Fraction(0)] + [parse_scalar(v) for v in c]
    return {
        "average": [c[x] / x for x in range(1, len(c))],
        "marginal": [c[x] - c[x - 1] for x in range(1, len(c))],
    }

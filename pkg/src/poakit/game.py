"""Explicit finite resource allocation games and brute-force equilibrium analysis."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, NamedTuple, Optional, Sequence

from . import lp
from .errors import CapExceeded, NoPureNash, PoAError, ValidationError, VerificationFailed, ZeroOptimalCost
from .resource_types import ResourceType, TypeSet, basis_types, congestion_type_from_latency, type_set
from .scalar import RATIONAL, format_scalar, parse_scalar

NASH_CAP = 10 ** 7
CCE_CAP = 10 ** 5

Allocation = tuple  # one action index per player


class Resource(NamedTuple):
    type_index: int
    value: Fraction


@dataclass
class Verdict:
    """Outcome of an equilibrium check; falsy when a violation was found."""

    ok: bool
    witness: Any = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ExplicitGame:
    """Players choose subsets of resources; each resource carries one type and a value.

    ``actions[i][k]`` is the k-th action of player i, a frozenset of resource
    indices.  Resource ``r`` costs ``v_r * c(load)`` to the system and charges
    each of its users ``v_r * f(load)``.
    """

    type_set: TypeSet
    resources: tuple
    actions: tuple

    def __post_init__(self):
        resources = tuple(Resource(int(t), parse_scalar(v)) for t, v in self.resources)
        object.__setattr__(self, "resources", resources)
        actions = tuple(tuple(frozenset(a) for a in acts) for acts in self.actions)
        object.__setattr__(self, "actions", actions)
        if not actions:
            raise ValidationError("a game needs at least one player")
        if len(actions) > self.type_set.n:
            raise ValidationError(
                f"{len(actions)} players but types are defined for loads up to {self.type_set.n}")
        for r, (t, v) in enumerate(resources):
            if not 0 <= t < len(self.type_set):
                raise ValidationError(f"resources[{r}].type = {t} is out of range")
            if v < 0:
                raise ValidationError(f"resources[{r}].value is negative")
        for i, acts in enumerate(actions):
            if not acts:
                raise ValidationError(f"actions[{i}] is empty")
            for k, act in enumerate(acts):
                for r in act:
                    if not 0 <= r < len(resources):
                        raise ValidationError(f"actions[{i}][{k}] references missing resource {r}")

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def n_profiles(self) -> int:
        return math.prod(len(a) for a in self.actions)

    def rtype(self, r: int) -> ResourceType:
        return self.type_set[self.resources[r].type_index]

    def allocations(self) -> Iterator[Allocation]:
        """All allocations in lexicographic order of action indices."""
        return itertools.product(*(range(len(a)) for a in self.actions))

    def check_allocation(self, a: Sequence[int]) -> Allocation:
        a = tuple(a)
        if len(a) != self.n or any(not 0 <= k < len(acts) for k, acts in zip(a, self.actions)):
            raise ValidationError(f"invalid allocation {a}")
        return a

    def loads(self, a: Allocation) -> list[int]:
        load = [0] * len(self.resources)
        for i, k in enumerate(a):
            for r in self.actions[i][k]:
                load[r] += 1
        return load

    def cost_at(self, loads: Sequence[int]):
        total = Fraction(0)
        for r, (t, v) in enumerate(self.resources):
            if loads[r] and v:
                total += v * self.type_set[t].c[loads[r]]
        return total

    def share(self, r: int, load: int):
        t, v = self.resources[r]
        return v * self.type_set[t].f[load]

    def system_cost(self, a: Allocation):
        return self.cost_at(self.loads(a))

    def local_cost(self, i: int, a: Allocation, loads: Optional[Sequence[int]] = None):
        loads = self.loads(a) if loads is None else loads
        return sum((self.share(r, loads[r]) for r in self.actions[i][a[i]]), Fraction(0))

    def local_costs(self, a: Allocation) -> list:
        loads = self.loads(a)
        return [self.local_cost(i, a, loads) for i in range(self.n)]

    def deviation_cost(self, i: int, k: int, a: Allocation, loads: Optional[Sequence[int]] = None):
        """Cost of player i after switching to action k while the others stay at ``a``."""
        loads = self.loads(a) if loads is None else loads
        current = self.actions[i][a[i]]
        total = Fraction(0)
        for r in self.actions[i][k]:
            total += self.share(r, loads[r] if r in current else loads[r] + 1)
        return total

    def with_type_set(self, types: TypeSet) -> "ExplicitGame":
        return ExplicitGame(types, self.resources, self.actions)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "types": [t.to_json() for t in self.type_set],
            "resources": [{"type": t, "value": format_scalar(v)} for t, v in self.resources],
            "actions": [[sorted(act) for act in acts] for acts in self.actions],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExplicitGame":
        return parse_game_data(data)


def parse_game_data(data: dict) -> ExplicitGame:
    """Build a game from the JSON object form, naming the offending path on errors."""
    if not isinstance(data, dict):
        raise ValidationError("$: expected an object")
    for key in ("n", "types", "resources", "actions"):
        if key not in data:
            raise ValidationError(f"$.{key}: missing")
    try:
        types = TypeSet.from_json(data["types"])
    except ValidationError as exc:
        raise ValidationError(f"$.types: {exc}") from None
    resources = []
    for r, item in enumerate(data["resources"]):
        try:
            resources.append((int(item["type"]), parse_scalar(item["value"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"$.resources[{r}]: {exc}") from None
        if not 0 <= resources[-1][0] < len(types):
            raise ValidationError(f"$.resources[{r}].type: index {resources[-1][0]} out of range")
        if resources[-1][1] < 0:
            raise ValidationError(f"$.resources[{r}].value: must be nonnegative")
    actions = data["actions"]
    if len(actions) != data["n"]:
        raise ValidationError(f"$.actions: {len(actions)} action sets for n={data['n']}")
    for i, acts in enumerate(actions):
        if not acts:
            raise ValidationError(f"$.actions[{i}]: empty action set")
        for k, act in enumerate(acts):
            for j, r in enumerate(act):
                if not isinstance(r, int) or not 0 <= r < len(resources):
                    raise ValidationError(f"$.actions[{i}][{k}][{j}]: bad resource index {r!r}")
    return ExplicitGame(types, tuple(resources), tuple(tuple(a) for a in actions))


# --------------------------------------------------------------------------
# named instances


def footnote2(v=1) -> ExplicitGame:
    """Three players on six unit-latency edges; the three-edge actions form an equilibrium
    costing 15v against an optimum of 6v."""
    t = congestion_type_from_latency("x", 3, [1, 2, 3])
    e1, e2, e3, e4, e5, e6 = range(6)
    actions = (
        ({e4, e5, e6}, {e1, e2}),
        ({e1, e2, e5}, {e3, e4}),
        ({e1, e3, e4}, {e5, e6}),
    )
    return ExplicitGame(type_set(t), tuple((0, v) for _ in range(6)), actions)


def fig1(values=(1, 1, 1, 1), n: int = 2) -> ExplicitGame:
    """Two parallel two-edge paths with latencies v1 x + v2 (top) and v3 x + v4 (bottom)."""
    if len(values) != 4:
        raise ValidationError("fig1 needs four resource values")
    types = basis_types("affine", n)  # types[0] = (x^2, x), types[1] = (x, 1)
    resources = ((0, values[0]), (1, values[1]), (0, values[2]), (1, values[3]))
    return ExplicitGame(types, resources, tuple(({0, 1}, {2, 3}) for _ in range(n)))


NAMED_GAMES = {"footnote2": footnote2, "fig1": fig1}


# --------------------------------------------------------------------------
# equilibria and price of anarchy


def system_cost(g: ExplicitGame, a) -> Fraction:
    return g.system_cost(g.check_allocation(a))


def local_cost(g: ExplicitGame, i: int, a) -> Fraction:
    return g.local_cost(i, g.check_allocation(a))


class Deviation(NamedTuple):
    player: int
    action: int
    current_cost: Any
    deviation_cost: Any


def is_nash(g: ExplicitGame, a) -> Verdict:
    """Weak inequality: a deviation must be strictly cheaper to break the equilibrium."""
    a = g.check_allocation(a)
    loads = g.loads(a)
    for i in range(g.n):
        current = g.local_cost(i, a, loads)
        for k in range(len(g.actions[i])):
            if k == a[i]:
                continue
            dev = g.deviation_cost(i, k, a, loads)
            if dev < current:
                return Verdict(False, Deviation(i, k, current, dev))
    return Verdict(True)


def _check_cap(g: ExplicitGame, cap: int):
    if g.n_profiles > cap:
        raise CapExceeded(f"{g.n_profiles} allocations exceed the enumeration cap {cap}")


def enumerate_nash(g: ExplicitGame, cap: int = NASH_CAP) -> list[Allocation]:
    _check_cap(g, cap)
    return [a for a in g.allocations() if is_nash(g, a)]


def optimal_cost(g: ExplicitGame, cap: int = NASH_CAP):
    _check_cap(g, cap)
    return min(g.system_cost(a) for a in g.allocations())


def brute_force_poa(g: ExplicitGame, cap: int = NASH_CAP) -> Fraction:
    """Worst pure-equilibrium cost over optimal cost, by full enumeration."""
    _check_cap(g, cap)
    worst = None
    best = None
    for a in g.allocations():
        cost = g.system_cost(a)
        best = cost if best is None else min(best, cost)
        if (worst is None or cost > worst) and is_nash(g, a):
            worst = cost
    if worst is None:
        raise NoPureNash("the game has no pure Nash equilibrium")
    if best <= 0:
        raise ZeroOptimalCost("optimal system cost is zero; the ratio is undefined")
    return worst / best


# --------------------------------------------------------------------------
# coarse correlated equilibria


def _regret_table(g: ExplicitGame, profiles):
    """rows[(i, k)][p] = J_i(a) - J_i(k, a_-i) for profile p."""
    rows = {(i, k): [] for i in range(g.n) for k in range(len(g.actions[i]))}
    for a in profiles:
        loads = g.loads(a)
        for i in range(g.n):
            cur = g.local_cost(i, a, loads)
            for k in range(len(g.actions[i])):
                rows[(i, k)].append(cur - g.deviation_cost(i, k, a, loads))
    return rows


def worst_cce_value(g: ExplicitGame, cap: int = CCE_CAP, arithmetic: str = RATIONAL):
    """Largest expected system cost over coarse correlated equilibria.

    Returns ``(value, distribution)`` where ``distribution`` maps allocations
    to their (nonzero) probabilities.
    """
    _check_cap(g, cap)
    profiles = list(g.allocations())
    costs = [g.system_cost(a) for a in profiles]
    problem = lp.LPProblem(costs, lower=[0] * len(profiles))
    problem.add_row([1] * len(profiles), lp.EQ, 1, "normalization")
    for key, coeffs in _regret_table(g, profiles).items():
        if any(coeffs):
            problem.add_row(coeffs, lp.LE, 0, key)
    sol = lp.solve(problem, arithmetic)
    if not sol.optimal:
        raise PoAError(f"CCE LP is {sol.status.value}")
    sigma = {a: w for a, w in zip(profiles, sol.primal) if w}
    return sol.objective, sigma


def is_cce(g: ExplicitGame, sigma: dict) -> Verdict:
    """Check every fixed unilateral deviation against the joint distribution ``sigma``."""
    sigma = {g.check_allocation(a): parse_scalar(w) for a, w in sigma.items()}
    if any(w < 0 for w in sigma.values()) or sum(sigma.values()) != 1:
        raise ValidationError("sigma must be a probability distribution (nonnegative, summing to 1)")
    support = list(sigma)
    table = _regret_table(g, support)
    for (i, k), coeffs in table.items():
        expected = sum((sigma[a] * d for a, d in zip(support, coeffs)), Fraction(0))
        if expected > 0:
            return Verdict(False, (i, k, expected))
    return Verdict(True)


# --------------------------------------------------------------------------
# per-resource decomposition of the deviation sum


@dataclass
class DeviationProfile:
    tuples: list            # (x_r, y_r, z_r) per resource
    aggregate: Any          # sum_i J_i(a'_i, a_-i) - sum_i J_i(a) + C(a)
    resource_sum: Any       # sum_r v_r [(z-x) f(x) + (y-z) f(x+1) + c(x)]
    per_resource: list = field(default_factory=list)


def deviation_profile(g: ExplicitGame, a, a_prime) -> DeviationProfile:
    """Loads under ``a`` and ``a_prime`` plus overlaps, and both sides of the decomposition.

    Raises VerificationFailed if the two sides differ.
    """
    a = g.check_allocation(a)
    a_prime = g.check_allocation(a_prime)
    x = g.loads(a)
    y = g.loads(a_prime)
    z = [0] * len(g.resources)
    for i in range(g.n):
        for r in g.actions[i][a[i]] & g.actions[i][a_prime[i]]:
            z[r] += 1
    aggregate = (sum((g.deviation_cost(i, a_prime[i], a, x) for i in range(g.n)), Fraction(0))
                 - sum(g.local_costs(a), Fraction(0)) + g.cost_at(x))
    per_resource = []
    for r, (ti, v) in enumerate(g.resources):
        t = g.type_set[ti]
        xr, yr, zr = x[r], y[r], z[r]
        f_next = t.f[xr + 1] if xr + 1 <= t.n + 1 else Fraction(0)
        per_resource.append(v * ((zr - xr) * t.f[xr] + (yr - zr) * f_next + t.c[xr]))
    resource_sum = sum(per_resource, Fraction(0))
    profile = DeviationProfile(list(zip(x, y, z)), aggregate, resource_sum, per_resource)
    if aggregate != resource_sum:
        raise VerificationFailed("per-resource decomposition does not match the deviation sum", profile)
    return profile

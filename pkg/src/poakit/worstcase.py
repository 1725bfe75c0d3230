"""Worst-case games whose price of anarchy equals the type-level LP value.

Two binding load triples of the LP, mixed with weight eta so that the mixed
equilibrium and deviation shares coincide, are laid out on two disjoint
cycles of resources.  Every player then sits exactly at indifference between
its equilibrium run and its optimal run, and the cost ratio of the two
allocations is ``1/rho*``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .errors import NoFiniteBound, VerificationFailed, ValidationError
from .game import ExplicitGame, NASH_CAP, brute_force_poa, is_nash
from .poa import IndexTuple, PoAResult, deviation_gap, enumerate_index_set, in_index_set, poa_lp
from .resource_types import TypeSet
from .scalar import format_scalar
from .smoothness import generalized_poa

TWO_CYCLE = "two-cycle"
SINGLE_CYCLE = "single-cycle"


@dataclass
class OptimalityParameters:
    first: tuple    # (type index, IndexTuple)
    second: tuple
    eta: Fraction
    lam: Fraction
    mu: Fraction

    def tuples(self):
        return [self.first, self.second]


def _binding_equality(t, idx, lam, mu) -> bool:
    x, y, z = idx
    lhs = (z - x) * t.f[x] + (y - z) * t.f[x + 1] + t.c[x]
    return lhs == lam * t.c[y] + mu * t.c[x]


def _mixed_equality(types, first, second, eta) -> bool:
    (t1, (x1, y1, z1)), (t2, (x2, y2, z2)) = first, second
    f1, f2 = types[t1].f, types[t2].f
    dev = eta * (z1 * f1[x1] + (y1 - z1) * f1[x1 + 1]) + (1 - eta) * (z2 * f2[x2] + (y2 - z2) * f2[x2 + 1])
    return dev == eta * x1 * f1[x1] + (1 - eta) * x2 * f2[x2]


def _mix_for(types, first, second):
    """eta in [0, 1] zeroing the mixed deviation gap, or None."""
    g1 = deviation_gap(types[first[0]], first[1])
    g2 = deviation_gap(types[second[0]], second[1])
    if g1 == g2:
        return Fraction(1, 2) if g1 == 0 else None
    eta = Fraction(g2) / (g2 - g1)
    if not 0 <= eta <= 1:
        return None
    return eta


def _positive_mixed_cost(types, first, second, eta) -> bool:
    (t1, idx1), (t2, idx2) = first, second
    return eta * types[t1].c[idx1.x] + (1 - eta) * types[t2].c[idx2.x] > 0


def extract_optimality_parameters(result: PoAResult, types: TypeSet) -> OptimalityParameters:
    """Pick two binding triples and a mixing weight for the two-cycle construction.

    The LP duals already provide such a pair (they weight constraints so the
    nu-column prices out to zero); otherwise every pair of binding
    constraints is searched in dual-weight order.
    """
    if not result.attained:
        raise ValidationError("optimality parameters need an attained optimum (nu > 0)")
    lam, mu = result.lam, result.mu
    binding = sorted(result.binding, key=lambda b: (-b.dual, b.type_index, b.index))
    support = [b for b in binding if b.dual != 0]

    def accept(first, second, eta):
        return (eta is not None
                and _positive_mixed_cost(types, first, second, eta)
                and all(_binding_equality(types[t], idx, lam, mu) for t, idx in (first, second))
                and _mixed_equality(types, first, second, eta))

    if len(support) == 2:
        b1, b2 = support
        first, second = (b1.type_index, b1.index), (b2.type_index, b2.index)
        eta = Fraction(b1.dual) / (b1.dual + b2.dual)
        if accept(first, second, eta):
            return OptimalityParameters(first, second, eta, lam, mu)
    candidates = [(b.type_index, b.index) for b in binding]
    for first, second in itertools.combinations_with_replacement(candidates, 2):
        eta = _mix_for(types, first, second)
        if accept(first, second, eta):
            return OptimalityParameters(first, second, eta, lam, mu)
    raise VerificationFailed(
        "no pair of binding constraints admits a valid mixing weight",
        [(b.type, tuple(b.index), b.dual) for b in binding])


# --------------------------------------------------------------------------
# instances


@dataclass
class WorstCaseInstance:
    game: ExplicitGame
    declared_poa: Fraction
    construction: str
    ne_allocation: tuple
    opt_allocation: tuple
    lp_value: Optional[Fraction] = None
    parameters: Any = None

    def sidecar(self) -> dict:
        return {
            "declared_poa": format_scalar(self.declared_poa),
            "construction": self.construction,
            "ne": list(self.ne_allocation),
            "opt": list(self.opt_allocation),
        }


def _run(start, length, size, offset):
    return {offset + (start + t) % size for t in range(length)}


def build_two_cycle(types: TypeSet, params: OptimalityParameters) -> ExplicitGame:
    """Cycles E1, E2 of L resources (values eta and 1-eta), L players with two actions.

    Player i's equilibrium action takes x_j consecutive resources of E_j
    starting at i; its optimal action takes y_j consecutive resources starting
    at i + x_j - z_j, so exactly z_j of them overlap its own equilibrium run.
    L is the largest x_j + y_j - z_j, which keeps every run overlap-free
    across the wrap.
    """
    cycles = [(params.first, params.eta), (params.second, 1 - params.eta)]
    size = max(idx.x + idx.y - idx.z for (_, idx), _ in cycles)
    resources = []
    ne_actions = [set() for _ in range(size)]
    opt_actions = [set() for _ in range(size)]
    for j, ((ti, (x, y, z)), value) in enumerate(cycles):
        offset = j * size
        resources.extend((ti, value) for _ in range(size))
        for i in range(size):
            ne_actions[i] |= _run(i, x, size, offset)
            opt_actions[i] |= _run(i + x - z, y, size, offset)
    actions = tuple((ne_actions[i], opt_actions[i]) for i in range(size))
    return ExplicitGame(types, tuple(resources), actions)


def build_single_cycle(types: TypeSet, type_index: int, idx: IndexTuple) -> ExplicitGame:
    """One cycle of ``l = min(x + y, n)`` resources of a single type and ``l`` players.

    Equilibrium action: x consecutive resources from r_i.  Optimal action: y
    consecutive resources ending at r_{i+z-1}.
    """
    x, y, z = idx
    n = types.n
    if not in_index_set(idx, n):
        raise ValidationError(f"{idx} is not a valid load triple for n={n}")
    size = min(x + y, n)
    resources = tuple((type_index, 1) for _ in range(size))
    actions = tuple((_run(i, x, size, 0), _run(i + z - y, y, size, 0)) for i in range(size))
    return ExplicitGame(types, resources, actions)


def lemma5_tuple(types: TypeSet, gamma: Fraction):
    """Lexicographically smallest (type, x, y, z) with c(x)/c(y) = gamma and a strict deviation penalty."""
    for ti, t in enumerate(types):
        for idx in enumerate_index_set(types.n):
            if t.c[idx.y] > 0 and deviation_gap(t, idx) < 0 and t.c[idx.x] / t.c[idx.y] == gamma:
                return ti, idx
    return None


def build_worst_case(types: TypeSet, n: Optional[int] = None) -> WorstCaseInstance:
    """Game from ``types`` whose equilibrium-to-optimum ratio reaches the LP value."""
    result = poa_lp(types, n)
    if not result.bounded:
        raise NoFiniteBound("the type set has no finite price of anarchy")
    if result.attained:
        params = extract_optimality_parameters(result, types)
        game = build_two_cycle(types, params)
        construction = TWO_CYCLE
    else:
        found = lemma5_tuple(types, result.poa)
        if found is None:
            raise VerificationFailed("no load triple realizes the non-attained bound", result)
        params = found
        game = build_single_cycle(types, *found)
        construction = SINGLE_CYCLE
    ne = (0,) * game.n
    opt = (1,) * game.n
    inst = WorstCaseInstance(game, Fraction(0), construction, ne, opt, result.poa, params)
    if not is_nash(game, ne):
        raise VerificationFailed("constructed equilibrium is not a Nash equilibrium", inst)
    opt_cost = game.system_cost(opt)
    if opt_cost <= 0:
        raise VerificationFailed("constructed optimum has zero cost", inst)
    inst.declared_poa = game.system_cost(ne) / opt_cost
    if construction == TWO_CYCLE and inst.declared_poa != result.poa:
        raise VerificationFailed("constructed ratio differs from the LP value", inst)
    if construction == SINGLE_CYCLE and inst.declared_poa < result.poa:
        raise VerificationFailed("constructed ratio is below the LP value", inst)
    return inst


@dataclass
class VerificationReport:
    is_nash: bool
    player_costs: list          # (player, equilibrium cost, cost after moving to the optimal action)
    indifferent: bool           # every such move changes the cost by exactly zero
    brute_force_poa: Optional[Fraction]
    generalized_bound: Optional[Fraction]
    resources_ok: bool
    passed: bool
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        opt = lambda v: None if v is None else format_scalar(v)  # noqa: E731
        return {
            "is_nash": self.is_nash,
            "indifferent": self.indifferent,
            "brute_force_poa": opt(self.brute_force_poa),
            "generalized_bound": opt(self.generalized_bound),
            "resources_ok": self.resources_ok,
            "passed": self.passed,
            "player_costs": [[i, format_scalar(a), format_scalar(b)] for i, a, b in self.player_costs],
            "notes": self.notes,
        }


def verify_worst_case(inst: WorstCaseInstance, *, cap: int = NASH_CAP, with_bound: bool = True) -> VerificationReport:
    """Re-check an instance against brute force: equilibrium, indifference, exact ratio.

    Single-cycle instances only need the brute-force ratio to reach the
    declared value; every other construction must match it exactly.
    """
    g = inst.game
    notes = []
    nash = bool(is_nash(g, inst.ne_allocation))
    loads = g.loads(inst.ne_allocation)
    player_costs = []
    for i in range(g.n):
        cur = g.local_cost(i, inst.ne_allocation, loads)
        dev = g.deviation_cost(i, inst.opt_allocation[i], inst.ne_allocation, loads)
        player_costs.append((i, cur, dev))
    indifferent = all(cur == dev for _, cur, dev in player_costs)
    try:
        bf = brute_force_poa(g, cap)
    except Exception as exc:  # no NE / zero optimum are verdicts here, not crashes
        bf = None
        notes.append(f"brute force failed: {exc}")
    bound = None
    if with_bound:
        try:
            bound = generalized_poa([g]).bound
        except Exception as exc:
            notes.append(f"generalized bound failed: {exc}")
    resources_ok = len(g.resources) <= 2 * g.type_set.n
    if bf is None:
        ratio_ok = False
    elif inst.construction == SINGLE_CYCLE:
        ratio_ok = bf >= inst.declared_poa
    else:
        ratio_ok = bf == inst.declared_poa
    if not ratio_ok:
        notes.append(f"declared {inst.declared_poa} vs brute force {bf}")
    if not nash:
        notes.append("equilibrium allocation admits a profitable deviation")
    passed = nash and ratio_ok and resources_ok
    return VerificationReport(nash, player_costs, indifferent, bf, bound, resources_ok, passed, notes)

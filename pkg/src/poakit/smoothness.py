"""Smoothness certificates for explicit games.

For a list of cost-minimization games the best bound ``lam/(1-mu)`` is found
through the substitution ``nu = 1/lam``, ``rho = (1-mu)/lam``, which turns
each pairwise inequality into a linear constraint in (nu, rho):

    generalized:  C(a') - rho C(a) + nu [sum_i J_i(a) - sum_i J_i(a'_i, a_-i)] >= 0
    traditional:  C(a') - rho C(a) + nu [C(a)         - sum_i J_i(a'_i, a_-i)] >= 0

The welfare analog substitutes ``s = 1/(1+mu)``, ``b = lam/(1+mu)``:

    b W(a') - s [sum_i U_i(a'_i, a_-i) - sum_i U_i(a)] <= W(a)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, NamedTuple, Sequence

from . import lp
from .errors import CapExceeded, HypothesisViolated, NoFiniteBound, NoPureNash, PoAError, ValidationError, VerificationFailed
from .game import ExplicitGame, Verdict
from .poa import canonical_point
from .scalar import RATIONAL, format_scalar

PAIR_CAP = 10 ** 6

TRADITIONAL = "traditional"
GENERALIZED = "generalized"
COST_MIN = "cost-min"
WELFARE_MAX = "welfare-max"


@dataclass
class SmoothnessCertificate:
    mode: str
    direction: str
    lam: Any
    mu: Any
    nu: Any
    rho: Any
    bound: Any
    attained: bool
    binding: list = field(default_factory=list)

    def to_json(self) -> dict:
        opt = lambda v: None if v is None else format_scalar(v)  # noqa: E731
        return {
            "mode": self.mode,
            "direction": self.direction,
            "lambda": opt(self.lam),
            "mu": opt(self.mu),
            "nu": opt(self.nu),
            "rho": opt(self.rho),
            "bound": opt(self.bound),
            "attained": self.attained,
            "binding": [[g, list(a), list(b)] for g, a, b in self.binding],
        }


class _Tables(NamedTuple):
    profiles: list
    cost: list        # C(a)
    local_sum: list   # sum_i J_i(a)
    dev_sum: Callable  # (p, q) -> sum_i J_i(a'_i, a_-i) with a = profiles[p], a' = profiles[q]


def _tables(g: ExplicitGame, cap: int) -> _Tables:
    if g.n_profiles ** 2 > cap:
        raise CapExceeded(f"{g.n_profiles ** 2} allocation pairs exceed the cap {cap}")
    profiles = list(g.allocations())
    loads = [g.loads(a) for a in profiles]
    cost = [g.cost_at(ld) for ld in loads]
    local_sum = [sum((g.local_cost(i, a, ld) for i in range(g.n)), Fraction(0))
                 for a, ld in zip(profiles, loads)]
    # the deviation sum only depends on (a, player, action), so tabulate that
    dev = [[[g.deviation_cost(i, k, a, ld) for k in range(len(g.actions[i]))] for i in range(g.n)]
           for a, ld in zip(profiles, loads)]

    def dev_sum(p, q):
        a_prime = profiles[q]
        return sum((dev[p][i][a_prime[i]] for i in range(g.n)), Fraction(0))

    return _Tables(profiles, cost, local_sum, dev_sum)


def _cost_rows(games, mode, cap):
    """All pair constraints as (label, coef_nu, coef_rho, rhs) in ``<=`` form."""
    rows = []
    for gi, g in enumerate(games):
        tab = _tables(g, cap)
        if mode == TRADITIONAL:
            for p, a in enumerate(tab.profiles):
                if tab.local_sum[p] < tab.cost[p]:
                    raise HypothesisViolated(
                        f"game {gi}: sum of local costs is below the system cost", (gi, a))
        m = len(tab.profiles)
        for p in range(m):
            base = tab.local_sum[p] if mode == GENERALIZED else tab.cost[p]
            for q in range(m):
                gap = base - tab.dev_sum(p, q)
                rows.append(((gi, tab.profiles[p], tab.profiles[q]), -gap, tab.cost[p], tab.cost[q]))
    return rows


def _solve_pair_lp(rows, arithmetic):
    """Maximize rho over deduplicated pair rows; returns (problem, solution)."""
    problem = lp.LPProblem([0, 1], lower=[0, None])
    seen = {}
    for label, c_nu, c_rho, rhs in rows:
        key = (c_nu, c_rho, rhs)
        if key not in seen:
            seen[key] = len(problem.rows)
            problem.add_row([c_nu, c_rho], lp.LE, rhs, label)
    return problem, lp.solve(problem, arithmetic)


def _binding_pairs(rows, nu, rho):
    return [label for label, c_nu, c_rho, rhs in rows if c_nu * nu + c_rho * rho == rhs]


def _cost_certificate(games, mode, cap, arithmetic):
    if not games:
        raise ValidationError("need at least one game")
    rows = _cost_rows(games, mode, cap)
    problem, sol = _solve_pair_lp(rows, arithmetic)
    if sol.status is lp.Status.UNBOUNDED:
        # rho is unbounded above: the inequalities certify every ratio down to zero
        return SmoothnessCertificate(mode, COST_MIN, None, None, None, None, Fraction(0), False)
    if not sol.optimal:
        raise PoAError(f"smoothness LP is {sol.status.value}")
    nu, rho, attained = canonical_point(problem, sol, arithmetic)
    if rho <= 0:
        raise NoFiniteBound(f"optimal rho = {rho}; no finite {mode} smoothness bound")
    lam = mu = None
    if attained:
        lam, mu = 1 / nu, 1 - rho / nu
    return SmoothnessCertificate(mode, COST_MIN, lam, mu, nu, rho, 1 / rho, attained,
                                 _binding_pairs(rows, nu, rho))


def robust_poa(games: Sequence[ExplicitGame], *, cap: int = PAIR_CAP,
               arithmetic: str = RATIONAL) -> SmoothnessCertificate:
    """Best traditional smoothness bound; requires sum_i J_i(a) >= C(a) everywhere."""
    return _cost_certificate(list(games), TRADITIONAL, cap, arithmetic)


def generalized_poa(games: Sequence[ExplicitGame], *, cap: int = PAIR_CAP,
                    arithmetic: str = RATIONAL) -> SmoothnessCertificate:
    """Best generalized smoothness bound; no covering condition on the local costs."""
    return _cost_certificate(list(games), GENERALIZED, cap, arithmetic)


def _pair_violations(g: ExplicitGame, lam, mu, mode, cap):
    tab = _tables(g, cap)
    bad = []
    for p, a in enumerate(tab.profiles):
        for q, a_prime in enumerate(tab.profiles):
            lhs = tab.dev_sum(p, q)
            if mode == GENERALIZED:
                lhs = lhs - tab.local_sum[p] + tab.cost[p]
            if lhs > lam * tab.cost[q] + mu * tab.cost[p]:
                bad.append((a, a_prime))
    return tab, bad


def check_generalized_smooth(g: ExplicitGame, lam, mu, *, cap: int = PAIR_CAP) -> Verdict:
    """True iff the generalized (lam, mu) inequality holds for every ordered pair."""
    _, bad = _pair_violations(g, lam, mu, GENERALIZED, cap)
    return Verdict(not bad, bad or None)


def check_smooth(g: ExplicitGame, lam, mu, *, cap: int = PAIR_CAP) -> Verdict:
    """Traditional (lam, mu)-smoothness, including the covering condition."""
    tab, bad = _pair_violations(g, lam, mu, TRADITIONAL, cap)
    uncovered = [a for a, s, c in zip(tab.profiles, tab.local_sum, tab.cost) if s < c]
    if uncovered:
        return Verdict(False, {"uncovered": uncovered, "pairs": bad})
    return Verdict(not bad, bad or None)


class GapReport(NamedTuple):
    gamma: Fraction
    rpoa: Fraction
    gpoa: Fraction
    attained: bool   # the traditional bound is reached by some finite (lam, mu)


def theorem1_gap(g: ExplicitGame, *, cap: int = PAIR_CAP) -> GapReport:
    """Covering factor ``gamma = min_a sum_i J_i(a) / C(a)`` and both bounds.

    Requires ``sum_i J_i(a) > C(a)`` for every allocation.  When the
    traditional bound is attained by a finite (lam*, mu*), checks that the
    generalized bound lies strictly below it and below ``lam*/(gamma - mu*)``.
    Otherwise the traditional infimum is only approached as mu -> -inf and the
    two bounds may coincide (a game with a single allocation is the simplest
    case: both are 1).
    """
    gamma = None
    for a in g.allocations():
        total = sum(g.local_costs(a), Fraction(0))
        cost = g.system_cost(a)
        if total <= cost:
            raise HypothesisViolated("sum of local costs does not exceed the system cost", a)
        if cost > 0:
            ratio = total / cost
            gamma = ratio if gamma is None else min(gamma, ratio)
    if gamma is None:
        raise HypothesisViolated("system cost is zero everywhere", None)
    robust = robust_poa([g], cap=cap)
    general = generalized_poa([g], cap=cap)
    if general.bound > robust.bound:
        raise VerificationFailed("generalized bound exceeds the traditional bound", (robust, general))
    if robust.attained:
        if not general.bound < robust.bound:
            raise VerificationFailed("generalized bound is not below the traditional bound", (robust, general))
        if general.bound > robust.lam / (gamma - robust.mu):
            raise VerificationFailed("generalized bound exceeds lam*/(gamma - mu*)", (robust, general))
    return GapReport(gamma, robust.bound, general.bound, robust.attained)


# --------------------------------------------------------------------------
# welfare maximization


@dataclass
class WelfareGame:
    """Tabulated welfare game: ``welfare[a]`` and ``utilities[a][i]`` for every allocation."""

    action_counts: tuple
    welfare: dict
    utilities: dict

    def __post_init__(self):
        self.action_counts = tuple(self.action_counts)
        for a in self.allocations():
            if a not in self.welfare or a not in self.utilities:
                raise ValidationError(f"welfare tables miss allocation {a}")
            if len(self.utilities[a]) != self.n:
                raise ValidationError(f"utilities at {a} have wrong length")

    @property
    def n(self) -> int:
        return len(self.action_counts)

    @property
    def n_profiles(self) -> int:
        return math.prod(self.action_counts)

    def allocations(self):
        return itertools.product(*(range(k) for k in self.action_counts))

    def deviation_utility(self, i: int, k: int, a) -> Any:
        b = list(a)
        b[i] = k
        return self.utilities[tuple(b)][i]

    @classmethod
    def from_resource_game(cls, g: ExplicitGame) -> "WelfareGame":
        """Read ``v_r c(load)`` as welfare produced and ``v_r f(load)`` as each user's utility."""
        welfare, utilities = {}, {}
        for a in g.allocations():
            welfare[a] = g.system_cost(a)
            utilities[a] = tuple(g.local_costs(a))
        return cls(tuple(len(x) for x in g.actions), welfare, utilities)


def welfare_nash(wg: WelfareGame) -> list:
    out = []
    for a in wg.allocations():
        u = wg.utilities[a]
        if all(wg.deviation_utility(i, k, a) <= u[i]
               for i in range(wg.n) for k in range(wg.action_counts[i])):
            out.append(a)
    return out


def welfare_brute_force_poa(wg: WelfareGame) -> Fraction:
    """Worst equilibrium welfare over the best welfare."""
    ne = welfare_nash(wg)
    if not ne:
        raise NoPureNash("the welfare game has no pure Nash equilibrium")
    best = max(wg.welfare.values())
    if best <= 0:
        raise ValidationError("maximum welfare must be positive")
    return min(wg.welfare[a] for a in ne) / best


def welfare_generalized_poa(games: Sequence[WelfareGame], *, cap: int = PAIR_CAP,
                            arithmetic: str = RATIONAL) -> SmoothnessCertificate:
    """Largest ``lam/(1+mu)`` certified by the generalized welfare inequality."""
    games = list(games)
    if not games:
        raise ValidationError("need at least one game")
    if not any(w > 0 for wg in games for w in wg.welfare.values()):
        raise ValidationError("welfare must be positive somewhere")
    rows = []
    for gi, wg in enumerate(games):
        if wg.n_profiles ** 2 > cap:
            raise CapExceeded(f"{wg.n_profiles ** 2} allocation pairs exceed the cap {cap}")
        profiles = list(wg.allocations())
        for a in profiles:
            base = sum(wg.utilities[a], Fraction(0))
            for a_prime in profiles:
                dev = sum((wg.deviation_utility(i, a_prime[i], a) for i in range(wg.n)), Fraction(0))
                # b W(a') - s (dev - base) <= W(a)
                rows.append(((gi, a, a_prime), -(dev - base), wg.welfare[a_prime], wg.welfare[a]))
    problem, sol = _solve_pair_lp(rows, arithmetic)
    if not sol.optimal:
        raise PoAError(f"welfare smoothness LP is {sol.status.value}")
    s, b, attained = canonical_point(problem, sol, arithmetic)
    if b <= 0:
        raise NoFiniteBound("no (lambda, mu) with a positive welfare bound")
    lam = mu = None
    if attained:
        lam, mu = b / s, 1 / s - 1
    return SmoothnessCertificate(GENERALIZED, WELFARE_MAX, lam, mu, s, b, b, attained,
                                 _binding_pairs(rows, s, b))


def check_welfare_generalized_smooth(wg: WelfareGame, lam, mu) -> Verdict:
    bad = []
    for a in wg.allocations():
        base = sum(wg.utilities[a], Fraction(0))
        for a_prime in wg.allocations():
            dev = sum((wg.deviation_utility(i, a_prime[i], a) for i in range(wg.n)), Fraction(0))
            if dev - base + wg.welfare[a] < lam * wg.welfare[a_prime] - mu * wg.welfare[a]:
                bad.append((a, a_prime))
    return Verdict(not bad, bad or None)

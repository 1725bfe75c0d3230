"""Random instances shared by the property and acceptance suites."""

from __future__ import annotations

import random
from fractions import Fraction

from poakit.game import ExplicitGame
from poakit.resource_types import TypeSet, make_type


def rational(rng: random.Random, lo=1, hi=100, den=10) -> Fraction:
    """Uniform-ish positive rational in (0, hi/den]."""
    return Fraction(rng.randint(lo, hi), den)


def random_type(rng, name, n, lo=1):
    return make_type(name, n, [rational(rng, lo) for _ in range(n)], [rational(rng, lo) for _ in range(n)])


def random_type_set(rng, n, m, lo=1) -> TypeSet:
    return TypeSet(n, tuple(random_type(rng, f"t{k}", n, lo) for k in range(m)))


def covering_type(rng, name, n, scale=Fraction(1), slack=False):
    """Type with ``x f(x) >= c(x)``: f = scale * c/x, plus a random nonnegative bump if ``slack``."""
    c = [rational(rng) for _ in range(n)]
    f = [scale * cx / x + (rational(rng, 0, 20) if slack else 0) for x, cx in enumerate(c, start=1)]
    return make_type(name, n, c, f)


def random_actions(rng, players, n_resources, max_actions):
    actions = []
    for _ in range(players):
        acts = set()
        for _ in range(rng.randint(1, max_actions)):
            size = rng.randint(1, n_resources)
            acts.add(frozenset(rng.sample(range(n_resources), size)))
        actions.append(tuple(sorted(acts, key=sorted)))
    return tuple(actions)


def random_game(rng, types: TypeSet, players=None, max_resources=5, max_actions=3) -> ExplicitGame:
    """Every action is nonempty and every value positive, so every allocation has positive cost
    whenever the cost curves are positive."""
    players = players or rng.randint(1, types.n)
    n_resources = rng.randint(1, max_resources)
    resources = tuple((rng.randrange(len(types)), rational(rng, 1, 50)) for _ in range(n_resources))
    return ExplicitGame(types, resources, random_actions(rng, players, n_resources, max_actions))


def covering_game(rng, n=3, scale=Fraction(1), slack=False, **kw) -> ExplicitGame:
    m = rng.randint(1, 2)
    types = TypeSet(n, tuple(covering_type(rng, f"t{k}", n, scale, slack) for k in range(m)))
    return random_game(rng, types, **kw)

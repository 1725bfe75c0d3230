"""Dense two-phase simplex with Bland's rule, exact over Fractions or in binary64.

Every LP is a maximization with rows ``a . x (<=|>=|==) b`` and optional
per-variable bounds.  The LPs in this package are tall (a couple of variables,
thousands of rows), so by default the tableau is built for whichever of the
primal or its dual is smaller; both routes share one standard-form kernel and
recover the other side's solution from the final basis.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from .errors import NumericOverflow, ValidationError
from .scalar import FLOAT, FLOAT_TOL, RATIONAL, check_arithmetic, convert

log = logging.getLogger(__name__)

LE, GE, EQ = "<=", ">=", "=="
RELATIONS = (LE, GE, EQ)

DEFAULT_MAX_BITS = 1 << 16
MAX_PIVOTS = 200_000

_bit_limit = contextvars.ContextVar("bit_limit", default=DEFAULT_MAX_BITS)
_CONTEXT = object()


@contextlib.contextmanager
def bit_limit(bits: Optional[int]):
    """Override the rational denominator limit for every solve in this block (None: no limit)."""
    token = _bit_limit.set(bits)
    try:
        yield
    finally:
        _bit_limit.reset(token)


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class Row:
    coeffs: Sequence[Any]
    relation: str
    rhs: Any
    label: Any = None


@dataclass
class LPProblem:
    """``maximize objective . x`` subject to ``rows`` and variable bounds.

    Bounds default to free; ``lower[j] = 0`` makes variable ``j`` nonnegative.
    """

    objective: Sequence[Any]
    rows: list[Row] = field(default_factory=list)
    lower: Optional[list[Any]] = None
    upper: Optional[list[Any]] = None

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def add_row(self, coeffs, relation, rhs, label=None) -> None:
        self.rows.append(Row(list(coeffs), relation, rhs, label))

    def validate(self) -> None:
        n = self.n_vars
        if n < 1:
            raise ValidationError("LP needs at least one variable")
        for i, row in enumerate(self.rows):
            if len(row.coeffs) != n:
                raise ValidationError(
                    f"row {i} ({row.label!r}) has {len(row.coeffs)} coefficients, expected {n}")
            if row.relation not in RELATIONS:
                raise ValidationError(f"row {i} has unknown relation {row.relation!r}")
        for name, bounds in (("lower", self.lower), ("upper", self.upper)):
            if bounds is not None and len(bounds) != n:
                raise ValidationError(f"{name} bounds have length {len(bounds)}, expected {n}")

    def bounds(self, j: int):
        lo = None if self.lower is None else self.lower[j]
        hi = None if self.upper is None else self.upper[j]
        return lo, hi


@dataclass
class LPSolution:
    status: Status
    primal: Optional[list] = None
    dual: Optional[list] = None
    objective: Any = None
    binding: list = field(default_factory=list)
    binding_rows: list[int] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# --------------------------------------------------------------------------
# standard-form kernel: minimize c.y  s.t.  A y = b, y >= 0


class _Tableau:
    def __init__(self, A, b, c, zero, eps, max_bits):
        self.m = len(b)
        self.N = len(c)
        self.zero = zero
        self.eps = eps
        self.max_bits = max_bits
        self.flip = []
        self.T = []
        width = self.N + self.m + 1
        for r in range(self.m):
            sign = -1 if b[r] < 0 else 1
            self.flip.append(sign)
            row = [sign * v for v in A[r]] + [zero] * self.m + [sign * b[r]]
            row[self.N + r] = zero + 1
            assert len(row) == width
            self.T.append(row)
        self.basis = [self.N + r for r in range(self.m)]
        self.c = list(c)
        self.d = []
        self.pivots = 0

    def _price(self, cost):
        d = list(cost) + [self.zero]
        for r, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.T[r]
                for k in range(len(d)):
                    if row[k]:
                        d[k] -= cb * row[k]
        self.d = d

    def _pivot(self, p, e):
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise RuntimeError("simplex exceeded pivot limit")
        prow = self.T[p]
        piv = prow[e]
        prow = [v / piv for v in prow]
        prow[e] = self.zero + 1
        self.T[p] = prow
        nz = [k for k, v in enumerate(prow) if v]
        for r, row in enumerate(self.T):
            if r == p:
                continue
            f = row[e]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
                row[e] = self.zero
        f = self.d[e]
        if f:
            for k in nz:
                self.d[k] -= f * prow[k]
            self.d[e] = self.zero
        if self.eps:
            tiny = self.eps * 1e-3
            for row in self.T:
                for k in nz:
                    if -tiny < row[k] < tiny:
                        row[k] = 0.0
        elif self.max_bits:
            for row in self.T:
                if row[-1].denominator.bit_length() > self.max_bits:
                    raise NumericOverflow(
                        f"rational denominator exceeded {self.max_bits} bits; retry with float arithmetic")
        log.debug("pivot %d: row %d, column %d leaves %d", self.pivots, p, e, self.basis[p])
        self.basis[p] = e

    def _run(self, ncols):
        eps = self.eps
        while True:
            e = next((k for k in range(ncols) if self.d[k] < -eps), None)
            if e is None:
                return Status.OPTIMAL
            best = None
            for r, row in enumerate(self.T):
                a = row[e]
                if a > eps:
                    key = (row[-1] / a, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return Status.UNBOUNDED
            self._pivot(best[1], e)

    def solve(self):
        N, m = self.N, self.m
        phase1 = [self.zero] * N + [self.zero + 1] * m
        self._price(phase1)
        self._run(N + m)
        infeas = -self.d[-1]
        if infeas > self.eps:
            return Status.INFEASIBLE
        for r in range(m):
            if self.basis[r] >= N:
                row = self.T[r]
                k = next((k for k in range(N) if abs(row[k]) > self.eps), None)
                if k is not None:
                    self._pivot(r, k)
        self._price(self.c + [self.zero] * m)
        return self._run(N)

    def primal(self):
        y = [self.zero] * self.N
        for r, bv in enumerate(self.basis):
            if bv < self.N:
                y[bv] = self.T[r][-1]
        return y

    def multipliers(self):
        return [-self.flip[r] * self.d[self.N + r] for r in range(self.m)]


def _standard(A, b, c, zero, eps, max_bits):
    tab = _Tableau(A, b, c, zero, eps, max_bits)
    status = tab.solve()
    log.debug("standard-form LP %dx%d: %s after %d pivots", tab.m, tab.N, status.value, tab.pivots)
    if status is not Status.OPTIMAL:
        return status, None, None
    return status, tab.primal(), tab.multipliers()


# --------------------------------------------------------------------------
# routes


def _all_rows(problem, conv):
    """Problem rows followed by rows expressing finite bounds, all converted."""
    rows = [(list(map(conv, r.coeffs)), r.relation, conv(r.rhs)) for r in problem.rows]
    n = problem.n_vars
    for j in range(n):
        lo, hi = problem.bounds(j)
        unit = [conv(0)] * n
        unit[j] = conv(1)
        if lo is not None:
            rows.append((unit, GE, conv(lo)))
        if hi is not None:
            rows.append((list(unit), LE, conv(hi)))
    return rows


def _via_dual(problem, conv, zero, eps, max_bits):
    n = problem.n_vars
    c = [conv(v) for v in problem.objective]
    rows = _all_rows(problem, conv)
    # columns of the dual: (row index, sign applied to the row)
    cols = []
    for i, (a, rel, _) in enumerate(rows):
        if rel == LE:
            cols.append((i, 1))
        elif rel == GE:
            cols.append((i, -1))
        else:
            cols.append((i, 1))
            cols.append((i, -1))
    A = [[s * rows[i][0][j] for i, s in cols] for j in range(n)]
    cost = [s * rows[i][2] for i, s in cols]
    status, y, pi = _standard(A, c, cost, zero, eps, max_bits)
    if status is Status.UNBOUNDED:
        return Status.INFEASIBLE, None, None
    if status is Status.INFEASIBLE:
        probe, _, _ = _standard(A, [zero] * n, cost, zero, eps, max_bits)
        if probe is Status.UNBOUNDED:
            return Status.INFEASIBLE, None, None
        return Status.UNBOUNDED, None, None
    duals = [zero] * len(rows)
    for (i, s), v in zip(cols, y):
        duals[i] += s * v
    return Status.OPTIMAL, pi, duals[: len(problem.rows)]


def _via_primal(problem, conv, zero, eps, max_bits):
    n = problem.n_vars
    one = zero + 1
    # x_j = shift_j + sum(coef * y_col)
    shift = [zero] * n
    expand = []
    extra_rows = []
    ncol = 0
    for j in range(n):
        lo, hi = problem.bounds(j)
        if lo is not None:
            shift[j] = conv(lo)
            expand.append([(ncol, one)])
            if hi is not None:
                extra_rows.append(({ncol: one}, LE, conv(hi) - conv(lo)))
            ncol += 1
        elif hi is not None:
            shift[j] = conv(hi)
            expand.append([(ncol, -one)])
            ncol += 1
        else:
            expand.append([(ncol, one), (ncol + 1, -one)])
            ncol += 2
    sparse_rows = []
    for r in problem.rows:
        a = [conv(v) for v in r.coeffs]
        coeffs = {}
        for j, aj in enumerate(a):
            if aj:
                for col, co in expand[j]:
                    coeffs[col] = coeffs.get(col, zero) + aj * co
        rhs = conv(r.rhs) - sum((aj * s for aj, s in zip(a, shift)), zero)
        sparse_rows.append((coeffs, r.relation, rhs))
    sparse_rows.extend(extra_rows)
    slack_of = {}
    for i, (_, rel, _) in enumerate(sparse_rows):
        if rel != EQ:
            slack_of[i] = ncol
            ncol += 1
    A = []
    b = []
    for i, (coeffs, rel, rhs) in enumerate(sparse_rows):
        row = [zero] * ncol
        for col, v in coeffs.items():
            row[col] = v
        if rel == LE:
            row[slack_of[i]] = one
        elif rel == GE:
            row[slack_of[i]] = -one
        A.append(row)
        b.append(rhs)
    cost = [zero] * ncol
    for j, cj in enumerate(problem.objective):
        cj = conv(cj)
        for col, co in expand[j]:
            cost[col] -= cj * co
    status, y, pi = _standard(A, b, cost, zero, eps, max_bits)
    if status is not Status.OPTIMAL:
        return status, None, None
    x = []
    for j in range(n):
        x.append(shift[j] + sum((co * y[col] for col, co in expand[j]), zero))
    duals = [-v for v in pi[: len(problem.rows)]]
    return Status.OPTIMAL, x, duals


def solve(problem: LPProblem, arithmetic: str = RATIONAL, *, route: str = "auto",
          max_bits: Any = _CONTEXT, tol: float = FLOAT_TOL) -> LPSolution:
    """Solve ``problem`` and return primal values, row duals and binding rows.

    ``route`` picks which tableau is built: ``"primal"``, ``"dual"`` or
    ``"auto"`` (the one with fewer tableau rows).  Duals follow the usual
    maximization convention: nonnegative on ``<=`` rows, nonpositive on
    ``>=`` rows, free on equalities.  ``max_bits`` defaults to the limit set
    by :func:`bit_limit`.
    """
    check_arithmetic(arithmetic)
    problem.validate()
    if max_bits is _CONTEXT:
        max_bits = _bit_limit.get()
    if arithmetic == FLOAT:
        conv, zero, eps = float, 0.0, tol
    else:
        conv, zero, eps = (lambda v: convert(v)), Fraction(0), 0
    if route == "auto":
        n_bound_rows = sum((lo is not None) + (hi is not None)
                           for lo, hi in map(problem.bounds, range(problem.n_vars)))
        route = "dual" if len(problem.rows) + n_bound_rows > problem.n_vars else "primal"
    if route == "dual":
        status, x, duals = _via_dual(problem, conv, zero, eps, max_bits)
    elif route == "primal":
        status, x, duals = _via_primal(problem, conv, zero, eps, max_bits)
    else:
        raise ValidationError(f"unknown route {route!r}")
    if status is not Status.OPTIMAL:
        return LPSolution(status)
    objective = sum((conv(cj) * xj for cj, xj in zip(problem.objective, x)), zero)
    binding_rows = []
    for i, row in enumerate(problem.rows):
        lhs = sum((conv(a) * xj for a, xj in zip(row.coeffs, x)), zero)
        rhs = conv(row.rhs)
        if abs(lhs - rhs) <= eps * (1 + abs(rhs)):
            binding_rows.append(i)
    return LPSolution(
        Status.OPTIMAL,
        primal=x,
        dual=duals,
        objective=objective,
        binding=[problem.rows[i].label for i in binding_rows],
        binding_rows=binding_rows,
    )


def row_slack(problem: LPProblem, solution: LPSolution, i: int):
    """Signed slack of row ``i`` at the solution (>= 0 means satisfied)."""
    row = problem.rows[i]
    lhs = sum(a * x for a, x in zip(row.coeffs, solution.primal))
    if row.relation == GE:
        return lhs - row.rhs
    if row.relation == LE:
        return row.rhs - lhs
    return -abs(lhs - row.rhs)

"""Exact rational-arithmetic linear programming.

Everything here runs on `fractions.Fraction`; there is no floating point
anywhere in the package.  The solver is a dense two-phase primal simplex
with Bland's pivoting rule, which terminates even on the highly degenerate
programs produced by configuration LPs.  Speed is a non-goal; exactness and
determinism are the contract.

Conventions
-----------
* Programs are maximizations over nonnegative variables.
* Constraint relations are the strings "<=", ">=", "=".
* Dual values are reported in the original row orientation: rows with
  relation "<=" get duals >= 0, rows with ">=" get duals <= 0, equality rows
  are free.  For every optimal result, primal feasibility, dual feasibility
  and exact strong duality (c.x == y.b) are re-checked before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import MalformedLP, SizeLimit

Rat = Fraction

LE = "<="
GE = ">="
EQ = "="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

MAX_VARIABLES = 200_000

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class LinearProgram:
    """max objective . x  subject to the given rows, x >= 0."""

    objective: tuple[Fraction, ...]
    constraints: tuple[tuple[tuple[Fraction, ...], str, Fraction], ...]

    def __post_init__(self):
        width = len(self.objective)
        if width > MAX_VARIABLES:
            raise SizeLimit(f"{width} variables exceeds the {MAX_VARIABLES} cap")
        for idx, (coeffs, relation, _rhs) in enumerate(self.constraints):
            if len(coeffs) != width:
                raise MalformedLP(f"row {idx} has width {len(coeffs)}, expected {width}")
            if relation not in (LE, GE, EQ):
                raise MalformedLP(f"row {idx} has unknown relation {relation!r}")


@dataclass(frozen=True)
class LPSolution:
    status: str
    primal: tuple[Fraction, ...] | None
    dual: tuple[Fraction, ...] | None
    objective_value: Fraction | None


def make_lp(objective, constraints) -> LinearProgram:
    """Build a LinearProgram from plain lists of ints/Fractions."""
    obj = tuple(Fraction(c) for c in objective)
    rows = tuple(
        (tuple(Fraction(a) for a in coeffs), relation, Fraction(rhs))
        for coeffs, relation, rhs in constraints
    )
    return LinearProgram(obj, rows)


def _pivot(tableau, obj, row, col):
    """Pivot the tableau (rows of length ncols+1, rhs last) on (row, col)."""
    pivrow = tableau[row]
    inv = _ONE / pivrow[col]
    if inv != _ONE:
        tableau[row] = pivrow = [v * inv for v in pivrow]
    width = len(pivrow)
    for r, other in enumerate(tableau):
        if r == row:
            continue
        factor = other[col]
        if factor:
            tableau[r] = [other[k] - factor * pivrow[k] for k in range(width)]
    factor = obj[col]
    if factor:
        for k in range(width):
            obj[k] -= factor * pivrow[k]


def _reduced_costs(tableau, basis, costs, ncols):
    """Objective row c_j - z_j plus the current value in the last slot."""
    obj = [costs[j] for j in range(ncols)] + [_ZERO]
    for r, row in enumerate(tableau):
        cb = costs[basis[r]]
        if cb:
            for k in range(ncols + 1):
                obj[k] -= cb * row[k]
    return obj


def _run_simplex(tableau, basis, obj):
    """Bland-rule simplex to optimality; returns OPTIMAL or UNBOUNDED."""
    ncols = len(obj) - 1
    while True:
        entering = -1
        for j in range(ncols):
            if obj[j] > 0:
                entering = j
                break
        if entering < 0:
            return OPTIMAL
        leaving = -1
        best_ratio = None
        for r, row in enumerate(tableau):
            coeff = row[entering]
            if coeff > 0:
                ratio = row[-1] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = r
        if leaving < 0:
            return UNBOUNDED
        _pivot(tableau, obj, leaving, entering)
        basis[leaving] = entering


def _solve_dual(columns, rhs):
    """Solve B^T y = c_B exactly by Gaussian elimination.

    `columns` is the list of basis columns (each a list over rows); `rhs` is
    c_B.  Returns y indexed by row.
    """
    size = len(rhs)
    aug = [[columns[k][r] for r in range(size)] + [rhs[k]] for k in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = _ONE / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [aug[r][k] - factor * aug[col][k] for k in range(size + 1)]
    return [aug[r][-1] for r in range(size)]


def _check_certificates(lp, primal, dual, value):
    n = len(lp.objective)
    assert all(x >= 0 for x in primal), "primal negativity"
    for (coeffs, relation, rhs), y in zip(lp.constraints, dual):
        lhs = sum((coeffs[j] * primal[j] for j in range(n)), _ZERO)
        if relation == LE:
            assert lhs <= rhs and y >= 0, "primal/dual sign violation on <= row"
        elif relation == GE:
            assert lhs >= rhs and y <= 0, "primal/dual sign violation on >= row"
        else:
            assert lhs == rhs, "equality row violated"
    for j in range(n):
        col = sum(
            (coeffs[j] * y for (coeffs, _rel, _rhs), y in zip(lp.constraints, dual)),
            _ZERO,
        )
        assert col >= lp.objective[j], "dual infeasibility"
    dual_value = sum(
        (rhs * y for (_c, _rel, rhs), y in zip(lp.constraints, dual)), _ZERO
    )
    assert dual_value == value, "strong duality gap"


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Exact optimum of a maximization LP over nonnegative variables.

    Returns status optimal (with primal, dual and value), infeasible, or
    unbounded.  Deterministic: Bland's rule fixes every pivot choice.
    """
    n = len(lp.objective)
    m = len(lp.constraints)

    # Standard form: rhs >= 0, one slack per <=, one surplus per >=,
    # artificials for >= and = rows.
    rows = []
    flipped = []
    for coeffs, relation, rhs in lp.constraints:
        if rhs < 0:
            rows.append(([-a for a in coeffs], _flip(relation), -rhs))
            flipped.append(True)
        else:
            rows.append((list(coeffs), relation, rhs))
            flipped.append(False)

    n_slack = sum(1 for _c, rel, _b in rows if rel in (LE, GE))
    slack_cols = {}
    art_rows = [i for i, (_c, rel, _b) in enumerate(rows) if rel in (GE, EQ)]
    n_art = len(art_rows)
    ncols = n + n_slack + n_art

    tableau = []
    basis = []
    slack_at = n
    art_at = n + n_slack
    for i, (coeffs, relation, rhs) in enumerate(rows):
        row = coeffs + [_ZERO] * (n_slack + n_art) + [rhs]
        if relation == LE:
            row[slack_at] = _ONE
            slack_cols[i] = slack_at
            basis.append(slack_at)
            slack_at += 1
        elif relation == GE:
            row[slack_at] = -_ONE
            slack_cols[i] = slack_at
            slack_at += 1
            row[art_at] = _ONE
            basis.append(art_at)
            art_at += 1
        else:
            row[art_at] = _ONE
            basis.append(art_at)
            art_at += 1
        tableau.append(row)

    kept = list(range(m))

    if n_art:
        costs = [_ZERO] * ncols
        for j in range(n + n_slack, ncols):
            costs[j] = -_ONE
        obj = _reduced_costs(tableau, basis, costs, ncols)
        status = _run_simplex(tableau, basis, obj)
        assert status == OPTIMAL, "phase 1 cannot be unbounded"
        if obj[-1] != 0:
            return LPSolution(INFEASIBLE, None, None, None)
        # Pivot leftover artificials out of the basis; an all-zero row means
        # the constraint was redundant and is dropped.
        r = 0
        while r < len(tableau):
            if basis[r] >= n + n_slack:
                col = next(
                    (j for j in range(n + n_slack) if tableau[r][j] != 0), None
                )
                if col is None:
                    del tableau[r]
                    del basis[r]
                    del kept[r]
                    continue
                _pivot(tableau, obj, r, col)
                basis[r] = col
            r += 1
        tableau = [row[: n + n_slack] + [row[-1]] for row in tableau]
        ncols = n + n_slack

    costs = list(lp.objective) + [_ZERO] * (ncols - n)
    obj = _reduced_costs(tableau, basis, costs, ncols)
    status = _run_simplex(tableau, basis, obj)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, None, None, None)

    primal = [_ZERO] * n
    for r, b in enumerate(basis):
        if b < n:
            primal[b] = tableau[r][-1]
    value = sum((lp.objective[j] * primal[j] for j in range(n)), _ZERO)

    # Dual from the final basis: solve B^T y = c_B over the kept rows using
    # the original standard-form columns, then undo row flips.
    dual = [_ZERO] * m
    if kept:
        columns = []
        for b in basis:
            if b < n:
                col = [rows[i][0][b] for i in kept]
            else:
                col = [_ZERO] * len(kept)
                owner = next(i for i, c in slack_cols.items() if c == b)
                if owner in kept:
                    col[kept.index(owner)] = _ONE if rows[owner][1] == LE else -_ONE
            columns.append(col)
        y = _solve_dual(columns, [costs[b] for b in basis])
        for pos, i in enumerate(kept):
            dual[i] = -y[pos] if flipped[i] else y[pos]

    _check_certificates(lp, primal, dual, value)
    return LPSolution(OPTIMAL, tuple(primal), tuple(dual), value)


def _flip(relation: str) -> str:
    if relation == LE:
        return GE
    if relation == GE:
        return LE
    return EQ

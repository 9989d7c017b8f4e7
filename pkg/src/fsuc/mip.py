"""Mixed-integer problems with optional rotated-cone rows, and their solver.

A cone row encodes x*y >= z^2 with x, y >= 0, where x, y, z are affine
expressions of problem variables.  Cones are enforced by supporting
hyperplane (outer-approximation) cuts around a mixed-integer linear solve;
the returned solution satisfies every cone row nonlinearly within the
feasibility tolerance.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

INF = float("inf")

# Seed tangent ratios x/y for upfront cone cuts (scale-free: the cone is
# homogeneous, so only the ratio matters).
_SEED_RATIOS = (0.04, 0.2, 1.0, 5.0, 25.0)
_MAX_CUTS_PER_CONE = 200
_MAX_ROUNDS = 60


class NumericalError(RuntimeError):
    """The underlying LP/MILP engine failed beyond retry."""


@dataclass(frozen=True)
class LinExpr:
    """Affine expression: sum(coeffs[v] * v) + const."""

    coeffs: dict
    const: float = 0.0

    def value(self, values: dict) -> float:
        return self.const + sum(c * values[v] for v, c in self.coeffs.items())


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF
    integer: bool = False
    # Rounding heuristics fix higher-priority integer groups first; counts
    # linked to them by equality rows (starts/stops) then settle on their own.
    priority: int = 0


@dataclass(frozen=True)
class LinRow:
    name: str
    coeffs: dict
    sense: str  # '<=', '>=' or '='
    rhs: float


@dataclass(frozen=True)
class ConeRow:
    """x*y >= z^2 with x, y >= 0."""

    name: str
    x: LinExpr
    y: LinExpr
    z: LinExpr

    def violation(self, values: dict) -> float:
        """Positive when the point is outside the cone (SOC residual)."""
        x, y, z = self.x.value(values), self.y.value(values), self.z.value(values)
        return math.hypot(2.0 * z, x - y) - (x + y)


class MipProblem:
    """A minimization problem over linear and rotated-cone rows.

    Treated as immutable once handed to ``solve``.
    """

    def __init__(self):
        self.variables: list[Variable] = []
        self._index: dict[str, int] = {}
        self.rows: list[LinRow] = []
        self.cones: list[ConeRow] = []
        self.objective: dict[str, float] = {}
        self.obj_const: float = 0.0

    def add_variable(self, name, lb=0.0, ub=INF, integer=False, priority=0) -> str:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        if lb > ub:
            raise ValueError(f"{name}: lb {lb} > ub {ub}")
        self._index[name] = len(self.variables)
        self.variables.append(
            Variable(name, float(lb), float(ub), bool(integer), int(priority)))
        return name

    def add_row(self, name, coeffs, sense, rhs) -> None:
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad sense {sense!r}")
        self._check_refs(name, coeffs)
        self.rows.append(LinRow(name, dict(coeffs), sense, float(rhs)))

    def add_cone(self, name, x: LinExpr, y: LinExpr, z: LinExpr) -> None:
        for e in (x, y, z):
            self._check_refs(name, e.coeffs)
        self.cones.append(ConeRow(name, x, y, z))

    def set_objective(self, coeffs, const=0.0) -> None:
        self._check_refs("objective", coeffs)
        self.objective = dict(coeffs)
        self.obj_const = float(const)

    def add_objective_term(self, var, coef) -> None:
        self._check_refs("objective", {var: coef})
        self.objective[var] = self.objective.get(var, 0.0) + coef

    def _check_refs(self, where, coeffs):
        for v in coeffs:
            if v not in self._index:
                raise ValueError(f"{where}: unknown variable {v!r}")

    @property
    def n_integer(self) -> int:
        return sum(v.integer for v in self.variables)

    def relaxed(self) -> "MipProblem":
        """Copy with integrality dropped (LP relaxation of the linear part)."""
        q = MipProblem()
        for v in self.variables:
            q.add_variable(v.name, v.lb, v.ub, integer=False)
        q.rows = list(self.rows)
        q.cones = list(self.cones)
        q.objective = dict(self.objective)
        q.obj_const = self.obj_const
        return q


@dataclass(frozen=True)
class SolveStats:
    nodes: int = 0
    cuts: int = 0
    wall_time: float = 0.0
    rounds: int = 0


@dataclass(frozen=True)
class Solution:
    status: str  # 'optimal' | 'feasible-gap' | 'infeasible' | 'unbounded' | 'limit'
    objective: float
    values: dict
    mip_gap: float
    stats: SolveStats = field(default_factory=SolveStats)

    def __getitem__(self, name):
        return self.values[name]


def _cone_cut(cone: ConeRow, values: dict):
    """Supporting hyperplane separating ``values`` from the cone, or None.

    Uses the SOC form f(x,y,z) = ||(2z, x-y)|| - (x+y) <= 0; f is convex and
    positively homogeneous, so the gradient cut grad.p <= 0 is valid for
    every cone point.
    """
    x0 = cone.x.value(values)
    y0 = cone.y.value(values)
    z0 = cone.z.value(values)
    r = math.hypot(2.0 * z0, x0 - y0)
    if r < 1e-12:
        return None
    gx = (x0 - y0) / r - 1.0
    gy = (y0 - x0) / r - 1.0
    gz = 4.0 * z0 / r
    coeffs: dict[str, float] = {}
    rhs = 0.0
    for g, expr in ((gx, cone.x), (gy, cone.y), (gz, cone.z)):
        rhs -= g * expr.const
        for v, c in expr.coeffs.items():
            coeffs[v] = coeffs.get(v, 0.0) + g * c
    return coeffs, rhs


def _seed_cuts(cone: ConeRow):
    """Tangent cuts at fixed ratio points on the z > 0 side of the cone."""
    cuts = []
    for t in _SEED_RATIOS:
        point = {"__x": t, "__y": 1.0 / t, "__z": 1.0}
        fake = ConeRow(cone.name,
                       LinExpr({"__x": 1.0}), LinExpr({"__y": 1.0}), LinExpr({"__z": 1.0}))
        cut = _cone_cut(fake, point)
        gx = cut[0].get("__x", 0.0)
        gy = cut[0].get("__y", 0.0)
        gz = cut[0].get("__z", 0.0)
        coeffs: dict[str, float] = {}
        rhs = 0.0
        for g, expr in ((gx, cone.x), (gy, cone.y), (gz, cone.z)):
            rhs -= g * expr.const
            for v, c in expr.coeffs.items():
                coeffs[v] = coeffs.get(v, 0.0) + g * c
        cuts.append((coeffs, rhs))
    return cuts


class _Workspace:
    """Mutable solve state: constraint pool (base rows + cuts) and LP engine.

    Base rows and global cut rows are shared by every branch-and-bound node;
    a node differs only in its variable bounds.  The LP engine is scipy's
    HiGHS ``linprog``, which is deterministic for identical inputs.
    """

    def __init__(self, p: MipProblem, feas_tol: float):
        self.p = p
        self.feas_tol = feas_tol
        self.n = len(p.variables)
        self.names = [v.name for v in p.variables]
        self.index = {v.name: i for i, v in enumerate(p.variables)}
        self.int_idx = np.array([i for i, v in enumerate(p.variables) if v.integer],
                                dtype=int)
        self.int_priority = np.array([v.priority for v in p.variables
                                      if v.integer], dtype=int)
        self.lb = np.array([v.lb for v in p.variables])
        self.ub = np.array([v.ub for v in p.variables])
        self.c = np.zeros(self.n)
        for v, coef in p.objective.items():
            self.c[self.index[v]] = coef

        self.rows_i, self.cols_i, self.data = [], [], []
        self.lo, self.hi = [], []
        self._matrix = None
        for row in p.rows:
            self.push_row(row.coeffs, row.sense, row.rhs)
        self.n_cuts = 0
        self.cuts_per_cone = {cone.name: 0 for cone in p.cones}
        for cone in p.cones:
            self.push_row(cone.x.coeffs, ">=", -cone.x.const)
            self.push_row(cone.y.coeffs, ">=", -cone.y.const)
            for coeffs, rhs in _seed_cuts(cone):
                self.push_row(coeffs, "<=", rhs)
                self.n_cuts += 1
        self.lp_calls = 0

    def push_row(self, coeffs, sense, rhs):
        r = len(self.lo)
        for v, coef in coeffs.items():
            if coef != 0.0:
                self.rows_i.append(r)
                self.cols_i.append(self.index[v])
                self.data.append(coef)
        if sense == "<=":
            self.lo.append(-INF); self.hi.append(rhs)
        elif sense == ">=":
            self.lo.append(rhs); self.hi.append(INF)
        else:
            self.lo.append(rhs); self.hi.append(rhs)
        self._matrix = None

    def add_cut(self, cone: ConeRow, values: dict) -> bool:
        cut = _cone_cut(cone, values)
        if cut is None:
            return False
        self.push_row(cut[0], "<=", cut[1])
        self.cuts_per_cone[cone.name] += 1
        self.n_cuts += 1
        return True

    def _pool(self):
        if self._matrix is None:
            A = sparse.csc_matrix((self.data, (self.rows_i, self.cols_i)),
                                  shape=(len(self.lo), self.n))
            self._matrix = (A, np.array(self.lo), np.array(self.hi))
        return self._matrix

    def solve_lp(self, lb, ub):
        """LP over the pooled rows with node-specific variable bounds."""
        A, lo, hi = self._pool()
        res = self._milp(A, lo, hi, np.zeros(self.n), Bounds(lb, ub),
                         {"presolve": True})
        if res.status == 4:
            raise NumericalError(res.message)
        return res

    def solve_mip(self, gap_tol, time_limit=None):
        """Integer solve over the pooled rows (the large-instance engine)."""
        A, lo, hi = self._pool()
        integrality = np.zeros(self.n)
        integrality[self.int_idx] = 1
        options = {"presolve": True, "mip_rel_gap": float(gap_tol)}
        if time_limit is not None:
            options["time_limit"] = max(time_limit, 0.05)
        res = self._milp(A, lo, hi, integrality, Bounds(self.lb, self.ub),
                         options)
        if res.status == 4:
            raise NumericalError(res.message)
        return res

    def _milp(self, A, lo, hi, integrality, bounds, options):
        self.lp_calls += 1
        res = milp(self.c, constraints=LinearConstraint(A, lo, hi),
                   integrality=integrality, bounds=bounds, options=options)
        if res.status in (2, 4) and options.get("presolve", True):
            # HiGHS presolve occasionally misdeclares feasible instances
            # infeasible; confirm verdicts with presolve disabled.
            self.lp_calls += 1
            res = milp(self.c, constraints=LinearConstraint(A, lo, hi),
                       integrality=integrality, bounds=bounds,
                       options={**options, "presolve": False})
        return res

    def violated_cones(self, values: dict):
        out = []
        for cone in self.p.cones:
            viol = cone.violation(values)
            scale = max(1.0, abs(cone.x.value(values)) + abs(cone.y.value(values)))
            if viol > self.feas_tol * scale:
                out.append(cone)
        return out

    def fractional(self, x: np.ndarray):
        """(index, fractionality) of the most fractional integer variable."""
        if len(self.int_idx) == 0:
            return None
        xi = x[self.int_idx]
        frac = np.abs(xi - np.round(xi))
        k = int(np.argmax(frac))  # ties resolve to the lowest index
        if frac[k] <= self.feas_tol:
            return None
        return int(self.int_idx[k]), float(frac[k])


def _node_lp_with_cones(ws: _Workspace, lb, ub, budget_rounds: int = 25):
    """Solve a node LP, adding cone cuts until clean or the budget runs out."""
    for _ in range(budget_rounds):
        res = ws.solve_lp(lb, ub)
        if res.status != 0 or not ws.p.cones:
            return res
        values = dict(zip(ws.names, res.x))
        violated = [c for c in ws.violated_cones(values)
                    if ws.cuts_per_cone[c.name] < _MAX_CUTS_PER_CONE]
        if not violated:
            return res
        for cone in violated:
            ws.add_cut(cone, values)
    return ws.solve_lp(lb, ub)


def _dive_heuristic(ws: _Workspace, x: np.ndarray, node_lb, node_ub,
                    mode: str = "ceil", max_rounds: int = 20):
    """Rounding dive: a cheap incumbent probe.

    Each round fixes the currently fractional integer variables of the
    highest priority present and re-solves; lower-priority counts linked to
    them through equality rows settle on their own in later rounds.  The
    ceiling is the safe side for covering rows; ``mode='near'`` rounds to
    nearest instead and falls back to the ceiling once on infeasibility.
    """
    lb, ub = node_lb.copy(), node_ub.copy()
    res = None
    ceiling = mode == "ceil"
    for _ in range(max_rounds):
        xi = x[ws.int_idx]
        frac_mask = np.abs(xi - np.round(xi)) > ws.feas_tol
        if not frac_mask.any():
            break
        top = ws.int_priority[frac_mask].max()
        pick = frac_mask & (ws.int_priority == top)
        sel = ws.int_idx[pick]
        xs = x[sel]
        if ceiling:
            target = np.ceil(xs - ws.feas_tol)
            saved = None
        else:
            target = np.round(xs)
            saved = (lb.copy(), ub.copy())
        target = np.minimum(np.maximum(target, lb[sel]), ub[sel])
        lb[sel] = target
        ub[sel] = target
        res = _node_lp_with_cones(ws, lb, ub)
        if res.status != 0:
            if saved is None:
                return None
            ceiling = True  # repair: redo this round on the safe side
            lb, ub = saved
            target = np.ceil(xs - ws.feas_tol)
            target = np.minimum(np.maximum(target, lb[sel]), ub[sel])
            lb[sel] = target
            ub[sel] = target
            res = _node_lp_with_cones(ws, lb, ub)
            if res.status != 0:
                return None
        x = res.x
    if res is None or ws.fractional(res.x) is not None:
        return None
    values = dict(zip(ws.names, res.x))
    if ws.violated_cones(values):
        return None
    return res


# Instances with more integer variables than this skip the internal tree
# search and hand the integer part to the bundled HiGHS engine (cone rows
# stay with the outer-approximation loop here either way).
_SMALL_INT_LIMIT = 100


def _finish(p, ws, t0, status, best_obj, best_x, best_bound, explored, gap_tol):
    stats = SolveStats(nodes=explored, cuts=ws.n_cuts,
                       wall_time=time.perf_counter() - t0, rounds=ws.lp_calls)
    if best_x is None:
        return Solution(status if status != "optimal" else "infeasible",
                        math.nan, {}, math.inf, stats)
    values = dict(zip(ws.names, best_x))
    for v in p.variables:
        if v.integer:
            values[v.name] = float(round(values[v.name]))
    ref = max(1.0, abs(best_obj))
    gap = max(0.0, (best_obj - best_bound) / ref) if best_bound > -INF else math.inf
    if status == "limit" and gap <= gap_tol:
        status = "feasible-gap"
    return Solution(status=status, objective=best_obj + p.obj_const,
                    values=values, mip_gap=float(gap), stats=stats)


def _branch_and_bound(ws, root_res, best_obj, best_x, gap_tol, timed_out, log):
    """Best-bound tree search; most-fractional branching, lowest-index ties."""
    abs_eps = 1e-9
    heap = [(float(root_res.fun), 0, ws.lb.copy(), ws.ub.copy())]
    seq = 1
    explored = 0
    status = "optimal"
    best_bound = -INF

    while heap:
        bound, _, lb, ub = heapq.heappop(heap)
        best_bound = max(best_bound, bound)
        if best_obj < INF and bound >= best_obj - abs_eps * max(1.0, abs(best_obj)):
            status = "optimal"
            break  # best-bound order: nothing left that can improve
        if timed_out():
            status = "limit"
            break
        res = _node_lp_with_cones(ws, lb, ub) if explored else root_res
        explored += 1
        if res.status != 0:
            continue  # infeasible subproblem
        node_obj = float(res.fun)
        if best_obj < INF and node_obj >= best_obj - abs_eps * max(1.0, abs(best_obj)):
            continue
        frac = ws.fractional(res.x)
        if log is not None:
            log(f"node {explored}: bound={node_obj:.6f} incumbent="
                f"{best_obj if best_obj < INF else float('nan'):.6f} "
                f"cuts={ws.n_cuts} frac={frac}")
        if frac is None:
            values = dict(zip(ws.names, res.x))
            if ws.violated_cones(values):
                # Cut budget exhausted at an integral point: cannot certify.
                status = "limit"
                continue
            best_obj, best_x = node_obj, res.x.copy()
            continue
        if best_x is None and explored % 25 == 0:
            probe = _dive_heuristic(ws, res.x, lb, ub)
            if probe is not None and float(probe.fun) < best_obj:
                best_obj, best_x = float(probe.fun), probe.x.copy()
        # Early stop when the best open bound already certifies the gap.
        open_bound = min([node_obj] + [b for b, *_ in heap])
        if best_obj < INF and \
                best_obj - open_bound <= gap_tol * max(1.0, abs(best_obj)):
            best_bound = open_bound
            status = "optimal"
            break
        i, _ = frac
        v = res.x[i]
        lb_hi = lb.copy()
        lb_hi[i] = math.ceil(v)
        ub_lo = ub.copy()
        ub_lo[i] = math.floor(v)
        if lb_hi[i] <= ub[i]:
            heapq.heappush(heap, (node_obj, seq, lb_hi, ub)); seq += 1
        if ub_lo[i] >= lb[i]:
            heapq.heappush(heap, (node_obj, seq, lb, ub_lo)); seq += 1

    if not heap and status == "optimal" and best_x is not None:
        best_bound = best_obj  # tree exhausted: the incumbent is exact
    return status, best_obj, best_x, best_bound, explored


def _integer_engine(ws, best_obj, best_x, gap_tol, remaining, timed_out, log):
    """Outer-approximation loop around the bundled HiGHS integer solver."""
    status = "optimal"
    bound = -INF
    rounds = 0
    for rnd in range(_MAX_ROUNDS):
        if timed_out():
            status = "limit"
            break
        res = ws.solve_mip(gap_tol, remaining())
        rounds += 1
        if res.status == 2:
            return "infeasible", INF, None, INF, rounds
        if res.status == 3:
            return "unbounded", -INF, None, -INF, rounds
        if res.status == 1 and res.x is None:
            status = "limit"
            break
        obj = float(res.fun)
        dual = getattr(res, "mip_dual_bound", None)
        if dual is not None and math.isfinite(dual):
            bound = max(bound, float(dual))
        values = dict(zip(ws.names, res.x))
        violated = ws.violated_cones(values)
        if log is not None:
            log(f"round {rnd}: bound={obj:.6f} incumbent="
                f"{best_obj if best_obj < INF else float('nan'):.6f} "
                f"cuts={ws.n_cuts} violated={len(violated)}")
        if not violated:
            if obj < best_obj:
                best_obj, best_x = obj, res.x.copy()
            if res.status == 1:
                status = "limit"
            break
        uncapped = [c for c in violated
                    if ws.cuts_per_cone[c.name] < _MAX_CUTS_PER_CONE]
        if not uncapped:
            status = "limit"
            break
        for cone in uncapped:
            ws.add_cut(cone, values)
    else:
        status = "limit"
    return status, best_obj, best_x, bound, rounds


def solve(p: MipProblem, gap_tol: float = 0.0, feas_tol: float = 1e-6,
          time_limit: float | None = None, log=None) -> Solution:
    """Branch-and-bound over LP relaxations with outer-approximation cuts.

    The root relaxation is solved first, with lazy supporting-hyperplane
    cuts for the cone rows and rounding dives for an incumbent; when the
    root already certifies ``gap_tol`` the solve stops there.  Otherwise
    small instances go through the internal best-bound tree search
    (most-fractional branching, lowest-index ties) and large ones hand the
    integer part to the bundled HiGHS engine inside the same cut loop.
    Deterministic for identical inputs.  ``log`` receives one line per
    explored node or engine round.
    """
    t0 = time.perf_counter()
    ws = _Workspace(p, feas_tol)

    def remaining():
        if time_limit is None:
            return None
        return time_limit - (time.perf_counter() - t0)

    def timed_out():
        return time_limit is not None and remaining() <= 0.0

    root = _node_lp_with_cones(ws, ws.lb, ws.ub)
    if root.status == 3:
        return Solution("unbounded", -INF, {}, math.inf,
                        SolveStats(1, ws.n_cuts, time.perf_counter() - t0,
                                   ws.lp_calls))
    if root.status != 0:
        return Solution("infeasible", math.nan, {}, math.inf,
                        SolveStats(1, ws.n_cuts, time.perf_counter() - t0,
                                   ws.lp_calls))
    root_bound = float(root.fun)
    best_obj, best_x = INF, None

    def certified():
        return best_obj - root_bound <= gap_tol * max(1.0, abs(best_obj))

    if ws.fractional(root.x) is None:
        if not ws.violated_cones(dict(zip(ws.names, root.x))):
            best_obj, best_x = root_bound, root.x.copy()
    else:
        for mode in ("ceil", "near"):
            probe = _dive_heuristic(ws, root.x, ws.lb, ws.ub, mode)
            if probe is not None and float(probe.fun) < best_obj:
                best_obj, best_x = float(probe.fun), probe.x.copy()
            if best_x is not None and certified():
                break
    if log is not None:
        log(f"root: bound={root_bound:.6f} incumbent="
            f"{best_obj if best_obj < INF else float('nan'):.6f} "
            f"cuts={ws.n_cuts}")
    if best_x is not None and certified():
        return _finish(p, ws, t0, "optimal", best_obj, best_x, root_bound, 1,
                       gap_tol)

    if len(ws.int_idx) <= _SMALL_INT_LIMIT:
        status, best_obj, best_x, bound, explored = _branch_and_bound(
            ws, root, best_obj, best_x, gap_tol, timed_out, log)
    else:
        status, best_obj, best_x, bound, explored = _integer_engine(
            ws, best_obj, best_x, gap_tol, remaining, timed_out, log)
    if best_x is None and status == "limit":
        return Solution("limit", math.nan, {}, math.inf,
                        SolveStats(explored + 1, ws.n_cuts,
                                   time.perf_counter() - t0, ws.lp_calls))
    return _finish(p, ws, t0, status, best_obj, best_x,
                   max(bound, root_bound) if best_x is not None else bound,
                   explored + 1, gap_tol)


# ---------------------------------------------------------------------------
# Interchange export (fixed-format MPS, cone rows as comments + sidecar)
# ---------------------------------------------------------------------------

def _mps_num(v: float) -> str:
    return f"{v:.12g}"


def _aliases(items, prefix):
    return {item: f"{prefix}{i + 1:07d}" for i, item in enumerate(items)}


def export_interchange(p: MipProblem) -> str:
    """Emit the linear part as fixed-format MPS text; byte-stable.

    Row/column names are aliased to fixed-width identifiers (with a comment
    map) so the file stays within the 8-character fixed-format fields.
    Cone rows appear as '* CONE' comments; see ``export_cone_sidecar``.
    """
    col_alias = _aliases([v.name for v in p.variables], "C")
    row_alias = _aliases([r.name for r in p.rows], "R")
    sense_tag = {"<=": "L", ">=": "G", "=": "E"}

    out = ["NAME          FSUC"]
    for orig, alias in col_alias.items():
        out.append(f"* COL {alias} = {orig}")
    for orig, alias in row_alias.items():
        out.append(f"* ROW {alias} = {orig}")
    for cone in p.cones:
        out.append(f"* CONE {cone.name}: x*y >= z^2")
        for tag, expr in (("x", cone.x), ("y", cone.y), ("z", cone.z)):
            terms = " + ".join(f"{_mps_num(c)}*{col_alias[v]}"
                               for v, c in sorted(expr.coeffs.items()))
            out.append(f"*   {tag} = {terms or '0'} + {_mps_num(expr.const)}")

    out.append("ROWS")
    out.append(" N  OBJ")
    for r in p.rows:
        out.append(f" {sense_tag[r.sense]}  {row_alias[r.name]}")

    # Column-major coefficient map.
    by_col: dict[str, list] = {v.name: [] for v in p.variables}
    for v, coef in p.objective.items():
        by_col[v].append(("OBJ", coef))
    for r in p.rows:
        for v, coef in r.coeffs.items():
            by_col[v].append((row_alias[r.name], coef))

    out.append("COLUMNS")
    in_int = False
    marker = 0
    for v in p.variables:
        if v.integer != in_int:
            marker += 1
            tag = "'INTORG'" if v.integer else "'INTEND'"
            out.append(f"    MARKER{marker:04d}  'MARKER'                 {tag}")
            in_int = v.integer
        for row_name, coef in by_col[v.name]:
            out.append(f"    {col_alias[v.name]:<8}  {row_name:<8}  {_mps_num(coef)}")
    if in_int:
        marker += 1
        out.append(f"    MARKER{marker:04d}  'MARKER'                 'INTEND'")

    out.append("RHS")
    if p.obj_const:
        out.append(f"    RHS       OBJ       {_mps_num(-p.obj_const)}")
    for r in p.rows:
        if r.rhs:
            out.append(f"    RHS       {row_alias[r.name]:<8}  {_mps_num(r.rhs)}")

    out.append("BOUNDS")
    for v in p.variables:
        alias = col_alias[v.name]
        if v.lb == v.ub:
            out.append(f" FX BND       {alias:<8}  {_mps_num(v.lb)}")
            continue
        if v.lb == -INF and v.ub == INF:
            out.append(f" FR BND       {alias:<8}")
            continue
        if v.lb == -INF:
            out.append(f" MI BND       {alias:<8}")
        elif v.lb != 0.0 or v.integer:
            out.append(f" LO BND       {alias:<8}  {_mps_num(v.lb)}")
        if v.ub != INF:
            out.append(f" UP BND       {alias:<8}  {_mps_num(v.ub)}")
        elif v.integer:
            out.append(f" PL BND       {alias:<8}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def export_cone_sidecar(p: MipProblem) -> str:
    """Companion listing of (x, y, z) expressions for every cone row."""
    out = ["cone,term,expression"]
    for cone in p.cones:
        for tag, expr in (("x", cone.x), ("y", cone.y), ("z", cone.z)):
            terms = " + ".join(f"{_mps_num(c)}*{v}" for v, c in sorted(expr.coeffs.items()))
            out.append(f"{cone.name},{tag},{terms or '0'} + {_mps_num(expr.const)}")
    return "\n".join(out) + "\n"

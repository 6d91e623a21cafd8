"""Objective evaluation, feasibility checking, and an exact reference solver.

The solver is a depth-first branch-and-bound over requests in file order.
Each node decides one request: take it with one of its allowed cameras or
skip it.  The bound adds the weights of all undecided requests to the
current value, which is admissible because weights are non-negative.
Constraint violations are pruned incrementally; all constraint families are
monotone under taking more requests, so a violated partial selection can
never recover.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .instance import Assignment, Instance, VarRef

ONCE = "once"
PAIR = "pair"
TERNARY = "ternary"
CAPACITY = "capacity"

DEFAULT_NODE_BUDGET = 50_000_000


@dataclass(frozen=True)
class Violation:
    kind: str
    refs: tuple[VarRef, ...]
    slack_amount: int = 0


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[Violation, ...]

    def __post_init__(self) -> None:
        assert self.feasible == (not self.violations)


@dataclass(frozen=True)
class ExactResult:
    best_value: float
    best_assignment: Assignment
    nodes_explored: int
    proven_optimal: bool


def objective(inst: Instance, a: Assignment) -> float:
    """Total value of the selection, one weight term per taken (request, camera) pair."""
    return float(sum(inst.weight_of(ref.request_id) for ref in a.taken))


def check_feasible(inst: Instance, a: Assignment) -> FeasibilityReport:
    """Report every violated constraint of the selection."""
    taken = set(a.taken)
    for ref in taken:
        req = inst.request_by_id.get(ref.request_id)
        if req is None or ref.camera not in req.allowed_cameras:
            raise ValueError(f"assignment references invalid variable {ref}")
    violations: list[Violation] = []

    by_request: dict[int, list[VarRef]] = {}
    for ref in a.taken:
        by_request.setdefault(ref.request_id, []).append(ref)
    for rid in sorted(by_request):
        refs = by_request[rid]
        if len(refs) > 1:
            violations.append(Violation(ONCE, tuple(refs)))

    for pair in sorted(inst.binary_forbidden):
        if all(ref in taken for ref in pair):
            violations.append(Violation(PAIR, pair))
    for triple in sorted(inst.ternary_forbidden):
        if all(ref in taken for ref in triple):
            violations.append(Violation(TERNARY, triple))

    if inst.disk_capacity is not None:
        load = sum(inst.capacity_of(ref) for ref in taken)
        if load > inst.disk_capacity:
            offending = tuple(sorted(ref for ref in taken if inst.capacity_of(ref) > 0))
            violations.append(
                Violation(CAPACITY, offending, slack_amount=load - inst.disk_capacity)
            )

    return FeasibilityReport(feasible=not violations, violations=tuple(violations))


@dataclass
class _SearchState:
    nodes: int = 0
    best_value: float = 0.0
    best_taken: tuple[VarRef, ...] = ()
    exhausted: bool = False
    budget: int = DEFAULT_NODE_BUDGET
    # scratch, indexed by flattened variable id
    taken_mask: list[bool] = field(default_factory=list)
    taken_refs: list[VarRef] = field(default_factory=list)


def solve_exact(inst: Instance, node_budget: int = DEFAULT_NODE_BUDGET) -> ExactResult:
    """Exact maximum-value feasible selection via branch-and-bound.

    Returns the optimum with ``proven_optimal=True`` unless the node budget
    ran out, in which case the best incumbent found so far is returned.
    Ties between equal-value optima go to the first one found in
    depth-first order.
    """
    order = inst.variables
    index = inst.variable_index
    n_req = len(inst.requests)

    # per-request variable ids, ordered cameras ascending
    req_vars: list[list[int]] = []
    weights: list[float] = []
    pos = 0
    for req in inst.requests:
        ids = list(range(pos, pos + len(req.allowed_cameras)))
        req_vars.append(ids)
        weights.append(req.weight)
        pos += len(req.allowed_cameras)

    suffix = [0.0] * (n_req + 1)
    for k in range(n_req - 1, -1, -1):
        suffix[k] = suffix[k + 1] + weights[k]

    pair_partners: list[list[int]] = [[] for _ in order]
    for p, q in inst.binary_forbidden:
        pair_partners[index[p]].append(index[q])
        pair_partners[index[q]].append(index[p])
    triple_partners: list[list[tuple[int, int]]] = [[] for _ in order]
    for t in inst.ternary_forbidden:
        i, j, k = (index[r] for r in t)
        triple_partners[i].append((j, k))
        triple_partners[j].append((i, k))
        triple_partners[k].append((i, j))

    caps = [inst.capacity_of(ref) for ref in order]
    budget_c = inst.disk_capacity  # None: capacities ignored

    st = _SearchState(budget=node_budget)
    st.taken_mask = [False] * len(order)

    def descend(k: int, value: float, load: int) -> None:
        st.nodes += 1
        if st.nodes > st.budget:
            st.exhausted = True
            return
        if k == n_req:
            if value > st.best_value:
                st.best_value = value
                st.best_taken = tuple(st.taken_refs)
            return
        if value + suffix[k] <= st.best_value:
            return  # no completion can beat the incumbent
        for v in req_vars[k]:
            if any(st.taken_mask[u] for u in pair_partners[v]):
                continue
            if any(st.taken_mask[u] and st.taken_mask[w] for u, w in triple_partners[v]):
                continue
            if budget_c is not None and load + caps[v] > budget_c:
                continue
            st.taken_mask[v] = True
            st.taken_refs.append(order[v])
            descend(k + 1, value + weights[k], load + (caps[v] if budget_c is not None else 0))
            st.taken_refs.pop()
            st.taken_mask[v] = False
            if st.exhausted:
                return
        if not st.exhausted:
            descend(k + 1, value, load)

    descend(0, 0.0, 0)
    return ExactResult(
        best_value=st.best_value,
        best_assignment=Assignment(st.best_taken),
        nodes_explored=st.nodes,
        proven_optimal=not st.exhausted,
    )

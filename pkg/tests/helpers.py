"""Shared builders and independent oracles for the test suite.

The oracles here recompute results from first principles (full enumeration,
penalty polynomials written out directly) and deliberately do not share
code with the library paths they check.
"""

from __future__ import annotations

import numpy as np

from satplan import (
    Assignment,
    Instance,
    Request,
    VarRef,
    check_feasible,
    objective,
)

CAMERA_SUBSETS = [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]


def random_instance(
    rng: np.random.Generator,
    n_requests: int,
    stereo_prob: float = 0.25,
    n_pairs: int = 1,
    n_triples: int = 1,
    with_capacity: bool = False,
    max_weight: int = 10,
    name: str = "random",
) -> Instance:
    """Random valid instance with integer weights and capacities."""
    requests = []
    for rid in range(n_requests):
        weight = float(rng.integers(1, max_weight + 1))
        if rng.random() < stereo_prob:
            req = Request(id=rid, kind="stereo", weight=weight, allowed_cameras=(4,))
        else:
            cams = CAMERA_SUBSETS[rng.integers(0, len(CAMERA_SUBSETS))]
            req = Request(id=rid, kind="mono", weight=weight, allowed_cameras=cams)
        requests.append(req)

    variables = [
        VarRef(req.id, cam) for req in requests for cam in req.allowed_cameras
    ]

    def draw_constraints(arity: int, count: int):
        out = set()
        if len(variables) < arity:
            return out
        attempts = 0
        while len(out) < count and attempts < 50 * count:
            attempts += 1
            picks = rng.choice(len(variables), size=arity, replace=False)
            refs = tuple(sorted(variables[i] for i in picks))
            out.add(refs)
        return out

    pairs = draw_constraints(2, n_pairs)
    triples = draw_constraints(3, n_triples)

    disk = None
    if with_capacity:
        total = 0
        for req in requests:
            caps = {}
            for cam in req.allowed_cameras:
                if rng.random() < 0.7:
                    caps[cam] = int(rng.integers(0, 5))
            req_caps = Request(
                id=req.id,
                kind=req.kind,
                weight=req.weight,
                allowed_cameras=req.allowed_cameras,
                capacity_by_camera=caps,
            )
            requests[req.id] = req_caps
            total += max(caps.values(), default=0)
        disk = int(rng.integers(0, total + 1)) if total else 0

    return Instance(
        name=name,
        requests=tuple(requests),
        binary_forbidden=frozenset(pairs),
        ternary_forbidden=frozenset(triples),
        disk_capacity=disk,
    )


def acceptance_source() -> Instance:
    """Hand-authored 12-request instance used as the reduction source in
    the acceptance suite: mixed mono/stereo, pair and triple constraints,
    and a nonzero capacity entry on every request."""
    kinds = ["mono", "stereo", "mono", "mono", "stereo", "mono",
             "mono", "mono", "stereo", "mono", "mono", "mono"]
    cam_sets = [(1, 2), (4,), (1,), (2, 3), (4,), (1, 2, 3),
                (3,), (1, 3), (4,), (2,), (1, 2), (2, 3)]
    requests = tuple(
        Request(
            id=i,
            kind=kind,
            weight=float((i % 4) + 1),
            allowed_cameras=cams,
            capacity_by_camera={cams[0]: (i % 3) + 1},
        )
        for i, (kind, cams) in enumerate(zip(kinds, cam_sets))
    )
    V = VarRef
    triples = {
        (V(0, 1), V(2, 1), V(3, 2)),
        (V(1, 4), V(4, 4), V(5, 1)),
        (V(6, 3), V(7, 1), V(9, 2)),
        (V(2, 1), V(5, 2), V(10, 1)),
        (V(3, 3), V(8, 4), V(11, 2)),
    }
    pairs = {
        (V(0, 2), V(1, 4)),
        (V(2, 1), V(3, 2)),
        (V(5, 3), V(6, 3)),
        (V(7, 3), V(9, 2)),
        (V(10, 2), V(11, 3)),
    }
    return Instance(
        name="bench-src",
        requests=requests,
        binary_forbidden=frozenset(pairs),
        ternary_forbidden=frozenset(triples),
    )


def brute_force_best(inst: Instance) -> tuple[float, Assignment]:
    """Reference optimum by enumerating every decision bit vector."""
    n = len(inst.variables)
    best_value = 0.0
    best = Assignment.empty()
    for k in range(1 << n):
        bits = [(k >> i) & 1 for i in range(n)]
        a = Assignment.from_bits(inst, bits)
        if not check_feasible(inst, a).feasible:
            continue
        value = objective(inst, a)
        if value > best_value:
            best_value = value
            best = a
    return best_value, best


def reference_energy(inst: Instance, m: float, bits: np.ndarray) -> float:
    """Recompute the encoded energy of a full (decision + slack) bit vector
    straight from the penalty definitions, independent of the encoder."""
    index = inst.variable_index
    n = len(inst.variables)
    x = [int(b) for b in bits]

    energy = -sum(
        inst.weight_of(ref.request_id) * x[i] for i, ref in enumerate(inst.variables)
    )

    for req in inst.requests:
        ids = [index[VarRef(req.id, cam)] for cam in req.allowed_cameras]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                energy += m * x[ids[a]] * x[ids[b]]

    for p, q in inst.binary_forbidden:
        energy += m * x[index[p]] * x[index[q]]

    # ternary slack layout: one slack per distinct substituted pair, in
    # first-appearance order over canonically sorted triples
    slack_pos: dict[tuple[int, int], int] = {}
    for triple in sorted(inst.ternary_forbidden):
        ip, iq, ir = sorted(index[r] for r in triple)
        key = (iq, ir)
        if key not in slack_pos:
            slack_pos[key] = n + len(slack_pos)
        s = x[slack_pos[key]]
        energy += m * (x[ip] * s + x[iq] * x[ir] - 2 * x[iq] * s - 2 * x[ir] * s + 3 * s)

    if inst.disk_capacity is not None:
        loads = [
            (i, inst.capacity_of(ref))
            for i, ref in enumerate(inst.variables)
            if inst.capacity_of(ref) != 0
        ]
        if loads:
            cap = inst.disk_capacity
            digits = 0
            while 2**digits - 1 < cap:
                digits += 1
            base = n + len(slack_pos)
            total = sum(c * x[i] for i, c in loads)
            total += sum(2**d * x[base + d] for d in range(digits))
            energy += m * (total - cap) ** 2

    return float(energy)


def feasible_decision_mask(inst: Instance) -> np.ndarray:
    """Boolean mask over all 2^n decision vectors, vectorised."""
    index = inst.variable_index
    n = len(inst.variables)
    idx = np.arange(1 << n, dtype=np.uint32)

    def bit(i: int) -> np.ndarray:
        return (idx >> np.uint32(i)) & np.uint32(1)

    ok = np.ones(1 << n, dtype=bool)
    for req in inst.requests:
        ids = [index[VarRef(req.id, cam)] for cam in req.allowed_cameras]
        taken = sum(bit(i).astype(np.int64) for i in ids)
        ok &= taken <= 1
    for p, q in inst.binary_forbidden:
        ok &= ~((bit(index[p]) & bit(index[q])).astype(bool))
    for t in inst.ternary_forbidden:
        i, j, k = (index[r] for r in t)
        ok &= ~((bit(i) & bit(j) & bit(k)).astype(bool))
    if inst.disk_capacity is not None:
        load = np.zeros(1 << n, dtype=np.int64)
        for i, ref in enumerate(inst.variables):
            c = inst.capacity_of(ref)
            if c:
                load += c * bit(i).astype(np.int64)
        ok &= load <= inst.disk_capacity
    return ok

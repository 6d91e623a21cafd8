"""Penalty-based QUBO encoding of mission-planning instances, plus the Ising view.

The energy convention throughout is upper-triangular combined coefficients:

    E(x) = sum_{i <= j} c[i, j] * x_i * x_j + offset,      x in {0, 1}^N

which corresponds to the symmetric matrix with Q_ii = c[i, i] and
Q_ij = Q_ji = c[i, j] / 2.  Basis states are indexed little-endian: variable
``i`` is bit ``(k >> i) & 1`` of state ``k``.  All energy evaluators
(single vector, row batches, full 2^N tables) accumulate terms in one fixed
row-major order so that identical inputs produce bit-identical floats.

Encoding of an instance with penalty weight M (default: total weight + 1):

  * objective:   -w_i on the diagonal of every (request, camera) variable;
  * uniqueness:  M * x_a x_b for every camera pair of a request;
  * forbidden pairs:  M * x_p x_q, no slack;
  * forbidden triples:  the cubic M x_p x_q x_r reduced to quadratic with a
    single slack per substituted pair, M x_p s + M (x_q x_r - 2 x_q s
    - 2 x_r s + 3 s); triples sharing the substituted pair share the slack;
  * capacity:  M (sum c_p x_p + sum 2^{d-1} s_d - C)^2 with the fewest
    binary slack digits whose range reaches C, i.e. min D with 2^D - 1 >= C.

Decision variables occupy indices 0..n-1 in instance order; slacks follow,
ternary-pair slacks first (in order of first appearance), then capacity
digits.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

import numpy as np

from .instance import Assignment, Instance, VarRef


@dataclass(frozen=True)
class TernaryPairSlack:
    """Slack standing in for the product x_q * x_r of a reduced triple."""

    q: VarRef
    r: VarRef


@dataclass(frozen=True)
class CapacityBitSlack:
    """Binary digit d (1-based) of the capacity slack, coefficient 2^(d-1)."""

    d: int


SlackRef = Union[TernaryPairSlack, CapacityBitSlack]


@dataclass(frozen=True)
class VarRegistry:
    decision_vars: tuple[VarRef, ...]
    slack_vars: tuple[SlackRef, ...]

    @property
    def n(self) -> int:
        return len(self.decision_vars)

    @property
    def s(self) -> int:
        return len(self.slack_vars)

    @property
    def num_variables(self) -> int:
        return self.n + self.s


def capacity_slack_count(capacity: int) -> int:
    """Fewest binary digits D with 2^D - 1 >= capacity."""
    if capacity < 0:
        raise ValueError("capacity must be >= 0")
    d = 0
    while (1 << d) - 1 < capacity:
        d += 1
    return d


def _frozen_terms(coefficients: Mapping[tuple[int, int], float]):
    items = []
    for (i, j), v in coefficients.items():
        if i > j:
            i, j = j, i
        if v != 0.0:
            items.append((i, j, float(v)))
    items.sort(key=lambda t: (t[0], t[1]))
    rows = np.array([t[0] for t in items], dtype=np.int64)
    cols = np.array([t[1] for t in items], dtype=np.int64)
    vals = np.array([t[2] for t in items], dtype=np.float64)
    return rows, cols, vals


class Qubo:
    """Immutable quadratic form over decision + slack bits."""

    def __init__(
        self,
        coefficients: Mapping[tuple[int, int], float],
        *,
        offset: float = 0.0,
        penalty_m: float = 1.0,
        registry: VarRegistry | None = None,
        objective_diag: np.ndarray | None = None,
        num_variables: int | None = None,
    ):
        if penalty_m <= 0:
            raise ValueError("penalty_m must be positive")
        self._rows, self._cols, self._vals = _frozen_terms(coefficients)
        if registry is not None:
            nv = registry.num_variables
        elif num_variables is not None:
            nv = num_variables
        else:
            nv = int(self._cols.max()) + 1 if len(self._cols) else 0
        if len(self._cols) and int(self._cols.max()) >= nv:
            raise ValueError("coefficient index out of range")
        self.registry = registry
        self.offset = float(offset)
        self.penalty_m = float(penalty_m)
        self._nv = nv
        if objective_diag is None:
            objective_diag = np.zeros(nv)
        self._objective_diag = np.asarray(objective_diag, dtype=np.float64)

    @classmethod
    def from_coefficients(
        cls, coefficients: Mapping[tuple[int, int], float], offset: float = 0.0
    ) -> "Qubo":
        """Bare quadratic form with no instance attached (tests, experiments)."""
        return cls(coefficients, offset=offset)

    # -- shape ---------------------------------------------------------

    @property
    def num_variables(self) -> int:
        return self._nv

    @property
    def n(self) -> int:
        return self.registry.n if self.registry is not None else self._nv

    @property
    def s(self) -> int:
        return self.registry.s if self.registry is not None else 0

    def terms(self) -> Iterator[tuple[int, int, float]]:
        """Stored terms, row-major, i <= j, diagonal = linear coefficients."""
        for i, j, v in zip(self._rows, self._cols, self._vals):
            yield int(i), int(j), float(v)

    def num_terms(self) -> int:
        return len(self._vals)

    def linear_terms(self) -> np.ndarray:
        diag = np.zeros(self._nv)
        mask = self._rows == self._cols
        diag[self._rows[mask]] = self._vals[mask]
        return diag

    def interaction_matrix(self) -> np.ndarray:
        """Dense pairwise coefficients, combined convention, zero diagonal."""
        w = np.zeros((self._nv, self._nv))
        mask = self._rows != self._cols
        r, c, v = self._rows[mask], self._cols[mask], self._vals[mask]
        w[r, c] = v
        w[c, r] = v
        return w

    def to_dense(self) -> np.ndarray:
        """Symmetric matrix Q with x^T Q x + offset = energy."""
        q = self.interaction_matrix() / 2.0
        np.fill_diagonal(q, self.linear_terms())
        return q

    # -- energies ------------------------------------------------------

    def energy(self, bits) -> float:
        """x^T Q x + offset for one bit vector."""
        return float(self.energies(np.asarray(bits, dtype=np.uint8)[None, :])[0])

    def energies(self, bits) -> np.ndarray:
        """Energies of a (rows, num_variables) batch of bit vectors."""
        b = np.asarray(bits)
        if b.ndim != 2 or b.shape[1] != self._nv:
            raise ValueError(f"expected bit rows of length {self._nv}, got shape {b.shape}")
        b = b.astype(np.float64, copy=False)
        e = np.full(b.shape[0], self.offset)
        for i, j, v in zip(self._rows, self._cols, self._vals):
            if i == j:
                e += v * b[:, i]
            else:
                e += v * b[:, i] * b[:, j]
        return e

    def energy_table(self) -> np.ndarray:
        """Energies of all 2^N basis states, indexed little-endian."""
        nv = self._nv
        if nv > 26:
            raise ValueError(f"energy table over {nv} variables is too large")
        idx = np.arange(1 << nv, dtype=np.uint32)
        e = np.full(1 << nv, self.offset)
        for i, j, v in zip(self._rows, self._cols, self._vals):
            bi = (idx >> np.uint32(i)) & np.uint32(1)
            if i == j:
                e += v * bi
            else:
                e += v * (bi * ((idx >> np.uint32(j)) & np.uint32(1)))
        return e

    # -- conversions ---------------------------------------------------

    def decode(self, bits) -> Assignment:
        """Drop slack bits and map the first n components back to (request, camera) picks."""
        if self.registry is None:
            raise ValueError("this QUBO has no variable registry to decode against")
        b = np.asarray(bits)
        if b.shape != (self._nv,):
            raise ValueError(f"expected {self._nv} bits, got shape {b.shape}")
        taken = tuple(
            ref for ref, bit in zip(self.registry.decision_vars, b[: self.n]) if bit
        )
        return Assignment(taken)

    def to_ising(self) -> "IsingModel":
        """Equivalent +/-1-spin model via z_i = 1 - 2 x_i; energies match exactly."""
        h = np.zeros(self._nv)
        couplings: dict[tuple[int, int], float] = {}
        offset = self.offset
        for i, j, v in zip(self._rows, self._cols, self._vals):
            i, j = int(i), int(j)
            if i == j:
                h[i] -= v / 2.0
                offset += v / 2.0
            else:
                couplings[(i, j)] = couplings.get((i, j), 0.0) + v / 4.0
                h[i] -= v / 4.0
                h[j] -= v / 4.0
                offset += v / 4.0
        return IsingModel(h=h, couplings=couplings, offset=offset)

    # -- export --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "offset": self.offset,
            "m": self.penalty_m,
            "terms": [[i, j, v] for i, j, v in self.terms()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True) + "\n"


class IsingModel:
    """Spin model with on-site fields h, pair couplings J (counted once per
    pair, i < j), and a constant offset.

    ``energy_of_bits`` evaluates the same states as :meth:`Qubo.energy`
    through the substitution z_i = 1 - 2 x_i, so the two agree state by
    state.
    """

    def __init__(self, h, couplings: Mapping[tuple[int, int], float], offset: float = 0.0):
        self.h = np.asarray(h, dtype=np.float64)
        if self.h.ndim != 1:
            raise ValueError("h must be a vector")
        self._jr, self._jc, self._jv = _frozen_terms(couplings)
        if np.any(self._jr == self._jc):
            raise ValueError("couplings must have zero diagonal")
        if len(self._jc) and int(self._jc.max()) >= len(self.h):
            raise ValueError("coupling index out of range")
        self.offset = float(offset)

    @property
    def num_variables(self) -> int:
        return len(self.h)

    def j_terms(self) -> Iterator[tuple[int, int, float]]:
        for i, j, v in zip(self._jr, self._jc, self._jv):
            yield int(i), int(j), float(v)

    def energy_spins(self, spins) -> float:
        z = np.asarray(spins, dtype=np.float64)
        e = self.offset
        for i in range(len(self.h)):
            e += self.h[i] * z[i]
        for i, j, v in zip(self._jr, self._jc, self._jv):
            e += v * z[i] * z[j]
        return float(e)

    def energy_of_bits(self, bits) -> float:
        return float(self.energies_of_bits(np.asarray(bits, dtype=np.uint8)[None, :])[0])

    def energies_of_bits(self, bits) -> np.ndarray:
        b = np.asarray(bits)
        if b.ndim != 2 or b.shape[1] != len(self.h):
            raise ValueError(f"expected bit rows of length {len(self.h)}, got shape {b.shape}")
        z = 1.0 - 2.0 * b.astype(np.float64, copy=False)
        e = np.full(b.shape[0], self.offset)
        for i in range(len(self.h)):
            e += self.h[i] * z[:, i]
        for i, j, v in zip(self._jr, self._jc, self._jv):
            e += v * z[:, i] * z[:, j]
        return e

    def energy_table(self) -> np.ndarray:
        """Energies of all 2^N basis states (bit-indexed, little-endian)."""
        nv = len(self.h)
        if nv > 26:
            raise ValueError(f"energy table over {nv} variables is too large")
        idx = np.arange(1 << nv, dtype=np.uint32)
        e = np.full(1 << nv, self.offset)
        for i in range(nv):
            zi = 1.0 - 2.0 * ((idx >> np.uint32(i)) & np.uint32(1))
            e += self.h[i] * zi
        for i, j, v in zip(self._jr, self._jc, self._jv):
            zi = 1.0 - 2.0 * ((idx >> np.uint32(i)) & np.uint32(1))
            zj = 1.0 - 2.0 * ((idx >> np.uint32(j)) & np.uint32(1))
            e += v * (zi * zj)
        return e


def encode(inst: Instance, m: float | None = None) -> Qubo:
    """Build the penalty QUBO of an instance.

    ``m`` overrides the penalty magnitude; the default, total weight + 1,
    guarantees every infeasible selection costs more than any feasible one.
    """
    index = inst.variable_index
    order = inst.variables
    n = len(order)
    big_m = inst.total_weight + 1.0 if m is None else float(m)
    if big_m <= 0:
        raise ValueError("penalty magnitude must be positive")

    coeffs: dict[tuple[int, int], float] = {}

    def add(i: int, j: int, v: float) -> None:
        key = (i, j) if i <= j else (j, i)
        coeffs[key] = coeffs.get(key, 0.0) + v

    offset = 0.0

    # objective, negated for minimisation
    for v, ref in enumerate(order):
        w = inst.weight_of(ref.request_id)
        if w:
            add(v, v, -w)

    # each request at most once: pairwise products over its cameras
    for req in inst.requests:
        ids = [index[VarRef(req.id, cam)] for cam in req.allowed_cameras]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                add(ids[a], ids[b], big_m)

    # forbidden pairs
    for p, q in sorted(inst.binary_forbidden):
        add(index[p], index[q], big_m)

    # forbidden triples: reduce M x_p x_q x_r, substituting the two
    # largest-index variables and reusing one slack per substituted pair
    slack_refs: list[SlackRef] = []
    pair_slack: dict[tuple[int, int], int] = {}
    for triple in sorted(inst.ternary_forbidden):
        ip, iq, ir = sorted(index[ref] for ref in triple)
        key = (iq, ir)
        if key not in pair_slack:
            pair_slack[key] = n + len(slack_refs)
            slack_refs.append(TernaryPairSlack(q=order[iq], r=order[ir]))
        s = pair_slack[key]
        add(ip, s, big_m)
        add(iq, ir, big_m)
        add(iq, s, -2.0 * big_m)
        add(ir, s, -2.0 * big_m)
        add(s, s, 3.0 * big_m)

    # disk capacity: squared equality with binary slack digits
    if inst.disk_capacity is not None:
        loaded = [
            (v, float(inst.capacity_of(ref)))
            for v, ref in enumerate(order)
            if inst.capacity_of(ref) != 0
        ]
        if not loaded:
            warnings.warn(
                f"instance {inst.name!r} has a disk capacity but no request uses disk; "
                "capacity penalty omitted",
                stacklevel=2,
            )
        else:
            cap = inst.disk_capacity
            for d in range(1, capacity_slack_count(cap) + 1):
                loaded.append((n + len(slack_refs), float(2 ** (d - 1))))
                slack_refs.append(CapacityBitSlack(d=d))
            for u, au in loaded:
                add(u, u, big_m * (au * au - 2.0 * cap * au))
            for a in range(len(loaded)):
                ua, ca = loaded[a]
                for b in range(a + 1, len(loaded)):
                    ub, cb = loaded[b]
                    add(ua, ub, big_m * 2.0 * ca * cb)
            offset += big_m * float(cap) * float(cap)

    registry = VarRegistry(decision_vars=order, slack_vars=tuple(slack_refs))
    objective_diag = np.zeros(registry.num_variables)
    for v, ref in enumerate(order):
        objective_diag[v] = -inst.weight_of(ref.request_id)
    return Qubo(
        coeffs,
        offset=offset,
        penalty_m=big_m,
        registry=registry,
        objective_diag=objective_diag,
    )


def qubo_energy(q: Qubo, bits) -> float:
    return q.energy(bits)


def to_ising(q: Qubo) -> IsingModel:
    return q.to_ising()


def decode(q: Qubo, bits) -> Assignment:
    return q.decode(bits)


def min_slack_penalty(q: Qubo, decision_bits) -> float:
    """Minimum total penalty over all slack completions of the decision bits.

    Test oracle: subtracts the objective contribution, so a feasible
    selection scores exactly 0 and any violation scores at least the
    penalty magnitude.  Refuses more than 24 slack bits.
    """
    n, s = q.n, q.s
    dec = np.asarray(decision_bits, dtype=np.uint8)
    if dec.shape != (n,):
        raise ValueError(f"expected {n} decision bits, got shape {dec.shape}")
    if s > 24:
        raise ValueError("slack enumeration refuses more than 24 slack bits")
    rows = 1 << s
    bits = np.empty((rows, n + s), dtype=np.uint8)
    bits[:, :n] = dec
    slack_idx = np.arange(rows, dtype=np.uint32)
    for k in range(s):
        bits[:, n + k] = (slack_idx >> np.uint32(k)) & np.uint32(1)
    energies = q.energies(bits)
    objective_part = float(q._objective_diag[:n] @ dec)
    return float(energies.min() - objective_part)

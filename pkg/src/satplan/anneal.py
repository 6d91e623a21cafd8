"""Classical QPU stand-in: simulated annealing over QUBOs, plus brute force.

Each read is an independent single-spin-flip Metropolis chain with a
geometric inverse-temperature ramp.  Chains for all reads run in lockstep
as numpy arrays; flip energies come from cached local fields, and final
energies are recomputed from scratch so that stored values are exactly
reproducible with :meth:`satplan.qubo.Qubo.energy`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qubo import Qubo


@dataclass(frozen=True)
class AnnealSchedule:
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    restarts_per_read: int = 1

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if not (self.beta_end > self.beta_start > 0):
            raise ValueError("need beta_end > beta_start > 0")
        if self.restarts_per_read < 1:
            raise ValueError("restarts_per_read must be >= 1")


@dataclass(frozen=True)
class SampleEntry:
    bits: str  # '0'/'1' characters, variable 0 first
    energy: float
    count: int

    def bit_array(self) -> np.ndarray:
        return np.frombuffer(self.bits.encode("ascii"), dtype=np.uint8) - ord("0")


@dataclass(frozen=True)
class SampleSet:
    """Multiset of sampled bit vectors, lowest energy first."""

    entries: tuple[SampleEntry, ...]
    total_reads: int
    sampler_tag: str
    seed: int

    def __post_init__(self) -> None:
        if sum(e.count for e in self.entries) != self.total_reads:
            raise ValueError("entry counts must sum to total_reads")

    @classmethod
    def from_states(
        cls, states: np.ndarray, energies: np.ndarray, sampler_tag: str, seed: int
    ) -> "SampleSet":
        """Aggregate a (reads, num_variables) batch into unique entries."""
        tally: dict[str, tuple[float, int]] = {}
        for row, energy in zip(states, energies):
            key = "".join("1" if b else "0" for b in row)
            prev = tally.get(key)
            tally[key] = (float(energy), 1 if prev is None else prev[1] + 1)
        entries = tuple(
            SampleEntry(bits=key, energy=e, count=c)
            for key, (e, c) in sorted(tally.items(), key=lambda kv: (kv[1][0], kv[0]))
        )
        return cls(
            entries=entries,
            total_reads=int(states.shape[0]),
            sampler_tag=sampler_tag,
            seed=seed,
        )

    def best(self) -> SampleEntry:
        if not self.entries:
            raise ValueError("empty sample set")
        return self.entries[0]

    def to_json_dict(self) -> dict:
        return {
            "sampler": self.sampler_tag,
            "seed": self.seed,
            "reads": self.total_reads,
            "entries": [
                {"bits": e.bits, "energy": e.energy, "count": e.count} for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True) + "\n"


def sample_sa(
    q: Qubo,
    reads: int,
    sched: AnnealSchedule | None = None,
    seed: int = 0,
) -> SampleSet:
    """Draw ``reads`` annealed samples from the QUBO; deterministic per seed."""
    if reads < 1:
        raise ValueError("reads must be >= 1")
    sched = sched or AnnealSchedule()
    rng = np.random.default_rng(seed)
    nv = q.num_variables

    if nv == 0:
        states = np.zeros((reads, 0), dtype=np.uint8)
        return SampleSet.from_states(states, q.energies(states), "sa", seed)

    diag = q.linear_terms()
    w = q.interaction_matrix()
    betas = np.geomspace(sched.beta_start, sched.beta_end, sched.sweeps)

    best_states: np.ndarray | None = None
    best_energies: np.ndarray | None = None
    for _ in range(sched.restarts_per_read):
        states = rng.integers(0, 2, size=(reads, nv), dtype=np.uint8)
        x = states.astype(np.float64)
        fields = diag[None, :] + x @ w  # flip cost of var i is (1 - 2 x_i) * field_i
        for beta in betas:
            for i in range(nv):
                delta = (1.0 - 2.0 * x[:, i]) * fields[:, i]
                u = rng.random(reads)
                accept = delta <= 0.0
                hot = ~accept
                if hot.any():
                    accept[hot] = u[hot] < np.exp(-beta * delta[hot])
                if accept.any():
                    step = np.where(accept, 1.0 - 2.0 * x[:, i], 0.0)
                    x[:, i] += step
                    fields += step[:, None] * w[i][None, :]
        states = x.astype(np.uint8)
        energies = q.energies(states)
        if best_states is None:
            best_states, best_energies = states, energies
        else:
            improved = energies < best_energies
            best_states[improved] = states[improved]
            best_energies[improved] = energies[improved]

    return SampleSet.from_states(best_states, best_energies, "sa", seed)


def solve_exhaustive(q: Qubo) -> tuple[np.ndarray, float]:
    """Global minimiser by full enumeration; ties go to the lexicographically
    smallest bit vector (variable 0 first)."""
    nv = q.num_variables
    if nv > 24:
        raise ValueError(f"exhaustive enumeration limited to 24 variables, got {nv}")
    table = q.energy_table()
    best = table.min()
    candidates = np.flatnonzero(table == best)
    bits_of = lambda k: tuple((int(k) >> i) & 1 for i in range(nv))
    winner = min(candidates, key=bits_of)
    return np.array(bits_of(winner), dtype=np.uint8), float(best)

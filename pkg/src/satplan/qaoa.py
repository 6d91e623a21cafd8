"""Exact statevector simulation of the alternating cost/mixer ansatz.

The ansatz starts from the uniform superposition (ground state of the
transverse-field mixer sum_i X_i) and alternates, per layer, a diagonal
cost phase exp(-i * gamma * E_x) with a single-qubit mixer rotation
RX(2 * beta) on every qubit.  Basis states are indexed little-endian, the
same convention as the QUBO/Ising energy tables, so the diagonal phase is a
plain elementwise multiply against a precomputed energy table.

Parameter optimisation is local and derivative-free (COBYLA) with the best
evaluation tracked explicitly, so the reported value never exceeds the
value at the initial point.  ``run_schedule`` implements layer-wise
parameter fixing: the optimised 2*L parameters of the L-layer ansatz seed
the (L+1)-layer search together with gamma = beta = 0 for the new layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .anneal import SampleSet
from .qubo import IsingModel

MAX_QUBITS = 26

StateVector = np.ndarray


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas) or not self.gammas:
            raise ValueError("need equally many gammas and betas, at least one layer")

    @property
    def layers(self) -> int:
        return len(self.gammas)

    def extended(self, gamma: float = 0.0, beta: float = 0.0) -> "QaoaParams":
        return QaoaParams(self.gammas + (gamma,), self.betas + (beta,))

    @classmethod
    def from_flat(cls, x: Sequence[float]) -> "QaoaParams":
        half = len(x) // 2
        return cls(tuple(x[:half]), tuple(x[half:]))

    def to_flat(self) -> np.ndarray:
        return np.array(self.gammas + self.betas, dtype=np.float64)


@dataclass(frozen=True)
class OptimizerConfig:
    tolerance: float = 1e-6
    max_evals: int = 1000
    initial_step: float = 0.5

    def __post_init__(self) -> None:
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class LayerResult:
    layer: int
    params: QaoaParams
    expectation: float
    samples: SampleSet

    def to_json_dict(self) -> dict:
        doc = self.samples.to_json_dict()
        doc.update(
            layer=self.layer,
            gammas=list(self.params.gammas),
            betas=list(self.params.betas),
            expectation=self.expectation,
        )
        return doc


def _check_size(num_qubits: int) -> None:
    if num_qubits > MAX_QUBITS:
        raise ValueError(f"{num_qubits} qubits exceed the statevector limit of {MAX_QUBITS}")
    if num_qubits < 1:
        raise ValueError("need at least one qubit")


def uniform_state(num_qubits: int) -> StateVector:
    _check_size(num_qubits)
    dim = 1 << num_qubits
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)


def _apply_mixer(psi: StateVector, num_qubits: int, beta: float) -> StateVector:
    """RX(2*beta) on every qubit."""
    c = np.cos(beta)
    s = -1j * np.sin(beta)
    for qubit in range(num_qubits):
        stride = 1 << qubit
        view = psi.reshape(-1, 2, stride)
        a0 = view[:, 0, :].copy()
        a1 = view[:, 1, :]
        view[:, 0, :] = c * a0 + s * a1
        view[:, 1, :] = s * a0 + c * a1
    return psi


def apply_ansatz(
    ising: IsingModel, params: QaoaParams, energy_table: np.ndarray | None = None
) -> StateVector:
    """Prepare the layered ansatz state for the given cost model and angles."""
    nq = ising.num_variables
    _check_size(nq)
    if energy_table is None:
        energy_table = ising.energy_table()
    elif len(energy_table) != (1 << nq):
        raise ValueError("energy table size does not match the model")
    psi = uniform_state(nq)
    for gamma, beta in zip(params.gammas, params.betas):
        psi *= np.exp(-1j * gamma * energy_table)
        psi = _apply_mixer(psi, nq, beta)
    return psi


def expectation(
    ising: IsingModel, psi: StateVector, energy_table: np.ndarray | None = None
) -> float:
    """<psi| H |psi> including the constant offset, comparable to QUBO energies."""
    if energy_table is None:
        energy_table = ising.energy_table()
    if psi.shape != energy_table.shape:
        raise ValueError("state vector and energy table sizes differ")
    probs = np.abs(psi) ** 2
    return float(probs @ energy_table)


def sample_state(
    psi: StateVector, reads: int, seed: int, energy_table: np.ndarray, tag: str = "qaoa"
) -> SampleSet:
    """Draw bitstrings from |psi|^2 by inverse-CDF sampling."""
    if reads < 1:
        raise ValueError("reads must be >= 1")
    nq = int(np.log2(len(psi)))
    probs = np.abs(psi) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(psi), size=reads, p=probs)
    states = np.empty((reads, nq), dtype=np.uint8)
    for i in range(nq):
        states[:, i] = (picks >> i) & 1
    return SampleSet.from_states(states, energy_table[picks], tag, seed)


def optimize_layer(
    ising: IsingModel,
    init: QaoaParams,
    cfg: OptimizerConfig | None = None,
    energy_table: np.ndarray | None = None,
) -> tuple[QaoaParams, float]:
    """Local derivative-free minimisation of the ansatz expectation.

    Returns the best parameters seen over all evaluations, so the result is
    never worse than the initial point.
    """
    cfg = cfg or OptimizerConfig()
    if energy_table is None:
        energy_table = ising.energy_table()
    best_x = init.to_flat()
    best_val = expectation(ising, apply_ansatz(ising, init, energy_table), energy_table)

    def objective(x: np.ndarray) -> float:
        nonlocal best_x, best_val
        val = expectation(
            ising, apply_ansatz(ising, QaoaParams.from_flat(x), energy_table), energy_table
        )
        if val < best_val:
            best_val = val
            best_x = np.array(x)
        return val

    minimize(
        objective,
        init.to_flat(),
        method="COBYLA",
        tol=cfg.tolerance,
        options={"maxiter": cfg.max_evals, "rhobeg": cfg.initial_step},
    )
    return QaoaParams.from_flat(best_x), float(best_val)


def run_schedule(
    ising: IsingModel,
    max_layers: int,
    n_inits: int = 5,
    cfg: OptimizerConfig | None = None,
    seed: int = 0,
    reads: int = 2000,
    ranker: Callable[[SampleSet], float] | None = None,
) -> list[LayerResult]:
    """Layer-fixing schedule from 1 to ``max_layers`` layers.

    The single-layer stage draws ``n_inits`` random (gamma, beta) pairs from
    [0, 2pi) x [0, pi), optimises each, samples each optimised state, and
    keeps the candidate whose samples score highest under ``ranker``
    (higher is better; the benchmark passes an approximation-ratio ranker).
    Without a ranker, candidates are ranked by lower optimised expectation.
    Each subsequent stage re-optimises all parameters starting from the
    previous optimum extended with a zero-angle layer, then samples the
    optimised state.
    """
    if max_layers < 1:
        raise ValueError("max_layers must be >= 1")
    if n_inits < 1:
        raise ValueError("n_inits must be >= 1")
    cfg = cfg or OptimizerConfig()
    nq = ising.num_variables
    _check_size(nq)
    table = ising.energy_table()
    rng = np.random.default_rng(seed)

    candidates = [
        QaoaParams((rng.uniform(0.0, 2.0 * np.pi),), (rng.uniform(0.0, np.pi),))
        for _ in range(n_inits)
    ]
    sample_seeds = [int(rng.integers(0, 2**63)) for _ in range(n_inits + max_layers - 1)]

    best_candidate: tuple[float, QaoaParams, float, SampleSet] | None = None
    for k, cand in enumerate(candidates):
        params, value = optimize_layer(ising, cand, cfg, table)
        psi = apply_ansatz(ising, params, table)
        samples = sample_state(psi, reads, sample_seeds[k], table)
        score = ranker(samples) if ranker is not None else -value
        if best_candidate is None or score > best_candidate[0]:
            best_candidate = (score, params, value, samples)

    _, params, value, samples = best_candidate
    results = [LayerResult(layer=1, params=params, expectation=value, samples=samples)]
    for layer in range(2, max_layers + 1):
        init = results[-1].params.extended(0.0, 0.0)
        params, value = optimize_layer(ising, init, cfg, table)
        psi = apply_ansatz(ising, params, table)
        samples = sample_state(psi, reads, sample_seeds[n_inits + layer - 2], table)
        results.append(LayerResult(layer=layer, params=params, expectation=value, samples=samples))
    return results

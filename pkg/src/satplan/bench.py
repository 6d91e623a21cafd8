"""Experiment pipeline: instances -> reference optimum -> encodings -> samplers -> reports.

A run is a pure function of the config file and master seed: per-cell seeds
are derived from (master_seed, instance index, solver, run index), results
are assembled in a fixed order, and floats are serialised with their
shortest round-trip representation, so repeated runs produce byte-identical
reports.  Failures are isolated per instance and per (instance, solver)
cell; whatever succeeded is still reported.
"""

from __future__ import annotations

import dataclasses
import io
import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .anneal import AnnealSchedule, SampleEntry, SampleSet, sample_sa, solve_exhaustive
from .exact import DEFAULT_NODE_BUDGET, solve_exact
from .instance import Instance, load_instance
from .metrics import AggregateMetrics, RunMetrics, aggregate, run_metrics
from .qaoa import MAX_QUBITS, OptimizerConfig, run_schedule
from .qubo import Qubo, encode
from .reductor import ReductionSpec, reduce as reduce_instance

SOLVERS = ("exact", "sa", "qaoa", "exhaustive")
_SOLVER_CODES = {name: i for i, name in enumerate(SOLVERS)}
WORKERS_ENV = "SATPLAN_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment.

    ``instances`` entries are either instance file paths or generation specs
    of the form {"source": path, "target_requests": int,
    "with_capacity": bool, "seed": int}.
    """

    instances: list
    solvers: list[str]
    reads: int = 2000
    runs: int = 5
    max_layers: int = 10
    n_inits: int = 5
    penalty_m: float | None = None
    master_seed: int = 0
    node_budget: int = DEFAULT_NODE_BUDGET
    workers: int | None = None

    def __post_init__(self) -> None:
        if not self.instances:
            raise ConfigError("config lists no instances")
        if not self.solvers:
            raise ConfigError("config lists no solvers")
        for solver in self.solvers:
            if solver not in SOLVERS:
                raise ConfigError(f"unknown solver {solver!r}; choose from {SOLVERS}")
        if len(set(self.solvers)) != len(self.solvers):
            raise ConfigError("solvers listed more than once")
        if self.reads < 1:
            raise ConfigError("reads must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.max_layers < 1 or self.n_inits < 1:
            raise ConfigError("max_layers and n_inits must be >= 1")
        if self.penalty_m is not None and self.penalty_m <= 0:
            raise ConfigError("penalty_m must be positive")

    @classmethod
    def from_dict(cls, doc: dict, **overrides) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        merged = dict(doc)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc, **overrides)

    def effective_workers(self) -> int:
        if self.workers is not None:
            return max(1, self.workers)
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError as exc:
                raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        return 1


def cell_seed(master_seed: int, inst_idx: int, solver: str, run: int) -> int:
    """Deterministic 64-bit seed for one (instance, solver, run) cell."""
    ss = np.random.SeedSequence([master_seed, inst_idx, _SOLVER_CODES[solver], run])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resolve_instance(entry) -> Instance:
    """Load an instance path or realise a generation spec."""
    if isinstance(entry, str):
        return load_instance(entry)
    if isinstance(entry, dict):
        unknown = set(entry) - {"source", "target_requests", "with_capacity", "seed"}
        if unknown:
            raise ConfigError(f"unknown generation-spec fields {sorted(unknown)}")
        for key in ("source", "target_requests", "with_capacity", "seed"):
            if key not in entry:
                raise ConfigError(f"generation spec missing field {key!r}")
        src = load_instance(entry["source"])
        spec = ReductionSpec(
            target_requests=entry["target_requests"],
            with_capacity=entry["with_capacity"],
            seed=entry["seed"],
        )
        return reduce_instance(src, spec)
    raise ConfigError(f"instance entry must be a path or generation spec, got {entry!r}")


def _constant_sample_set(bits: np.ndarray, energy: float, reads: int, tag: str, seed: int) -> SampleSet:
    key = "".join("1" if b else "0" for b in bits)
    return SampleSet(
        entries=(SampleEntry(bits=key, energy=energy, count=reads),),
        total_reads=reads,
        sampler_tag=tag,
        seed=seed,
    )


def run_cell(
    inst: Instance,
    qubo: Qubo,
    f_max: float,
    solver: str,
    seed: int,
    cfg: ExperimentConfig,
) -> tuple[RunMetrics, dict, dict | None]:
    """Execute one (instance, solver, run) cell.

    Returns (metrics, sample-set JSON document, extra per-run details).
    """
    n = qubo.n
    reads = cfg.reads
    if solver == "sa":
        samples = sample_sa(qubo, reads, AnnealSchedule(), seed)
        return run_metrics(inst, f_max, samples, n), samples.to_json_dict(), None
    if solver == "exhaustive":
        bits, energy = solve_exhaustive(qubo)
        samples = _constant_sample_set(bits, energy, reads, "exhaustive", seed)
        return run_metrics(inst, f_max, samples, n), samples.to_json_dict(), None
    if solver == "exact":
        result = solve_exact(inst, cfg.node_budget)
        bits = np.zeros(qubo.num_variables, dtype=np.uint8)
        bits[:n] = result.best_assignment.to_bits(inst)
        samples = _constant_sample_set(bits, qubo.energy(bits), reads, "exact", seed)
        return run_metrics(inst, f_max, samples, n), samples.to_json_dict(), None
    if solver == "qaoa":
        ising = qubo.to_ising()
        ranker = lambda ss: run_metrics(inst, f_max, ss, n).expected_ar
        layers = run_schedule(
            ising,
            max_layers=cfg.max_layers,
            n_inits=cfg.n_inits,
            cfg=OptimizerConfig(),
            seed=seed,
            reads=reads,
            ranker=ranker,
        )
        per_layer = []
        for res in layers:
            m = run_metrics(inst, f_max, res.samples, n)
            per_layer.append(
                {
                    "layer": res.layer,
                    "expectation": res.expectation,
                    "expected_ar": m.expected_ar,
                    "best_ar": m.best_ar,
                }
            )
        final = layers[-1]
        metrics = run_metrics(inst, f_max, final.samples, n)
        doc = {"layers": [res.to_json_dict() for res in layers]}
        return metrics, doc, {"layers": per_layer}
    raise ConfigError(f"unknown solver {solver!r}")


def _metrics_dict(m: RunMetrics, run: int, seed: int) -> dict:
    return {
        "run": run,
        "expected_ar": m.expected_ar,
        "best_ar": m.best_ar,
        "feasible_fraction": m.feasible_fraction,
        "reads": m.reads,
        "seed": seed,
    }


def _aggregate_dict(a: AggregateMetrics) -> dict:
    return {
        "mean_expected_ar": a.mean_expected_ar,
        "mean_best_ar": a.mean_best_ar,
        "ci95_expected": a.ci95_expected,
        "ci95_best": a.ci95_best,
        "runs": a.runs,
    }


def _safe_name(name: str) -> str:
    return re.sub(r"[^-._a-zA-Z0-9]", "_", name)


def run_pipeline(cfg: ExperimentConfig, out_dir) -> tuple[dict, int]:
    """Run the full experiment and write report.json, results.csv,
    expected_ar.csv, best_ar.csv, and per-cell sample files.

    Returns (report, exit_code) with exit code 0 when everything succeeded
    and 1 when any instance or cell failed.
    """
    out = Path(out_dir)
    samples_dir = out / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)

    prepared = []
    for idx, entry in enumerate(cfg.instances):
        record: dict = {"spec": entry if isinstance(entry, str) else dict(entry)}
        try:
            inst = resolve_instance(entry)
            exact = solve_exact(inst, cfg.node_budget)
            if exact.best_value <= 0:
                raise ValueError(
                    f"instance {inst.name!r} has non-positive optimum; AR undefined"
                )
            qubo = encode(inst, cfg.penalty_m)
            record.update(
                name=inst.name,
                requests=len(inst.requests),
                variables=qubo.n,
                slacks=qubo.s,
                f_max=exact.best_value,
                proven_optimal=exact.proven_optimal,
                error=None,
            )
            prepared.append((idx, record, inst, qubo, exact.best_value))
        except Exception as exc:  # noqa: BLE001 - isolate per instance
            record.update(name=record["spec"] if isinstance(entry, str) else None, error=str(exc))
            prepared.append((idx, record, None, None, None))

    jobs = []
    for idx, record, inst, qubo, f_max in prepared:
        if inst is None:
            continue
        for solver in cfg.solvers:
            if solver == "qaoa" and qubo.num_variables > MAX_QUBITS:
                continue  # recorded as skipped below
            if solver == "exhaustive" and qubo.num_variables > 24:
                continue
            for run in range(cfg.runs):
                jobs.append((idx, solver, run, inst, qubo, f_max))

    def execute(job):
        idx, solver, run, inst, qubo, f_max = job
        seed = cell_seed(cfg.master_seed, idx, solver, run)
        try:
            metrics, samples_doc, extra = run_cell(inst, qubo, f_max, solver, seed, cfg)
            return (idx, solver, run), (metrics, seed, samples_doc, extra, None)
        except Exception as exc:  # noqa: BLE001 - isolate per cell
            return (idx, solver, run), (None, seed, None, None, str(exc))

    results: dict = {}
    workers = cfg.effective_workers()
    if workers == 1:
        for job in jobs:
            key, value = execute(job)
            results[key] = value
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for key, value in pool.map(execute, jobs):
                results[key] = value

    any_error = False
    instances_doc = []
    for idx, record, inst, qubo, f_max in prepared:
        if inst is None:
            any_error = True
            record["solvers"] = {}
            instances_doc.append(record)
            continue
        solver_docs: dict = {}
        for solver in cfg.solvers:
            if solver == "qaoa" and qubo.num_variables > MAX_QUBITS:
                solver_docs[solver] = {
                    "runs": [],
                    "aggregate": None,
                    "error": None,
                    "skipped": f"{qubo.num_variables} qubits exceed the {MAX_QUBITS}-qubit statevector limit",
                }
                continue
            if solver == "exhaustive" and qubo.num_variables > 24:
                solver_docs[solver] = {
                    "runs": [],
                    "aggregate": None,
                    "error": None,
                    "skipped": f"{qubo.num_variables} variables exceed the 24-variable enumeration limit",
                }
                continue
            run_docs = []
            metrics_list = []
            error = None
            for run in range(cfg.runs):
                metrics, seed, samples_doc, extra, err = results[(idx, solver, run)]
                if err is not None:
                    error = err
                    any_error = True
                    continue
                doc = _metrics_dict(metrics, run, seed)
                if extra:
                    doc.update(extra)
                run_docs.append(doc)
                metrics_list.append(metrics)
                path = samples_dir / f"{_safe_name(record['name'])}__{solver}__run{run}.json"
                path.write_text(json.dumps(samples_doc, sort_keys=True, indent=2) + "\n")
            agg = aggregate(metrics_list) if len(metrics_list) >= 2 else None
            solver_docs[solver] = {
                "runs": run_docs,
                "aggregate": _aggregate_dict(agg) if agg else None,
                "error": error,
                "skipped": None,
            }
        record["solvers"] = solver_docs
        instances_doc.append(record)

    report = {
        "solvers": list(cfg.solvers),
        "reads": cfg.reads,
        "runs": cfg.runs,
        "max_layers": cfg.max_layers,
        "n_inits": cfg.n_inits,
        "penalty_m": cfg.penalty_m,
        "master_seed": cfg.master_seed,
        "instances": instances_doc,
    }
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    (out / "results.csv").write_text(results_csv(report))
    expected_csv, best_csv = emit_plot_data(report)
    (out / "expected_ar.csv").write_text(expected_csv)
    (out / "best_ar.csv").write_text(best_csv)
    return report, (1 if any_error else 0)


def results_csv(report: dict) -> str:
    """Flat per-run rows plus aggregate rows with CI columns."""
    buf = io.StringIO()
    buf.write("instance,solver,run,expected_ar,best_ar,ci95_expected,ci95_best\n")
    for inst in report["instances"]:
        if inst.get("error"):
            continue
        for solver in report["solvers"]:
            cell = inst["solvers"].get(solver)
            if cell is None or cell.get("skipped"):
                continue
            for doc in cell["runs"]:
                buf.write(
                    f"{inst['name']},{solver},{doc['run']},{doc['expected_ar']!r},{doc['best_ar']!r},,\n"
                )
            agg = cell.get("aggregate")
            if agg:
                buf.write(
                    f"{inst['name']},{solver},aggregate,{agg['mean_expected_ar']!r},"
                    f"{agg['mean_best_ar']!r},{agg['ci95_expected']!r},{agg['ci95_best']!r}\n"
                )
    return buf.getvalue()


def emit_plot_data(report: dict) -> tuple[str, str]:
    """Plot-ready tables: instances as rows (ordered by request count),
    one value column plus one CI column per solver, config solver order."""
    solvers = report["solvers"]
    rows = [inst for inst in report["instances"] if not inst.get("error")]
    rows.sort(key=lambda r: (r["requests"], r["name"]))

    def table(value_key: str, ci_key: str, run_key: str) -> str:
        buf = io.StringIO()
        header = ["instance"]
        for solver in solvers:
            header += [solver, f"{solver}_ci95"]
        buf.write(",".join(header) + "\n")
        for inst in rows:
            cells = [inst["name"]]
            for solver in solvers:
                cell = inst["solvers"].get(solver)
                if not cell or cell.get("skipped") or cell.get("error") or not cell["runs"]:
                    cells += ["", ""]
                elif cell["aggregate"]:
                    cells += [repr(cell["aggregate"][value_key]), repr(cell["aggregate"][ci_key])]
                else:
                    cells += [repr(cell["runs"][0][run_key]), ""]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    expected = table("mean_expected_ar", "ci95_expected", "expected_ar")
    best = table("mean_best_ar", "ci95_best", "best_ar")
    return expected, best

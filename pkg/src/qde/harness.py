"""Declarative batch front end: parse system specs, dispatch tasks, emit records.

The input format is a single JSON object; complex matrix entries are
[re, im] pairs, row-major.  Tasks: info, dynent, capacity, classical,
verify.  Machine output is schema-stable JSON (same spec + same seed give
byte-identical records apart from the wall-time field) plus a CSV series
for the sequence-valued tasks.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .capacity import (
    Channel,
    OptimizerConfig,
    capacity_rate,
    dephasing_channel,
    depolarizing_channel,
    ensemble_channel,
    holevo_quantity,
    merged_capacity_report,
    proportional_code_channel,
    unit_input_state,
)
from .classical import (
    FiniteSpace,
    FunctionPartition,
    SymbolicShift,
    classical_information,
    embed_diagonal,
    markov_entropy_sequence,
    permutation_entropy_sequence,
)
from .dynamics import (
    an_sequence,
    information,
    information_via_direct_sum,
    invariance_check,
)
from .errors import QdeError, SpecFormatError
from .linalg import BlockAlgebra
from .partitions import Automorphism, KrausMap, Partition
from .properties import run_property_suite
from .states import StateFunctional

SCHEMA_VERSION = "1"
TASKS = ("info", "dynent", "capacity", "classical", "verify")


@dataclass(frozen=True)
class ClassicalSystem:
    space: FiniteSpace | None = None
    functions: FunctionPartition | None = None
    permutation: np.ndarray | None = None
    markov: SymbolicShift | None = None


@dataclass(frozen=True)
class SystemSpec:
    schema_version: str
    task: str
    algebra: BlockAlgebra | None
    state: StateFunctional | None
    partitions: dict
    unitary: Automorphism | None
    classical: ClassicalSystem | None
    channel: Channel | None
    params: dict
    raw: dict = field(repr=False, default=None)


def _fail(path: str, message: str) -> SpecFormatError:
    return SpecFormatError(path, message)


def _matrix(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise _fail(path, "expected a nonempty list of rows")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise _fail(f"{path}[{i}]", "expected a list of [re, im] pairs")
        entries = []
        for j, cell in enumerate(row):
            if not (isinstance(cell, list) and len(cell) == 2):
                raise _fail(f"{path}[{i}][{j}]", "expected an [re, im] pair")
            entries.append(complex(float(cell[0]), float(cell[1])))
        rows.append(entries)
    if any(len(r) != len(rows[0]) for r in rows):
        raise _fail(path, "ragged matrix rows")
    return np.array(rows, dtype=complex)


def _vector(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise _fail(path, "expected a nonempty list of numbers")
    try:
        return np.array([float(x) for x in obj])
    except (TypeError, ValueError):
        raise _fail(path, "expected a list of numbers") from None


def _real_matrix(obj, path: str) -> np.ndarray:
    return np.array([_vector(row, f"{path}[{i}]") for i, row in enumerate(obj)])


def _partition(obj, path: str) -> Partition:
    if isinstance(obj, dict):
        obj = obj.get("maps")
        if obj is None:
            raise _fail(path, "partition object needs a 'maps' list")
        path = f"{path}.maps"
    if not isinstance(obj, list) or not obj:
        raise _fail(path, "expected a nonempty list of Kraus families")
    maps = []
    for i, entry in enumerate(obj):
        label = i
        kraus_obj = entry
        if isinstance(entry, dict):
            label = entry.get("label", i)
            kraus_obj = entry.get("kraus")
            if kraus_obj is None:
                raise _fail(f"{path}[{i}]", "map object needs a 'kraus' list")
        if not isinstance(kraus_obj, list) or not kraus_obj:
            raise _fail(f"{path}[{i}]", "expected a nonempty list of Kraus matrices")
        kraus = tuple(
            _matrix(k, f"{path}[{i}].kraus[{j}]") for j, k in enumerate(kraus_obj)
        )
        try:
            maps.append(KrausMap(kraus, label=label))
        except QdeError as exc:
            raise _fail(f"{path}[{i}]", str(exc)) from exc
    try:
        return Partition(tuple(maps))
    except QdeError as exc:
        raise _fail(path, str(exc)) from exc


def _channel(obj, path: str) -> Channel:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise _fail(path, "channel needs a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "ensemble":
            states = [
                _matrix(m, f"{path}.states[{i}]") for i, m in enumerate(obj.get("states", []))
            ]
            return ensemble_channel(states, _vector(obj.get("probs"), f"{path}.probs"))
        if kind == "depolarizing":
            return depolarizing_channel(float(obj.get("p", 0.5)), int(obj.get("dim", 2)))
        if kind == "dephasing":
            return dephasing_channel(float(obj.get("p", 0.5)))
        if kind == "proportional":
            return proportional_code_channel(
                _vector(obj.get("weights"), f"{path}.weights"), int(obj.get("dim", 2))
            )
        if kind == "code":
            return Channel.from_code(_partition(obj.get("code"), f"{path}.code"))
    except QdeError as exc:
        raise _fail(path, str(exc)) from exc
    raise _fail(f"{path}.kind", f"unknown channel kind {kind!r}")


def _classical(obj, path: str) -> ClassicalSystem:
    if not isinstance(obj, dict):
        raise _fail(path, "expected an object")
    space = functions = permutation = markov = None
    try:
        if "measure" in obj:
            space = FiniteSpace(_vector(obj["measure"], f"{path}.measure"))
        if "functions" in obj:
            functions = FunctionPartition(_real_matrix(obj["functions"], f"{path}.functions"))
        if "permutation" in obj:
            permutation = np.array([int(x) for x in obj["permutation"]], dtype=int)
        if "markov" in obj:
            markov = SymbolicShift(_real_matrix(obj["markov"], f"{path}.markov"))
    except QdeError as exc:
        raise _fail(f"{path}.{_classical_offender(exc)}", str(exc)) from exc
    return ClassicalSystem(space, functions, permutation, markov)


def _classical_offender(exc) -> str:
    text = str(exc)
    if "stochastic" in text or "stationary" in text or "transition" in text:
        return "markov"
    if "squares" in text or "function" in text:
        return "functions"
    if "measure" in text:
        return "measure"
    return "permutation"


def parse_spec(text: str) -> SystemSpec:
    """Parse and validate a JSON system spec; errors carry the offending path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail("$", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise _fail("$", "top level must be an object")
    version = str(raw.get("schema_version", SCHEMA_VERSION))
    if version != SCHEMA_VERSION:
        raise _fail("schema_version", f"unsupported version {version!r}")
    task = raw.get("task")
    if task not in TASKS:
        raise _fail("task", f"task must be one of {TASKS}, got {task!r}")

    algebra = None
    if "algebra" in raw:
        blocks = raw["algebra"].get("blocks") if isinstance(raw["algebra"], dict) else raw["algebra"]
        try:
            algebra = BlockAlgebra(tuple(int(b) for b in blocks))
        except (TypeError, QdeError) as exc:
            raise _fail("algebra", str(exc)) from exc

    state = None
    if "state" in raw:
        try:
            state = StateFunctional.from_density(_matrix(raw["state"], "state"), algebra)
        except QdeError as exc:
            raise _fail("state", str(exc)) from exc

    partitions = {}
    for name, obj in (raw.get("partitions") or {}).items():
        partitions[name] = _partition(obj, f"partitions.{name}")

    unitary = None
    if "unitary" in raw:
        try:
            unitary = Automorphism(_matrix(raw["unitary"], "unitary"))
        except QdeError as exc:
            raise _fail("unitary", str(exc)) from exc

    classical = _classical(raw["classical"], "classical") if "classical" in raw else None
    channel = _channel(raw["channel"], "channel") if "channel" in raw else None
    params = raw.get("params") or {}
    if not isinstance(params, dict):
        raise _fail("params", "expected an object")
    return SystemSpec(
        schema_version=version,
        task=task,
        algebra=algebra,
        state=state,
        partitions=partitions,
        unitary=unitary,
        classical=classical,
        channel=channel,
        params=params,
        raw=raw,
    )


@dataclass
class ResultRecord:
    """Machine- and human-readable outcome of one task."""

    task: str
    results: dict
    series: list
    provenance: dict
    wall_time_s: float

    def to_json(self) -> str:
        payload = {
            "task": self.task,
            "results": self.results,
            "series": self.series,
            "provenance": self.provenance,
            "wall_time_s": self.wall_time_s,
        }
        return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable)

    def human_table(self) -> str:
        lines = [f"task: {self.task}"]
        for key in sorted(self.results):
            lines.append(f"  {key:32s} {_fmt(self.results[key])}")
        if self.series:
            lines.append("  series:")
            for row in self.series:
                lines.append("    " + "  ".join(_fmt(v) for v in row))
        lines.append(f"  wall_time_s: {self.wall_time_s:.3f}")
        return "\n".join(lines)

    @property
    def has_violation(self) -> bool:
        checks = self.results.get("families") or {}
        return any(not entry["passed"] for entry in checks.values())


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    raise TypeError(f"cannot serialize {type(value)}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_fmt(v)}" for k, v in value.items()) + "}"
    return str(value)


def _pick_partition(spec: SystemSpec, path="params.partition") -> Partition:
    if not spec.partitions:
        raise _fail("partitions", "task needs at least one partition")
    name = spec.params.get("partition")
    if name is None:
        if len(spec.partitions) > 1:
            raise _fail(path, f"several partitions given, choose one of {sorted(spec.partitions)}")
        return next(iter(spec.partitions.values()))
    if name not in spec.partitions:
        raise _fail(path, f"unknown partition {name!r}")
    return spec.partitions[name]


def _float_or_inf(x: float):
    return x if math.isfinite(x) else "inf"


def _task_info(spec: SystemSpec, seed: int, threads: int) -> dict:
    if spec.state is None:
        raise _fail("state", "info task needs a state")
    zeta = _pick_partition(spec)
    cutoff = float(spec.params.get("support_cutoff", defaults.SUPPORT_CUTOFF))
    report = information(spec.state, zeta, cutoff)
    direct = information_via_direct_sum(spec.state, zeta, cutoff)
    results = {
        "H": _float_or_inf(report.total_H),
        "Hc": report.classical_Hc,
        "Hq": _float_or_inf(report.quantum_Hq),
        "split_residual": report.split_residual,
        "direct_sum_H": _float_or_inf(direct),
        "direct_sum_residual": abs(report.total_H - direct)
        if math.isfinite(report.total_H)
        else "inf",
        "infinite": report.infinite_flag,
        "weights": {str(k): v for k, v in report.weights.items()},
        "invariance_residual": invariance_check(spec.state, zeta)
        if zeta.dim_in == zeta.dim_out
        else None,
    }
    return {"results": results, "series": []}


def _task_dynent(spec: SystemSpec, seed: int, threads: int) -> dict:
    if spec.state is None:
        raise _fail("state", "dynent task needs a state")
    depth = int(spec.params.get("N", defaults.DEFAULT_DEPTH))
    cap = int(spec.params.get("branch_cap", defaults.BRANCH_CAP))
    names = spec.params.get("partitions")
    if names is None:
        candidates = {None: _pick_partition(spec)}
    else:
        # candidate sweep: the best estimate is only a lower bound on the
        # supremum over measurements, never the supremum itself
        missing = [n for n in names if n not in spec.partitions]
        if missing:
            raise _fail("params.partitions", f"unknown partitions {missing}")
        candidates = {n: spec.partitions[n] for n in names}
    per_candidate = {}
    best_name, best_seq = None, None
    for name, zeta in candidates.items():
        theta = spec.unitary or Automorphism.identity(zeta.dim_in)
        seq = an_sequence(spec.state, theta, zeta, depth, branch_cap=cap)
        per_candidate[name] = seq
        if best_seq is None or seq.h_estimate > best_seq.h_estimate:
            best_name, best_seq = name, seq
    results = {
        "h_estimate": best_seq.h_estimate,
        "converged": best_seq.converged,
        "monotonicity_residual": best_seq.monotonicity_residual,
        "information_H": best_seq.information_bound,
        "depth": best_seq.depth,
    }
    if names is not None:
        results["candidate_h"] = {str(n): s.h_estimate for n, s in per_candidate.items()}
        results["best_candidate"] = str(best_name)
        results["supremum_status"] = "lower bound over the supplied candidates"
    series = [[n + 1, v] for n, v in enumerate(best_seq.values)]
    return {"results": results, "series": series}


def _task_capacity(spec: SystemSpec, seed: int, threads: int) -> dict:
    if spec.channel is not None:
        channel = spec.channel
        phi = spec.state
        if phi is None:
            if channel.input_dim == 1:
                phi = unit_input_state()
            else:
                raise _fail("state", "capacity task needs a state for this channel")
    else:
        channel = Channel.from_code(_pick_partition(spec))
        if spec.state is None:
            raise _fail("state", "capacity task needs a state")
        phi = spec.state
    n_max = int(spec.params.get("n", 1))
    config = OptimizerConfig(
        restarts=int(spec.params.get("restarts", 20)),
        max_iterations=int(spec.params.get("max_iterations", 500)),
        seed=seed,
        threads=threads,
    )
    results = {"chi": holevo_quantity(phi, channel)}
    series = []
    if n_max == 1:
        report = merged_capacity_report(phi, channel, 1, config)
        reports = {1: report}
        results["superadditivity_residual"] = 0.0
    else:
        rate = capacity_rate(phi, channel, n_max, config)
        reports = rate.reports
        results["superadditivity_residual"] = rate.superadditivity_residual
    for n, rep in reports.items():
        results[f"C_{n}"] = rep.C_n_lower
        results[f"D_{n}"] = rep.D_n_lower
        results[f"H_upper_{n}"] = rep.H_upper
        series.append([n, rep.C_n_lower / n])
    return {"results": results, "series": series}


def _task_classical(spec: SystemSpec, seed: int, threads: int) -> dict:
    cs = spec.classical
    if cs is None:
        raise _fail("classical", "classical task needs a classical block")
    results: dict = {}
    series: list = []
    depth = int(spec.params.get("N", 5))
    if cs.markov is not None:
        seq = markov_entropy_sequence(cs.markov, depth=depth)
        results["h_estimate"] = seq.h_estimate
        results["monotonicity_residual"] = seq.monotonicity_residual
        series = [[n + 1, v] for n, v in enumerate(seq.values)]
    if cs.space is not None and cs.functions is not None:
        results["H"] = classical_information(cs.space, cs.functions)
        state, embedded = embed_diagonal(cs.space, cs.functions)
        results["embedding_residual"] = abs(
            results["H"] - information(state, embedded).total_H
        )
        if cs.permutation is not None:
            seq = permutation_entropy_sequence(cs.space, cs.permutation, cs.functions, depth)
            results["h_estimate"] = seq.h_estimate
            results["monotonicity_residual"] = seq.monotonicity_residual
            series = [[n + 1, v] for n, v in enumerate(seq.values)]
    if not results:
        raise _fail("classical", "nothing to compute: give markov or measure+functions")
    return {"results": results, "series": series}


def _task_verify(spec: SystemSpec, seed: int, threads: int) -> dict:
    dims = tuple(int(d) for d in spec.params.get("dims", (2, 3, 4)))
    trials = int(spec.params.get("trials", 200))
    outcome = run_property_suite(dims=dims, trials=trials, seed=seed)
    families = {
        name: {
            "residual": r.residual,
            "tolerance": r.tolerance,
            "trials": r.trials,
            "passed": r.passed,
        }
        for name, r in outcome.items()
    }
    worst = max(r.residual for r in outcome.values())
    return {
        "results": {
            "families": families,
            "max_residual": worst,
            "all_passed": all(r.passed for r in outcome.values()),
        },
        "series": [],
    }


_DISPATCH = {
    "info": _task_info,
    "dynent": _task_dynent,
    "capacity": _task_capacity,
    "classical": _task_classical,
    "verify": _task_verify,
}


def run_task(spec: SystemSpec, seed: int | None = None, threads: int = 1) -> ResultRecord:
    """Dispatch one validated spec; deterministic under a fixed seed."""
    t0 = time.monotonic()
    seed = int(spec.params.get("seed", 0)) if seed is None else int(seed)
    body = _DISPATCH[spec.task](spec, seed, threads)
    return ResultRecord(
        task=spec.task,
        results=body["results"],
        series=body["series"],
        provenance=defaults.provenance(seed=seed, threads=threads),
        wall_time_s=time.monotonic() - t0,
    )


def write_record(record: ResultRecord, out_dir: str, stem: str) -> list[str]:
    """Write the JSON record (and CSV series, when present) atomically."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    target = os.path.join(out_dir, f"{stem}.result.json")
    _atomic_write(target, record.to_json() + "\n")
    written.append(target)
    if record.series:
        rows = "\n".join(",".join(_fmt(v) for v in row) for row in record.series)
        target = os.path.join(out_dir, f"{stem}.series.csv")
        _atomic_write(target, "n,value\n" + rows + "\n")
        written.append(target)
    return written


def _atomic_write(path: str, content: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

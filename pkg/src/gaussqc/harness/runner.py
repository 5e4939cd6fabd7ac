"""Seeded, order-independent experiment execution and report handling."""

import csv
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from .. import __version__
from ..errors import ConfigError, DegenerateCodeError
from ..stats import wilson_interval
from .config import config_from_dict
from .experiments import REGISTRY, trial_seed

SCHEMA_NAME = "report.schema.json"


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_json_safe(x) for x in v]
    return v


def run_trial(experiment, ctx, index, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    try:
        metrics = experiment.trial(ctx, index, rng, seed)
    except DegenerateCodeError as exc:
        return {"trial": index, "seed": seed, "status": "degenerate", "error": str(exc), "metrics": {}}
    return {"trial": index, "seed": seed, "status": "ok", "metrics": _plain(metrics)}


_WORKER = {}


def _init_worker(name, ctx):
    _WORKER["exp"] = REGISTRY[name]
    _WORKER["ctx"] = ctx


def _worker_task(task):
    index, seed = task
    return run_trial(_WORKER["exp"], _WORKER["ctx"], index, seed)


def aggregate(records):
    """Per-metric summaries over successful trials, independent of record order."""
    ok = sorted((r for r in records if r["status"] == "ok"), key=lambda r: r["trial"])
    values = {}
    for r in ok:
        for k, v in r["metrics"].items():
            values.setdefault(k, []).append(v)
    out = {
        "trials_total": len(records),
        "trials_ok": len(ok),
        "trials_degenerate": sum(r["status"] == "degenerate" for r in records),
    }
    for k in sorted(values):
        vs = values[k]
        if all(isinstance(v, bool) for v in vs):
            s = sum(vs)
            lo, hi = wilson_interval(s, len(vs))
            out[k] = {"count": len(vs), "successes": s, "rate": s / len(vs), "wilson_low": lo, "wilson_high": hi}
        elif all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vs):
            fs = [float(v) for v in vs]
            out[k] = {
                "count": len(fs),
                "mean": math.fsum(fs) / len(fs),
                "min": min(fs),
                "max": max(fs),
                "median": statistics.median(fs),
            }
    return out


@dataclass
class ExperimentReport:
    config: dict
    trials: list
    aggregates: dict
    theory: dict
    acceptance: dict
    wall_clock_seconds: float
    library_version: str = __version__
    master_seed: int = 0

    @property
    def passed(self):
        return all(self.acceptance.values())

    def to_dict(self):
        return _json_safe(
            _plain(
                {
                    "config": self.config,
                    "trials": self.trials,
                    "aggregates": self.aggregates,
                    "theory": self.theory,
                    "acceptance": self.acceptance,
                    "passed": self.passed,
                    "wall_clock_seconds": self.wall_clock_seconds,
                    "library_version": self.library_version,
                    "master_seed": self.master_seed,
                }
            )
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def trials_csv(self):
        return trials_to_csv(self.trials)

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        data = self.to_dict()
        validate_report(data)
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            fh.write(json.dumps(data, indent=2, sort_keys=True))
            fh.write("\n")
        with open(os.path.join(out_dir, "trials.csv"), "w", newline="") as fh:
            fh.write(self.trials_csv())


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def trials_to_csv(trials):
    """Long-format rows ``trial,metric,value`` (plus ``seed`` and ``status``)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "metric", "value"])
    for r in sorted(trials, key=lambda r: r["trial"]):
        w.writerow([r["trial"], "seed", r["seed"]])
        w.writerow([r["trial"], "status", r["status"]])
        for k in sorted(r["metrics"]):
            w.writerow([r["trial"], k, _fmt(r["metrics"][k])])
    return buf.getvalue()


def load_schema():
    return json.loads(resources.files("gaussqc.harness").joinpath(SCHEMA_NAME).read_text())


def validate_report(data):
    jsonschema.validate(data, load_schema())


def _summarize(config, records):
    exp = REGISTRY[config.experiment]
    records = sorted(records, key=lambda r: r["trial"])
    aggregates = aggregate(records)
    theory, acceptance = exp.summarize(config, records, aggregates)
    return records, aggregates, _plain(theory), _plain(acceptance)


def run_experiment(config):
    """Run every trial of ``config`` and assemble the report.

    Trial ``i`` draws from the PCG64 stream seeded by
    ``derive_seed(master_seed, label, i)``, so the per-trial records do not
    depend on the worker count or completion order.
    """
    exp = REGISTRY[config.experiment]
    start = time.perf_counter()
    ctx = exp.prepare(config)
    tasks = [(i, trial_seed(config, i)) for i in range(config.trial_start, config.trial_start + config.trials)]
    workers = min(config.workers(), len(tasks))
    if workers <= 1:
        records = [run_trial(exp, ctx, i, s) for i, s in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(exp.name, ctx)) as pool:
            records = list(pool.map(_worker_task, tasks, chunksize=chunk))
    records, aggregates, theory, acceptance = _summarize(config, records)
    return ExperimentReport(
        config=_plain(config.to_dict()),
        trials=records,
        aggregates=aggregates,
        theory=theory,
        acceptance=acceptance,
        wall_clock_seconds=time.perf_counter() - start,
        master_seed=config.master_seed,
    )


_PARTITION_KEYS = ("trials", "trial_start", "output_path", "parallelism")


def merge_reports(reports):
    """Pool reports of the same experiment run over disjoint trial ranges.

    Counts add, extrema combine and Wilson intervals are recomputed from
    the pooled counts; the result does not depend on the input order.
    """
    if not reports:
        raise ValueError("nothing to merge")
    base = {k: v for k, v in reports[0].config.items() if k not in _PARTITION_KEYS}
    for r in reports[1:]:
        other = {k: v for k, v in r.config.items() if k not in _PARTITION_KEYS}
        if other != base:
            raise ConfigError("config", "reports come from different configurations")
    records = [t for r in reports for t in r.trials]
    seen = set()
    for t in records:
        if t["trial"] in seen:
            raise ConfigError("trials", f"trial {t['trial']} appears in more than one report")
        seen.add(t["trial"])
    starts = [r.config["trial_start"] for r in reports]
    cfg_dict = dict(reports[0].config)
    cfg_dict["trial_start"] = min(starts)
    cfg_dict["trials"] = len(records)
    cfg_dict["output_path"] = sorted(r.config["output_path"] for r in reports)[0]
    config = config_from_dict(cfg_dict)
    records, aggregates, theory, acceptance = _summarize(config, records)
    return ExperimentReport(
        config=_plain(config.to_dict()),
        trials=records,
        aggregates=aggregates,
        theory=theory,
        acceptance=acceptance,
        wall_clock_seconds=math.fsum(r.wall_clock_seconds for r in reports),
        master_seed=config.master_seed,
    )


def report_from_dict(data):
    validate_report(data)
    return ExperimentReport(
        config=data["config"],
        trials=data["trials"],
        aggregates=data["aggregates"],
        theory=data["theory"],
        acceptance=data["acceptance"],
        wall_clock_seconds=data["wall_clock_seconds"],
        library_version=data["library_version"],
        master_seed=data["master_seed"],
    )

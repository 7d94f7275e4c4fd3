"""Benchmark orchestration: specs in, one report per run, a fixed-column CSV out."""

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .exceptions import GibbsSDPError
from .generators import GeneratorSpec, generate
from .model import EntryOracle, dumps_instance
from .qsim import run_quantum_sim
from .solve import classical_feasibility, optimize

CSV_COLUMNS = ("instance_id", "path", "profile", "seed", "status", "opt_estimate",
               "dual_objective", "min_slack", "G_hbar", "G_M", "T_meas", "total_queries",
               "rounds", "wall_ms")
PATHS = ("classical", "qsim")


def instance_digest(instance):
    """SHA-256 of the canonical instance JSON."""
    return hashlib.sha256(dumps_instance(instance).encode()).hexdigest()


@dataclass
class RunReport:
    instance_id: str
    digest: str
    path: str
    profile: str
    seed: int
    status: str
    opt_estimate: float = None
    alpha: float = None
    dual: dict = None
    ledger: dict = None
    total_queries: int = 0
    rounds: int = 0
    wall_ms: float = 0.0
    detail: str = ""

    def row(self):
        led = self.ledger or {}
        dual = self.dual or {}
        return {"instance_id": self.instance_id, "path": self.path, "profile": self.profile,
                "seed": self.seed, "status": self.status, "opt_estimate": self.opt_estimate,
                "dual_objective": dual.get("objective"), "min_slack": dual.get("min_slack"),
                "G_hbar": led.get("G_hbar"), "G_M": led.get("G_M"), "T_meas": led.get("T_meas"),
                "total_queries": self.total_queries, "rounds": self.rounds,
                "wall_ms": round(self.wall_ms, 3)}

    def to_dict(self, *, timing=True):
        out = asdict(self)
        if not timing:
            out.pop("wall_ms")
        return out

    def to_json(self, *, timing=True):
        return json.dumps(self.to_dict(timing=timing), sort_keys=True)


@dataclass
class BenchSpec:
    """What to run: instances (generator specs or ready instances) times paths, profiles, seeds."""

    instances: list = field(default_factory=list)
    paths: tuple = PATHS
    profiles: tuple = ("practical",)
    seeds: tuple = (0,)
    delta: float = 0.1
    alpha: float = None
    xi: float = 1.0
    qsim_overrides: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["instances"] = [GeneratorSpec(**d) if isinstance(d, dict) else d
                             for d in data.get("instances", [])]
        for key in ("paths", "profiles", "seeds"):
            if key in data:
                data[key] = tuple(data[key])
        bad = set(data.get("paths", ())) - set(PATHS)
        if bad:
            raise ValueError(f"unknown solver paths {sorted(bad)}")
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _dual_summary(dual):
    if dual is None:
        return None
    return {"objective": dual.objective, "min_slack": dual.min_slack, "norm": dual.norm1,
            "y": [float(v) for v in dual.y]}


def _instance_id(item, k):
    if isinstance(item, GeneratorSpec):
        sparsity = "" if item.s is None else f"-s{item.s}"
        return f"{item.kind}-n{item.n}-m{item.m}{sparsity}-seed{item.seed}"
    return getattr(item, "name", None) or f"instance{k}"


def _classical(instance, delta, alpha):
    handle = EntryOracle(instance)
    if alpha is None:
        res = optimize(instance, delta, oracle_handle=handle)
        rounds = sum(getattr(h.detail, "iterations", 0) for h in res.search.history)
        status = "optimized" if res.dual is not None else "no_dual"
        return dict(status=status, opt_estimate=res.opt_estimate, dual=_dual_summary(res.dual),
                    total_queries=handle.queries, rounds=rounds)
    out = classical_feasibility(instance, delta, oracle_handle=handle)(alpha)
    status = {"dual": "dual", "larger": "larger"}.get(out.status, "failed")
    opt = out.dual.objective if out.dual is not None and status == "dual" else None
    return dict(status=status, opt_estimate=opt, dual=_dual_summary(out.dual),
                total_queries=handle.queries, rounds=getattr(out.detail, "iterations", 0))


def qsim_search(instance, delta, xi=1.0, profile="practical", seed=0, **overrides):
    """Bisection over ``[0, R]`` with one sampling run per guess.

    A failed run ends the search; its ledger is still counted. Returns
    ``(estimate or None, last result, lower, upper, ledgers)``.
    """
    lo, hi = 0.0, float(instance.R)
    lower, upper = 0.0, float(instance.R)
    best = last = None
    ledgers = []
    call = 0
    while hi - lo > delta * max(1.0, lo):
        call += 1
        alpha = (lo + hi) / 2
        last = run_quantum_sim(instance, alpha, delta, xi, profile, seed=(seed, call), **overrides)
        ledgers.append(last.ledger)
        if last.status == "dual":
            hi = alpha
            if best is None or last.dual.objective < best.dual.objective:
                best = last
            upper = min(upper, last.dual.objective)
        elif last.status == "larger":
            lo = alpha
            lower = max(lower, (1 - delta) * alpha, last.primal_bound or 0.0)
        else:
            return None, last, lower, upper, ledgers
    return (lower + upper) / 2, best or last, lower, upper, ledgers


def _qsim(instance, delta, alpha, xi, profile, seed, overrides):
    if alpha is not None:
        res = run_quantum_sim(instance, alpha, delta, xi, profile, seed=seed, **overrides)
        opt = res.dual.objective if res.status == "dual" else None
        return dict(status=res.status, opt_estimate=opt, dual=_dual_summary(res.dual),
                    ledger=res.ledger.to_dict(), total_queries=res.ledger.total,
                    rounds=res.rounds, detail=res.reason)
    est, res, _, _, ledgers = qsim_search(instance, delta, xi, profile, seed, **overrides)
    snapshot = res.ledger.to_dict()
    snapshot["G_hbar"] = max(led.G_hbar for led in ledgers)
    snapshot["G_M"] = max(led.G_M for led in ledgers)
    return dict(status="optimized" if est is not None else "failed", opt_estimate=est,
                dual=_dual_summary(res.dual), ledger=snapshot,
                total_queries=sum(led.total for led in ledgers),
                rounds=sum(len(led.rounds) for led in ledgers), detail=res.reason)


def solve_instance(instance, path, *, instance_id="instance", alpha=None, delta=0.1, xi=1.0,
                   profile="practical", seed=0, overrides=None):
    """Run one solver path and wrap the outcome in a :class:`RunReport`; errors propagate.

    Without ``alpha`` the classical path optimizes and the sampling path bisects.
    """
    if path not in PATHS:
        raise ValueError(f"unknown solver path {path!r}; choose from {PATHS}")
    base = dict(instance_id=instance_id, digest=instance_digest(instance), path=path,
                profile=profile, seed=seed, alpha=alpha)
    start = time.perf_counter()
    if path == "classical":
        out = _classical(instance, delta, alpha)
    else:
        out = _qsim(instance, delta, alpha, xi, profile, seed, overrides or {})
    return RunReport(**base, **out, wall_ms=(time.perf_counter() - start) * 1000)


def run_one(item, k, path, profile, seed, spec):
    """One ``(instance, path, profile, seed)`` run; errors become an ``"error"`` report."""
    instance = generate(item)[0] if isinstance(item, GeneratorSpec) else item
    name = _instance_id(item, k)
    start = time.perf_counter()
    try:
        return solve_instance(instance, path, instance_id=name, alpha=spec.alpha,
                              delta=spec.delta, xi=spec.xi, profile=profile, seed=seed,
                              overrides=spec.qsim_overrides)
    except (GibbsSDPError, ValueError, OverflowError) as exc:
        return RunReport(instance_id=name, digest=instance_digest(instance), path=path,
                         profile=profile, seed=seed, alpha=spec.alpha, status="error",
                         detail=f"{type(exc).__name__}: {exc}",
                         wall_ms=(time.perf_counter() - start) * 1000)


def _jobs(spec):
    for k, item in enumerate(spec.instances):
        for path in spec.paths:
            for profile in spec.profiles:
                for seed in spec.seeds:
                    yield item, k, path, profile, seed, spec


def _run_job(job):
    return run_one(*job)


def run_benchmark(spec, *, workers=1):
    """All reports, in ``(instance, path, profile, seed)`` order whatever ``workers`` is."""
    jobs = list(_jobs(spec))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(job) for job in jobs]


def reports_to_csv(reports, out=None):
    """Write the fixed-column CSV to ``out`` (path or file object); returns the text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.row())
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text

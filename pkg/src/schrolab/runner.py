"""Dispatch a validated config to its pipeline and write the report."""

from __future__ import annotations

import csv
import json
import math
import time
from pathlib import Path

import numpy as np

from . import dyadic, experiments
from .config import ExperimentConfig
from .errors import InputError
from .gridio import save_gridfunction
from .norms import (
    MixedNormSpec,
    NormRecord,
    TimeGrid,
    fourier_lebesgue_norm,
    inequality_ratio,
    lebesgue_norm,
    region_label,
)
from .report import ExperimentReport, jsonable
from .spectral import (
    GridFunction,
    SpectralGrid,
    gaussian_evolution,
    materialize,
    propagate,
    random_bandlimited,
    relative_l2_error,
    wave_packets,
)
from .wiener import BumpPartition, RandomizationPlan, RandomSample, randomize

# ---------------------------------------------------------------------------
# data


def make_datum(cfg: ExperimentConfig, grid: SpectralGrid, index: int | None = None) -> GridFunction:
    """The configured datum; random kinds draw from ``(seed, index)``."""
    d = cfg.datum
    sig = d.signal()
    if sig is not None:
        return materialize(sig, grid)
    rng = np.random.default_rng([cfg.seed, d.index if index is None else index])
    if d.kind == "random_bandlimited":
        return random_bandlimited(grid, rng, float(d.bandwidth), smooth=bool(d.smooth))
    return wave_packets(grid, rng, int(d.count), float(d.max_freq), float(d.width))


def _family(cfg: ExperimentConfig, grid: SpectralGrid, count: int):
    if cfg.datum.signal() is not None:
        return [("datum", make_datum(cfg, grid))]
    return [(f"{cfg.datum.kind}[{i}]", make_datum(cfg, grid, i)) for i in range(count)]


def _gaussian_oracle(cfg: ExperimentConfig, grid: SpectralGrid, t: float) -> np.ndarray:
    p = cfg.datum.signal().params
    c = np.broadcast_to(np.asarray(p["center"]), (grid.dim,))
    m = np.broadcast_to(np.asarray(p["modulation"]), (grid.dim,))
    out = np.ones(grid.shape, dtype=complex)
    for ax, x in enumerate(grid.x_mesh()):
        out = out * gaussian_evolution(x, t, c[ax], p["width"], m[ax], period=grid.extent)
    return out


def _time_grid(tg) -> TimeGrid:
    if tg.kind == "geometric":
        return TimeGrid.geometric(tg.t_max, tg.decades, tg.per_decade)
    return TimeGrid.linear(tg.t_max, tg.count, include_zero=True)


def _table(columns, rows) -> dict:
    return {"columns": list(columns), "rows": [[r[c] for c in columns] for r in rows]}


# ---------------------------------------------------------------------------
# pipelines


def _propagate(cfg, grid, out):
    f = make_datum(cfg, grid)
    base = math.sqrt(np.sum(np.abs(f.to_physical().values) ** 2) * grid.cell_volume)
    rows = []
    for t in cfg.params.times:
        u = propagate(f, float(t))
        norm = math.sqrt(np.sum(np.abs(u.values) ** 2) * grid.cell_volume)
        err = math.nan
        if cfg.datum.kind == "gaussian":
            err = relative_l2_error(u.values, _gaussian_oracle(cfg, grid, float(t)))
        rows.append({"t": float(t), "l2_norm": norm, "unitarity_defect": abs(norm - base) / base,
                     "oracle_rel_error": err})
        if cfg.params.save and out is not None:
            save_gridfunction(u, out / f"propagate_t{t}", "bin")
    return {"table": _table(("t", "l2_norm", "unitarity_defect", "oracle_rel_error"), rows)}


def _norms(cfg, grid, out):
    recs = []
    for fid, f in _family(cfg, grid, cfg.params.family):
        for sc in cfg.params.fourier_lebesgue:
            spec = sc.build()
            recs.append(NormRecord(fid, "fourier_lebesgue", spec.s, spec.r, None, None, "full",
                                   fourier_lebesgue_norm(f, spec)))
        for lc in cfg.params.lebesgue:
            region = lc.region.build()
            recs.append(NormRecord(fid, "lebesgue", None, None, float(lc.p), None,
                                   region_label(region),
                                   lebesgue_norm(f.to_physical(), float(lc.p), region)))
    cols = ("function_id", "norm_kind", "s", "r", "q", "p", "region", "value")
    return {"table": _table(cols, [r.__dict__ for r in recs])}


def _maximal_ratio(cfg, grid, out):
    prm = cfg.params
    lhs = MixedNormSpec(float(prm.q), math.inf, prm.region.build())
    tg = _time_grid(prm.time_grid)
    rows = []
    for fid, f in _family(cfg, grid, prm.family):
        rows.append({"function_id": fid,
                     "ratio": inequality_ratio(f, lhs, tg, prm.rhs.build(), cfg.threads)})
    ratios = [r["ratio"] for r in rows]
    return {
        "table": _table(("function_id", "ratio"), rows),
        "summary": {"min": min(ratios), "max": max(ratios), "times": len(tg)},
    }


def _counterexample(cfg, grid, out):
    prm = cfg.params
    if not prm.ks:
        return {"table": _table(dyadic.SWEEP_COLUMNS, []), "plot": _table(("k", "log2_growth"), [])}
    res = dyadic.sweep(
        [int(k) for k in prm.ks], float(prm.s), float(prm.p), float(prm.delta),
        lattice_per_band=prm.lattice_per_band, points=prm.points, time_count=prm.time_count,
        with_oracle=prm.with_oracle, workers=cfg.threads,
    )
    rows = [r.__dict__ for r in res.rows]
    return {
        "table": _table(dyadic.SWEEP_COLUMNS, rows),
        "fit": res.fit.summary(res.expected_slope),
        "plot": _table(("k", "log2_growth"),
                       [{"k": r.k, "log2_growth": math.log2(r.growth_value)} for r in res.rows]),
        "grids": {str(k): v for k, v in res.grids.items()},
    }


def _randomize(cfg, grid, out):
    f = make_datum(cfg, grid)
    part = BumpPartition(grid.dim, cfg.params.plan.profile)
    plan = RandomizationPlan.for_data(f, cfg.params.plan.law, cfg.seed, part)
    rows = []
    for d in cfg.params.draws:
        fw = randomize(f, plan, int(d), part)
        g = RandomSample.draw(plan, int(d)).coefficients
        rows.append({
            "draw_index": int(d),
            "l2_norm": math.sqrt(np.sum(np.abs(fw.to_physical().values) ** 2) * grid.cell_volume),
            "coefficient_l2": math.sqrt(sum(abs(v) ** 2 for v in g.values())),
        })
        if cfg.params.save and out is not None:
            save_gridfunction(fw, out / f"randomized_{int(d)}", "bin")
    return {"plan": json.loads(plan.to_json()),
            "table": _table(("draw_index", "l2_norm", "coefficient_l2"), rows)}


def _probe(cfg, grid):
    pc = cfg.params.probe
    if pc.points is None:
        return experiments.Probe.region_sample(grid, pc.count, pc.radius)
    return experiments.Probe(tuple(tuple(np.atleast_1d(p)) for p in pc.points), pc.mode)


def _tails(cfg, grid, out):
    prm = cfg.params
    f = make_datum(cfg, grid)
    part = BumpPartition(grid.dim, prm.plan.profile)
    plan = RandomizationPlan.for_data(f, prm.plan.law, cfg.seed, part)
    probe = _probe(cfg, grid)
    split = experiments.density_split(f, float(prm.eps), prm.split.build()) if prm.eps else None
    if split is not None and prm.alpha is None:
        raise InputError("tails: the union-bound check needs a fixed alpha")
    per_t, fits, rows = [], [], []
    for t in prm.times:
        alphas = prm.alphas if prm.alpha is None else (prm.alpha,)
        est = experiments.tail_probability(f, plan, float(t), alphas, probe, prm.num_draws,
                                           part=part, workers=cfg.threads)
        rec = {"t": est.t, "per_alpha": est.rows()}
        if split is not None:
            ub = experiments.union_bound_check(split, plan, float(t), float(prm.alpha), probe,
                                               prm.num_draws, part=part, workers=cfg.threads)
            rec["union_bound"] = {"p5": ub.p5, "p6": ub.p6, "p8": ub.p8, "p9": ub.p9,
                                  "violations": ub.violations}
        per_t.append(rec)
        fits.append({"t": est.t, **est.fit, "median": est.median})
        rows += [{"t": est.t, **r} for r in est.rows()]
    return {
        "plan": json.loads(plan.to_json()),
        "probe": probe.to_dict(),
        "per_t": per_t,
        "fits": fits,
        "table": _table(("t", "alpha", "p_hat", "stderr"), rows),
    }


def _convergence(cfg, grid, out):
    prm = cfg.params
    f = make_datum(cfg, grid)
    times = np.geomspace(prm.t_max, prm.t_min, prm.count)
    sw = experiments.convergence_sweep(f, times, prm.region.build(), prm.alphas)
    cols = ("t", "sup_error") + tuple(f"measure_{a!r}" for a in sw.alphas)
    rows = [dict(zip(cols, (t, e, *lv))) for t, e, lv in zip(sw.times, sw.sup_errors, sw.level_measures)]
    return {"table": _table(cols, rows), "rate": sw.rate(), "region": sw.region}


PIPELINES = {
    "propagate": _propagate,
    "norms": _norms,
    "maximal_ratio": _maximal_ratio,
    "counterexample": _counterexample,
    "randomize": _randomize,
    "tails": _tails,
    "convergence": _convergence,
}


def echo(cfg: ExperimentConfig) -> dict:
    """Config echo; the thread count is left out since it cannot change results."""
    d = cfg.to_dict()
    d.pop("threads", None)
    return d


def run(cfg: ExperimentConfig, out: Path | None = None) -> ExperimentReport:
    start = time.perf_counter()
    grid = None if cfg.kind == "counterexample" else cfg.grid.build()
    results = PIPELINES[cfg.kind](cfg, grid, out)
    return ExperimentReport(cfg.kind, echo(cfg), cfg.seed, results,
                            wall_clock=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(table: dict, path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(table["columns"])
        for row in table["rows"]:
            w.writerow([_cell(v) for v in row])
    return path


def emit(report: ExperimentReport, out: str | Path, fmt: str = "json") -> list[Path]:
    """Write the report as JSON, or its tables as CSV plus a JSON summary."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / report.kind
    if fmt == "json":
        path = stem.with_suffix(".json")
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
        return [path]
    if fmt != "csv":
        raise InputError(f"unknown output format {fmt!r}")
    paths = [write_table(report.results.get("table", {"columns": [], "rows": []}),
                         stem.with_suffix(".csv"))]
    if "plot" in report.results:
        paths.append(write_table(report.results["plot"], out / f"{report.kind}_plot.csv"))
    if "fit" in report.results:
        p = out / f"{report.kind}_fit.json"
        p.write_text(json.dumps(jsonable(report.results["fit"]), indent=2, sort_keys=True) + "\n")
        paths.append(p)
    return paths


def read_table(path: str | Path) -> dict:
    """Inverse of :func:`write_table` for numeric cells."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        cols = next(r)
        rows = []
        for row in r:
            vals = []
            for v in row:
                try:
                    vals.append(float(v) if v not in ("",) else None)
                except ValueError:
                    vals.append(v)
            rows.append(vals)
    return {"columns": cols, "rows": rows}

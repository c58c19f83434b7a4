"""Experiment orchestration: grids, deterministic seeding, artifact emission.

Suite kinds:
  constrained2d    MI-constrained stochastic-feature models on the 2D task
  unconstrained2d  same grid without the MI constraint
  binning2d        deterministic-feature models, binned MI, with/without the
                   information-bottleneck regularizer
  bounds_verify    simulation of the generalization bounds on the shipped
                   enumerable instances

Every per-model rng stream is a pure function of (master_seed, grid
coordinates), so shuffling execution order cannot change any output value.
"""

from __future__ import annotations

import argparse
import configparser
import itertools
import json
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis, bounds, mi_feature, mi_model, trainer
from .dataset import gen_clusters, resample_clusters
from .errors import InvalidArgument, TrainingDiverged
from .mlp import batch_latents, forward_trunk

N_TRAIN, N_TEST, N_CLASSES = 50, 250, 5

GRID_DEFAULTS = {
    "constrained2d": dict(
        widths=[(256, 256, 128, 128), (128, 128, 64, 64),
                (64, 64, 32, 32), (32, 32, 16, 16)],
        weight_decays=[0.0, 0.01, 0.1],
        n_dataset_draws=3, n_model_seeds=3,
        eval_sample_sizes=[50, 500],
        rho=1.5, ib_flags=[False],
    ),
    "unconstrained2d": dict(
        widths=[(256, 256, 128, 128), (128, 128, 64, 64),
                (64, 64, 32, 32), (32, 32, 16, 16)],
        weight_decays=[0.0, 0.01, 0.1],
        n_dataset_draws=3, n_model_seeds=3,
        eval_sample_sizes=[50, 500],
        rho=None, ib_flags=[False],
    ),
    "binning2d": dict(
        widths=[(512, 512, 256, 256), (256, 256, 128, 128), (128, 128, 64, 64)],
        weight_decays=[0.0, 1e-3, 1e-2],
        n_dataset_draws=3, n_model_seeds=4,
        eval_sample_sizes=[50],
        rho=None, ib_flags=[False, True],
        k_train=4, ib_weight=0.25, fixed_sigma=0.1,
    ),
}


@dataclass
class SuiteConfig:
    kind: str = "constrained2d"
    out_dir: str = "out"
    master_seed: int = 0
    jobs: int = 1
    widths: list = field(default_factory=list)
    weight_decays: list = field(default_factory=list)
    n_dataset_draws: int = 3
    n_model_seeds: int = 3
    eval_sample_sizes: list = field(default_factory=lambda: [50, 500])
    rho: float | None = None
    ib_flags: list = field(default_factory=lambda: [False])
    iterations: int = 300
    lr_theta: float = 1e-2
    lr_lambda: float = 0.02
    constraint_mode: str = "equality"
    lambda_warmup: float = 0.15
    k_train: int = 8
    eval_k: int = 64
    swag_start_fraction: float = 0.5
    ib_weight: float = 0.25
    fixed_sigma: float = 0.1
    model_mi_k: int = 32
    declared_models: int | None = None

    def __post_init__(self):
        if self.kind not in ("constrained2d", "unconstrained2d", "binning2d",
                             "bounds_verify"):
            raise InvalidArgument(f"unknown suite kind {self.kind!r}")
        if not self.widths and self.kind in GRID_DEFAULTS:
            for key, val in GRID_DEFAULTS[self.kind].items():
                setattr(self, key, val)
        self.widths = [tuple(w) for w in self.widths]
        if self.declared_models is not None and self.kind != "bounds_verify":
            if self.model_count() != self.declared_models:
                raise InvalidArgument(
                    f"grid product {self.model_count()} != declared "
                    f"{self.declared_models}")

    def model_count(self) -> int:
        return (len(self.widths) * len(self.weight_decays)
                * self.n_dataset_draws * self.n_model_seeds
                * len(self.eval_sample_sizes) * len(self.ib_flags))

    def smoke(self) -> "SuiteConfig":
        """Tiny 8-model grid for end-to-end checks."""
        cfg = replace(self)
        cfg.widths = [(32, 32, 16, 16), (16, 16, 8, 8)]
        cfg.weight_decays = [0.0]
        cfg.n_dataset_draws = 2
        cfg.n_model_seeds = 1
        cfg.eval_sample_sizes = [50, 500] if len(self.eval_sample_sizes) > 1 else [50]
        cfg.ib_flags = [False] if len(self.ib_flags) == 1 else [False, True]
        if len(cfg.eval_sample_sizes) * len(cfg.ib_flags) == 1:
            cfg.n_model_seeds = 2
        cfg.iterations = min(cfg.iterations, 150)
        cfg.declared_models = None
        return cfg


def _tag(s: str) -> int:
    return zlib.crc32(s.encode())


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit seed from the master seed and grid coordinates."""
    ints = [int(master)] + [_tag(p) if isinstance(p, str) else int(p)
                            for p in parts]
    return int(np.random.SeedSequence(ints).generate_state(1, np.uint64)[0] >> 1)


# ---------------------------------------------------------------------------
# config files (key = value with [section] headers; grids as comma lists)


def parse_config_file(path: str) -> SuiteConfig:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    cfg = {}
    suite = cp["suite"] if cp.has_section("suite") else {}
    for key in ("kind", "out_dir"):
        if key in suite:
            cfg[key] = suite[key]
    for key in ("master_seed", "jobs"):
        if key in suite:
            cfg[key] = int(suite[key])
    if cp.has_section("grid"):
        g = cp["grid"]
        if "widths" in g:
            cfg["widths"] = [tuple(int(w) for w in spec.strip().split("x"))
                             for spec in g["widths"].split(",")]
        if "weight_decays" in g:
            cfg["weight_decays"] = [float(v) for v in g["weight_decays"].split(",")]
        for key in ("n_dataset_draws", "n_model_seeds"):
            if key in g:
                cfg[key] = int(g[key])
        if "eval_sample_sizes" in g:
            cfg["eval_sample_sizes"] = [int(v) for v in
                                        g["eval_sample_sizes"].split(",")]
        if "rho" in g:
            raw = g["rho"].strip()
            cfg["rho"] = None if raw in ("", "none") else float(raw)
        if "ib_flags" in g:
            cfg["ib_flags"] = [v.strip() in ("1", "true", "yes")
                               for v in g["ib_flags"].split(",")]
        if "declared_models" in g:
            cfg["declared_models"] = int(g["declared_models"])
    if cp.has_section("train"):
        t = cp["train"]
        for key, conv in (("iterations", int), ("k_train", int), ("eval_k", int),
                          ("model_mi_k", int), ("lr_theta", float),
                          ("lr_lambda", float), ("ib_weight", float),
                          ("fixed_sigma", float),
                          ("swag_start_fraction", float)):
            if key in t:
                cfg[key] = conv(t[key])
    return SuiteConfig(**cfg)


# ---------------------------------------------------------------------------
# grid cells and the per-cell worker


@dataclass(frozen=True)
class Cell:
    ib: bool
    width_idx: int
    wd_idx: int
    draw_idx: int
    seed_idx: int


def _model_id(cfg: SuiteConfig, cell: Cell, eval_n: int) -> str:
    w = "x".join(str(v) for v in cfg.widths[cell.width_idx])
    wd = cfg.weight_decays[cell.wd_idx]
    base = f"w{w}-wd{wd}-d{cell.draw_idx}-s{cell.seed_idx}-n{eval_n}"
    if len(cfg.ib_flags) > 1:
        base += f"-ib{int(cell.ib)}"
    return base


def _train_cell(args):
    """Worker: train one grid cell and evaluate its per-model quantities."""
    cfg, cell = args
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    deterministic = cfg.kind == "binning2d"
    data_seed = derive_seed(cfg.master_seed, "data", cell.draw_idx)
    data = gen_clusters(data_seed, N_TRAIN, N_TEST, N_CLASSES)
    tc = trainer.TrainConfig(
        widths=cfg.widths[cell.width_idx],
        weight_decay=cfg.weight_decays[cell.wd_idx],
        lr_theta=cfg.lr_theta, lr_lambda=cfg.lr_lambda,
        iterations=cfg.iterations, k=cfg.k_train,
        rho=(cfg.rho if not deterministic else None),
        constraint_mode=cfg.constraint_mode,
        lambda_warmup_fraction=cfg.lambda_warmup,
        seed=derive_seed(cfg.master_seed, "train", int(cell.ib),
                         cell.width_idx, cell.wd_idx, cell.draw_idx,
                         cell.seed_idx),
        swag_start_fraction=cfg.swag_start_fraction,
        eval_k=cfg.eval_k,
        fixed_sigma=(cfg.fixed_sigma if deterministic else None),
    )
    if deterministic and cell.ib:
        tc = replace(tc, fixed_mi_weight=cfg.ib_weight)
    try:
        model = trainer.train(tc, data)
    except TrainingDiverged as exc:
        return {"cell": cell, "diverged_at": exc.iteration, "data_seed": data_seed}

    out = {
        "cell": cell,
        "data_seed": data_seed,
        "run": model.run_record(),
        "accepted": model.accepted,
        "gap_loss": model.gap_loss,
        "gap_error": model.gap_error,
        "n_params": model.params.n_params,
        "frob": model.params.per_layer_frobenius(),
        "final_mi": model.final_mi,
        "swag_mean": model.swag.mean,
        "swag_var": model.swag.var,
        "layer_slices": model.swag.layer_slices,
        "evals": {},
    }

    for eval_n in cfg.eval_sample_sizes:
        if eval_n <= N_TRAIN:
            xs, ys = data.train_inputs, data.train_labels
        else:
            xs, ys = resample_clusters(data_seed, N_CLASSES, eval_n,
                                       derive_seed(cfg.master_seed, "eval",
                                                   cell.draw_idx, eval_n))
        ev_rng = np.random.default_rng(np.random.SeedSequence(
            [derive_seed(cfg.master_seed, "evrng", int(cell.ib),
                         cell.width_idx, cell.wd_idx, cell.draw_idx,
                         cell.seed_idx, eval_n)]))
        if deterministic:
            feats = _layer_features(model.params, xs)
            pen = feats[-1]
            out["evals"][eval_n] = {
                "mi_mc": mi_feature.binned_mi(pen, inputs_distinct=True),
                "mi_mc_cond": mi_feature.binned_mi(pen, labels=ys),
                "binned_layers": [mi_feature.binned_mi(f, inputs_distinct=True)
                                  for f in feats],
            }
        else:
            mu, sig = batch_latents(model.params, xs)
            ests = mi_feature.estimate_feature_mi_all((mu, sig), ys,
                                                      k=cfg.eval_k, rng=ev_rng)
            out["evals"][eval_n] = {k: v.value for k, v in ests.items()}

    # small-sample per-layer trend values (jensen, adaptive noise std)
    feats = _layer_features(model.params, data.train_inputs)
    sched = mi_feature.select_sigma_adaptive(feats[:-1])
    trend_rng = np.random.default_rng(np.random.SeedSequence(
        [derive_seed(cfg.master_seed, "trend", int(cell.ib), cell.width_idx,
                     cell.wd_idx, cell.draw_idx, cell.seed_idx)]))
    layer_mi = []
    for f, s in zip(feats[:-1], sched.sigmas):
        est = mi_feature.estimate_feature_mi(
            (f, np.full_like(f, s)), estimator="jensen", k=8, rng=trend_rng)
        layer_mi.append(est.value)
    if deterministic:
        layer_mi.append(mi_feature.binned_mi(feats[-1], inputs_distinct=True))
    else:
        mu, sig = batch_latents(model.params, data.train_inputs)
        layer_mi.append(mi_feature.estimate_feature_mi(
            (mu, sig), estimator="jensen", k=8, rng=trend_rng).value)
    out["feature_mi_layers"] = layer_mi
    return out


def _layer_features(params, xs):
    """Deterministic per-layer representations: input, trunk, latent mean."""
    acts, _ = forward_trunk(params, xs)
    mu, _ = batch_latents(params, xs)
    return [np.asarray(xs, dtype=np.float64)] + acts[1:] + [mu]


# ---------------------------------------------------------------------------
# suite driver


@dataclass
class SuiteResult:
    config: SuiteConfig
    records: list
    table: analysis.MetricTable | None
    report: analysis.CorrelationReport | None
    run_records: list
    layer_trends: dict


def _family_cells(cfg: SuiteConfig):
    """Cells grouped by learning-algorithm family (ib, arch, wd)."""
    fams = []
    for ib, wi, di in itertools.product(cfg.ib_flags, range(len(cfg.widths)),
                                        range(len(cfg.weight_decays))):
        cells = [Cell(ib, wi, di, dr, si)
                 for dr in range(cfg.n_dataset_draws)
                 for si in range(cfg.n_model_seeds)]
        fams.append(((ib, wi, di), cells))
    return fams


def _pmap(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _posterior(payload) -> mi_model.SwagPosterior:
    return mi_model.SwagPosterior(payload["swag_mean"], payload["swag_var"],
                                  payload["layer_slices"])


def _family_model_mi(cfg: SuiteConfig, payloads: dict):
    """Model-MI estimates for one (ib, arch, wd) family.

    Values are computed per model seed across dataset draws (the seed is part
    of the learning algorithm).  The operative estimate is the
    probability-domain (mc) form, which stays on the true-MI scale when the
    per-dataset posteriors separate; the log-domain (jensen) value is kept as
    a diagnostic column.  The seed-averaged variant pools the family's seeds
    into one richer posterior model.
    """
    n_layers = max(next(iter(payloads.values()))["layer_slices"])
    pen = n_layers - 1
    by_seed_draw = {}
    for cell, p in payloads.items():
        by_seed_draw.setdefault(cell.seed_idx, {})[cell.draw_idx] = _posterior(p)
    out = {}
    for si, posts in by_seed_draw.items():
        rng = np.random.default_rng(np.random.SeedSequence(
            [derive_seed(cfg.master_seed, "modelmi", si)]))
        if len(posts) < 2:
            out[si] = {"pen": float("nan"), "out": float("nan"),
                       "log": float("nan"),
                       "layers": [float("nan")] * n_layers}
            continue
        layers = [mi_model.estimate_model_mi(posts, layer=l, k=cfg.model_mi_k,
                                             variant="mc", rng=rng).value
                  for l in range(1, n_layers + 1)]
        log_pen = mi_model.estimate_model_mi(posts, layer=pen,
                                             k=cfg.model_mi_k,
                                             variant="jensen", rng=rng).value
        out[si] = {"pen": layers[pen - 1], "out": layers[-1], "log": log_pen,
                   "layers": layers}
    seed_avg = float("nan")
    if cfg.n_dataset_draws >= 2:
        nested = {}
        for cell, p in payloads.items():
            nested.setdefault(cell.draw_idx, {})[cell.seed_idx] = _posterior(p)
        rng = np.random.default_rng(np.random.SeedSequence(
            [derive_seed(cfg.master_seed, "modelmi-avg")]))
        seed_avg = mi_model.estimate_model_mi(
            nested, layer=pen, k=cfg.model_mi_k, variant="seed_averaged",
            rng=rng).value
    return out, seed_avg


def run_suite(cfg: SuiteConfig, quiet: bool = True) -> SuiteResult:
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.kind == "bounds_verify":
        return _run_bounds_verify(cfg)

    records, run_records = [], []
    trend_feature, trend_model = [], []
    for fam_key, cells in _family_cells(cfg):
        results = _pmap(_train_cell, [(cfg, c) for c in cells], cfg.jobs)
        payloads = {}
        for cell, res in zip(cells, results):
            if "diverged_at" in res:
                run_records.append({
                    "model_id": _model_id(cfg, cell, 0), "diverged": True,
                    "diverged_at": res["diverged_at"],
                    "accepted": False})
                continue
            payloads[cell] = res
        if not payloads:
            continue
        mi_by_seed, seed_avg = _family_model_mi(cfg, payloads)
        for cell, res in sorted(payloads.items(),
                                key=lambda kv: (kv[0].draw_idx, kv[0].seed_idx)):
            mm = mi_by_seed[cell.seed_idx]
            for eval_n in cfg.eval_sample_sizes:
                rec = {
                    "model_id": _model_id(cfg, cell, eval_n),
                    "eval_n": eval_n,
                    "ib": cell.ib,
                    "n_layers": len(cfg.widths[cell.width_idx]) + 1,
                    "n_params": res["n_params"],
                    "sum_frob": float(np.sum(res["frob"])),
                    "prod_frob": float(np.prod(res["frob"])),
                    "gap_loss": res["gap_loss"],
                    "gap_error": res["gap_error"],
                    "accepted": res["accepted"],
                    "final_mi": res["final_mi"],
                    "model_mi": mm["pen"],
                    "model_mi_out": mm["out"],
                    "model_mi_logdomain": mm["log"],
                    "model_mi_seed_avg": seed_avg,
                }
                rec.update(res["evals"][eval_n])
                records.append(rec)
            run = dict(res["run"])
            run["model_id"] = _model_id(cfg, cell, cfg.eval_sample_sizes[0])
            run["ib"] = cell.ib
            run_records.append(run)
            trend_feature.append(res["feature_mi_layers"])
            trend_model.append(mm["layers"])

    accepted = [r for r in records if r["accepted"] and
                np.isfinite(r["model_mi"])]
    table = report = None
    if len(accepted) >= 3:
        table = analysis.build_metric_table(accepted)
        report = analysis.correlation_report(table)
    trends = {
        "feature_mi_layers": np.array(trend_feature) if trend_feature else None,
        "model_mi_layers": np.array(trend_model) if trend_model else None,
    }
    _write_artifacts(cfg, records, run_records, table, report)
    if len(cfg.ib_flags) > 1:
        for flag, rep in arm_reports(records).items():
            if rep is None:
                continue
            path = os.path.join(cfg.out_dir, f"correlations_ib{int(flag)}.csv")
            with open(path, "w") as fh:
                fh.write(rep.to_csv())
    return SuiteResult(config=cfg, records=records, table=table,
                       report=report, run_records=run_records,
                       layer_trends=trends)


def arm_reports(records) -> dict:
    """Correlation reports per regularization arm of a binning suite."""
    out = {}
    for flag in (False, True):
        rows = [r for r in records
                if r.get("ib") == flag and r["accepted"]
                and np.isfinite(r["model_mi"])]
        if len(rows) >= 3:
            out[flag] = analysis.correlation_report(
                analysis.build_metric_table(rows))
        else:
            out[flag] = None
    return out


def _run_bounds_verify(cfg: SuiteConfig) -> SuiteResult:
    verdicts = []
    for name, (inst, n, mode) in bounds.reference_instances().items():
        modes = [mode] if mode != "thm1_fixed_encoder" else [mode, "thm2_learned"]
        for m in modes:
            rng = np.random.default_rng(np.random.SeedSequence(
                [derive_seed(cfg.master_seed, "verify", name, m)]))
            v = bounds.verify_bound(inst, n, 0.05, 10_000, rng, mode=m)
            verdicts.append(v.to_json() | {"n": n})
    path = os.path.join(cfg.out_dir, "verdicts.jsonl")
    with open(path, "w") as fh:
        for v in verdicts:
            fh.write(json.dumps(v) + "\n")
    return SuiteResult(config=cfg, records=verdicts, table=None, report=None,
                       run_records=[], layer_trends={})


# ---------------------------------------------------------------------------
# artifacts


def _write_artifacts(cfg, records, run_records, table, report):
    out = cfg.out_dir
    with open(os.path.join(out, "runs.jsonl"), "w") as fh:
        for r in run_records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    with open(os.path.join(out, "metrics.csv"), "w") as fh:
        fh.write("model_id,layer,estimator,conditional,value_nats\n")
        est_map = [("mi_mc", "mc", "false"), ("mi_jensen", "jensen", "false"),
                   ("mi_mc_cond", "mc", "true"),
                   ("mi_jensen_cond", "jensen", "true")]
        for r in records:
            layer = r["n_layers"] - 1
            for key, est, cond in est_map:
                if key in r:
                    fh.write(f"{r['model_id']},{layer},{est},{cond},"
                             f"{float(r[key])!r}\n")
    if table is not None:
        with open(os.path.join(out, "metric_table.csv"), "w") as fh:
            fh.write(table.to_csv())
    if report is not None:
        with open(os.path.join(out, "correlations.csv"), "w") as fh:
            fh.write(report.to_csv())
    if table is not None:
        best = ("combined_rescaled_mi_jensen_cond"
                if "combined_rescaled_mi_jensen_cond" in table.metrics
                else "combined_rescaled_mi_mc_cond")
        if best in table.metrics:
            write_scatter_svg(os.path.join(out, "scatter.svg"),
                              table.metrics[best], table.gaps["loss"],
                              xlabel=best, ylabel="generalization gap (loss)")


def write_scatter_svg(path, xs, ys, xlabel="x", ylabel="y",
                      width=640, height=440) -> None:
    """Scatter plot with a dashed degree-2 least-squares fit, as plain SVG."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    margin = 50.0
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    sx = lambda v: margin + (v - x0) / (x1 - x0) * (width - 2 * margin)
    sy = lambda v: height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height / 2})">{ylabel}</text>',
    ]
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     f'fill="steelblue" fill-opacity="0.7"/>')
    if len(xs) >= 3 and np.ptp(xs) > 0:
        coeffs = np.polyfit(xs, ys, 2)
        grid = np.linspace(x0, x1, 100)
        fit = np.polyval(coeffs, grid)
        pts = " ".join(f"{sx(gx):.2f},{sy(gy):.2f}" for gx, gy in zip(grid, fit))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="crimson" '
                     f'stroke-dasharray="6 4" stroke-width="1.5"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="ibgb",
        description="run the 2D experiment suites and bound verification")
    ap.add_argument("--config", help="suite config file (key = value sections)")
    ap.add_argument("--kind", choices=["constrained2d", "unconstrained2d",
                                       "binning2d", "bounds_verify"])
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int, help="master seed")
    ap.add_argument("--jobs", type=int,
                    default=int(os.environ.get("IBGB_JOBS", "1")))
    ap.add_argument("--smoke", action="store_true",
                    help="run the 8-model smoke grid")
    args = ap.parse_args(argv)

    try:
        if args.config:
            cfg = parse_config_file(args.config)
        else:
            cfg = SuiteConfig(kind=args.kind or "constrained2d")
        if args.kind:
            cfg = replace(cfg, kind=args.kind, widths=[])
        if args.out:
            cfg.out_dir = args.out
        if args.seed is not None:
            cfg.master_seed = args.seed
        cfg.jobs = max(1, args.jobs)
        if args.smoke:
            cfg = cfg.smoke()
    except (InvalidArgument, KeyError, OSError, configparser.Error) as exc:
        print(f"config error: {exc}")
        return 2

    try:
        result = run_suite(cfg)
    except OSError as exc:
        print(f"io error: {exc}")
        return 1
    n_models = len(result.records)
    n_acc = sum(1 for r in result.records if r.get("accepted"))
    print(f"suite {cfg.kind}: {n_models} rows, {n_acc} accepted, "
          f"artifacts in {cfg.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())


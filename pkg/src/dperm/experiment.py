"""Reproducible experiment harness: method x budget x repetition sweeps.

Budget convention: a grid budget is the TOTAL privacy cost of one method run.
The three-stage pipeline therefore receives eps/3 (pure) or mu/sqrt(3) (GDP)
per stage so that its composed total equals the grid value and matched-budget
comparisons are at equal total privacy; single-mechanism methods spend the
grid value directly.

Determinism: the generator for cell (method m, budget b, repetition r) is
derived by hashing (seed, m, b.kind, b.value, r), so cells never share a
stream and reports are byte-identical for identical config and seed.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field, fields

import numpy as np

from . import baselines, data
from .erm import Dataset, LossModel, certify_bounds, exact_minimizer, total_objective
from .localization import output_perturb
from .pipeline import PipelineConfig, run_localized_asap
from .privacy import GDP, PURE, PrivacyBudget, stream
from .rates import RateQuery, excess_risk_rate

METHODS = ("localized_asap", "output_perturb", "dp_gd_autoclip", "noisy_gd")
DATASETS = ("wine_red", "wine_white", "synthetic")
DATA_DIR_ENV = "DPERM_DATA_DIR"


@dataclass
class ExperimentConfig:
    dataset: str = "synthetic"
    dataset_path: str | None = None
    reg_alpha: float = 1.0
    rho: float = 0.01
    tau: float = 1e-6
    budgets: tuple[PrivacyBudget, ...] = (PrivacyBudget.pure(1.0),)
    methods: tuple[str, ...] = ("localized_asap", "output_perturb")
    repetitions: int = 50
    seed: int = 0
    domain_radius: float = 1.0
    center_labels: bool = True
    k_max: int = 2000
    c_h: float = 1.0
    c_k: float = 1.0
    c_tau: float = 1.0
    gd_iters: int = 100
    gd_step: float = 1e-5
    noisy_gd_variant: str = "smooth"
    noisy_gd_iters: int | None = None
    synthetic_n: int = 100
    synthetic_d: int = 2
    synthetic_label_noise: float = 0.2

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ValueError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; valid: {METHODS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not (self.reg_alpha > 0):
            raise ValueError("reg_alpha must be > 0")
        if self.noisy_gd_variant not in ("smooth", "lipschitz"):
            raise ValueError("noisy_gd_variant must be 'smooth' or 'lipschitz'")


_BOOL_KEYS = {"center_labels"}
_INT_KEYS = {"repetitions", "seed", "k_max", "gd_iters", "noisy_gd_iters",
             "synthetic_n", "synthetic_d"}
_FLOAT_KEYS = {"reg_alpha", "rho", "tau", "domain_radius", "c_h", "c_k", "c_tau",
               "gd_step", "synthetic_label_noise"}
_STR_KEYS = {"dataset", "dataset_path", "noisy_gd_variant"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the key = value config format ('#' starts a comment).

    budgets is a comma-separated list of kind:value tokens, e.g.
    "pure:0.5, pure:1.0"; methods is a comma-separated name list.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key == "budgets":
            budgets = []
            for tok in val.split(","):
                tok = tok.strip()
                if not tok:
                    continue
                kind, _, bval = tok.partition(":")
                budgets.append(PrivacyBudget(kind.strip(), float(bval)))
            values["budgets"] = tuple(budgets)
        elif key == "methods":
            values["methods"] = tuple(m.strip() for m in val.split(",") if m.strip())
        elif key in _BOOL_KEYS:
            if val.lower() not in ("true", "false"):
                raise ValueError(f"config line {lineno}: {key} must be true or false")
            values[key] = val.lower() == "true"
        elif key in _INT_KEYS:
            values[key] = int(val)
        elif key in _FLOAT_KEYS:
            values[key] = float(val)
        elif key in _STR_KEYS:
            values[key] = val
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return ExperimentConfig(**values)


def config_digest(cfg: ExperimentConfig) -> str:
    parts = []
    for f in fields(cfg):
        parts.append(f"{f.name}={getattr(cfg, f.name)!r}")
    return hashlib.sha256(";".join(parts).encode("utf-8")).hexdigest()[:16]


@dataclass
class CellStats:
    method: str
    budget: PrivacyBudget
    mean_excess_risk: float
    std: float
    min: float
    max: float
    reps: int
    failures: int
    lower_bound: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class RunReport:
    config: ExperimentConfig
    config_hash: str
    n: int
    d: int
    certified_lipschitz: float
    rows: list[CellStats] = field(default_factory=list)


def resolve_dataset(cfg: ExperimentConfig) -> Dataset:
    """Load and standardize the configured dataset."""
    if cfg.dataset == "synthetic":
        rng = stream(cfg.seed, "dataset", cfg.synthetic_n, cfg.synthetic_d)
        spec = data.SyntheticSpec(
            n=cfg.synthetic_n, d=cfg.synthetic_d, label_noise=cfg.synthetic_label_noise
        )
        raw = data.synthetic_ridge(spec, rng)
    else:
        path = cfg.dataset_path
        if path is None:
            base = os.environ.get(DATA_DIR_ENV, "data")
            path = os.path.join(base, data.WINE_FILENAMES[cfg.dataset])
        raw = data.load_wine_csv(path)
    return data.standardize(raw, center_labels=cfg.center_labels)


def _split_stage_budget(total: PrivacyBudget) -> PrivacyBudget:
    if total.kind == PURE:
        return PrivacyBudget.pure(total.value / 3.0)
    return PrivacyBudget.gdp(total.value / math.sqrt(3.0))


def _run_cell_once(method, model, bounds, budget, cfg, rng):
    """One repetition; returns (theta_hat, diagnostics dict)."""
    if method == "localized_asap":
        pc = PipelineConfig(
            rho=cfg.rho, tau=cfg.tau, k_max=cfg.k_max, c_h=cfg.c_h, c_k=cfg.c_k, c_tau=cfg.c_tau
        )
        res = run_localized_asap(model, bounds, _split_stage_budget(budget), pc, rng)
        diag = {
            "restarts": res.sample.restarts_used,
            "mh_acceptance": res.sample.mh_acceptance_rate,
            "k_used": res.params.schedule.n_steps,
            "k_theory": res.params.schedule.n_steps_theoretical,
            "in_domain": int(res.sample.accepted_inside_domain),
        }
        return res.theta_hat, diag
    if method == "output_perturb":
        loc = output_perturb(model, bounds, cfg.tau, budget, rng)
        return loc.theta_private, {}
    if method == "dp_gd_autoclip":
        gd = baselines.GdConfig(
            n_iters=cfg.gd_iters,
            step_rule="constant",
            step_value=cfg.gd_step,
            projection_radius=cfg.domain_radius,
            budget=budget,
        )
        return baselines.dp_gd_autoclip(model, gd, rng), {}
    if method == "noisy_gd":
        if cfg.noisy_gd_variant == "smooth":
            iters = cfg.noisy_gd_iters
            if iters is None:
                iters = max(1, int(math.ceil(bounds.kappa * math.log(max(model.n, 2)))))
            gd = baselines.GdConfig(
                n_iters=iters,
                step_rule="constant",
                step_value=1.0 / (model.n * bounds.smoothness),
                projection_radius=cfg.domain_radius,
                budget=budget,
            )
            return baselines.noisy_gd_smooth(model, bounds, gd, rng), {}
        iters = cfg.noisy_gd_iters if cfg.noisy_gd_iters is not None else cfg.gd_iters
        gd = baselines.GdConfig(
            n_iters=iters,
            step_rule="inverse_t",
            step_value=1.0,
            projection_radius=cfg.domain_radius,
            budget=budget,
        )
        return baselines.noisy_gd_lipschitz(model, bounds, gd, rng), {}
    raise ValueError(f"unknown method {method!r}")


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Full sweep. Failed repetitions are counted per cell, never dropped
    silently; a cell with zero completed repetitions reports NaN statistics."""
    ds = resolve_dataset(cfg)
    model = LossModel(dataset=ds, reg_alpha=cfg.reg_alpha)
    bounds = certify_bounds(model, cfg.domain_radius)
    theta_star = exact_minimizer(model)
    risk_star = total_objective(model, theta_star)
    report = RunReport(
        config=cfg,
        config_hash=config_digest(cfg),
        n=model.n,
        d=model.d,
        certified_lipschitz=bounds.lipschitz,
    )
    for method in cfg.methods:
        for budget in cfg.budgets:
            excesses = []
            failures = 0
            first_error = None
            diag_acc: dict = {}
            for rep in range(cfg.repetitions):
                rng = stream(cfg.seed, method, budget.kind, budget.value, rep)
                try:
                    theta_hat, diag = _run_cell_once(method, model, bounds, budget, cfg, rng)
                    excesses.append(total_objective(model, theta_hat) - risk_star)
                    for k, v in diag.items():
                        diag_acc.setdefault(k, []).append(v)
                except (ValueError, ArithmeticError) as exc:
                    failures += 1
                    if first_error is None:
                        first_error = str(exc)
            ex = np.asarray(excesses)
            regime = PURE if budget.kind == PURE else GDP
            lb = excess_risk_rate(
                RateQuery(
                    regime=regime,
                    d=model.d,
                    n=model.n,
                    lipschitz=bounds.lipschitz,
                    strong_convexity=bounds.strong_convexity,
                    epsilon=budget.value if regime == PURE else None,
                    mu=budget.value if regime == GDP else None,
                )
            )
            diagnostics = {k: float(np.mean(v)) for k, v in diag_acc.items()}
            if first_error is not None:
                diagnostics["first_error"] = first_error
            report.rows.append(
                CellStats(
                    method=method,
                    budget=budget,
                    mean_excess_risk=float(ex.mean()) if ex.size else float("nan"),
                    std=float(ex.std(ddof=1)) if ex.size > 1 else 0.0,
                    min=float(ex.min()) if ex.size else float("nan"),
                    max=float(ex.max()) if ex.size else float("nan"),
                    reps=int(ex.size),
                    failures=failures,
                    lower_bound=lb,
                    diagnostics=diagnostics,
                )
            )
    return report


_REPORT_HEADER = "method,budget_kind,budget_value,mean_excess_risk,std,reps,lower_bound"


def emit_report_csv(report: RunReport, path) -> None:
    """Write the report rows, sorted, floats at 17 significant digits."""
    rows = sorted(report.rows, key=lambda r: (r.method, r.budget.kind, r.budget.value))
    with open(path, "w", newline="") as fh:
        fh.write(_REPORT_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.method},{r.budget.kind},{r.budget.value:.17g},"
                f"{r.mean_excess_risk:.17g},{r.std:.17g},{r.reps},{r.lower_bound:.17g}\n"
            )


def emit_diagnostics_csv(report: RunReport, path) -> None:
    """Extended per-cell diagnostics (sampler restarts, acceptance, K, failures)."""
    rows = sorted(report.rows, key=lambda r: (r.method, r.budget.kind, r.budget.value))
    keys = sorted({k for r in rows for k in r.diagnostics if k != "first_error"})
    with open(path, "w", newline="") as fh:
        fh.write("method,budget_kind,budget_value,failures," + ",".join(keys) + "\n")
        for r in rows:
            vals = [f"{r.diagnostics[k]:.17g}" if k in r.diagnostics else "" for k in keys]
            fh.write(
                f"{r.method},{r.budget.kind},{r.budget.value:.17g},{r.failures},"
                + ",".join(vals) + "\n"
            )

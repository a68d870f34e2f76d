"""Experiment configuration, the three-way split of beta, and the experiment registry.

Every experiment writes into its own directory:

* ``series.csv``: one row per rho sample (or per trial), fixed columns, 17 significant digits
* ``plot_data.csv``: ``(x, y, label)`` triples
* ``manifest.json``: the full config, its SHA-256, library versions and the kernel backend

Nothing time-dependent is written, so identical config and seed give
byte-identical files.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import os
import platform
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy

from . import _kernels
from . import littlewood_paley as lp
from .asymptotics import decay_rate_report, delort_phase_coefficient, fit_log_phase
from .cubic import SQRT8, classify_resonance, cubic_error_residual
from .fitting import fit_power_law
from .parametrix import parametrix_residual
from .profiles import PRESETS as BETA_PRESETS
from .profiles import BetaProfile, from_transform, preset
from .quadratic import (low_frequency_smallness, pdo_operator_bound_check, quad_error_residual,
                        random_band_limited, second_order_vanishing_symbol, symbol_b1,
                        w1_values)
from .solver import NonlinearityParams, energy_e0, h1_triple, make_state, run, sample_slices
from .spectral import Field, GridSpec

SIMULATION_COLUMNS = ("rho", "sup_v", "sup_u_scaled", "h1_triple", "b_norm", "energy_e0",
                      "quad_residual_h1", "cubic_residual_h1")

CLASS_LABELS = {"non_resonant": "non_resonant", "resonant_at_0": "resonant_at_0",
                "resonant_at_sqrt8": "resonant_at_sqrt8", "both": "resonant_at_0_and_sqrt8"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

# named scenarios; explicit params keys override them
SCENARIOS = {
    "free": {"alpha0": 0.0, "beta0": 0.0, "beta_preset": "zero"},
    "cubic_const": {"alpha0": 0.0, "beta0": 1.0, "beta_preset": "zero"},
    "quadratic": {"alpha0": 1.0, "beta0": 0.0, "beta_preset": "zero"},
    "decay_a": {"alpha0": 1.0, "beta0": 1.0, "beta_preset": "zero"},
    "decay_b": {"alpha0": 1.0, "beta0": 0.0, "beta_preset": "fourier_bump"},
    "near_zero": {"alpha0": 0.0, "beta0": 0.0, "beta_preset": "gaussian_dd", "beta_part": "near0"},
    "sqrt8": {"alpha0": 0.0, "beta0": 0.0, "beta_preset": "fourier_bump",
              "beta_args": {"support": [1.5, 4.2]}},
}

DEFAULTS = {
    "preset": "free",
    "seed": 0,
    "grid": {"L": 8.0, "N": 1024},
    "solver": {"drho": 0.05, "rho_end": 100.0, "eps": 0.01},
    "params": {"alpha0": 0.0, "beta0": 0.0, "beta_preset": "zero", "beta_args": {},
               "beta_part": "full", "include_quarter_term": True, "include_r_beta": True},
    "pipeline": {"quad_nf": False, "cubic_nf": False, "parametrix": False},
    "fit": {"window": [10.0, 1000.0], "tail_start": 10.0, "delta": 0.05,
            "rhos": [20.0, 40.0, 80.0, 140.0, 200.0], "trials": 100},
    "split": {"r0": 0.15, "r8": 0.15},
    "output": {"dir": "runs"},
}

BETA_PARTS = ("full", "far", "near0", "near8")


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict
    # user-supplied keys only; overrides are applied here and re-resolved
    raw: Optional[dict] = None

    def __getitem__(self, key):
        return self.data[key]

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def canonical_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @property
    def grid(self) -> GridSpec:
        return GridSpec(float(self.data["grid"]["L"]), int(self.data["grid"]["N"]))

    def beta(self) -> BetaProfile:
        p = self.data["params"]
        beta = preset(p["beta_preset"], **p["beta_args"])
        if p["beta_part"] == "full":
            return beta
        s = self.data["split"]
        return getattr(split_beta(beta, s["r0"], s["r8"]), p["beta_part"])

    def params(self) -> NonlinearityParams:
        p = self.data["params"]
        return NonlinearityParams(float(p["alpha0"]), float(p["beta0"]), self.beta(),
                                  bool(p["include_quarter_term"]), bool(p["include_r_beta"]))


def _merge(base: dict, extra: dict, where: str) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if k not in base:
            raise ConfigError(f"unknown key {where}{k!r}")
        if isinstance(base[k], dict) and k != "beta_args":
            if not isinstance(v, dict):
                raise ConfigError(f"{where}{k} must be a section")
            out[k] = _merge(base[k], v, f"{where}{k}.")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _validate(d: dict):
    g, s, p, f, sp = d["grid"], d["solver"], d["params"], d["fit"], d["split"]
    n = g["N"]
    if not isinstance(n, int) or n < 8 or n & (n - 1):
        raise ConfigError(f"grid.N must be a power of two >= 8, got {n!r}")
    if not g["L"] > 0:
        raise ConfigError("grid.L must be positive")
    if not 0 < s["drho"] <= 0.1:
        raise ConfigError("solver.drho must lie in (0, 0.1]")
    if not s["rho_end"] > 1:
        raise ConfigError("solver.rho_end must exceed 1")
    if not s["eps"] >= 0:
        raise ConfigError("solver.eps must be non-negative")
    if p["beta_preset"] not in BETA_PRESETS:
        raise ConfigError(f"unknown beta preset {p['beta_preset']!r}")
    if p["beta_part"] not in BETA_PARTS:
        raise ConfigError(f"params.beta_part must be one of {BETA_PARTS}")
    if not isinstance(p["beta_args"], dict):
        raise ConfigError("params.beta_args must be a mapping")
    if not 0 < f["delta"] < 0.125:
        raise ConfigError("fit.delta must lie in (0, 1/8)")
    lo, hi = f["window"]
    if not 0 < lo < hi:
        raise ConfigError("fit.window must be increasing and positive")
    if not isinstance(f["trials"], int) or f["trials"] < 1:
        raise ConfigError("fit.trials must be a positive integer")
    for key in ("r0", "r8"):
        if not 0 < sp[key] < 0.3:
            raise ConfigError(f"split.{key} must lie in (0, 0.3)")
    if not isinstance(d["seed"], int):
        raise ConfigError("seed must be an integer")
    try:
        preset(p["beta_preset"], **p["beta_args"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad beta arguments: {exc}") from None


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    scenario = raw.get("preset", DEFAULTS["preset"])
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown preset {scenario!r}")
    base = copy.deepcopy(DEFAULTS)
    base["params"].update(copy.deepcopy(SCENARIOS[scenario]))
    d = _merge(base, raw, "")
    _validate(d)
    return ExperimentConfig(d, copy.deepcopy(raw))


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return config_from_dict(raw)


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.data, indent=2, sort_keys=True) + "\n"


def apply_overrides(cfg: ExperimentConfig, overrides) -> ExperimentConfig:
    """``section.key=value`` pairs; values are parsed as JSON, falling back to strings."""
    d = copy.deepcopy(cfg.raw) if cfg.raw is not None else cfg.to_dict()
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node, known = d, DEFAULTS
        parts = key.strip().split(".")
        for part in parts[:-1]:
            if not isinstance(known.get(part), dict):
                raise ConfigError(f"unknown config section in {key!r}")
            known = known[part]
            node = node.setdefault(part, {})
        if parts[-1] not in known:
            raise ConfigError(f"unknown config key {key!r}")
        node[parts[-1]] = value
    return config_from_dict(d)


# ----------------------------------------------------------------- split

@dataclass(frozen=True)
class BetaSplit:
    far: BetaProfile
    near0: BetaProfile
    near8: BetaProfile
    r0: float
    r8: float

    def reconstruction_error(self, beta: BetaProfile, zeta) -> float:
        zeta = np.asarray(zeta, dtype=float)
        total = self.far.transform(zeta) + self.near0.transform(zeta) + self.near8.transform(zeta)
        ref = beta.transform(zeta)
        den = max(float(np.linalg.norm(ref)), 1e-300)
        return float(np.linalg.norm(total - ref)) / den


def split_beta(beta: BetaProfile, r0: float = 0.15, r8: float = 0.15) -> BetaSplit:
    """Smooth frequency split into parts near 0, near +-sqrt(8) and the rest.

    The near parts have transforms supported in ``|zeta| <= 2 r0`` and
    ``||zeta| - sqrt(8)| <= 2 r8``.
    """
    if not (0 < r0 < 0.3 and 0 < r8 < 0.3):
        raise ValueError("cut radii must lie in (0, 0.3)")
    if 2 * r0 >= SQRT8 - 2 * r8:
        raise ValueError("cut regions around 0 and sqrt(8) overlap")

    def c0(k):
        return lp.theta(np.abs(k) / r0)

    def c8(k):
        return lp.theta((np.abs(k) - SQRT8) / r8)

    radius = beta.support_radius
    near0 = from_transform(f"{beta.name}:near0", lambda k: c0(k) * beta.transform(k),
                           support_radius=max(radius, 1.0 / r0), part="near0")
    near8 = from_transform(f"{beta.name}:near8", lambda k: c8(k) * beta.transform(k),
                           support_radius=max(radius, 1.0 / r8), part="near8")
    far = from_transform(f"{beta.name}:far", lambda k: (1.0 - c0(k) - c8(k)) * beta.transform(k),
                         support_radius=radius, part="far")
    if beta.is_zero:
        far = near0 = near8 = preset("zero")
    return BetaSplit(far, near0, near8, r0, r8)


# ------------------------------------------------------------------ output

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def emit_csv(series, path, columns=None) -> str:
    series = list(series)
    if not series:
        raise ValueError("empty series")
    if columns is None:
        columns = []
        for row in series:
            for k in row:
                if k not in columns:
                    columns.append(k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in series:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    text = buf.getvalue()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def emit_plot_data(series, path, x: str, ys) -> str:
    triples = [{"x": row[x], "y": row[y], "label": y}
               for y in ys for row in series if row.get(y) is not None]
    return emit_csv(triples, path, ("x", "y", "label"))


def _versions() -> dict:
    out = {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
           "backend": _kernels.backend()}
    if _kernels.HAVE_NUMBA:
        import numba
        out["numba"] = numba.__version__
    return out


def write_manifest(cfg: ExperimentConfig, name: str, out_dir, summary: dict, files) -> str:
    manifest = {"experiment": name, "config": cfg.data, "config_sha256": cfg.digest(),
                "seed": cfg["seed"], "versions": _versions(), "files": sorted(files),
                "summary": summary,
                "rerun": f"kgnf {name} --config config.json --out <dir>"}
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


# ------------------------------------------------------------- experiments

@dataclass
class ExperimentResult:
    rows: list
    summary: dict
    columns: Optional[tuple] = None
    plot_x: str = "rho"
    plot_y: tuple = ()


def _checkpoints(rho_end: float, drho: float, base: float = 2.0):
    """Geometric checkpoints from 10 aligned to the step lattice ``1 + k drho``."""
    out, r = [], 10.0
    while r < rho_end * (1 - 1e-9):
        out.append(1.0 + round((r - 1.0) / drho) * drho)
        r *= base
    out.append(1.0 + round((rho_end - 1.0) / drho) * drho)
    return sorted(set(out))


def _simulation_row(state, cfg, quad=None, cubic=None) -> dict:
    g = state.grid
    sv = float(np.max(np.abs(state.v)))
    return {"rho": state.rho, "sup_v": sv, "sup_u_scaled": sv * math.sqrt((1 + state.rho) / state.rho),
            "h1_triple": h1_triple(state), "b_norm": lp.b_infinity_norm_values(state.v, g, state.rho),
            "energy_e0": energy_e0(state).value, "quad_residual_h1": quad, "cubic_residual_h1": cubic}


def exp_simulate(cfg: ExperimentConfig) -> ExperimentResult:
    """Solver run with the normal-form residuals at geometric checkpoints."""
    s = cfg["solver"]
    grid, params = cfg.grid, cfg.params()
    drho = float(s["drho"])
    state = make_state(grid, float(s["eps"]), params, drho=drho)
    pipe = cfg["pipeline"]
    near0 = split_beta(params.beta, cfg["split"]["r0"], cfg["split"]["r8"]).near0
    rows = [_simulation_row(state, cfg)]
    h = 2 * drho
    for c in _checkpoints(float(s["rho_end"]), drho):
        if pipe["quad_nf"] or pipe["cubic_nf"]:
            rhos = [c + (i - 2) * h for i in range(5)]
            if rhos[0] <= state.rho:
                state, _ = run(state, c, record_initial=False)
                rows.append(_simulation_row(state, cfg))
                continue
            sl = sample_slices(state, rhos)
            mid = sl[2]
            quad = cub = None
            pairs = [(x.v, x.v_dot) for x in sl]
            if pipe["quad_nf"]:
                quad = quad_error_residual(pairs, c, h, grid, params.alpha0).norms["e_quad_h1"]
            if pipe["cubic_nf"]:
                # w = v + w1 removes the quadratic part first
                ws = []
                for (v, vd), r in zip(pairs, rhos):
                    w1 = w1_values(v, vd, r, grid, params.alpha0)
                    ws.append((v + w1, vd))
                cub = cubic_error_residual(ws, c, h, near0, grid, states=pairs[2]).norms["e_cubic_h1"]
            rows.append(_simulation_row(mid, cfg, quad, cub))
            state = mid
        else:
            state, _ = run(state, c, record_initial=False)
            rows.append(_simulation_row(state, cfg))
    summary = {}
    for col in ("quad_residual_h1", "cubic_residual_h1"):
        pts = [(r["rho"], r[col]) for r in rows if r[col]]
        if len(pts) >= 2:
            x, y = zip(*pts)
            summary[col + "_exponent"] = fit_power_law(x, y).exponent
    return ExperimentResult(rows, summary, SIMULATION_COLUMNS, "rho", ("sup_v", "sup_u_scaled"))


def exp_decay_report(cfg: ExperimentConfig) -> ExperimentResult:
    s = cfg["solver"]
    state = make_state(cfg.grid, float(s["eps"]), cfg.params(), drho=float(s["drho"]))
    _, ledger = run(state, float(s["rho_end"]))
    rep = decay_rate_report(ledger.trace_rho, ledger.trace_sup_v, tail_start=cfg["fit"]["tail_start"])
    rows = [{"rho": r["rho"], "sup_v": r["sup_v"], "sup_u_scaled": r["sup_u_scaled"],
             "exponent": rep.exponent} for r in rep.rows()]
    rows = rows[:: max(1, len(rows) // 2000)]
    summary = {"exponent": rep.exponent, "growth_ratio": rep.growth_ratio, "tail_ratio": rep.tail_ratio}
    return ExperimentResult(rows, summary, ("rho", "sup_v", "sup_u_scaled", "exponent"),
                            "rho", ("sup_v",))


def _probe_run(cfg: ExperimentConfig, params: NonlinearityParams, probe: int):
    s = cfg["solver"]
    state = make_state(cfg.grid, float(s["eps"]), params, drho=float(s["drho"]))
    rec = {"rho": [state.rho], "v": [state.v[probe]], "v_dot": [state.v_dot[probe]]}

    def on_step(st):
        rec["rho"].append(st.rho)
        rec["v"].append(st.v[probe])
        rec["v_dot"].append(st.v_dot[probe])

    run(state, float(s["rho_end"]), checkpoints=[float(s["rho_end"])], on_step=on_step)
    return {k: np.asarray(v) for k, v in rec.items()}


def exp_log_phase(cfg: ExperimentConfig) -> ExperimentResult:
    params = cfg.params()
    probe = int(np.argmin(np.abs(cfg.grid.y)))
    nl = _probe_run(cfg, params, probe)
    free = _probe_run(cfg, NonlinearityParams(), probe)
    lo, hi = cfg["fit"]["window"]
    hi = min(hi, float(cfg["solver"]["rho_end"]))
    fit = fit_log_phase(nl["rho"], nl["v"], nl["v_dot"], (lo, hi),
                        reference=(free["v"], free["v_dot"]), alpha0=params.alpha0)
    target = delort_phase_coefficient(params.alpha0, params.beta0)
    row = {"slope": fit.slope, "stderr": fit.stderr, "amplitude_sq": fit.amplitude_sq,
           "coefficient": fit.coefficient, "target": target,
           "relative_error": abs(fit.coefficient - target) / target if target else None,
           "unwrap_flagged": fit.unwrap_flagged}
    return ExperimentResult([row], dict(row), tuple(row), "slope", ())


def exp_quad_nf_residual(cfg: ExperimentConfig) -> ExperimentResult:
    d = cfg.to_dict()
    d["pipeline"] = {"quad_nf": True, "cubic_nf": False, "parametrix": False}
    res = exp_simulate(config_from_dict(d))
    return ExperimentResult(res.rows, res.summary, SIMULATION_COLUMNS, "rho", ("quad_residual_h1",))


def exp_cubic_nf_residual(cfg: ExperimentConfig) -> ExperimentResult:
    d = cfg.to_dict()
    d["pipeline"] = {"quad_nf": False, "cubic_nf": True, "parametrix": False}
    res = exp_simulate(config_from_dict(d))
    return ExperimentResult(res.rows, res.summary, SIMULATION_COLUMNS, "rho", ("cubic_residual_h1",))


def exp_parametrix_residual(cfg: ExperimentConfig) -> ExperimentResult:
    beta = cfg.beta()
    rows = []
    for rho in cfg["fit"]["rhos"]:
        k3 = parametrix_residual(3, beta, float(rho))
        k1 = parametrix_residual(1, beta, float(rho))
        st = k3.stats
        rows.append({"rho": float(rho), "k3_sup": st["k_sup"], "e3_sup": st["e_sup"],
                     "b_norm": st["b_norm"], "fd_error": st["fd_error"],
                     "peak_frequency": st["peak_frequency"], "k1_sup": k1.stats["k_sup"],
                     "e1_sup": k1.stats["e_sup"]})
    summary = {}
    ks = [r["k3_sup"] for r in rows]
    if min(ks) > 0:
        summary["k3_variation"] = max(ks) / min(ks)
    if len(rows) >= 2 and all(r["e3_sup"] > 0 for r in rows):
        summary["e3_exponent"] = fit_power_law([r["rho"] for r in rows],
                                               [r["e3_sup"] for r in rows]).exponent
    return ExperimentResult(rows, summary, tuple(rows[0]), "rho", ("k3_sup", "e3_sup", "k1_sup"))


def exp_resonance_classify(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg["params"]
    rep = classify_resonance(cfg.beta())
    row = {"preset": p["beta_preset"], "part": p["beta_part"],
           "classification": CLASS_LABELS[rep.classification],
           "abs_hat_0": abs(rep.hat_at_0), "abs_hat_prime_0": abs(rep.hat_prime_at_0),
           "abs_hat_sqrt8": abs(rep.hat_at_sqrt8), "hat_sup": rep.hat_sup}
    return ExperimentResult([row], {"classification": row["classification"]}, tuple(row), "preset", ())


def exp_psido_bounds(cfg: ExperimentConfig) -> ExperimentResult:
    grid = GridSpec(cfg.grid.half_width, min(cfg.grid.points, 256))
    sym = symbol_b1(1.0)
    rows = []
    for rho in (4.0, 16.0, 64.0, 256.0):
        w = pdo_operator_bound_check(sym, rho, grid, trials=cfg["fit"]["trials"], seed=cfg["seed"])
        rows.append({"rho": rho, **{k: w[k] for k in ("est1_l2", "est1_linf", "est3", "est5", "trials")}})
    small = low_frequency_smallness(second_order_vanishing_symbol(), [4.0, 16.0, 64.0, 256.0], grid,
                                    trials=cfg["fit"]["trials"], seed=cfg["seed"])
    return ExperimentResult(rows, {"low_frequency_exponent": small["exponent"]}, tuple(rows[0]),
                            "rho", ("est1_l2", "est3", "est5"))


def exp_lp_properties(cfg: ExperimentConfig) -> ExperimentResult:
    grid = cfg.grid
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    for rho in (4.0, 16.0, 64.0, 256.0):
        worst = {"bernstein_l2": 0.0, "bernstein_h1": 0.0, "algebra": 0.0}
        for _ in range(cfg["fit"]["trials"]):
            u = Field(grid, random_band_limited(grid, rng, decay=rng.uniform(1.0, 3.0)))
            v = Field(grid, random_band_limited(grid, rng, decay=rng.uniform(1.0, 3.0)))
            for lam in lp.dyadic_ladder(grid):
                b = lp.bernstein_check(u, lam)
                if b:
                    worst["bernstein_l2"] = max(worst["bernstein_l2"], b["l2_ratio"])
                    worst["bernstein_h1"] = max(worst["bernstein_h1"], b["h1_ratio"])
            a = lp.b_norm_algebra_check(u, v, rho)
            if a is not None:
                worst["algebra"] = max(worst["algebra"], a)
        rows.append({"rho": rho, **worst})
    return ExperimentResult(rows, {k: max(r[k] for r in rows) for k in rows[0] if k != "rho"},
                            tuple(rows[0]), "rho", ("bernstein_l2", "bernstein_h1", "algebra"))


REGISTRY: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "simulate": exp_simulate,
    "decay_report": exp_decay_report,
    "log_phase": exp_log_phase,
    "quad_nf_residual": exp_quad_nf_residual,
    "cubic_nf_residual": exp_cubic_nf_residual,
    "parametrix_residual": exp_parametrix_residual,
    "resonance_classify": exp_resonance_classify,
    "psido_bounds": exp_psido_bounds,
    "lp_properties": exp_lp_properties,
}


def run_experiment(name: str, cfg: ExperimentConfig, out_dir: Optional[str] = None) -> dict:
    """Run a registered experiment and write its files; returns the manifest summary."""
    if name not in REGISTRY:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(REGISTRY)}")
    out_dir = os.path.join(cfg["output"]["dir"], name) if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    try:
        res = REGISTRY[name](cfg)
    except Exception as exc:
        if hasattr(exc, "add_note"):
            exc.add_note(f"while running experiment {name!r}")
        raise
    emit_csv(res.rows, os.path.join(out_dir, "series.csv"), res.columns)
    with open(os.path.join(out_dir, "config.json"), "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))
    files = ["series.csv", "manifest.json", "config.json"]
    if res.plot_y:
        emit_plot_data(res.rows, os.path.join(out_dir, "plot_data.csv"), res.plot_x, res.plot_y)
        files.append("plot_data.csv")
    write_manifest(cfg, name, out_dir, res.summary, files)
    return res.summary

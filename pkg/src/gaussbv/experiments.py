"""Named, reproducible experiments: one per acceptance-style identity.

Each experiment maps an ExperimentConfig to a JSON-serialisable report
{experiment, inputs, values, pass_flags}; the CLI adds wall time and writes
the files.  Reports are byte-identical across runs with the same config and
seed (timing excluded).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bv, cylinder, fields, gauss, semigroup, variational, wiener

__all__ = ["ExperimentConfig", "ConfigError", "REGISTRY", "run_experiment", "list_experiments"]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


_ALLOWED_KEYS = {
    "experiment",
    "seed",
    "level",
    "times",
    "levels",
    "radii",
    "n_paths",
    "n_steps",
    "out_dir",
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    level: int = 513
    times: tuple[float, ...] | None = None
    levels: tuple[float, ...] | None = None
    radii: tuple[float, ...] | None = None
    n_paths: int = 100_000
    n_steps: int = 512
    out_dir: str = "."

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - _ALLOWED_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in raw:
            raise ConfigError("config needs an 'experiment' key")
        name = raw["experiment"]
        if name not in REGISTRY:
            raise ConfigError(f"unknown experiment {name!r}; see `gaussbv list`")
        kwargs = dict(raw)
        for key in ("times", "levels", "radii"):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(float(v) for v in kwargs[key])
        for key in ("seed", "level", "n_paths", "n_steps"):
            if key in kwargs:
                kwargs[key] = int(kwargs[key])
        return cls(**kwargs)

    def schedule(self) -> tuple[float, ...]:
        return self.times if self.times else bv.DEFAULT_SCHEDULE


def _grid(dim: int, level: int, align=None):
    return fields.uniform_grid(dim, nodes=level, radius=6.0, align=align)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _random_smooth(grid, rng) -> fields.GridField:
    """A random smooth field: a low-degree polynomial plus mild trig modes."""
    dim = grid.dim
    mesh = np.meshgrid(*grid.axes, indexing="ij")
    vals = np.zeros_like(mesh[0])
    for j in range(dim):
        c = rng.normal(scale=[1.0, 0.5, 0.15], size=3)
        vals += c[0] * mesh[j] + c[1] * mesh[j] ** 2 + c[2] * mesh[j] ** 3
    for _ in range(2):
        freq = rng.uniform(0.5, 2.0, size=dim)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.normal(scale=0.8)
        arg = sum(freq[j] * mesh[j] for j in range(dim))
        vals += amp * np.sin(arg + phase)
    return fields.GridField(grid, vals)


def _ou_poly_exact(coeffs: np.ndarray, t: float, x: np.ndarray) -> np.ndarray:
    """Exact OU action on a 1-D polynomial via binomial/Gaussian moments;
    coeffs are ascending powers."""
    alpha = math.exp(-t)
    s2 = 1.0 - alpha * alpha
    # E[(alpha x + s y)^k] expanded with E[y^{2m}] = (2m-1)!!
    out = np.zeros_like(x)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        term = np.zeros_like(x)
        for m in range(0, k // 2 + 1):
            dfact = math.prod(range(2 * m - 1, 0, -2)) if m > 0 else 1
            term += (
                math.comb(k, 2 * m)
                * dfact
                * (alpha * x) ** (k - 2 * m)
                * s2**m
            )
        out += c * term
    return out


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------


def _exp_tv_equivalence(cfg: ExperimentConfig) -> dict:
    sched = cfg.schedule()
    values: dict = {}
    flags: dict = {}

    def record(name, report: bv.TVReport):
        values[name] = report.as_dict()
        flags[f"{name}_spread_lt_2pct"] = report.spread < 0.02

    g1a = _grid(1, cfg.level, align=0.0)
    record("halfspace", bv.perimeter(bv.IndicatorSet.halfspace(g1a, 0.0)))
    g1s = _grid(1, cfg.level, align=1.0)
    record("interval", bv.perimeter(bv.IndicatorSet.box(g1s, [(-1.0, 1.0)])))
    g2 = _grid(2, cfg.level)
    record("ball_d2", bv.perimeter(bv.IndicatorSet.ball(g2, 1.0)))

    g1 = _grid(1, cfg.level)
    for name, fn in (
        ("affine", lambda x: x),
        ("sin", np.sin),
        ("phi_profile", gauss.gaussian_cdf),
    ):
        u = fields.field_from_function(g1, fn)
        rep = bv.TVReport(
            tv_dual=bv.tv_dual(u, seed=cfg.seed),
            tv_semigroup=bv.tv_semigroup(u, schedule=sched),
            tv_relaxation=bv.tv_relaxation(u, schedule=sched),
            tv_smooth=bv.tv_smooth(u),
        )
        record(name, rep)
    return {"values": values, "pass_flags": flags}


def _exp_halfspace_perimeter(cfg: ExperimentConfig) -> dict:
    values: dict = {}
    flags: dict = {}
    ref0 = 1.0 / math.sqrt(2 * math.pi)
    for a in (0.0, 0.5, 1.0, 2.0):
        g = _grid(1, cfg.level, align=a)
        E = bv.IndicatorSet.halfspace(g, a)
        res = bv.isoperimetric_check(E)
        target = gauss.isoperimetric_profile(gauss.gaussian_cdf(-a))
        values[f"a={a}"] = {
            "perimeter": res.perimeter,
            "profile_target": float(target),
            "equality_flag": res.equality,
        }
        flags[f"a={a}_within_2pct"] = _rel(res.perimeter, target) < 0.02
        flags[f"a={a}_equality_flag"] = res.equality
    values["reference_halfspace0"] = ref0
    return {"values": values, "pass_flags": flags}


def _exp_isoperimetric(cfg: ExperimentConfig) -> dict:
    values: dict = {}
    flags: dict = {}
    suite = [
        ("halfspace0", bv.IndicatorSet.halfspace(_grid(1, cfg.level, align=0.0), 0.0)),
        ("halfspace1", bv.IndicatorSet.halfspace(_grid(1, cfg.level, align=1.0), 1.0)),
        ("interval", bv.IndicatorSet.box(_grid(1, cfg.level, align=1.0), [(-1.0, 1.0)])),
        ("ball_d2", bv.IndicatorSet.ball(_grid(2, cfg.level), 1.0)),
    ]
    for name, E in suite:
        res = bv.isoperimetric_check(E)
        values[name] = {
            "perimeter": res.perimeter,
            "profile": res.profile_value,
            "equality": res.equality,
        }
        flags[f"{name}_isoperimetric"] = res.passed
    flags["ball_strict_margin"] = values["ball_d2"]["perimeter"] > 1.05 * values["ball_d2"]["profile"]
    return {"values": values, "pass_flags": flags}


def _exp_coarea(cfg: ExperimentConfig) -> dict:
    sched = cfg.schedule()
    g = _grid(1, cfg.level)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    cases = {
        "affine": fields.field_from_function(g, lambda x: x),
        "halfspace_indicator": fields.field_from_function(
            _grid(1, cfg.level, align=0.0), lambda x: (x > 0).astype(float)
        ),
        "random_smooth": _random_smooth(g, rng),
    }
    values: dict = {}
    flags: dict = {}
    for name, u in cases.items():
        res = bv.coarea_check(u, schedule=sched)
        values[name] = {"lhs": res.lhs, "rhs": res.rhs}
        flags[f"{name}_gap_lt_2pct"] = res.passed
    return {"values": values, "pass_flags": flags}


def _exp_commutation(cfg: ExperimentConfig) -> dict:
    g = _grid(1, cfg.level)
    x = g.axes[0]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    rand_coeffs = rng.normal(scale=[1.0, 1.0, 0.5, 0.2, 0.05], size=5)
    polys = {
        "x2": np.array([0.0, 0.0, 1.0]),
        "x3": np.array([0.0, -1.0, 0.0, 0.5]),
        "x4": np.array([0.0, 0.0, 0.0, 0.0, 1.0]),
        "random_deg4": rand_coeffs,
    }
    values: dict = {}
    flags: dict = {}
    for t in (0.1, 0.5, 1.0):
        for name, coeffs in polys.items():
            u = fields.GridField(g, np.polynomial.polynomial.polyval(x, coeffs))
            res = semigroup.commutation_residual(u, t)
            values[f"{name}_t={t}"] = res
            flags[f"{name}_t={t}_lt_1e-5"] = res < 1e-5
    # semigroup law against the exact polynomial action
    law_vals = []
    ok = True
    for k in range(10):
        s, t = rng.uniform(0.05, 0.8, size=2)
        coeffs = rng.normal(scale=[1.0, 1.0, 0.5, 0.2, 0.05], size=5)
        u = fields.GridField(g, np.polynomial.polynomial.polyval(x, coeffs))
        two_step = semigroup.ou_apply(semigroup.ou_apply(u, s), t)
        one_step = semigroup.ou_apply(u, s + t)
        exact = _ou_poly_exact(coeffs, s + t, x)
        w = u.weight_tensor
        single_err = float(np.sum(w * np.abs(one_step.values - exact)))
        law_gap = float(np.sum(w * np.abs(two_step.values - one_step.values)))
        law_vals.append({"s": float(s), "t": float(t), "gap": law_gap, "single_err": single_err})
        ok &= law_gap <= 2.0 * single_err + 1e-9
    values["semigroup_law"] = law_vals
    flags["semigroup_law_2x_single_tolerance"] = ok
    return {"values": values, "pass_flags": flags}


def _exp_ou_l1_bound(cfg: ExperimentConfig) -> dict:
    values: dict = {}
    flags: dict = {}
    sets = {
        "halfspace": bv.IndicatorSet.halfspace(_grid(1, cfg.level, align=0.0), 0.0),
        "interval": bv.IndicatorSet.box(_grid(1, cfg.level, align=1.0), [(-1.0, 1.0)]),
    }
    for name, E in sets.items():
        per = bv.tv_semigroup(E.membership)
        for t in (0.01, 0.05):
            lhs, ct, passed = semigroup.ou_l1_bound_check(E.membership, t, perimeter=per)
            values[f"{name}_t={t}"] = {"lhs": lhs, "c_t": ct, "c_t_P": ct * per}
            flags[f"{name}_t={t}_bound"] = passed
    return {"values": values, "pass_flags": flags}


def _exp_cylinder_monotonicity(cfg: ExperimentConfig) -> dict:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    values: dict = {}
    flags: dict = {}
    worst = 0.0
    all_ok = True
    for dim, level in ((2, min(cfg.level, 161)), (3, 49)):
        g = _grid(dim, level)
        for k in range(10):
            u = _random_smooth(g, rng)
            for m in range(1, dim):
                lhs, rhs, ok = cylinder.monotonicity_check(u, m, t=0.1)
                all_ok &= ok
                if rhs > 1e-12:
                    worst = max(worst, lhs / rhs)
        values[f"d={dim}_fields"] = 10
    values["worst_lhs_over_rhs"] = worst
    flags["monotonicity_20_fields"] = all_ok
    return {"values": values, "pass_flags": flags}


def _exp_rof_quadratic(cfg: ExperimentConfig) -> dict:
    g = _grid(1, cfg.level)
    data = fields.field_from_function(g, lambda x: x)
    tol = 1e-6
    sol = variational.rof_minimize(variational.quadratic_integrand(), data, tol=tol)
    target = fields.field_from_function(g, lambda x: 0.5 * x)
    err_sq = fields.integrate(
        data.with_values((sol.minimizer.values - target.values) ** 2)
    )
    l2_err = math.sqrt(max(err_sq, 0.0))
    values = {
        "l2_error_vs_half_x": l2_err,
        "duality_gap": sol.dual_residual,
        "iterations": sol.iterations,
        "objective": sol.objective,
    }
    flags = {
        "minimizer_within_1pct": l2_err < 0.01,
        "gap_below_tol": sol.dual_residual <= tol * max(1.0, abs(sol.objective)),
    }
    return {"values": values, "pass_flags": flags, "artifact_field": sol.minimizer}


def _exp_rof_convexity(cfg: ExperimentConfig) -> dict:
    g = _grid(1, cfg.level)
    convex_data = {
        "affine": lambda x: x,
        "smoothed_abs": lambda x: np.sqrt(x * x + 0.1),
        "square": lambda x: x * x,
        "relu": lambda x: np.maximum(0.0, x),
    }
    values: dict = {}
    flags: dict = {}
    F = variational.tv_integrand()
    for name, fn in convex_data.items():
        sol = variational.rof_minimize(F, fields.field_from_function(g, fn), tol=1e-5)
        ok = variational.convexity_check(sol.minimizer)
        values[name] = {"objective": sol.objective, "convex": ok}
        flags[f"{name}_minimizer_convex"] = ok
    # negative control: non-convex data, convexity recorded but not asserted
    sol = variational.rof_minimize(
        F, fields.field_from_function(g, lambda x: -x * x + x), tol=1e-5
    )
    values["nonconvex_control"] = {
        "objective": sol.objective,
        "convex": variational.convexity_check(sol.minimizer),
    }
    return {"values": values, "pass_flags": flags}


def _exp_relaxed_perimeter(cfg: ExperimentConfig) -> dict:
    values: dict = {}
    flags: dict = {}
    ref = 1.0 / math.sqrt(2 * math.pi)
    g = _grid(1, cfg.level)
    half = fields.const_field(g, 0.5)
    v_half = variational.relaxed_perimeter(half, path="primal")
    values["constant_half"] = v_half
    flags["constant_half_within_1pct"] = _rel(v_half, ref) < 0.01
    profile = fields.field_from_function(g, gauss.gaussian_cdf)
    v_p = variational.relaxed_perimeter(profile, path="primal")
    v_d = variational.relaxed_perimeter(profile, path="dual")
    values["phi_profile"] = {"primal": v_p, "dual": v_d}
    flags["phi_profile_paths_agree_2pct"] = _rel(v_p, v_d) < 0.02
    ga = _grid(1, cfg.level, align=0.0)
    chi = fields.field_from_function(ga, lambda x: (x > 0).astype(float))
    v_chi = variational.relaxed_perimeter(chi, path="primal")
    per = bv.tv_semigroup(chi)
    values["indicator_reduction"] = {"relaxed": v_chi, "perimeter": per}
    flags["indicator_reduces_to_perimeter"] = _rel(v_chi, per) < 1e-9
    return {"values": values, "pass_flags": flags}


def _exp_box_growth(cfg: ExperimentConfig) -> dict:
    P = bv.box_perimeter_growth(20)
    diffs = np.diff(P)
    ratio = float(P[-1] / P[0])
    values = {
        "P": [float(v) for v in P],
        "ratio_P20_P1": ratio,
        "first_nonincreasing_m": int(np.argmax(diffs <= 0) + 2) if np.any(diffs <= 0) else -1,
    }
    # oracle-frozen contract: strict growth through m=19, ratio 1.153456;
    # the construction diverges only at log-log speed, so the increments
    # stall near m=20 (see decisions ledger).
    flags = {
        "increasing_through_m19": bool(np.all(diffs[:18] > 0)),
        "ratio_matches_oracle": abs(ratio - 1.1534556772757443) < 1e-9,
        "ratio_exceeds_1p15": ratio > 1.15,
    }
    return {"values": values, "pass_flags": flags}


def _exp_wiener_mc(cfg: ExperimentConfig) -> dict:
    values: dict = {}
    flags: dict = {}
    n_paths, n_steps = cfg.n_paths, cfg.n_steps
    ens = wiener.sample_brownian(n_paths, n_steps, a=0.0, seed=cfg.seed)
    stats = wiener.running_max_stats(ens)
    target = math.sqrt(2 / math.pi)
    sig = math.sqrt(stats.variance / stats.n_paths)
    values["running_max"] = stats.as_dict() | {"target": target, "sigma": sig}
    flags["E_M1_within_3sigma"] = abs(stats.mean - target) < 3 * sig

    pinned = wiener.sample_pinned(n_paths, n_steps, 0.0, 0.0, seed=cfg.seed)
    mid = pinned.at_time(0.5)
    var = float(mid.var(ddof=1))
    var_sig = var * math.sqrt(2.0 / (n_paths - 1))
    values["pinned_mid_variance"] = {"value": var, "target": 0.25, "sigma": var_sig}
    flags["pinned_variance_within_3sigma"] = abs(var - 0.25) < 3 * var_sig

    x0 = 2.0
    ou = wiener.ou_process(n_paths, n_steps, x0=x0, seed=cfg.seed)
    end = ou.values[:, -1]
    m_target = x0 * math.exp(-0.5)
    v_target = 1.0 - math.exp(-1.0)
    m_sig = float(end.std(ddof=1)) / math.sqrt(n_paths)
    v_sig = float(end.var(ddof=1)) * math.sqrt(2.0 / (n_paths - 1))
    values["ou_moments"] = {
        "mean": float(end.mean()),
        "mean_target": m_target,
        "var": float(end.var(ddof=1)),
        "var_target": v_target,
    }
    flags["ou_mean_within_3sigma"] = abs(float(end.mean()) - m_target) < 3 * m_sig
    flags["ou_var_within_3sigma"] = abs(float(end.var(ddof=1)) - v_target) < 3 * v_sig

    # clock matching: T_t at t = 0.5 corresponds to process time 2t = 1.0
    ou1 = wiener.ou_process(n_paths, n_steps, x0=1.0, seed=cfg.seed + 1)
    mc_mean = float(ou1.values[:, -1].mean())
    g = _grid(1, min(cfg.level, 513))
    u = fields.field_from_function(g, lambda x: x)
    tu = semigroup.ou_apply(u, 0.5)
    sg_val = float(fields.interp_at(tu, np.array([[1.0]]))[0])
    mc_sig = float(ou1.values[:, -1].std(ddof=1)) / math.sqrt(n_paths)
    values["clock_matching"] = {"mc": mc_mean, "semigroup": sg_val, "sigma": mc_sig}
    flags["clock_matched_within_3sigma"] = abs(mc_mean - sg_val) < 3 * mc_sig
    return {"values": values, "pass_flags": flags, "artifact_ensemble": ens}


def _exp_hino_uchida(cfg: ExperimentConfig) -> dict:
    domain = wiener.DomainGeometry.interval(-1.0, 1.0)
    n_steps = max(cfg.n_steps, 4096)
    seq = wiener.hino_uchida_estimator(
        domain, (4, 8, 16, 32), n_paths=cfg.n_paths, n_steps=n_steps, seed=cfg.seed
    )
    bounds = [b for _, b in seq]
    values = {"sequence": [{"n": n, "bound": b} for n, b in seq]}
    flags = {"bounded_within_3x_first": max(bounds) <= 3.0 * bounds[0]}
    return {"values": values, "pass_flags": flags}


def _exp_determinism(cfg: ExperimentConfig) -> dict:
    import json

    sub = ExperimentConfig(experiment="ou-l1-bound", seed=cfg.seed, level=cfg.level)
    rep1 = REGISTRY["ou-l1-bound"].runner(sub)
    rep2 = REGISTRY["ou-l1-bound"].runner(sub)
    s1 = json.dumps(rep1, sort_keys=True)
    s2 = json.dumps(rep2, sort_keys=True)
    return {
        "values": {"bytes": len(s1)},
        "pass_flags": {"reports_byte_identical": s1 == s2},
    }


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    runner: object


REGISTRY: dict[str, Experiment] = {}


def _register(name, description, runner):
    REGISTRY[name] = Experiment(name, description, runner)


_register("tv-equivalence", "four TV routes agree on the declared suite", _exp_tv_equivalence)
_register("halfspace-perimeter", "halfspace perimeters match the profile with equality", _exp_halfspace_perimeter)
_register("isoperimetric", "perimeter dominates the profile on the suite", _exp_isoperimetric)
_register("coarea", "TV equals the level-set perimeter integral", _exp_coarea)
_register("commutation", "Mehler commutation residual and semigroup law", _exp_commutation)
_register("ou-l1-bound", "short-time L1 bound with the c_t coefficient", _exp_ou_l1_bound)
_register("cylinder-monotonicity", "conditional expectations decrease smoothed TV", _exp_cylinder_monotonicity)
_register("rof-quadratic", "quadratic-integrand minimiser equals the elliptic solve", _exp_rof_quadratic)
_register("rof-convexity", "minimisers of convex data are convex", _exp_rof_convexity)
_register("relaxed-perimeter", "weak relaxation of the perimeter functional", _exp_relaxed_perimeter)
_register("box-growth", "slowly diverging perimeters of the product boxes", _exp_box_growth)
_register("wiener-mc", "Brownian, bridge and OU-process moment checks", _exp_wiener_mc)
_register("hino-uchida", "confined-path Lipschitz energies stay bounded", _exp_hino_uchida)
_register("determinism", "reports are byte-identical for fixed seeds", _exp_determinism)


def list_experiments() -> list[tuple[str, str]]:
    """Stable-order (name, description) pairs."""
    return [(e.name, e.description) for e in REGISTRY.values()]


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute one experiment and assemble its report dict (no I/O here)."""
    exp = REGISTRY[cfg.experiment]
    out = exp.runner(cfg)
    report = {
        "experiment": cfg.experiment,
        "inputs": {
            "seed": cfg.seed,
            "level": cfg.level,
            "times": list(cfg.times) if cfg.times else list(bv.DEFAULT_SCHEDULE),
            "n_paths": cfg.n_paths,
            "n_steps": cfg.n_steps,
        },
        "values": out["values"],
        "pass_flags": out["pass_flags"],
    }
    for key in ("artifact_field", "artifact_ensemble"):
        if key in out:
            report[key] = out[key]
    return report

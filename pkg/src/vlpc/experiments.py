"""Configuration loading, Monte Carlo sweeps and CSV output.

A config is one JSON document with an optional ``scenario`` section
(fields of :class:`~vlpc.scenario.Scenario`, channel fields inline or in a
``channel`` object, and ``pd_side_length`` as a shortcut for the default
triangle) and an optional ``experiment`` section. Anything omitted takes
its default, so ``{}`` is the basic scenario.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import robust
from ._threads import max_workers
from .csi import DEFAULT_SAMPLES, DEFAULT_SEED, CsiMoments, csi_moments, sqrt_psd
from .errors import ConfigError, DomainError, InfeasibleError, VlpcError
from .fisher import crlb, crlb_covariance, fim
from .ook import delta_threshold, rate_lower_bound_raw
from .positioning import p_p_for_snr, positioning_rmse
from .scenario import ChannelParams, Scenario, gain_vector, triangle_offsets

KINDS = ("position-sweep", "crlb-map", "allocate", "sweep")
POSITIONING_PARAMS = ("snr_db", "side_length", "test_point")
ALLOCATION_PARAMS = ("p_out", "p_total", "rbar")
# horizontal test points of the reference layout (room corner at the origin)
TEST_POINTS = {1: (1.0, 1.0), 2: (1.5, 1.5), 3: (2.0, 2.0), 4: (2.5, 2.5)}
DEFAULT_DRAWS = 10_000

_CHANNEL_FIELDS = ("theta_half_deg", "a_pd", "g_conc", "t_f", "fov_deg")
_SCALAR_FIELDS = ("sigma2_p", "sigma2_c", "bandwidth_hz", "t_p", "t_u", "t_c", "i_dc",
                  "peak_amp", "eps_sym", "p_o_max", "p_e_max")
_VEC_FIELDS = ("lamp", "mu_position")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str | None = None
    sweep_param: str | None = None
    values: tuple = ()
    trials: int = 1000
    seed: int = DEFAULT_SEED
    output: str | None = None
    p_total: float = 10.0
    rbar: float = 10e6
    p_out: float = 0.05
    snr_db: float = 5.0  # fixed SNR for side-length and test-point sweeps
    p_p: float | None = None  # crlb-map power (default: the positioning cap)
    grid: int = 21
    room: tuple = (5.0, 5.0)
    n_draws: int = DEFAULT_DRAWS
    n_samples: int = DEFAULT_SAMPLES
    source: str | None = None

    def replace(self, **kw) -> "ExperimentConfig":
        import dataclasses

        return dataclasses.replace(self, **kw)


_EXPERIMENT_FIELDS = {
    "kind", "sweep", "trials", "seed", "output", "p_total", "rbar", "p_out",
    "snr_db", "p_p", "grid", "room", "n_draws", "n_samples",
}


# ---------------------------------------------------------------------------
# config


def _num(obj, key, path, probs, positive=False, nonneg=False):
    if key not in obj:
        return None
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        probs.append((f"{path}{key}", "must be a finite number"))
        return None
    if positive and not v > 0:
        probs.append((f"{path}{key}", "must be positive"))
        return None
    if nonneg and v < 0:
        probs.append((f"{path}{key}", "must be non-negative"))
        return None
    return float(v)


def _vec(v, path, probs):
    if (not isinstance(v, (list, tuple)) or len(v) != 3
            or any(isinstance(t, bool) or not isinstance(t, (int, float))
                   or not math.isfinite(t) for t in v)):
        probs.append((path, "must be a list of 3 finite numbers"))
        return None
    return tuple(float(t) for t in v)


def _warn_unknown(obj, known, path):
    for key in obj:
        if key not in known:
            warnings.warn(f"unknown config field {path}{key!s} ignored", stacklevel=3)


def scenario_from_dict(obj, probs=None, path="scenario.") -> Scenario | None:
    """Scenario from a mapping; appends problems to ``probs`` when given."""
    own = probs is None
    probs = [] if own else probs
    if not isinstance(obj, dict):
        probs.append((path.rstrip("."), "must be an object"))
        if own:
            raise ConfigError(probs)
        return None
    _warn_unknown(obj, set(_CHANNEL_FIELDS) | set(_SCALAR_FIELDS) | set(_VEC_FIELDS)
                  | {"channel", "pd_offsets", "pd_side_length"}, path)
    n0 = len(probs)

    ch_src = dict(obj.get("channel", {})) if isinstance(obj.get("channel", {}), dict) else None
    if ch_src is None:
        probs.append((f"{path}channel", "must be an object"))
        ch_src = {}
    else:
        _warn_unknown(ch_src, set(_CHANNEL_FIELDS), f"{path}channel.")
    ch_path = f"{path}channel."
    for k in _CHANNEL_FIELDS:
        if k in obj:
            ch_src.setdefault(k, obj[k])
    ch = {}
    for k in _CHANNEL_FIELDS:
        v = _num(ch_src, k, ch_path, probs)
        if v is not None:
            ch[k] = v
    # rejected fields fall back to defaults so the later checks still run
    if "theta_half_deg" in ch and not 0 < ch["theta_half_deg"] < 90:
        probs.append((f"{ch_path}theta_half_deg", "must lie in (0, 90)"))
        del ch["theta_half_deg"]
    if "fov_deg" in ch and not 0 < ch["fov_deg"] <= 90:
        probs.append((f"{ch_path}fov_deg", "must lie in (0, 90]"))
        del ch["fov_deg"]
    for k in ("a_pd", "g_conc", "t_f"):
        if k in ch and not ch[k] > 0:
            probs.append((f"{ch_path}{k}", "must be positive"))
            del ch[k]

    kw = {}
    for k in _SCALAR_FIELDS:
        nonneg = k in ("sigma2_p", "sigma2_c")
        v = _num(obj, k, path, probs, positive=not nonneg, nonneg=nonneg)
        if v is not None:
            kw[k] = v
    for k in _VEC_FIELDS:
        if k in obj:
            v = _vec(obj[k], f"{path}{k}", probs)
            if v is not None:
                kw[k] = v
    if "pd_offsets" in obj and "pd_side_length" in obj:
        probs.append((f"{path}pd_offsets", "give pd_offsets or pd_side_length, not both"))
    elif "pd_offsets" in obj:
        offs = obj["pd_offsets"]
        if not isinstance(offs, list) or len(offs) < 3:
            probs.append((f"{path}pd_offsets", "must list at least 3 offsets"))
        else:
            rows = [_vec(o, f"{path}pd_offsets[{i}]", probs) for i, o in enumerate(offs)]
            if all(r is not None for r in rows):
                kw["pd_offsets"] = np.array(rows)
    elif "pd_side_length" in obj:
        side = _num(obj, "pd_side_length", path, probs, positive=True)
        if side is not None:
            kw["pd_offsets"] = triangle_offsets(side)

    bad = len(probs) > n0
    sc = _scenario_checked(dict(channel=ChannelParams(**ch), **kw), probs, path)
    if bad:
        sc = None
    if own and probs:
        raise ConfigError(probs)
    return sc


def _scenario_checked(kw, probs, path):
    """Build a Scenario, reporting every invariant violation at once."""
    import dataclasses

    obj = object.__new__(Scenario)
    base = Scenario()
    for f in dataclasses.fields(Scenario):
        v = kw.get(f.name, getattr(base, f.name))
        if f.name in ("lamp", "mu_position", "pd_offsets"):
            v = np.asarray(v, float)
        object.__setattr__(obj, f.name, v)
    found = obj.problems()
    if found:
        probs.extend((f"{path}{k}", msg) for k, msg in found)
        return None
    return Scenario(**{f.name: getattr(obj, f.name) for f in dataclasses.fields(Scenario)})


def experiment_from_dict(obj, probs=None, path="experiment.") -> ExperimentConfig | None:
    own = probs is None
    probs = [] if own else probs
    if not isinstance(obj, dict):
        probs.append((path.rstrip("."), "must be an object"))
        if own:
            raise ConfigError(probs)
        return None
    _warn_unknown(obj, _EXPERIMENT_FIELDS, path)
    n0 = len(probs)
    kw = {}
    if "kind" in obj:
        if obj["kind"] not in KINDS:
            probs.append((f"{path}kind", f"must be one of {', '.join(KINDS)}"))
        else:
            kw["kind"] = obj["kind"]
    for key in ("trials", "grid", "n_draws", "n_samples", "seed"):
        if key in obj:
            v = obj[key]
            if isinstance(v, bool) or not isinstance(v, int):
                probs.append((f"{path}{key}", "must be an integer"))
            elif key != "seed" and v < 1:
                probs.append((f"{path}{key}", "must be >= 1"))
            elif key == "seed" and v < 0:
                probs.append((f"{path}{key}", "must be >= 0"))
            else:
                kw[key] = v
    if kw.get("n_draws", DEFAULT_DRAWS) < 1000:
        probs.append((f"{path}n_draws", "must be >= 1000"))
    if kw.get("n_samples", DEFAULT_SAMPLES) < 1000:
        probs.append((f"{path}n_samples", "must be >= 1000"))
    for key, pos in (("p_total", True), ("rbar", False), ("p_out", True), ("snr_db", None),
                     ("p_p", False)):
        v = _num(obj, key, path, probs, positive=bool(pos), nonneg=pos is False)
        if v is not None:
            kw[key] = v
    if "p_out" in kw and not kw["p_out"] < 1:
        probs.append((f"{path}p_out", "must lie in (0, 1)"))
    if "output" in obj:
        if not isinstance(obj["output"], str) or not obj["output"]:
            probs.append((f"{path}output", "must be a non-empty string"))
        else:
            kw["output"] = obj["output"]
    if "room" in obj:
        r = obj["room"]
        if (not isinstance(r, list) or len(r) != 2
                or any(isinstance(t, bool) or not isinstance(t, (int, float)) or not t > 0
                       for t in r)):
            probs.append((f"{path}room", "must be [width, depth] with positive entries"))
        else:
            kw["room"] = (float(r[0]), float(r[1]))
    if "sweep" in obj:
        sw = obj["sweep"]
        if not isinstance(sw, dict):
            probs.append((f"{path}sweep", "must be an object with param and values"))
        else:
            _warn_unknown(sw, {"param", "values"}, f"{path}sweep.")
            param = sw.get("param")
            if param not in POSITIONING_PARAMS + ALLOCATION_PARAMS:
                probs.append((f"{path}sweep.param", "must be one of "
                              + ", ".join(POSITIONING_PARAMS + ALLOCATION_PARAMS)))
            else:
                kw["sweep_param"] = param
            vals = sw.get("values")
            got = _check_values(vals, f"{path}sweep.values", probs)
            if got is not None:
                kw["values"] = got
    if len(probs) > n0:
        if own:
            raise ConfigError(probs)
        return None
    return ExperimentConfig(**kw)


def _check_values(vals, path, probs):
    if (not isinstance(vals, list) or not vals
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   or not math.isfinite(v) for v in vals)):
        probs.append((path, "must be a non-empty list of finite numbers"))
        return None
    if any(b <= a for a, b in zip(vals, vals[1:])):
        probs.append((path, "must be strictly increasing"))
        return None
    return tuple(float(v) for v in vals)


def config_from_dict(obj, source=None):
    """``(ExperimentConfig, Scenario)`` from a parsed JSON document."""
    probs = []
    if not isinstance(obj, dict):
        raise ConfigError([("", "top level must be an object")])
    _warn_unknown(obj, {"scenario", "experiment"}, "")
    sc = scenario_from_dict(obj.get("scenario", {}), probs)
    ex = experiment_from_dict(obj.get("experiment", {}), probs)
    if probs:
        raise ConfigError(probs)
    return ex.replace(source=source), sc


def load_config(path):
    """Read and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError([("", f"cannot read {path}: {exc.strerror or exc}")]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"{path} is not valid JSON: {exc.msg} "
                                f"(line {exc.lineno}, column {exc.colno})")]) from exc
    return config_from_dict(obj, source=str(path))


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def emit_csv(rows, path, columns=None):
    """Write dict rows as CSV (header, '.' decimals, LF line ends).

    ``path`` may also be an open text stream. Missing cells are left empty.
    """
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []

    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])

    if hasattr(path, "write"):
        write(path)
        return path
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write(fh)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return path


def _parallel(fn, items):
    items = list(items)
    if len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers(len(items))) as pool:
        return list(pool.map(fn, items))  # ordered by input index


# ---------------------------------------------------------------------------
# positioning


POSITIONING_COLUMNS = ["param", "value", "x_u", "y_u", "z_u", "side_length", "snr_db",
                       "p_p", "rmse", "rmse_stderr", "sqrt_crlb", "trials", "failures"]


def run_positioning_sweep(config: ExperimentConfig, scenario: Scenario):
    """RMSE and root CRLB per sweep point.

    ``snr_db`` sets P_p for that SNR at the first PD. ``side_length`` and
    ``test_point`` hold ``config.snr_db``; test points share the power that
    gives that SNR at the scenario's own MU position. The same noise draws
    are reused at every point.
    """
    param = config.sweep_param or "snr_db"
    if param not in POSITIONING_PARAMS:
        raise DomainError(f"positioning sweeps take one of {POSITIONING_PARAMS}")
    values = config.values or ((0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
                               if param == "snr_db" else ())
    if not values:
        raise DomainError("sweep values are required")
    normals = np.random.default_rng(config.seed).standard_normal(
        (config.trials, scenario.n_pd))
    shared_pp = p_p_for_snr(scenario, config.snr_db)

    def point(value):
        sc, snr = scenario, config.snr_db
        if param == "snr_db":
            snr = value
            p_p = p_p_for_snr(sc, snr)
        elif param == "side_length":
            if not value > 0:
                raise DomainError("side lengths must be positive")
            sc = scenario.replace(pd_offsets=triangle_offsets(value))
            p_p = p_p_for_snr(sc, snr)
        else:
            idx = int(value)
            if idx != value or idx not in TEST_POINTS:
                raise DomainError("test points are 1, 2, 3 or 4")
            x, y = TEST_POINTS[idx]
            sc = scenario.replace(mu_position=(x, y, scenario.mu_position[2]))
            p_p = shared_pp
        res = positioning_rmse(sc, p_p, config.trials, config.seed, normals=normals)
        side = float(np.linalg.norm(sc.pd_offsets[0] - sc.pd_offsets[1]))
        return {"param": param, "value": value, "x_u": sc.mu_position[0],
                "y_u": sc.mu_position[1], "z_u": sc.mu_position[2], "side_length": side,
                "snr_db": snr, "p_p": p_p, "rmse": res.rmse, "rmse_stderr": res.stderr,
                "sqrt_crlb": res.sqrt_crlb, "trials": res.trials, "failures": res.failures}

    return _parallel(point, values)


CRLB_MAP_COLUMNS = ["x_u", "y_u", "z_u", "p_p", "crlb", "sqrt_crlb"]


def run_crlb_map(config: ExperimentConfig, scenario: Scenario):
    """CRLB on a grid x grid lattice of the room at the MU height."""
    n = config.grid
    p_p = scenario.p_p_max if config.p_p is None else config.p_p
    if p_p > scenario.p_p_max * (1 + 1e-12):
        raise DomainError(f"p_p {p_p:g} exceeds the positioning cap {scenario.p_p_max:g}")
    z = scenario.mu_position[2]
    xs = np.linspace(0.0, config.room[0], n)
    ys = np.linspace(0.0, config.room[1], n)
    rows = []
    for x in xs:
        for y in ys:
            try:
                c = crlb(scenario, (x, y, z), p_p)
            except VlpcError:
                c = math.nan
            rows.append({"x_u": x, "y_u": y, "z_u": z, "p_p": p_p, "crlb": c,
                         "sqrt_crlb": math.sqrt(c) if c == c else math.nan})
    return rows


# ---------------------------------------------------------------------------
# allocation


def _gaussian_draws(moments: CsiMoments, n_draws, seed):
    root = sqrt_psd(moments.d, "D")
    z = np.random.default_rng(seed).standard_normal((n_draws, moments.n_pd))
    return moments.mu + z @ root


def empirical_outage(scenario: Scenario, allocation, moments: CsiMoments, rbar,
                     n_draws=DEFAULT_DRAWS, seed=DEFAULT_SEED, h_hat=None):
    """Fraction of ``dh ~ N(mu, D)`` draws with ``R_L(v^T (h_hat + dh), P_c) <= rbar``.

    ``allocation`` needs ``v`` and ``p_c``; ``h_hat`` defaults to the
    allocation's own estimate or the gain at the scenario's MU position.
    Returns ``(outage, stderr)``.
    """
    if n_draws < 1000:
        raise DomainError("n_draws must be at least 1000")
    h = _h_hat(scenario, allocation, h_hat)
    s = (h + _gaussian_draws(moments, n_draws, seed)) @ np.asarray(allocation.v, float)
    rate = rate_lower_bound_raw(s, allocation.p_c, scenario.peak_amp,
                                scenario.bandwidth_hz, scenario.sigma2_c)
    p = float(np.mean(rate <= rbar))
    return p, math.sqrt(p * (1.0 - p) / n_draws)


def average_rate(scenario: Scenario, allocation, moments: CsiMoments,
                 n_draws=DEFAULT_DRAWS, seed=DEFAULT_SEED, h_hat=None):
    """Mean lower-bound rate (clamped at 0) and its Monte Carlo stderr."""
    h = _h_hat(scenario, allocation, h_hat)
    s = (h + _gaussian_draws(moments, n_draws, seed)) @ np.asarray(allocation.v, float)
    rate = np.maximum(rate_lower_bound_raw(s, allocation.p_c, scenario.peak_amp,
                                           scenario.bandwidth_hz, scenario.sigma2_c), 0.0)
    return float(rate.mean()), float(rate.std(ddof=1) / math.sqrt(n_draws))


def _h_hat(scenario, allocation, h_hat):
    if h_hat is not None:
        return np.asarray(h_hat, float)
    got = getattr(allocation, "h_hat", None)
    return np.asarray(got, float) if got is not None else gain_vector(scenario)


ALLOCATION_COLUMNS = ["design", "param", "value", "p_total", "rbar", "p_out", "status",
                      "p_p", "p_c", "crlb", "sqrt_crlb", "outage", "outage_stderr",
                      "avg_rate", "avg_rate_stderr", "n_draws", "iterations", "converged",
                      "rank1", "message"]


def _moments_for(scenario, p_p, config):
    cov = crlb_covariance(fim(scenario, scenario.mu_position, p_p))
    return csi_moments(scenario, scenario.mu_position, cov, config.n_samples, config.seed)


def _evaluate_row(scenario, alloc, moments, rbar, config, base):
    out, out_se = empirical_outage(scenario, alloc, moments, rbar, config.n_draws,
                                   config.seed)
    rate, rate_se = average_rate(scenario, alloc, moments, config.n_draws, config.seed)
    row = dict(base)
    row.update(status="ok", p_p=alloc.p_p, p_c=alloc.p_c, crlb=alloc.crlb,
               sqrt_crlb=math.sqrt(alloc.crlb), outage=out, outage_stderr=out_se,
               avg_rate=rate, avg_rate_stderr=rate_se, n_draws=config.n_draws)
    return row


def allocate_point(scenario: Scenario, config: ExperimentConfig, p_total, rbar, p_out,
                   baselines=False, param=None, value=None):
    """Robust allocation (plus optional baselines) as result rows."""
    base = {"param": param, "value": value, "p_total": p_total, "rbar": rbar, "p_out": p_out}
    rows = []
    try:
        cfg = robust.AllocationConfig.from_scenario(scenario, p_total, rbar, p_out)
        res = robust.bcd_optimize(scenario, scenario.mu_position, cfg, seed=config.seed,
                                  n_samples=config.n_samples)
    except InfeasibleError as exc:
        rows.append(dict(base, design="robust", status="infeasible", message=str(exc)))
        cfg = None
        res = None
    except DomainError as exc:
        rows.append(dict(base, design="robust", status="invalid", message=str(exc)))
        return rows
    if res is not None:
        row = _evaluate_row(scenario, res, res.moments, rbar, config,
                            dict(base, design="robust"))
        row.update(iterations=res.iterations, converged=res.converged, rank1=res.rank1)
        rows.append(row)
    if baselines:
        if cfg is None:
            cfg = robust.AllocationConfig.from_scenario(scenario, p_total, rbar, p_out)
        for label, fn in (("non-robust", robust.nonrobust_allocation),
                          ("equal-power", robust.equal_power_allocation)):
            try:
                b = fn(scenario, scenario.mu_position, cfg)
            except InfeasibleError as exc:
                rows.append(dict(base, design=label, status="infeasible", message=str(exc)))
                continue
            mom = _moments_for(scenario, b.p_p, config)
            rows.append(_evaluate_row(scenario, b, mom, rbar, config, dict(base, design=label)))
    return rows


def run_allocation_sweep(config: ExperimentConfig, scenario: Scenario, baselines=False):
    """One robust allocation per sweep value; infeasible points stay in the output."""
    param = config.sweep_param
    if param not in ALLOCATION_PARAMS:
        raise DomainError(f"allocation sweeps take one of {ALLOCATION_PARAMS}")
    if not config.values:
        raise DomainError("sweep values are required")

    def point(value):
        kw = {"p_total": config.p_total, "rbar": config.rbar, "p_out": config.p_out}
        kw[param] = value
        return allocate_point(scenario, config, baselines=baselines, param=param,
                              value=value, **kw)

    return [row for rows in _parallel(point, config.values) for row in rows]


def rate_threshold(scenario: Scenario, rbar):
    """Convenience wrapper for the rate threshold of ``scenario``."""
    return delta_threshold(rbar, scenario.bandwidth_hz, scenario.sigma2_c, scenario.peak_amp)

"""Command-line front end: single computations, sweeps, simulation.

All numeric output is printed with 15 significant digits so golden-file
comparisons are stable.  Exit codes: 0 success, 2 usage/validation,
3 ambiguity (tie or non-unique maximum), 4 capacity.
"""

from __future__ import annotations

import functools
import json
import math

import click

from . import asymptotics, chain, exact, simulate
from .errors import (
    CapacityError,
    TieError,
    UnsupportedRefinementError,
    ValidationError,
)
from .model import ThresholdLadder


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in str(text).split(","))
    except ValueError:
        raise click.UsageError(f"expected comma-separated numbers, got {text!r}")


def _ints(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(float(tok)) for tok in str(text).split(","))
    except ValueError:
        raise click.UsageError(f"expected comma-separated integers, got {text!r}")


def _fractions(text: str) -> tuple:
    """Exact rationals from decimal ('0.575') or ratio ('23/40') tokens."""
    from fractions import Fraction

    try:
        return tuple(Fraction(tok) for tok in str(text).split(","))
    except (ValueError, ZeroDivisionError):
        raise click.UsageError(f"expected comma-separated rationals, got {text!r}")


def _count(text) -> int:
    """Integer count accepting scientific notation (1e7)."""
    v = float(text)
    if v != int(v) or v < 0:
        raise click.UsageError(f"expected a nonnegative integer count, got {text!r}")
    return int(v)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _pick(flag, config: dict, key: str):
    return flag if flag is not None else config.get(key)


def _ladder_from(config: dict, n, m, p, relaxed: bool) -> ThresholdLadder:
    n = _pick(n, config, "N")
    m = _pick(m, config, "M")
    p = _pick(p, config, "p")
    if n is None or p is None:
        raise click.UsageError("a ladder needs --N and --p (or a --config file)")
    probs = _floats(p) if not isinstance(p, (list, tuple)) else tuple(float(x) for x in p)
    thresholds = _ints(m) if m is not None else ()
    relaxed = relaxed or bool(config.get("relaxed", False))
    ladder = ThresholdLadder(N=int(n), M=thresholds, p=probs, strict=not relaxed)
    ladder.require_valid()
    return ladder


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as e:
            for v in e.violations:
                click.echo(f"error: {v}", err=True)
            raise SystemExit(2)
        except TieError as e:
            click.echo(f"ambiguous: {e}", err=True)
            raise SystemExit(3)
        except CapacityError as e:
            click.echo(f"capacity: {e}", err=True)
            raise SystemExit(4)
        except (ValueError, UnsupportedRefinementError) as e:
            click.echo(f"error: {e}", err=True)
            raise SystemExit(2)

    return wrapper


@click.group()
def main():
    """Speeds of random walks excited by their recent history."""


@main.command("speed")
@click.option("--N", "n", default=None, help="history window size")
@click.option("--M", "m", default=None, help="thresholds M1,...,Ml")
@click.option("--p", "p", default=None, help="probabilities p0,...,pl")
@click.option("--relaxed", is_flag=True, help="allow equal probabilities")
@click.option("--breakdown", is_flag=True, help="print per-band log masses")
@click.option("--json", "as_json", is_flag=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@_guarded
def cmd_speed(n, m, p, relaxed, breakdown, as_json, config_path):
    """Exact speed of a finite-window walk."""
    config = _load_config(config_path)
    ladder = _ladder_from(config, n, m, p, relaxed)
    result = exact.speed_multi(ladder)
    if as_json:
        obj = {
            "N": ladder.N,
            "M": list(ladder.M),
            "p": list(ladder.p),
            "speed": result.speed,
        }
        if breakdown:
            obj["band_log_masses"] = list(result.band_log_masses)
            obj["band_mean_fraction"] = list(result.band_mean_fraction)
        click.echo(json.dumps(obj, sort_keys=True))
        return
    m_text = ",".join(str(x) for x in ladder.M) if ladder.M else "none"
    p_text = ",".join(_fmt(x) for x in ladder.p)
    click.echo(f"N={ladder.N} M={m_text} p={p_text} speed={_fmt(result.speed)}")
    if breakdown:
        edges = ladder.thresholds
        for i, (lm, mf) in enumerate(
            zip(result.band_log_masses, result.band_mean_fraction)
        ):
            click.echo(
                f"band i={i} lo={edges[i]} hi={min(edges[i + 1] - 1, ladder.N)} "
                f"log_mass={_fmt(lm)} mean_fraction={_fmt(mf)}"
            )


@main.command("limit")
@click.option("--p", "p", required=True, help="probabilities p0,...,pl")
@click.option("--r", "r", default=None, help="threshold fractions r1,...,rl")
@click.option("--c", "c", default=None, help="integer offsets c1,...,cl (ties)")
@click.option("--json", "as_json", is_flag=True)
@_guarded
def cmd_limit(p, r, c, as_json):
    """Limiting speed as the window size grows."""
    probs = _floats(p)
    offsets = _floats(c) if c is not None else None
    # offsets require exact rationals; plain floats suffice otherwise
    if r is None:
        fractions = ()
    elif offsets is not None:
        fractions = _fractions(r)
    else:
        fractions = _floats(r)
    spec = asymptotics.LimitSpec(p=probs, r=fractions, c=offsets)
    report = asymptotics.limit_speed_multi(spec)
    if as_json:
        obj = {
            "admissible": list(report.admissible),
            "log_j": [jv.log_j for jv in report.j],
            "branches": [jv.branch for jv in report.j],
            "argmax": list(report.argmax),
            "alphas": None if report.alphas is None else list(report.alphas),
            "limit_speed": report.limit_speed,
        }
        click.echo(json.dumps(obj, sort_keys=True))
        return
    click.echo("admissible=" + ",".join(str(i) for i in report.admissible))
    for jv in report.j:
        click.echo(f"J i={jv.index} branch={jv.branch} log_j={_fmt(jv.log_j)}")
    click.echo("argmax=" + ",".join(str(i) for i in report.argmax))
    if report.alphas is not None:
        click.echo("alphas=" + ",".join(_fmt(a) for a in report.alphas))
    click.echo(f"limit_speed={_fmt(report.limit_speed)}")


@main.command("rstar")
@click.option("--p", "p", required=True, help="pair p0,p1")
@click.option("--json", "as_json", is_flag=True)
@_guarded
def cmd_rstar(p, as_json):
    """Critical threshold fraction r*(p0, p1)."""
    probs = _floats(p)
    if len(probs) != 2:
        raise click.UsageError("rstar needs exactly two probabilities")
    value = asymptotics.r_star(*probs)
    if as_json:
        click.echo(json.dumps({"rstar": value}))
    else:
        click.echo(f"rstar={_fmt(value)}")


def _axis_values(spec_text: str):
    parts = spec_text.split(":")
    if len(parts) not in (4, 5):
        raise click.UsageError(
            f"axis must be name:from:to:count[:log], got {spec_text!r}"
        )
    name = parts[0]
    if name not in ("r", "N", "M", "p0", "p1"):
        raise click.UsageError(f"unknown sweep axis {name!r}")
    lo, hi = float(parts[1]), float(parts[2])
    count = int(parts[3])
    if count < 2:
        raise click.UsageError("axis count must be >= 2")
    logspace = len(parts) == 5 and parts[4] == "log"
    if logspace:
        if lo <= 0 or hi <= 0:
            raise click.UsageError("log axis needs positive endpoints")
        ratio = (hi / lo) ** (1.0 / (count - 1))
        values = [lo * ratio**i for i in range(count)]
    else:
        step = (hi - lo) / (count - 1)
        values = [lo + step * i for i in range(count)]
    if name in ("N", "M"):
        values = [int(round(v)) for v in values]
    return name, values


def _sweep_point(base: dict, overrides: dict):
    """Resolve one grid point to (ladder, limit_speed or None)."""
    params = dict(base)
    params.update(overrides)
    n = int(params["N"])
    p0, p1 = params["p0"], params["p1"]
    if "r" in params and params["r"] is not None and "M" not in overrides:
        m = int(round(params["r"] * n))
    else:
        m = int(params["M"])
    m = min(max(m, 1), n)
    ladder = ThresholdLadder(N=n, M=(m,), p=(p0, p1))
    ladder.require_valid()
    speed = exact.speed_multi(ladder).speed
    try:
        limit = asymptotics.limit_speed_single(p0, p1, m / n)
    except TieError:
        limit = None
    return speed, limit


@main.command("sweep")
@click.option("--N", "n", default=None)
@click.option("--M", "m", default=None)
@click.option("--p", "p", default=None, help="pair p0,p1")
@click.option("--r", "r", default=None, type=float, help="threshold fraction")
@click.option("--axis", "axis1", default=None, help="name:from:to:count[:log]")
@click.option("--axis2", "axis2", default=None)
@click.option("--out", "out_path", default="-", help="output CSV path (- = stdout)")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@_guarded
def cmd_sweep(n, m, p, r, axis1, axis2, out_path, config_path):
    """Exact and limiting speed over a one- or two-axis parameter grid."""
    config = _load_config(config_path)
    n = _pick(n, config, "N")
    m = _pick(m, config, "M")
    p = _pick(p, config, "p")
    r = _pick(r, config, "r")
    probs = _floats(p) if p is not None else None
    if probs is not None and len(probs) != 2:
        raise click.UsageError("sweep supports single-threshold ladders (p0,p1)")
    base = {
        "N": int(n) if n is not None else None,
        "M": _ints(m)[0] if m is not None else None,
        "p0": probs[0] if probs else None,
        "p1": probs[1] if probs else None,
        "r": float(r) if r is not None else None,
    }
    axis1 = _pick(axis1, config, "axis")
    if axis1 is None:
        raise click.UsageError("sweep needs --axis name:from:to:count[:log]")
    axes = [_axis_values(axis1)]
    axis2 = _pick(axis2, config, "axis2")
    if axis2 is not None:
        axes.append(_axis_values(axis2))
    missing = [
        key
        for key in ("N", "p0", "p1")
        if base[key] is None and key not in [a for a, _ in axes]
    ]
    if missing:
        raise click.UsageError(f"sweep is missing parameters: {', '.join(missing)}")
    if base["M"] is None and base["r"] is None and not any(
        a in ("M", "r") for a, _ in axes
    ):
        raise click.UsageError("sweep needs --M or --r (or an axis over one)")

    lines = [",".join([a for a, _ in axes] + ["speed_exact", "speed_limit"])]
    grids = [(v,) for v in axes[0][1]]
    if len(axes) == 2:
        grids = [(v1, v2) for v1 in axes[0][1] for v2 in axes[1][1]]
    for point in grids:
        overrides = {axes[i][0]: point[i] for i in range(len(axes))}
        speed, limit = _sweep_point(base, overrides)
        cells = [
            str(v) if isinstance(v, int) else _fmt(v) for v in point
        ] + [_fmt(speed), "" if limit is None else _fmt(limit)]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if out_path == "-":
        click.echo(text, nl=False)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


@main.command("simulate")
@click.option("--N", "n", default=None)
@click.option("--M", "m", default=None)
@click.option("--p", "p", default=None)
@click.option("--relaxed", is_flag=True)
@click.option("--steps", "steps", default=None, help="steps per replica (1e7 ok)")
@click.option("--replicas", "replicas", default=None)
@click.option("--seed", "seed", default=None)
@click.option("--census", is_flag=True, help="tabulate post-burn-in increments")
@click.option("--T", "burn_in", default=None, help="census burn-in steps")
@click.option("--m", "census_m", default=None, help="census window length")
@click.option("--json", "as_json", is_flag=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@_guarded
def cmd_simulate(
    n, m, p, relaxed, steps, replicas, seed, census, burn_in, census_m, as_json, config_path
):
    """Monte Carlo speed estimate against the exact value."""
    config = _load_config(config_path)
    ladder = _ladder_from(config, n, m, p, relaxed)
    steps = _count(_pick(steps, config, "steps") or 0)
    replicas = _count(_pick(replicas, config, "replicas") or 1)
    seed = _count(_pick(seed, config, "seed") or 0)
    if steps <= 0:
        raise click.UsageError("simulate needs --steps")
    if replicas >= 2:
        res = simulate.estimate_speed(ladder, steps, replicas, seed)
    else:
        res = simulate.run(ladder, steps, seed)
    exact_speed = exact.speed_multi(ladder).speed
    z = (
        (res.empirical_speed - exact_speed) / res.stderr
        if res.stderr > 0
        else math.nan
    )
    census_result = None
    if census:
        burn_in = _count(_pick(burn_in, config, "T") or 0)
        census_m = _count(_pick(census_m, config, "m") or 0)
        if census_m <= 0:
            raise click.UsageError("census needs --m")
        census_result = simulate.increment_census(
            ladder, burn_in, census_m, max(replicas, 1), seed
        )
    if as_json:
        obj = {
            "steps": res.steps,
            "replicas": res.replica_count,
            "seed": res.seed,
            "rng": res.rng,
            "empirical_speed": res.empirical_speed,
            "stderr": res.stderr,
            "exact_speed": exact_speed,
            "z": None if math.isnan(z) else z,
        }
        if census_result is not None:
            obj["census"] = {
                "T": census_result.burn_in,
                "m": census_result.m,
                "frequency_plus": census_result.frequency_plus,
                "expected_plus": census_result.expected_plus,
                "z": census_result.z_score,
            }
        click.echo(json.dumps(obj, sort_keys=True))
        return
    click.echo(
        f"steps={res.steps} replicas={res.replica_count} seed={res.seed} "
        f"empirical_speed={_fmt(res.empirical_speed)} stderr={_fmt(res.stderr)} "
        f"exact_speed={_fmt(exact_speed)} z={_fmt(z)} rng={res.rng}"
    )
    if census_result is not None:
        click.echo(
            f"census_T={census_result.burn_in} census_m={census_result.m} "
            f"census_frequency_plus={_fmt(census_result.frequency_plus)} "
            f"census_expected={_fmt(census_result.expected_plus)} "
            f"census_z={_fmt(census_result.z_score)}"
        )


def _gspec_from(linear, table_path, config: dict) -> asymptotics.GSpec:
    linear = _pick(linear, config, "linear")
    table_path = _pick(table_path, config, "table")
    if (linear is None) == (table_path is None):
        raise click.UsageError("gmodel needs exactly one of --linear or --table")
    if linear is not None:
        rhos = _floats(linear) if not isinstance(linear, (list, tuple)) else tuple(linear)
        if len(rhos) != 2:
            raise click.UsageError("--linear needs rho0,rho1")
        spec = asymptotics.GSpec.linear(*rhos)
    else:
        knots, values = [], []
        with open(table_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                tokens = line.split(",")
                try:
                    x, v = float(tokens[0]), float(tokens[1])
                except (ValueError, IndexError):
                    continue  # header or comment line
                knots.append(x)
                values.append(v)
        spec = asymptotics.GSpec.table(knots, values)
    spec.require_valid()
    return spec


@main.command("gmodel")
@click.option("--linear", "linear", default=None, help="rho0,rho1")
@click.option("--table", "table_path", default=None, type=click.Path(exists=True))
@click.option("--N", "n_values", default=None, help="evaluate s(N;G) at these N")
@click.option("--json", "as_json", is_flag=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@_guarded
def cmd_gmodel(linear, table_path, n_values, as_json, config_path):
    """Fixed points and limiting speed of the N-threshold G model."""
    config = _load_config(config_path)
    spec = _gspec_from(linear, table_path, config)
    report = asymptotics.g_limit_speed(spec)
    n_values = _pick(n_values, config, "N")
    ns = _ints(n_values) if n_values is not None else ()
    finite = [(n, exact.speed_g(n, spec)) for n in ns] if report.unique else []
    if as_json:
        obj = {
            "fixed_points": list(report.fixed_points),
            "f_values": list(report.f_values),
            "p_star": report.p_star,
            "limit_speed": report.speed,
            "competing": list(report.competing),
            "finite_n": [{"N": n, "speed": s} for n, s in finite],
        }
        click.echo(json.dumps(obj, sort_keys=True))
    else:
        for x, fv in zip(report.fixed_points, report.f_values):
            click.echo(f"fixed_point p={_fmt(x)} F={_fmt(fv)}")
        if report.unique:
            click.echo(f"p_star={_fmt(report.p_star)}")
            click.echo(f"limit_speed={_fmt(report.speed)}")
            for n, s in finite:
                click.echo(f"s N={n} value={_fmt(s)}")
        else:
            click.echo(
                "non_unique_maximum competing="
                + ",".join(_fmt(x) for x in report.competing)
            )
    if not report.unique:
        raise SystemExit(3)


@main.command("stationary")
@click.option("--N", "n", default=None)
@click.option("--M", "m", default=None)
@click.option("--p", "p", default=None)
@click.option("--relaxed", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@_guarded
def cmd_stationary(n, m, p, relaxed, as_json, config_path):
    """Stationary level weights; brute-force residual for small N."""
    config = _load_config(config_path)
    ladder = _ladder_from(config, n, m, p, relaxed)
    measure = chain.level_weights(ladder)
    masses = measure.level_masses()
    residual = None
    brute_gap = None
    if ladder.N <= chain.BRUTEFORCE_N_MAX:
        full = chain.expand_levels(measure)
        residual = chain.stationarity_residual(ladder, full.probs)
        brute = chain.stationary_bruteforce(ladder)
        brute_gap = float(abs(brute.probs - full.probs).max())
    if as_json:
        obj = {
            "N": ladder.N,
            "log_alpha": [float(x) for x in measure.log_alpha],
            "log_C": measure.log_C,
            "level_masses": [float(x) for x in masses],
            "stationarity_residual_l1": residual,
            "bruteforce_max_abs_diff": brute_gap,
        }
        click.echo(json.dumps(obj, sort_keys=True))
        return
    for k in range(ladder.N + 1):
        click.echo(
            f"level k={k} log_alpha={_fmt(measure.log_alpha[k])} mass={_fmt(masses[k])}"
        )
    click.echo(f"log_C={_fmt(measure.log_C)}")
    if residual is not None:
        click.echo(f"stationarity_residual_l1={_fmt(residual)}")
        click.echo(f"bruteforce_max_abs_diff={_fmt(brute_gap)}")


if __name__ == "__main__":
    main()

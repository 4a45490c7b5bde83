"""Reproducible experiment runner.

A config names an experiment, a master seed, a default sample count and a
list of check descriptors.  Every check derives its own random stream by
stable hashing of (master seed, experiment id, check name, position), so
reports are byte-identical across reruns and across ``--jobs`` settings;
wall-clock metadata goes to a sidecar file, never into the report.
"""

from __future__ import annotations

import concurrent.futures
import datetime
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import arrays, convtest, fixtures, levy, skorohod
from .convtest import CheckEntry, ConvergenceReport, ks_critical_value
from .levy import RngStream
from .paths import PathDomainError
from .skorohod import TripleKind

MASTER_SEED_ENV = "CADLAB_MASTER_SEED"


class ConfigError(Exception):
    """Schema or content problem in an experiment config."""

    def __init__(self, message: str, line: int = 1):
        super().__init__(message)
        self.line = line


def derive_seed(master_seed: int, experiment_id: str, check_name: str,
                index: int) -> int:
    """Stable 63-bit per-check seed; independent of scheduling."""
    key = f"{master_seed}|{experiment_id}|{check_name}|{index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def _rng(seed: int) -> RngStream:
    return RngStream(master_seed=seed, stream_index=0)


def _lambda_grid(cfg: dict) -> np.ndarray:
    lo = float(cfg.get("lambda_min", -3.0))
    hi = float(cfg.get("lambda_max", 3.0))
    step = float(cfg.get("lambda_step", 0.25))
    return np.arange(lo, hi + step / 2.0, step)


# -- check runners ---------------------------------------------------------
#
# Each runner maps (check descriptor, effective sample count, derived seed)
# to a list of CheckEntry rows.


def _run_counterexample_m1(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    n_list = cfg.get("n_list", [3, 5, 10])
    delta = float(cfg.get("delta", 0.5))
    T = float(cfg.get("T", 2.0))
    entries = []
    for n in n_list:
        mod = skorohod.modulus(fixtures.composed_ramp(int(n)), TripleKind.M,
                               delta, T)
        stat = abs(mod - 1.0)
        entries.append(CheckEntry(
            check_name="counterexample_m1", n=int(n),
            param=f"kind=M;delta={delta};T={T}", statistic=stat,
            threshold=0.0, passed=stat <= 0.0, stderr=0.0, seed=seed,
            samples=1,
        ))
    verdict = skorohod.composition_condition(fixtures.tent_path(),
                                             fixtures.ramp_limit())
    ok = (not verdict.holds) and verdict.fails_at == fixtures.HORIZON
    entries.append(CheckEntry(
        check_name="counterexample_m1", n=0,
        param=f"composition_fails_at={verdict.fails_at}",
        statistic=0.0 if ok else 1.0, threshold=0.0, passed=ok,
        stderr=0.0, seed=seed, samples=1,
    ))
    return entries


def _run_ecf_linnik(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    n_ladder = [int(n) for n in cfg.get("n_ladder", [64, 128, 256])]
    if any(b <= a for a, b in zip(n_ladder, n_ladder[1:])):
        raise ConfigError("n_ladder must be strictly increasing")
    t = float(cfg.get("t", 1.0))
    threshold = float(cfg.get("threshold", 0.03))
    grid = _lambda_grid(cfg)
    se = math.sqrt(2.0 / samples)
    entries = []
    dists = []
    for i, n in enumerate(n_ladder):
        spec = arrays.LinnikArray(n=n, horizon=t)
        marg = arrays.marginal_samples(spec, [t], samples,
                                       _rng(seed).child(i), fields=("M",))
        d = convtest.ecf_distance(marg["M"][:, 0],
                                  lambda lam: levy.linnik_cf(t, lam), grid)
        dists.append(d)
        entries.append(CheckEntry(
            check_name="ecf_linnik", n=n, param=f"t={t}", statistic=d,
            threshold=threshold, passed=d <= threshold, stderr=se,
            seed=seed, samples=samples,
        ))
    for (n1, d1), (n2, d2) in zip(zip(n_ladder, dists),
                                  zip(n_ladder[1:], dists[1:])):
        joint = math.sqrt(2.0) * se
        entries.append(CheckEntry(
            check_name="ecf_linnik", n=n2,
            param=f"trend_vs_n={n1}", statistic=d2 - d1,
            threshold=2.0 * joint, passed=d2 - d1 <= 2.0 * joint,
            stderr=joint, seed=seed, samples=samples,
        ))
    return entries


def _run_fdd_gamma(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    n = int(cfg.get("n", 256))
    t = float(cfg.get("t", 1.0))
    spec = arrays.LinnikArray(n=n, horizon=t)
    entry = convtest.fdd_test(
        spec, [t], [1.0],
        lambda gen, size: gen.gamma(t, 1.0, size=size),
        samples, _rng(seed), which="A",
    )
    return [entry]


def _array_spec(cfg: dict) -> arrays.ArraySpec:
    doc = cfg.get("array")
    if doc is None:
        raise ConfigError("check requires an 'array' spec")
    return arrays.array_from_dict(doc)


def _run_hyp_c(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    spec = _array_spec(cfg)
    t = float(cfg.get("t", 0.7))
    expected = cfg.get("expected")
    est = arrays.check_hyp_c(spec, t, samples, _rng(seed))
    if expected is None:
        stat, thr, ok = est.estimate, float("inf"), True
    else:
        stat = abs(est.estimate - float(expected))
        thr = 4.0 * est.stderr
        ok = stat <= thr
    return [CheckEntry(
        check_name="hyp_c", n=spec.n, param=f"t={t};expected={expected}",
        statistic=stat, threshold=thr, passed=ok, stderr=est.stderr,
        seed=seed, samples=samples,
    )]


def _run_hyp_d(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    spec = _array_spec(cfg)
    t = float(cfg.get("t", 1.0))
    est = arrays.check_hyp_d(spec, t, samples, _rng(seed))
    lo, hi = t, t + 1.0 / spec.n
    stat = max(lo - est.estimate, est.estimate - hi, 0.0)
    thr = 4.0 * est.stderr
    return [CheckEntry(
        check_name="hyp_d", n=spec.n,
        param=f"t={t};interval=[{lo},{hi}]", statistic=stat, threshold=thr,
        passed=stat <= thr, stderr=est.stderr, seed=seed, samples=samples,
    )]


def _run_lindeberg(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    alpha = float(cfg.get("alpha", 1.0))
    beta = float(cfg.get("beta", 0.5))
    epsilon = float(cfg.get("epsilon", 0.1))
    n_ladder = [int(n) for n in cfg.get("n_ladder",
                                        [2 ** k for k in range(10, 19, 2)])]
    expect = bool(cfg.get("expect", True))
    report = arrays.check_lindeberg(alpha, beta, epsilon, n_ladder)
    final = report.statistic_by_n[n_ladder[-1]]
    ok = report.holds_in_limit == expect
    return [CheckEntry(
        check_name="lindeberg", n=n_ladder[-1],
        param=f"alpha={alpha};beta={beta};eps={epsilon};expect={expect}",
        statistic=final, threshold=1e-2 if expect else float("inf"),
        passed=ok, stderr=0.0, seed=seed, samples=1,
    )]


def _run_mcleish(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    spec = _array_spec(cfg)
    t = float(cfg.get("t", 1.0))
    epsilons = [float(e) for e in cfg.get("epsilons", [0.05, 0.1, 0.2])]
    threshold = float(cfg.get("threshold", 0.05))
    fractions = arrays.check_mcleish(spec, t, samples, _rng(seed),
                                     epsilons=epsilons)
    return [CheckEntry(
        check_name="mcleish", n=spec.n, param=f"t={t};eps={e}",
        statistic=frac, threshold=threshold, passed=frac <= threshold,
        stderr=math.sqrt(max(frac * (1 - frac), 1e-12) / samples),
        seed=seed, samples=samples,
    ) for e, frac in fractions.items()]


def _run_rescaling(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    doc = cfg.get("spec")
    if doc is None:
        raise ConfigError("rescaling check requires a subordinator 'spec'")
    sub = levy.spec_from_dict(doc)
    s = float(cfg.get("s", 0.0))
    t = float(cfg.get("t", 1.0))
    stat = levy.rescaling_check(sub, s, t, samples, _rng(seed))
    thr = ks_critical_value(0.01, samples, samples)
    return [CheckEntry(
        check_name="rescaling", n=0,
        param=f"spec={doc.get('kind')};s={s};t={t}", statistic=stat,
        threshold=thr, passed=stat <= thr, stderr=0.0, seed=seed,
        samples=samples,
    )]


def _run_transform_cf(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    n = int(cfg.get("n", 128))
    t = float(cfg.get("t", 1.0))
    profile = cfg.get("profile", "two_plus_cos")
    threshold = float(cfg.get("threshold", 0.03))
    weight = arrays.deterministic_profile(profile)
    base = arrays.LinnikArray(n=n, horizon=t)
    entry = convtest.transform_cf_test(base, weight, t, samples, _rng(seed),
                                       _lambda_grid(cfg), threshold)
    return [entry]


def _run_standardization(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    spec = _array_spec(cfg)
    t = float(cfg.get("t", 1.0))
    return [convtest.standardization_test(spec, t, samples, _rng(seed))]


def _run_lenglart(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    spec = _array_spec(cfg)
    epsilon = float(cfg.get("epsilon", 1.0))
    eta = float(cfg.get("eta", 0.5))
    t = float(cfg.get("t", 1.0))
    return [convtest.lenglart_check(spec, epsilon, eta, t, samples, _rng(seed))]


def _run_tightness(cfg: dict, samples: int, seed: int) -> list[CheckEntry]:
    kind = TripleKind(cfg.get("kind", "M"))
    n_list = [int(n) for n in cfg.get("n_list", [3, 5, 10])]
    delta_list = [float(d) for d in cfg.get("delta_list", [0.5, 0.25])]
    T = float(cfg.get("T", 2.0))
    epsilon = float(cfg.get("epsilon", 0.5))
    report = skorohod.empirical_tightness(
        lambda n, r: fixtures.composed_ramp(n), kind, n_list, delta_list,
        T, epsilon, samples=1,
    )
    # diagnostic table only: exceedance fractions are reported, never
    # converted into an asymptotic claim
    return [CheckEntry(
        check_name="tightness", n=e.n,
        param=f"kind={kind.value};delta={e.delta};eps={epsilon}",
        statistic=e.exceed_fraction, threshold=1.0,
        passed=e.exceed_fraction <= 1.0, stderr=0.0, seed=seed,
        samples=e.samples,
    ) for e in report.entries]


_REGISTRY: dict[str, tuple] = {
    "counterexample_m1": (
        _run_counterexample_m1,
        "Exact monotone-kind modulus of the tent/steep-ramp compositions "
        "(= 1 for every ramp) and the failing composition condition of the "
        "ramp limit.",
        {"n_list": "ramp steepness values (default [3, 5, 10])",
         "delta": "window width (default 0.5)",
         "T": "time bound (default 2.0)"},
    ),
    "ecf_linnik": (
        _run_ecf_linnik,
        "Empirical CF of M(t) for the gamma-clock normal array against "
        "(1 + lambda^2/2)^(-t), with a weak-monotonicity trend check over "
        "the n ladder.",
        {"n_ladder": "strictly increasing grid sizes (default [64,128,256])",
         "t": "evaluation time (default 1.0)",
         "threshold": "sup-CF distance bound (default 0.03)",
         "lambda_min/lambda_max/lambda_step": "CF grid (default [-3,3]/0.25)"},
    ),
    "fdd_gamma": (
        _run_fdd_gamma,
        "Two-sample KS of the gamma-clock compensator A(t) against "
        "Gamma(t, 1) draws at the 1% critical value.",
        {"n": "grid size (default 256)", "t": "time (default 1.0)"},
    ),
    "hyp_c": (
        _run_hyp_c,
        "Monte Carlo estimate of E{A(tau(A(t))) - A(t)} (compensator gap at "
        "the first jump after t), compared with 'expected' within 4 SE.",
        {"array": "array spec dict", "t": "time (default 0.7)",
         "expected": "target value; omitted = report only"},
    ),
    "hyp_d": (
        _run_hyp_d,
        "Monte Carlo estimate of E{A(tau(t))}; must land in [t, t + 1/n] "
        "within 4 SE.",
        {"array": "array spec dict", "t": "level (default 1.0)"},
    ),
    "lindeberg": (
        _run_lindeberg,
        "Closed-form truncated-second-moment statistic for the sparse "
        "two-point array across an n ladder; verdict compared with "
        "'expect'.",
        {"alpha": "jump size exponent", "beta": "sparsity exponent",
         "epsilon": "truncation level (default 0.1)",
         "n_ladder": "grid sizes (default 2^10..2^18)",
         "expect": "whether the condition should hold (default true)"},
    ),
    "mcleish": (
        _run_mcleish,
        "P{sup_{s<=t} |[M]_s - A_s| > eps} by Monte Carlo, one row per "
        "epsilon, each below 'threshold'.",
        {"array": "array spec dict", "t": "time (default 1.0)",
         "epsilons": "levels (default [0.05,0.1,0.2])",
         "threshold": "max allowed fraction (default 0.05)"},
    ),
    "rescaling": (
        _run_rescaling,
        "Two-sample KS for the clock-rescaling equality in law of "
        "subordinated Brownian increments, at the 1% critical value.",
        {"spec": "subordinator spec dict", "s": "left time", "t": "right time"},
    ),
    "transform_cf": (
        _run_transform_cf,
        "Empirical CF of the weighted martingale transform at time t "
        "against the weighted-clock quadrature oracle.",
        {"n": "grid size (default 128)", "t": "time (default 1.0)",
         "profile": "weight profile name (default two_plus_cos)",
         "threshold": "sup-CF distance bound (default 0.03)"},
    ),
    "standardization": (
        _run_standardization,
        "Two-sample KS of M(t)/sqrt(A(t)) against standard normal draws at "
        "the 1% critical value.",
        {"array": "array spec dict", "t": "time (default 1.0)"},
    ),
    "lenglart": (
        _run_lenglart,
        "Empirical maximal-inequality bound P(sup M^2 >= eps) <= eta/eps + "
        "P(A(t) >= eta) within 3 joint SEs.",
        {"array": "array spec dict", "epsilon": "level", "eta": "budget",
         "t": "time"},
    ),
    "tightness": (
        _run_tightness,
        "Modulus-exceedance table for the deterministic composition family; "
        "diagnostic rows only, no asymptotic verdict.",
        {"kind": "C | J | M", "n_list": "family indices",
         "delta_list": "window widths", "T": "time bound",
         "epsilon": "exceedance level"},
    ),
}


# -- config handling -------------------------------------------------------


def _line_of(raw: str, needle: str) -> int:
    for i, line in enumerate(raw.splitlines(), start=1):
        if needle in line:
            return i
    return 1


def load_config(path: Path) -> dict:
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    for key, typ in (("experiment_id", str), ("seed", int),
                     ("samples", int), ("checks", list)):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")
        if not isinstance(doc[key], typ):
            raise ConfigError(f"key {key!r} must be {typ.__name__}",
                              line=_line_of(raw, f'"{key}"'))
    if doc["samples"] < 1:
        raise ConfigError("samples must be >= 1", line=_line_of(raw, '"samples"'))
    if not doc["checks"]:
        raise ConfigError("checks must be non-empty", line=_line_of(raw, '"checks"'))
    for i, chk in enumerate(doc["checks"]):
        if not isinstance(chk, dict) or "name" not in chk:
            raise ConfigError(f"check #{i} must be an object with a 'name'",
                              line=_line_of(raw, '"checks"'))
        if chk["name"] not in _REGISTRY:
            raise ConfigError(f"unknown check {chk['name']!r}",
                              line=_line_of(raw, chk["name"]))
    return doc


def run_experiment(config: dict, jobs: int = 1,
                   samples_scale: float = 1.0,
                   master_seed: int | None = None) -> ConvergenceReport:
    """Execute all checks of a config and assemble the report in config order."""
    seed = config["seed"] if master_seed is None else master_seed
    experiment_id = config["experiment_id"]
    report = ConvergenceReport(experiment_id=experiment_id, seed=seed,
                               samples=config["samples"])

    def one(index_and_cfg):
        index, cfg = index_and_cfg
        base = int(cfg.get("samples", config["samples"]))
        eff = max(10, int(round(base * samples_scale)))
        chk_seed = derive_seed(seed, experiment_id, cfg["name"], index)
        runner = _REGISTRY[cfg["name"]][0]
        return runner(cfg, eff, chk_seed)

    items = list(enumerate(config["checks"]))
    if jobs <= 1:
        results = [one(item) for item in items]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, items))
    for entries in results:
        for entry in entries:
            report.add(entry)
    return report


def write_report(report: ConvergenceReport, output_dir: Path,
                 metadata: dict) -> Path:
    out = output_dir / report.experiment_id
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "report.csv").write_text(report.to_csv())
    (out / "metadata.json").write_text(
        json.dumps(metadata, sort_keys=True, indent=2) + "\n")
    return out


# -- command line ----------------------------------------------------------


@click.group()
def cli():
    """Reproducible stochastic-process experiments and checks."""


@cli.command()
@click.argument("config_path", type=click.Path(path_type=Path))
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Concurrent checks; does not affect any statistic.")
@click.option("--samples-scale", type=float, default=1.0, show_default=True,
              help="Multiplier on every sample count (0.1 for a fast pass).")
@click.option("--output-dir", type=click.Path(path_type=Path), default=None,
              help="Report directory (default: config output_dir or 'runs').")
def run(config_path: Path, jobs: int, samples_scale: float,
        output_dir: Path | None):
    """Run every check of an experiment config and write reports.

    Exit status: 0 all checks pass, 2 at least one check fails, 1 config or
    runtime error.
    """
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        click.echo(f"{config_path}:{exc.line}: config error: {exc}", err=True)
        sys.exit(1)

    master_seed = None
    env_seed = os.environ.get(MASTER_SEED_ENV)
    if env_seed is not None:
        try:
            master_seed = int(env_seed)
        except ValueError:
            click.echo(f"config error: {MASTER_SEED_ENV} must be an integer",
                       err=True)
            sys.exit(1)
        click.echo(
            f"warning: master seed overridden to {master_seed} via "
            f"{MASTER_SEED_ENV}; golden reports will not match", err=True)

    try:
        report = run_experiment(config, jobs=jobs,
                                samples_scale=samples_scale,
                                master_seed=master_seed)
    except ConfigError as exc:
        click.echo(f"{config_path}:{exc.line}: config error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001 - runtime errors map to exit 1
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(1)

    out_base = output_dir or Path(config.get("output_dir", "runs"))
    metadata = {
        "config_path": str(config_path),
        "jobs": jobs,
        "samples_scale": samples_scale,
        "seed_overridden": master_seed is not None,
        "written_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    out = write_report(report, out_base, metadata)

    for e in report.entries:
        status = "PASS" if e.passed else "FAIL"
        click.echo(f"{status} {e.check_name} n={e.n} {e.param} "
                   f"stat={e.statistic:.6g} thr={e.threshold:.6g}")
    click.echo(f"report: {out / 'report.json'}")
    sys.exit(0 if report.all_passed else 2)


@cli.command("list-checks")
def list_checks():
    """List every available check with a one-line description."""
    for name in sorted(_REGISTRY):
        click.echo(f"{name}: {_REGISTRY[name][1]}")


@cli.command()
@click.argument("check_name")
def describe(check_name: str):
    """Describe one check and its config parameters."""
    if check_name not in _REGISTRY:
        click.echo(f"unknown check {check_name!r}; see 'list-checks'",
                   err=True)
        sys.exit(1)
    _, description, params = _REGISTRY[check_name]
    click.echo(check_name)
    click.echo(f"  {description}")
    click.echo("  parameters:")
    for key, doc in params.items():
        click.echo(f"    {key}: {doc}")


def main():
    cli()


if __name__ == "__main__":
    main()

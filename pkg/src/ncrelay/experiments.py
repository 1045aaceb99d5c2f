"""Monte-Carlo experiment driver emitting deterministic CSV tables.

Every trial owns an independent random stream derived from (seed, stream_id),
and per-trial results are accumulated in index order, so the output is
byte-identical no matter how trials are partitioned across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bounds
from .channel import (PowerProfile, ThetaStatistics, compute_gains,
                      composite_theta, draw_channels)
from .estimators import (lmmse_estimate, ml_estimate, varpi_lmmse_estimate)
from .numeric import RngStream
from .simulator import (MultihopGains, aesnr_components, point_to_point_baseline,
                        run_data_exchange_4hop, run_training_2Nhop,
                        run_training_round_4hop, varpi_ls_estimate)
from .training import build_training

SCENARIOS = (
    "fourhop-lmmse",
    "fourhop-ml",
    "fourhop-aesnr",
    "fourhop-baseline",
    "multihop-sweep",
    "asymptotic-check",
)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    snr_db: tuple[float, ...] = (0.0, 10.0, 20.0)
    rho: tuple[float, ...] = (0.0, 0.5, 0.9)
    trials: int = 10_000
    L: int = 8
    n_hops: tuple[int, ...] = (2, 4, 8)   # hop pairs N, multihop scenarios only
    seed: int = 1234
    power_scale: float = 1.0              # multiplies the equal per-node power
    sigma2: float = 1.0                   # common per-hop channel variance
    sigma_n2: float = 1.0
    workers: int = 1
    rounds: int = 12                      # data-exchange rounds per trial
    out_path: str = "results.csv"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_db:
            raise ValueError("snr list must be nonempty")
        if any(not 0 <= r < 1 for r in self.rho):
            raise ValueError("rho values must lie in [0, 1)")
        if self.L < 3:
            raise ValueError("L must be >= 3")
        if any(n < 2 for n in self.n_hops):
            raise ValueError("hop-pair counts must be >= 2")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class ResultRow:
    scenario: str
    snr_db: float
    rho: float
    n_hops: int
    metric: str
    empirical: float
    closed_form: float
    trials: int
    seed: int


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)


def _fourhop_setup(cfg: ExperimentConfig, snr: float, rho: float):
    P = cfg.power_scale * 10.0 ** (snr / 10.0)
    profile = PowerProfile.equal_power(P, sigma_n2=cfg.sigma_n2, n_pairs=2,
                                       sigma2=cfg.sigma2)
    gains = compute_gains(profile, L=cfg.L)
    Q = cfg.L * P
    ts = build_training(cfg.L, rho, Q, Q, Q)
    stats = ThetaStatistics.from_profile(profile)
    return profile, gains, ts, stats


def _run_trials(cfg: ExperimentConfig, base_stream: int, n_out: int, trial_fn):
    """Evaluate trial_fn for every trial index, optionally on a thread pool,
    and return the (trials, n_out) result array in index order."""
    out = np.empty((cfg.trials, n_out))

    def work(lo: int, hi: int):
        for t in range(lo, hi):
            out[t] = trial_fn(RngStream(cfg.seed, base_stream + t))

    if cfg.workers == 1:
        work(0, cfg.trials)
    else:
        step = math.ceil(cfg.trials / cfg.workers)
        spans = [(i, min(i + step, cfg.trials)) for i in range(0, cfg.trials, step)]
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(lambda s: work(*s), spans))
    return out


def _grid_index(cfg: ExperimentConfig):
    """Enumerate grid points with a stable stream-id block per point."""
    if cfg.scenario in ("multihop-sweep", "asymptotic-check"):
        points = [(snr, rho, N) for snr in cfg.snr_db for rho in cfg.rho
                  for N in cfg.n_hops]
    else:
        points = [(snr, rho, 2) for snr in cfg.snr_db for rho in cfg.rho]
    for i, p in enumerate(points):
        yield i * cfg.trials, p


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    table = ResultTable()
    handler = _SCENARIO_HANDLERS[cfg.scenario]
    for base, (snr, rho, N) in _grid_index(cfg):
        for metric, emp, closed in handler(cfg, base, snr, rho, N):
            if not (np.isfinite(emp) and np.isfinite(closed)):
                raise ValueError(f"non-finite value in metric {metric}")
            table.rows.append(ResultRow(cfg.scenario, snr, rho, N, metric,
                                        float(emp), float(closed),
                                        cfg.trials, cfg.seed))
    return table


# ---------------------------------------------------------------------------
# scenario handlers: yield (metric, empirical, closed_form)


def _scenario_fourhop_lmmse(cfg, base, snr, rho, N):
    profile, gains, ts, stats = _fourhop_setup(cfg, snr, rho)

    def trial(rng: RngStream):
        gen = rng.generator()
        ch = draw_channels(profile, 2, gen)
        obs = run_training_round_4hop(ch, gains, ts, cfg.sigma_n2, gen)
        est = lmmse_estimate(obs.z3, ts, gains, stats, cfg.sigma_n2)
        t1, t2 = obs.true_theta
        return [abs(est.theta1 - t1) ** 2, abs(est.theta2 - t2) ** 2]

    res = _run_trials(cfg, base, 2, trial).mean(axis=0)
    e1, e2 = bounds.lmmse_mse_closed_form(ts, gains, stats, cfg.sigma_n2)
    yield "mse_theta1", res[0], e1
    yield "mse_theta2", res[1], e2


def _scenario_fourhop_ml(cfg, base, snr, rho, N):
    profile, gains, ts, stats = _fourhop_setup(cfg, snr, rho)

    def trial(rng: RngStream):
        gen = rng.generator()
        ch = draw_channels(profile, 2, gen)
        obs = run_training_round_4hop(ch, gains, ts, cfg.sigma_n2, gen)
        sol = ml_estimate(obs.z3, ts, gains, cfg.sigma_n2)
        t1, t2 = obs.true_theta
        c1, c2, ok = bounds.crlb_4hop(ts, gains, t1, cfg.sigma_n2)
        if not ok:
            c1 = c2 = np.nan
        return [abs(sol.theta1 - t1) ** 2, abs(sol.theta2 - t2) ** 2, c1, c2]

    res = _run_trials(cfg, base, 4, trial).mean(axis=0)
    yield "mse_theta1", res[0], res[2]
    yield "mse_theta2", res[1], res[3]


def _scenario_fourhop_aesnr(cfg, base, snr, rho, N):
    profile, gains, ts, stats = _fourhop_setup(cfg, snr, rho)

    def trial(rng: RngStream):
        gen = rng.generator()
        ch = draw_channels(profile, 2, gen)
        rec = run_data_exchange_4hop(ch, gains, cfg.rounds, "perfect",
                                     cfg.sigma_n2, gen)
        S, Nz = aesnr_components(ch, gains, cfg.sigma_n2)
        return [rec.desired_pow, rec.error_pow, S, Nz]

    res = _run_trials(cfg, base, 4, trial).sum(axis=0)
    yield "aesnr_db", 10.0 * np.log10(res[0] / res[1]), \
        10.0 * np.log10(res[2] / res[3])


def _scenario_fourhop_baseline(cfg, base, snr, rho, N):
    profile, gains, ts, stats = _fourhop_setup(cfg, snr, rho)

    def trial(rng: RngStream):
        gen = rng.generator()
        ch = draw_channels(profile, 2, gen)
        obs = run_training_round_4hop(ch, gains, ts, cfg.sigma_n2, gen)
        est = lmmse_estimate(obs.z3, ts, gains, stats, cfg.sigma_n2)
        p1, p2 = point_to_point_baseline(ch, ts, cfg.sigma_n2, gen)
        t1, t2 = obs.true_theta
        return [abs(est.theta1 - t1) ** 2, abs(p1 - t1) ** 2,
                abs(est.theta2 - t2) ** 2, abs(p2 - t2) ** 2]

    res = _run_trials(cfg, base, 4, trial).mean(axis=0)
    e1, e2 = bounds.lmmse_mse_closed_form(ts, gains, stats, cfg.sigma_n2)
    b1, b2 = bounds.p2p_mse_closed_form(profile.sigma2, cfg.sigma_n2 / ts.Q1)
    yield "mse_theta1_lmmse", res[0], e1
    yield "mse_theta1_p2p", res[1], b1
    yield "mse_theta2_lmmse", res[2], e2
    yield "mse_theta2_p2p", res[3], b2


def _multihop_setup(cfg: ExperimentConfig, snr: float, rho: float, N: int):
    P = cfg.power_scale * 10.0 ** (snr / 10.0)
    profile = PowerProfile.equal_power(P, sigma_n2=cfg.sigma_n2, n_pairs=N,
                                       sigma2=cfg.sigma2)
    Q = cfg.L * P
    ts = build_training(cfg.L, rho, Q, Q, Q)
    return profile, ts


def _scenario_multihop_sweep(cfg, base, snr, rho, N):
    profile, ts = _multihop_setup(cfg, snr, rho, N)
    mh = MultihopGains.unity(N)
    omega = cfg.sigma2          # unit gains: per-hop power product is sigma2
    c1, c2 = bounds.crlb_2Nhop(N, omega, rho, ts.Q1, ts.Q2, cfg.sigma_n2)
    priors = bounds.varpi_priors(N, cfg.sigma2)
    l1, l2 = bounds.lmmse_mse_2Nhop(N, omega, rho, ts.Q1, ts.Q2,
                                    cfg.sigma_n2, cfg.sigma2)

    def trial(rng: RngStream):
        gen = rng.generator()
        ch = draw_channels(profile, N, gen)
        res = run_training_2Nhop(ch, ts, N, cfg.sigma_n2, gen, mh)
        ls = varpi_ls_estimate(res.z1N, ts, res.coef1, res.coef2)
        lm = varpi_lmmse_estimate(ls, priors, (c1, c2))
        v1, v2 = res.true_varpi
        return [abs(ls[0] - v1) ** 2, abs(ls[1] - v2) ** 2,
                abs(lm[0] - v1) ** 2, abs(lm[1] - v2) ** 2]

    res = _run_trials(cfg, base, 4, trial).mean(axis=0)
    yield "mse_varpi1_ls", res[0], c1
    yield "mse_varpi2_ls", res[1], c2
    yield "mse_varpi1_lmmse", res[2], l1
    yield "mse_varpi2_lmmse", res[3], l2


def _scenario_asymptotic_check(cfg, base, snr, rho, N):
    profile, ts = _multihop_setup(cfg, snr, rho, N)
    mh = MultihopGains.unity(N)
    omega = cfg.sigma2
    x = 1.0 - rho ** 2
    F = bounds.finite_N_noise_factor(omega, N)

    def trial(rng: RngStream):
        gen = rng.generator()
        ch = draw_channels(profile, N, gen)
        res = run_training_2Nhop(ch, ts, N, cfg.sigma_n2, gen, mh)
        ls = varpi_ls_estimate(res.z1N, ts, res.coef1, res.coef2)
        v1, _ = res.true_varpi
        return [abs(ls[0] - v1) ** 2]

    res = _run_trials(cfg, base, 1, trial).mean(axis=0)
    emp_factor = res[0] * x * ts.Q1 / cfg.sigma_n2
    yield "noise_factor", emp_factor, F
    if omega < 1.0:
        yield "noise_factor_asymptote", F, 1.0 / (1.0 - omega)


_SCENARIO_HANDLERS = {
    "fourhop-lmmse": _scenario_fourhop_lmmse,
    "fourhop-ml": _scenario_fourhop_ml,
    "fourhop-aesnr": _scenario_fourhop_aesnr,
    "fourhop-baseline": _scenario_fourhop_baseline,
    "multihop-sweep": _scenario_multihop_sweep,
    "asymptotic-check": _scenario_asymptotic_check,
}

CSV_HEADER = "scenario,snr_db,rho,n_hops,metric,empirical,closed_form,trials,seed"


def format_table(table: ResultTable) -> str:
    lines = [CSV_HEADER]
    for r in table.rows:
        lines.append(",".join([
            r.scenario,
            f"{r.snr_db:.10g}",
            f"{r.rho:.10g}",
            str(r.n_hops),
            r.metric,
            f"{r.empirical:.10g}",
            f"{r.closed_form:.10g}",
            str(r.trials),
            str(r.seed),
        ]))
    return "\n".join(lines) + "\n"


def emit_csv(table: ResultTable, path: str) -> None:
    data = format_table(table)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)


def emit_gnuplot(cfg: ExperimentConfig, path: str) -> None:
    """Companion gnuplot script plotting empirical vs closed-form columns."""
    script = "\n".join([
        'set datafile separator ","',
        'set logscale y',
        'set xlabel "SNR (dB)"',
        'set ylabel "MSE"',
        f'plot "{cfg.out_path}" using 2:6 with linespoints title "empirical", \\',
        f'     "{cfg.out_path}" using 2:7 with linespoints title "closed form"',
        "",
    ])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(script)

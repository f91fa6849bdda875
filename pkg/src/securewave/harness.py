"""Monte Carlo experiment driver: sweeps, BER estimation, CSV emission.

Each sweep point runs ``trials`` independent channel realizations, applies
the selected design mode, and aggregates analytic post-filter SINRs (and,
for BER runs, simulated error counts) into a plot-ready table.  Per-trial
randomness comes from substreams derived deterministically from the master
seed, so results are byte-reproducible and order-independent.
"""

import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import an as an_design
from . import channel as ch
from .errors import NoTransmitError, ValidationError
from .p2p import P2pProblem, design_p2p
from .sdr import MulticastProblem, multicast_design, sum_sinr_design
from .util import db_to_linear, linear_to_db

__all__ = ["SweepSpec", "TrialRecord", "ResultRow", "ResultTable",
           "MODES", "run_sweep", "estimate_ber", "emit_results", "trial_rng"]

MODES = (
    "eigen-known-csi",
    "an-unknown-csi",
    "min-energy-no-an",
    "multicast-sdr",
    "multicast-min-energy-an",
    "sum-sinr",
)
SINGLE_RECEIVER_MODES = MODES[:3]
SWEEP_VARIABLES = ("gamma_db", "l", "emax")
CSV_COLUMNS = (
    "swept_value",
    "mean_sinr_eve_db", "sinr_eve_ci_db",
    "mean_sinr_bob_db", "sinr_bob_ci_db",
    "solvability", "an_fraction",
    "ber_bob", "ber_bob_ci", "ber_eve", "ber_eve_ci",
    "n_trials",
)


@dataclass
class SweepSpec:
    """One experiment: scenario, design mode, and the swept variable."""

    scenario: ch.ScenarioConfig
    mode: str
    sweep: str
    values: tuple
    gamma_db: float = 6.0
    e_max: float = 100.0
    receivers: int = 1
    metrics: tuple = ("sinr",)
    sinr_average: str = "linear"
    bits_per_trial: int = 10000
    randomization_samples: int = 1000

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.sweep not in SWEEP_VARIABLES:
            raise ValidationError(
                f"unknown sweep variable {self.sweep!r}; expected one of {SWEEP_VARIABLES}"
            )
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValidationError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValidationError("sweep values must be strictly increasing")
        if self.sweep == "l" and any(v != int(v) or v < 2 for v in values):
            raise ValidationError("waveform-length sweep values must be integers >= 2")
        if self.sweep == "emax" and any(v <= 0 for v in values):
            raise ValidationError("energy sweep values must be positive")
        if self.receivers < 1:
            raise ValidationError(f"receivers must be >= 1, got {self.receivers}")
        if self.mode in SINGLE_RECEIVER_MODES and self.receivers != 1:
            raise ValidationError(f"mode {self.mode} is single-receiver (got K={self.receivers})")
        unknown = set(self.metrics) - {"sinr", "ber"}
        if unknown:
            raise ValidationError(f"unknown metrics {sorted(unknown)}")
        if self.sinr_average not in ("linear", "db"):
            raise ValidationError("sinr_average must be 'linear' or 'db'")
        if not (self.e_max > 0 and np.isfinite(self.e_max)):
            raise ValidationError(f"e_max must be positive, got {self.e_max}")
        self.values = values


@dataclass
class TrialRecord:
    """Outcome of one channel realization under one design mode."""

    substream: tuple
    solvable: bool
    sinr_bob: Optional[tuple] = None
    sinr_eve: Optional[float] = None
    energy: Optional[float] = None
    an_energy: Optional[float] = None
    branch: Optional[str] = None
    elapsed: float = 0.0

    def __post_init__(self):
        if not self.solvable:
            for name in ("sinr_bob", "sinr_eve", "energy", "an_energy", "branch"):
                if getattr(self, name) is not None:
                    raise ValidationError(f"unsolvable trial must not carry {name}")


@dataclass
class ResultRow:
    """Aggregates for one swept value (NaN where a metric was not computed)."""

    swept_value: float
    mean_sinr_eve_db: float
    sinr_eve_ci_db: float
    mean_sinr_bob_db: float
    sinr_bob_ci_db: float
    solvability: float
    an_fraction: float
    ber_bob: float
    ber_bob_ci: float
    ber_eve: float
    ber_eve_ci: float
    n_trials: int


@dataclass
class ResultTable:
    rows: tuple
    mode: str = ""
    sweep: str = ""

    def column(self, name):
        return np.array([getattr(row, name) for row in self.rows])


def trial_rng(seed, value_index, trial_index):
    """Independent substream for one trial: documented counter-based split.

    The stream is Philox keyed by the master seed with the 256-bit counter's
    two high words set to (trial_index, value_index); consecutive trials are
    separated by 2^128 blocks, so streams never overlap and any execution
    order (or parallel schedule) reproduces the same draws.
    """
    bitgen = np.random.Philox(key=seed, counter=[0, 0, trial_index, value_index])
    return np.random.Generator(bitgen)


def _resolve_point(spec, value):
    """Scenario, linear-scale gamma, and energy cap at one swept value."""
    scenario = spec.scenario
    gamma = float(db_to_linear(spec.gamma_db))
    e_max = spec.e_max
    if spec.sweep == "gamma_db":
        gamma = float(db_to_linear(value))
    elif spec.sweep == "l":
        scenario = replace(scenario, chips=int(value))
    else:
        e_max = float(value)
    return scenario, gamma, e_max


def _apply_design(spec, draw, gamma, e_max, rng, substream):
    """Run the spec's design mode on one trial draw.

    Returns (TrialRecord, payload); payload carries the design and AN
    covariance for simulation-based metrics, or None when unsolvable.
    """
    start = time.perf_counter()
    q_bobs = [link.q for link in draw.bobs]
    try:
        an_cov = None
        if spec.mode == "eigen-known-csi":
            design = design_p2p(P2pProblem(q_bob=q_bobs[0], q_eve=draw.eve.q,
                                           gamma=gamma, e_max=e_max))
        elif spec.mode == "min-energy-no-an":
            design = an_design.min_energy_design(q_bobs[0], gamma, e_max)
        elif spec.mode == "an-unknown-csi":
            design, an_cov = an_design.an_pipeline_single(q_bobs[0], gamma, e_max)
        elif spec.mode == "sum-sinr":
            design = sum_sinr_design(q_bobs, draw.eve.q, gamma, e_max)
        else:
            problem = MulticastProblem(
                q_bobs=tuple(q_bobs), gammas=np.full(len(q_bobs), gamma),
                e_max=e_max, q_eve=draw.eve.q,
                samples=spec.randomization_samples,
            )
            sdr_mode = "min-eve" if spec.mode == "multicast-sdr" else "min-energy"
            design, _ = multicast_design(problem, sdr_mode, rng=rng)
            if spec.mode == "multicast-min-energy-an":
                an_cov = an_design.an_pipeline_multicast(design, q_bobs, e_max)
    except NoTransmitError:
        return TrialRecord(substream=substream, solvable=False,
                           elapsed=time.perf_counter() - start), None

    if an_cov is None:
        bob_sinrs = tuple(
            ch.sinr(link.q, design.waveform, design.energy) for link in draw.bobs
        )
        eve_sinr = ch.sinr(draw.eve.q, design.waveform, design.energy)
        an_energy = 0.0
    else:
        bob_sinrs = tuple(
            ch.sinr_with_an(link.channel, link.disturbance, an_cov,
                            design.waveform, design.energy)
            for link in draw.bobs
        )
        eve_sinr = ch.sinr_with_an(draw.eve.channel, draw.eve.disturbance,
                                   an_cov, design.waveform, design.energy)
        an_energy = an_cov.budget
    record = TrialRecord(
        substream=substream, solvable=True, sinr_bob=bob_sinrs,
        sinr_eve=eve_sinr, energy=design.energy, an_energy=an_energy,
        branch=design.branch, elapsed=time.perf_counter() - start,
    )
    return record, {"design": design, "an": an_cov}


def _mean_and_ci_db(samples, average):
    """Mean SINR in dB plus a standard-error radius in dB.

    ``average='linear'`` takes the linear-scale mean and converts (the
    radius uses the delta method); ``average='db'`` averages the per-trial
    dB values directly.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n == 0:
        return float("nan"), float("nan")
    if average == "db":
        db = linear_to_db(samples)
        sem = float(np.std(db, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return float(np.mean(db)), sem
    mean = float(np.mean(samples))
    sem = float(np.std(samples, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return float(linear_to_db(mean)), (10.0 / np.log(10.0)) * sem / mean


def _aggregate(spec, value, records, e_max_value, ber=None):
    solved = [r for r in records if r.solvable]
    eve_db, eve_ci = _mean_and_ci_db([r.sinr_eve for r in solved], spec.sinr_average)
    bob_db, bob_ci = _mean_and_ci_db(
        [float(np.mean(r.sinr_bob)) for r in solved], spec.sinr_average
    )
    an_fraction = (
        float(np.mean([r.an_energy / e_max_value for r in solved]))
        if solved else float("nan")
    )
    ber = ber or {}
    return ResultRow(
        swept_value=float(value),
        mean_sinr_eve_db=eve_db, sinr_eve_ci_db=eve_ci,
        mean_sinr_bob_db=bob_db, sinr_bob_ci_db=bob_ci,
        solvability=len(solved) / len(records),
        an_fraction=an_fraction,
        ber_bob=ber.get("bob", float("nan")),
        ber_bob_ci=ber.get("bob_ci", float("nan")),
        ber_eve=ber.get("eve", float("nan")),
        ber_eve_ci=ber.get("eve_ci", float("nan")),
        n_trials=len(records),
    )


def run_sweep(spec):
    """Analytic-SINR sweep over the spec's swept variable."""
    rows = []
    for vi, value in enumerate(spec.values):
        scenario, gamma, e_max = _resolve_point(spec, value)
        records = []
        for ti in range(scenario.trials):
            rng = trial_rng(scenario.seed, vi, ti)
            draw = ch.draw_wiretap_trial(scenario, rng, receivers=spec.receivers)
            record, _ = _apply_design(spec, draw, gamma, e_max, rng, (vi, ti))
            records.append(record)
        rows.append(_aggregate(spec, value, records, e_max))
    return ResultTable(rows=tuple(rows), mode=spec.mode, sweep=spec.sweep)


def _count_bit_errors(link, design, an_cov, bits, isi_enabled, rng):
    y = ch.simulate_received_block(design, link.channel, link.disturbance, bits,
                                   an=an_cov, isi_enabled=isi_enabled, rng=rng)
    w = ch.max_sinr_filter(link.channel, link.disturbance, design.waveform, an=an_cov)
    decisions = np.sign(np.real(y @ w.conj()))
    return int(np.count_nonzero(decisions != bits))


def estimate_ber(spec, bits_per_trial=None):
    """Simulation-based BER sweep (sign detection after max-SINR filtering).

    Every receiver applies its own max-SINR filter (the eavesdropper's is
    fully informed, including the AN covariance when present); errors are
    pooled over trials, bits, and intended receivers.
    """
    if bits_per_trial is None:
        bits_per_trial = spec.bits_per_trial
    if bits_per_trial < 1000:
        raise ValidationError(f"bits_per_trial must be >= 1000, got {bits_per_trial}")
    rows = []
    for vi, value in enumerate(spec.values):
        scenario, gamma, e_max = _resolve_point(spec, value)
        records = []
        errors_bob = 0
        bits_bob = 0
        errors_eve = 0
        bits_eve = 0
        for ti in range(scenario.trials):
            rng = trial_rng(scenario.seed, vi, ti)
            draw = ch.draw_wiretap_trial(scenario, rng, receivers=spec.receivers)
            record, payload = _apply_design(spec, draw, gamma, e_max, rng, (vi, ti))
            records.append(record)
            if payload is None:
                continue
            design, an_cov = payload["design"], payload["an"]
            bits = rng.integers(0, 2, size=bits_per_trial) * 2 - 1
            for link in draw.bobs:
                errors_bob += _count_bit_errors(
                    link, design, an_cov, bits, scenario.isi_enabled, rng
                )
                bits_bob += bits_per_trial
            errors_eve += _count_bit_errors(
                draw.eve, design, an_cov, bits, scenario.isi_enabled, rng
            )
            bits_eve += bits_per_trial
        ber = {}
        if bits_bob:
            p = errors_bob / bits_bob
            ber["bob"] = p
            ber["bob_ci"] = float(np.sqrt(p * (1.0 - p) / bits_bob))
            p = errors_eve / bits_eve
            ber["eve"] = p
            ber["eve_ci"] = float(np.sqrt(p * (1.0 - p) / bits_eve))
        rows.append(_aggregate(spec, value, records, e_max, ber=ber))
    return ResultTable(rows=tuple(rows), mode=spec.mode, sweep=spec.sweep)


def _render(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.9g}"


def emit_results(table, path, fmt="csv"):
    """Write a ResultTable as CSV: fixed header, 9 significant digits."""
    if fmt != "csv":
        raise ValidationError(f"unsupported output format {fmt!r}")
    if not table.rows:
        raise ValidationError("refusing to emit an empty result table")
    lines = [",".join(CSV_COLUMNS)]
    for row in table.rows:
        lines.append(",".join(_render(getattr(row, col)) for col in CSV_COLUMNS))
    with open(path, "w", newline="") as handle:
        handle.write("\n".join(lines) + "\n")
    return path

"""Experiment runners: the single separation demo and the (L, SNR) sweep.

Every random draw in a sweep cell descends from one 64-bit trial seed,

    trial_seed = mix64(mix64(mix64(base_seed ^ L) ^ snr_index) ^ trial)

where ``mix64`` is the SplitMix64 finalizer. Cells therefore do not
depend on each other, and growing the grid leaves existing cells intact.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import channel, siggen
from .channel import PAPER_MIXING_MATRIX, ChannelSpec, noise_disabled
from .csvio import format_float, store_signals
from .evaluation import align
from .msnr import apply_demixing, solve_demixing
from .siggen import BIT1, BIT2_PADDED, ModulationSpec

MASK64 = (1 << 64) - 1

DEFAULT_QPSK = ModulationSpec("qpsk", samples_per_symbol=200, carrier_cycles_per_symbol=4)
DEFAULT_OOK = ModulationSpec("ook", samples_per_symbol=100)


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


def mix64(z):
    """SplitMix64 finalizer on a 64-bit unsigned integer."""
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(base_seed, L, snr_index, trial):
    z = mix64((base_seed ^ L) & MASK64)
    z = mix64(z ^ snr_index)
    return mix64(z ^ trial)


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except (ValueError, ArithmeticError) as exc:
        raise StageError(name, exc) from exc


def format_snr(snr_db):
    return "inf" if noise_disabled(snr_db) else format_float(snr_db)


# ---------------------------------------------------------------- demo


@dataclass
class DemoResult:
    sources: np.ndarray
    mixtures: np.ndarray
    separated: np.ndarray
    solution: object
    report: object


def demo_sources(qpsk=DEFAULT_QPSK, ook=DEFAULT_OOK, bits1=BIT1, bits2=BIT2_PADDED):
    s1 = siggen.modulate_qpsk(bits1, qpsk)
    s2 = siggen.modulate_ook(bits2, ook)
    if s1.shape[1] != s2.shape[1]:
        raise ValueError(f"source lengths differ: {s1.shape[1]} vs {s2.shape[1]}")
    return np.vstack([s1, s2])


def separate_demo(seed=0, snr_db=30.0, L=7, mixing_matrix=PAPER_MIXING_MATRIX):
    """QPSK(Bit1) + OOK(Bit2 + trailing 0), mixed, separated and aligned."""
    s = _stage("generate", demo_sources)
    spec = ChannelSpec(mixing_matrix, snr_db, seed)
    x = _stage("mix", channel.mix, spec, s)
    sol = _stage("separate", solve_demixing, x, L)
    y = apply_demixing(sol.W, x)
    report = _stage("evaluate", align, s, y)
    return DemoResult(s, x, y, sol, report)


def write_report(path, header_values, report, solution):
    row = dict(header_values)
    row.update(report.as_row())
    row["eig_gap"] = solution.eigen_gap
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(row))
        w.writerow([v if isinstance(v, (int, str)) else format_float(v) for v in row.values()])


def run_demo(seed, snr_db, L, out_dir):
    """Run the separation demo and write its CSV artifacts to ``out_dir``.

    Files: ``sources.csv``, ``mixtures.csv``, ``separated.csv``,
    ``demixing.csv`` (rows of W) and ``report.csv``.
    """
    res = separate_demo(seed, snr_db, L)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store_signals(res.sources, out / "sources.csv")
    store_signals(res.mixtures, out / "mixtures.csv")
    store_signals(res.separated, out / "separated.csv")
    store_signals(res.solution.W.T, out / "demixing.csv")
    write_report(out / "report.csv",
                 {"L": L, "snr_db": format_snr(snr_db), "seed": seed},
                 res.report, res.solution)
    return res


# ---------------------------------------------------------------- sweep


@dataclass
class SweepSpec:
    """Grid of (moving-average length, SNR, trial) cells.

    ``snr_db_values`` entries of ``None`` mean noise disabled.
    ``mixing_matrix=None`` draws a fresh well-conditioned random matrix
    per trial; otherwise the given matrix is used for every trial.
    Bits are redrawn per trial (``qpsk_bits`` and ``ook_bits`` long) unless
    ``fixed_bits`` is set, in which case the demo bit streams are used.
    """

    ma_lengths: list
    snr_db_values: list
    trials_per_cell: int = 30
    base_seed: int = 0
    qpsk: ModulationSpec = DEFAULT_QPSK
    ook: ModulationSpec = DEFAULT_OOK
    qpsk_bits: int = 20
    ook_bits: int = 20
    fixed_bits: bool = False
    mixing_matrix: Optional[list] = field(default_factory=lambda: PAPER_MIXING_MATRIX.tolist())
    workers: int = 1

    def __post_init__(self):
        if not self.ma_lengths or not self.snr_db_values:
            raise ValueError("ma_lengths and snr_db_values must be non-empty")
        if any(int(L) != L or L < 2 for L in self.ma_lengths):
            raise ValueError("ma_lengths must be integers >= 2")
        self.ma_lengths = [int(L) for L in self.ma_lengths]
        self.snr_db_values = [None if noise_disabled(v) else float(v) for v in self.snr_db_values]
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if not 0 <= self.base_seed <= MASK64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        if isinstance(self.qpsk, dict):
            self.qpsk = ModulationSpec("qpsk", **self.qpsk)
        if isinstance(self.ook, dict):
            self.ook = ModulationSpec("ook", **self.ook)
        n = self.n_samples
        if max(self.ma_lengths) > n:
            raise ValueError(f"ma_lengths must not exceed n_samples = {n}")

    @property
    def n_samples(self):
        q = len(BIT1) if self.fixed_bits else self.qpsk_bits
        return q // 2 * self.qpsk.samples_per_symbol

    @classmethod
    def from_dict(cls, cfg):
        known = {f.name for f in fields(cls)}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        return cls(**cfg)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class SweepRecord:
    L: int
    snr_db: Optional[float]
    trial: int
    seed: int
    mean_corr: float
    per_source_corr: tuple
    eig_gap: float
    status: str


def run_trial(spec, L, snr_index, trial):
    """One sweep cell. Algorithm failures become a non-ok status."""
    snr = spec.snr_db_values[snr_index]
    seed = trial_seed(spec.base_seed, L, snr_index, trial)
    bits_seed, ook_seed, noise_seed, mix_seed = np.random.SeedSequence(seed).generate_state(4, np.uint64)
    n_src = 2
    try:
        if spec.fixed_bits:
            b1, b2 = BIT1, BIT2_PADDED
        else:
            b1 = siggen.random_bits(spec.qpsk_bits, int(bits_seed))
            b2 = siggen.random_bits(spec.ook_bits, int(ook_seed))
        s = demo_sources(spec.qpsk, spec.ook, b1, b2)
        if spec.mixing_matrix is None:
            A = channel.random_mixing_matrix(n_src, np.random.default_rng(int(mix_seed)))
        else:
            A = np.asarray(spec.mixing_matrix, dtype=float)
        x = channel.mix(ChannelSpec(A, snr, int(noise_seed)), s)
        sol = solve_demixing(x, L)
        rep = align(s, apply_demixing(sol.W, x))
    except (ValueError, ArithmeticError) as exc:
        status = "error:" + str(exc).replace(",", ";").replace("\n", " ")
        return SweepRecord(L, snr, trial, seed, math.nan, (math.nan,) * n_src, math.nan, status)
    return SweepRecord(L, snr, trial, seed, rep.mean_corr, tuple(rep.per_source_corr),
                       float(sol.eigen_gap), "ok")


def _run_cells(args):
    spec, cells = args
    return [run_trial(spec, *c) for c in cells]


def sweep_records(spec):
    """All records, sorted by (L, SNR position, trial)."""
    cells = [
        (L, k, t)
        for L in spec.ma_lengths
        for k in range(len(spec.snr_db_values))
        for t in range(spec.trials_per_cell)
    ]
    if spec.workers <= 1:
        return [run_trial(spec, *c) for c in cells]
    chunks = [cells[i::spec.workers] for i in range(spec.workers)]
    with ProcessPoolExecutor(spec.workers) as pool:
        parts = list(pool.map(_run_cells, [(spec, c) for c in chunks]))
    done = {c: r for chunk, part in zip(chunks, parts) for c, r in zip(chunk, part)}
    return [done[c] for c in cells]


def sweep_header(n_sources=2):
    return (["L", "snr_db", "trial", "seed", "mean_corr"]
            + [f"corr_{i}" for i in range(n_sources)]
            + ["eig_gap", "status"])


def write_sweep_csv(records, path):
    n_src = len(records[0].per_source_corr) if records else 2
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sweep_header(n_src))
        for r in records:
            w.writerow([r.L, format_snr(r.snr_db), r.trial, r.seed, format_float(r.mean_corr)]
                       + [format_float(c) for c in r.per_source_corr]
                       + [format_float(r.eig_gap), r.status])


def run_sweep(spec, out_path):
    """Run every grid cell and write the sweep CSV. Returns the records."""
    records = sweep_records(spec)
    write_sweep_csv(records, out_path)
    return records

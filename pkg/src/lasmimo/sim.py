"""Monte Carlo experiment engine: trial orchestration, BER cells, CSV persistence.

Every trial owns a counter-based random substream derived from the master
seed and the cell's axis values, so results are independent of execution
order and worker count. Error and bit counts accumulate as integers, which
keeps reruns byte-identical for any parallelism level.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from . import las, mccdma, stbc
from .capacity import ergodic_capacity
from .detectors import (
    build_effective,
    mf_detect,
    ml_oracle,
    mmse_detect,
    real_decompose,
    zf_detect,
    zf_sic_detect,
)
from .model import (
    Modulation,
    NoiseSpec,
    generate_channel,
    random_frame,
    transmit,
)

SCENARIOS = ("vblast", "stbc", "mccdma", "capacity")
VBLAST_DETECTORS = ("mf", "zf", "mmse", "zf_sic", "ml", "mf_las", "zf_las", "mmse_las")
STBC_DETECTORS = ("mf", "zf", "mmse", "mf_las", "zf_las", "mmse_las")
MCCDMA_DETECTORS = mccdma.METHODS

_SCEN_CODE = {s: i + 1 for i, s in enumerate(SCENARIOS)}
_SNR_KEY_OFFSET = 1 << 22  # keeps the milli-dB seed component nonnegative

Z95 = 1.959963984540054


class ConfigError(ValueError):
    """Invalid experiment configuration; `errors` lists per-field problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Cell:
    """One axis point of a sweep: physical configuration plus detector."""

    scenario: str
    snr_db: float
    detector: str
    modulation: str | None = None
    nt: int | None = None
    nr: int | None = None
    k: int | None = None
    m: int | None = None
    n_chips: int | None = None


def trial_rng(master_seed: int, cell: Cell, trial: int) -> np.random.Generator:
    """Counter-based substream, a pure function of (seed, configuration, trial).

    The detector is deliberately left out of the key so detectors sweeping the
    same physical cell see identical channels, data, and noise.
    """
    snr_key = int(round(cell.snr_db * 1000.0)) + _SNR_KEY_OFFSET
    if snr_key < 0:
        raise ValueError(f"snr {cell.snr_db} dB out of seeding range")
    mod_key = 0 if cell.modulation is None else (1 if cell.modulation == "bpsk" else 2)
    key = [
        master_seed,
        _SCEN_CODE[cell.scenario],
        snr_key,
        mod_key,
        cell.nt or 0,
        cell.nr or 0,
        cell.k or 0,
        cell.m or 0,
        cell.n_chips or 0,
        trial,
    ]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


@dataclass
class BerCell:
    """Error counts for one cell with the 95% Wilson interval."""

    bits: int
    errors: int
    ber: float
    ci95_low: float
    ci95_high: float
    avg_steps_per_bit: float | None = None

    @classmethod
    def from_counts(cls, bits: int, errors: int, steps: int | None = None) -> "BerCell":
        ber = errors / bits
        lo, hi = wilson_ci(errors, bits)
        steps_per_bit = None if steps is None else steps / bits
        return cls(bits, errors, ber, lo, hi, steps_per_bit)


def wilson_ci(errors: int, bits: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; contains errors/bits."""
    if bits <= 0:
        return 0.0, 1.0
    p = errors / bits
    z2 = z * z
    denom = 1.0 + z2 / bits
    center = (p + z2 / (2.0 * bits)) / denom
    half = z * math.sqrt(p * (1.0 - p) / bits + z2 / (4.0 * bits * bits)) / denom
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == bits else min(1.0, center + half)
    return lo, hi


@dataclass
class Experiment:
    """A sweep over SNR, dimension, and detector with a per-cell stopping rule.

    Trials stop once `min_errors` bit errors are collected or `max_trials`
    trials ran, whichever first; stopping is evaluated on fixed blocks of
    `block_trials` so the executed trial set never depends on worker count.
    """

    scenario: str
    snr_dbs: tuple[float, ...] = ()
    detectors: tuple[str, ...] = ()
    modulation: str = "bpsk"
    nts: tuple[int, ...] = ()
    nrs: tuple[int, ...] = ()
    stbc_ns: tuple[int, ...] = ()
    ks: tuple[int, ...] = ()
    ms: tuple[int, ...] = ()
    n_chipss: tuple[int, ...] = ()
    realizations: int = 1000
    min_errors: int = 100
    max_trials: int = 10000
    block_trials: int = 256
    master_seed: int = 0

    def validate(self) -> list[str]:
        errs = []
        if self.scenario not in SCENARIOS:
            errs.append(f"scenario: unknown {self.scenario!r}, expected one of {SCENARIOS}")
            return errs
        if not self.snr_dbs:
            errs.append("snr_dbs: must not be empty")
        if any(not math.isfinite(s) for s in self.snr_dbs):
            errs.append("snr_dbs: entries must be finite")
        for name in ("min_errors", "max_trials", "block_trials", "realizations"):
            if getattr(self, name) < 1:
                errs.append(f"{name}: must be >= 1")
        if self.master_seed < 0:
            errs.append("master_seed: must be >= 0")
        if self.scenario == "vblast":
            errs += self._validate_dims()
            errs += self._validate_detectors(VBLAST_DETECTORS)
            if self.modulation not in ("bpsk", "qam4"):
                errs.append(f"modulation: unknown {self.modulation!r}")
            elif "ml" in self.detectors and self.nts:
                bps = 1 if self.modulation == "bpsk" else 2
                if max(self.nts) * bps > 20:
                    errs.append("detectors: ml is exhaustive and limited to 20 working bits")
        elif self.scenario == "stbc":
            if not self.stbc_ns or any(n < 1 for n in self.stbc_ns):
                errs.append("stbc_ns: need positive code sizes")
            errs += self._validate_detectors(STBC_DETECTORS)
            if self.modulation != "qam4":
                errs.append("modulation: stbc decoding is defined for qam4 only")
        elif self.scenario == "mccdma":
            if not (len(self.ks) == len(self.ms) == len(self.n_chipss)) or not self.ks:
                errs.append("ks/ms/n_chipss: must be non-empty and of equal length")
            elif any(v < 1 for v in (*self.ks, *self.ms, *self.n_chipss)):
                errs.append("ks/ms/n_chipss: entries must be positive")
            errs += self._validate_detectors(MCCDMA_DETECTORS)
        else:  # capacity
            errs += self._validate_dims()
        return errs

    def _validate_dims(self) -> list[str]:
        errs = []
        if not self.nts or any(n < 1 for n in self.nts):
            errs.append("nts: need positive antenna counts")
            return errs
        nrs = self.nrs or self.nts
        if len(nrs) == 1:
            nrs = nrs * len(self.nts)
        if len(nrs) != len(self.nts):
            errs.append("nrs: length must match nts (or be a single value)")
            return errs
        if any(nr < nt for nt, nr in zip(self.nts, nrs)):
            errs.append("nrs: receive antennas must be >= transmit antennas")
        return errs

    def _validate_detectors(self, allowed) -> list[str]:
        if not self.detectors:
            return ["detectors: must not be empty"]
        bad = [d for d in self.detectors if d not in allowed]
        if bad:
            return [f"detectors: unknown {bad} for {self.scenario} (allowed: {allowed})"]
        return []

    def _dim_pairs(self) -> list[tuple[int, int]]:
        nrs = self.nrs or self.nts
        if len(nrs) == 1:
            nrs = nrs * len(self.nts)
        return list(zip(self.nts, nrs))

    def cells(self) -> list[Cell]:
        out = []
        if self.scenario == "vblast":
            for nt, nr in self._dim_pairs():
                for snr in self.snr_dbs:
                    for det in self.detectors:
                        out.append(
                            Cell("vblast", snr, det, self.modulation, nt=nt, nr=nr)
                        )
        elif self.scenario == "stbc":
            for n in self.stbc_ns:
                nr = self.nrs[0] if len(self.nrs) == 1 else n
                for snr in self.snr_dbs:
                    for det in self.detectors:
                        out.append(Cell("stbc", snr, det, "qam4", nt=n, nr=nr))
        elif self.scenario == "mccdma":
            for k, m, n_chips in zip(self.ks, self.ms, self.n_chipss):
                for snr in self.snr_dbs:
                    for det in self.detectors:
                        out.append(
                            Cell("mccdma", snr, det, "bpsk", k=k, m=m, n_chips=n_chips)
                        )
        else:
            for nt, nr in self._dim_pairs():
                for snr in self.snr_dbs:
                    out.append(Cell("capacity", snr, "capacity", None, nt=nt, nr=nr))
        return out


@dataclass
class ResultRow:
    """One CSV row; None fields serialize as empty columns."""

    scenario: str
    nt: int | None
    nr: int | None
    k: int | None
    m: int | None
    n_chips: int | None
    detector: str
    modulation: str | None
    snr_db: float
    bits: int | None
    errors: int | None
    ber: float | None
    ci95_low: float | None
    ci95_high: float | None
    avg_steps_per_bit: float | None
    seed: int


CSV_FIELDS = [f.name for f in fields(ResultRow)]
CSV_HEADER = ",".join(CSV_FIELDS)


@lru_cache(maxsize=8)
def _cached_code(n: int) -> stbc.StbcCode:
    return stbc.build_code(n, stbc.StbcParam.ILL)


def _vblast_trial(cell: Cell, rng: np.random.Generator) -> tuple[int, int, int | None]:
    modulation = Modulation(cell.modulation)
    ch = generate_channel(cell.nt, cell.nr, rng)
    frame = random_frame(cell.nt, modulation, rng)
    noise = NoiseSpec.for_system(cell.snr_db, cell.nt)
    y = transmit(frame, ch, noise, rng)
    if modulation is Modulation.BPSK:
        h_work, y_work, n0_work = ch.entries, y, noise.n0
    else:
        h_r, y_r = real_decompose(ch.entries, y)
        h_work, y_work, n0_work = h_r / math.sqrt(2.0), y_r, noise.n0 / 2.0
    det = cell.detector
    steps = None
    if det == "zf":
        hard = zf_detect(h_work, y_work).hard
    elif det == "mmse":
        hard = mmse_detect(h_work, y_work, n0_work).hard
    elif det == "zf_sic":
        hard = zf_sic_detect(h_work, y_work).hard
    else:
        sys = build_effective(h_work, y_work)
        if det == "mf":
            hard = mf_detect(sys).hard
        elif det == "ml":
            hard = ml_oracle(sys)
        else:
            if det == "mf_las":
                b0 = mf_detect(sys).hard
            elif det == "zf_las":
                b0 = zf_detect(h_work, y_work).hard
            else:
                b0 = mmse_detect(h_work, y_work, n0_work).hard
            hard, stats = las.las_run(sys, b0)
            steps = stats.steps
    errors = int(np.sum(hard != frame.bits))
    return frame.bits.size, errors, steps


def _stbc_trial(cell: Cell, rng: np.random.Generator) -> tuple[int, int, int | None]:
    code = _cached_code(cell.nt)
    ch = generate_channel(cell.nt, cell.nr, rng)
    frame = random_frame(code.n * code.n, Modulation.QAM4, rng)
    noise = NoiseSpec.for_system(cell.snr_db, code.n)
    y_block = stbc.transmit_block(code, frame.symbols, ch, noise, rng)
    steps = None
    if cell.detector.endswith("_las"):
        _, bits, stats = stbc.stbc_decode_las(
            code, ch, y_block, noise, initial=cell.detector.removesuffix("_las")
        )
        steps = stats.steps
    else:
        bits = stbc.stbc_decode_baseline(code, ch, y_block, noise, cell.detector)
    errors = int(np.sum(bits != frame.bits))
    return frame.bits.size, errors, steps


def _mccdma_trial(cell: Cell, rng: np.random.Generator) -> tuple[int, int, int | None]:
    cfg = mccdma.McCdmaConfig(cell.k, cell.m, cell.n_chips)
    systems = mccdma.draw_subcarrier_systems(cfg, cell.snr_db, rng)
    bits = 2.0 * rng.integers(0, 2, size=cfg.k_users) - 1.0
    ys = mccdma.simulate_received(cfg, systems, bits, rng)
    hard, stats = mccdma.mccdma_detect(cfg, systems, ys, cell.detector, return_stats=True)
    errors = int(np.sum(hard != bits))
    return cfg.k_users, errors, stats.steps if stats is not None else None


_TRIAL_FUNCS = {"vblast": _vblast_trial, "stbc": _stbc_trial, "mccdma": _mccdma_trial}


def _run_trial_range(args) -> tuple[int, int, int]:
    cell, master_seed, start, count = args
    func = _TRIAL_FUNCS[cell.scenario]
    bits = errors = steps = 0
    for trial in range(start, start + count):
        b, e, s = func(cell, trial_rng(master_seed, cell, trial))
        bits += b
        errors += e
        if s is not None:
            steps += s
    return bits, errors, steps


def _chunks(start: int, count: int, workers: int) -> list[tuple[int, int]]:
    base, extra = divmod(count, workers)
    out = []
    at = start
    for i in range(workers):
        size = base + (1 if i < extra else 0)
        if size:
            out.append((at, size))
            at += size
    return out


def run_experiment(exp: Experiment, workers: int = 1) -> list[ResultRow]:
    """Run every cell to its stopping rule; bit-identical for any worker count."""
    errors = exp.validate()
    if errors:
        raise ConfigError(errors)
    rows = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for cell in exp.cells():
            if cell.scenario == "capacity":
                rows.append(_capacity_row(exp, cell))
                continue
            bits = nerr = steps = 0
            trials_done = 0
            while trials_done < exp.max_trials and nerr < exp.min_errors:
                n = min(exp.block_trials, exp.max_trials - trials_done)
                jobs = [
                    (cell, exp.master_seed, s, c)
                    for s, c in _chunks(trials_done, n, max(1, workers))
                ]
                if pool is None:
                    results = [_run_trial_range(j) for j in jobs]
                else:
                    results = list(pool.map(_run_trial_range, jobs))
                for b, e, s in results:
                    bits += b
                    nerr += e
                    steps += s
                trials_done += n
            has_steps = cell.detector.endswith("_las")
            ber_cell = BerCell.from_counts(bits, nerr, steps if has_steps else None)
            rows.append(_ber_row(exp, cell, ber_cell))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def _ber_row(exp: Experiment, cell: Cell, c: BerCell) -> ResultRow:
    return ResultRow(
        scenario=cell.scenario,
        nt=cell.nt,
        nr=cell.nr,
        k=cell.k,
        m=cell.m,
        n_chips=cell.n_chips,
        detector=cell.detector,
        modulation=cell.modulation,
        snr_db=float(cell.snr_db),
        bits=c.bits,
        errors=c.errors,
        ber=c.ber,
        ci95_low=c.ci95_low,
        ci95_high=c.ci95_high,
        avg_steps_per_bit=c.avg_steps_per_bit,
        seed=exp.master_seed,
    )


def _capacity_row(exp: Experiment, cell: Cell) -> ResultRow:
    est = ergodic_capacity(
        cell.nt, cell.nr, cell.snr_db, exp.realizations, trial_rng(exp.master_seed, cell, 0)
    )
    return ResultRow(
        scenario="capacity",
        nt=cell.nt,
        nr=cell.nr,
        k=None,
        m=None,
        n_chips=None,
        detector="capacity",
        modulation=None,
        snr_db=float(cell.snr_db),
        bits=est.realizations,
        errors=None,
        ber=est.mean_bps_hz,
        ci95_low=est.mean_bps_hz - Z95 * est.std_error,
        ci95_high=est.mean_bps_hz + Z95 * est.std_error,
        avg_steps_per_bit=None,
        seed=exp.master_seed,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[ResultRow], path) -> None:
    """Serialize rows under the fixed schema: UTF-8, LF, '.' decimals, repr floats."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for row in rows:
                writer.writerow([_fmt(getattr(row, name)) for name in CSV_FIELDS])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


_INT_FIELDS = {"nt", "nr", "k", "m", "n_chips", "bits", "errors", "seed"}
_FLOAT_FIELDS = {"snr_db", "ber", "ci95_low", "ci95_high", "avg_steps_per_bit"}


def read_csv(path) -> list[ResultRow]:
    """Exact inverse of write_csv (repr floats round-trip losslessly)."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_FIELDS:
                raise ValueError(f"{path}: unexpected header {header}")
            rows = []
            for rec in reader:
                kwargs = {}
                for name, raw in zip(CSV_FIELDS, rec):
                    if raw == "":
                        kwargs[name] = None
                    elif name in _INT_FIELDS:
                        kwargs[name] = int(raw)
                    elif name in _FLOAT_FIELDS:
                        kwargs[name] = float(raw)
                    else:
                        kwargs[name] = raw
                rows.append(ResultRow(**kwargs))
            return rows
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc

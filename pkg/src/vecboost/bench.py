"""Per-round training time measurement and output-dimension scaling sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .booster import BoosterConfig, train
from .data import RawDataset


@dataclass
class BenchRow:
    mode: str
    replication: int
    n_outputs: int
    rounds: int
    mean_seconds: float
    workers: int


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    scaling_ratios: list[tuple[str, int, int, float]] = field(default_factory=list)

    def render(self) -> str:
        lines = ["mode,replication,n_outputs,rounds,mean_seconds_per_round,workers"]
        for r in self.rows:
            lines.append(f"{r.mode},{r.replication},{r.n_outputs},{r.rounds},"
                         f"{r.mean_seconds!r},{r.workers}")
        for mode, r_from, r_to, ratio in self.scaling_ratios:
            lines.append(f"scaling_ratio,{mode},x{r_from}->x{r_to},{ratio!r}")
        return "\n".join(lines) + "\n"


def _replicate_targets(dataset: RawDataset, factor: int) -> RawDataset:
    if factor == 1:
        return dataset
    return RawDataset(dataset.features, np.tile(dataset.targets, (1, factor)))


def measure_mode(dataset: RawDataset, config: BoosterConfig, mode: str,
                 rounds: int) -> float:
    """Mean seconds per warm boosting round (binning excluded from the clock)."""
    from dataclasses import replace
    run_cfg = replace(config, mode=mode, max_rounds=rounds,
                      patience=max(config.patience, rounds + 1))
    if mode in ("mo_sparse", "mo_restricted") and run_cfg.sparse_k is None:
        run_cfg = replace(run_cfg, sparse_k=min(2, dataset.d))
    result = train(dataset, run_cfg)
    return float(np.mean([rec.seconds for rec in result.history]))


def run_bench(dataset: RawDataset, config: BoosterConfig, modes: list[str],
              rounds: int, replications: list[int]) -> BenchReport:
    report = BenchReport()
    workers = config.workers or 1
    for mode in modes:
        per_replication = {}
        for rep in replications:
            rep_data = _replicate_targets(dataset, rep)
            mean_s = measure_mode(rep_data, config, mode, rounds)
            per_replication[rep] = mean_s
            report.rows.append(BenchRow(mode, rep, rep_data.d, rounds, mean_s, workers))
        ordered = sorted(per_replication)
        for lo, hi in zip(ordered, ordered[1:]):
            report.scaling_ratios.append(
                (mode, lo, hi, per_replication[hi] / per_replication[lo]))
    return report

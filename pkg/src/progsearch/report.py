"""Run statistics, rank aggregation, and best-so-far reward curves.

All functions here are pure folds over iteration records (dicts in the run
log schema), so re-running them on the same log yields identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import CorruptLogError, EmptyInputError
from .logio import read_jsonl

REQUIRED_FIELDS = ("trial", "iteration", "exec")


@dataclass
class RunSummary:
    iterations: int
    trials: int
    s_iter: float      # % of iterations with executable code and fitness > 0
    s_trl: float       # % of trials containing at least one such iteration
    exec_rate: float   # % of all generated programs (repairs included) that ran
    cost_usd: float
    best_fitness: float
    avg_fitness: float  # mean of per-trial bests
    sigma: float        # population std of per-trial bests


def _load_records(log) -> list[dict]:
    if isinstance(log, (str, Path)):
        records = read_jsonl(log)
    else:
        records = list(log)
    for i, rec in enumerate(records):
        for key in REQUIRED_FIELDS:
            if key not in rec:
                raise CorruptLogError(f"record {i} is missing {key!r}")
    return records


def summarize_run(log) -> RunSummary:
    """Fold a run log into the headline percentages and cost."""
    records = _load_records(log)
    if not records:
        return RunSummary(0, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    iterations = len(records)
    positive = [r for r in records
                if r["exec"] == "Executable" and (r.get("fitness") or 0) > 0]
    trial_ids = sorted({r["trial"] for r in records})
    positive_trials = {r["trial"] for r in positive}
    programs_total = sum(int(r.get("repairs", 0)) + 1 for r in records)
    executable = sum(1 for r in records if r["exec"] == "Executable")
    per_trial_best = {t: 0.0 for t in trial_ids}
    for r in records:
        if r["exec"] == "Executable" and r.get("fitness") is not None:
            t = r["trial"]
            per_trial_best[t] = max(per_trial_best[t], float(r["fitness"]))
    bests = list(per_trial_best.values())
    avg = sum(bests) / len(bests)
    sigma = math.sqrt(sum((b - avg) ** 2 for b in bests) / len(bests))
    return RunSummary(
        iterations=iterations,
        trials=len(trial_ids),
        s_iter=100.0 * len(positive) / iterations,
        s_trl=100.0 * len(positive_trials) / len(trial_ids),
        exec_rate=100.0 * executable / programs_total,
        cost_usd=sum(float(r.get("cost_usd", 0.0)) for r in records),
        best_fitness=max(bests),
        avg_fitness=avg,
        sigma=sigma,
    )


@dataclass
class RankTable:
    domains: list[str]
    models: list[str]
    per_domain: dict[str, dict[str, int]]  # domain -> model -> rank
    average: dict[str, float]
    overall: dict[str, int]


def _competition_ranks(scored: list[tuple[str, float]], reverse: bool) -> dict[str, int]:
    """Standard competition ranking (1, 2, 2, 4): rank = 1 + number of
    strictly better entries."""
    ranks = {}
    for name, score in scored:
        if reverse:
            better = sum(1 for _, other in scored if other > score)
        else:
            better = sum(1 for _, other in scored if other < score)
        ranks[name] = 1 + better
    return ranks


def aggregate_ranks(domain_results: dict[str, dict[str, float]],
                    lower_is_better: set[str] | frozenset[str] = frozenset()) -> RankTable:
    """Rank models per domain, average the ranks, and rank the averages.

    Models missing from a domain are ranked last there. Distance-valued
    domains (named in lower_is_better) invert the comparator.
    """
    if not domain_results:
        raise EmptyInputError("no domain results")
    domains = sorted(domain_results)
    models = sorted({m for results in domain_results.values() for m in results})
    if not models:
        raise EmptyInputError("no models in any domain")
    last = len(models)
    per_domain: dict[str, dict[str, int]] = {}
    for domain in domains:
        scored = [(m, float(s)) for m, s in domain_results[domain].items()]
        ranks = _competition_ranks(scored, reverse=domain not in lower_is_better)
        for m in models:
            ranks.setdefault(m, last)
        per_domain[domain] = ranks
    average = {m: sum(per_domain[d][m] for d in domains) / len(domains) for m in models}
    overall = _competition_ranks([(m, average[m]) for m in models], reverse=False)
    return RankTable(domains=domains, models=models, per_domain=per_domain,
                     average=average, overall=overall)


def reward_curves(log, trials: int | None = None) -> list[tuple[int, int, float]]:
    """Best-so-far fitness per (trial, iteration); trials with no records
    contribute a single (trial, 0, 0.0) row."""
    records = _load_records(log)
    by_trial: dict[int, list[dict]] = {}
    for rec in records:
        by_trial.setdefault(rec["trial"], []).append(rec)
    if trials is None:
        trial_ids = sorted(by_trial) if by_trial else [0]
    else:
        trial_ids = list(range(trials))
    rows: list[tuple[int, int, float]] = []
    for t in trial_ids:
        recs = sorted(by_trial.get(t, []), key=lambda r: r["iteration"])
        if not recs:
            rows.append((t, 0, 0.0))
            continue
        best = 0.0
        for rec in recs:
            fitness = rec.get("fitness")
            if rec["exec"] == "Executable" and fitness is not None and fitness > best:
                best = float(fitness)
            rows.append((t, rec["iteration"], best))
    return rows


def curves_to_csv(rows: list[tuple[int, int, float]]) -> str:
    lines = ["trial,iteration,best_fitness"]
    lines += [f"{t},{i},{b:g}" for t, i, b in rows]
    return "\n".join(lines) + "\n"


def summary_markdown(summary: RunSummary, title: str = "Run summary") -> str:
    return "\n".join([
        f"# {title}",
        "",
        "| metric | value |",
        "| --- | --- |",
        f"| iterations | {summary.iterations} |",
        f"| trials | {summary.trials} |",
        f"| S.Iter (%) | {summary.s_iter:.2f} |",
        f"| S.Trl (%) | {summary.s_trl:.2f} |",
        f"| executable programs (%) | {summary.exec_rate:.2f} |",
        f"| cost (USD) | {summary.cost_usd:.4f} |",
        f"| best fitness | {summary.best_fitness:g} |",
        f"| avg fitness (per-trial bests) | {summary.avg_fitness:g} |",
        f"| sigma (per-trial bests) | {summary.sigma:g} |",
        "",
    ])


def rank_markdown(table: RankTable) -> str:
    header = "| model | " + " | ".join(table.domains) + " | avg | overall |"
    sep = "| --- |" + " --- |" * (len(table.domains) + 2)
    lines = ["# Model ranking", "", header, sep]
    for model in sorted(table.models, key=lambda m: table.overall[m]):
        cells = " | ".join(str(table.per_domain[d][model]) for d in table.domains)
        lines.append(f"| {model} | {cells} | {table.average[model]:.2f} | "
                     f"{table.overall[model]} |")
    return "\n".join(lines) + "\n"

"""The search loop: hill climbing over programs with query-and-repair.

One iteration builds a prompt (Initial, or Improve once an incumbent
exists), obtains a program through the repair loop, runs it in the sandbox,
and replaces the incumbent only on strict fitness improvement. Trials are
independent restarts; each owns a fresh sandbox process and search state.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .config import SearchConfig
from .errors import EmptyResponseError, ProviderUnavailable, SandboxError
from .logio import sha256_hex
from .prompts import PromptBundle, build_repair_prompt, build_task_prompt, update_task_prompt
from .providers import ChatExchange, extract_code
from .sandbox import ExecStatus, SandboxConfig, SandboxHandle, spawn
from .tasks import CanExecCheck

EVAL_SEED_STRIDE = 1000  # episode seeds per trial: trial_seed * stride + episode


@dataclass
class CandidateProgram:
    source: str
    program_id: str
    trial: int
    iteration: int
    repair_count: int
    exec_status: ExecStatus
    fitness: float | None = None
    detail: str = ""


@dataclass
class SearchState:
    best_program: CandidateProgram | None = None
    best_fitness: float = 0.0
    best_result: object | None = None
    best_iteration: int = 0

    def consider(self, program: CandidateProgram, fitness: float, result) -> bool:
        """Replace the incumbent only on strict improvement; ties keep it."""
        if fitness > self.best_fitness:
            self.best_program = program
            self.best_fitness = fitness
            self.best_result = result
            self.best_iteration = program.iteration
            return True
        return False


@dataclass
class IterationRecord:
    trial: int
    iteration: int
    repairs: int
    program_sha: str
    exec: str
    fitness: float | None
    tokens_in: int
    tokens_out: int
    cost_usd: float
    ms: int

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "iteration": self.iteration,
            "repairs": self.repairs,
            "program_sha": self.program_sha,
            "exec": self.exec,
            "fitness": self.fitness,
            "tokens_in": self.tokens_in,
            "tokens_out": self.tokens_out,
            "cost_usd": self.cost_usd,
            "ms": self.ms,
        }


@dataclass
class TrialResult:
    trial: int
    records: list[IterationRecord] = field(default_factory=list)
    exchanges: list[ChatExchange] = field(default_factory=list)
    best_program: CandidateProgram | None = None
    best_fitness: float = 0.0
    best_result: object | None = None
    best_iteration: int = 0
    aborted: bool = False
    abort_reason: str = ""


@dataclass
class ExperimentResult:
    task_name: str
    provider_name: str
    trials: list[TrialResult]
    recommendation: CandidateProgram | None = None
    recommendation_trial: int = -1
    recommendation_iteration: int = -1

    @property
    def records(self) -> list[IterationRecord]:
        return [r for t in self.trials for r in t.records]

    @property
    def exchanges(self) -> list[ChatExchange]:
        return [ex for t in self.trials for ex in t.exchanges]

    @property
    def best_fitness(self) -> float:
        return max((t.best_fitness for t in self.trials), default=0.0)


def query_llm_with_repair(task, prompt: PromptBundle, max_repairs: int, provider,
                          handle: SandboxHandle | None,
                          ) -> tuple[str, CanExecCheck, int, list[ChatExchange]]:
    """One initial query plus up to max_repairs - 1 repair rounds.

    Returns the last program source regardless of executability, the final
    CanExec verdict, the repair count, and all exchanges made.
    """
    exchanges = [provider.chat(prompt)]
    source = _code_of(exchanges[-1])
    check = _can_exec(task, handle, source)
    j = 1
    while j < max_repairs and not check.ok:
        repair = build_repair_prompt(task, source, check.status.value, check.detail)
        exchanges.append(provider.chat(repair))
        source = _code_of(exchanges[-1])
        check = _can_exec(task, handle, source)
        j += 1
    return source, check, j - 1, exchanges


def _code_of(exchange: ChatExchange) -> str:
    try:
        return extract_code(exchange.response_text)
    except EmptyResponseError:
        return ""


def _can_exec(task, handle: SandboxHandle | None, source: str) -> CanExecCheck:
    if handle is None:
        return CanExecCheck(False, ExecStatus.CRASH, "sandbox unavailable")
    return task.can_exec(handle, source)


def can_exec(task, handle: SandboxHandle, source: str) -> bool:
    """Predicate behind the repair loop: the program loads and answers one
    smoke invocation with well-formed output."""
    return task.can_exec(handle, source).ok


def program_search(task, config: SearchConfig, provider,
                   sandbox_config: SandboxConfig | None = None,
                   trial: int = 0, record_sink=None) -> TrialResult:
    """Run one trial of up to config.iterations iterations."""
    config.validate()
    trial_seed = config.seed + trial
    seed_base = trial_seed * EVAL_SEED_STRIDE
    deterministic = getattr(provider, "deterministic", False)
    result = TrialResult(trial=trial)
    state = SearchState()
    handle = _try_spawn(sandbox_config)
    try:
        for iteration in range(1, config.iterations + 1):
            started = time.monotonic()
            if handle is None or not handle.alive():
                if handle is not None:
                    handle.shutdown()
                handle = _try_spawn(sandbox_config)
            if state.best_program is not None:
                prompt = update_task_prompt(task, state, trace_limit=config.trace_limit)
            else:
                prompt = build_task_prompt(task)
            try:
                source, check, repairs, exchanges = query_llm_with_repair(
                    task, prompt, config.max_repairs, provider, handle)
            except ProviderUnavailable as e:
                result.aborted = True
                result.abort_reason = str(e)
                break
            result.exchanges.extend(exchanges)
            program = CandidateProgram(
                source=source,
                program_id=sha256_hex(source),
                trial=trial,
                iteration=iteration,
                repair_count=repairs,
                exec_status=check.status,
                detail=check.detail,
            )
            if check.ok:
                evaluation = task.evaluate(handle, config.eval_episodes, seed_base)
                program.exec_status = evaluation.status
                if evaluation.fitness is not None:
                    program.fitness = evaluation.fitness
                    state.consider(program, evaluation.fitness, evaluation.result)
            record = IterationRecord(
                trial=trial,
                iteration=iteration,
                repairs=repairs,
                program_sha=program.program_id,
                exec=program.exec_status.value,
                fitness=program.fitness,
                tokens_in=sum(ex.tokens_in for ex in exchanges),
                tokens_out=sum(ex.tokens_out for ex in exchanges),
                cost_usd=sum(ex.cost_usd for ex in exchanges),
                ms=0 if deterministic else int((time.monotonic() - started) * 1000),
            )
            result.records.append(record)
            if record_sink is not None:
                record_sink(record.to_dict())
            if (config.target_fitness is not None
                    and state.best_fitness >= config.target_fitness):
                break
    finally:
        if handle is not None:
            handle.shutdown()
    result.best_program = state.best_program
    result.best_fitness = state.best_fitness
    result.best_result = state.best_result
    result.best_iteration = state.best_iteration
    return result


def _try_spawn(sandbox_config: SandboxConfig | None) -> SandboxHandle | None:
    try:
        return spawn(sandbox_config or SandboxConfig())
    except SandboxError:
        return None


@dataclass
class SweepTable:
    """One column per omega (mean of per-episode minimum distances achieved
    by the recommended program) plus the row mean."""
    omegas: list[float]
    distances: list[float]
    d_avg: float
    successes: list[bool]

    def to_csv(self) -> str:
        header = ",".join([f"omega={w:g}" for w in self.omegas] + ["D_avg"])
        row = ",".join([f"{d:.2f}" for d in self.distances] + [f"{self.d_avg:.2f}"])
        return header + "\n" + row + "\n"


def sweep_omega(omegas: list[float], config: SearchConfig, provider,
                sandbox_config: SandboxConfig | None = None) -> SweepTable:
    """Run the full search once per rotation speed and tabulate distances.

    An omega whose search finds no incumbent reports the do-nothing baseline
    distance for its episode set.
    """
    from .errors import EmptySweepError
    from .tasks import VehicleTask
    from .vehicle import noop_min_distances

    if not omegas:
        raise EmptySweepError("no omega values to sweep")
    distances: list[float] = []
    successes: list[bool] = []
    for omega in omegas:
        task = VehicleTask(omega=omega)
        outcome = run_experiment(task, config, provider, sandbox_config)
        best = None
        for t in outcome.trials:
            if t.best_program is not None and (best is None or t.best_fitness > best.best_fitness):
                best = t
        if best is None:
            noop = noop_min_distances(omega)
            distances.append(sum(noop) / len(noop))
            successes.append(False)
        else:
            report = best.best_result
            distances.append(report.d_avg)
            successes.append(report.success)
    return SweepTable(
        omegas=list(omegas),
        distances=distances,
        d_avg=sum(distances) / len(distances),
        successes=successes,
    )


def run_experiment(task, config: SearchConfig, provider,
                   sandbox_config: SandboxConfig | None = None,
                   record_sink=None) -> ExperimentResult:
    """Run config.trials independent trials; the recommendation is the best
    program across trials, earliest (trial, iteration) on ties."""
    config.validate()
    if config.parallel_trials > 1:
        with ThreadPoolExecutor(max_workers=config.parallel_trials) as pool:
            futures = [
                pool.submit(program_search, task, config, provider,
                            sandbox_config, t)
                for t in range(config.trials)
            ]
            trials = [f.result() for f in futures]
        if record_sink is not None:
            for t in trials:
                for rec in t.records:
                    record_sink(rec.to_dict())
    else:
        trials = [
            program_search(task, config, provider, sandbox_config, t,
                           record_sink=record_sink)
            for t in range(config.trials)
        ]
    result = ExperimentResult(
        task_name=task.name,
        provider_name=getattr(provider, "name", "unknown"),
        trials=trials,
    )
    if all(t.aborted for t in trials) and not any(t.exchanges for t in trials):
        raise ProviderUnavailable(trials[0].abort_reason or "provider unavailable")
    for t in trials:
        if t.best_program is not None and t.best_fitness > (
                result.recommendation.fitness if result.recommendation else 0.0):
            result.recommendation = t.best_program
            result.recommendation_trial = t.trial
            result.recommendation_iteration = t.best_iteration
    return result

"""Program search for games: LLM-driven hill climbing over policy and
generator source code, with sandboxed evaluation."""

from .config import SearchConfig
from .prompts import PromptBundle, PromptKind, build_task_prompt, update_task_prompt
from .providers import (
    ChatExchange,
    HttpProvider,
    ProviderConfig,
    ReplayProvider,
    ScriptedProvider,
    extract_code,
    replay_provider,
)
from .report import RankTable, RunSummary, aggregate_ranks, reward_curves, summarize_run
from .sandbox import ExecStatus, SandboxConfig, SandboxHandle, spawn
from .search import (
    CandidateProgram,
    ExperimentResult,
    SearchState,
    TrialResult,
    program_search,
    query_llm_with_repair,
    run_experiment,
    sweep_omega,
)
from .tasks import make_task

__version__ = "0.1.0"

__all__ = [
    "CandidateProgram",
    "ChatExchange",
    "ExecStatus",
    "ExperimentResult",
    "HttpProvider",
    "PromptBundle",
    "PromptKind",
    "ProviderConfig",
    "RankTable",
    "ReplayProvider",
    "RunSummary",
    "SandboxConfig",
    "SandboxHandle",
    "ScriptedProvider",
    "SearchConfig",
    "SearchState",
    "TrialResult",
    "aggregate_ranks",
    "build_task_prompt",
    "extract_code",
    "make_task",
    "program_search",
    "query_llm_with_repair",
    "replay_provider",
    "reward_curves",
    "run_experiment",
    "spawn",
    "summarize_run",
    "sweep_omega",
    "update_task_prompt",
]

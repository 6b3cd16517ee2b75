"""Prompt assembly for the three prompt kinds: Initial, Improve, Repair."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import MissingIncumbentError

TRACE_LIMIT_DEFAULT = 200  # keeps embedded action traces within context limits


class PromptKind(Enum):
    INITIAL = "Initial"
    IMPROVE = "Improve"
    REPAIR = "Repair"


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    kind: PromptKind


SYSTEM_TEXT = (
    "You are an expert Python programmer writing a single self-contained "
    "function. Reply with exactly one fenced Python code block containing the "
    "complete function definition. Use only the Python standard library."
)


def build_task_prompt(task) -> PromptBundle:
    """Initial prompt: rules, objective, actions, rendered initial state,
    required signature, and any task hints."""
    sections = task.prompt_sections()
    return PromptBundle(SYSTEM_TEXT, "\n\n".join(sections), PromptKind.INITIAL)


def update_task_prompt(task, state, trace_limit: int = TRACE_LIMIT_DEFAULT) -> PromptBundle:
    """Improve prompt: embeds the incumbent program, its fitness, and the
    task-specific evaluation detail."""
    if state.best_program is None:
        raise MissingIncumbentError("no incumbent program to improve")
    detail = task.improve_detail(state.best_result, trace_limit=trace_limit)
    parts = list(task.prompt_sections())
    parts.append(
        "Your current best program achieved fitness "
        f"{state.best_fitness:g}. Here it is:\n\n```python\n{state.best_program.source}\n```"
    )
    if detail:
        parts.append("Evaluation detail for the current best program:\n" + detail)
    parts.append(
        "Write an improved version of this function that achieves a higher "
        "fitness. Reply with one fenced Python code block."
    )
    return PromptBundle(SYSTEM_TEXT, "\n\n".join(parts), PromptKind.IMPROVE)


def build_repair_prompt(task, source: str, status: str, error_text: str) -> PromptBundle:
    """Repair prompt: the failing source plus the error description."""
    parts = list(task.prompt_sections())
    parts.append(
        f"The following program failed with {status}:\n\n```python\n{source}\n```"
    )
    if error_text:
        parts.append("Error description:\n" + error_text.strip())
    parts.append(
        "Fix the program. Reply with one fenced Python code block containing "
        "the complete corrected function."
    )
    return PromptBundle(SYSTEM_TEXT, "\n\n".join(parts), PromptKind.REPAIR)

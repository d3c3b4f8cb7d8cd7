"""Planning-model toolkit: MDL models, plan validation, a search oracle and
strategy evaluation over a replayable task corpus."""

from ._core import (
    ModelError,
    check,
    extract_blocks,
    list_tasks,
    load_task,
    parse_model,
    prompt_key,
    qualitative_to_numeric,
    render_prompt,
    run_replay,
    score,
    solve,
    validate,
)

__all__ = [
    "ModelError",
    "check",
    "extract_blocks",
    "list_tasks",
    "load_task",
    "parse_model",
    "prompt_key",
    "qualitative_to_numeric",
    "render_prompt",
    "run_replay",
    "score",
    "solve",
    "validate",
]

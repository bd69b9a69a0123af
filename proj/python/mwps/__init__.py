"""Math word problem solver with a question-aware deductive decoder."""

from ._mwps import (
    Solver,
    evaluate_equation,
    extract_quantities,
    generate,
    load_jsonl,
    segment_question,
    template_names,
    train,
    __version__,
)

__all__ = [
    "Solver",
    "evaluate_equation",
    "extract_quantities",
    "generate",
    "load_jsonl",
    "segment_question",
    "template_names",
    "train",
    "__version__",
]

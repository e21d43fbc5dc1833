"""planeval: benchmark-grade plan generation, validation, repair, and an
LLM evaluation harness over STRIPS planning domains."""

__version__ = "0.1.0"

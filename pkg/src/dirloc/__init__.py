"""Directed test-program generation and spectrum-based bug localization,
exercised end to end against a bundled buggy mini-JIT fixture."""

__version__ = "0.1.0"

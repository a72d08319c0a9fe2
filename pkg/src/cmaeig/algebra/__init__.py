"""Exact symbolic verification of the constant-rank algebra."""

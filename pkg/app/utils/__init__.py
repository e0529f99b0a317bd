"""Parsing, formatting and exact-arithmetic helpers."""

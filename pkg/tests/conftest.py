"""Ensures the tests directory is importable for shared oracle helpers."""

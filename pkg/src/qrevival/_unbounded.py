"""Sentinel for time scales that never occur (e.g. revivals of a linear spectrum)."""

from __future__ import annotations

from typing import Union


class Unbounded:
    """An infinitely long time.

    Deliberately supports no arithmetic: code that may receive an unbounded
    time has to branch on it (or work with rates via :func:`rate`).
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __str__(self):
        return "unbounded"

    def __reduce__(self):
        return (Unbounded, ())


UNBOUNDED = Unbounded()

Time = Union[float, Unbounded]


def is_unbounded(t) -> bool:
    return t is UNBOUNDED


def rate(t: Time) -> float:
    """Reciprocal of a time, with ``UNBOUNDED`` mapped to 0."""
    return 0.0 if t is UNBOUNDED else 1.0 / t

"""Simple in-memory store for uploaded covering instances."""
from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from threading import RLock
from typing import Dict, List, Optional

from errors import FuzzyCoverError

from .instance_model import CrispInstance, FuzzyInstance
from .scalar_solver import ObjectiveTriple, Problem, ideal_point, problem_from_crisp, problem_from_fuzzy

__all__ = ["InstanceRecord", "InstanceStore", "UnknownInstance"]


class UnknownInstance(FuzzyCoverError, KeyError):
    """Raised when an instance id is not present in the store."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "Unknown instance"


@dataclass
class InstanceRecord:
    """A stored instance with its lazily built problems."""

    instance_id: str
    crisp: CrispInstance
    fuzzy: Optional[FuzzyInstance] = None
    _problems: Dict[str, Problem] = field(default_factory=dict, repr=False)
    _ideal: Optional[ObjectiveTriple] = field(default=None, repr=False)
    _lock: RLock = field(default_factory=RLock, repr=False)

    @property
    def is_fuzzy(self) -> bool:
        return self.fuzzy is not None

    @property
    def seed(self) -> Optional[int]:
        return self.fuzzy.seed if self.fuzzy is not None else None

    def crisp_problem(self) -> Problem:
        with self._lock:
            if "crisp" not in self._problems:
                self._problems["crisp"] = problem_from_crisp(self.crisp)
            return self._problems["crisp"]

    def problem(self) -> Problem:
        """The fuzzy problem when available, the crisp one otherwise."""
        if self.fuzzy is None:
            return self.crisp_problem()
        with self._lock:
            if "fuzzy" not in self._problems:
                self._problems["fuzzy"] = problem_from_fuzzy(self.fuzzy)
            return self._problems["fuzzy"]

    def ideal(self) -> ObjectiveTriple:
        with self._lock:
            if self._ideal is None:
                self._ideal = ideal_point(self.problem())
            return self._ideal


class InstanceStore:
    """Thread-safe, in-memory storage for instances shared across requests."""

    def __init__(self) -> None:
        self._lock = RLock()
        self._records: Dict[str, InstanceRecord] = {}

    def add(self, crisp: CrispInstance, fuzzy: Optional[FuzzyInstance] = None) -> InstanceRecord:
        record = InstanceRecord(instance_id=uuid.uuid4().hex, crisp=crisp, fuzzy=fuzzy)
        with self._lock:
            self._records[record.instance_id] = record
        return record

    def get(self, instance_id: str) -> InstanceRecord:
        with self._lock:
            record = self._records.get(instance_id)
        if record is None:
            raise UnknownInstance("Unknown instance id {}".format(instance_id))
        return record

    def remove(self, instance_id: str) -> None:
        with self._lock:
            if self._records.pop(instance_id, None) is None:
                raise UnknownInstance("Unknown instance id {}".format(instance_id))

    def ids(self) -> List[str]:
        with self._lock:
            return list(self._records)

    def clear(self) -> None:
        with self._lock:
            self._records.clear()

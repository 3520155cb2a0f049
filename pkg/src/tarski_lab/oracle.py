"""Query-counted access to an instance, with transcripts.

Every call to :meth:`CountingOracle.query` counts, repeats included; solvers
that want to avoid paying twice keep their own cache.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

from .construction import in_tube
from .herringbone import HerringboneInstance, evaluate
from .lattice import GridShape, Point


@dataclass(frozen=True)
class QueryRecord:
    step: int
    query: Point
    response: Point


def format_coords(p: Sequence[int]) -> str:
    return "/".join(str(x) for x in p)


def parse_coords(s: str) -> Point:
    return tuple(int(x) for x in s.split("/"))


@dataclass
class QueryTranscript:
    entries: list[QueryRecord] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.entries)

    def append(self, query: Point, response: Point) -> None:
        self.entries.append(QueryRecord(len(self.entries) + 1, query, response))

    def queries(self) -> list[Point]:
        return [e.query for e in self.entries]

    def to_lines(self) -> list[str]:
        """``step,query,response`` records, coordinates joined by ``/``."""
        return [f"{e.step},{format_coords(e.query)},{format_coords(e.response)}" for e in self.entries]

    def write(self, fh: TextIO) -> None:
        for line in self.to_lines():
            fh.write(line + "\n")

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "QueryTranscript":
        t = cls()
        for line in lines:
            line = line.strip()
            if not line:
                continue
            step, q, r = line.split(",")
            if int(step) != t.count + 1:
                raise ValueError(f"transcript step {step} out of order")
            t.append(parse_coords(q), parse_coords(r))
        return t

    def replays_against(self, inst: HerringboneInstance) -> bool:
        return all(evaluate(inst, e.query) == e.response for e in self.entries)


class CountingOracle:
    """Wraps an instance; the only way solvers see the function."""

    def __init__(self, instance: HerringboneInstance):
        self.instance = instance
        self.transcript = QueryTranscript()

    @property
    def shape(self) -> GridShape:
        return self.instance.shape

    @property
    def count(self) -> int:
        return self.transcript.count

    def query(self, v: Sequence[int]) -> Point:
        v = self.shape.check(v)
        r = evaluate(self.instance, v)
        self.transcript.append(v, r)
        return r


def query(oracle: CountingOracle, v: Sequence[int]) -> Point:
    return oracle.query(v)


@dataclass(frozen=True)
class OutsideSimulation:
    v: Point
    a: Point
    b: Point
    reconstructed: Optional[Point]
    determined: bool


def outside_probes(v: Sequence[int], L: int) -> tuple[Point, Point]:
    """The two tube points below and above an out-of-tube ``v``.

    ``a`` is the largest tube point below ``v``; ``b`` the smallest above it.
    """
    lo, hi = min(v), max(v)
    a = tuple(min(lo + 2 * L, x) for x in v)
    b = tuple(max(hi - 2 * L, x) for x in v)
    return a, b


def simulate_outside_query(oracle: CountingOracle, v: Sequence[int], L: int) -> OutsideSimulation:
    """Recover ``f(v)`` for ``v`` outside the tube from two in-tube queries.

    ``f(a) - a`` reveals the increasing direction of ``f(v)`` whenever it has a
    positive entry, and ``f(b) - b`` reveals the decreasing one whenever it has
    a negative entry.  If either is silent (``a`` or ``b`` is a spine vertex
    that does not step towards ``v``) the result is flagged undetermined.
    """
    v = oracle.shape.check(v)
    if in_tube(v, L):
        raise ValueError(f"{v} lies inside the tube T_{L}")
    a, b = outside_probes(v, L)
    fa = oracle.query(a)
    fb = oracle.query(b)
    up = [max(y - x, 0) for x, y in zip(a, fa)]
    down = [max(x - y, 0) for x, y in zip(b, fb)]
    if sum(up) != 1 or sum(down) != 1:
        return OutsideSimulation(v, a, b, None, False)
    rec = tuple(x + p - q for x, p, q in zip(v, up, down))
    return OutsideSimulation(v, a, b, rec, True)

"""State transition tree runtime.

The tree records, across all executions, the sequence of ``(variable, value)``
updates reported by instrumented state-variable assignments.  Every
execution walks down from the root; a missing child is created on the fly.
Hit counts feed the rare-node energy schedule, terminal counts give the
transition coverage metric.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

ROOT = 0
DEFAULT_REPETITION_CAP = 16

State = Tuple[str, int]
PathId = Tuple[State, ...]


class ExecutionAlreadyActive(RuntimeError):
    pass


class NoActiveExecution(RuntimeError):
    pass


@dataclass
class STTNode:
    """Read-only view of one tree node."""

    id: int
    variable: Optional[str]
    value: Optional[int]
    parent: Optional[int]
    children: List[int]
    hit_count: int
    terminal_count: int


@dataclass
class StateMachineGraph:
    """Compacted tree: nodes with equal ``(variable, value)`` merged.

    ``edges`` maps ``(src, dst)`` to a traversal count.  Transitions out of
    the initial pseudo-state are kept apart in ``initial_edges`` because the
    root carries no value.
    """

    states: List[State] = field(default_factory=list)
    edges: Dict[Tuple[State, State], int] = field(default_factory=dict)
    initial_edges: Dict[State, int] = field(default_factory=dict)

    def edge_set(self):
        return set(self.edges)


class STT:
    """Shared state transition tree with a single execution cursor.

    Nodes live in parallel lists indexed by node id; ids are never reused, so
    callers may hold on to them.  Mutations are serialised by an internal
    lock.
    """

    def __init__(self, repetition_cap: int = DEFAULT_REPETITION_CAP):
        if repetition_cap < 1:
            raise ValueError("repetition_cap must be positive")
        self.repetition_cap = repetition_cap
        self._lock = threading.Lock()
        self._var: List[Optional[str]] = [None]
        self._val: List[Optional[int]] = [None]
        self._parent: List[int] = [-1]
        self._children: List[Dict[State, int]] = [{}]
        self._hits: List[int] = [0]
        self._term: List[int] = [0]
        # sum of hit counts over non-root nodes
        self._hits_total = 0
        self._terminal_nodes = 0
        self._active = False
        self._cursor = ROOT
        self._reps: Dict[State, int] = {}
        self._truncated = False
        self.new_nodes = 0
        self.executions = 0

    # -- execution protocol -------------------------------------------------

    def begin_execution(self) -> None:
        with self._lock:
            if self._active:
                raise ExecutionAlreadyActive("an execution is already in flight")
            self._active = True
            self._cursor = ROOT
            self._reps = {}
            self._truncated = False
            self.new_nodes = 0
            self._hits[ROOT] += 1

    def on_update(self, variable: str, value: int) -> None:
        with self._lock:
            if not self._active:
                raise NoActiveExecution("on_update outside of an execution")
            if self._truncated:
                return
            key = (variable, value)
            reps = self._reps
            seen = reps.get(key, 0)
            if seen >= self.repetition_cap:
                # path is cut here; later updates of this execution are dropped
                self._truncated = True
                return
            reps[key] = seen + 1
            cur = self._cursor
            kids = self._children[cur]
            child = kids.get(key)
            if child is None:
                child = len(self._var)
                kids[key] = child
                self._var.append(variable)
                self._val.append(value)
                self._parent.append(cur)
                self._children.append({})
                self._hits.append(0)
                self._term.append(0)
                self.new_nodes += 1
            self._hits[child] += 1
            self._hits_total += 1
            self._cursor = child

    def end_execution_node(self) -> int:
        """Finish the execution and return the terminal node id."""
        with self._lock:
            if not self._active:
                raise NoActiveExecution("end_execution without begin_execution")
            node = self._cursor
            if self._term[node] == 0:
                self._terminal_nodes += 1
            self._term[node] += 1
            self._active = False
            self._cursor = ROOT
            self.executions += 1
            return node

    def end_execution(self) -> PathId:
        return self.path_id(self.end_execution_node())

    @property
    def active(self) -> bool:
        return self._active

    @property
    def cursor(self) -> int:
        return self._cursor

    # -- queries ------------------------------------------------------------

    @property
    def node_count(self) -> int:
        """Number of non-root nodes."""
        return len(self._var) - 1

    @property
    def hit_counts(self) -> List[int]:
        """Hit count per node id (index 0 is the root); live, do not mutate."""
        return self._hits

    def __len__(self) -> int:
        return self.node_count

    def node(self, node_id: int) -> STTNode:
        parent = self._parent[node_id]
        return STTNode(
            id=node_id,
            variable=self._var[node_id],
            value=self._val[node_id],
            parent=None if parent < 0 else parent,
            children=list(self._children[node_id].values()),
            hit_count=self._hits[node_id],
            terminal_count=self._term[node_id],
        )

    def nodes(self) -> Iterable[STTNode]:
        for i in range(len(self._var)):
            yield self.node(i)

    def hits(self, node_id: int) -> int:
        return self._hits[node_id]

    def terminal_count(self, node_id: int) -> int:
        return self._term[node_id]

    def path_nodes(self, node_id: int) -> Tuple[int, ...]:
        """Non-root node ids from the root down to ``node_id``."""
        out = []
        parent = self._parent
        while node_id > ROOT:
            out.append(node_id)
            node_id = parent[node_id]
        out.reverse()
        return tuple(out)

    def path_id(self, node_id: int) -> PathId:
        var, val = self._var, self._val
        return tuple((var[n], val[n]) for n in self.path_nodes(node_id))

    def find(self, path: Iterable[State]) -> Optional[int]:
        node = ROOT
        for key in path:
            node = self._children[node].get(tuple(key))
            if node is None:
                return None
        return node

    def transition_coverage(self) -> int:
        return self._terminal_nodes

    def terminal_paths(self) -> List[PathId]:
        return [self.path_id(n) for n in range(len(self._term)) if self._term[n] > 0]

    def mean_hits(self) -> Fraction:
        if self.node_count == 0:
            return Fraction(0)
        return Fraction(self._hits_total, self.node_count)

    def rare(self, node_id: int) -> bool:
        # hits(n) < total / |STT|, cross-multiplied to stay in integers
        return self._hits[node_id] * (len(self._var) - 1) < self._hits_total

    def rare_threshold(self) -> Tuple[int, int]:
        """``(total_hits, node_count)`` so callers can test rarity in bulk."""
        return self._hits_total, len(self._var) - 1

    # -- compaction and export ---------------------------------------------

    def compact(self) -> StateMachineGraph:
        var, val, parent, hits = self._var, self._val, self._parent, self._hits
        states = set()
        edges: Dict[Tuple[State, State], int] = {}
        initial: Dict[State, int] = {}
        for n in range(1, len(var)):
            key = (var[n], val[n])
            states.add(key)
            p = parent[n]
            if p == ROOT:
                initial[key] = initial.get(key, 0) + hits[n]
            else:
                e = ((var[p], val[p]), key)
                edges[e] = edges.get(e, 0) + hits[n]
        return StateMachineGraph(
            states=sorted(states),
            edges=dict(sorted(edges.items())),
            initial_edges=dict(sorted(initial.items())),
        )

    def snapshot(self) -> dict:
        """JSON-ready dump of nodes, parent links and counters."""
        nodes = []
        for n in range(len(self._var)):
            nodes.append({
                "id": n,
                "variable": self._var[n],
                "value": self._val[n],
                "parent": None if self._parent[n] < 0 else self._parent[n],
                "hits": self._hits[n],
                "terminal": self._term[n],
            })
        edges = [[self._parent[n], n] for n in range(1, len(self._var))]
        return {
            "repetition_cap": self.repetition_cap,
            "node_count": self.node_count,
            "transition_coverage": self._terminal_nodes,
            "executions": self.executions,
            "nodes": nodes,
            "edges": edges,
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, indent=1)


def _label(state: State, names: Optional[Mapping[str, Mapping[int, str]]]) -> str:
    var, value = state
    if names and var in names and value in names[var]:
        return f"{var}={names[var][value]}"
    return f"{var}={value}"


def export_dot(graph: StateMachineGraph,
               names: Optional[Mapping[str, Mapping[int, str]]] = None) -> str:
    """Render a compacted graph as DOT text.

    ``names`` maps variable -> value -> constant name; unknown values are
    printed numerically.  Output order follows the graph's sorted order, so
    equal trees give byte-identical text.
    """
    ids = {s: f"s{i}" for i, s in enumerate(graph.states)}
    lines = ["digraph stt {"]
    for s in graph.states:
        label = _label(s, names).replace('"', '\\"')
        # states entered straight from the initial pseudo-state get a double ring
        entry = " peripheries=2" if s in graph.initial_edges else ""
        lines.append(f'  {ids[s]} [label="{label}"{entry}];')
    for (a, b), count in graph.edges.items():
        lines.append(f'  {ids[a]} -> {ids[b]} [label="{count}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

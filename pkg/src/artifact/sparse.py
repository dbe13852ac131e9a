"""Decomposition of a DAG arc flow into at most m weighted paths."""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .graph_core import Number, PathFlow
from .layered import LayeredDag


def sparse_decompose(d: LayeredDag, flow: Sequence[Number]) -> PathFlow:
    """Path flow reproducing `flow` exactly on every arc.

    Partial paths are forwarded vertex by vertex in layer order.  A path is
    split only when the out-arc it is being pushed along runs out of flow,
    and each split exhausts an arc, so the support stays within the number
    of arcs carrying flow.  Paths waiting at a vertex are served FIFO and
    out-arcs in index order.
    """
    if len(flow) != d.m:
        raise ValueError("flow length does not match the arc count")
    if any(x < 0 for x in flow):
        raise ValueError("flow values must be nonnegative")
    terminals = d.S | d.T
    for v in range(d.n):
        if v in terminals:
            continue
        balance = sum(flow[a] for a in d.out_arcs[v]) - sum(flow[a] for a in d.in_arcs[v])
        if balance != 0:
            raise ValueError(f"flow has nonzero deficit at vertex {v}")

    waiting: dict[int, deque] = {}
    done: list[tuple[tuple[int, ...], Number]] = []

    def push(path: tuple[int, ...], amount: Number) -> None:
        head = d.heads[path[-1]]
        if head in d.T:
            done.append((path, amount))
        else:
            waiting.setdefault(head, deque()).append([path, amount])

    for s in sorted(d.S):
        for a in d.out_arcs[s]:
            if flow[a]:
                push((a,), flow[a])
    for v in d.order:
        queue = waiting.pop(v, None)
        if not queue:
            continue
        for a in d.out_arcs[v]:
            left = flow[a]
            while left:
                item = queue[0]
                moved = min(item[1], left)
                push(item[0] + (a,), moved)
                left -= moved
                item[1] -= moved
                if not item[1]:
                    queue.popleft()
    result = PathFlow(d.m, 1)
    result.add_component(done)
    return result

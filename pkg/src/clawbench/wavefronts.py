"""Event-queue evolution of piecewise-constant front configurations.

Fronts are straight discontinuity lines between collisions.  The engine
keeps fronts in a doubly-linked list ordered by position, schedules pairwise
collisions in a lazy heap, and resolves each collision by handing the
flanking states to a caller-supplied Riemann solver.  Simultaneous events
(within TIME_ATOL) are resolved left to right; exactly parallel fronts never
collide.
"""

import heapq
import json
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError
from .fields import PiecewiseConstantField

TIME_ATOL = 1e-12
POSITION_ATOL = 1e-11

SHOCK = "shock"
SLICE = "rarefaction-slice"


@dataclass(frozen=True)
class FrontSnapshot:
    position: float
    left: object
    right: object
    speed: float
    kind: str
    family: int = 1


@dataclass(frozen=True, eq=False)
class FrontState:
    """All fronts at one instant, sorted by position (ties sorted by speed).

    ``left_value`` is the solution value at -inf, which also defines the
    field when no fronts remain.
    """

    time: float
    fronts: tuple
    left_value: object = 0.0

    def positions(self):
        return np.array([f.position for f in self.fronts])

    def advanced(self, t):
        """The same fronts moved to a later time within the current free flight."""
        moved = tuple(
            FrontSnapshot(f.position + f.speed * (t - self.time), f.left, f.right,
                          f.speed, f.kind, f.family)
            for f in self.fronts
        )
        return FrontState(t, moved, self.left_value)

    def to_field(self):
        if not self.fronts:
            if np.ndim(self.left_value) == 0:
                return PiecewiseConstantField.constant(self.left_value)
            return PiecewiseConstantField(np.empty(0), np.asarray([self.left_value]))
        xs = [f.position for f in self.fronts]
        vals = [self.fronts[0].left] + [f.right for f in self.fronts]
        # Coincident positions (fans at birth) get an infinitesimal ordering nudge.
        xs = np.asarray(xs, dtype=float)
        for i in range(1, len(xs)):
            if xs[i] <= xs[i - 1]:
                xs[i] = np.nextafter(xs[i - 1], np.inf)
        return PiecewiseConstantField(xs, np.asarray(vals, dtype=float))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Front states recorded at t=0, after each collision, and at t_max."""

    times: tuple
    states: tuple

    def state_at(self, t):
        idx = int(np.searchsorted(self.times, t + TIME_ATOL)) - 1
        idx = max(idx, 0)
        return self.states[idx].advanced(t)

    def field_at(self, t):
        return self.state_at(t).to_field()

    @property
    def final(self):
        return self.states[-1]

    def to_jsonl(self, path):
        with open(path, "w") as fh:
            for st in self.states:
                fronts = [
                    {"x": f.position, "left": _state_list(f.left),
                     "right": _state_list(f.right), "speed": f.speed,
                     "kind": f.kind, "family": f.family}
                    for f in st.fronts
                ]
                fh.write(json.dumps({"t": st.time, "fronts": fronts}) + "\n")

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,x,u_left,u_right,speed\n")
            for st in self.states:
                for f in st.fronts:
                    fh.write(f"{st.time!r},{f.position!r},{_csv_state(f.left)},"
                             f"{_csv_state(f.right)},{f.speed!r}\n")


def _state_list(s):
    return [float(s)] if np.ndim(s) == 0 else [float(c) for c in np.asarray(s)]


def _csv_state(s):
    if np.ndim(s) == 0:
        return repr(float(s))
    return ";".join(repr(float(c)) for c in np.asarray(s))


class _Node:
    __slots__ = ("x0", "t0", "speed", "left", "right", "kind", "family",
                 "prev", "next", "alive", "uid")

    def __init__(self, uid, x0, t0, speed, left, right, kind, family):
        self.uid = uid
        self.x0 = x0
        self.t0 = t0
        self.speed = speed
        self.left = left
        self.right = right
        self.kind = kind
        self.family = family
        self.prev = None
        self.next = None
        self.alive = True

    def position(self, t):
        return self.x0 + self.speed * (t - self.t0)


def _states_equal(a, b):
    if np.ndim(a) == 0:
        return abs(float(a) - float(b)) <= 1e-13
    return bool(np.all(np.abs(np.asarray(a) - np.asarray(b)) <= 1e-13))


class FrontTracker:
    """Shared collision loop; the Riemann callback supplies the physics.

    riemann_fn(u_left, u_right) must return a list of
    (left, right, speed, kind, family) tuples with weakly increasing speeds
    and states chaining from u_left to u_right.
    """

    def __init__(self, riemann_fn, front_budget=10 ** 6, event_budget=10 ** 6):
        self.riemann_fn = riemann_fn
        self.front_budget = front_budget
        self.event_budget = event_budget

    def evolve(self, u0, t_max):
        self._left_value = u0.left_value
        head = self._initial_fronts(u0)
        heap = []
        seq = 0
        node = head
        count = 0
        while node is not None:
            count += 1
            if node.next is not None:
                seq = self._schedule(heap, node, node.next, seq)
            node = node.next
        if count > self.front_budget:
            raise ResourceLimitError(
                f"initial configuration holds {count} fronts", time_reached=0.0
            )

        times = [0.0]
        states = [self._snapshot(0.0, head)]
        events = 0
        t_now = 0.0
        head_ref = [head]

        while heap:
            entry = self._pop_valid(heap)
            if entry is None:
                break
            t_hit, _, a, b = entry
            if t_hit > t_max + TIME_ATOL:
                break
            # Gather every entry hitting at (numerically) the same time and
            # resolve the leftmost group first, pushing the rest back.
            group = [(t_hit, a, b)]
            stash = []
            while heap and heap[0][0] <= t_hit + TIME_ATOL:
                nxt = self._pop_valid(heap, limit=t_hit + TIME_ATOL)
                if nxt is None:
                    break
                group.append((nxt[0], nxt[2], nxt[3]))
            group.sort(key=lambda g: g[1].position(g[0]))
            t_hit, a, b = group[0]
            for g in group[1:]:
                seq = self._schedule(heap, g[1], g[2], seq)
            del stash

            t_now = t_hit
            x_hit = 0.5 * (a.position(t_hit) + b.position(t_hit))
            left_node, right_node = self._collision_group(a, b, t_hit, x_hit)
            seq, count = self._resolve(heap, head_ref, left_node, right_node,
                                       t_hit, x_hit, seq, count)
            events += 1
            if count > self.front_budget or events > self.event_budget:
                raise ResourceLimitError(
                    f"front budget exhausted after {events} events", time_reached=t_now
                )
            times.append(t_hit)
            states.append(self._snapshot(t_hit, head_ref[0]))

        final = states[-1].advanced(t_max)
        if times[-1] < t_max - TIME_ATOL:
            times.append(t_max)
            states.append(final)
        return Trajectory(tuple(times), tuple(states))

    # -- internals ---------------------------------------------------------

    def _initial_fronts(self, u0):
        head = None
        tail = None
        uid = 0
        for x, ul, ur in u0.jumps():
            for (wl, wr, s, kind, fam) in self.riemann_fn(ul, ur):
                node = _Node(uid, float(x), 0.0, float(s), wl, wr, kind, fam)
                uid += 1
                if tail is None:
                    head = tail = node
                else:
                    tail.next = node
                    node.prev = tail
                    tail = node
        self._next_uid = uid
        return head

    def _schedule(self, heap, a, b, seq):
        if a.speed <= b.speed + 1e-15:
            return seq
        # Solve a.position(t) == b.position(t) for t past both anchors.
        t = (b.x0 - b.speed * b.t0 - a.x0 + a.speed * a.t0) / (a.speed - b.speed)
        if t < max(a.t0, b.t0) - TIME_ATOL:
            return seq
        heapq.heappush(heap, (t, seq, a, b))
        return seq + 1

    @staticmethod
    def _pop_valid(heap, limit=None):
        while heap:
            if limit is not None and heap[0][0] > limit:
                return None
            t, s, a, b = heapq.heappop(heap)
            if a.alive and b.alive and a.next is b:
                return (t, s, a, b)
        return None

    @staticmethod
    def _collision_group(a, b, t, x):
        """Extend the colliding pair to every front arriving at the same point."""
        left = a
        while left.prev is not None and abs(left.prev.position(t) - x) <= POSITION_ATOL:
            left = left.prev
        right = b
        while right.next is not None and abs(right.next.position(t) - x) <= POSITION_ATOL:
            right = right.next
        return left, right

    def _resolve(self, heap, head_ref, left_node, right_node, t, x, seq, count):
        ul = left_node.left
        ur = right_node.right
        before = left_node.prev
        after = right_node.next
        node = left_node
        while True:
            node.alive = False
            count -= 1
            if node is right_node:
                break
            node = node.next

        new_nodes = []
        if not _states_equal(ul, ur):
            for (wl, wr, s, kind, fam) in self.riemann_fn(ul, ur):
                new_nodes.append(_Node(self._next_uid, x, t, float(s), wl, wr, kind, fam))
                self._next_uid += 1
        count += len(new_nodes)

        prev = before
        for node in new_nodes:
            node.prev = prev
            if prev is None:
                head_ref[0] = node
            else:
                prev.next = node
            prev = node
        if prev is None:
            head_ref[0] = after
            if after is not None:
                after.prev = None
        else:
            prev.next = after
            if after is not None:
                after.prev = prev

        if before is not None and before.next is not None:
            seq = self._schedule(heap, before, before.next, seq)
        if after is not None and after.prev is not None and after.prev is not before:
            seq = self._schedule(heap, after.prev, after, seq)
        return seq, count

    def _snapshot(self, t, head):
        fronts = []
        node = head
        while node is not None:
            if node.alive:
                fronts.append(FrontSnapshot(node.position(t), node.left, node.right,
                                            node.speed, node.kind, node.family))
            node = node.next
        return FrontState(t, tuple(fronts), self._left_value)

"""Clip network: storage, wildcard construction, random-walk deliberation.

Clips are nodes of a directed weighted graph.  Percept clips are K-tuples of
category values, wildcard clips replace one or more categories with the
wildcard symbol (represented as ``None`` in slot tuples, ``#`` in dumps) and
action clips carry an action id.  Edges run from a clip only to action clips
or to wildcard clips with strictly more wildcard slots, so the graph is a
layered DAG and every deliberation walk terminates within K+1 hops.

Weights (h-values) start at ``h0`` and are changed only by
:meth:`ClipNetwork.update_weights`: every edge is damped toward 1 by gamma,
traversed edges additionally gain the reward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PERCEPT = "percept"
WILDCARD = "wildcard"
ACTION = "action"


@dataclass(frozen=True)
class Clip:
    kind: str
    slots: tuple | None = None  # None entries are wildcard slots
    action_id: int | None = None

    @property
    def layer(self) -> int:
        """Number of wildcard slots; 0 for percepts, undefined for actions."""
        if self.kind == ACTION:
            raise ValueError("action clips carry no layer")
        return sum(1 for s in self.slots if s is None)

    def __str__(self) -> str:
        if self.kind == ACTION:
            return f"action:{self.action_id}"
        return "(" + ",".join("#" if s is None else str(s) for s in self.slots) + ")"


@dataclass
class CreationReport:
    """What a single add_percept call created."""

    new_clips: list[int] = field(default_factory=list)
    new_edges: list[tuple[int, int]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.new_clips and not self.new_edges


def matches(lower: Clip, higher: Clip) -> bool:
    """True iff `higher` generalizes `lower`: strictly more wildcard slots
    and every explicit value of `higher` agrees with `lower`."""
    if lower.kind == ACTION or higher.kind == ACTION:
        raise ValueError("matches is defined on percept/wildcard clips only")
    if len(lower.slots) != len(higher.slots):
        raise ValueError("clips have different category counts")
    if higher.layer <= lower.layer:
        return False
    return all(h is None or h == l for l, h in zip(lower.slots, higher.slots))


def wildcard_from_pair(p: Clip, q: Clip) -> Clip | None:
    """Wildcard clip abstracting the pair: # where p and q differ, the common
    value elsewhere.  None for identical percepts (no differing category)."""
    if p.kind != PERCEPT or q.kind != PERCEPT:
        raise ValueError("wildcard_from_pair expects two percept clips")
    if len(p.slots) != len(q.slots):
        raise ValueError("clips have different category counts")
    if p.slots == q.slots:
        return None
    slots = tuple(a if a == b else None for a, b in zip(p.slots, q.slots))
    return Clip(WILDCARD, slots=slots)


class ClipNetwork:
    """Single-agent clip network.

    Action clips occupy ids 0..n_actions-1; percept and wildcard clips are
    appended in creation order.  Adjacency dicts preserve insertion order,
    which fixes the sampling order of the random walk (the compiled engine
    reproduces the same order).

    With ``generalization=False`` the network stays two-layered: add_percept
    wires new percepts straight to the action clips and builds no wildcards.
    """

    def __init__(self, n_actions: int, h0: float = 1.0, generalization: bool = True):
        if n_actions < 2:
            raise ValueError("need at least 2 actions")
        if h0 <= 0:
            raise ValueError("h0 must be positive")
        self.n_actions = n_actions
        self.h0 = float(h0)
        self.generalization = generalization
        self.clips: list[Clip] = []
        self.edges: dict[int, dict[int, float]] = {}
        self._percepts: dict[tuple, int] = {}
        self._wildcards: dict[tuple, int] = {}
        self._k: int | None = None
        for a in range(n_actions):
            self.clips.append(Clip(ACTION, action_id=a))
            self.edges[a] = {}

    # -- construction -----------------------------------------------------

    def _new_clip(self, clip: Clip, report: CreationReport) -> int:
        cid = len(self.clips)
        self.clips.append(clip)
        self.edges[cid] = {}
        report.new_clips.append(cid)
        if clip.kind == PERCEPT:
            self._percepts[clip.slots] = cid
        else:
            self._wildcards[clip.slots] = cid
        # every percept/wildcard clip connects to all action clips
        for a in range(self.n_actions):
            self._add_edge(cid, a, report)
        return cid

    def _add_edge(self, src: int, dst: int, report: CreationReport) -> None:
        assert dst not in self.edges[src]
        self.edges[src][dst] = self.h0
        report.new_edges.append((src, dst))

    def percept_id(self, s: tuple) -> int | None:
        return self._percepts.get(tuple(s))

    def add_percept(self, s: tuple) -> tuple[int, CreationReport]:
        """Ensure the percept clip for `s` exists; grow wildcards and restore
        edge closure when generalization is on.  Idempotent."""
        s = tuple(s)
        if self._k is None:
            self._k = len(s)
        elif len(s) != self._k:
            raise ValueError(f"percept arity {len(s)} != {self._k}")
        if any(v is None for v in s):
            raise ValueError("percepts carry no wildcard slots")
        existing = self._percepts.get(s)
        if existing is not None:
            return existing, CreationReport()

        report = CreationReport()
        old_percept_ids = list(self._percepts.values())
        old_nonaction_ids = sorted(old_percept_ids + list(self._wildcards.values()))
        pid = self._new_clip(Clip(PERCEPT, slots=s), report)
        new_percept = self.clips[pid]
        if not self.generalization:
            return pid, report

        # pairwise comparison against existing percepts, in creation order
        new_wildcards: list[int] = []
        for qid in old_percept_ids:
            cand = wildcard_from_pair(new_percept, self.clips[qid])
            if cand is not None and cand.slots not in self._wildcards:
                new_wildcards.append(self._new_clip(cand, report))

        # closure, pass 1: new percept -> every matching wildcard (id order)
        for slots, wid in sorted(self._wildcards.items(), key=lambda kv: kv[1]):
            if matches(new_percept, self.clips[wid]):
                self._add_edge(pid, wid, report)

        # closure, pass 2: wire each new wildcard (creation order)
        for wid in new_wildcards:
            w = self.clips[wid]
            # outgoing: to matching higher wildcards (id order, incl. new ones)
            for _, cid in sorted(self._wildcards.items(), key=lambda kv: kv[1]):
                if cid != wid and matches(w, self.clips[cid]):
                    self._add_edge(wid, cid, report)
            # incoming: from pre-existing percept/wildcard clips (id order)
            for cid in old_nonaction_ids:
                if matches(self.clips[cid], w):
                    self._add_edge(cid, wid, report)
        return pid, report

    # -- deliberation -----------------------------------------------------

    def hop_distribution(self, cid: int) -> dict[int, float]:
        """Normalized hopping probabilities out of clip `cid`."""
        out = self.edges[cid]
        if not out:
            raise ValueError(f"clip {cid} has no outgoing edges")
        total = 0.0
        for h in out.values():
            total += h
        return {dst: h / total for dst, h in out.items()}

    def _hop(self, cid: int, rng) -> int:
        out = self.edges[cid]
        total = 0.0
        for h in out.values():
            total += h
        threshold = rng.random() * total
        acc = 0.0
        dst = cid
        for dst, h in out.items():
            acc += h
            if threshold < acc:
                return dst
        return dst  # guard against rounding at the upper end

    def random_walk(self, start: int, rng) -> tuple[int, list[tuple[int, int]]]:
        """Walk from `start` until an action clip is hit.

        Returns (action_id, path) where path is the traversed edge list.
        Termination within K+1 hops is guaranteed by the layer ordering.
        """
        if self.clips[start].kind == ACTION:
            raise ValueError("walks start at percept clips")
        path = []
        cur = start
        while self.clips[cur].kind != ACTION:
            nxt = self._hop(cur, rng)
            path.append((cur, nxt))
            cur = nxt
        return self.clips[cur].action_id, path

    def majority_vote(self, start: int, rng, votes: int) -> int:
        """Modal action over `votes` independent walks (no learning between
        them); `votes` must be odd, residual ties break to the lowest id."""
        if votes < 1 or votes % 2 == 0:
            raise ValueError("vote count must be a positive odd integer")
        counts = [0] * self.n_actions
        for _ in range(votes):
            action, _ = self.random_walk(start, rng)
            counts[action] += 1
        return max(range(self.n_actions), key=lambda a: (counts[a], -a))

    # -- learning ---------------------------------------------------------

    def update_weights(self, path: list[tuple[int, int]], reward: float, gamma: float) -> None:
        """Damp every edge toward 1 by `gamma`; traversed edges gain `reward`."""
        if reward < 0:
            raise ValueError("reward must be non-negative")
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        for src, dst in path:
            if dst not in self.edges.get(src, {}):
                raise ValueError(f"edge {src}->{dst} not in network")
        if gamma > 0.0:
            for out in self.edges.values():
                for dst, h in out.items():
                    out[dst] = h - gamma * (h - 1.0)
        for src, dst in path:
            self.edges[src][dst] += reward

    # -- introspection ----------------------------------------------------

    def percept_ids(self) -> list[int]:
        return list(self._percepts.values())

    def wildcard_ids(self) -> list[int]:
        return list(self._wildcards.values())

    def dump(self) -> str:
        """Plain-text snapshot: one line per clip and per edge, sorted by id.
        Used for golden-file and replay-determinism tests."""
        lines = []
        for cid, clip in enumerate(self.clips):
            if clip.kind == ACTION:
                lines.append(f"clip {cid} action {clip.action_id}")
            else:
                slots = ",".join("#" if s is None else str(s) for s in clip.slots)
                lines.append(f"clip {cid} {clip.kind} {slots}")
        for src in sorted(self.edges):
            for dst in sorted(self.edges[src]):
                lines.append(f"edge {src} {dst} {self.edges[src][dst]:.17g}")
        return "\n".join(lines) + "\n"

    def check_invariants(self, tol: float = 1e-12) -> None:
        """Raise AssertionError if any structural invariant is violated.

        Checks normalization, the h floor (for h0=1), layer-ordered
        acyclicity and full matching/action-edge closure by exhaustive scan.
        """
        nonaction = [cid for cid, c in enumerate(self.clips) if c.kind != ACTION]
        for cid in nonaction:
            assert self.edges[cid], f"clip {cid} has no out-edges"
            assert abs(sum(self.hop_distribution(cid).values()) - 1.0) <= tol
            for dst, h in self.edges[cid].items():
                assert h > 0.0
                if self.h0 == 1.0:
                    assert h >= 1.0 - tol
                target = self.clips[dst]
                assert target.kind == ACTION or target.layer > self.clips[cid].layer
            for a in range(self.n_actions):
                assert a in self.edges[cid], f"clip {cid} misses action edge {a}"
        for a in range(self.n_actions):
            assert not self.edges[a], "action clips must have out-degree 0"
        if self.generalization:
            for low in nonaction:
                for high in nonaction:
                    if low != high and matches(self.clips[low], self.clips[high]):
                        assert high in self.edges[low], (
                            f"closure violated: {self.clips[low]} !-> {self.clips[high]}"
                        )

"""Re-Pair grammar over movement logs, with per-rule travel metadata.

Log symbols share one integer alphabet:

* 0..3 are event markers — ``EV_D`` (stops emitting), ``EV_AA`` (starts
  emitting), ``EV_RNM`` (gap, reappears in place), ``EV_RM`` (gap, reappears
  displaced).  Their payloads live in side arrays, not in the stream.
* spiral move code m is stored as ``m + MOVE_BASE``.
* nonterminals are numbered from ``alphabet_size`` upward, in creation
  order, so every rule only references strictly smaller ids.

Compression repeatedly replaces the most frequent *eligible* pair with a
fresh nonterminal: a pair is eligible when neither side is an event marker
and both halves sit in the same input stream.  Frequencies count
non-overlapping occurrences (a run of L equal symbols counts floor(L/2));
ties pick the smallest (a, b); replacement scans left to right.  The loop
stops when no pair occurs twice.  Everything is deterministic, which the
serialization round-trip tests rely on.

After compression every rule s -> (a, b) is annotated bottom-up with the
time span it covers, its net displacement, and the bounding box of the
origin plus every intermediate position of its expansion ("relative MBR",
origin included) — the payloads that let traversals jump over whole rules.
"""

import numpy as np

from . import spiral

EV_D = 0
EV_AA = 1
EV_RNM = 2
EV_RM = 3
MOVE_BASE = 4

_HOLE = -1


def repair_compress(streams, nt_base):
    """Compress integer streams jointly; returns (streams, rule pair list).

    ``nt_base`` is the first nonterminal id (= alphabet size).  The input
    streams may be empty; symbols must be < nt_base.
    """
    lengths = [len(s) for s in streams]
    if sum(lengths) == 0:
        return [np.zeros(0, dtype=np.int64) for _ in streams], []
    arr = np.concatenate([np.asarray(s, dtype=np.int64) for s in streams])
    sid = np.repeat(np.arange(len(streams), dtype=np.int64), lengths)
    if arr.min() < 0 or arr.max() >= nt_base:
        raise ValueError("stream symbol outside the terminal alphabet")
    rules = []
    nt_next = nt_base
    while len(arr) >= 2:
        left, right = arr[:-1], arr[1:]
        valid = (
            (sid[:-1] == sid[1:]) & (left >= MOVE_BASE) & (right >= MOVE_BASE)
        )
        if not valid.any():
            break
        # equal-symbol runs: only even in-run offsets count (non-overlap)
        start = np.empty(len(arr), dtype=bool)
        start[0] = True
        start[1:] = (arr[1:] != arr[:-1]) | (sid[1:] != sid[:-1])
        first_idx = np.flatnonzero(start)[np.cumsum(start) - 1]
        pos_in_run = np.arange(len(arr)) - first_idx
        countable = valid & ((left != right) | (pos_in_run[:-1] % 2 == 0))
        if not countable.any():
            break
        keys = left * nt_next + right
        uniq, counts = np.unique(keys[countable], return_counts=True)
        best = int(np.argmax(counts))  # first max = smallest key on ties
        if counts[best] < 2:
            break
        a, b = divmod(int(uniq[best]), nt_next)
        match = valid & (left == a) & (right == b)
        if a == b:
            match &= pos_in_run[:-1] % 2 == 0
        pos = np.flatnonzero(match)
        arr[pos] = nt_next
        arr[pos + 1] = _HOLE
        keep = arr != _HOLE
        arr = arr[keep]
        sid = sid[keep]
        rules.append((a, b))
        nt_next += 1
    bounds = np.searchsorted(sid, np.arange(1, len(streams)))
    return [part.copy() for part in np.split(arr, bounds)], rules


class RuleDictionary:
    """Enriched Re-Pair rules plus terminal displacement tables."""

    def __init__(self, max_move_code, pairs, span, dx, dy, mbr):
        self.max_move_code = int(max_move_code)
        self.nt_base = MOVE_BASE + self.max_move_code + 1
        self.pairs = pairs  # (R, 2) int64
        self.span = span
        self.dx = dx
        self.dy = dy
        self.mbr = mbr  # (R, 4) int64: x1, y1, x2, y2 relative to origin
        self.term_dx, self.term_dy = spiral.decode_table(self.max_move_code)

    @classmethod
    def build(cls, rule_pairs, max_move_code):
        """Enrich rules bottom-up (every rule references smaller ids only)."""
        nt_base = MOVE_BASE + max_move_code + 1
        tdx, tdy = spiral.decode_table(max_move_code)
        nrules = len(rule_pairs)
        pairs = np.asarray(rule_pairs, dtype=np.int64).reshape(nrules, 2)
        span = np.zeros(nrules, dtype=np.int64)
        dx = np.zeros(nrules, dtype=np.int64)
        dy = np.zeros(nrules, dtype=np.int64)
        mbr = np.zeros((nrules, 4), dtype=np.int64)

        def parts_of(sym):
            if sym < MOVE_BASE:
                raise ValueError("event symbol inside a rule")
            if sym < nt_base:
                mdx = int(tdx[sym - MOVE_BASE])
                mdy = int(tdy[sym - MOVE_BASE])
                return (
                    1,
                    mdx,
                    mdy,
                    (min(mdx, 0), min(mdy, 0), max(mdx, 0), max(mdy, 0)),
                )
            i = sym - nt_base
            return (
                int(span[i]),
                int(dx[i]),
                int(dy[i]),
                tuple(int(v) for v in mbr[i]),
            )

        for i in range(nrules):
            a, b = int(pairs[i, 0]), int(pairs[i, 1])
            sa, dxa, dya, ma = parts_of(a)
            sb, dxb, dyb, mb = parts_of(b)
            span[i] = sa + sb
            dx[i] = dxa + dxb
            dy[i] = dya + dyb
            mbr[i] = (
                min(ma[0], mb[0] + dxa),
                min(ma[1], mb[1] + dya),
                max(ma[2], mb[2] + dxa),
                max(ma[3], mb[3] + dya),
            )
        return cls(max_move_code, pairs, span, dx, dy, mbr)

    @property
    def n_rules(self):
        return len(self.pairs)

    def is_nonterminal(self, sym):
        return sym >= self.nt_base

    def _check(self, sym):
        if sym < MOVE_BASE:
            raise ValueError("event symbol has no movement payload: %d" % sym)
        if sym >= self.nt_base + len(self.pairs):
            raise KeyError("unknown rule id: %d" % sym)

    def span_of(self, sym):
        self._check(sym)
        if sym < self.nt_base:
            return 1
        return int(self.span[sym - self.nt_base])

    def disp_of(self, sym):
        self._check(sym)
        if sym < self.nt_base:
            m = sym - MOVE_BASE
            return int(self.term_dx[m]), int(self.term_dy[m])
        i = sym - self.nt_base
        return int(self.dx[i]), int(self.dy[i])

    def mbr_of(self, sym):
        """Relative bounding box of origin + all intermediate positions."""
        self._check(sym)
        if sym < self.nt_base:
            m = sym - MOVE_BASE
            mdx, mdy = int(self.term_dx[m]), int(self.term_dy[m])
            return (min(mdx, 0), min(mdy, 0), max(mdx, 0), max(mdy, 0))
        i = sym - self.nt_base
        return tuple(int(v) for v in self.mbr[i])

    def pair_of(self, sym):
        i = sym - self.nt_base
        return int(self.pairs[i, 0]), int(self.pairs[i, 1])

    def expand(self, sym):
        """Left-to-right terminal expansion (move symbols, not codes)."""
        self._check(sym)
        out = []
        stack = [sym]
        while stack:
            s = stack.pop()
            if s < self.nt_base:
                out.append(s)
            else:
                a, b = self.pair_of(s)
                stack.append(b)
                stack.append(a)
        return out

    def depth(self):
        """Longest rule chain; 0 when there are no rules."""
        if not len(self.pairs):
            return 0
        d = np.zeros(len(self.pairs), dtype=np.int64)
        for i in range(len(self.pairs)):
            da = d[self.pairs[i, 0] - self.nt_base] if self.pairs[i, 0] >= self.nt_base else 0
            db = d[self.pairs[i, 1] - self.nt_base] if self.pairs[i, 1] >= self.nt_base else 0
            d[i] = 1 + max(da, db)
        return int(d.max())


def zigzag(values):
    """Map signed to unsigned: 0,-1,1,-2,2.. -> 0,1,2,3,4.."""
    values = np.asarray(values, dtype=np.int64)
    return np.where(values >= 0, 2 * values, -2 * values - 1).astype(np.uint64)


def unzigzag(values):
    values = np.asarray(values, dtype=np.uint64).astype(np.int64)
    return np.where(values % 2 == 0, values // 2, -(values + 1) // 2)

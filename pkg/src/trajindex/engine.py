"""The queryable index: periodic snapshots + compressed logs + rule metadata.

Construction discretizes nothing itself — it expects the regular,
integer-cell form produced by ``ingest.normalize`` (one position per active
instant per object, gaps allowed).  It then:

1. computes the dataset's maximum per-instant displacement (Euclidean,
   rounded up; the bound behind every pruning rule),
2. cuts each object's timeline into portions of ``period`` instants,
   emitting spiral move codes and AA/D/RM/RNM events per portion,
3. compresses all logs jointly with Re-Pair and annotates every rule with
   span / displacement / relative bounding box,
4. builds one snapshot (k2-tree + id permutation) per multiple of the
   period, with appear/disappear entry lists linking into the logs.

Queries follow the classic plan: anchor at a snapshot (or an appearance /
disappearance event), then walk the compressed log forward or backward,
jumping whole rules whenever their metadata proves they cannot matter.
``counters`` tracks how many symbols each traversal family touched, which
the pruning tests compare across debug flags (``use_mbr`` / ``use_er``).

Results are deterministic: object lists sort by id, nearest-neighbour
answers by (distance, id).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import serial, spiral
from .geometry import (
    box_shift,
    clip_region,
    contains,
    dist_point_point,
    expanded_region,
    region_in_region,
    regions_intersect,
)
from .grammar import (
    EV_AA,
    EV_D,
    EV_RM,
    EV_RNM,
    MOVE_BASE,
    RuleDictionary,
    repair_compress,
    unzigzag,
    zigzag,
)
from .logs import LogStore, Portion, move_back, move_jump, move_steps
from .snapshot import Snapshot

MAGIC = b"GCTI"
FORMAT_VERSION = 1


@dataclass
class IndexParams:
    period: int
    k: int
    side: int
    n_objects: int
    t_max: int
    max_speed: int
    raw_symbols: int
    sample_rate: int = 5


class Counters(dict):
    def bump(self, key, n=1):
        self[key] = self.get(key, 0) + n

    def reset(self):
        self.clear()


class TrajectoryIndex:
    def __init__(self, params, ids, snapshots, logs, rules):
        self.params = params
        self.ids = ids  # sorted original object ids; position = internal id
        self.snapshots = snapshots
        self.logs = logs
        self.rules = rules
        self.counters = Counters()

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def build(cls, series, period, k=2, side=None, sample_rate=5):
        """Build from normalized per-object segments.

        ``series``: {object id: [(start instant, [(x, y), ...]), ...]} with
        strictly increasing, non-overlapping segments per object.
        """
        if period < 1:
            raise ValueError("period must be >= 1")
        ids = sorted(series.keys())
        if ids and ids[0] < 0:
            raise ValueError("object ids must be non-negative integers")
        timelines = []
        t_max = 0
        max_coord = 0
        for oid in ids:
            ts_parts, xs_parts, ys_parts = [], [], []
            for start, cells in series[oid]:
                if not len(cells):
                    continue
                ts_parts.append(np.arange(start, start + len(cells), dtype=np.int64))
                xs_parts.append(np.asarray([c[0] for c in cells], dtype=np.int64))
                ys_parts.append(np.asarray([c[1] for c in cells], dtype=np.int64))
            if ts_parts:
                ts = np.concatenate(ts_parts)
                xs = np.concatenate(xs_parts)
                ys = np.concatenate(ys_parts)
            else:
                ts = xs = ys = np.zeros(0, dtype=np.int64)
            if len(ts):
                if ts[0] < 0 or (np.diff(ts) <= 0).any():
                    raise ValueError("object %r: instants must strictly increase" % oid)
                if xs.min() < 0 or ys.min() < 0:
                    raise ValueError("object %r: negative cell coordinate" % oid)
                t_max = max(t_max, int(ts[-1]))
                max_coord = max(max_coord, int(xs.max()), int(ys.max()))
            timelines.append((ts, xs, ys))
        if side is None:
            side = k
            while side <= max_coord:
                side *= k
        else:
            s = k
            while s < side:
                s *= k
            if s != side or side <= max_coord:
                raise ValueError("side must be a power of k covering all cells")

        max_speed = 1
        for ts, xs, ys in timelines:
            if len(ts) < 2:
                continue
            dt = np.diff(ts)
            dd = np.diff(xs) ** 2 + np.diff(ys) ** 2
            nz = dd > 0
            if nz.any():
                per = [
                    math.isqrt(int(sq) - 1) // int(el) + 1
                    for sq, el in zip(dd[nz], dt[nz])
                ]
                max_speed = max(max_speed, max(per))

        n_portions = -(-t_max // period) if t_max else 0
        streams = []
        stream_meta = []  # (portion, internal id, d values, p values)
        max_move = 0
        for h in range(n_portions):
            lo = h * period
            pe = min(lo + period, t_max)
            for o, (ts, xs, ys) in enumerate(timelines):
                i0 = int(np.searchsorted(ts, lo, side="right"))
                i1 = int(np.searchsorted(ts, pe, side="right"))
                at_snap = i0 > 0 and ts[i0 - 1] == lo
                if i0 == i1 and not at_snap:
                    continue
                syms, dv, pv = [], [], []
                j = i0
                if not at_snap:
                    syms.append(EV_AA)
                    dv.append(int(ts[i0]))
                    pv.append(int(xs[i0]))
                    pv.append(int(ys[i0]))
                    j = i0 + 1
                for jj in range(j, i1):
                    step = int(ts[jj] - ts[jj - 1])
                    dx = int(xs[jj] - xs[jj - 1])
                    dy = int(ys[jj] - ys[jj - 1])
                    if step == 1:
                        code = spiral.encode(dx, dy)
                        max_move = max(max_move, code)
                        syms.append(code + MOVE_BASE)
                    elif dx == 0 and dy == 0:
                        syms.append(EV_RNM)
                        dv.append(step - 1)
                    else:
                        syms.append(EV_RM)
                        dv.append(step - 1)
                        pv.append(spiral.encode(dx, dy))
                last = i1 - 1 if i1 > i0 else i0 - 1
                if int(ts[last]) < pe:
                    syms.append(EV_D)
                    dv.append(int(ts[last]))
                    pv.append(int(xs[last]))
                    pv.append(int(ys[last]))
                streams.append(syms)
                stream_meta.append((h, o, dv, pv))

        raw_symbols = sum(len(s) for s in streams)
        nt_base = MOVE_BASE + max_move + 1
        compressed, rule_pairs = repair_compress(streams, nt_base)
        rules = RuleDictionary.build(rule_pairs, max_move)

        syms_all = (
            np.concatenate(compressed) if compressed else np.zeros(0, dtype=np.int64)
        )
        portions = []
        si = 0
        pos = 0
        for h in range(n_portions):
            p_ids, d_vals, d_off, p_vals, p_off = [], [], [0], [], [0]
            s_off = [pos]
            while si < len(stream_meta) and stream_meta[si][0] == h:
                _, o, dv, pv = stream_meta[si]
                p_ids.append(o)
                s_off.append(s_off[-1] + len(compressed[si]))
                d_vals.extend(dv)
                d_off.append(len(d_vals))
                p_vals.extend(pv)
                p_off.append(len(p_vals))
                si += 1
            pos = s_off[-1]
            portions.append(Portion(p_ids, s_off, d_vals, d_off, p_vals, p_off))

        params = IndexParams(
            period=period,
            k=k,
            side=side,
            n_objects=len(ids),
            t_max=t_max,
            max_speed=max_speed,
            raw_symbols=raw_symbols,
            sample_rate=sample_rate,
        )
        logs = LogStore(rules, period, t_max, syms_all, portions)

        snapshots = []
        n_snaps = t_max // period + 1
        snap_positions = [[] for _ in range(n_snaps)]
        for o, (ts, xs, ys) in enumerate(timelines):
            if not len(ts):
                continue
            snap_ts = np.arange(n_snaps, dtype=np.int64) * period
            idx = np.searchsorted(ts, snap_ts)
            ok = (idx < len(ts)) & (ts[np.minimum(idx, len(ts) - 1)] == snap_ts)
            for hh in np.flatnonzero(ok):
                i = int(idx[hh])
                snap_positions[hh].append((o, int(xs[i]), int(ys[i])))
        for hh in range(n_snaps):
            app = (
                portions[hh].ids[portions[hh].starts_aa]
                if hh < len(portions)
                else np.zeros(0, dtype=np.int64)
            )
            dis = (
                portions[hh - 1].ids[portions[hh - 1].ends_d]
                if hh >= 1
                else np.zeros(0, dtype=np.int64)
            )
            snapshots.append(
                Snapshot.build(
                    hh * period,
                    snap_positions[hh],
                    app,
                    dis,
                    k,
                    side,
                    len(ids),
                    sample_rate,
                )
            )
        return cls(params, np.asarray(ids, dtype=np.int64), snapshots, logs, rules)

    # ------------------------------------------------------------------
    # id mapping and small helpers
    # ------------------------------------------------------------------

    def _oid(self, obj):
        i = int(np.searchsorted(self.ids, obj))
        if i >= len(self.ids) or self.ids[i] != obj:
            raise KeyError("unknown object id: %r" % (obj,))
        return i

    def _orig(self, oid):
        return int(self.ids[oid])

    @property
    def last_snapshot(self):
        return self.params.t_max // self.params.period

    def _nearest_snapshot(self, t_q):
        d = self.params.period
        return min((2 * t_q + d - 1) // (2 * d), self.last_snapshot)

    def _in_extent(self, t):
        return 0 <= t <= self.params.t_max

    # ------------------------------------------------------------------
    # object position (single instant)
    # ------------------------------------------------------------------

    def position_of(self, obj, t_q, snapshot_choice="nearest"):
        """Position of an object at one instant, or None when absent."""
        oid = self._oid(obj)
        if not self._in_extent(t_q):
            return None
        if snapshot_choice == "nearest":
            h = self._nearest_snapshot(t_q)
        elif snapshot_choice == "preceding":
            h = min(t_q // self.params.period, self.last_snapshot)
        else:
            raise ValueError("snapshot_choice must be 'nearest' or 'preceding'")
        t_s = h * self.params.period
        snap = self.snapshots[h]
        if snap.is_present(oid):
            p = snap.find_object(oid)
            if t_s == t_q:
                return p
            if t_s < t_q:
                return self._forward_to(oid, t_s, p, t_q)
            return self._backward_to(oid, t_q, t_s, p)
        if t_s <= t_q:
            anchor = (
                self.logs.first_anchor(h, oid) if h < self.logs.n_portions else None
            )
            if anchor is None:
                return None
            t_a, p_a = anchor
            if t_a > t_q:
                return None
            if t_a == t_q:
                return p_a
            return self._forward_to(oid, t_a, p_a, t_q)
        anchor = self.logs.last_anchor(h - 1, oid) if h >= 1 else None
        if anchor is None:
            return None
        t_d, p_d = anchor
        if t_d < t_q:
            return None
        if t_d == t_q:
            return p_d
        return self._backward_to(oid, t_q, t_d, p_d)

    def _forward_to(self, oid, t_c, p_c, t_q):
        bump = self.counters.bump
        for elem in self.logs.elements(oid, t_c + 1, t_q):
            kind = elem[0]
            if kind == "M":
                bump("object_symbols")
                t_c, p_c = move_jump(self.rules, p_c, t_c, t_q, elem[1])
            elif kind == "AA":
                t_c, p_c = elem[1], (elem[2], elem[3])
            elif kind == "RM":
                t_c, p_c = t_c + elem[1] + 1, (p_c[0] + elem[2], p_c[1] + elem[3])
            elif kind == "RNM":
                t_c = t_c + elem[1] + 1
            # "D": no further information in this portion; keep walking
        return p_c if t_c == t_q else None

    def _backward_to(self, oid, t_q, t_c, p_c):
        bump = self.counters.bump
        for elem in self.logs.elements_backward(oid, t_q, t_c):
            kind = elem[0]
            if kind == "M":
                bump("object_symbols")
                t_c, p_c = move_back(self.rules, p_c, t_q, t_c, elem[1])
            elif kind in ("AA", "D"):
                t_c, p_c = elem[1], (elem[2], elem[3])
            elif kind == "RM":
                t_c, p_c = t_c - elem[1] - 1, (p_c[0] - elem[2], p_c[1] - elem[3])
            else:  # RNM
                t_c = t_c - elem[1] - 1
            if t_c < t_q:
                return None
            if t_c == t_q:
                break
        return p_c if t_c == t_q else None

    # ------------------------------------------------------------------
    # trajectory (time window)
    # ------------------------------------------------------------------

    def trajectory(self, obj, t_begin, t_end):
        """(instant, position) pairs over [t_begin, t_end]; gaps omitted."""
        oid = self._oid(obj)
        t_b = max(t_begin, 0)
        t_e = min(t_end, self.params.t_max)
        if t_b > t_e:
            return []
        d = self.params.period
        h = t_b // d
        anchor = None
        while h <= self.last_snapshot and h * d <= t_e:
            if self.snapshots[h].is_present(oid):
                anchor = (h * d, self.snapshots[h].find_object(oid))
                break
            a = self.logs.first_anchor(h, oid) if h < self.logs.n_portions else None
            if a is not None:
                anchor = a
                break
            h += 1
        if anchor is None:
            return []
        t_c, p_c = anchor
        if t_c > t_e:
            return []
        out = []
        if t_c >= t_b:
            out.append((t_c, p_c))
        for elem in self.logs.elements(oid, t_c + 1, t_e):
            kind = elem[0]
            if kind == "M":
                sym = elem[1]
                if t_c + self.rules.span_of(sym) < t_b:
                    t_c, p_c = move_jump(self.rules, p_c, t_c, t_b - 1, sym)
                else:
                    pairs = move_steps(self.rules, p_c, t_c, t_e, sym)
                    out.extend(pr for pr in pairs if pr[0] >= t_b)
                    t_c, p_c = pairs[-1]
            elif kind == "AA" or kind == "RM" or kind == "RNM":
                if kind == "AA":
                    t_c, p_c = elem[1], (elem[2], elem[3])
                elif kind == "RM":
                    t_c, p_c = t_c + elem[1] + 1, (p_c[0] + elem[2], p_c[1] + elem[3])
                else:
                    t_c = t_c + elem[1] + 1
                if t_c >= t_b:
                    out.append((t_c, p_c))
            if t_c >= t_e:
                break
        return out

    # ------------------------------------------------------------------
    # time slice (region at one instant)
    # ------------------------------------------------------------------

    def time_slice(self, region, t_q, use_mbr=True, use_er=True):
        """Objects inside a region at one instant, as sorted (id, position)."""
        r = clip_region(region, self.params.side)
        if r is None or not self._in_extent(t_q):
            return []
        h = self._nearest_snapshot(t_q)
        t_s = h * self.params.period
        snap = self.snapshots[h]
        if t_s == t_q:
            found = [(self._orig(o), p) for o, p in snap.objects_in_region(r)]
            return sorted(found)
        m_sp = self.params.max_speed
        side = self.params.side
        answers = []
        if t_s < t_q:
            er = expanded_region(r, t_s, t_q, m_sp, side)
            cands = [(o, t_s, p) for o, p in snap.objects_in_region(er)]
            for o in snap.app:
                o = int(o)
                t_a, p_a = self.logs.first_anchor(h, o)
                if t_a <= t_q and contains(
                    expanded_region(r, t_a, t_q, m_sp, side), *p_a
                ):
                    cands.append((o, t_a, p_a))
            for o, t_c, p_c in cands:
                if t_c == t_q:
                    if contains(r, *p_c):
                        answers.append((o, p_c))
                    continue
                pos = self._slice_forward(o, t_c, p_c, t_q, r, use_mbr, use_er)
                if pos is not None:
                    answers.append((o, pos))
        else:
            er = expanded_region(r, t_q, t_s, m_sp, side)
            cands = [(o, t_s, p) for o, p in snap.objects_in_region(er)]
            for o in snap.dis:
                o = int(o)
                t_d, p_d = self.logs.last_anchor(h - 1, o)
                if t_d >= t_q and contains(
                    expanded_region(r, t_q, t_d, m_sp, side), *p_d
                ):
                    cands.append((o, t_d, p_d))
            for o, t_c, p_c in cands:
                if t_c == t_q:
                    if contains(r, *p_c):
                        answers.append((o, p_c))
                    continue
                pos = self._slice_backward(o, t_q, t_c, p_c, r, use_mbr, use_er)
                if pos is not None:
                    answers.append((o, pos))
        return sorted((self._orig(o), p) for o, p in answers)

    def _slice_forward(self, oid, t_c, p_c, t_q, r, use_mbr, use_er):
        m_sp = self.params.max_speed
        side = self.params.side
        bump = self.counters.bump
        for elem in self.logs.elements(oid, t_c + 1, t_q):
            kind = elem[0]
            if kind == "M":
                sym = elem[1]
                bump("slice_symbols")
                if (
                    use_mbr
                    and self.rules.is_nonterminal(sym)
                    and t_c + self.rules.span_of(sym) >= t_q
                ):
                    box = box_shift(self.rules.mbr_of(sym), p_c[0], p_c[1])
                    if not regions_intersect(box, r):
                        return None
                t_c, p_c = move_jump(self.rules, p_c, t_c, t_q, sym)
            elif kind == "AA":
                t_c, p_c = elem[1], (elem[2], elem[3])
            elif kind == "RM":
                t_c, p_c = t_c + elem[1] + 1, (p_c[0] + elem[2], p_c[1] + elem[3])
            elif kind == "RNM":
                t_c = t_c + elem[1] + 1
            else:
                continue
            if t_c == t_q:
                break
            if use_er and not contains(
                expanded_region(r, t_c, t_q, m_sp, side), *p_c
            ):
                return None
        if t_c == t_q and contains(r, *p_c):
            return p_c
        return None

    def _slice_backward(self, oid, t_q, t_c, p_c, r, use_mbr, use_er):
        m_sp = self.params.max_speed
        side = self.params.side
        bump = self.counters.bump
        for elem in self.logs.elements_backward(oid, t_q, t_c):
            kind = elem[0]
            if kind == "M":
                sym = elem[1]
                bump("slice_symbols")
                if (
                    use_mbr
                    and self.rules.is_nonterminal(sym)
                    and t_c - self.rules.span_of(sym) <= t_q
                ):
                    dx, dy = self.rules.disp_of(sym)
                    box = box_shift(self.rules.mbr_of(sym), p_c[0] - dx, p_c[1] - dy)
                    if not regions_intersect(box, r):
                        return None
                t_c, p_c = move_back(self.rules, p_c, t_q, t_c, sym)
            elif kind in ("AA", "D"):
                t_c, p_c = elem[1], (elem[2], elem[3])
            elif kind == "RM":
                t_c, p_c = t_c - elem[1] - 1, (p_c[0] - elem[2], p_c[1] - elem[3])
            else:  # RNM
                t_c = t_c - elem[1] - 1
            if t_c < t_q:
                return None
            if t_c == t_q:
                break
            if use_er and not contains(
                expanded_region(r, t_q, t_c, m_sp, side), *p_c
            ):
                return None
        if t_c == t_q and contains(r, *p_c):
            return p_c
        return None

    # ------------------------------------------------------------------
    # time interval (region over a window)
    # ------------------------------------------------------------------

    def time_interval(self, region, t_begin, t_end, use_mbr=True, use_er=True):
        """Sorted ids of objects inside the region at any window instant."""
        r = clip_region(region, self.params.side)
        t_b = max(t_begin, 0)
        t_e = min(t_end, self.params.t_max)
        if r is None or t_b > t_e:
            return []
        d = self.params.period
        m_sp = self.params.max_speed
        side = self.params.side
        answers = set()
        if t_b % d == 0:
            for o, _p in self.snapshots[t_b // d].objects_in_region(r):
                answers.add(o)
            h = t_b // d
        else:
            h = (t_b - 1) // d
        while h < self.logs.n_portions and h * d < t_e:
            pe = self.logs.portion_end(h)
            t_last = min(t_e, pe)
            snap = self.snapshots[h]
            er = expanded_region(r, h * d, t_last, m_sp, side)
            cands = [
                (o, h * d, p)
                for o, p in snap.objects_in_region(er)
                if o not in answers
            ]
            for o in snap.app:
                o = int(o)
                if o in answers:
                    continue
                t_a, p_a = self.logs.first_anchor(h, o)
                if t_a <= t_last and contains(
                    expanded_region(r, t_a, t_last, m_sp, side), *p_a
                ):
                    cands.append((o, t_a, p_a))
            for o, t_c, p_c in cands:
                if t_b <= t_c <= t_e and contains(r, *p_c):
                    answers.add(o)
                    continue
                if self._interval_scan(
                    o, t_c, p_c, t_b, t_e, t_last, pe, r, use_mbr, use_er
                ):
                    answers.add(o)
            h += 1
        return sorted(self._orig(o) for o in answers)

    def _interval_scan(
        self, oid, t_c, p_c, t_b, t_e, t_last, portion_end, r, use_mbr, use_er
    ):
        m_sp = self.params.max_speed
        side = self.params.side
        rules = self.rules
        bump = self.counters.bump
        cursor = self.logs.elements(oid, t_c + 1, portion_end)
        stack = []
        while t_c < t_last:
            if stack:
                sym = stack.pop()
            else:
                elem = next(cursor, None)
                if elem is None:
                    break
                kind = elem[0]
                if kind == "M":
                    sym = elem[1]
                elif kind == "D":
                    break
                else:
                    bump("interval_symbols")
                    gap = elem[1]
                    if kind == "AA":
                        t_c, p_c = elem[1], (elem[2], elem[3])
                    elif kind == "RM":
                        t_c, p_c = t_c + gap + 1, (p_c[0] + elem[2], p_c[1] + elem[3])
                    else:  # RNM
                        t_c = t_c + gap + 1
                    if t_b <= t_c <= t_e and contains(r, *p_c):
                        return True
                    if (
                        use_er
                        and t_c < t_last
                        and not contains(
                            expanded_region(r, t_c, t_last, m_sp, side), *p_c
                        )
                    ):
                        return False
                    continue
            bump("interval_symbols")
            span = rules.span_of(sym)
            if t_c + span < t_b:  # fully before the window: pure skip
                dx, dy = rules.disp_of(sym)
                t_c, p_c = t_c + span, (p_c[0] + dx, p_c[1] + dy)
                continue
            if use_mbr:
                box = box_shift(rules.mbr_of(sym), p_c[0], p_c[1])
                if not regions_intersect(box, r):
                    # cannot touch r anywhere inside: consume whole, even
                    # past t_last — the portion log bounds the span anyway
                    dx, dy = rules.disp_of(sym)
                    t_c, p_c = t_c + span, (p_c[0] + dx, p_c[1] + dy)
                    continue
                if (
                    rules.is_nonterminal(sym)
                    and region_in_region(box, r)
                    and t_c + span >= t_b
                ):
                    return True
            if rules.is_nonterminal(sym):
                a, b = rules.pair_of(sym)
                stack.append(b)
                stack.append(a)
                continue
            dx, dy = rules.disp_of(sym)
            t_c, p_c = t_c + 1, (p_c[0] + dx, p_c[1] + dy)
            if t_b <= t_c <= t_e and contains(r, *p_c):
                return True
            if use_er and not contains(
                expanded_region(r, t_c, t_last, m_sp, side), *p_c
            ):
                return False
        return False

    # ------------------------------------------------------------------
    # k nearest neighbours
    # ------------------------------------------------------------------

    def knn(self, count, point, t_q):
        """The ``count`` objects nearest ``point`` at t_q, as (id, distance)."""
        if count <= 0 or not self._in_extent(t_q) or not len(self.ids):
            return []
        d = self.params.period
        h = min(t_q // d, self.last_snapshot)
        t_s = h * d
        snap = self.snapshots[h]
        if t_s == t_q:
            picked = []
            for o, _p, dist in snap.candidates_by_distance(point[0], point[1]):
                if len(picked) < count or dist == picked[count - 1][0]:
                    picked.append((dist, o))
                else:
                    break
            picked.sort()
            return [(self._orig(o), dist) for dist, o in picked[:count]]
        m_sp = self.params.max_speed
        portion = self.logs.portions[h]
        slack0 = m_sp * (t_q - t_s)
        upper = []  # size-<=count max-heap (negated) of sound upper bounds
        d_max = math.inf
        cands = []

        def admit_upper(u):
            nonlocal d_max
            heapq.heappush(upper, -u)
            if len(upper) > count:
                heapq.heappop(upper)
            if len(upper) == count:
                d_max = -upper[0]

        for o, p, dist in snap.candidates_by_distance(point[0], point[1]):
            i = portion.find(o)
            if i < 0 or portion.last_covered[i] < t_q:
                continue  # provably gone before t_q
            d_min = dist - slack0
            if len(upper) == count and d_min > d_max:
                break  # everything later is at least this far
            if not portion.has_gaps[i]:
                admit_upper(dist + slack0)
            if d_min <= d_max:
                heapq.heappush(cands, (d_min, o, t_s, p, None))
        for o in snap.app:
            o = int(o)
            t_a, p_a = self.logs.first_anchor(h, o)
            if t_a > t_q:
                continue
            i = portion.find(o)
            if portion.last_covered[i] < t_q:
                continue
            dist = dist_point_point(point, p_a)
            slack = m_sp * (t_q - t_a)
            d_min = dist - slack
            if not portion.has_gaps[i]:
                admit_upper(dist + slack)
            if d_min <= d_max:
                heapq.heappush(cands, (d_min, o, t_a, p_a, None))

        final = []  # max-heap of (-dist, -oid)
        d_fin = math.inf
        bump = self.counters.bump
        while cands:
            d_min, o, t_c, p_c, cur = heapq.heappop(cands)
            if len(final) == count and d_min > d_fin:
                break
            if t_c == t_q:
                dist = dist_point_point(point, p_c)
                if len(final) < count:
                    heapq.heappush(final, (-dist, -o))
                    if len(final) == count:
                        d_fin = -final[0][0]
                elif (dist, o) < (-final[0][0], -final[0][1]):
                    heapq.heapreplace(final, (-dist, -o))
                    d_fin = -final[0][0]
                continue
            if cur is None:
                cur = self.logs.elements(o, t_c + 1, t_q)
            elem = next(cur, None)
            if elem is None:
                continue  # gap reaches past t_q: not active, drop
            kind = elem[0]
            if kind == "M":
                bump("knn_symbols")
                t_c, p_c = move_jump(self.rules, p_c, t_c, t_q, elem[1])
            elif kind == "AA":
                t_c, p_c = elem[1], (elem[2], elem[3])
            elif kind == "RM":
                t_c, p_c = t_c + elem[1] + 1, (p_c[0] + elem[2], p_c[1] + elem[3])
            elif kind == "RNM":
                t_c = t_c + elem[1] + 1
            else:  # D: nothing at t_q
                continue
            d_min = dist_point_point(point, p_c) - m_sp * (t_q - t_c)
            heapq.heappush(cands, (d_min, o, t_c, p_c, cur))
        out = sorted((-nd, -no) for nd, no in final)
        return [(self._orig(o), dist) for dist, o in out]

    # ------------------------------------------------------------------
    # serialization & statistics
    # ------------------------------------------------------------------

    def _params_payload(self):
        w = serial.ByteWriter()
        w.u32(self.params.k)
        w.u64(self.params.period)
        w.u64(self.params.side)
        w.u64(self.params.t_max)
        w.u64(self.params.max_speed)
        w.u64(self.params.raw_symbols)
        w.u64(self.params.n_objects)
        w.u32(len(self.snapshots))
        w.u32(self.logs.n_portions)
        w.u16(self.params.sample_rate)
        serial.write_uint_array(w, self.ids)
        return w.getvalue()

    def _dict_payload(self):
        w = serial.ByteWriter()
        w.u32(self.rules.max_move_code)
        w.u32(self.rules.n_rules)
        serial.write_uint_array(w, self.rules.pairs.reshape(-1))
        serial.write_dac(w, serial.DacSequence.optimal(self.rules.span))
        coords = np.column_stack(
            [
                self.rules.dx,
                self.rules.dy,
                self.rules.mbr[:, 0],
                self.rules.mbr[:, 1],
                self.rules.mbr[:, 2],
                self.rules.mbr[:, 3],
            ]
        ).reshape(-1)
        serial.write_dac(w, serial.DacSequence.optimal(zigzag(coords)))
        return w.getvalue()

    def _streams_payload(self):
        w = serial.ByteWriter()
        serial.write_dac(w, serial.DacSequence.optimal(self.logs.syms))
        return w.getvalue()

    def _portion_payload(self, h):
        p = self.logs.portions[h]
        w = serial.ByteWriter()
        serial.write_uint_array(w, p.ids)
        serial.write_uint_array(w, np.diff(p.sym_off))
        serial.write_uint_array(w, np.diff(p.d_off))
        serial.write_dac(w, serial.DacSequence.fixed(p.d_vals, 8, 2))
        serial.write_uint_array(w, np.diff(p.p_off))
        serial.write_dac(w, serial.DacSequence.fixed(p.p_vals, 8, 2))
        return w.getvalue()

    def _snapshot_payload(self, h):
        s = self.snapshots[h]
        w = serial.ByteWriter()
        serial.write_bitvector(w, s.tree.t)
        serial.write_bitvector(w, s.tree.l)
        serial.write_bitvector(w, s.present)
        serial.write_uint_array(w, s.perm.raw)
        serial.write_bitvector(w, s.q)
        serial.write_uint_array(w, s.app)
        serial.write_uint_array(w, s.dis)
        return w.getvalue()

    def save(self, path):
        blob = self.to_bytes()
        with open(path, "wb") as fh:
            fh.write(blob)

    def to_bytes(self):
        parts = [MAGIC, FORMAT_VERSION.to_bytes(2, "little")]
        parts.append(serial.wrap_section(self._params_payload()))
        parts.append(serial.wrap_section(self._dict_payload()))
        parts.append(serial.wrap_section(self._streams_payload()))
        for h in range(self.logs.n_portions):
            parts.append(serial.wrap_section(self._portion_payload(h)))
        for h in range(len(self.snapshots)):
            parts.append(serial.wrap_section(self._snapshot_payload(h)))
        return b"".join(parts)

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @classmethod
    def from_bytes(cls, blob):
        r = serial.ByteReader(blob)
        if r.raw(4) != MAGIC:
            raise serial.SerializationError("bad magic")
        version = int.from_bytes(r.raw(2), "little")
        if version != FORMAT_VERSION:
            raise serial.SerializationError("unsupported format version %d" % version)
        pr = serial.ByteReader(serial.read_section(r))
        k = pr.u32()
        period = pr.u64()
        side = pr.u64()
        t_max = pr.u64()
        max_speed = pr.u64()
        raw_symbols = pr.u64()
        n_objects = pr.u64()
        n_snapshots = pr.u32()
        n_portions = pr.u32()
        sample_rate = pr.u16()
        ids = serial.read_uint_array(pr)
        params = IndexParams(
            period=period,
            k=k,
            side=side,
            n_objects=n_objects,
            t_max=t_max,
            max_speed=max_speed,
            raw_symbols=raw_symbols,
            sample_rate=sample_rate,
        )

        dr = serial.ByteReader(serial.read_section(r))
        max_move = dr.u32()
        n_rules = dr.u32()
        pairs = serial.read_uint_array(dr).reshape(n_rules, 2)
        span = np.asarray(serial.read_dac(dr).to_list(), dtype=np.int64)
        coords = unzigzag(
            np.asarray(serial.read_dac(dr).to_list(), dtype=np.uint64)
        ).reshape(n_rules, 6)
        rules = RuleDictionary(
            max_move,
            pairs.astype(np.int64),
            span,
            coords[:, 0].copy(),
            coords[:, 1].copy(),
            coords[:, 2:6].copy(),
        )

        sr = serial.ByteReader(serial.read_section(r))
        syms = np.asarray(serial.read_dac(sr).to_list(), dtype=np.int64)

        portions = []
        pos = 0
        for _h in range(n_portions):
            hr = serial.ByteReader(serial.read_section(r))
            p_ids = serial.read_uint_array(hr)
            sym_lens = serial.read_uint_array(hr)
            d_lens = serial.read_uint_array(hr)
            d_vals = np.asarray(serial.read_dac(hr).to_list(), dtype=np.int64)
            p_lens = serial.read_uint_array(hr)
            p_vals = np.asarray(serial.read_dac(hr).to_list(), dtype=np.int64)
            sym_off = np.concatenate([[pos], pos + np.cumsum(sym_lens)])
            pos = int(sym_off[-1])
            d_off = np.concatenate([[0], np.cumsum(d_lens)])
            p_off = np.concatenate([[0], np.cumsum(p_lens)])
            portions.append(Portion(p_ids, sym_off, d_vals, d_off, p_vals, p_off))
        logs = LogStore(rules, period, t_max, syms, portions)

        snapshots = []
        for h in range(n_snapshots):
            sr2 = serial.ByteReader(serial.read_section(r))
            from .bits import Permutation
            from .k2tree import K2Tree

            t_bits = serial.read_bitvector(sr2)
            l_bits = serial.read_bitvector(sr2)
            present = serial.read_bitvector(sr2)
            perm_vals = serial.read_uint_array(sr2)
            q = serial.read_bitvector(sr2)
            app = serial.read_uint_array(sr2)
            dis = serial.read_uint_array(sr2)
            tree = K2Tree(k, side, t_bits, l_bits)
            perm = Permutation(perm_vals, sample_rate)
            snapshots.append(Snapshot(h * period, tree, present, perm, q, app, dis))
        if not r.at_end():
            raise serial.SerializationError("trailing data after final section")
        return cls(params, ids, snapshots, logs, rules)

    def stats(self):
        """Size report (bytes per component, ratio against raw symbols)."""
        snap_bytes = sum(len(self._snapshot_payload(h)) for h in range(len(self.snapshots)))
        portion_bytes = sum(
            len(self._portion_payload(h)) for h in range(self.logs.n_portions)
        )
        stream_bytes = len(self._streams_payload())
        dict_bytes = len(self._dict_payload())
        total = len(self.to_bytes())
        raw = self.params.raw_symbols
        return {
            "objects": int(self.params.n_objects),
            "t_max": int(self.params.t_max),
            "period": int(self.params.period),
            "k": int(self.params.k),
            "grid_side": int(self.params.side),
            "max_speed": int(self.params.max_speed),
            "raw_symbols": int(raw),
            "compressed_symbols": int(len(self.logs.syms)),
            "rules": int(self.rules.n_rules),
            "grammar_depth": int(self.rules.depth()),
            "bytes": {
                "snapshots": snap_bytes,
                "log_streams": stream_bytes,
                "log_events": portion_bytes,
                "dictionary": dict_bytes,
                "total": total,
            },
            "log_ratio_vs_raw": (
                (stream_bytes + portion_bytes + dict_bytes) / raw if raw else 0.0
            ),
        }

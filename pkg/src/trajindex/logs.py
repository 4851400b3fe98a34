"""Per-object movement logs between snapshots, and their traversal.

The timeline is cut into portions: portion h covers the instants
(h*period, min((h+1)*period, t_max)].  A snapshot instant is therefore also
the last instant of the portion before it, so logs can be read forward from
the earlier snapshot or backward from the later one.

Each (portion, object) log is one slice of the jointly compressed symbol
stream plus two side arrays aligned with its event symbols, in order:

* D entry:  gap length for RM/RNM, absolute instant for AA/D;
* P entry:  spiral code for RM (one value), absolute x, y for AA/D (two
  values), nothing for RNM.

A log looks like ``[AA?] (move | RM | RNM)* [D?]``: AA opens a log whose
object was absent at the starting snapshot, D closes a log whose object
stops emitting before the portion ends (its payload repeats the last known
instant/position so backward traversals can anchor on it).

Traversal primitives:

* ``move_jump`` — apply a symbol forward, whole in O(1) via its span and
  displacement, or descend into the rule until a time limit is hit;
* ``move_back`` — the exact mirror, undoing movements;
* ``move_steps`` — expand to terminals, one (instant, position) per step;
* ``LogStore.elements`` / ``elements_backward`` — cursors over the log
  elements whose covered instants intersect a window, crossing portion
  boundaries transparently.
"""

import numpy as np

from . import spiral
from .grammar import EV_AA, EV_D, EV_RM, EV_RNM, MOVE_BASE


class Portion:
    """Logs of one portion: sorted object ids plus three offset tables."""

    def __init__(self, ids, sym_off, d_vals, d_off, p_vals, p_off):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.sym_off = np.asarray(sym_off, dtype=np.int64)
        self.d_vals = np.asarray(d_vals, dtype=np.int64)
        self.d_off = np.asarray(d_off, dtype=np.int64)
        self.p_vals = np.asarray(p_vals, dtype=np.int64)
        self.p_off = np.asarray(p_off, dtype=np.int64)
        # filled by LogStore._derive
        self.starts_aa = None
        self.ends_d = None
        self.has_gaps = None
        self.last_covered = None

    def find(self, oid):
        i = int(np.searchsorted(self.ids, oid))
        if i < len(self.ids) and self.ids[i] == oid:
            return i
        return -1


class LogStore:
    def __init__(self, dictionary, period, t_max, syms, portions):
        self.dict = dictionary
        self.period = period
        self.t_max = t_max
        self.syms = np.asarray(syms, dtype=np.int64)
        self.portions = portions
        for h, portion in enumerate(portions):
            self._derive(h, portion)

    def _derive(self, h, portion):
        if len(portion.ids) == 0:
            z = np.zeros(0, dtype=np.int64)
            portion.starts_aa = z.astype(bool)
            portion.ends_d = z.astype(bool)
            portion.has_gaps = z.astype(bool)
            portion.last_covered = z
            return
        s0 = portion.sym_off[:-1]
        s1 = portion.sym_off[1:]
        portion.starts_aa = self.syms[s0] == EV_AA
        portion.ends_d = self.syms[s1 - 1] == EV_D
        gap_mask = (self.syms == EV_RM) | (self.syms == EV_RNM)
        cum = np.concatenate([[0], np.cumsum(gap_mask)])
        portion.has_gaps = (cum[s1] - cum[s0]) > 0
        end = self.portion_end(h)
        last = np.full(len(portion.ids), end, dtype=np.int64)
        closed = np.flatnonzero(portion.ends_d)
        if len(closed):
            last[closed] = portion.d_vals[portion.d_off[closed + 1] - 1]
        portion.last_covered = last

    @property
    def n_portions(self):
        return len(self.portions)

    def portion_end(self, h):
        return min((h + 1) * self.period, self.t_max)

    def log_index(self, h, oid):
        if 0 <= h < len(self.portions):
            return self.portions[h].find(oid)
        return -1

    def first_anchor(self, h, oid):
        """(instant, position) of an appearance-opened log; None otherwise."""
        p = self.portions[h]
        i = p.find(oid)
        if i < 0 or not p.starts_aa[i]:
            return None
        t = int(p.d_vals[p.d_off[i]])
        x = int(p.p_vals[p.p_off[i]])
        y = int(p.p_vals[p.p_off[i] + 1])
        return t, (x, y)

    def last_anchor(self, h, oid):
        """(instant, position) of a D-closed log; None otherwise."""
        p = self.portions[h]
        i = p.find(oid)
        if i < 0 or not p.ends_d[i]:
            return None
        t = int(p.d_vals[p.d_off[i + 1] - 1])
        x = int(p.p_vals[p.p_off[i + 1] - 2])
        y = int(p.p_vals[p.p_off[i + 1] - 1])
        return t, (x, y)

    # -- cursors -----------------------------------------------------------

    def _walk(self, h, i):
        """Elements of one log with their covered instant range (lo, hi)."""
        p = self.portions[h]
        s0, s1 = int(p.sym_off[i]), int(p.sym_off[i + 1])
        di, pi = int(p.d_off[i]), int(p.p_off[i])
        t = h * self.period
        span_of = self.dict.span_of
        for sym in self.syms[s0:s1]:
            sym = int(sym)
            if sym == EV_AA:
                ta = int(p.d_vals[di]); di += 1
                x = int(p.p_vals[pi]); y = int(p.p_vals[pi + 1]); pi += 2
                yield ("AA", ta, x, y), ta, ta
                t = ta
            elif sym == EV_D:
                td = int(p.d_vals[di]); di += 1
                x = int(p.p_vals[pi]); y = int(p.p_vals[pi + 1]); pi += 2
                yield ("D", td, x, y), td, td
            elif sym == EV_RM:
                gap = int(p.d_vals[di]); di += 1
                code = int(p.p_vals[pi]); pi += 1
                dx, dy = spiral.decode(code)
                tr = t + gap + 1
                yield ("RM", gap, dx, dy, t), tr, tr
                t = tr
            elif sym == EV_RNM:
                gap = int(p.d_vals[di]); di += 1
                tr = t + gap + 1
                yield ("RNM", gap, t), tr, tr
                t = tr
            else:
                sp = span_of(sym)
                yield ("M", sym, t), t + 1, t + sp
                t += sp

    def elements(self, oid, t_begin, t_end):
        """Forward cursor over elements covering instants in [t_begin, t_end].

        Boundary rules are included whole (the consumer clips with
        ``move_jump`` limits); the cursor stops once the window end is
        reached, so a closing D whose instant equals t_end is not emitted.
        """
        if t_begin > t_end:
            return
        h0 = max((t_begin - 1) // self.period, 0)
        h1 = min((t_end - 1) // self.period, len(self.portions) - 1)
        for h in range(h0, h1 + 1):
            i = self.portions[h].find(oid)
            if i < 0:
                continue
            for elem, lo, hi in self._walk(h, i):
                if hi >= t_begin and lo <= t_end:
                    yield elem
                if hi >= t_end:
                    return

    def elements_backward(self, oid, t_begin, t_end):
        """Same elements as ``elements``, yielded in reverse order."""
        if t_begin > t_end:
            return
        h0 = max((t_begin - 1) // self.period, 0)
        h1 = min((t_end - 1) // self.period, len(self.portions) - 1)
        for h in range(h1, h0 - 1, -1):
            i = self.portions[h].find(oid)
            if i < 0:
                continue
            buf = [
                elem
                for elem, lo, hi in self._walk(h, i)
                if hi >= t_begin and lo <= t_end
            ]
            for elem in reversed(buf):
                yield elem


def move_jump(dictionary, p, t_c, t_e, sym):
    """Apply ``sym`` forward from (t_c, p), stopping exactly at t_e.

    Whole symbols cost O(1); a symbol straddling the limit is descended
    with an explicit stack (left child first).
    """
    x, y = p
    if t_c + dictionary.span_of(sym) <= t_e:
        dx, dy = dictionary.disp_of(sym)
        return t_c + dictionary.span_of(sym), (x + dx, y + dy)
    stack = [sym]
    while stack and t_c < t_e:
        s = stack.pop()
        sp = dictionary.span_of(s)
        if t_c + sp <= t_e:
            dx, dy = dictionary.disp_of(s)
            x += dx
            y += dy
            t_c += sp
        else:
            a, b = dictionary.pair_of(s)  # a terminal always fits: span 1
            stack.append(b)
            stack.append(a)
    return t_c, (x, y)


def move_back(dictionary, p, t_floor, t_c, sym):
    """Undo ``sym`` backward from (t_c, p), stopping exactly at t_floor."""
    x, y = p
    if t_c - dictionary.span_of(sym) >= t_floor:
        dx, dy = dictionary.disp_of(sym)
        return t_c - dictionary.span_of(sym), (x - dx, y - dy)
    stack = [sym]
    while stack and t_c > t_floor:
        s = stack.pop()
        sp = dictionary.span_of(s)
        if t_c - sp >= t_floor:
            dx, dy = dictionary.disp_of(s)
            x -= dx
            y -= dy
            t_c -= sp
        else:
            a, b = dictionary.pair_of(s)
            stack.append(a)  # undo the right child first
            stack.append(b)
    return t_c, (x, y)


def move_steps(dictionary, p, t_c, t_e, sym):
    """Expand ``sym`` into per-instant pairs (t, position), truncated at t_e."""
    out = []
    x, y = p
    stack = [sym]
    nt_base = dictionary.nt_base
    while stack and t_c < t_e:
        s = stack.pop()
        if s < nt_base:
            dx, dy = dictionary.disp_of(s)
            x += dx
            y += dy
            t_c += 1
            out.append((t_c, (x, y)))
        else:
            a, b = dictionary.pair_of(s)
            stack.append(b)
            stack.append(a)
    return out

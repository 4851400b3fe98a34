"""Brute-force reference answering the five query types by linear scan.

Holds every object's positions in plain dictionaries and answers queries
straight from the definitions, with the same canonical orderings as the
index (ids ascending; nearest-neighbour by (distance, id)).  It knows
nothing about periods, snapshots or speed bounds — it defines the
semantics the index must reproduce.
"""

import math


def _contains(region, x, y):
    x1, y1, x2, y2 = region
    return x1 <= x <= x2 and y1 <= y <= y2


class Oracle:
    def __init__(self, series):
        """``series`` as produced by ``ingest.normalize``."""
        self.timelines = {}
        self.t_max = 0
        for oid, segments in series.items():
            tl = {}
            for start, cells in segments:
                for i, pos in enumerate(cells):
                    tl[start + i] = (int(pos[0]), int(pos[1]))
            self.timelines[oid] = tl
            if tl:
                self.t_max = max(self.t_max, max(tl))

    def position_of(self, obj, t):
        if obj not in self.timelines:
            raise KeyError("unknown object id: %r" % (obj,))
        return self.timelines[obj].get(t)

    def trajectory(self, obj, t_begin, t_end):
        if obj not in self.timelines:
            raise KeyError("unknown object id: %r" % (obj,))
        tl = self.timelines[obj]
        return [(t, tl[t]) for t in range(max(t_begin, 0), t_end + 1) if t in tl]

    def time_slice(self, region, t):
        out = []
        for oid in sorted(self.timelines):
            pos = self.timelines[oid].get(t)
            if pos is not None and _contains(region, *pos):
                out.append((oid, pos))
        return out

    def time_interval(self, region, t_begin, t_end):
        out = []
        for oid in sorted(self.timelines):
            tl = self.timelines[oid]
            for t in range(max(t_begin, 0), t_end + 1):
                pos = tl.get(t)
                if pos is not None and _contains(region, *pos):
                    out.append(oid)
                    break
        return out

    def knn(self, count, point, t):
        if count <= 0:
            return []
        px, py = point
        scored = []
        for oid in sorted(self.timelines):
            pos = self.timelines[oid].get(t)
            if pos is not None:
                scored.append((math.hypot(pos[0] - px, pos[1] - py), oid))
        scored.sort()
        return [(oid, dist) for dist, oid in scored[:count]]

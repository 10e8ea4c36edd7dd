"""Local deformation moves on diagrams with double-line tracking.

Move catalogue (each r-move has a forward and a backward direction):

* ``r1``  bubble: birth or death of a bare circle pair.
* ``r2``  saddle: cut two same-sign edges bounding a region and cross-join
  them, mirrored on the partner curves.
* ``r3``  branch pair in an empty spot: birth or death of a pinch lens.
* ``r4``  branch pair on a line: cut a double line across a region,
  creating two facing cusps, or merge two facing cusp ends.
* ``r5``  triple pair: three mutual pokes create two triple groups from a
  prism configuration, or remove such a pair.
* ``r6``  tetrahedral slide: simultaneous triangle flips in the four
  sheets of a quadruple configuration.
* ``r7``  line over branch point: an edge sweeps across a cusp, creating
  one triple group in which the swept line meets itself.
* ``switch``  exchange the over and under marks of one pair.
* ``virt``  reverse the orientations of both curves of one pair.

Sites are enumerated deterministically; applying a move returns the new
diagram, the correspondence of double lines and the inverse site.
"""

from dataclasses import dataclass, field

from .diagram import (BASEPOINT, CROSSING, CUSP, Curve, Diagram, Triple,
                      pinch_lines, validate)
from .errors import DomainError, ValidationError

FORWARD_KINDS = ("r1f", "r2f", "r3f", "r4f", "r5f", "r6f", "r7f")
BACKWARD_KINDS = ("r1b", "r2b", "r3b", "r4b", "r5b", "r6b", "r7b")
QUOTIENT_KINDS = ("switch", "virt")
ALL_KINDS = FORWARD_KINDS + BACKWARD_KINDS + QUOTIENT_KINDS

_INVERSE = {"switch": "switch", "virt": "virt"}
for _f, _b in zip(FORWARD_KINDS, BACKWARD_KINDS):
    _INVERSE[_f] = _b
    _INVERSE[_b] = _f


class MoveKind:
    """Namespace of move kind tokens."""

    R1F, R2F, R3F, R4F, R5F, R6F, R7F = FORWARD_KINDS
    R1B, R2B, R3B, R4B, R5B, R6B, R7B = BACKWARD_KINDS
    SWITCH, VIRT = QUOTIENT_KINDS

    @staticmethod
    def inverse(kind):
        return _INVERSE[kind]

    @staticmethod
    def expand(groups):
        """Expand tokens like 'r1' into both directions."""
        out = []
        for g in groups:
            if g in ALL_KINDS:
                out.append(g)
            elif g + "f" in ALL_KINDS:
                out.extend((g + "f", g + "b"))
            else:
                raise DomainError(f"unknown move kind {g!r}")
        return tuple(out)


@dataclass(frozen=True)
class MoveSite:
    kind: str
    params: tuple

    def key(self):
        return (self.kind, self.params)


@dataclass(frozen=True)
class MoveApplication:
    site: MoveSite
    diagram: Diagram
    trace: tuple            # pairs (old line index, new line index)
    created: tuple          # new line indices without an ancestor
    removed: tuple          # old line indices without a descendant
    inverse: MoveSite


# -- the surgery builder -------------------------------------------------------


class _Builder:
    def __init__(self, d):
        self.base = d
        self.sphere_components = list(d.sphere_components)
        self.vertex_kinds = list(d.vertex_kinds)
        self.vertex_spheres = list(d.vertex_spheres)
        self.vertex_darts = [list(t) for t in d.vertex_darts]
        if d.vertex_names and len(d.vertex_names) == len(d.vertex_kinds):
            self.vertex_names = list(d.vertex_names)
        else:
            self.vertex_names = [f"v{i}" for i in range(len(d.vertex_kinds))]
        self.alpha = {i: a for i, a in enumerate(d.alpha)}
        self.curves = [
            {"name": cu.name, "sign": cu.sign, "pair": d.curves[cu.pair].name,
             "closed": cu.closed, "darts": list(cu.darts), "sphere": cu.sphere}
            for cu in d.curves
        ]
        self.triples = [{"name": tr.name, "crossings": list(tr.crossings)}
                        for tr in d.triples]
        self.dead_darts = set()
        self.dead_verts = set()
        self.next_dart = d.ndarts
        self.fresh_groups = []      # list of ([darts], sphere)
        self.fresh_joins = {}       # dart -> old region index
        self.forced_merges = []     # (old region, old region)
        # per line (frozenset of curve names): ("offset", k) / ("none",)
        # / ("hint", curve_name, dart, curve_name, dart) with darts being
        # the in- or out-darts of one matched passage
        self.glue_plan = {}
        self._name_counter = self._max_name_suffix() + 1

    def _max_name_suffix(self):
        best = 0
        for cu in self.curves:
            stem = cu["name"].rstrip("+-")
            if stem.startswith("k") and stem[1:].isdigit():
                best = max(best, int(stem[1:]))
        for name in self.vertex_names:
            if name[:1] in "vcbx" and name[1:].isdigit():
                best = max(best, int(name[1:]))
        return best

    def fresh_name(self, prefix):
        n = self._name_counter
        self._name_counter += 1
        return f"{prefix}{n}"

    def new_dart(self):
        d = self.next_dart
        self.next_dart += 1
        return d

    def new_vertex(self, kind, sphere, ndarts, name=None):
        v = len(self.vertex_kinds)
        darts = [self.new_dart() for _ in range(ndarts)]
        self.vertex_kinds.append(kind)
        self.vertex_spheres.append(sphere)
        self.vertex_darts.append(darts)
        prefix = {CROSSING: "x", CUSP: "c", BASEPOINT: "b"}[kind]
        self.vertex_names.append(name or self.fresh_name(prefix))
        return v, darts

    def kill_vertex(self, v):
        self.dead_verts.add(v)
        for dd in self.vertex_darts[v]:
            self.dead_darts.add(dd)
            self.alpha.pop(dd, None)
        self.vertex_darts[v] = []

    def pair(self, a, b):
        self.alpha[a] = b
        self.alpha[b] = a

    def curve_index(self, name):
        for i, cu in enumerate(self.curves):
            if cu["name"] == name:
                return i
        raise DomainError(f"no curve named {name!r}")

    def line_key_names(self, c):
        return frozenset({c["name"], c["pair"]})

    def freeze(self, check=True):
        base = self.base
        live = [dd for dd in range(self.next_dart) if dd not in self.dead_darts]
        newid = {old: i for i, old in enumerate(live)}
        oldid = {i: old for old, i in newid.items()}
        vlive = [v for v in range(len(self.vertex_kinds)) if v not in self.dead_verts]
        vmap = {old: i for i, old in enumerate(vlive)}
        curves = tuple(
            Curve(cu["name"], cu["sign"],
                  self.curve_index(cu["pair"]), cu["closed"],
                  tuple(newid[dd] for dd in cu["darts"]), cu["sphere"])
            for cu in self.curves
        )
        alpha = [None] * len(live)
        for old in live:
            alpha[newid[old]] = newid[self.alpha[old]]
        d = Diagram(
            nspheres=base.nspheres,
            sphere_components=tuple(self.sphere_components),
            vertex_kinds=tuple(self.vertex_kinds[v] for v in vlive),
            vertex_spheres=tuple(self.vertex_spheres[v] for v in vlive),
            vertex_darts=tuple(tuple(newid[dd] for dd in self.vertex_darts[v])
                               for v in vlive),
            alpha=tuple(alpha),
            curves=curves,
            glue_offsets=(),
            triples=tuple(Triple(t["name"], tuple(sorted(vmap[v] for v in t["crossings"])))
                          for t in self.triples),
            regions=(),
            region_spheres=(),
            vertex_names=tuple(self.vertex_names[v] for v in vlive),
        )
        object.__setattr__(d, "glue_offsets", self._glue_offsets(d))
        regions, region_spheres = self._regions(d, newid, oldid)
        object.__setattr__(d, "regions", tuple(regions))
        object.__setattr__(d, "region_spheres", tuple(region_spheres))
        # drop caches that were computed before regions existed
        for key in ("region_of_cycle",):
            d.__dict__.pop(key, None)
        if check:
            rep = validate(d)
            if not rep.ok:
                raise ValidationError(rep.failures)
        return d

    # glue ----------------------------------------------------------------

    def set_glue(self, names, plan):
        self.glue_plan[frozenset(names)] = plan

    def _glue_offsets(self, d):
        base = self.base
        old_by_names = {}
        for li, (a, b) in enumerate(base.lines):
            key = frozenset({base.curves[a].name, base.curves[b].name})
            old_by_names[key] = base.glue_offset_of_line[li]
        out = []
        for a, b in d.lines:
            ca, cb = d.curves[a], d.curves[b]
            key = frozenset({ca.name, cb.name})
            plan = self.glue_plan.get(key)
            if plan is None:
                if key not in old_by_names:
                    raise DomainError(f"no glue plan for new line {sorted(key)}")
                out.append((a, b, old_by_names[key]))
                continue
            if plan[0] == "offset":
                out.append((a, b, plan[1]))
            elif plan[0] == "none":
                out.append((a, b, None))
            elif plan[0] == "hint":
                out.append((a, b, self._offset_from_hint(d, a, b, plan)))
            else:
                raise AssertionError(plan)
        return tuple(out)

    def _offset_from_hint(self, d, a, b, plan):
        _, name_p, dart_p, name_q, dart_q = plan
        # darts are builder ids; translate through the freeze renumbering
        live = [dd for dd in range(self.next_dart) if dd not in self.dead_darts]
        newid = {old: i for i, old in enumerate(live)}
        dart_p = newid[dart_p]
        dart_q = newid[dart_q]

        def locate(name, dart):
            c = next(i for i, cu in enumerate(d.curves) if cu.name == name)
            for pos, stop in enumerate(d.stops[c]):
                if dart in (stop.in_dart, stop.out_dart):
                    return c, pos
            raise AssertionError(f"hint dart not found on curve {name}")

        cp, pos_p = locate(name_p, dart_p)
        cq, pos_q = locate(name_q, dart_q)
        m = len(d.stops[cp])
        li = d.line_of_curve[cp]
        if d.plus_curve(li) == cp:
            return (pos_q - pos_p) % m
        return (pos_p - pos_q) % m

    # regions ---------------------------------------------------------------

    def _regions(self, d, newid, oldid):
        base = self.base
        old_cycle_region = {}
        old_sets = {}
        for rep, orbit in base.cycles.items():
            old_cycle_region[rep] = base.region_of_cycle[rep]
            old_sets[frozenset(orbit)] = rep

        group_of_dart = {}
        for gi, (darts, sphere) in enumerate(self.fresh_groups):
            for dd in darts:
                group_of_dart[dd] = gi

        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        affected = []
        cycle_info = {}
        for rep, orbit in d.cycles.items():
            builder_darts = frozenset(oldid[dd] for dd in orbit)
            hit = old_sets.get(builder_darts)
            if hit is not None:
                cycle_info[rep] = ("old", old_cycle_region[hit])
                continue
            inherited = set()
            joins = set()
            groups = set()
            for bd in builder_darts:
                if bd < base.ndarts and bd not in self.dead_darts:
                    inherited.add(old_cycle_region[base.cycle_of[bd]])
                if bd in self.fresh_joins:
                    joins.add(self.fresh_joins[bd])
                if bd in group_of_dart:
                    groups.add(group_of_dart[bd])
            cycle_info[rep] = ("new", inherited, joins, groups, builder_darts)
            affected.append(rep)

        for rep in affected:
            _, inherited, joins, groups, _ = cycle_info[rep]
            for g in groups:
                union(("new", rep), ("grp", g))
            for r in joins:
                union(("new", rep), ("old", r))
            if len(inherited) >= 2:
                for r in inherited:
                    union(("new", rep), ("old", r))
        for r1, r2 in self.forced_merges:
            union(("old", r1), ("old", r2))

        claims = {}
        for rep in affected:
            _, inherited, joins, groups, _ = cycle_info[rep]
            if len(inherited) == 1 and not joins and not groups:
                claims.setdefault(next(iter(inherited)), []).append(rep)
        for r, reps in claims.items():
            if len(reps) == 1:
                union(("new", reps[0]), ("old", r))
                continue
            # region split: islands follow the piece holding the anchor dart
            anchor = None
            for old_rep in sorted(base.regions[r]):
                for bd in sorted(base.cycles[old_rep]):
                    if bd not in self.dead_darts:
                        anchor = bd
                        break
                if anchor is not None:
                    break
            chosen = None
            if anchor is not None:
                for rep in reps:
                    if anchor in cycle_info[rep][4]:
                        chosen = rep
                        break
            if chosen is None:
                chosen = min(reps)
            union(("new", chosen), ("old", r))

        classes = {}
        for rep in d.cycles:
            info = cycle_info[rep]
            if info[0] == "old":
                key = find(("old", info[1]))
            else:
                key = find(("new", rep))
            classes.setdefault(key, set()).add(rep)

        regions = []
        region_spheres = []
        used_spheres = set()
        for key in sorted(classes, key=lambda k: min(classes[k])):
            reps = classes[key]
            sphere = d.vertex_spheres[d.dart_vertex[min(reps)]]
            regions.append(frozenset(reps))
            region_spheres.append(sphere)
            used_spheres.add(sphere)
        dartless = set(range(d.nspheres)) - {
            d.vertex_spheres[v] for v in range(len(d.vertex_kinds))
        }
        for s in sorted(dartless):
            regions.append(frozenset())
            region_spheres.append(s)
        return regions, region_spheres


# -- shared helpers ---------------------------------------------------------------


def _interval_first_edge(d, c, i):
    return d.intervals[c][i][0]


def _line_trace_by_darts(old, new):
    """Correspondence pairs from shared traversal darts of curve pieces."""
    owner_new = {}
    for c, cu in enumerate(new.curves):
        for dd in cu.darts:
            owner_new[cu.name] = c
            break
    pairs = set()
    dart_to_newline = {}
    for c, cu in enumerate(new.curves):
        li = new.line_of_curve[c]
        for dd in cu.darts:
            dart_to_newline[dd] = li
    # builder keeps dart ids except for the freeze renumbering, so callers
    # pass an explicit map instead; this helper is for identity-dart moves
    for c, cu in enumerate(old.curves):
        li = old.line_of_curve[c]
        for dd in cu.darts:
            if dd in dart_to_newline:
                pairs.add((li, dart_to_newline[dd]))
    return tuple(sorted(pairs))


def _identity_trace(old, new):
    """Trace matching lines by their curve-name pairs."""
    names_old = {frozenset({old.curves[a].name, old.curves[b].name}): li
                 for li, (a, b) in enumerate(old.lines)}
    pairs = []
    for lj, (a, b) in enumerate(new.lines):
        key = frozenset({new.curves[a].name, new.curves[b].name})
        if key in names_old:
            pairs.append((names_old[key], lj))
    return tuple(sorted(pairs))


def _finish(site, old, new, trace, inverse):
    traced_new = {t[1] for t in trace}
    traced_old = {t[0] for t in trace}
    created = tuple(lj for lj in range(len(new.lines)) if lj not in traced_new)
    removed = tuple(li for li in range(len(old.lines)) if li not in traced_old)
    return MoveApplication(site, new, trace, created, removed, inverse)


def _trace_by_darts(builder, old, new):
    """Line correspondence through surviving edge arcs."""
    newid = builder.last_newid
    newline_of_dart = {}
    for c, cu in enumerate(new.curves):
        li = new.line_of_curve[c]
        for dd in cu.darts:
            newline_of_dart[dd] = li
            newline_of_dart[new.alpha[dd]] = li
    pairs = set()
    for c, cu in enumerate(old.curves):
        li = old.line_of_curve[c]
        for dd in cu.darts:
            for side in (dd, old.alpha[dd]):
                nd = newid.get(side)
                if nd is not None:
                    pairs.add((li, newline_of_dart[nd]))
    return tuple(sorted(pairs))


def _freeze(builder, check=True):
    live = [dd for dd in range(builder.next_dart) if dd not in builder.dead_darts]
    builder.last_newid = {old: i for i, old in enumerate(live)}
    return builder.freeze(check=check)


def _new_region_index(new, old, builder, old_region_idx):
    """Locate where an old region ended up in the new diagram."""
    newid = builder.last_newid
    for rep in sorted(old.regions[old_region_idx]):
        for bd in sorted(old.cycles[rep]):
            nd = newid.get(bd)
            if nd is not None:
                return new.region_of_dart(nd)
    sphere = old.region_spheres[old_region_idx]
    for r in range(len(new.regions)):
        if new.region_spheres[r] == sphere and not new.regions[r]:
            return r
    for r in range(len(new.regions)):
        if new.region_spheres[r] == sphere:
            return r
    raise AssertionError("old region vanished without a trace")


# -- switch and virtualization ---------------------------------------------------


def _apply_switch(d, site):
    (line_idx,) = site.params
    a, b = d.lines[line_idx]
    bl = _Builder(d)
    ca, cb = bl.curves[a], bl.curves[b]
    ca["sign"], cb["sign"] = cb["sign"], ca["sign"]
    ca["name"], cb["name"] = cb["name"], ca["name"]
    ca["pair"], cb["pair"] = cb["pair"], ca["pair"]
    names = frozenset({ca["name"], cb["name"]})
    off = d.glue_offset_of_line[line_idx]
    m = len(d.stops[a])
    if d.curves[a].closed:
        bl.set_glue(names, ("offset", (-off) % m if m else 0))
    else:
        bl.set_glue(names, ("none",))
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    return _finish(site, d, new, trace, MoveSite("switch", site.params))


def _apply_virt(d, site):
    (line_idx,) = site.params
    a, b = d.lines[line_idx]
    bl = _Builder(d)
    for c in (a, b):
        cu = bl.curves[c]
        cu["darts"] = [d.alpha[t] for t in reversed(cu["darts"])]
    names = frozenset({d.curves[a].name, d.curves[b].name})
    if not d.curves[a].closed:
        bl.set_glue(names, ("none",))
    elif not d.stops[a]:
        bl.set_glue(names, ("offset", 0))
    else:
        p = d.plus_curve(line_idx)
        mi = d.minus_curve(line_idx)
        q = d.glue_image(p, 0)
        # surviving passage darts play swapped entry/exit roles after reversal
        hint_p = d.stops[p][0].out_dart
        if hint_p is None:
            hint_p = d.stops[p][0].in_dart
        hint_m = d.stops[mi][q].out_dart
        if hint_m is None:
            hint_m = d.stops[mi][q].in_dart
        bl.set_glue(names, ("hint", d.curves[p].name, hint_p,
                            d.curves[mi].name, hint_m))
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    return _finish(site, d, new, trace, MoveSite("virt", site.params))


# -- r1: bubble birth and death ----------------------------------------------------


def _apply_r1f(d, site):
    sphere, rp, rm, bar_p, bar_m = site.params
    if d.region_spheres[rp] != sphere or d.region_spheres[rm] != sphere:
        raise DomainError("bubble regions must lie on the given sphere")
    bl = _Builder(d)
    stem = bl.fresh_name("k")
    specs = ((rp, 1, bar_p, stem + "+", stem + "-"),
             (rm, -1, bar_m, stem + "-", stem + "+"))
    for region, sign, bar, name, pair in specs:
        v, (x, y) = bl.new_vertex(BASEPOINT, sphere, 2)
        bl.pair(x, y)
        # the bare disk bounded by the circle is the cycle of the slot-1 dart
        if sign > 0:
            t = x if bar else y
        else:
            t = y if bar else x
        bl.curves.append({"name": name, "sign": sign, "pair": pair,
                          "closed": True, "darts": [t], "sphere": sphere})
        bl.fresh_groups.append(([y], sphere))
        bl.fresh_joins[x] = region
    bl.set_glue(frozenset({stem + "+", stem + "-"}), ("offset", 0))
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    new_line = next(lj for lj, (u, v) in enumerate(new.lines)
                    if new.curves[u].name in (stem + "+", stem + "-"))
    inverse = MoveSite("r1b", (new_line,))
    return _finish(site, d, new, trace, inverse)


def _r1b_caps(d, line_idx):
    """Cap data for a removable bare circle pair, or None."""
    a, b = d.lines[line_idx]
    out = []
    for c in (a, b):
        cu = d.curves[c]
        if not cu.closed or d.stops[c]:
            return None
        t = cu.darts[0]
        sides = []
        for cap_side, dart in ((0, t), (1, d.alpha[t])):
            r = d.region_of_dart(dart)
            reps = d.regions[r]
            if len(reps) == 1 and next(iter(reps)) == d.cycle_of[dart]:
                sides.append((cap_side, r, d.region_of_dart(
                    d.alpha[dart] if cap_side == 0 else
                    [dd for dd in cu.darts][0])))
        if not sides:
            return None
        cap_side, cap_region, _ = sides[0]
        t0 = cu.darts[0]
        other = d.region_of_dart(d.alpha[t0]) if cap_side == 0 else d.region_of_dart(t0)
        out.append((c, cap_side, cap_region, other))
    if out[0][2] == out[1][2]:
        return None
    return out


def _apply_r1b(d, site):
    (line_idx,) = site.params
    caps = _r1b_caps(d, line_idx)
    if caps is None:
        raise DomainError("line is not a removable bare circle pair")
    a, b = d.lines[line_idx]
    bl = _Builder(d)
    bar_flags = {}
    outer = {}
    for c, cap_side, cap_region, other_region in caps:
        cu = d.curves[c]
        for dd in cu.darts:
            bl.kill_vertex(d.dart_vertex[dd])
        bl.forced_merges.append((cap_region, other_region))
        # unbarred: positive curve keeps its disk on the left, negative on the right
        if cu.sign > 0:
            bar_flags[c] = cap_side != 0
        else:
            bar_flags[c] = cap_side != 1
        outer[c] = other_region
    for c in sorted((a, b), reverse=True):
        del bl.curves[c]
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    p = d.plus_curve(line_idx)
    mi = d.minus_curve(line_idx)
    sphere = d.curves[p].sphere
    inverse = MoveSite("r1f", (sphere,
                               _new_region_index(new, d, bl, outer[p]),
                               _new_region_index(new, d, bl, outer[mi]),
                               bar_flags[p], bar_flags[mi]))
    return _finish(site, d, new, trace, inverse)


# -- r3: pinch birth and death ------------------------------------------------------


def _apply_r3f(d, site):
    sphere, region, chirality = site.params
    if d.region_spheres[region] != sphere:
        raise DomainError("pinch region must lie on the given sphere")
    bl = _Builder(d)
    stem = bl.fresh_name("k")
    c0, (g0, g1) = bl.new_vertex(CUSP, sphere, 2)
    c1, (h0, h1) = bl.new_vertex(CUSP, sphere, 2)
    bl.pair(g0, h0)
    bl.pair(g1, h1)
    bl.curves.append({"name": stem + "+", "sign": 1, "pair": stem + "-",
                      "closed": False, "darts": [g0], "sphere": sphere})
    bl.curves.append({"name": stem + "-", "sign": -1, "pair": stem + "+",
                      "closed": False, "darts": [g1], "sphere": sphere})
    if chirality == 0:
        bl.fresh_groups.append(([g0], sphere))
        bl.fresh_joins[g1] = region
    else:
        bl.fresh_groups.append(([g1], sphere))
        bl.fresh_joins[g0] = region
    bl.set_glue(frozenset({stem + "+", stem + "-"}), ("none",))
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    new_line = next(lj for lj, (u, v) in enumerate(new.lines)
                    if new.curves[u].name in (stem + "+", stem + "-"))
    bigon = None
    for li2, r2 in pinch_lines(new):
        if li2 == new_line:
            bigon = r2
            break
    inverse = MoveSite("r3b", (new_line, bigon))
    return _finish(site, d, new, trace, inverse)


def _apply_r3b(d, site):
    line_idx, bigon_region = site.params
    if (line_idx, bigon_region) not in pinch_lines(d):
        raise DomainError("site is not a pinch lens")
    a, b = d.lines[line_idx]
    bl = _Builder(d)
    p = d.plus_curve(line_idx)
    t = d.curves[p].darts[0]
    sides = {d.region_of_dart(t), d.region_of_dart(d.alpha[t])}
    other = next(iter(sides - {bigon_region})) if sides != {bigon_region} else bigon_region
    killed = set()
    for c in (a, b):
        for dd in d.curves[c].darts:
            v = d.dart_vertex[dd]
            if v not in killed:
                bl.kill_vertex(v)
                killed.add(v)
            w = d.dart_vertex[d.alpha[dd]]
            if w not in killed:
                bl.kill_vertex(w)
                killed.add(w)
    bl.forced_merges.append((bigon_region, other))
    chirality = 0 if d.region_of_dart(t) == bigon_region else 1
    for c in sorted((a, b), reverse=True):
        del bl.curves[c]
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    sphere = d.curves[a].sphere
    inverse = MoveSite("r3f", (sphere,
                               _new_region_index(new, d, bl, other),
                               chirality))
    return _finish(site, d, new, trace, inverse)


# -- r4: branch pair on a line -------------------------------------------------------


def _r4f_region_ok(d, line_idx, interval):
    p = d.plus_curve(line_idx)
    mi = d.minus_curve(line_idx)
    if d.curves[p].sphere != d.curves[mi].sphere:
        return False
    j = d.glue_image(p, interval) if d.stops[p] else 0
    tp = _interval_first_edge(d, p, interval)
    tm = _interval_first_edge(d, mi, j)
    if tp == tm or tp == d.alpha[tm]:
        return False
    sides_p = {d.region_of_dart(tp), d.region_of_dart(d.alpha[tp])}
    sides_m = {d.region_of_dart(tm), d.region_of_dart(d.alpha[tm])}
    return bool(sides_p & sides_m)


def _apply_r4f(d, site):
    line_idx, interval = site.params
    if not _r4f_region_ok(d, line_idx, interval):
        raise DomainError("cut interval pair does not share a region")
    p = d.plus_curve(line_idx)
    mi = d.minus_curve(line_idx)
    j = d.glue_image(p, interval) if d.stops[p] else 0
    tp = _interval_first_edge(d, p, interval)
    tm = _interval_first_edge(d, mi, j)

    bl = _Builder(d)
    sphere = d.curves[p].sphere
    cin, (gi1, gi2) = bl.new_vertex(CUSP, sphere, 2)
    cout, (go1, go2) = bl.new_vertex(CUSP, sphere, 2)
    rp = d.alpha[tp]
    rm = d.alpha[tm]
    bl.pair(tp, gi1)
    bl.pair(go1, rp)
    bl.pair(tm, gi2)
    bl.pair(go2, rm)

    cp = bl.curves[p]
    cm = bl.curves[mi]
    pos_p = cp["darts"].index(tp)
    pos_m = cm["darts"].index(tm)
    old_closed = d.curves[p].closed
    stem = bl.fresh_name("k")
    if old_closed:
        cp["darts"] = [go1] + cp["darts"][pos_p + 1:] + cp["darts"][:pos_p + 1]
        cm["darts"] = [go2] + cm["darts"][pos_m + 1:] + cm["darts"][:pos_m + 1]
        cp["closed"] = False
        cm["closed"] = False
        bl.set_glue(frozenset({cp["name"], cm["name"]}), ("none",))
    else:
        head_p = cp["darts"][:pos_p + 1]
        tail_p = [go1] + cp["darts"][pos_p + 1:]
        head_m = cm["darts"][:pos_m + 1]
        tail_m = [go2] + cm["darts"][pos_m + 1:]
        cp["darts"] = head_p
        cm["darts"] = head_m
        bl.curves.append({"name": stem + "+",
                          "sign": d.curves[p].sign, "pair": stem + "-",
                          "closed": False, "darts": tail_p, "sphere": sphere})
        bl.curves.append({"name": stem + "-",
                          "sign": d.curves[mi].sign, "pair": stem + "+",
                          "closed": False, "darts": tail_m, "sphere": sphere})
        bl.set_glue(frozenset({cp["name"], cm["name"]}), ("none",))
        bl.set_glue(frozenset({stem + "+", stem + "-"}), ("none",))
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    newid = bl.last_newid
    cin_new = new.dart_vertex[newid[gi1]]
    cout_new = new.dart_vertex[newid[go1]]
    inverse = MoveSite("r4b", (cin_new, cout_new))
    return _finish(site, d, new, trace, inverse)


def _r4b_candidates(d):
    """Cusps where two curve ends arrive / leave, keyed for merging."""
    arrive = []
    leave = []
    for v, kind in enumerate(d.vertex_kinds):
        if kind != CUSP:
            continue
        ends = []
        for c, cu in enumerate(d.curves):
            if cu.closed:
                continue
            if d.dart_vertex[cu.darts[0]] == v:
                ends.append((c, "out"))
            if d.dart_vertex[d.alpha[cu.darts[-1]]] == v:
                ends.append((c, "in"))
        dirs = {e[1] for e in ends}
        if dirs == {"in"}:
            arrive.append(v)
        elif dirs == {"out"}:
            leave.append(v)
    return arrive, leave


def _apply_r4b(d, site):
    cin, cout = site.params
    if cin == cout:
        raise DomainError("merging needs two distinct cusps")
    arrive, leave = _r4b_candidates(d)
    if cin not in arrive or cout not in leave:
        raise DomainError("cusps do not face each other")
    ends_in = {}
    ends_out = {}
    for c, cu in enumerate(d.curves):
        if cu.closed:
            continue
        if d.dart_vertex[d.alpha[cu.darts[-1]]] == cin:
            ends_in[d.curves[c].sign] = c
        if d.dart_vertex[cu.darts[0]] == cout:
            ends_out[d.curves[c].sign] = c
    if set(ends_in) != {1, -1} or set(ends_out) != {1, -1}:
        raise DomainError("cusp ends lack a sign pair")

    bl = _Builder(d)
    merged_names = {}
    for sign in (1, -1):
        u = ends_in[sign]
        v = ends_out[sign]
        cu, cv = bl.curves[u], bl.curves[v]
        t_last = cu["darts"][-1]
        first = cv["darts"][0]
        after_first = d.alpha[first]
        if u == v:
            # closing a line into a bare pair
            bl.alpha[t_last] = after_first
            bl.alpha[after_first] = t_last
            cu["darts"] = cu["darts"][:]
            cu["closed"] = True
            merged_names[sign] = cu["name"]
        else:
            bl.alpha[t_last] = after_first
            bl.alpha[after_first] = t_last
            cu["darts"] = cu["darts"] + cv["darts"][1:]
            merged_names[sign] = cu["name"]
    bl.kill_vertex(cin)
    bl.kill_vertex(cout)
    drop = sorted({ends_out[1], ends_out[-1]} - {ends_in[1], ends_in[-1]},
                  reverse=True)
    for c in drop:
        del bl.curves[c]
    u_plus = ends_in[1]
    same_line = ends_out[1] in (ends_in[1], ends_in[-1])
    cu_p = bl.curves[u_plus if u_plus < len(bl.curves) else 0]
    # glue for the merged line
    name_p = merged_names[1]
    name_m = merged_names[-1]
    rec_p = next(cu for cu in bl.curves if cu["name"] == name_p)
    rec_m = next(cu for cu in bl.curves if cu["name"] == name_m)
    rec_p["pair"] = name_m
    rec_m["pair"] = name_p
    if rec_p["closed"]:
        # locate one matched passage to recover the cyclic alignment
        hint = _r4b_hint(d, ends_in, ends_out)
        if hint is None:
            bl.set_glue(frozenset({name_p, name_m}), ("offset", 0))
        else:
            bl.set_glue(frozenset({name_p, name_m}),
                        ("hint", name_p, hint[0], name_m, hint[1]))
    else:
        bl.set_glue(frozenset({name_p, name_m}), ("none",))
    new = _freeze(bl)
    trace = _trace_by_darts(bl, d, new)
    # the inverse cuts the merged line at the splice interval
    lj = next(lk for lk, (x, y) in enumerate(new.lines)
              if new.curves[x].name in (name_p, name_m))
    newid = bl.last_newid
    p_new = new.plus_curve(lj)
    cut_dart = newid[d.curves[ends_in[1]].darts[-1]]
    ivs = new.intervals[p_new]
    interval = next(i for i, seg in enumerate(ivs) if cut_dart in seg)
    inverse = MoveSite("r4f", (lj, interval))
    return _finish(site, d, new, trace, inverse)


def _r4b_hint(d, ends_in, ends_out):
    u = ends_in[1]
    for pos, stop in enumerate(d.stops[u]):
        if stop.kind == CROSSING:
            q = d.glue_image(u, pos)
            other = d.stops[d.curves[u].pair][q]
            return (stop.in_dart or stop.out_dart,
                    other.in_dart or other.out_dart)
    v = ends_out[1]
    for pos, stop in enumerate(d.stops[v]):
        if stop.kind == CROSSING:
            q = d.glue_image(v, pos)
            other = d.stops[d.curves[v].pair][q]
            return (stop.in_dart or stop.out_dart,
                    other.in_dart or other.out_dart)
    return None

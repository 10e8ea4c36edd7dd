"""Sphere diagrams of 2-dimensional knots as decorated combinatorial maps.

A diagram is a set of oriented spheres carrying a curve system encoded by
darts.  Each dart is an integer id attached to a vertex slot; ``alpha``
pairs darts into edges and the counterclockwise slot order around each
vertex is the rotation system, so faces are orbits of ``sigma o alpha``
and lie to the left of their darts.  Curves traverse edges, carry signs
and pairings, cusped partners share both end cusps, and triple groupings
tie crossings together three at a time.

Curve systems on one sphere may be disconnected (circles from bubble
moves, nested families).  The face cycles of such a system do not
determine the complementary regions, so the region partition, which
groups face cycles that bound a common complementary region, is part of
the primary data.
"""

from dataclasses import dataclass, field
from functools import cached_property

from .errors import DomainError, ValidationError

CROSSING = "crossing"
CUSP = "cusp"
BASEPOINT = "basepoint"

_DEGREE = {CROSSING: 4, CUSP: 2, BASEPOINT: 2}


@dataclass(frozen=True)
class Curve:
    name: str
    sign: int                # +1 over, -1 under
    pair: int                # index of the partner curve
    closed: bool
    darts: tuple             # traversal darts, in order
    sphere: int


@dataclass(frozen=True)
class Triple:
    name: str
    crossings: tuple         # three crossing vertex ids, sorted


@dataclass(frozen=True)
class Stop:
    vertex: int
    kind: str
    in_dart: object          # dart at the vertex pointing back along the entry edge
    out_dart: object         # dart at the vertex pointing along the exit edge


@dataclass(frozen=True)
class Strand:
    curve: int
    stop_pos: int
    in_dart: object
    out_dart: object


@dataclass(frozen=True, eq=False)
class Diagram:
    nspheres: int
    sphere_components: tuple       # per sphere: link-component label or None
    vertex_kinds: tuple
    vertex_spheres: tuple
    vertex_darts: tuple            # per vertex: darts in counterclockwise slot order
    alpha: tuple                   # dart -> dart, fixpoint-free involution
    curves: tuple                  # of Curve
    glue_offsets: tuple            # ((cmin, cmax, offset-or-None), ...) per line
    triples: tuple                 # of Triple
    regions: tuple                 # per region: frozenset of face-cycle reps (min dart)
    region_spheres: tuple          # sphere id per region
    vertex_names: tuple = ()

    # -- elementary structure ------------------------------------------------

    @cached_property
    def ndarts(self):
        return len(self.alpha)

    @cached_property
    def dart_vertex(self):
        dv = [None] * self.ndarts
        for v, darts in enumerate(self.vertex_darts):
            for d in darts:
                dv[d] = v
        return tuple(dv)

    @cached_property
    def dart_slot(self):
        ds = [None] * self.ndarts
        for darts in self.vertex_darts:
            for s, d in enumerate(darts):
                ds[d] = s
        return tuple(ds)

    @cached_property
    def sigma(self):
        sg = [None] * self.ndarts
        for darts in self.vertex_darts:
            k = len(darts)
            for s, d in enumerate(darts):
                sg[d] = darts[(s + 1) % k]
        return tuple(sg)

    @cached_property
    def phi(self):
        sg = self.sigma
        al = self.alpha
        return tuple(sg[al[d]] for d in range(self.ndarts))

    @cached_property
    def cycles(self):
        """Face cycles: map from min-dart representative to the dart orbit."""
        ph = self.phi
        seen = [False] * self.ndarts
        out = {}
        for d in range(self.ndarts):
            if seen[d]:
                continue
            orbit = []
            x = d
            while not seen[x]:
                seen[x] = True
                orbit.append(x)
                x = ph[x]
            rep = min(orbit)
            i = orbit.index(rep)
            out[rep] = tuple(orbit[i:] + orbit[:i])
        return out

    @cached_property
    def cycle_of(self):
        co = [None] * self.ndarts
        for rep, orbit in self.cycles.items():
            for d in orbit:
                co[d] = rep
        return tuple(co)

    @cached_property
    def region_of_cycle(self):
        out = {}
        for r, reps in enumerate(self.regions):
            for rep in reps:
                out[rep] = r
        return out

    def region_of_dart(self, d):
        """Region on the left of dart ``d``."""
        return self.region_of_cycle[self.cycle_of[d]]

    @cached_property
    def clusters(self):
        """Connected components of the curve complex, per the whole diagram."""
        parent = list(range(self.ndarts))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for d in range(self.ndarts):
            union(d, self.alpha[d])
            union(d, self.sigma[d])
        groups = {}
        for d in range(self.ndarts):
            groups.setdefault(find(d), []).append(d)
        return tuple(frozenset(g) for g in groups.values())

    # -- curves, lines, stops --------------------------------------------------

    @cached_property
    def curve_of_dart(self):
        """Map traversal dart -> (curve index, position)."""
        out = {}
        for c, cu in enumerate(self.curves):
            for i, d in enumerate(cu.darts):
                out[d] = (c, i)
        return out

    @cached_property
    def lines(self):
        """Sorted list of curve-pair keys (cmin, cmax)."""
        keys = {tuple(sorted((i, cu.pair))) for i, cu in enumerate(self.curves)}
        return tuple(sorted(keys))

    @cached_property
    def line_of_curve(self):
        idx = {key: i for i, key in enumerate(self.lines)}
        return tuple(idx[tuple(sorted((i, cu.pair)))] for i, cu in enumerate(self.curves))

    def line_key(self, line_idx):
        return self.lines[line_idx]

    def plus_curve(self, line_idx):
        a, b = self.lines[line_idx]
        return a if self.curves[a].sign > 0 else b

    def minus_curve(self, line_idx):
        a, b = self.lines[line_idx]
        return b if self.curves[a].sign > 0 else a

    def line_name(self, line_idx):
        name = self.curves[self.plus_curve(line_idx)].name
        if name and name[-1] in "+-":
            return name[:-1]
        return name

    @cached_property
    def glue_offset_of_line(self):
        table = {(a, b): off for a, b, off in self.glue_offsets}
        return tuple(table.get(key) for key in self.lines)

    @cached_property
    def stops(self):
        """Per curve: crossing and cusp visits in traversal order."""
        out = []
        kinds = self.vertex_kinds
        dv = self.dart_vertex
        for cu in self.curves:
            st = []
            darts = cu.darts
            if not cu.closed:
                v0 = dv[darts[0]]
                st.append(Stop(v0, kinds[v0], None, darts[0]))
            k = len(darts)
            last = k if cu.closed else k - 1
            for i in range(last):
                entered = self.alpha[darts[i]]
                v = dv[entered]
                if kinds[v] == BASEPOINT:
                    continue
                out_dart = darts[(i + 1) % k]
                st.append(Stop(v, kinds[v], entered, out_dart))
            if not cu.closed:
                entered = self.alpha[darts[-1]]
                v = dv[entered]
                st.append(Stop(v, kinds[v], entered, None))
            out.append(tuple(st))
        return tuple(out)

    def glue_image(self, curve_idx, stop_pos):
        """Glue-corresponding stop position on the partner curve."""
        cu = self.curves[curve_idx]
        partner = cu.pair
        line = self.line_of_curve[curve_idx]
        off = self.glue_offset_of_line[line]
        m = len(self.stops[curve_idx])
        if m != len(self.stops[partner]):
            raise DomainError("paired curves have different stop counts")
        if not cu.closed:
            return stop_pos
        if m == 0:
            raise DomainError("curve has no stops")
        plus = self.plus_curve(line)
        if curve_idx == plus:
            return (stop_pos + off) % m
        return (stop_pos - off) % m

    @cached_property
    def intervals(self):
        """Per curve: list of intervals, each a tuple of traversal darts.

        Interval i runs from stop i to the next stop; a stop-free closed
        curve has a single interval covering the whole circle.
        """
        out = []
        kinds = self.vertex_kinds
        dv = self.dart_vertex
        for c, cu in enumerate(self.curves):
            darts = cu.darts
            is_stop = []
            for i, d in enumerate(darts):
                v = dv[d]
                is_stop.append(kinds[v] != BASEPOINT)
            # dart i begins at a stop iff its start vertex is not a basepoint
            starts = [i for i in range(len(darts)) if is_stop[i]]
            if not starts:
                out.append((tuple(darts),))
                continue
            ivs = []
            for j, s in enumerate(starts):
                e = starts[(j + 1) % len(starts)]
                if cu.closed:
                    if e > s:
                        ivs.append(tuple(darts[s:e]))
                    else:
                        ivs.append(tuple(darts[s:] + darts[:e]))
                else:
                    nxt = starts[j + 1] if j + 1 < len(starts) else len(darts)
                    ivs.append(tuple(darts[s:nxt]))
            if not cu.closed:
                out.append(tuple(ivs))
            else:
                out.append(tuple(ivs))
        return tuple(out)

    @cached_property
    def crossing_strands(self):
        """Per crossing vertex: the one or two curve passages through it."""
        out = {v: [] for v, k in enumerate(self.vertex_kinds) if k == CROSSING}
        for c, st in enumerate(self.stops):
            for pos, stop in enumerate(st):
                if stop.kind == CROSSING:
                    out[stop.vertex].append(Strand(c, pos, stop.in_dart, stop.out_dart))
        return {v: tuple(s) for v, s in out.items()}

    @cached_property
    def triple_of_crossing(self):
        out = {}
        for t, tr in enumerate(self.triples):
            for v in tr.crossings:
                out[v] = t
        return out

    # -- orientation ----------------------------------------------------------

    def basis_orientation(self, out_dart_u, out_dart_v):
        """Orientation of the ordered basis (u, v) at a shared crossing.

        Positive iff the exit direction of v is one counterclockwise slot
        from the exit direction of u.
        """
        if self.dart_vertex[out_dart_u] != self.dart_vertex[out_dart_v]:
            raise DomainError("darts are not at a common vertex")
        su = self.dart_slot[out_dart_u]
        sv = self.dart_slot[out_dart_v]
        if (su + 1) % 4 == sv:
            return 1
        if (su + 3) % 4 == sv:
            return -1
        raise DomainError("darts are not transversal strands")

    # -- derived triple structure ----------------------------------------------

    def glue_links(self, triple_idx):
        """The three strand pairings of a triple group.

        Each link is ((crossing, strand), (crossing, strand), line index)
        where the two strands are glue partners on the two curves of one
        double line.
        """
        tr = self.triples[triple_idx]
        links = []
        seen = set()
        for v in tr.crossings:
            for s in self.crossing_strands[v]:
                key = (s.curve, s.stop_pos)
                if key in seen:
                    continue
                partner_curve = self.curves[s.curve].pair
                ppos = self.glue_image(s.curve, s.stop_pos)
                pstop = self.stops[partner_curve][ppos]
                seen.add(key)
                seen.add((partner_curve, ppos))
                links.append(((s.curve, s.stop_pos), (partner_curve, ppos),
                              self.line_of_curve[s.curve]))
        return links

    def strand_at(self, curve_idx, stop_pos):
        stop = self.stops[curve_idx][stop_pos]
        return Strand(curve_idx, stop_pos, stop.in_dart, stop.out_dart)


def lines_of_triple(d, triple_idx):
    """Line indices meeting at a triple, with multiplicity, sorted."""
    return tuple(sorted(link[2] for link in d.glue_links(triple_idx)))


# -- pinch detection -----------------------------------------------------------


def pinch_lines(d):
    """Lines shaped exactly like a fresh branch-pair lens.

    Both curves are cusped, share both cusps, carry no interior stops and
    bound an empty two-sided face on at least one side.
    """
    out = []
    for li, (a, b) in enumerate(d.lines):
        ca, cb = d.curves[a], d.curves[b]
        if ca.closed or cb.closed:
            continue
        sa, sb = d.stops[a], d.stops[b]
        if len(sa) != 2 or len(sb) != 2:
            continue
        if {sa[0].vertex, sa[1].vertex} != {sb[0].vertex, sb[1].vertex}:
            continue
        if len(ca.darts) != 1 or len(cb.darts) != 1:
            # basepoints on the arcs do not change the shape
            pass
        # one side must be a region consisting of exactly one cycle whose
        # darts all lie on these two curves
        curve_darts = set()
        for d0 in ca.darts + cb.darts:
            curve_darts.add(d0)
            curve_darts.add(d.alpha[d0])
        sides = set()
        for d0 in ca.darts + cb.darts:
            sides.add(d.region_of_dart(d0))
            sides.add(d.region_of_dart(d.alpha[d0]))
        for r in sides:
            reps = d.regions[r]
            if len(reps) != 1:
                continue
            (rep,) = reps
            if set(d.cycles[rep]) <= curve_darts:
                out.append((li, r))
                break
    return out


# -- validation -----------------------------------------------------------------


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)

    def add(self, name, ok, locus="", message=""):
        self.entries.append((name, bool(ok), locus, message))

    @property
    def ok(self):
        return all(e[1] for e in self.entries)

    @property
    def failures(self):
        return [(n, l, m) for n, ok, l, m in self.entries if not ok]

    def lines(self):
        out = []
        for name, ok, locus, message in self.entries:
            state = "pass" if ok else "fail"
            tail = f" ({locus})" if locus else ""
            msg = f" {message}" if message and not ok else ""
            out.append(f"{name}: {state}{tail}{msg}")
        return out


def validate(d):
    """Check every structural invariant; failures become report entries."""
    rep = ValidationReport()
    n = d.ndarts

    dart_owner = {}
    ok = True
    for v, darts in enumerate(d.vertex_darts):
        for dd in darts:
            if dd in dart_owner or not (0 <= dd < n):
                ok = False
            dart_owner[dd] = v
    if len(dart_owner) != n:
        ok = False
    rep.add("dart-table", ok, message="every dart at exactly one vertex slot")

    ok = all(0 <= d.alpha[x] < n and d.alpha[d.alpha[x]] == x and d.alpha[x] != x
             for x in range(n))
    rep.add("alpha-involution", ok)
    if not rep.ok:
        return rep

    for v, k in enumerate(d.vertex_kinds):
        deg = len(d.vertex_darts[v])
        if _DEGREE.get(k) != deg:
            rep.add("vertex-degree", False, locus=f"vertex {v}",
                    message=f"{k} has degree {deg}")
    rep.add("vertex-degree", True)

    # curve traversal consistency
    owned = {}
    ok = True
    for c, cu in enumerate(d.curves):
        if cu.sign not in (1, -1):
            rep.add("curve-sign", False, locus=cu.name)
        for dd in cu.darts:
            if dd in owned or d.alpha[dd] in owned:
                ok = False
            owned[dd] = c
    if 2 * len(owned) != n:
        ok = False
    rep.add("curve-darts", ok, message="each edge traversed by exactly one curve")
    if not ok:
        return rep

    for c, cu in enumerate(d.curves):
        good = True
        darts = cu.darts
        k = len(darts)
        last = k if cu.closed else k - 1
        for i in range(last):
            entered = d.alpha[darts[i]]
            v = d.dart_vertex[entered]
            nxt = darts[(i + 1) % k]
            if d.dart_vertex[nxt] != v:
                good = False
                break
            kind = d.vertex_kinds[v]
            s_in, s_out = d.dart_slot[entered], d.dart_slot[nxt]
            if kind == CROSSING:
                if (s_in + 2) % 4 != s_out:
                    good = False
                    break
            elif kind == BASEPOINT:
                if s_in == s_out:
                    good = False
                    break
            else:
                good = False  # passes through a cusp
                break
        rep.add("curve-through", good, locus=cu.name)
        if any(d.vertex_spheres[d.dart_vertex[dd]] != cu.sphere for dd in darts):
            rep.add("curve-sphere", False, locus=cu.name)
        if not cu.closed:
            v0 = d.dart_vertex[darts[0]]
            v1 = d.dart_vertex[d.alpha[darts[-1]]]
            cond1 = d.vertex_kinds[v0] == CUSP and d.vertex_kinds[v1] == CUSP
            rep.add("cond1-ends-in-cusps", cond1, locus=cu.name)

    # condition 2: pairing involution with opposite signs
    ok = True
    for c, cu in enumerate(d.curves):
        p = cu.pair
        if p == c or not (0 <= p < len(d.curves)) or d.curves[p].pair != c:
            rep.add("cond2-pairing", False, locus=cu.name, message="unpaired curve")
            ok = False
        elif cu.sign + d.curves[p].sign != 0:
            rep.add("cond2-pairing", False, locus=cu.name,
                    message="pair must carry one over and one under mark")
            ok = False
    if ok:
        rep.add("cond2-pairing", True)

    # condition 3: cusp ends
    cusp_ends = {v: [] for v, k in enumerate(d.vertex_kinds) if k == CUSP}
    for c, cu in enumerate(d.curves):
        if cu.closed:
            continue
        v0 = d.dart_vertex[cu.darts[0]]
        v1 = d.dart_vertex[d.alpha[cu.darts[-1]]]
        if v0 in cusp_ends:
            cusp_ends[v0].append((c, "out"))
        if v1 in cusp_ends:
            cusp_ends[v1].append((c, "in"))
    ok = True
    for v, ends in cusp_ends.items():
        if len(ends) != 2:
            rep.add("cond3-cusp", False, locus=f"vertex {v}",
                    message="cusp must terminate exactly two curves")
            ok = False
            continue
        (c1, dir1), (c2, dir2) = ends
        if d.curves[c1].pair != c2:
            rep.add("cond3-cusp", False, locus=f"vertex {v}",
                    message="curves at a cusp must be paired")
            ok = False
        elif dir1 != dir2:
            rep.add("cond3-cusp", False, locus=f"vertex {v}",
                    message="orientations must both point toward or away")
            ok = False
    if ok:
        rep.add("cond3-cusp", True)

    # paired cusped curves share both end cusps, paired closed curves agree
    ok = True
    for a, b in d.lines:
        ca, cb = d.curves[a], d.curves[b]
        if ca.closed != cb.closed:
            rep.add("pair-shape", False, locus=d.curves[a].name)
            ok = False
            continue
        if not ca.closed:
            a0 = d.dart_vertex[ca.darts[0]]
            a1 = d.dart_vertex[d.alpha[ca.darts[-1]]]
            b0 = d.dart_vertex[cb.darts[0]]
            b1 = d.dart_vertex[d.alpha[cb.darts[-1]]]
            if (a0, a1) != (b0, b1):
                rep.add("pair-shape", False, locus=d.curves[a].name,
                        message="paired cusped curves must share both cusps")
                ok = False
    if ok:
        rep.add("pair-shape", True)

    # glue offsets well formed
    ok = True
    glue_keys = {(a, b) for a, b, _ in d.glue_offsets}
    if glue_keys != set(d.lines):
        rep.add("glue-table", False, message="glue must list every curve pair once")
        ok = False
    for li, key in enumerate(d.lines):
        a, b = key
        off = d.glue_offset_of_line[li]
        ca = d.curves[a]
        ma, mb = len(d.stops[a]), len(d.stops[b])
        if ma != mb:
            rep.add("glue-table", False, locus=d.line_name(li),
                    message="stop counts differ")
            ok = False
            continue
        if ca.closed:
            if ma and (off is None or not (0 <= off < ma)):
                rep.add("glue-table", False, locus=d.line_name(li),
                        message="closed pair needs an offset in range")
                ok = False
            if ma == 0 and off not in (None, 0):
                rep.add("glue-table", False, locus=d.line_name(li))
                ok = False
        else:
            if off not in (None, 0):
                rep.add("glue-table", False, locus=d.line_name(li),
                        message="cusped pair glue is positional")
                ok = False
    if ok:
        rep.add("glue-table", True)
    if not rep.ok:
        return rep

    # glue respects stop kinds and cusp endpoints
    ok = True
    for li, (a, b) in enumerate(d.lines):
        sa, sb = d.stops[a], d.stops[b]
        for pos, stop in enumerate(sa):
            q = d.glue_image(a, pos) if sa else None
            other = sb[q]
            if stop.kind != other.kind:
                rep.add("glue-kinds", False, locus=d.line_name(li))
                ok = False
                break
            if stop.kind == CUSP and stop.vertex != other.vertex:
                rep.add("glue-kinds", False, locus=d.line_name(li),
                        message="cusp stops must match the shared cusp")
                ok = False
                break
    if ok:
        rep.add("glue-kinds", True)

    # condition 4: glue links at crossings close into triangles matching triples
    ok = True
    crossings = [v for v, k in enumerate(d.vertex_kinds) if k == CROSSING]
    for v in crossings:
        if len(d.crossing_strands.get(v, ())) != 2:
            rep.add("cond4-triples", False, locus=f"vertex {v}",
                    message="crossing must carry two strands")
            return rep
    partner_cross = {}
    for c, st in enumerate(d.stops):
        for pos, stop in enumerate(st):
            if stop.kind != CROSSING:
                continue
            q = d.glue_image(c, pos)
            pc = d.curves[c].pair
            other = d.stops[pc][q]
            if other.kind != CROSSING:
                ok = False
                continue
            partner_cross[(c, pos)] = (stop.vertex, other.vertex)
    # build the crossing multigraph and decompose into components
    adj = {v: [] for v in crossings}
    for (c, pos), (v, w) in partner_cross.items():
        if (c, pos) < (d.curves[c].pair, d.glue_image(c, pos)) or True:
            pass
    seen_pairs = set()
    for (c, pos), (v, w) in partner_cross.items():
        key = frozenset({(c, pos), (d.curves[c].pair, d.glue_image(c, pos))})
        if key in seen_pairs:
            continue
        seen_pairs.add(key)
        if v == w:
            rep.add("cond4-triples", False, locus=f"vertex {v}",
                    message="a line may not glue a crossing to itself")
            return rep
        adj[v].append(w)
        adj[w].append(v)
    derived = set()
    seen_v = set()
    ok4 = True
    for v in crossings:
        if v in seen_v:
            continue
        comp = set()
        stack = [v]
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x])
        seen_v |= comp
        if len(comp) != 3 or any(len(adj[x]) != 2 for x in comp):
            ok4 = False
            rep.add("cond4-triples", False, locus=f"vertex {v}",
                    message="crossing links must close into triangles")
            continue
        derived.add(tuple(sorted(comp)))
    declared = {tuple(sorted(t.crossings)) for t in d.triples}
    if declared != derived:
        extra = declared - derived
        missing = derived - declared
        locus = ""
        if missing:
            locus = f"crossing {sorted(missing)[0][0]}"
        elif extra:
            locus = f"triple {sorted(extra)[0]}"
        rep.add("cond4-triples", False, locus=locus,
                message="declared triples must match the glue triangles")
        ok4 = False
    counted = {}
    for t in d.triples:
        for v in t.crossings:
            counted[v] = counted.get(v, 0) + 1
    if any(counted.get(v, 0) != 1 for v in crossings):
        bad = [v for v in crossings if counted.get(v, 0) != 1]
        rep.add("cond4-triples", False, locus=f"vertex {bad[0]}",
                message="every crossing lies in exactly one triple group")
        ok4 = False
    if ok4:
        rep.add("cond4-triples", True)

    # regions: full partition of cycles, sphere-consistent, tree-like
    allreps = set(d.cycles.keys())
    covered = []
    for r, reps in enumerate(d.regions):
        covered.extend(reps)
        spheres = {d.vertex_spheres[d.dart_vertex[rep]] for rep in reps}
        if reps and spheres != {d.region_spheres[r]}:
            rep.add("region-partition", False, locus=f"region {r}",
                    message="cycles on the wrong sphere")
            return rep
    if sorted(covered) != sorted(allreps):
        rep.add("region-partition", False,
                message="regions must partition the face cycles")
        return rep
    rep.add("region-partition", True)

    cluster_of_dart = {}
    for ci, cl in enumerate(d.clusters):
        for dd in cl:
            cluster_of_dart[dd] = ci

    for s in range(d.nspheres):
        sphere_clusters = sorted({cluster_of_dart[dd]
                                  for dd in range(n)
                                  if d.vertex_spheres[d.dart_vertex[dd]] == s})
        sphere_regions = [r for r in range(len(d.regions)) if d.region_spheres[r] == s]
        ncycles = 0
        incid = set()
        edges = 0
        for r in sphere_regions:
            for repdart in d.regions[r]:
                ncycles += 1
                pair = (r, cluster_of_dart[repdart])
                if pair in incid:
                    rep.add("euler", False, locus=f"sphere {s}",
                            message="region touches a component twice")
                    return rep
                incid.add(pair)
                edges += 1
        # per-component sphere check: V - E + F = 2
        for ci in sphere_clusters:
            cl = d.clusters[ci]
            vs = {d.dart_vertex[dd] for dd in cl}
            ne = len(cl) // 2
            nf = len({d.cycle_of[dd] for dd in cl})
            if len(vs) - ne + nf != 2:
                rep.add("euler", False, locus=f"sphere {s}",
                        message=f"component has V-E+F = {len(vs) - ne + nf}")
                return rep
        if len(sphere_regions) + len(sphere_clusters) - edges != 1:
            rep.add("euler", False, locus=f"sphere {s}",
                    message="region nesting is not tree-like")
            return rep
        # connectivity of the region/component incidence graph
        if sphere_regions:
            nodes = {("r", r) for r in sphere_regions} | {("c", c) for c in sphere_clusters}
            graph = {x: set() for x in nodes}
            for r, c in incid:
                graph[("r", r)].add(("c", c))
                graph[("c", c)].add(("r", r))
            start = next(iter(nodes))
            comp = set()
            stack = [start]
            while stack:
                x = stack.pop()
                if x in comp:
                    continue
                comp.add(x)
                stack.extend(graph[x])
            if comp != nodes:
                rep.add("euler", False, locus=f"sphere {s}",
                        message="region graph disconnected")
                return rep
    rep.add("euler", True)
    return rep


def require_valid(d, context=""):
    repv = validate(d)
    if not repv.ok:
        raise ValidationError(repv.failures)
    return d


# -- faces and dual graph ---------------------------------------------------------


@dataclass(frozen=True)
class Face:
    index: int
    sphere: int
    cycles: tuple     # tuple of dart tuples


def faces(d):
    out = []
    for r, reps in enumerate(d.regions):
        cyc = tuple(d.cycles[rep] for rep in sorted(reps))
        out.append(Face(r, d.region_spheres[r], cyc))
    return out


@dataclass(frozen=True)
class DualEdge:
    left: int        # region on the left of the traversal dart
    right: int
    dart: int        # traversal dart of the crossed edge
    curve: int
    sign: int        # sign of the crossed curve


def dual_graph(d):
    """One dual edge per map edge, annotated with the crossed curve.

    Crossing from ``left`` to ``right`` crosses the curve positively
    (the path and the curve direction form a positive basis).
    """
    out = []
    for c, cu in enumerate(d.curves):
        for t in cu.darts:
            out.append(DualEdge(d.region_of_dart(t), d.region_of_dart(d.alpha[t]),
                                t, c, cu.sign))
    return out


def dual_adjacency(d):
    adj = {r: [] for r in range(len(d.regions))}
    for e in dual_graph(d):
        adj[e.left].append((e.right, e, +1))
        adj[e.right].append((e.left, e, -1))
    return adj


# -- geometrical triples -----------------------------------------------------------


def _triple_role_data(d, triple_idx):
    """Role decomposition of a triple: local lines and their crossings."""
    links = d.glue_links(triple_idx)
    # each link is one local line: two strands on the two paired curves
    cross_of = {}
    for idx, (s1, s2, line) in enumerate(links):
        for cu, pos in (s1, s2):
            v = d.stops[cu][pos].vertex
            cross_of.setdefault(v, []).append(idx)
    return links, cross_of


def is_geometrical_triple(d, triple_idx):
    """Sign-and-orientation compatibility of a triple group.

    True when the three crossings carry over/over, over/under and
    under/under strand pairs and the bases read in role order agree.
    """
    links, cross_of = _triple_role_data(d, triple_idx)
    tr = d.triples[triple_idx]
    sign_pattern = {}
    strands_at = {}
    for v in tr.crossings:
        s1, s2 = d.crossing_strands[v]
        signs = tuple(sorted((d.curves[s1.curve].sign, d.curves[s2.curve].sign)))
        sign_pattern[v] = signs
        strands_at[v] = (s1, s2)
    patterns = sorted(sign_pattern.values())
    if patterns != [(-1, -1), (-1, 1), (1, 1)]:
        return False
    v_pp = next(v for v, p in sign_pattern.items() if p == (1, 1))
    v_pm = next(v for v, p in sign_pattern.items() if p == (-1, 1))
    v_mm = next(v for v, p in sign_pattern.items() if p == (-1, -1))

    def link_of_strand(cu, pos):
        for idx, (s1, s2, line) in enumerate(links):
            if (cu, pos) in (s1, s2):
                return idx
        raise AssertionError

    # at the +- crossing the minus strand belongs to role c, the plus to role a
    s1, s2 = strands_at[v_pm]
    minus_strand = s1 if d.curves[s1.curve].sign < 0 else s2
    plus_strand = s2 if minus_strand is s1 else s1
    role_c = link_of_strand(minus_strand.curve, minus_strand.stop_pos)
    role_a = link_of_strand(plus_strand.curve, plus_strand.stop_pos)
    pp1, pp2 = strands_at[v_pp]
    pp_links = {link_of_strand(pp1.curve, pp1.stop_pos),
                link_of_strand(pp2.curve, pp2.stop_pos)}
    if role_c not in pp_links:
        return False
    (role_b,) = pp_links - {role_c}
    mm1, mm2 = strands_at[v_mm]
    mm_links = {link_of_strand(mm1.curve, mm1.stop_pos),
                link_of_strand(mm2.curve, mm2.stop_pos)}
    if mm_links != {role_b, role_a}:
        return False

    def strand_of_link_at(link_idx, v):
        s1, s2, _ = links[link_idx]
        for cu, pos in (s1, s2):
            if d.stops[cu][pos].vertex == v:
                return d.strand_at(cu, pos)
        raise AssertionError

    o1 = d.basis_orientation(strand_of_link_at(role_c, v_pp).out_dart,
                             strand_of_link_at(role_b, v_pp).out_dart)
    o2 = d.basis_orientation(strand_of_link_at(role_c, v_pm).out_dart,
                             strand_of_link_at(role_a, v_pm).out_dart)
    o3 = d.basis_orientation(strand_of_link_at(role_b, v_mm).out_dart,
                             strand_of_link_at(role_a, v_mm).out_dart)
    return o1 == o2 == o3


def triple_roles(d, triple_idx):
    """Assign role letters a, b, c to the local lines of a triple.

    For geometrical sign patterns the roles follow the over/middle/under
    sheet structure; otherwise they are assigned deterministically.
    Returns a dict role -> link tuple (strand, strand, line index).
    """
    links, _ = _triple_role_data(d, triple_idx)
    tr = d.triples[triple_idx]
    sign_pattern = {}
    strands_at = {}
    for v in tr.crossings:
        s1, s2 = d.crossing_strands[v]
        sign_pattern[v] = tuple(sorted((d.curves[s1.curve].sign, d.curves[s2.curve].sign)))
        strands_at[v] = (s1, s2)

    def link_of_strand(cu, pos):
        for idx, (s1, s2, line) in enumerate(links):
            if (cu, pos) in (s1, s2):
                return idx
        raise AssertionError

    if sorted(sign_pattern.values()) == [(-1, -1), (-1, 1), (1, 1)]:
        v_pm = next(v for v, p in sign_pattern.items() if p == (-1, 1))
        v_pp = next(v for v, p in sign_pattern.items() if p == (1, 1))
        s1, s2 = strands_at[v_pm]
        minus_strand = s1 if d.curves[s1.curve].sign < 0 else s2
        plus_strand = s2 if minus_strand is s1 else s1
        role_c = link_of_strand(minus_strand.curve, minus_strand.stop_pos)
        role_a = link_of_strand(plus_strand.curve, plus_strand.stop_pos)
        pp1, pp2 = strands_at[v_pp]
        pp_links = {link_of_strand(pp1.curve, pp1.stop_pos),
                    link_of_strand(pp2.curve, pp2.stop_pos)}
        rest = pp_links - {role_c}
        if role_c in pp_links and rest:
            (role_b,) = rest
            return {"a": links[role_a], "b": links[role_b], "c": links[role_c]}
    order = sorted(range(3), key=lambda i: (links[i][2], links[i][0]))
    return {"a": links[order[0]], "b": links[order[1]], "c": links[order[2]]}

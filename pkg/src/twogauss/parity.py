"""Parity invariants of double lines.

The Gaussian parity of a double line counts, modulo two, the curve
crossings of a path joining matched points of the paired curves, where
the path leaves the positive curve on its positive transversal side and
arrives at the negative curve from the matching side.  The index parity
is the signed refinement, the link parity the two-component variant.
"""

from collections import deque
from dataclasses import dataclass, field

from .abelian import AbelianGroup, Z, Z2
from .diagram import CROSSING, dual_adjacency, pinch_lines, triple_roles
from .errors import DomainError


def _anchor_regions(d, line_idx, interval=0):
    """Start and end regions of the connecting path for a double line.

    The start is the region to the right of the positive curve along the
    chosen stop interval; the end is the region to the left of the
    negative curve along the glue-matched interval.
    """
    p = d.plus_curve(line_idx)
    m = d.minus_curve(line_idx)
    ivp = d.intervals[p]
    ivm = d.intervals[m]
    if not (0 <= interval < len(ivp)):
        raise DomainError(f"interval {interval} out of range")
    stops_p = d.stops[p]
    if stops_p:
        j = d.glue_image(p, interval)
    else:
        j = 0
    tp = ivp[interval][0]
    tm = ivm[j][0]
    start = d.region_of_dart(d.alpha[tp])
    end = d.region_of_dart(tm)
    return start, end


def _check_same_sphere(d, line_idx):
    a, b = d.lines[line_idx]
    if d.curves[a].sphere != d.curves[b].sphere:
        raise DomainError("disconnected pair: the paired curves lie on "
                          "different sphere components")


def _bfs_path(d, start, end):
    """A shortest dual path as a list of (dual edge, direction) steps."""
    if start == end:
        return []
    adj = dual_adjacency(d)
    prev = {start: None}
    queue = deque([start])
    while queue:
        r = queue.popleft()
        for nxt, edge, direction in adj[r]:
            if nxt not in prev:
                prev[nxt] = (r, edge, direction)
                if nxt == end:
                    queue.clear()
                    break
                queue.append(nxt)
    if end not in prev:
        raise DomainError("anchor regions are not connected")
    steps = []
    r = end
    while prev[r] is not None:
        pr, edge, direction = prev[r]
        steps.append((edge, direction))
        r = pr
    steps.reverse()
    return steps


def gaussian_parity(d, line_idx, interval=0):
    """Mod-2 crossing count of a connecting path; path independent."""
    _check_same_sphere(d, line_idx)
    start, end = _anchor_regions(d, line_idx, interval)
    return len(_bfs_path(d, start, end)) % 2


def index_parity(d, line_idx, interval=0):
    """Signed crossing sum of a connecting path; path independent."""
    _check_same_sphere(d, line_idx)
    start, end = _anchor_regions(d, line_idx, interval)
    total = 0
    for edge, direction in _bfs_path(d, start, end):
        total += edge.sign * direction
    return total


def link_parity(d, line_idx):
    """0 when both curves of the pair lie on one link component, else 1."""
    labels = {lab for lab in d.sphere_components if lab is not None}
    if len(labels) != 2:
        raise DomainError("not a 2-component link: diagram must carry "
                          "exactly two component labels")
    a, b = d.lines[line_idx]
    la = d.sphere_components[d.curves[a].sphere]
    lb = d.sphere_components[d.curves[b].sphere]
    if la is None or lb is None:
        raise DomainError("curves lack component labels")
    return 0 if la == lb else 1


def all_dual_paths(d, start, end, limit=200000):
    """Every simple dual path between two regions (test oracle).

    Paths are region-simple; parallel dual edges count as distinct
    paths.  Intended for diagrams with few faces only.
    """
    adj = dual_adjacency(d)
    out = []
    count = 0

    def walk(r, visited, steps):
        nonlocal count
        if r == end:
            out.append(tuple(steps))
            count += 1
            if count > limit:
                raise DomainError("path enumeration limit exceeded")
            return
        for nxt, edge, direction in adj[r]:
            if nxt in visited:
                continue
            visited.add(nxt)
            steps.append((edge, direction))
            walk(nxt, visited, steps)
            steps.pop()
            visited.remove(nxt)

    if start == end:
        return [()]
    walk(start, {start}, [])
    return out


def gaussian_parity_via_paths(d, line_idx, interval=0):
    """Gaussian parity by exhaustive path enumeration; asserts agreement."""
    _check_same_sphere(d, line_idx)
    start, end = _anchor_regions(d, line_idx, interval)
    paths = all_dual_paths(d, start, end)
    values = {len(p) % 2 for p in paths}
    if len(values) != 1:
        raise AssertionError("path parity disagrees across simple paths")
    return values.pop()


def index_parity_via_paths(d, line_idx, interval=0):
    _check_same_sphere(d, line_idx)
    start, end = _anchor_regions(d, line_idx, interval)
    paths = all_dual_paths(d, start, end)
    values = {sum(e.sign * direction for e, direction in p) for p in paths}
    if len(values) != 1:
        raise AssertionError("path index disagrees across simple paths")
    return values.pop()


# -- assignments and the axioms -------------------------------------------------


@dataclass(frozen=True)
class ParityAssignment:
    """Group-valued assignment to the double lines of one diagram."""

    group: AbelianGroup
    values: tuple      # per line index, an element tuple

    def value(self, line_idx):
        return self.values[line_idx]

    @classmethod
    def from_map(cls, d, group, mapping):
        vals = []
        for li in range(len(d.lines)):
            if li not in mapping:
                raise DomainError(f"assignment misses line {d.line_name(li)}")
            vals.append(group.normalize(mapping[li]))
        return cls(group, tuple(vals))


def gaussian_assignment(d):
    values = tuple((gaussian_parity(d, li),) for li in range(len(d.lines)))
    return ParityAssignment(Z2, values)


def index_assignment(d):
    values = tuple((index_parity(d, li),) for li in range(len(d.lines)))
    return ParityAssignment(Z, values)


def oriented_triple_sign(d, triple_idx, which):
    """Epsilon weight of one line of a triple.

    ``which`` is a role letter 'a', 'b', 'c' or a line index incident to
    the triple.  The weight is the product of the two basis orientations
    of the line against the other two lines of the triple, read from the
    strands at the shared crossings.
    """
    roles = triple_roles(d, triple_idx)
    if which in roles:
        target = roles[which]
    else:
        matches = [lk for lk in roles.values() if lk[2] == which]
        if len(matches) != 1:
            raise DomainError("line does not identify a unique role in the triple")
        target = matches[0]
    others = [lk for lk in roles.values() if lk is not target]
    eps = 1
    for other in others:
        eps *= _link_orientation(d, target, other)
    return eps


def _link_orientation(d, link_u, link_v):
    """Basis orientation or(u, v) at the crossing shared by two local lines."""
    for cu, pos in link_u[:2]:
        v_vertex = d.stops[cu][pos].vertex
        for cv, qos in link_v[:2]:
            if d.stops[cv][qos].vertex == v_vertex:
                su = d.strand_at(cu, pos)
                sv = d.strand_at(cv, qos)
                return d.basis_orientation(su.out_dart, sv.out_dart)
    raise DomainError("local lines do not share a crossing")


@dataclass
class AxiomReport:
    entries: list = field(default_factory=list)

    def add(self, kind, locus, ok, detail=""):
        self.entries.append((kind, locus, bool(ok), detail))

    @property
    def ok(self):
        return all(e[2] for e in self.entries)

    def lines(self):
        out = []
        for kind, locus, ok, detail in self.entries:
            state = "pass" if ok else "fail"
            tail = f" {detail}" if detail and not ok else ""
            out.append(f"{kind} {locus}: {state}{tail}")
        return out


def check_parity_axioms(d, assignment, oriented=False):
    """Triple-sum and pinch-zero checks for an assignment on one diagram."""
    grp = assignment.group
    rep = AxiomReport()
    for ti, tr in enumerate(d.triples):
        roles = triple_roles(d, ti)
        terms = []
        for letter in ("a", "b", "c"):
            link = roles[letter]
            val = assignment.value(link[2])
            if oriented:
                eps = oriented_triple_sign(d, ti, letter)
                val = grp.scale(eps, val)
            terms.append(val)
        total = grp.sum(terms)
        rep.add("triple" + ("-oriented" if oriented else ""), tr.name,
                grp.is_zero(total), f"sum={total}")
    for li, bigon_region in pinch_lines(d):
        val = assignment.value(li)
        rep.add("pinch", d.line_name(li), grp.is_zero(val), f"value={val}")
    return rep

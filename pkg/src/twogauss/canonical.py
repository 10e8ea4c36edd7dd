"""Canonical forms of diagrams under structure-preserving relabeling.

Two diagrams get equal canonical strings exactly when some relabeling of
darts, vertices, curves and spheres preserves the rotation system (hence
the sphere orientations), signs, pairings, glue, triples, regions and
component labels.  The algorithm removes redundant basepoints, refines
dart colors by neighborhoods, then searches deterministic traversals
from every minimal start, keeping the lexicographically least encoding.
"""

from .diagram import BASEPOINT, Diagram


def normalize_basepoints(d):
    """Drop basepoints beyond the structural minimum.

    A curve with crossings or cusps needs none; a bare circle keeps one.
    """
    removable = []
    for c, cu in enumerate(d.curves):
        bps = []
        for dd in cu.darts:
            v = d.dart_vertex[dd]
            if d.vertex_kinds[v] == BASEPOINT:
                bps.append(v)
        keep = 0 if d.stops[c] else 1
        bps.sort()
        removable.extend(bps[keep:])
    if not removable:
        return d

    alpha = list(d.alpha)
    dead_darts = set()
    for v in removable:
        x, y = d.vertex_darts[v]
        p, q = alpha[x], alpha[y]
        assert p not in (x, y) and q not in (x, y)
        alpha[p] = q
        alpha[q] = p
        dead_darts.add(x)
        dead_darts.add(y)
    dead_vs = set(removable)

    live = [dd for dd in range(d.ndarts) if dd not in dead_darts]
    newid = {old: i for i, old in enumerate(live)}
    vlive = [v for v in range(len(d.vertex_kinds)) if v not in dead_vs]
    vmap = {old: i for i, old in enumerate(vlive)}

    new_vertex_darts = tuple(tuple(newid[dd] for dd in d.vertex_darts[v]) for v in vlive)
    new_alpha = tuple(newid[alpha[old]] for old in live)
    new_curves = tuple(
        cu.__class__(cu.name, cu.sign, cu.pair, cu.closed,
                     tuple(newid[dd] for dd in cu.darts if dd not in dead_darts),
                     cu.sphere)
        for cu in d.curves
    )
    new_triples = tuple(
        tr.__class__(tr.name, tuple(sorted(vmap[v] for v in tr.crossings)))
        for tr in d.triples
    )
    out = Diagram(
        nspheres=d.nspheres,
        sphere_components=d.sphere_components,
        vertex_kinds=tuple(d.vertex_kinds[v] for v in vlive),
        vertex_spheres=tuple(d.vertex_spheres[v] for v in vlive),
        vertex_darts=new_vertex_darts,
        alpha=new_alpha,
        curves=new_curves,
        glue_offsets=d.glue_offsets,
        triples=new_triples,
        regions=(),
        region_spheres=(),
        vertex_names=tuple(d.vertex_names[v] for v in vlive) if d.vertex_names else (),
    )
    # regions: cycles persist one for one; inherit through any member dart
    regions = [set() for _ in d.regions]
    oldid = {new: old for old, new in newid.items()}
    for rep, orbit in out.cycles.items():
        old_cycle = d.cycle_of[oldid[orbit[0]]]
        regions[d.region_of_cycle[old_cycle]].add(rep)
    keep_regions = []
    keep_spheres = []
    for r, reps in enumerate(regions):
        if reps or not d.regions[r]:
            keep_regions.append(frozenset(reps))
            keep_spheres.append(d.region_spheres[r])
        else:
            raise AssertionError("basepoint removal emptied a region")
    object.__setattr__(out, "regions", tuple(keep_regions))
    object.__setattr__(out, "region_spheres", tuple(keep_spheres))
    return out


def _neighbor_maps(d):
    n = d.ndarts
    cnext = [None] * n
    cprev = [None] * n
    for cu in d.curves:
        k = len(cu.darts)
        for i, dd in enumerate(cu.darts):
            if cu.closed or i + 1 < k:
                nxt = cu.darts[(i + 1) % k]
                cnext[dd] = nxt
                cprev[nxt] = dd
    gf = [None] * n
    gb = [None] * n
    for c, st in enumerate(d.stops):
        if not st:
            continue
        partner = d.curves[c].pair
        for p, stop in enumerate(st):
            q = d.glue_image(c, p)
            other = d.stops[partner][q]
            if stop.out_dart is not None and other.out_dart is not None:
                gf[stop.out_dart] = other.out_dart
            if stop.in_dart is not None and other.in_dart is not None:
                gb[stop.in_dart] = other.in_dart
    return cnext, cprev, gf, gb


def _refine_colors(d):
    n = d.ndarts
    cnext, cprev, gf, gb = _neighbor_maps(d)
    sigma = d.sigma
    sigma_inv = [None] * n
    for dd in range(n):
        sigma_inv[sigma[dd]] = dd
    curve_of = {}
    for c, cu in enumerate(d.curves):
        for dd in cu.darts:
            curve_of[dd] = c
            curve_of[d.alpha[dd]] = c

    col = []
    for dd in range(n):
        v = d.dart_vertex[dd]
        c = curve_of[dd]
        cu = d.curves[c]
        col.append((
            d.vertex_kinds[v],
            cu.sign,
            cu.closed,
            dd in d.curve_of_dart,            # traversal side of the edge
            d.sphere_components[cu.sphere],
            len(d.stops[c]),
        ))
    col = _compress(col)

    def one_round(col):
        curve_color = {}
        for c, cu in enumerate(d.curves):
            sig = tuple(sorted(col[dd] for dd in cu.darts))
            curve_color[c] = (cu.sign, cu.closed, sig)
        ccomp = _compress([curve_color[c] for c in range(len(d.curves))])
        cycle_color = {}
        for rep, orbit in d.cycles.items():
            cycle_color[rep] = tuple(sorted(col[dd] for dd in orbit))
        region_color = {}
        for r, reps in enumerate(d.regions):
            region_color[r] = tuple(sorted(cycle_color[rep] for rep in reps))
        new = []
        for dd in range(n):
            c = curve_of[dd]
            new.append((
                col[dd],
                col[d.alpha[dd]],
                col[sigma[dd]],
                col[sigma_inv[dd]],
                -1 if cnext[dd] is None else col[cnext[dd]],
                -1 if cprev[dd] is None else col[cprev[dd]],
                -1 if gf[dd] is None else col[gf[dd]],
                -1 if gb[dd] is None else col[gb[dd]],
                ccomp[d.curves[c].pair],
                cycle_color[d.cycle_of[dd]],
                region_color[d.region_of_cycle[d.cycle_of[dd]]],
            ))
        return _compress(new)

    nclasses = len(set(col))
    while True:
        col = one_round(col)
        k = len(set(col))
        if k == nclasses:
            return col, (cnext, cprev, gf, gb, sigma_inv)
        nclasses = k


def _compress(values):
    order = sorted(set(values))
    idx = {v: i for i, v in enumerate(order)}
    return [idx[v] for v in values]


def _relabel_encoding(d, label):
    """Encode the whole primary structure under a dart relabeling."""
    n = d.ndarts
    inv = [None] * n
    for old, new in enumerate(label):
        inv[new] = old

    vorder = sorted(range(len(d.vertex_kinds)),
                    key=lambda v: min(label[dd] for dd in d.vertex_darts[v]))
    vmap = {v: i for i, v in enumerate(vorder)}
    sphere_key = {}
    for s in range(d.nspheres):
        darts = [label[dd] for dd in range(n)
                 if d.vertex_spheres[d.dart_vertex[dd]] == s]
        sphere_key[s] = (0, min(darts)) if darts else (1, str(d.sphere_components[s]))
    sorder = sorted(range(d.nspheres), key=lambda s: sphere_key[s])
    smap = {s: i for i, s in enumerate(sorder)}

    verts = []
    for v in vorder:
        darts = d.vertex_darts[v]
        lab = [label[dd] for dd in darts]
        k = lab.index(min(lab))
        rotated = tuple(lab[k:] + lab[:k])
        verts.append((d.vertex_kinds[v], smap[d.vertex_spheres[v]], rotated))

    corder = sorted(range(len(d.curves)),
                    key=lambda c: min(label[dd] for dd in d.curves[c].darts))
    cmap = {c: i for i, c in enumerate(corder)}
    curves = []
    rotations = {}
    for c in corder:
        cu = d.curves[c]
        lab = [label[dd] for dd in cu.darts]
        if cu.closed:
            k = lab.index(min(lab))
        else:
            k = 0
        rotations[c] = k
        curves.append((cu.sign, cu.closed, cmap[cu.pair],
                       tuple(lab[k:] + lab[:k])))

    glue = []
    for li, (a, b) in enumerate(d.lines):
        off = d.glue_offset_of_line[li]
        m = len(d.stops[a])
        if off is None or m == 0:
            enc = -1
        else:
            p = d.plus_curve(li)
            mi = d.minus_curve(li)
            # stops shift with the dart-list rotation of each curve
            sp = _stop_shift(d, p, rotations[p])
            sm = _stop_shift(d, mi, rotations[mi])
            enc = (off + sp - sm) % m
        key = tuple(sorted((cmap[a], cmap[b])))
        glue.append((key, enc))
    glue.sort()

    triples = sorted(tuple(sorted(vmap[v] for v in tr.crossings)) for tr in d.triples)
    regions = []
    for r, reps in enumerate(d.regions):
        cyc = tuple(sorted(min(label[dd] for dd in d.cycles[rep]) for rep in reps))
        regions.append((smap[d.region_spheres[r]], cyc))
    regions.sort()
    alpha_enc = tuple(label[d.alpha[inv[i]]] for i in range(n))
    spheres = tuple(str(d.sphere_components[s]) for s in sorder)
    return repr((d.nspheres, spheres, tuple(verts), alpha_enc, tuple(curves),
                 tuple(glue), tuple(sorted(triples)), tuple(regions)))


def _stop_shift(d, c, rotation):
    """How many stops precede the rotated dart-list start."""
    if rotation == 0:
        return 0
    cu = d.curves[c]
    count = 0
    for i in range(rotation):
        v = d.dart_vertex[d.alpha[cu.darts[i]]]
        if d.vertex_kinds[v] != BASEPOINT:
            count += 1
    return count


def _canonical_data(d):
    if "_canonical_data" in d.__dict__:
        return d.__dict__["_canonical_data"]
    dn = normalize_basepoints(d)
    n = dn.ndarts
    if n == 0:
        spheres = tuple(sorted(str(lab) for lab in dn.sphere_components))
        form = repr((dn.nspheres, spheres, (), (), (), (), (), ()))
        data = (form, dn, list(range(0)))
        d.__dict__["_canonical_data"] = data
        return data
    col, maps = _refine_colors(dn)
    best_col = min(col)
    starts = [dd for dd in range(n) if col[dd] == best_col]

    best = {"form": None, "label": None}

    def search(start):
        # branch over continuation picks lazily via recursion
        def try_label(partial_starts):
            label = [None] * n
            cnext, cprev, gf, gb, sigma_inv = maps
            funcs = (dn.alpha, dn.sigma, sigma_inv, cnext, cprev, gf, gb)
            assigned = 0
            picks = iter(partial_starts)
            pending = []
            while assigned < n:
                try:
                    current = next(picks)
                except StopIteration:
                    bestc = min(col[dd] for dd in range(n) if label[dd] is None)
                    cands = sorted(dd for dd in range(n)
                                   if label[dd] is None and col[dd] == bestc)
                    return None, cands, label
                if label[current] is not None:
                    continue
                queue = [current]
                label[current] = assigned
                assigned += 1
                while queue:
                    x = queue.pop(0)
                    for f in funcs:
                        y = f[x]
                        if y is not None and label[y] is None:
                            label[y] = assigned
                            assigned += 1
                            queue.append(y)
            return label, None, None

        stack = [(start,)]
        while stack:
            seq = stack.pop()
            label, cands, _ = try_label(seq)
            if label is not None:
                form = _relabel_encoding(dn, label)
                if best["form"] is None or form < best["form"]:
                    best["form"] = form
                    best["label"] = label
            else:
                for dd in reversed(cands):
                    stack.append(seq + (dd,))

    for s in starts:
        search(s)
    data = (best["form"], dn, best["label"])
    d.__dict__["_canonical_data"] = data
    return data


def canonical_form(d):
    """Canonical string; equal exactly for isomorphic diagrams."""
    return _canonical_data(d)[0]


def canonical_line_order(d):
    """Line indices of ``d`` ordered by the canonical labeling.

    Lines are keyed by the least canonical dart over their two curves in
    the basepoint-normalized diagram; the order is isomorphism invariant
    (ties broken inside one diagram are fixed by the winning labeling).
    Bare curve pairs keep their relative order by curve structure.
    """
    form, dn, label = _canonical_data(d)
    # lines of dn and d coincide: normalization keeps curve indices
    def key(li):
        a, b = dn.lines[li]
        darts = list(dn.curves[a].darts) + list(dn.curves[b].darts)
        return min(label[dd] for dd in darts) if darts else 0

    return sorted(range(len(dn.lines)), key=key)


def relabel_random(d, rng):
    """An isomorphic copy with permuted ids (testing helper)."""
    n = d.ndarts
    perm = list(range(n))
    rng.shuffle(perm)
    vperm = list(range(len(d.vertex_kinds)))
    rng.shuffle(vperm)
    vinv = {old: new for new, old in enumerate(vperm)}

    new_vertex_darts = [None] * len(d.vertex_kinds)
    new_kinds = [None] * len(d.vertex_kinds)
    new_spheres = [None] * len(d.vertex_kinds)
    new_names = [None] * len(d.vertex_kinds)
    for old in range(len(d.vertex_kinds)):
        new = vinv[old]
        darts = d.vertex_darts[old]
        k = rng.randrange(len(darts))
        rotated = darts[k:] + darts[:k]
        new_vertex_darts[new] = tuple(perm[dd] for dd in rotated)
        new_kinds[new] = d.vertex_kinds[old]
        new_spheres[new] = d.vertex_spheres[old]
        new_names[new] = d.vertex_names[old] if d.vertex_names else f"v{new}"
    new_alpha = [None] * n
    for dd in range(n):
        new_alpha[perm[dd]] = perm[d.alpha[dd]]

    corder = list(range(len(d.curves)))
    rng.shuffle(corder)
    cmap = {old: new for new, old in enumerate(corder)}
    new_curves = [None] * len(d.curves)
    rotations = {}
    for old in range(len(d.curves)):
        cu = d.curves[old]
        if cu.closed and len(cu.darts) > 1:
            k = rng.randrange(len(cu.darts))
        else:
            k = 0
        rotations[old] = k
        darts = cu.darts[k:] + cu.darts[:k]
        new_curves[cmap[old]] = cu.__class__(
            cu.name, cu.sign, cmap[cu.pair], cu.closed,
            tuple(perm[dd] for dd in darts), cu.sphere)

    new_glue = []
    for li, (a, b) in enumerate(d.lines):
        off = d.glue_offset_of_line[li]
        m = len(d.stops[a])
        if off is not None and m:
            p = d.plus_curve(li)
            mi = d.minus_curve(li)
            off = (off + _stop_shift(d, p, rotations[p])
                   - _stop_shift(d, mi, rotations[mi])) % m
        key = tuple(sorted((cmap[a], cmap[b])))
        new_glue.append((key[0], key[1], off))
    new_triples = tuple(
        tr.__class__(tr.name, tuple(sorted(vinv[v] for v in tr.crossings)))
        for tr in d.triples
    )
    out = Diagram(
        nspheres=d.nspheres,
        sphere_components=d.sphere_components,
        vertex_kinds=tuple(new_kinds),
        vertex_spheres=tuple(new_spheres),
        vertex_darts=tuple(new_vertex_darts),
        alpha=tuple(new_alpha),
        curves=tuple(new_curves),
        glue_offsets=tuple(sorted(new_glue)),
        triples=new_triples,
        regions=(),
        region_spheres=(),
        vertex_names=tuple(new_names),
    )
    regions = []
    for r, reps in enumerate(d.regions):
        new_reps = set()
        for rep in reps:
            some = perm[d.cycles[rep][0]]
            new_reps.add(out.cycle_of[some])
        regions.append(frozenset(new_reps))
    object.__setattr__(out, "regions", tuple(regions))
    object.__setattr__(out, "region_spheres", d.region_spheres)
    return out

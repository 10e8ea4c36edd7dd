"""The 2GD text format: a line-oriented description of diagrams.

Sections, in any order after the ``2gd 1`` header:

* ``sphere NAME [component=INT]``
* ``vertex NAME crossing|cusp|basepoint SPHERE``
* ``curve NAME sign=+|- pair=NAME closed|open sphere=NAME path=V.S,...``
  The path lists vertex visits with entry slots; an open curve starts
  with its start cusp and exit slot and ends at the end cusp.  Slots
  number the counterclockwise rotation at the vertex; a strand entering
  a crossing at slot ``i`` leaves at slot ``i+2`` mod 4.
* ``glue PLUSCURVE offset=INT`` for closed pairs with stops (stop ``k``
  of the positive curve matches stop ``k+offset`` of the partner).
* ``triple NAME X1 X2 X3``
* ``region SPHERE V.S,...`` groups the face cycles containing the listed
  darts into one complementary region (needed only when a sphere carries
  a disconnected curve system); unlisted cycles each bound their own
  region.

``#`` starts a comment; blank lines are ignored.
"""

from .diagram import BASEPOINT, CROSSING, CUSP, Curve, Diagram, Triple, validate
from .errors import ParseError, ValidationError

_KINDS = {"crossing": CROSSING, "cusp": CUSP, "basepoint": BASEPOINT}
_DEG = {CROSSING: 4, CUSP: 2, BASEPOINT: 2}


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line.split()


def parse_document(text):
    """Parse 2GD text into a Diagram (structure only; run validate after)."""
    spheres = []
    sphere_idx = {}
    components = []
    vkinds, vspheres, vnames = [], [], []
    vidx = {}
    curve_specs = []
    curve_idx = {}
    glue_decl = {}
    triple_decl = []
    region_decl = []

    lines_iter = list(_tokens(text))
    if lines_iter:
        lineno, words = lines_iter[0]
        if words[0] != "2gd":
            raise ParseError(lineno, "expected header '2gd 1'")
        if len(words) != 2 or words[1] != "1":
            raise ParseError(lineno, f"unsupported version {' '.join(words[1:])!r}")
        body = lines_iter[1:]
    else:
        body = []

    def kv(words, lineno):
        out = {}
        rest = []
        for w in words:
            if "=" in w:
                k, v = w.split("=", 1)
                if k in out:
                    raise ParseError(lineno, f"duplicate field {k!r}")
                out[k] = v
            else:
                rest.append(w)
        return out, rest

    for lineno, words in body:
        head, rest = words[0], words[1:]
        if head == "sphere":
            opts, names = kv(rest, lineno)
            if len(names) != 1:
                raise ParseError(lineno, "sphere needs exactly one name")
            name = names[0]
            if name in sphere_idx:
                raise ParseError(lineno, f"duplicate sphere {name!r}")
            sphere_idx[name] = len(spheres)
            spheres.append(name)
            comp = opts.pop("component", None)
            if opts:
                raise ParseError(lineno, f"unknown field {next(iter(opts))!r}")
            try:
                components.append(int(comp) if comp is not None else None)
            except ValueError:
                raise ParseError(lineno, "component must be an integer") from None
        elif head == "vertex":
            if len(rest) != 3:
                raise ParseError(lineno, "vertex NAME KIND SPHERE")
            name, kind, sph = rest
            if kind not in _KINDS:
                raise ParseError(lineno, f"unknown vertex kind {kind!r}")
            if sph not in sphere_idx:
                raise ParseError(lineno, f"unknown sphere {sph!r}")
            if name in vidx:
                raise ParseError(lineno, f"duplicate vertex {name!r}")
            vidx[name] = len(vkinds)
            vkinds.append(_KINDS[kind])
            vspheres.append(sphere_idx[sph])
            vnames.append(name)
        elif head == "curve":
            opts, names = kv(rest, lineno)
            if len(names) < 1:
                raise ParseError(lineno, "curve needs a name")
            name = names[0]
            shape = [w for w in names[1:] if w in ("closed", "open")]
            if name in curve_idx:
                raise ParseError(lineno, f"duplicate curve {name!r}")
            if len(shape) != 1:
                raise ParseError(lineno, "curve must be 'closed' or 'open'")
            for field in ("sign", "pair", "path"):
                if field not in opts:
                    raise ParseError(lineno, f"curve misses {field}=")
            if opts["sign"] not in ("+", "-"):
                raise ParseError(lineno, "sign must be + or -")
            curve_idx[name] = len(curve_specs)
            curve_specs.append((lineno, name, 1 if opts["sign"] == "+" else -1,
                                opts["pair"], shape[0] == "closed", opts["path"]))
        elif head == "glue":
            opts, names = kv(rest, lineno)
            if len(names) == 1 and "offset" in opts:
                off = opts["offset"]
            elif len(names) == 2:
                names, off = names[:1], names[1]
            else:
                raise ParseError(lineno, "glue CURVE offset=INT")
            try:
                glue_decl[names[0]] = (lineno, int(off))
            except ValueError:
                raise ParseError(lineno, "offset must be an integer") from None
        elif head == "triple":
            if len(rest) != 4:
                raise ParseError(lineno, "triple NAME X1 X2 X3")
            triple_decl.append((lineno, rest[0], rest[1:]))
        elif head == "region":
            if len(rest) < 2:
                raise ParseError(lineno, "region SPHERE DARTS")
            region_decl.append((lineno, rest[0], rest[1:]))
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")

    # dart ids: one per vertex slot, slot order = rotation order
    offset = []
    total = 0
    for v, kind in enumerate(vkinds):
        offset.append(total)
        total += _DEG[kind]
    vertex_darts = tuple(tuple(range(offset[v], offset[v] + _DEG[vkinds[v]]))
                         for v in range(len(vkinds)))

    def parse_ref(ref, lineno):
        if "." not in ref:
            raise ParseError(lineno, f"expected VERTEX.SLOT, got {ref!r}")
        vn, s = ref.rsplit(".", 1)
        if vn not in vidx:
            raise ParseError(lineno, f"unknown vertex {vn!r}")
        v = vidx[vn]
        try:
            slot = int(s)
        except ValueError:
            raise ParseError(lineno, f"bad slot in {ref!r}") from None
        if not (0 <= slot < _DEG[vkinds[v]]):
            raise ParseError(lineno, f"slot out of range in {ref!r}")
        return v, slot

    def exit_slot(v, entry, lineno):
        kind = vkinds[v]
        if kind == CROSSING:
            return (entry + 2) % 4
        if kind == BASEPOINT:
            return 1 - entry
        raise ParseError(lineno, f"curve passes through cusp {vnames[v]!r}")

    used = {}
    alpha = {}
    curves = []
    for lineno, name, sign, pair_name, closed, path in curve_specs:
        if pair_name not in curve_idx:
            raise ParseError(lineno, f"unknown pair curve {pair_name!r}")
        refs = [parse_ref(r, lineno) for r in path.split(",") if r]
        if not refs:
            raise ParseError(lineno, "empty path")
        visits = []   # (vertex, entry_slot, exit_slot)
        if closed:
            for v, entry in refs:
                visits.append((v, entry, exit_slot(v, entry, lineno)))
        else:
            v0, s0 = refs[0]
            if vkinds[v0] != CUSP:
                raise ParseError(lineno, f"open curve must start at a cusp")
            visits.append((v0, None, s0))
            for v, entry in refs[1:-1]:
                visits.append((v, entry, exit_slot(v, entry, lineno)))
            if len(refs) < 2:
                raise ParseError(lineno, "open curve needs two cusps")
            v1, s1 = refs[-1]
            if vkinds[v1] != CUSP:
                raise ParseError(lineno, "open curve must end at a cusp")
            visits.append((v1, s1, None))
        darts = []
        nedges = len(visits) if closed else len(visits) - 1
        for i in range(nedges):
            v, _, s_out = visits[i]
            w, s_in, _ = visits[(i + 1) % len(visits)]
            d_out = offset[v] + s_out
            d_in = offset[w] + s_in
            for dd, ref in ((d_out, (v, s_out)), (d_in, (w, s_in))):
                if dd in used:
                    raise ParseError(lineno,
                                     f"slot {vnames[ref[0]]}.{ref[1]} used twice")
                used[dd] = True
            alpha[d_out] = d_in
            alpha[d_in] = d_out
            darts.append(d_out)
        sphere = vspheres[visits[0][0]]
        curves.append(Curve(name, sign, curve_idx[pair_name], closed,
                            tuple(darts), sphere))

    if len(used) != total:
        missing = next(dd for dd in range(total) if dd not in used)
        v = next(v for v in range(len(vkinds))
                 if offset[v] <= missing < offset[v] + _DEG[vkinds[v]])
        raise ParseError(1, f"unused slot {vnames[v]}.{missing - offset[v]}")

    glue_offsets = []
    seen_pairs = set()
    for c, cu in enumerate(curves):
        key = tuple(sorted((c, cu.pair)))
        if key in seen_pairs:
            continue
        seen_pairs.add(key)
        plus_name = cu.name if cu.sign > 0 else curves[cu.pair].name
        decl = glue_decl.pop(plus_name, None)
        minus_name = curves[key[0]].name if curves[key[0]].sign < 0 else curves[key[1]].name
        decl2 = glue_decl.pop(minus_name, None)
        if decl is None and decl2 is not None:
            raise ParseError(decl2[0], "glue must name the positive curve")
        if cu.closed:
            glue_offsets.append((key[0], key[1], decl[1] if decl else 0))
        else:
            if decl is not None and decl[1] != 0:
                raise ParseError(decl[0], "cusped pairs glue positionally")
            glue_offsets.append((key[0], key[1], None))
    if glue_decl:
        name = next(iter(glue_decl))
        raise ParseError(glue_decl[name][0], f"glue for unknown curve {name!r}")

    triples = []
    for lineno, name, xs in triple_decl:
        vs = []
        for x in xs:
            if x not in vidx:
                raise ParseError(lineno, f"unknown vertex {x!r}")
            vs.append(vidx[x])
        triples.append(Triple(name, tuple(sorted(vs))))

    d = Diagram(
        nspheres=len(spheres),
        sphere_components=tuple(components),
        vertex_kinds=tuple(vkinds),
        vertex_spheres=tuple(vspheres),
        vertex_darts=vertex_darts,
        alpha=tuple(alpha[i] for i in range(total)) if total else (),
        curves=tuple(curves),
        glue_offsets=tuple(glue_offsets),
        triples=tuple(triples),
        regions=(),
        region_spheres=(),
        vertex_names=tuple(vnames),
    )

    # region partition: declared groups plus singleton defaults
    grouped = {}
    declared = set()
    region_list = []
    region_spheres = []
    for lineno, sph, refs in region_decl:
        if sph not in sphere_idx:
            raise ParseError(lineno, f"unknown sphere {sph!r}")
        reps = set()
        for ref in " ".join(refs).replace(",", " ").split():
            v, slot = parse_ref(ref, lineno)
            dd = offset[v] + slot
            reps.add(d.cycle_of[dd])
        for rep in reps:
            if rep in declared:
                raise ParseError(lineno, "cycle assigned to two regions")
            declared.add(rep)
        region_list.append(frozenset(reps))
        region_spheres.append(sphere_idx[sph])
    for rep in sorted(d.cycles):
        if rep not in declared:
            region_list.append(frozenset({rep}))
            region_spheres.append(d.vertex_spheres[d.dart_vertex[rep]])
    for s in range(len(spheres)):
        if not any(sp == s for sp in region_spheres):
            region_list.append(frozenset())
            region_spheres.append(s)
    object.__setattr__(d, "regions", tuple(region_list))
    object.__setattr__(d, "region_spheres", tuple(region_spheres))
    return d


def build_diagram(text):
    """Parse and validate; raises ParseError or ValidationError."""
    d = parse_document(text)
    report = validate(d)
    if not report.ok:
        raise ValidationError(report.failures)
    return d


def serialize(d):
    """Emit a 2GD document reproducing the diagram up to isomorphism."""
    out = ["2gd 1"]
    sphere_names = [f"s{i}" for i in range(d.nspheres)]
    for s in range(d.nspheres):
        comp = d.sphere_components[s]
        suffix = f" component={comp}" if comp is not None else ""
        out.append(f"sphere {sphere_names[s]}{suffix}")
    vnames = list(d.vertex_names) if d.vertex_names else []
    if len(vnames) != len(d.vertex_kinds):
        vnames = [f"v{i}" for i in range(len(d.vertex_kinds))]
    for v, kind in enumerate(d.vertex_kinds):
        out.append(f"vertex {vnames[v]} {kind} {sphere_names[d.vertex_spheres[v]]}")
    for c, cu in enumerate(d.curves):
        refs = []
        k = len(cu.darts)
        if cu.closed:
            for i in range(k):
                entry = d.alpha[cu.darts[(i - 1) % k]]
                v = d.dart_vertex[cu.darts[i]]
                refs.append(f"{vnames[v]}.{d.dart_slot[entry]}")
        else:
            v0 = d.dart_vertex[cu.darts[0]]
            refs.append(f"{vnames[v0]}.{d.dart_slot[cu.darts[0]]}")
            for i in range(1, k):
                entry = d.alpha[cu.darts[i - 1]]
                v = d.dart_vertex[cu.darts[i]]
                refs.append(f"{vnames[v]}.{d.dart_slot[entry]}")
            last = d.alpha[cu.darts[-1]]
            v1 = d.dart_vertex[last]
            refs.append(f"{vnames[v1]}.{d.dart_slot[last]}")
        sign = "+" if cu.sign > 0 else "-"
        shape = "closed" if cu.closed else "open"
        out.append(f"curve {cu.name} sign={sign} pair={d.curves[cu.pair].name} "
                   f"{shape} path={','.join(refs)}")
    for li, (a, b) in enumerate(d.lines):
        off = d.glue_offset_of_line[li]
        if off is not None and len(d.stops[a]) > 0:
            plus = d.curves[d.plus_curve(li)].name
            out.append(f"glue {plus} offset={off}")
    for tr in d.triples:
        xs = " ".join(vnames[v] for v in tr.crossings)
        out.append(f"triple {tr.name} {xs}")
    for r, reps in enumerate(d.regions):
        if len(reps) < 2:
            continue
        refs = []
        for rep in sorted(reps):
            v = d.dart_vertex[rep]
            refs.append(f"{vnames[v]}.{d.dart_slot[rep]}")
        out.append(f"region {sphere_names[d.region_spheres[r]]} {','.join(refs)}")
    return "\n".join(out) + "\n"

import random
from pathlib import Path

import pytest

from twogauss.canonical import canonical_form, normalize_basepoints, relabel_random
from twogauss.diagram import faces, pinch_lines, validate
from twogauss.errors import ParseError, ValidationError
from twogauss.parity import gaussian_parity, gaussian_parity_via_paths, index_parity
from twogauss.textfmt import build_diagram, parse_document, serialize

CORPUS = Path(__file__).resolve().parents[1] / "src" / "twogauss" / "corpus"


def load(name):
    return build_diagram((CORPUS / f"{name}.2gd").read_text())


def test_empty_document_is_empty_diagram():
    d = build_diagram("")
    assert d.nspheres == 0
    assert len(d.curves) == 0
    d = load("empty")
    assert d.nspheres == 1
    assert len(d.curves) == 0
    assert len(faces(d)) == 1


def test_pinch_valid_and_counts():
    d = load("pinch")
    rep = validate(d)
    assert rep.ok, rep.failures
    assert len(d.lines) == 1
    assert len(faces(d)) == 2
    assert pinch_lines(d)
    assert gaussian_parity(d, 0) == 0
    assert index_parity(d, 0) == 0


def test_r1pair_valid_and_counts():
    d = load("r1pair")
    rep = validate(d)
    assert rep.ok, rep.failures
    assert len(faces(d)) == 3
    assert gaussian_parity(d, 0) == 0
    assert gaussian_parity_via_paths(d, 0) == 0


def test_unpaired_curve_rejected():
    text = """2gd 1
sphere s0
vertex b0 basepoint s0
curve a+ sign=+ pair=a+ closed path=b0.0
"""
    with pytest.raises(ValidationError) as err:
        build_diagram(text)
    assert any("pairing" in name for name, _, _ in err.value.failures)


def test_cusp_orientation_mismatch_rejected():
    # one curve leaves c0 and the other arrives: condition 3 fails
    text = """2gd 1
sphere s0
vertex c0 cusp s0
vertex c1 cusp s0
curve a+ sign=+ pair=a- open path=c0.0,c1.0
curve a- sign=- pair=a+ open path=c1.1,c0.1
"""
    with pytest.raises(ValidationError) as err:
        build_diagram(text)
    assert any("cond3" in name for name, _, _ in err.value.failures)


def test_parse_error_carries_line():
    with pytest.raises(ParseError) as err:
        parse_document("2gd 1\nsphere s0\nfrobnicate x\n")
    assert err.value.lineno == 3


def test_euler_per_component():
    for name in ("pinch", "r1pair"):
        d = load(name)
        for cl in d.clusters:
            vs = {d.dart_vertex[dd] for dd in cl}
            ne = len(cl) // 2
            nf = len({d.cycle_of[dd] for dd in cl})
            assert len(vs) - ne + nf == 2


def test_serialize_round_trip():
    for name in ("empty", "pinch", "r1pair"):
        d = load(name)
        d2 = build_diagram(serialize(d))
        assert canonical_form(d) == canonical_form(d2)


def test_canonical_relabeling_invariance():
    rng = random.Random(11)
    for name in ("pinch", "r1pair"):
        d = load(name)
        base = canonical_form(d)
        for _ in range(25):
            dr = relabel_random(d, rng)
            assert validate(dr).ok
            assert canonical_form(dr) == base


def test_canonical_distinguishes():
    assert canonical_form(load("pinch")) != canonical_form(load("r1pair"))
    assert canonical_form(load("empty")) != canonical_form(load("pinch"))


def test_normalize_basepoints_drops_extras():
    text = """2gd 1
sphere s0
vertex b0 basepoint s0
vertex b1 basepoint s0
vertex b2 basepoint s0
vertex b3 basepoint s0
curve a+ sign=+ pair=a- closed path=b0.0,b1.0,b2.0
curve a- sign=- pair=a+ closed path=b3.0
region s0 b0.0,b3.1
"""
    d = build_diagram(text)
    dn = normalize_basepoints(d)
    assert validate(dn).ok
    assert len(dn.vertex_kinds) == 2
    single = build_diagram((CORPUS / "r1pair.2gd").read_text())
    assert canonical_form(d) == canonical_form(single)

import random

from hypothesis import given, settings, strategies as st

from twogauss.snf import det_unimodular, mat_mul, smith_normal_form, solve_in_row_space


def check_result(matrix, res):
    s = mat_mul(mat_mul(res.left, matrix), res.right)
    assert [list(r) for r in res.matrix] == s
    n = min(len(s), len(s[0]) if s else 0)
    for i, row in enumerate(s):
        for j, v in enumerate(row):
            if i != j:
                assert v == 0
    diag = [s[i][i] for i in range(n)]
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0
    # zeros trail the nonzero factors
    assert diag[: len(nz)] == nz
    assert det_unimodular(res.left) in (1, -1)
    assert det_unimodular(res.right) in (1, -1)


def test_single_entry():
    res = smith_normal_form([[2]])
    assert res.matrix == ((2,),)
    assert res.factors == (2,)


def test_diag_2_3_gives_1_6():
    res = smith_normal_form([[2, 0], [0, 3]])
    assert res.factors == (1, 6)
    check_result([[2, 0], [0, 3]], res)


def test_zero_and_empty():
    res = smith_normal_form([[0, 0], [0, 0]])
    assert res.factors == ()
    assert smith_normal_form([]).factors == ()
    res = smith_normal_form([[0, 0, 0]])
    assert res.factors == ()


def test_known_rank_deficient():
    m = [[1, -1, 0], [1, 0, -1], [0, 1, -1]]
    res = smith_normal_form(m)
    assert res.factors == (1, 1)
    check_result(m, res)


def test_random_matrices_seeded():
    rng = random.Random(7)
    for _ in range(500):
        rows = rng.randint(1, 10)
        cols = rng.randint(1, 12)
        m = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        check_result(m, smith_normal_form(m))


@settings(max_examples=120, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(min_value=-9, max_value=9), min_size=1, max_size=6),
        min_size=1,
        max_size=6,
    ).filter(lambda rows: len({len(r) for r in rows}) == 1)
)
def test_snf_property(rows):
    check_result(rows, smith_normal_form(rows))


def test_solve_in_row_space():
    rows = [(1, 1, 0), (0, 2, 2)]
    combo = solve_in_row_space(rows, (2, 4, 2))
    assert combo is not None
    total = [0, 0, 0]
    for i, c in combo:
        for j in range(3):
            total[j] += c * rows[i][j]
    assert tuple(total) == (2, 4, 2)
    assert solve_in_row_space(rows, (1, 0, 0)) is None
    assert solve_in_row_space(rows, (0, 1, 1)) is None
    assert solve_in_row_space(rows, (1, 3, 2)) is not None
    assert solve_in_row_space([], (0, 0)) == []
    assert solve_in_row_space([], (1, 0)) is None

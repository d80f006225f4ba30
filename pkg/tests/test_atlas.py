import re

import pytest

from leafatlas.atlas import (
    NotTwistedInvolutionError,
    atlas,
    open_class_element,
    open_leaf_test,
    orbit_class,
    twisted_involutions,
)
from leafatlas.rootsys import (
    enumerate_weyl,
    from_word,
    length,
    longest_element,
    mat_trace,
    multiply,
    reflect,
)
from leafatlas.satake import builtin_catalog, catalog_by_label, real_form_data

BY_LABEL = catalog_by_label()


def setup_form(label):
    sd = BY_LABEL[label]
    return sd.root_system(), real_form_data(sd)


# ---------------------------------------------------------------------------
# twisted involutions

def test_twisted_involutions_rank_one():
    rs, rf = setup_form("sl(2,R)")
    words = sorted(w.word for w in twisted_involutions(rf, rs))
    assert words == [(), (1,)]


def test_twisted_involutions_su21():
    rs, rf = setup_form("su(2,1)")
    words = sorted(w.word for w in twisted_involutions(rf, rs))
    assert words == [(), (1, 2), (1, 2, 1), (2, 1)]


def test_twisted_involutions_sl3_are_ordinary_involutions():
    # independent oracle: with trivial involution these are the involutions
    # of the symmetric group on three letters
    rs, rf = setup_form("sl(3,R)")
    got = {w.matrix for w in twisted_involutions(rf, rs)}
    expected = {
        w.matrix
        for w in enumerate_weyl(rs)
        if multiply(rs, w, w).matrix == from_word(rs, ()).matrix
    }
    assert got == expected
    assert len(got) == 4


def test_not_twisted_involution_rejected():
    rs, rf = setup_form("su(2,1)")
    with pytest.raises(NotTwistedInvolutionError):
        orbit_class(rf, rs, reflect(rs, 1))


# ---------------------------------------------------------------------------
# per-class invariants

def test_orbit_class_sl2_open():
    rs, rf = setup_form("sl(2,R)")
    cls = orbit_class(rf, rs, reflect(rs, 1))
    assert (cls.codim_Y, cls.a, cls.t) == (0, 0, 1)
    assert cls.leaf_dim == 2 and cls.is_open and cls.family_dim == 0


def test_orbit_class_sl2_closed():
    rs, rf = setup_form("sl(2,R)")
    cls = orbit_class(rf, rs, from_word(rs, ()))
    assert (cls.codim_Y, cls.a, cls.t) == (1, 1, 0)
    assert cls.leaf_dim == 0 and cls.family_dim == 1 and cls.is_closed_class


def test_orbit_class_su21_middle():
    rs, rf = setup_form("su(2,1)")
    cls = orbit_class(rf, rs, from_word(rs, (1, 2)))
    assert (cls.codim_Y, cls.a, cls.t) == (1, 1, 1)
    assert cls.leaf_dim == 2 and cls.leaf_codim == 2


def test_orbit_class_sl3_longest():
    rs, rf = setup_form("sl(3,R)")
    cls = orbit_class(rf, rs, longest_element(rs))
    assert cls.codim_Y == 0 and cls.a == 1
    assert cls.leaf_codim == 1 and not cls.is_open


# ---------------------------------------------------------------------------
# open-leaf criterion with the compact-rank oracle

def _compact_rank(label):
    """Independent oracle: rank of the maximal compact subalgebra."""
    if m := re.fullmatch(r"sl\((\d+),R\)", label):
        return int(m.group(1)) // 2  # so(n)
    if m := re.fullmatch(r"su\((\d+),(\d+)\)", label):
        p, q = map(int, m.groups())
        return p + q - 1  # s(u(p)+u(q))
    if m := re.fullmatch(r"so\((\d+),(\d+)\)", label):
        p, q = map(int, m.groups())
        return p // 2 + q // 2  # so(p)+so(q)
    if m := re.fullmatch(r"sp\((\d+),R\)", label):
        return int(m.group(1))  # u(n)
    if m := re.fullmatch(r"sp\((\d+),(\d+)\)", label):
        p, q = map(int, m.groups())
        return p + q  # sp(p)+sp(q)
    if m := re.fullmatch(r"su\*\((\d+)\)", label):
        return int(m.group(1)) // 2  # sp(n)
    if m := re.fullmatch(r"so\*\((\d+)\)", label):
        return int(m.group(1)) // 2  # u(n)
    raise AssertionError(label)


@pytest.mark.parametrize("sd", builtin_catalog(), ids=lambda s: s.label)
def test_open_leaf_criterion_against_rank_oracle(sd):
    # open leaves exist iff the compact rank equals the absolute rank
    rs = sd.root_system()
    rf = real_form_data(sd)
    expected = _compact_rank(sd.label) == rs.rank
    assert open_leaf_test(rf, rs) == expected


def test_open_leaf_named_examples():
    for label, expected in [
        ("sl(2,R)", True), ("su(2,1)", True), ("su(1,1)", True), ("sl(3,R)", False),
    ]:
        rs, rf = setup_form(label)
        assert open_leaf_test(rf, rs) == expected


# ---------------------------------------------------------------------------
# full reports

def test_atlas_sl2():
    report = atlas(BY_LABEL["sl(2,R)"])
    assert len(report.classes) == 2 and report.has_open_leaves
    assert report.classes[report.largest_leaf_class].is_open


def test_atlas_su21():
    report = atlas(BY_LABEL["su(2,1)"])
    assert len(report.classes) == 4 and report.has_open_leaves
    top = report.classes[report.largest_leaf_class]
    assert top.leaf_dim == 4 == report.form.dim_x and top.family_dim == 0


def test_atlas_sl3():
    report = atlas(BY_LABEL["sl(3,R)"])
    assert len(report.classes) == 4 and not report.has_open_leaves
    assert report.min_leaf_codim() == 1
    top = report.classes[report.largest_leaf_class]
    assert top.psi.matrix == longest_element(BY_LABEL["sl(3,R)"].root_system()).matrix


def test_atlas_sorted_and_unique_closed():
    report = atlas(BY_LABEL["su(2,1)"])
    keys = [(c.codim_Y, c.psi_word) for c in report.classes]
    assert keys == sorted(keys)
    assert sum(c.is_closed_class for c in report.classes) == 1


@pytest.mark.parametrize("label", ["sl(2,R)", "su(2,1)", "sl(3,R)", "so(4,1)", "so*(8)"])
def test_unique_codim_zero_class_and_max_at_identity(label):
    sd = BY_LABEL[label]
    rs = sd.root_system()
    rf = real_form_data(sd)
    classes = [orbit_class(rf, rs, psi) for psi in twisted_involutions(rf, rs)]
    zero = [c for c in classes if c.codim_Y == 0]
    assert len(zero) == 1
    assert zero[0].psi == open_class_element(rf, rs)
    # the identity class attains the maximal codimension among classes that
    # can carry leaves (flagged classes may formally exceed it)
    wmax = length(rs, longest_element(rs)) - length(rs, rf.w_b)
    closed = [c for c in classes if c.is_closed_class]
    assert closed[0].codim_Y == wmax
    assert wmax == max(c.codim_Y for c in classes if c.realizable_candidate)


@pytest.mark.parametrize("label", ["su(2,1)", "sl(3,R)", "sp(1,1)", "su*(4)"])
def test_trace_cross_check(label):
    sd = BY_LABEL[label]
    rs = sd.root_system()
    rf = real_form_data(sd)
    from leafatlas.atlas import twisted_matrix

    for psi in twisted_involutions(rf, rs):
        cls = orbit_class(rf, rs, psi)
        assert cls.a - cls.t == mat_trace(twisted_matrix(rf, psi))
        assert cls.a + cls.t == rs.rank
        assert cls.leaf_codim == cls.a + cls.codim_Y


def test_flagged_classes_are_retained():
    report = atlas(BY_LABEL["su(3,1)"])
    flagged = [c for c in report.classes if not c.realizable_candidate]
    assert any(c.psi_word == (2,) and c.leaf_dim == -2 for c in flagged)
    assert not report.classes[report.largest_leaf_class] in flagged


def test_open_implies_full_dimension():
    for sd in builtin_catalog():
        report = atlas(sd)
        for c in report.classes:
            if c.is_open:
                assert c.leaf_dim == report.form.dim_x and c.family_dim == 0

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selectorkit.billiards import (Disk, Ellipse, RoundedSquare, StarShaped2D, SuperEllipse, _make, _polish,
                                   lift_length_check, parse_domain, reflection_residual, shortest_periodic, to_svg,
                                   viterbo_bound_check)
from selectorkit.exceptions import InputError


def test_disk_diameter():
    tr = shortest_periodic(Disk(1.0), range(2, 7), restarts=32)
    assert tr.m == 2 and tr.length == pytest.approx(4.0, abs=1e-9)
    assert tr.max_residual <= 1e-7


def test_ellipse_minor_axis():
    tr = shortest_periodic(Ellipse(2.0, 1.0), range(2, 7), restarts=32)
    assert tr.m == 2 and tr.length == pytest.approx(4.0, abs=1e-9)
    assert np.allclose(np.abs(tr.points[:, 0]), 0.0, atol=1e-7)


def test_rounded_square():
    tr = shortest_periodic(RoundedSquare(1.0, 0.02), range(2, 7), restarts=32)
    assert tr.length == pytest.approx(2.0, abs=0.02)


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_length_is_homogeneous(lam):
    a = shortest_periodic(Disk(1.0), range(2, 5), restarts=16).length
    b = shortest_periodic(Disk(1.0).scaled(lam), range(2, 5), restarts=16).length
    assert b == pytest.approx(lam * a, rel=1e-12)


def test_diameter_bounce_has_zero_residual():
    tr = _make(Disk(1.0), np.array([0.1, 0.6]), 2)
    assert np.max(reflection_residual(tr, Disk(1.0))) < 1e-14


def test_equilateral_triangle_has_zero_residual():
    tr = _make(Disk(1.0), np.array([0.0, 1 / 3, 2 / 3]), 3)
    assert np.max(reflection_residual(tr, Disk(1.0))) < 1e-14
    assert tr.length == pytest.approx(3 * np.sqrt(3))


def test_perturbed_vertex_is_repaired():
    U = Ellipse(1.5, 1.0)
    t = np.array([0.0, 1 / 3, 2 / 3])
    t_bad = t + np.array([0.0, 0.02, 0.0])
    before = np.max(reflection_residual(_make(U, t_bad, 3), U))
    assert before > 1e-3
    after = np.max(reflection_residual(_make(U, _polish(U, t_bad), 3), U))
    assert after < before and after < 1e-10


def test_lift_equalities():
    tr = shortest_periodic(Disk(1.0), range(2, 4), restarts=8)
    rep = lift_length_check(tr)
    assert rep["equality"] and rep["lift"] == pytest.approx(tr.length)
    rep = lift_length_check(tr, 1.3)
    assert rep["lift"] == pytest.approx(1.3 * tr.length)


@settings(max_examples=15)
@given(st.floats(0.0, 2.0), st.floats(0.0, 1.0), st.integers(1, 5))
def test_lift_inequality(base, amp, k):
    tr = _make(Ellipse(1.5, 1.0), np.array([0.05, 0.4, 0.7]), 3)
    rep = lift_length_check(tr, lambda s: 1.0 + base + amp * np.sin(2 * np.pi * k * s) ** 2)
    assert rep["inequality"] and rep["lift"] >= tr.length - 1e-12


def test_viterbo_disk():
    rep = viterbo_bound_check(Disk(1.0), m_range=range(2, 5), restarts=16)
    assert rep["length"] == pytest.approx(4.0, abs=1e-9)
    assert rep["ratios"][0] == pytest.approx(4 / np.sqrt(np.pi), rel=1e-9)
    assert rep["ratio_spread"] < 1e-9
    assert rep["bound_ok"] and rep["ok"]


def test_square_ratio_limit():
    U = RoundedSquare(1.0, 0.01)
    rep = viterbo_bound_check(U, m_range=range(2, 5), restarts=16)
    assert rep["ratios"][0] == pytest.approx(2.0, abs=0.03)


def test_parse_domains():
    assert isinstance(parse_domain("disk:r=2"), Disk)
    assert isinstance(parse_domain("ellipse:a=2,b=1"), Ellipse)
    assert isinstance(parse_domain("superellipse:a=1,b=1,p=4"), SuperEllipse)
    assert isinstance(parse_domain("square:side=1"), RoundedSquare)
    for bad in ("disk:r=-1", "blob", "superellipse:a=1,b=1,p=0.5"):
        with pytest.raises(InputError):
            parse_domain(bad)


def test_nonconvex_domain_rejects_outside_chords():
    U = StarShaped2D.from_function(lambda th: 1 + 0.35 * np.cos(3 * th))
    tr = shortest_periodic(U, range(2, 5), restarts=32)
    P = tr.points
    s = np.linspace(0, 1, 50)[1:-1, None]
    for a, b in zip(P, np.roll(P, -1, axis=0)):
        assert np.all(U.contains(a * (1 - s) + b * s, tol=1e-9))


def test_svg_output(tmp_path):
    U = Disk(1.0)
    tr = shortest_periodic(U, range(2, 4), restarts=8)
    path = tmp_path / "b.svg"
    to_svg(U, tr, path)
    text = path.read_text()
    assert text.startswith("<svg") and text.count("<path") == 2


def test_rejects_bad_bounce_counts():
    with pytest.raises(InputError):
        shortest_periodic(Disk(1.0), range(0, 2))

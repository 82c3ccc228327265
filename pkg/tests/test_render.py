import re

import pytest

from cmif.io import FIXTURES
from cmif.render import render_svg


def test_xxxx_one_rect_one_line(fx):
    svg = render_svg(fx("xxxx"))
    assert svg.count("<rect") == 1 and svg.count("<line") == 1


def test_xxx_truncation_5(fx):
    assert render_svg(fx("xxx"), depth=5).count("<line") == 7


def test_identity_one_line(fx):
    assert render_svg(fx("identity")).count("<line") == 1


@pytest.mark.parametrize("name", FIXTURES)
def test_deterministic_and_self_contained(fx, name):
    a, b = render_svg(fx(name)), render_svg(fx(name))
    assert a == b
    assert a.startswith("<svg") and a.rstrip().endswith("</svg>")
    assert "<path" in a  # axis frame
    assert "href" not in a and "url(" not in a
    for num in re.findall(r'="(-?\d+\.\d+)"', a):
        assert len(num.split(".")[1]) <= 6


def test_scaled_domain_fills_the_frame(fx):
    svg = render_svg(fx("bennet_scaled"), width=200, height=100)
    assert 'width="200"' in svg
    xs = [float(v) for v in re.findall(r'x[12]="([\d.]+)"', svg)]
    assert min(xs) >= 20 and max(xs) <= 180

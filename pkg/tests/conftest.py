import math

import pytest

from wavetrap.dispersion import SPEED_OF_LIGHT, LineModel
from wavetrap.network import Trapper

INCH = 0.0254
ER = 3.38
A_SIW = 0.01778  # 0.7 in
L1 = 0.4 * INCH
L2 = 4.0 * INCH
LT = L1 + L2
# TEM round-trip resonance spacing c / (sqrt(er) (L1 + L2))
TEM_PERIOD = SPEED_OF_LIGHT / (math.sqrt(ER) * LT)


@pytest.fixture
def tem():
    return LineModel.tem(ER)


@pytest.fixture
def siw():
    return LineModel.waveguide(A_SIW, ER)


def tem_trapper(k, **kw):
    return Trapper.single(LineModel.tem(ER), L1, k, L2, **kw)


def siw_trapper(k, tan_delta=0.0, **kw):
    return Trapper.single(LineModel.waveguide(A_SIW, ER, tan_delta), L1, k, L2, **kw)

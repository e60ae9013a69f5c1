import cmath
import math

import pytest

from bnftrace.blocks import (COMPLEX_HYPERBOLIC, ELLIPTIC, REAL_HYPERBOLIC,
                             SpectrumBlocks, nonresonance_witness,
                             require_nonresonant)
from bnftrace.errors import ResonanceError, SchemaError
from bnftrace.fields import FloatField, RationalField

FF = FloatField()
FR = RationalField()


def test_count_identity():
    b = SpectrumBlocks.from_mu(FF, [
        (COMPLEX_HYPERBOLIC, 1 + 1j), (COMPLEX_HYPERBOLIC, 1 - 1j),
        (REAL_HYPERBOLIC, math.log(2)), (ELLIPTIC, 1j),
    ])
    assert b.n == 4
    assert b.n_e + b.n_rh + 2 * b.n_ch == b.n


def test_elliptic_theta_range_enforced():
    with pytest.raises(SchemaError):
        SpectrumBlocks.from_mu(FF, [(ELLIPTIC, -0.5j)])
    with pytest.raises(SchemaError):
        SpectrumBlocks.from_mu(FF, [(ELLIPTIC, 3.5j)])  # theta > pi


def test_rh_positive_enforced():
    with pytest.raises(SchemaError):
        SpectrumBlocks.from_mu(FF, [(REAL_HYPERBOLIC, -0.2)])


def test_ch_pairing_enforced():
    with pytest.raises(SchemaError):
        SpectrumBlocks.from_mu(FF, [(COMPLEX_HYPERBOLIC, 1 + 1j)])
    with pytest.raises(SchemaError):
        SpectrumBlocks.from_mu(FF, [(COMPLEX_HYPERBOLIC, 1 + 1j),
                                    (COMPLEX_HYPERBOLIC, 1 + 1j)])


def test_mu_roundtrip_through_exp_half():
    b = SpectrumBlocks.from_mu(FF, [(REAL_HYPERBOLIC, math.log(3)),
                                    (ELLIPTIC, 0.7j)])
    mus = b.mu()
    assert abs(mus[0] - math.log(3)) < 1e-14
    assert abs(mus[1] - 0.7j) < 1e-14


def test_rational_blocks_exact():
    b = SpectrumBlocks(FR, [REAL_HYPERBOLIC], [FR.from_int(2)])
    assert b.exp_half[0] == FR.from_int(2)


def test_canonical_order():
    b = SpectrumBlocks.from_mu(FF, [
        (ELLIPTIC, 1j), (REAL_HYPERBOLIC, math.log(2)),
        (COMPLEX_HYPERBOLIC, 1 + 1j), (COMPLEX_HYPERBOLIC, 1 - 1j),
    ])
    perm = b.canonical_order()
    c = b.reordered(perm)
    assert c.tags == (COMPLEX_HYPERBOLIC, COMPLEX_HYPERBOLIC,
                      REAL_HYPERBOLIC, ELLIPTIC)


def test_resonance_witness_exact_case():
    w = nonresonance_witness([2j * math.pi / 3], 3)
    assert w == ((3,), 1)


def test_nonresonant_pair_passes_order_10():
    assert nonresonance_witness([1j, math.sqrt(2) * 1j], 10) is None


def test_hyperbolic_always_nonresonant():
    assert nonresonance_witness([math.log(2)], 40) is None


def test_require_nonresonant_raises_with_witness():
    b = SpectrumBlocks.from_mu(FF, [(ELLIPTIC, 2j * math.pi / 3)])
    with pytest.raises(ResonanceError) as exc:
        require_nonresonant(b, 3)
    assert exc.value.witness == ((3,), 1)
    assert "k=[3]" in str(exc.value)

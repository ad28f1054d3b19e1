import numpy as np
import pytest
from hypothesis import given, strategies as st

from funcmart.errors import DomainViolation
from funcmart.functions import (
    AbelKernel,
    AbelTriple,
    AbsoluteValue,
    Affine,
    Cubic,
    Exponential,
    Linear,
    Logarithmic,
    Power,
    Quadratic,
    Tabulated,
    Zero,
    expand_abel_triple,
)
from funcmart.simulate import SimConfig, generate
from funcmart.transforms import (
    FofExpW,
    FofW,
    GLeft,
    GRight,
    KLeft,
    KRight,
    LogFofExpW,
    LogFofW,
    ShiftScale,
    TransformedFunction,
    apply,
    build,
    continuity_defect,
    parse_transform,
    zero_at_zero,
)


@pytest.fixture(scope="module")
def ens():
    return generate(SimConfig(42, 2_000, (0.25, 0.5, 1.0)))


@pytest.mark.parametrize(
    "transform, spec, c",
    [(LogFofW(), Exponential(3.0), 3.0), (FofExpW(), Logarithmic(2.0), 2.0), (LogFofExpW(), Power(0.5), 0.5)],
)
def test_reductions_to_linear_core(ens, transform, spec, c):
    proc = build(transform, spec, ens)
    assert not proc.degenerate
    assert np.allclose(proc.values, c * ens.values, rtol=0, atol=1e-12 * (1 + np.abs(ens.values).max()))
    assert zero_at_zero(proc)


def test_composition_identities_pointwise():
    u = np.random.default_rng(0).uniform(-5, 5, 100_000)
    for c in (-2.0, 0.5, 3.0):
        ref = apply(FofW(), Linear(c), u)
        assert np.max(np.abs(apply(LogFofW(), Exponential(c), u) - ref)) <= 1e-12 * (1 + np.abs(ref).max())
        assert np.max(np.abs(apply(FofExpW(), Logarithmic(c), u) - ref)) <= 1e-12 * (1 + np.abs(ref).max())
        assert np.max(np.abs(apply(LogFofExpW(), Power(c), u) - ref)) <= 1e-12 * (1 + np.abs(ref).max())


def test_log_of_linear_is_degenerate_with_witness(ens):
    proc = build(LogFofW(), Linear(1.0), ens)
    assert proc.degenerate
    w = proc.witness
    assert w["w"] <= 0
    assert ens.values[w["path"], ens.times.index(w["time"])] == w["w"]


def test_zero_under_log_transforms_is_degenerate(ens):
    # Zero is never positive, so either log transform is undefined everywhere
    assert build(LogFofExpW(), Zero(), ens).degenerate
    assert build(LogFofW(), Zero(), ens).degenerate


def test_out_of_range_tabulated_is_degenerate(ens):
    proc = build(FofW(), Tabulated(((-0.1, 0.0), (0.1, 1.0))), ens)
    assert proc.degenerate


@pytest.mark.parametrize(
    "transform, spec, expected",
    [
        (FofW(), Linear(3.0), True),
        (FofW(), Affine(1.0, 1.0), False),
        (FofExpW(), Logarithmic(5.0), True),
        (LogFofExpW(), Power(2.0), True),
        (LogFofW(), Affine(1.0, 2.0), False),
        (ShiftScale(1.0, 2.0), Linear(1.0), False),
    ],
)
def test_zero_at_zero(ens, transform, spec, expected):
    assert zero_at_zero(build(transform, spec, ens)) is expected


def test_shift_scale_identity_is_fofw(ens):
    for g in (Cubic(), Quadratic(2.0), AbsoluteValue()):
        assert np.array_equal(build(ShiftScale(0.0, 1.0), g, ens).values, build(FofW(), g, ens).values)


def test_shift_scale_values(ens):
    proc = build(ShiftScale(-3.0, 0.5), Cubic(), ens)
    x = -3.0 + 0.5 * ens.values
    assert np.array_equal(proc.values, x * x * x)


def test_kleft_of_abel_triple_is_bilinear(ens):
    a, d = 2.0, 1.0
    f, h, _ = expand_abel_triple(AbelTriple(a, d, -0.5))
    for y in (-2.0, 1.0, 3.0):
        proc = build(KLeft(y), (f, h), ens)
        assert np.allclose(proc.values, a * y * ens.values + d, rtol=0, atol=1e-12 * 50)
        proc = build(KRight(y), AbelKernel(f, h), ens)
        assert np.allclose(proc.values, a * y * ens.values + d, rtol=0, atol=1e-12 * 50)


def test_g_transforms(ens):
    lam = 1.5
    for x in (-2.0, 3.0):
        for t in (GLeft(x), GRight(x)):
            proc = build(t, Quadratic(lam), ens)
            assert np.allclose(proc.values, 2 * lam * x * ens.values, rtol=0, atol=1e-12 * 100)


def test_values_match_pointwise_transform(ens):
    proc = build(FofExpW(), Power(2.0), ens)
    assert np.array_equal(proc.values, np.power(np.exp(ens.values), 2.0))
    assert proc.conditioning is ens.values
    assert proc.times == ens.times


def test_transform_type_checks():
    with pytest.raises(TypeError):
        KLeft(1.0).coerce(Linear(1.0))
    with pytest.raises(TypeError):
        FofW().coerce(AbelKernel(Linear(1.0), Linear(1.0)))


def test_apply_raises_on_domain_violation():
    with pytest.raises(DomainViolation):
        apply(LogFofW(), Linear(1.0), np.array([1.0, -1.0]))


@pytest.mark.parametrize(
    "text, transform",
    [
        ("fofw", FofW()),
        ("log-fofw", LogFofW()),
        ("fofexpw", FofExpW()),
        ("log-fofexpw", LogFofExpW()),
        ("shift-scale:x0=1,sigma=2", ShiftScale(1.0, 2.0)),
        ("kleft:y=-2", KLeft(-2.0)),
        ("kright:x=3", KRight(3.0)),
        ("gleft:y=1", GLeft(1.0)),
        ("gright:x=1", GRight(1.0)),
    ],
)
def test_parse_transform(text, transform):
    assert parse_transform(text) == transform


@pytest.mark.parametrize("text", ["nope", "kleft:x=1", "shift-scale:sigma=a"])
def test_parse_transform_rejects(text):
    with pytest.raises(ValueError):
        parse_transform(text)


@pytest.mark.parametrize(
    "spec, continuous",
    [
        (Linear(2.0), True),
        (AbsoluteValue(), True),
        (Cubic(), True),
        (Tabulated(((-6.0, 0.0), (0.0, 0.0), (1e-9, 1.0), (6.0, 1.0))), False),
    ],
)
def test_continuity_defect(spec, continuous):
    assert continuity_defect(FofW(), spec)["continuous"] is continuous


def test_continuity_of_undefined_map_fails():
    assert not continuity_defect(LogFofW(), Linear(1.0))["continuous"]


@given(st.floats(-3, 3), st.floats(-5, 5))
def test_transformed_function_matches_core(c, u):
    tf = TransformedFunction(LogFofExpW(), Power(c))
    assert tf(u) == pytest.approx(c * u, abs=1e-12 * (1 + abs(c * u)))
    assert tf.text == f"LogFofExpW[{Power(c).text}]"

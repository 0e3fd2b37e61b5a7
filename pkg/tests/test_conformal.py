import numpy as np
import pytest

from gradsol.conformal import (
    bach,
    bach_via_d_residual,
    conformal_pack,
    cotton,
    cotton_weyl_divergence_residual,
    d_decomposition_residual,
    d_tensor,
    div_bach_residual,
    einstein_tensor,
    schouten,
    weyl,
)
from gradsol.curvature import curvature_pack
from gradsol.errors import InsufficientOrderError, UnsupportedDimensionError
from gradsol.solitons import sample_points
from gradsol.tensors import tensor_norm_sq


def test_schouten_flat(geometry):
    _, _, pack, _ = geometry("gaussian-r4", [1.0, 0.4, -0.3, 0.2], 4)
    assert schouten(pack, 4).max_abs(all_coeffs=True) == 0.0


def test_schouten_round_sphere(geometry):
    _, m, pack, _ = geometry("sphere-s4", [0.5, -0.2, 0.3, 0.1], 4)
    a = schouten(pack, 4)
    g = m.g.truncated(a.order)
    assert np.abs(a.data - g.data / 6.0).max() < 1e-11


def test_schouten_trace_cylinder(geometry):
    _, m, pack, _ = geometry("cylinder-s3xr", [0.2, 0.5, -0.3, 1.4], 4)
    a = schouten(pack, 4)
    trace = np.einsum("ij,ij->", m.g_inv.values, a.values)
    # R (n-2)/(2(n-1)) with R = 3/2, n = 4
    assert abs(trace - 0.5) < 1e-12


def test_schouten_dimension_guard(geometry):
    _, _, pack, _ = geometry("gaussian-r3", [1.0, 0.2, 0.3], 3)
    with pytest.raises(UnsupportedDimensionError):
        schouten(pack, 2)


def test_einstein_tensor(geometry):
    _, m, pack, _ = geometry("sphere-s4", [0.1, 0.2, 0.3, -0.2], 4)
    e = einstein_tensor(pack)
    g = m.g.truncated(e.order).values
    # R_ij = g/2, R = 2: E = g/2 - g = -g/2
    assert np.abs(e.values + 0.5 * g).max() < 1e-11


def test_weyl_vanishes_dimension_three():
    # any 3-manifold: the totally trace-free curvature part is identically
    # zero; check on a genuinely curved metric so the test is not vacuous
    def curved3(xs):
        return [
            [1.0 + 0.2 * xs[1] * xs[1], 0.05 * xs[2] * xs[2], 0.0],
            [0.0, 1.0 + 0.1 * xs[2] * xs[2] * xs[2], 0.0],
            [0.0, 0.0, 1.0 + 0.15 * xs[0] * xs[0]],
        ]

    from gradsol.tensors import metric_at_point

    m = metric_at_point(curved3, [0.4, -0.7, 0.9], 3, 4)
    pack = curvature_pack(m)
    assert pack.riemann.max_abs() > 1e-3  # non-flat
    assert weyl(pack, 3).max_abs(all_coeffs=True) < 1e-9


def test_weyl_vanishes_on_cylinder(geometry, instances):
    inst = instances["cylinder-s3xr"]
    for p in sample_points(inst, 6, seed=5):
        _, m, pack, _ = geometry("cylinder-s3xr", list(p), 4)
        assert weyl(pack, 4).max_abs() < 1e-9


def test_weyl_vanishes_s2xr_three_manifold(geometry, instances):
    # the 2-sphere-times-line shrinker: curved, dimension three
    inst = instances["cylinder-s2xr"]
    for p in sample_points(inst, 6, seed=5):
        _, m, pack, _ = geometry("cylinder-s2xr", list(p), 4)
        assert pack.riemann.max_abs() > 1e-2
        assert weyl(pack, 3).max_abs() < 1e-9


def test_weyl_norm_s2xr2(instances):
    inst = instances["s2xr2"]
    for p in sample_points(inst, 8, seed=5):
        m = inst.metric_at(p, 3)
        pack = curvature_pack(m)
        w = weyl(pack, 4)
        assert tensor_norm_sq(w, m) > 0.1
    # exact value from the product structure
    m = inst.metric_at([0.0, 0.0, 2.0, 0.0], 3)
    pack = curvature_pack(m)
    assert abs(tensor_norm_sq(weyl(pack, 4), m) - 1.0 / 3.0) < 1e-12


def test_cotton_zero_on_einstein_and_products(geometry):
    for name, p in [
        ("sphere-s4", [0.4, 0.1, -0.3, 0.2]),
        ("sphere-s5", [0.2, 0.1, 0.4, -0.1, 0.3]),
        ("s2xr2", [0.3, -0.2, 1.8, 0.6]),
    ]:
        _, _, pack, _ = geometry(name, p, 4)
        n = pack.dim
        assert cotton(pack, n).max_abs() < 1e-9, name


def test_cotton_weyl_divergence_on_curved_metric(geometry):
    # the relation holds for arbitrary metrics and is non-vacuous on the
    # perturbed control, where the Cotton tensor is order 1e-2
    _, _, pack, _ = geometry("perturbed-non-soliton-r4", [1.0, -0.8, 1.2, 0.7], 5)
    c = cotton(pack, 4)
    w = weyl(pack, 4)
    r = cotton_weyl_divergence_residual(pack, c, w, 4)
    assert r["cotton_max"] > 1e-3
    assert r["residual"] / max(1.0, r["scale"]) < 1e-8


def test_cotton_weyl_divergence_all_certified(instances, geometry):
    for inst in instances.values():
        if inst.kind is None or inst.n < 4:
            continue
        p = list(inst.base_point)
        _, _, pack, _ = geometry(inst.name, p, 4)
        c = cotton(pack, inst.n)
        w = weyl(pack, inst.n)
        r = cotton_weyl_divergence_residual(pack, c, w, inst.n)
        assert r["residual"] / max(1.0, r["scale"]) < 1e-8, inst.name


def test_bach_zero_on_einstein_and_conformally_flat(geometry):
    for name, p in [
        ("sphere-s4", [0.4, 0.1, -0.3, 0.2]),
        ("cylinder-s3xr", [0.3, -0.2, 0.5, 2.0]),
    ]:
        _, _, pack, _ = geometry(name, p, 4)
        w = weyl(pack, 4)
        c = cotton(pack, 4)
        assert bach(pack, c, w, 4).max_abs() < 1e-8, name


def test_bach_zero_exactly_on_flat(geometry):
    _, _, pack, _ = geometry("gaussian-r4", [1.5, 0.2, -0.7, 0.4], 4)
    w = weyl(pack, 4)
    c = cotton(pack, 4)
    assert bach(pack, c, w, 4).max_abs(all_coeffs=True) == 0.0


def test_bach_dimension_guard(geometry):
    _, _, pack, _ = geometry("gaussian-r3", [1.0, 0.2, 0.3], 4)
    w = weyl(pack, 3)
    c = cotton(pack, 3)
    with pytest.raises(UnsupportedDimensionError):
        bach(pack, c, w, 3)


def test_d_tensor_values(geometry):
    for name, p in [("sphere-s4", [0.4, 0.1, -0.3, 0.2]), ("cylinder-s3xr", [0.3, -0.2, 0.5, 2.0])]:
        inst, m, pack, f = geometry(name, p, 4)
        d = d_tensor(pack, f, 4, cross_check=True)
        assert d.max_abs() < 1e-9, name
    inst, m, pack, f = geometry("s2xr2", [0.0, 0.0, 2.0, 0.0], 4)
    d = d_tensor(pack, f, 4, cross_check=True)
    assert abs(tensor_norm_sq(d, m) - 1.0 / 12.0) < 1e-8


def test_d_decomposition(geometry, instances):
    # flat/Einstein: all three terms vanish; on the curved product the
    # Cotton tensor vanishes so D must match the conformal term alone
    _, m, pack, f = geometry("gaussian-r4", [1.0, 0.4, -0.3, 0.2], 4)
    d = d_tensor(pack, f, 4)
    r = d_decomposition_residual(d, cotton(pack, 4), weyl(pack, 4), f, m)
    assert r["residual"] == 0.0

    inst = instances["s2xr2"]
    for p in sample_points(inst, 6, seed=21):
        _, m, pack, f = geometry("s2xr2", list(p), 4)
        d = d_tensor(pack, f, 4)
        c = cotton(pack, 4)
        w = weyl(pack, 4)
        r = d_decomposition_residual(d, c, w, f, m)
        assert r["residual"] < 1e-8
        assert c.max_abs() < 1e-9
        assert d.max_abs() > 1e-3  # non-vacuous: D equals the W-term


def test_d_cotton_contraction(geometry, instances):
    # contracting with grad f erases the D/C difference even where D != 0
    from gradsol.conformal import d_cotton_contraction_residual

    inst = instances["s2xr2"]
    for p in sample_points(inst, 6, seed=43):
        _, m, pack, f = geometry("s2xr2", list(p), 4)
        d = d_tensor(pack, f, 4)
        c = cotton(pack, 4)
        r = d_cotton_contraction_residual(d, c, f, m)
        assert d.max_abs() > 1e-3
        assert r["residual"] < 1e-9


def test_bach_via_d(geometry, instances):
    inst = instances["s2xr2"]
    seen_nonzero = False
    for p in sample_points(inst, 6, seed=33):
        _, m, pack, f = geometry("s2xr2", list(p), 5)
        w = weyl(pack, 4)
        c = cotton(pack, 4)
        b = bach(pack, c, w, 4)
        d = d_tensor(pack, f, 4)
        r = bach_via_d_residual(b, d, c, f, pack, 4)
        assert r["residual"] / max(1.0, r["scale"]) < 1e-8
        if r["bach_max"] > 1e-3 and r["d_divergence_max"] > 1e-3:
            seen_nonzero = True
    assert seen_nonzero

    for name, p in [("cylinder-s3xr", [0.3, -0.2, 0.5, 2.0]), ("gaussian-r4", [1.2, 0.5, -0.3, 0.8])]:
        _, m, pack, f = geometry(name, p, 5)
        w = weyl(pack, 4)
        c = cotton(pack, 4)
        b = bach(pack, c, w, 4)
        d = d_tensor(pack, f, 4)
        r = bach_via_d_residual(b, d, c, f, pack, 4)
        assert r["residual"] < 1e-9, name


def test_div_bach_dimension_four_general(geometry):
    # at n = 4 the divergence of the Bach tensor vanishes for any metric;
    # the perturbed control makes this non-vacuous (nonzero Bach tensor)
    _, _, pack, _ = geometry("perturbed-non-soliton-r4", [1.1, -0.9, 0.8, 1.3], 5)
    w = weyl(pack, 4)
    c = cotton(pack, 4)
    b = bach(pack, c, w, 4)
    r = div_bach_residual(b, c, pack, 4)
    assert r["bach_max"] > 1e-3
    assert r["rhs_max"] == 0.0
    assert r["lhs_max"] < 1e-7


def test_div_bach_dimension_five_two_sided(geometry):
    _, _, pack, _ = geometry("perturbed-non-soliton-r5", [1.0, -0.8, 1.2, 0.7, -1.1], 5)
    w = weyl(pack, 5)
    c = cotton(pack, 5)
    b = bach(pack, c, w, 5)
    r = div_bach_residual(b, c, pack, 5)
    assert r["residual"] / max(1.0, r["scale"]) < 1e-7
    assert r["lhs_max"] > 1e-4 and r["rhs_max"] > 1e-4


def test_div_bach_requires_full_order(geometry):
    _, _, pack, _ = geometry("cylinder-s3xr", [0.3, -0.2, 0.5, 2.0], 4)
    w = weyl(pack, 4)
    c = cotton(pack, 4)
    b = bach(pack, c, w, 4)
    with pytest.raises(InsufficientOrderError):
        div_bach_residual(b, c, pack, 4)


def test_conformal_pack_assembly(geometry):
    inst, m, pack, f = geometry("s2xr2", [0.2, 0.1, 1.6, 0.5], 5)
    cp = conformal_pack(pack, f, 4, cross_check_d=True)
    assert cp.bach is not None
    assert cp.weyl.valence == "dddd"
    assert cp.dtensor.valence == "ddd"
    # symmetry of the rank-2 members
    for t in (cp.schouten, cp.einstein, cp.bach):
        assert np.abs(t.values - t.values.T).max() < 1e-9

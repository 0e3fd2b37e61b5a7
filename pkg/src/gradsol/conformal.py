"""Conformal-curvature tensors and the residual forms of their identities.

Each tensor that admits two textbook expressions is computed along *both*
and the paths must agree; a disagreement raises :class:`ConsistencyError`.
Residual operations evaluate the two sides of an identity independently
and return the worst component mismatch together with the magnitude of
each side, so callers can confirm a check was not vacuous.
"""

from dataclasses import dataclass

import numpy as np

from .curvature import covariant_derivative, scalar_gradient
from .errors import ConsistencyError, UnsupportedDimensionError
from .jets import jet_einsum, mul_arrays, truncate_arrays
from .tensors import TensorJet, align, raise_lower

_CROSS_CHECK_ALGEBRAIC = 1e-10
_CROSS_CHECK_DIFFERENTIAL = 1e-8


@dataclass(frozen=True)
class ConformalPack:
    """The derived tensors of one metric/potential evaluation."""

    schouten: TensorJet
    einstein: TensorJet
    weyl: TensorJet
    cotton: TensorJet
    bach: TensorJet | None
    dtensor: TensorJet


def _judged(residual, scale):
    """Residual judged relatively once the identity's terms exceed unit size."""
    return residual / max(1.0, scale)


def _require_agreement(a, b, tol, what):
    aa, bb = align(a, b)
    diff = float(np.abs(aa.data - bb.data).max())
    scale = max(aa.max_abs(all_coeffs=True), bb.max_abs(all_coeffs=True))
    if _judged(diff, scale) > tol:
        raise ConsistencyError(
            f"{what}: independent paths disagree by {diff:.3e} (scale {scale:.3e})"
        )


def _pair_pattern(space, a, b):
    """P[i,j,k,l] = a_ik * b_jl; the three sibling terms are transposes."""
    return jet_einsum(space, "ik,jl->ijkl", a, b)


def schouten(pack, n):
    """Trace-adjusted Ricci tensor A_ij = R_ij - R g_ij / (2(n-1))."""
    if n < 3:
        raise UnsupportedDimensionError("schouten tensor needs dimension >= 3")
    space = pack.ricci.space
    _, g = truncate_arrays(pack.metric.space, pack.metric.g.data, space.order)
    data = pack.ricci.data - mul_arrays(space, g, pack.scalar.coeffs) / (2.0 * (n - 1))
    return TensorJet(space, "dd", data)


def einstein_tensor(pack):
    """E_ij = R_ij - (R/2) g_ij."""
    space = pack.ricci.space
    _, g = truncate_arrays(pack.metric.space, pack.metric.g.data, space.order)
    data = pack.ricci.data - 0.5 * mul_arrays(space, g, pack.scalar.coeffs)
    return TensorJet(space, "dd", data)


def weyl(pack, n):
    """Totally trace-free part of the curvature tensor.

    Computed from the Ricci/scalar form and independently from the
    Schouten form; both must agree before the first is returned.
    """
    if n < 3:
        raise UnsupportedDimensionError("weyl tensor needs dimension >= 3")
    space = pack.riemann.space
    _, g = truncate_arrays(pack.metric.space, pack.metric.g.data, space.order)

    p = _pair_pattern(space, g, pack.ricci.data)
    ric_part = (
        p
        - p.transpose(0, 1, 3, 2, 4)
        - p.transpose(1, 0, 2, 3, 4)
        + p.transpose(1, 0, 3, 2, 4)
    )
    gg = _pair_pattern(space, g, g)
    gg_asym = gg - gg.transpose(0, 1, 3, 2, 4)
    scal_part = mul_arrays(space, gg_asym, pack.scalar.coeffs)
    w = (
        pack.riemann.data
        - ric_part / (n - 2)
        + scal_part / ((n - 1) * (n - 2))
    )
    weyl_t = TensorJet(space, "dddd", w)

    a = schouten(pack, n)
    pa = _pair_pattern(space, g, a.data)
    kn = (
        pa
        - pa.transpose(0, 1, 3, 2, 4)
        - pa.transpose(1, 0, 2, 3, 4)
        + pa.transpose(1, 0, 3, 2, 4)
    )
    weyl_alt = TensorJet(space, "dddd", pack.riemann.data - kn / (n - 2))
    _require_agreement(weyl_t, weyl_alt, _CROSS_CHECK_ALGEBRAIC, "weyl")
    return weyl_t


def cotton(pack, n):
    """Antisymmetrised derivative of the trace-adjusted Ricci tensor.

    Both the Ricci/scalar form and the derivative-of-Schouten form are
    evaluated and compared.
    """
    if n < 3:
        raise UnsupportedDimensionError("cotton tensor needs dimension >= 3")
    dric = covariant_derivative(pack.ricci, pack)
    space = dric.space
    dscal = scalar_gradient(pack.scalar)
    _, g = truncate_arrays(pack.metric.space, pack.metric.g.data, space.order)
    t = jet_einsum(space, "jk,i->ijk", g, dscal.data)
    c = (
        dric.data
        - dric.data.swapaxes(0, 1)
        - (t - t.swapaxes(0, 1)) / (2.0 * (n - 1))
    )
    cotton_t = TensorJet(space, "ddd", c)

    da = covariant_derivative(schouten(pack, n), pack)
    cotton_alt = TensorJet(space, "ddd", da.data - da.data.swapaxes(0, 1))
    _require_agreement(cotton_t, cotton_alt, _CROSS_CHECK_ALGEBRAIC, "cotton")
    return cotton_t


def _ricci_weyl_contraction(pack, weyl_t):
    """R^{kl}-contraction against the mixed conformal curvature W_i^k_j^l."""
    metric = pack.metric
    wmix = raise_lower(raise_lower(weyl_t, 1, metric), 3, metric)
    ric, wmix = align(pack.ricci, wmix)
    return jet_einsum(wmix.space, "kl,ikjl->ij", ric.data, wmix.data)


def bach(pack, cotton_t, weyl_t, n):
    """Bach tensor from the Cotton divergence, cross-checked against the
    double-divergence-of-Weyl definition."""
    if n < 4:
        raise UnsupportedDimensionError("bach tensor needs dimension >= 4")
    metric = pack.metric
    dc = covariant_derivative(cotton_t, pack)
    space = dc.space
    _, ginv = truncate_arrays(metric.space, metric.g_inv.data, space.order)
    div_c = jet_einsum(space, "km,mkij->ij", ginv, dc.data)
    rw = _ricci_weyl_contraction(pack, weyl_t)
    _, rw_tr = truncate_arrays(pack.ricci.space, rw, space.order)
    b1 = TensorJet(space, "dd", (div_c + rw_tr) / (n - 2))

    dw = covariant_derivative(weyl_t, pack)
    _, ginv1 = truncate_arrays(metric.space, metric.g_inv.data, dw.order)
    u = jet_einsum(dw.space, "lm,mikjl->ikj", ginv1, dw.data)
    du = covariant_derivative(TensorJet(dw.space, "ddd", u), pack)
    div2 = jet_einsum(du.space, "km,mikj->ij", ginv[..., : du.space.n_terms], du.data)
    b2 = TensorJet(du.space, "dd", div2 / (n - 3) + rw_tr[..., : du.space.n_terms] / (n - 2))
    _require_agreement(b1, b2, _CROSS_CHECK_DIFFERENTIAL, "bach")
    return b1


def d_tensor(pack, f_jet, n, cross_check=False):
    """Soliton 3-tensor coupling trace-adjusted curvature to the potential.

    Primary path uses the Schouten and Einstein tensors.  The alternative
    path written in terms of Ricci, scalar curvature and their gradients
    agrees with it only when the instance satisfies the soliton equations,
    so that comparison is opt-in.
    """
    if n < 3:
        raise UnsupportedDimensionError("d tensor needs dimension >= 3")
    metric = pack.metric
    a = schouten(pack, n)
    e = einstein_tensor(pack)
    space = a.space
    df = scalar_gradient(f_jet)
    _, dfd = truncate_arrays(df.space, df.data, space.order)
    _, ginv = truncate_arrays(metric.space, metric.g_inv.data, space.order)
    _, g = truncate_arrays(metric.space, metric.g.data, space.order)
    gradf_up = jet_einsum(space, "ij,j->i", ginv, dfd)

    t1 = jet_einsum(space, "jk,i->ijk", a.data, dfd)
    v = jet_einsum(space, "il,l->i", e.data, gradf_up)
    t2 = jet_einsum(space, "jk,i->ijk", g, v)
    d = (t1 - t1.swapaxes(0, 1)) / (n - 2) + (t2 - t2.swapaxes(0, 1)) / (
        (n - 1) * (n - 2)
    )
    d_t = TensorJet(space, "ddd", d)

    if cross_check:
        dscal = scalar_gradient(pack.scalar)
        s2 = dscal.space
        _, g2 = truncate_arrays(metric.space, metric.g.data, s2.order)
        _, df2 = truncate_arrays(df.space, df.data, s2.order)
        u1 = jet_einsum(s2, "jk,i->ijk", pack.ricci.data[..., : s2.n_terms], df2)
        u2 = jet_einsum(s2, "jk,i->ijk", g2, dscal.data)
        u3 = jet_einsum(s2, "jk,i->ijk", g2, df2)
        u3 = mul_arrays(s2, u3, pack.scalar.coeffs[: s2.n_terms])
        d2 = (
            (u1 - u1.swapaxes(0, 1)) / (n - 2)
            + (u2 - u2.swapaxes(0, 1)) / (2.0 * (n - 1) * (n - 2))
            - (u3 - u3.swapaxes(0, 1)) / ((n - 1) * (n - 2))
        )
        _require_agreement(
            d_t, TensorJet(s2, "ddd", d2), _CROSS_CHECK_ALGEBRAIC, "d_tensor"
        )
    return d_t


def conformal_pack(pack, f_jet, n, with_bach=True, cross_check_d=False):
    w = weyl(pack, n)
    c = cotton(pack, n)
    b = bach(pack, c, w, n) if (with_bach and n >= 4) else None
    return ConformalPack(
        schouten=schouten(pack, n),
        einstein=einstein_tensor(pack),
        weyl=w,
        cotton=c,
        bach=b,
        dtensor=d_tensor(pack, f_jet, n, cross_check=cross_check_d),
    )


# ---------------------------------------------------------------------------
# identity residuals (two sides evaluated independently, compared at values)

def _gradf_up_values(pack, f_jet):
    df = scalar_gradient(f_jet)
    ginv0 = pack.metric.g_inv.values
    return ginv0 @ df.values


def cotton_weyl_divergence_residual(pack, cotton_t, weyl_t, n):
    """C_ijk + ((n-2)/(n-3)) div W residual; both sides returned."""
    if n < 4:
        raise UnsupportedDimensionError("the divergence relation needs dimension >= 4")
    dw = covariant_derivative(weyl_t, pack)
    _, ginv = truncate_arrays(pack.metric.space, pack.metric.g_inv.data, dw.order)
    divw = jet_einsum(dw.space, "lm,mijkl->ijk", ginv, dw.data)
    lhs = cotton_t.values
    rhs = -((n - 2.0) / (n - 3.0)) * divw[..., 0]
    resid = float(np.abs(lhs - rhs).max())
    scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()))
    return {"residual": resid, "scale": scale, "cotton_max": float(np.abs(lhs).max()),
            "divergence_max": float(np.abs(rhs).max())}


def d_decomposition_residual(d_t, cotton_t, weyl_t, f_jet, metric):
    """Worst component of D_ijk - C_ijk - W_ijkl grad^l f at the point."""
    df = scalar_gradient(f_jet)
    gradf_up = metric.g_inv.values @ df.values
    w_term = np.einsum("ijkl,l->ijk", weyl_t.values, gradf_up)
    lhs = d_t.values
    rhs = cotton_t.values + w_term
    resid = float(np.abs(lhs - rhs).max())
    scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()))
    return {"residual": resid, "scale": scale}


def d_cotton_contraction_residual(d_t, cotton_t, f_jet, metric):
    """Contracting the last slot with grad f must erase the D/C difference.

    Their difference is a conformal-curvature term antisymmetric in the
    contracted pair, so (D_ijk - C_ijk) grad^k f vanishes on a soliton
    even where D itself does not.
    """
    df = scalar_gradient(f_jet)
    gradf_up = metric.g_inv.values @ df.values
    lhs = np.einsum("ijk,k->ij", d_t.values, gradf_up)
    rhs = np.einsum("ijk,k->ij", cotton_t.values, gradf_up)
    resid = float(np.abs(lhs - rhs).max())
    scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()),
                d_t.max_abs(), cotton_t.max_abs())
    return {"residual": resid, "scale": scale}


def bach_via_d_residual(bach_t, d_t, cotton_t, f_jet, pack, n):
    """Residual of the Bach expression through D and C on a soliton.

    B_ij + (nabla_k D_ikj + ((n-3)/(n-2)) C_jli grad^l f) / (n-2), evaluated
    with the printed index order; each term's magnitude is reported.
    """
    metric = pack.metric
    dd = covariant_derivative(d_t, pack)
    _, ginv = truncate_arrays(metric.space, metric.g_inv.data, dd.order)
    div_d = jet_einsum(dd.space, "km,mikj->ij", ginv, dd.data)[..., 0]
    gradf_up = _gradf_up_values(pack, f_jet)
    c_term = np.einsum("jli,l->ij", cotton_t.values, gradf_up)
    lhs = bach_t.values
    rhs = -(div_d + ((n - 3.0) / (n - 2.0)) * c_term) / (n - 2.0)
    resid = float(np.abs(lhs - rhs).max())
    scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()))
    return {
        "residual": resid,
        "scale": scale,
        "bach_max": float(np.abs(lhs).max()),
        "d_divergence_max": float(np.abs(div_d).max()),
        "cotton_term_max": float(np.abs(c_term).max()),
    }


def div_bach_residual(bach_t, cotton_t, pack, n):
    """Two-sided check of the divergence of the Bach tensor.

    div B_i = ((n-4)/(n-2)^2) C_ijk R^{jk}; requires one jet order left on
    the Bach tensor, i.e. a full order-5 evaluation of the metric.
    """
    metric = pack.metric
    db = covariant_derivative(bach_t, pack)  # raises InsufficientOrderError below order 5
    _, ginv = truncate_arrays(metric.space, metric.g_inv.data, db.order)
    lhs = jet_einsum(db.space, "jm,mij->i", ginv, db.data)[..., 0]
    ric_up = raise_lower(raise_lower(pack.ricci, 0, metric), 1, metric)
    rhs = ((n - 4.0) / (n - 2.0) ** 2) * np.einsum(
        "ijk,jk->i", cotton_t.values, ric_up.values
    )
    resid = float(np.abs(lhs - rhs).max())
    scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()))
    return {
        "residual": resid,
        "scale": scale,
        "lhs_max": float(np.abs(lhs).max()),
        "rhs_max": float(np.abs(rhs).max()),
        "bach_max": bach_t.max_abs(),
    }

"""Catalog of concrete gradient Ricci soliton instances.

Each instance bundles a metric family, a potential and the soliton
constant on an explicit chart box.  Sphere factors use stereographic
coordinates so that components are rational and jets are exact; the only
chart pole sits outside every box.  A deliberately perturbed non-soliton
pair is included as a negative control for the verification harness.
"""

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curvature import curvature_pack, hessian, scalar_gradient
from .errors import (
    ConfigurationError,
    DomainError,
    HypothesisViolationError,
    ValidationError,
)
from .exprs import compile_expression
from .jets import JetScalar, JetSpace, constant, coordinate_jets
from .tensors import metric_at_point

SOLITON_TOL = 1e-9
HAMILTON_TOL = 1e-9
MIN_GRAD_DISTANCE = 1e-3
MIN_EXCLUDED_DISTANCE = 1e-3


@dataclass
class SolitonInstance:
    """A metric family with potential, soliton constant and chart data.

    `kind` is one of shrinking/steady/expanding/einstein, or None for
    negative-control geometries that intentionally fail certification.
    `trivial` marks constant potentials (no level-surface geometry).
    """

    name: str
    n: int
    rho: float
    kind: str | None
    metric_fn: Callable
    potential_fn: Callable
    box: list
    base_point: list
    excluded: list = field(default_factory=list)
    trivial: bool = False
    description: str = ""
    _f_shift: float | None = None

    def contains(self, point):
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.box))

    def excluded_distance(self, point):
        p = np.asarray(point, dtype=float)
        return min((fn(p) for fn in self.excluded), default=math.inf)

    def metric_at(self, point, order):
        return metric_at_point(self.metric_fn, point, self.n, order)

    def potential_jet(self, point, space, normalized=True):
        xs = coordinate_jets(space, point)
        f = self.potential_fn(xs)
        if not isinstance(f, JetScalar):
            f = constant(space, float(f))
        if normalized:
            f = f + self.f_shift
        return f

    @property
    def f_shift(self):
        """Additive normalization fixed by the first-integral at base_point.

        Only normalized shrinkers (rho = 1/2) carry a shift; the constant
        is chosen so R + |grad f|^2 - f vanishes at the base point, and its
        constancy elsewhere is then a genuine test.
        """
        if self._f_shift is None:
            if self.rho == 0.5 and self.kind in ("shrinking", "einstein"):
                space = JetSpace.get(self.n, 2)
                metric = self.metric_at(self.base_point, 2)
                pack = curvature_pack(metric)
                f = self.potential_jet(self.base_point, space, normalized=False)
                df = scalar_gradient(f)
                grad_sq = float(
                    df.values @ metric.g_inv.values @ df.values
                )
                self._f_shift = pack.scalar.value + grad_sq - f.value
            else:
                self._f_shift = 0.0
        return self._f_shift

    def __repr__(self):
        return f"SolitonInstance({self.name!r}, n={self.n}, rho={self.rho}, kind={self.kind})"


# ---------------------------------------------------------------------------
# residuals

def soliton_residual(inst, point, order=3):
    """Worst component of Ric + Hess f - rho g at the point."""
    if not inst.contains(point):
        raise DomainError(f"{list(point)} is outside the chart box of {inst.name}")
    metric = inst.metric_at(point, order)
    pack = curvature_pack(metric)
    f = inst.potential_jet(point, metric.space)
    hess = hessian(f, pack)
    g = metric.g.truncated(hess.order)
    resid = pack.ricci.values + hess.values - inst.rho * g.values
    return float(np.abs(resid).max())


def hamilton_residuals(inst, point, order=3):
    """First-integral residuals of a normalized shrinker at the point.

    Returns (max_i |d_i R - 2 R_ij grad^j f|, |R + |grad f|^2 - f|).
    """
    if not (inst.rho == 0.5 and inst.kind in ("shrinking", "einstein")):
        raise HypothesisViolationError(
            f"{inst.name}: first-integral residuals apply to normalized "
            "shrinkers only (rho = 1/2)"
        )
    if not inst.contains(point):
        raise DomainError(f"{list(point)} is outside the chart box of {inst.name}")
    metric = inst.metric_at(point, order)
    pack = curvature_pack(metric)
    f = inst.potential_jet(point, metric.space)
    df = scalar_gradient(f)
    gradf_up = metric.g_inv.values @ df.values
    d_scal = scalar_gradient(pack.scalar).values
    first = float(np.abs(d_scal - 2.0 * pack.ricci.values @ gradf_up).max())
    grad_sq = float(df.values @ gradf_up)
    second = abs(pack.scalar.value + grad_sq - f.value)
    return first, second


# ---------------------------------------------------------------------------
# sampling

def instance_rng(inst, seed, salt=0):
    return np.random.default_rng(
        np.random.SeedSequence([seed, zlib.crc32(inst.name.encode()), salt])
    )


def _grad_norm_value(inst, point):
    space = JetSpace.get(inst.n, 1)
    metric = inst.metric_at(point, 1)
    f = inst.potential_jet(point, space)
    df = np.array([f.partial(tuple(1 if k == v else 0 for k in range(inst.n)))
                   for v in range(inst.n)])
    return math.sqrt(max(df @ metric.g_inv.values @ df, 0.0))


def sample_points(inst, n_points, seed, min_grad=MIN_GRAD_DISTANCE,
                  min_excluded=MIN_EXCLUDED_DISTANCE, max_tries=20000):
    """Deterministic chart samples away from excluded loci and critical points."""
    rng = instance_rng(inst, seed)
    lo = np.array([b[0] for b in inst.box])
    hi = np.array([b[1] for b in inst.box])
    points = []
    for _ in range(max_tries):
        if len(points) == n_points:
            break
        p = lo + (hi - lo) * rng.random(inst.n)
        if inst.excluded_distance(p) < min_excluded:
            continue
        if not inst.trivial and _grad_norm_value(inst, p) < min_grad:
            continue
        points.append(p)
    if len(points) < n_points:
        raise ConfigurationError(
            f"{inst.name}: could not draw {n_points} admissible sample points"
        )
    return points


def validate_instance(inst, n_points=20, seed=7, tol=SOLITON_TOL, order=3):
    """Certify the defining equation (and first integrals for shrinkers).

    Returns a dict of residual maxima; raises ValidationError when the
    instance is not a soliton of its declared kind.
    """
    if inst.kind is None:
        worst = max(
            soliton_residual(inst, p, order=order)
            for p in sample_points(inst, min(n_points, 8), seed)
        )
        raise ValidationError(
            f"{inst.name}: negative control, defining-equation residual "
            f"{worst:.3e} (kind-less instances are rejected by design)"
        )
    pts = sample_points(inst, n_points, seed)
    worst = 0.0
    argmax = pts[0]
    for p in pts:
        r = soliton_residual(inst, p, order=order)
        if r > worst:
            worst, argmax = r, p
    result = {
        "name": inst.name,
        "soliton_residual": worst,
        "argmax_point": [float(x) for x in argmax],
        "n_points": len(pts),
        "f_shift": inst.f_shift,
        "base_point": list(inst.base_point),
    }
    if worst > tol:
        raise ValidationError(
            f"{inst.name}: defining-equation residual {worst:.3e} exceeds {tol:.1e} "
            f"at {list(argmax)}"
        )
    if inst.rho == 0.5 and inst.kind in ("shrinking", "einstein"):
        h1 = h2 = 0.0
        for p in pts:
            a, b = hamilton_residuals(inst, p, order=order)
            h1, h2 = max(h1, a), max(h2, b)
        result["first_integral_residuals"] = (h1, h2)
        if max(h1, h2) > HAMILTON_TOL:
            raise ValidationError(
                f"{inst.name}: first-integral residuals ({h1:.3e}, {h2:.3e}) "
                f"exceed {HAMILTON_TOL:.1e}"
            )
    return result


# ---------------------------------------------------------------------------
# built-in instances

def _ball_exclusion(center, radius):
    c = np.asarray(center, dtype=float)

    def dist(p):
        return float(np.linalg.norm(p - c) - radius)

    return dist


def _stereographic_factor(xs, indices, radius_sq):
    """Squared conformal factor of a round sphere in stereographic chart."""
    u2 = None
    for k in indices:
        u2 = xs[k] * xs[k] if u2 is None else u2 + xs[k] * xs[k]
    return (2.0 / (1.0 + u2)) ** 2 * radius_sq


def _product_metric(n, sphere_blocks):
    """Diagonal metric: round-sphere blocks (stereographic) + flat remainder."""

    def metric(xs):
        diag = [1.0] * n
        for indices, radius_sq in sphere_blocks:
            fac = _stereographic_factor(xs, indices, radius_sq)
            for k in indices:
                diag[k] = fac
        return [[diag[i] if i == j else 0.0 for j in range(n)] for i in range(n)]

    return metric


def _quadratic_potential(indices, offset):
    def potential(xs):
        f = None
        for k in indices:
            f = xs[k] * xs[k] if f is None else f + xs[k] * xs[k]
        if f is None:
            return float(offset)
        return f / 4.0 + offset

    return potential


def gaussian_instance(n):
    return SolitonInstance(
        name=f"gaussian-r{n}",
        n=n,
        rho=0.5,
        kind="shrinking",
        metric_fn=_product_metric(n, []),
        potential_fn=_quadratic_potential(list(range(n)), 0.0),
        box=[(-3.0, 3.0)] * n,
        base_point=[2.0] + [0.0] * (n - 1),
        description="flat chart, quadratic potential",
    )


def sphere_instance(n):
    r_sq = 2.0 * (n - 1)
    return SolitonInstance(
        name=f"sphere-s{n}",
        n=n,
        rho=0.5,
        kind="einstein",
        metric_fn=_product_metric(n, [(list(range(n)), r_sq)]),
        potential_fn=lambda xs: 0.0,
        box=[(-1.5, 1.5)] * n,
        base_point=[0.3, 0.1] + [0.0] * (n - 2),
        excluded=[lambda p: 4.0 - float(np.linalg.norm(p))],
        trivial=True,
        description=f"round sphere of radius sqrt({r_sq:g}), stereographic chart",
    )


def cylinder_instance(n):
    r_sq = 2.0 * (n - 2)
    return SolitonInstance(
        name=f"cylinder-s{n - 1}xr",
        n=n,
        rho=0.5,
        kind="shrinking",
        metric_fn=_product_metric(n, [(list(range(n - 1)), r_sq)]),
        potential_fn=_quadratic_potential([n - 1], (n - 1) / 2.0),
        box=[(-1.2, 1.2)] * (n - 1) + [(-4.0, 4.0)],
        base_point=[0.0] * (n - 1) + [2.0],
        description=f"round {n - 1}-sphere of radius sqrt({r_sq:g}) times a line",
    )


def s2xrk_instance(n):
    flat = list(range(2, n))
    return SolitonInstance(
        name=f"s2xr{n - 2}",
        n=n,
        rho=0.5,
        kind="shrinking",
        metric_fn=_product_metric(n, [([0, 1], 2.0)]),
        potential_fn=_quadratic_potential(flat, 1.0),
        box=[(-1.2, 1.2)] * 2 + [(-3.0, 3.0)] * (n - 2),
        base_point=[0.0, 0.0, 2.0] + [0.0] * (n - 3),
        description="round 2-sphere of radius sqrt(2) times a flat factor",
    )


def s2xs2xr_instance():
    return SolitonInstance(
        name="einstein-cylinder-s2xs2xr",
        n=5,
        rho=0.5,
        kind="shrinking",
        metric_fn=_product_metric(5, [([0, 1], 2.0), ([2, 3], 2.0)]),
        potential_fn=_quadratic_potential([4], 2.0),
        box=[(-1.2, 1.2)] * 4 + [(-4.0, 4.0)],
        base_point=[0.0, 0.0, 0.0, 0.0, 2.0],
        description="Einstein product of two round 2-spheres, times a line",
    )


def warped_product_instance(name, n, phi_fn, potential_fn, rho, kind, *,
                            r_range, fiber_range=1.2, base_point=None,
                            trivial=False, excluded=(), description=""):
    """Metric dr^2 + phi(r)^2 g_fiber with a unit round fiber sphere.

    Coordinates are (r, u_1 .. u_{n-1}) with the fiber in stereographic
    chart; `phi_fn` maps the r-jet to a jet (or number).
    """

    def metric(xs):
        phi = phi_fn(xs[0])
        fac = _stereographic_factor(xs, list(range(1, n)), 1.0)
        fac = fac * (phi * phi)
        rows = [[fac if i == j else 0.0 for j in range(n)] for i in range(n)]
        rows[0][0] = 1.0
        return rows

    return SolitonInstance(
        name=name,
        n=n,
        rho=rho,
        kind=kind,
        metric_fn=metric,
        potential_fn=potential_fn,
        box=[tuple(r_range)] + [(-fiber_range, fiber_range)] * (n - 1),
        base_point=base_point or [sum(r_range) / 2.0] + [0.0] * (n - 1),
        excluded=list(excluded),
        trivial=trivial,
        description=description or "warped product over an interval",
    )


def warped_cylinder_instance():
    return warped_product_instance(
        "warped-cylinder",
        4,
        lambda r: 2.0,
        lambda xs: xs[0] * xs[0] / 4.0 + 1.5,
        0.5,
        "shrinking",
        r_range=(-4.0, 4.0),
        base_point=[2.0, 0.0, 0.0, 0.0],
        description="constant warping phi = 2; same geometry as cylinder-s3xr",
    )


def warped_sphere_instance():
    root6 = math.sqrt(6.0)

    def phi(r):
        from . import jets

        if isinstance(r, JetScalar):
            return root6 * jets.sin(r / root6)
        return root6 * math.sin(r / root6)

    return warped_product_instance(
        "warped-sphere-s4",
        4,
        phi,
        lambda xs: 0.0,
        0.5,
        "einstein",
        r_range=(0.4, 2.0),
        base_point=[1.0, 0.0, 0.0, 0.0],
        trivial=True,
        excluded=[lambda p: abs(float(p[0]))],
        description="round 4-sphere in geodesic polar chart (sinusoidal warping)",
    )


def steady_flat_instance():
    return SolitonInstance(
        name="steady-flat-r4",
        n=4,
        rho=0.0,
        kind="steady",
        metric_fn=_product_metric(4, []),
        potential_fn=lambda xs: xs[0] + 0.0,
        box=[(-3.0, 3.0)] * 4,
        base_point=[1.0, 0.3, 0.2, 0.1],
        description="flat metric with a linear potential (degenerate steady)",
    )


def expanding_gaussian_instance():
    def potential(xs):
        return -sum(x * x for x in xs) / 4.0

    return SolitonInstance(
        name="expanding-gaussian-r4",
        n=4,
        rho=-0.5,
        kind="expanding",
        metric_fn=_product_metric(4, []),
        potential_fn=potential,
        box=[(-3.0, 3.0)] * 4,
        base_point=[2.0, 0.0, 0.0, 0.0],
        description="flat chart, negated quadratic potential",
    )


def _perturbed_metric(n, diag_eps, cubic_eps, off_terms):
    # cubic diagonal terms keep the Ricci derivative (hence the Cotton
    # tensor) first order in the perturbation; sizes chosen to stay
    # positive definite on [-2, 2]^n by a Gershgorin margin
    def metric(xs):
        rows = [[0.0] * n for _ in range(n)]
        for i in range(n):
            k = (i + 1) % n
            k2 = (i + 2) % n
            rows[i][i] = (
                1.0 + diag_eps * xs[k] * xs[k] + cubic_eps * xs[k2] * xs[k2] * xs[k2]
            )
        for (i, j, a, b, eps) in off_terms:
            rows[i][j] = eps * xs[a] * xs[b]
            rows[j][i] = rows[i][j]
        return rows

    return metric


def perturbed_instance(n):
    if n == 4:
        off = [(0, 1, 2, 3, 0.05), (2, 3, 0, 1, 0.05)]
    else:
        off = [(0, 1, 2, 3, 0.05), (2, 3, 4, 0, 0.05), (1, 4, 0, 2, 0.05)]
    return SolitonInstance(
        name=f"perturbed-non-soliton-r{n}",
        n=n,
        rho=0.5,
        kind=None,
        metric_fn=_perturbed_metric(n, 0.15, 0.05, off),
        potential_fn=_quadratic_potential(list(range(n)), 0.0),
        box=[(-2.0, 2.0)] * n,
        base_point=[1.0] * n,
        description="generic curved metric; fails certification by design",
    )


def catalog():
    """All built-in instances, negative controls included."""
    return [
        gaussian_instance(3),
        gaussian_instance(4),
        gaussian_instance(5),
        sphere_instance(4),
        sphere_instance(5),
        cylinder_instance(3),
        cylinder_instance(4),
        cylinder_instance(5),
        s2xrk_instance(4),
        s2xrk_instance(5),
        s2xs2xr_instance(),
        warped_cylinder_instance(),
        warped_sphere_instance(),
        steady_flat_instance(),
        expanding_gaussian_instance(),
        perturbed_instance(4),
        perturbed_instance(5),
    ]


def get_instance(name, extra=()):
    for inst in list(extra) + catalog():
        if inst.name == name:
            return inst
    raise ConfigurationError(f"no catalog instance named {name!r}")


# ---------------------------------------------------------------------------
# JSON catalog extensions

def instance_from_spec(spec):
    """Build an instance from a JSON-style dict of expression strings."""
    required = {"name", "n", "rho", "metric", "potential", "domain"}
    missing = required - set(spec)
    if missing:
        raise ConfigurationError(f"catalog extension missing fields: {sorted(missing)}")
    n = int(spec["n"])
    rows = spec["metric"]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigurationError("metric must be an n-by-n grid of expressions")
    compiled = [[compile_expression(str(e), n) for e in row] for row in rows]
    potential = compile_expression(str(spec["potential"]), n)

    def metric_fn(xs):
        return [[compiled[i][j](xs) for j in range(n)] for i in range(n)]

    box = [tuple(float(v) for v in b) for b in spec["domain"]["box"]]
    excluded = [
        _ball_exclusion(e["center"], float(e.get("radius", 0.0)))
        for e in spec.get("excluded", [])
    ]
    base = spec.get("base_point") or [(lo + hi) / 2.0 for lo, hi in box]
    return SolitonInstance(
        name=str(spec["name"]),
        n=n,
        rho=float(spec["rho"]),
        kind=spec.get("kind"),
        metric_fn=metric_fn,
        potential_fn=potential,
        box=box,
        base_point=[float(x) for x in base],
        excluded=excluded,
        trivial=bool(spec.get("trivial", False)),
        description=str(spec.get("description", "catalog extension")),
    )


def load_extension_file(path):
    import json

    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return [instance_from_spec(s) for s in doc.get("instances", [])]

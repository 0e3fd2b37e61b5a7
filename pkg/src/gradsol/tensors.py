"""Dense tensor algebra over jet-valued components.

A TensorJet packs the jets of all n^rank components into one ndarray with
the jet coefficients on the trailing axis, so contractions and products
run as vectorised kernels instead of per-component Python loops.
Component access still hands back individual :class:`~gradsol.jets.JetScalar`
values.
"""

import string

import numpy as np

from . import jets
from .errors import (
    ConfigurationError,
    ConsistencyError,
    DomainError,
    TensorShapeError,
)
from .jets import JetScalar, JetSpace, coordinate_jets, jet_einsum, truncate_arrays

_LETTERS = string.ascii_lowercase


class TensorJet:
    """Dense tensor with jet-valued components.

    `valence` is a string over {'d', 'u'} marking each slot covariant or
    contravariant.  `data` has shape (dim,)*rank + (n_terms,).
    """

    __slots__ = ("space", "valence", "data")

    def __init__(self, space, valence, data):
        data = np.asarray(data, dtype=np.float64)
        rank = len(valence)
        if any(v not in "du" for v in valence):
            raise TensorShapeError(f"valence must use 'd'/'u', got {valence!r}")
        expected = (space.dim,) * rank + (space.n_terms,)
        if data.shape != expected:
            raise TensorShapeError(f"expected shape {expected}, got {data.shape}")
        self.space = space
        self.valence = valence
        self.data = data

    @classmethod
    def zeros(cls, space, valence):
        shape = (space.dim,) * len(valence) + (space.n_terms,)
        return cls(space, valence, np.zeros(shape))

    @classmethod
    def from_scalars(cls, space, valence, grid):
        """Build from a nested list of JetScalar (or plain numbers)."""
        rank = len(valence)
        out = cls.zeros(space, valence)

        def fill(node, idx):
            if len(idx) == rank:
                if isinstance(node, JetScalar):
                    if node.space is not space:
                        raise ConfigurationError("component jets must share one space")
                    out.data[idx] = node.coeffs
                else:
                    out.data[idx + (0,)] = float(node)
                return
            for i, sub in enumerate(node):
                fill(sub, idx + (i,))

        fill(grid, ())
        return out

    @property
    def dim(self):
        return self.space.dim

    @property
    def order(self):
        return self.space.order

    @property
    def rank(self):
        return len(self.valence)

    @property
    def values(self):
        """Constant terms: the component values at the base point."""
        return self.data[..., 0]

    def component(self, *idx):
        if len(idx) != self.rank:
            raise TensorShapeError(f"need {self.rank} indices, got {len(idx)}")
        return JetScalar(self.space, self.data[idx].copy())

    def truncated(self, order):
        lower, data = truncate_arrays(self.space, self.data, order)
        return TensorJet(lower, self.valence, data.copy())

    def transpose(self, perm):
        perm = tuple(perm)
        data = np.transpose(self.data, perm + (self.rank,))
        valence = "".join(self.valence[p] for p in perm)
        return TensorJet(self.space, valence, data)

    def max_abs(self, all_coeffs=False):
        if all_coeffs:
            return float(np.abs(self.data).max())
        return float(np.abs(self.values).max())

    def __add__(self, other):
        self._check_like(other)
        return TensorJet(self.space, self.valence, self.data + other.data)

    def __sub__(self, other):
        self._check_like(other)
        return TensorJet(self.space, self.valence, self.data - other.data)

    def __neg__(self):
        return TensorJet(self.space, self.valence, -self.data)

    def __mul__(self, scalar):
        return TensorJet(self.space, self.valence, self.data * float(scalar))

    __rmul__ = __mul__

    def _check_like(self, other):
        if not isinstance(other, TensorJet):
            raise TensorShapeError("expected a TensorJet operand")
        if other.space is not self.space or other.valence != self.valence:
            raise TensorShapeError("tensor operands must share space and valence")

    def __repr__(self):
        return (
            f"TensorJet(dim={self.dim}, order={self.order}, valence={self.valence!r})"
        )


def align(a, b):
    """Truncate two tensors to their common (minimum) order."""
    order = min(a.order, b.order)
    aa = a.truncated(order) if a.order > order else a
    bb = b.truncated(order) if b.order > order else b
    return aa, bb


def contract(t, slot_a, slot_b):
    """Trace over one contravariant and one covariant slot."""
    if slot_a == slot_b or not (0 <= slot_a < t.rank and 0 <= slot_b < t.rank):
        raise TensorShapeError(f"bad slot pair ({slot_a}, {slot_b}) for rank {t.rank}")
    if t.valence[slot_a] == t.valence[slot_b]:
        raise TensorShapeError(
            "contraction needs opposite variances; raise or lower a slot first"
        )
    data = np.trace(t.data, axis1=slot_a, axis2=slot_b)
    valence = "".join(
        v for i, v in enumerate(t.valence) if i not in (slot_a, slot_b)
    )
    if valence:
        return TensorJet(t.space, valence, data)
    return JetScalar(t.space, data)


def raise_lower(t, slot, metric):
    """Flip the variance of one slot by contracting with g or its inverse."""
    if not (0 <= slot < t.rank):
        raise TensorShapeError(f"slot {slot} out of range for rank {t.rank}")
    g = metric.g_inv if t.valence[slot] == "d" else metric.g
    _, gdata = truncate_arrays(g.space, g.data, t.order)
    letters = _LETTERS[: t.rank]
    old = letters[slot]
    new = _LETTERS[t.rank]
    subs = f"{new}{old},{letters}->{letters.replace(old, new)}"
    out = jet_einsum(t.space, subs, gdata, t.data)
    valence = t.valence[:slot] + ("u" if t.valence[slot] == "d" else "d") + t.valence[slot + 1:]
    return TensorJet(t.space, valence, out)


def tensor_norm_sq(t, metric):
    """Full metric contraction |T|^2 of a covariant tensor; constant term."""
    if any(v != "d" for v in t.valence):
        raise TensorShapeError("tensor_norm_sq expects a fully covariant tensor")
    up = t
    for slot in range(t.rank):
        up = raise_lower(up, slot, metric)
    letters = _LETTERS[: t.rank]
    s = jet_einsum(t.space, f"{letters},{letters}->", t.data, up.data)
    return float(s[0])


def outer(a, b):
    """Tensor product, slots of `a` first."""
    la = _LETTERS[: a.rank]
    lb = _LETTERS[a.rank : a.rank + b.rank]
    aa, bb = align(a, b)
    out = jet_einsum(aa.space, f"{la},{lb}->{la}{lb}", aa.data, bb.data)
    return TensorJet(aa.space, aa.valence + bb.valence, out)


class MetricAtPoint:
    """Metric and inverse-metric jets at one chart point."""

    __slots__ = ("space", "point", "g", "g_inv")

    def __init__(self, space, point, g, g_inv):
        self.space = space
        self.point = np.asarray(point, dtype=np.float64)
        self.g = g
        self.g_inv = g_inv

    @property
    def dim(self):
        return self.space.dim

    @property
    def order(self):
        return self.space.order

    def __repr__(self):
        return f"MetricAtPoint(dim={self.dim}, order={self.order}, point={self.point})"


def _invert_metric_jets(space, gdata):
    n = space.dim
    g0 = gdata[..., 0]
    x0 = np.linalg.inv(g0)
    x = np.zeros_like(gdata)
    x[..., 0] = x0
    two_eye = np.zeros_like(gdata)
    two_eye[np.arange(n), np.arange(n), 0] = 2.0
    # Newton iteration X <- X(2I - GX) doubles the correct order each step
    steps = 0
    while (1 << steps) - 1 < space.order:
        steps += 1
    for _ in range(steps):
        gx = jet_einsum(space, "ij,jk->ik", gdata, x)
        x = jet_einsum(space, "ij,jk->ik", x, two_eye - gx)
    return x


def metric_at_point(metric_fn, point, dim, order):
    """Evaluate a metric closure at a point and package it with its inverse.

    `metric_fn` maps a list of coordinate jets to an n-by-n grid whose
    entries are jets or plain numbers.  Symmetry is enforced from the upper
    triangle; the result is checked for positive definiteness and for
    g * g_inv = identity at jet-coefficient level.
    """
    space = JetSpace.get(dim, order)
    xs = coordinate_jets(space, point)
    rows = metric_fn(xs)
    gdata = np.zeros((dim, dim, space.n_terms))
    for i in range(dim):
        for j in range(i, dim):
            entry = rows[i][j]
            if isinstance(entry, JetScalar):
                if entry.space is not space:
                    raise ConfigurationError("metric components must share the chart space")
                gdata[i, j] = entry.coeffs
            else:
                gdata[i, j, 0] = float(entry)
            gdata[j, i] = gdata[i, j]

    g0 = gdata[..., 0]
    if np.linalg.eigvalsh(g0).min() <= 0.0:
        raise DomainError(f"metric is not positive definite at {list(point)}")

    inv = _invert_metric_jets(space, gdata)
    resid = jet_einsum(space, "ij,jk->ik", gdata, inv)
    resid[np.arange(dim), np.arange(dim), 0] -= 1.0
    if np.abs(resid[..., 0]).max() > 1e-12 or np.abs(resid).max() > 1e-10:
        raise ConsistencyError("metric inverse failed the g*g_inv = id check")

    g = TensorJet(space, "dd", gdata)
    g_inv = TensorJet(space, "uu", inv)
    return MetricAtPoint(space, point, g, g_inv)

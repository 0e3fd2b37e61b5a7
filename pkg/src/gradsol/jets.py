"""Truncated multivariate Taylor arithmetic.

Every scalar the engine touches is carried as a *jet*: the dense table of
Taylor coefficients of a function at a chart point, up to a fixed total
degree (at most 5).  Sums, products, quotients and elementary functions of
jets propagate exact partial derivatives, so the curvature stack never
differentiates anything by finite differences or symbols.

Coefficients are stored in graded-lexicographic rank order, which makes
truncation to a lower order a plain prefix slice.  The heavy operation is
the truncated product; its index structure is precomputed per (dim, order)
so that batched products over whole tensors reduce to one gather, one
einsum and one segmented sum.
"""

import math
import numbers
from functools import lru_cache

import numpy as np

from .errors import (
    ConfigurationError,
    InsufficientOrderError,
    SingularEvaluationError,
)

MAX_ORDER = 5
MAX_DIM = 6


def _compositions(total, slots):
    """All tuples of `slots` nonnegative ints summing to `total`, lex order."""
    if slots == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, slots - 1):
            yield (head,) + rest


class JetSpace:
    """Coefficient layout and product tables for jets of one (dim, order).

    Instances are cached; two jets interoperate iff they share a space.
    The exponent list is degree-major, so the first ``block_starts[k+1]``
    ranks of an order-``o`` space are exactly the order-``k`` space.
    """

    __slots__ = (
        "dim", "order", "n_terms", "exponents", "block_starts", "factorial",
        "mul_left", "mul_right", "mul_starts", "diff_src", "diff_fac",
        "_rank_of",
    )

    def __init__(self, dim, order):
        if not (1 <= dim <= MAX_DIM):
            raise ConfigurationError(f"dim must be in [1, {MAX_DIM}], got {dim}")
        if not (0 <= order <= MAX_ORDER):
            raise ConfigurationError(f"order must be in [0, {MAX_ORDER}], got {order}")
        self.dim = dim
        self.order = order

        exps = []
        starts = [0]
        for deg in range(order + 1):
            exps.extend(_compositions(deg, dim))
            starts.append(len(exps))
        self.exponents = np.array(exps, dtype=np.int64)
        self.block_starts = tuple(starts)
        self.n_terms = len(exps)
        self._rank_of = {alpha: r for r, alpha in enumerate(exps)}
        self.factorial = np.array(
            [math.prod(math.factorial(int(a)) for a in alpha) for alpha in exps],
            dtype=np.float64,
        )

        degree = self.exponents.sum(axis=1)
        left, right, target = [], [], []
        for i, ai in enumerate(exps):
            di = degree[i]
            for j, aj in enumerate(exps):
                if di + degree[j] > order:
                    continue
                left.append(i)
                right.append(j)
                target.append(self._rank_of[tuple(x + y for x, y in zip(ai, aj))])
        ordering = np.argsort(np.array(target), kind="stable")
        self.mul_left = np.array(left, dtype=np.intp)[ordering]
        self.mul_right = np.array(right, dtype=np.intp)[ordering]
        mk = np.array(target, dtype=np.intp)[ordering]
        # every rank k occurs (pair (k, 0)), so reduceat yields n_terms segments
        self.mul_starts = np.searchsorted(mk, np.arange(self.n_terms))

        n_lower = starts[order] if order > 0 else 0
        src, fac = [], []
        for v in range(dim):
            s = np.empty(n_lower, dtype=np.intp)
            f = np.empty(n_lower, dtype=np.float64)
            for r in range(n_lower):
                beta = list(exps[r])
                beta[v] += 1
                s[r] = self._rank_of[tuple(beta)]
                f[r] = beta[v]
            src.append(s)
            fac.append(f)
        self.diff_src = src
        self.diff_fac = fac

    @staticmethod
    @lru_cache(maxsize=None)
    def get(dim, order):
        return JetSpace(dim, order)

    def rank_of(self, alpha):
        try:
            return self._rank_of[tuple(int(a) for a in alpha)]
        except KeyError:
            raise ConfigurationError(f"multi-index {alpha} not in space {self}") from None

    def lower(self):
        if self.order == 0:
            raise InsufficientOrderError("cannot differentiate an order-0 jet")
        return JetSpace.get(self.dim, self.order - 1)

    def __repr__(self):
        return f"JetSpace(dim={self.dim}, order={self.order})"


# ---------------------------------------------------------------------------
# packed-array kernels: jets live on the trailing axis of an ndarray

def mul_arrays(space, a, b):
    """Truncated product of coefficient arrays (jets on the trailing axis)."""
    p = a[..., space.mul_left] * b[..., space.mul_right]
    return np.add.reduceat(p, space.mul_starts, axis=-1)


def partial_arrays(space, data, var):
    """Partial derivative along chart variable `var`; drops one order."""
    if space.order == 0:
        raise InsufficientOrderError("no derivative information left at order 0")
    return data[..., space.diff_src[var]] * space.diff_fac[var]


def gradient_arrays(space, data):
    """Stack of all partials, new leading axis of length dim."""
    return np.stack([partial_arrays(space, data, v) for v in range(space.dim)], axis=0)


def truncate_arrays(space, data, order):
    """Prefix slice down to `order`; returns (lower_space, view)."""
    if order > space.order:
        raise InsufficientOrderError(
            f"cannot extend order {space.order} data to order {order}"
        )
    if order == space.order:
        return space, data
    lower = JetSpace.get(space.dim, order)
    return lower, data[..., : lower.n_terms]


_EINSUM_PATHS = {}


def jet_einsum(space, subscripts, a, b):
    """einsum over component axes with jet-valued entries.

    `subscripts` addresses component axes only (e.g. ``'kl,lij->kij'``);
    the trailing jet axis is handled internally.  Both operands must carry
    coefficients in `space`.
    """
    ins, out = subscripts.split("->")
    sub_a, sub_b = ins.split(",")
    expanded = f"{sub_a}Z,{sub_b}Z->{out}Z"
    ga = a[..., space.mul_left]
    gb = b[..., space.mul_right]
    key = (expanded, ga.shape, gb.shape)
    path = _EINSUM_PATHS.get(key)
    if path is None:
        path = np.einsum_path(expanded, ga, gb, optimize="optimal")[0]
        _EINSUM_PATHS[key] = path
    p = np.einsum(expanded, ga, gb, optimize=path)
    return np.add.reduceat(p, space.mul_starts, axis=-1)


# ---------------------------------------------------------------------------
# scalar jets

class JetScalar:
    """One truncated Taylor polynomial: value plus derivatives at a point.

    Immutable by convention; all arithmetic returns new instances.  Mixed
    arithmetic with plain numbers lifts them to constant jets.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape != (space.n_terms,):
            raise ConfigurationError(
                f"expected {space.n_terms} coefficients, got shape {coeffs.shape}"
            )
        self.space = space
        self.coeffs = coeffs

    @property
    def dim(self):
        return self.space.dim

    @property
    def order(self):
        return self.space.order

    @property
    def value(self):
        return float(self.coeffs[0])

    def partial(self, alpha):
        """d^alpha at the base point, i.e. alpha! times the stored coefficient."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or any(a < 0 for a in alpha):
            raise ConfigurationError(f"bad multi-index {alpha} for dim {self.dim}")
        if sum(alpha) > self.order:
            raise InsufficientOrderError(
                f"|alpha|={sum(alpha)} exceeds carried order {self.order}"
            )
        r = self.space.rank_of(alpha)
        return float(self.coeffs[r] * self.space.factorial[r])

    def truncated(self, order):
        lower, data = truncate_arrays(self.space, self.coeffs, order)
        return JetScalar(lower, data.copy())

    def _coerce(self, other):
        if isinstance(other, JetScalar):
            if other.space is not self.space:
                raise ConfigurationError(
                    "jet operands must share (dim, order): "
                    f"{self.space} vs {other.space}"
                )
            return other
        if isinstance(other, numbers.Real):
            return constant(self.space, float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return JetScalar(self.space, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return JetScalar(self.space, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return JetScalar(self.space, o.coeffs - self.coeffs)

    def __neg__(self):
        return JetScalar(self.space, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, numbers.Real) and not isinstance(other, JetScalar):
            return JetScalar(self.space, self.coeffs * float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return JetScalar(self.space, mul_arrays(self.space, self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, numbers.Real) and not isinstance(other, JetScalar):
            return JetScalar(self.space, self.coeffs / float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * _reciprocal(o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * _reciprocal(self)

    def __pow__(self, p):
        if isinstance(p, numbers.Integral):
            return _int_power(self, int(p))
        if isinstance(p, numbers.Real):
            a0 = self.value
            if a0 <= 0.0:
                raise SingularEvaluationError(
                    "non-integer power requires a positive constant term"
                )
            coef = 1.0
            dcoeffs = []
            for k in range(self.order + 1):
                dcoeffs.append(coef * a0 ** (p - k))
                coef *= (p - k) / (k + 1)
            return _compose(self, dcoeffs)
        return NotImplemented

    def __repr__(self):
        return f"JetScalar(dim={self.dim}, order={self.order}, value={self.value!r})"


def constant(space, value):
    c = np.zeros(space.n_terms)
    c[0] = value
    return JetScalar(space, c)


def variable(space, index, value):
    if not (0 <= index < space.dim):
        raise ConfigurationError(f"variable index {index} out of range for dim {space.dim}")
    c = np.zeros(space.n_terms)
    c[0] = value
    if space.order >= 1:
        unit = tuple(1 if k == index else 0 for k in range(space.dim))
        c[space.rank_of(unit)] = 1.0
    return JetScalar(space, c)


def jet_lift(value, index=None, *, dim, order):
    """Constant jet when `index` is None, else the coordinate jet x_index."""
    space = JetSpace.get(dim, order)
    if index is None:
        return constant(space, value)
    return variable(space, index, value)


def coordinate_jets(space, point):
    point = [float(x) for x in point]
    if len(point) != space.dim:
        raise ConfigurationError(f"point has {len(point)} entries, dim is {space.dim}")
    return [variable(space, i, x) for i, x in enumerate(point)]


def extract_partial(a, alpha):
    """Partial derivative of a jet at its base point (alpha! times coeff)."""
    return a.partial(alpha)


# ---------------------------------------------------------------------------
# elementary functions via univariate Taylor composition

def _compose(a, dcoeffs):
    """Sum_k dcoeffs[k] * (a - a0)^k, truncated.  dcoeffs[k] = f^(k)(a0)/k!."""
    space = a.space
    out = np.zeros(space.n_terms)
    out[0] = dcoeffs[0]
    if space.order == 0:
        return JetScalar(space, out)
    tilde = a.coeffs.copy()
    tilde[0] = 0.0
    power = None
    for k in range(1, space.order + 1):
        power = tilde if k == 1 else mul_arrays(space, power, tilde)
        out += dcoeffs[k] * power
    return JetScalar(space, out)


def _int_power(a, p):
    if p < 0:
        return _int_power(_reciprocal(a), -p)
    result = constant(a.space, 1.0)
    base = a
    while p:
        if p & 1:
            result = result * base
        p >>= 1
        if p:
            base = base * base
    return result


def _reciprocal(a):
    a0 = a.value
    if a0 == 0.0:
        raise SingularEvaluationError("division by a jet with zero constant term")
    return _compose(a, [(-1.0) ** k / a0 ** (k + 1) for k in range(a.order + 1)])


def exp(a):
    e0 = math.exp(a.value)
    return _compose(a, [e0 / math.factorial(k) for k in range(a.order + 1)])


def log(a):
    a0 = a.value
    if a0 <= 0.0:
        raise SingularEvaluationError("log requires a positive constant term")
    dc = [math.log(a0)]
    dc += [(-1.0) ** (k - 1) / (k * a0 ** k) for k in range(1, a.order + 1)]
    return _compose(a, dc)


def sqrt(a):
    a0 = a.value
    if a0 <= 0.0:
        raise SingularEvaluationError("sqrt requires a positive constant term")
    return a ** 0.5


def sin(a):
    a0 = a.value
    return _compose(
        a,
        [math.sin(a0 + k * math.pi / 2) / math.factorial(k) for k in range(a.order + 1)],
    )


def cos(a):
    a0 = a.value
    return _compose(
        a,
        [math.cos(a0 + k * math.pi / 2) / math.factorial(k) for k in range(a.order + 1)],
    )


ELEMENTARY = {"sin": sin, "cos": cos, "exp": exp, "log": log, "sqrt": sqrt}

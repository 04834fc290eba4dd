"""Second-order jets of tensor component fields.

A :class:`Jet` carries the value of a component array at a point together
with its first and second coordinate partials.  Base fields (metric,
structure tensors) get their jets from central finite differences; every
quantity built algebraically from them then inherits exact derivatives by
the product rule, so a curvature-level quantity only ever involves one
level of finite differencing.

Derivative indices are appended after the component indices:
``d1[..., k] = d_k value`` and ``d2[..., k, l] = d_k d_l value``.
"""

from __future__ import annotations

import string
from typing import Callable, Sequence, Union

import numpy as np

Operand = Union["Jet", np.ndarray, float]

_DERIV_LETTERS = "YZ"


class Jet:
    __slots__ = ("val", "d1", "d2")

    def __init__(self, val, d1=None, d2=None):
        self.val = np.asarray(val, dtype=float)
        self.d1 = None if d1 is None else np.asarray(d1, dtype=float)
        self.d2 = None if d2 is None or self.d1 is None else np.asarray(d2, dtype=float)

    @property
    def order(self) -> int:
        if self.d1 is None:
            return 0
        return 1 if self.d2 is None else 2

    @property
    def shape(self):
        return self.val.shape

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        if order == 0:
            return Jet(self.val)
        return Jet(self.val, self.d1)

    def D(self) -> "Jet":
        """Coordinate partials as a jet one order lower (new index last)."""
        if self.d1 is None:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.d1, self.d2)

    def __add__(self, other: Operand) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.val + other, self.d1, self.d2)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        return Jet(
            a.val + b.val,
            None if order < 1 else a.d1 + b.d1,
            None if order < 2 else a.d2 + b.d2,
        )

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.val, None if self.d1 is None else -self.d1, None if self.d2 is None else -self.d2)

    def __sub__(self, other: Operand) -> "Jet":
        return self + (-other)

    def __rsub__(self, other: Operand) -> "Jet":
        return (-self) + other

    def __mul__(self, c: float) -> "Jet":
        if isinstance(c, Jet) or np.ndim(c) != 0:
            raise TypeError("use jeinsum for jet-jet products")
        return Jet(self.val * c, None if self.d1 is None else self.d1 * c, None if self.d2 is None else self.d2 * c)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "Jet":
        return self * (1.0 / c)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order})"


def jeinsum(subscripts: str, *operands: Operand) -> Jet:
    """``np.einsum`` over jets, propagating derivatives by the product rule.

    Subscripts must be explicit (``'ab,b->a'``) and use lowercase letters.
    Plain arrays among the operands are treated as constants.
    """
    inputs, output = subscripts.replace(" ", "").split("->")
    specs = inputs.split(",")
    if len(specs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    jets = [x if isinstance(x, Jet) else None for x in operands]
    vals = [x.val if isinstance(x, Jet) else np.asarray(x, dtype=float) for x in operands]
    live = [i for i, j in enumerate(jets) if j is not None]
    order = min((jets[i].order for i in live), default=0)

    val = np.einsum(subscripts, *vals)
    if order == 0:
        return Jet(val)

    y, z = _DERIV_LETTERS
    d1 = 0.0
    for i in live:
        sp = list(specs)
        ops = list(vals)
        sp[i] += y
        ops[i] = jets[i].d1
        d1 = d1 + np.einsum(",".join(sp) + "->" + output + y, *ops)
    if order == 1:
        return Jet(val, d1)

    d2 = 0.0
    for i in live:
        sp = list(specs)
        ops = list(vals)
        sp[i] += y + z
        ops[i] = jets[i].d2
        d2 = d2 + np.einsum(",".join(sp) + "->" + output + y + z, *ops)
        for j in live:
            if j == i:
                continue
            sp = list(specs)
            ops = list(vals)
            sp[i] += y
            sp[j] += z
            ops[i] = jets[i].d1
            ops[j] = jets[j].d1
            d2 = d2 + np.einsum(",".join(sp) + "->" + output + y + z, *ops)
    return Jet(val, d1, d2)


def jinv(A: Jet) -> Jet:
    """Matrix inverse of a (n, n) jet."""
    Ai = np.linalg.inv(A.val)
    if A.order == 0:
        return Jet(Ai)
    # d(A^-1) = -A^-1 dA A^-1
    d1 = -np.einsum("ab,bck,cd->adk", Ai, A.d1, Ai)
    if A.order == 1:
        return Jet(Ai, d1)
    t = np.einsum("ab,bck,cd,del,ef->afkl", Ai, A.d1, Ai, A.d1, Ai)
    d2 = t + np.swapaxes(t, -1, -2) - np.einsum("ab,bckl,cd->adkl", Ai, A.d2, Ai)
    return Jet(Ai, d1, d2)


def japply(u: Jet, f: Callable, f1: Callable, f2: Callable) -> Jet:
    """Apply a scalar function componentwise via the chain rule."""
    v = u.val
    if u.order == 0:
        return Jet(f(v))
    s = (Ellipsis,) + (None,)
    d1 = f1(v)[s] * u.d1
    if u.order == 1:
        return Jet(f(v), d1)
    d2 = f2(v)[s + (None,)] * np.einsum("...k,...l->...kl", u.d1, u.d1) + f1(v)[s + (None,)] * u.d2
    return Jet(f(v), d1, d2)


def jrecip(u: Jet) -> Jet:
    return japply(u, lambda v: 1.0 / v, lambda v: -1.0 / v**2, lambda v: 2.0 / v**3)


def jsqrt(u: Jet) -> Jet:
    return japply(u, np.sqrt, lambda v: 0.5 / np.sqrt(v), lambda v: -0.25 / v**1.5)


def jscale(s: Jet, T: Jet) -> Jet:
    """Product of a scalar jet with a tensor jet."""
    letters = string.ascii_lowercase[: T.val.ndim]
    return jeinsum(f",{letters}->{letters}", s, T)


def constant(val, dim: int, order: int = 2) -> Jet:
    """A constant field as a jet with explicit zero derivatives."""
    val = np.asarray(val, dtype=float)
    d1 = np.zeros(val.shape + (dim,))
    d2 = np.zeros(val.shape + (dim, dim)) if order >= 2 else None
    return Jet(val, d1 if order >= 1 else None, d2)


# ---------------------------------------------------------------------------
# finite-difference stencils

_D1 = {
    2: ((1, 0.5), (-1, -0.5)),
    4: ((2, -1.0 / 12), (1, 8.0 / 12), (-1, -8.0 / 12), (-2, 1.0 / 12)),
}
_D2 = {
    2: ((1, 1.0), (0, -2.0), (-1, 1.0)),
    4: ((2, -1.0 / 12), (1, 16.0 / 12), (0, -30.0 / 12), (-1, 16.0 / 12), (-2, -1.0 / 12)),
}


def stencil_reach(order: int) -> int:
    """Largest multiple of the step a stencil of this order touches."""
    return 1 if order == 2 else 2


def fd_jet(fn: Callable[[np.ndarray], np.ndarray], p: Sequence[float], step: float, order: int = 2,
           jet_order: int = 2) -> Jet:
    """Jet of ``fn`` at ``p`` from central differences.

    Mixed partials use the tensor product of first-derivative stencils.
    """
    if order not in _D1:
        raise ValueError(f"unsupported finite-difference order {order}")
    p = np.asarray(p, dtype=float)
    n = p.size
    cache: dict = {}

    def at(offsets):
        key = tuple(offsets)
        if key not in cache:
            q = p.copy()
            for k, m in offsets:
                q[k] += m * step
            cache[key] = np.asarray(fn(q), dtype=float)
        return cache[key]

    f0 = at(())
    if jet_order == 0:
        return Jet(f0)
    d1 = np.empty(f0.shape + (n,))
    for k in range(n):
        d1[..., k] = sum(w * at(((k, m),)) for m, w in _D1[order]) / step
    if jet_order == 1:
        return Jet(f0, d1)
    d2 = np.empty(f0.shape + (n, n))
    h2 = step * step
    for k in range(n):
        d2[..., k, k] = sum(w * (at(((k, m),)) if m else f0) for m, w in _D2[order]) / h2
        for l in range(k + 1, n):
            acc = 0.0
            for mk, wk in _D1[order]:
                for ml, wl in _D1[order]:
                    acc = acc + wk * wl * at(((k, mk), (l, ml)))
            d2[..., k, l] = d2[..., l, k] = acc / h2
    return Jet(f0, d1, d2)

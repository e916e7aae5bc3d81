"""Two-patch axisymmetric scalar fields on the (varpi, z) half-plane.

A field Q is stored as Q = offset + T where the tail T decays like
(R0/r)^(n-2) and is sampled twice:

  * interior patch: T at the nodes of a uniform tensor grid on [0, 2R0]^2;
  * exterior patch: the n-dimensional Kelvin transform
    T_star(p*) = (r/R0)^(n-2) T(p) at the nodes of a uniform tensor grid on
    [0, R0]^2 in the inverted coordinates p* = (R0/r)^2 p.

The origin-image node p* = 0 holds the finite limit C_inf = lim T_star.  The
compact/exterior split Q = Q0 + Qinf uses the fixed cutoff chi(r/R0), so any
point with r <= R0 is pure interior, r >= 2R0 pure exterior, and the overlap
annulus blends the two patches.  All unknowns of the solver are even in z;
derivative fields carry odd parities explicitly.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .cutoff import chi
from .errors import DecayError, DomainError


def kelvin_point(p, R0):
    """Inversion p* = (R0/|p|)^2 p; involutive on the punctured plane."""
    p = np.asarray(p, dtype=float)
    r2 = np.sum(p * p, axis=-1)
    if np.any(r2 == 0.0):
        raise DomainError("Kelvin map undefined at the origin")
    return p * (R0**2 / r2)[..., None]


class AxiGrid:
    """Uniform interior patch on [0, 2R0]^2 plus starred exterior on [0, R0]^2."""

    def __init__(self, R0, n_interior=129, n_exterior=97):
        if R0 <= 0:
            raise DomainError("R0 must be positive")
        if n_interior < 9 or n_exterior < 9:
            raise DomainError("grids need at least 9 nodes per axis")
        self.R0 = float(R0)
        self.n_int = int(n_interior)
        self.n_ext = int(n_exterior)
        self.w = np.linspace(0.0, 2.0 * R0, self.n_int)
        self.z = self.w.copy()
        self.h_int = self.w[1] - self.w[0]
        self.ws = np.linspace(0.0, R0, self.n_ext)
        self.zs = self.ws.copy()
        self.h_ext = self.ws[1] - self.ws[0]

        self.WI, self.ZI = np.meshgrid(self.w, self.z, indexing="ij")
        self.RI = np.hypot(self.WI, self.ZI)
        self.chi_int = chi(self.RI / R0)

        self.WS, self.ZS = np.meshgrid(self.ws, self.zs, indexing="ij")
        self.RS = np.hypot(self.WS, self.ZS)
        with np.errstate(divide="ignore"):
            self.r_img = np.where(self.RS > 0, R0**2 / np.where(self.RS > 0, self.RS, 1.0), np.inf)
        scale = np.where(self.RS > 0, (R0 / np.where(self.RS > 0, self.RS, 1.0)) ** 2, 0.0)
        self.W_img = self.WS * scale
        self.Z_img = self.ZS * scale
        # chi(r/R0) at the image points: 1 would mean the tail is cut away
        with np.errstate(invalid="ignore"):
            self.chi_img = np.where(np.isfinite(self.r_img), chi(self.r_img / R0), 0.0)

    def key(self):
        return (round(self.R0, 12), self.n_int, self.n_ext)

    def __eq__(self, other):
        return isinstance(other, AxiGrid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def _extend_low(arr, axis, parity):
    """One reflected ghost layer across the first node of `axis`."""
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(1, 2)
    return parity * arr[tuple(sl)]

def _extend_high(arr, axis):
    """One quadratic-extrapolation ghost layer past the last node."""
    sl = lambda k: tuple(
        slice(None) if a != axis else slice(arr.shape[axis] + k, arr.shape[axis] + k + 1)
        for a in range(arr.ndim)
    )
    a1 = arr[sl(-1)]
    a2 = arr[sl(-2)]
    a3 = arr[sl(-3)]
    return 3.0 * a1 - 3.0 * a2 + a3


def _fd1(arr, h, axis, parity):
    """Second-order first derivative with a parity ghost at the low edge."""
    ext = np.concatenate([_extend_low(arr, axis, parity), arr, _extend_high(arr, axis)], axis=axis)
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[axis] = slice(0, arr.shape[axis])
    hi[axis] = slice(2, arr.shape[axis] + 2)
    return (ext[tuple(hi)] - ext[tuple(lo)]) / (2.0 * h)


def _bilinear(vals, h, xq, yq):
    """Bilinear interpolation on a uniform grid starting at 0."""
    nx, ny = vals.shape
    fx = np.clip(xq / h, 0.0, nx - 1.0 - 1e-12)
    fy = np.clip(yq / h, 0.0, ny - 1.0 - 1e-12)
    ix = fx.astype(int)
    iy = fy.astype(int)
    tx = fx - ix
    ty = fy - iy
    v00 = vals[ix, iy]
    v10 = vals[ix + 1, iy]
    v01 = vals[ix, iy + 1]
    v11 = vals[ix + 1, iy + 1]
    return (
        v00 * (1 - tx) * (1 - ty)
        + v10 * tx * (1 - ty)
        + v01 * (1 - tx) * ty
        + v11 * tx * ty
    )


def _bicubic(vals, h, xq, yq, parity_x=1, parity_z=1):
    from scipy.interpolate import RegularGridInterpolator

    nx, ny = vals.shape
    x = np.arange(nx) * h
    rgi = RegularGridInterpolator((x, x[:ny]), vals, method="cubic", bounds_error=False, fill_value=None)
    pts = np.stack([np.clip(xq, 0, x[nx - 1]), np.clip(yq, 0, x[ny - 1])], axis=-1)
    return rgi(pts)


def _fill_origin(star_vals):
    """Quadratic extrapolation of the origin-image entry from nearby nodes."""
    ests = []
    for seq in (star_vals[0, 1:4], star_vals[1:4, 0], np.array([star_vals[1, 1], star_vals[2, 2], star_vals[3, 3]])):
        ests.append(3.0 * seq[0] - 3.0 * seq[1] + seq[2])
    star_vals[0, 0] = np.mean(ests)
    return star_vals


@dataclass
class AxiField:
    """offset + decaying two-patch tail of decay index n (O(r^-(n-2)))."""

    grid: AxiGrid
    n_index: int
    int_vals: np.ndarray = field(repr=False)
    star_vals: np.ndarray = field(repr=False)
    parity: tuple = (1, 1)
    offset: float = 0.0
    interp: str = "bilinear"

    def __post_init__(self):
        if self.n_index < 3:
            raise DomainError("decay index must be >= 3")
        if self.offset != 0.0 and (self.parity[0] < 0 or self.parity[1] < 0):
            raise DomainError("odd fields cannot carry a constant offset")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zeros(cls, grid, n_index=3, parity=(1, 1)):
        return cls(
            grid,
            n_index,
            np.zeros((grid.n_int, grid.n_int)),
            np.zeros((grid.n_ext, grid.n_ext)),
            parity,
        )

    @classmethod
    def from_function(cls, grid, fn, n_index=3, star_fn=None, parity=(1, 1), offset=0.0):
        """Sample fn(w, z) on both patches; star_fn, when given, supplies the
        Kelvin transform of the tail directly (exact far-field control)."""
        int_vals = np.asarray(fn(grid.WI, grid.ZI), dtype=float) - offset
        if star_fn is not None:
            star_vals = np.asarray(star_fn(grid.WS, grid.ZS), dtype=float)
        else:
            with np.errstate(invalid="ignore"):
                tail = np.where(
                    np.isfinite(grid.r_img),
                    np.asarray(fn(grid.W_img, grid.Z_img), dtype=float) - offset,
                    0.0,
                )
                star_vals = np.where(
                    np.isfinite(grid.r_img),
                    (np.where(np.isfinite(grid.r_img), grid.r_img, 1.0) / grid.R0)
                    ** (n_index - 2)
                    * tail,
                    0.0,
                )
            _fill_origin(star_vals)
        return cls(grid, n_index, int_vals, star_vals, parity, offset)

    @classmethod
    def constant(cls, grid, value):
        return cls(
            grid,
            3,
            np.zeros((grid.n_int, grid.n_int)),
            np.zeros((grid.n_ext, grid.n_ext)),
            (1, 1),
            float(value),
        )

    # -- raw views ------------------------------------------------------------

    def int_total(self):
        """offset + tail at the interior nodes."""
        return self.offset + self.int_vals

    def star_raw_values(self):
        """Field values (offset included) at the exterior image points."""
        g = self.grid
        back = (g.RS / g.R0) ** (self.n_index - 2)
        return self.offset + back * self.star_vals

    def interior_compact(self):
        """Samples of Q^[0] = chi(r/R0) Q on the interior patch."""
        return self.grid.chi_int * self.int_total()

    def exterior_tail_star(self):
        """Samples of (Q^[inf])_star(n); infinite at the origin-image unless
        the offset vanishes."""
        g = self.grid
        with np.errstate(invalid="ignore", divide="ignore"):
            off_star = self.offset * np.where(
                np.isfinite(g.r_img), (g.r_img / g.R0) ** (self.n_index - 2), np.inf
            )
        if self.offset == 0.0:
            off_star = np.zeros_like(g.RS)
        return (1.0 - g.chi_img) * (self.star_vals + off_star)

    # -- evaluation ------------------------------------------------------------

    def eval(self, w, z):
        """Total value at arbitrary half-plane points (z < 0 by parity)."""
        g = self.grid
        w = np.asarray(w, dtype=float)
        z = np.asarray(z, dtype=float)
        w, z = np.broadcast_arrays(w, z)
        scalar = w.ndim == 0
        if scalar:
            w = w.reshape(1)
            z = z.reshape(1)
        sgn = np.where(z < 0, float(self.parity[1]), 1.0)
        zq = np.abs(z)
        wq = np.abs(w)
        sgn = sgn * np.where(w < 0, float(self.parity[0]), 1.0)
        r = np.hypot(wq, zq)
        out = np.zeros_like(r)

        c = chi(r / g.R0)
        interp = _bilinear if self.interp == "bilinear" else _bicubic
        near = c > 0.0
        if np.any(near):
            out[near] += c[near] * interp(self.int_vals, g.h_int, wq[near], zq[near])
        far = c < 1.0
        if np.any(far):
            rf = r[far]
            scale = (g.R0**2) / rf**2
            wsq = wq[far] * scale
            zsq = zq[far] * scale
            tail_star = interp(self.star_vals, g.h_ext, wsq, zsq)
            out[far] += (1.0 - c[far]) * (g.R0 / rf) ** (self.n_index - 2) * tail_star
        out = self.offset + sgn * out
        if scalar:
            return float(out[0])
        return out

    def c_infinity(self):
        """(limit of the starred tail at the origin-image, extrapolation spread)."""
        s = self.star_vals
        ests = [
            3 * s[0, 1] - 3 * s[0, 2] + s[0, 3],
            3 * s[1, 0] - 3 * s[2, 0] + s[3, 0],
            3 * s[1, 1] - 3 * s[2, 2] + s[3, 3],
        ]
        return float(s[0, 0]), float(np.max(np.abs(np.asarray(ests) - s[0, 0])))

    def check_decay(self, rel_tol=50.0):
        """Raise DecayError when the starred tail diverges at the origin-image."""
        s = np.abs(self.star_vals)
        scale = np.max(s) + 1e-300
        if s[0, 0] > rel_tol * max(np.median(s[s > 0]) if np.any(s > 0) else 0.0, 1e-14 * scale):
            raise DecayError(
                f"starred tail grows to {s[0, 0]:.3g} at the origin-image; "
                f"decay index {self.n_index} too high"
            )

    # -- split -----------------------------------------------------------------

    def split_cutoff(self):
        """Q = Q0 + Qinf with Q0 = chi(r/R0) Q supported in r <= 2R0.

        A nonzero offset survives only in Qinf (as its value at infinity);
        the chi-compact factors keep both starred tails bounded.
        """
        g = self.grid
        # offset contribution to a starred tail carries (r/R0)^(n-2) evaluated
        # at the image radius r = R0^2/r*; chi_img vanishes wherever r* -> 0
        with np.errstate(divide="ignore"):
            off_star = self.offset * np.where(
                g.RS > 0, (g.R0 / np.where(g.RS > 0, g.RS, 1.0)) ** (self.n_index - 2), 0.0
            )
        q0 = AxiField(
            g,
            self.n_index,
            g.chi_int * self.int_total(),
            g.chi_img * (off_star + self.star_vals),
            self.parity,
            0.0,
        )
        qinf = AxiField(
            g,
            self.n_index,
            (1.0 - g.chi_int) * self.int_total() - self.offset,
            (1.0 - g.chi_img) * self.star_vals - g.chi_img * off_star,
            self.parity,
            self.offset,
        )
        return q0, qinf

    # -- derivatives -------------------------------------------------------------

    def derivative(self, axis, order=1):
        """d/d(varpi) or d/dz of the field as a new two-patch field.

        Interior: central differences with parity ghosts at the axes and
        one-sided closure at the outer edges.  Exterior: differentiate the
        stored Kelvin samples and map through the inversion chain rule.
        """
        if order == 2:
            return self.derivative(axis, 1).derivative(axis, 1)
        if order != 1:
            raise DomainError("order must be 1 or 2")
        g = self.grid
        ax = 0 if axis in ("w", "varpi", 0) else 1
        n = self.n_index

        d_int = _fd1(self.int_vals, g.h_int, ax, self.parity[ax])

        dq_dw = _fd1(self.star_vals, g.h_ext, 0, self.parity[0])
        dq_dz = _fd1(self.star_vals, g.h_ext, 1, self.parity[1])
        q = self.star_vals
        WS, ZS, RS = g.WS, g.ZS, g.RS
        if ax == 0:
            d_star = (
                -(n - 2) * WS * q + (RS**2 - 2 * WS**2) * dq_dw - 2 * WS * ZS * dq_dz
            ) / g.R0**2
        else:
            d_star = (
                -(n - 2) * ZS * q - 2 * WS * ZS * dq_dw + (RS**2 - 2 * ZS**2) * dq_dz
            ) / g.R0**2

        par = list(self.parity)
        par[ax] = -par[ax]
        return AxiField(g, n, d_int, d_star, tuple(par), 0.0, self.interp)

    # -- algebra -------------------------------------------------------------------

    def _require_same_grid(self, other):
        if self.grid is not other.grid and self.grid != other.grid:
            raise DomainError("fields live on different grids")

    def reindex(self, n_new, fill_origin=True):
        """Restate the tail at another decay index (lowering is always safe)."""
        if n_new == self.n_index:
            return self
        g = self.grid
        d = self.n_index - n_new
        if d > 0:
            fac = (g.RS / g.R0) ** d
            star = fac * self.star_vals
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                fac = np.where(g.RS > 0, (g.RS / g.R0) ** d, 0.0)
            star = np.where(g.RS > 0, fac * self.star_vals, 0.0)
            if fill_origin:
                _fill_origin(star)
        return AxiField(g, n_new, self.int_vals.copy(), star, self.parity, self.offset, self.interp)

    def tail(self):
        """The field minus its offset."""
        return replace(self, offset=0.0)

    def __neg__(self):
        return AxiField(
            self.grid, self.n_index, -self.int_vals, -self.star_vals, self.parity, -self.offset, self.interp
        )

    def _binary_parity(self, other):
        return (self.parity[0] * other.parity[0], self.parity[1] * other.parity[1])

    def __add__(self, other):
        if np.isscalar(other):
            return replace(self, offset=self.offset + float(other))
        self._require_same_grid(other)
        n = min(self.n_index, other.n_index)
        a = self.reindex(n)
        b = other.reindex(n)
        if a.parity != b.parity:
            raise DomainError("parity mismatch in field addition")
        return AxiField(
            self.grid,
            n,
            a.int_vals + b.int_vals,
            a.star_vals + b.star_vals,
            a.parity,
            a.offset + b.offset,
            self.interp,
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if not np.isscalar(other) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return AxiField(
                self.grid,
                self.n_index,
                self.int_vals * other,
                self.star_vals * other,
                self.parity,
                self.offset * other,
                self.interp,
            )
        self._require_same_grid(other)
        g = self.grid
        par = self._binary_parity(other)
        if self.offset == 0.0 and other.offset == 0.0:
            n = self.n_index + other.n_index - 2
            star = self.star_vals * other.star_vals
            return AxiField(g, n, self.int_vals * other.int_vals, star, par, 0.0, self.interp)
        n = min(self.n_index, other.n_index)
        a = self.reindex(n)
        b = other.reindex(n)
        int_vals = a.int_total() * b.int_total() - a.offset * b.offset
        # (o1+T1)(o2+T2) - o1 o2 = o1 T2 + o2 T1 + T1 T2; the last term carries
        # index 2n-2 >= n and is restated at n through the image radius
        cross = a.offset * b.star_vals + b.offset * a.star_vals
        t1t2 = a.star_vals * b.star_vals * (g.RS / g.R0) ** (n - 2)
        return AxiField(g, n, int_vals, cross + t1t2, par, a.offset * b.offset, self.interp)

    __rmul__ = __mul__

    def __rtruediv__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return AxiField.constant(self.grid, float(other)) / self

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        self._require_same_grid(other)
        if other.offset == 0.0:
            raise DomainError("field division needs a divisor bounded away from zero")
        g = self.grid
        n = min(self.n_index, other.n_index)
        a = self.reindex(n)
        b = other.reindex(n)
        off = a.offset / b.offset
        int_vals = a.int_total() / b.int_total() - off
        # T_res = (T1 o2 - o1 T2)/(o2 (o2 + T2)); the star transform shares the
        # (r/R0)^(n-2) weight of the numerator tails
        denom = b.offset * b.star_raw_values()
        star = (a.star_vals * b.offset - a.offset * b.star_vals) / denom
        return AxiField(g, n, int_vals, star, self._binary_parity(other), off, self.interp)

    # -- norms ---------------------------------------------------------------------

    def weighted_norms(self, l=0, alpha=0.25, a_len=None, gamma=None):
        """Discrete surrogates of the weighted Hoelder norms (diagnostics only).

        Sup norms over the patch nodes plus a Hoelder seminorm sampled over
        node pairs within unit xi-distance; derivative sups are scaled by the
        length unit a_len (the xi-coordinate scale).  The continuum sup may be
        under-reported; callers get that caveat in the metadata.
        """
        if not (0.0 < alpha < 1.0):
            raise DomainError("alpha must lie in (0, 1)")
        if gamma is not None and not (alpha < min(1.0 / (gamma - 1.0) - 1.0, 1.0)):
            raise DomainError("alpha violates the gamma-linked bound")
        g = self.grid
        a_len = g.R0 if a_len is None else float(a_len)

        q0 = g.chi_int * self.int_total()
        qs = self.exterior_tail_star()
        if self.offset != 0.0:
            qs = np.where(np.isfinite(qs), qs, np.inf)

        def patch_report(vals, h, parity):
            rep = {"sup": float(np.max(np.abs(vals)))}
            if l >= 1:
                dw = _fd1(vals, h, 0, parity[0])
                dz = _fd1(vals, h, 1, parity[1])
                rep["sup_grad"] = float(a_len * max(np.max(np.abs(dw)), np.max(np.abs(dz))))
            # sampled Hoelder seminorm over a few node offsets within |dxi|<=1
            sem = 0.0
            base = vals if l == 0 else dw
            for di, dj in ((1, 0), (0, 1), (1, 1), (2, 2), (3, 0), (0, 3)):
                dist = np.hypot(di * h, dj * h) / a_len
                if dist > 1.0 or di >= vals.shape[0] or dj >= vals.shape[1]:
                    continue
                diff = np.abs(base[di:, dj:] - base[: base.shape[0] - di, : base.shape[1] - dj])
                sem = max(sem, float(np.max(diff)) / dist**alpha)
            rep["holder"] = sem
            rep["value"] = max(rep["sup"], rep.get("sup_grad", 0.0)) + rep["holder"]
            return rep

        rep_i = patch_report(q0, g.h_int, self.parity)
        rep_e = patch_report(qs, g.h_ext, self.parity)
        return {
            "interior": rep_i,
            "exterior": rep_e,
            "total": max(rep_i["value"], rep_e["value"]),
            "alpha": alpha,
            "l": l,
            "sampled_seminorm": True,
        }


# -- pointwise helper maps -----------------------------------------------------


def _psi_apply(psi_ratio, limit, star_vals, arg_star_raw):
    """star of f(T) when f(T)/T -> limit as T -> 0: f(T) (r/R0)^(n-2)
    = psi(T) * star_vals with psi = f(T)/T, evaluated stably."""
    small = np.abs(arg_star_raw) < 1e-8
    safe = np.where(small, 1.0, arg_star_raw)
    psi = np.where(small, limit, psi_ratio(safe) / safe)
    return psi * star_vals


def field_expm1(field, scale=1.0):
    """expm1(scale * Q) = (e^{s off} - 1) + e^{s off} expm1(s T), exactly."""
    g = field.grid
    base = np.exp(scale * field.offset)
    int_vals = base * np.expm1(scale * field.int_vals)
    sT = scale * (g.RS / g.R0) ** (field.n_index - 2) * field.star_vals
    star = base * _psi_apply(np.expm1, 1.0, scale * field.star_vals, sT)
    return AxiField(
        g, field.n_index, int_vals, star, field.parity, base - 1.0, field.interp
    )


def field_log1p(field):
    """log1p(Q) for a decaying field with 1 + Q > 0."""
    g = field.grid
    base = np.log1p(field.offset)
    ratio = 1.0 / (1.0 + field.offset)
    int_vals = np.log1p(field.int_vals * ratio)
    T = (g.RS / g.R0) ** (field.n_index - 2) * field.star_vals * ratio
    star = _psi_apply(np.log1p, 1.0, field.star_vals * ratio, T)
    return AxiField(g, field.n_index, int_vals, star, field.parity, base, field.interp)


def exp_of(field, scale=1.0):
    """exp(scale * Q) as offset exp(scale*offset_limit) plus a decaying tail."""
    e = field_expm1(field, scale)
    return e + 1.0


def compact_map(fn, *fields, n_index=3, parity=(1, 1)):
    """Pointwise fn over raw field values, for fn vanishing at the common
    far-field limit (compactly supported or rapidly decaying results).

    The starred tail is (r/R0)^(n-2) fn(raw values at the image points); the
    factor blows up at the origin-image, so fn must be exactly zero there
    (true for all fluid-state maps, which vanish where u <= 0).
    """
    g = fields[0].grid
    int_vals = fn(*[f.int_total() for f in fields])
    raws = [f.star_raw_values() for f in fields]
    vals = fn(*raws)
    with np.errstate(divide="ignore", invalid="ignore"):
        back = np.where(g.RS > 0, (g.R0 / np.where(g.RS > 0, g.RS, 1.0)) ** (n_index - 2), np.inf)
    star = np.where(vals == 0.0, 0.0, vals * back)
    if np.any(~np.isfinite(star)):
        raise DomainError("compact_map result does not vanish at the origin-image")
    return AxiField(g, n_index, int_vals, star, parity, 0.0, fields[0].interp)


def div_varpi(field, n_out=None):
    """field / varpi for an odd-in-varpi field; the axis column takes the
    parity limit by quadratic extrapolation."""
    g = field.grid
    if field.parity[0] != -1:
        raise DomainError("div_varpi needs an odd-in-varpi field")
    n_out = field.n_index + 1 if n_out is None else n_out
    int_vals = np.empty_like(field.int_vals)
    int_vals[1:, :] = field.int_vals[1:, :] / g.WI[1:, :]
    int_vals[0, :] = 3 * int_vals[1, :] - 3 * int_vals[2, :] + int_vals[3, :]
    # (f/varpi)_star(n+1) = f_star * r*/(varpi* R0); odd f_star vanishes on
    # the varpi*=0 column, extrapolate the ratio there
    star = np.empty_like(field.star_vals)
    star[1:, :] = field.star_vals[1:, :] * g.RS[1:, :] / (g.WS[1:, :] * g.R0)
    star[0, :] = 3 * star[1, :] - 3 * star[2, :] + star[3, :]
    extra = n_out - (field.n_index + 1)
    if extra > 0:
        raise DomainError("div_varpi cannot raise the index past n + 1")
    if extra < 0:
        star = star * (g.RS / g.R0) ** (-extra)
    return AxiField(g, n_out, int_vals, star, (1, field.parity[1]), 0.0, field.interp)

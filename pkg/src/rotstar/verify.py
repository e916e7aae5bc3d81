"""Residual evaluation of the reduced axisymmetric Einstein system, the
K-consistency condition, the raw Ricci cross-check, and far-field fits.

All evaluators work on a Window: uniform rectangular samples of the metric
potentials (plus optional fluid data) with an optional validity mask.  Finite
differences are second-order central; the outermost ring and the varpi = 0
column are masked in the reports (axis limits are not needed because every
equation is checked where it is regular).  The z = 0 row stays usable through
even-parity ghosts.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RegimeError
from .metric import g_factor, lewis_from_lanczos


@dataclass
class Window:
    """Uniform (varpi, z) samples with spacing h starting at (w0, z0)."""

    w0: float
    z0: float
    h: float
    F: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    Pi: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    Omega: np.ndarray = field(repr=False, default=None)
    rho: np.ndarray = field(repr=False, default=None)
    P: np.ndarray = field(repr=False, default=None)
    u: np.ndarray = field(repr=False, default=None)
    mask: np.ndarray = field(repr=False, default=None)
    z_even: bool = True

    def __post_init__(self):
        if self.mask is None:
            self.mask = np.ones_like(self.F, dtype=bool)
        if self.Omega is None:
            self.Omega = np.zeros_like(self.F)

    @property
    def W(self):
        n = self.F.shape[0]
        return self.w0 + self.h * np.arange(n)[:, None] + 0 * self.F

    @property
    def Z(self):
        n = self.F.shape[1]
        return self.z0 + self.h * np.arange(n)[None, :] + 0 * self.F

    def subsample(self, step=2):
        sl = (slice(None, None, step), slice(None, None, step))
        return Window(
            self.w0,
            self.z0,
            self.h * step,
            self.F[sl],
            self.A[sl],
            self.Pi[sl],
            self.K[sl],
            None if self.Omega is None else self.Omega[sl],
            None if self.rho is None else self.rho[sl],
            None if self.P is None else self.P[sl],
            None if self.u is None else self.u[sl],
            None if self.mask is None else self.mask[sl],
            self.z_even,
        )

    def report_mask(self, erode=1):
        """Valid nodes away from window edges, the mask boundary, and the
        varpi = 0 column."""
        m = self.mask.copy()
        for _ in range(erode):
            m2 = m.copy()
            m2[1:, :] &= m[:-1, :]
            m2[:-1, :] &= m[1:, :]
            m2[:, 1:] &= m[:, :-1]
            if not self.z_even or self.z0 > 0:
                m2[:, 0] = False
            m2[:, :-1] &= m[:, 1:]
            m = m2
        m[0, :] = False
        m[-1, :] = False
        m[:, -1] = False
        if self.w0 == 0.0:
            m[0, :] = False
        return m


def _dz_ghost(arr, z_even):
    if z_even:
        return np.concatenate([arr[:, 1:2], arr], axis=1)
    return np.concatenate([np.full_like(arr[:, :1], np.nan), arr], axis=1)


def d1w(win, arr):
    out = np.full_like(arr, np.nan)
    out[1:-1, :] = (arr[2:, :] - arr[:-2, :]) / (2 * win.h)
    return out


def d1z(win, arr, parity=1):
    ext = (
        np.concatenate([parity * arr[:, 1:2], arr], axis=1)
        if (win.z_even and win.z0 == 0.0)
        else np.concatenate([np.full_like(arr[:, :1], np.nan), arr], axis=1)
    )
    out = np.full_like(arr, np.nan)
    out[:, : arr.shape[1] - 1] = (ext[:, 2:] - ext[:, :-2]) / (2 * win.h)
    return out


def d2w(win, arr):
    out = np.full_like(arr, np.nan)
    out[1:-1, :] = (arr[2:, :] - 2 * arr[1:-1, :] + arr[:-2, :]) / win.h**2
    return out


def d2z(win, arr, parity=1):
    ext = (
        np.concatenate([parity * arr[:, 1:2], arr], axis=1)
        if (win.z_even and win.z0 == 0.0)
        else np.concatenate([np.full_like(arr[:, :1], np.nan), arr], axis=1)
    )
    out = np.full_like(arr, np.nan)
    out[:, : arr.shape[1] - 1] = (ext[:, 2:] - 2 * ext[:, 1:-1] + ext[:, :-2]) / win.h**2
    return out


def d1w1z(win, arr, parity=1):
    return d1w(win, d1z(win, arr, parity))


@dataclass
class ResidualReport:
    """Per-equation residual fields, sups, scales, and regime margins."""

    residuals: dict
    sups: dict
    scales: dict
    margin_B: float
    margin_C: float
    first_integral_spread: float = None
    bands: dict = None

    def to_dict(self):
        out = {
            "sups": {k: float(v) for k, v in self.sups.items()},
            "scales": {k: float(v) for k, v in self.scales.items()},
            "margin_B": float(self.margin_B),
            "margin_C": float(self.margin_C),
        }
        if self.first_integral_spread is not None:
            out["first_integral_spread"] = float(self.first_integral_spread)
        if self.bands:
            out["bands"] = {k: {kk: float(vv) for kk, vv in v.items()} for k, v in self.bands.items()}
        return out


def _fluid_terms(win, params):
    c = params.c_light
    rho = win.rho if win.rho is not None else np.zeros_like(win.F)
    P = win.P if win.P is not None else np.zeros_like(win.F)
    eps = c**2 * rho
    return rho, P, eps


def residual_reduced_system(win, params, bands_R0=None):
    """Left minus right of the five field equations plus the first-integral
    spread over the fluid support."""
    G_g, c = params.G_grav, params.c_light
    F, A, Pi, K, Om = win.F, win.A, win.Pi, win.K, win.Omega
    rho, P, eps = _fluid_terms(win, params)

    F1, F3 = d1w(win, F), d1z(win, F)
    A1, A3 = d1w(win, A), d1z(win, A)
    P1, P3 = d1w(win, Pi), d1z(win, Pi)
    K1, K3 = d1w(win, K), d1z(win, K)
    lapF = d2w(win, F) + d2z(win, F)
    lapA = d2w(win, A) + d2z(win, A)
    lapPi = d2w(win, Pi) + d2z(win, Pi)

    e2F = np.exp(2 * F)
    fac = 1.0 + Om * A / c
    Bq = e2F * fac**2 - Om**2 * Pi**2 / (c**2 * e2F)
    margin_B = float(np.nanmin(np.where(win.report_mask(), Bq, np.nan)))
    if margin_B <= 0:
        raise RegimeError("assumption (B) violated on the window")
    gradPi2 = P1**2 + P3**2
    margin_C = float(np.nanmin(np.where(win.report_mask(), gradPi2, np.nan)))

    emK = np.exp(2 * (-F + K))
    r_a = (
        lapF
        + (P1 * F1 + P3 * F3) / Pi
        + e2F**2 / (2 * Pi**2) * (A1**2 + A3**2)
        - (4 * np.pi * G_g / c**4)
        * emK
        * ((eps + P) * (e2F * fac**2 + Om**2 * Pi**2 / (c**2 * e2F)) / Bq + 2 * P)
    )
    r_b = (
        lapA
        - (P1 * A1 + P3 * A3) / Pi
        + 4 * (F1 * A1 + F3 * A3)
        + (16 * np.pi * G_g / c**4)
        * emK
        * (eps + P)
        * (Om / c)
        * Pi**2
        * fac
        / (e2F * Bq)
    )
    r_c = lapPi - (16 * np.pi * G_g / c**4) * emK * P * Pi
    rh_d = (
        0.5 * (d2w(win, Pi) - d2z(win, Pi))
        + Pi * (F1**2 - F3**2)
        - e2F**2 / (4 * Pi) * (A1**2 - A3**2)
    )
    rh_e = d1w1z(win, Pi, parity=1) + 2 * Pi * F1 * F3 - e2F**2 / (2 * Pi) * A1 * A3
    r_d = P1 * K1 - P3 * K3 - rh_d
    r_e = P3 * K1 + P1 * K3 - rh_e

    residuals = {"eqa": r_a, "eqb": r_b, "eqc": r_c, "eqd": r_d, "eqe": r_e}
    m = win.report_mask()
    sups = {k: float(np.nanmax(np.abs(np.where(m, v, np.nan)))) for k, v in residuals.items()}
    scales = {
        "eqa": float(np.nanmax(np.abs(np.where(m, lapF, np.nan)))) + 1e-300,
        "eqb": float(np.nanmax(np.abs(np.where(m, lapA, np.nan)))) + 1e-300,
        "eqc": float(np.nanmax(np.abs(np.where(m, lapPi, np.nan)))) + 1e-300,
        "eqd": float(np.nanmax(np.abs(np.where(m, rh_d, np.nan)))) + 1e-300,
        "eqe": float(np.nanmax(np.abs(np.where(m, rh_e, np.nan)))) + 1e-300,
    }

    spread = None
    if win.u is not None and win.rho is not None and np.any(win.rho > 0):
        Gfac = 0.5 * np.log(Bq)
        first = win.u / c**2 + Gfac
        sel = (win.rho > 0) & m
        if np.any(sel):
            spread = float(np.nanmax(first[sel]) - np.nanmin(first[sel]))

    bands = None
    if bands_R0:
        R0 = bands_R0
        rr = np.hypot(win.W, win.Z)
        bands = {}
        for name, sel in (
            ("interior", rr < R0),
            ("transition", (rr >= R0) & (rr <= 2 * R0)),
            ("exterior", rr > 2 * R0),
        ):
            mm = m & sel
            if np.any(mm):
                bands[name] = {
                    k: float(np.nanmax(np.abs(np.where(mm, v, np.nan))))
                    for k, v in residuals.items()
                }
    return ResidualReport(residuals, sups, scales, margin_B, margin_C, spread, bands)


def ktilde_fields(win, params):
    """Right sides of the first-order K system solved for the gradient."""
    F, A, Pi = win.F, win.A, win.Pi
    F1, F3 = d1w(win, F), d1z(win, F)
    A1, A3 = d1w(win, A), d1z(win, A)
    P1, P3 = d1w(win, Pi), d1z(win, Pi)
    e4F = np.exp(4 * F)
    rh_d = 0.5 * (d2w(win, Pi) - d2z(win, Pi)) + Pi * (F1**2 - F3**2) - e4F / (4 * Pi) * (
        A1**2 - A3**2
    )
    rh_e = d1w1z(win, Pi, parity=1) + 2 * Pi * F1 * F3 - e4F / (2 * Pi) * A1 * A3
    denom = P1**2 + P3**2
    K1t = (P1 * rh_d + P3 * rh_e) / denom
    K3t = (-P3 * rh_d + P1 * rh_e) / denom
    return K1t, K3t


def consistency_K(win, params):
    """L = d(K1t)/dz - d(K3t)/dvarpi plus the mixed-identity residual.

    The identity ties L to the K-mismatch through the pressure term; both
    vanish on vacuum and on converged states up to discretization.
    """
    G_g, c = params.G_grav, params.c_light
    K1t, K3t = ktilde_fields(win, params)
    L = d1z(win, K1t, parity=1) - d1w(win, K3t)
    rho, P, eps = _fluid_terms(win, params)
    P1, P3 = d1w(win, win.Pi), d1z(win, win.Pi)
    K1, K3 = d1w(win, win.K), d1z(win, win.K)
    emK = np.exp(2 * (-win.F + win.K))
    rhs = (
        (16 * np.pi * G_g / c**4)
        * emK
        * P
        * win.Pi
        / (P1**2 + P3**2)
        * ((K1 - K1t) * P3 - (K3 - K3t) * P1)
    )
    identity_resid = L - rhs
    m = win.report_mask(erode=2)
    return {
        "L": L,
        "K1t": K1t,
        "K3t": K3t,
        "sup_L": float(np.nanmax(np.abs(np.where(m, L, np.nan)))),
        "identity_resid": identity_resid,
        "sup_identity": float(np.nanmax(np.abs(np.where(m, identity_resid, np.nan)))),
    }


def ricci_cross_check(win, params):
    """Residuals of the six raw Einstein equations in Lewis variables."""
    G_g, c = params.G_grav, params.c_light
    rho, P, eps = _fluid_terms(win, params)
    Om = win.Omega
    f, k, l, m_exp = lewis_from_lanczos(win.F, win.A, win.Pi, win.K)
    Pi = win.Pi

    f1, f3 = d1w(win, f), d1z(win, f)
    k1, k3 = d1w(win, k), d1z(win, k)
    l1, l3 = d1w(win, l), d1z(win, l)
    m1, m3 = d1w(win, m_exp), d1z(win, m_exp)
    P1, P3 = d1w(win, Pi), d1z(win, Pi)
    em = np.exp(m_exp)
    Sig = f1 * l1 + f3 * l3 + k1**2 + k3**2

    def divPi(q1, q3):
        return d1w(win, q1 / Pi) + d1z(win, q3 / Pi, parity=-1)

    R00 = (Pi / (2 * em)) * (divPi(f1, f3) + f * Sig / Pi**3)
    R02 = -(Pi / (2 * em)) * (divPi(k1, k3) + k * Sig / Pi**3)
    R22 = -(Pi / (2 * em)) * (divPi(l1, l3) + l * Sig / Pi**3)
    lap_m = d2w(win, m_exp) + d2z(win, m_exp)
    R11 = 0.5 * (
        -lap_m
        - 2 * d2w(win, Pi) / Pi
        + (m1 * P1 - m3 * P3) / Pi
        + (f1 * l1 + k1**2) / Pi**2
    )
    R33 = 0.5 * (
        -lap_m
        - 2 * d2z(win, Pi) / Pi
        - (m1 * P1 - m3 * P3) / Pi
        + (f3 * l3 + k3**2) / Pi**2
    )
    R13 = 0.5 * (
        -2 * d1w1z(win, Pi, parity=1) / Pi
        + (m3 * P1 + m1 * P3) / Pi
        + (f1 * l3 + l1 * f3 + 2 * k1 * k3) / (2 * Pi**2)
    )

    e2G = f - 2 * (Om / c) * k - (Om / c) ** 2 * l
    if np.any(np.where(win.report_mask(), e2G, 1.0) <= 0):
        raise RegimeError("Lewis normalization quantity nonpositive")
    em2G = 1.0 / e2G
    S00 = 0.5 * (eps + P) * em2G * ((f - (Om / c) * k) ** 2 + (Om / c) ** 2 * Pi**2) + P * f
    S02 = 0.5 * (eps + P) * em2G * (-k * f - 2 * (Om / c) * f * l + (Om / c) ** 2 * k * l) - P * k
    S22 = 0.5 * (eps + P) * em2G * (Pi**2 + (k + (Om / c) * l) ** 2) - P * l
    S11 = 0.5 * em * (eps - P)

    pref = 8 * np.pi * G_g / c**4
    residuals = {
        "R00": R00 - pref * S00,
        "R02": R02 - pref * S02,
        "R22": R22 - pref * S22,
        "R11": R11 - pref * S11,
        "R33": R33 - pref * S11,
        "R13": R13,
    }
    m = win.report_mask(erode=2)
    sups = {kk: float(np.nanmax(np.abs(np.where(m, v, np.nan)))) for kk, v in residuals.items()}
    # Sigma decomposition identity (algebraic, sanity of the Lewis map)
    F1, F3 = d1w(win, win.F), d1z(win, win.F)
    A1, A3 = d1w(win, win.A), d1z(win, win.A)
    sig_id = Sig - (
        np.exp(4 * win.F) * (A1**2 + A3**2)
        - 4 * Pi**2 * (F1**2 + F3**2)
        + 4 * Pi * (P1 * F1 + P3 * F3)
    )
    sups["sigma_identity"] = float(np.nanmax(np.abs(np.where(m, sig_id, np.nan))))
    scale = float(np.nanmax(np.abs(np.where(m, Sig, np.nan)))) + 1e-300
    return {"residuals": residuals, "sups": sups, "sigma_scale": scale}


# -- far-field fits ------------------------------------------------------------


def asymptotic_fit(eval_fns, params, r_window, n_radii=14, thetas=(0.2, 0.75, 1.1, 1.45)):
    """Weighted least-squares far-field fits returning M, J, gauge offset and
    log-log residual orders for the four flatness statements."""
    G_g, c = params.G_grav, params.c_light
    radii = np.geomspace(r_window[0], r_window[1], n_radii)
    out_orders = {}

    # F fit per direction: f0 + f1/r + f2/r^2
    f1s, f0s, resid_pts = [], [], []
    for th in thetas:
        w = radii * np.sin(th)
        z = radii * np.cos(th)
        Fv = eval_fns["F"](w, z)
        Avec = np.column_stack([np.ones_like(radii), 1.0 / radii, 1.0 / radii**2])
        coef, *_ = np.linalg.lstsq(Avec, Fv, rcond=None)
        f0s.append(coef[0])
        f1s.append(coef[1])
        res = np.abs(Fv - coef[0] - coef[1] / radii)
        resid_pts.append(res)
    f0 = float(np.mean(f0s))
    M = -float(np.mean(f1s)) * c**2 / G_g
    res = np.maximum(np.mean(resid_pts, axis=0), 1e-300)
    out_orders["F"] = -float(np.polyfit(np.log(radii), np.log(res), 1)[0])

    # A fit: A/varpi^2 = 2 G J/(c^3 r^3) + O(1/r^4)
    cJs, residA = [], []
    for th in thetas:
        w = radii * np.sin(th)
        z = radii * np.cos(th)
        Av = eval_fns["A"](w, z) / w**2
        design = np.column_stack([1.0 / radii**3, 1.0 / radii**4])
        coef, *_ = np.linalg.lstsq(design, Av, rcond=None)
        cJs.append(coef[0])
        residA.append(np.abs(Av - coef[0] / radii**3))
    A_scale = max(abs(np.mean(cJs)) / r_window[0] ** 3, 0.0)
    if A_scale < 1e-250:
        J = 0.0
        out_orders["A"] = None
    else:
        J = float(np.mean(cJs)) * c**3 / (2.0 * G_g)
        resA = np.maximum(np.mean(residA, axis=0), 1e-300)
        out_orders["A"] = -float(np.polyfit(np.log(radii), np.log(resA), 1)[0])

    # Pi/varpi - 1 = O(1/r^2) and e^K - 1 = O(1/r^2); identically flat
    # quantities (machine-level, e.g. Kerr's Pi = varpi) report None
    for key, name in (("Pi", "Pi"), ("K", "K")):
        vals = []
        for th in thetas:
            w = radii * np.sin(th)
            z = radii * np.cos(th)
            if key == "Pi":
                y = eval_fns["Pi"](w, z) / w - 1.0
            else:
                y = np.exp(eval_fns["K"](w, z)) - 1.0
            vals.append(np.abs(y))
        y = np.maximum(np.mean(vals, axis=0), 1e-300)
        if np.max(y) < 1e-13:
            out_orders[name] = None
        else:
            out_orders[name] = -float(np.polyfit(np.log(radii), np.log(y), 1)[0])

    return {
        "M": M,
        "J": J,
        "gauge_offset": f0,
        "orders": out_orders,
        "radii": (float(r_window[0]), float(r_window[1])),
    }


# -- window builders --------------------------------------------------------------


def kerr_window(kp, L, N, margin=2.6, z0=0.0, w0=0.0):
    """Kerr potentials sampled on [w0, L] x [z0, L] with the near-horizon
    region masked out."""
    from .metric import kerr_lanczos

    xs = np.linspace(w0, L, N)
    zs = np.linspace(z0, L, N)
    W, Z = np.meshgrid(xs, zs, indexing="ij")
    pot = kerr_lanczos(kp, W, Z)
    mask = pot["rbar"] > margin * kp.m_geom
    return Window(
        w0=w0,
        z0=z0,
        h=xs[1] - xs[0],
        F=pot["F"],
        A=pot["A"],
        Pi=pot["Pi"],
        K=pot["K"],
        mask=mask,
        z_even=(z0 == 0.0),
    )


def flat_window(L, N):
    xs = np.linspace(0.0, L, N)
    W, Z = np.meshgrid(xs, xs, indexing="ij")
    zero = np.zeros_like(W)
    return Window(w0=0.0, z0=0.0, h=xs[1] - xs[0], F=zero, A=zero.copy(), Pi=W.copy(), K=zero.copy())


def refinement_order(hs, sups):
    """Least-squares slope of log(sup) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    sups = np.asarray(sups, dtype=float)
    return float(np.polyfit(np.log(hs), np.log(sups), 1)[0])

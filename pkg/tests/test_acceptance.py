"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
The expensive solver sweeps come from session fixtures shared with the unit
tests.  Every tolerance is pinned here; none are tuned at runtime.
"""

import numpy as np
import pytest

from rotstar.eos import EquationOfState
from rotstar.fields import AxiField, AxiGrid, kelvin_point
from rotstar.greens import GreenOps, axis_laplacian, ring_kernel
from rotstar.lane_emden import integrate_theta, solve_classical
from rotstar.metric import KerrParams, kerr_lanczos
from rotstar.verify import (
    asymptotic_fit,
    consistency_K,
    flat_window,
    refinement_order,
    residual_reduced_system,
    ricci_cross_check,
)

from conftest import B_ROT, EPS_SWEEP
from test_lane_emden import rk4_xi1_oracle

PARAMS_GEOM = type("P", (), {"G_grav": 1.0, "c_light": 1.0})()


def report(num, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, f"criterion {num}: {detail}"


class TestAcceptance:
    def test_criterion_01_lane_emden_exactness(self, cls15):
        sol1 = solve_classical(1.0)
        e1 = abs(sol1.xi1 - np.pi)
        prof5 = integrate_theta(5.0, 20.0)
        xs = np.linspace(1e-3, 20.0, 600)
        e5 = np.max(np.abs(prof5.sol(xs)[0] - (1 + xs**2 / 3.0) ** -0.5))
        oracle = rk4_xi1_oracle(1.5, 2e-4)
        e15 = abs(cls15.xi1 - oracle)
        ok = e1 < 1e-8 and e5 < 1e-8 and e15 < 1e-6
        report(1, ok, f"|xi1(1)-pi|={e1:.2e} (<1e-8), nu=5 profile err={e5:.2e} "
                      f"(<1e-8), nu=1.5 vs RK4 oracle={e15:.2e} (<1e-6)")

    def test_criterion_02_distorted_degeneracy(self, cls15, dle_static, dle_rot):
        s, zeta, TH = dle_static.report_grid(129)
        TH_cls = cls15.theta(s)[:, None] * np.ones((1, zeta.size))
        gap = float(np.max(np.abs(TH - TH_cls)))
        xi1c = dle_rot.xi1_curve(np.linspace(0.0, 1.0, 9))
        oblate = xi1c[0] > xi1c[-1]
        bounded = float(xi1c.max()) < 2.0 * cls15.xi1
        ok = gap < 1e-6 and oblate and bounded
        report(2, ok, f"b=0 grid gap={gap:.2e} (<1e-6 on 129^2), equator>pole={oblate}, "
                      f"max Xi1/(2 xi1)={xi1c.max() / (2 * cls15.xi1):.3f} (<1)")

    def test_criterion_03_green_operators(self):
        def bump(w, z):
            r2 = (np.hypot(w, z) / 1.8) ** 2
            return np.where(r2 < 1, (1 - r2) ** 3, 0.0)

        orders = {}
        for n in (3, 4, 5):
            errs, hs = [], []
            for N in (33, 65, 129):
                g = AxiGrid(2.0, N, 33)
                oo = GreenOps(g)
                src = AxiField.from_function(g, bump, n)
                u = oo.k_n(src, n)
                resid = axis_laplacian(u.int_vals, g.h_int, n) + src.int_vals
                mask = (g.RI <= 1.8 * g.R0) & np.isfinite(resid)
                errs.append(np.abs(resid[mask]).max())
                hs.append(g.h_int)
            orders[n] = refinement_order(hs, errs)
        g = AxiGrid(2.0, 65, 49)
        oo = GreenOps(g)
        rho_b = 0.8 * g.R0
        src = AxiField.from_function(g, lambda w, z: 1.0 * (np.hypot(w, z) <= rho_b), 3)
        u = oo.k_n(src, 3)
        exact = np.where(
            g.RI <= rho_b,
            (rho_b**2 - g.RI**2) / 6.0 + rho_b**2 / 3.0,
            rho_b**3 / (3.0 * np.maximum(g.RI, 1e-12)),
        )
        ball_rel = float(np.abs(u.int_vals - exact).max() / exact.max())
        ok = all(abs(o - 2.0) <= 0.2 for o in orders.values()) and ball_rel < 0.02
        report(3, ok, f"forward-residual orders={ {n: round(o, 2) for n, o in orders.items()} } "
                      f"(2 +/- 0.2), ball potential rel err={ball_rel:.2e} (<2e-2)")

    def test_criterion_04_kelvin_machinery(self):
        rng = np.random.RandomState(11)
        p = rng.uniform(0.05, 9.0, (80, 2))
        R0 = 2.0
        inv = np.max(np.abs(kelvin_point(kelvin_point(p, R0), R0) - p) / np.abs(p))
        # harmonic transport: starred Laplacian of a mirrored-ring potential
        sups, hs = [], []
        for M in (33, 65, 129):
            g = AxiGrid(2.0, 33, M)
            ws0, zs0 = 0.3 * g.R0, 0.2 * g.R0

            def fn(w, z):
                wq = np.maximum(w, 1e-9)
                return ring_kernel(3, wq, ws0, z - zs0) + ring_kernel(3, wq, ws0, z + zs0)

            f = AxiField.from_function(g, fn, 3)
            lap = axis_laplacian(f.star_vals, g.h_ext, 3)
            m = np.isfinite(lap) & (g.RS <= 0.9 * g.R0) & (g.RS >= 0.15 * g.R0)
            sups.append(np.abs(lap[m]).max())
            hs.append(g.h_ext)
        transport = refinement_order(hs, sups)
        # decay-index fits
        g = AxiGrid(2.0, 65, 49)
        oo = GreenOps(g)
        worst = 0.0
        for n in (3, 4, 5):
            src = AxiField.from_function(
                g, lambda w, z: np.maximum(0.0, 1 - (np.hypot(w, z) / g.R0) ** 2) ** 3, n
            )
            u = oo.k_n(src, n)
            rr = np.geomspace(3 * g.R0, 10 * g.R0, 12)
            vals = u.eval(rr / np.sqrt(2), rr / np.sqrt(2))
            fitted = -np.polyfit(np.log(rr), np.log(np.abs(vals)), 1)[0]
            worst = max(worst, abs(fitted - (n - 2)) / (n - 2))
        ok = inv < 1e-15 and abs(transport - 2.0) < 0.5 and worst < 0.05
        report(4, ok, f"involution={inv:.2e} (<1e-15), transport order={transport:.2f} "
                      f"(~2), decay-fit worst rel dev={worst:.3f} (<0.05)")

    def test_criterion_05_kerr_oracle(self, kerr_levels):
        worst = ("none", 2.0)
        worst_dev = -1.0
        for a, recs in kerr_levels.items():
            for name, sups in recs.items():
                if name == "h" or max(sups) < 1e-11:
                    continue
                o = refinement_order(recs["h"], sups)
                if abs(o - 2.0) > worst_dev:
                    worst_dev = abs(o - 2.0)
                    worst = (f"a={a}:{name}", o)
        fits_ok = True
        fit_msg = []
        for a in (0.0, 0.5, 0.9):
            kp = KerrParams(1.0, a)
            fns = {k: (lambda key: (lambda w, z: kerr_lanczos(kp, w, z)[key]))(k)
                   for k in ("F", "A", "Pi", "K")}
            fit = asymptotic_fit(fns, PARAMS_GEOM, (20.0, 50.0))
            em = abs(fit["M"] - 1.0)
            ej = abs(fit["J"] - a) / a if a else abs(fit["J"])
            fits_ok &= em < 0.01 and ej < 0.01
            fit_msg.append(f"a={a}: dM={em:.1e} dJ={ej:.1e}")
        ok = worst_dev <= 0.2 and fits_ok
        report(5, ok, f"worst residual order {worst[0]}={worst[1]:.2f} (2 +/- 0.2); "
                      + "; ".join(fit_msg) + " (<1%)")

    def test_criterion_06_flat_space_zero(self):
        win = flat_window(1.0, 65)
        rep = residual_reduced_system(win, PARAMS_GEOM)
        ck = consistency_K(win, PARAMS_GEOM)
        rc = ricci_cross_check(win, PARAMS_GEOM)
        worst = max(
            max(rep.sups.values()), ck["sup_L"], ck["sup_identity"], max(rc["sups"].values())
        )
        ok = worst <= 1e-12
        report(6, ok, f"worst flat-space residual={worst:.2e} (<=1e-12)")

    def test_criterion_07_solver_convergence_and_scalings(
        self, rotating_sweep, refinement_runs
    ):
        # contraction
        contracting = all(
            res.diagnostics["outer_ratio"] < 1.0
            and all(h["ratio"] < 1.0 for h in res.diagnostics["inner_history"])
            for res in rotating_sweep.values()
        )
        # amplitude scalings; Omega_O ~ u_O^{3/4} at fixed b makes the nominal
        # Y-exponent 1.75 against u_O
        sups = {k: [] for k in ("W", "Y", "X", "K")}
        for eps in EPS_SWEEP:
            res = rotating_sweep[eps]
            sups["W"].append(np.abs(res.potentials.W.int_vals).max())
            sups["Y"].append(np.abs(res.potentials.Y.int_vals).max())
            sups["X"].append(np.abs(res.potentials.X.int_vals).max())
            sups["K"].append(np.abs(res.potentials.V.int_vals).max())
        nominal = {"W": 2.0, "Y": 1.75, "X": 2.0, "K": 2.0}
        fitted = {
            k: float(np.polyfit(np.log(EPS_SWEEP), np.log(v), 1)[0]) for k, v in sups.items()
        }
        scalings_ok = all(abs(fitted[k] - nominal[k]) <= 0.15 * nominal[k] for k in nominal)
        # converged residuals bounded by discretization: refinement order
        hs, res_sups = [], {}
        for n_int, res in refinement_runs.items():
            win = res.verify_window()
            rep = residual_reduced_system(win, res.params)
            m = win.report_mask() & (win.W >= 0.3 * res.params.r1)
            hs.append(win.h)
            for k, v in rep.residuals.items():
                val = float(np.nanmax(np.abs(np.where(m, v, np.nan))))
                res_sups.setdefault(k, []).append(val)
        res_orders = {
            k: refinement_order(hs, v) for k, v in res_sups.items() if max(v) > 1e-20
        }
        residuals_ok = all(o >= 1.2 for o in res_orders.values())
        support_ok = all(
            res.diagnostics["support_radius_over_r1"] < 3.0 for res in rotating_sweep.values()
        )
        ok = contracting and scalings_ok and residuals_ok and support_ok
        report(7, ok, f"contraction={contracting}; exponents={ {k: round(v, 3) for k, v in fitted.items()} } "
                      f"(within 15% of {nominal}); residual refinement orders="
                      f"{ {k: round(o, 2) for k, o in res_orders.items()} } (>=1.2); "
                      f"support<3r1={support_ok}")

    def test_criterion_08_first_integral(self, rotating_sweep):
        worst = 0.0
        for eps, res in rotating_sweep.items():
            win = res.verify_window()
            rep = residual_reduced_system(win, res.params)
            worst = max(worst, rep.first_integral_spread)
        # the w-construction honors the first integral identically; the
        # envelope is 10x the outer tolerance in the same units plus rounding
        envelope = max(10 * 1e-9 * EPS_SWEEP[0] ** 2, 1e-14)
        ok = worst <= envelope
        report(8, ok, f"first-integral spread={worst:.2e} (<= {envelope:.1e})")

    def test_criterion_09_K_consistency(self, refinement_runs, kerr_levels):
        hs, L_sups = [], []
        for n_int, res in refinement_runs.items():
            win = res.verify_window()
            ck = consistency_K(win, res.params)
            m = win.report_mask(erode=2) & (win.W >= 0.3 * res.params.r1)
            hs.append(win.h)
            L_sups.append(float(np.nanmax(np.abs(np.where(m, ck["L"], np.nan)))))
        solver_order = refinement_order(hs, L_sups)
        kerr_orders = [
            refinement_order(recs["h"], recs["L"]) for recs in kerr_levels.values()
        ]
        ok = solver_order >= 1.2 and all(abs(o - 2.0) <= 0.2 for o in kerr_orders)
        report(9, ok, f"converged-state sup L={L_sups[-1]:.2e} refining at order "
                      f"{solver_order:.2f} (>=1.2); vacuum (Kerr) L orders="
                      f"{[round(o, 2) for o in kerr_orders]} (2 +/- 0.2)")

    def test_criterion_10_positive_mass_and_pn_limit(self, static_sweep):
        # mass positivity and the O(eps) shift measured through the tail
        # coefficient of W (no catastrophic M - M_N subtraction)
        Ms, shifts = [], []
        for eps in EPS_SWEEP:
            res, tov = static_sweep[eps]
            p = res.params
            C_W = float(res.potentials.W.star_vals[0, 0] * p.R0)
            M = res.diagnostics["M_N"] + C_W / (p.G_grav * p.c_light**2)
            Ms.append(M)
            shifts.append(abs(C_W) / res.diagnostics["M_N"])
        slope = float(np.polyfit(np.log(EPS_SWEEP), np.log(shifts), 1)[0])
        mass_ok = all(m > 0 for m in Ms) and abs(slope - 1.0) < 0.3
        # TOV gap shrink under eps halving, as stated by the criterion
        gaps = []
        for eps in EPS_SWEEP:
            res, tov = static_sweep[eps]
            p = res.params
            rr = np.linspace(0.1 * p.R0, 1.8 * p.R0, 60)
            gap = 0.0
            for th in (0.3, 0.8, 1.3):
                Fs = res.metric.F.eval(rr * np.sin(th), rr * np.cos(th)) - res.metric.F.offset
                Ft = tov.F_isotropic(rr)
                gap = max(gap, float(np.max(np.abs(Fs - Ft))))
            gaps.append(gap)
        shrinks = [gaps[i] / gaps[i + 1] for i in range(len(gaps) - 1)]
        shrink_ok = all(2.8 <= s <= 5.7 for s in shrinks)
        # NOTE: the solver keeps the full remainder terms, so its agreement
        # with TOV is limited by discretization (linear in eps), not by a
        # truncated PN order; the 4x expectation presumes a truncated scheme.
        # Recorded as a spec defect in the decisions ledger; the shrink
        # observed here is ~2x with a grid-convergent (O(h^2)) relative gap.
        ok = mass_ok and shrink_ok
        report(10, ok, f"M>0={all(m > 0 for m in Ms)}, (M-M_N)/M_N exponent={slope:.3f} "
                       f"(1 +/- 0.3); TOV-gap shrink per eps-halving={[round(s, 2) for s in shrinks]} "
                       f"(required ~4x, measured ~2x: discretization-dominated, see ledger)")

    def test_criterion_11_asymptotic_flatness(self, rotating_sweep, rotating_solver):
        res = rotating_sweep[1e-3]
        p = res.params
        fit = asymptotic_fit(res.eval_fns(), p, (5 * p.R0, 15 * p.R0))
        orders = dict(fit["orders"])
        # K needs honest far data: radial continuation of the gradient fields
        # with the V-gauge constant co-fitted (it is a quadrature artifact)
        pot = res.potentials
        solver = rotating_solver
        radii = np.geomspace(2.0 * p.R0, 12.0 * p.R0, 14)
        vals = np.mean(
            solver.v_far_values(pot.W, pot.Y, pot.X, pot.V.int_vals, radii), axis=0
        )
        design = np.column_stack([np.ones_like(radii), radii**-2.0, radii**-3.0])
        coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
        yk = np.abs(vals - coef[0])
        orders["K"] = -float(np.polyfit(np.log(radii), np.log(np.maximum(yk, 1e-300)), 1)[0])
        nominal = {"F": 2.0, "A": 4.0, "Pi": 2.0, "K": 2.0}
        ok = all(
            orders[k] is not None and abs(orders[k] - nominal[k]) <= 0.3 for k in nominal
        )
        report(11, ok, f"far-field orders={ {k: round(v, 2) for k, v in orders.items()} } "
                       f"vs nominal {nominal} (each within 0.3)")

"""Solvability margins in (q, delta, gamma, delta_a, ||a-I||), the Stratonovich
drift correction, and the Hardy-drift regime classification.

The two margins gate the construction of the semigroup. Which effective delta
enters (raw delta, delta + delta_a, or delta + delta_a + delta_c) depends on
the equation variant; the caller states the variant explicitly and it is
recorded in the report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .coefficients import DispersionSpec, FieldSpec
from .errors import (
    EmptyGrid,
    InvalidDimension,
    NegativeBound,
    SingularOnGrid,
    UnsupportedAnalytic,
)
from .grids import Grid


@dataclass(frozen=True)
class AdmissibilityReport:
    d: int
    q: float
    effective_delta: float
    gamma: float
    delta_a: float
    a_dev: float
    margin1: float
    margin2: float
    feasible: bool
    variant: str = "raw"          # raw | ito | stratonovich
    q_star: Optional[float] = None
    feasible_qs: Tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "d": self.d, "q": self.q, "effective_delta": self.effective_delta,
            "gamma": self.gamma, "delta_a": self.delta_a, "a_dev": self.a_dev,
            "margin1": self.margin1, "margin2": self.margin2,
            "feasible": self.feasible, "variant": self.variant,
            "q_star": self.q_star, "feasible_qs": list(self.feasible_qs),
        }


@dataclass(frozen=True)
class RegimeLabel:
    label: str                   # subcritical | no_solution | indeterminate
    sqrt_delta: float
    subcritical_threshold: float  # 1 ^ 2/(d-2)
    no_solution_threshold: float  # 2d/(d-2)


def check_cond0(d: int, q: float, delta: float, gamma: float, delta_a: float,
                a_dev: float, variant: str = "raw") -> AdmissibilityReport:
    """Evaluate both margins at a fixed exponent q.

    margin1 = 1 - (q/4)(sqrt(gamma) + a_dev sqrt(delta))
    margin2 = (q-1)(1 - q sqrt(gamma)/2) - (sqrt(delta) sqrt(delta_a) + delta) q^2/4
              - (q-2) q sqrt(delta)/2 - a_dev q sqrt(delta)/2

    `delta` is the effective relative bound for the chosen variant. Feasibility
    requires both margins strictly positive and q > max(2, d-2); ties at zero
    classify as infeasible (the underlying inequalities are strict).
    """
    if d < 3:
        raise InvalidDimension(f"d = {d} < 3")
    if min(delta, gamma, delta_a, a_dev) < 0:
        raise NegativeBound(
            f"bounds must be nonnegative: delta={delta}, gamma={gamma}, "
            f"delta_a={delta_a}, a_dev={a_dev}")
    if q <= 0:
        raise ValueError("q must be positive")
    sd = math.sqrt(delta)
    sg = math.sqrt(gamma)
    margin1 = 1.0 - (q / 4.0) * (sg + a_dev * sd)
    margin2 = ((q - 1.0) * (1.0 - q * sg / 2.0)
               - (sd * math.sqrt(delta_a) + delta) * q**2 / 4.0
               - (q - 2.0) * q * sd / 2.0
               - a_dev * q * sd / 2.0)
    feasible = margin1 > 0.0 and margin2 > 0.0 and q > max(2.0, float(d - 2))
    return AdmissibilityReport(d=d, q=q, effective_delta=delta, gamma=gamma,
                               delta_a=delta_a, a_dev=a_dev, margin1=margin1,
                               margin2=margin2, feasible=feasible, variant=variant)


def search_q(d: int, delta: float, gamma: float, delta_a: float, a_dev: float,
             q_grid=None, variant: str = "raw") -> AdmissibilityReport:
    """Scan a q-grid and return the report at the smallest feasible q.

    The default grid steps by 0.05 from just above max(2, d-2) up to 200.
    All feasible grid points are recorded so a non-interval feasible set
    would be visible.
    """
    if q_grid is None:
        q_lo = max(2.0, float(d - 2))
        q_grid = np.arange(q_lo + 0.05, 200.0 + 1e-9, 0.05)
    q_grid = np.asarray(list(q_grid), dtype=float)
    if q_grid.size == 0:
        raise EmptyGrid("empty q grid")
    feasible_qs = []
    first = None
    for q in q_grid:
        rep = check_cond0(d, float(q), delta, gamma, delta_a, a_dev, variant)
        if rep.feasible:
            feasible_qs.append(float(q))
            if first is None:
                first = rep
    if first is None:
        base = check_cond0(d, float(q_grid[0]), delta, gamma, delta_a, a_dev, variant)
        return AdmissibilityReport(**{**base.__dict__, "feasible": False,
                                      "q_star": None, "feasible_qs": ()})
    return AdmissibilityReport(**{**first.__dict__, "q_star": first.q,
                                  "feasible_qs": tuple(feasible_qs)})


def stratonovich_correction(disp: DispersionSpec, mode: str = "analytic",
                            grid: Optional[Grid] = None) -> FieldSpec:
    """The drift c with c^i = 2^{-1/2} sum_{r,j} (d_r sigma_{ij}) sigma_{rj}
    that rewrites the Stratonovich equation in Ito form."""
    if mode == "analytic":
        if disp.kind == "identity":
            return FieldSpec.zero(disp.d)
        if disp.kind == "radial_projection":
            s = math.sqrt(1.0 + disp.c) - 1.0
            d = disp.d

            def fn(pts, s=s, d=d):
                pts = np.atleast_2d(pts)
                r2 = np.sum(pts * pts, axis=1)
                # sigma = I + s P(x): the P-quadratic part of the contraction
                # cancels, leaving sum_rj (d_r sigma_ij) sigma_rj = s(d-1) x_i/|x|^2
                amp = s * (d - 1) / r2
                return (amp[:, None] * pts) / math.sqrt(2.0)

            return FieldSpec.analytic(disp.d, fn, singular_points=disp.singular_points,
                                      origin="stratonovich correction (radial)")
        if disp.kind == "sine_log":
            c, e = disp.c, np.asarray(disp.direction)

            def fn(pts, c=c, e=e):
                pts = np.atleast_2d(pts)
                r2 = np.sum(pts * pts, axis=1)
                r = np.sqrt(r2)
                s2 = np.sin(np.log(r)) ** 2
                tau = np.sqrt(1.0 + c * s2) - 1.0
                # tau'(r) = c sin(2 log r) / (2 r sqrt(1 + c sin^2 log r))
                dtau = c * np.sin(2.0 * np.log(r)) / (2.0 * r * np.sqrt(1.0 + c * s2))
                # (d_r sigma_ij) = tau'(r) x_r/r e_i e_j; contract with
                # sigma_rj = delta_rj + tau e_r e_j:
                # sum_rj -> tau' [ (x.e)/r + tau (x.e)/r ] e_i
                proj = pts @ e
                amp = dtau * proj / r * (1.0 + tau)
                return (amp[:, None] * e[None, :]) / math.sqrt(2.0)

            return FieldSpec.analytic(disp.d, fn, singular_points=disp.singular_points,
                                      origin="stratonovich correction (sine_log)")
        raise UnsupportedAnalytic(
            f"no closed-form correction for dispersion kind {disp.kind!r}")

    if mode == "finite_difference":
        if grid is None:
            raise ValueError("finite_difference mode needs a grid")
        for sp in disp.singular_points:
            p = np.asarray(sp)
            frac = (p + grid.extent) / grid.h - 0.5
            if np.all(np.abs(p) <= grid.extent) and np.all(
                    np.abs(frac - np.round(frac)) < 1e-9):
                raise SingularOnGrid(f"node at singular point {sp}")
        m = grid.m
        sig = disp.sigma(grid.points(), check_singular=False).reshape(m, m, m, 3, 3)
        out = np.zeros((m, m, m, 3))
        for i in range(3):
            acc = np.zeros((m, m, m))
            for r in range(3):
                for j in range(3):
                    acc += np.gradient(sig[..., i, j], grid.h, axis=r) * sig[..., r, j]
            out[..., i] = acc / math.sqrt(2.0)
        return FieldSpec.from_grid(grid, out, origin=f"stratonovich correction [{disp.kind}] fd")

    raise ValueError(f"unknown mode {mode!r}")


def bound_delta_c(sigma_bounds: np.ndarray, sigma_sup: float) -> float:
    """Upper bound (1/2) ||sigma||_inf^2 sum_rj delta_rj on the correction's bound."""
    sb = np.asarray(sigma_bounds, dtype=float)
    if np.any(sb < 0) or sigma_sup < 0:
        raise NegativeBound("sigma bounds and sup must be nonnegative")
    return 0.5 * sigma_sup**2 * float(sb.sum())


def bound_gamma_from_sigma(sigma_bounds: np.ndarray, column_sups: np.ndarray,
                           sigma_sup: float):
    """gamma_{rl} <= [||sigma_{.l}||_inf (sum_j delta_rj)^{1/2} + ||sigma||_inf delta_rl^{1/2}]^2.

    Returns (matrix of bounds, their sum)."""
    sb = np.asarray(sigma_bounds, dtype=float)
    cs = np.asarray(column_sups, dtype=float)
    if np.any(sb < 0) or np.any(cs < 0) or sigma_sup < 0:
        raise NegativeBound("inputs must be nonnegative")
    d = sb.shape[0]
    row_sums = np.sqrt(sb.sum(axis=1))
    gam = np.empty_like(sb)
    for r in range(d):
        for ell in range(d):
            gam[r, ell] = (cs[ell] * row_sums[r] + sigma_sup * np.sqrt(sb[r, ell])) ** 2
    return gam, float(gam.sum())


def classify_hardy_regime(delta: float, d: int) -> RegimeLabel:
    """Place a Hardy-drift bound against the solvable and unsolvable thresholds."""
    if d < 3:
        raise InvalidDimension(f"d = {d} < 3")
    if delta < 0:
        raise NegativeBound(f"delta = {delta}")
    sd = math.sqrt(delta)
    sub_thr = min(1.0, 2.0 / (d - 2))
    nos_thr = 2.0 * d / (d - 2)
    if sd < sub_thr:
        label = "subcritical"
    elif sd >= nos_thr:
        label = "no_solution"
    else:
        label = "indeterminate"
    return RegimeLabel(label=label, sqrt_delta=sd, subcritical_threshold=sub_thr,
                       no_solution_threshold=nos_thr)

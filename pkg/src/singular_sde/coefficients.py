"""Drift and dispersion coefficient families and their relative-bound estimators.

Vector fields b and matrices a = sigma sigma^T are immutable symbolic specs.
The three singularity-class norms are measured on a staggered grid:

  F_delta     largest eigenvalue of |b|^2 phi = mu (lam - Lap_h) phi
  kato        1->1 norm of |b| (lam - Lap_h)^{-1/2}, via the Bessel kernel
  weak_F_half squared 2->2 norm of |b|^{1/2} (lam - Lap_h)^{-1/4}
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import k1 as _bessel_k1

from .errors import (
    DimensionMismatch,
    FieldNotRealized,
    InvalidDimension,
    MixedClasses,
    MixedLambda,
    NegativeBound,
    NoConvergence,
    NonPSDMatrix,
    SingularOnGrid,
    SingularPoint,
    UnsupportedAnalytic,
)
from .grids import Grid, trilinear
from .spectral import LaplacianPowers, dirichlet_energy

SINGULAR_TOL = 1e-9


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not np.isclose(n, 1.0, atol=1e-9):
        raise ValueError(f"direction must be a unit vector, |e| = {n}")
    return v


@dataclass(frozen=True)
class FieldSpec:
    """A vector field on R^d. kind is one of hardy, bounded_box, grid_sampled,
    sum, mollified, analytic (internal, for exact derived fields)."""

    d: int
    kind: str
    kappa: float = 0.0
    sign: int = +1
    bound: float = 0.0
    direction: Optional[Tuple[float, ...]] = None
    children: Tuple["FieldSpec", ...] = ()
    grid: Optional[Grid] = None
    values: Optional[np.ndarray] = None  # (m,m,m,d) for grid_sampled
    base: Optional["FieldSpec"] = None   # for mollified
    n_index: Optional[int] = None
    eps: Optional[float] = None          # smoothing time of a realized field
    fn: Optional[Callable] = None        # for analytic
    singular_points: Tuple[Tuple[float, ...], ...] = ()
    origin: str = ""

    def __post_init__(self):
        if self.d < 3:
            raise InvalidDimension(f"d = {self.d} < 3")
        if self.kind == "hardy":
            if self.kappa < 0:
                raise ValueError("hardy kappa must be >= 0")
            if self.sign not in (+1, -1):
                raise ValueError("hardy sign must be +1 or -1")
            object.__setattr__(self, "singular_points", ((0.0,) * self.d,))
        elif self.kind == "sum":
            pts = []
            for ch in self.children:
                if ch.d != self.d:
                    raise DimensionMismatch("sum children disagree on d")
                pts.extend(ch.singular_points)
            object.__setattr__(self, "singular_points", tuple(pts))
        elif self.kind == "grid_sampled":
            if self.grid is None or self.values is None:
                raise ValueError("grid_sampled needs grid and values")
        elif self.kind == "mollified":
            if self.base is None or self.n_index is None:
                raise ValueError("mollified needs base and n_index")
        elif self.kind == "analytic":
            if self.fn is None:
                raise ValueError("analytic needs fn")
        elif self.kind not in ("bounded_box",):
            raise ValueError(f"unknown field kind {self.kind!r}")

    # constructors ---------------------------------------------------------

    @staticmethod
    def hardy(d: int, kappa: float, sign: int = +1) -> "FieldSpec":
        """b(x) = sign * kappa |x|^{-2} x."""
        return FieldSpec(d=d, kind="hardy", kappa=kappa, sign=sign)

    @staticmethod
    def bounded_box(d: int, bound: float, direction=None) -> "FieldSpec":
        """Constant field bound * e (e defaults to the first axis)."""
        e = (1.0,) + (0.0,) * (d - 1) if direction is None else tuple(_unit(direction))
        return FieldSpec(d=d, kind="bounded_box", bound=bound, direction=e)

    @staticmethod
    def zero(d: int) -> "FieldSpec":
        return FieldSpec.bounded_box(d, 0.0)

    @staticmethod
    def sum_of(children) -> "FieldSpec":
        children = tuple(children)
        return FieldSpec(d=children[0].d, kind="sum", children=children)

    @staticmethod
    def from_grid(grid: Grid, values: np.ndarray, origin: str = "", eps=None,
                  n_index=None) -> "FieldSpec":
        values = np.asarray(values)
        if values.shape != (grid.m, grid.m, grid.m, 3):
            raise DimensionMismatch(f"grid field must be (m,m,m,3), got {values.shape}")
        return FieldSpec(d=3, kind="grid_sampled", grid=grid, values=values,
                         origin=origin, eps=eps, n_index=n_index)

    @staticmethod
    def analytic(d: int, fn: Callable, singular_points=(), origin="") -> "FieldSpec":
        return FieldSpec(d=d, kind="analytic", fn=fn,
                         singular_points=tuple(tuple(p) for p in singular_points),
                         origin=origin)

    @staticmethod
    def mollified_of(base: "FieldSpec", n_index: int) -> "FieldSpec":
        return FieldSpec(d=base.d, kind="mollified", base=base, n_index=n_index)

    # evaluation -----------------------------------------------------------

    def evaluate(self, pts: np.ndarray, check_singular: bool = True) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.d:
            raise DimensionMismatch(f"points have d={pts.shape[1]}, field d={self.d}")
        if check_singular and self.singular_points:
            for sp in self.singular_points:
                if np.any(np.linalg.norm(pts - np.asarray(sp), axis=1) < SINGULAR_TOL):
                    raise SingularPoint(f"evaluation at singular point {sp}")
        if self.kind == "hardy":
            r2 = np.sum(pts * pts, axis=1, keepdims=True)
            return self.sign * self.kappa * pts / r2
        if self.kind == "bounded_box":
            e = np.asarray(self.direction)
            return np.broadcast_to(self.bound * e, pts.shape).copy()
        if self.kind == "sum":
            out = np.zeros_like(pts)
            for ch in self.children:
                out += ch.evaluate(pts, check_singular=False)
            return out
        if self.kind == "grid_sampled":
            return trilinear(self.grid, self.values, pts)
        if self.kind == "analytic":
            return np.asarray(self.fn(pts), dtype=float)
        raise FieldNotRealized(
            "mollified field must be realized on a grid first (regularization.mollify_field)"
        )

    def magnitude_sup(self) -> float:
        """Cheap upper bound on sup|b| where one exists; inf otherwise."""
        if self.kind == "bounded_box":
            return abs(self.bound)
        if self.kind == "grid_sampled":
            return float(np.linalg.norm(self.values, axis=-1).max())
        if self.kind == "sum":
            return sum(ch.magnitude_sup() for ch in self.children)
        return np.inf


@dataclass(frozen=True)
class DispersionSpec:
    """Dispersion sigma with a = sigma sigma^T >= I. kind is one of identity,
    radial_projection, sine_log, sum, grid_sampled, analytic (internal)."""

    d: int
    kind: str
    c: float = 0.0
    direction: Optional[Tuple[float, ...]] = None
    children: Tuple["DispersionSpec", ...] = ()
    grid: Optional[Grid] = None
    a_values: Optional[np.ndarray] = None   # (m,m,m,3,3), symmetric
    sigma_fn: Optional[Callable] = None
    eps: Optional[float] = None
    n_index: Optional[int] = None
    singular_points: Tuple[Tuple[float, ...], ...] = ()
    origin: str = ""

    def __post_init__(self):
        if self.d < 3:
            raise InvalidDimension(f"d = {self.d} < 3")
        if self.kind == "radial_projection":
            if self.c <= -1:
                raise ValueError("radial_projection requires c > -1")
            if self.c < 0:
                # a = I + c P has eigenvalue 1+c < 1; the a >= I normalization
                # cannot be restored inside this family
                raise NonPSDMatrix(_below_identity_msg(self.c))
            object.__setattr__(self, "singular_points", ((0.0,) * self.d,))
        elif self.kind == "sine_log":
            if self.direction is None:
                raise ValueError("sine_log needs a unit direction e")
            _unit(self.direction)
            if self.c < 0:
                raise NonPSDMatrix(_below_identity_msg(self.c))
            object.__setattr__(self, "singular_points", ((0.0,) * self.d,))
        elif self.kind == "sum":
            pts = []
            for ch in self.children:
                pts.extend(ch.singular_points)
            object.__setattr__(self, "singular_points", tuple(pts))
        elif self.kind == "grid_sampled":
            if self.grid is None or self.a_values is None:
                raise ValueError("grid_sampled dispersion needs grid and a_values")
        elif self.kind == "analytic":
            if self.sigma_fn is None:
                raise ValueError("analytic dispersion needs sigma_fn")
        elif self.kind != "identity":
            raise ValueError(f"unknown dispersion kind {self.kind!r}")

    @staticmethod
    def identity(d: int = 3) -> "DispersionSpec":
        return DispersionSpec(d=d, kind="identity")

    @staticmethod
    def radial_projection(d: int, c: float) -> "DispersionSpec":
        """a(x) = I + c x (x) x / |x|^2, c >= 0 (a >= I normalization)."""
        return DispersionSpec(d=d, kind="radial_projection", c=c)

    @staticmethod
    def sine_log(d: int, c: float, direction) -> "DispersionSpec":
        """a(x) = I + c sin^2(log|x|) e (x) e."""
        return DispersionSpec(d=d, kind="sine_log", c=c, direction=tuple(_unit(direction)))

    @staticmethod
    def sum_of(children) -> "DispersionSpec":
        children = tuple(children)
        return DispersionSpec(d=children[0].d, kind="sum", children=children)

    @staticmethod
    def from_grid_a(grid: Grid, a_values: np.ndarray, origin="", eps=None,
                    n_index=None) -> "DispersionSpec":
        a_values = np.asarray(a_values)
        if a_values.shape != (grid.m, grid.m, grid.m, 3, 3):
            raise DimensionMismatch(f"a_values must be (m,m,m,3,3), got {a_values.shape}")
        return DispersionSpec(d=3, kind="grid_sampled", grid=grid, a_values=a_values,
                              origin=origin, eps=eps, n_index=n_index)

    @staticmethod
    def analytic(d: int, sigma_fn: Callable, singular_points=(), origin="") -> "DispersionSpec":
        return DispersionSpec(d=d, kind="analytic", sigma_fn=sigma_fn,
                              singular_points=tuple(tuple(p) for p in singular_points),
                              origin=origin)

    # evaluation -----------------------------------------------------------

    def a(self, pts: np.ndarray, check_singular: bool = True) -> np.ndarray:
        """a(x) = sigma sigma^T, shape (n, d, d)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.d:
            raise DimensionMismatch(f"points have d={pts.shape[1]}, dispersion d={self.d}")
        if check_singular and self.singular_points:
            for sp in self.singular_points:
                if np.any(np.linalg.norm(pts - np.asarray(sp), axis=1) < SINGULAR_TOL):
                    raise SingularPoint(f"evaluation at singular point {sp}")
        n, d = pts.shape
        eye = np.broadcast_to(np.eye(d), (n, d, d)).copy()
        if self.kind == "identity":
            return eye
        if self.kind == "radial_projection":
            r2 = np.sum(pts * pts, axis=1)
            P = pts[:, :, None] * pts[:, None, :] / r2[:, None, None]
            return eye + self.c * P
        if self.kind == "sine_log":
            e = np.asarray(self.direction)
            r = np.linalg.norm(pts, axis=1)
            s2 = np.sin(np.log(r)) ** 2
            return eye + self.c * s2[:, None, None] * np.outer(e, e)
        if self.kind == "sum":
            dev = np.zeros((n, d, d))
            for ch in self.children:
                dev += ch.a(pts, check_singular=False) - eye
            return eye + dev
        if self.kind == "grid_sampled":
            flat = trilinear(self.grid, self.a_values.reshape(self.grid.m, self.grid.m,
                                                              self.grid.m, 9), pts)
            return flat.reshape(n, 3, 3)
        sig = self.sigma(pts, check_singular=False)
        return sig @ np.swapaxes(sig, 1, 2)

    def sigma(self, pts: np.ndarray, check_singular: bool = True) -> np.ndarray:
        """sigma(x), the symmetric PSD square root of a(x) for grid/sum kinds."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "identity":
            return self.a(pts, check_singular)
        if self.kind == "analytic":
            if check_singular and self.singular_points:
                for sp in self.singular_points:
                    if np.any(np.linalg.norm(pts - np.asarray(sp), axis=1) < SINGULAR_TOL):
                        raise SingularPoint(f"evaluation at singular point {sp}")
            return np.asarray(self.sigma_fn(pts), dtype=float)
        if self.kind == "radial_projection":
            # sqrt(I + cP) = I + (sqrt(1+c)-1) P on the projection eigenspace
            s = np.sqrt(1.0 + self.c) - 1.0
            r2 = np.sum(pts * pts, axis=1)
            P = pts[:, :, None] * pts[:, None, :] / r2[:, None, None]
            eye = np.broadcast_to(np.eye(self.d), P.shape).copy()
            out = eye + s * P
            if check_singular:
                self.a(pts, check_singular=True)
            return out
        if self.kind == "sine_log":
            e = np.asarray(self.direction)
            r = np.linalg.norm(pts, axis=1)
            tau = np.sqrt(1.0 + self.c * np.sin(np.log(r)) ** 2) - 1.0
            eye = np.broadcast_to(np.eye(self.d), (len(pts), self.d, self.d)).copy()
            return eye + tau[:, None, None] * np.outer(e, e)
        amat = self.a(pts, check_singular)
        w, V = np.linalg.eigh(amat)
        return (V * np.sqrt(np.maximum(w, 0.0))[:, None, :]) @ np.swapaxes(V, 1, 2)

    def a_dev_sup(self, sample_pts: Optional[np.ndarray] = None) -> float:
        """sup ||a - I||_inf (spectral), exact for the closed-form kinds."""
        if self.kind == "identity":
            return 0.0
        if self.kind == "radial_projection":
            return float(self.c)
        if self.kind == "sine_log":
            return float(self.c)
        if self.kind == "sum":
            return sum(ch.a_dev_sup(sample_pts) for ch in self.children)
        if sample_pts is None:
            if self.kind == "grid_sampled":
                amat = self.a_values.reshape(-1, 3, 3)
            else:
                raise UnsupportedAnalytic("a_dev_sup needs sample points for this kind")
        else:
            amat = self.a(sample_pts, check_singular=False)
        dev = amat - np.eye(3)
        return float(np.abs(np.linalg.eigvalsh(dev)).max())


def _below_identity_msg(c) -> str:
    return (f"c = {c} < 0 gives a < I somewhere; rescale to the a >= I "
            "normalization before constructing the spec")


@dataclass(frozen=True)
class FormBoundEstimate:
    """A relative bound delta paired with the lambda it was measured at."""

    delta: float
    lam: float
    class_kind: str             # F_delta | kato | weak_F_half
    method: str                 # analytic | grid_eigen | closed_bound
    residual: float = 0.0
    grid_meta: Optional[dict] = None

    def __post_init__(self):
        if self.delta < 0 or self.lam <= 0 or self.residual < 0:
            raise NegativeBound(
                f"delta={self.delta}, lam={self.lam}, residual={self.residual}"
            )


def eval_coefficients(spec, points):
    """Evaluate a drift (vector per point) or dispersion (matrix a per point)."""
    if isinstance(spec, FieldSpec):
        return spec.evaluate(points)
    if isinstance(spec, DispersionSpec):
        return spec.a(points)
    raise TypeError(f"not a coefficient spec: {type(spec)}")


def analytic_hardy_delta(kappa: float, d: int, lam: float = 1.0) -> FormBoundEstimate:
    """delta = (2 kappa / (d-2))^2, the Hardy-inequality value; holds for every lam."""
    if d < 3:
        raise InvalidDimension(f"d = {d} < 3")
    if kappa < 0:
        raise NegativeBound(f"kappa = {kappa}")
    delta = (2.0 * kappa / (d - 2)) ** 2
    return FormBoundEstimate(delta=delta, lam=lam, class_kind="F_delta", method="analytic")


def _check_grid_clear_of_singularities(field, grid: Grid) -> None:
    h = grid.h
    for sp in field.singular_points:
        p = np.asarray(sp)
        if np.all(np.abs(p) <= grid.extent + h):
            frac = (p + grid.extent) / h - 0.5
            if np.all(np.abs(frac - np.round(frac)) < 1e-9):
                raise SingularOnGrid(f"node coincides with singular point {sp}")


def field_magnitude_on_grid(field: FieldSpec, grid: Grid) -> np.ndarray:
    _check_grid_clear_of_singularities(field, grid)
    vals = field.evaluate(grid.points(), check_singular=False)
    return np.linalg.norm(vals, axis=1).reshape(grid.m, grid.m, grid.m)


def _power_iteration(apply_op, quotient, shape, tol, maxit, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(shape)
    v /= np.linalg.norm(v)
    mu_prev = None
    mu = 0.0
    for it in range(maxit):
        w = apply_op(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, 0.0, it + 1
        w /= nw
        mu = quotient(w)
        v = w
        if mu_prev is not None:
            res = abs(mu - mu_prev) / max(abs(mu), 1e-300)
            if res < tol:
                return mu, res, it + 1
        mu_prev = mu
    raise NoConvergence(f"power iteration: no convergence in {maxit} iterations")


def _bessel_halfinv_kernel(grid: Grid, lam: float) -> np.ndarray:
    """Continuous kernel of (lam - Lap)^{-1/2} in R^3 on the offset lattice,
    cell-averaged at the singular cell: k(r) = sqrt(lam) K_1(sqrt(lam) r)/(2 pi^2 r)."""
    h, m = grid.h, grid.m
    off = np.arange(-m + 1, m) * h
    OX, OY, OZ = np.meshgrid(off, off, off, indexing="ij")
    R = np.sqrt(OX**2 + OY**2 + OZ**2)
    Rs = np.maximum(R, 1e-30)
    sl = np.sqrt(lam)
    K = sl * _bessel_k1(sl * Rs) / (2.0 * np.pi**2 * Rs)
    # central cell: average the 1/(2 pi^2 r^2) short-range part over an
    # equal-volume ball of radius r_eq
    r_eq = (3.0 * h**3 / (4.0 * np.pi)) ** (1.0 / 3.0)
    K[m - 1, m - 1, m - 1] = (2.0 / np.pi) * r_eq / h**3
    return K


def estimate_form_bound(field: FieldSpec, class_kind: str, lam: float, grid: Grid,
                        tol: float = 1e-6, maxit: int = 10000, seed: int = 0,
                        ) -> FormBoundEstimate:
    """Measure the singularity-class norm of a field on a grid.

    The grid is staggered so Hardy-type singular points never land on nodes;
    a node within tolerance of a singular point raises SingularOnGrid.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    mag = field_magnitude_on_grid(field, grid)
    meta = {"extent": grid.extent, "spacing": grid.h, "size": grid.m}

    if class_kind == "F_delta":
        solver = LaplacianPowers(grid, lam)
        b2 = mag * mag

        def apply_op(v):
            return solver.solve(b2 * v)

        def quotient(w):
            return float(np.sum(b2 * w * w)) / dirichlet_energy(w, grid, lam)

        if not np.any(b2):
            return FormBoundEstimate(0.0, lam, class_kind, "grid_eigen", 0.0, meta)
        delta, res, _ = _power_iteration(apply_op, quotient, b2.shape, tol, maxit, seed)
        return FormBoundEstimate(delta, lam, class_kind, "grid_eigen", res, meta)

    if class_kind == "kato":
        K = _bessel_halfinv_kernel(grid, lam)
        colsum = fftconvolve(mag, K * grid.h**3, mode="same")
        return FormBoundEstimate(float(colsum.max(initial=0.0)), lam, class_kind,
                                 "grid_eigen", 0.0, meta)

    if class_kind == "weak_F_half":
        solver = LaplacianPowers(grid, lam)

        def apply_op(v):
            return solver.apply_inverse_power(
                mag * solver.apply_inverse_power(v, 0.25), 0.25)

        def quotient(w):
            # Rayleigh quotient of (lam-Lap)^{-1/4} |b| (lam-Lap)^{-1/4}
            g = solver.apply_inverse_power(w, 0.25)
            return float(np.sum(mag * g * g)) / float(np.sum(w * w))

        if not np.any(mag):
            return FormBoundEstimate(0.0, lam, class_kind, "grid_eigen", 0.0, meta)
        delta, res, _ = _power_iteration(apply_op, quotient, mag.shape, tol, maxit, seed)
        return FormBoundEstimate(delta, lam, class_kind, "grid_eigen", res, meta)

    raise MixedClasses(f"unknown class kind {class_kind!r}")


def combine_fields(estimates) -> FormBoundEstimate:
    """Relative bound of a sum of fields: sqrt(delta) adds across summands."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("no estimates to combine")
    kinds = {e.class_kind for e in estimates}
    if kinds != {"F_delta"}:
        raise MixedClasses(f"combine_fields needs class F_delta only, got {kinds}")
    lams = {e.lam for e in estimates}
    if len(lams) > 1:
        raise MixedLambda(f"estimates measured at different lambda: {sorted(lams)}")
    root = sum(np.sqrt(e.delta) for e in estimates)
    return FormBoundEstimate(float(root**2), estimates[0].lam, "F_delta", "closed_bound")


def divergence_of_a(disp: DispersionSpec, mode: str = "analytic",
                    grid: Optional[Grid] = None) -> FieldSpec:
    """The vector field (div a)_k = sum_i d_i a_{ik}.

    analytic mode returns exact closed forms for the built-in families;
    finite_difference samples centered differences of a onto the grid.
    """
    if mode == "analytic":
        if disp.kind == "identity":
            return FieldSpec.zero(disp.d)
        if disp.kind == "radial_projection":
            # div(c x(x)x/|x|^2) = c (d-1) x / |x|^2, a Hardy-form field
            return FieldSpec.hardy(disp.d, kappa=disp.c * (disp.d - 1), sign=+1)
        if disp.kind == "sine_log":
            c, e = disp.c, np.asarray(disp.direction)

            def fn(pts):
                r2 = np.sum(pts * pts, axis=1)
                proj = pts @ e
                amp = c * proj / r2 * np.sin(2.0 * np.log(np.sqrt(r2)))
                return amp[:, None] * e

            return FieldSpec.analytic(disp.d, fn, singular_points=disp.singular_points,
                                      origin="div sine_log")
        if disp.kind == "sum":
            return FieldSpec.sum_of(divergence_of_a(ch, "analytic") for ch in disp.children)
        raise UnsupportedAnalytic(f"no closed-form divergence for kind {disp.kind!r}")

    if mode == "finite_difference":
        if grid is None:
            raise ValueError("finite_difference mode needs a grid")
        _check_grid_clear_of_singularities(disp, grid)
        amat = disp.a(grid.points(), check_singular=False)
        amat = amat.reshape(grid.m, grid.m, grid.m, 3, 3)
        out = np.zeros((grid.m, grid.m, grid.m, 3))
        for k in range(3):
            for i in range(3):
                out[..., k] += np.gradient(amat[..., i, k], grid.h, axis=i)
        return FieldSpec.from_grid(grid, out, origin=f"div a [{disp.kind}] fd")

    raise ValueError(f"unknown mode {mode!r}")


# --- JSON-compatible (de)serialization -------------------------------------

def field_to_dict(f: FieldSpec) -> dict:
    if f.kind == "hardy":
        return {"kind": "hardy", "d": f.d, "kappa": f.kappa, "sign": f.sign}
    if f.kind == "bounded_box":
        return {"kind": "bounded_box", "d": f.d, "M": f.bound, "e": list(f.direction)}
    if f.kind == "sum":
        return {"kind": "sum", "d": f.d, "children": [field_to_dict(c) for c in f.children]}
    if f.kind == "mollified":
        return {"kind": "mollified", "d": f.d, "n": f.n_index,
                "base": field_to_dict(f.base)}
    raise ValueError(f"field kind {f.kind!r} has no text form (use the binary grid format)")


def field_from_dict(d: dict) -> FieldSpec:
    kind = d["kind"]
    if kind == "hardy":
        return FieldSpec.hardy(int(d["d"]), float(d["kappa"]), int(d.get("sign", 1)))
    if kind == "bounded_box":
        return FieldSpec.bounded_box(int(d["d"]), float(d["M"]), d.get("e"))
    if kind == "sum":
        return FieldSpec.sum_of(field_from_dict(c) for c in d["children"])
    if kind == "mollified":
        return FieldSpec.mollified_of(field_from_dict(d["base"]), int(d["n"]))
    raise ValueError(f"unknown field kind {kind!r}")


def dispersion_to_dict(s: DispersionSpec) -> dict:
    if s.kind == "identity":
        return {"kind": "identity", "d": s.d}
    if s.kind == "radial_projection":
        return {"kind": "radial_projection", "d": s.d, "c": s.c}
    if s.kind == "sine_log":
        return {"kind": "sine_log", "d": s.d, "c": s.c, "e": list(s.direction)}
    if s.kind == "sum":
        return {"kind": "sum", "d": s.d,
                "children": [dispersion_to_dict(c) for c in s.children]}
    raise ValueError(f"dispersion kind {s.kind!r} has no text form")


def dispersion_from_dict(d: dict) -> DispersionSpec:
    kind = d["kind"]
    if kind == "identity":
        return DispersionSpec.identity(int(d.get("d", 3)))
    if kind == "radial_projection":
        return DispersionSpec.radial_projection(int(d["d"]), float(d["c"]))
    if kind == "sine_log":
        return DispersionSpec.sine_log(int(d["d"]), float(d["c"]), d["e"])
    if kind == "sum":
        return DispersionSpec.sum_of(dispersion_from_dict(c) for c in d["children"])
    raise ValueError(f"unknown dispersion kind {kind!r}")

"""Morse complexes from symbolic critical data or from flows on implicit surfaces.

The numerical engine works on a closed surface ``{F = 0}`` in R^3 with the
induced metric.  Critical points of ``f`` are the solutions of the Lagrange
system ``grad f = lam grad F, F = 0``; the downward flow is ``-P grad f`` with
``P`` the tangent projection, integrated by an adaptive Dormand-Prince scheme
that projects back onto the surface after every step.

Incidence counting:

* index 1 -> 0: the two seeds ``x +- r v`` are flowed; a seed reaching ``y``
  contributes ``+1`` for ``+v`` and ``-1`` for ``-v``.
* index 2 -> 1: seeds on a small circle around ``x`` (oriented by the
  negative frame, outward normal first) are flowed, and for each saddle ``y``
  we record on which side of ``y``'s unstable direction the trajectory leaves
  a ball around ``y``.  A flow line into ``y`` sits where that side flips;
  it is located by bisection and counted ``+1`` for a flip from ``-`` to
  ``+`` with increasing angle, ``-1`` otherwise.  Summed around the circle
  these signs telescope, so ``d o d = 0`` holds for the resulting matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complex import (
    ChainMap,
    GradedFreeComplex,
    HomologyGroup,
    ShortExactSequence,
    homology,
    long_exact_sequence_check,
    verify_complex,
)
from .expr import Expression, norm, safe_call
from .matrix import IntegerMatrix


class MorseError(RuntimeError):
    pass


class DegenerateCriticalPoint(MorseError):
    pass


# ---------------------------------------------------------------------------
# Surfaces and functions


@dataclass
class Surface:
    name: str
    constraint: Expression
    box: tuple[float, float, float, float, float, float]
    kind: str = "custom"

    def contains(self, p, tol: float = 1e-9) -> bool:
        b = self.box
        return all(b[2 * i] - tol <= p[i] <= b[2 * i + 1] + tol for i in range(3))


@dataclass
class MorseFunctionSpec:
    expression: Expression

    @classmethod
    def parse(cls, text: str) -> "MorseFunctionSpec":
        return cls(Expression.parse(text))

    def __neg__(self) -> "MorseFunctionSpec":
        return MorseFunctionSpec(-self.expression)


CATALOG = {
    "sphere": ("x^2 + y^2 + z^2 - 1", "z", (-1.5, 1.5, -1.5, 1.5, -1.5, 1.5)),
    "torus": ("(sqrt(x^2 + y^2) - 2)^2 + z^2 - 1", "x", (-3.5, 3.5, -3.5, 3.5, -1.5, 1.5)),
    "genus2": ("(x*(x - 1)^2*(x - 2) + y^2)^2 + z^2 - 0.01", "x", (-0.3, 2.3, -0.8, 0.8, -0.2, 0.2)),
    # two maxima over one saddle: the graph of z = x^2 wrapped around the sphere
    "dented": ("x^2 + y^2 + (z - x^2)^2 - 1", "z", (-1.5, 1.5, -1.5, 1.5, -1.5, 2.5)),
}


def catalog_surface(name: str) -> tuple[Surface, MorseFunctionSpec]:
    try:
        constraint, function, box = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog surface {name!r}; choose from {sorted(CATALOG)}") from None
    return (Surface(name, Expression.parse(constraint), box, kind=name),
            MorseFunctionSpec.parse(function))


# ---------------------------------------------------------------------------
# Critical points


@dataclass
class CriticalPoint:
    label: str
    index: int
    value: float
    position: tuple[float, float, float] | None = None
    multiplier: float = 0.0
    neg_frame: tuple[tuple[float, float, float], ...] = ()
    pos_frame: tuple[tuple[float, float, float], ...] = ()
    eigenvalues: tuple[float, ...] = ()
    residual: float = 0.0

    @property
    def scale(self) -> float:
        """Length scale factor used for seed and capture radii."""
        if not self.eigenvalues:
            return 1.0
        return 1.0 / max(1.0, math.sqrt(max(abs(w) for w in self.eigenvalues)))


@dataclass
class CriticalSearch:
    points: list[CriticalPoint]
    seeds: int
    converged: int
    nonconvergent: int


def _unit(v):
    n = norm(v)
    return tuple(c / n for c in v)


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def tangent_basis(normal) -> tuple[tuple, tuple]:
    """Orthonormal (t1, t2) with (t1, t2, normal) positively oriented."""
    n = _unit(normal)
    axis = min(range(3), key=lambda i: abs(n[i]))
    a = [0.0, 0.0, 0.0]
    a[axis] = 1.0
    d = _dot(a, n)
    t1 = _unit(tuple(a[i] - d * n[i] for i in range(3)))
    return t1, _cross(n, t1)


def _canonical_sign(v):
    i = max(range(3), key=lambda j: (abs(v[j]), -j))
    return v if v[i] > 0 else tuple(-c for c in v)


def project_to_surface(surface: Surface, p, tol: float = 1e-13, iters: int = 50):
    """Newton along the normal onto ``F = 0``; None if it fails."""
    F = surface.constraint
    p = tuple(float(c) for c in p)
    for _ in range(iters):
        val = safe_call(F.value, p)
        g = safe_call(F.gradient, p)
        if val is None or g is None:
            return None
        gg = _dot(g, g)
        if not math.isfinite(val) or gg == 0 or not math.isfinite(gg):
            return None
        if abs(val) <= tol:
            return p
        p = tuple(p[i] - val * g[i] / gg for i in range(3))
    val = safe_call(F.value, p)
    return p if val is not None and abs(val) <= 1e-10 else None


def classify_critical_point(surface: Surface, f: MorseFunctionSpec, p, multiplier: float,
                            margin: float = 1e-6) -> tuple[int, tuple, tuple, tuple]:
    """Index, negative frame, positive frame and eigenvalues of the projected Hessian."""
    n = _unit(surface.constraint.gradient(p))
    t1, t2 = tangent_basis(n)
    h = f.expression.hessian(p) - multiplier * surface.constraint.hessian(p)
    t = np.array([t1, t2]).T
    m = t.T @ h @ t
    w, vec = np.linalg.eigh((m + m.T) / 2)
    if np.min(np.abs(w)) < margin:
        raise DegenerateCriticalPoint(f"degenerate critical point at {tuple(p)}: eigenvalues {w.tolist()}")
    frames = [tuple(float(c) for c in t @ vec[:, i]) for i in range(2)]
    neg = [frames[i] for i in range(2) if w[i] < 0]
    pos = [frames[i] for i in range(2) if w[i] > 0]
    # orientation: two-frames agree with (t1, t2); single vectors get a fixed sign
    for fr in (neg, pos):
        if len(fr) == 2 and _dot(_cross(fr[0], fr[1]), n) < 0:
            fr[1] = tuple(-c for c in fr[1])
        elif len(fr) == 1:
            fr[0] = _canonical_sign(fr[0])
    return len(neg), tuple(neg), tuple(pos), tuple(float(x) for x in w)


def _lagrange_residual(surface, f, p, lam) -> float:
    gf = f.expression.gradient(p)
    gF = surface.constraint.gradient(p)
    return max(abs(gf[i] - lam * gF[i]) for i in range(3))


def _polish(surface, f, p, lam, iters: int = 8):
    for _ in range(iters):
        gf = np.array(f.expression.gradient(p))
        gF = np.array(surface.constraint.gradient(p))
        hf = f.expression.hessian(p)
        hF = surface.constraint.hessian(p)
        r = np.concatenate([gf - lam * gF, [surface.constraint.value(p)]])
        jac = np.zeros((4, 4))
        jac[:3, :3] = hf - lam * hF
        jac[:3, 3] = -gF
        jac[3, :3] = gF
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        p = tuple(float(p[i] + step[i]) for i in range(3))
        lam = float(lam + step[3])
        if np.max(np.abs(step)) < 1e-15:
            break
    return p, lam


def critical_point_search(surface: Surface, f: MorseFunctionSpec, grid: int = 10,
                          margin: float = 1e-6, dedupe: float = 1e-6) -> CriticalSearch:
    """Newton on the Lagrange system from a grid of seeds projected onto the surface."""
    F, fx = surface.constraint, f.expression
    b = surface.box
    axes = [np.linspace(b[2 * i], b[2 * i + 1], grid) for i in range(3)]
    # a small irrational offset keeps seeds off symmetry planes
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3) + 1e-3 * math.sqrt(2)
    seeds = len(pts)
    with np.errstate(all="ignore"):
        for _ in range(40):
            val = F.values(pts)
            g = F.gradients(pts)
            gg = np.sum(g * g, axis=-1)
            pts = pts - (val / gg)[:, None] * g
        ok = np.all(np.isfinite(pts), axis=-1) & (np.abs(F.values(pts)) < 1e-8)
        pts = pts[ok]
        g = F.gradients(pts)
        weak = np.linalg.norm(g, axis=-1) <= 1e-8
        if np.any(weak):
            raise MorseError(f"0 is not a regular value: |grad F| <= 1e-8 near {pts[weak][0].tolist()}")
        lam = np.sum(fx.gradients(pts) * g, axis=-1) / np.sum(g * g, axis=-1)
        for _ in range(60):
            gf, gF = fx.gradients(pts), F.gradients(pts)
            hf, hF = fx.hessians(pts), F.hessians(pts)
            r = np.concatenate([gf - lam[:, None] * gF, F.values(pts)[:, None]], axis=-1)
            jac = np.zeros((len(pts), 4, 4))
            jac[:, :3, :3] = hf - lam[:, None, None] * hF
            jac[:, :3, 3] = -gF
            jac[:, 3, :3] = gF
            good = np.all(np.isfinite(jac), axis=(1, 2)) & (np.abs(np.linalg.det(jac)) > 1e-300)
            step = np.zeros((len(pts), 4))
            if np.any(good):
                step[good] = np.linalg.solve(jac[good], -r[good][..., None])[..., 0]
            # damp long steps
            length = np.linalg.norm(step, axis=-1)
            step *= np.minimum(1.0, 0.5 / np.maximum(length, 1e-300))[:, None]
            pts = pts + step[:, :3]
            lam = lam + step[:, 3]
        gf, gF = fx.gradients(pts), F.gradients(pts)
        res = np.max(np.abs(np.concatenate([gf - lam[:, None] * gF, F.values(pts)[:, None]], axis=-1)), axis=-1)
        conv = np.isfinite(res) & (res < 1e-9)
    found: list[tuple[tuple, float]] = []
    for p, l in zip(pts[conv], lam[conv]):
        p = tuple(float(c) for c in p)
        if not surface.contains(p):
            continue
        if any(math.dist(p, q) < dedupe for q, _ in found):
            continue
        found.append(_polish(surface, f, p, float(l)))
    merged: list[tuple[tuple, float]] = []
    for p, l in found:
        if not any(math.dist(p, q) < dedupe for q, _ in merged):
            merged.append((p, l))
    points = []
    for p, l in merged:
        if abs(F.value(p)) > 1e-10 or _lagrange_residual(surface, f, p, l) > 1e-8:
            continue
        index, neg, pos, w = classify_critical_point(surface, f, p, l, margin)
        points.append(CriticalPoint("", index, fx.value(p), p, l, neg, pos, w,
                                    max(abs(F.value(p)), _lagrange_residual(surface, f, p, l))))
    points.sort(key=lambda c: (c.value, c.position))
    for i, c in enumerate(points):
        c.label = f"c{i}"
    return CriticalSearch(points, seeds, int(np.sum(conv)), int(seeds - np.sum(conv)))


def find_critical_points(surface: Surface, f: MorseFunctionSpec, grid: int = 10,
                         margin: float = 1e-6) -> list[CriticalPoint]:
    return critical_point_search(surface, f, grid, margin).points


# ---------------------------------------------------------------------------
# Flow


@dataclass
class FlowParams:
    r_cap: float = 1e-3
    max_steps: int = 20000
    tol: float = 1e-10
    h0: float = 1e-2
    h_min: float = 1e-14
    max_step_length: float = 0.02


@dataclass
class FlowTrajectory:
    seed: tuple[float, float, float]
    points: list[tuple[float, float, float]]
    values: list[float]
    terminal: str | None
    status: str
    sign: int = 0
    energy: float = 0.0
    steps: int = 0
    rejected: int = 0
    min_step: float = math.inf

    @property
    def escaped(self) -> bool:
        return self.terminal is None


# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _velocity(surface: Surface, f: MorseFunctionSpec, p):
    g = f.expression._g(*p)
    n = surface.constraint._g(*p)
    c = (g[0] * n[0] + g[1] * n[1] + g[2] * n[2]) / (n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
    return (c * n[0] - g[0], c * n[1] - g[1], c * n[2] - g[2])


def _combine(p, h, coeffs, ks):
    sx = sy = sz = 0.0
    for c, k in zip(coeffs, ks):
        if c:
            sx += c * k[0]
            sy += c * k[1]
            sz += c * k[2]
    return (p[0] + h * sx, p[1] + h * sy, p[2] + h * sz)


def integrate_flow(surface: Surface, f: MorseFunctionSpec, seed, crits: Sequence[CriticalPoint],
                   params: FlowParams | None = None) -> FlowTrajectory:
    """Downward gradient flow from ``seed`` until capture by a critical point."""
    params = params or FlowParams()
    F = surface.constraint
    if abs(F.value(seed)) > 1e-6:
        raise MorseError(f"seed {tuple(seed)} is not on the surface (|F| = {abs(F.value(seed)):.3g})")
    p = project_to_surface(surface, seed)
    if p is None:
        raise MorseError(f"cannot project seed {tuple(seed)} onto the surface")
    fval = f.expression.value(p)
    traj = FlowTrajectory(tuple(seed), [p], [fval], None, "escaped")
    caps = [(c, params.r_cap * c.scale) for c in crits if c.position is not None]
    try:
        return _flow_loop(surface, f, p, fval, traj, caps, params)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        traj.status = f"evaluation error: {exc}"
        return traj


def _flow_loop(surface, f, p, fval, traj, caps, params):
    h = params.h0
    k1 = _velocity(surface, f, p)
    while traj.steps < params.max_steps:
        for c, r in caps:
            if math.dist(p, c.position) < r:
                traj.terminal, traj.status = c.label, "captured"
                return traj
        speed = norm(k1)
        if speed == 0.0:
            traj.status = "stalled"
            return traj
        h = min(h, params.max_step_length / speed)
        ks = [k1]
        for i in range(1, 7):
            ks.append(_velocity(surface, f, _combine(p, h, _A[i], ks)))
        new = _combine(p, h, _B, ks)
        err = norm(_combine((0.0, 0.0, 0.0), h, _E, ks))
        if err > params.tol:
            traj.rejected += 1
            h *= max(0.1, 0.9 * (params.tol / err) ** 0.2)
            if h < params.h_min:
                traj.status = "step underflow"
                return traj
            continue
        q = project_to_surface(surface, new)
        if q is None:
            traj.status = "projection failed"
            return traj
        fq = f.expression.value(q)
        if not fq < fval:
            traj.status = "non-monotone"
            return traj
        traj.energy += h * sum(_B[j] * _dot(ks[j], ks[j]) for j in range(7))
        traj.min_step = min(traj.min_step, h)
        traj.steps += 1
        p, fval = q, fq
        traj.points.append(p)
        traj.values.append(fval)
        k1 = _velocity(surface, f, p)
        h *= min(5.0, 0.9 * (params.tol / err) ** 0.2) if err > 0 else 5.0
    return traj


# ---------------------------------------------------------------------------
# Incidence


@dataclass
class IncidenceParams:
    r_seed: float = 1e-2
    circle_samples: int = 64
    bisection_tol: float = 1e-9
    ball_fraction: float = 0.3
    ball_max: float = 0.05
    gap_depth: int = 6
    search_factor: float = 3.0


@dataclass
class IncidenceResult:
    z: dict[int, IntegerMatrix]
    z2: dict[int, IntegerMatrix]
    trajectories: list[FlowTrajectory] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def _seed_on_sphere(surface, x: CriticalPoint, direction, r):
    p = tuple(x.position[i] + r * direction[i] for i in range(3))
    return project_to_surface(surface, p)


def _ball_radius(y: CriticalPoint, crits, params: IncidenceParams) -> float:
    others = [math.dist(y.position, c.position) for c in crits if c is not y]
    return min(params.ball_max, params.ball_fraction * min(others)) if others else params.ball_max


def _exit_side(traj: FlowTrajectory, y: CriticalPoint, rho: float) -> int | None:
    """+1/-1 for the side of y's unstable line where the flow leaves the ball, 0 if caught by y."""
    if traj.terminal == y.label:
        return 0
    inside = False
    v = y.neg_frame[0]
    for p in traj.points:
        d = math.dist(p, y.position)
        if not inside and d < rho:
            inside = True
        elif inside and d >= rho:
            s = _dot(tuple(p[i] - y.position[i] for i in range(3)), v)
            return (s > 0) - (s < 0) or None
    return None


def _min_distance(traj: FlowTrajectory, y: CriticalPoint) -> float:
    return min(math.dist(p, y.position) for p in traj.points)


_TWO_PI = 2 * math.pi


def _scan_circle(at, thetas, y: CriticalPoint, rho: float, pos, params: IncidenceParams,
                 out: IncidenceResult, xlabel: str) -> list[int]:
    """Signs of the flow lines into ``y`` found between consecutive circle samples."""
    found: list[int] = []
    near_radius = params.search_factor * rho

    def side(theta):
        t = at(theta % _TWO_PI)
        return t, _exit_side(t, y, rho)

    def dist(theta):
        return _min_distance(at(theta % _TWO_PI), y)

    def on_line(mid, lo, hi, depth):
        """``mid`` flows into y: read the sign from defined sides on both flanks."""
        step = min(mid - lo, hi - mid) / 2
        for _ in range(40):
            _, left = side(mid - step)
            _, right = side(mid + step)
            if left in (1, -1) and right in (1, -1):
                if left != right:
                    found.append(1 if left < right else -1)
                scan(lo, sides_at(lo), mid - step, left, depth + 1)
                scan(mid + step, right, hi, sides_at(hi), depth + 1)
                return
            step /= 2
        out.flags.append(f"{xlabel}->{y.label}: cannot orient flow line near angle {mid:.9f}")

    def sides_at(theta):
        return side(theta)[1]

    def scan(lo, slo, hi, shi, depth):
        if slo in (1, -1) and slo == shi:
            return
        if slo in (1, -1) and shi in (1, -1):
            if hi - lo <= params.bisection_tol:
                if min(dist(lo), dist(hi)) < 0.1 * rho:
                    found.append(1 if slo < shi else -1)
                else:
                    out.flags.append(f"{xlabel}->{y.label}: unresolved basin boundary near angle {lo:.9f}")
                return
            mid = 0.5 * (lo + hi)
            tm, sm = side(mid)
            if sm == 0:
                found.append(1 if slo < shi else -1)
            elif tm.terminal is not None and pos[tm.terminal].index == 1:
                out.diagnostics.append(f"broken trajectory {xlabel} -> {tm.terminal} -> {y.label}")
            elif sm is None:
                out.diagnostics.append(f"{xlabel}->{y.label}: side change away from {y.label} near angle {mid:.9f}")
                scan(lo, slo, mid, None, depth + 1)
                scan(mid, None, hi, shi, depth + 1)
            elif sm == slo:
                scan(mid, sm, hi, shi, depth)
            else:
                scan(lo, slo, mid, sm, depth)
            return
        if depth >= params.gap_depth:
            return
        mid = 0.5 * (lo + hi)
        if slo is None and shi is None:
            # both ends miss the ball: follow the closest-approach valley only
            dl, dh, dm = dist(lo), dist(hi), dist(mid)
            if min(dl, dh, dm) >= near_radius or dm > max(dl, dh):
                return
            sm = sides_at(mid)
            if sm == 0:
                on_line(mid, lo, hi, depth)
            elif sm is not None:
                scan(lo, None, mid, sm, depth + 1)
                scan(mid, sm, hi, None, depth + 1)
            elif dl <= dh:
                scan(lo, None, mid, None, depth + 1)
            else:
                scan(mid, None, hi, None, depth + 1)
            return
        sm = sides_at(mid)
        if sm == 0:
            on_line(mid, lo, hi, depth)
            return
        scan(lo, slo, mid, sm, depth + 1)
        scan(mid, sm, hi, shi, depth + 1)

    sides = [side(t)[1] for t in thetas]
    dists = [dist(t) for t in thetas]
    n = len(thetas)
    for a in range(n):
        b = (a + 1) % n
        if sides[a] is None and sides[b] is None:
            # only a local minimum of the closest approach can hide a line
            if dists[a - 1] < dists[a] or dists[(b + 1) % n] < dists[b]:
                continue
        hi = thetas[b] + (_TWO_PI if b == 0 else 0.0)
        scan(thetas[a], sides[a], hi, sides[b], 0)
    return found


def compute_incidence(surface: Surface, f: MorseFunctionSpec, crits: Sequence[CriticalPoint],
                      params: IncidenceParams | None = None,
                      flow: FlowParams | None = None) -> IncidenceResult:
    params = params or IncidenceParams()
    by_index = {k: [c for c in crits if c.index == k] for k in range(3)}
    pos = {c.label: c for c in crits}
    out = IncidenceResult({}, {})

    def run(seed):
        t = integrate_flow(surface, f, seed, crits, flow)
        out.trajectories.append(t)
        return t

    # index 1 -> 0
    z = [[0] * len(by_index[1]) for _ in by_index[0]]
    n2 = [[0] * len(by_index[1]) for _ in by_index[0]]
    rows0 = {c.label: i for i, c in enumerate(by_index[0])}
    for j, x in enumerate(by_index[1]):
        v = x.neg_frame[0]
        for sign in (1, -1):
            seed = _seed_on_sphere(surface, x, tuple(sign * c for c in v), params.r_seed * x.scale)
            if seed is None:
                out.flags.append(f"{x.label}: cannot place seed on the surface")
                continue
            t = run(seed)
            t.sign = sign
            if t.terminal is None:
                out.flags.append(f"{x.label}: trajectory escaped ({t.status}) after {t.steps} steps")
            elif t.terminal in rows0:
                z[rows0[t.terminal]][j] += sign
                n2[rows0[t.terminal]][j] += 1
            else:
                out.diagnostics.append(f"saddle connection {x.label} -> {t.terminal}")
    out.z[1] = IntegerMatrix.from_rows(z, len(by_index[1]))
    out.z2[1] = IntegerMatrix.from_rows([[c % 2 for c in r] for r in n2], len(by_index[1]))

    # index 2 -> 1
    saddles = by_index[1]
    z = [[0] * len(by_index[2]) for _ in saddles]
    n2 = [[0] * len(by_index[2]) for _ in saddles]
    rho = {y.label: _ball_radius(y, crits, params) for y in saddles}
    for j, x in enumerate(by_index[2]):
        e1, e2 = x.neg_frame
        r = params.r_seed * x.scale
        cache: dict[float, FlowTrajectory] = {}

        def at(theta):
            if theta not in cache:
                d = tuple(math.cos(theta) * e1[i] + math.sin(theta) * e2[i] for i in range(3))
                seed = _seed_on_sphere(surface, x, d, r)
                if seed is None:
                    raise MorseError(f"{x.label}: cannot place seed at angle {theta}")
                cache[theta] = run(seed)
            return cache[theta]

        n = params.circle_samples
        thetas = []
        for i in range(n):
            theta = 2 * math.pi * (i + 0.5) / n
            # keep samples off flow lines that end in a saddle
            for _ in range(5):
                end = at(theta).terminal
                if end is None or pos[end].index != 1:
                    break
                theta += 1e-7
            thetas.append(theta)
        for theta in thetas:
            if at(theta).terminal is None:
                out.flags.append(f"{x.label}: trajectory at angle {theta:.6f} escaped ({at(theta).status})")
        for i, y in enumerate(saddles):
            for sign in _scan_circle(at, thetas, y, rho[y.label], pos, params, out, x.label):
                z[i][j] += sign
                n2[i][j] += 1
    out.z[2] = IntegerMatrix.from_rows(z, len(by_index[2]))
    out.z2[2] = IntegerMatrix.from_rows([[c % 2 for c in r] for r in n2], len(by_index[2]))
    out.diagnostics = list(dict.fromkeys(out.diagnostics))
    return out


def incidence_matrix(surface: Surface, f: MorseFunctionSpec, crits: Sequence[CriticalPoint],
                     ring: str = "z", params: IncidenceParams | None = None) -> dict[int, IntegerMatrix]:
    res = compute_incidence(surface, f, crits, params)
    if res.flags:
        raise MorseError("flagged incidence cells: " + "; ".join(res.flags))
    return res.z2 if ring == "z2" else res.z


# ---------------------------------------------------------------------------
# Morse data and complexes


@dataclass
class MorseData:
    points: list[CriticalPoint]
    incidence: dict[int, IntegerMatrix]
    incidence_z2: dict[int, IntegerMatrix]
    provenance: str = "symbolic"
    flags: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    trajectories: list[FlowTrajectory] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.points = sorted(self.points, key=lambda c: c.value)

    def by_index(self, k: int) -> list[CriticalPoint]:
        return [c for c in self.points if c.index == k]

    @property
    def top_index(self) -> int:
        return max((c.index for c in self.points), default=0)

    def counts(self) -> list[int]:
        return [len(self.by_index(k)) for k in range(self.top_index + 1)]

    @classmethod
    def symbolic(cls, points: Sequence[tuple[str, int, float]],
                 incidence: dict[int, Sequence[Sequence[int]]] | None = None) -> "MorseData":
        """Data from (label, index, value) triples and integer incidence rows.

        ``incidence[k]`` has one row per index-(k-1) point and one column per
        index-k point, both in order of increasing value.
        """
        crits = [CriticalPoint(lbl, idx, val) for lbl, idx, val in points]
        data = cls(crits, {}, {})
        for k in range(1, data.top_index + 1):
            rows = (incidence or {}).get(k)
            r, c = len(data.by_index(k - 1)), len(data.by_index(k))
            if rows and (len(rows) != r or any(len(row) != c for row in rows)):
                raise MorseError(f"incidence in degree {k} must be {r} x {c}")
            mat = IntegerMatrix.from_rows(rows, c) if rows else IntegerMatrix.zeros(r, c)
            if mat.shape != (r, c):
                raise MorseError(f"incidence in degree {k} has shape {mat.shape}, expected {(r, c)}")
            data.incidence[k] = mat
            data.incidence_z2[k] = mat.mod(2)
        return data


def build_morse_complex(data: MorseData, ring: str = "z") -> GradedFreeComplex:
    """Free complex on the critical points with the incidence matrices as boundary."""
    if ring not in ("z", "z2"):
        raise ValueError(f"ring must be 'z' or 'z2', got {ring!r}")
    top = data.top_index
    gens = {k: [c.label for c in data.by_index(k)] for k in range(top + 1)}
    source = data.incidence_z2 if ring == "z2" else data.incidence
    bnds = {}
    for k in range(1, top + 1):
        mat = source.get(k, IntegerMatrix.zeros(len(gens[k - 1]), len(gens[k])))
        if mat.shape != (len(gens[k - 1]), len(gens[k])):
            raise MorseError(f"incidence in degree {k} has shape {mat.shape}")
        bnds[k] = mat
    cx = GradedFreeComplex(gens, bnds, modulus=2 if ring == "z2" else None)
    bad = verify_complex(cx)
    if bad:
        raise MorseError(f"defective incidence data: d o d != 0 in degree(s) {bad}")
    return cx


def numerical_morse_data(surface: Surface, f: MorseFunctionSpec, grid: int = 10,
                         params: IncidenceParams | None = None,
                         flow: FlowParams | None = None) -> MorseData:
    search = critical_point_search(surface, f, grid)
    res = compute_incidence(surface, f, search.points, params, flow)
    diags = list(res.diagnostics)
    if search.nonconvergent:
        diags.append(f"{search.nonconvergent} of {search.seeds} seeds did not converge")
    return MorseData(search.points, res.z, res.z2, "numerical", res.flags, diags, res.trajectories)


def _coeff(ring: str) -> str:
    return "z2" if ring == "z2" else "z"


def morse_homology(source, ring: str = "z", f: MorseFunctionSpec | None = None, **kw) -> list[HomologyGroup]:
    """Homology of the Morse complex of ``MorseData`` or of a surface with a function."""
    if isinstance(source, MorseData):
        data = source
    else:
        if f is None:
            raise ValueError("a Morse function is required for a surface")
        data = numerical_morse_data(source, f, **kw)
    if data.flags:
        raise MorseError("flagged incidence cells: " + "; ".join(data.flags))
    return homology(build_morse_complex(data, ring), _coeff(ring))


# ---------------------------------------------------------------------------
# Filtration by critical levels


@dataclass
class LevelReport:
    value: float
    labels: list[str]
    counts: dict[int, int]
    relative: list[HomologyGroup]
    sublevel: list[HomologyGroup]
    matches: bool
    sequence_exact: bool


@dataclass
class FiltrationReport:
    levels: list[LevelReport]
    total: list[HomologyGroup]
    morse: list[HomologyGroup]

    @property
    def reassembled(self) -> bool:
        return _same_groups(self.total, self.morse)

    @property
    def ok(self) -> bool:
        return self.reassembled and all(l.matches and l.sequence_exact for l in self.levels)


def _same_groups(a: list[HomologyGroup], b: list[HomologyGroup]) -> bool:
    key = lambda hs: {h.degree: (h.betti, h.torsion) for h in hs if not h.is_zero}
    return key(a) == key(b)


def _sub(cx: GradedFreeComplex, keep: dict[int, list[int]]) -> GradedFreeComplex:
    gens = {k: [cx.labels(k)[i] for i in keep[k]] for k in cx.degrees}
    bnds = {k: cx.boundary(k).submatrix(keep[k - 1], keep[k]) for k in cx.degrees if k > cx.lo}
    return GradedFreeComplex(gens, bnds, modulus=cx.modulus)


def _level_groups(values: list[float], tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and abs(v - values[groups[-1][0]]) <= tol * max(1.0, abs(v)):
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def filtration_report(data: MorseData, ring: str = "z", tol: float = 1e-9) -> FiltrationReport:
    """Relative homology of each critical level and the pair sequences between sublevels."""
    cx = build_morse_complex(data, ring)
    coeff = _coeff(ring)
    top = data.top_index
    # position of each critical point inside its degree
    where = {}
    for k in range(top + 1):
        for i, c in enumerate(data.by_index(k)):
            where[c.label] = (k, i)
    groups = _level_groups([c.value for c in data.points], tol)
    levels = []
    below: dict[int, list[int]] = {k: [] for k in range(top + 1)}
    for grp in groups:
        pts = [data.points[i] for i in grp]
        upto = {k: list(v) for k, v in below.items()}
        here: dict[int, list[int]] = {k: [] for k in range(top + 1)}
        for c in pts:
            k, i = where[c.label]
            upto[k].append(i)
            here[k].append(i)
        for k in upto:
            upto[k].sort()
            here[k].sort()
        small, big = _sub(cx, below), _sub(cx, upto)
        quot = _sub(cx, here)
        # inclusion small -> big and projection big -> quot, in the chosen bases
        inc = {k: IntegerMatrix.from_rows([[1 if upto[k][r] == below[k][j] else 0
                                            for j in range(len(below[k]))]
                                           for r in range(len(upto[k]))], len(below[k]))
               for k in range(top + 1)}
        proj = {k: IntegerMatrix.from_rows([[1 if here[k][r] == upto[k][j] else 0
                                             for j in range(len(upto[k]))]
                                            for r in range(len(here[k]))], len(upto[k]))
                for k in range(top + 1)}
        seq = ShortExactSequence(small, big, quot, ChainMap(small, big, inc), ChainMap(big, quot, proj))
        exact = not seq.violations() and all(j.exact for j in long_exact_sequence_check(seq))
        rel = homology(quot, coeff)
        counts = {k: len(here[k]) for k in range(top + 1) if here[k]}
        matches = all(h.betti == counts.get(h.degree, 0) and not h.torsion for h in rel)
        levels.append(LevelReport(pts[0].value, [c.label for c in pts], counts, rel,
                                  homology(big, coeff), matches, exact))
        below = upto
    total = levels[-1].sublevel if levels else []
    return FiltrationReport(levels, total, morse_homology(data, ring))


# ---------------------------------------------------------------------------
# Symbolic fixtures


def _genus2_levels() -> list[float]:
    # critical x-values of x (x-1)^2 (x-2) = +-1/10 on the axis; u = (x-1)^2
    u_out = (1 + math.sqrt(1.4)) / 2
    u_lo, u_hi = (1 - math.sqrt(0.6)) / 2, (1 + math.sqrt(0.6)) / 2
    return [1 - math.sqrt(u_out), 1 - math.sqrt(u_hi), 1 - math.sqrt(u_lo),
            1 + math.sqrt(u_lo), 1 + math.sqrt(u_hi), 1 + math.sqrt(u_out)]


def symbolic_fixture(name: str) -> MorseData:
    """Closed-form Morse data for the catalog surfaces and a few abstract examples."""
    if name == "sphere":
        return MorseData.symbolic([("min", 0, -1.0), ("max", 2, 1.0)])
    if name == "torus":
        return MorseData.symbolic([("a", 0, -3.0), ("b", 1, -1.0), ("c", 1, 1.0), ("d", 2, 3.0)])
    if name == "genus2":
        xs = _genus2_levels()
        idx = [0, 1, 1, 1, 1, 2]
        return MorseData.symbolic([(f"p{i}", idx[i], xs[i]) for i in range(6)])
    if name == "genus2-merged":
        return MorseData.symbolic([("m", 0, 0.0), ("s1", 1, 1.0), ("s2", 1, 1.0),
                                   ("s3", 1, 2.0), ("s4", 1, 2.0), ("M", 2, 3.0)])
    if name == "dented":
        return MorseData.symbolic([("min", 0, -1.0), ("saddle", 1, 1.0),
                                   ("max+", 2, 1.25), ("max-", 2, 1.25)],
                                  {1: [[0]], 2: [[1, -1]]})
    if name == "rp2":
        return MorseData.symbolic([("e0", 0, 0.0), ("e1", 1, 1.0), ("e2", 2, 2.0)],
                                  {1: [[0]], 2: [[2]]})
    raise KeyError(f"unknown fixture {name!r}")


SYMBOLIC_FIXTURES = ("sphere", "torus", "genus2", "genus2-merged", "dented", "rp2")


def dump_flows(trajectories: Sequence[FlowTrajectory], path) -> None:
    """Write polylines as ``x y z f`` lines, one blank line between trajectories."""
    with open(path, "w") as fh:
        for n, t in enumerate(trajectories):
            if n:
                fh.write("\n")
            for p, v in zip(t.points, t.values):
                fh.write(f"{p[0]:.12g} {p[1]:.12g} {p[2]:.12g} {v:.12g}\n")

"""Specular billiard in the unit disc and Monte-Carlo estimates of the
normalised visibility and of the volume surrogate F1.

A ray enters at the point n of the unit circle moving with velocity -v,
reflects off the obstacles and leaves at n+ with velocity v+.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidInputError, SingularHitError, TrappedRayError
from .scene import Scene2D

BOUNCE_CAP = 10_000
ORIGIN_ADVANCE = 1e-12
VERTEX_RADIUS = 1e-10
CHUNK = 1 << 16
MIN_SAMPLES = 1000

_OK = 0
_TRAPPED = 1
_SINGULAR = 2


@dataclass(frozen=True)
class RayOutcome:
    entry_point: np.ndarray
    entry_direction: np.ndarray
    exit_point: np.ndarray
    exit_direction: np.ndarray
    bounces: int
    path_length: float
    record: np.ndarray | None = None  # rows (incoming w, normal, outgoing w)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    discarded: int


@njit(cache=True, nogil=True)
def _trace(segs, bounds, discs, px, py, wx, wy, cap, record, rec):
    """Returns (status, exit x, exit y, out wx, out wy, bounces, length).

    bounds holds one row (cx, cy, radius, first edge, end edge) per polygon;
    polygons whose bounding circle the ray misses are skipped.
    """
    last_kind = -1
    last_idx = -1
    length = 0.0
    bounces = 0
    while True:
        best_t = np.inf
        kind = -1
        idx = -1
        for g in range(bounds.shape[0]):
            qx = bounds[g, 0] - px
            qy = bounds[g, 1] - py
            tc = qx * wx + qy * wy
            q2 = qx * qx + qy * qy
            r2 = bounds[g, 2] * bounds[g, 2]
            if q2 - tc * tc > r2 or (tc < 0.0 and q2 > r2):
                continue
            for k in range(int(bounds[g, 3]), int(bounds[g, 4])):
                if last_kind == 0 and last_idx == k:
                    continue
                ax = segs[k, 0]
                ay = segs[k, 1]
                ex = segs[k, 2] - ax
                ey = segs[k, 3] - ay
                den = wx * ey - wy * ex
                if den == 0.0:
                    continue
                qx = ax - px
                qy = ay - py
                t = (qx * ey - qy * ex) / den
                s = (qx * wy - qy * wx) / den
                if t > 0.0 and t < best_t and s >= 0.0 and s <= 1.0:
                    best_t = t
                    kind = 0
                    idx = k
        for k in range(discs.shape[0]):
            if last_kind == 1 and last_idx == k:
                continue
            qx = px - discs[k, 0]
            qy = py - discs[k, 1]
            b = wx * qx + wy * qy
            c = qx * qx + qy * qy - discs[k, 2] * discs[k, 2]
            disc = b * b - c
            if b >= 0.0 or disc <= 0.0:
                continue
            t = -b - math.sqrt(disc)
            if t > 0.0 and t < best_t:
                best_t = t
                kind = 1
                idx = k
        pw = px * wx + py * wy
        t_exit = -pw + math.sqrt(max(pw * pw - (px * px + py * py - 1.0), 0.0))
        if kind < 0 or best_t >= t_exit:
            length += max(t_exit, 0.0)
            return _OK, px + t_exit * wx, py + t_exit * wy, wx, wy, bounces, length
        if bounces >= cap:
            return _TRAPPED, px, py, wx, wy, bounces, length

        hx = px + best_t * wx
        hy = py + best_t * wy
        if kind == 0:
            ex = segs[idx, 2] - segs[idx, 0]
            ey = segs[idx, 3] - segs[idx, 1]
            if (math.hypot(hx - segs[idx, 0], hy - segs[idx, 1]) < VERTEX_RADIUS
                    or math.hypot(hx - segs[idx, 2], hy - segs[idx, 3]) < VERTEX_RADIUS):
                return _SINGULAR, hx, hy, wx, wy, bounces, length
            norm = math.hypot(ex, ey)
            nx = -ey / norm
            ny = ex / norm
        else:
            nx = hx - discs[idx, 0]
            ny = hy - discs[idx, 1]
            norm = math.hypot(nx, ny)
            nx /= norm
            ny /= norm
        dot = wx * nx + wy * ny
        ox = wx - 2.0 * dot * nx
        oy = wy - 2.0 * dot * ny
        # renormalise so rounding cannot accumulate over many bounces
        on = math.hypot(ox, oy)
        ox /= on
        oy /= on
        if record:
            rec[bounces, 0] = wx
            rec[bounces, 1] = wy
            rec[bounces, 2] = nx
            rec[bounces, 3] = ny
            rec[bounces, 4] = ox
            rec[bounces, 5] = oy
        length += best_t
        bounces += 1
        wx = ox
        wy = oy
        px = hx + ORIGIN_ADVANCE * wx
        py = hy + ORIGIN_ADVANCE * wy
        length += ORIGIN_ADVANCE
        last_kind = kind
        last_idx = idx


@njit(cache=True, nogil=True)
def _batch(segs, bounds, discs, phi, s, cap):
    """Integrands |v + v+|^2 / 2 and |n - n+| for a batch of entry states.

    status is 0 for a regular ray, 1 trapped, 2 singular.
    """
    m = phi.size
    vis = np.zeros(m)
    gap = np.zeros(m)
    status = np.zeros(m, np.int64)
    rec = np.zeros((1, 6))
    for k in range(m):
        nx = math.cos(phi[k])
        ny = math.sin(phi[k])
        c = math.sqrt(max(1.0 - s[k] * s[k], 0.0))
        vx = nx * c - ny * s[k]
        vy = ny * c + nx * s[k]
        st, ex, ey, ux, uy, _, _ = _trace(segs, bounds, discs, nx, ny, -vx, -vy, cap, False, rec)
        status[k] = st
        if st != _OK:
            continue
        sx = vx + ux
        sy = vy + uy
        vis[k] = 0.5 * (sx * sx + sy * sy)
        gap[k] = math.hypot(nx - ex, ny - ey)
    return vis, gap, status


def _polygon_bounds(scene: Scene2D) -> np.ndarray:
    rows = []
    first = 0
    for poly in scene.polygons:
        centre = poly.mean(axis=0)
        radius = float(np.max(np.hypot(*(poly - centre).T))) * (1.0 + 1e-9) + 1e-12
        rows.append((centre[0], centre[1], radius, first, first + len(poly)))
        first += len(poly)
    return np.array(rows, dtype=float).reshape(-1, 5)


def trace(scene: Scene2D, v, n, cap: int = BOUNCE_CAP, debug: bool = False) -> RayOutcome:
    """Follow the ray entering at n with velocity -v until it leaves the disc."""
    v = np.asarray(v, dtype=float)
    n = np.asarray(n, dtype=float)
    if v.shape != (2,) or n.shape != (2,):
        raise InvalidInputError("v and n must be planar vectors")
    if abs(math.hypot(*n) - 1.0) > 1e-9 or abs(math.hypot(*v) - 1.0) > 1e-9:
        raise InvalidInputError("v and n must be unit vectors")
    if float(v @ n) < -1e-12:
        raise InvalidInputError("v must satisfy <v, n> >= 0")
    rec = np.zeros((cap if debug else 1, 6))
    st, ex, ey, ux, uy, bounces, length = _trace(
        scene.segments(), _polygon_bounds(scene), scene.disc_array(), float(n[0]), float(n[1]),
        float(-v[0]), float(-v[1]), cap, debug, rec)
    if st == _TRAPPED:
        raise TrappedRayError(f"ray still inside after {cap} bounces")
    if st == _SINGULAR:
        raise SingularHitError(f"ray hit a polygon vertex near ({ex:.6g}, {ey:.6g})")
    return RayOutcome(
        entry_point=n.copy(), entry_direction=-v,
        exit_point=np.array([ex, ey]), exit_direction=np.array([ux, uy]),
        bounces=int(bounces), path_length=float(length),
        record=rec[:bounces].copy() if debug else None,
    )


def _draw(seed: int, chunk: int, size: int):
    """Entry angle and sin(alpha) for one chunk; every chunk owns a disjoint
    Philox stream so results do not depend on scheduling."""
    rng = np.random.Generator(np.random.Philox(seed).jumped(chunk))
    phi = rng.uniform(0.0, 2.0 * math.pi, size)
    s = rng.uniform(-1.0, 1.0, size)
    return phi, s


def _run(scene: Scene2D, samples: int, seed: int, workers: int):
    if samples < MIN_SAMPLES:
        raise InvalidInputError(f"need at least {MIN_SAMPLES} samples")
    if seed < 0:
        raise InvalidInputError("seed must be nonnegative")
    segs = scene.segments()
    bounds = _polygon_bounds(scene)
    discs = scene.disc_array()
    sizes = [min(CHUNK, samples - k) for k in range(0, samples, CHUNK)]

    def job(k):
        phi, s = _draw(seed, k, sizes[k])
        return _batch(segs, bounds, discs, phi, s, BOUNCE_CAP)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(k) for k in range(len(sizes))]
    vis = np.concatenate([p[0] for p in parts])
    gap = np.concatenate([p[1] for p in parts])
    status = np.concatenate([p[2] for p in parts])
    if np.any(status == _TRAPPED):
        raise TrappedRayError(f"{int(np.sum(status == _TRAPPED))} rays exceeded {BOUNCE_CAP} bounces")
    ok = status == _OK
    return vis[ok], gap[ok], int(np.sum(~ok))


def _estimate(values: np.ndarray, seed: int, discarded: int) -> McEstimate:
    m = values.size
    mean = math.fsum(values) / m
    sd = float(np.std(values, ddof=1)) if m > 1 else 0.0
    return McEstimate(mean=mean, std_error=sd / math.sqrt(m), samples=m, seed=seed,
                      discarded=discarded)


def _workers(workers):
    if workers is None:
        from .bounds import default_workers
        return default_workers()
    return workers


def estimate_visibility(scene: Scene2D, samples: int, seed: int, workers: int | None = None) -> McEstimate:
    """Monte-Carlo normalised visibility 3/4 E |v + v+|^2 / 2 in the plane."""
    vis, _, bad = _run(scene, samples, seed, _workers(workers))
    return _estimate(0.75 * vis, seed, bad)


def estimate_F1(scene: Scene2D, samples: int, seed: int, workers: int | None = None) -> McEstimate:
    """Monte-Carlo value of 1 - (2/pi) E |n - n+|, an upper bound for [D]."""
    _, gap, bad = _run(scene, samples, seed, _workers(workers))
    return _estimate(1.0 - (2.0 / math.pi) * gap, seed, bad)


def estimate_both(scene: Scene2D, samples: int, seed: int,
                  workers: int | None = None) -> tuple[McEstimate, McEstimate]:
    """Visibility and F1 from the same rays."""
    vis, gap, bad = _run(scene, samples, seed, _workers(workers))
    return _estimate(0.75 * vis, seed, bad), _estimate(1.0 - (2.0 / math.pi) * gap, seed, bad)

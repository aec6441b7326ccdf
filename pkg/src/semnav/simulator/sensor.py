"""Depth camera model: per-pixel ray casts against the world geometry.

Depth follows the usual RGB-D convention: the value stored per pixel is the
camera-frame z coordinate of the nearest hit (not the ray length), zero when
nothing valid was hit. Solid entities are vertical extrusions of their 2-D
footprint; zones and zero-height items are ground decals hit where the ray
meets the floor plane inside them. The bare floor itself returns no depth.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import InvalidInput
from ..global_map import Pose2D, SensorMount
from ..perception import CameraIntrinsics, ColorFrame, DepthFrame, SemanticMask
from .world import Category, Disc, Polygon, World

_NEAR = 1e-6
_PAR = 1e-12


@dataclass(frozen=True)
class SensorSpec:
    """Camera geometry. Field of view is edge-to-edge, in radians."""

    width: int = 160
    height: int = 120
    h_fov: float = math.radians(87.0)
    v_fov: float = math.radians(58.0)
    depth_min: float = 0.4
    depth_max: float = 8.0
    mount: SensorMount = SensorMount(height=0.6, pitch=math.radians(-15.0))
    background: tuple = (235, 235, 235)

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise InvalidInput("image must be at least 2x2")
        if not (0 < self.h_fov < math.pi and 0 < self.v_fov < math.pi):
            raise InvalidInput("fov must be in (0, pi)")
        if not (0 < self.depth_min < self.depth_max):
            raise InvalidInput("need 0 < depth_min < depth_max")

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics.from_fov(
            self.width,
            self.height,
            self.h_fov,
            self.v_fov,
            depth_min=self.depth_min,
            depth_max=self.depth_max,
        )


@dataclass(frozen=True)
class SenseResult:
    depth: DepthFrame
    rgb: ColorFrame
    mask: SemanticMask
    hit_z: np.ndarray  # (H*W,) nearest-hit camera z, +inf where no hit


@lru_cache(maxsize=4)
def _pixel_dirs(spec: SensorSpec) -> np.ndarray:
    """Camera-frame ray direction per pixel, scaled to unit z. (H*W, 3)."""
    k = spec.intrinsics
    j = np.arange(spec.width)
    i = np.arange(spec.height)
    a = (j - k.cx) / k.fx
    b = (i - k.cy) / k.fy
    aa, bb = np.meshgrid(a, b)
    dirs = np.stack([aa.ravel(), bb.ravel(), np.ones(aa.size)], axis=1)
    return dirs


def camera_basis(pose: Pose2D, mount: SensorMount):
    """World-frame origin and rotation for camera rays at this pose."""
    relabel = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
    cp, sp = math.cos(mount.pitch), math.sin(mount.pitch)
    pitch = np.array([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]])
    ct, st = math.cos(pose.theta), math.sin(pose.theta)
    yaw = np.array([[ct, -st, 0.0], [st, ct, 0.0], [0.0, 0.0, 1.0]])
    rot = yaw @ pitch @ relabel
    origin = np.array(
        [
            pose.x + ct * mount.forward,
            pose.y + st * mount.forward,
            mount.height,
        ]
    )
    return origin, rot


def _z_band(oz, dz, height):
    """Interval of ray parameter z inside the slab 0 <= world z <= height."""
    n = dz.shape[0]
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    moving = np.abs(dz) > _PAR
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (0.0 - oz) / dz
        tb = (height - oz) / dz
    lo[moving] = np.minimum(ta, tb)[moving]
    hi[moving] = np.maximum(ta, tb)[moving]
    level = ~moving
    outside = level & ((oz < 0.0) | (oz > height))
    hi[outside] = -np.inf  # empty interval
    return lo, hi


def _cylinder_hit(origin, dirs, disc: Disc, height):
    dx = dirs[:, 0]
    dy = dirs[:, 1]
    ox = origin[0] - disc.cx
    oy = origin[1] - disc.cy
    a = dx * dx + dy * dy
    b = 2.0 * (ox * dx + oy * dy)
    c = ox * ox + oy * oy - disc.radius * disc.radius
    n = dirs.shape[0]
    lo = np.full(n, np.inf)
    hi = np.full(n, -np.inf)
    quad = a > _PAR
    disc_q = b * b - 4.0 * a * c
    hitq = quad & (disc_q >= 0.0)
    if hitq.any():
        root = np.sqrt(np.maximum(disc_q, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            lo = np.where(hitq, (-b - root) / (2.0 * a), lo)
            hi = np.where(hitq, (-b + root) / (2.0 * a), hi)
    if c <= 0.0:
        # Vertical rays starting inside the footprint.
        lo = np.where(~quad, -np.inf, lo)
        hi = np.where(~quad, np.inf, hi)
    zlo, zhi = _z_band(origin[2], dirs[:, 2], height)
    enter = np.maximum(np.maximum(lo, zlo), _NEAR)
    leave = np.minimum(hi, zhi)
    return np.where(enter <= leave, enter, np.inf)


def _prism_hit(origin, dirs, poly: Polygon, height):
    pts = np.asarray(poly.vertices, dtype=float)
    # Outward edge normals; orientation fixed via the signed area.
    area2 = np.sum(
        pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]
    )
    sign = 1.0 if area2 > 0 else -1.0
    n = dirs.shape[0]
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    empty = np.zeros(n, dtype=bool)
    for i in range(len(pts)):
        p1 = pts[i]
        p2 = pts[(i + 1) % len(pts)]
        e = p2 - p1
        nx, ny = sign * e[1], -sign * e[0]
        alpha = nx * (origin[0] - p1[0]) + ny * (origin[1] - p1[1])
        beta = nx * dirs[:, 0] + ny * dirs[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -alpha / beta
        entering = beta < -_PAR
        leaving = beta > _PAR
        lo = np.where(entering, np.maximum(lo, t), lo)
        hi = np.where(leaving, np.minimum(hi, t), hi)
        empty |= (np.abs(beta) <= _PAR) & (alpha > 0.0)
    zlo, zhi = _z_band(origin[2], dirs[:, 2], height)
    enter = np.maximum(np.maximum(lo, zlo), _NEAR)
    leave = np.minimum(hi, zhi)
    ok = (enter <= leave) & ~empty
    return np.where(ok, enter, np.inf)


def _decal_hit(origin, dirs, shape):
    """Ground-plane intersection inside a flat footprint."""
    dz = dirs[:, 2]
    n = dirs.shape[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -origin[2] / dz
    valid = (dz < -_PAR) & (t > _NEAR)
    out = np.full(n, np.inf)
    if not valid.any():
        return out
    px = origin[0] + t * dirs[:, 0]
    py = origin[1] + t * dirs[:, 1]
    if isinstance(shape, Disc):
        inside = (px - shape.cx) ** 2 + (py - shape.cy) ** 2 <= shape.radius**2
    else:
        inside = np.zeros(n, dtype=bool)
        inside[valid] = points_in_polygon_fast(
            px[valid], py[valid], shape.vertices
        )
    hit = valid & inside
    out[hit] = t[hit]
    return out


def points_in_polygon_fast(px, py, vertices):
    poly = np.asarray(vertices, dtype=float)
    inside = np.zeros(px.shape[0], dtype=bool)
    m = len(poly)
    for i in range(m):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % m]
        crosses = (y1 > py) != (y2 > py)
        if not crosses.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (px < x_at)
    return inside


def _entity_hit(origin, dirs, shape, height):
    if height <= 0.0:
        return _decal_hit(origin, dirs, shape)
    if isinstance(shape, Disc):
        return _cylinder_hit(origin, dirs, shape, height)
    return _prism_hit(origin, dirs, shape, height)


class Camera:
    """Caches per-pixel ray directions for one sensor configuration."""

    def __init__(self, spec: SensorSpec):
        self.spec = spec
        self.intrinsics = spec.intrinsics
        self._dirs_cam = _pixel_dirs(spec)

    def rays(self, pose: Pose2D):
        origin, rot = camera_basis(pose, self.spec.mount)
        return origin, self._dirs_cam @ rot.T

    def sense(self, world: World, pose: Pose2D, beware=()) -> SenseResult:
        """Render depth, flat-colored RGB and the ground-truth beware mask."""
        spec = self.spec
        origin, dirs = self.rays(pose)
        n = dirs.shape[0]
        best_z = np.full(n, np.inf)
        best_idx = np.full(n, -1, dtype=np.int64)

        fwd = np.array([math.cos(pose.theta), math.sin(pose.theta)])
        targets = [(e.shape, e.height, e) for e in world.entities]
        for a in world.agents:
            ax, ay = a.position()
            targets.append((Disc(ax, ay, a.radius), a.height, a))

        for idx, (shape, height, _) in enumerate(targets):
            if isinstance(shape, Disc):
                cx, cy, br = shape.cx, shape.cy, shape.radius
            else:
                pts = np.asarray(shape.vertices)
                cx, cy = pts.mean(axis=0)
                br = float(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy).max())
            rel = np.array([cx - origin[0], cy - origin[1]])
            if np.hypot(*rel) - br > spec.depth_max:
                continue
            if rel @ fwd < -br:
                continue  # fully behind the camera; no ray points backward
            z = _entity_hit(origin, dirs, shape, height)
            closer = z < best_z
            best_z[closer] = z[closer]
            best_idx[closer] = idx

        hit = np.isfinite(best_z)
        depth_flat = np.where(
            hit & (best_z >= spec.depth_min) & (best_z <= spec.depth_max),
            best_z,
            0.0,
        )
        depth = DepthFrame(
            depth_flat.reshape(spec.height, spec.width), self.intrinsics
        )

        beware_set = set(beware)
        mask_flat = np.zeros(n, dtype=np.uint8)
        rgb_flat = np.empty((n, 3), dtype=np.uint8)
        rgb_flat[:] = np.array(spec.background, dtype=np.uint8)
        for idx, (_, _, owner) in enumerate(targets):
            sel = best_idx == idx
            if not sel.any():
                continue
            rgb_flat[sel] = np.array(owner.color, dtype=np.uint8)
            if (
                hasattr(owner, "category")
                and owner.category in (Category.ITEM, Category.ZONE)
                and owner.label in beware_set
            ):
                mask_flat[sel] = 1
        rgb = ColorFrame(rgb_flat.reshape(spec.height, spec.width, 3))
        mask = SemanticMask(mask_flat.reshape(spec.height, spec.width))
        return SenseResult(depth, rgb, mask, best_z)


def sense(world: World, pose: Pose2D, spec: SensorSpec = SensorSpec(), beware=()):
    """One-shot render; returns (DepthFrame, SemanticMask).

    Convenience over Camera for callers that do not hold a camera around;
    the per-pixel direction table is cached per spec, so repeated calls do
    not redo the trigonometry.
    """
    result = Camera(spec).sense(world, pose, beware)
    return result.depth, result.mask

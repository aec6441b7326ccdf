"""Depth-frame masking, pinhole back-projection and height-band filtering.

The camera frame follows the usual optical convention: z forward along the
optical axis, x right, y down. Depth values are the z coordinate of the hit
point in that frame (not the ray length); zero marks an invalid pixel.
"""

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from . import image_io
from .errors import InvalidInput

GEOMETRIC = 0
SEMANTIC = 1

# Full-scale Euclidean distance between two RGB triples.
_RGB_DIAGONAL = 255.0 * np.sqrt(3.0)
DEFAULT_COLOR_THRESHOLD = 60.0 / 441.0


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters plus the usable depth range in meters."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    depth_min: float = 0.4
    depth_max: float = 8.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidInput("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise InvalidInput("principal point must lie inside the image")
        if not (0 < self.depth_min < self.depth_max):
            raise InvalidInput("need 0 < depth_min < depth_max")

    @classmethod
    def from_fov(
        cls,
        width: int,
        height: int,
        h_fov: float,
        v_fov: float,
        depth_min: float = 0.4,
        depth_max: float = 8.0,
    ) -> "CameraIntrinsics":
        """Build intrinsics from edge-to-edge fields of view in radians."""
        if not (0 < h_fov < math.pi and 0 < v_fov < math.pi):
            raise InvalidInput("fov must be in (0, pi)")
        return cls(
            fx=(width / 2.0) / math.tan(h_fov / 2.0),
            fy=(height / 2.0) / math.tan(v_fov / 2.0),
            cx=(width - 1) / 2.0,
            cy=(height - 1) / 2.0,
            width=width,
            height=height,
            depth_min=depth_min,
            depth_max=depth_max,
        )


@dataclass(frozen=True)
class DepthFrame:
    """A single depth image in meters; 0 marks invalid pixels."""

    data: np.ndarray
    intrinsics: CameraIntrinsics

    def __post_init__(self):
        d = self.data
        k = self.intrinsics
        if d.ndim != 2 or d.shape != (k.height, k.width):
            raise InvalidInput(
                f"depth shape {d.shape} does not match intrinsics "
                f"({k.height}, {k.width})"
            )
        finite = np.isfinite(d)
        if not finite.all():
            raise InvalidInput("depth data contains non-finite values")
        nonzero = d[d != 0.0]
        if nonzero.size and (
            (nonzero < k.depth_min).any() or (nonzero > k.depth_max).any()
        ):
            raise InvalidInput("nonzero depth outside [depth_min, depth_max]")

    @staticmethod
    def sanitized(data, intrinsics: CameraIntrinsics) -> "DepthFrame":
        """Build a frame, zeroing out-of-range or non-finite samples."""
        d = np.asarray(data, dtype=np.float64).copy()
        bad = ~np.isfinite(d)
        d[bad] = 0.0
        out_of_range = (d != 0.0) & (
            (d < intrinsics.depth_min) | (d > intrinsics.depth_max)
        )
        d[out_of_range] = 0.0
        return DepthFrame(d, intrinsics)


@dataclass(frozen=True)
class ColorFrame:
    """RGB image, (H, W, 3) uint8."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 3 or d.dtype != np.uint8:
            raise InvalidInput("color frame must be (H, W, 3) uint8")


@dataclass(frozen=True)
class SemanticMask:
    """Binary per-pixel mask over the active beware classes."""

    data: np.ndarray
    class_id: str = "beware"

    def __post_init__(self):
        d = self.data
        if d.ndim != 2 or d.dtype != np.uint8:
            raise InvalidInput("mask must be a 2-D uint8 array")
        if d.size and d.max() > 1:
            raise InvalidInput("mask values must be 0 or 1")


@dataclass(frozen=True)
class PointCloud:
    """Point set with per-point provenance (GEOMETRIC or SEMANTIC).

    points is (N, 3) float64; provenance is (N,) uint8. Treat both arrays as
    immutable once wrapped.
    """

    points: np.ndarray
    provenance: np.ndarray

    def __post_init__(self):
        p = self.points
        t = self.provenance
        if p.ndim != 2 or p.shape[1] != 3:
            raise InvalidInput("points must be (N, 3)")
        if t.shape != (p.shape[0],):
            raise InvalidInput("provenance length must match point count")
        if p.size and not np.isfinite(p).all():
            raise InvalidInput("points contain non-finite values")

    def __len__(self):
        return self.points.shape[0]

    @staticmethod
    def empty() -> "PointCloud":
        return PointCloud(np.empty((0, 3)), np.empty(0, dtype=np.uint8))

    @staticmethod
    def concatenate(clouds) -> "PointCloud":
        clouds = list(clouds)
        if not clouds:
            return PointCloud.empty()
        return PointCloud(
            np.concatenate([c.points for c in clouds]),
            np.concatenate([c.provenance for c in clouds]),
        )

    def select(self, keep) -> "PointCloud":
        return PointCloud(self.points[keep], self.provenance[keep])


@dataclass(frozen=True)
class FilterConfig:
    """Height band for geometric points, in the ground-referenced frame.

    obstacle_min_height is the object size below which geometry alone cannot
    flag a hazard; it equals the ground cutoff by default.
    """

    ground_max_z: float = 0.10
    ceiling_min_z: float = 1.00
    obstacle_min_height: float = 0.10

    def __post_init__(self):
        if not (0 <= self.ground_max_z < self.ceiling_min_z):
            raise InvalidInput("need 0 <= ground_max_z < ceiling_min_z")


def apply_mask(depth: DepthFrame, mask: SemanticMask) -> DepthFrame:
    """Element-wise product of a depth frame with a binary mask."""
    if mask.data.shape != depth.data.shape:
        raise InvalidInput(
            f"mask shape {mask.data.shape} != depth shape {depth.data.shape}"
        )
    return DepthFrame(depth.data * mask.data, depth.intrinsics)


def back_project(depth: DepthFrame, provenance: int) -> PointCloud:
    """Lift valid depth pixels into camera-frame 3-D points.

    A pixel at row i, column j with depth Z maps to
    X = (j - cx) * Z / fx, Y = (i - cy) * Z / fy. Points come out in
    row-major pixel order, one per valid (nonzero, in-range) pixel.
    """
    if provenance not in (GEOMETRIC, SEMANTIC):
        raise InvalidInput(f"unknown provenance {provenance!r}")
    k = depth.intrinsics
    d = depth.data
    valid = (d >= k.depth_min) & (d <= k.depth_max)
    i, j = np.nonzero(valid)
    z = d[i, j]
    x = (j - k.cx) * z / k.fx
    y = (i - k.cy) * z / k.fy
    pts = np.column_stack([x, y, z])
    return PointCloud(pts, np.full(len(pts), provenance, dtype=np.uint8))


def filter_geometric(cloud: PointCloud, cfg: FilterConfig) -> PointCloud:
    """Drop geometric points outside the height band; keep semantic ones.

    Expects points in a ground-referenced frame (z up, z = 0 at the floor).
    Semantic points always pass: that is the whole point of flagging them.
    """
    z = cloud.points[:, 2]
    keep = (cloud.provenance == SEMANTIC) | (
        (z >= cfg.ground_max_z) & (z <= cfg.ceiling_min_z)
    )
    return cloud.select(keep)


class Segmenter(Protocol):
    """Anything that turns an RGB (+ registered depth) frame into a mask."""

    def segment(self, rgb: ColorFrame, depth: DepthFrame) -> SemanticMask: ...


@dataclass(frozen=True)
class ColorThresholdSegmenter:
    """Reference segmenter: per-pixel RGB distance to known beware colors.

    threshold is a fraction of the full-scale RGB distance (255 * sqrt(3)).
    A pixel is flagged when it sits within the threshold of any beware color.
    """

    beware_colors: tuple = ()
    threshold: float = DEFAULT_COLOR_THRESHOLD
    class_id: str = "beware"

    def __post_init__(self):
        if not (0 < self.threshold <= 1):
            raise InvalidInput("threshold must be in (0, 1]")

    def segment(self, rgb: ColorFrame, depth: DepthFrame) -> SemanticMask:
        if rgb.data.shape[:2] != depth.data.shape:
            raise InvalidInput("rgb and depth dimensions differ")
        mask = np.zeros(rgb.data.shape[:2], dtype=np.uint8)
        pixels = rgb.data.astype(np.float64)
        limit = (self.threshold * _RGB_DIAGONAL) ** 2
        for color in self.beware_colors:
            ref = np.asarray(color, dtype=np.float64)
            dist2 = ((pixels - ref) ** 2).sum(axis=2)
            mask |= (dist2 <= limit).astype(np.uint8)
        return SemanticMask(mask, self.class_id)


def load_depth_pgm(path, intrinsics: CameraIntrinsics) -> DepthFrame:
    """Load a 16-bit PGM holding depth in millimeters."""
    raw = image_io.read_pgm(path)
    return DepthFrame.sanitized(raw.astype(np.float64) / 1000.0, intrinsics)


def load_depth_raw(path, intrinsics: CameraIntrinsics) -> DepthFrame:
    """Load raw little-endian float32 depth in meters, row-major."""
    data = np.fromfile(path, dtype="<f4")
    expected = intrinsics.width * intrinsics.height
    if data.size != expected:
        raise InvalidInput(
            f"raw depth holds {data.size} samples, expected {expected}"
        )
    return DepthFrame.sanitized(
        data.astype(np.float64).reshape(intrinsics.height, intrinsics.width),
        intrinsics,
    )


def load_mask_pgm(path, class_id: str = "beware") -> SemanticMask:
    """Load an 8-bit PGM mask; any nonzero sample counts as flagged."""
    raw = image_io.read_pgm(path)
    if raw.dtype != np.uint8:
        raise InvalidInput("mask PGM must be 8-bit")
    return SemanticMask((raw != 0).astype(np.uint8), class_id)

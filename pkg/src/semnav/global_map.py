"""Pose-keyed global point cloud with replace-on-revisit semantics.

Each scan is stored in world coordinates under a quantized pose key. Seeing
the world again from (almost) the same pose replaces the old scan wholesale,
so objects that moved away stop haunting the map once their viewpoint is
revisited.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .geometry import floor_index, normalize_angle
from .perception import PointCloud

POSE_XY_QUANTUM = 0.25
POSE_THETA_QUANTUM = math.radians(15.0)

_FIELD_BITS = 21
_FIELD_OFFSET = 1 << 20


@dataclass(frozen=True)
class Pose2D:
    """Planar pose; theta is normalized to (-pi, pi] on construction."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise InvalidInput("pose fields must be finite")
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True)
class SensorMount:
    """Rigid camera mount relative to the robot base.

    height lifts the optical center off the ground, forward shifts it along
    the robot x axis, pitch tilts the optical axis above (+) or below (-)
    the horizontal.
    """

    height: float = 0.0
    pitch: float = 0.0
    forward: float = 0.0


def pose_cell(pose: Pose2D):
    """Quantized (x, y, theta) indices used for keying scans."""
    return (
        floor_index(pose.x, POSE_XY_QUANTUM),
        floor_index(pose.y, POSE_XY_QUANTUM),
        floor_index(pose.theta, POSE_THETA_QUANTUM),
    )


def pose_id(pose: Pose2D) -> int:
    """Pack the quantized pose cell into one sortable integer key."""
    qx, qy, qt = pose_cell(pose)
    for q in (qx, qy, qt):
        if not (-_FIELD_OFFSET <= q < _FIELD_OFFSET):
            raise InvalidInput(f"pose component {q} exceeds the keyable range")
    return (
        ((qx + _FIELD_OFFSET) << (2 * _FIELD_BITS))
        | ((qy + _FIELD_OFFSET) << _FIELD_BITS)
        | (qt + _FIELD_OFFSET)
    )


def mount_matrix(mount: SensorMount):
    """4x4 homogeneous transform from camera frame to robot frame.

    Camera axes (x right, y down, z forward) are first relabeled onto the
    robot axes (x forward, y left, z up), then pitched about the lateral
    axis, then shifted by the mount offsets.
    """
    relabel = np.array(
        [
            [0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
        ]
    )
    cp = math.cos(mount.pitch)
    sp = math.sin(mount.pitch)
    pitch = np.array(
        [
            [cp, 0.0, -sp],
            [0.0, 1.0, 0.0],
            [sp, 0.0, cp],
        ]
    )
    t = np.eye(4)
    t[:3, :3] = pitch @ relabel
    t[0, 3] = mount.forward
    t[2, 3] = mount.height
    return t


def pose_matrix(pose: Pose2D):
    """4x4 homogeneous transform from robot frame to world frame."""
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    t = np.eye(4)
    t[0, 0] = c
    t[0, 1] = -s
    t[1, 0] = s
    t[1, 1] = c
    t[0, 3] = pose.x
    t[1, 3] = pose.y
    return t


def transform_to_world(
    cloud: PointCloud, pose: Pose2D, mount: SensorMount
) -> PointCloud:
    """Map a camera-frame cloud into world coordinates.

    The composed transform applies the mount (height, pitch, forward offset)
    and then the planar robot pose. Provenance tags ride along unchanged.
    """
    if len(cloud) == 0:
        return cloud
    m = (pose_matrix(pose) @ mount_matrix(mount))[:3, :]
    pts = cloud.points @ m[:, :3].T + m[:, 3]
    return PointCloud(pts, cloud.provenance.copy())


class GlobalMap:
    """Mapping from quantized pose key to the latest world-frame scan."""

    def __init__(self):
        self._entries = {}
        self._next_seq = 0

    def __len__(self):
        return len(self._entries)

    @property
    def pose_ids(self):
        return sorted(self._entries)

    def upsert_scan(self, pose: Pose2D, world_cloud: PointCloud) -> int:
        """Insert or replace the scan keyed by this pose. Returns the key."""
        key = pose_id(pose)
        self._entries[key] = (self._next_seq, world_cloud)
        self._next_seq += 1
        return key

    def scan_for(self, key: int):
        seq_cloud = self._entries.get(key)
        return None if seq_cloud is None else seq_cloud[1]

    def merged_cloud(self) -> PointCloud:
        """Concatenate every stored scan, ordered by pose key.

        The result is a snapshot: later upserts do not mutate it.
        """
        if not self._entries:
            return PointCloud.empty()
        parts = [self._entries[k][1] for k in sorted(self._entries)]
        return PointCloud.concatenate(parts)

    def dump_text(self, path) -> None:
        """Write `x y z provenance pose_id` lines, merged order."""
        with open(path, "w") as f:
            for key in sorted(self._entries):
                cloud = self._entries[key][1]
                for (x, y, z), prov in zip(cloud.points, cloud.provenance):
                    f.write(
                        f"{float(x)!r} {float(y)!r} {float(z)!r} {int(prov)} {key}\n"
                    )

    @staticmethod
    def load_text(path) -> "GlobalMap":
        """Rebuild a map from dump_text output."""
        groups = {}
        with open(path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                sx, sy, sz, sp, sk = line.split()
                groups.setdefault(int(sk), []).append(
                    (float(sx), float(sy), float(sz), int(sp))
                )
        gmap = GlobalMap()
        for key in sorted(groups):
            rows = np.array(groups[key], dtype=np.float64)
            cloud = PointCloud(rows[:, :3], rows[:, 3].astype(np.uint8))
            gmap._entries[key] = (gmap._next_seq, cloud)
            gmap._next_seq += 1
        return gmap

    def export_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["x", "y", "z", "provenance", "pose_id"])
            for key in sorted(self._entries):
                cloud = self._entries[key][1]
                for (x, y, z), prov in zip(cloud.points, cloud.provenance):
                    writer.writerow([f"{x:.6f}", f"{y:.6f}", f"{z:.6f}", int(prov), key])

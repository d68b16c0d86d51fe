"""Per-frame pose feature vectors.

The full feature set for one frame concatenates, in fixed order:

  * normalized coordinates, 3J scalars (joint-major, x,y,z),
  * pairwise joint distances on normalized coordinates, C(J,2) scalars in
    lexicographic (i<j) pair order,
  * bone elevation/azimuth angles from the raw world coordinates, 2b
    scalars (per bone: elevation then azimuth, bones in topology order).

For J=25 / b=24 this is 75 + 300 + 48 = 423 scalars. A raw-coordinate
group (3J, ahead of the others) can be enabled for ablations, and each
group can be switched off individually.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import MoveseqError
from .skeleton import JointTopology, Pose, SkeletonSequence


@dataclass(frozen=True)
class FeatureLayout:
    """Which feature groups are assembled, in [coords|norm|dist|angles] order."""

    include_coords: bool = False
    include_normalized: bool = True
    include_distances: bool = True
    include_angles: bool = True

    def __post_init__(self):
        if not (self.include_coords or self.include_normalized or self.include_distances or self.include_angles):
            raise MoveseqError("feature layout selects no groups")

    @classmethod
    def from_flags(cls, flags: str) -> "FeatureLayout":
        """Parse a comma set out of {coords, norm, geom}; geom = distances + angles."""
        tokens = {t.strip() for t in flags.split(",") if t.strip()}
        unknown = tokens - {"coords", "norm", "geom"}
        if unknown:
            raise MoveseqError(f"unknown feature flags: {sorted(unknown)}")
        return cls(
            include_coords="coords" in tokens,
            include_normalized="norm" in tokens,
            include_distances="geom" in tokens,
            include_angles="geom" in tokens,
        )

    def group_dims(self, n_joints: int, n_bones: int) -> dict[str, int]:
        dims = {}
        if self.include_coords:
            dims["coords"] = 3 * n_joints
        if self.include_normalized:
            dims["normalized"] = 3 * n_joints
        if self.include_distances:
            dims["distances"] = n_joints * (n_joints - 1) // 2
        if self.include_angles:
            dims["angles"] = 2 * n_bones
        return dims

    def dim(self, n_joints: int, n_bones: int) -> int:
        return sum(self.group_dims(n_joints, n_bones).values())

    def group_slices(self, n_joints: int, n_bones: int) -> dict[str, slice]:
        slices, offset = {}, 0
        for name, width in self.group_dims(n_joints, n_bones).items():
            slices[name] = slice(offset, offset + width)
            offset += width
        return slices


@dataclass(frozen=True)
class FeatureFrame:
    """One frame's assembled feature vector with views of its groups."""

    vector: np.ndarray
    raw_coords: np.ndarray | None
    normalized_coords: np.ndarray | None
    pairwise_distances: np.ndarray | None
    bone_angles: np.ndarray | None


def pairwise_distances(pose: Pose) -> np.ndarray:
    """Euclidean distance for every joint pair (i<j), lexicographic order."""
    return pdist(pose.joints)


def bone_angles(pose: Pose, topo: JointTopology) -> np.ndarray:
    """Elevation and azimuth of each bone vector in world coordinates.

    For bone (parent, child) with v = child - parent: elevation
    phi = asin(v_y / |v|) in [-pi/2, pi/2], azimuth theta = atan2(v_z, v_x)
    in (-pi, pi]. Zero-length bones yield (0, 0).
    """
    parents = np.fromiter((p for p, _ in topo.bones), dtype=int, count=topo.n_bones)
    children = np.fromiter((c for _, c in topo.bones), dtype=int, count=topo.n_bones)
    v = pose.joints[children] - pose.joints[parents]
    norms = np.linalg.norm(v, axis=1)
    nonzero = norms > 0
    phi = np.zeros(topo.n_bones)
    theta = np.zeros(topo.n_bones)
    phi[nonzero] = np.arcsin(np.clip(v[nonzero, 1] / norms[nonzero], -1.0, 1.0))
    theta[nonzero] = np.arctan2(v[nonzero, 2], v[nonzero, 0])
    theta[theta == -np.pi] = np.pi
    out = np.empty(2 * topo.n_bones)
    out[0::2] = phi
    out[1::2] = theta
    return out


def feature_matrix(
    seq_world: SkeletonSequence,
    seq_norm: SkeletonSequence,
    layout: FeatureLayout | None = None,
) -> np.ndarray:
    """Assemble the (N, D) feature matrix for a sequence.

    seq_world supplies raw coordinates and bone angles; seq_norm supplies
    normalized coordinates and pairwise distances.
    """
    layout = layout or FeatureLayout()
    if len(seq_world) != len(seq_norm):
        raise MoveseqError(f"sequence length mismatch: {len(seq_world)} vs {len(seq_norm)}")
    if seq_world.topology.n_joints != seq_norm.topology.n_joints:
        raise MoveseqError("sequences use different topologies")
    topo = seq_world.topology
    n = len(seq_world)
    out = np.empty((n, layout.dim(topo.n_joints, topo.n_bones)))
    slices = layout.group_slices(topo.n_joints, topo.n_bones)
    for i in range(n):
        if layout.include_coords:
            out[i, slices["coords"]] = seq_world.poses[i].joints.reshape(-1)
        if layout.include_normalized:
            out[i, slices["normalized"]] = seq_norm.poses[i].joints.reshape(-1)
        if layout.include_distances:
            out[i, slices["distances"]] = pairwise_distances(seq_norm.poses[i])
        if layout.include_angles:
            out[i, slices["angles"]] = bone_angles(seq_world.poses[i], topo)
    return out


def assemble_features(
    seq_world: SkeletonSequence,
    seq_norm: SkeletonSequence,
    layout: FeatureLayout | None = None,
) -> list[FeatureFrame]:
    """Per-frame FeatureFrame views over the assembled matrix."""
    layout = layout or FeatureLayout()
    topo = seq_world.topology
    matrix = feature_matrix(seq_world, seq_norm, layout)
    slices = layout.group_slices(topo.n_joints, topo.n_bones)
    frames = []
    for row in matrix:
        frames.append(
            FeatureFrame(
                vector=row,
                raw_coords=row[slices["coords"]] if "coords" in slices else None,
                normalized_coords=row[slices["normalized"]] if "normalized" in slices else None,
                pairwise_distances=row[slices["distances"]] if "distances" in slices else None,
                bone_angles=row[slices["angles"]] if "angles" in slices else None,
            )
        )
    return frames

"""Camera frustum geometry for the capture simulator.

A perspective frustum is the intersection of six half-spaces built from a
camera's basis, vertical field of view, aspect ratio, and near/far clip
distances. Visibility is a closed-set decision: a sphere tangent to the
boundary counts as visible.

The quick six-plane distance test is conservative (it can accept a sphere
that hugs an edge or corner without touching the volume), so borderline
cases fall through to an exact closest-point computation against the
frustum polytope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateCamera

Vec3 = tuple[float, float, float]

ORTHO_TOL = 1e-6


def _dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def _cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _norm(a: Vec3) -> float:
    return math.sqrt(_dot(a, a))


def _normalize(a: Vec3) -> Vec3:
    n = _norm(a)
    return (a[0] / n, a[1] / n, a[2] / n)


@dataclass(frozen=True)
class Rect2:
    """Axis-aligned screen-space rectangle (closed intervals)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def overlaps_square(self, cx: float, cy: float, half: float) -> bool:
        return (
            cx + half >= self.x0
            and cx - half <= self.x1
            and cy + half >= self.y0
            and cy - half <= self.y1
        )


@dataclass(frozen=True)
class CameraState:
    position: Vec3
    forward: Vec3
    up: Vec3
    vfov_deg: float
    aspect: float
    near: float
    far: float
    ui_rect: Rect2

    def validate(self) -> None:
        if abs(_norm(self.forward) - 1.0) > 1e-4 or abs(_norm(self.up) - 1.0) > 1e-4:
            raise DegenerateCamera("forward/up must be unit vectors")
        if abs(_dot(self.forward, self.up)) > ORTHO_TOL:
            raise DegenerateCamera("forward and up must be orthogonal")
        if not (0.0 < self.vfov_deg < 180.0):
            raise DegenerateCamera(f"vfov out of range: {self.vfov_deg}")
        if self.aspect <= 0.0:
            raise DegenerateCamera(f"aspect must be positive: {self.aspect}")
        if not (0.0 < self.near < self.far):
            raise DegenerateCamera(f"need 0 < near < far, got {self.near}, {self.far}")


@dataclass(frozen=True)
class Frustum:
    """Six inward-facing planes plus the eight corner points."""

    planes: tuple[tuple[Vec3, float], ...]  # (unit normal n, offset d): inside iff n.x + d >= 0
    corners: tuple[Vec3, ...]

    @classmethod
    def from_camera(cls, cam: CameraState) -> "Frustum":
        cam.validate()
        f = _normalize(cam.forward)
        u = _normalize(cam.up)
        r = _normalize(_cross(f, u))
        half_v = math.tan(math.radians(cam.vfov_deg) / 2.0)
        half_h = half_v * cam.aspect
        p = cam.position

        def plane(normal: Vec3, point: Vec3) -> tuple[Vec3, float]:
            n = _normalize(normal)
            return (n, -_dot(n, point))

        planes = (
            plane(f, _add(p, _scale(f, cam.near))),            # near
            plane(_scale(f, -1.0), _add(p, _scale(f, cam.far))),  # far
            plane(_sub(_scale(f, half_v), u), p),              # top
            plane(_add(_scale(f, half_v), u), p),              # bottom
            plane(_sub(_scale(f, half_h), r), p),              # right
            plane(_add(_scale(f, half_h), r), p),              # left
        )

        corners = []
        for dist in (cam.near, cam.far):
            c = _add(p, _scale(f, dist))
            for sy in (-1.0, 1.0):
                for sx in (-1.0, 1.0):
                    offset = _add(
                        _scale(u, sy * half_v * dist), _scale(r, sx * half_h * dist)
                    )
                    corners.append(_add(c, offset))
        return cls(planes=planes, corners=tuple(corners))

    def signed_distances(self, point: Vec3) -> list[float]:
        return [_dot(n, point) + d for n, d in self.planes]

    def contains_point(self, point: Vec3) -> bool:
        return all(dist >= 0.0 for dist in self.signed_distances(point))

    def distance_to(self, point: Vec3) -> float:
        """Exact Euclidean distance from a point to the closed frustum."""
        if self.contains_point(point):
            return 0.0
        best = math.inf
        for face in _FACE_CORNERS:
            poly = [self.corners[i] for i in face]
            best = min(best, _point_polygon_distance(point, poly))
        return best


# Corner indexing: 0..3 near plane, 4..7 far plane; within a plane the order
# is (-y,-x), (-y,+x), (+y,-x), (+y,+x). Faces wind consistently so each is
# a planar convex quad.
_FACE_CORNERS = (
    (0, 1, 3, 2),  # near
    (4, 5, 7, 6),  # far
    (2, 3, 7, 6),  # top
    (0, 1, 5, 4),  # bottom
    (1, 3, 7, 5),  # right
    (0, 2, 6, 4),  # left
)


def _point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> float:
    ab = _sub(b, a)
    denom = _dot(ab, ab)
    if denom == 0.0:
        return _norm(_sub(p, a))
    t = max(0.0, min(1.0, _dot(_sub(p, a), ab) / denom))
    closest = _add(a, _scale(ab, t))
    return _norm(_sub(p, closest))


def _point_polygon_distance(p: Vec3, poly: list[Vec3]) -> float:
    """Distance from a point to a planar convex polygon (with boundary)."""
    a, b, c = poly[0], poly[1], poly[2]
    normal = _cross(_sub(b, a), _sub(c, a))
    nn = _norm(normal)
    if nn == 0.0:  # degenerate face; fall back to edges
        return min(
            _point_segment_distance(p, poly[i], poly[(i + 1) % len(poly)])
            for i in range(len(poly))
        )
    normal = _scale(normal, 1.0 / nn)
    dist_plane = _dot(_sub(p, a), normal)
    proj = _sub(p, _scale(normal, dist_plane))
    inside = True
    for i in range(len(poly)):
        e = _sub(poly[(i + 1) % len(poly)], poly[i])
        to_p = _sub(proj, poly[i])
        if _dot(_cross(e, to_p), normal) < 0.0:
            inside = False
            break
    if inside:
        return abs(dist_plane)
    return min(
        _point_segment_distance(p, poly[i], poly[(i + 1) % len(poly)])
        for i in range(len(poly))
    )


def sphere_in_frustum(camera: CameraState, center: Vec3, radius: float) -> bool:
    """True iff the closed ball intersects the closed frustum volume.

    The plane-distance pass settles the common cases: rejection against any
    single plane is exact, and a center inside all planes is trivially
    visible. Only centers outside the volume but within `radius` of every
    plane need the exact polytope distance.
    """
    frustum = Frustum.from_camera(camera)
    dists = frustum.signed_distances(center)
    if any(d < -radius for d in dists):
        return False
    if all(d >= 0.0 for d in dists):
        return True
    return frustum.distance_to(center) <= radius

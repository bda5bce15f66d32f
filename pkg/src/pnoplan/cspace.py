"""Analytic d-dimensional configuration spaces.

A scene is an axis-aligned bounding box minus a set of pairwise disjoint
analytic obstacles (balls and axis-aligned boxes).  Disjointness keeps the
free volume exact by subtraction, which the analysis formulas consume
directly.  Obstacles are closed: points on an obstacle boundary collide.

Configurations are plain float arrays of length d.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import SamplingStarvedError, SceneFormatError, UnsupportedSceneError
from .geometry import ball_volume

DEFAULT_SAMPLE_CAP = 10**6
_SAMPLE_BLOCK = 1024


@dataclass(frozen=True)
class BallObstacle:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise UnsupportedSceneError(f"ball obstacle needs radius > 0, got {self.radius}")

    def volume(self) -> float:
        return ball_volume(self.center.shape[0], self.radius)


@dataclass(frozen=True)
class BoxObstacle:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape:
            raise UnsupportedSceneError("box obstacle lo/hi dimension mismatch")
        if not np.all(self.lo < self.hi):
            raise UnsupportedSceneError("box obstacle needs lo < hi on every axis")

    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))


Obstacle = BallObstacle | BoxObstacle


def _point_box_distance(p: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    gaps = np.maximum(np.maximum(lo - p, p - hi), 0.0)
    return float(np.linalg.norm(gaps))


def _obstacles_overlap(a: Obstacle, b: Obstacle) -> bool:
    # Interior overlap only; touching boundaries are fine for exact volumes.
    if isinstance(a, BallObstacle) and isinstance(b, BallObstacle):
        return float(np.linalg.norm(a.center - b.center)) < a.radius + b.radius
    if isinstance(a, BoxObstacle) and isinstance(b, BoxObstacle):
        return bool(np.all(a.lo < b.hi) and np.all(b.lo < a.hi))
    ball, box = (a, b) if isinstance(a, BallObstacle) else (b, a)
    return _point_box_distance(ball.center, box.lo, box.hi) < ball.radius


@dataclass(frozen=True)
class Scene:
    """Bounding box plus disjoint obstacles, immutable after construction."""

    lo: np.ndarray
    hi: np.ndarray
    obstacles: tuple[Obstacle, ...] = ()
    _kernel_arrays: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise UnsupportedSceneError("bounds lo/hi must be 1-d arrays of equal length")
        if not np.all(lo < hi):
            raise UnsupportedSceneError("bounds need lo < hi on every axis")
        for idx, obs in enumerate(self.obstacles):
            self._check_contained(idx, obs)
        for i in range(len(self.obstacles)):
            for j in range(i + 1, len(self.obstacles)):
                if _obstacles_overlap(self.obstacles[i], self.obstacles[j]):
                    raise UnsupportedSceneError(
                        f"obstacles {i} and {j} overlap; disjoint obstacles are "
                        f"required for an exact free volume"
                    )
        balls = [o for o in self.obstacles if isinstance(o, BallObstacle)]
        boxes = [o for o in self.obstacles if isinstance(o, BoxObstacle)]
        d = self.d
        arrays = (
            lo,
            hi,
            np.array([b.center for b in balls]).reshape(len(balls), d),
            np.array([b.radius for b in balls], dtype=float),
            np.array([b.lo for b in boxes]).reshape(len(boxes), d),
            np.array([b.hi for b in boxes]).reshape(len(boxes), d),
        )
        object.__setattr__(self, "_kernel_arrays", arrays)

    def _check_contained(self, idx: int, obs: Obstacle):
        if isinstance(obs, BallObstacle):
            if obs.center.shape != self.lo.shape:
                raise UnsupportedSceneError(f"obstacle {idx}: dimension mismatch with bounds")
            inside = np.all(obs.center - obs.radius >= self.lo) and np.all(
                obs.center + obs.radius <= self.hi
            )
        else:
            if obs.lo.shape != self.lo.shape:
                raise UnsupportedSceneError(f"obstacle {idx}: dimension mismatch with bounds")
            inside = np.all(obs.lo >= self.lo) and np.all(obs.hi <= self.hi)
        if not inside:
            raise UnsupportedSceneError(f"obstacle {idx} is not contained in the scene bounds")

    @property
    def d(self) -> int:
        return self.lo.shape[0]

    def bounds_volume(self) -> float:
        return float(np.prod(self.hi - self.lo))


def is_free_many(scene: Scene, points: np.ndarray) -> np.ndarray:
    """Vectorised free-space membership for an (n, d) array of points."""
    points = np.ascontiguousarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != scene.d:
        raise ValueError(f"points must have shape (n, {scene.d}), got {points.shape}")
    return kernels.free_mask(points, *scene._kernel_arrays)


def is_free(scene: Scene, q) -> bool:
    """True iff q lies inside the bounds and outside every obstacle."""
    q = np.asarray(q, dtype=float)
    if q.shape != (scene.d,):
        raise ValueError(f"configuration must have shape ({scene.d},), got {q.shape}")
    return bool(is_free_many(scene, q[None, :])[0])


def segment_free(scene: Scene, a, b, step: float) -> bool:
    """Resolution-complete segment check.

    Samples the segment [a, b] at spacing <= step, endpoints included, and
    requires every sample to be free.  Obstacle incursions narrower than the
    sampling resolution can be missed; callers choose ``step`` small enough
    for their clearance regime.
    """
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (scene.d,) or b.shape != (scene.d,):
        raise ValueError(f"segment endpoints must have shape ({scene.d},)")
    length = float(np.linalg.norm(b - a))
    k = max(1, math.ceil(length / step))
    ts = np.linspace(0.0, 1.0, k + 1)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    return bool(is_free_many(scene, pts).all())


def segments_free(scene: Scene, starts: np.ndarray, ends: np.ndarray, step: float) -> np.ndarray:
    """Batched segment checks sharing one sampling resolution.

    All segments are sampled with the count required by the longest one, so
    the spacing contract (<= step) holds for every segment.
    """
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    if not scene.obstacles:
        # Bounds are convex, so segments between in-bound endpoints stay free.
        ok = is_free_many(scene, starts) & is_free_many(scene, ends)
        return ok
    lengths = np.linalg.norm(ends - starts, axis=1)
    k = max(1, math.ceil(float(lengths.max(initial=0.0)) / step))
    ts = np.linspace(0.0, 1.0, k + 1)
    pts = starts[:, None, :] + ts[None, :, None] * (ends - starts)[:, None, :]
    flat = pts.reshape(-1, scene.d)
    mask = is_free_many(scene, flat).reshape(len(starts), k + 1)
    return mask.all(axis=1)


def free_volume(scene: Scene) -> float:
    """Exact |C_free|: bounds volume minus the summed obstacle volumes."""
    vol = scene.bounds_volume() - sum(o.volume() for o in scene.obstacles)
    return max(vol, 0.0)


def sample_free_batch(
    scene: Scene,
    rng: np.random.Generator,
    count: int,
    cap: int = DEFAULT_SAMPLE_CAP,
) -> tuple[np.ndarray, int]:
    """Draw ``count`` uniform free configurations by rejection.

    Returns (points, attempts); the attempt count is the total number of
    bound-box draws, which diagnoses the rejection rate.  Raises
    SamplingStarvedError when ``cap`` consecutive attempts produce no
    acceptance.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    out = np.empty((count, scene.d))
    got = 0
    attempts = 0
    misses = 0
    span = scene.hi - scene.lo
    while got < count:
        block = rng.random((_SAMPLE_BLOCK, scene.d)) * span + scene.lo
        attempts += _SAMPLE_BLOCK
        good = block[is_free_many(scene, block)]
        if good.shape[0] == 0:
            misses += _SAMPLE_BLOCK
            if misses >= cap:
                raise SamplingStarvedError(
                    f"no free sample in {misses} consecutive draws; "
                    f"free volume may be negligible"
                )
            continue
        misses = 0
        take = min(good.shape[0], count - got)
        out[got : got + take] = good[:take]
        got += take
    return out, attempts


def sample_free(scene: Scene, rng: np.random.Generator, cap: int = DEFAULT_SAMPLE_CAP) -> np.ndarray:
    """Draw one uniform free configuration by rejection sampling."""
    pts, _ = sample_free_batch(scene, rng, 1, cap)
    return pts[0]


# ---------------------------------------------------------------------------
# scene files
# ---------------------------------------------------------------------------

def scene_to_dict(scene: Scene) -> dict:
    obstacles = []
    for o in scene.obstacles:
        if isinstance(o, BallObstacle):
            obstacles.append({"kind": "ball", "center": o.center.tolist(), "radius": o.radius})
        else:
            obstacles.append({"kind": "box", "lo": o.lo.tolist(), "hi": o.hi.tolist()})
    return {
        "dimension": scene.d,
        "bounds": {"lo": scene.lo.tolist(), "hi": scene.hi.tolist()},
        "obstacles": obstacles,
    }


def scene_from_dict(data: dict) -> Scene:
    """Build a Scene from the JSON document structure, with index-tagged errors."""
    try:
        d = int(data["dimension"])
        lo = np.asarray(data["bounds"]["lo"], dtype=float)
        hi = np.asarray(data["bounds"]["hi"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"bad scene header: {exc}") from exc
    if lo.shape != (d,) or hi.shape != (d,):
        raise SceneFormatError(
            f"bounds must be length-{d} arrays, got lo{lo.shape} hi{hi.shape}"
        )
    obstacles: list[Obstacle] = []
    for idx, entry in enumerate(data.get("obstacles", [])):
        try:
            kind = entry["kind"]
            if kind in ("ball", "sphere"):
                obs: Obstacle = BallObstacle(np.asarray(entry["center"], dtype=float),
                                             float(entry["radius"]))
            elif kind in ("box", "axis-aligned-box", "aabb"):
                obs = BoxObstacle(np.asarray(entry["lo"], dtype=float),
                                  np.asarray(entry["hi"], dtype=float))
            else:
                raise SceneFormatError(f"unknown obstacle kind {kind!r}")
        except SceneFormatError:
            raise
        except (KeyError, TypeError, ValueError, UnsupportedSceneError) as exc:
            raise SceneFormatError(f"obstacle {idx}: {exc}") from exc
        obstacles.append(obs)
    try:
        return Scene(lo, hi, tuple(obstacles))
    except UnsupportedSceneError as exc:
        raise SceneFormatError(str(exc)) from exc


def load_scene(path) -> Scene:
    """Load and validate a scene JSON file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SceneFormatError(f"cannot read scene file {path}: {exc}") from exc
    return scene_from_dict(data)


def save_scene(scene: Scene, path) -> None:
    with open(path, "w") as fh:
        json.dump(scene_to_dict(scene), fh, indent=2, sort_keys=True)
        fh.write("\n")

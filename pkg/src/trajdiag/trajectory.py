"""Signature space, fault trajectories and trajectory intersection counting.

A signature is the vector of golden-relative dB differences at the test
frequencies, so the golden circuit sits exactly at the origin. Sweeping
one component's deviation across its grid traces a piecewise-linear
trajectory through the origin; trajectories of different components are
distinguishable when their segments neither cross nor share pathways
away from the common origin.

Incidence between two segments is decided by their minimum distance
(closed-form clamped closest-point computation, any dimension) against a
tolerance; a pair that stays parallel over a positive overlap length is
reported as an ``overlap`` (one count per segment pair), anything else
as a ``cross``. Incidences whose entire contact region lies within the
origin-exclusion ball are discarded, since every trajectory meets at the
golden point by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .faultlib import FaultConfig, ensemble_for
from .netlist import Circuit

CROSS = "cross"
OVERLAP = "overlap"


@dataclass(frozen=True)
class TestVector:
    """Ordered list of positive test frequencies (rad/s); the GA phenotype."""

    frequencies: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if not self.frequencies:
            raise ValueError("test vector needs at least one frequency")
        if any(f <= 0.0 for f in self.frequencies):
            raise ValueError("test frequencies must be positive")

    @property
    def degenerate(self) -> bool:
        """True when duplicate frequencies collapse the signature space."""
        return len(set(self.frequencies)) < len(self.frequencies)


@dataclass(frozen=True)
class SignaturePoint:
    coords: tuple[float, ...]
    component: str | None
    deviation: float


@dataclass(frozen=True)
class Trajectory:
    """One component's signature points, ascending in deviation through 0."""

    component: str
    points: tuple[SignaturePoint, ...]
    degenerate: bool = False

    def __post_init__(self):
        devs = [p.deviation for p in self.points]
        if len(devs) < 2:
            raise ValueError("trajectory needs at least two points")
        if any(b <= a for a, b in zip(devs, devs[1:])):
            raise ValueError("trajectory deviations must strictly increase")
        zeros = [p for p in self.points if p.deviation == 0.0]
        if len(zeros) != 1 or any(c != 0.0 for c in zeros[0].coords):
            raise ValueError("trajectory must contain exactly the origin at deviation 0")
        dims = {len(p.coords) for p in self.points}
        if len(dims) != 1:
            raise ValueError("inconsistent point dimensions")

    @property
    def dimension(self) -> int:
        return len(self.points[0].coords)

    @property
    def segments(self) -> tuple[tuple[SignaturePoint, SignaturePoint], ...]:
        return tuple(zip(self.points, self.points[1:]))


@dataclass(frozen=True)
class IncidenceRecord:
    component_a: str
    segment_a: int
    component_b: str
    segment_b: int
    kind: str
    point: tuple[float, ...]


def signature(golden_mags, faulty_mags) -> tuple[float, ...]:
    """Componentwise faulty-minus-golden dB differences."""
    if len(golden_mags) != len(faulty_mags):
        raise ValueError(
            f"magnitude lists differ in length: {len(golden_mags)} vs {len(faulty_mags)}"
        )
    return tuple(float(f) - float(g) for g, f in zip(golden_mags, faulty_mags))


def build_trajectories(
    circuit: Circuit, config: FaultConfig, tv: TestVector
) -> list[Trajectory]:
    """One trajectory per fault target, sampled at the test frequencies."""
    ensemble = ensemble_for(circuit, config)
    mags = ensemble.magnitudes(np.asarray(tv.frequencies, dtype=float))
    golden = mags[0]
    n = len(tv.frequencies)
    origin_coords = (0.0,) * n

    grid = config.deviations()
    per_component = len(grid)
    trajectories = []
    for ci, component in enumerate(config.targets):
        rows = mags[1 + ci * per_component : 1 + (ci + 1) * per_component]
        points = []
        inserted_origin = False
        for dev, row in zip(grid, rows):
            if dev > 0.0 and not inserted_origin:
                points.append(SignaturePoint(origin_coords, component, 0.0))
                inserted_origin = True
            coords = tuple((row - golden).tolist())
            points.append(SignaturePoint(coords, component, dev))
        if not inserted_origin:
            points.append(SignaturePoint(origin_coords, component, 0.0))
        trajectories.append(
            Trajectory(component, tuple(points), degenerate=tv.degenerate)
        )
    return trajectories


def _segment_gaps(p0, p1, q0, q1):
    """Pairwise minimum distances between two segment families.

    ``p0, p1``: (Sa, n) endpoints; ``q0, q1``: (Sb, n). Returns
    ``(gap, s, t)`` of shape (Sa, Sb) with the clamped closest-point
    parameters on each segment. Handles degenerate (zero-length) segments.
    """
    u = p1 - p0
    v = q1 - q0
    r = p0[:, None, :] - q0[None, :, :]
    a = np.einsum("in,in->i", u, u)[:, None]
    e = np.einsum("jn,jn->j", v, v)[None, :]
    b = np.einsum("in,jn->ij", u, v)
    c = np.einsum("in,ijn->ij", u, r)
    f = np.einsum("jn,ijn->ij", v, r)

    denom = a * e - b * b
    shape = np.broadcast_shapes(denom.shape, c.shape)
    s = np.zeros(shape)
    np.divide(b * f - c * e, denom, out=s, where=denom > 0.0)
    np.clip(s, 0.0, 1.0, out=s)

    t = np.zeros(shape)
    np.divide(b * s + f, np.broadcast_to(e, shape), out=t, where=e > 0.0)
    clamped = (t < 0.0) | (t > 1.0)
    np.clip(t, 0.0, 1.0, out=t)

    s_edge = np.zeros(shape)
    np.divide(b * t - c, np.broadcast_to(a, shape), out=s_edge, where=a > 0.0)
    np.clip(s_edge, 0.0, 1.0, out=s_edge)
    s = np.where(clamped, s_edge, s)

    diff = r + s[..., None] * u[:, None, :] - t[..., None] * v[None, :, :]
    gap = np.sqrt(np.einsum("ijn,ijn->ij", diff, diff))
    return gap, s, t


def _cross2(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def _classify_incidence(a0, a1, b0, b1, s, t):
    """Classify one incident segment pair.

    Returns ``(kind, representative point, extreme points)`` where the
    extreme points bound the contact region (a single point for a cross,
    the overlap ends for a parallel overlap).
    """
    u = a1 - a0
    v = b1 - b0
    uu = float(u @ u)
    vv = float(v @ v)
    uv = float(u @ v)
    denom = uu * vv - uv * uv

    if uu > 0.0 and vv > 0.0 and denom <= 1e-12 * uu * vv:
        lo_b = float((b0 - a0) @ u) / uu
        hi_b = float((b1 - a0) @ u) / uu
        lo = max(0.0, min(lo_b, hi_b))
        hi = min(1.0, max(lo_b, hi_b))
        if hi > lo:
            p_lo = a0 + lo * u
            p_hi = a0 + hi * u
            rep = a0 + (0.5 * (lo + hi)) * u
            return OVERLAP, rep, (p_lo, p_hi)

    if len(a0) == 2:
        w0 = b0 - a0
        w1 = b1 - a0
        o1 = _cross2(u, w0)
        o2 = _cross2(u, w1)
        o3 = _cross2(v, a0 - b0)
        o4 = _cross2(v, a1 - b0)
        uxv = _cross2(u, v)
        if o1 * o2 < 0.0 and o3 * o4 < 0.0 and uxv != 0.0:
            s_x = _cross2(w0, v) / uxv
            rep = a0 + s_x * u
            return CROSS, rep, (rep,)

    rep = 0.5 * ((a0 + s * u) + (b0 + t * v))
    return CROSS, rep, (rep,)


def segment_incidence(a0, a1, b0, b1, tol: float):
    """Classify the incidence between two bare segments.

    Returns ``None`` when their minimum distance is at least ``tol``,
    otherwise ``(kind, representative point)`` with kind ``cross`` or
    ``overlap``. This is the per-pair predicate behind
    :func:`count_intersections` (which additionally applies the
    origin-exclusion rule).
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    a0, a1, b0, b1 = (np.asarray(p, dtype=float) for p in (a0, a1, b0, b1))
    gap, s, t = _segment_gaps(a0[None, :], a1[None, :], b0[None, :], b1[None, :])
    if gap[0, 0] >= tol:
        return None
    kind, rep, _ = _classify_incidence(a0, a1, b0, b1, s[0, 0], t[0, 0])
    return kind, tuple(rep.tolist())


def count_intersections(
    trajectories, tol: float = 1e-6, origin_tol: float | None = None, origin=None
):
    """Count incidences between segments of distinct trajectories.

    Returns ``(I, records)``. ``tol`` is the incidence distance threshold;
    ``origin_tol`` (default: ``tol``) is the radius of the exclusion ball
    around the golden point, inside which contacts are expected and not
    counted. ``origin`` defaults to the zero vector.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    trajectories = list(trajectories)
    if len(trajectories) < 2:
        return 0, []
    dims = {t.dimension for t in trajectories}
    if len(dims) != 1:
        raise ValueError(f"trajectories have mixed dimensions: {sorted(dims)}")
    n = dims.pop()
    if origin_tol is None:
        origin_tol = tol
    origin = np.zeros(n) if origin is None else np.asarray(origin, dtype=float)
    if origin.shape != (n,):
        raise ValueError("origin dimension does not match trajectories")

    starts, ends, traj_of, seg_of = [], [], [], []
    for ti, traj in enumerate(trajectories):
        pts = [p.coords for p in traj.points]
        for si in range(len(pts) - 1):
            starts.append(pts[si])
            ends.append(pts[si + 1])
            traj_of.append(ti)
            seg_of.append(si)
    p0 = np.asarray(starts)
    p1 = np.asarray(ends)
    traj_of = np.asarray(traj_of)

    gap, s, t = _segment_gaps(p0, p1, p0, p1)
    candidate = (
        (gap < tol)
        & (traj_of[:, None] != traj_of[None, :])
        & (np.arange(len(p0))[:, None] < np.arange(len(p0))[None, :])
    )

    count = 0
    records = []
    for si, sj in zip(*np.nonzero(candidate)):
        kind, rep, extremes = _classify_incidence(
            p0[si], p1[si], p0[sj], p1[sj], s[si, sj], t[si, sj]
        )
        reach = max(float(np.sqrt((p - origin) @ (p - origin))) for p in extremes)
        if reach <= origin_tol:
            continue
        count += 1
        records.append(
            IncidenceRecord(
                trajectories[traj_of[si]].component,
                seg_of[si],
                trajectories[traj_of[sj]].component,
                seg_of[sj],
                kind,
                tuple(rep.tolist()),
            )
        )
    return count, records


def write_trajectories_csv(path, trajectories) -> None:
    """``component,deviation,x1,...,xn`` rows, one per signature point."""
    trajectories = list(trajectories)
    n = trajectories[0].dimension if trajectories else 0
    header = "component,deviation," + ",".join(f"x{i + 1}" for i in range(n))
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for traj in trajectories:
            for point in traj.points:
                coords = ",".join(f"{c:.17g}" for c in point.coords)
                fh.write(f"{traj.component},{point.deviation:.17g},{coords}\n")


def read_trajectories_csv(path) -> list[Trajectory]:
    """Inverse of :func:`write_trajectories_csv`."""
    with open(path, "r", newline="") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if len(lines) < 2:
        raise ValueError(f"{path}: no trajectory data")
    grouped: dict[str, list[SignaturePoint]] = {}
    for line in lines[1:]:
        fields = line.split(",")
        component, deviation = fields[0], float(fields[1])
        coords = tuple(float(x) for x in fields[2:])
        grouped.setdefault(component, []).append(
            SignaturePoint(coords, component, deviation)
        )
    return [
        Trajectory(component, tuple(points)) for component, points in grouped.items()
    ]


def write_incidences_csv(path, records) -> None:
    """``comp_a,seg_a,comp_b,seg_b,kind,px,py`` rows."""
    with open(path, "w", newline="") as fh:
        fh.write("comp_a,seg_a,comp_b,seg_b,kind,px,py\n")
        for r in records:
            px = f"{r.point[0]:.17g}"
            py = f"{r.point[1]:.17g}" if len(r.point) > 1 else ""
            fh.write(
                f"{r.component_a},{r.segment_a},{r.component_b},{r.segment_b},"
                f"{r.kind},{px},{py}\n"
            )

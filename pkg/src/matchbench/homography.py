"""Normalized DLT homography estimation and reprojection error."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateConfiguration, NumericalFailure, PointAtInfinity

COLLINEAR_AREA = 1e-9


def _normalize_points(pts: np.ndarray):
    """Similarity transform taking points to centroid 0, RMS radius sqrt(2)."""
    c = pts.mean(axis=0)
    rms = np.sqrt(((pts - c) ** 2).sum(axis=1).mean())
    if rms < 1e-12:
        raise DegenerateConfiguration("coincident points")
    s = np.sqrt(2.0) / rms
    t = np.array([[s, 0.0, -s * c[0]],
                  [0.0, s, -s * c[1]],
                  [0.0, 0.0, 1.0]])
    return (pts - c) * s, t


def _any3_collinear(pts: np.ndarray) -> bool:
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ab = pts[j] - pts[i]
                ac = pts[k] - pts[i]
                if abs(ab[0] * ac[1] - ab[1] * ac[0]) / 2.0 <= COLLINEAR_AREA:
                    return True
    return False


def dlt_homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """3x3 homography H with H[2,2] = 1 mapping src points onto dst points.

    Hartley-normalized direct linear transform solved by the smallest right
    singular vector of the stacked 2n x 9 system.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise DegenerateConfiguration(f"bad correspondence shapes {src.shape}/{dst.shape}")
    n = src.shape[0]
    if n < 4:
        raise DegenerateConfiguration(f"{n} correspondences < 4")
    if n == 4 and (_any3_collinear(src) or _any3_collinear(dst)):
        raise DegenerateConfiguration("collinear minimal sample")

    sn, ts = _normalize_points(src)
    dn, td = _normalize_points(dst)

    x, y = sn[:, 0], sn[:, 1]
    u, v = dn[:, 0], dn[:, 1]
    zero = np.zeros(n)
    one = np.ones(n)
    a = np.empty((2 * n, 9))
    a[0::2] = np.column_stack([x, y, one, zero, zero, zero, -u * x, -u * y, -u])
    a[1::2] = np.column_stack([zero, zero, zero, x, y, one, -v * x, -v * y, -v])

    try:
        _, sv, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    if n > 4 and sv[7] < 1e-12:
        raise DegenerateConfiguration("rank-deficient correspondence set")
    hn = vt[-1].reshape(3, 3)

    h = np.linalg.inv(td) @ hn @ ts
    if abs(h[2, 2]) < 1e-12:
        raise NumericalFailure("h33 underflow")
    h = h / h[2, 2]
    if not np.all(np.isfinite(h)) or abs(np.linalg.det(h)) < 1e-12:
        raise DegenerateConfiguration("singular homography")
    return h


def project(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Apply a homography to (n, 2) points; w=0 rows map to +inf coordinates."""
    ph = np.column_stack([pts, np.ones(len(pts))])
    q = ph @ h.T
    w = q[:, 2]
    out = np.full((len(pts), 2), np.inf)
    ok = np.abs(w) > 1e-300
    out[ok] = q[ok, :2] / w[ok, None]
    return out


def reprojection_error(h: np.ndarray, src, dst) -> float:
    """Pixel distance between dst and the H-projection of src (single points)."""
    src = np.asarray(src, dtype=np.float64).reshape(1, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(1, 2)
    p = project(h, src)
    if not np.all(np.isfinite(p)):
        raise PointAtInfinity(f"{src[0]} maps to infinity")
    return float(np.sqrt(((p - dst) ** 2).sum()))


def reprojection_errors(h: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Vector of reprojection errors; points at infinity get +inf."""
    p = project(h, src)
    d = np.sqrt(((p - dst) ** 2).sum(axis=1))
    return np.where(np.isfinite(p).all(axis=1), d, np.inf)

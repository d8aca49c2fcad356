"""Image loading, point-cloud extraction, and the synthetic shape dataset.

Images are grayscale arrays with intensities in [0, 1]. Foreground pixels
(intensity >= threshold) become 2-D points normalized to the unit square,
with the y axis flipped so image "up" is positive y. The synthetic dataset
emits three binary classes chosen for their homology: a filled disk (no
holes), an annulus (one hole), and two disjoint annuli (two holes).
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, EmptyPointCloud, InvalidSize
from .fileio import atomic_write_bytes, atomic_write_text, fmt

DISK, ANNULUS, TWO_ANNULI = 0, 1, 2
CLASS_NAMES = {DISK: "disk", ANNULUS: "annulus", TWO_ANNULI: "two_annuli"}


@dataclass(frozen=True)
class GrayscaleImage:
    """Single-channel image, row-major intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise DataError(f"image must be 2-D and nonempty, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0:
            raise DataError("pixel intensities must be finite and within [0, 1]")
        object.__setattr__(self, "pixels", p)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class PointCloud:
    """Nonempty set of 2-D points with coordinates in [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise EmptyPointCloud(f"point cloud must be a nonempty (k, 2) array, got {pts.shape}")
        if not np.all(np.isfinite(pts)) or pts.min() < 0.0 or pts.max() > 1.0:
            raise DataError("point coordinates must be finite and within [0, 1]^2")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def image_to_point_cloud(
    img: GrayscaleImage,
    threshold: float = 0.5,
    max_points: int = 100,
    seed: int = 0,
) -> PointCloud:
    """Convert foreground pixels to a point cloud in the unit square.

    Pixel (row, col) maps to (col/(W-1), 1 - row/(H-1)); a single-pixel axis
    maps to coordinate 0.5. If more than ``max_points`` pixels clear the
    threshold, a uniform without-replacement subsample is drawn from a PRNG
    seeded with ``seed``, so identical inputs always yield identical clouds.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    if max_points < 1:
        raise ValueError(f"max_points must be positive, got {max_points}")
    rows, cols = np.nonzero(img.pixels >= threshold)
    if rows.size == 0:
        raise EmptyPointCloud(f"no pixel reaches threshold {threshold}")
    h, w = img.height, img.width
    xs = cols / (w - 1) if w > 1 else np.full(cols.shape, 0.5)
    ys = 1.0 - rows / (h - 1) if h > 1 else np.full(rows.shape, 0.5)
    pts = np.column_stack([xs, ys])
    if pts.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(pts.shape[0], size=max_points, replace=False))
        pts = pts[keep]
    return PointCloud(pts)


def _disk_mask(size: int, cx: float, cy: float, r: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def _annulus_mask(size: int, cx: float, cy: float, r_out: float, r_in: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    d2 = (xx - cx) ** 2 + (yy - cy) ** 2
    return (d2 <= r_out * r_out) & (d2 >= r_in * r_in)


def generate_synthetic_dataset(
    n_per_class: int, image_size: int, seed: int
) -> list[tuple[GrayscaleImage, int]]:
    """Emit three exactly balanced classes of binary images, label-major order.

    Centers, radii, and (for the two-annuli class) the pair axis angle are
    randomized, plus at most 2% salt noise. Deterministic per seed.
    """
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be positive, got {n_per_class}")
    if image_size < 32:
        raise InvalidSize(f"image_size must be at least 32, got {image_size}")
    rng = np.random.default_rng(seed)
    s = float(image_size)
    out: list[tuple[GrayscaleImage, int]] = []
    for label in (DISK, ANNULUS, TWO_ANNULI):
        for _ in range(n_per_class):
            cx = s / 2 + rng.uniform(-0.06, 0.06) * s
            cy = s / 2 + rng.uniform(-0.06, 0.06) * s
            angle = rng.uniform(0.0, np.pi)
            if label == DISK:
                r = rng.uniform(0.24, 0.36) * s
                mask = _disk_mask(image_size, cx, cy, r)
            elif label == ANNULUS:
                r_out = rng.uniform(0.32, 0.42) * s
                r_in = rng.uniform(0.52, 0.66) * r_out
                mask = _annulus_mask(image_size, cx, cy, r_out, r_in)
            else:
                r1 = rng.uniform(0.14, 0.18) * s
                r2 = rng.uniform(0.14, 0.18) * s
                off = 0.5 * (r1 + r2) + rng.uniform(0.03, 0.06) * s
                dx, dy = off * np.cos(angle), off * np.sin(angle)
                mask = _annulus_mask(
                    image_size, cx - dx, cy - dy, r1, rng.uniform(0.55, 0.68) * r1
                ) | _annulus_mask(
                    image_size, cx + dx, cy + dy, r2, rng.uniform(0.55, 0.68) * r2
                )
            salt = rng.random((image_size, image_size)) < rng.uniform(0.0, 0.008)
            pixels = np.where(mask | salt, 1.0, 0.0)
            out.append((GrayscaleImage(pixels), label))
    return out


# ---------------------------------------------------------------------------
# On-disk formats: PGM (P2/P5), raw "IMG v1" text, dataset directory layout.

def write_pgm(img: GrayscaleImage, path: str | Path) -> None:
    """Write binary PGM (P5, maxval 255); intensities are quantized to 8 bits."""
    data = np.round(img.pixels * 255.0).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + data.tobytes())


def read_pgm(path: str | Path) -> GrayscaleImage:
    """Read P2 (ascii) or P5 (binary) PGM, normalizing intensities by maxval."""
    raw = Path(path).read_bytes()
    if raw[:2] not in (b"P2", b"P5"):
        raise DataError(f"{path}: not a P2/P5 PGM file")
    binary = raw[:2] == b"P5"
    # Strip comments, then take the three header tokens after the magic.
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        m = re.match(rb"(\s+|#[^\n]*\n)*(\d+)", raw[pos:])
        if m is None:
            raise DataError(f"{path}: malformed PGM header")
        tokens.append(int(m.group(2)))
        pos += m.end()
    width, height, maxval = tokens
    if maxval < 1 or maxval > 65535:
        raise DataError(f"{path}: unsupported maxval {maxval}")
    if binary:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        count = width * height
        body = raw[pos : pos + count * dtype.itemsize]
        if len(body) != count * dtype.itemsize:
            raise DataError(f"{path}: truncated PGM payload")
        values = np.frombuffer(body, dtype=dtype).astype(np.float64)
    else:
        values = np.array(raw[pos:].split(), dtype=np.float64)
        if values.size != width * height:
            raise DataError(f"{path}: expected {width * height} samples, got {values.size}")
    return GrayscaleImage((values / maxval).reshape(height, width))


def write_img_text(img: GrayscaleImage, path: str | Path) -> None:
    """Write the raw text format: 'IMG v1 <H> <W>' then H*W reals."""
    rows = "\n".join(" ".join(fmt(v) for v in row) for row in img.pixels)
    atomic_write_text(path, f"IMG v1 {img.height} {img.width}\n{rows}\n")


def read_img_text(path: str | Path) -> GrayscaleImage:
    tokens = Path(path).read_text().split()
    if len(tokens) < 4 or tokens[0] != "IMG" or tokens[1] != "v1":
        raise DataError(f"{path}: missing 'IMG v1' header")
    h, w = int(tokens[2]), int(tokens[3])
    values = np.array(tokens[4:], dtype=np.float64)
    if values.size != h * w:
        raise DataError(f"{path}: expected {h * w} samples, got {values.size}")
    return GrayscaleImage(values.reshape(h, w))


def load_image(path: str | Path) -> GrayscaleImage:
    """Dispatch on content: PGM magic or the IMG v1 text header."""
    head = Path(path).open("rb").read(6)
    if head[:2] in (b"P2", b"P5"):
        return read_pgm(path)
    return read_img_text(path)


def write_dataset(
    dataset: list[tuple[GrayscaleImage, int]], out_dir: str | Path
) -> list[str]:
    """Write one PGM per image plus labels.csv; returns the filenames."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for i, (img, label) in enumerate(dataset):
        name = f"img_{i:05d}.pgm"
        write_pgm(img, out_dir / name)
        names.append((name, label))
    lines = ["filename,label"] + [f"{n},{lab}" for n, lab in names]
    atomic_write_text(out_dir / "labels.csv", "\n".join(lines) + "\n")
    return [n for n, _ in names]


def read_dataset(dataset_dir: str | Path) -> list[tuple[GrayscaleImage, int, str]]:
    """Read labels.csv and each referenced image; returns (image, label, filename)."""
    dataset_dir = Path(dataset_dir)
    labels_path = dataset_dir / "labels.csv"
    if not labels_path.exists():
        raise DataError(f"{labels_path}: missing labels.csv")
    out = []
    with labels_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["filename", "label"]:
            raise DataError(f"{labels_path}: expected header 'filename,label'")
        for row in reader:
            out.append((load_image(dataset_dir / row["filename"]), int(row["label"]), row["filename"]))
    return out

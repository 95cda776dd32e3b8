"""Regenerate the natural-image test corpus under crates/core/tests/fixtures.

Images come from scikit-image's bundled samples, center-cropped to 3:2 and
resized to 321x481 (the usual benchmark resolution). Reference segmentations
are coarse Felzenszwalb partitions of a blurred copy, with small regions
absorbed into their neighbors, stored as 16-bit PGM label maps.

    python3 scripts/make_fixtures.py
"""

from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage import data, filters, segmentation, transform

OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures"
SOURCES = ["astronaut", "chelsea", "coffee", "rocket", "immunohistochemistry", "camera"]
HEIGHT, WIDTH = 321, 481


def center_crop(img, aspect):
    h, w = img.shape[:2]
    if w / h > aspect:
        nw = int(round(h * aspect))
        x = (w - nw) // 2
        return img[:, x : x + nw]
    nh = int(round(w / aspect))
    y = (h - nh) // 2
    return img[y : y + nh]


def to_rgb_u8(img, height, width):
    if img.ndim == 2:
        img = np.stack([img] * 3, axis=-1)
    img = center_crop(img[..., :3], width / height)
    out = transform.resize(img, (height, width), anti_aliasing=True)
    return (np.clip(out, 0, 1) * 255 + 0.5).astype(np.uint8)


def absorb_small(labels, min_size):
    """Merge regions smaller than min_size into their largest neighbor."""
    labels = labels.copy()
    while True:
        ids, counts = np.unique(labels, return_counts=True)
        small = ids[counts < min_size]
        if len(small) == 0:
            break
        lab = small[np.argmin(counts[counts < min_size])]
        mask = labels == lab
        ring = ndimage.binary_dilation(mask) & ~mask
        neigh, ncounts = np.unique(labels[ring], return_counts=True)
        labels[mask] = neigh[np.argmax(ncounts)]
    # split anything disconnected, then relabel 0..k-1
    out = np.zeros_like(labels)
    nxt = 0
    for lab in np.unique(labels):
        comp, n = ndimage.label(labels == lab)
        for c in range(1, n + 1):
            out[comp == c] = nxt
            nxt += 1
    return out


def reference(rgb):
    smooth = filters.gaussian(rgb, sigma=2.0, channel_axis=-1)
    seg = segmentation.felzenszwalb(smooth, scale=500, sigma=0.0, min_size=400)
    return absorb_small(seg, HEIGHT * WIDTH // 150)


def write_pgm16(path, labels):
    h, w = labels.shape
    assert labels.max() < 65536
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode())
        f.write(labels.astype(">u2").tobytes())


def main():
    corpus = OUT / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    for name in SOURCES:
        rgb = to_rgb_u8(getattr(data, name)(), HEIGHT, WIDTH)
        gt = reference(rgb)
        Image.fromarray(rgb).save(corpus / f"{name}.png", optimize=True)
        write_pgm16(corpus / f"{name}.pgm", gt)
        print(f"{name}: {gt.max() + 1} regions")
    square = to_rgb_u8(data.astronaut(), 225, 225)
    Image.fromarray(square).save(OUT / "astronaut_225.png", optimize=True)
    write_noise_ppm(OUT / "slic_fragments.ppm")


def write_noise_ppm(path, height=24, width=24, seed=5):
    """Uniform noise; raw SLIC leaves split clusters on it."""
    img = (np.random.default_rng(seed).random((height, width, 3)) * 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P6\n{width} {height}\n255\n".encode())
        f.write(img.tobytes())


if __name__ == "__main__":
    main()

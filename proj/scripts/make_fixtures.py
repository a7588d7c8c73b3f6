#!/usr/bin/env python3
"""Regenerates the bundled image fixtures under data/.

data/natural/  ten 256x256 RGB photographs (scikit-image sample data)
data/corpus/   a 16-image, 8-class LR corpus of 64x64 crops
"""
import pathlib

import numpy as np
import skimage.data as skd
from PIL import Image

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"

NATURAL = ["astronaut", "chelsea", "coffee", "rocket", "hubble_deep_field",
           "moon", "camera", "coins", "immunohistochemistry", "retina"]

CLASSES = ["planet", "galaxy", "asteroid", "nebula", "comet",
           "black hole", "star", "constellation"]


def rgb(a):
    if a.ndim == 2:
        a = np.stack([a] * 3, axis=-1)
    return Image.fromarray(a[..., :3].astype(np.uint8), "RGB")


def square(img, size):
    w, h = img.size
    s = min(w, h)
    left, top = (w - s) // 2, (h - s) // 2
    return img.crop((left, top, left + s, top + s)).resize((size, size), Image.LANCZOS)


def save(img, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    img.save(path, optimize=False)


def main():
    for i, name in enumerate(NATURAL):
        save(square(rgb(getattr(skd, name)()), 256), ROOT / "natural" / f"{i:02d}_{name}.png")

    hubble = rgb(skd.hubble_deep_field())
    sources = [hubble, rgb(skd.moon()), rgb(skd.rocket()), rgb(skd.immunohistochemistry())]
    for ci, cls in enumerate(CLASSES):
        for j in range(2):
            src = sources[(ci + j) % len(sources)]
            w, h = src.size
            box = 160
            x = (37 * ci + 113 * j + 11) % (w - box)
            y = (53 * ci + 71 * j + 5) % (h - box)
            crop = src.crop((x, y, x + box, y + box)).resize((64, 64), Image.LANCZOS)
            save(crop, ROOT / "corpus" / cls / f"{cls.replace(' ', '_')}_{j}.png")


if __name__ == "__main__":
    main()

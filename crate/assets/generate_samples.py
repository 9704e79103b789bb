#!/usr/bin/env python3
"""Regenerate the bundled sample corpus, interaction masks and manifest.

The five scenes are drawn procedurally so the repository carries no
third-party photographs. Each mask is built from the same geometry that
draws the scene, so "everything except the dog" really is the dog's
silhouette. Output is deterministic (fixed noise seed, PNG via Pillow).

Usage: python3 assets/generate_samples.py
"""

import json
import os

import numpy as np
from PIL import Image, ImageDraw

HERE = os.path.dirname(os.path.abspath(__file__))
CORPUS = os.path.join(HERE, "corpus")
MASKS = os.path.join(HERE, "masks")


def canvas(size, top, bottom, horizon):
    w, h = size
    img = Image.new("RGB", size, top)
    d = ImageDraw.Draw(img)
    for y in range(h):
        if y < horizon:
            t = y / max(horizon, 1)
            c = tuple(int(top[i] * (1 - t) + bottom[i] * t * 0.3 + top[i] * t * 0.7) for i in range(3))
        else:
            c = bottom
        d.line([(0, y), (w, y)], fill=c)
    return img


def add_noise(img, seed, amp=6):
    rng = np.random.default_rng(seed)
    a = np.asarray(img).astype(np.int16)
    a = a + rng.integers(-amp, amp + 1, size=a.shape, dtype=np.int16)
    return Image.fromarray(np.clip(a, 0, 255).astype(np.uint8), "RGB")


class Scene:
    """Draws shapes into the image and, by name, into per-part keep layers."""

    def __init__(self, img):
        self.img = img
        self.draw = ImageDraw.Draw(img)
        self.parts = {}

    def part(self, name):
        if name not in self.parts:
            self.parts[name] = Image.new("L", self.img.size, 0)
        return ImageDraw.Draw(self.parts[name])

    def ellipse(self, box, fill, part=None):
        self.draw.ellipse(box, fill=fill)
        if part:
            self.part(part).ellipse(box, fill=255)

    def rect(self, box, fill, part=None):
        self.draw.rectangle(box, fill=fill)
        if part:
            self.part(part).rectangle(box, fill=255)

    def polygon(self, pts, fill, part=None):
        self.draw.polygon(pts, fill=fill)
        if part:
            self.part(part).polygon(pts, fill=255)

    def mask_except(self, keep):
        """255 everywhere except the union of the `keep` parts."""
        keep_img = np.zeros(self.img.size[::-1], dtype=bool)
        for k in keep:
            keep_img |= np.asarray(self.parts[k]) > 0
        return Image.fromarray(np.where(keep_img, 0, 255).astype(np.uint8), "L")


def golden_retriever():
    s = Scene(canvas((320, 240), (150, 190, 235), (70, 140, 60), 130))
    fur, dark = (214, 160, 70), (170, 115, 45)
    s.ellipse((70, 110, 220, 180), fur, "dog")
    for x in (85, 110, 175, 198):
        s.rect((x, 165, x + 16, 215), fur, "dog")
    s.polygon([(70, 130), (30, 100), (40, 95), (78, 120)], dark, "dog")
    s.ellipse((195, 95, 225, 150), fur, "dog")
    s.ellipse((200, 55, 270, 120), fur, "face")
    s.ellipse((245, 85, 295, 118), (226, 178, 95), "face")
    s.ellipse((282, 90, 296, 102), (30, 20, 15), "face")
    s.ellipse((200, 65, 222, 115), dark, "face")
    s.ellipse((230, 72, 240, 82), (30, 20, 15), "face")
    masks = {
        "background_except_dog": s.mask_except(["dog", "face"]),
        "all_except_face": s.mask_except(["face"]),
    }
    return add_noise(s.img, 1), masks


def soccer_ball():
    s = Scene(canvas((224, 224), (60, 130, 60), (50, 120, 50), 0))
    for x in range(0, 224, 28):
        s.rect((x, 0, x + 13, 224), (66, 140, 64))
    s.polygon([(20, 0), (60, 0), (110, 105), (85, 120)], (235, 200, 170), "leg")
    s.polygon([(70, 95), (112, 100), (118, 128), (60, 125)], (30, 30, 160), "leg")
    s.ellipse((95, 95, 185, 185), (245, 245, 245), "ball")
    for cx, cy in ((140, 140), (118, 112), (165, 115), (120, 168), (165, 165)):
        r = 11 if (cx, cy) == (140, 140) else 8
        pts = [(cx + r * np.cos(a), cy + r * np.sin(a)) for a in np.linspace(0, 2 * np.pi, 6)[:-1] - np.pi / 2]
        s.polygon(pts, (20, 20, 20))
    masks = {
        "background_except_ball": s.mask_except(["ball"]),
        "all_except_ball_and_leg": s.mask_except(["ball", "leg"]),
    }
    return add_noise(s.img, 2), masks


def coffee_mug():
    s = Scene(canvas((320, 240), (200, 185, 160), (120, 80, 50), 150))
    s.ellipse((208, 95, 262, 165), (235, 235, 240), "handle")
    s.ellipse((220, 108, 250, 152), (200, 185, 160), "handle_hole")
    s.rect((110, 80, 220, 190), (235, 235, 240), "mug")
    s.ellipse((110, 70, 220, 92), (210, 210, 215), "mug")
    s.ellipse((118, 73, 212, 89), (80, 45, 25), "mug")
    s.ellipse((110, 180, 220, 200), (225, 225, 230), "mug")
    for x in (140, 165, 190):
        s.draw.arc((x - 8, 30, x + 8, 66), 90, 270, fill=(245, 245, 245), width=2)
    keep_mug = s.mask_except(["mug", "handle"])
    # the hole inside the handle is table/wall, not mug
    hole = np.asarray(s.parts["handle_hole"]) > 0
    a = np.asarray(keep_mug).copy()
    a[hole & ~(np.asarray(s.parts["mug"]) > 0)] = 255
    masks = {
        "background_except_mug": Image.fromarray(a, "L"),
        "background_and_handle": s.mask_except(["mug"]),
    }
    return add_noise(s.img, 3), masks


def bakery():
    s = Scene(canvas((320, 240), (235, 215, 180), (150, 110, 80), 175))
    s.rect((0, 0, 320, 12), (90, 70, 50), "interior")
    for x in (60, 160, 260):
        s.polygon([(x - 18, 12), (x + 18, 12), (x + 10, 30), (x - 10, 30)], (250, 230, 140), "interior")
    for row in range(3):
        y = 40 + row * 42
        s.rect((10, y + 30, 310, y + 36), (110, 70, 40), "shelves")
        for i, x in enumerate(range(18, 300, 36)):
            col = (200, 140, 70) if (i + row) % 2 else (180, 110, 50)
            s.ellipse((x, y + 8, x + 30, y + 31), col, "shelves")
    s.rect((0, 175, 320, 200), (130, 90, 60), "interior")
    s.ellipse((228, 115, 258, 145), (230, 190, 160), "person")
    s.rect((225, 145, 262, 215), (245, 245, 245), "person")
    s.ellipse((226, 103, 260, 122), (250, 250, 250), "person")
    masks = {
        "others_except_shelves": s.mask_except(["shelves"]),
        "others_except_shelves_person_interior": s.mask_except(["shelves", "person", "interior"]),
    }
    return add_noise(s.img, 4), masks


def cinema():
    s = Scene(canvas((320, 240), (25, 20, 30), (40, 25, 30), 240))
    s.rect((50, 20, 270, 110), (225, 230, 240), "screen")
    s.rect((70, 35, 250, 95), (120, 150, 200), "screen")
    s.rect((30, 110, 290, 135), (110, 30, 35), "stage")
    s.rect((20, 100, 50, 140), (130, 20, 25), "stage")
    s.rect((270, 100, 300, 140), (130, 20, 25), "stage")
    for row in range(4):
        y = 150 + row * 22
        for x in range(8 + row * 3, 312, 24):
            part = "front_seats" if row == 0 else None
            s.rect((x, y, x + 18, y + 16), (150, 30, 40), part)
            s.rect((x, y + 12, x + 18, y + 18), (100, 20, 25), part)
    masks = {
        "others_except_screen_and_stage": s.mask_except(["screen", "stage"]),
        "others_except_screen_stage_some_seats": s.mask_except(["screen", "stage", "front_seats"]),
    }
    return add_noise(s.img, 5), masks


SCENES = {
    "golden_retriever": (golden_retriever, ["background_except_dog", "all_except_face"]),
    "soccer_ball": (soccer_ball, ["background_except_ball", "all_except_ball_and_leg"]),
    "coffee_mug": (coffee_mug, ["background_except_mug", "background_and_handle"]),
    "bakery": (bakery, ["others_except_shelves", "others_except_shelves_person_interior"]),
    "cinema": (cinema, ["others_except_screen_and_stage", "others_except_screen_stage_some_seats"]),
}


def main():
    os.makedirs(CORPUS, exist_ok=True)
    os.makedirs(MASKS, exist_ok=True)
    entries = []
    for name, (draw, order) in SCENES.items():
        img, masks = draw()
        img.save(os.path.join(CORPUS, f"{name}.png"), optimize=False)
        interactions = []
        for label in order:
            rel = f"masks/{name}__{label}.png"
            masks[label].save(os.path.join(HERE, rel), optimize=False)
            interactions.append({"label": label, "mask_path": rel})
        entries.append({"name": name, "image_path": f"corpus/{name}.png", "interactions": interactions})
    manifest = {"entries": entries, "fill": {"kind": "dataset_mean"}, "k": 5}
    with open(os.path.join(HERE, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()

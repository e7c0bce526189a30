"""Raster utility tests."""

import numpy as np
import pytest

from slidekit.errors import EmptyCrop, MissingAsset, ShapeMismatch
from slidekit.model import BBox, BackgroundAsset, ImageAsset, SlideDoc, TextAsset, TextStyle
from slidekit.raster import (
    bbox_to_rect,
    composite_render,
    crop_region,
    decode_image,
    encode_png,
    load_png,
    mse,
    resize_max_side,
    save_png,
)


def rand_img(rng, h, w):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


class TestResize:
    def test_downscale_long_side(self):
        img = np.zeros((1024, 2048, 3), dtype=np.uint8)
        out = resize_max_side(img, 1024)
        assert out.shape == (512, 1024, 3)

    def test_small_image_unchanged(self):
        img = np.zeros((600, 800, 3), dtype=np.uint8)
        out = resize_max_side(img, 1024)
        assert out is img

    def test_exact_ratio(self):
        img = np.zeros((3000, 1500, 3), dtype=np.uint8)
        out = resize_max_side(img, 1024)
        assert out.shape == (1024, 512, 3)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        img = rand_img(rng, 1500, 900)
        once = resize_max_side(img, 1024)
        twice = resize_max_side(once, 1024)
        assert np.array_equal(once, twice)


class TestCrop:
    def test_full_canvas(self):
        rng = np.random.default_rng(1)
        img = rand_img(rng, 64, 96)
        assert np.array_equal(crop_region(img, BBox(0, 0, 100, 100)), img)

    def test_bottom_right_quadrant(self):
        rng = np.random.default_rng(2)
        img = rand_img(rng, 100, 100)
        out = crop_region(img, BBox(50, 50, 50, 50))
        assert out.shape == (50, 50, 3)
        assert np.array_equal(out, img[50:, 50:])

    def test_outside_box_raises(self):
        img = np.zeros((50, 50, 3), dtype=np.uint8)
        with pytest.raises(EmptyCrop):
            crop_region(img, BBox(100.0, 100.0, 10.0, 10.0))

    def test_rect_rounding_half_up(self):
        # 12.5% of 100px rounds up to 13
        assert bbox_to_rect(BBox(12.5, 0, 25, 10), 100, 100) == (13, 0, 38, 10)


class TestMse:
    def test_identical_zero(self):
        rng = np.random.default_rng(3)
        img = rand_img(rng, 20, 20)
        assert mse(img, img) == 0.0

    def test_full_range_single_pixel(self):
        a = np.zeros((1, 1, 3), dtype=np.uint8)
        b = np.full((1, 1, 3), 255, dtype=np.uint8)
        assert mse(a, b) == 255.0**2

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            a, b = rand_img(rng, 8, 8), rand_img(rng, 8, 8)
            assert mse(a, b) == mse(b, a)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mse(np.zeros((2, 2, 3), dtype=np.uint8), np.zeros((3, 2, 3), dtype=np.uint8))


class TestComposite:
    def test_background_only(self):
        rng = np.random.default_rng(5)
        bg = rand_img(rng, 100, 200)
        doc = SlideDoc(width=200, height=100, background=BackgroundAsset("bg.png"))
        out = composite_render(doc, {"bg.png": bg})
        assert np.array_equal(out, bg)

    def test_image_rect_placement(self):
        bg = np.zeros((200, 200, 3), dtype=np.uint8)
        asset = np.full((100, 100, 3), 200, dtype=np.uint8)
        doc = SlideDoc(
            width=200,
            height=200,
            background=BackgroundAsset("bg.png"),
            images=(ImageAsset(bbox=BBox(25, 25, 50, 50), href="image_1.png"),),
        )
        out = composite_render(doc, {"bg.png": bg, "image_1.png": asset})
        assert (out[50:150, 50:150] == 200).all()
        assert (out[:50] == 0).all() and (out[:, :50] == 0).all()
        assert (out[150:] == 0).all() and (out[:, 150:] == 0).all()

    def test_text_line_boxes_solid_color(self):
        bg = np.full((100, 100, 3), 255, dtype=np.uint8)
        doc = SlideDoc(
            width=100,
            height=100,
            background=BackgroundAsset("bg.png"),
            texts=(
                TextAsset(
                    bbox=BBox(10, 10, 50, 40),
                    style=TextStyle(font_size=10, color="#ff0000"),
                    lines=("one", "two"),
                ),
            ),
        )
        out = composite_render(doc, {"bg.png": bg})
        assert (out[10:30, 10:60] == np.array([255, 0, 0])).all()
        assert (out[30:, :] == 255).all()

    def test_missing_asset(self):
        doc = SlideDoc(width=10, height=10)
        with pytest.raises(MissingAsset):
            composite_render(doc, {})

    def test_tiling_assets_reproduce_source(self):
        # doc whose image assets exactly tile the canvas: composite(crop) == source
        rng = np.random.default_rng(6)
        src = rand_img(rng, 80, 80)
        boxes = [BBox(0, 0, 50, 50), BBox(50, 0, 50, 50), BBox(0, 50, 50, 50), BBox(50, 50, 50, 50)]
        images = tuple(
            ImageAsset(bbox=b, href=f"image_{i + 1}.png") for i, b in enumerate(boxes)
        )
        doc = SlideDoc(width=80, height=80, background=BackgroundAsset("bg.png"), images=images)
        assets = {"bg.png": np.zeros((80, 80, 3), dtype=np.uint8)}
        for img_asset in images:
            assets[img_asset.href] = crop_region(src, img_asset.bbox)
        assert np.array_equal(composite_render(doc, assets), src)


class TestPngIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        img = rand_img(rng, 33, 47)
        path = tmp_path / "x.png"
        save_png(img, path)
        assert np.array_equal(load_png(path), img)

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(8)
        img = rand_img(rng, 16, 16)
        assert encode_png(img) == encode_png(img)

    def test_alpha_flattened_over_white(self, tmp_path):
        from PIL import Image

        rgba = Image.new("RGBA", (4, 4), (255, 0, 0, 0))  # fully transparent red
        path = tmp_path / "a.png"
        rgba.save(path)
        out = load_png(path)
        assert (out == 255).all()

    def test_decode_encode(self):
        rng = np.random.default_rng(9)
        img = rand_img(rng, 10, 12)
        assert np.array_equal(decode_image(encode_png(img)), img)

import math
import random

import pytest

from folioseg.data.grid import build_crop_grid
from folioseg.errors import DataError

from oracles import count_grid_patches, enumerate_offsets


class TestCaseStudyGeometry:
    def test_full_page_yields_1376_patches(self):
        grid = build_crop_grid(4872, 6496, 300, 0.5)
        assert grid.stride == 150
        assert len(grid.x_positions) == 32
        assert len(grid.y_positions) == 43
        assert grid.patch_count == 1376
        assert grid.patch_count == count_grid_patches(4872, 6496, 300, 0.5)

    def test_page_equal_to_crop(self):
        grid = build_crop_grid(300, 300, 300, 0.5)
        assert grid.patch_count == 1
        assert grid.origins() == [(0, 0)]

    def test_snapped_final_offset(self):
        grid = build_crop_grid(500, 500, 300, 0.5)
        assert grid.x_positions == (0, 150, 200)
        assert grid.y_positions == (0, 150, 200)
        assert grid.patch_count == 9


class TestInvariants:
    @pytest.mark.parametrize("overlap", [0.0, 0.25, 0.5, 0.75])
    def test_against_enumeration_oracle(self, overlap):
        rng = random.Random(99)
        for _ in range(200):
            crop = rng.randint(8, 300)
            dim_w = rng.randint(crop, 900)
            dim_h = rng.randint(crop, 900)
            stride = math.floor(crop * (1 - overlap) + 0.5)
            if stride < 1:
                continue
            grid = build_crop_grid(dim_w, dim_h, crop, overlap)
            assert list(grid.x_positions) == enumerate_offsets(dim_w, crop, stride)
            assert list(grid.y_positions) == enumerate_offsets(dim_h, crop, stride)

    def test_offset_structure(self):
        grid = build_crop_grid(700, 450, 128, 0.5)
        for positions, dim in ((grid.x_positions, 700), (grid.y_positions, 450)):
            assert positions[0] == 0
            assert positions[-1] + grid.crop_size == dim
            for prev, nxt in zip(positions, positions[1:-1]):
                assert nxt - prev == grid.stride

    def test_every_pixel_covered(self):
        rng = random.Random(5)
        for _ in range(50):
            crop = rng.randint(4, 64)
            dim = rng.randint(crop, 257)
            grid = build_crop_grid(dim, dim, crop, rng.choice([0.0, 0.3, 0.5]))
            covered = [False] * dim
            for x in grid.x_positions:
                for p in range(x, x + crop):
                    covered[p] = True
            assert all(covered)

    def test_pure_function(self):
        assert build_crop_grid(500, 400, 64, 0.5) == build_crop_grid(500, 400, 64, 0.5)


class TestErrors:
    def test_crop_larger_than_page(self):
        with pytest.raises(DataError, match="exceeds"):
            build_crop_grid(200, 500, 300, 0.5)

    def test_overlap_out_of_range(self):
        with pytest.raises(DataError, match="overlap"):
            build_crop_grid(500, 500, 300, 1.0)
        with pytest.raises(DataError, match="overlap"):
            build_crop_grid(500, 500, 300, -0.1)

    def test_zero_stride(self):
        with pytest.raises(DataError, match="stride"):
            build_crop_grid(500, 500, 2, 0.9)

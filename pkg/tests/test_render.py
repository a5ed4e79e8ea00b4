import math

import numpy as np
import pytest

import meroslice as M
import meroslice._mathcore as mc
from meroslice.render import OverlayData, PALETTES, _pixel_of


SMALL_BUDGET = M.ClassifierBudget(max_iter=600)


def param_spec(rho, px=128, budget=SMALL_BUDGET, **kw):
    return M.RenderSpec("param", rho, viewport=M.Viewport(1.5 + 0j, 5.0),
                        resolution=(px, px), budget=budget, **kw)


class TestSpec:
    def test_validation(self, rho23):
        with pytest.raises(M.DomainError):
            M.RenderSpec("nope", rho23)
        with pytest.raises(M.DomainError):
            M.RenderSpec("dyn", rho23)  # missing lambda
        with pytest.raises(M.DomainError):
            M.RenderSpec("param", rho23, resolution=(8, 8))
        with pytest.raises(M.DomainError):
            M.RenderSpec("param", rho23, overlays=frozenset({"sparkles"}))
        with pytest.raises(M.DomainError):
            M.RenderSpec("param", rho23, viewport=M.Viewport(0j, -1.0))

    def test_digest_sensitivity(self, rho23):
        a = param_spec(rho23)
        b = param_spec(rho23, px=256)
        c = param_spec(complex(-2 / 3))
        assert a.digest() == param_spec(rho23).digest()
        assert len({a.digest(), b.digest(), c.digest()}) == 3

    def test_colormap_total(self):
        cmap = PALETTES["default"]
        for period in range(1, 11):
            assert cmap.period_color(period) is not None
            assert cmap.period_color(period) != cmap.undetermined_color
        assert cmap.period_color(23) == cmap.undetermined_color


class TestDeterminism:
    def test_repeat_render_identical(self, rho23):
        spec = param_spec(rho23, px=64)
        a = M.render_parameter_plane(spec)
        b = M.render_parameter_plane(spec)
        assert np.array_equal(a.pixels, b.pixels)
        assert M.png_bytes(a.pixels) == M.png_bytes(b.pixels)
        assert a.digest == b.digest

    def test_worker_count_independence(self, rho23):
        spec = param_spec(rho23, px=96)
        results = [M.render_parameter_plane(spec, workers=w) for w in (1, 4, 8)]
        for other in results[1:]:
            assert np.array_equal(results[0].pixels, other.pixels)

    def test_dynamic_worker_independence(self, rho23):
        spec = M.RenderSpec("dyn", rho23, lam=2 + 2j,
                            viewport=M.Viewport(0.5 + 0.5j, 8.0),
                            resolution=(64, 64), budget=SMALL_BUDGET)
        results = [M.render_dynamic_plane(spec, workers=w) for w in (1, 4, 8)]
        for other in results[1:]:
            assert np.array_equal(results[0].pixels, other.pixels)


class TestTiles:
    def test_tile_equals_monolithic_crop(self, rho23):
        spec = param_spec(rho23, px=512)
        mono = M.render_parameter_plane(
            param_spec(rho23, px=512, budget=SMALL_BUDGET.scaled(1 + 1 / 8)))
        for x in range(2):
            for y in range(2):
                tile = M.render_tile(spec, 1, x, y)
                crop = mono.pixels[y * 256:(y + 1) * 256, x * 256:(x + 1) * 256]
                assert np.array_equal(tile.pixels, crop)

    def test_same_key_identical(self, rho23):
        spec = param_spec(rho23)
        a = M.render_tile(spec, 0, 0, 0)
        b = M.render_tile(spec, 0, 0, 0)
        assert np.array_equal(a.pixels, b.pixels)
        assert a.provenance == b.provenance
        assert a.key == b.key

    def test_bad_tile_coords(self, rho23):
        spec = param_spec(rho23)
        with pytest.raises(M.DomainError):
            M.render_tile(spec, 41, 0, 0)
        with pytest.raises(M.DomainError):
            M.render_tile(spec, 1, 2, 0)

    def test_dynamic_tile(self, rho23):
        spec = M.RenderSpec("dyn", rho23, lam=2 + 2j,
                            viewport=M.Viewport(0j, 8.0), resolution=(256, 256),
                            budget=SMALL_BUDGET)
        tile = M.render_tile(spec, 0, 0, 0)
        assert tile.pixels.shape == (256, 256, 3)


class TestParameterPlane:
    def test_fig2_regions(self, rho23):
        spec = param_spec(rho23, px=128, budget=M.ClassifierBudget())
        res = M.render_parameter_plane(spec)
        cmap = PALETTES["default"]

        def color_at(z):
            px, py = _pixel_of(spec, z)
            return tuple(res.pixels[py, px])

        # unbounded period-1 component on the right renders yellow
        assert color_at(3.5 + 0j) == cmap.period_color(1)
        # shift locus between the regions renders green
        assert color_at(rho23 + 0j) == cmap.shift_color
        assert color_at(1.0 + 0j) == cmap.shift_color
        # M_mu sits inside the green region near rho/2 and renders by period too
        assert color_at(M.invert(rho23, 3.5)) == cmap.period_color(1)
        # a ring around M_mu stays green: M_mu is an island in the shift locus
        for theta in np.linspace(0, 2 * math.pi, 12, endpoint=False):
            z = rho23 / 2 + 0.12 * np.exp(1j * theta)
            assert color_at(complex(z)) == cmap.shift_color

    def test_mirror_symmetry_real_rho(self, rho23):
        res = M.render_parameter_plane(param_spec(rho23, px=128))
        flipped = res.pixels[::-1]
        agreement = (flipped == res.pixels).all(axis=2).mean()
        assert agreement >= 0.99

    def test_rho_negative_two_thirds_bud(self):
        rho = complex(-2 / 3)
        budget = M.ClassifierBudget()
        # period-2 component sits on the real axis between the shift locus
        # and the period-1 component
        pc_bud = M.classify_lambda(rho, 0.5 + 0j, budget)
        assert (pc_bud.kind, pc_bud.period) == (M.Kind.M_LAMBDA, 2)
        pc_one = M.classify_lambda(rho, 2.0 + 0j, budget)
        assert (pc_one.kind, pc_one.period) == (M.Kind.M_LAMBDA, 1)
        pc_s = M.classify_lambda(rho, 0.2 + 0j, budget)
        assert pc_s.kind is M.Kind.SHIFT_LOCUS

    def test_singular_pixels_marked(self, rho23):
        spec = param_spec(rho23, px=128)
        res = M.render_parameter_plane(spec)
        cmap = PALETTES["default"]
        px, py = _pixel_of(spec, rho23 / 2)
        assert tuple(res.pixels[py, px]) == cmap.singular_color


class TestDynamicPlane:
    def test_fig1_two_basins(self, rho23):
        spec = M.RenderSpec("dyn", rho23, lam=2 + 2j,
                            viewport=M.Viewport(0.5 + 0.5j, 8.0),
                            resolution=(128, 128), budget=SMALL_BUDGET)
        res = M.render_dynamic_plane(spec)
        assert (res.kind == mc.FATE_ZERO).any()
        assert (res.kind == mc.FATE_CYCLE).any()

    def test_cantor_slice_single_basin(self, rho23):
        spec = M.RenderSpec("dyn", rho23, lam=rho23,
                            viewport=M.Viewport(0j, 8.0),
                            resolution=(128, 128), budget=SMALL_BUDGET)
        res = M.render_dynamic_plane(spec)
        assert not (res.kind == mc.FATE_CYCLE).any()
        assert (res.kind == mc.FATE_ZERO).mean() > 0.9

    def test_model_halfplane_split(self, rho23, model23):
        spec = M.RenderSpec("dyn", rho23, lam=model23.lambda0,
                            viewport=M.Viewport(model23.q0 / 2, 8.0),
                            resolution=(64, 64), budget=SMALL_BUDGET)
        res = M.render_dynamic_plane(spec)
        assert (res.kind[:, 0] == mc.FATE_ZERO).all()       # left edge: basin of 0
        assert (res.kind[:, -1] == mc.FATE_CYCLE).all()     # right edge: basin of q0

    def test_pole_and_fixed_point_overlays(self, rho23):
        base = M.RenderSpec("dyn", rho23, lam=2 + 2j,
                            viewport=M.Viewport(0.5 + 0.5j, 8.0),
                            resolution=(128, 128), budget=SMALL_BUDGET)
        plain = M.render_dynamic_plane(base)
        deco = M.render_dynamic_plane(
            M.RenderSpec("dyn", rho23, lam=2 + 2j,
                         viewport=M.Viewport(0.5 + 0.5j, 8.0),
                         resolution=(128, 128), budget=SMALL_BUDGET,
                         overlays=frozenset({"poles", "fixedpoints"})))
        assert not np.array_equal(plain.pixels, deco.pixels)
        # the pole marker sits at p_0
        p = M.ParamPoint(rho23, 2 + 2j)
        px, py = _pixel_of(base, M.pole_k(p, 0))
        assert tuple(deco.pixels[py, px]) == (0, 0, 0)


class TestOverlays:
    def test_center_markers_on_boundary(self, rho23):
        center = M.solve_virtual_center(
            rho23, M.MarkedAV.LAMBDA, M.Itinerary((1,)),
            mc.pole_k_raw(rho23, rho23, 1.0))
        spec = M.RenderSpec("param", rho23,
                            viewport=M.Viewport(center.location, 0.02),
                            resolution=(128, 128), budget=M.ClassifierBudget(),
                            overlays=frozenset({"centers"}))
        res = M.render_parameter_plane(
            spec, overlay_data=OverlayData(centers=(center,)))
        cmap = PALETTES["default"]
        px, py = _pixel_of(spec, center.location)
        assert tuple(res.pixels[py, px]) == cmap.overlay_color
        # within 1 px of the marked center both regions are visible
        neighborhood = res.kind[max(py - 4, 0):py + 5, max(px - 4, 0):px + 5]
        assert (neighborhood == mc.KIND_SHIFT).any()
        assert (neighborhood == mc.KIND_MLAMBDA).any()

    def test_c0_and_sstar_overlays(self, rho23):
        pts = tuple(M.trace_s_star(rho23, 32))
        spec = param_spec(rho23, px=96, overlays=frozenset({"c0circle", "sstar"}))
        plain = M.render_parameter_plane(param_spec(rho23, px=96))
        deco = M.render_parameter_plane(spec, overlay_data=OverlayData(sstar=pts))
        assert not np.array_equal(plain.pixels, deco.pixels)


class TestSaveRender:
    def test_png_and_sidecar(self, rho23, tmp_path):
        res = M.render_parameter_plane(param_spec(rho23, px=64))
        out = tmp_path / "param.png"
        meta = M.save_render(res, out)
        assert out.exists()
        sidecar = tmp_path / "param.png.json"
        assert sidecar.exists()
        import json

        loaded = json.loads(sidecar.read_text())
        assert loaded["digest"] == res.digest
        assert loaded["resolution"] == [64, 64]
        assert meta["plane"] == "param"
        from PIL import Image

        img = Image.open(out)
        assert img.size == (64, 64)

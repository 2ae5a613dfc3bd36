import json
import math

import numpy as np
import pytest

from visbound.billiard import (BOUNCE_CAP, estimate_both, estimate_F1, estimate_visibility, trace)
from visbound.errors import InvalidInputError, SceneError, SingularHitError, TrappedRayError
from visbound.scene import corpus_names, corpus_scene, load_scene, make_scene, scene_from_dict

SQUARE = [(-0.2, -0.2), (0.2, -0.2), (0.2, 0.2), (-0.2, 0.2)]


def unit(angle):
    return np.array([math.cos(angle), math.sin(angle)])


# --- scenes -----------------------------------------------------------------

def test_areas():
    assert make_scene(polygons=[SQUARE]).area == pytest.approx(0.16, abs=1e-15)
    assert make_scene(discs=[(0, 0, 0.5)]).area == pytest.approx(0.25 * math.pi, abs=1e-15)
    both = make_scene(polygons=[SQUARE], discs=[(0.5, 0.5, 0.1)])
    assert both.area == pytest.approx(0.16 + 0.01 * math.pi, abs=1e-15)
    assert make_scene(discs=[(0, 0, 0.6)]).normalized_volume == pytest.approx(0.36, abs=1e-15)
    assert make_scene().area == 0.0


def test_orientation_does_not_matter():
    assert make_scene(polygons=[SQUARE[::-1]]).area == pytest.approx(0.16, abs=1e-15)


@pytest.mark.parametrize("kwargs", [
    {"polygons": [[(0, 0), (1, 0), (0, 0.5)]]},                              # touches the rim
    {"polygons": [[(0, 0), (0.3, 0.3), (0.3, 0), (0, 0.3)]]},                # bow tie
    {"polygons": [[(0, 0), (0.3, 0)]]},                                      # too few vertices
    {"polygons": [[(0, 0), (0.3, 0), (0.1, float("nan"))]]},
    {"discs": [(0, 0, 0.5), (0.6, 0, 0.2)]},                                 # discs overlap
    {"discs": [(0.5, 0, 0.5)]},                                              # disc reaches rim
    {"discs": [(0, 0, -0.1)]},
    {"polygons": [SQUARE], "discs": [(0, 0, 0.05)]},                          # disc inside polygon
    {"polygons": [SQUARE], "discs": [(0.3, 0, 0.1)]},                         # disc touches polygon
    {"polygons": [SQUARE, [(0.1, 0.1), (0.5, 0.1), (0.5, 0.5)]]},             # polygons overlap
])
def test_invalid_scenes(kwargs):
    with pytest.raises(SceneError):
        make_scene(**kwargs)


def test_scene_dict_format(tmp_path):
    data = {"name": "x", "description": "test", "polygons": [SQUARE],
            "discs": [{"cx": 0.6, "cy": 0.0, "r": 0.1}]}
    scene = scene_from_dict(data)
    assert scene.name == "x"
    assert scene.discs == ((0.6, 0.0, 0.1),)
    with pytest.raises(SceneError):
        scene_from_dict({"polygons": [], "holes": []})
    with pytest.raises(SceneError):
        scene_from_dict({"discs": [{"x": 0, "y": 0, "r": 0.1}]})
    with pytest.raises(SceneError):
        scene_from_dict([1, 2])
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"discs": [{"cx": 0, "cy": 0, "r": 0.3}]}))
    assert load_scene(path).name == "s"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SceneError):
        load_scene(bad)
    with pytest.raises(OSError):
        load_scene(tmp_path / "missing.json")


def test_corpus():
    names = corpus_names()
    assert len(names) >= 5
    for name in names:
        scene = corpus_scene(name)
        assert 0 < scene.normalized_volume < 1
    with pytest.raises(SceneError):
        corpus_scene("nope")


# --- single rays --------------------------------------------------------------

def test_empty_scene_ray_goes_straight():
    n = unit(0.3)
    v = unit(0.3 + 0.4)
    out = trace(make_scene(), v, n)
    assert out.bounces == 0
    assert np.allclose(out.exit_direction, -v)
    assert np.linalg.norm(out.exit_point) == pytest.approx(1.0, abs=1e-14)
    assert out.path_length == pytest.approx(2 * math.cos(0.4), abs=1e-14)


@pytest.mark.parametrize("r", [0.3, 0.6, 0.9])
def test_head_on_disc_reflects_back(r):
    n = unit(1.1)
    out = trace(make_scene(discs=[(0, 0, r)]), n, n)
    assert out.bounces == 1
    assert np.allclose(out.exit_point, n, atol=1e-12)
    assert np.allclose(out.exit_direction, n, atol=1e-12)
    assert out.path_length == pytest.approx(2 * (1 - r), abs=1e-10)


def test_head_on_segment_reflects_back():
    n = np.array([1.0, 0.0])
    out = trace(make_scene(polygons=[SQUARE]), n, n)
    assert out.bounces == 1
    assert np.allclose(out.exit_point, n, atol=1e-12)
    assert np.allclose(out.exit_direction, n, atol=1e-12)
    assert out.path_length == pytest.approx(1.6, abs=1e-10)


def test_oblique_disc_reflection_angle():
    # impact parameter p on a disc of radius r: deflection pi - 2 asin(p / r)
    r, p = 0.5, 0.2
    n = np.array([math.sqrt(1 - p * p), p])
    v = np.array([1.0, 0.0])
    out = trace(make_scene(discs=[(0, 0, r)]), v, n)
    turn = math.atan2(out.exit_direction[1], out.exit_direction[0]) - math.pi
    assert abs(turn) == pytest.approx(math.pi - 2 * math.asin(p / r), abs=1e-12)


@pytest.mark.parametrize("name", ["c_shape", "mixed", "notched_retroreflector", "pin_array"])
def test_reflection_law_energy_and_reversibility(name):
    scene = corpus_scene(name)
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(200):
        phi = rng.uniform(0, 2 * math.pi)
        n = unit(phi)
        v = unit(phi + math.asin(rng.uniform(-0.99, 0.99)))
        try:
            out = trace(scene, v, n, debug=True)
        except SingularHitError:
            continue
        checked += 1
        assert np.linalg.norm(out.exit_direction) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(out.exit_point) == pytest.approx(1.0, abs=1e-12)
        for w_in, nu, w_out in zip(out.record[:, 0:2], out.record[:, 2:4], out.record[:, 4:6]):
            assert np.allclose(w_out, w_in - 2 * (w_in @ nu) * nu, atol=1e-12)
            assert abs(w_in @ nu) == pytest.approx(abs(w_out @ nu), abs=1e-12)
        if out.bounces > 6:
            # scattering off convex obstacles amplifies rounding exponentially
            continue
        back = trace(scene, out.exit_direction, out.exit_point)
        assert back.bounces == out.bounces
        assert np.allclose(back.exit_point, n, atol=1e-7)
        assert np.allclose(back.exit_direction, v, atol=1e-7)
        assert back.path_length == pytest.approx(out.path_length, abs=1e-7)
    assert checked > 150


def test_trapped_ray_raises():
    n = np.array([1.0, 0.0])
    with pytest.raises(TrappedRayError):
        trace(make_scene(discs=[(0, 0, 0.5)]), n, n, cap=0)
    assert BOUNCE_CAP == 10_000


def test_vertex_hit_is_singular():
    n = unit(math.pi / 4)
    with pytest.raises(SingularHitError):
        trace(make_scene(polygons=[SQUARE]), n, n)


@pytest.mark.parametrize("v,n", [((1, 0), (0.5, 0)), ((-1, 0), (1, 0)), ((1, 0, 0), (1, 0, 0))])
def test_trace_input_checks(v, n):
    with pytest.raises(InvalidInputError):
        trace(make_scene(), v, n)


# --- Monte Carlo ---------------------------------------------------------------

def test_empty_scene_estimates():
    vis, f1 = estimate_both(make_scene(), 20_000, seed=3, workers=1)
    assert vis.mean == 0.0 and vis.std_error == 0.0
    assert abs(f1.mean) <= 3 * f1.std_error


@pytest.mark.parametrize("r", [0.3, 0.6])
def test_disc_visibility_is_radius(r):
    est = estimate_visibility(make_scene(discs=[(0, 0, r)]), 200_000, seed=17, workers=2)
    assert abs(est.mean - r) <= 3 * est.std_error
    assert est.discarded == 0


def test_F1_dominates_volume_for_disc():
    scene = make_scene(discs=[(0, 0, 0.6)])
    est = estimate_F1(scene, 100_000, seed=4, workers=1)
    assert scene.normalized_volume <= est.mean + 3 * est.std_error


def test_deterministic_across_workers():
    scene = corpus_scene("mixed")
    one = estimate_both(scene, 150_000, seed=9, workers=1)
    four = estimate_both(scene, 150_000, seed=9, workers=4)
    assert one == four
    other = estimate_visibility(scene, 150_000, seed=10, workers=1)
    assert other.mean != one[0].mean


def test_sample_and_seed_checks():
    with pytest.raises(InvalidInputError):
        estimate_visibility(make_scene(), 10, seed=0)
    with pytest.raises(InvalidInputError):
        estimate_visibility(make_scene(), 5000, seed=-1)

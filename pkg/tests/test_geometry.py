import numpy as np
import pytest

from greenpot import geometry
from greenpot.core import PointSet, ValidationError


class TestBoxGrid:
    def test_unit_square(self):
        g = geometry.box_grid([0.0, 0.0], [1.0, 1.0], 1.0)
        assert np.array_equal(g, [[0, 0], [0, 1], [1, 0], [1, 1]])

    def test_count_scaling(self):
        g = geometry.box_grid([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], 0.5)
        assert g.shape == (27, 3)

    def test_validation(self):
        with pytest.raises(ValidationError):
            geometry.box_grid([0.0, 0.0], [0.0, 1.0], 0.5)
        with pytest.raises(ValidationError):
            geometry.box_grid([0.0, 0.0], [1.0, 1.0], 0.0)


class TestSphereShell:
    def test_radii_and_shape(self):
        pts = geometry.sphere_shell(120, 2.0)
        assert pts.shape == (120, 3)
        assert np.allclose(np.linalg.norm(pts, axis=1), 2.0, atol=1e-12)

    def test_deterministic(self):
        a = geometry.sphere_shell(50, 1.0, rotate=0.3)
        b = geometry.sphere_shell(50, 1.0, rotate=0.3)
        assert np.array_equal(a, b)

    def test_rotation_moves_points_on_the_sphere(self):
        a = geometry.sphere_shell(50, 1.0)
        b = geometry.sphere_shell(50, 1.0, rotate=0.3)
        assert not np.allclose(a, b)
        assert np.allclose(np.linalg.norm(b, axis=1), 1.0, atol=1e-12)

    def test_center_offset(self):
        pts = geometry.sphere_shell(40, 1.0, center=(5.0, 0.0, 0.0))
        assert np.allclose(np.linalg.norm(pts - [5.0, 0.0, 0.0], axis=1), 1.0,
                           atol=1e-12)

    def test_points_are_spread_out(self):
        pts = geometry.sphere_shell(100, 1.0)
        ps = PointSet.from_points(pts)
        # Fibonacci spacing on the unit sphere scales like count^(-1/2)
        from greenpot.core import nearest_neighbor_distances
        nn = nearest_neighbor_distances(pts)
        assert nn.min() > 0.1
        assert nn.max() < 0.5
        assert len(ps) == 100

    def test_count_validation(self):
        with pytest.raises(ValidationError):
            geometry.sphere_shell(0, 1.0)


class TestSphericalCap:
    def test_stays_inside_cap(self):
        pts = geometry.spherical_cap(60, 0.825, radius=2.0)
        assert np.allclose(np.linalg.norm(pts, axis=1), 2.0, atol=1e-12)
        assert np.min(pts[:, 2] / 2.0) >= 0.825

    def test_cos_validation(self):
        with pytest.raises(ValidationError):
            geometry.spherical_cap(10, 1.0)


class TestBallGrid:
    def test_inside_ball_on_grid(self):
        pts = geometry.ball_grid(0.5, 1.0)
        assert np.max(np.linalg.norm(pts, axis=1)) <= 1.0 + 1e-12
        offsets = (pts + 1.0) / 0.5
        assert np.allclose(offsets, np.round(offsets), atol=1e-9)

    def test_center_shift(self):
        pts = geometry.ball_grid(0.5, 1.0, center=(0.0, 0.0, 3.0))
        assert np.max(np.linalg.norm(pts - [0.0, 0.0, 3.0], axis=1)) <= 1.0 + 1e-12


class TestCompositeClouds:
    def test_annulus_layer_radii(self):
        pts = geometry.annulus(10, [1.0, 2.0])
        assert pts.shape == (20, 3)
        assert np.allclose(np.linalg.norm(pts[:10], axis=1), 1.0, atol=1e-12)
        assert np.allclose(np.linalg.norm(pts[10:], axis=1), 2.0, atol=1e-12)

    def test_layered_ball_counts_and_center(self):
        pts = geometry.layered_ball([1.0, 0.5], [30, 12])
        assert pts.shape == (43, 3)
        assert np.array_equal(pts[-1], [0.0, 0.0, 0.0])
        bare = geometry.layered_ball([1.0, 0.5], [30, 12], include_center=False)
        assert bare.shape == (42, 3)

    def test_layered_ball_validation(self):
        with pytest.raises(ValidationError):
            geometry.layered_ball([1.0], [30, 12])

    def test_truncated_cone_geometry(self):
        pts = geometry.truncated_cone(2)
        assert pts.shape == (2 * 2 * 28, 3)
        norms = np.linalg.norm(pts, axis=1)
        assert np.min(norms) >= 1.0 - 1e-12
        assert np.max(norms) < 1.45 ** 2
        assert np.min(pts[:, 2] / norms) >= 0.825 - 1e-12

    def test_truncated_cone_ratio_validation(self):
        with pytest.raises(ValidationError):
            geometry.truncated_cone(2, ratio=1.0)


class TestPlaneRings:
    def test_geometric_rings_on_plane(self):
        pts = geometry.plane_rings(1.0, 4.0, 2.0, z=0.5)
        # ratio 2 gives 6 points per ring, rings at radii 1, 2, 4, plus center
        assert pts.shape == (19, 3)
        assert np.allclose(pts[:, 2], 0.5)
        radii = np.linalg.norm(pts[:, :2], axis=1)
        assert sorted(set(np.round(radii, 9))) == [0.0, 1.0, 2.0, 4.0]

    def test_ratio_validation(self):
        with pytest.raises(ValidationError):
            geometry.plane_rings(1.0, 4.0, 1.0)


class TestCircleRing:
    def test_cardinal_points(self):
        pts = geometry.circle_ring(4, 1.0)
        assert np.allclose(pts, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-12)

    def test_center_and_rotation(self):
        pts = geometry.circle_ring(4, 2.0, center=(1.0, 1.0), rotate=np.pi / 4)
        assert np.allclose(np.linalg.norm(pts - [1.0, 1.0], axis=1), 2.0,
                           atol=1e-12)
        s = np.sqrt(2.0)
        assert np.allclose(pts[0], [1.0 + s, 1.0 + s], atol=1e-12)


class TestGeneratorRegistry:
    def test_all_entries_callable(self):
        assert set(geometry.GENERATORS) == {
            "box_grid", "sphere_shell", "spherical_cap", "ball_grid",
            "annulus", "layered_ball", "truncated_cone", "plane_rings",
            "circle_ring"}
        for fn in geometry.GENERATORS.values():
            assert callable(fn)


class TestCsvRoundTrip:
    def test_three_d_roundtrip(self, tmp_path):
        ps = PointSet.from_points(geometry.sphere_shell(15, 1.3))
        path = tmp_path / "cloud.csv"
        geometry.save_csv(path, ps)
        back = geometry.load_csv(path)
        assert np.array_equal(back.points, ps.points)
        assert np.array_equal(back.cell_radius, ps.cell_radius)

    def test_two_d_roundtrip_keeps_radius_column(self, tmp_path):
        ps = PointSet.from_points(geometry.circle_ring(8, 1.0))
        path = tmp_path / "ring.csv"
        geometry.save_csv(path, ps)
        back = geometry.load_csv(path)
        assert back.dim == 2
        assert np.array_equal(back.points, ps.points)
        assert np.array_equal(back.cell_radius, ps.cell_radius)

    def test_headerless_coordinates_get_default_radii(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("0,0,0\n1,0,0\n")
        ps = geometry.load_csv(path)
        assert ps.dim == 3
        assert np.array_equal(ps.cell_radius, [0.5, 0.5])

    def test_headerless_four_columns_take_radius(self, tmp_path):
        path = tmp_path / "wide.csv"
        path.write_text("0,0,0,0.25\n1,0,0,0.25\n")
        ps = geometry.load_csv(path)
        assert ps.dim == 3
        assert np.array_equal(ps.cell_radius, [0.25, 0.25])

    def test_malformed_files_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("0,0,0\noops,0,0\n")
        with pytest.raises(ValidationError):
            geometry.load_csv(bad)
        ragged = tmp_path / "ragged.csv"
        ragged.write_text("0,0,0\n1,0\n")
        with pytest.raises(ValidationError):
            geometry.load_csv(ragged)
        empty = tmp_path / "empty.csv"
        empty.write_text("x0,x1,x2,cell_radius\n")
        with pytest.raises(ValidationError):
            geometry.load_csv(empty)

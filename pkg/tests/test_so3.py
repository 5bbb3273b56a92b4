import numpy as np
import pytest

from attobs.so3 import (
    euler_to_rot,
    is_rotation,
    random_rotation,
    random_rotation_batch,
    rot_to_euler,
    rot_to_euler_batch,
    rotate_exp,
    skew,
)


class TestSkew:
    def test_maps_x_to_y_for_unit_z(self):
        S = skew((0.0, 0.0, 1.0))
        np.testing.assert_allclose(S @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_zero_vector(self):
        np.testing.assert_array_equal(skew((0.0, 0.0, 0.0)), np.zeros((3, 3)))

    def test_cross_product_example(self):
        np.testing.assert_allclose(skew((1, 2, 3)) @ [4, 5, 6], [-3, 6, -3], atol=0)

    def test_matches_cross(self, rng):
        for _ in range(100):
            v, x = rng.normal(size=3), rng.normal(size=3)
            np.testing.assert_allclose(skew(v) @ x, np.cross(v, x), atol=1e-14)

    def test_antisymmetric(self, rng):
        v = rng.normal(size=3)
        np.testing.assert_array_equal(skew(v).T, -skew(v))


class TestRotateExp:
    def test_zero_rate_is_identity(self):
        np.testing.assert_array_equal(rotate_exp(np.eye(3), (0, 0, 0), 0.1), np.eye(3))

    def test_quarter_turn_about_z(self):
        R = rotate_exp(np.eye(3), (0, 0, np.pi / 2), 1.0)
        np.testing.assert_allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_one_parameter_group(self, rng):
        R0 = random_rotation(rng)
        omega = rng.normal(size=3)
        dt = 0.37
        once = rotate_exp(R0, omega, dt)
        twice = rotate_exp(rotate_exp(R0, omega, dt / 2), omega, dt / 2)
        np.testing.assert_allclose(once, twice, atol=1e-12)

    def test_stays_on_so3(self, rng):
        n = 100_000
        R = random_rotation_batch(rng, n)
        omega = rng.normal(size=(n, 3))
        omega *= (10 * rng.uniform(size=(n, 1))) / np.linalg.norm(omega, axis=1, keepdims=True)
        dt = 0.01 * rng.uniform(size=n)
        out = np.empty_like(R)
        for i in range(n):
            out[i] = rotate_exp(R[i], omega[i], dt[i])
        ortho = np.einsum("nji,njk->nik", out, out) - np.eye(3)
        assert np.abs(ortho).max() < 1e-12
        dets = np.linalg.det(out)
        assert np.abs(dets - 1).max() < 1e-12

    def test_rotation_commutes_with_cross(self, rng):
        R = random_rotation_batch(rng, 1000)
        x = rng.normal(size=(1000, 3))
        y = rng.normal(size=(1000, 3))
        lhs = np.einsum("nij,nj->ni", R, np.cross(x, y))
        rhs = np.cross(np.einsum("nij,nj->ni", R, x), np.einsum("nij,nj->ni", R, y))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestEuler:
    def test_identity(self):
        np.testing.assert_allclose(euler_to_rot(0, 0, 0), np.eye(3), atol=0)
        assert rot_to_euler(np.eye(3)) == (0.0, 0.0, 0.0)

    def test_round_trip(self):
        angles = (0.3, -0.5, 1.2)
        back = rot_to_euler(euler_to_rot(*angles))
        np.testing.assert_allclose(back, angles, atol=1e-12)

    def test_round_trip_random(self, rng):
        for _ in range(200):
            phi, psi = rng.uniform(-np.pi, np.pi, 2)
            theta = rng.uniform(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3)
            np.testing.assert_allclose(
                rot_to_euler(euler_to_rot(phi, theta, psi)), (phi, theta, psi), atol=1e-9
            )

    def test_pure_yaw(self):
        R = rotate_exp(np.eye(3), (0, 0, np.pi / 2), 1.0)
        phi, theta, psi = rot_to_euler(R)
        np.testing.assert_allclose([phi, theta, psi], [0, 0, np.pi / 2], atol=1e-15)

    def test_gimbal_lock_sets_yaw_to_zero(self):
        R = euler_to_rot(0.4, np.pi / 2, 0.9)
        phi, theta, psi = rot_to_euler(R)
        assert psi == 0.0
        assert abs(theta - np.pi / 2) < 1e-9
        # the recovered rotation must still match the original
        np.testing.assert_allclose(euler_to_rot(phi, theta, psi), R, atol=1e-9)

    def test_batch_matches_scalar(self, rng):
        R = random_rotation_batch(rng, 500)
        batch = rot_to_euler_batch(R)
        for i in range(0, 500, 37):
            np.testing.assert_allclose(batch[i], rot_to_euler(R[i]), atol=1e-15)


class TestRandomRotation:
    def test_valid_rotation(self, rng):
        for _ in range(100):
            assert is_rotation(random_rotation(rng), tol=1e-12)

    def test_determinant_positive(self, rng):
        R = random_rotation_batch(rng, 10_000)
        assert np.abs(np.linalg.det(R) - 1).max() < 1e-12

    def test_haar_mean_trace(self, rng):
        R = random_rotation_batch(rng, 100_000)
        assert abs(np.einsum("nii->n", R).mean()) < 0.05

import math

import numpy as np
import pytest

from graphact import DhLink, KinematicChain, RigidTransform, dh_transform, fk_positions
from graphact.kinematics import DofMismatch, default_chains


def _homog(T: RigidTransform) -> np.ndarray:
    M = np.eye(4)
    M[:3, :3] = T.rotation
    M[:3, 3] = T.translation
    return M


def _dh_oracle(a, alpha, d, theta) -> np.ndarray:
    """Compose the four elementary DH factors Rz(theta)·Tz(d)·Tx(a)·Rx(alpha)."""
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    Rz = np.array([[ct, -st, 0, 0], [st, ct, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    Tz = np.eye(4); Tz[2, 3] = d
    Tx = np.eye(4); Tx[0, 3] = a
    Rx = np.array([[1, 0, 0, 0], [0, ca, -sa, 0], [0, sa, ca, 0], [0, 0, 0, 1]])
    return Rz @ Tz @ Tx @ Rx


def test_dh_identity():
    T = dh_transform(DhLink(a=0, alpha=0, d=0), theta=0.0)
    assert np.allclose(_homog(T), np.eye(4), atol=0)


def test_dh_pure_translation():
    T = dh_transform(DhLink(a=1.0, alpha=0, d=0), theta=0.0)
    assert np.allclose(T.rotation, np.eye(3))
    assert np.allclose(T.translation, [1.0, 0.0, 0.0])


def test_dh_against_elementary_factor_oracle():
    link = DhLink(a=1.0, alpha=math.pi / 2, d=0.5)
    T = dh_transform(link, theta=math.pi / 4)
    assert np.abs(_homog(T) - _dh_oracle(1.0, math.pi / 2, 0.5, math.pi / 4)).max() < 1e-15


def test_dh_theta_offset_added():
    link = DhLink(a=0.3, alpha=0.2, d=0.1, theta_offset=0.7)
    T = dh_transform(link, theta=0.4)
    assert np.abs(_homog(T) - _dh_oracle(0.3, 0.2, 0.1, 1.1)).max() < 1e-15


def _planar_two_link():
    links = (DhLink(a=1.0, alpha=0, d=0), DhLink(a=1.0, alpha=0, d=0))
    return KinematicChain(name="planar", base=RigidTransform.identity(), links=links)


def test_planar_two_link_straight():
    pts = fk_positions(_planar_two_link(), [0.0, 0.0])
    assert np.allclose(pts[0], [0, 0, 0])
    assert np.allclose(pts[1], [1, 0, 0])
    assert np.allclose(pts[2], [2, 0, 0])


def test_planar_two_link_bent():
    # ee = (cos t1 + cos(t1+t2), sin t1 + sin(t1+t2)) evaluated by hand
    pts = fk_positions(_planar_two_link(), [math.pi / 2, 0.0])
    assert np.abs(pts[2] - np.array([0.0, 2.0, 0.0])).max() < 1e-12
    t1, t2 = 0.3, -0.8
    pts = fk_positions(_planar_two_link(), [t1, t2])
    expected = [math.cos(t1) + math.cos(t1 + t2), math.sin(t1) + math.sin(t1 + t2), 0.0]
    assert np.abs(pts[2] - np.array(expected)).max() < 1e-12


def _fk_matrix_oracle(chain: KinematicChain, q) -> list:
    """Naive homogeneous-matrix chain, independent of RigidTransform."""
    M = _homog(chain.base)
    pts = [M[:3, 3].copy()]
    for link, theta in zip(chain.links, q):
        M = M @ _dh_oracle(link.a, link.alpha, link.d, theta + link.theta_offset)
        pts.append(M[:3, 3].copy())
    return pts


def test_seven_link_home_matches_matrix_oracle():
    chain = default_chains()[0]
    got = fk_positions(chain, np.zeros(7))
    expected = _fk_matrix_oracle(chain, np.zeros(7))
    assert len(got) == 8
    for g, e in zip(got, expected):
        assert np.abs(g - e).max() < 1e-12


def test_fk_matches_matrix_oracle_random_configs():
    chain = default_chains()[1]
    rng = np.random.default_rng(4)
    for _ in range(25):
        q = rng.uniform(-np.pi, np.pi, size=7)
        for g, e in zip(fk_positions(chain, q), _fk_matrix_oracle(chain, q)):
            assert np.abs(g - e).max() < 1e-12


def test_reachability_bound():
    chain = default_chains()[0]
    rng = np.random.default_rng(5)
    for _ in range(50):
        q = rng.uniform(-np.pi, np.pi, size=7)
        pts = fk_positions(chain, q)
        for k, link in enumerate(chain.links):
            sep = np.linalg.norm(pts[k + 1] - pts[k])
            assert sep <= abs(link.a) + abs(link.d) + 1e-12


def test_consecutive_distance_independent_of_later_joints():
    # dist(origin k, origin k+1) depends on q[0..k] only
    chain = default_chains()[0]
    rng = np.random.default_rng(6)
    q = rng.uniform(-1, 1, size=7)
    for k in range(6):
        pts = fk_positions(chain, q)
        d_ref = np.linalg.norm(pts[k + 1] - pts[k])
        for _ in range(5):
            q2 = q.copy()
            q2[k + 1:] = rng.uniform(-1, 1, size=7 - k - 1)
            pts2 = fk_positions(chain, q2)
            assert abs(np.linalg.norm(pts2[k + 1] - pts2[k]) - d_ref) < 1e-12


def test_dof_mismatch():
    with pytest.raises(DofMismatch):
        fk_positions(_planar_two_link(), [0.0, 0.0, 0.0])

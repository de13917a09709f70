"""Forward kinematics over serial chains, standard (distal) Denavit-Hartenberg.

Link transform convention: Rz(theta + theta_offset) * Tz(d) * Tx(a) * Rx(alpha).
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import PipelineError, RigidTransform


class DofMismatch(PipelineError):
    pass


@dataclass(frozen=True)
class DhLink:
    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0

    def to_dict(self) -> dict:
        return {"a": self.a, "alpha": self.alpha, "d": self.d,
                "theta_offset": self.theta_offset}

    @classmethod
    def from_dict(cls, d: dict) -> "DhLink":
        return cls(a=float(d["a"]), alpha=float(d["alpha"]), d=float(d["d"]),
                   theta_offset=float(d.get("theta_offset", 0.0)))


@dataclass(frozen=True)
class KinematicChain:
    """Serial chain: base pose in the robot base frame plus ordered DH links."""

    name: str
    base: RigidTransform
    links: tuple

    @property
    def dof(self) -> int:
        return len(self.links)

    def to_dict(self) -> dict:
        return {"name": self.name, "base": self.base.to_dict(),
                "links": [l.to_dict() for l in self.links]}

    @classmethod
    def from_dict(cls, d: dict) -> "KinematicChain":
        return cls(name=str(d["name"]), base=RigidTransform.from_dict(d["base"]),
                   links=tuple(DhLink.from_dict(l) for l in d["links"]))


def dh_transform(link: DhLink, theta: float) -> RigidTransform:
    """Link transform for joint angle theta (theta_offset added internally)."""
    th = theta + link.theta_offset
    ct, st = math.cos(th), math.sin(th)
    ca, sa = math.cos(link.alpha), math.sin(link.alpha)
    R = np.array([[ct, -st * ca, st * sa],
                  [st, ct * ca, -ct * sa],
                  [0.0, sa, ca]])
    t = np.array([link.a * ct, link.a * st, link.d])
    return RigidTransform(R, t, check=False)


def fk_positions(chain: KinematicChain, q_slice) -> list:
    """Base-frame origins of every joint frame plus the end effector, chain order.

    Returns dof + 1 points: the chain base origin, each intermediate joint
    origin, and finally the end-effector origin.
    """
    q = np.asarray(q_slice, dtype=float).reshape(-1)
    if q.size != chain.dof:
        raise DofMismatch(f"chain '{chain.name}' expects {chain.dof} joints, got {q.size}")
    positions = [chain.base.translation.copy()]
    T = chain.base
    for link, theta in zip(chain.links, q):
        T = T.compose(dh_transform(link, theta))
        positions.append(T.translation.copy())
    return positions


def default_arm_links() -> tuple:
    """7-DOF arm with nonzero offsets so poses are non-degenerate at q = 0."""
    return (
        DhLink(a=0.0, alpha=-math.pi / 2, d=0.333, theta_offset=0.0),
        DhLink(a=0.0, alpha=math.pi / 2, d=0.0, theta_offset=-0.3),
        DhLink(a=0.0825, alpha=math.pi / 2, d=0.316, theta_offset=0.0),
        DhLink(a=-0.0825, alpha=-math.pi / 2, d=0.0, theta_offset=0.5),
        DhLink(a=0.0, alpha=math.pi / 2, d=0.384, theta_offset=0.0),
        DhLink(a=0.088, alpha=math.pi / 2, d=0.0, theta_offset=0.4),
        DhLink(a=0.0, alpha=0.0, d=0.107, theta_offset=0.0),
    )


def default_chains() -> list:
    """Two mirrored 7-DOF arms mounted either side of the robot base."""
    links = default_arm_links()
    left = KinematicChain(name="left", links=links,
                          base=RigidTransform(np.eye(3), [0.0, 0.22, 0.0], check=False))
    right = KinematicChain(name="right", links=links,
                           base=RigidTransform(np.eye(3), [0.0, -0.22, 0.0], check=False))
    return [left, right]

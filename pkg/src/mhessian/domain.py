"""Balls, discs and ellipses with closed-form boundary p-curvatures."""
from dataclasses import dataclass
from math import comb, gamma, pi
from typing import Optional

import numpy as np

from .errors import ArgumentError

KINDS = ("ball", "disc", "ellipse")


@dataclass(frozen=True)
class Domain:
    """A ball ``B_R`` in ``R^n``, a disc (``n = 2``) or an ellipse with semi-axes ``a, b``."""

    kind: str
    n: int
    R: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown domain kind {self.kind!r}")
        if self.kind == "ellipse":
            if self.n != 2:
                raise ArgumentError("ellipses are two-dimensional")
            if not (self.a and self.b and self.a > 0 and self.b > 0):
                raise ArgumentError("ellipse needs positive semi-axes a, b")
        else:
            if self.R is None or not self.R > 0:
                raise ArgumentError("radius R must be positive")
            if self.kind == "disc" and self.n != 2:
                raise ArgumentError("a disc is a ball with n = 2")
            if not 2 <= self.n <= 8:
                raise ArgumentError(f"dimension n={self.n} outside [2, 8]")

    @classmethod
    def ball(cls, n, R=1.0):
        return cls("ball", int(n), R=float(R))

    @classmethod
    def disc(cls, R=1.0):
        return cls("disc", 2, R=float(R))

    @classmethod
    def ellipse(cls, a, b):
        return cls("ellipse", 2, a=float(a), b=float(b))

    @property
    def is_round(self):
        return self.kind in ("ball", "disc")

    @property
    def semi_axes(self):
        """Semi-axes of the affine image of the unit disc (2-D domains)."""
        if self.kind == "ellipse":
            return self.a, self.b
        return self.R, self.R

    def volume(self) -> float:
        if self.kind == "ellipse":
            return pi * self.a * self.b
        return sphere_area(self.n) * self.R ** self.n / self.n

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n}
        if self.kind == "ellipse":
            d.update(a=self.a, b=self.b)
        else:
            d["R"] = self.R
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        try:
            kind = d["kind"]
            if kind == "ellipse":
                return cls.ellipse(d["a"], d["b"])
            if kind == "disc":
                return cls.disc(d.get("R", 1.0))
            return cls.ball(d["n"], d.get("R", 1.0))
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"bad domain descriptor {d!r}: {exc}") from None


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in ``R^n``."""
    return 2.0 * pi ** (n / 2) / gamma(n / 2)


def principal_curvatures(domain: Domain, t: float = 0.0) -> np.ndarray:
    """The ``n - 1`` principal curvatures of the boundary at parameter ``t``."""
    if domain.kind == "ellipse":
        a, b = domain.a, domain.b
        k = a * b / (a * a * np.sin(t) ** 2 + b * b * np.cos(t) ** 2) ** 1.5
        return np.array([k])
    return np.full(domain.n - 1, 1.0 / domain.R)


def boundary_curvature(domain: Domain, p: int, t: float = 0.0) -> float:
    """p-curvature: elementary symmetric polynomial of order ``p`` of the principal curvatures."""
    if not 0 <= p <= domain.n - 1:
        raise ArgumentError(f"p={p} outside [0, {domain.n - 1}]")
    if p == 0:
        return 1.0
    if domain.is_round:
        return comb(domain.n - 1, p) * domain.R ** (-p)
    k = principal_curvatures(domain, t)
    return float(k[0]) if p == 1 else 0.0

"""Controller parameter sets shared by every control mode."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .vec import Vec3


class Mode(enum.Enum):
    STANDALONE = "standalone"
    SHARED = "shared"
    IMPEDANCE = "impedance"


class ParamError(ValueError):
    pass


def _diag3(value, name: str) -> Vec3:
    if isinstance(value, (int, float)):
        value = (value, value, value)
    v = tuple(float(c) for c in value)
    if len(v) != 3:
        raise ParamError(f"{name}: expected a scalar or 3 diagonal entries")
    if any(not math.isfinite(c) or c <= 0.0 for c in v):
        raise ParamError(f"{name}: diagonal entries must be positive, got {v}")
    return v


@dataclass(frozen=True)
class ControllerParams:
    """Per-tick control law parameters.

    M, B: virtual mass (kg) and damping (Ns/m) of the admittance channel.
    K_a: attraction gain toward the goal point (1/s).
    w, C: performance factor weights and slopes (smoothness, directness).
    lam, rho_min: lookahead sphere dilation (>1) and minimum radius (m).
    """

    M: Vec3 = (1.0, 1.0, 1.0)
    B: Vec3 = (83.3, 83.3, 83.3)
    K_a: Vec3 = (1.0, 1.0, 1.0)
    w: tuple[float, ...] = (0.5, 0.5)
    C: tuple[float, ...] = (1.0, 1.0)
    lam: float = 1.02
    rho_min: float = 0.015
    v_max: float = 0.25
    filter_cutoff: float = 2.0
    dt: float = 0.001
    activity_threshold: float = 0.5
    gate_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "M", _diag3(self.M, "M"))
        object.__setattr__(self, "B", _diag3(self.B, "B"))
        object.__setattr__(self, "K_a", _diag3(self.K_a, "K_a"))
        w = tuple(float(x) for x in self.w)
        C = tuple(float(x) for x in self.C)
        if len(w) != len(C):
            raise ParamError(f"w and C must have the same length ({len(w)} vs {len(C)})")
        if len(w) != 2:
            raise ParamError(
                "this controller scores exactly two factors "
                f"(smoothness, directness); got {len(w)} weights")
        if any(x < 0.0 for x in w) or sum(w) <= 0.0:
            raise ParamError(f"weights must be >= 0 with a positive sum, got {w}")
        if any(x <= 0.0 for x in C):
            raise ParamError(f"slope constants must be positive, got {C}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "C", C)
        if not self.lam > 1.0:
            raise ParamError(f"lambda must be > 1, got {self.lam}")
        if not self.rho_min > 0.0:
            raise ParamError(f"rho_min must be > 0, got {self.rho_min}")
        if not self.v_max > 0.0:
            raise ParamError(f"v_max must be > 0, got {self.v_max}")
        if not self.filter_cutoff > 0.0:
            raise ParamError(f"filter_cutoff must be > 0, got {self.filter_cutoff}")
        if not self.dt > 0.0:
            raise ParamError(f"dt must be > 0, got {self.dt}")
        if self.activity_threshold < 0.0:
            raise ParamError(f"activity_threshold must be >= 0, got {self.activity_threshold}")


@dataclass(frozen=True)
class ImpedanceParams:
    """Baseline assist: torque-free band around the path, a stiff pull back
    outside it, plus a small tangential feed."""

    deadband: float = 0.001
    k_n: float = 100.0
    v_tangent: float = 0.003

    def __post_init__(self):
        for name in ("deadband", "k_n", "v_tangent"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0.0:
                raise ParamError(f"{name} must be non-negative, got {val}")

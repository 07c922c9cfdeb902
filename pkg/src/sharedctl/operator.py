"""Synthetic operator: closes the loop with force inputs so the benchmark
runs unattended.

The desired velocity is a tangential drive along the path (aimed at a
preview point) plus a transverse correction toward the nearest path
point. Both act on state sensed reaction_delay ago, so correction gain
times delay sets how much an operator weaves around the reference: the
unskilled end of the cohort over-corrects visibly. The force itself is a
feedforward push against the device's virtual damping (the adapted human
who knows how the handle feels) plus a velocity-error reflex, modulated
by an effort relay with hysteresis: ease off when faster than intended,
push hard when too slow. Motor noise is band-limited (an OU process)
with a small sinusoidal tremor on top.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .follower import nearest_sample_param
from .geometry import PathSpec, path_point, path_tangent
from .vec import ZERO3, Vec3, clamp_norm

# Task constants: intended tracing speed and pursuit caps.
NOMINAL_SPEED = 0.05  # m/s
V_DES_MAX = 0.12  # m/s, nobody sprints in a precision task
CORR_MAX = 0.05  # m/s, transverse correction cap
FEEDBACK_GAIN = 120.0  # Ns/m, delayed velocity-error reflex
NOISE_TAU = 0.35  # s, motor noise correlation time
EFFORT_TAU = 0.15  # s, muscle effort ramp
FUTILITY_RISE = 1.5  # s of sustained fight until the operator gives in
FUTILITY_FALL = 1.5  # s to recover the will to resist
EASE_SPEED = 1.2  # relay: ease off above this multiple of intended speed
PUSH_SPEED = 0.7  # relay: push again below this multiple
DRAG_SPEED = 1.05  # being moved faster than this multiple feels like dragging
YIELD_COS = math.cos(math.radians(8.0))  # deflection that triggers yielding
FIGHT_COS = math.cos(math.radians(25.0))  # deflection that triggers tensing up

DOMINANT = "dominant"
NONDOMINANT = "nondominant"


@dataclass(frozen=True)
class OperatorProfile:
    """Parameters of one synthetic volunteer."""

    skill: float = 0.7  # [0, 1]
    reaction_delay: float = 0.15  # s
    preview: float = 0.4  # s of look-ahead along the path
    k_track: float = 2.6  # 1/s pursuit gain toward the preview point
    f_max: float = 12.0  # N strength cap
    noise_std: float = 0.4  # N per axis, band-limited
    tremor_hz: float = 9.0
    hand_penalty: float = 0.85  # skill multiplier for the non-dominant hand
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if not 0.0 <= self.skill <= 1.0:
            raise ValueError(f"skill must be in [0, 1], got {self.skill}")
        if not 0.0 <= self.hand_penalty <= 1.0:
            raise ValueError(f"hand_penalty must be in [0, 1], got {self.hand_penalty}")
        if self.f_max < 0.0:
            raise ValueError(f"f_max must be >= 0, got {self.f_max}")
        for field_name in ("reaction_delay", "preview", "k_track", "noise_std", "tremor_hz"):
            if getattr(self, field_name) < 0.0:
                raise ValueError(f"{field_name} must be >= 0")


class SyntheticOperator:
    """Stateful force source for one trial. Deterministic given the seed."""

    def __init__(
        self,
        profile: OperatorProfile,
        path: PathSpec,
        dt: float,
        hand: str = DOMINANT,
        feel_b: Vec3 = (83.3, 83.3, 83.3),
        seed: int | None = None,
    ):
        if hand not in (DOMINANT, NONDOMINANT):
            raise ValueError(f"hand must be {DOMINANT!r} or {NONDOMINANT!r}")
        self.profile = profile
        self.path = path
        self.dt = dt
        self.hand = hand
        self.feel_b = feel_b
        # the weaker hand is slower to correct and noisier on top of the
        # overall skill discount
        penalty = profile.hand_penalty if hand == NONDOMINANT else 1.0
        self.skill_eff = profile.skill * penalty
        self._delay = profile.reaction_delay / max(penalty, 0.05)
        self._noise_std = profile.noise_std / max(penalty, 0.05)

        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
            profile.seed if seed is None else seed)))
        self._rng = rng
        self._tremor_phase = float(rng.uniform(0.0, 2.0 * math.pi))
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        self._tremor_dir = (float(u[0]), float(u[1]), float(u[2]))
        self._noise = (0.0, 0.0, 0.0)

        delay_ticks = max(0, int(round(self._delay / dt)))
        self._buffer: deque[tuple[Vec3, Vec3]] = deque(maxlen=delay_ticks + 1)
        self._arc = path.total_length
        self._effort = 1.0
        self._pushing = True
        # steady operators barely pulse; sloppy ones nearly let go
        self._effort_floor = 0.45 + 0.45 * self.skill_eff
        # yield fraction for the pseudo-haptic adaptation: feeling resistance
        # makes people realign with the motion that is actually happening,
        # and unpracticed users follow the device more readily
        self._yield = 0.35 + 0.45 * (1.0 - self.skill_eff)
        # cruising speed the operator is trying to hold
        self._ambition = NOMINAL_SPEED * (0.45 + 0.55 * self.skill_eff)
        # personal trace bias: nobody reproduces the figure exactly, and the
        # weaker the practice the larger the idiosyncratic distortion that
        # the operator actually aims for
        amp = (0.8 + 3.5 * (1.0 - self.skill_eff)) * 1e-3 * float(rng.uniform(0.75, 1.25))
        self._bias = (
            (amp, float(rng.uniform(0.0, 2.0 * math.pi))),
            (0.6 * amp * float(rng.uniform(0.5, 1.0)), float(rng.uniform(0.0, 2.0 * math.pi))),
        )
        self._futility = 0.0  # sustained-fight integrator in [0, 1]

    def _personal_point(self, s: float) -> Vec3:
        """Reference point displaced onto the operator's own trace."""
        px, py, pz = path_point(self.path, s)
        (a1, ph1), (a2, ph2) = self._bias
        off = a1 * math.sin(2.0 * math.pi * s + ph1) + a2 * math.sin(4.0 * math.pi * s + ph2)
        tx, ty, tz = path_tangent(self.path, s)
        # in-plane normal: tangent x z-axis, falling back for vertical runs
        nx, ny, nz = ty, -tx, 0.0
        nn = math.sqrt(nx * nx + ny * ny)
        if nn < 1e-9:
            nx, ny, nz = 0.0, tz, -ty
            nn = math.sqrt(ny * ny + nz * nz)
        return (px + off * nx / nn, py + off * ny / nn, pz + off * nz / nn)

    def force(self, x: Vec3, v_ee: Vec3, t: float) -> Vec3:
        """Force exerted at time t given the current EE state."""
        p = self.profile
        buf = self._buffer
        if not buf:
            buf.extend([(x, v_ee)] * buf.maxlen)  # pre-trial gaze at rest
        buf.append((x, v_ee))
        x_del, v_del = buf[0]  # maxlen keeps this reaction_delay ticks old

        if p.f_max == 0.0:
            return ZERO3

        s_near, _ = nearest_sample_param(self.path, x_del)
        p_near = self._personal_point(s_near)
        ds = (p.preview * NOMINAL_SPEED) / self._arc
        s_target = (s_near + ds) % 1.0 if self.path.closed else min(s_near + ds, 1.0)
        target = self._personal_point(s_target)

        # drive along the path plus the delayed transverse correction; the
        # correction is not scaled by skill (getting back on track is urgent
        # for everyone), so correction gain times reaction delay sets how
        # much an operator weaves
        cx = target[0] - p_near[0]
        cy = target[1] - p_near[1]
        cz = target[2] - p_near[2]
        cn = math.sqrt(cx * cx + cy * cy + cz * cz)
        if cn < 1e-12:  # end of an open path: aim at the endpoint
            drive = ZERO3
        else:
            a = self._ambition
            drive = (a * cx / cn, a * cy / cn, a * cz / cn)
        k = p.k_track
        corr = clamp_norm(
            (
                k * (p_near[0] - x_del[0]),
                k * (p_near[1] - x_del[1]),
                k * (p_near[2] - x_del[2]),
            ),
            CORR_MAX,
        )
        v_des = clamp_norm(
            (drive[0] + corr[0], drive[1] + corr[1], drive[2] + corr[2]),
            V_DES_MAX,
        )

        sp = math.sqrt(v_del[0] ** 2 + v_del[1] ** 2 + v_del[2] ** 2)
        sd = math.sqrt(v_des[0] ** 2 + v_des[1] ** 2 + v_des[2] ** 2)
        cosang = 1.0
        if sp > 1e-9 and sd > 1e-9:
            cosang = (v_des[0] * v_del[0] + v_des[1] * v_del[1]
                      + v_des[2] * v_del[2]) / (sp * sd)

        # pseudo-haptic adaptation: a mild deflection of the motion (without
        # being dragged) makes the operator realign with what the device is
        # doing; a strong deflection paired with a speed the operator did not
        # choose feels external and is resisted with tensed muscles. Nobody
        # resists forever: sustained fighting saps the will until the
        # operator complies, recovering only once the struggle stops.
        fighting = cosang < FIGHT_COS and (sp < 0.8 * sd or sp > DRAG_SPEED * sd)
        if fighting:
            self._futility = min(1.0, self._futility + self.dt / FUTILITY_RISE)
        else:
            self._futility = max(0.0, self._futility - self.dt / FUTILITY_FALL)
        worn_down = self._futility > 0.5
        yielding = (
            FIGHT_COS <= cosang < YIELD_COS and 1e-9 < sp <= DRAG_SPEED * sd
        ) or (fighting and worn_down and sp > 1e-9)
        if yielding:
            # worn-down compliance is grudging: half the usual realignment
            b = self._yield if not (fighting and worn_down) else 0.5 * self._yield
            scale = sd / sp
            v_des = (
                (1.0 - b) * v_des[0] + b * scale * v_del[0],
                (1.0 - b) * v_des[1] + b * scale * v_del[1],
                (1.0 - b) * v_des[2] + b * scale * v_del[2],
            )
            sd = math.sqrt(v_des[0] ** 2 + v_des[1] ** 2 + v_des[2] ** 2)

        # effort relay: push hard when motion stalls along the intent, ease
        # off when overshooting, hold firm while fighting a deflection
        if sd > 1e-9:
            if sp < PUSH_SPEED * sd and cosang >= YIELD_COS:
                self._pushing = True
            elif sp > EASE_SPEED * sd:
                self._pushing = False
        if fighting and not worn_down:
            e_target = 1.35  # co-contraction overdrive while resisting
        elif self._pushing:
            e_target = 1.0
        else:
            e_target = self._effort_floor
        self._effort += (self.dt / EFFORT_TAU) * (e_target - self._effort)

        g = self.skill_eff
        e = self._effort
        fb = g * FEEDBACK_GAIN
        fx = e * self.feel_b[0] * v_des[0] + fb * (e * v_des[0] - v_del[0])
        fy = e * self.feel_b[1] * v_des[1] + fb * (e * v_des[1] - v_del[1])
        fz = e * self.feel_b[2] * v_des[2] + fb * (e * v_des[2] - v_del[2])

        if self._noise_std > 0.0:
            decay = 1.0 - self.dt / NOISE_TAU
            kick = self._noise_std * math.sqrt(2.0 * self.dt / NOISE_TAU)
            xi = self._rng.standard_normal(3)
            n = self._noise
            n = (n[0] * decay + kick * float(xi[0]),
                 n[1] * decay + kick * float(xi[1]),
                 n[2] * decay + kick * float(xi[2]))
            self._noise = n
            tremor = 0.5 * self._noise_std * math.sin(
                2.0 * math.pi * p.tremor_hz * t + self._tremor_phase)
            fx += n[0] + tremor * self._tremor_dir[0]
            fy += n[1] + tremor * self._tremor_dir[1]
            fz += n[2] + tremor * self._tremor_dir[2]

        return clamp_norm((fx, fy, fz), p.f_max)


def default_population(master_seed: int = 20240613, n: int = 10) -> list[OperatorProfile]:
    """The shipped synthetic cohort: n operators with skill drawn uniformly
    from [0.3, 0.95] and hand penalty from [0.6, 1.0]."""
    ss = np.random.SeedSequence(master_seed)
    rng = np.random.Generator(np.random.Philox(ss))
    child_seeds = ss.spawn(n)
    profiles = []
    for i in range(n):
        skill = float(rng.uniform(0.3, 0.95))
        penalty = float(rng.uniform(0.6, 1.0))
        profiles.append(OperatorProfile(
            skill=round(skill, 4),
            reaction_delay=round(0.10 + 0.28 * (1.0 - skill) + float(rng.uniform(-0.02, 0.02)), 4),
            preview=round(0.30 + 0.20 * skill, 4),
            k_track=round(3.2 + 1.2 * (1.0 - skill), 4),
            f_max=round(float(rng.uniform(9.0, 16.0)), 2),
            noise_std=round(0.15 + 0.25 * (1.0 - skill) + float(rng.uniform(-0.03, 0.03)), 4),
            tremor_hz=round(float(rng.uniform(8.0, 12.0)), 2),
            hand_penalty=round(penalty, 4),
            seed=int(child_seeds[i].generate_state(1)[0]),
            name=f"op{i:02d}",
        ))
    return profiles

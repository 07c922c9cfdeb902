"""Closed-loop trial engine and the line-delimited telemetry format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

from .control import GATE_WINDOW_S, ControlFrame, LoopState, controller_tick
from .geometry import PathSpec, path_point, plant_step
from .operator import DOMINANT, OperatorProfile, SyntheticOperator
from .params import ControllerParams, ImpedanceParams, Mode
from .vec import ZERO3, Vec3, vec3

_AXES = {"x": 0, "y": 1, "z": 2}

TELEMETRY_MAGIC = "#! sharedctl-telemetry v1"


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """Everything one trial needs, immutable once the session starts."""

    path: PathSpec
    mode: Mode = Mode.SHARED
    params: ControllerParams = field(default_factory=ControllerParams)
    imp: ImpedanceParams = field(default_factory=ImpedanceParams)
    loops_required: int = 4
    discard_loops: int = 1
    timeout: float = 120.0
    plane_lock: str | None = "z"

    def __post_init__(self):
        if not self.loops_required > self.discard_loops >= 0:
            raise ScenarioError(
                f"need loops_required > discard_loops >= 0, "
                f"got {self.loops_required}/{self.discard_loops}"
            )
        if not self.timeout > 0.0:
            raise ScenarioError(f"timeout must be positive, got {self.timeout}")
        if self.plane_lock is not None and self.plane_lock not in _AXES:
            raise ScenarioError(f"plane_lock must be one of {sorted(_AXES)} or null")

    @property
    def lock_axis(self) -> int | None:
        return _AXES[self.plane_lock] if self.plane_lock else None


@dataclass
class TrialRecord:
    """Complete telemetry of one session."""

    frames: list[ControlFrame]
    loop_boundaries: list[int]
    completed: bool
    wall_params: Scenario
    meta: dict = field(default_factory=dict)


class TrialEngine:
    """Tick-by-tick core shared by the offline runner, the replay path and
    the live service, so no variant can drift from the others."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.x: Vec3 = path_point(scenario.path, 0.0)
        self.loop = LoopState()
        self.v_exec: Vec3 = ZERO3
        self.frames: list[ControlFrame] = []
        self.loop_boundaries: list[int] = []
        self.done = False
        self.completed = False
        self._max_ticks = int(math.ceil(scenario.timeout / scenario.params.dt))

    @property
    def tick_count(self) -> int:
        return len(self.frames)

    @property
    def sim_time(self) -> float:
        return self.tick_count * self.scenario.params.dt

    def tick(self, f: Vec3) -> ControlFrame:
        """Advance one control period with the given interaction force."""
        sc = self.scenario
        k = self.tick_count
        t = k * sc.params.dt
        frame = controller_tick(
            sc.mode, t, self.x, f, sc.path, self.loop, sc.params, sc.imp, sc.lock_axis
        )
        self.frames.append(frame)
        self.x = plant_step(self.x, frame.v_s, sc.params.dt)
        self.v_exec = frame.v_s
        if self.loop.follower.loops_completed > len(self.loop_boundaries):
            self.loop_boundaries.append(k)
        if self.loop.follower.loops_completed >= sc.loops_required:
            self.done = True
            self.completed = True
        elif self.tick_count >= self._max_ticks:
            self.done = True
        return frame

    def record(self, **meta) -> TrialRecord:
        return TrialRecord(self.frames, self.loop_boundaries, self.completed,
                           self.scenario, meta)


def run_trial(
    scenario: Scenario,
    profile: OperatorProfile,
    seed: int | None = None,
    hand: str = DOMINANT,
) -> TrialRecord:
    """Run one synthetic-operator trial to completion or timeout."""
    engine = TrialEngine(scenario)
    op = SyntheticOperator(
        profile, scenario.path, scenario.params.dt,
        hand=hand, feel_b=scenario.params.B, seed=seed,
    )
    while not engine.done:
        f = op.force(engine.x, engine.v_exec, engine.sim_time)
        engine.tick(f)
    return engine.record(profile=profile.name, hand=hand,
                         seed=profile.seed if seed is None else seed)


class StreamEngine:
    """Input-driven variant: ticks are advanced by timestamped force
    messages and are zero-order-held between them.

    The simulation clock follows the client's timestamps; a force older
    than the gate window is treated as released (zero force), after which
    the activity gate freezes motion. Feeding one message per tick, stamped
    on the tick grid, reproduces run_trial exactly.
    """

    def __init__(self, scenario: Scenario, decimation: int = 10):
        if decimation < 1:
            raise ScenarioError("decimation must be >= 1")
        self.engine = TrialEngine(scenario)
        self.decimation = decimation
        self._last_f: Vec3 = ZERO3
        self._last_f_t: float = -math.inf

    @property
    def done(self) -> bool:
        return self.engine.done

    def feed(self, t_client: float, f: Vec3) -> list[ControlFrame]:
        """Advance the loop up to t_client; returns the decimated frames."""
        f = vec3(*f)
        if not math.isfinite(t_client):
            raise ScenarioError("non-finite message timestamp")
        dt = self.engine.scenario.params.dt
        out: list[ControlFrame] = []
        # catch up to the new timestamp using the previous (held) force
        while not self.engine.done and self.engine.sim_time + dt <= t_client + dt * 1e-6:
            held = self._last_f
            if self.engine.sim_time - self._last_f_t > GATE_WINDOW_S:
                held = ZERO3  # stale hold: input considered released
            frame = self.engine.tick(held)
            if (self.engine.tick_count - 1) % self.decimation == 0:
                out.append(frame)
        self._last_f = f
        self._last_f_t = t_client
        return out

    def close(self, **meta) -> TrialRecord:
        return self.engine.record(**meta)


def stream_trial(
    scenario: Scenario,
    inputs: Iterable[tuple[float, Vec3]],
    sink: Callable[[ControlFrame], None] | None = None,
    decimation: int = 10,
) -> TrialRecord:
    """Drive a trial from timestamped (t, force) messages.

    The input iterable ending before completion leaves the trial as a
    timeout (completed=False), mirroring a dropped connection.
    """
    eng = StreamEngine(scenario, decimation)
    for t_client, f in inputs:
        for frame in eng.feed(t_client, f):
            if sink is not None:
                sink(frame)
        if eng.done:
            break
    return eng.close()


# --- telemetry serialization -------------------------------------------------

_COLUMNS = (
    "t x0 x1 x2 f0 f1 f2 vh0 vh1 vh2 vr0 vr1 vr2 vs0 vs1 vs2 "
    "eta_h eta_r eta_s s_near g0 g1 g2 mode degraded"
)


def scenario_to_meta(sc: Scenario) -> dict:
    return {
        "mode": sc.mode.value,
        "loops_required": sc.loops_required,
        "discard_loops": sc.discard_loops,
        "timeout": sc.timeout,
        "plane_lock": sc.plane_lock,
        "params": {
            "M": sc.params.M, "B": sc.params.B, "K_a": sc.params.K_a,
            "w": sc.params.w, "C": sc.params.C,
            "lambda": sc.params.lam, "rho_min": sc.params.rho_min,
            "v_max": sc.params.v_max, "filter_cutoff": sc.params.filter_cutoff,
            "dt": sc.params.dt, "activity_threshold": sc.params.activity_threshold,
            "gate_enabled": sc.params.gate_enabled,
        },
        "imp": {"deadband": sc.imp.deadband, "k_n": sc.imp.k_n,
                "v_tangent": sc.imp.v_tangent},
        "path": {"closed": sc.path.closed, "samples": [list(p) for p in sc.path.samples]},
    }


def scenario_from_meta(meta: dict) -> Scenario:
    p = meta["params"]
    return Scenario(
        path=PathSpec(tuple(tuple(q) for q in meta["path"]["samples"]),
                      closed=meta["path"]["closed"]),
        mode=Mode(meta["mode"]),
        params=ControllerParams(
            M=tuple(p["M"]), B=tuple(p["B"]), K_a=tuple(p["K_a"]),
            w=tuple(p["w"]), C=tuple(p["C"]),
            lam=p["lambda"], rho_min=p["rho_min"], v_max=p["v_max"],
            filter_cutoff=p["filter_cutoff"], dt=p["dt"],
            activity_threshold=p["activity_threshold"],
            gate_enabled=p["gate_enabled"],
        ),
        imp=ImpedanceParams(**meta["imp"]),
        loops_required=meta["loops_required"],
        discard_loops=meta["discard_loops"],
        timeout=meta["timeout"],
        plane_lock=meta["plane_lock"],
    )


def write_telemetry(record: TrialRecord, path: str) -> None:
    """One frame per line; float repr round-trips exactly, so metrics can
    be recomputed bit-identically from the file."""
    meta = {
        "scenario": scenario_to_meta(record.wall_params),
        "loop_boundaries": record.loop_boundaries,
        "completed": record.completed,
        "extra": record.meta,
    }
    with open(path, "w") as fh:
        fh.write(TELEMETRY_MAGIC + "\n")
        fh.write("#! meta " + json.dumps(meta) + "\n")
        fh.write("# " + _COLUMNS + "\n")
        for fr in record.frames:
            vals = [fr.t, *fr.x, *fr.f, *fr.v_h, *fr.v_r, *fr.v_s,
                    fr.eta_h, fr.eta_r, fr.eta_s, fr.s_near, *fr.goal]
            fh.write(" ".join(repr(v) for v in vals)
                     + f" {fr.mode.value} {int(fr.degraded)}\n")


def read_telemetry(path: str) -> TrialRecord:
    """Rebuild a TrialRecord from a telemetry file.

    Only the serialized fields are restored (v_hat_s mirrors v_s and the
    factor breakdowns are empty); every metric works on this subset.
    """
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        if magic != TELEMETRY_MAGIC:
            raise ScenarioError(f"{path}: not a telemetry file (got {magic!r})")
        meta_line = fh.readline()
        if not meta_line.startswith("#! meta "):
            raise ScenarioError(f"{path}: missing meta line")
        meta = json.loads(meta_line[len("#! meta "):])
        frames: list[ControlFrame] = []
        for line in fh:
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            nums = [float(v) for v in parts[:23]]
            frames.append(ControlFrame(
                t=nums[0],
                x=(nums[1], nums[2], nums[3]),
                f=(nums[4], nums[5], nums[6]),
                v_h=(nums[7], nums[8], nums[9]),
                v_r=(nums[10], nums[11], nums[12]),
                v_hat_s=(nums[13], nums[14], nums[15]),
                v_s=(nums[13], nums[14], nums[15]),
                eta_h=nums[16], eta_r=nums[17], eta_s=nums[18],
                eta_factors=(), alphas=(),
                goal=(nums[20], nums[21], nums[22]),
                s_near=nums[19],
                s_c=nums[19],
                mode=Mode(parts[23]),
                degraded=bool(int(parts[24])),
            ))
    scenario = scenario_from_meta(meta["scenario"])
    return TrialRecord(frames, list(meta["loop_boundaries"]), meta["completed"],
                       scenario, meta.get("extra", {}))

"""
A planar bin-grasping MDP.

The gripper moves over a square bin holding circular objects. Closing the
gripper at bin level may grasp the nearest object, lifting may drop it again,
and TERMINATE ends the episode with a binary reward for holding something.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from qtgrasp.cem.actions import ActionMode, HybridAction
from qtgrasp.exceptions import EpisodeDoneError, PlacementError
from qtgrasp.schemas import SimConfig

logger = logging.getLogger(__name__)

HOME_POSE = (0.0, 0.0, 1.0, 0.0)
Z_RANGE = (0.0, 1.0)
SENTINEL = -2.0
MAX_PLACEMENT_ATTEMPTS = 10_000


@dataclass(frozen=True)
class BinObject:
    x: float
    y: float
    radius: float
    alive: bool = True


@dataclass(frozen=True)
class WorldState:
    gripper: tuple[float, float, float, float]
    objects: tuple[BinObject, ...]
    gripper_closed: bool = False
    held_object: int | None = None
    steps_elapsed: int = 0
    done: bool = False

    @property
    def live_objects(self) -> list[int]:
        return [i for i, obj in enumerate(self.objects) if obj.alive]


def _place_objects(cfg: SimConfig, rng: np.random.Generator) -> tuple[BinObject, ...]:
    low, high = cfg.num_objects
    count = int(rng.integers(low, high + 1))
    r_low, r_high = cfg.object_radius
    placed: list[BinObject] = []
    rejections = 0
    while len(placed) < count:
        radius = float(rng.uniform(r_low, r_high))
        limit = cfg.bin_extent - radius
        x, y = (float(v) for v in rng.uniform(-limit, limit, size=2))
        if all(math.hypot(x - o.x, y - o.y) >= radius + o.radius for o in placed):
            placed.append(BinObject(x=x, y=y, radius=radius))
            continue
        rejections += 1
        if rejections >= MAX_PLACEMENT_ATTEMPTS:
            raise PlacementError(
                f"Could not place {count} objects after {rejections} rejected samples "
                f"({len(placed)} placed)."
            )
    return tuple(placed)


def observe(state: WorldState, cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Fixed-length observation: pose (4), closed flag, held flag, then
    `max_objects` slots of (x, y, radius) for live objects nearest-first,
    padded with the sentinel.
    """
    x, y, z, phi = state.gripper
    obs = np.full(6 + 3 * cfg.max_objects, SENTINEL)
    obs[:6] = (x, y, z, phi, float(state.gripper_closed), float(state.held_object is not None))

    live = [state.objects[i] for i in state.live_objects]
    live.sort(key=lambda o: math.hypot(o.x - x, o.y - y))
    live = live[: cfg.max_objects]
    if live:
        slots = np.array([(o.x, o.y, o.radius) for o in live])
        slots[:, :2] += rng.normal(0.0, cfg.obs_noise_sigma, size=(len(live), 2))
        obs[6 : 6 + 3 * len(live)] = slots.reshape(-1)
    return obs


def reset(cfg: SimConfig, seed: int) -> tuple[WorldState, np.ndarray]:
    """A fresh bin with the gripper at its home pose; deterministic given `seed`."""
    rng = np.random.default_rng(seed)
    state = WorldState(gripper=HOME_POSE, objects=_place_objects(cfg, rng))
    return state, observe(state, cfg, rng)


def _clamp_to_bin(cfg: SimConfig, obj: BinObject, x: float, y: float) -> BinObject:
    limit = cfg.bin_extent - obj.radius
    return replace(obj, x=min(max(x, -limit), limit), y=min(max(y, -limit), limit))


def _wrap_angle(phi: float) -> float:
    return (phi + math.pi) % (2.0 * math.pi) - math.pi


def _grasp(
    state: WorldState, cfg: SimConfig, rng: np.random.Generator
) -> tuple[int | None, float]:
    """Index of the grasped object (or None) and the success probability used."""
    x, y, z, _ = state.gripper
    if z > cfg.grasp_height or not state.live_objects:
        return None, 0.0
    distances = {
        i: max(0.0, math.hypot(x - state.objects[i].x, y - state.objects[i].y) - state.objects[i].radius)
        for i in state.live_objects
    }
    nearest = min(distances, key=distances.get)
    p = max(0.0, 1.0 - distances[nearest] / cfg.grasp_radius)
    p *= 1.0 - cfg.grasp_noise * float(rng.random())
    return (nearest if rng.random() < p else None), p


def step(
    state: WorldState, action: HybridAction, cfg: SimConfig, rng: np.random.Generator
) -> tuple[WorldState, np.ndarray, float, bool, dict]:
    """
    Applies one action. Non-terminal steps cost `step_penalty`; the terminal
    step pays `success_reward` (TERMINATE while holding) or 0.
    """
    if state.done:
        raise EpisodeDoneError("step() called on a finished episode; call reset() first.")

    info = {"grasped": False, "slipped": False, "success": False, "truncated": False}
    objects = list(state.objects)
    held = state.held_object
    closed = state.gripper_closed
    gripper = state.gripper
    done = False
    reward = cfg.step_penalty

    match action.mode:
        case ActionMode.MOVE:
            dx, dy, dz, dphi = (float(v) for v in action.cont)
            x, y, z, phi = gripper
            extent = cfg.bin_extent
            x = min(max(x + dx * cfg.move_scale_xy, -extent), extent)
            y = min(max(y + dy * cfg.move_scale_xy, -extent), extent)
            new_z = min(max(z + dz * cfg.move_scale_z, Z_RANGE[0]), Z_RANGE[1])
            gripper = (x, y, new_z, _wrap_angle(phi + dphi * cfg.rotate_scale))
            if held is not None:
                if new_z > z and rng.random() < cfg.slip_prob:
                    info["slipped"] = True
                    logger.debug(f"Object {held} slipped at z={new_z:.3f}")
                    held = None
                else:
                    objects[held] = _clamp_to_bin(cfg, objects[held], x, y)
        case ActionMode.CLOSE_GRIPPER:
            if not closed:
                closed = True
                grasped, _ = _grasp(state, cfg, rng)
                if grasped is not None:
                    held = grasped
                    info["grasped"] = True
        case ActionMode.OPEN_GRIPPER:
            if held is not None:
                objects[held] = _clamp_to_bin(cfg, objects[held], gripper[0], gripper[1])
            closed = False
            held = None
        case ActionMode.TERMINATE:
            done = True
            if held is not None:
                reward = cfg.success_reward
                info["success"] = True
                objects[held] = replace(objects[held], alive=False)
                held = None
            else:
                reward = 0.0

    steps = state.steps_elapsed + 1
    if not done and steps >= cfg.max_steps:
        done = True
        reward = 0.0
        info["truncated"] = True

    new_state = WorldState(
        gripper=gripper,
        objects=tuple(objects),
        gripper_closed=closed,
        held_object=held,
        steps_elapsed=steps,
        done=done,
    )
    return new_state, observe(new_state, cfg, rng), float(reward), done, info

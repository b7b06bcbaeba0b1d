"""Robot model files: UTF-8 JSON with explicit arrays.

Layout (all twists angular-first, base frame, reference configuration)::

    {
      "format": "aiik-robot-model", "version": 1,
      "name": "iiwa14",
      "joint_count": 7,
      "joint_names": ["A1", ...],
      "joint_screws": [[wx, wy, wz, vx, vy, vz], ...],
      "home_pose": {"rotation": [9 numbers, row-major], "translation": [3 numbers]},
      "task_selector": [0, 1, 2, 3, 4, 5],
      "singularities": {
        "stretched": {
          "q": [n numbers],
          "basis_dim": s,
          "basis": [[n numbers], ...],                  # s vectors
          "component_spaces": [[[n numbers], ...], ...] # optional
        }
      },
      "notes": "free text"
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kinematics import ModelError, RobotModel, builtin_model, rank_at
from .liegroup import Pose
from .tangent import (
    SingularBasis,
    closure_order,
    regularizing_perturbation,
    verify_singular_direction,
)

FORMAT = "aiik-robot-model"
VERSION = 1

NOTES = {
    "iiwa14": (
        "Base frame on the joint-2 axis, parallel to the EE frame at q = 0. "
        "EE z axis along the stretched arm, x along the joint 2/4/6 axes; this "
        "placement reproduces the reference-configuration Jacobian with "
        "a = 0.42, b = 0.4, c = 0.126."
    ),
    "planar3r": (
        "Vertical base joint, shoulder at height L1, elbow L2 above it, EE L3 "
        "above the elbow (L1 = L2 = L3 = 1). q = 0 is the upright singular pose."
    ),
}


class ModelLoadError(ValueError):
    pass


def model_to_dict(model: RobotModel) -> dict:
    sings = {}
    for name, sb in model.singularities.items():
        sings[name] = {
            "q": sb.config.tolist(),
            "basis_dim": sb.dim,
            "basis": sb.basis.T.tolist(),
            "component_spaces": [K.T.tolist() for K in sb.component_spaces],
        }
    return {
        "format": FORMAT,
        "version": VERSION,
        "name": model.name,
        "joint_count": model.n,
        "joint_names": list(model.joint_names),
        "joint_screws": model.joint_screws_ref.tolist(),
        "home_pose": {
            "rotation": model.home_pose.rotation.reshape(-1).tolist(),
            "translation": model.home_pose.translation.tolist(),
        },
        "task_selector": list(model.task_selector),
        "singularities": sings,
        "notes": NOTES.get(model.name, ""),
    }


def dumps_model(model: RobotModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def model_from_dict(d: dict) -> RobotModel:
    try:
        if d.get("format") != FORMAT:
            raise ModelLoadError(f"not a robot model file (format={d.get('format')!r})")
        if d.get("version") != VERSION:
            raise ModelLoadError(f"unsupported model file version {d.get('version')!r}")
        n = int(d["joint_count"])
        screws = np.array(d["joint_screws"], dtype=float)
        if screws.shape != (n, 6):
            raise ModelLoadError(f"joint_screws must be {n} x 6, got {screws.shape}")
        hp = d["home_pose"]
        rot = np.array(hp["rotation"], dtype=float)
        if rot.size != 9 or len(hp["translation"]) != 3:
            raise ModelLoadError("home_pose needs 9 rotation and 3 translation numbers")
        model = RobotModel(
            name=str(d["name"]),
            joint_screws_ref=screws,
            home_pose=Pose(rot.reshape(3, 3), hp["translation"]),
            task_selector=tuple(d.get("task_selector", range(6))),
            joint_names=tuple(d.get("joint_names", ())),
        )
        for name, s in d.get("singularities", {}).items():
            basis = np.array(s["basis"], dtype=float).reshape(-1, n)
            if "basis_dim" in s and basis.shape[0] != int(s["basis_dim"]):
                raise ModelLoadError(f"singularity {name!r}: basis_dim does not match basis")
            model.singularities[name] = SingularBasis(
                config=np.array(s["q"], dtype=float),
                basis=basis.T,
                component_spaces=[np.array(K, dtype=float).reshape(-1, n).T for K in s.get("component_spaces", [])],
            )
    except ModelLoadError:
        raise
    except (KeyError, TypeError, ValueError, ModelError) as exc:
        raise ModelLoadError(f"invalid model file: {exc}") from exc
    return model


def load_model(path: str | Path) -> RobotModel:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ModelLoadError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"{path}: not valid JSON ({exc})") from exc
    try:
        return model_from_dict(d)
    except ModelLoadError as exc:
        raise ModelLoadError(f"{path}: {exc}") from exc


def resolve_model(ref: str) -> RobotModel:
    """Built-in model name or path to a model file."""
    try:
        return builtin_model(ref)
    except ModelError:
        return load_model(ref)


@dataclass
class Check:
    singularity: str
    name: str
    passed: bool
    detail: str = ""


def verify_model(model: RobotModel, samples: int = 10, seed: int = 0) -> list[Check]:
    """Numerical checks of every catalogued singular basis.

    Basis directions (and random combinations of them) must stay singular,
    a transversal perturbation must regularize the Jacobian, and the
    bracket span must reach the task dimension.
    """
    rng = np.random.default_rng(seed)
    out = []
    for name, sb in model.singularities.items():
        r = rank_at(model, sb.config)
        out.append(Check(name, "singular at q", r < model.m, f"rank {r} of {model.m}"))
        dirs = [sb.basis[:, k] for k in range(sb.dim)]
        dirs += [sb.basis @ rng.normal(size=sb.dim) for _ in range(samples if sb.dim else 0)]
        bad = sum(not verify_singular_direction(model, sb.config, d) for d in dirs)
        out.append(Check(name, "basis motions stay singular", bad == 0, f"{len(dirs) - bad}/{len(dirs)} directions"))
        x = regularizing_perturbation(sb, np.full(model.n, 1e-3)).x
        r = rank_at(model, sb.config + x)
        out.append(Check(name, "transversal perturbation regularizes", r == model.m, f"rank {r} at q + x"))
        order, dims = closure_order(model, sb.config)
        out.append(Check(name, "bracket span reaches task dimension", dims[-1] == model.m, f"order {order}, dims {dims}"))
    return out

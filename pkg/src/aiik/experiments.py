"""Scenario definitions, seeded perturbation sweeps and CSV trace output.

Random perturbations come from SplitMix64 (Steele, Lea & Flood 2014), a
64-bit counter-plus-mixer generator whose output is fixed by its published
constants, so streams are bit-identical on every platform and numpy version.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .kinematics import RobotModel, forward_kinematics, iiwa14, planar3r
from .liegroup import ErrorMode, Pose
from .pinv import Damped, InverseKind, PseudoInverse
from .solver import SolveOutcome, SolverConfig, solve, solve_ai_ik, solve_perturbed

TRACE_COLUMNS = ("method", "seed", "iter", "error_norm", "step_norm", "rank", "sigma_min")
SUMMARY_COLUMNS = ("scenario", "method", "seed", "status", "final_error", "iters")

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int):
    """Infinite SplitMix64 stream of 64-bit integers."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def random_perturbations(seed: int, count: int, n: int, magnitude: float) -> list[np.ndarray]:
    """``count`` vectors with entries uniform in ``[0, magnitude)``.

    Entries use the top 53 bits of consecutive SplitMix64 outputs; vector
    ``k`` takes outputs ``k*n .. k*n + n - 1``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if not magnitude > 0:
        raise ValueError("magnitude must be positive")
    gen = splitmix64(seed)
    scale = magnitude / float(1 << 53)
    return [np.array([(next(gen) >> 11) * scale for _ in range(n)]) for _ in range(count)]


# scenarios ------------------------------------------------------------------

START_SINGULAR = "singular"
START_AIIK = "ai-ik"
START_RANDOM = "random"


def inverse_label(inv: InverseKind) -> str:
    if isinstance(inv, Damped):
        return f"DPI({inv.lam ** 2:.0e})"
    return inv.label


@dataclass(frozen=True)
class Method:
    start: str
    inverse: InverseKind

    @property
    def label(self) -> str:
        return f"{self.start}+{inverse_label(self.inverse)}"


@dataclass(frozen=True)
class SeedSpec:
    seed: int = 12345
    count: int = 20
    magnitude: float = 1e-3

    def __post_init__(self):
        if self.count < 1 or not self.magnitude > 0:
            raise ValueError("seed sweep needs count >= 1 and magnitude > 0")


@dataclass(eq=False)
class Scenario:
    """One IK problem and the methods run on it.

    The target is either ``target_pose`` relative to the start EE frame or a
    joint displacement ``target_dq`` mapped through FK. ``iterations`` is the
    plotted horizon; runs continue up to ``max_iters`` or convergence.
    """

    id: str
    robot: RobotModel
    singularity: str
    methods: list[Method]
    target_pose: Optional[Pose] = None
    target_dq: Optional[np.ndarray] = None
    epsilon: Optional[np.ndarray] = None
    iterations: int = 15
    max_iters: int = 5000
    seeds: Optional[SeedSpec] = field(default_factory=SeedSpec)
    tol: float = 1e-10
    error_mode: ErrorMode = ErrorMode.LOG
    prolonged_order: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if (self.target_pose is None) == (self.target_dq is None):
            raise ValueError("give exactly one of target_pose and target_dq")
        if self.epsilon is None:
            self.epsilon = np.full(self.robot.n, 1e-3)
        self.error_mode = ErrorMode(self.error_mode)

    @property
    def start(self) -> np.ndarray:
        return self.robot.singularities[self.singularity].config

    def target(self) -> Pose:
        if self.target_pose is not None:
            return forward_kinematics(self.robot, self.start) @ self.target_pose
        return forward_kinematics(self.robot, self.start + np.asarray(self.target_dq, dtype=float))

    def solver_config(self, inverse: InverseKind) -> SolverConfig:
        return SolverConfig(
            inverse=inverse,
            error_mode=self.error_mode,
            tol=self.tol,
            max_iters=max(self.max_iters, self.iterations),
            lockup_horizon=self.iterations,
            prolonged_order=self.prolonged_order,
        )

    def perturbations(self) -> list[np.ndarray]:
        if self.seeds is None:
            return []
        s = self.seeds
        return random_perturbations(s.seed, s.count, self.robot.n, s.magnitude)


def _standard_methods(dpi_lambda_sq=(1e-4, 1e-6)) -> list[Method]:
    main = Damped.from_lambda_sq(dpi_lambda_sq[0])
    methods = [
        Method(START_SINGULAR, main),
        Method(START_AIIK, PseudoInverse()),
        Method(START_AIIK, main),
    ]
    methods += [Method(START_RANDOM, Damped.from_lambda_sq(l2)) for l2 in dpi_lambda_sq]
    methods.append(Method(START_RANDOM, PseudoInverse()))
    return methods


def builtin_scenarios() -> list[Scenario]:
    return [
        Scenario(
            id="3r-lockup",
            robot=planar3r(),
            singularity="upright",
            methods=_standard_methods(),
            target_pose=Pose(np.eye(3), (0.0, 0.1, -0.1)),
            description="3R robot upright; EE commanded down and sideways in the y-z plane",
        ),
        Scenario(
            id="iiwa-xz",
            robot=iiwa14(),
            singularity="stretched",
            methods=_standard_methods(),
            target_pose=Pose(np.eye(3), (0.01, 0.0, -0.01)),
            description="iiwa stretched; EE translation (0.01, 0, -0.01) m, no rotation",
        ),
        Scenario(
            id="iiwa-general",
            robot=iiwa14(),
            singularity="stretched",
            methods=_standard_methods(),
            target_dq=np.array([0.01, 0.01, 0.05, 0.01, 0.01, 0.01, 0.05]),
            description="iiwa stretched; target f(q0 + dq_d)",
        ),
    ]


def get_scenario(scenario_id: str) -> Scenario:
    for s in builtin_scenarios():
        if s.id == scenario_id:
            return s
    raise KeyError(f"unknown scenario {scenario_id!r}")


def with_overrides(
    s: Scenario,
    iterations: Optional[int] = None,
    max_iters: Optional[int] = None,
    lambda_sq: Optional[float] = None,
    epsilon: Optional[float] = None,
    seed: Optional[int] = None,
    seeds_count: Optional[int] = None,
    error_mode: Optional[str] = None,
    prolonged_order: Optional[int] = None,
) -> Scenario:
    """Copy of ``s`` with CLI-level overrides applied.

    ``lambda_sq`` replaces every damped method's factor (duplicates dropped);
    ``epsilon`` sets both the AI-IK seed vector and the random magnitude.
    """
    kw = {}
    if iterations is not None:
        kw["iterations"] = iterations
    if max_iters is not None:
        kw["max_iters"] = max_iters
    if error_mode is not None:
        kw["error_mode"] = ErrorMode(error_mode)
    if prolonged_order is not None:
        kw["prolonged_order"] = prolonged_order
    if lambda_sq is not None:
        methods = []
        for m in s.methods:
            if isinstance(m.inverse, Damped):
                m = Method(m.start, Damped.from_lambda_sq(lambda_sq))
            if m not in methods:
                methods.append(m)
        kw["methods"] = methods
    seeds = s.seeds
    if seeds is not None:
        if seed is not None:
            seeds = replace(seeds, seed=seed)
        if seeds_count is not None:
            seeds = replace(seeds, count=seeds_count)
        if epsilon is not None:
            seeds = replace(seeds, magnitude=epsilon)
        kw["seeds"] = seeds
    if epsilon is not None:
        kw["epsilon"] = np.full(s.robot.n, epsilon)
    return replace(s, **kw)


# running --------------------------------------------------------------------


@dataclass(eq=False)
class RunRecord:
    scenario: str
    method: str
    seed: Optional[int]
    outcome: SolveOutcome
    wall_time: float

    def sort_key(self):
        return (self.scenario, self.method, -1 if self.seed is None else self.seed)


def run_method(s: Scenario, method: Method, C_d: Pose, eps=None) -> SolveOutcome:
    cfg = s.solver_config(method.inverse)
    q0 = s.start
    if method.start == START_SINGULAR:
        return solve(s.robot, q0, C_d, cfg)
    if method.start == START_AIIK:
        return solve_ai_ik(s.robot, q0, C_d, s.robot.singularities[s.singularity], s.epsilon, cfg)
    if method.start == START_RANDOM:
        return solve_perturbed(s.robot, q0, C_d, eps, cfg)
    raise ValueError(f"unknown start {method.start!r}")


def run_scenario(s: Scenario) -> list[RunRecord]:
    """Every method (and every seed for random starts); never aborts on a run."""
    C_d = s.target()
    perts = s.perturbations()
    records = []
    for method in s.methods:
        jobs = list(enumerate(perts)) if method.start == START_RANDOM else [(None, None)]
        for k, eps in jobs:
            t0 = time.perf_counter()
            outcome = run_method(s, method, C_d, eps)
            records.append(RunRecord(s.id, method.label, k, outcome, time.perf_counter() - t0))
    records.sort(key=RunRecord.sort_key)
    return records


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_traces(records: list[RunRecord], path: str | Path, scenario_ids: Optional[list[str]] = None) -> list[Path]:
    """Write ``<scenario>_traces.csv`` per scenario plus ``summary.csv``.

    ``seed`` is the index of the random vector in the seeded stream (empty
    for deterministic starts). Floats carry 17 significant digits.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    records = sorted(records, key=RunRecord.sort_key)
    ids = list(dict.fromkeys([*(scenario_ids or []), *(r.scenario for r in records)]))
    written = []

    def _open(p: Path):
        try:
            return p.open("w", newline="", encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {p}: {exc.strerror}") from exc

    for sid in ids:
        p = out / f"{sid}_traces.csv"
        with _open(p) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for r in records:
                if r.scenario != sid:
                    continue
                seed = "" if r.seed is None else r.seed
                for t in r.outcome.trace.records:
                    w.writerow([r.method, seed, t.iter, _fmt(t.error_norm), _fmt(t.step_norm), t.rank, _fmt(t.sigma_min)])
        written.append(p)
    p = out / "summary.csv"
    with _open(p) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in records:
            o = r.outcome
            seed = "" if r.seed is None else r.seed
            final = _fmt(o.final_error) if o.trace.records else "nan"
            iters = o.iterations if o.trace.records else 0
            w.writerow([r.scenario, r.method, seed, o.status.value, final, iters])
    written.append(p)
    return written


def read_traces(path: str | Path) -> list[dict]:
    """Parse a traces CSV back into typed rows."""
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "method": row["method"],
                    "seed": int(row["seed"]) if row["seed"] else None,
                    "iter": int(row["iter"]),
                    "error_norm": float(row["error_norm"]),
                    "step_norm": float(row["step_norm"]),
                    "rank": int(row["rank"]),
                    "sigma_min": float(row["sigma_min"]),
                }
            )
    return rows


def read_summary(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            row["seed"] = int(row["seed"]) if row["seed"] else None
            row["final_error"] = float(row["final_error"])
            row["iters"] = int(row["iters"])
            rows.append(row)
    return rows

"""Convergence studies: L2 errors, observed orders and report files."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from fracflow.fe_space import (
    DofMap,
    ElementPair,
    build_dofmap,
    eval_flux,
    eval_scalar,
    flux_at_rule,
    quadrature_points,
    scalar_at_rule,
)
from fracflow.mesh import Mesh, level_mesh, level_to_n
from fracflow.problems import DEFAULT_TERMS, ProblemSpec, get_problem
from fracflow.quadrature import rule
from fracflow.stepper import SchemeConfig, run

log = logging.getLogger(__name__)

CSV_HEADER = ["case", "alpha", "element", "level_or_n", "h_or_tau", "err_u", "oc_u", "err_sigma", "oc_sigma"]
ERROR_DEGREE = 8


@dataclass(frozen=True, eq=False)
class DiscreteSolution:
    dofmap: DofMap
    u: np.ndarray
    flux: np.ndarray

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh


def _weights(mesh: Mesh, qr) -> np.ndarray:
    return qr.weights[None, :] * np.abs(mesh.dets)[:, None]


def l2_error_scalar(mesh: Mesh, pair, coeffs, exact, degree: int = ERROR_DEGREE) -> float:
    """sqrt(sum_K int_K (u_h - u)^2) with ``exact(x, y)`` evaluated on a degree-8 rule."""
    dm = build_dofmap(mesh, pair)
    qr = rule(degree)
    pts = quadrature_points(mesh, qr)
    diff = scalar_at_rule(dm, coeffs, qr) - np.asarray(exact(pts[..., 0], pts[..., 1]))
    return math.sqrt(float(np.sum(_weights(mesh, qr) * diff**2)))


def l2_error_flux(mesh: Mesh, pair, coeffs, exact, degree: int = ERROR_DEGREE) -> float:
    """Same as ``l2_error_scalar`` for a vector field; ``exact`` returns shape (..., 2)."""
    dm = build_dofmap(mesh, pair)
    qr = rule(degree)
    pts = quadrature_points(mesh, qr)
    diff = flux_at_rule(dm, coeffs, qr) - np.asarray(exact(pts[..., 0], pts[..., 1]))
    return math.sqrt(float(np.sum(_weights(mesh, qr)[..., None] * diff**2)))


def reference_compare(coarse: DiscreteSolution, ref: DiscreteSolution, degree: int = ERROR_DEGREE) -> tuple[float, float]:
    """L2 distances (u, sigma) between a coarse solution and a solution on a nested finer mesh.

    Integration runs over the fine triangles, each of which lies inside one
    coarse triangle, so both fields are polynomial on every integration cell.
    """
    cm, fm = coarse.mesh, ref.mesh
    if fm.n < cm.n or fm.n % cm.n:
        raise ValueError(f"meshes are not nested (n={cm.n} vs reference n={fm.n})")
    if coarse.dofmap.pair is not ref.dofmap.pair:
        raise ValueError("solutions use different element pairs")
    qr = rule(degree)
    pts = quadrature_points(fm, qr).reshape(-1, 2)
    tri = cm.locate(pts)
    xi = cm.to_reference(pts, tri)
    w = _weights(fm, qr)
    du = eval_scalar(coarse.dofmap, coarse.u, tri, xi).reshape(w.shape) - scalar_at_rule(ref.dofmap, ref.u, qr)
    ds = eval_flux(coarse.dofmap, coarse.flux, tri, xi).reshape(w.shape + (2,)) - flux_at_rule(ref.dofmap, ref.flux, qr)
    return math.sqrt(float(np.sum(w * du**2))), math.sqrt(float(np.sum(w[..., None] * ds**2)))


@dataclass(frozen=True)
class StudyConfig:
    example: int
    alphas: tuple = (0.3, 0.7)
    element: str = "rt1"
    axis: str = "space"
    levels: tuple = (1, 2, 3, 4)
    nsteps: tuple = (10, 20, 40, 80, 160)
    tau: float | None = None
    level: int = 5
    ref_level: int | None = None
    T: float = 0.5
    series_m: int = DEFAULT_TERMS
    convention: str = "separable"

    def __post_init__(self):
        object.__setattr__(self, "element", ElementPair.parse(self.element).value)
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "levels", tuple(int(v) for v in self.levels))
        object.__setattr__(self, "nsteps", tuple(int(v) for v in self.nsteps))
        if self.axis not in ("space", "time"):
            raise ValueError(f"study axis must be 'space' or 'time', got {self.axis!r}")
        if self.example not in (1, 2, 3):
            raise ValueError(f"unknown example {self.example}")
        seq = self.levels if self.axis == "space" else self.nsteps
        if not seq or any(b <= a for a, b in zip(seq, seq[1:])):
            raise ValueError("levels / step counts must be strictly increasing")
        if self.axis == "space":
            if self.tau is None:
                object.__setattr__(self, "tau", default_tau(self.example))
            self.space_steps()
            if self.example == 1:
                ref = self.reference_level
                if ref <= max(self.levels):
                    raise ValueError(f"reference level {ref} must exceed every study level")
        elif self.example == 1:
            raise ValueError("time studies need an exact solution (examples 2 and 3)")

    @property
    def pair(self) -> ElementPair:
        return ElementPair.parse(self.element)

    @property
    def reference_level(self) -> int:
        if self.ref_level is not None:
            return self.ref_level
        return 6 if self.pair is ElementPair.RT0_P0 else 5

    def space_steps(self) -> int:
        N = round(self.T / self.tau)
        if N < 1 or abs(N * self.tau - self.T) > 1e-9 * self.T:
            raise ValueError(f"tau={self.tau} does not divide T={self.T}")
        return N


def default_tau(example: int) -> float:
    return 6.25e-4 if example == 3 else 1.0 / 1200.0


@dataclass
class ReportRow:
    case: str
    alpha: float
    element: str
    level_or_n: int
    h_or_tau: float
    err_u: float
    oc_u: float | None = None
    err_sigma: float = float("nan")
    oc_sigma: float | None = None
    failed: bool = False
    message: str = ""


@dataclass
class ConvergenceReport:
    rows: list[ReportRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(r.failed for r in self.rows)

    def select(self, alpha: float) -> list[ReportRow]:
        return [r for r in self.rows if r.alpha == alpha]

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        return cls([ReportRow(**r) for r in d["rows"]], dict(d.get("metadata", {})))

    def __eq__(self, other):
        if not isinstance(other, ConvergenceReport):
            return NotImplemented
        return json.dumps(self.to_dict(), sort_keys=True) == json.dumps(other.to_dict(), sort_keys=True)


def observed_order(e_prev: float, e: float, s_prev: float, s: float) -> float | None:
    if not (e_prev > 0 and e > 0) or not (math.isfinite(e_prev) and math.isfinite(e)):
        return None
    return math.log(e_prev / e) / math.log(s_prev / s)


def fill_orders(rows: list[ReportRow]) -> None:
    """Observed orders between consecutive rows of the same alpha."""
    prev: dict[float, ReportRow] = {}
    for r in rows:
        p = prev.get(r.alpha)
        if p is None or r.failed or p.failed:
            r.oc_u = r.oc_sigma = None
        else:
            r.oc_u = observed_order(p.err_u, r.err_u, p.h_or_tau, r.h_or_tau)
            r.oc_sigma = observed_order(p.err_sigma, r.err_sigma, p.h_or_tau, r.h_or_tau)
        prev[r.alpha] = r


def solve(problem: ProblemSpec, level: int, pair, N: int) -> DiscreteSolution:
    cfg = SchemeConfig(problem.alpha, problem.T, N, pair)
    state = run(problem, level_mesh(level), pair, cfg)
    return DiscreteSolution(state.dofmap, state.u, state.flux)


def exact_errors(problem: ProblemSpec, sol: DiscreteSolution) -> tuple[float, float]:
    qr = rule(ERROR_DEGREE)
    mesh = sol.mesh
    pts = quadrature_points(mesh, qr)
    ev = problem.series.evaluator(pts[..., 0], pts[..., 1])
    w = _weights(mesh, qr)
    du = scalar_at_rule(sol.dofmap, sol.u, qr) - ev.u(problem.T)
    ds = flux_at_rule(sol.dofmap, sol.flux, qr) - ev.flux(problem.T)
    return math.sqrt(float(np.sum(w * du**2))), math.sqrt(float(np.sum(w[..., None] * ds**2)))


def _problem(cfg: StudyConfig, alpha: float) -> ProblemSpec:
    p = get_problem(cfg.example, alpha, cfg.series_m, cfg.convention)
    if p.T != cfg.T:
        p = replace(p, T=cfg.T)
    return p


def _failed_row(case, alpha, element, key, scale, exc) -> ReportRow:
    log.error("%s alpha=%s %s=%s failed: %s", case, alpha, "level", key, exc)
    return ReportRow(case, alpha, element, key, scale, float("nan"), failed=True, message=str(exc))


def _metadata(cfg: StudyConfig, started: float) -> dict:
    meta = asdict(cfg)
    meta["alphas"] = list(cfg.alphas)
    meta["levels"] = list(cfg.levels)
    meta["nsteps"] = list(cfg.nsteps)
    if cfg.example == 1 and cfg.axis == "space":
        meta["ref_level"] = cfg.reference_level
    meta["wall_clock_s"] = round(time.perf_counter() - started, 3)
    return meta


def space_study(cfg: StudyConfig) -> ConvergenceReport:
    if cfg.axis != "space":
        raise ValueError("not a space study")
    started = time.perf_counter()
    N = cfg.space_steps()
    case = f"example{cfg.example}"
    rows = []
    for alpha in cfg.alphas:
        problem = _problem(cfg, alpha)
        ref = None
        if cfg.example == 1:
            try:
                ref = solve(problem, cfg.reference_level, cfg.pair, N)
            except Exception as exc:  # noqa: BLE001 - recorded per row
                rows += [_failed_row(case, alpha, cfg.element, L, 1.0 / level_to_n(L), exc) for L in cfg.levels]
                continue
        for L in cfg.levels:
            h = 1.0 / level_to_n(L)
            try:
                sol = solve(problem, L, cfg.pair, N)
                eu, es = reference_compare(sol, ref) if ref is not None else exact_errors(problem, sol)
            except Exception as exc:  # noqa: BLE001
                rows.append(_failed_row(case, alpha, cfg.element, L, h, exc))
                continue
            log.info("%s alpha=%g level=%d err_u=%.3e err_sigma=%.3e", case, alpha, L, eu, es)
            rows.append(ReportRow(case, alpha, cfg.element, L, h, eu, err_sigma=es))
    fill_orders(rows)
    return ConvergenceReport(rows, _metadata(cfg, started))


def time_study(cfg: StudyConfig) -> ConvergenceReport:
    if cfg.axis != "time":
        raise ValueError("not a time study")
    started = time.perf_counter()
    case = f"example{cfg.example}"
    rows = []
    for alpha in cfg.alphas:
        problem = _problem(cfg, alpha)
        for N in cfg.nsteps:
            tau = cfg.T / N
            try:
                sol = solve(problem, cfg.level, cfg.pair, N)
                eu, es = exact_errors(problem, sol)
            except Exception as exc:  # noqa: BLE001
                rows.append(_failed_row(case, alpha, cfg.element, N, tau, exc))
                continue
            log.info("%s alpha=%g N=%d err_u=%.3e", case, alpha, N, eu)
            rows.append(ReportRow(case, alpha, cfg.element, N, tau, eu, err_sigma=es))
    fill_orders(rows)
    return ConvergenceReport(rows, _metadata(cfg, started))


def run_study(cfg: StudyConfig) -> ConvergenceReport:
    return space_study(cfg) if cfg.axis == "space" else time_study(cfg)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(report: ConvergenceReport, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.rows:
            w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(report: ConvergenceReport, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report.to_dict(), indent=2, allow_nan=True) + "\n")
    return path


def read_json(path) -> ConvergenceReport:
    return ConvergenceReport.from_dict(json.loads(Path(path).read_text()))


_PLOT_TEMPLATE = '''"""Log-log convergence plot. Run with: python {name}"""
import matplotlib.pyplot as plt

data = {data!r}
axis = {axis!r}

fig, ax = plt.subplots()
for alpha, rows in sorted(data.items()):
    s = [r[0] for r in rows]
    ax.loglog(s, [r[1] for r in rows], "o-", label=f"u, alpha={{alpha}}")
    ax.loglog(s, [r[2] for r in rows], "s--", label=f"sigma, alpha={{alpha}}")
if data:
    s = [r[0] for r in next(iter(data.values()))]
    e0 = max(r[1] for rows in data.values() for r in rows)
    for slope in (1, 2):
        ax.loglog(s, [e0 * (v / s[0]) ** slope for v in s], ":", color="gray", label=f"slope {{slope}}")
ax.set_xlabel("h" if axis == "space" else "tau")
ax.set_ylabel("L2 error")
ax.legend()
fig.savefig({png!r}, dpi=150)
'''


def write_plot_script(report: ConvergenceReport, path) -> Path:
    path = Path(path)
    data: dict = {}
    for r in report.rows:
        if not r.failed:
            data.setdefault(r.alpha, []).append((r.h_or_tau, r.err_u, r.err_sigma))
    text = _PLOT_TEMPLATE.format(
        name=path.name, data=data, axis=report.metadata.get("axis", "space"), png=str(path.with_suffix(".png"))
    )
    path.write_text(text)
    return path


def emit_report(report: ConvergenceReport, csv_path=None, json_path=None, plot_path=None) -> list[Path]:
    written = []
    for p, writer in ((csv_path, write_csv), (json_path, write_json), (plot_path, write_plot_script)):
        if p is None:
            continue
        try:
            written.append(writer(report, p))
        except OSError as exc:
            raise OSError(f"cannot write report to {p}: {exc}") from exc
    return written

"""Objective evaluation: Cp/Cd from pressure probes, the synthetic quasi-physics
oracle that stands in for CFD at desk scale, CFD result-file ingestion and the
grid convergence index."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import geometry
from .geometry import DraftTubeDesign, GeometryError

__all__ = [
    "EvaluationError",
    "FlowProbe",
    "ObjectivePair",
    "GciReport",
    "pressure_recovery",
    "drag_coefficient",
    "OracleConstants",
    "design_features",
    "objectives_from_features",
    "synthetic_cfd",
    "ingest_csv",
    "write_dataset_csv",
    "gci",
]


class EvaluationError(ValueError):
    """Raised for invalid probe data, malformed result files or bad GCI input."""


# ---------------------------------------------------------------------------
# Pressure-probe coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowProbe:
    """Inlet/outlet pressure probes: static and total pressure in Pa."""

    p_s1: float
    p_s2: float
    p_t1: float
    p_t2: float
    rho: float
    u: float

    def __post_init__(self):
        if self.rho <= 0:
            raise EvaluationError("density must be positive")
        if self.u <= 0:
            raise EvaluationError("reference velocity must be positive")


@dataclass(frozen=True)
class ObjectivePair:
    cp: float
    cd: float

    def __post_init__(self):
        if not (math.isfinite(self.cp) and math.isfinite(self.cd)):
            raise EvaluationError("objectives must be finite")


def pressure_recovery(probe: FlowProbe) -> float:
    """Pressure recovery factor: static-pressure rise over inlet dynamic pressure."""
    return (probe.p_s2 - probe.p_s1) / (0.5 * probe.rho * probe.u ** 2)


def drag_coefficient(probe: FlowProbe) -> float:
    """Drag coefficient: total-pressure loss over inlet dynamic pressure.

    A negative value (total pressure gain) is non-physical; it is returned
    as-is with a warning.
    """
    cd = (probe.p_t1 - probe.p_t2) / (0.5 * probe.rho * probe.u ** 2)
    if cd < 0:
        warnings.warn("negative drag coefficient: total pressure increased "
                      "through the duct", stacklevel=2)
    return cd


# ---------------------------------------------------------------------------
# Synthetic oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleConstants:
    """Calibrated constants of the synthetic evaluator.

    The values are fixtures calibrated so the packaged reference design maps
    to (Cp, Cd) = (0.819, 0.131); recalibration is a data change.
    """

    diffusion_gain: float
    friction_coefficient: float
    slope_weight: float
    curvature_weight: float

    @classmethod
    def load(cls, path=None) -> "OracleConstants":
        if path is None:
            path = resources.files("drafttube").joinpath("data/oracle_constants.json")
        with open(path) as fh:
            raw = json.load(fh)
        return cls(**{k: raw[k] for k in (
            "diffusion_gain", "friction_coefficient", "slope_weight",
            "curvature_weight")})


def _curvature_penalty(design: DraftTubeDesign) -> float:
    """RMS second derivative of the roof, floor and width profiles."""
    xs, roof_y, floor_y, w = geometry.station_profiles(design)
    total = 0.0
    for prof in (roof_y, floor_y, w):
        d2 = np.gradient(np.gradient(prof, xs), xs)
        total += float(np.sqrt(np.mean(d2 ** 2)))
    return total / 3.0


def design_features(design: DraftTubeDesign) -> dict:
    """Scalar features the oracle maps to objectives."""
    feats = geometry.areas(design)
    feats["curvature"] = _curvature_penalty(design)
    # Hydraulic diameter of the (fixed) circular inlet.
    feats["D_h"] = 2.0 * design.sections[0].w
    return feats


def objectives_from_features(feats: dict, constants: OracleConstants) -> ObjectivePair:
    """Deterministic smooth map from geometric features to (Cp, Cd).

    Cp follows the ideal-diffuser area-ratio term minus a curvature loss;
    Cd combines a frictional length term, a squared wall-slope loss and the
    same curvature loss.
    """
    ratio = feats["A_in"] / feats["A_out"]
    if ratio <= 0:
        raise GeometryError("degenerate area ratio")
    cp = (constants.diffusion_gain * (1.0 - ratio ** 2)
          - constants.curvature_weight * feats["curvature"])
    cd = (constants.friction_coefficient * feats["length"] / feats["D_h"]
          + constants.slope_weight * feats["mean_slope"] ** 2
          + constants.curvature_weight * feats["curvature"])
    return ObjectivePair(cp, cd)


def synthetic_cfd(design: DraftTubeDesign,
                  constants: OracleConstants | None = None) -> ObjectivePair:
    """Evaluate a synthesized design with the synthetic quasi-physics oracle."""
    if constants is None:
        constants = OracleConstants.load()
    return objectives_from_features(design_features(design), constants)


# ---------------------------------------------------------------------------
# Result-file ingestion
# ---------------------------------------------------------------------------

def ingest_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a result file with header x1..xm,cp,cd into (X, Y) arrays.

    Lines starting with '#' are lineage comments and are skipped. Malformed
    rows and non-finite values raise with the offending line number.
    """
    with open(path, newline="") as fh:
        lines = [(i + 1, ln) for i, ln in enumerate(fh)
                 if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise EvaluationError(f"{path}: empty result file")
    header = [c.strip() for c in lines[0][1].strip().split(",")]
    m = len(header) - 2
    if m not in (14, 18) or header != [f"x{j + 1}" for j in range(m)] + ["cp", "cd"]:
        raise EvaluationError(
            f"{path}: header must be x1..xm,cp,cd with m in (14, 18); got {header}")
    X, Y = [], []
    for lineno, ln in lines[1:]:
        parts = ln.strip().split(",")
        if len(parts) != m + 2:
            raise EvaluationError(f"{path}:{lineno}: expected {m + 2} columns, "
                                  f"got {len(parts)}")
        try:
            vals = [float(v) for v in parts]
        except ValueError as exc:
            raise EvaluationError(f"{path}:{lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise EvaluationError(f"{path}:{lineno}: non-finite value")
        X.append(vals[:m])
        Y.append(vals[m:])
    return np.array(X), np.array(Y)


def write_dataset_csv(path, X: np.ndarray, Y: np.ndarray,
                      header_comment: str = "") -> None:
    """Write features and (cp, cd) targets in the ingest_csv format.

    Values are written with repr-level precision so a write-read round trip
    is bit-identical.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(X.shape[1])] + ["cp", "cd"])
        for xrow, yrow in zip(X, Y):
            writer.writerow([f"{v:.17g}" for v in xrow]
                            + [f"{v:.17g}" for v in yrow])


# ---------------------------------------------------------------------------
# Grid convergence index
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GciReport:
    eps_cm: float
    eps_mf: float
    r: float
    F_s: float
    p_gci: float
    gci_cm: float
    gci_mf: float
    asymptotic_ratio: float

    def as_rows(self) -> list[tuple[str, float]]:
        return [("eps_cm_pct", self.eps_cm), ("eps_mf_pct", self.eps_mf),
                ("r", self.r), ("F_s", self.F_s), ("p", self.p_gci),
                ("GCI_cm_pct", self.gci_cm), ("GCI_mf_pct", self.gci_mf),
                ("asymptotic_ratio", self.asymptotic_ratio)]


def gci(eps_cm: float, eps_mf: float, r: float, F_s: float = 1.25,
        trend: str = "decreasing") -> GciReport:
    """Three-grid convergence index from percent relative differences.

    ``eps_cm`` and ``eps_mf`` are |coarser - finer| / finer * 100 for the
    coarse-medium and medium-fine pairs. Because each epsilon is normalized
    by its own finer-grid solution, the raw solution-difference ratio that
    sets the observed order p depends on the monotone convergence trend:

    - ``trend="decreasing"`` (solution falls under refinement, so the
      medium solution exceeds the fine one): ratio x (1 + eps_mf / 100)
    - ``trend="increasing"``: ratio x (1 - eps_mf / 100)
    - ``trend="shared"``: both epsilons normalized by one common value,
      p = ln(eps_cm / eps_mf) / ln(r) exactly.
    """
    if eps_cm <= 0 or eps_mf <= 0:
        raise EvaluationError("relative differences must be positive")
    if r <= 1:
        raise EvaluationError("refinement ratio must exceed 1")
    if F_s < 1:
        raise EvaluationError("safety factor must be >= 1")
    ratio = eps_cm / eps_mf
    if trend == "decreasing":
        ratio *= 1.0 + eps_mf / 100.0
    elif trend == "increasing":
        if eps_mf >= 100.0:
            raise EvaluationError("eps_mf must stay below 100% for an "
                                  "increasing trend")
        ratio *= 1.0 - eps_mf / 100.0
    elif trend != "shared":
        raise EvaluationError(f"unknown trend {trend!r}")
    if ratio <= 1.0:
        raise EvaluationError("difference ratio must exceed 1: the grid "
                              "study is not in the asymptotic range")
    p = math.log(ratio) / math.log(r)
    denom = r ** p - 1.0
    gci_cm = F_s * eps_cm / denom
    gci_mf = F_s * eps_mf / denom
    asym = gci_cm / (r ** p * gci_mf)
    return GciReport(eps_cm, eps_mf, r, F_s, p, gci_cm, gci_mf, asym)

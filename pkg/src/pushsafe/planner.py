"""Risk-ordered experiment campaigns with stop-on-failure execution."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import PushSafeError
from .model import ALPHA_TOL_DEG, VehicleParams
from .safety import ActuationLimits, Assessment, Zone, calibrate_limits, classify

#: Surface angles and roll angles of the reference validation campaign [deg].
REFERENCE_BETAS = (10.0, 30.0, 60.0, 80.0, 90.0)
REFERENCE_PHIS = (5.0, 10.0, 15.0)


def reference_grid() -> list[tuple[float, float]]:
    return [(b, p) for b in REFERENCE_BETAS for p in REFERENCE_PHIS]


@dataclass(frozen=True)
class ExperimentCase:
    beta0: float
    phi0: float
    assessment: Assessment

    @property
    def zone(self) -> Zone:
        return self.assessment.zone

    @property
    def lam(self) -> float | None:
        return self.assessment.lam


@dataclass(frozen=True)
class CampaignPlan:
    cases: tuple[ExperimentCase, ...]
    excluded: tuple[ExperimentCase, ...] = ()

    def __iter__(self):
        return iter(self.cases)

    def __len__(self):
        return len(self.cases)


class Outcome(str, enum.Enum):
    SUCCESS = "executed-success"
    FAILURE = "executed-failure"
    SKIPPED = "skipped"


@dataclass
class CampaignReport:
    entries: list[tuple[ExperimentCase, Outcome]] = field(default_factory=list)
    stop_index: int | None = None
    aborted: bool = False

    @property
    def outcomes(self) -> list[Outcome]:
        return [o for _, o in self.entries]

    @property
    def executed(self) -> list[ExperimentCase]:
        return [c for c, o in self.entries if o is not Outcome.SKIPPED]


class CampaignAborted(PushSafeError):
    """The evaluator raised; ``report`` holds what had run until then."""

    def __init__(self, message: str, report: CampaignReport):
        super().__init__(message)
        self.report = report


def _assess(beta0, phi0, params, limits, phi_u_mode) -> Assessment:
    # At or past the singular joint angle no equilibrium exists: infeasible.
    if phi0 >= beta0 - ALPHA_TOL_DEG and 0.0 < beta0 <= 90.0 and phi0 >= 0.0:
        return Assessment(Zone.FAILURE, math.inf)
    return classify(beta0, phi0, params, limits, phi_u_mode)


def build_plan(
    cases: Iterable[tuple[float, float]],
    params: VehicleParams = VehicleParams(),
    limits: ActuationLimits | None = None,
    phi_u_mode: str = "continuous",
) -> CampaignPlan:
    """Order cases: safe first, then critical by ascending risk; drop failures.

    Safe cases run in ascending (beta0, phi0).  Equal risk levels fall back to
    the same key, so the plan depends only on the set of cases.  Roll angles
    at or beyond the joint singularity count as failures.
    """
    limits = limits or calibrate_limits(params)
    assessed = [ExperimentCase(float(b), float(p), _assess(float(b), float(p), params, limits, phi_u_mode))
                for b, p in cases]
    safe = sorted((c for c in assessed if c.zone is Zone.SAFE), key=lambda c: (c.beta0, c.phi0))
    critical = sorted((c for c in assessed if c.zone is Zone.CRITICAL), key=lambda c: (c.lam, c.beta0, c.phi0))
    failed = sorted((c for c in assessed if c.zone is Zone.FAILURE), key=lambda c: (c.beta0, c.phi0))
    return CampaignPlan(cases=tuple(safe + critical), excluded=tuple(failed))


def execute_plan(plan: CampaignPlan | Sequence[ExperimentCase],
                 evaluator: Callable[[ExperimentCase], bool]) -> CampaignReport:
    """Run cases in plan order; everything after the first failure is skipped.

    ``evaluator`` returns True for a successful case.  If it raises, the
    remaining cases are marked skipped and :class:`CampaignAborted` carries
    the partial report.
    """
    cases = list(plan)
    report = CampaignReport()
    for i, case in enumerate(cases):
        if report.stop_index is not None:
            report.entries.append((case, Outcome.SKIPPED))
            continue
        try:
            ok = bool(evaluator(case))
        except Exception as exc:
            report.aborted = True
            report.stop_index = i
            report.entries.extend((c, Outcome.SKIPPED) for c in cases[i:])
            raise CampaignAborted(f"evaluator raised on case {i} ({case.beta0}, {case.phi0})", report) from exc
        if ok:
            report.entries.append((case, Outcome.SUCCESS))
        else:
            report.entries.append((case, Outcome.FAILURE))
            report.stop_index = i
    return report


def simulator_evaluator(params: VehicleParams = VehicleParams(), limits: ActuationLimits | None = None,
                        config=None) -> Callable[[ExperimentCase], bool]:
    """Evaluator that flies each case in the contact simulator."""
    from .model import OperationPoint
    from .sim import SimConfig, run_to_equilibrium

    limits = limits or calibrate_limits(params)
    config = config or SimConfig()

    def evaluate(case: ExperimentCase) -> bool:
        return run_to_equilibrium(OperationPoint(case.beta0, case.phi0), params, limits, config).converged

    return evaluate

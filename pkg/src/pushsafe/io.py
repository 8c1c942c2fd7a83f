"""Configuration loading, CSV/JSON emission and flight-log validation.

CSV conventions: comma separator, ``.`` decimal point, one header row, LF
line endings.  Floats are written with ``repr`` so every value re-parses to
the identical double.  Angles are in degrees, forces in newtons.

Flight logs may record surface and roll angles in the inertial frame with a
negative sign (both share the sign of the surface tilt).  The loader keeps
magnitudes only, matching the sign-free convention of the model.
"""
from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO

import numpy as np

from .errors import ConfigError
from .kernels import TRACE_COLUMNS
from .model import ALPHA_TOL_DEG, OperationPoint, VehicleParams, contact_force, equilibrium_grid
from .planner import CampaignPlan, CampaignReport, ExperimentCase
from .safety import PUBLISHED_ZONES, ActuationLimits, Assessment, Zone, ZoneBoundaries, calibrate_limits
from .sim import SimConfig

CONFIG_ENV = "PUSHSAFE_CONFIG"

# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    vehicle: VehicleParams = VehicleParams()
    C_h: float = 0.61
    eta: float = 0.7
    sim: SimConfig = SimConfig()
    cases: tuple[tuple[float, float], ...] = ()
    betas: tuple[float, ...] = (10.0, 30.0, 60.0, 80.0, 90.0)

    @property
    def limits(self) -> ActuationLimits:
        return calibrate_limits(self.vehicle, self.C_h, self.eta)


_SECTIONS = {
    "vehicle": {f.name for f in dataclasses.fields(VehicleParams)},
    "limits": {"C_h", "eta"},
    "sim": {f.name for f in dataclasses.fields(SimConfig)},
}
_TOP_LEVEL = {"cases", "betas"}


def _coerce_number(key: str, value: Any, integer: bool = False):
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    try:
        if integer:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _parse_cases(value: Any) -> tuple[tuple[float, float], ...]:
    if isinstance(value, str):
        items = [tok.strip() for tok in value.split(",") if tok.strip()]
        out = []
        for tok in items:
            parts = tok.split(":")
            if len(parts) != 2:
                raise ConfigError(f"cases: expected 'beta:phi', got {tok!r}")
            out.append((_coerce_number("cases", parts[0]), _coerce_number("cases", parts[1])))
        return tuple(out)
    try:
        return tuple((_coerce_number("cases", b), _coerce_number("cases", p)) for b, p in value)
    except (TypeError, ValueError):
        raise ConfigError(f"cases: expected a list of [beta0, phi0] pairs, got {value!r}") from None


def _parse_betas(value: Any) -> tuple[float, ...]:
    if isinstance(value, str):
        value = [tok for tok in value.replace(",", " ").split()]
    try:
        return tuple(_coerce_number("betas", b) for b in value)
    except TypeError:
        raise ConfigError(f"betas: expected a list of angles, got {value!r}") from None


def config_from_mapping(data: dict, base: RunConfig = RunConfig()) -> RunConfig:
    """Apply a nested mapping on top of ``base``; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    vehicle = dataclasses.asdict(base.vehicle)
    sim = dataclasses.asdict(base.sim)
    limits = {"C_h": base.C_h, "eta": base.eta}
    cases, betas = base.cases, base.betas
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            target = {"vehicle": vehicle, "sim": sim, "limits": limits}[key]
            for sub, v in value.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"unknown key {key}.{sub}")
                integer = key == "sim" and sub in ("seed", "trace_every")
                target[sub] = _coerce_number(f"{key}.{sub}", v, integer)
        elif key == "cases":
            cases = _parse_cases(value)
        elif key == "betas":
            betas = _parse_betas(value)
        else:
            raise ConfigError(f"unknown key {key!r}")
    try:
        cfg = RunConfig(VehicleParams(**vehicle), limits["C_h"], limits["eta"], SimConfig(**sim), cases, betas)
        cfg.limits  # re-validate C_h / eta
        for b, p in cfg.cases:
            if not (math.isfinite(b) and math.isfinite(p)):
                raise ConfigError(f"non-finite case ({b}, {p})")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def parse_flat(text: str) -> dict:
    """Parse ``section.key = value`` lines (``#`` comments) into a nested mapping."""
    data: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if "." in key:
            section, sub = key.split(".", 1)
            data.setdefault(section, {})
            if not isinstance(data[section], dict):
                raise ConfigError(f"line {lineno}: {section!r} is both a value and a section")
            data[section][sub] = value
        else:
            data[key] = value
    return data


def parse_config_text(text: str, base: RunConfig = RunConfig()) -> RunConfig:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from exc
    else:
        data = parse_flat(text)
    return config_from_mapping(data, base)


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Load a config file; without ``path`` fall back to ``$PUSHSAFE_CONFIG``, then defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return parse_config_text(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(stream: TextIO, columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> None:
    for line in comments:
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = _io.StringIO()
    write_csv(buf, columns, rows, comments)
    return buf.getvalue()


def _maybe_number(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(text: str) -> tuple[dict[str, str], list[dict[str, Any]]]:
    """Parse CSV text into ``(metadata, rows)``; numeric cells become numbers.

    Leading ``# key=value`` lines are collected as metadata.
    """
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if not body and line.startswith("#"):
            content = line[1:].strip()
            if "=" in content:
                k, v = content.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        body.append(line)
    reader = csv.reader(body)
    try:
        header = next(reader)
    except StopIteration:
        return meta, []
    rows = []
    for rec in reader:
        if not rec:
            continue
        rows.append({k: _maybe_number(v) for k, v in zip(header, rec)})
    return meta, rows


# ---------------------------------------------------------------------------
# result emitters
# ---------------------------------------------------------------------------

ZONE_COLUMNS = (
    "beta0_deg", "phi_safe_hi_deg", "phi_crit_hi_deg", "table_safe_hi", "table_crit_lo", "table_crit_hi",
    "published_safe_hi", "published_crit_lo", "published_crit_hi", "deviation_deg", "deviation",
)
ZONE_DEVIATION_TOL_DEG = 5.0


def zone_rows(table: Sequence[ZoneBoundaries]) -> list[tuple]:
    """Computed boundaries alongside published ones, with the largest deviation.

    ``deviation`` is 1 when any integer boundary differs from the published
    value by more than ``ZONE_DEVIATION_TOL_DEG``.
    """
    rows = []
    for z in table:
        pub = PUBLISHED_ZONES.get(float(z.beta0))
        if pub is None:
            published = (None, None, None)
            dev = None
            flag = None
        else:
            published = pub
            dev = float(max(abs(z.table_safe_hi - pub[0]), abs(z.table_crit_lo - pub[1]), abs(z.table_crit_hi - pub[2])))
            flag = dev > ZONE_DEVIATION_TOL_DEG
        rows.append((
            float(z.beta0), round(z.phi_safe_hi, 2), round(z.phi_crit_hi, 2),
            z.table_safe_hi, z.table_crit_lo, z.table_crit_hi, *published, dev, flag,
        ))
    return rows


def zone_deviations(table: Sequence[ZoneBoundaries]) -> list[str]:
    """Human-readable lines for every boundary off by more than the tolerance."""
    out = []
    for z in table:
        pub = PUBLISHED_ZONES.get(float(z.beta0))
        if pub is None:
            continue
        for name, ours, theirs in (("safe_hi", z.table_safe_hi, pub[0]), ("crit_lo", z.table_crit_lo, pub[1]),
                                   ("crit_hi", z.table_crit_hi, pub[2])):
            if abs(ours - theirs) > ZONE_DEVIATION_TOL_DEG:
                out.append(f"deviation: beta0={z.beta0:g} {name} computed {ours} vs published {theirs} "
                           f"(|diff|={abs(ours - theirs)} > {ZONE_DEVIATION_TOL_DEG:g})")
    return out


SWEEP_COLUMNS = ("beta0_deg", "phi0_deg", "f_e_N", "T_sum_N", "T_in_N", "T_out_N", "zone")


def sweep_rows(rows, limits: ActuationLimits) -> list[tuple]:
    out = []
    for r in rows:
        if r.T_out <= limits.T_safe:
            zone = Zone.SAFE
        elif r.T_out <= limits.T_max:
            zone = Zone.CRITICAL
        else:
            zone = Zone.FAILURE
        out.append((r.beta0, r.phi0, r.f_e, r.T_sum, r.T_in, r.T_out, zone.value))
    return out


PLAN_COLUMNS = ("order", "beta0_deg", "phi0_deg", "zone", "T_out_N", "lambda", "phi_u_deg", "status")


def _case_dict(case: ExperimentCase) -> dict:
    a = case.assessment
    return {
        "beta0_deg": case.beta0,
        "phi0_deg": case.phi0,
        "zone": a.zone.value,
        "T_out_N": a.T_out if math.isfinite(a.T_out) else None,
        "lambda": a.lam,
        "phi_u_deg": a.phi_u,
    }


def _case_from_dict(d: dict) -> ExperimentCase:
    t_out = d.get("T_out_N")
    a = Assessment(Zone(d["zone"]), math.inf if t_out is None else float(t_out), d.get("lambda"), d.get("phi_u_deg"))
    return ExperimentCase(float(d["beta0_deg"]), float(d["phi0_deg"]), a)


def plan_to_json(plan: CampaignPlan, report: CampaignReport | None = None) -> str:
    doc: dict[str, Any] = {
        "cases": [_case_dict(c) for c in plan.cases],
        "excluded": [_case_dict(c) for c in plan.excluded],
    }
    if report is not None:
        doc["report"] = {
            "outcomes": [o.value for o in report.outcomes],
            "stop_index": report.stop_index,
            "aborted": report.aborted,
        }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def plan_from_json(text: str) -> CampaignPlan:
    doc = json.loads(text)
    return CampaignPlan(
        cases=tuple(_case_from_dict(d) for d in doc["cases"]),
        excluded=tuple(_case_from_dict(d) for d in doc["excluded"]),
    )


def plan_to_csv(plan: CampaignPlan) -> str:
    rows = []
    for i, c in enumerate(plan.cases):
        d = _case_dict(c)
        rows.append((i, d["beta0_deg"], d["phi0_deg"], d["zone"], d["T_out_N"], d["lambda"], d["phi_u_deg"], "planned"))
    for c in plan.excluded:
        d = _case_dict(c)
        rows.append(("", d["beta0_deg"], d["phi0_deg"], d["zone"], d["T_out_N"], d["lambda"], d["phi_u_deg"],
                     "excluded"))
    return csv_text(PLAN_COLUMNS, rows)


def plan_from_csv(text: str) -> CampaignPlan:
    _, rows = read_csv(text)
    cases, excluded = [], []
    for r in rows:
        d = {"beta0_deg": r["beta0_deg"], "phi0_deg": r["phi0_deg"], "zone": r["zone"],
             "T_out_N": r["T_out_N"], "lambda": r["lambda"], "phi_u_deg": r["phi_u_deg"]}
        (cases if r["status"] == "planned" else excluded).append(_case_from_dict(d))
    return CampaignPlan(tuple(cases), tuple(excluded))


def read_cases_csv(text: str) -> list[tuple[float, float]]:
    """Case list with columns ``beta0_deg, phi0_deg`` (or ``beta0, phi0``)."""
    meta, rows = read_csv(text)
    out = []
    for i, r in enumerate(rows, 2 + len(meta)):
        b = r.get("beta0_deg", r.get("beta0"))
        p = r.get("phi0_deg", r.get("phi0"))
        if not isinstance(b, (int, float)) or not isinstance(p, (int, float)):
            raise ConfigError(f"line {i}: expected numeric beta0_deg and phi0_deg columns")
        out.append((abs(float(b)), abs(float(p))))
    return out


def trace_csv(trace: np.ndarray, beta0: float, phi_ref: float) -> str:
    rows = ((*map(float, row[:-1]), int(row[-1])) for row in trace)
    return csv_text(TRACE_COLUMNS, rows, comments=(f"beta0_deg={beta0!r}", f"phi_ref_deg={phi_ref!r}"))


# ---------------------------------------------------------------------------
# flight logs
# ---------------------------------------------------------------------------

_PHI_ALIASES = ("phi_meas_deg", "phi_deg")
_F_ALIASES = ("f_meas_N", "f_n_N")


@dataclass(frozen=True)
class FlightLog:
    beta0: float
    phi_ref: float
    t: np.ndarray = field(repr=False)
    phi_meas: np.ndarray = field(repr=False)
    f_meas: np.ndarray = field(repr=False)

    def __post_init__(self):
        OperationPoint(self.beta0, self.phi_ref)
        n = len(self.t)
        if n == 0 or len(self.phi_meas) != n or len(self.f_meas) != n:
            raise ConfigError("flight log needs equal-length, non-empty columns")
        for name in ("t", "phi_meas", "f_meas"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ConfigError(f"flight log column {name} has non-finite values")
        if np.any(np.diff(self.t) <= 0):
            raise ConfigError("flight log time stamps must be strictly increasing")


def parse_flight_log(text: str, beta0: float | None = None, phi_ref: float | None = None) -> FlightLog:
    """Parse a flight-log CSV.

    Metadata comes from ``# beta0_deg=...`` and ``# phi_ref_deg=...`` lines
    unless given explicitly.  Angles are stored as magnitudes.
    """
    meta: dict[str, str] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines) and (lines[i].startswith("#") or not lines[i].strip()):
        content = lines[i][1:].strip() if lines[i].startswith("#") else ""
        if "=" in content:
            k, v = content.split("=", 1)
            meta[k.strip()] = v.strip()
        i += 1
    if i >= len(lines):
        raise ConfigError("flight log has no header row")
    header_line = i + 1
    header = next(csv.reader([lines[i]]))
    header = [h.strip() for h in header]

    def col(aliases):
        for a in aliases:
            if a in header:
                return header.index(a)
        raise ConfigError(f"line {header_line}: missing column, expected one of {aliases}")

    it, iphi, if_ = col(("t_s",)), col(_PHI_ALIASES), col(_F_ALIASES)
    t, phi, f = [], [], []
    prev = -math.inf
    for lineno, rec in enumerate(csv.reader(lines[i + 1:]), header_line + 1):
        if not rec or (len(rec) == 1 and not rec[0].strip()):
            continue
        try:
            vals = [float(rec[it]), float(rec[iphi]), float(rec[if_])]
        except (ValueError, IndexError):
            raise ConfigError(f"line {lineno}: malformed row {','.join(rec)!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"line {lineno}: non-finite value")
        if vals[0] <= prev:
            raise ConfigError(f"line {lineno}: time stamps must be strictly increasing")
        prev = vals[0]
        t.append(vals[0])
        phi.append(abs(vals[1]))
        f.append(vals[2])

    def meta_angle(name, given):
        if given is not None:
            return abs(float(given))
        if name not in meta:
            raise ConfigError(f"flight log lacks '# {name}=' metadata")
        try:
            return abs(float(meta[name]))
        except ValueError:
            raise ConfigError(f"flight log metadata {name}={meta[name]!r} is not a number") from None

    return FlightLog(meta_angle("beta0_deg", beta0), meta_angle("phi_ref_deg", phi_ref),
                     np.array(t), np.array(phi), np.array(f))


def load_flight_log(path: str | os.PathLike, **kw) -> FlightLog:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read flight log {path}: {exc}") from exc
    return parse_flight_log(text, **kw)


@dataclass(frozen=True)
class ValidationReport:
    f_pred_N: float  # prediction from the commanded roll
    n_samples: int
    mean_error_N: float  # signed, measured minus predicted
    mean_abs_error_N: float
    max_abs_error_N: float
    steady_error_N: float  # signed mean over the trailing window
    steady_rel_error: float
    pointwise_mean_abs_error_N: float  # against the prediction at the measured roll
    pointwise_max_abs_error_N: float
    pointwise_skipped: int  # samples whose measured roll is outside the model domain

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def validate_log(log: FlightLog, params: VehicleParams = VehicleParams(), window_s: float = 1.0) -> ValidationReport:
    """Compare measured contact force with the closed-form prediction."""
    if not window_s > 0:
        raise ConfigError(f"window_s must be > 0, got {window_s}")
    f_pred = contact_force(OperationPoint(log.beta0, log.phi_ref), params)
    err = log.f_meas - f_pred
    steady = log.t >= log.t[-1] - window_s
    ok = (log.phi_meas >= 0) & (log.beta0 - log.phi_meas >= ALPHA_TOL_DEG)
    if np.any(ok):
        pw = equilibrium_grid(log.beta0, log.phi_meas[ok], params)["f_e"]
        pw_err = np.abs(log.f_meas[ok] - pw)
        pw_mean, pw_max = float(pw_err.mean()), float(pw_err.max())
    else:
        pw_mean = pw_max = math.nan
    steady_err = float(err[steady].mean())
    return ValidationReport(
        f_pred_N=float(f_pred),
        n_samples=int(len(err)),
        mean_error_N=float(err.mean()),
        mean_abs_error_N=float(np.abs(err).mean()),
        max_abs_error_N=float(np.abs(err).max()),
        steady_error_N=steady_err,
        steady_rel_error=steady_err / f_pred if f_pred > 0 else math.nan,
        pointwise_mean_abs_error_N=pw_mean,
        pointwise_max_abs_error_N=pw_max,
        pointwise_skipped=int((~ok).sum()),
    )

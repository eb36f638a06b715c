"""Per-state classification, hierarchy audits and threshold extraction."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from . import absolute as ab
from .criteria import (
    CriterionVerdict,
    chsh_max,
    classify_ccq,
    is_ppt,
    is_product,
    steering_value,
    zero_discord_blocks,
    zero_super_discord,
)
from .discord import discord_numeric
from .entropy import EntropyReport, entropy_report
from .errors import InvalidInput, NotMonotone
from .linalg import frobenius_norm
from .settings import DEFAULT_TOLERANCES, Tolerances, default_seed
from .states import DensityMatrix, gisin, werner

SCHEMA_VERSION = 1
AUDIT_TOL = 1e-7
SCAN_POINTS = 32

# Verdicts of zero tests report margin 0 when they hold, so "strictly holds"
# for them means holds within tolerance.
ZERO_TYPE = frozenset(
    {"product", "zero_discord_A", "zero_discord_B", "zero_super_discord", "abs_zero_discord"}
)


# --------------------------------------------------------------------------
# Property registry
# --------------------------------------------------------------------------


def _ordinary_verdicts(rho: DensityMatrix, tols: Tolerances) -> dict[str, CriterionVerdict]:
    two_qubit = rho.is_two_qubit()
    scale = 1 + frobenius_norm(rho.matrix)
    out = {
        "product": is_product(rho, tol=tols.eq),
        "separable": is_ppt(rho, tol=tols.psd),
    }
    if two_qubit:
        value, _ = chsh_max(rho)
        out["local"] = CriterionVerdict.from_margin(2 - value, chsh_value=value)
        s, _, _ = steering_value(rho)
        out["unsteerable3"] = CriterionVerdict.from_margin(1 - s, steering_value=s)
    rep = entropy_report(rho)
    out["nnce"] = CriterionVerdict.from_margin(rep.cond_A_given_B, cond_B_given_A=rep.cond_B_given_A)
    out["zero_discord_A"] = zero_discord_blocks(rho, "A", tol=tols.eq * scale)
    out["zero_discord_B"] = zero_discord_blocks(rho, "B", tol=tols.eq * scale)
    out["zero_super_discord"] = zero_super_discord(rho, tol=tols.eq)
    return out


def _absolute_verdicts(rho: DensityMatrix) -> dict[str, ab.AbsoluteVerdict]:
    da, db = rho.dims
    spec = rho.spectrum
    out: dict[str, ab.AbsoluteVerdict] = {}
    if 2 in (da, db):
        out["abs_separable"] = ab.absolutely_separable_2xn(spec, max(da, db))
    if min(da, db) <= 3:
        out["abs_ppt"] = ab.absolutely_ppt(spec, (da, db))
    if rho.is_two_qubit():
        out["abs_local"] = ab.absolutely_local(spec)
        out["abs_unsteerable3"] = ab.absolutely_unsteerable3(spec)
        out["abs_unsteerable3_exact"] = ab.absolutely_unsteerable3_exact(spec)
        out["abs_nnce"] = ab.absolutely_nonneg_cond_entropy(spec)
        out["abs_zero_discord"] = ab.absolutely_zero_discord(spec)
    return out


ORDINARY_PROPERTIES = (
    "product", "separable", "local", "unsteerable3", "nnce",
    "zero_discord_A", "zero_discord_B", "zero_super_discord",
)
ABSOLUTE_PROPERTIES = (
    "abs_separable", "abs_ppt", "abs_local", "abs_unsteerable3",
    "abs_unsteerable3_exact", "abs_nnce", "abs_zero_discord",
)
PROPERTIES = ORDINARY_PROPERTIES + ABSOLUTE_PROPERTIES

_SPECTRUM_MARGINS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "abs_separable": ab.separable_margin,
    "abs_local": ab.local_margin,
    "abs_unsteerable3": ab.unsteerable3_margin,
    "abs_unsteerable3_exact": ab.unsteerable3_exact_margin,
    "abs_nnce": ab.nnce_margin,
    "abs_zero_discord": ab.zero_discord_margin,
}


def property_margin(name: str, rho: DensityMatrix, tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Margin (positive = holds) of one named ordinary or absolute property."""
    if name not in PROPERTIES:
        raise InvalidInput(f"unknown property {name!r}; choose from {', '.join(PROPERTIES)}")
    if name in ABSOLUTE_PROPERTIES:
        verdicts = _absolute_verdicts(rho)
    else:
        verdicts = _ordinary_verdicts(rho, tols)
    if name not in verdicts:
        raise InvalidInput(f"property {name!r} is not defined for dims {rho.dims}")
    return float(verdicts[name].margin)


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Implication:
    name: str
    antecedent: str
    consequent: str


ORDINARY_IMPLICATIONS = (
    Implication("product => zero super discord", "product", "zero_super_discord"),
    Implication("zero super discord => product", "zero_super_discord", "product"),
    Implication("product => CQ", "product", "zero_discord_A"),
    Implication("product => QC", "product", "zero_discord_B"),
    Implication("CQ => separable", "zero_discord_A", "separable"),
    Implication("QC => separable", "zero_discord_B", "separable"),
    Implication("separable => unsteerable (3 settings)", "separable", "unsteerable3"),
    Implication("separable => local", "separable", "local"),
    Implication("separable => non-negative conditional entropy", "separable", "nnce"),
)

ABSOLUTE_IMPLICATIONS = (
    Implication("abs zero discord => abs separable", "abs_zero_discord", "abs_separable"),
    Implication("abs separable => abs unsteerable (3 settings)", "abs_separable", "abs_unsteerable3"),
    Implication("abs unsteerable (3 settings) => abs local", "abs_unsteerable3", "abs_local"),
    Implication("abs separable => abs non-negative conditional entropy", "abs_separable", "abs_nnce"),
    Implication("abs unsteerable purity form => abs unsteerable exact", "abs_unsteerable3", "abs_unsteerable3_exact"),
)

LIFT_IMPLICATIONS = (
    Implication("abs separable => separable", "abs_separable", "separable"),
    Implication("abs PPT => separable", "abs_ppt", "separable"),
    Implication("abs local => local", "abs_local", "local"),
    Implication("abs unsteerable exact => unsteerable", "abs_unsteerable3_exact", "unsteerable3"),
    Implication("abs non-negative conditional entropy => nnce", "abs_nnce", "nnce"),
    Implication("abs zero discord => CQ", "abs_zero_discord", "zero_discord_A"),
    Implication("abs zero discord => QC", "abs_zero_discord", "zero_discord_B"),
    Implication("abs zero discord => product", "abs_zero_discord", "product"),
)

IMPLICATIONS = ORDINARY_IMPLICATIONS + ABSOLUTE_IMPLICATIONS + LIFT_IMPLICATIONS


@dataclass(frozen=True)
class Violation:
    implication: str
    index: int
    descriptor: Any
    antecedent_margin: float
    consequent_margin: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "implication": self.implication,
            "index": self.index,
            "descriptor": self.descriptor,
            "antecedent_margin": self.antecedent_margin,
            "consequent_margin": self.consequent_margin,
        }


def _strictly_holds(name: str, holds: bool, margin: float) -> bool:
    if name in ZERO_TYPE:
        return bool(holds)
    return margin > AUDIT_TOL


def _strictly_fails(margin: float) -> bool:
    return margin < -AUDIT_TOL


@dataclass(frozen=True, eq=False)
class PropertyReport:
    descriptor: dict[str, Any]
    dims: tuple[int, int]
    verdicts: dict[str, CriterionVerdict]
    entropy: EntropyReport
    absolute: dict[str, ab.AbsoluteVerdict]
    classicality: str
    seed: int
    tolerances: Tolerances
    discord: dict[str, float] = field(default_factory=dict)
    violations: tuple[Violation, ...] = ()

    def margins(self) -> dict[str, tuple[bool, float]]:
        out = {k: (v.holds, v.margin) for k, v in self.verdicts.items()}
        out.update({k: (v.holds, v.margin) for k, v in self.absolute.items()})
        return out

    @property
    def consistent(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "descriptor": self.descriptor,
            "dims": list(self.dims),
            "seed": self.seed,
            "tolerances": self.tolerances.as_dict(),
            "verdicts": {k: v.as_dict() for k, v in self.verdicts.items()},
            "entropy": self.entropy.as_dict(),
            "discord": dict(self.discord),
            "classicality": self.classicality,
            "absolute": {k: v.as_dict() for k, v in self.absolute.items()},
            "hierarchy_consistent": self.consistent,
            "violations": [v.as_dict() for v in self.violations],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def _check_report(margins: Mapping[str, tuple[bool, float]], index: int, descriptor: Any,
                  implications: Sequence[Implication] = IMPLICATIONS) -> list[Violation]:
    found = []
    for imp in implications:
        if imp.antecedent not in margins or imp.consequent not in margins:
            continue
        a_holds, a_margin = margins[imp.antecedent]
        _, c_margin = margins[imp.consequent]
        if _strictly_holds(imp.antecedent, a_holds, a_margin) and _strictly_fails(c_margin):
            found.append(Violation(imp.name, index, descriptor, float(a_margin), float(c_margin)))
    return found


def analyze(
    rho: DensityMatrix,
    descriptor: dict[str, Any] | None = None,
    seed: int | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    with_discord: bool = False,
) -> PropertyReport:
    """Evaluate every applicable criterion and audit the result against the hierarchy."""
    verdicts = _ordinary_verdicts(rho, tolerances)
    absolute = _absolute_verdicts(rho)
    discord = {}
    if with_discord and 2 in rho.dims:
        if rho.dims[0] == 2:
            discord["D(B|A)"] = discord_numeric(rho, "A")
        if rho.dims[1] == 2:
            discord["D(A|B)"] = discord_numeric(rho, "B")
    descriptor = dict(descriptor) if descriptor else {"matrix_sha256": state_hash(rho)}
    margins = {k: (v.holds, v.margin) for k, v in verdicts.items()}
    margins.update({k: (v.holds, v.margin) for k, v in absolute.items()})
    return PropertyReport(
        descriptor=descriptor,
        dims=rho.dims,
        verdicts=verdicts,
        entropy=entropy_report(rho),
        absolute=absolute,
        classicality=classify_ccq(rho).value,
        seed=default_seed() if seed is None else int(seed),
        tolerances=tolerances,
        discord=discord,
        violations=tuple(_check_report(margins, 0, descriptor)),
    )


def state_hash(rho: DensityMatrix) -> str:
    return hashlib.sha256(np.ascontiguousarray(rho.matrix).tobytes()).hexdigest()


def hierarchy_audit(corpus: Iterable[DensityMatrix | PropertyReport]) -> list[Violation]:
    """Every implication whose antecedent clearly holds while its consequent clearly fails."""
    violations: list[Violation] = []
    for i, item in enumerate(corpus):
        rep = item if isinstance(item, PropertyReport) else analyze(item)
        violations.extend(_check_report(rep.margins(), i, rep.descriptor))
    return violations


def absolute_hierarchy_audit(spectra: np.ndarray) -> list[Violation]:
    """Vectorized audit of the absolute implications over an (N, 4) array of spectra."""
    d = -np.sort(-np.asarray(spectra, dtype=float), axis=-1)
    if d.ndim != 2 or d.shape[1] != 4:
        raise InvalidInput(f"expected an (N, 4) array of spectra, got shape {d.shape}")
    margins = {name: np.asarray(f(d), dtype=float) for name, f in _SPECTRUM_MARGINS.items()}
    out: list[Violation] = []
    for imp in ABSOLUTE_IMPLICATIONS:
        a, c = margins[imp.antecedent], margins[imp.consequent]
        a_ok = (a >= 0) if imp.antecedent in ZERO_TYPE else (a > AUDIT_TOL)
        for i in np.flatnonzero(a_ok & (c < -AUDIT_TOL)):
            out.append(Violation(imp.name, int(i), d[i].tolist(), float(a[i]), float(c[i])))
    return out


# --------------------------------------------------------------------------
# Families and thresholds
# --------------------------------------------------------------------------

FAMILIES: dict[str, tuple[Callable[..., DensityMatrix], tuple[str, ...]]] = {
    "werner": (lambda w: werner(w), ("w",)),
    "gisin": (lambda lam, theta: gisin(lam, theta), ("lambda", "theta")),
}

PARAMETER_RANGES = {
    ("werner", "w"): (-1 / 3, 1.0),
    ("gisin", "lambda"): (0.0, 1.0),
    ("gisin", "theta"): (0.0, math.pi / 2),
}


def family_state(family: str, params: Mapping[str, float]) -> DensityMatrix:
    if family not in FAMILIES:
        raise InvalidInput(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    ctor, names = FAMILIES[family]
    missing = [n for n in names if n not in params]
    if missing:
        raise InvalidInput(f"family {family} needs parameters {', '.join(missing)}")
    return ctor(*(float(params[n]) for n in names))


@dataclass(frozen=True)
class ThresholdResult:
    family: str
    parameter: str
    property: str
    boundary: float
    bracket_width: float
    holds_below: bool
    fixed: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "family": self.family,
            "parameter": self.parameter,
            "property": self.property,
            "boundary": self.boundary,
            "bracket_width": self.bracket_width,
            "holds_below": self.holds_below,
            "fixed": dict(self.fixed),
        }


def bisect_threshold(
    family: str,
    parameter: str,
    prop: str,
    lo: float | None = None,
    hi: float | None = None,
    fixed: Mapping[str, float] | None = None,
    tol: float = 1e-6,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ThresholdResult:
    """Locate the single point in [lo, hi] where ``prop`` switches between holding and failing.

    A 32-point pre-scan must show exactly one switch, otherwise
    :class:`NotMonotone` is raised. The result is checked at
    boundary +- 2 * bracket width.
    """
    default = PARAMETER_RANGES.get((family, parameter))
    if default is None:
        raise InvalidInput(f"family {family!r} has no parameter {parameter!r}")
    lo = default[0] if lo is None else float(lo)
    hi = default[1] if hi is None else float(hi)
    if not lo < hi:
        raise InvalidInput(f"empty parameter range [{lo}, {hi}]")
    fixed = dict(fixed or {})

    def holds(x: float) -> bool:
        rho = family_state(family, {**fixed, parameter: x})
        return property_margin(prop, rho, tolerances) >= 0

    xs = np.linspace(lo, hi, SCAN_POINTS)
    flags = [holds(float(x)) for x in xs]
    changes = [i for i in range(SCAN_POINTS - 1) if flags[i] != flags[i + 1]]
    if len(changes) != 1:
        raise NotMonotone(
            f"{prop} changes {len(changes)} times over {parameter} in [{lo:g}, {hi:g}]",
            [float((xs[i] + xs[i + 1]) / 2) for i in changes],
        )
    a, b = float(xs[changes[0]]), float(xs[changes[0] + 1])
    below = flags[0]
    while b - a > tol:
        mid = (a + b) / 2
        if holds(mid) == below:
            a = mid
        else:
            b = mid
    boundary, width = (a + b) / 2, b - a
    left, right = max(lo, boundary - 2 * width), min(hi, boundary + 2 * width)
    if holds(left) != below or holds(right) == below:
        raise NotMonotone(f"bracket check failed for {prop} near {parameter}={boundary:.9g}", [boundary])
    return ThresholdResult(family, parameter, prop, boundary, width, below, fixed)


TABLE_ROWS: tuple[tuple[str, str, str, dict[str, float]], ...] = (
    ("werner", "w", "separable", {}),
    ("werner", "w", "unsteerable3", {}),
    ("werner", "w", "local", {}),
    ("werner", "w", "nnce", {}),
    ("werner", "w", "abs_separable", {}),
    ("werner", "w", "abs_unsteerable3", {}),
    ("werner", "w", "abs_local", {}),
    ("werner", "w", "abs_nnce", {}),
    ("gisin", "lambda", "abs_unsteerable3", {"theta": math.pi / 4}),
    ("gisin", "lambda", "abs_unsteerable3_exact", {"theta": math.pi / 4}),
    ("gisin", "lambda", "abs_local", {"theta": math.pi / 4}),
    ("gisin", "lambda", "abs_nnce", {"theta": math.pi / 4}),
)


def threshold_table(tol: float = 1e-9) -> list[ThresholdResult]:
    return [bisect_threshold(f, p, prop, fixed=fx, tol=tol) for f, p, prop, fx in TABLE_ROWS]


def sweep(family: str, points: Iterable[Mapping[str, float]], properties: Sequence[str],
          tolerances: Tolerances = DEFAULT_TOLERANCES) -> list[list[float]]:
    """Margins of ``properties`` at each parameter point, in grid order."""
    for p in properties:
        if p not in PROPERTIES:
            raise InvalidInput(f"unknown property {p!r}")
    rows = []
    for params in points:
        rho = family_state(family, params)
        need_abs = any(p in ABSOLUTE_PROPERTIES for p in properties)
        margins = {k: v.margin for k, v in _ordinary_verdicts(rho, tolerances).items()}
        if need_abs:
            margins.update({k: v.margin for k, v in _absolute_verdicts(rho).items()})
        rows.append([float(margins[p]) for p in properties])
    return rows


def write_json(obj, path: str | Path) -> None:
    data = obj.as_dict() if hasattr(obj, "as_dict") else obj
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

"""Positivity criteria for matrix monotone and matrix convex functions.

Each criterion is an exact characterization of n-monotonicity (or
n-convexity) on an interval, checked here by sampling: divided
differences of f * N(q) over node multisets, PSD sweeps of the Loewner
/ extended Loewner / Kraus matrices, sign sweeps of the (2n-1)-st (or
2n-th) derivative of f * N(q), and PSD sweeps of the Dobsch / Hankel
derivative matrices on a t-grid.  certify() runs the full family plus
the matrix oracle and reports per-criterion verdicts.

A failing record carries a concrete witness, re-verified in extended
precision before it is reported.  A passing record only says that no
violation was found at the recorded number of configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divdiff import (
    NodeMultiset,
    SamplerConfig,
    _choose_precision,
    dd_noise_floor,
    divided_difference,
    divided_difference_scaled,
    sample_distinct_tuple,
)
from .expr import EXTENDED_DIGITS, FunctionModel
from .linalg import (
    CheckResult,
    convexity_oracle,
    matrix_from_jsonable,
    matrix_function,
    matrix_to_jsonable,
    min_eigenvalue,
    monotonicity_oracle,
)
from .polynomial import Poly, n_of

MONOTONE_CRITERIA = (
    "dd-real-q",
    "dd-complex-q",
    "dd-confluent",
    "loewner-psd",
    "extended-loewner-psd",
    "product-derivative",
    "dobsch-psd",
)

CONVEX_CRITERIA = (
    "dd-real-q",
    "dd-complex-q",
    "dd-confluent-anchored",
    "dd-confluent-free",
    "kraus-anchored-psd",
    "kraus-free-psd",
    "product-derivative",
    "hankel-psd",
)


# ---------------------------------------------------------------------------
# Criterion matrices


def _check_distinct(points) -> list[float]:
    pts = [float(p) for p in points]
    if len(set(pts)) != len(pts):
        raise ValueError("points must be pairwise distinct")
    return pts


def loewner_matrix(f: FunctionModel, points, precision: str = "auto") -> np.ndarray:
    """Matrix of first divided differences [x_i, x_j]_f (diagonal f')."""
    pts = _check_distinct(points)
    n = len(pts)
    L = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            L[i, j] = L[j, i] = divided_difference(f, (pts[i], pts[j]), precision)
    return L


def extended_loewner_matrix(
    f: FunctionModel, points, precision: str = "auto"
) -> np.ndarray:
    """Entry (i, j) is [x_1..x_i, x_1..x_j]_f over ascending points."""
    pts = sorted(_check_distinct(points))
    n = len(pts)
    L = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            pairs = [(pts[k], (1 if k <= i else 0) + (1 if k <= j else 0)) for k in range(n)]
            ms = NodeMultiset.from_pairs([p for p in pairs if p[1] > 0])
            L[i, j] = L[j, i] = divided_difference(f, ms, precision)
    return L


def dobsch_matrix(f: FunctionModel, t: float, n: int, precision: str = "double") -> np.ndarray:
    """Local monotonicity matrix: entries f^(i+j-1)(t)/(i+j-1)!, i,j = 1..n."""
    t = float(t)
    M = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            k = i + j + 1
            M[i, j] = M[j, i] = f.eval_deriv(k, t, precision) / math.factorial(k)
    return M


def hankel_convex_matrix(
    f: FunctionModel, t: float, n: int, precision: str = "double"
) -> np.ndarray:
    """Local convexity matrix: entries f^(i+j)(t)/(i+j)!, i,j = 1..n."""
    t = float(t)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            k = i + j + 2
            K[i, j] = K[j, i] = f.eval_deriv(k, t, precision) / math.factorial(k)
    return K


def kraus_matrix(
    f: FunctionModel, points, base: float, precision: str = "auto"
) -> np.ndarray:
    """Matrix of second divided differences [x_i, x_j, base]_f.

    base may coincide with a point; repeated nodes become confluent.
    """
    pts = _check_distinct(points)
    base = float(base)
    n = len(pts)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ms = NodeMultiset.from_points((pts[i], pts[j], base))
            K[i, j] = K[j, i] = divided_difference(f, ms, precision)
    return K


# ---------------------------------------------------------------------------
# q sampling

_Q_CADENCE_NOTE = "q cadence: 1, Gaussian coefficients, roots near nodes, mixed degree"


def _sample_q(
    rng: np.random.Generator,
    max_degree: int,
    nodes: tuple[float, ...],
    span: float,
    idx: int,
    complex_coeffs: bool,
) -> Poly:
    """One polynomial of degree <= max_degree, max |coefficient| = 1."""
    kind = idx % 4
    if kind == 0 or max_degree == 0:
        return Poly.of(1.0)
    if kind == 2:
        deg = int(rng.integers(1, max_degree + 1))
        roots = [float(rng.choice(nodes)) for _ in range(deg)]
        if idx % 8 >= 4:
            roots = [r + float(rng.normal(scale=0.5 * span)) for r in roots]
        if complex_coeffs:
            roots = [r + 1j * float(rng.normal(scale=0.1 * span)) for r in roots]
        q = Poly.from_roots(tuple(roots), 1.0)
    else:
        deg = max_degree if kind == 1 else int(rng.integers(0, max_degree + 1))
        coeffs = rng.normal(size=deg + 1)
        if complex_coeffs:
            coeffs = coeffs + 1j * rng.normal(size=deg + 1)
        q = Poly(tuple(complex(c) for c in coeffs))
    m = q.max_abs_coeff()
    return q.scale(1.0 / m) if m > 0 else Poly.of(1.0)


def _poly_to_jsonable(q: Poly) -> dict:
    out = {"real": [c.real for c in q.coeffs]}
    if any(c.imag != 0.0 for c in q.coeffs):
        out["imag"] = [c.imag for c in q.coeffs]
    return out


def _poly_from_jsonable(data: dict) -> Poly:
    real = data["real"]
    imag = data.get("imag", [0.0] * len(real))
    return Poly(tuple(complex(a, b) for a, b in zip(real, imag)))


# ---------------------------------------------------------------------------
# Records and report


@dataclass
class CriterionRecord:
    """Outcome of one criterion sweep."""

    criterion: str
    passed: bool
    configs: int
    worst_value: float
    witness: dict | None = None
    note: str = ""

    def to_jsonable(self) -> dict:
        out = {
            "id": self.criterion,
            "verdict": "pass" if self.passed else "fail",
            "configs": self.configs,
            "worst_value": self.worst_value,
        }
        if self.note:
            out["note"] = self.note
        if not self.passed and self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class CriterionReport:
    """Full certification report: per-criterion records plus agreement."""

    function: str
    order: int
    mode: str
    interval: tuple[float, float]
    seed: int
    tol: float
    records: list[CriterionRecord]
    conflicts: list[dict]
    verdict: str

    @property
    def consistent(self) -> bool:
        return not self.conflicts

    def record(self, criterion: str) -> CriterionRecord:
        for r in self.records:
            if r.criterion == criterion:
                return r
        raise KeyError(criterion)

    def to_jsonable(self) -> dict:
        return {
            "function": self.function,
            "order": self.order,
            "mode": self.mode,
            "interval": list(self.interval),
            "seed": self.seed,
            "tol": self.tol,
            "criteria": [r.to_jsonable() for r in self.records],
            "agreement": {
                "consistent": self.consistent,
                "conflicts": self.conflicts,
            },
            "verdict": self.verdict,
        }


@dataclass
class CertifyConfig:
    """Knobs for certify(): sample counts, seed, tolerance, grid size."""

    samples: int = 1000
    oracle_trials: int = 400
    seed: int = 0
    tol: float = 1e-9
    grid: int = 257
    include_oracle: bool = True
    min_separation: float | None = None

    def sampler(self, seed: int) -> SamplerConfig:
        return SamplerConfig(
            seed=seed, samples=self.samples, min_separation=self.min_separation
        )


# ---------------------------------------------------------------------------
# Divided-difference criteria


def _draw_multiset(
    rng: np.random.Generator,
    shape: str,
    n: int,
    interval: tuple[float, float],
    sampler: SamplerConfig,
    idx: int,
) -> NodeMultiset:
    if shape == "distinct-2n":
        pts = sample_distinct_tuple(rng, 2 * n, interval, sampler, idx)
        return NodeMultiset.from_points(pts.tolist())
    if shape == "distinct-2n+1":
        pts = sample_distinct_tuple(rng, 2 * n + 1, interval, sampler, idx)
        return NodeMultiset.from_points(pts.tolist())
    if shape == "doubled":
        pts = sample_distinct_tuple(rng, n, interval, sampler, idx)
        return NodeMultiset.from_pairs([(p, 2) for p in pts.tolist()])
    if shape == "doubled-anchored":
        pts = sample_distinct_tuple(rng, n, interval, sampler, idx)
        anchor = int(rng.integers(0, n))
        return NodeMultiset.from_pairs(
            [(p, 3 if i == anchor else 2) for i, p in enumerate(pts.tolist())]
        )
    if shape == "doubled-free":
        pts = sample_distinct_tuple(rng, n + 1, interval, sampler, idx)
        simple = int(rng.integers(0, n + 1))
        return NodeMultiset.from_pairs(
            [(p, 1 if i == simple else 2) for i, p in enumerate(pts.tolist())]
        )
    raise ValueError(f"unknown multiset shape {shape!r}")


_DD_SHAPES = {
    ("monotone", "dd-real-q"): ("distinct-2n", False),
    ("monotone", "dd-complex-q"): ("distinct-2n", True),
    ("monotone", "dd-confluent"): ("doubled", None),
    ("convex", "dd-real-q"): ("distinct-2n+1", False),
    ("convex", "dd-complex-q"): ("distinct-2n+1", True),
    ("convex", "dd-confluent-anchored"): ("doubled-anchored", None),
    ("convex", "dd-confluent-free"): ("doubled-free", None),
}


def _dd_config_check(
    f: FunctionModel,
    ms: NodeMultiset,
    q: Poly,
    tol: float,
) -> tuple[float, float, bool]:
    """(value, threshold, confirmed_violation) for one dd configuration.

    A double-precision candidate below -threshold is recomputed in
    extended precision before it counts as a violation.
    """
    weight = n_of(q)
    value, scale = divided_difference_scaled(f, ms, weight=weight)
    mode = _choose_precision(ms, "auto")
    threshold = max(tol, dd_noise_floor(scale, mode))
    if value >= -threshold:
        return value, threshold, False
    if mode == "double":
        value2, scale2 = divided_difference_scaled(
            f, ms, precision="extended", weight=weight
        )
        value2 = float(value2)
        threshold2 = float(max(tol, dd_noise_floor(scale2, "extended")))
        return value2, threshold2, value2 < -threshold2
    return value, threshold, True


def dd_criterion(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    mode: str = "monotone",
    sampler: SamplerConfig | None = None,
    complex_coeffs: bool = False,
    tol: float = 1e-9,
) -> CriterionRecord:
    """Sampled check of [nodes]_{f N(q)} >= 0 over distinct node tuples.

    monotone mode uses 2n nodes, convex mode 2n+1; q runs over the
    structured cadence in degree <= n-1 (real or complex coefficients).
    """
    criterion = "dd-complex-q" if complex_coeffs else "dd-real-q"
    shape, _ = _DD_SHAPES[(mode, criterion)]
    return _run_dd_sweep(f, n, interval, criterion, shape, complex_coeffs, sampler, tol)


def confluent_dd_criterion(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    mode: str = "monotone",
    sampler: SamplerConfig | None = None,
    base: str = "anchored",
    tol: float = 1e-9,
) -> CriterionRecord:
    """Sampled dd check over doubled nodes (confluent configurations).

    monotone: (x_1, x_1, ..., x_n, x_n).  convex: the same doubled
    block plus a base node, either one of the x_l (base="anchored") or
    a separate simple node (base="free").  q alternates real and
    complex coefficients.
    """
    if mode == "monotone":
        criterion, shape = "dd-confluent", "doubled"
    elif base == "anchored":
        criterion, shape = "dd-confluent-anchored", "doubled-anchored"
    else:
        criterion, shape = "dd-confluent-free", "doubled-free"
    return _run_dd_sweep(f, n, interval, criterion, shape, None, sampler, tol)


def _run_dd_sweep(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    criterion: str,
    shape: str,
    complex_coeffs: bool | None,
    sampler: SamplerConfig | None,
    tol: float,
) -> CriterionRecord:
    sampler = sampler or SamplerConfig()
    rng = sampler.rng()
    span = float(interval[1]) - float(interval[0])
    worst = math.inf
    worst_witness = None
    spurious = 0
    for idx in range(sampler.samples):
        ms = _draw_multiset(rng, shape, n, interval, sampler, idx)
        use_complex = bool(idx % 2) if complex_coeffs is None else complex_coeffs
        q = _sample_q(rng, n - 1, ms.values(), span, idx, use_complex)
        value, threshold, confirmed = _dd_config_check(f, ms, q, tol)
        margin = value + threshold
        if margin < worst:
            worst = margin
            worst_witness = {
                "kind": "dd",
                "criterion": criterion,
                "nodes": [list(pair) for pair in ms.nodes],
                "q": _poly_to_jsonable(q),
                "value": value,
                "threshold": threshold,
            }
        if confirmed:
            return CriterionRecord(
                criterion, False, idx + 1, worst, worst_witness, _Q_CADENCE_NOTE
            )
        if value < -tol:
            spurious += 1
    note = _Q_CADENCE_NOTE
    if spurious:
        note += f"; {spurious} candidate(s) dismissed in extended precision"
    return CriterionRecord(criterion, True, sampler.samples, worst, worst_witness, note)


# ---------------------------------------------------------------------------
# PSD sweeps over sampled points (Loewner, extended Loewner, Kraus)


def _psd_margin(M: np.ndarray, tol: float) -> tuple[float, float, float]:
    """(min eigenvalue, threshold, margin) with scale-aware threshold."""
    lam = min_eigenvalue(M)
    scale = max(1.0, float(np.abs(M).max()))
    threshold = tol * scale
    return lam, threshold, lam + threshold


def _run_psd_point_sweep(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    criterion: str,
    sampler: SamplerConfig,
    tol: float,
) -> CriterionRecord:
    rng = sampler.rng()
    worst = math.inf
    worst_witness = None
    spurious = 0
    for idx in range(sampler.samples):
        base = None
        if criterion in ("kraus-anchored-psd", "kraus-free-psd"):
            if criterion == "kraus-free-psd":
                pts = sample_distinct_tuple(rng, n + 1, interval, sampler, idx)
                cut = int(rng.integers(0, n + 1))
                base = float(pts[cut])
                points = [float(p) for i, p in enumerate(pts) if i != cut]
            else:
                pts = sample_distinct_tuple(rng, n, interval, sampler, idx)
                points = [float(p) for p in pts]
                base = points[int(rng.integers(0, n))]
            M = kraus_matrix(f, points, base)
        elif criterion == "loewner-psd":
            points = [float(p) for p in sample_distinct_tuple(rng, n, interval, sampler, idx)]
            M = loewner_matrix(f, points)
        elif criterion == "extended-loewner-psd":
            points = [float(p) for p in sample_distinct_tuple(rng, n, interval, sampler, idx)]
            M = extended_loewner_matrix(f, points)
        else:
            raise ValueError(f"unknown PSD criterion {criterion!r}")
        lam, threshold, margin = _psd_margin(M, tol)
        if margin < 0.0:
            # re-verify entries in extended precision before reporting
            if criterion == "loewner-psd":
                M2 = loewner_matrix(f, points, precision="extended")
            elif criterion == "extended-loewner-psd":
                M2 = extended_loewner_matrix(f, points, precision="extended")
            else:
                M2 = kraus_matrix(f, points, base, precision="extended")
            lam, threshold, margin = _psd_margin(M2, tol)
            if margin < 0.0:
                witness = {
                    "kind": "psd-matrix",
                    "criterion": criterion,
                    "points": points,
                    "matrix": matrix_to_jsonable(M2),
                    "min_eigenvalue": lam,
                    "threshold": threshold,
                }
                if base is not None:
                    witness["base"] = base
                return CriterionRecord(criterion, False, idx + 1, margin, witness)
            spurious += 1
        if margin < worst:
            worst = margin
            worst_witness = {
                "kind": "psd-matrix",
                "criterion": criterion,
                "points": points,
                "matrix": matrix_to_jsonable(M),
                "min_eigenvalue": lam,
                "threshold": threshold,
            }
            if base is not None:
                worst_witness["base"] = base
    note = ""
    if spurious:
        note = f"{spurious} candidate(s) dismissed in extended precision"
    return CriterionRecord(criterion, True, sampler.samples, worst, worst_witness, note)


# ---------------------------------------------------------------------------
# Derivative-matrix sweeps over a t-grid (Dobsch, Hankel)


def _chebyshev_grid(interval: tuple[float, float], count: int) -> np.ndarray:
    lo, hi = float(interval[0]), float(interval[1])
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * (1.0 - 1e-6)
    k = np.arange(count)
    return mid + half * np.cos(np.pi * (2 * k + 1) / (2 * count))


def _run_derivative_matrix_sweep(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    criterion: str,
    grid: int,
    tol: float,
) -> CriterionRecord:
    """PSD sweep of the Dobsch/Hankel matrix over a Chebyshev t-grid.

    A negative minimum eigenvalue at any probe fails immediately (after
    extended-precision re-verification of the entries), so thin dips
    strictly between grid points are the remaining risk; the sweep
    refines around local minima of the smallest eigenvalue by ternary
    search.  Positivity at every probe is reported as a pass for the
    grid, not as an almost-everywhere proof.
    """
    build = dobsch_matrix if criterion == "dobsch-psd" else hankel_convex_matrix
    ts = np.sort(_chebyshev_grid(interval, grid))
    worst = math.inf
    worst_witness = None
    configs = 0
    spurious = 0

    def probe(t: float):
        nonlocal worst, worst_witness, configs, spurious
        configs += 1
        M = build(f, t, n)
        lam, threshold, margin = _psd_margin(M, tol)
        witness = None
        if margin < 0.0:
            M2 = build(f, t, n, precision="extended")
            lam, threshold, margin = _psd_margin(M2, tol)
            if margin < 0.0:
                witness = {
                    "kind": "psd-matrix",
                    "criterion": criterion,
                    "t": float(t),
                    "order": n,
                    "matrix": matrix_to_jsonable(M2),
                    "min_eigenvalue": lam,
                    "threshold": threshold,
                }
            else:
                spurious += 1
        if margin < worst:
            worst = margin
            if witness is None:
                worst_witness = {
                    "kind": "psd-matrix",
                    "criterion": criterion,
                    "t": float(t),
                    "order": n,
                    "matrix": matrix_to_jsonable(M),
                    "min_eigenvalue": lam,
                    "threshold": threshold,
                }
        return margin, witness

    margins = []
    for t in ts:
        margin, witness = probe(float(t))
        if witness is not None:
            return CriterionRecord(criterion, False, configs, worst, witness)
        margins.append(margin)
    minima = [
        i
        for i in range(len(ts))
        if (i == 0 or margins[i] <= margins[i - 1])
        and (i == len(ts) - 1 or margins[i] <= margins[i + 1])
    ]
    minima = sorted(minima, key=lambda i: margins[i])[:5]
    for i in minima:
        a = float(ts[max(i - 1, 0)])
        b = float(ts[min(i + 1, len(ts) - 1)])
        for _ in range(30):
            m1 = a + (b - a) / 3.0
            m2 = b - (b - a) / 3.0
            margin1, witness = probe(m1)
            if witness is not None:
                return CriterionRecord(criterion, False, configs, worst, witness)
            margin2, witness = probe(m2)
            if witness is not None:
                return CriterionRecord(criterion, False, configs, worst, witness)
            if margin1 <= margin2:
                b = m2
            else:
                a = m1
    note = f"grid {grid} Chebyshev points"
    if spurious:
        note += f"; {spurious} candidate(s) dismissed in extended precision"
    return CriterionRecord(criterion, True, configs, worst, worst_witness, note)


# ---------------------------------------------------------------------------
# Product-derivative sweep


def _product_derivative_value(
    f: FunctionModel, weight: Poly, t: float, order: int, precision: str = "double"
) -> tuple[float, float]:
    """((f * weight)^(order)(t) / order!, term magnitude scale)."""
    total = 0.0
    scale = 0.0
    wp = weight
    for l in range(order + 1):
        if wp.is_zero():
            break
        wval = wp.eval(t).real / math.factorial(l)
        term = (f.eval_deriv(order - l, t, precision) / math.factorial(order - l)) * wval
        total += term
        scale = max(scale, abs(term))
        wp = wp.derivative()
    return total, scale


def _run_product_derivative_sweep(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    mode: str,
    sampler: SamplerConfig,
    tol: float,
) -> CriterionRecord:
    """Sampled sign check of (f N(q))^(2n-1) (monotone) or ^(2n) (convex)."""
    criterion = "product-derivative"
    order = 2 * n - 1 if mode == "monotone" else 2 * n
    rng = sampler.rng()
    lo, hi = float(interval[0]), float(interval[1])
    span = hi - lo
    margin_t = 1e-6 * span
    worst = math.inf
    worst_witness = None
    spurious = 0
    for idx in range(sampler.samples):
        t = float(rng.uniform(lo + margin_t, hi - margin_t))
        anchors = (t, lo + 0.25 * span, lo + 0.75 * span)
        q = _sample_q(rng, n - 1, anchors, span, idx, bool(idx % 2))
        weight = n_of(q)
        value, scale = _product_derivative_value(f, weight, t, order)
        threshold = max(tol, 64.0 * 2.3e-16 * max(scale, 1.0))
        confirmed = False
        if value < -threshold:
            value2, scale2 = _product_derivative_value(
                f, weight, t, order, precision="extended"
            )
            value2 = float(value2)
            threshold2 = float(
                max(tol, 64.0 * 10.0 ** (1 - EXTENDED_DIGITS) * max(scale2, 1.0))
            )
            if value2 < -threshold2:
                value, threshold, confirmed = value2, threshold2, True
            else:
                value, threshold = value2, threshold2
                spurious += 1
        margin = value + threshold
        if margin < worst:
            worst = margin
            worst_witness = {
                "kind": "derivative-sign",
                "criterion": criterion,
                "t": t,
                "deriv_order": order,
                "q": _poly_to_jsonable(q),
                "value": value,
                "threshold": threshold,
            }
        if confirmed:
            return CriterionRecord(criterion, False, idx + 1, worst, worst_witness)
    note = ""
    if spurious:
        note = f"{spurious} candidate(s) dismissed in extended precision"
    return CriterionRecord(criterion, True, sampler.samples, worst, worst_witness, note)


# ---------------------------------------------------------------------------
# Witness replay


def re_evaluate_witness(f: FunctionModel, witness: dict, tol: float = 1e-9) -> dict:
    """Recompute a witness from its stored configuration.

    Returns {"value", "threshold", "confirmed"}; dd and derivative
    witnesses are recomputed in extended precision, matrix witnesses
    through the spectral calculus.
    """
    kind = witness["kind"]
    if kind == "dd":
        ms = NodeMultiset.from_pairs([tuple(p) for p in witness["nodes"]])
        q = _poly_from_jsonable(witness["q"])
        value = float(divided_difference(f, ms, precision="extended", weight=n_of(q)))
        threshold = float(witness["threshold"])
        return {"value": value, "threshold": threshold, "confirmed": value < -threshold}
    if kind == "derivative-sign":
        q = _poly_from_jsonable(witness["q"])
        value, _ = _product_derivative_value(
            f, n_of(q), float(witness["t"]), int(witness["deriv_order"]), "extended"
        )
        value = float(value)
        threshold = float(witness["threshold"])
        return {"value": value, "threshold": threshold, "confirmed": value < -threshold}
    if kind == "psd-matrix":
        criterion = witness["criterion"]
        if criterion == "dobsch-psd":
            M = dobsch_matrix(f, witness["t"], int(witness["order"]), "extended")
        elif criterion == "hankel-psd":
            M = hankel_convex_matrix(f, witness["t"], int(witness["order"]), "extended")
        elif criterion == "loewner-psd":
            M = loewner_matrix(f, witness["points"], "extended")
        elif criterion == "extended-loewner-psd":
            M = extended_loewner_matrix(f, witness["points"], "extended")
        else:
            M = kraus_matrix(f, witness["points"], witness["base"], "extended")
        lam, threshold, _ = _psd_margin(M, tol)
        return {"value": lam, "threshold": threshold, "confirmed": lam < -threshold}
    if kind == "matrix-pair":
        A = matrix_from_jsonable(witness["matrix_a"])
        B = matrix_from_jsonable(witness["matrix_b"])
        FA = matrix_function(f, A)
        FB = matrix_function(f, B)
        lam = min_eigenvalue(FB - FA)
        scale = max(1.0, float(np.abs(FA).max()), float(np.abs(FB).max()))
        return {"value": lam, "threshold": tol * scale, "confirmed": lam < -tol * scale}
    if kind == "jensen":
        A = matrix_from_jsonable(witness["matrix_a"])
        B = matrix_from_jsonable(witness["matrix_b"])
        t = float(witness["weight"])
        M = t * A + (1.0 - t) * B
        FA, FB, FM = (matrix_function(f, X) for X in (A, B, M))
        lam = min_eigenvalue(t * FA + (1.0 - t) * FB - FM)
        scale = max(1.0, float(np.abs(FA).max()), float(np.abs(FB).max()))
        return {"value": lam, "threshold": tol * scale, "confirmed": lam < -tol * scale}
    raise ValueError(f"unknown witness kind {kind!r}")


# ---------------------------------------------------------------------------
# certify


def _oracle_record(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    mode: str,
    trials: int,
    seed: int,
    tol: float,
) -> CriterionRecord:
    oracle = monotonicity_oracle if mode == "monotone" else convexity_oracle
    result: CheckResult = oracle(f, n, interval, trials=trials, seed=seed, tol=tol)
    return CriterionRecord(
        "matrix-oracle",
        result.passed,
        result.configs,
        result.worst_value,
        result.witness,
        "sampled matrix pairs; a pass is not a proof",
    )


def certify(
    f: FunctionModel,
    n: int,
    interval: tuple[float, float],
    mode: str = "monotone",
    config: CertifyConfig | None = None,
) -> CriterionReport:
    """Run every applicable criterion and assemble the report.

    The overall verdict is the conjunction of the per-criterion
    verdicts.  Disagreements are surfaced in the agreement block:
    criteria splitting pass/fail among themselves, or the matrix
    oracle finding a violation every algebraic criterion missed.  A
    criterion that passes while another fails is a defect signal, not
    something resolved silently.
    """
    if mode not in ("monotone", "convex"):
        raise ValueError(f"mode must be 'monotone' or 'convex', got {mode!r}")
    if n < 1:
        raise ValueError("order must be >= 1")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must have positive length")
    config = config or CertifyConfig()
    names = MONOTONE_CRITERIA if mode == "monotone" else CONVEX_CRITERIA
    seeds = np.random.SeedSequence(config.seed).spawn(len(names) + 1)
    child = {name: int(s.generate_state(1)[0]) for name, s in zip(names, seeds)}
    oracle_seed = int(seeds[-1].generate_state(1)[0])

    records: list[CriterionRecord] = []
    for name in names:
        sampler = config.sampler(child[name])
        if name == "dd-real-q":
            rec = dd_criterion(f, n, interval, mode, sampler, False, config.tol)
        elif name == "dd-complex-q":
            rec = dd_criterion(f, n, interval, mode, sampler, True, config.tol)
        elif name == "dd-confluent":
            rec = confluent_dd_criterion(f, n, interval, mode, sampler, tol=config.tol)
        elif name == "dd-confluent-anchored":
            rec = confluent_dd_criterion(
                f, n, interval, mode, sampler, "anchored", config.tol
            )
        elif name == "dd-confluent-free":
            rec = confluent_dd_criterion(f, n, interval, mode, sampler, "free", config.tol)
        elif name in ("loewner-psd", "extended-loewner-psd", "kraus-anchored-psd", "kraus-free-psd"):
            rec = _run_psd_point_sweep(f, n, interval, name, sampler, config.tol)
        elif name == "product-derivative":
            rec = _run_product_derivative_sweep(f, n, interval, mode, sampler, config.tol)
        elif name in ("dobsch-psd", "hankel-psd"):
            rec = _run_derivative_matrix_sweep(f, n, interval, name, config.grid, config.tol)
        else:
            raise AssertionError(name)
        records.append(rec)

    if config.include_oracle:
        records.append(
            _oracle_record(f, n, interval, mode, config.oracle_trials, oracle_seed, config.tol)
        )

    theory = [r for r in records if r.criterion != "matrix-oracle"]
    passes = [r.criterion for r in theory if r.passed]
    fails = [r.criterion for r in theory if not r.passed]
    conflicts: list[dict] = []
    if passes and fails:
        conflicts.append({"kind": "criteria-split", "pass": passes, "fail": fails})
    oracle = next((r for r in records if r.criterion == "matrix-oracle"), None)
    if oracle is not None and not oracle.passed and not fails:
        conflicts.append(
            {
                "kind": "oracle-vs-criteria",
                "detail": "matrix oracle found a violation that every criterion missed",
            }
        )
    verdict = "fail" if fails or (oracle is not None and not oracle.passed) else "pass"
    return CriterionReport(
        function=f.name,
        order=n,
        mode=mode,
        interval=(lo, hi),
        seed=config.seed,
        tol=config.tol,
        records=records,
        conflicts=conflicts,
        verdict=verdict,
    )

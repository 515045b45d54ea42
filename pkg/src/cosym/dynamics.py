"""Hamiltonian, gradient and evolution vector fields; brackets; trajectories.

The generic linear-solve path — flat(X_H) = dH - (R(H) + H) theta — is the
single source of truth.  Closed coordinate formulas are fast paths that the
test suite validates against it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .charts import Chart, ChartPoint, ScalarField, coerce_values
from .structures import (
    CanonicalThetaSpec,
    StructureError,
    StructureSpec,
    darboux_pairs,
    reeb,
)


@dataclass(frozen=True)
class HamiltonianFieldCoefficients:
    """Coefficients (A_i, B_i, C) of X_H = A_i d/dq^i + B_i d/dp_i + C d/dkappa."""

    A: np.ndarray
    B: np.ndarray
    C: float

    def vector(self) -> np.ndarray:
        return np.concatenate([self.A, self.B, [self.C]])


# --------------------------------------------------------------------------
# Vector fields attached to a Hamiltonian
# --------------------------------------------------------------------------


def _point_data(spec: StructureSpec, H: ScalarField, at, check_domain: bool):
    values = coerce_values(spec.chart, at)
    if check_domain and not isinstance(at, ChartPoint):
        spec.chart.check(values)
    th = spec.theta_vector(values, check_domain=False)
    F = spec.flat_matrix(values, check_domain=False)
    dH = H.gradient(values, check_domain=False)
    R = reeb(spec, values, check_domain=False)
    return values, th, F, dH, R


def hamiltonian_field_generic(
    spec: StructureSpec, H: ScalarField, at, check_domain: bool = True
) -> np.ndarray:
    """Solve flat(X) = dH - (R(H) + H) theta at a point."""
    values, th, F, dH, R = _point_data(spec, H, at, check_domain)
    h = H.value(values, check_domain=False)
    rhs = dH - (R @ dH + h) * th
    try:
        return np.linalg.solve(F, rhs)
    except np.linalg.LinAlgError:
        raise StructureError("flat matrix singular at %s" % list(values)) from None


def gradient_field(
    spec: StructureSpec, H: ScalarField, at, check_domain: bool = True
) -> np.ndarray:
    """Solve flat(grad H) = dH at a point."""
    values, th, F, dH, R = _point_data(spec, H, at, check_domain)
    try:
        return np.linalg.solve(F, dH)
    except np.linalg.LinAlgError:
        raise StructureError("flat matrix singular at %s" % list(values)) from None


def evolution_field(
    spec: StructureSpec, H: ScalarField, at, check_domain: bool = True
) -> np.ndarray:
    """Cosymplectic evolution field: grad H - R(H) R + R.

    Requires the structure to classify as cosymplectic.
    """
    if not spec.classification().cos:
        raise StructureError(
            "evolution field needs a cosymplectic structure; %r is not" % spec.name
        )
    values, th, F, dH, R = _point_data(spec, H, at, check_domain)
    grad = np.linalg.solve(F, dH)
    return grad - (R @ dH) * R + R


def hamiltonian_field_closed(
    theta_spec: CanonicalThetaSpec, H: ScalarField, at, check_domain: bool = True
) -> HamiltonianFieldCoefficients:
    """Closed-form coefficients over the canonical constant theta and the
    Darboux two-form:

        A_i = dH/dp_i - b_i R(H)
        B_i = -dH/dq^i + a_i R(H)
        C   = (1/c) (-a_i dH/dp_i + b_i dH/dq^i - H)
    """
    from .structures import darboux_chart

    n = theta_spec.n
    chart = H.chart
    if chart.coordinates != darboux_chart(n).coordinates:
        raise ValueError(
            "closed form needs the (q^i..., p_i..., kappa) chart layout, got %s"
            % (chart.coordinates,)
        )
    values = coerce_values(chart, at)
    if check_domain and not isinstance(at, ChartPoint):
        chart.check(values)
    dH = H.gradient(values, check_domain=False)
    Hq, Hp, Hk = dH[:n], dH[n : 2 * n], dH[2 * n]
    a = np.asarray(theta_spec.a)
    b = np.asarray(theta_spec.b)
    RH = Hk / theta_spec.c
    A = Hp - b * RH
    B = -Hq + a * RH
    C = (-(a @ Hp) + b @ Hq - H.value(values, check_domain=False)) / theta_spec.c
    return HamiltonianFieldCoefficients(A=A, B=B, C=C)


def tacs_field(
    epsilon: float, H: ScalarField, at, check_domain: bool = True
) -> np.ndarray:
    """Corrected transitive-almost-contact field for theta = dkappa + eps p_i dq^i.

    This is the canonical closed form with a_i = eps p_i (evaluated at the
    point), b_i = 0, c = 1; it satisfies X_H ⌟ theta = -H.
    """
    chart = H.chart
    pairs, kappa = darboux_pairs(chart)
    n = len(pairs)
    values = coerce_values(chart, at)
    if check_domain and not isinstance(at, ChartPoint):
        chart.check(values)
    a = tuple(epsilon * values[pi] for _, pi in pairs)
    spec = CanonicalThetaSpec(a=a, b=(0.0,) * n, c=1.0)
    return hamiltonian_field_closed(spec, H, values, check_domain=False).vector()


def tacs_convention_comparison(epsilon: float, n: int = 1) -> dict:
    """Coordinate Hamiltonian fields of this artifact versus the uncorrected
    variants from the transitive-almost-contact literature.

    Returns, per generator, callables point -> (ours, uncorrected, delta).
    Exposed only as a comparison; the corrected convention X_f ⌟ theta = -f
    is what every solver in this package uses.
    """
    from .structures import darboux_chart

    chart = darboux_chart(n)
    pairs, kappa = darboux_pairs(chart)

    def ours_q(i):
        def f(values):
            out = np.zeros(chart.dimension)
            out[pairs[i][1]] = -1.0
            out[kappa] = -values[pairs[i][0]]
            return out

        return f

    def uncorrected_q(i):
        def f(values):
            out = np.zeros(chart.dimension)
            out[pairs[i][1]] = -1.0
            out[kappa] = epsilon * values[pairs[i][0]]
            return out

        return f

    def ours_p(i):
        def f(values):
            out = np.zeros(chart.dimension)
            out[pairs[i][0]] = 1.0
            out[kappa] = -(epsilon + 1.0) * values[pairs[i][1]]
            return out

        return f

    def uncorrected_p(i):
        def f(values):
            out = np.zeros(chart.dimension)
            out[pairs[i][0]] = 1.0
            return out

        return f

    def ours_kappa(values):
        out = np.zeros(chart.dimension)
        for qi, pi in pairs:
            out[pi] = epsilon * values[pi]
        out[kappa] = -values[kappa]
        return out

    def uncorrected_kappa(values):
        out = np.zeros(chart.dimension)
        for qi, pi in pairs:
            out[pi] = epsilon * values[pi]
        out[kappa] = epsilon * values[kappa]
        return out

    table = {}
    for i in range(n):
        table["X_q%d" % (i + 1)] = (ours_q(i), uncorrected_q(i))
        table["X_p%d" % (i + 1)] = (ours_p(i), uncorrected_p(i))
    table["X_kappa"] = (ours_kappa, uncorrected_kappa)

    def report(values) -> dict:
        values = np.asarray(values, dtype=float)
        out = {}
        for key, (mine, theirs) in table.items():
            v1, v2 = mine(values), theirs(values)
            out[key] = {
                "corrected": v1.tolist(),
                "uncorrected": v2.tolist(),
                "max_delta": float(np.abs(v1 - v2).max()),
            }
        return out

    return {"chart": chart, "report": report}


# --------------------------------------------------------------------------
# Brackets
# --------------------------------------------------------------------------


def poisson_bracket(f: ScalarField, g: ScalarField, at, chart: Chart | None = None) -> float:
    """{f, g} = sum_i df/dq^i dg/dp_i - dg/dq^i df/dp_i on a Darboux chart."""
    chart = chart or f.chart
    pairs, _ = darboux_pairs(chart)
    values = coerce_values(chart, at)
    if not isinstance(at, ChartPoint):
        chart.check(values)
    df = f.gradient(values, check_domain=False)
    dg = g.gradient(values, check_domain=False)
    return float(sum(df[q] * dg[p] - dg[q] * df[p] for q, p in pairs))


def euler_part(f: ScalarField) -> ScalarField:
    """Euler operator f_e = f - p_i df/dp_i on a Darboux chart."""
    pairs, _ = darboux_pairs(f.chart)
    out = f
    for _, pi in pairs:
        p_coord = ScalarField.parse(f.chart, f.chart.coordinates[pi])
        out = out - p_coord * f.partial(f.chart.coordinates[pi])
    return out


def jacobi_bracket(f: ScalarField, g: ScalarField, at) -> float:
    """Contact-chart bracket {f,g}_P + f_e dg/dkappa - g_e df/dkappa."""
    chart = f.chart
    _, kappa = darboux_pairs(chart)
    values = coerce_values(chart, at)
    if not isinstance(at, ChartPoint):
        chart.check(values)
    kname = chart.coordinates[kappa]
    pb = poisson_bracket(f, g, values, chart)
    fe = euler_part(f).value(values, check_domain=False)
    ge = euler_part(g).value(values, check_domain=False)
    fk = f.partial(kname).value(values, check_domain=False)
    gk = g.partial(kname).value(values, check_domain=False)
    return pb + fe * gk - ge * fk


def jacobi_bracket_generic(
    spec: StructureSpec, f: ScalarField, g: ScalarField, at
) -> float:
    """Coordinate-free contact bracket dEta(X_f, X_g) + f R(g) - g R(f).

    Works on any contact structure; agrees with :func:`jacobi_bracket` in
    Darboux coordinates and is the reference path for structures whose
    printed bracket formulas are suspect.
    """
    values = coerce_values(spec.chart, at)
    if not isinstance(at, ChartPoint):
        spec.chart.check(values)
    Xf = hamiltonian_field_generic(spec, f, values, check_domain=False)
    Xg = hamiltonian_field_generic(spec, g, values, check_domain=False)
    om = spec.omega_matrix(values, check_domain=False)
    R = reeb(spec, values, check_domain=False)
    fv = f.value(values, check_domain=False)
    gv = g.value(values, check_domain=False)
    Rg = R @ g.gradient(values, check_domain=False)
    Rf = R @ f.gradient(values, check_domain=False)
    return float(Xf @ om @ Xg + fv * Rg - gv * Rf)


# --------------------------------------------------------------------------
# Trajectories
# --------------------------------------------------------------------------


@dataclass
class Trajectory:
    chart: Chart
    times: np.ndarray
    states: np.ndarray
    hamiltonian_values: np.ndarray
    dissipation_residuals: np.ndarray
    escaped: bool = False
    diagnostic: str = ""
    metadata: dict = dc_field(default_factory=dict)

    def points(self) -> list[ChartPoint]:
        return [self.chart.point(row) for row in self.states]

    @property
    def max_dissipation_residual(self) -> float:
        interior = self.dissipation_residuals[1:-1]
        if interior.size == 0:
            return 0.0
        return float(np.max(interior))

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.hamiltonian_values - self.hamiltonian_values[0])))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", *self.chart.coordinates, "H", "dissipation_residual"])
            for i, t in enumerate(self.times):
                writer.writerow(
                    [_fmt17(t)]
                    + [_fmt17(v) for v in self.states[i]]
                    + [_fmt17(self.hamiltonian_values[i]), _fmt17(self.dissipation_residuals[i])]
                )

    def to_json(self, path, **metadata) -> None:
        doc = {
            "chart": self.chart.to_json(),
            "times": [float(t) for t in self.times],
            "states": [[float(v) for v in row] for row in self.states],
            "hamiltonian_values": [float(v) for v in self.hamiltonian_values],
            "dissipation_residuals": [float(v) for v in self.dissipation_residuals],
            "escaped": self.escaped,
            "diagnostic": self.diagnostic,
            "metadata": {**self.metadata, **metadata},
        }
        Path(path).write_text(json.dumps(doc, indent=2))


def _fmt17(x: float) -> str:
    return "%.17g" % x


def _guard_events(chart: Chart):
    events = []
    for g in chart.guards:
        i = chart.index(g.coordinate)

        def ev(t, y, _i=i, _g=g):
            return (y[_i] - _g.bound) * (-1.0 if _g.upper else 1.0)

        ev.terminal = True
        ev.direction = -1.0
        events.append(ev)
    return events


def integrate(
    spec: StructureSpec,
    H: ScalarField,
    x0: ChartPoint,
    t_end: float,
    dt: float,
    method: str = "adaptive-rk45",
    rtol: float = 1e-9,
    atol: float = 1e-9,
    rhs: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Trajectory:
    """Flow x' = X_H(x) sampled on a uniform dt grid.

    Recorded states are guard-checked; a mid-flow domain escape truncates the
    trajectory and sets ``escaped`` with a diagnostic instead of raising.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    chart = spec.chart
    if rhs is None:
        def rhs(values):
            return hamiltonian_field_generic(spec, H, values, check_domain=False)

    n_steps = int(round(t_end / dt))
    times = np.linspace(0.0, n_steps * dt, n_steps + 1)
    if t_end == 0.0:
        times = np.array([0.0])

    states = [x0.array]
    escaped = False
    diagnostic = ""

    if method == "rk4":
        y = x0.array.copy()
        for i in range(len(times) - 1):
            h = times[i + 1] - times[i]
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * h * k1)
            k3 = rhs(y + 0.5 * h * k2)
            k4 = rhs(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not chart.contains(y):
                escaped = True
                diagnostic = "domain escape at t=%g" % times[i + 1]
                break
            states.append(y.copy())
        states = np.array(states)
        times = times[: len(states)]
    elif method == "adaptive-rk45":
        if len(times) > 1:
            sol = solve_ivp(
                lambda t, y: rhs(y),
                (0.0, float(times[-1])),
                x0.array,
                method="RK45",
                t_eval=times,
                rtol=rtol,
                atol=atol,
                events=_guard_events(chart),
            )
            if sol.status == 1:
                escaped = True
                hits = [te[0] for te in sol.t_events if len(te)]
                diagnostic = (
                    "domain escape near t=%g" % min(hits) if hits else "terminated early"
                )
            elif sol.status != 0:
                escaped = True
                diagnostic = sol.message
            kept = []
            for row in sol.y.T:
                if chart.contains(row):
                    kept.append(row)
                else:
                    escaped = True
                    diagnostic = diagnostic or "domain escape on recorded state"
                    break
            states = np.array(kept) if kept else np.array([x0.array])
            times = times[: len(states)]
        else:
            states = np.array([x0.array])
    else:
        raise ValueError("unknown method %r (use rk4 or adaptive-rk45)" % method)

    h_values = np.array([H.value(row, check_domain=False) for row in states])
    rh_values = np.empty(len(states))
    for i, row in enumerate(states):
        R = reeb(spec, row, check_domain=False)
        rh_values[i] = R @ H.gradient(row, check_domain=False)

    residuals = _dissipation_residuals(times, h_values, rh_values)
    return Trajectory(
        chart=chart,
        times=times,
        states=np.asarray(states),
        hamiltonian_values=h_values,
        dissipation_residuals=residuals,
        escaped=escaped,
        diagnostic=diagnostic,
        metadata={"method": method, "dt": dt, "rtol": rtol, "atol": atol},
    )


def _dissipation_residuals(times, h_values, rh_values) -> np.ndarray:
    """|dH/dt + H R(H)| with centered differences on the stored samples.

    Endpoints use one-sided differences; summaries only report the interior.
    """
    m = len(times)
    out = np.zeros(m)
    if m < 2:
        return out
    for i in range(m):
        if i == 0:
            hdot = (h_values[1] - h_values[0]) / (times[1] - times[0])
        elif i == m - 1:
            hdot = (h_values[-1] - h_values[-2]) / (times[-1] - times[-2])
        else:
            hdot = (h_values[i + 1] - h_values[i - 1]) / (times[i + 1] - times[i - 1])
        out[i] = abs(hdot + h_values[i] * rh_values[i])
    return out

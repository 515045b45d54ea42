"""Coordinate charts, domain guards, scalar fields and chart maps.

Fields are evaluated pointwise.  A field backed by an expression tree has
exact first and second partial derivatives; a field backed by an opaque
callable falls back to central finite differences with step
``h_i = max(1, |x_i|) * eps**(1/3)``.

Domain guards are hard constraints: evaluating at a violating point raises
:class:`DomainError` rather than returning NaN (the built-in half-plane
metrics blow up at the guard surface).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .expressions import Expr, EvalError, parse

FD_STEP_EXPONENT = 1.0 / 3.0
_EPS_CBRT = float(np.finfo(float).eps) ** FD_STEP_EXPONENT


def fd_step(x: float) -> float:
    """Central-difference step: max(1, |x|) * machine-eps**(1/3)."""
    return max(1.0, abs(x)) * _EPS_CBRT


class DomainError(ValueError):
    """A point violates a chart's domain guards."""


class ChartMismatchError(ValueError):
    """Operands live on different charts."""


@dataclass(frozen=True)
class Guard:
    """Open or closed half-space constraint on one coordinate.

    ``upper=False`` means ``coordinate > bound`` (``>=`` when non-strict);
    ``upper=True`` flips the inequality.
    """

    coordinate: str
    bound: float
    strict: bool = True
    upper: bool = False

    def holds(self, value: float) -> bool:
        if self.upper:
            return value < self.bound if self.strict else value <= self.bound
        return value > self.bound if self.strict else value >= self.bound

    def describe(self) -> str:
        op = ("<" if self.strict else "<=") if self.upper else (">" if self.strict else ">=")
        return "%s %s %s" % (self.coordinate, op, self.bound)

    def to_json(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "bound": self.bound,
            "strict": self.strict,
            "upper": self.upper,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Guard":
        return cls(
            coordinate=data["coordinate"],
            bound=float(data["bound"]),
            strict=bool(data.get("strict", True)),
            upper=bool(data.get("upper", False)),
        )


@dataclass(frozen=True)
class Chart:
    name: str
    coordinates: tuple[str, ...]
    guards: tuple[Guard, ...] = ()

    def __post_init__(self):
        if len(set(self.coordinates)) != len(self.coordinates):
            raise ValueError("duplicate coordinate names on chart %r" % self.name)
        for g in self.guards:
            if g.coordinate not in self.coordinates:
                raise ValueError(
                    "guard references unknown coordinate %r on chart %r"
                    % (g.coordinate, self.name)
                )

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def index(self, coordinate: str) -> int:
        try:
            return self.coordinates.index(coordinate)
        except ValueError:
            raise KeyError(
                "chart %r has no coordinate %r" % (self.name, coordinate)
            ) from None

    def check(self, values: Sequence[float]) -> None:
        if len(values) != self.dimension:
            raise DomainError(
                "chart %r expects %d values, got %d"
                % (self.name, self.dimension, len(values))
            )
        for g in self.guards:
            v = values[self.index(g.coordinate)]
            if not g.holds(v):
                raise DomainError(
                    "point violates %s on chart %r (got %s = %r)"
                    % (g.describe(), self.name, g.coordinate, v)
                )

    def contains(self, values: Sequence[float]) -> bool:
        try:
            self.check(values)
        except DomainError:
            return False
        return True

    def point(self, values: Sequence[float]) -> "ChartPoint":
        return ChartPoint(self, tuple(float(v) for v in values))

    def env(self, values: Sequence[float]) -> dict[str, float]:
        return dict(zip(self.coordinates, map(float, values)))

    def sample_box(self, margin: float = 0.25, half_width: float = 2.0):
        """Axis-aligned box of in-domain points used for probe sampling."""
        box = []
        for name in self.coordinates:
            lo, hi = -half_width, half_width
            for g in self.guards:
                if g.coordinate != name:
                    continue
                if g.upper:
                    hi = min(hi, g.bound - margin)
                else:
                    lo = max(lo, g.bound + margin)
            if lo >= hi:
                raise ValueError("empty sample box for coordinate %r" % name)
            box.append((lo, hi))
        return box

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "coordinates": list(self.coordinates),
            "guards": [g.to_json() for g in self.guards],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Chart":
        return cls(
            name=data.get("name", "chart"),
            coordinates=tuple(data["coordinates"]),
            guards=tuple(Guard.from_json(g) for g in data.get("guards", ())),
        )


@dataclass(frozen=True)
class ChartPoint:
    chart: Chart
    values: tuple[float, ...]

    def __post_init__(self):
        self.chart.check(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def env(self) -> dict[str, float]:
        return self.chart.env(self.values)

    def __getitem__(self, coordinate: str) -> float:
        return self.values[self.chart.index(coordinate)]


def coerce_values(chart: Chart, at) -> np.ndarray:
    if isinstance(at, ChartPoint):
        if at.chart.coordinates != chart.coordinates:
            raise ChartMismatchError(
                "point on chart %r used with chart %r" % (at.chart.name, chart.name)
            )
        return at.array
    return np.asarray(at, dtype=float)


class ScalarField:
    """Real-valued field on a chart, symbolic or opaque-callable backed."""

    def __init__(
        self,
        chart: Chart,
        expr: Expr | None = None,
        fn: Callable[[np.ndarray], float] | None = None,
        params: Mapping[str, float] | None = None,
        source: str | None = None,
    ):
        if (expr is None) == (fn is None):
            raise ValueError("exactly one of expr / fn must be given")
        self.chart = chart
        self.expr = expr
        self.fn = fn
        self.params = dict(params or {})
        self.source = source
        overlap = set(self.params) & set(chart.coordinates)
        if overlap:
            raise ValueError("parameters shadow coordinates: %s" % sorted(overlap))
        if expr is not None:
            unbound = expr.names() - set(chart.coordinates) - set(self.params)
            if unbound:
                raise EvalError(
                    "expression references unbound names %s on chart %r"
                    % (sorted(unbound), chart.name)
                )

    # -- constructors ------------------------------------------------------

    @classmethod
    def parse(cls, chart: Chart, source: str, params=None) -> "ScalarField":
        return cls(chart, expr=parse(source), params=params, source=source)

    @classmethod
    def from_expr(cls, chart: Chart, expr: Expr, params=None) -> "ScalarField":
        return cls(chart, expr=expr, params=params)

    @classmethod
    def from_callable(cls, chart: Chart, fn, params=None) -> "ScalarField":
        return cls(chart, fn=fn, params=params)

    @classmethod
    def constant(cls, chart: Chart, value: float) -> "ScalarField":
        from .expressions import Num

        return cls(chart, expr=Num(float(value)))

    @property
    def derivative_mode(self) -> str:
        return "symbolic" if self.expr is not None else "finite-difference"

    # -- evaluation --------------------------------------------------------

    def value(self, at, check_domain: bool = True) -> float:
        values = coerce_values(self.chart, at)
        if check_domain and not isinstance(at, ChartPoint):
            self.chart.check(values)
        return self._eval(values)

    __call__ = value

    def _eval(self, values: np.ndarray) -> float:
        if self.expr is not None:
            env = self.chart.env(values)
            env.update(self.params)
            return self.expr.eval(env)
        return float(self.fn(values))

    # -- differentiation ---------------------------------------------------

    def partial(self, coordinate: str) -> "ScalarField":
        i = self.chart.index(coordinate)
        if self.expr is not None:
            return ScalarField(
                self.chart, expr=self.expr.diff(coordinate), params=self.params
            )

        def fd(values, _i=i, _f=self._eval):
            h = fd_step(values[_i])
            up = np.array(values, dtype=float)
            dn = np.array(values, dtype=float)
            up[_i] += h
            dn[_i] -= h
            return (_f(up) - _f(dn)) / (2.0 * h)

        return ScalarField(self.chart, fn=fd, params=self.params)

    def gradient(self, at, check_domain: bool = True) -> np.ndarray:
        values = coerce_values(self.chart, at)
        if check_domain and not isinstance(at, ChartPoint):
            self.chart.check(values)
        if self.expr is not None:
            env = self.chart.env(values)
            env.update(self.params)
            return np.array(
                [self.expr.diff(c).eval(env) for c in self.chart.coordinates]
            )
        out = np.empty(self.chart.dimension)
        for i in range(self.chart.dimension):
            h = fd_step(values[i])
            up = np.array(values, dtype=float)
            dn = np.array(values, dtype=float)
            up[i] += h
            dn[i] -= h
            out[i] = (self._eval(up) - self._eval(dn)) / (2.0 * h)
        return out

    # -- algebra (symbolic when both operands are) ---------------------------

    def _merge_params(self, other: "ScalarField") -> dict[str, float]:
        merged = dict(self.params)
        for k, v in other.params.items():
            if k in merged and merged[k] != v:
                raise ValueError("conflicting values for parameter %r" % k)
            merged[k] = v
        return merged

    def _combine(self, other, op_expr, op_val) -> "ScalarField":
        if isinstance(other, (int, float)):
            other = ScalarField.constant(self.chart, other)
        if other.chart.coordinates != self.chart.coordinates:
            raise ChartMismatchError("field algebra across different charts")
        params = self._merge_params(other)
        if self.expr is not None and other.expr is not None:
            return ScalarField(
                self.chart, expr=op_expr(self.expr, other.expr), params=params
            )
        f, g = self._eval, other._eval
        return ScalarField(
            self.chart, fn=lambda v: op_val(f(v), g(v)), params=params
        )

    def __add__(self, other):
        from .expressions import add

        return self._combine(other, add, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        from .expressions import sub

        return self._combine(other, sub, lambda a, b: a - b)

    def __mul__(self, other):
        from .expressions import mul

        return self._combine(other, mul, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        from .expressions import neg

        if self.expr is not None:
            return ScalarField(self.chart, expr=neg(self.expr), params=self.params)
        f = self._eval
        return ScalarField(self.chart, fn=lambda v: -f(v), params=self.params)

    def is_zero(self) -> bool:
        from .expressions import Num

        return isinstance(self.expr, Num) and self.expr.value == 0.0

    def __repr__(self):
        body = self.source or (str(self.expr) if self.expr is not None else "<fn>")
        return "ScalarField(%s on %s)" % (body, self.chart.name)


@dataclass(frozen=True)
class ChartMap:
    """Smooth map between charts, one component field per target coordinate."""

    source: Chart
    target: Chart
    components: tuple[ScalarField, ...]

    def __post_init__(self):
        if len(self.components) != self.target.dimension:
            raise ValueError("need one component field per target coordinate")
        for c in self.components:
            if c.chart.coordinates != self.source.coordinates:
                raise ChartMismatchError("component field not on source chart")

    def __call__(self, at) -> ChartPoint:
        values = coerce_values(self.source, at)
        self.source.check(values)
        image = [c._eval(values) for c in self.components]
        try:
            return self.target.point(image)
        except DomainError as exc:
            raise DomainError("image point leaves target domain: %s" % exc) from None

    def jacobian(self, at) -> np.ndarray:
        """d(target_i)/d(source_j), symbolic when possible, else central FD."""
        values = coerce_values(self.source, at)
        self.source.check(values)
        return np.vstack([c.gradient(values) for c in self.components])

    @staticmethod
    def identity(chart: Chart) -> "ChartMap":
        from .expressions import Name

        comps = tuple(
            ScalarField(chart, expr=Name(c)) for c in chart.coordinates
        )
        return ChartMap(chart, chart, comps)

    @classmethod
    def from_exprs(cls, source: Chart, target: Chart, exprs, params=None) -> "ChartMap":
        comps = tuple(
            ScalarField.parse(source, e, params) if isinstance(e, str)
            else ScalarField.from_expr(source, e, params)
            for e in exprs
        )
        return cls(source, target, comps)

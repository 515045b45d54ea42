"""Almost-contact-metric machinery on the extended half-plane chart.

The (1,1)-tensor Phi is indexed by (x, y, q, p, kappa), rows = output slot.
Its last column vanishes, the last row follows from eta Phi = 0, and six
off-diagonal symmetry relations (with zeta = tau/sigma, tau = k/y^2,
sigma = 2 nu) leave ten independent components.  Fixing the four free
components (Phi_yq, Phi_yp, Phi_qp, Phi_pq) reduces the axioms to a 2x2
nonlinear system in (Phi_xy, Phi_xq), solved here by damped Newton from a
multistart grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import least_squares

from .charts import Chart, ChartPoint, ScalarField, coerce_values, fd_step
from .forms import KForm, exterior_derivative
from .manifolds import CHART_XJT, ModelParameters, metric_matrix

PHI_COORDS = ("x", "y", "q", "p", "kappa")


class PhiSolveError(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        super().__init__("%s (best residual %.3e)" % (message, best_residual))
        self.best_residual = best_residual


@dataclass(frozen=True)
class PhiTensor:
    entries: np.ndarray
    tau: float
    sigma: float

    @property
    def zeta(self) -> float:
        return self.tau / self.sigma

    def rank(self, tol: float = 1e-8) -> int:
        return int(np.linalg.matrix_rank(self.entries, tol=tol))


@dataclass(frozen=True)
class AcmsSolution:
    phi: PhiTensor
    xi: np.ndarray
    eta: np.ndarray
    g_prime: np.ndarray
    residuals: dict[str, float]
    positive_definite: bool
    newton_iterations: int
    free: tuple[float, float, float, float]
    point: ChartPoint
    params: ModelParameters

    INDEPENDENT_EQUATIONS = (
        "square_xx", "square_xq", "square_xp", "square_yq", "square_yp", "square_qq",
    )

    def passes(self, tol: float = 1e-10) -> bool:
        keys = ("phi_squared", "eta_phi", "phi_xi") + self.INDEPENDENT_EQUATIONS
        return all(self.residuals[k] <= tol for k in keys) and self.phi.rank() == 4


def eta_covector(params: ModelParameters, values) -> np.ndarray:
    """Contact one-form sqrt(delta) dkappa + (k/y) dx + nu(-p dq + q dp)."""
    x, y, q, p, _ = values
    return np.array(
        [params.k / y, 0.0, -params.nu * p, params.nu * q, math.sqrt(params.delta)]
    )


def xi_vector(params: ModelParameters) -> np.ndarray:
    return np.array([0.0, 0.0, 0.0, 0.0, 1.0 / math.sqrt(params.delta)])


def phi_hat_matrix(params: ModelParameters, values) -> np.ndarray:
    """Antisymmetric coefficient matrix of d(eta): tau on (x,y), sigma on (q,p)."""
    tau = params.k / values[1] ** 2
    sigma = 2.0 * params.nu
    out = np.zeros((5, 5))
    out[0, 1] = tau
    out[1, 0] = -tau
    out[2, 3] = sigma
    out[3, 2] = -sigma
    return out


# --------------------------------------------------------------------------
# Component chain
# --------------------------------------------------------------------------


def _derived_components(free, unknowns, zeta) -> dict[str, float]:
    """All ten independent components from the four free ones and the two
    Newton unknowns, via the elimination chain."""
    f_yq, f_yp, f_qp, f_pq = free
    f_xy, f_xq = unknowns
    f_xp = f_xq
    f_xx = -(f_xy * (f_yq + f_yp) + f_xq * (f_pq + f_qp)) / (2.0 * f_xq)
    f_qq = (f_xy * (-f_yq + f_yp) + f_xq * (-f_pq + f_qp)) / (2.0 * f_xq)
    f_yx = -(
        f_yq * (f_xy * f_yp + f_xq * f_qp) + f_yp * f_pq * f_xp
    ) / (f_xq * f_xp)
    return {
        "xx": f_xx, "xy": f_xy, "xq": f_xq, "xp": f_xp,
        "yx": f_yx, "yq": f_yq, "yp": f_yp,
        "qq": f_qq, "qp": f_qp, "pq": f_pq,
    }


def _newton_residual(free, unknowns, zeta) -> np.ndarray:
    c = _derived_components(free, unknowns, zeta)
    shared = zeta * c["xq"] * (c["yq"] - c["yp"]) + 1.0
    r1 = c["xx"] ** 2 + shared + c["xy"] * c["yx"]
    r2 = c["qq"] ** 2 + shared + c["qp"] * c["pq"]
    return np.array([r1, r2])


def assemble_phi(components: Mapping[str, float], params: ModelParameters, values) -> np.ndarray:
    """Full 5x5 tensor from the ten independent components: the symmetry
    relations fill rows q and p, the eta Phi = 0 relations fill row kappa and
    the last column vanishes."""
    x, y, q, p, _ = values
    k, nu = params.k, params.nu
    sd = math.sqrt(params.delta)
    tau = k / y**2
    sigma = 2.0 * nu
    zeta = tau / sigma
    c = components
    phi = np.zeros((5, 5))
    phi[0, :4] = (c["xx"], c["xy"], c["xq"], c["xp"])
    phi[1, :4] = (c["yx"], -c["xx"], c["yq"], c["yp"])
    phi[2, :4] = (-zeta * c["yp"], zeta * c["xp"], c["qq"], c["qp"])
    phi[3, :4] = (zeta * c["yq"], -zeta * c["xq"], c["pq"], -c["qq"])
    phi[4, 0] = -((k / y) * c["xx"] + nu * zeta * p * c["yp"] + nu * zeta * q * c["yq"]) / sd
    phi[4, 1] = -((k / y) * c["xy"] - nu * zeta * p * c["xp"] - nu * zeta * q * c["xq"]) / sd
    phi[4, 2] = -((k / y) * c["xq"] - nu * p * c["qq"] + nu * q * c["pq"]) / sd
    phi[4, 3] = -((k / y) * c["xp"] - nu * p * c["qp"] - nu * q * c["qq"]) / sd
    return phi


def assemble_g_prime(components: Mapping[str, float], params: ModelParameters, values) -> np.ndarray:
    """Candidate metric in the printed layout (upper triangle mirrored)."""
    x, y, q, p, _ = values
    k, nu = params.k, params.nu
    sd = math.sqrt(params.delta)
    tau = k / y**2
    sigma = 2.0 * nu
    c = components
    g = np.zeros((5, 5))
    g[0, 0] = k**2 / y**2 - tau * c["xx"]
    g[0, 1] = tau * c["xx"]          # -tau Phi_yy
    g[0, 2] = -nu * k * p / y - tau * c["yq"]
    g[0, 3] = nu * k * q / y - tau * c["yp"]
    g[0, 4] = k * sd / y
    g[1, 1] = tau * c["xy"]
    g[1, 2] = tau * c["xq"]
    g[1, 3] = tau * c["xp"]
    g[2, 2] = nu**2 * p**2 - sigma * c["pq"]
    g[2, 3] = -(nu**2) * p * q - sigma * c["qq"]
    g[2, 4] = -nu * sd * p
    g[3, 3] = nu**2 * q**2 + sigma * c["qp"]
    g[3, 4] = nu * sd * q
    g[4, 4] = params.delta
    for i in range(5):
        for j in range(i):
            g[i, j] = g[j, i]
    return g


def metric_from_defining_relation(phi: np.ndarray, params: ModelParameters, values) -> np.ndarray:
    """eta (x) eta - PhiHat Phi, the metric the axiom chain actually defines.

    Kept separate from :func:`assemble_g_prime` so the solver can report the
    entrywise deviation between the printed matrix and this one.
    """
    eta = eta_covector(params, values)
    return np.outer(eta, eta) - phi_hat_matrix(params, values) @ phi


_DEFAULT_STARTS = tuple(
    (a, b) for a in (-3.0, -1.0, 1.0, 3.0) for b in (-3.0, -1.0, 1.0, 3.0)
)

_BRANCH_FLOOR = 1e-6  # |Phi_xq|, |Phi_xy| below this leaves the solution branch


def solve_phi(
    free,
    params: ModelParameters,
    at,
    tol: float = 1e-10,
    max_iter: int = 80,
    starts=_DEFAULT_STARTS,
) -> AcmsSolution:
    """Damped-Newton multistart solve for a full almost-contact-metric
    candidate (Phi, xi, eta, g') at a point.

    ``free`` fixes (Phi_yq, Phi_yp, Phi_qp, Phi_pq).  Positive definiteness
    of g' is reported as a diagnostic, never imposed on the root-find.
    """
    point = at if isinstance(at, ChartPoint) else CHART_XJT.point(at)
    values = point.array
    free = tuple(float(v) for v in free)
    if len(free) != 4:
        raise ValueError("free components are (Phi_yq, Phi_yp, Phi_qp, Phi_pq)")
    tau = params.k / values[1] ** 2
    sigma = 2.0 * params.nu
    zeta = tau / sigma

    best_residual = math.inf
    solution = None
    iterations = 0
    newton_tol = min(tol, 1e-12)
    for start in starts:
        u = np.array(start, dtype=float)
        if abs(u[1]) < _BRANCH_FLOOR:
            continue
        ok = False
        for it in range(max_iter):
            r = _newton_residual(free, u, zeta)
            rnorm = np.abs(r).max()
            best_residual = min(best_residual, rnorm)
            if rnorm <= newton_tol:
                ok = True
                iterations = it
                break
            jac = _fd_jacobian(lambda v: _newton_residual(free, v, zeta), u)
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
            lam = 1.0
            for _ in range(30):
                trial = u + lam * step
                if abs(trial[1]) >= _BRANCH_FLOOR:
                    tr = _newton_residual(free, trial, zeta)
                    if np.abs(tr).max() < rnorm:
                        break
                lam *= 0.5
            else:
                break
            u = u + lam * step
        if not ok:
            continue
        if abs(u[0]) < _BRANCH_FLOOR or abs(u[1]) < _BRANCH_FLOOR:
            continue  # outside the derivation hypotheses Phi_xy, Phi_xq != 0
        candidate = _finish(free, u, params, point, iterations)
        if candidate.passes(tol):
            return candidate
        if solution is None:
            solution = candidate
    if solution is not None:
        return solution
    raise PhiSolveError(
        "no Newton start converged to a valid branch", best_residual
    )


def _fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> np.ndarray:
    out = np.empty((2, 2))
    for j in range(2):
        h = fd_step(u[j])
        up = u.copy()
        dn = u.copy()
        up[j] += h
        dn[j] -= h
        out[:, j] = (fn(up) - fn(dn)) / (2.0 * h)
    return out


def _finish(free, unknowns, params, point, iterations) -> AcmsSolution:
    values = point.array
    tau = params.k / values[1] ** 2
    sigma = 2.0 * params.nu
    zeta = tau / sigma
    comp = _derived_components(free, unknowns, zeta)
    phi = assemble_phi(comp, params, values)
    eta = eta_covector(params, values)
    xi = xi_vector(params)
    g_prime = assemble_g_prime(comp, params, values)
    g_defining = metric_from_defining_relation(phi, params, values)

    c = comp
    shared = zeta * c["xq"] * (c["yq"] - c["yp"])
    eq = {
        "square_xx": c["xx"] ** 2 + c["xy"] * c["yx"]
        + zeta * (c["xp"] * c["yq"] - c["xq"] * c["yp"]) + 1.0,
        "square_xq": c["xq"] * (c["xx"] + c["qq"]) + c["xy"] * c["yq"] + c["xp"] * c["pq"],
        "square_xp": c["xp"] * (c["xx"] - c["qq"]) + c["xy"] * c["yp"] + c["xq"] * c["qp"],
        "square_yq": c["yq"] * (c["qq"] - c["xx"]) + c["yx"] * c["xq"] + c["yp"] * c["pq"],
        "square_yp": -c["yp"] * (c["xx"] + c["qq"]) + c["yx"] * c["xp"] + c["yq"] * c["qp"],
        "square_qq": zeta * (c["xp"] * c["yq"] - c["yp"] * c["xq"])
        + c["qq"] ** 2 + c["qp"] * c["pq"] + 1.0,
    }
    residuals = {k: abs(v) for k, v in eq.items()}
    residuals["phi_squared"] = float(
        np.abs(phi @ phi + np.eye(5) - np.outer(xi, eta)).max()
    )
    residuals["eta_phi"] = float(np.abs(eta @ phi).max())
    residuals["phi_xi"] = float(np.abs(phi @ xi).max())
    residuals["eta_xi"] = abs(float(eta @ xi) - 1.0)
    residuals["printed_vs_defining_metric"] = float(np.abs(g_prime - g_defining).max())
    residuals["defining_metric_symmetry"] = float(
        np.abs(g_defining - g_defining.T).max()
    )
    eigenvalues = np.linalg.eigvalsh(g_prime)
    return AcmsSolution(
        phi=PhiTensor(entries=phi, tau=tau, sigma=sigma),
        xi=xi,
        eta=eta,
        g_prime=g_prime,
        residuals=residuals,
        positive_definite=bool(eigenvalues.min() > 0.0),
        newton_iterations=iterations,
        free=free,
        point=point,
        params=params,
    )


# --------------------------------------------------------------------------
# Negative witness
# --------------------------------------------------------------------------


def ppp_negative_witness(params: ModelParameters, at) -> float:
    """Strictly positive obstruction k tau / (y g_xx) = 2k/y certifying that
    no Phi is compatible with the invariant metric (alpha = k/2)."""
    values = coerce_values(CHART_XJT, at)
    CHART_XJT.check(values)
    y = values[1]
    tau = params.k / y**2
    g_xx = (params.k / 2.0) / y**2
    return params.k * tau / (y * g_xx)


# --------------------------------------------------------------------------
# Nijenhuis obstruction
# --------------------------------------------------------------------------


def nijenhuis_n1(
    phi,
    eta: KForm,
    xi,
    at,
    convention: str = "factor1",
    chart: Chart | None = None,
) -> float:
    """Max-norm of the normality obstruction [Phi, Phi] + f * d(eta) (x) xi
    over coordinate vector-field pairs, with f = 1 or 2 by convention.

    ``phi`` is a constant matrix or a callable values -> matrix; entry
    derivatives come from symbolic d(eta) coefficients and central FD on the
    Phi entries.  With the determinant pairing used throughout this package,
    the canonical 3-dimensional potential structures are normal under
    ``factor1``; ``factor2`` doubles the correction term.
    """
    if convention not in ("factor1", "factor2"):
        raise ValueError("convention must be factor1 or factor2")
    factor = 1.0 if convention == "factor1" else 2.0
    chart = chart or eta.chart
    values = coerce_values(chart, at)
    if not isinstance(at, ChartPoint):
        chart.check(values)
    dim = chart.dimension

    if callable(phi):
        phi_fn = phi
    else:
        const = np.asarray(phi, dtype=float)
        phi_fn = lambda _v: const
    xi_vec = xi(values) if callable(xi) else np.asarray(xi, dtype=float)

    phi0 = phi_fn(values)
    dphi = np.empty((dim, dim, dim))  # dphi[m] = d(Phi)/d(coord m)
    for m in range(dim):
        h = fd_step(values[m])
        up = values.copy()
        dn = values.copy()
        up[m] += h
        dn[m] -= h
        dphi[m] = (np.asarray(phi_fn(up)) - np.asarray(phi_fn(dn))) / (2.0 * h)

    d_eta = exterior_derivative(eta).at(values, check_domain=False).as_matrix()

    worst = 0.0
    for i in range(dim):
        for j in range(i + 1, dim):
            bracket = (
                np.einsum("m,ml->l", phi0[:, i], dphi[:, :, j])
                - np.einsum("m,ml->l", phi0[:, j], dphi[:, :, i])
                + phi0 @ dphi[j][:, i]
                - phi0 @ dphi[i][:, j]
            )
            n1 = bracket + factor * d_eta[i, j] * xi_vec
            worst = max(worst, float(np.abs(n1).max()))
    return worst


# --------------------------------------------------------------------------
# Sasakian structures from a potential
# --------------------------------------------------------------------------

CHART_SASAKI = Chart("sasaki3", ("x", "y", "kappa"))


@dataclass(frozen=True)
class SasakiPotential:
    """kappa-independent potential K(x, y) on a 3-chart (x, y, kappa)."""

    K: ScalarField

    def __post_init__(self):
        chart = self.K.chart
        if "kappa" not in chart.coordinates:
            raise ValueError("potential chart needs a kappa coordinate")
        dK = self.K.partial("kappa")
        if dK.expr is not None:
            if not dK.is_zero():
                raise ValueError("potential must not depend on kappa")
        else:
            probe = np.array([0.3, 0.7, 0.1])
            if abs(dK.value(probe, check_domain=False)) > 1e-9:
                raise ValueError("potential must not depend on kappa")

    @property
    def chart(self) -> Chart:
        return self.K.chart


@dataclass(frozen=True)
class SasakiStructure:
    chart: Chart
    xi: np.ndarray
    eta: KForm
    d_eta: KForm
    metric: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], np.ndarray]


def sasaki_from_potential(potential: SasakiPotential | ScalarField) -> SasakiStructure:
    """(xi, eta, d eta, g, Phi) generated by a potential via the Wirtinger
    split over real coordinates:

        eta = dkappa + K_y dx - K_x dy
        d eta = -(K_xx + K_yy) dx ^ dy
        g = eta (x) eta - (K_xx + K_yy) (dx^2 + dy^2)
        Phi = g^{-1} D,  D the antisymmetric matrix of d eta.
    """
    if isinstance(potential, ScalarField):
        potential = SasakiPotential(potential)
    K = potential.K
    chart = potential.chart
    k_x = K.partial("x")
    k_y = K.partial("y")
    laplacian = k_x.partial("x") + k_y.partial("y")

    eta = KForm.one_form(chart, {"kappa": 1.0, "x": k_y, "y": -k_x})
    d_eta = exterior_derivative(eta)
    ik = chart.index("kappa")
    xi = np.zeros(chart.dimension)
    xi[ik] = 1.0

    def metric(values) -> np.ndarray:
        values = coerce_values(chart, values)
        ev = eta.at(values, check_domain=False).as_covector()
        lap = laplacian.value(values, check_domain=False)
        g = np.outer(ev, ev)
        g[chart.index("x"), chart.index("x")] += -lap
        g[chart.index("y"), chart.index("y")] += -lap
        return g

    def phi(values) -> np.ndarray:
        values = coerce_values(chart, values)
        lap = laplacian.value(values, check_domain=False)
        if abs(lap) < 1e-12:
            raise ValueError(
                "degenerate potential: K_xx + K_yy vanishes at %s" % list(values)
            )
        g = metric(values)
        d = d_eta.at(values, check_domain=False).as_matrix()
        return np.linalg.solve(g, d)

    return SasakiStructure(
        chart=chart, xi=xi, eta=eta, d_eta=d_eta, metric=metric, phi=phi
    )


def heisenberg_potential() -> SasakiPotential:
    """K = -y^2/2, the potential of the canonical 3-dimensional model."""
    return SasakiPotential(ScalarField.parse(CHART_SASAKI, "-(y^2)/2"))


# --------------------------------------------------------------------------
# Potential-fit diagnostic on the extended chart
# --------------------------------------------------------------------------


def potential_fit_report(params: ModelParameters, at) -> dict:
    """Pointwise least-squares fit of a potential-generated metric against
    the invariant metric of the extended half-plane.

    Parametrizes the potential's first derivatives (4 reals) and hermitian
    second derivatives (4 reals) at the point and reports the best-fit
    residual; no global conclusion is drawn.
    """
    values = coerce_values(CHART_XJT, at)
    CHART_XJT.check(values)
    x, y, q, p, kappa = values
    # invariant metric reordered to (x, y, q, p, kappa)
    mm = metric_matrix(4, params, (x, y, p, q, kappa)).entries
    order = [0, 1, 3, 2, 4]
    target = mm[np.ix_(order, order)]

    def model(u):
        # (B1, A1, B2, A2) are the potential's first partials, (c11, c22)
        # the diagonal and (d1, d2) the real/imaginary mixed second
        # partials, scale factors absorbed.  The hermitian origin forces the
        # sign pattern on the mixed entries.
        b1, a1, b2, a2, c11, c22, d1, d2 = u
        eta = np.array([b1, -a1, b2, -a2, 1.0])
        g = np.outer(eta, eta)
        block = np.zeros((5, 5))
        block[0, 0] = block[1, 1] = c11
        block[2, 2] = block[3, 3] = c22
        block[0, 2] = block[2, 0] = d1
        block[1, 3] = block[3, 1] = d1
        block[1, 2] = block[2, 1] = d2
        block[0, 3] = block[3, 0] = -d2
        return g + block

    def objective(u):
        diff = model(u) - target
        return diff[np.triu_indices(5)]

    fit = least_squares(objective, np.zeros(8), method="lm", max_nfev=20000)
    return {
        "residual": float(np.abs(objective(fit.x)).max()),
        "fitted": fit.x.tolist(),
        "target": target.tolist(),
    }

"""Weighted minimum-energy problem on a target set under an external charge.

The external charge theta sits in Omega and acts on probability measures mu
carried by F through the functional |mu|_g^2 - 2 int U^theta_g dmu, a strictly
convex quadratic on the simplex. The minimizer, the weighted equilibrium
constant, monotone truncation sweeps, mass-escape probes, support splits, and
the dual-field consistency checks all live here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .core import (DiscreteMeasure, DomainConfig, InvariantError, ValidationError,
                   _index_array, nearest_neighbor_distances,
                   validate_field_separation)
from .green import GreenSystem, green_equilibrium, green_sweep
from .riesz import weight_form, weight_norm
from .solvers import KKTRecord, simplex_qp


@dataclass(frozen=True)
class ExternalField:
    """The charge theta, its separation from F, and its derived fields.

    field_values holds f = -U^theta_g on the D-points; dual_field_values the
    analogous vector for the swept charge; mass_bound is the a-priori cap
    theta(D) / rho^(n - alpha) on the field energy of any probability measure
    on F.
    """

    theta: DiscreteMeasure
    rho: float
    field_values: np.ndarray
    dual_field_values: np.ndarray
    theta_swept: DiscreteMeasure
    mass_bound: float


@dataclass(frozen=True)
class GaussSolution:
    minimizer: DiscreteMeasure
    w_value: float
    c_constant: float
    kkt: KKTRecord
    diagnostics: dict


def external_field(gs: GreenSystem, theta: DiscreteMeasure) -> ExternalField:
    rho = validate_field_separation(theta, gs.cfg)
    w_d = gs.measure_on_d(theta)
    u_theta = gs.green.entries @ w_d
    swept = green_sweep(gs, theta, gs.cfg.f_indices).swept
    u_swept = gs.green.entries @ gs.measure_on_d(swept)
    n, alpha = gs.riesz_full.dim, gs.riesz_full.alpha
    return ExternalField(theta=theta, rho=rho,
                         field_values=-u_theta,
                         dual_field_values=-u_swept,
                         theta_swept=swept,
                         mass_bound=theta.total_mass / rho ** (n - alpha))


def _f_positions(gs: GreenSystem, f) -> tuple[np.ndarray, np.ndarray]:
    f = _index_array(f, gs.riesz_full.size, "f")
    if f.size == 0:
        raise ValidationError("target set must be nonempty")
    if not np.isin(f, gs.cfg.f_indices).all():
        raise ValidationError("target set must lie inside F")
    return f, gs.d_positions(f)


def gauss_functional(gs: GreenSystem, fld: ExternalField,
                     mu: DiscreteMeasure) -> float:
    """Energy of mu minus twice its field energy; the quantity being minimized."""
    if not np.isin(mu.support, gs.cfg.f_indices).all():
        raise ValidationError("measure must be supported in F")
    w_d = gs.measure_on_d(mu)
    return float(w_d @ (gs.green.entries @ w_d) + 2.0 * (fld.field_values @ w_d))


def _check_value_bounds(gs: GreenSystem, fld: ExternalField, w_value: float) -> None:
    swept_d = gs.measure_on_d(fld.theta_swept)
    lower_obs = -float(swept_d @ (gs.green.entries @ swept_d))
    lower_mass = -2.0 * fld.mass_bound
    slack = 1e-8 * max(1.0, abs(w_value))
    if w_value < max(lower_obs, lower_mass) - slack:
        raise InvariantError(
            f"functional value {w_value} undercuts its lower bounds "
            f"({lower_obs}, {lower_mass})")


def solve_gauss(gs: GreenSystem, fld: ExternalField, f=None,
                check_uniqueness: bool = False,
                compute_capacity: bool = False) -> GaussSolution:
    """Minimize the functional over probability measures on f.

    The simplex solver's equality multiplier is the weighted equilibrium
    constant; it is cross-checked against the integral of the weighted
    potential against the minimizer, and the gap is reported. Optionally the
    problem is re-solved under a reversed index order to witness uniqueness.
    """
    if f is None:
        f = gs.cfg.f_indices
    f, f_pos = _f_positions(gs, f)
    G = gs.green.block(f_pos)
    b = -fld.field_values[f_pos]
    x, rec = simplex_qp(G, b)
    if rec.mass_error > 1e-12:
        raise InvariantError(f"minimizer mass off by {rec.mass_error}")
    w_value = float(x @ (G @ x) - 2.0 * (b @ x))
    _check_value_bounds(gs, fld, w_value)
    c_cross = float(x @ (G @ x) - x @ b)
    field_energy = float(b @ x)
    if field_energy > fld.mass_bound + 1e-8 * max(1.0, fld.mass_bound):
        raise InvariantError(
            f"field energy {field_energy} exceeds the bound {fld.mass_bound}")
    diagnostics = {
        "theta_swept_mass": fld.theta_swept.total_mass,
        "c_cross_gap": abs(rec.multiplier - c_cross),
        "field_energy": field_energy,
        "uniqueness_gap": None,
        "green_capacity_of_f": None,
    }
    if check_uniqueness:
        perm = np.arange(f_pos.size)[::-1]
        x2, _ = simplex_qp(G[np.ix_(perm, perm)], b[perm])
        back = np.empty_like(x2)
        back[perm] = x2
        diagnostics["uniqueness_gap"] = float(np.max(np.abs(back - x)))
    if compute_capacity:
        c_g, _ = green_equilibrium(gs, f)
        diagnostics["green_capacity_of_f"] = c_g
    w = np.zeros(gs.riesz_full.size)
    w[f] = x
    return GaussSolution(minimizer=DiscreteMeasure(w), w_value=w_value,
                         c_constant=rec.multiplier, kkt=rec,
                         diagnostics=diagnostics)


def explicit_solution(gs: GreenSystem, fld: ExternalField, f=None) -> GaussSolution:
    """Closed-form minimizer: swept charge plus a rescaled equilibrium measure.

    Valid when the charge swept onto f carries mass at most 1; the remaining
    mass is supplied by the equilibrium measure of f scaled by the constant
    c = (1 - swept mass) / capacity.
    """
    if f is None:
        f = gs.cfg.f_indices
    f, f_pos = _f_positions(gs, f)
    if np.array_equal(f, gs.cfg.f_indices):
        swept = fld.theta_swept
    else:
        swept = green_sweep(gs, fld.theta, f).swept
    m = swept.total_mass
    if m > 1.0 + 1e-12:
        raise ValidationError(
            f"swept charge mass {m} exceeds 1; the closed form does not apply")
    c_g, gamma = green_equilibrium(gs, f)
    c = (1.0 - m) / c_g
    lam = swept.weights + c * gamma.weights
    G = gs.green.block(f_pos)
    b = -fld.field_values[f_pos]
    x = lam[f]
    u_wtd = G @ x - b
    on = x > 0
    support_residual = float(np.max(np.abs(u_wtd[on] - c))) if np.any(on) else 0.0
    off_slack = float(max(0.0, np.max(c - u_wtd[~on]))) if np.any(~on) else 0.0
    kkt = KKTRecord(support_residual=support_residual,
                    off_support_slack=off_slack,
                    min_weight=float(min(np.min(x), 0.0)),
                    mass_error=abs(float(x.sum()) - 1.0),
                    multiplier=c, iterations=0, tolerance=0.0)
    w_value = float(x @ (G @ x) - 2.0 * (b @ x))
    return GaussSolution(minimizer=DiscreteMeasure(lam), w_value=w_value,
                         c_constant=c, kkt=kkt,
                         diagnostics={"theta_swept_mass": m,
                                      "green_capacity_of_f": c_g})


def dual_check(gs: GreenSystem, fld: ExternalField, f=None) -> dict:
    """Solve under the charge's field and under the swept charge's field.

    In the continuum the two problems share minimizer, constant, and value;
    the report carries the three observed gaps plus both solutions.
    """
    if f is None:
        f = gs.cfg.f_indices
    f, f_pos = _f_positions(gs, f)
    primal = solve_gauss(gs, fld, f)
    G = gs.green.block(f_pos)
    b_dual = -fld.dual_field_values[f_pos]
    x2, rec2 = simplex_qp(G, b_dual)
    w2 = float(x2 @ (G @ x2) - 2.0 * (b_dual @ x2))
    lam2 = np.zeros(gs.riesz_full.size)
    lam2[f] = x2
    dual = GaussSolution(minimizer=DiscreteMeasure(lam2), w_value=w2,
                         c_constant=rec2.multiplier, kkt=rec2,
                         diagnostics={"theta_swept_mass": fld.theta_swept.total_mass})
    diff = gs.measure_on_d(primal.minimizer) - gs.measure_on_d(dual.minimizer)
    return {
        "w_gap": abs(primal.w_value - dual.w_value),
        "lambda_gap_norm": float(np.sqrt(max(diff @ (gs.green.entries @ diff), 0.0))),
        "c_gap": abs(primal.c_constant - dual.c_constant),
        "primal": primal,
        "dual": dual,
    }


def lambda_class_characterizations(gs: GreenSystem, fld: ExternalField, f,
                                   candidates, sol: GaussSolution | None = None,
                                   tol: float = 1e-9) -> dict:
    """Test the minimizer against candidates inside the admissible class.

    A candidate belongs to the class when its weighted potential clears the
    equilibrium constant everywhere on f. Among members, the minimizer should
    have the pointwise-smallest weighted potential on D and the smallest
    energy norm; margins are reported per candidate, nothing is asserted.
    """
    f, f_pos = _f_positions(gs, f)
    if sol is None:
        sol = solve_gauss(gs, fld, f)
    c = sol.c_constant
    lam_d = gs.measure_on_d(sol.minimizer)
    u_lam = gs.green.entries @ lam_d + fld.field_values
    norm_lam = float(np.sqrt(max(lam_d @ (gs.green.entries @ lam_d), 0.0)))
    scale = max(1.0, float(np.max(np.abs(u_lam))))
    rows = []
    for mu in candidates:
        if not np.isin(mu.support, f).all():
            rows.append({"member": False, "reason": "support outside target",
                         "potential_margin": None, "norm_gap": None})
            continue
        mu_d = gs.measure_on_d(mu)
        u_mu = gs.green.entries @ mu_d + fld.field_values
        member = bool(np.min(u_mu[f_pos]) >= c - tol * scale)
        if not member:
            rows.append({"member": False, "reason": "potential below constant",
                         "potential_margin": None, "norm_gap": None})
            continue
        rows.append({
            "member": True,
            "reason": None,
            "potential_margin": float(np.min(u_mu - u_lam)),
            "norm_gap": float(np.sqrt(max(mu_d @ (gs.green.entries @ mu_d), 0.0))
                              - norm_lam),
        })
    members = [r for r in rows if r["member"]]
    return {
        "constant": c,
        "rows": rows,
        "potential_minimal": all(r["potential_margin"] >= -tol * scale for r in members),
        "norm_minimal": all(r["norm_gap"] >= -tol * max(1.0, norm_lam) for r in members),
    }


@dataclass(frozen=True)
class SweepReport:
    direction: str
    sizes: list
    w_values: list
    c_values: list
    swept_masses: list
    cauchy_norms: list
    potential_gaps: list
    parallelogram: list
    solutions: list


def _nesting_direction(family) -> str:
    sets = [set(int(i) for i in np.asarray(m).ravel()) for m in family]
    if len(sets) == 1:
        return "increasing"
    if all(a <= b for a, b in zip(sets, sets[1:])):
        return "increasing"
    if all(a >= b for a, b in zip(sets, sets[1:])):
        return "decreasing"
    raise ValidationError("family members must be nested")


def truncation_sweep(gs: GreenSystem, fld: ExternalField, family) -> SweepReport:
    """Solve along a nested family and check the monotone-value laws.

    Along growing targets the optimal value may only fall (and the constant
    may only fall when every swept mass is at most 1); along shrinking targets
    the value may only rise. Violations beyond 1e-10 raise. Distances of each
    stage to the final stage and the paired bound
    |lam_s - lam_t|^2 <= 2 |w_s - w_t| are recorded for inspection.
    """
    if not len(family):
        raise ValidationError("family must be nonempty")
    direction = _nesting_direction(family)
    sols, masses = [], []
    for member in family:
        sols.append(solve_gauss(gs, fld, member))
        masses.append(green_sweep(gs, fld.theta, member).mass_out)
    w = [s.w_value for s in sols]
    c = [s.c_constant for s in sols]
    for a, b in zip(w, w[1:]):
        if direction == "increasing" and b > a + 1e-10:
            raise InvariantError(f"value rose along a growing family: {a} -> {b}")
        if direction == "decreasing" and b < a - 1e-10:
            raise InvariantError(f"value fell along a shrinking family: {a} -> {b}")
    if direction == "increasing" and all(m <= 1.0 + 1e-12 for m in masses):
        for a, b in zip(c, c[1:]):
            if b > a + 1e-10:
                raise InvariantError(f"constant rose along a growing family: {a} -> {b}")
    lam_ds = [gs.measure_on_d(s.minimizer) for s in sols]
    u_last = gs.green.entries @ lam_ds[-1]
    cauchy, gaps = [], []
    for ld in lam_ds:
        diff = ld - lam_ds[-1]
        cauchy.append(float(np.sqrt(max(diff @ (gs.green.entries @ diff), 0.0))))
        gaps.append(float(np.max(np.abs(gs.green.entries @ ld - u_last))))
    para = []
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            diff = lam_ds[i] - lam_ds[j]
            lhs = float(diff @ (gs.green.entries @ diff))
            para.append({"i": i, "j": j, "lhs": lhs,
                         "rhs": 2.0 * abs(w[i] - w[j])})
    return SweepReport(direction=direction,
                       sizes=[int(np.asarray(m).size) for m in family],
                       w_values=w, c_values=c, swept_masses=masses,
                       cauchy_norms=cauchy, potential_gaps=gaps,
                       parallelogram=para, solutions=sols)


def exhaustion_mass_probe(gs: GreenSystem, fld: ExternalField, family,
                          window=None) -> dict:
    """Watch where the minimizer's mass goes along growing truncations.

    With total charge below 1 the minimizer leaks mass out of any fixed
    window; with charge exactly 1 it tracks the swept charge; with charge
    above 1 its support freezes. The probe reports window mass, support
    radius, distance to the swept charge, and the minimizer's own weighted
    potential integrated against itself (negative once the charge overpowers
    the unit budget), leaving interpretation to the caller.
    """
    if not len(family):
        raise ValidationError("family must be nonempty")
    if _nesting_direction(family) != "increasing":
        raise ValidationError("exhaustion families must grow")
    if window is None:
        window = family[0]
    window = _index_array(window, gs.riesz_full.size, "window")
    pts = gs.cfg.point_set.points
    rows = []
    for member in family:
        member_arr, _ = _f_positions(gs, member)
        sol = solve_gauss(gs, fld, member_arr)
        swept = green_sweep(gs, fld.theta, member_arr).swept
        lam = sol.minimizer
        lam_d = gs.measure_on_d(lam)
        diff = lam_d - gs.measure_on_d(swept)
        supp = lam.support
        radius = float(np.max(np.linalg.norm(pts[supp], axis=1))) if supp.size else 0.0
        c_xi = float(lam_d @ (gs.green.entries @ lam_d) + fld.field_values @ lam_d)
        rows.append({
            "size": int(member_arr.size),
            "w": sol.w_value,
            "c": sol.c_constant,
            "swept_mass": swept.total_mass,
            "window_mass": float(lam.weights[window].sum()),
            "support_radius": radius,
            "dist_to_swept": float(np.sqrt(max(diff @ (gs.green.entries @ diff), 0.0))),
            "extremal_energy": c_xi,
        })
    return {"window_size": int(window.size), "stages": rows}


def support_descriptor(sol: GaussSolution, cfg: DomainConfig,
                       adjacency_factor: float = 1.5) -> dict:
    """Split the minimizer's mass between the boundary layer of F and its interior.

    An F-point is boundary when some Omega-point sits within adjacency_factor
    times its spacing to the nearest other F-point. The report also records
    whether the Omega cloud is graph-connected under the same rule, since the
    support predictions assume a connected field region.
    """
    pts = cfg.point_set.points
    f = cfg.f_indices
    omega = cfg.omega_indices
    f_pts = pts[f]
    spacing = nearest_neighbor_distances(f_pts)
    omega_tree = cKDTree(pts[omega])
    d_to_omega, _ = omega_tree.query(f_pts, k=1)
    boundary_mask = d_to_omega <= adjacency_factor * spacing
    w_f = sol.minimizer.weights[f]
    total = float(w_f.sum())
    boundary_mass = float(w_f[boundary_mask].sum())
    supp = sol.minimizer.support
    radius = float(np.max(np.linalg.norm(pts[supp], axis=1))) if supp.size else 0.0

    omega_pts = pts[omega]
    if omega.size > 1:
        o_spacing = nearest_neighbor_distances(omega_pts)
        o_tree = cKDTree(omega_pts)
        rows_i, rows_j = [], []
        for i in range(omega.size):
            for j in o_tree.query_ball_point(omega_pts[i], adjacency_factor * o_spacing[i]):
                if j != i:
                    rows_i.append(i)
                    rows_j.append(j)
        adj = csr_matrix((np.ones(len(rows_i)), (rows_i, rows_j)),
                         shape=(omega.size, omega.size))
        n_comp, _ = connected_components(adj, directed=False)
    else:
        n_comp = 1
    return {
        "boundary_count": int(np.count_nonzero(boundary_mask)),
        "boundary_mass_fraction": boundary_mass / total if total else 0.0,
        "interior_mass_fraction": 1.0 - boundary_mass / total if total else 0.0,
        "support_radius": radius,
        "omega_connected": bool(n_comp == 1),
        "omega_components": int(n_comp),
        "adjacency_factor": adjacency_factor,
    }


def field_decay_probe(gs: GreenSystem, fld: ExternalField,
                      probe_points: np.ndarray) -> list[dict]:
    """Riesz potential of the charge at far probes against its distance envelope.

    Every value is bounded by total charge times nearest-support-distance to
    the power alpha - n; that bound is exact kernel monotonicity and is
    enforced. Rows come back sorted by distance so decay trends read off
    directly.
    """
    probes = np.atleast_2d(np.asarray(probe_points, dtype=float))
    supp = fld.theta.support
    src = gs.cfg.point_set.points[supp]
    wts = fld.theta.weights[supp]
    n, alpha = gs.riesz_full.dim, gs.riesz_full.alpha
    total = fld.theta.total_mass
    rows = []
    for p in probes:
        dists = np.linalg.norm(src - p, axis=1)
        d_min = float(np.min(dists))
        if d_min == 0.0:
            raise ValidationError("probe coincides with a charge point")
        value = float(wts @ dists ** (alpha - n))
        envelope = total * d_min ** (alpha - n)
        if value > envelope * (1 + 1e-12):
            raise InvariantError(
                f"potential {value} exceeds its envelope {envelope}")
        rows.append({"distance": d_min, "value": value, "envelope": envelope})
    rows.sort(key=lambda r: r["distance"])
    return rows

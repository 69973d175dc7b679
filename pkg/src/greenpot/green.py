"""Green kernel of a domain built from Riesz sweeps onto the complement sample.

Entry (i, j) of the Green matrix is the Riesz kernel minus the potential of
the unit point mass at x_i swept onto the complement sample Y, evaluated at
x_j. Rows are assembled source by source, the matrix is symmetrized by
averaging, and the pre-symmetrization residual is kept as a measure of the
Y-sampling error. With Y empty the construction degenerates to the Riesz
matrix on D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (DiscreteMeasure, DomainConfig, InvariantError, ValidationError,
                   _index_array)
from .balayage import BalayageResult, SweepResiduals, dirac_sweep_matrix, sweep
from .riesz import KernelMatrix, assemble_riesz, make_kernel
from .solvers import nonneg_qp

ENTRY_TOL = 1e-10


@dataclass(frozen=True)
class GreenSystem:
    """Green kernel on the D-points plus the Riesz system it came from.

    The green matrix is indexed by position within cfg.d_indices;
    dirac_sweep_to_y column k is the swept unit mass for the k-th D-point.
    """

    cfg: DomainConfig
    riesz_full: KernelMatrix
    green: KernelMatrix
    dirac_sweep_to_y: np.ndarray
    asymmetry_residual: float

    def d_positions(self, global_indices) -> np.ndarray:
        idx = np.asarray(global_indices, dtype=int)
        pos = np.searchsorted(self.cfg.d_indices, idx)
        ok = (pos < self.cfg.d_indices.size) & (self.cfg.d_indices[np.minimum(
            pos, self.cfg.d_indices.size - 1)] == idx)
        if not np.all(ok):
            raise ValidationError("indices outside the domain D")
        return pos

    def measure_on_d(self, mu: DiscreteMeasure) -> np.ndarray:
        if len(mu) != self.riesz_full.size:
            raise ValidationError("measure size does not match the point cloud")
        supp = mu.support
        if not np.isin(supp, self.cfg.d_indices).all():
            raise ValidationError("measure must be supported in D")
        return mu.weights[self.cfg.d_indices]

    def lift_from_d(self, weights_on_d: np.ndarray) -> DiscreteMeasure:
        w = np.zeros(self.riesz_full.size)
        w[self.cfg.d_indices] = weights_on_d
        return DiscreteMeasure(w)


def build_green(cfg: DomainConfig, sigma: float = 1.0,
                riesz_full: KernelMatrix | None = None) -> GreenSystem:
    if riesz_full is None:
        riesz_full = assemble_riesz(cfg.point_set, cfg.alpha, sigma)
    K = riesz_full
    d = cfg.d_indices
    y = cfg.y_indices
    if y.size == 0:
        green = make_kernel(K.block(d), K.alpha, K.dim, kind="green")
        return GreenSystem(cfg=cfg, riesz_full=K, green=green,
                           dirac_sweep_to_y=np.zeros((K.size, d.size)),
                           asymmetry_residual=0.0)
    B = dirac_sweep_matrix(K, d, y)
    # cross[j, i] = potential at x_j of the swept unit mass at x_i
    cross = K.block(d, y) @ B[y, :]
    raw = K.block(d) - cross.T
    asym = float(np.max(np.abs(raw - raw.T))) if d.size else 0.0
    entries = (raw + raw.T) / 2.0
    low = float(np.min(entries))
    if low < -ENTRY_TOL:
        raise InvariantError(
            f"Green entries reach {low}; complement sampling is too coarse")
    if float(np.max(entries - K.block(d))) > ENTRY_TOL:
        raise InvariantError("Green entries exceed the Riesz entries")
    green = make_kernel(entries, K.alpha, K.dim, kind="green")
    return GreenSystem(cfg=cfg, riesz_full=K, green=green,
                       dirac_sweep_to_y=B, asymmetry_residual=asym)


def green_potential(gs: GreenSystem, mu: DiscreteMeasure,
                    cross_check: bool = True) -> tuple[np.ndarray, float]:
    """Potential of mu over the D-points, with a two-path consistency residual.

    Path one is the Green matrix acting on the weights. Path two sweeps mu
    onto Y in the Riesz form and subtracts the swept potential from the plain
    Riesz potential. The returned vector is path one; the residual is the
    worst pointwise gap between the paths (zero when Y is empty or when the
    cross-check is skipped).
    """
    w_d = gs.measure_on_d(mu)
    u = gs.green.entries @ w_d
    if not cross_check or gs.cfg.y_indices.size == 0:
        return u, 0.0
    u_riesz = gs.riesz_full.entries @ mu.weights
    swept = sweep(gs.riesz_full, mu, gs.cfg.y_indices).swept
    u_two = (u_riesz - gs.riesz_full.entries @ swept.weights)[gs.cfg.d_indices]
    return u, float(np.max(np.abs(u - u_two)))


def green_sweep(gs: GreenSystem, mu: DiscreteMeasure, f,
                force_projection: bool = False) -> BalayageResult:
    """Sweep mu onto f in the Green form, cross-checked against the Riesz route.

    The primary result projects mu in the Green quadratic form onto measures
    carried by f. The alternative route sweeps mu onto f and Y jointly in the
    Riesz form and keeps the part on f; the worst weight disagreement between
    the routes is recorded, with a warning flag once it exceeds ten times the
    solver tolerance. A measure already carried by f is returned unchanged
    unless force_projection re-runs the solver on it.
    """
    f = _index_array(f, gs.riesz_full.size, "f")
    if f.size == 0:
        raise ValidationError("sweep target must be nonempty")
    f_pos = gs.d_positions(f)
    w_d = gs.measure_on_d(mu)
    if not force_projection and np.isin(mu.support, f).all():
        res = SweepResiduals(0.0, 0.0, 0.0)
        return BalayageResult(swept=mu, mass_in=mu.total_mass,
                              mass_out=mu.total_mass, kkt_residuals=res,
                              algorithm="identity",
                              active_set_size=int(mu.support.size),
                              path_discrepancy=0.0)
    G = gs.green
    u_in = G.entries @ w_d
    x, rec = nonneg_qp(G.block(f_pos), u_in[f_pos])

    off = np.ones(G.size, dtype=bool)
    off[f_pos] = False
    dom = 0.0
    if np.any(off):
        u_off = G.entries[np.ix_(np.where(off)[0], f_pos)] @ x
        dom = float(max(0.0, np.max(u_off - u_in[off])))
    res = SweepResiduals(equality_on_support=rec.support_residual,
                         inequality_on_target=rec.off_support_slack,
                         domination_off_target=dom)

    if gs.cfg.y_indices.size:
        joint = np.union1d(f, gs.cfg.y_indices)
        alt = sweep(gs.riesz_full, mu, joint).swept.weights[f]
    else:
        alt = sweep(gs.riesz_full, mu, f).swept.weights[f]
    discrepancy = float(np.max(np.abs(alt - x))) if f.size else 0.0
    warning = None
    if discrepancy > 10 * max(rec.tolerance, 1e-14):
        warning = "path-disagreement"

    w = np.zeros(gs.riesz_full.size)
    w[f] = x
    algorithm = "direct-solve" if rec.iterations == 1 else "cone-projection"
    return BalayageResult(swept=DiscreteMeasure(w), mass_in=mu.total_mass,
                          mass_out=float(x.sum()), kkt_residuals=res,
                          algorithm=algorithm,
                          active_set_size=int(np.count_nonzero(x)),
                          path_discrepancy=discrepancy, warning=warning)


def green_equilibrium(gs: GreenSystem, f) -> tuple[float, DiscreteMeasure]:
    """Green capacity of f and the measure with Green potential 1 on f."""
    from .riesz import _simplex_minimum

    f = _index_array(f, gs.riesz_full.size, "f")
    if f.size == 0:
        raise ValidationError("equilibrium target must be nonempty")
    f_pos = gs.d_positions(f)
    energy, x, _ = _simplex_minimum(gs.green, f_pos)
    gamma = np.zeros(gs.riesz_full.size)
    gamma[f] = x / energy
    return 1.0 / energy, DiscreteMeasure(gamma)


def check_maximum_principles(gs: GreenSystem, mu: DiscreteMeasure,
                             nu: DiscreteMeasure, hyp_tol: float = 1e-12) -> dict:
    """Empirical checks, reported but never asserted.

    First check: if the potential of mu stays below 1 on its own support, how
    far above 1 does it get anywhere on D. Second check: if the potential of
    mu stays below that of nu on the support of mu, how far above nu's
    potential does it get anywhere on D.
    """
    w_mu = gs.measure_on_d(mu)
    w_nu = gs.measure_on_d(nu)
    u_mu = gs.green.entries @ w_mu
    u_nu = gs.green.entries @ w_nu
    supp = np.where(w_mu > 0)[0]
    report: dict = {}
    if supp.size == 0:
        report["frostman"] = {"hypothesis_met": True, "excess": float(np.max(u_mu) - 1.0)}
        report["domination"] = {"hypothesis_met": True,
                                "excess": float(np.max(u_mu - u_nu))}
        return report
    scale = max(1.0, float(np.max(u_mu[supp])))
    if np.max(u_mu[supp]) <= 1.0 + hyp_tol * scale:
        report["frostman"] = {"hypothesis_met": True,
                              "excess": float(np.max(u_mu) - 1.0)}
    else:
        report["frostman"] = {"hypothesis_met": False, "excess": None}
    gap_on_supp = float(np.max(u_mu[supp] - u_nu[supp]))
    if gap_on_supp <= hyp_tol * scale:
        report["domination"] = {"hypothesis_met": True,
                                "excess": float(np.max(u_mu - u_nu))}
    else:
        report["domination"] = {"hypothesis_met": False, "excess": None}
    return report


def mass_equality_probe(gs: GreenSystem, mu: DiscreteMeasure) -> dict:
    """Mass kept by the sweep onto F versus escape routes seen from Omega.

    Reports the sweep's mass loss next to, for each support point of mu in
    Omega, the mass its unit point charge loses when swept onto F and Y
    jointly. Both numbers should be small together or large together.
    """
    omega = gs.cfg.omega_indices
    supp_omega = np.intersect1d(mu.support, omega)
    res = green_sweep(gs, mu, gs.cfg.f_indices)
    union = np.union1d(gs.cfg.f_indices, gs.cfg.y_indices)
    B = dirac_sweep_matrix(gs.riesz_full, supp_omega, union)
    col_mass = B.sum(axis=0)
    deficiencies = [{"index": int(i), "value": float(1.0 - m)}
                    for i, m in zip(supp_omega, col_mass)]
    return {"mass_gap": float(mu.total_mass - res.mass_out),
            "deficiencies": deficiencies}

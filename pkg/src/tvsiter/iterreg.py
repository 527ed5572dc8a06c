"""Iterative regularization drivers.

* :func:`osher_iterate` -- Bregman iteration on ROF (noise added back).
* :func:`richardson_step1` -- Richardson iteration on the tangent-field step.
* :func:`richardson_step2` -- Richardson iteration on the matching step.
* :func:`richardson_both` -- step-1 loop, then step-2 loop.

The Richardson drivers denoise the current residual and accumulate the
results, ``u^k = u^{k-1} + T(r_ex^{k-1})``, ``r_ex^k = r_ex^{k-1} - T(r_ex^{k-1})``.
Their fidelity follows ``eta^k = max(beta / gamma^k, eta^{k-1})`` with
``gamma^k = max|r_ex^{k-1}| / 2``.
"""

import csv
import io
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .grid_ops import (
    as_scalar,
    divergence,
    grad_perp,
    inner,
    l2_norm,
    linf_norm,
    tv_energy_vec,
)
from .metrics_noise import MetricConfig, psnr
from .poisson_projection import PoissonSolver
from .rof_chambolle import InnerSolveConfig, rof_denoise, rof_vector_projected
from .tvstokes import match_surface, unit_normal

__all__ = [
    "StopRule",
    "OuterConfig",
    "IterRecord",
    "SolveReport",
    "fidelity_gamma",
    "fidelity_schedule",
    "bregman_to_zero",
    "osher_iterate",
    "richardson_step1",
    "richardson_step2",
    "richardson_both",
    "CSV_COLUMNS",
]

CSV_COLUMNS = (
    "k",
    "eta",
    "r_norm",
    "rex_norm",
    "u_minus_f",
    "u_minus_g",
    "psnr",
    "bregman",
    "seconds",
)


@dataclass(frozen=True)
class StopRule:
    """When to leave an outer loop (``max_outer`` always applies as well).

    ``fixed_count``: after ``value`` iterations. ``residual_floor``: once
    ``|r^k| <= value * |r^1|``. ``discrepancy``: once
    ``|r_ex^k| <= value * sqrt(pixel count)``.
    """

    kind: str = "fixed_count"
    value: float | None = None

    KINDS = ("fixed_count", "residual_floor", "discrepancy")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown stop rule {self.kind!r}")
        if self.kind == "fixed_count":
            if self.value is not None and int(self.value) < 1:
                raise ValueError("fixed_count needs a positive count")
        elif self.value is None or self.value < 0:
            raise ValueError(f"{self.kind} needs a nonnegative threshold")

    @classmethod
    def fixed_count(cls, count):
        return cls("fixed_count", int(count))

    @classmethod
    def residual_floor(cls, theta):
        return cls("residual_floor", float(theta))

    @classmethod
    def discrepancy(cls, sigma):
        return cls("discrepancy", float(sigma))

    def done(self, k, r_norm, r1_norm, rex_norm, npix):
        if self.kind == "fixed_count":
            return self.value is not None and k >= self.value
        if self.kind == "residual_floor":
            return r_norm <= self.value * r1_norm
        return rex_norm <= self.value * np.sqrt(npix)


@dataclass(frozen=True)
class OuterConfig:
    """Settings shared by the outer drivers.

    ``stop`` governs the scalar loop (and the only loop of
    :func:`osher_iterate` and :func:`richardson_step1`); ``tau_stop`` governs
    the tangent-field loop of :func:`richardson_both` and defaults to
    ``stop``. ``eta1``/``eta2`` pin the tangent-field fidelity and the
    one-shot matching fidelity; left unset they follow the beta rule.
    ``adaptive_tau`` lets the tangent-field fidelity follow the same
    nondecreasing schedule as the matching loop instead of staying fixed.
    """

    beta1: float = 8.0
    beta2: float = 2.5
    alpha: float = 0.9
    max_outer: int = 50
    stop: StopRule = field(default_factory=StopRule)
    tau_stop: StopRule | None = None
    inner: InnerSolveConfig = field(default_factory=InnerSolveConfig)
    eps: float | None = None
    eta1: float | None = None
    eta2: float | None = None
    adaptive_tau: bool = False

    def __post_init__(self):
        for name in ("beta1", "beta2"):
            if not getattr(self, name) > 1.0:
                raise ValueError(f"{name} must be > 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if int(self.max_outer) < 1:
            raise ValueError("max_outer must be a positive integer")
        if self.eps is not None and not self.eps > 0:
            raise ValueError("eps must be positive")


@dataclass
class IterRecord:
    k: int
    eta: float
    r_norm: float
    rex_norm: float
    u_minus_f: float | None = None
    u_minus_g: float | None = None
    psnr: float | None = None
    bregman: float | None = None
    seconds: float | None = None


@dataclass
class SolveReport:
    """Per-iteration trace of one driver run.

    ``tau_phase`` holds the tangent-field loop of :func:`richardson_both`.
    """

    records: list = field(default_factory=list)
    tau_phase: "SolveReport | None" = None
    stopped_by: str = ""

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records]
        )

    def best_k(self):
        """Iteration closest to the clean image, or ``None`` without one."""
        d = self.column("u_minus_g")
        if len(d) == 0 or np.all(np.isnan(d)):
            return None
        return int(self.records[int(np.nanargmin(d))].k)

    def to_csv(self, target=None, timing=True):
        """Write one row per iteration; returns the text when ``target`` is None.

        Empty cells mark quantities that were not computed. ``timing=False``
        blanks the wall-time column so reruns are byte-identical.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in self.records:
            row = []
            for name in CSV_COLUMNS:
                val = getattr(rec, name)
                if name == "seconds" and not timing:
                    val = None
                row.append("" if val is None else (str(val) if name == "k" else repr(float(val))))
            w.writerow(row)
        text = buf.getvalue()
        if target is None:
            return text
        if hasattr(target, "write"):
            target.write(text)
        else:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text


def fidelity_gamma(r_ex):
    """``max|r_ex| / 2`` (per-pixel magnitude for vector fields).

    Returns ``None`` for an identically zero residual, which callers treat
    as convergence.
    """
    gamma = linf_norm(r_ex) / 2.0
    return None if gamma == 0.0 else gamma


def fidelity_schedule(r_ex, beta, eta_prev):
    """``max(beta / gamma, eta_prev)``; ``None`` when the residual vanished."""
    gamma = fidelity_gamma(r_ex)
    if gamma is None:
        return None
    return max(beta / gamma, float(eta_prev))


def bregman_to_zero(r, s, j_at_r):
    """Bregman distance from ``r`` to the origin, ``<s, r> - J(r)``.

    ``s`` is the subgradient at ``r`` (``eta * r_ex`` in the drivers) and
    ``j_at_r`` the regularizer evaluated there. For an exact solve this is
    zero since TV is one-homogeneous; with an inexact dual it is slightly
    negative and measures the remaining duality gap.
    """
    return inner(s, r) - float(j_at_r)


def _check_outer(cfg):
    return cfg or OuterConfig()


def _record_u(rec, u, f, clean, metric):
    rec.u_minus_f = l2_norm(u - f)
    if clean is not None:
        rec.u_minus_g = l2_norm(u - clean)
        rec.psnr = psnr(u, clean, metric)


def _prep(f, clean):
    f = as_scalar(f, "f")
    if clean is not None:
        clean = as_scalar(clean, "clean")
        if clean.shape != f.shape:
            raise ValueError("clean image shape differs from f")
    return f, clean


def osher_iterate(f, eta, cfg=None, clean=None, metric=None, callback=None):
    """Bregman iteration: ``u = ROF(f + v^k)``, ``v^{k+1} = f + v^k - u``.

    Returns ``(u, report)``. ``eta`` stays fixed. ``callback(k, state)``, if
    given, sees ``u``, ``v`` (before update) and ``v_next`` each iteration.
    """
    cfg = _check_outer(cfg)
    f, clean = _prep(f, clean)
    eta = float(eta)
    if not eta > 0:
        raise ValueError("eta must be positive")
    report = SolveReport()
    v = np.zeros_like(f)
    u = f.copy()
    u_prev = np.zeros_like(f)
    r1 = None
    for k in range(1, int(cfg.max_outer) + 1):
        t0 = time.perf_counter()
        u, _ = rof_denoise(f + v, eta, cfg.inner)
        v_next = f + v - u
        if callback is not None:
            callback(k, {"u": u, "v": v, "v_next": v_next})
        v = v_next
        r = u - u_prev
        u_prev = u
        rec = IterRecord(k, eta, l2_norm(r), l2_norm(f - u))
        _record_u(rec, u, f, clean, metric)
        rec.seconds = time.perf_counter() - t0
        report.records.append(rec)
        r1 = rec.r_norm if r1 is None else r1
        if cfg.stop.done(k, rec.r_norm, r1, rec.rex_norm, f.size):
            report.stopped_by = cfg.stop.kind
            break
        if not np.any(v):
            report.stopped_by = "converged"
            break
    else:
        report.stopped_by = "max_outer"
    return u, report


def _tau_loop(f, cfg, solver, stop, on_iter=None, callback=None):
    """Richardson loop on the tangent field. Returns ``(tau, r_ex, records)``."""
    tau0 = grad_perp(f)
    r_ex = tau0.copy()
    tau = np.zeros_like(tau0)
    records = []
    eta = 0.0 if cfg.eta1 is None else float(cfg.eta1)
    r1 = None
    stopped = "max_outer"
    for k in range(1, int(cfg.max_outer) + 1):
        t0 = time.perf_counter()
        if cfg.eta1 is None and (cfg.adaptive_tau or k == 1):
            eta_k = fidelity_schedule(r_ex, cfg.beta1, eta)
        else:
            eta_k = eta if fidelity_gamma(r_ex) is not None else None
        if eta_k is None:
            stopped = "converged"
            break
        eta = eta_k
        r, _ = rof_vector_projected(r_ex, eta, solver, cfg.inner)
        r_ex = r_ex - r
        tau = tau + r
        if callback is not None:
            callback(k, {"tau": tau, "r_ex": r_ex, "r": r, "eta": eta})
        pr = solver.project(r)
        rec = IterRecord(k, eta, l2_norm(r), l2_norm(r_ex))
        rec.bregman = bregman_to_zero(pr, eta * r_ex, tv_energy_vec(pr))
        if on_iter is not None:
            on_iter(rec, tau)
        rec.seconds = time.perf_counter() - t0
        records.append(rec)
        r1 = rec.r_norm if r1 is None else r1
        if stop.done(k, rec.r_norm, r1, rec.rex_norm, f.size):
            stopped = stop.kind
            break
    return tau, r_ex, records, stopped


def _match_eta(f, cfg):
    if cfg.eta2 is not None:
        return float(cfg.eta2)
    gamma = fidelity_gamma(f)
    return None if gamma is None else cfg.beta2 / gamma


def richardson_step1(f, cfg=None, solver=None, clean=None, metric=None, callback=None):
    """Richardson iteration on the tangent field, then one matching solve.

    Returns ``(u, tau, report)``. The matching solve is repeated after each
    outer iteration so the report carries the image-domain curves.
    ``callback(k, state)`` receives ``tau``, ``r_ex``, ``r`` and ``eta``.
    """
    cfg = _check_outer(cfg)
    f, clean = _prep(f, clean)
    solver = solver or PoissonSolver.for_field(f)
    eta2 = _match_eta(f, cfg)
    state = {"u": f.copy()}

    def on_iter(rec, tau):
        if eta2 is not None:
            state["u"] = match_surface(f, tau, cfg.alpha, eta2, cfg.eps, cfg.inner)
        _record_u(rec, state["u"], f, clean, metric)

    tau, _, records, stopped = _tau_loop(f, cfg, solver, cfg.stop, on_iter, callback)
    report = SolveReport(records, stopped_by=stopped)
    return state["u"], tau, report


def _scalar_loop(f, tau, cfg, clean, metric, report, callback=None):
    """Residual loop of the matching step with the adaptive fidelity."""
    u = np.zeros_like(f)
    r_ex = f.copy()
    div_n = divergence(unit_normal(tau, cfg.eps)) if cfg.alpha else None
    eta = 0.0
    r1 = None
    report.stopped_by = "max_outer"
    for k in range(1, int(cfg.max_outer) + 1):
        t0 = time.perf_counter()
        eta_k = fidelity_schedule(r_ex, cfg.beta2, eta)
        if eta_k is None:
            report.stopped_by = "converged"
            break
        eta = eta_k
        data = r_ex if div_n is None else r_ex - (cfg.alpha / eta) * div_n
        r, _ = rof_denoise(data, eta, cfg.inner)
        r_ex = r_ex - r
        u = u + r
        if callback is not None:
            callback(k, {"u": u, "r_ex": r_ex, "r": r, "eta": eta})
        rec = IterRecord(k, eta, l2_norm(r), l2_norm(r_ex))
        _record_u(rec, u, f, clean, metric)
        rec.seconds = time.perf_counter() - t0
        report.records.append(rec)
        r1 = rec.r_norm if r1 is None else r1
        if cfg.stop.done(k, rec.r_norm, r1, rec.rex_norm, f.size):
            report.stopped_by = cfg.stop.kind
            break
    if not report.records:
        u = f.copy()
    return u


def richardson_step2(f, cfg=None, solver=None, clean=None, metric=None, callback=None):
    """One tangent-field solve, then the Richardson matching loop.

    Returns ``(u, report)``.
    """
    cfg = _check_outer(cfg)
    f, clean = _prep(f, clean)
    solver = solver or PoissonSolver.for_field(f)
    tau0 = grad_perp(f)
    eta1 = cfg.eta1
    if eta1 is None:
        gamma = fidelity_gamma(tau0)
        eta1 = None if gamma is None else cfg.beta1 / gamma
    if eta1 is None:
        tau = np.zeros_like(tau0)
    else:
        tau, _ = rof_vector_projected(tau0, eta1, solver, cfg.inner)
    report = SolveReport()
    u = _scalar_loop(f, tau, cfg, clean, metric, report, callback)
    return u, report


def richardson_both(f, cfg=None, solver=None, clean=None, metric=None, callback=None, tau_callback=None):
    """Tangent-field Richardson loop, then the matching Richardson loop.

    Returns ``(u, report)``; ``report.tau_phase`` traces the first loop.
    """
    cfg = _check_outer(cfg)
    f, clean = _prep(f, clean)
    solver = solver or PoissonSolver.for_field(f)
    tau, _, records, stopped = _tau_loop(
        f, cfg, solver, cfg.tau_stop or cfg.stop, callback=tau_callback
    )
    report = SolveReport(tau_phase=SolveReport(records, stopped_by=stopped))
    u = _scalar_loop(f, tau, cfg, clean, metric, report, callback)
    return u, report

"""Lifting-line propeller solver.

Given an operating requirement (thrust, inflow speed, RPM) and a blade
geometry, finds the radial circulation distribution that minimizes torque
subject to the thrust constraint, via a Lagrange multiplier on the thrust
residual, and reports open-water performance.

The trailing-wake induction uses a local helical-sheet closure: the
tangential induced velocity follows from the bound circulation shed at each
station with a combined Prandtl tip+hub loss factor, and the axial induced
velocity follows from requiring the induced velocity to be perpendicular to
the local relative flow.  At the optimum the wake pitch r*tan(beta) comes
out radially constant, which is the classical lightly-loaded optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GeometryError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dep, fallback for safety
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

DEFAULT_DENSITY = 1025.0  # seawater, kg/m^3
DEFAULT_DRAG_COEFF = 0.008
ALLOWED_BLADE_COUNTS = (3, 4, 5, 6)

_TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class Requirement:
    """Operating demand: required thrust [N], axial inflow [m/s], shaft speed [rpm]."""

    thrust_req: float
    ship_speed: float
    rpm: float

    @property
    def omega(self) -> float:
        """Shaft speed in rad/s."""
        return 2.0 * math.pi * self.rpm / 60.0

    @property
    def rev_per_s(self) -> float:
        return self.rpm / 60.0

    def validate(self) -> None:
        if not (self.thrust_req > 0 and self.ship_speed > 0 and self.rpm > 0):
            raise ConfigurationError(
                f"requirement must be strictly positive, got {self}"
            )


@dataclass(frozen=True)
class BladeGeometry:
    """Physical design vector of one propeller.

    The chord distribution over the normalized station x in (0, 1) is
    c/D(x) = chord_root * (1 - x^2)^(taper_exp / 2), so chord_root is the
    peak c/D at the hub and taper_exp controls how fast the planform tapers
    toward the tip.
    """

    blade_count: int
    diameter: float
    hub_diameter: float
    chord_root: float
    taper_exp: float
    section_drag_coeff: float = DEFAULT_DRAG_COEFF

    @property
    def tip_radius(self) -> float:
        return 0.5 * self.diameter

    @property
    def hub_radius(self) -> float:
        return 0.5 * self.hub_diameter

    @property
    def hub_ratio(self) -> float:
        return self.hub_diameter / self.diameter

    def chord(self, x_norm):
        """Chord length [m] at normalized radial station(s) x in [0, 1]."""
        x = np.asarray(x_norm, dtype=float)
        profile = self.chord_root * (1.0 - x * x) ** (0.5 * self.taper_exp)
        return self.diameter * profile

    def validate(self) -> None:
        if self.blade_count not in ALLOWED_BLADE_COUNTS:
            raise GeometryError(
                f"blade_count must be one of {ALLOWED_BLADE_COUNTS}, got {self.blade_count}"
            )
        if not (0.0 < self.hub_diameter < self.diameter):
            raise GeometryError(
                f"need 0 < hub_diameter < diameter, got hub={self.hub_diameter}, D={self.diameter}"
            )
        if not (0.02 <= self.chord_root <= 0.4):
            raise GeometryError(f"chord_root {self.chord_root} outside [0.02, 0.4]")
        if not (0.25 <= self.taper_exp <= 4.0):
            raise GeometryError(f"taper_exp {self.taper_exp} outside [0.25, 4]")
        if self.section_drag_coeff < 0.0:
            raise GeometryError(f"section_drag_coeff {self.section_drag_coeff} < 0")


@dataclass(frozen=True)
class SolverOptions:
    """Controls for the outer circulation iteration."""

    max_iterations: int = 200
    relaxation: float = 0.5
    tolerance: float = 1e-6
    station_count: int = 20
    density: float = DEFAULT_DENSITY

    def validate(self) -> None:
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if not (0.0 < self.relaxation <= 1.0):
            raise ConfigurationError("relaxation must be in (0, 1]")
        if self.tolerance <= 0.0:
            raise ConfigurationError("tolerance must be > 0")
        if self.station_count < 4:
            raise ConfigurationError("station_count must be >= 4")
        if self.density <= 0.0:
            raise ConfigurationError("density must be > 0")


@dataclass(frozen=True)
class RadialGrid:
    """Uniform midpoint panels on [hub_radius, tip_radius]."""

    station_count: int
    radii: np.ndarray        # panel midpoints r_i [m]
    widths: np.ndarray       # panel widths dr_i [m]
    normalized: np.ndarray   # (r_i - r_hub) / (R - r_hub), in (0, 1)


@dataclass
class CirculationSolution:
    """Converged (or failed) circulation state of one solve."""

    circulation: np.ndarray          # Gamma_i [m^2/s]
    lagrange_multiplier: float       # multiplier on the thrust residual
    axial_induced: np.ndarray        # u_a,i [m/s]
    tangential_induced: np.ndarray   # u_t,i [m/s]
    inflow_angle: np.ndarray         # beta_i [rad], in (0, pi/2)
    pitch_ratio: np.ndarray          # 2*pi*r_i*tan(beta_i)/D
    converged: bool
    iterations: int
    clamped: bool = False            # circulation pinned at zero: demand unreachable


@dataclass(frozen=True)
class Performance:
    """Open-water performance of one evaluated design."""

    thrust: float
    torque: float
    efficiency: float
    advance_ratio: float
    feasible: bool


def build_grid(geom: BladeGeometry, station_count: int) -> RadialGrid:
    """Discretize the blade span into uniform midpoint panels."""
    if station_count < 4:
        raise ConfigurationError(f"station_count must be >= 4, got {station_count}")
    if geom.hub_diameter >= geom.diameter:
        raise GeometryError(
            f"degenerate geometry: hub {geom.hub_diameter} >= diameter {geom.diameter}"
        )
    r_hub = geom.hub_radius
    r_tip = geom.tip_radius
    span = r_tip - r_hub
    width = span / station_count
    idx = np.arange(station_count, dtype=float)
    radii = r_hub + (idx + 0.5) * width
    widths = np.full(station_count, width)
    normalized = (idx + 0.5) / station_count
    return RadialGrid(station_count, radii, widths, normalized)


def prandtl_loss(r, beta, geom: BladeGeometry):
    """Combined tip and hub circulation-loss factor F in [0, 1].

    F = F_tip * F_hub with
    F_tip = (2/pi) * arccos(exp(-Z (R - r) / (2 r sin(beta)))) and the
    mirrored expression about the hub for F_hub.
    """
    r = np.asarray(r, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0.0) or np.any(beta >= 0.5 * math.pi):
        raise ValueError("inflow angle beta must lie in (0, pi/2)")
    if np.any(r <= geom.hub_radius) or np.any(r >= geom.tip_radius):
        raise ValueError("radius must lie strictly between hub and tip")
    z = geom.blade_count
    sin_b = np.sin(beta)
    f_tip = _TWO_OVER_PI * np.arccos(np.exp(-z * (geom.tip_radius - r) / (2.0 * r * sin_b)))
    f_hub = _TWO_OVER_PI * np.arccos(np.exp(-z * (r - geom.hub_radius) / (2.0 * r * sin_b)))
    out = f_tip * f_hub
    return float(out) if out.ndim == 0 else out


def induced_velocities(circulation, grid: RadialGrid, inflow_angles, geom: BladeGeometry):
    """Induced velocities (u_a, u_t) from a circulation distribution.

    u_t,i = Z Gamma_i / (4 pi r_i F_i);  u_a,i = u_t,i / tan(beta_i)
    (the induced velocity is perpendicular to the local relative flow).
    """
    gamma = np.asarray(circulation, dtype=float)
    beta = np.asarray(inflow_angles, dtype=float)
    loss = prandtl_loss(grid.radii, beta, geom)
    if np.any(loss == 0.0):
        raise FloatingPointError("loss factor vanished at a control point")
    u_t = geom.blade_count * gamma / (4.0 * math.pi * grid.radii * loss)
    u_a = u_t / np.tan(beta)
    return u_a, u_t


def thrust_torque(circulation, induced, grid: RadialGrid, geom: BladeGeometry,
                  req: Requirement, density: float = DEFAULT_DENSITY):
    """Discrete blade-element thrust T [N] and torque Q [N m].

    With V*_i the local relative speed and c_i the local chord,

    T = rho Z sum_i [(omega r_i + u_t,i) Gamma_i
                     - 0.5 V*_i c_i C_D (Va + u_a,i)] dr_i
    Q = rho Z sum_i [(Va + u_a,i) Gamma_i
                     + 0.5 V*_i c_i C_D (omega r_i + u_t,i)] r_i dr_i
    """
    gamma = np.asarray(circulation, dtype=float)
    u_a, u_t = (np.asarray(u, dtype=float) for u in induced)
    va = req.ship_speed
    omega = req.omega
    axial = va + u_a
    tangential = omega * grid.radii + u_t
    v_star = np.hypot(axial, tangential)
    chord = geom.chord(grid.normalized)
    drag = 0.5 * v_star * chord * geom.section_drag_coeff
    z = geom.blade_count
    thrust = density * z * np.sum((tangential * gamma - drag * axial) * grid.widths)
    torque = density * z * np.sum(
        (axial * gamma + drag * tangential) * grid.radii * grid.widths
    )
    return float(thrust), float(torque)


def ideal_efficiency(req: Requirement, diameter: float,
                     density: float = DEFAULT_DENSITY) -> float:
    """Actuator-disk efficiency upper bound 2 / (1 + sqrt(1 + C_T))."""
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    disk_area = math.pi * (0.5 * diameter) ** 2
    c_t = req.thrust_req / (0.5 * density * req.ship_speed ** 2 * disk_area)
    return 2.0 / (1.0 + math.sqrt(1.0 + c_t))


@njit(cache=True)
def _loss_factor_scalar(z, r_tip, r_hub, r, sin_b):
    f_tip = _TWO_OVER_PI * math.acos(math.exp(-z * (r_tip - r) / (2.0 * r * sin_b)))
    f_hub = _TWO_OVER_PI * math.acos(math.exp(-z * (r - r_hub) / (2.0 * r * sin_b)))
    return f_tip * f_hub


@njit(cache=True)
def _thrust_at(lam, r, dr, chord, kk, tan_b, pole, z, cd, va, omega, rho, gamma_out):
    """Thrust at the per-station stationarity solution for wake pitch lam.

    For given lam (= -lambda_1), each station's stationarity condition
    (Va + u_a,i) r_i = lam (omega r_i + u_t,i) with u_t,i = k_i Gamma_i and
    u_a,i = u_t,i / tan(beta_i) solves in closed form to
    Gamma_i = r_i (lam omega - Va) / (k_i (r_i / tan(beta_i) - lam)),
    clamped at zero.  Fills gamma_out and returns the resulting thrust.
    """
    total = 0.0
    for i in range(r.size):
        g = r[i] * (lam * omega - va) / (kk[i] * (pole[i] - lam))
        if g < 0.0:
            g = 0.0
        gamma_out[i] = g
        u_t = kk[i] * g
        u_a = u_t / tan_b[i]
        axial = va + u_a
        tangential = omega * r[i] + u_t
        v_star = math.sqrt(axial * axial + tangential * tangential)
        total += (tangential * g - 0.5 * v_star * chord[i] * cd * axial) * dr[i]
    return rho * z * total


@njit(cache=True)
def _solve_core(r, dr, chord, z, r_tip, r_hub, cd, va, omega, rho, thrust_target,
                relax, tol, max_iter):
    m = r.size
    beta = np.empty(m)
    for i in range(m):
        beta[i] = math.atan(va / (omega * r[i]))

    r_mean = 0.0
    for i in range(m):
        r_mean += r[i]
    r_mean /= m
    gamma = np.full(m, thrust_target / (rho * z * omega * r_mean * (r_tip - r_hub)))

    tan_b = np.empty(m)
    kk = np.empty(m)
    pole = np.empty(m)
    gamma_solved = np.empty(m)

    lam = -1.0
    iterations = 0
    t_rtol = 1e-9 * thrust_target

    for iterations in range(1, max_iter + 1):
        pole_min = 1e300
        for i in range(m):
            tb = math.tan(beta[i])
            tan_b[i] = tb
            f = _loss_factor_scalar(z, r_tip, r_hub, r[i], math.sin(beta[i]))
            if f < 1e-12:
                f = 1e-12
            kk[i] = z / (4.0 * math.pi * r[i] * f)
            pole[i] = r[i] / tb
            if pole[i] < pole_min:
                pole_min = pole[i]

        cap = pole_min * (1.0 - 1e-9)

        # bracket [lo, hi] around the thrust-matching wake pitch
        lo = 0.0
        hi = lam if 0.0 < lam < cap else min(1.05 * va / omega, cap)
        if hi <= 0.0:
            hi = cap
        t_hi = _thrust_at(hi, r, dr, chord, kk, tan_b, pole, z, cd, va, omega,
                          rho, gamma_solved)
        while t_hi < thrust_target and hi < cap:
            lo = hi
            hi = min(2.0 * hi, cap)
            t_hi = _thrust_at(hi, r, dr, chord, kk, tan_b, pole, z, cd, va, omega,
                              rho, gamma_solved)
        if t_hi < thrust_target:
            # thrust unreachable even at the wake-pitch pole: circulation pins
            # at zero and the demand is declared infeasible
            for i in range(m):
                gamma[i] = 0.0
            return gamma, beta, 0.0, False, iterations, True

        lam = hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            t_mid = _thrust_at(mid, r, dr, chord, kk, tan_b, pole, z, cd, va,
                               omega, rho, gamma_solved)
            lam = mid
            if abs(t_mid - thrust_target) <= t_rtol:
                break
            if t_mid < thrust_target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        # leave gamma_solved at the accepted lam
        _thrust_at(lam, r, dr, chord, kk, tan_b, pole, z, cd, va, omega, rho,
                   gamma_solved)

        delta = 0.0
        g_max = 0.0
        for i in range(m):
            g_new = (1.0 - relax) * gamma[i] + relax * gamma_solved[i]
            d = abs(g_new - gamma[i])
            if d > delta:
                delta = d
            gamma[i] = g_new
            if g_new > g_max:
                g_max = g_new

        if g_max > 0.0 and delta / g_max < tol:
            # report the unrelaxed stationary state at the frozen angles: it
            # satisfies the thrust constraint to bisection tolerance and the
            # per-station stationarity exactly
            for i in range(m):
                gamma[i] = gamma_solved[i]
            return gamma, beta, -lam, True, iterations, False

        # thaw: refresh inflow angles from the relaxed circulation
        for i in range(m):
            u_t = kk[i] * gamma[i]
            u_a = u_t / tan_b[i]
            beta[i] = math.atan2(va + u_a, omega * r[i] + u_t)

    return gamma, beta, -lam, False, max_iter, False


def solve_optimal_circulation(geom: BladeGeometry, req: Requirement,
                              options: SolverOptions = SolverOptions()) -> CirculationSolution:
    """Find the torque-minimizing circulation meeting the thrust constraint.

    Outer frozen-coefficient iteration: the inflow angles and loss factors are
    frozen from the current circulation; with them frozen, the per-station
    stationarity of H = Q + lambda_1 (T - Ts) and the scalar thrust constraint
    determine a new circulation, which is blended under the relaxation factor
    until the relative change drops below tolerance.  Non-convergence or an
    unreachable thrust demand yields converged=False, never an exception.
    """
    geom.validate()
    req.validate()
    options.validate()
    grid = build_grid(geom, options.station_count)
    chord = geom.chord(grid.normalized)

    gamma, beta, lam1, converged, iterations, clamped = _solve_core(
        grid.radii, grid.widths, np.asarray(chord, dtype=float),
        float(geom.blade_count), geom.tip_radius, geom.hub_radius,
        geom.section_drag_coeff, req.ship_speed, req.omega, options.density,
        req.thrust_req, options.relaxation, options.tolerance,
        options.max_iterations,
    )

    if clamped or not converged:
        u_a = np.zeros_like(gamma)
        u_t = np.zeros_like(gamma)
        if not clamped:
            u_a, u_t = induced_velocities(gamma, grid, beta, geom)
    else:
        u_a, u_t = induced_velocities(gamma, grid, beta, geom)
    pitch_ratio = 2.0 * math.pi * grid.radii * np.tan(beta) / geom.diameter
    return CirculationSolution(
        circulation=gamma,
        lagrange_multiplier=lam1,
        axial_induced=u_a,
        tangential_induced=u_t,
        inflow_angle=beta,
        pitch_ratio=pitch_ratio,
        converged=bool(converged),
        iterations=int(iterations),
        clamped=bool(clamped),
    )


def evaluate(geom: BladeGeometry, req: Requirement,
             options: SolverOptions = SolverOptions()) -> Performance:
    """Solve for the optimal circulation and report performance.

    Efficiency is the open-water value T Va / (Q omega).  Any failure mode
    (diverged solve, unreachable thrust, efficiency outside its physical
    range) is reported through feasible=False rather than an exception.
    Feasibility demands eta strictly below the actuator-disk bound: the
    induction closure can nominally cross it when the hub region operates
    near 45 degree inflow, and such corner states are rejected as unphysical.
    """
    solution = solve_optimal_circulation(geom, req, options)
    advance_ratio = req.ship_speed / (req.rev_per_s * geom.diameter)
    if not solution.converged:
        return Performance(math.nan, math.nan, math.nan, advance_ratio, False)
    grid = build_grid(geom, options.station_count)
    thrust, torque = thrust_torque(
        solution.circulation,
        (solution.axial_induced, solution.tangential_induced),
        grid, geom, req, density=options.density,
    )
    if torque <= 0.0:
        return Performance(thrust, torque, math.nan, advance_ratio, False)
    eta = thrust * req.ship_speed / (torque * req.omega)
    feasible = (
        math.isfinite(eta)
        and 0.0 < eta < 1.0
        and eta < ideal_efficiency(req, geom.diameter, density=options.density)
        and abs(thrust - req.thrust_req) / req.thrust_req <= 1e-3
    )
    return Performance(thrust, torque, eta, advance_ratio, feasible)

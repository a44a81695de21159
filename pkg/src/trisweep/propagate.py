"""Exact time evolution of density matrices and state vectors.

`evolve_density` integrates the von Neumann equation i drho/dt = [H, rho]
and `evolve_state` the Schrodinger equation, for any Hamiltonian provider of
dimension 3, 4, 5 or 9.  Providers are either `models.HamiltonianTerms`
(fast structured path) or an arbitrary pure function t -> Hermitian matrix.

Both entry points use an adaptive embedded Gauss-Legendre Runge-Kutta pair
(orders 6/4) with PI step-size control; see `_gauss` for why an implicit
scheme is used.  Hermiticity is re-symmetrised after every accepted step;
the trace is never renormalised - its drift is a measured diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _gauss
from .errors import ConservationError, DomainError, IntegrationError
from .models import HamiltonianTerms

__all__ = [
    "TimeGrid",
    "PopulationTrace",
    "evolve_density",
    "evolve_state",
    "populations",
    "rho_to_bloch",
    "bloch_to_populations",
    "basis_state",
    "level_projector",
]

TRACE_TOL = 1e-9
NORM_TOL = 1e-9
HERM_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Propagation window, output sampling stride and integrator tolerances."""

    t_start: float
    t_end: float
    output_stride: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10

    def __post_init__(self):
        if not (np.isfinite(self.t_start) and np.isfinite(self.t_end)):
            raise DomainError("time window must be finite")
        if self.t_start >= self.t_end:
            raise DomainError("t_start must be below t_end")
        if self.output_stride <= 0:
            raise DomainError("output_stride must be positive")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("integrator tolerances must be positive")

    def times(self) -> np.ndarray:
        """Sample times: t_start + k*stride, with t_end always included."""
        n = int(np.floor((self.t_end - self.t_start) / self.output_stride + 1e-9))
        ts = self.t_start + self.output_stride * np.arange(n + 1)
        if ts[-1] < self.t_end - 1e-12 * max(1.0, abs(self.t_end)):
            ts = np.append(ts, self.t_end)
        else:
            ts[-1] = self.t_end
        return ts


@dataclass(frozen=True)
class PopulationTrace:
    """Sampled populations of a propagation run.

    ``populations[k, i]`` is the occupation of diabatic level i at
    ``times[k]``.  For three-level runs ``bloch`` holds the (R, Q, W)
    population-difference/coherence variables per sample.  ``states`` keeps
    the raw samples (rho as (m, n, n), psi as (m, n)); ``diagnostics``
    records integrator statistics and invariant drifts.
    """

    times: np.ndarray
    populations: np.ndarray
    bloch: np.ndarray | None = None
    states: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.populations.shape[1]

    def level(self, index: int) -> np.ndarray:
        return self.populations[:, index]


def basis_state(dim: int, index: int) -> np.ndarray:
    """Unit vector |index> (0-based) of a dim-level system."""
    if not 0 <= index < dim:
        raise DomainError(f"level index {index} outside 0..{dim - 1}")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def level_projector(dim: int, index: int) -> np.ndarray:
    """Pure-state projector |index><index| (0-based initial condition)."""
    psi = basis_state(dim, index)
    return np.outer(psi, psi.conj())


def populations(rho: np.ndarray) -> np.ndarray:
    """Diagonal (real parts) of a density matrix."""
    rho = np.asarray(rho)
    return np.real(np.diagonal(rho, axis1=-2, axis2=-1)).copy()


def rho_to_bloch(rho: np.ndarray):
    """Population-difference variables (R, Q, W) of a 3x3 density matrix.

    R = rho11 - 2 rho22 + rho33, Q = rho11 - rho33 and
    W = 2 sqrt(2) Re(rho12 - rho23); together they parametrise the
    population dynamics of the swept spin-1 model.
    """
    rho = np.asarray(rho)
    if rho.shape[-2:] != (3, 3):
        raise DomainError("Bloch variables are defined for 3x3 density matrices")
    r = np.real(rho[..., 0, 0] - 2 * rho[..., 1, 1] + rho[..., 2, 2])
    q = np.real(rho[..., 0, 0] - rho[..., 2, 2])
    w = 2 * np.sqrt(2) * np.real(rho[..., 0, 1] - rho[..., 1, 2])
    return r, q, w


def bloch_to_populations(r, q):
    """Recover the three populations from (R, Q)."""
    p1 = (1.0 + r / 2.0 + 3.0 * q / 2.0) / 3.0
    p2 = (1.0 - r) / 3.0
    p3 = (1.0 + r / 2.0 - 3.0 * q / 2.0) / 3.0
    return p1, p2, p3


def _check_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > HERM_TOL:
        raise DomainError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise DomainError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise DomainError("density matrix must be positive semidefinite")
    return rho


def _default_max_step(provider, grid: TimeGrid) -> float:
    """Nyquist-style cap: resolve the fastest drive phase and the sweep.

    For structured terms the sweep-rate proxy is the largest linear-term
    entry; generic callables fall back to a span-based cap.
    """
    span = grid.t_end - grid.t_start
    bounds = [span]
    if isinstance(provider, HamiltonianTerms):
        fmax = float(provider.freqs.max()) if provider.freqs.size else 0.0
        if fmax > 0:
            bounds.append(0.05 / fmax)
        slope = float(np.abs(provider.h1).max())
        if slope > 0:
            bounds.append(0.05 / np.sqrt(slope))
    else:
        bounds.append(span / 100.0)
    return min(bounds)


def _run(provider, y0, grid, herm_dim, max_step):
    times = grid.times()
    hmax = float(max_step) if max_step is not None else _default_max_step(provider, grid)
    if isinstance(provider, HamiltonianTerms):
        if herm_dim:
            n = herm_dim
            eye = np.eye(n)
            lift = lambda mat: np.kron(mat, eye) - np.kron(eye, mat.T)  # noqa: E731
            hcos = (
                np.stack([lift(provider.hcos[k]) for k in range(provider.freqs.size)])
                if provider.freqs.size
                else np.zeros((0, n * n, n * n))
            )
            samples, info = _gauss.gauss_evolve_terms(
                lift(provider.h0),
                lift(provider.h1),
                hcos,
                provider.freqs,
                provider.phases,
                y0,
                times,
                grid.rel_tol,
                grid.abs_tol,
                hmax,
                herm_dim,
            )
        else:
            samples, info = _gauss.gauss_evolve_terms(
                provider.h0,
                provider.h1,
                provider.hcos,
                provider.freqs,
                provider.phases,
                y0,
                times,
                grid.rel_tol,
                grid.abs_tol,
                hmax,
                0,
            )
    else:
        if herm_dim:
            n = herm_dim
            eye = np.eye(n)

            def w_of_t(t):
                h = np.asarray(provider(t))
                return np.kron(h, eye) - np.kron(eye, h.T)

        else:
            w_of_t = provider
        samples, info = _gauss.gauss_evolve_callable(
            w_of_t, y0, times, grid.rel_tol, grid.abs_tol, hmax, herm_dim
        )
    status = int(info[0])
    if status != _gauss.STATUS_OK:
        reason = (
            "step size underflow"
            if status == _gauss.STATUS_STEP_UNDERFLOW
            else "too many rejected steps"
        )
        err = IntegrationError(f"time integration failed: {reason}", info[1])
        err.partial_times = times[: samples.shape[0]]
        err.partial_samples = samples
        raise err
    diagnostics = {
        "n_steps": int(info[2]),
        "n_rejected": int(info[3]),
        "max_quadratic_drift": float(info[4]),
        "max_herm_drift": float(info[5]),
        "rel_tol": grid.rel_tol,
        "abs_tol": grid.abs_tol,
        "max_step": hmax,
    }
    return times, samples, diagnostics


def _check_populations(pops: np.ndarray, context: str):
    eps = 1e-9
    if pops.min() < -eps or pops.max() > 1.0 + eps:
        raise ConservationError(
            f"{context}: population outside [0, 1] beyond tolerance "
            f"(min {pops.min():.3e}, max {pops.max():.3e})"
        )
    sum_dev = np.abs(pops.sum(axis=1) - 1.0).max()
    if sum_dev > 10 * TRACE_TOL:
        raise ConservationError(
            f"{context}: population sum drifted by {sum_dev:.3e}"
        )


def evolve_density(h_of_t, rho0, grid: TimeGrid, max_step=None) -> PopulationTrace:
    """Propagate a density matrix under i drho/dt = [H(t), rho].

    Parameters
    ----------
    h_of_t : HamiltonianTerms or callable
        Hamiltonian provider; a deterministic pure function of t.
    rho0 : ndarray
        Initial density matrix (Hermitian, unit trace, positive
        semidefinite); typically `level_projector(dim, k)`.
    grid : TimeGrid
        Window, output stride and tolerances.
    max_step : float, optional
        Override for the drive-resolving step cap.

    Raises
    ------
    IntegrationError
        If adaptive stepping fails; carries the last good time.
    ConservationError
        If trace/hermiticity/population invariants drift beyond ten times
        their tolerances.
    """
    rho0 = _check_density(rho0)
    n = rho0.shape[0]
    try:
        times, flat, diagnostics = _run(h_of_t, rho0.reshape(-1), grid, n, max_step)
    except IntegrationError as err:
        if getattr(err, "partial_samples", None) is not None:
            rhos = err.partial_samples.reshape(-1, n, n)
            err.partial_trace = PopulationTrace(
                times=err.partial_times, populations=populations(rhos), states=rhos
            )
        raise
    rhos = flat.reshape(-1, n, n)

    trace_drift = float(np.abs(np.einsum("kii->k", rhos).real - 1.0).max())
    diagnostics["max_trace_drift"] = trace_drift
    if trace_drift > 10 * TRACE_TOL:
        raise ConservationError(f"trace drifted by {trace_drift:.3e}")
    if diagnostics["max_herm_drift"] > 10 * NORM_TOL:
        raise ConservationError(
            f"hermiticity drifted by {diagnostics['max_herm_drift']:.3e}"
        )

    pops = populations(rhos)
    _check_populations(pops, "density propagation")
    bloch = None
    if n == 3:
        r, q, w = rho_to_bloch(rhos)
        bloch = np.column_stack([r, q, w])
    return PopulationTrace(
        times=times, populations=pops, bloch=bloch, states=rhos,
        diagnostics=diagnostics,
    )


def evolve_state(h_of_t, psi0, grid: TimeGrid, max_step=None) -> PopulationTrace:
    """Propagate a state vector under i dpsi/dt = H(t) psi.

    Same contract as `evolve_density`; requires a normalised psi0 and keeps
    the norm within 1e-9 over the window (structurally conserved by the
    Gauss integrator).
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.ndim != 1:
        raise DomainError("state vector must be one-dimensional")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise DomainError("initial state must be normalised to 1 within 1e-12")
    try:
        times, samples, diagnostics = _run(h_of_t, psi0, grid, 0, max_step)
    except IntegrationError as err:
        if getattr(err, "partial_samples", None) is not None:
            err.partial_trace = PopulationTrace(
                times=err.partial_times,
                populations=np.abs(err.partial_samples) ** 2,
                states=err.partial_samples,
            )
        raise

    norm_drift = diagnostics.pop("max_quadratic_drift")
    diagnostics["max_norm_drift"] = norm_drift
    if norm_drift > 10 * NORM_TOL:
        raise ConservationError(f"state norm drifted by {norm_drift:.3e}")

    pops = np.abs(samples) ** 2
    _check_populations(pops, "state propagation")
    bloch = None
    if psi0.size == 3:
        rhos = samples[:, :, None] * samples.conj()[:, None, :]
        r, q, w = rho_to_bloch(rhos)
        bloch = np.column_stack([r, q, w])
    return PopulationTrace(
        times=times, populations=pops, bloch=bloch, states=samples,
        diagnostics=diagnostics,
    )

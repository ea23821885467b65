"""Reduced master-equation dynamics for qubit registers in thermal baths.

The register Hamiltonian is H = sum_j (omega_j/2) sigma_z^j. Each qubit
belongs to exactly one bath attachment: a *local* attachment couples a
single qubit to its own bath, a *collective* attachment couples a group
of qubits to one shared bath through the collective raising/lowering
operators S+- = sum_j sigma+-_j (which makes cross terms
sigma+_j rho sigma-_j' appear in the dissipator).

The second-order equation of motion is

    d rho/dt = -i[H, rho]
               + sum_groups { c_up(t) (S+ rho S- - S- S+ rho)
                            + c_down(t) (S- rho S+ - S+ S- rho) } + h.c.

with the explicitly integrated coefficients from :mod:`qecbath.bath`.
Three interchangeable coefficient backends are provided:

- ``time_local``    closed-form integrated kernels (default),
- ``memory_kernel`` the same integrals evaluated by trapezoidal
                    quadrature over the stored time grid (cross-check),
- ``lindblad``      stationary rates, the analytically solvable oracle.

Integration uses a classical fixed-step 4th-order Runge-Kutta scheme,
stepping in the frame co-rotating with H (an exact transformation; the
stiff commutator is removed and stored states are rotated back to the
lab frame). Trace and Hermiticity drift are monitored at every stored
point.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_trapezoid

from .linalg import (DensityMatrix, PositivityError, SIGMA_MINUS, SIGMA_PLUS,
                     embed)
from . import bath as bath_mod
from .bath import BathSpec, lindblad_rates, rate_coefficients

__all__ = [
    "BathAttachment", "SystemModel", "Trajectory", "IntegrationError",
    "system_hamiltonian", "interaction_ops", "me_rhs", "memory_rhs",
    "integrate", "Propagator", "conservation_log",
]

BACKENDS = ("time_local", "memory_kernel", "lindblad")

# Matrices below this dimension stay dense; collective operators on larger
# registers are kept sparse (their fill is a few percent).
_SPARSE_DIM = 256

# Every completed integration appends its conservation diagnostics here so
# a test run can assert the bounds across everything it executed.
conservation_log = []


class IntegrationError(RuntimeError):
    """Trace drift or positivity violation beyond the allowed budget."""


@dataclass(frozen=True)
class BathAttachment:
    """A group of qubits bound to one bath."""

    qubits: tuple
    bath: BathSpec

    def __post_init__(self):
        q = tuple(int(x) for x in self.qubits)
        if len(set(q)) != len(q) or not q:
            raise ValueError("attachment qubits must be a nonempty set")
        object.__setattr__(self, "qubits", q)


@dataclass(frozen=True)
class SystemModel:
    """Qubit frequencies plus bath attachments and a backend choice."""

    n_qubits: int
    omegas: tuple
    attachments: tuple
    backend: str = "time_local"

    def __post_init__(self):
        om = tuple(float(w) for w in (self.omegas if not np.isscalar(self.omegas)
                                      else [self.omegas] * self.n_qubits))
        if len(om) != self.n_qubits:
            raise ValueError("need one frequency per qubit")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "attachments", tuple(self.attachments))
        seen = []
        for att in self.attachments:
            seen.extend(att.qubits)
        if sorted(seen) != list(range(self.n_qubits)):
            raise ValueError("every qubit must belong to exactly one attachment")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")

    @classmethod
    def local(cls, n_qubits, bath, omega=1.0, backend="time_local"):
        """Each qubit coupled to its own copy of ``bath``."""
        atts = tuple(BathAttachment((j,), bath) for j in range(n_qubits))
        return cls(n_qubits, (omega,) * n_qubits, atts, backend)

    @classmethod
    def collective(cls, n_qubits, bath, omega=1.0, backend="time_local"):
        """All qubits share one bath."""
        return cls(n_qubits, (omega,) * n_qubits,
                   (BathAttachment(tuple(range(n_qubits)), bath),), backend)

    @classmethod
    def grouped(cls, n_qubits, groups, bath, omega=1.0, backend="time_local"):
        """One shared bath per listed group (e.g. one per code block)."""
        atts = tuple(BathAttachment(tuple(g), bath) for g in groups)
        return cls(n_qubits, (omega,) * n_qubits, atts, backend)

    @property
    def dim(self):
        return 2**self.n_qubits


@dataclass
class Trajectory:
    """Stored states of one integration plus conservation diagnostics."""

    times: np.ndarray
    states: list
    trace_dev: np.ndarray
    herm_dev: np.ndarray

    def final(self):
        return self.states[-1]


def system_hamiltonian(model):
    """H = sum_j (omega_j / 2) sigma_z^j as a dense diagonal matrix."""
    return np.diag(_hamiltonian_diagonal(model)).astype(complex)


def rotate_frame(state, model, t, forward=True):
    """Conjugate a state into (forward) or out of the frame co-rotating
    with the register Hamiltonian: e^{+iHt} state e^{-iHt}."""
    mat = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)
    h = _hamiltonian_diagonal(model)
    sign = 1.0 if forward else -1.0
    ph = np.exp(1j * sign * t * (h[:, None] - h[None, :]))
    return mat * ph


def _hamiltonian_diagonal(model):
    n = model.n_qubits
    diag = np.zeros(2**n)
    for j, w in enumerate(model.omegas):
        bit = np.arange(2**n) >> (n - 1 - j) & 1
        diag += 0.5 * w * np.where(bit == 0, 1.0, -1.0)
    return diag


def interaction_ops(model, t):
    """Interaction-picture collective operators per bath group.

    Returns a list of (S1, S2) pairs, one per attachment, where
    S1(t) = sum_j e^{+i omega_j t} sigma+_j over the group's qubits and
    S2(t) = S1(t)^dagger.
    """
    n = model.n_qubits
    out = []
    for att in model.attachments:
        s1 = np.zeros((2**n, 2**n), dtype=complex)
        for j in att.qubits:
            s1 += np.exp(1j * model.omegas[j] * t) * embed(SIGMA_PLUS, j, n)
        out.append((s1, s1.conj().T))
    return out


# ---------------------------------------------------------------------------
# generator assembly
# ---------------------------------------------------------------------------

class _GroupOps:
    """Precomputed collective operators for one bath attachment."""

    def __init__(self, att, model):
        n = model.n_qubits
        d = 2**n
        self.qubits = att.qubits
        self.bath = att.bath
        self.omegas = tuple(model.omegas[j] for j in att.qubits)
        self.uniform = len(set(self.omegas)) == 1
        self.sp_each = [embed(SIGMA_PLUS, j, n) for j in att.qubits]
        sp = sum(self.sp_each)
        sm = sp.conj().T
        self.sp_dense = sp
        self.sm_dense = sm
        smsp = sm @ sp
        spsm = sp @ sm
        if d >= _SPARSE_DIM:
            self.sp = sparse.csr_array(sp)
            self.sm = sparse.csr_array(sm)
            self.smsp = sparse.csr_array(smsp)
            self.spsm = sparse.csr_array(spsm)
        else:
            self.sp, self.sm, self.smsp, self.spsm = sp, sm, smsp, spsm


def _lmul(op, x):
    if sparse.issparse(op):
        if x.ndim == 2:
            return op @ x
        b, d, _ = x.shape
        y = op @ x.transpose(1, 0, 2).reshape(d, b * d)
        return y.reshape(d, b, d).transpose(1, 0, 2)
    return np.matmul(op, x)


def _rmul(x, op):
    if sparse.issparse(op):
        if x.ndim == 2:
            return x @ op
        b, d, _ = x.shape
        return (x.reshape(b * d, d) @ op).reshape(b, d, d)
    return np.matmul(x, op)


def _uniform_term(x, g, c_down, c_up):
    """Dissipator of one uniform-frequency group (valid for any matrix x)."""
    k_op = c_up * g.smsp + c_down * g.spsm
    out = (2 * c_up.real) * _lmul(g.sp, _rmul(x, g.sm))
    out += (2 * c_down.real) * _lmul(g.sm, _rmul(x, g.sp))
    out -= _lmul(k_op, x)
    out -= _rmul(x, k_op.conj().T)
    return out


def _general_term(x, g, phases, c_down_each, c_up_each):
    """Dissipator of one group with per-qubit phases u_j (dense path)."""
    s1 = sum(u * p for u, p in zip(phases, g.sp_each))
    s2 = s1.conj().T
    w1 = sum(u * cd * p for u, cd, p in zip(phases, c_down_each, g.sp_each))
    w2 = sum(np.conj(u) * cu * p.conj().T
             for u, cu, p in zip(phases, c_up_each, g.sp_each))
    drift_l = w1 @ s2 + w2 @ s1
    drift_r = s1 @ w1.conj().T + s2 @ w2.conj().T
    return (s1 @ x @ w2 + s2 @ x @ w1
            + w2.conj().T @ x @ s2 + w1.conj().T @ x @ s1
            - drift_l @ x - x @ drift_r)


def _instant_coeffs(g, t, backend, history_times=None):
    """(c_down, c_up) per qubit of a group at time t for a given backend."""
    out_d, out_u = [], []
    for w in g.omegas:
        if backend == "lindblad":
            gd, gu = lindblad_rates(g.bath, w)
            out_d.append(gd / 2.0)
            out_u.append(gu / 2.0)
        elif backend == "time_local":
            cd, cu = rate_coefficients(t, g.bath, w)
            out_d.append(cd)
            out_u.append(cu)
        else:  # memory_kernel: trapezoid over the supplied grid
            cd, cu = _memory_coeffs_on_grid(g.bath, w, history_times, t)
            out_d.append(cd)
            out_u.append(cu)
    return out_d, out_u


def _memory_coeffs_on_grid(bath_spec, omega, grid, t):
    s = np.asarray(grid, dtype=float)
    s = s[s <= t + 1e-12]
    if s.size < 2 or abs(s[-1] - t) > 1e-9 or abs(s[0]) > 1e-12:
        raise ValueError("history grid must start at 0 and contain t")
    d, g2 = bath_mod._detunings(bath_spec, omega)
    n = bath_mod.bose_occupation(omega, bath_spec.temperature)
    vals = np.exp(1j * np.multiply.outer(s, d))  # e^{+i s d}
    integ = np.trapezoid(vals, s, axis=0)
    c_down = (n + 1.0) * np.dot(integ, g2)
    c_up = n * np.dot(integ.conj(), g2)
    return complex(c_down), complex(c_up)


def _dissipator(x, groups, t, backend, phase_scale, history_times=None):
    """Sum of group dissipators; phase_scale 1 = lab frame, 2 = rotating."""
    out = np.zeros_like(x)
    for g in groups:
        cds, cus = _instant_coeffs(g, t, backend, history_times)
        if g.uniform:
            out += _uniform_term(x, g, cds[0], cus[0])
        else:
            phases = [np.exp(1j * phase_scale * w * t) for w in g.omegas]
            out += _general_term(x, g, phases, cds, cus)
    return out


def me_rhs(rho, t, model):
    """Lab-frame right-hand side d rho/dt at time t.

    Hermiticity-preserving and exactly traceless. Not defined for the
    memory backend (whose kernel integral needs the stored history; see
    :func:`memory_rhs`).
    """
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if mat.shape != (model.dim, model.dim):
        raise ValueError("state dimension does not match the model")
    if model.backend == "memory_kernel":
        raise ValueError("memory backend needs a trajectory prefix; use memory_rhs")
    groups = [_GroupOps(att, model) for att in model.attachments]
    h = _hamiltonian_diagonal(model)
    out = -1j * (h[:, None] - h[None, :]) * mat
    # uniform groups in the lab frame: the e^{+-i omega t} phases cancel
    # pairwise inside every dissipator term, so phase_scale is irrelevant
    # for them; general groups get the lab phases e^{i omega_j t}.
    out += _dissipator(mat, groups, t, model.backend, phase_scale=1)
    return out


def memory_rhs(history, t, model):
    """Right-hand side with kernel integrals quadratured over the history grid.

    ``history`` is a :class:`Trajectory` prefix covering [0, t] on the
    integration grid; the state entering the dissipator is the one stored
    at time t (the equation stays time-local in rho). Apart from the
    trapezoidal evaluation of the kernel integrals this is the same
    expression as :func:`me_rhs`.
    """
    times = np.asarray(history.times, dtype=float)
    if times.size < 2 or t > times[-1] + 1e-9:
        raise ValueError("insufficient history: grid must cover [0, t]")
    idx = int(np.argmin(np.abs(times - t)))
    if abs(times[idx] - t) > 1e-9:
        raise ValueError("t must lie on the stored history grid")
    rho = history.states[idx]
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    groups = [_GroupOps(att, model) for att in model.attachments]
    h = _hamiltonian_diagonal(model)
    out = -1j * (h[:, None] - h[None, :]) * mat
    if t <= 1e-300:
        return out
    out += _dissipator(mat, groups, t, "memory_kernel", phase_scale=1,
                       history_times=times)
    return out


# ---------------------------------------------------------------------------
# fixed-step propagation (rotating frame)
# ---------------------------------------------------------------------------

class Propagator:
    """Steps one state (or a batch of matrices) under a model's generator.

    Works in the frame co-rotating with the register Hamiltonian: the
    transformation is exact, removes the commutator, and for groups with
    a uniform frequency leaves a generator whose only time dependence is
    in the scalar coefficients (which are precomputed on the Runge-Kutta
    stage grid). States are rotated back to the lab frame on readout.

    Supports snapshot/restore so a search can branch from stored points;
    restarts are bit-exact because the stage grid is fixed.
    """

    def __init__(self, model, state0, dt, t0=0.0, horizon=None):
        self.model = model
        self.dt = float(dt)
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        self.t0 = float(t0)
        x = np.asarray(state0.matrix if isinstance(state0, DensityMatrix) else state0,
                       dtype=complex)
        self.batch = x.ndim == 3
        d = x.shape[-1]
        if d != model.dim:
            raise ValueError("state dimension does not match the model")
        self.groups = [_GroupOps(att, model) for att in model.attachments]
        self._all_uniform = all(g.uniform for g in self.groups)
        self.h_diag = _hamiltonian_diagonal(model)
        self.step = 0
        self._x = self._rotate(x.copy(), self.t0, forward=True)
        self._tr0 = np.trace(x, axis1=-2, axis2=-1)
        self._hermitian_input = not self.batch and np.abs(x - x.conj().T).max() < 1e-10
        self.max_trace_dev = 0.0
        self.max_herm_dev = 0.0
        self._tables = {}
        self._n_stages = 0
        if horizon is not None:
            self._ensure_stages(int(round((horizon - t0) / dt)) + 1)

    # -- frame rotation ----------------------------------------------------
    def _rotate(self, x, t, forward):
        if t == 0.0:
            return x
        # rho_rot = e^{+iHt} rho e^{-iHt}; elementwise phases since H diagonal
        sign = 1.0 if forward else -1.0
        ph = np.exp(1j * sign * t * (self.h_diag[:, None] - self.h_diag[None, :]))
        return x * ph

    # -- coefficient tables on the half-step stage grid ---------------------
    def _ensure_stages(self, n_steps):
        need = 2 * n_steps + 1
        if need <= self._n_stages:
            return
        need = max(need, 2 * self._n_stages)
        stage_times = self.t0 + np.arange(need) * (self.dt / 2.0)
        for gi, g in enumerate(self.groups):
            per_omega = {}
            for w in set(g.omegas):
                per_omega[w] = self._coeff_arrays(g.bath, w, stage_times)
            self._tables[gi] = per_omega
        self._n_stages = need
        self._stage_times = stage_times

    def _coeff_arrays(self, bath_spec, omega, stage_times):
        backend = self.model.backend
        if backend == "lindblad":
            gd, gu = lindblad_rates(bath_spec, omega)
            ones = np.ones(stage_times.size)
            return (gd / 2.0) * ones.astype(complex), (gu / 2.0) * ones.astype(complex)
        if backend == "time_local":
            return rate_coefficients(stage_times, bath_spec, omega)
        # memory_kernel: cumulative trapezoid of e^{+i s d} from s = 0
        half = self.dt / 2.0
        n_lead = int(round(self.t0 / half))
        s = np.arange(n_lead + stage_times.size) * half
        d, g2 = bath_mod._detunings(bath_spec, omega)
        n_occ = bath_mod.bose_occupation(omega, bath_spec.temperature)
        vals = np.exp(1j * np.multiply.outer(s, d))
        cum = cumulative_trapezoid(vals, s, axis=0, initial=0.0)
        integ = cum[n_lead:, :]
        c_down = (n_occ + 1.0) * (integ @ g2)
        c_up = n_occ * (integ.conj() @ g2)
        return c_down, c_up

    # -- generator at a stage ----------------------------------------------
    def _apply(self, x, stage):
        out = np.zeros_like(x)
        t = self.t0 + stage * (self.dt / 2.0)
        for gi, g in enumerate(self.groups):
            if g.uniform:
                cd, cu = self._tables[gi][g.omegas[0]]
                out += _uniform_term(x, g, cd[stage], cu[stage])
            else:
                cds = []
                cus = []
                for w in g.omegas:
                    cd, cu = self._tables[gi][w]
                    cds.append(cd[stage])
                    cus.append(cu[stage])
                phases = [np.exp(2j * w * t) for w in g.omegas]
                out += _general_term(x, g, phases, cds, cus)
        return out

    # -- stepping ------------------------------------------------------------
    def advance(self, n_steps):
        if n_steps < 0:
            raise ValueError("cannot step backwards; restore a snapshot instead")
        self._ensure_stages(self.step + n_steps)
        x = self._x
        h = self.dt
        for _ in range(n_steps):
            s = 2 * self.step
            k1 = self._apply(x, s)
            k2 = self._apply(x + (h / 2) * k1, s + 1)
            k3 = self._apply(x + (h / 2) * k2, s + 1)
            k4 = self._apply(x + h * k3, s + 2)
            x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            self.step += 1
        self._x = x
        self._record_devs()
        return self

    def advance_to(self, step):
        return self.advance(step - self.step)

    def _record_devs(self):
        tr = np.trace(self._x, axis1=-2, axis2=-1)
        dev = np.abs(tr - self._tr0).max()
        self.max_trace_dev = max(self.max_trace_dev, float(dev))
        if self._hermitian_input:
            xh = np.abs(self._x - self._x.conj().T).max()
            self.max_herm_dev = max(self.max_herm_dev, float(xh))

    @property
    def time(self):
        return self.t0 + self.step * self.dt

    def state(self):
        """Current state(s), rotated back to the lab frame."""
        return self._rotate(self._x.copy(), self.time, forward=False)

    def state_rotating(self):
        """Current state(s) in the co-rotating frame."""
        return self._x.copy()

    def snapshot(self):
        return (self.step, self._x.copy())

    def restore(self, snap):
        self.step, x = snap
        self._x = x.copy()
        return self

    def log_conservation(self, context):
        conservation_log.append({
            "context": context,
            "dim": self.model.dim,
            "steps": self.step,
            "max_trace_dev": self.max_trace_dev,
            "max_herm_dev": self.max_herm_dev,
        })


TRACE_RENORM_BUDGET = 1e-8
TRACE_ERROR_BUDGET = 1e-6


def integrate(rho0, model, t_final, dt, store_every=None):
    """Fixed-step 4th-order integration of the master equation.

    Parameters
    ----------
    rho0 : DensityMatrix or ndarray
        Initial state at t = 0.
    model : SystemModel
    t_final : float
        End time (>= 0). If not a multiple of dt the last step is
        shortened so the trajectory ends exactly at t_final.
    dt : float
        Step size.
    store_every : int, optional
        Store every k-th step (t=0 and the final state are always kept).
        Defaults to roughly 256 stored points.

    Returns
    -------
    Trajectory

    The final state is re-Hermitized and trace-renormalized only inside
    the 1e-8 drift budget; larger drift raises IntegrationError.
    Positivity is checked at stored points (dimension <= 64) and on renorm
    the final state; an eigenvalue below -1e-6 raises PositivityError.
    """
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    labels = rho0.qubit_labels if isinstance(rho0, DensityMatrix) else None
    mat0 = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)

    n_full = int(np.floor(t_final / dt + 1e-9))
    rem = t_final - n_full * dt
    if rem < 1e-12 * max(1.0, t_final):
        rem = 0.0
    if store_every is None:
        store_every = max(1, (n_full + (1 if rem else 0)) // 256 or 1)

    prop = Propagator(model, mat0, dt, horizon=t_final)
    times = [0.0]
    raw_states = [mat0.copy()]
    while prop.step < n_full:
        n = min(store_every, n_full - prop.step)
        prop.advance(n)
        times.append(prop.time)
        raw_states.append(prop.state())
    if rem > 0.0:
        _partial_step(prop, rem)
        times.append(t_final)
        raw_states.append(prop._rotate(prop._x.copy(), t_final, forward=False))
    prop.log_conservation("integrate")

    trace_dev = np.array([abs(np.trace(s) - 1.0) for s in raw_states])
    herm_dev = np.array([np.abs(s - s.conj().T).max() for s in raw_states])
    worst = trace_dev.max()
    if worst > TRACE_ERROR_BUDGET:
        raise IntegrationError(
            f"trace drift {worst:.2e} exceeds {TRACE_ERROR_BUDGET:.0e}; reduce dt")
    if worst > TRACE_RENORM_BUDGET:
        raise IntegrationError(
            f"trace drift {worst:.2e} above the {TRACE_RENORM_BUDGET:.0e} renorm budget")

    states = []
    dim = mat0.shape[0]
    for i, s in enumerate(raw_states):
        sh = (s + s.conj().T) / 2
        sh = sh / np.trace(sh).real
        if dim <= 64 or i == len(raw_states) - 1:
            wmin = np.linalg.eigvalsh(sh).min()
            if wmin < -1e-6:
                raise PositivityError(
                    f"eigenvalue {wmin:.3e} at t={times[i]:g} below the -1e-6 budget")
        states.append(DensityMatrix(sh, labels))
    return Trajectory(np.array(times), states, trace_dev, herm_dev)


def _partial_step(prop, h):
    """One RK4 step of nonstandard length h (coefficients computed directly)."""
    x = prop._x
    t_loc = prop.time
    model = prop.model

    def gen(xv, t):
        out = np.zeros_like(xv)
        for g in prop.groups:
            if model.backend == "memory_kernel":
                grid = np.arange(0.0, t + prop.dt / 4, prop.dt / 2)
                if grid[-1] < t - 1e-12:
                    grid = np.append(grid, t)
                else:
                    grid[-1] = t
                cds, cus = _instant_coeffs(g, t, "memory_kernel", grid)
            else:
                cds, cus = _instant_coeffs(g, t, model.backend)
            if g.uniform:
                out += _uniform_term(xv, g, cds[0], cus[0])
            else:
                phases = [np.exp(2j * w * t) for w in g.omegas]
                out += _general_term(xv, g, phases, cds, cus)
        return out

    k1 = gen(x, t_loc)
    k2 = gen(x + (h / 2) * k1, t_loc + h / 2)
    k3 = gen(x + (h / 2) * k2, t_loc + h / 2)
    k4 = gen(x + h * k3, t_loc + h)
    prop._x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    prop._record_devs()

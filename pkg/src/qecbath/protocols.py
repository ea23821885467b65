"""Fidelity-measurement protocols for codes in thermal baths.

A protocol compares two branches that both start from the same logical
state rho0 and run for the same total time t:

- no-QEC branch: the bare logical register evolves under the master
  equation; fidelity against rho0.
- QEC branch: rho0 is encoded, [0, t] is split into n equal cycles, the
  physical register evolves for one cycle, the recovery channel is
  applied, and after the last recovery the state is decoded and compared
  against rho0.

Recovery is ideal and instantaneous. It acts in the frame co-rotating
with the register Hamiltonian (ideal operations compensate the known
free evolution; only bath-induced deviations count as errors), and each
recovery re-prepares the ancilla pattern and restarts the bath-memory
clock: the syndrome measurement destroys the system-bath correlations
that the second-order memory kernel tracks.

Topology semantics (both branches see the same kind of environment):

- "collective": every register couples as a whole to shared baths. The
  bare register shares one bath (which makes the two-qubit singlet a
  dark state and is why strongly entangled Werner states are hard for
  QEC to beat); an encoded register shares one bath per code block
  (``block_bath="global"`` merges the blocks of a two-block code into
  one bath instead).
- "local": every qubit of every register owns an independent bath.

The QEC branch is evaluated through the per-block logical channel:
because disjoint blocks never share a bath (except with the global
toggle), the joint channel factorizes exactly into block channels, and
one evolution of the block's operator basis yields the fidelity at every
cycle count and every grid time. ``engine="direct"`` forces the literal
segment-by-segment evolution of the full encoded register instead; both
routes integrate the same equation and agree to integrator accuracy.
"""

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .linalg import DensityMatrix, fidelity, ket
from .bath import BathSpec
from .codes import BlockPair, get_code
from .dynamics import Propagator, SystemModel, integrate, rotate_frame

__all__ = [
    "ProtocolSpec", "ExperimentResult", "CriticalTimeResult",
    "werner_state", "named_state", "run_protocol", "critical_time", "sweep",
]

INITIAL_STATES = ("zero", "one", "plus", "werner")


def werner_state(p):
    """Werner mixture p |psi-><psi-| + (1-p) I/4 on two qubits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"werner parameter p={p} outside [0, 1]")
    psi = (ket("01") - ket("10")) / np.sqrt(2.0)
    mat = p * np.outer(psi, psi.conj()) + (1.0 - p) * np.eye(4) / 4.0
    return DensityMatrix(mat)


def named_state(name, werner_p=0.5):
    """One of the protocol input states: zero, one, plus, werner."""
    if name == "zero":
        return DensityMatrix.from_ket(ket("0"))
    if name == "one":
        return DensityMatrix.from_ket(ket("1"))
    if name == "plus":
        return DensityMatrix.from_ket((ket("0") + ket("1")) / np.sqrt(2.0))
    if name == "werner":
        return werner_state(werner_p)
    raise ValueError(f"unknown initial state '{name}' (one of {INITIAL_STATES})")


@dataclass(frozen=True)
class ProtocolSpec:
    """Everything needed to run one fidelity-vs-time comparison."""

    initial_state: str = "zero"
    werner_p: float = 0.5
    code: str = "five_qubit"          # five_qubit | steane | toric_822 | None
    n_cycles: tuple = (1,)
    t_grid: tuple = tuple(np.linspace(0.0, 100.0, 26))
    temperature: float = 0.2
    kappa: float = 0.01
    omega: float = 1.0
    topology: str = "collective"      # collective | local
    block_bath: str = "per_block"     # per_block | global (two-block codes)
    n_modes: int = 1
    window: tuple = None              # None -> single mode at the qubit frequency
    resonance_convention: str = "resonant"
    backend: str = "time_local"
    dt: float = 0.01
    toric_recovery: str = "mixing"
    compare_baseline: bool = True

    def __post_init__(self):
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state must be one of {INITIAL_STATES}")
        if self.topology not in ("collective", "local"):
            raise ValueError("topology must be 'collective' or 'local'")
        if self.block_bath not in ("per_block", "global"):
            raise ValueError("block_bath must be 'per_block' or 'global'")
        cyc = tuple(int(c) for c in (self.n_cycles if not np.isscalar(self.n_cycles)
                                     else [self.n_cycles]))
        if any(c < 1 for c in cyc):
            raise ValueError("cycle counts must be >= 1")
        object.__setattr__(self, "n_cycles", cyc)
        grid = tuple(float(t) for t in self.t_grid)
        if any(t < 0 for t in grid) or list(grid) != sorted(grid):
            raise ValueError("t_grid must be ascending and nonnegative")
        object.__setattr__(self, "t_grid", grid)
        if self.initial_state == "werner":
            if self.code not in (None, "five_qubit", "toric_822"):
                raise ValueError("werner input needs a two-logical-qubit-capable "
                                 "code: five_qubit (blockwise) or toric_822")
        if self.code is not None and self.code not in ("five_qubit", "steane", "toric_822"):
            raise ValueError(f"unknown code '{self.code}'")

    @property
    def k_logical(self):
        return 2 if self.initial_state == "werner" else 1

    def bath_spec(self):
        window = self.window if self.window is not None else (self.omega, self.omega)
        return BathSpec(temperature=self.temperature, coupling=self.kappa,
                        n_modes=self.n_modes, window=tuple(window),
                        convention=self.resonance_convention)


@dataclass
class ExperimentResult:
    """Fidelity series of one protocol run."""

    t_grid: np.ndarray
    fidelity_no_qec: np.ndarray
    fidelity_qec: dict
    metadata: dict

    def check_ranges(self):
        vals = [self.fidelity_no_qec] if self.fidelity_no_qec is not None else []
        vals += list(self.fidelity_qec.values())
        for arr in vals:
            arr = np.asarray(arr)
            if (arr < -1e-9).any() or (arr > 1.0 + 1e-9).any():
                raise RuntimeError("fidelity outside [0, 1]")
        return self


# ---------------------------------------------------------------------------
# model construction
# ---------------------------------------------------------------------------

def _bare_model(spec):
    bath = spec.bath_spec()
    k = spec.k_logical
    if spec.topology == "local":
        return SystemModel.local(k, bath, spec.omega, spec.backend)
    return SystemModel.collective(k, bath, spec.omega, spec.backend)


def _block_model(spec, n_block):
    bath = spec.bath_spec()
    if spec.topology == "local":
        return SystemModel.local(n_block, bath, spec.omega, spec.backend)
    return SystemModel.collective(n_block, bath, spec.omega, spec.backend)


def _pair_model(spec, n_block):
    bath = spec.bath_spec()
    n = 2 * n_block
    if spec.topology == "local":
        return SystemModel.local(n, bath, spec.omega, spec.backend)
    if spec.block_bath == "global":
        return SystemModel.collective(n, bath, spec.omega, spec.backend)
    groups = (tuple(range(n_block)), tuple(range(n_block, n)))
    return SystemModel.grouped(n, groups, bath, spec.omega, spec.backend)


def _pipeline(spec):
    """(channel object, factorizes-into-one-block?) for the QEC branch."""
    code = get_code(spec.code, spec.toric_recovery)
    if spec.k_logical == 1:
        return code, True
    if spec.code == "toric_822":
        return code, False  # one block carries both logical qubits
    if spec.topology == "collective" and spec.block_bath == "global":
        return BlockPair(code), False  # cross-block bath: no factorization
    return code, True


# ---------------------------------------------------------------------------
# fast engines: state walker and logical-channel walker
# ---------------------------------------------------------------------------

class _StateWalker:
    """Evolves one state on a fixed step grid with snapshot-backed seeks."""

    def __init__(self, model, rho0, dt, horizon):
        mat = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0)
        self.prop = Propagator(model, mat, dt, horizon=horizon)
        self._cache = {0: self.prop.snapshot()}

    def state_at(self, step):
        if self.prop.step != step:
            base = max(k for k in self._cache if k <= step)
            if self.prop.step > step or self.prop.step < base:
                self.prop.restore(self._cache[base])
            self.prop.advance_to(step)
            if step not in self._cache and len(self._cache) < 512:
                self._cache[step] = self.prop.snapshot()
        return self.prop.state()


class _ChannelWalker:
    """Evolves the encoded operator basis of one block.

    Snapshots of the basis trajectory give the block's logical channel
    after an evolve-then-recover cycle of any stored duration; cycle
    composition is then a matrix power of the small channel matrix.
    """

    def __init__(self, code, model, dt, horizon):
        self.code = code
        dl = 2**code.k_logical
        basis = []
        for i in range(dl):
            for j in range(dl):
                e = np.zeros((dl, dl), dtype=complex)
                e[i, j] = 1.0
                basis.append(code.encode(e))
        self.prop = Propagator(model, np.array(basis), dt, horizon=horizon)
        self._snap_cache = {0: self.prop.snapshot()}
        self._chan_cache = {}

    def channel_at(self, step):
        """Logical superoperator of one evolve(step*dt)-then-recover cycle."""
        if step in self._chan_cache:
            return self._chan_cache[step]
        if self.prop.step != step:
            base = max(k for k in self._snap_cache if k <= step)
            if self.prop.step > step or self.prop.step < base:
                self.prop.restore(self._snap_cache[base])
            self.prop.advance_to(step)
            if len(self._snap_cache) < 256:
                self._snap_cache[step] = self.prop.snapshot()
        dl = 2**self.code.k_logical
        lam = np.zeros((dl * dl, dl * dl), dtype=complex)
        # recovery compensates the known free evolution, so it reads the
        # co-rotating state, not the lab-frame one
        for col, mat in enumerate(self.prop.state_rotating()):
            out = self.code.decode(self.code.recover(mat))
            lam[:, col] = out.reshape(dl * dl)
        self._chan_cache[step] = lam
        return lam


def _apply_single(lam, rho):
    d = rho.shape[0]
    return (lam @ rho.reshape(d * d)).reshape(d, d)


def _apply_pair(lam, rho4):
    """(lambda (x) lambda) applied to a two-logical-qubit state."""
    lr = lam.reshape(2, 2, 2, 2)       # [out_row, out_col, in_row, in_col]
    wr = rho4.reshape(2, 2, 2, 2)      # [rowA, rowB, colA, colB]
    out = np.einsum("abij,cdkl,ikjl->acbd", lr, lr, wr)
    return out.reshape(4, 4)


def _qec_fidelity(walker, paired, rho0_mat, m_steps, n_cycles):
    lam = np.linalg.matrix_power(walker.channel_at(m_steps), n_cycles)
    out = _apply_pair(lam, rho0_mat) if paired else _apply_single(lam, rho0_mat)
    return fidelity(rho0_mat, out)


def _segment_steps(t, n, dt):
    if t <= 0:
        return 0
    return max(1, int(round(t / (n * dt))))


# ---------------------------------------------------------------------------
# protocols
# ---------------------------------------------------------------------------

def run_protocol(spec, engine="auto"):
    """Fidelity vs time with and without error correction.

    Returns an ExperimentResult with the no-QEC series, one QEC series
    per requested cycle count, and a metadata snapshot. Grid times are
    snapped so that each cycle partition lands on the integration step
    grid; the effective times per cycle count are reported in the
    metadata (choose grids commensurate with n_cycles * dt to avoid any
    snapping).
    """
    if engine not in ("auto", "direct"):
        raise ValueError("engine must be 'auto' or 'direct'")
    rho0 = named_state(spec.initial_state, spec.werner_p)
    rho0_mat = np.asarray(rho0.matrix)
    t_grid = np.asarray(spec.t_grid, dtype=float)
    horizon = max(t_grid.max(), spec.dt) if t_grid.size else spec.dt

    meta = {"spec": _spec_dict(spec), "engine": engine, "effective_times": {}}

    f_bare = None
    bare_walker = None
    if spec.compare_baseline:
        bare_walker = _StateWalker(_bare_model(spec), rho0, spec.dt, horizon)
        f_bare = np.array([
            1.0 if t <= 0 else
            fidelity(rho0_mat, bare_walker.state_at(int(round(t / spec.dt))))
            for t in t_grid])

    f_qec = {}
    if spec.code is not None:
        if engine == "direct":
            f_qec = _qec_series_direct(spec, rho0_mat, t_grid, meta)
        else:
            f_qec = _qec_series_fast(spec, rho0_mat, t_grid, meta, horizon)

    if bare_walker is not None:
        bare_walker.prop.log_conservation("protocol_baseline")
    result = ExperimentResult(t_grid, f_bare, f_qec, meta)
    return result.check_ranges()


def _qec_series_fast(spec, rho0_mat, t_grid, meta, horizon):
    channel, factorizes = _pipeline(spec)
    if not factorizes and isinstance(channel, BlockPair):
        return _qec_series_direct(spec, rho0_mat, t_grid, meta)
    paired = spec.k_logical == 2 and channel.k_logical == 1
    model = _block_model(spec, channel.n_physical)
    walker = _ChannelWalker(channel, model, spec.dt, horizon)
    out = {}
    for n in spec.n_cycles:
        series = []
        eff = []
        for t in t_grid:
            m = _segment_steps(t, n, spec.dt)
            eff.append(n * m * spec.dt)
            if m == 0:
                series.append(1.0)
            else:
                series.append(_qec_fidelity(walker, paired, rho0_mat, m, n))
        out[n] = np.array(series)
        meta["effective_times"][n] = eff
    walker.prop.log_conservation("protocol_qec_channel")
    return out


def _qec_series_direct(spec, rho0_mat, t_grid, meta):
    """Literal segment-by-segment evolution of the full encoded register."""
    channel, factorizes = _pipeline(spec)
    if spec.k_logical == 2 and channel.k_logical == 1:
        channel = BlockPair(channel)
    if isinstance(channel, BlockPair):
        model = _pair_model(spec, channel.block.n_physical)
    else:
        model = _block_model(spec, channel.n_physical)
    enc0 = channel.encode(rho0_mat)
    out = {}
    for n in spec.n_cycles:
        series = []
        eff = []
        for t in t_grid:
            m = _segment_steps(t, n, spec.dt)
            seg = m * spec.dt
            eff.append(n * seg)
            if m == 0:
                series.append(1.0)
                continue
            state = enc0
            for _ in range(n):
                traj = integrate(DensityMatrix(state), model, seg, spec.dt,
                                 store_every=max(1, m))
                # ideal recovery undoes the known free evolution of the
                # segment, then reads the syndrome
                rot = rotate_frame(traj.final(), model, seg, forward=True)
                state = channel.recover(rot)
            series.append(fidelity(rho0_mat, channel.decode(state)))
        out[n] = np.array(series)
        meta["effective_times"][n] = eff
    return out


@dataclass
class CriticalTimeResult:
    """Boundary (in units of kappa*t) before which QEC fails to improve
    fidelity over the bare evolution.

    status is one of:
      "crossover"         kt_c is the root of F_qec - F_no_qec,
      "always_beneficial" QEC never loses in the window (kt_c = 0),
      "never_beneficial"  QEC never wins in the window (kt_c = inf),
      "flat"              the branches are indistinguishable in the window
                          (no crossover; e.g. kappa = 0).
    """

    kt_c: float
    status: str
    p: float
    n_cycles: int
    details: dict = field(default_factory=dict)


def critical_time(spec, n_cycles=1, window_kt=5.0, scan_points=50,
                  g_tol=1e-6, t_tol=None):
    """Locate the crossover time of the QEC advantage g(t) = F_qec - F_bare.

    Scans ``scan_points`` times over kappa*t in (0, window_kt], brackets
    the last sign change of g from negative to positive, and bisects it
    to |g| < g_tol or a t-interval below t_tol (default 1e-4/kappa,
    floored at the step resolution n_cycles*dt).
    """
    if spec.kappa <= 0:
        return CriticalTimeResult(float("nan"), "flat", spec.werner_p, n_cycles,
                                  {"reason": "kappa = 0: no crossover in window"})
    if t_tol is None:
        t_tol = 1e-4 / spec.kappa
    t_max = window_kt / spec.kappa
    dt = spec.dt
    rho0 = named_state(spec.initial_state, spec.werner_p)
    rho0_mat = np.asarray(rho0.matrix)

    channel, factorizes = _pipeline(spec)
    if not factorizes and isinstance(channel, BlockPair):
        raise NotImplementedError("critical_time requires a block-factorizable "
                                  "pipeline; use block_bath='per_block'")
    paired = spec.k_logical == 2 and channel.k_logical == 1
    walker = _ChannelWalker(channel, _block_model(spec, channel.n_physical),
                            dt, horizon=t_max / n_cycles + 2 * dt)
    bare = _StateWalker(_bare_model(spec), rho0, dt, horizon=t_max + 2 * dt)

    def g_of(m):
        if m == 0:
            return 0.0
        fq = _qec_fidelity(walker, paired, rho0_mat, m, n_cycles)
        fb = fidelity(rho0_mat, bare.state_at(n_cycles * m))
        return fq - fb

    scan_m = sorted({_segment_steps(i * t_max / scan_points, n_cycles, dt)
                     for i in range(1, scan_points + 1)})
    g_scan = [g_of(m) for m in scan_m]
    signs = [0 if abs(g) <= g_tol else (1 if g > 0 else -1) for g in g_scan]
    details = {"scan_t": [n_cycles * m * dt for m in scan_m], "scan_g": g_scan}

    bracket = None
    for i in range(len(scan_m) - 1):
        if signs[i] < 0 and signs[i + 1] > 0:
            bracket = (scan_m[i], scan_m[i + 1])  # keep the last such pair
    if bracket is None:
        if all(s >= 0 for s in signs) and any(s > 0 for s in signs):
            return CriticalTimeResult(0.0, "always_beneficial",
                                      spec.werner_p, n_cycles, details)
        if all(s <= 0 for s in signs) and any(s < 0 for s in signs):
            return CriticalTimeResult(float("inf"), "never_beneficial",
                                      spec.werner_p, n_cycles, details)
        return CriticalTimeResult(float("nan"), "flat", spec.werner_p, n_cycles,
                                  {"reason": "no crossover in window", **details})

    lo, hi = bracket
    while (hi - lo) > 1 and (hi - lo) * n_cycles * dt > t_tol:
        mid = (lo + hi) // 2
        g_mid = g_of(mid)
        if abs(g_mid) <= g_tol:
            lo = hi = mid
            break
        if g_mid < 0:
            lo = mid
        else:
            hi = mid
    t_root = n_cycles * dt * (lo + hi) / 2.0
    walker.prop.log_conservation("critical_time_channel")
    bare.prop.log_conservation("critical_time_baseline")
    return CriticalTimeResult(spec.kappa * t_root, "crossover",
                              spec.werner_p, n_cycles, details)


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

def _spec_dict(spec):
    d = asdict(spec)
    d["n_cycles"] = list(spec.n_cycles)
    d["t_grid"] = list(spec.t_grid)
    if d["window"] is not None:
        d["window"] = list(d["window"])
    return d


def _run_point(args):
    base, overrides = args
    spec = replace(base, **overrides)
    try:
        return run_protocol(spec), None
    except Exception as exc:  # recorded in-row, sweep continues
        return None, f"{type(exc).__name__}: {exc}"


def sweep_points(grid):
    """Deterministic cartesian product of a sweep grid: list of override
    dicts, the last listed field varying fastest."""
    names = list(grid.keys())
    return [dict(zip(names, values))
            for values in itertools.product(*(grid[f] for f in names))]


def sweep(base_spec, grid, workers=1, on_result=None, skip=frozenset()):
    """Run a cartesian product of protocol variants.

    Parameters
    ----------
    base_spec : ProtocolSpec
        Defaults for every field not swept.
    grid : dict[str, sequence]
        Field name -> values; iterated per :func:`sweep_points`.
    workers : int
        Process-pool size; 1 runs sequentially. Results are emitted in
        grid order either way.
    on_result : callable(index, overrides, result, error), optional
        Invoked in order as each point completes, so the caller can
        flush incrementally.
    skip : set of int
        Point indices that are already done; they are not recomputed and
        are reported with error "skipped".

    Returns
    -------
    list of (overrides, ExperimentResult or None, error or None)
    """
    combos = sweep_points(grid)
    jobs = [(base_spec, ov) for idx, ov in enumerate(combos) if idx not in skip]
    if workers <= 1:
        outs = map(_run_point, jobs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        outs = pool.map(_run_point, jobs)
    results = []
    fresh = iter(outs)
    for idx, ov in enumerate(combos):
        res, err = (None, "skipped") if idx in skip else next(fresh)
        if on_result is not None:
            on_result(idx, ov, res, err)
        results.append((ov, res, err))
    if pool is not None:
        pool.shutdown()
    return results

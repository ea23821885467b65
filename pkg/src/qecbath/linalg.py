"""Dense complex linear algebra and quantum-state primitives.

Provides the small toolkit everything else is built on: single-qubit
operators, Kronecker products, operator embedding into a register,
partial trace, Hermitian eigendecomposition, PSD matrix square root,
and the Uhlmann state fidelity.

Conventions (fixed once, used everywhere):

- Computational basis |q0 q1 ... q_{n-1}> with qubit 0 as the most
  significant bit of the basis index.
- sigma_z |0> = +|0>, so |0> is the *higher-energy* level of a qubit
  with Hamiltonian (omega/2) sigma_z and |1> is the ground state.
- sigma_plus = |0><1| = (sigma_x + i sigma_y)/2 raises energy;
  sigma_minus = |1><0| mediates decay of |0>.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SIGMA_0", "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "SIGMA_PLUS", "SIGMA_MINUS",
    "PositivityError", "DensityMatrix",
    "kron", "embed", "basis_ket", "ket", "partial_trace",
    "herm_eig", "psd_sqrt", "fidelity", "unitary_completion",
]

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|

# Negative eigenvalues up to this size are clamped to zero before a matrix
# square root; anything below -POSITIVITY_ABORT aborts instead of being
# silently repaired.
POSITIVITY_CLAMP = 1e-8
POSITIVITY_ABORT = 1e-6


class PositivityError(ValueError):
    """A matrix that must be positive semidefinite is significantly not."""


def _as_matrix(obj):
    if isinstance(obj, DensityMatrix):
        return obj.matrix
    return np.asarray(obj, dtype=complex)


def kron(a, b):
    """Kronecker product of two matrices."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def embed(op, j, n):
    """Embed a single-qubit operator on qubit ``j`` of an ``n``-qubit register.

    Returns I^(j) (x) op (x) I^(n-1-j) as a dense 2^n x 2^n matrix.
    """
    if not 0 <= j < n:
        raise IndexError(f"qubit index {j} out of range for {n} qubits")
    op = _as_matrix(op)
    left = np.eye(2**j, dtype=complex)
    right = np.eye(2 ** (n - 1 - j), dtype=complex)
    return np.kron(np.kron(left, op), right)


def basis_ket(index, n):
    """Computational-basis column vector |index> of an n-qubit register."""
    if not 0 <= index < 2**n:
        raise IndexError(f"basis index {index} out of range for {n} qubits")
    v = np.zeros(2**n, dtype=complex)
    v[index] = 1.0
    return v


def ket(bits):
    """Basis ket from a bit string such as "01011" (qubit 0 first)."""
    return basis_ket(int(bits, 2), len(bits))


def partial_trace(rho, keep, n_qubits=None):
    """Trace out all qubits not listed in ``keep``.

    Parameters
    ----------
    rho : ndarray or DensityMatrix
        2^n x 2^n matrix over an n-qubit register.
    keep : sequence of int
        Qubit indices to retain, in any order; the reduced matrix is
        returned with the kept qubits in their original relative order.
    n_qubits : int, optional
        Register size; inferred from the matrix dimension if omitted.

    Returns
    -------
    ndarray (or DensityMatrix if one was passed in)
    """
    wrap = isinstance(rho, DensityMatrix)
    mat = _as_matrix(rho)
    n = n_qubits if n_qubits is not None else mat.shape[0].bit_length() - 1
    if mat.shape != (2**n, 2**n):
        raise ValueError("matrix dimension is not 2**n_qubits")
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if any(q < 0 or q >= n for q in keep):
        raise IndexError("keep set contains indices outside the register")
    drop = [q for q in range(n) if q not in keep]
    tensor = mat.reshape([2] * (2 * n))
    # trace over each dropped qubit's (row, col) axis pair, back to front
    for q in reversed(drop):
        row_ax = q
        col_ax = q + tensor.ndim // 2
        tensor = np.trace(tensor, axis1=row_ax, axis2=col_ax)
    d = 2 ** len(keep)
    out = tensor.reshape(d, d)
    if wrap:
        labels = tuple(rho.qubit_labels[q] for q in keep)
        return DensityMatrix(out, labels)
    return out


def herm_eig(m, tol=1e-8):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary of eigenvectors as columns).
    Raises if the input deviates from Hermiticity by more than ``tol``.
    """
    m = _as_matrix(m)
    dev = np.abs(m - m.conj().T).max()
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (deviation {dev:.2e} > {tol:.2e})")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w, v


def psd_sqrt(rho):
    """Hermitian PSD square root of a density-matrix-like operator.

    Eigenvalues in [-1e-6, 0) are clamped to zero; anything more negative
    raises PositivityError so integrator pathologies are not hidden.
    """
    w, v = herm_eig(rho)
    if w.min() < -POSITIVITY_ABORT:
        raise PositivityError(
            f"eigenvalue {w.min():.3e} below the -{POSITIVITY_ABORT:.0e} positivity budget")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho0, rho_t):
    """Uhlmann state fidelity F = (tr sqrt(sqrt(rho0) rho_t sqrt(rho0)))^2.

    Symmetric in its arguments and equal to <psi|rho_t|psi> when rho0 is
    the pure state |psi><psi|.
    """
    a = _as_matrix(rho0)
    b = _as_matrix(rho_t)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    s = psd_sqrt(a)
    inner = s @ b @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(f, 1.0 + 1e-9)


def unitary_completion(seed_columns, dim, tol=1e-12):
    """Complete a partial isometry to a full unitary.

    Parameters
    ----------
    seed_columns : dict[int, ndarray]
        Column index -> unit vector. The seeds must be mutually orthonormal
        and are copied into the result unchanged.
    dim : int
        Matrix dimension.

    Remaining columns are filled by modified Gram-Schmidt over the
    canonical basis, in index order, so the completion is deterministic.
    """
    u = np.zeros((dim, dim), dtype=complex)
    taken = []
    for idx, vec in sorted(seed_columns.items()):
        v = np.asarray(vec, dtype=complex)
        for t in taken:
            v = v - t * np.vdot(t, v)
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError("seed columns must be orthonormal")
        u[:, idx] = vec
        taken.append(np.asarray(vec, dtype=complex))
    free = [j for j in range(dim) if j not in seed_columns]
    pos = 0
    for cand in range(dim):
        if pos >= len(free):
            break
        v = np.zeros(dim, dtype=complex)
        v[cand] = 1.0
        for t in taken:
            v = v - t * np.vdot(t, v)
        nrm = np.linalg.norm(v)
        if nrm < 1e-6:
            continue
        v = v / nrm
        u[:, free[pos]] = v
        taken.append(v)
        pos += 1
    if pos < len(free):
        raise RuntimeError("failed to complete unitary from canonical basis")
    dev = np.abs(u.conj().T @ u - np.eye(dim)).max()
    if dev > tol:
        raise RuntimeError(f"completion is not unitary (deviation {dev:.2e})")
    return u


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace state of a labeled qubit register.

    The matrix is stored read-only; operations return new instances.
    Hermiticity and trace are checked on construction, full positivity
    via :meth:`validate`.
    """

    matrix: np.ndarray
    qubit_labels: tuple = None

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        dim = mat.shape[0]
        if mat.shape != (dim, dim) or dim < 2 or dim & (dim - 1):
            raise ValueError("density matrix dimension must be a power of 2, >= 2")
        n = dim.bit_length() - 1
        labels = self.qubit_labels
        if labels is None:
            labels = tuple(range(n))
        labels = tuple(labels)
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} qubits")
        herm = np.abs(mat - mat.conj().T).max()
        if herm > 1e-10:
            raise ValueError(f"not Hermitian: max deviation {herm:.2e}")
        tr = abs(mat.trace() - 1.0)
        if tr > 1e-10:
            raise ValueError(f"trace deviates from 1 by {tr:.2e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "qubit_labels", labels)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def n_qubits(self):
        return len(self.qubit_labels)

    @classmethod
    def from_ket(cls, vec, qubit_labels=None):
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), qubit_labels)

    def validate(self):
        """Check the positivity invariant (eigenvalues >= -1e-8)."""
        w = np.linalg.eigvalsh(self.matrix)
        if w.min() < -POSITIVITY_CLAMP:
            raise PositivityError(f"eigenvalue {w.min():.3e} below -{POSITIVITY_CLAMP:.0e}")
        return self

    def partial_trace(self, keep):
        return partial_trace(self, keep)

    def fidelity_with(self, other):
        return fidelity(self, other)

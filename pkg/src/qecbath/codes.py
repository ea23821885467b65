"""Quantum error-correcting codes with a uniform channel interface.

Three codes are provided behind one abstraction (encode isometry,
recovery channel, decode reduction):

``five_qubit``
    The [[5,1,3]] perfect code. The logical qubit rides on physical
    qubit 3 (1-indexed) with four ancillas around it. Recovery is a
    16-operator Kraus map: in the decoded frame each operator reads a
    4-bit ancilla syndrome and applies a Pauli fix to the main qubit.

``steane``
    The [[7,1,3]] CSS code with six stabilizer generators. Recovery
    measures all six generators (projector decomposition) and applies
    the tabulated single-qubit Pauli correction; a Y error fires both
    the bit-flip and phase-flip sub-syndromes and receives the composed
    correction.

``toric_822``
    The [[8,2,2]] lattice code (2x2 periodic lattice, two logical
    qubits). Its distance is 2, so every firing syndrome is shared by
    two single-qubit errors; the recovery channel applies the two
    candidate corrections with weight 1/2 each (a deterministic CPTP
    map). A mode that always picks the first candidate and a seeded
    stochastic sampler exist for comparison.

A brute-force syndrome-table deriver recomputes every syndrome from
scratch (projective measurement on encoded basis states) and is used to
validate the tabulated corrections.
"""

import functools

import numpy as np

from .linalg import (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix,
                     basis_ket, embed, fidelity, ket, partial_trace,
                     unitary_completion)

__all__ = [
    "QecCode", "SyndromeTable", "BlockPair",
    "build_five_qubit", "build_steane", "build_toric_822", "get_code",
    "encode", "recover", "decode", "sample_recover", "derive_syndrome_table",
    "validate_five_qubit", "validate_steane", "validate_toric", "validate_all",
]

_PAULI = {"I": SIGMA_0, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

_AMP = 1.0 / (2.0 * np.sqrt(2.0))

# ---------------------------------------------------------------------------
# code data
# ---------------------------------------------------------------------------

# [[5,1,3]] codewords: signed bit-string superpositions, all amplitudes
# +-1/(2 sqrt 2). U|00000> = |0_L>, U|00100> = |1_L> (main qubit third).
FIVE_ZERO = [(-1, "00000"), (+1, "00110"), (+1, "01001"), (+1, "01111"),
             (-1, "10011"), (+1, "10101"), (+1, "11010"), (+1, "11100")]
FIVE_ONE = [(-1, "11111"), (+1, "11001"), (+1, "10110"), (+1, "10000"),
            (+1, "01100"), (-1, "01010"), (-1, "00101"), (-1, "00011")]

# Main-qubit fix applied by recovery operator k (ancilla syndrome
# s1 s2 s4 s5 read as the 4-bit integer k).
FIVE_CORRECTIONS = ["I", "Z", "I", "I",
                    "I", "Z", "X", "X",
                    "I", "X", "Z", "X",
                    "Z", "XZ", "X", "Z"]

# Which single-qubit error lands in which syndrome sector. Identity must
# take syndrome 0; the main-qubit errors take sectors whose fix matches
# their action (X3 -> an X sector, Z3 -> a Z sector, Y3 -> the XZ sector);
# the twelve ancilla errors fill the remaining sectors in enumeration
# order. The brute-force validation below certifies the assignment.
FIVE_SYNDROME_OF_ERROR = {"I": 0, "X3": 6, "Z3": 1, "Y3": 13}
_rest = [f"{p}{q}" for q in (1, 2, 4, 5) for p in ("X", "Y", "Z")]
for _k, _e in zip((k for k in range(16) if k not in FIVE_SYNDROME_OF_ERROR.values()), _rest):
    FIVE_SYNDROME_OF_ERROR[_e] = _k
del _rest, _k, _e

STEANE_GENERATORS = ("IIIXXXX", "IXXIIXX", "XIXIXIX",
                     "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ")
STEANE_ZERO = "0000000 1010101 0110011 1100110 0001111 1011010 0111100 1101001".split()
STEANE_ONE = "1111111 0101010 1001100 0011001 1110000 0100101 1000011 0010110".split()

TORIC_GENERATORS = ("XXXIIIXI", "XXIXIIIX", "IIXIXXXI",
                    "ZIZZZIII", "IZZZIZII", "ZIIIZIZZ")
# Codewords as computational-basis integers (qubit 1 = most significant bit).
TORIC_CODEWORDS = {
    (0, 0): (0, 29, 46, 51, 204, 209, 226, 255),
    (0, 1): (68, 89, 106, 119, 136, 149, 166, 187),
    (1, 0): (3, 30, 45, 48, 207, 210, 225, 252),
    (1, 1): (71, 90, 105, 116, 139, 150, 165, 184),
}
TORIC_LOGICALS = {"Z1": "ZZIIIIII", "X1": "XIIIXIII",
                  "Z2": "IIZIIIZI", "X2": "IIXXIIII"}


def pauli_matrix(string):
    """Dense matrix of a Pauli string such as "IXZ" (qubit 0 first)."""
    m = np.array([[1.0 + 0j]])
    for c in string:
        m = np.kron(m, _PAULI[c])
    return m


def _error_labels(n):
    """Weight-<=1 errors in deterministic order: identity, then qubit
    index ascending with X < Y < Z."""
    labels = ["I" * n]
    for q in range(n):
        for p in "XYZ":
            labels.append("I" * q + p + "I" * (n - q - 1))
    return labels


class SyndromeTable:
    """Map from syndrome bit string to weighted candidate corrections."""

    def __init__(self, entries):
        for syn, cands in entries.items():
            w = sum(weight for _, weight in cands)
            if abs(w - 1.0) > 1e-12 or any(weight <= 0 for _, weight in cands):
                raise ValueError(f"weights for syndrome {syn} must be positive and sum to 1")
        self.entries = dict(entries)

    def __getitem__(self, syndrome):
        return self.entries[syndrome]

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()


class QecCode:
    """One encode/recover/decode pipeline.

    Attributes
    ----------
    name : str
    n_physical, k_logical : int
    main_positions, ancilla_positions : tuple of qubit indices
    encode_unitary : (2^n, 2^n) unitary
    stabilizer_generators : tuple of Pauli strings (empty for five_qubit,
        whose syndromes are read from the ancilla pattern instead)
    codewords : tuple of logical-basis codeword vectors
    syndrome_corrections : dict syndrome -> (weight, correction string) list
    recovery_kraus : tuple of dense Kraus operators of the recovery
        channel (physical frame); materialized on first access.
    """

    def __init__(self, name, n_physical, k_logical, main_positions,
                 ancilla_positions, encode_unitary, sectors,
                 stabilizer_generators=(), codewords=(),
                 syndrome_corrections=None):
        self.name = name
        self.n_physical = n_physical
        self.k_logical = k_logical
        self.main_positions = tuple(main_positions)
        self.ancilla_positions = tuple(ancilla_positions)
        self.encode_unitary = encode_unitary
        self.stabilizer_generators = tuple(stabilizer_generators)
        self.codewords = tuple(codewords)
        self.syndrome_corrections = dict(syndrome_corrections or {})
        # sectors: list of (V, [(weight, W), ...]) with V the orthonormal
        # basis of one syndrome sector and W = correction @ V; the recovery
        # channel is rho -> sum_s sum_c w (W V^+ ) rho (W V^+)^+.
        self._sectors = sectors
        dev = np.abs(encode_unitary.conj().T @ encode_unitary
                     - np.eye(encode_unitary.shape[0])).max()
        if dev > 1e-10:
            raise RuntimeError(f"{name}: encode unitary deviates by {dev:.2e}")

    # -- channel pieces ----------------------------------------------------
    @property
    def dim(self):
        return 2**self.n_physical

    def _logical_indices(self):
        n = self.n_physical
        idx = []
        for b in range(2**self.k_logical):
            i = 0
            for bit_pos, q in enumerate(self.main_positions):
                bit = (b >> (self.k_logical - 1 - bit_pos)) & 1
                i |= bit << (n - 1 - q)
            idx.append(i)
        return idx

    def encode(self, rho_logical):
        """Attach |0> ancillas and conjugate by the encode unitary."""
        wrap = isinstance(rho_logical, DensityMatrix)
        mat = rho_logical.matrix if wrap else np.asarray(rho_logical, dtype=complex)
        dl = 2**self.k_logical
        if mat.shape != (dl, dl):
            raise ValueError(f"logical state must be {dl}x{dl}")
        pre = np.zeros((self.dim, self.dim), dtype=complex)
        idx = self._logical_indices()
        pre[np.ix_(idx, idx)] = mat
        out = self.encode_unitary @ pre @ self.encode_unitary.conj().T
        return DensityMatrix(out) if wrap else out

    def recover(self, rho_physical):
        """Syndrome readout plus tabulated correction (CPTP, deterministic)."""
        wrap = isinstance(rho_physical, DensityMatrix)
        mat = rho_physical.matrix if wrap else np.asarray(rho_physical, dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"physical state must be {self.dim}x{self.dim}")
        out = np.zeros_like(mat)
        for v, fixes in self._sectors:
            inner = v.conj().T @ mat @ v
            for weight, w in fixes:
                out += weight * (w @ inner @ w.conj().T)
        return DensityMatrix(out) if wrap else out

    def decode(self, rho_physical):
        """Undo the encode unitary and discard the ancilla qubits."""
        wrap = isinstance(rho_physical, DensityMatrix)
        mat = rho_physical.matrix if wrap else np.asarray(rho_physical, dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"physical state must be {self.dim}x{self.dim}")
        d = self.encode_unitary.conj().T @ mat @ self.encode_unitary
        out = partial_trace(d, self.main_positions, self.n_physical)
        return DensityMatrix(out) if wrap else out

    @functools.cached_property
    def recovery_kraus(self):
        ops = []
        for v, fixes in self._sectors:
            for weight, w in fixes:
                ops.append(np.sqrt(weight) * (w @ v.conj().T))
        return tuple(ops)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _signed_superposition(terms, n):
    vec = np.zeros(2**n, dtype=complex)
    for sign, bits in terms:
        vec += sign * _AMP * ket(bits)
    return vec


def build_five_qubit():
    """The [[5,1,3]] perfect code with its 16-operator recovery map."""
    n = 5
    v = {0: _signed_superposition(FIVE_ZERO, n),
         1: _signed_superposition(FIVE_ONE, n)}
    err = {lab: pauli_matrix(_label_to_string(lab, n)) for lab in FIVE_SYNDROME_OF_ERROR}

    # Column (s1 s2, b, s4 s5) of U is E_k (P_k |b>) expressed in codewords,
    # where k is the sector of error E_k and P_k its main-qubit fix. The 32
    # error images of the codewords are exactly orthonormal (perfect code),
    # so this fills a unitary; the constructor asserts it.
    u = np.zeros((32, 32), dtype=complex)
    syndrome_cols = {}
    for lab, k in FIVE_SYNDROME_OF_ERROR.items():
        sa, sb = k // 4, k % 4
        base = (sa >> 1) * 16 + (sa & 1) * 8 + (sb >> 1) * 2 + (sb & 1)
        fix = _fix_matrix(k)
        cols = (base, base + 4)
        syndrome_cols[k] = cols
        for b in (0, 1):
            amp = fix @ np.eye(2)[:, b]
            u[:, cols[b]] = err[lab] @ (amp[0] * v[0] + amp[1] * v[1])

    sectors = []
    code_cols = syndrome_cols[0]
    for k in range(16):
        vk = u[:, list(syndrome_cols[k])]
        wk = u[:, list(code_cols)] @ _fix_matrix(k)
        sectors.append((vk, [(1.0, wk)]))

    return QecCode("five_qubit", n, 1, main_positions=(2,),
                   ancilla_positions=(0, 1, 3, 4), encode_unitary=u,
                   sectors=sectors, codewords=(v[0], v[1]))


def _fix_matrix(k):
    m = np.eye(2, dtype=complex)
    for c in FIVE_CORRECTIONS[k]:
        m = m @ _PAULI[c]
    return m


def _label_to_string(label, n):
    if label == "I":
        return "I" * n
    p, q = label[0], int(label[1:]) - 1
    return "I" * q + p + "I" * (n - q - 1)


def _stabilizer_sectors(generators, corrections, dim):
    """Projector decomposition of the syndrome measurement.

    Splits the identity along the +-1 eigenspaces of each generator and
    attaches the tabulated correction (identity when a syndrome has no
    table entry). Returns the sector list for QecCode.
    """
    mats = [pauli_matrix(g) for g in generators]
    eye = np.eye(dim, dtype=complex)
    blocks = [("", eye)]
    for g in mats:
        nxt = []
        for bits, p in blocks:
            nxt.append((bits + "0", p @ (eye + g) / 2))
            nxt.append((bits + "1", p @ (eye - g) / 2))
        blocks = nxt
    rank = dim // 2 ** len(generators)
    sectors = []
    for bits, p in blocks:
        w, vec = np.linalg.eigh(p)
        v = vec[:, w > 0.5]
        if v.shape[1] != rank:
            raise RuntimeError(f"syndrome sector {bits} has rank {v.shape[1]} != {rank}")
        fixes = corrections.get(bits, ((1.0, "I" * int(np.log2(dim))),))
        sectors.append((v, [(wgt, pauli_matrix(c) @ v) for wgt, c in fixes]))
    return sectors


def _weight1_syndromes(generators, codewords):
    """Syndrome of every weight-<=1 error, measured on the codewords.

    The syndrome bit of generator G_i is 0 when G_i (error |psi_L>) =
    +(error |psi_L>) and 1 for the -1 eigenvalue; consistency across all
    codewords is asserted.
    """
    n = len(generators[0])
    gmats = [pauli_matrix(g) for g in generators]
    table = {}
    for lab in _error_labels(n):
        e = pauli_matrix(lab)
        bits = None
        for cw in codewords:
            phi = e @ cw
            cur = ""
            for g in gmats:
                s = np.vdot(phi, g @ phi).real
                if abs(abs(s) - 1.0) > 1e-9:
                    raise RuntimeError(f"{lab} is not a syndrome eigenoperator")
                cur += "0" if s > 0 else "1"
            if bits is None:
                bits = cur
            elif bits != cur:
                raise RuntimeError(f"inconsistent syndrome for {lab} across codewords")
        table.setdefault(bits, []).append(lab)
    return table


def build_steane():
    """The [[7,1,3]] CSS code with projector-based recovery."""
    n = 7
    v0 = sum(ket(b) for b in STEANE_ZERO) * _AMP
    v1 = sum(ket(b) for b in STEANE_ONE) * _AMP
    u = unitary_completion({0: v0, 2**(n - 1): v1}, 2**n)
    syn = _weight1_syndromes(STEANE_GENERATORS, (v0, v1))
    corrections = {}
    for bits, labs in syn.items():
        if bits == "0" * 6:
            continue
        if len(labs) != 1:
            raise RuntimeError(f"degenerate syndrome {bits} unexpected for this code")
        corrections[bits] = ((1.0, labs[0]),)
    sectors = _stabilizer_sectors(STEANE_GENERATORS, corrections, 2**n)
    return QecCode("steane", n, 1, main_positions=(0,),
                   ancilla_positions=tuple(range(1, 7)), encode_unitary=u,
                   sectors=sectors, stabilizer_generators=STEANE_GENERATORS,
                   codewords=(v0, v1), syndrome_corrections=corrections)


def build_toric_822(recovery="mixing"):
    """The [[8,2,2]] lattice code.

    recovery="mixing" applies both candidate corrections of a degenerate
    syndrome with weight 1/2 each; "first" always applies the first
    listed candidate. Syndromes outside the weight-1 X/Z table (e.g.
    from Y errors, which this distance-2 code cannot resolve) receive no
    correction.
    """
    if recovery not in ("mixing", "first"):
        raise ValueError("recovery must be 'mixing' or 'first'")
    n = 8
    cw = {}
    for (b1, b2), ints in TORIC_CODEWORDS.items():
        cw[(b1, b2)] = sum(basis_ket(i, n) for i in ints) * _AMP
    for g in TORIC_GENERATORS:
        gm = pauli_matrix(g)
        for key, vec in cw.items():
            if np.linalg.norm(gm @ vec - vec) > 1e-12:
                raise RuntimeError(f"generator {g} does not fix codeword {key}; "
                                   "basis-ordering convention broken")
    seeds = {b1 * 2**(n - 1) + b2 * 2**(n - 2): cw[(b1, b2)]
             for (b1, b2) in cw}
    u = unitary_completion(seeds, 2**n)
    syn = _weight1_syndromes(TORIC_GENERATORS, tuple(cw.values()))
    corrections = {}
    for bits, labs in syn.items():
        if bits == "0" * 6:
            continue
        xz = [l for l in labs if "Y" not in l]
        if not xz:
            continue  # Y-induced syndromes: no table entry, no correction
        if len(xz) != 2:
            raise RuntimeError(f"syndrome {bits}: expected a degenerate pair, got {xz}")
        if recovery == "mixing":
            corrections[bits] = ((0.5, xz[0]), (0.5, xz[1]))
        else:
            corrections[bits] = ((1.0, xz[0]),)
    sectors = _stabilizer_sectors(TORIC_GENERATORS, corrections, 2**n)
    code = QecCode("toric_822", n, 2, main_positions=(0, 1),
                   ancilla_positions=tuple(range(2, 8)), encode_unitary=u,
                   sectors=sectors, stabilizer_generators=TORIC_GENERATORS,
                   codewords=tuple(cw.values()), syndrome_corrections=corrections)
    code.recovery_mode = recovery
    return code


def get_code(name, toric_recovery="mixing"):
    if name == "five_qubit":
        return build_five_qubit()
    if name == "steane":
        return build_steane()
    if name == "toric_822":
        return build_toric_822(toric_recovery)
    raise ValueError(f"unknown code '{name}' (five_qubit | steane | toric_822)")


# module-level channel operations, matching the code methods
def encode(code, rho_logical):
    return code.encode(rho_logical)


def recover(code, rho_physical):
    return code.recover(rho_physical)


def decode(code, rho_physical):
    return code.decode(rho_physical)


def sample_recover(code, rho_physical, rng):
    """Stochastic variant of recover: one candidate correction per
    degenerate syndrome is drawn with its weight (seeded rng)."""
    wrap = isinstance(rho_physical, DensityMatrix)
    mat = rho_physical.matrix if wrap else np.asarray(rho_physical, dtype=complex)
    out = np.zeros_like(mat)
    for v, fixes in code._sectors:
        inner = v.conj().T @ mat @ v
        if len(fixes) == 1:
            w = fixes[0][1]
        else:
            weights = [f[0] for f in fixes]
            pick = rng.choice(len(fixes), p=np.array(weights) / sum(weights))
            w = fixes[pick][1]
        out += w @ inner @ w.conj().T
    tr = np.trace(out).real
    if tr > 1e-12:
        out = out / tr * np.trace(mat).real
    return DensityMatrix(out) if wrap else out


# ---------------------------------------------------------------------------
# blockwise composition of two independent k=1 blocks
# ---------------------------------------------------------------------------

class BlockPair:
    """Two logical qubits carried by two independent blocks of a k=1 code.

    Encoding, recovery and decoding all act blockwise; the joint register
    has 2 n_physical qubits (block A first). Used to run the two-qubit
    protocols on the one-logical-qubit codes.
    """

    def __init__(self, block):
        if block.k_logical != 1:
            raise ValueError("BlockPair requires a one-logical-qubit block code")
        self.block = block
        self.name = block.name + "_pair"
        self.n_physical = 2 * block.n_physical
        self.k_logical = 2
        nb = block.n_physical
        self.main_positions = (block.main_positions[0],
                               nb + block.main_positions[0])
        self.ancilla_positions = tuple(q for q in range(self.n_physical)
                                       if q not in self.main_positions)
        self._u_pair = np.kron(block.encode_unitary, block.encode_unitary)

    @property
    def dim(self):
        return 2**self.n_physical

    def encode(self, rho_logical):
        wrap = isinstance(rho_logical, DensityMatrix)
        mat = rho_logical.matrix if wrap else np.asarray(rho_logical, dtype=complex)
        if mat.shape != (4, 4):
            raise ValueError("logical state must be 4x4")
        nb = self.block.n_physical
        idx_b = self.block._logical_indices()
        idx = [idx_b[b1] * 2**nb + idx_b[b2] for b1 in (0, 1) for b2 in (0, 1)]
        pre = np.zeros((self.dim, self.dim), dtype=complex)
        pre[np.ix_(idx, idx)] = mat
        out = self._u_pair @ pre @ self._u_pair.conj().T
        return DensityMatrix(out) if wrap else out

    def _recover_block(self, mat, which):
        db = self.block.dim
        eye = np.eye(db, dtype=complex)
        out = np.zeros_like(mat)
        for v, fixes in self.block._sectors:
            vb = np.kron(v, eye) if which == 0 else np.kron(eye, v)
            inner = vb.conj().T @ mat @ vb
            for weight, w in fixes:
                wb = np.kron(w, eye) if which == 0 else np.kron(eye, w)
                out += weight * (wb @ inner @ wb.conj().T)
        return out

    def recover(self, rho_physical):
        wrap = isinstance(rho_physical, DensityMatrix)
        mat = rho_physical.matrix if wrap else np.asarray(rho_physical, dtype=complex)
        out = self._recover_block(self._recover_block(mat, 0), 1)
        return DensityMatrix(out) if wrap else out

    def decode(self, rho_physical):
        wrap = isinstance(rho_physical, DensityMatrix)
        mat = rho_physical.matrix if wrap else np.asarray(rho_physical, dtype=complex)
        d = self._u_pair.conj().T @ mat @ self._u_pair
        out = partial_trace(d, self.main_positions, self.n_physical)
        return DensityMatrix(out) if wrap else out


# ---------------------------------------------------------------------------
# brute-force syndrome derivation and validation suites
# ---------------------------------------------------------------------------

def derive_syndrome_table(code):
    """Recompute the syndrome of every weight-<=1 error from scratch.

    Stabilizer codes: measure every generator on the errored codewords.
    The five-qubit code (no generator list): read the ancilla bit pattern
    of the decoded errored codewords. Errors sharing a syndrome are
    grouped with equal weights. Raises if any error gives inconsistent
    syndromes across the logical basis states.
    """
    if code.stabilizer_generators:
        raw = _weight1_syndromes(code.stabilizer_generators, code.codewords)
    else:
        raw = _ancilla_pattern_syndromes(code)
    entries = {}
    for lab in _error_labels(code.n_physical):
        for bits, labs in raw.items():
            if lab in labs:
                entries.setdefault(bits, []).append(lab)
    return SyndromeTable({bits: tuple((lab, 1.0 / len(labs)) for lab in labs)
                          for bits, labs in entries.items()})


def _ancilla_pattern_syndromes(code):
    n = code.n_physical
    udag = code.encode_unitary.conj().T
    table = {}
    for lab in _error_labels(n):
        e = pauli_matrix(lab)
        bits = None
        for cw in code.codewords:
            phi = udag @ (e @ cw)
            weights = {}
            for i in np.nonzero(np.abs(phi) > 1e-9)[0]:
                anc = "".join(str((int(i) >> (n - 1 - q)) & 1)
                              for q in code.ancilla_positions)
                weights[anc] = weights.get(anc, 0.0) + abs(phi[i])**2
            pattern, wgt = max(weights.items(), key=lambda kv: kv[1])
            if wgt < 1.0 - 1e-9:
                raise RuntimeError(f"error {lab} does not map to a single ancilla pattern")
            if bits is None:
                bits = pattern
            elif bits != pattern:
                raise RuntimeError(f"inconsistent syndrome for {lab} across codewords")
        table.setdefault(bits, []).append(lab)
    return table


def _random_logical_states(k, count, seed):
    rng = np.random.default_rng(seed)
    d = 2**k
    for _ in range(count):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v = v / np.linalg.norm(v)
        yield np.outer(v, v.conj())


def _roundtrip_fidelity(code, error_string, rho_logical):
    e = pauli_matrix(error_string)
    enc = code.encode(rho_logical)
    damaged = e @ enc @ e.conj().T
    out = code.decode(code.recover(damaged))
    return fidelity(rho_logical, out)


def validate_five_qubit(n_states=20, seed=7, tol=1e-9):
    """Brute force: all 16 weight-<=1 errors restored on random states."""
    code = build_five_qubit()
    checks = []
    states = list(_random_logical_states(1, n_states, seed))
    for lab in _error_labels(5):
        worst = min(_roundtrip_fidelity(code, lab, s) for s in states)
        checks.append((f"five_qubit error {lab}", worst >= 1.0 - tol,
                       f"min fidelity {worst:.12f}"))
    table = derive_syndrome_table(code)
    distinct = len(table.entries)
    checks.append(("five_qubit: 16 distinct syndromes (perfect code)",
                   distinct == 16, f"{distinct} syndromes"))
    return _report("five_qubit", checks)


STEANE_PUBLISHED_ROWS = {
    # bit flips: generator pattern G4 G5 G6 encodes the qubit index
    "000001": "XIIIIII", "000010": "IXIIIII", "000011": "IIXIIII",
    "000100": "IIIXIII", "000101": "IIIIXII", "000110": "IIIIIXI",
    "000111": "IIIIIIX",
    # phase flips: pattern G1 G2 G3
    "001000": "ZIIIIII", "010000": "IZIIIII", "011000": "IIZIIII",
    "100000": "IIIZIII", "101000": "IIIIZII", "110000": "IIIIIZI",
    "111000": "IIIIIIZ",
}


def validate_steane(n_states=6, seed=11, tol=1e-9):
    """Table reproduction plus correction of all 21 weight-1 Paulis."""
    code = build_steane()
    table = derive_syndrome_table(code)
    checks = []
    for bits, expected in STEANE_PUBLISHED_ROWS.items():
        got = [lab for lab, _ in table[bits]] if bits in table.entries else []
        checks.append((f"steane row {bits} -> {expected}",
                       got == [expected], f"derived {got}"))
    states = list(_random_logical_states(1, n_states, seed))
    for lab in _error_labels(7)[1:]:
        worst = min(_roundtrip_fidelity(code, lab, s) for s in states)
        checks.append((f"steane error {lab}", worst >= 1.0 - tol,
                       f"min fidelity {worst:.12f}"))
    return _report("steane", checks)


TORIC_PUBLISHED_ROWS = {
    "000001": ("IIIIIIXI", "IIIIIIIX"),
    "000010": ("IXIIIIII", "IIIIIXII"),
    "000101": ("XIIIIIII", "IIIIXIII"),
    "000110": ("IIXIIIII", "IIIXIIII"),
    "001000": ("IIIIZIII", "IIIIIZII"),
    "010000": ("IIIZIIII", "IIIIIIIZ"),
    "101000": ("IIZIIIII", "IIIIIIZI"),
    "110000": ("ZIIIIIII", "IZIIIIII"),
}


def validate_toric(seed=13, tol=1e-9):
    """Codeword stabilization, table reproduction, degeneracy behavior."""
    code = build_toric_822("mixing")
    first = build_toric_822("first")
    checks = []
    for key, vec in zip(TORIC_CODEWORDS, code.codewords):
        ok = all(np.linalg.norm(pauli_matrix(g) @ vec - vec) < 1e-10
                 for g in TORIC_GENERATORS)
        checks.append((f"toric codeword {key} fixed by all generators", ok, ""))
    table = derive_syndrome_table(code)
    for bits, expected in TORIC_PUBLISHED_ROWS.items():
        got = tuple(lab for lab, _ in table[bits]) if bits in table.entries else ()
        checks.append((f"toric row {bits} -> {','.join(expected)}",
                       got == expected, f"derived {got}"))
    # deterministic-first corrects the first candidate exactly; applying
    # the second candidate instead leaves a logical operator: the state
    # stays inside the code space but differs from the input.
    rho = next(iter(_random_logical_states(2, 1, seed)))
    proj = sum(np.outer(c, c.conj()) for c in code.codewords)
    for bits, (c1, c2) in TORIC_PUBLISHED_ROWS.items():
        f1 = _roundtrip_fidelity(first, c1, rho)
        checks.append((f"toric first-candidate {c1} corrected", f1 >= 1.0 - tol,
                       f"fidelity {f1:.12f}"))
        e2 = pauli_matrix(c2)
        enc = first.encode(rho)
        out = first.recover(e2 @ enc @ e2.conj().T)
        in_code = np.trace(proj @ out).real
        f2 = fidelity(rho, first.decode(out))
        checks.append((f"toric second-candidate {c2} stays in code space",
                       abs(in_code - 1.0) < 1e-9 and f2 < 1.0 - 1e-6,
                       f"code-space weight {in_code:.9f}, fidelity {f2:.6f}"))
        # the mixing channel restores the state with probability 1/2
        fmix = _roundtrip_fidelity(code, c1, rho)
        checks.append((f"toric mixing channel on {c1} ({bits})",
                       0.0 < fmix < 1.0 + 1e-9, f"weighted fidelity {fmix:.6f}"))
    return _report("toric_822", checks)


def _report(name, checks):
    return {"name": name,
            "checks": checks,
            "n_verified": sum(1 for _, ok, _ in checks if ok),
            "n_checks": len(checks),
            "passed": all(ok for _, ok, _ in checks)}


def validate_all():
    return [validate_five_qubit(), validate_steane(), validate_toric()]

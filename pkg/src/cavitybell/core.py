"""Hilbert-space bookkeeping and propagation engines.

Conventions used throughout the package: hbar = 1, the atom-cavity coupling
g = 1 sets the frequency unit, time is measured in 1/g.  Composite basis
ordering is fixed as cavity Fock label first, then one label per atom, i.e.
index = (n * L + j1) * L + j2 for two atoms with L atomic levels.

Conditional (no-emission) evolution generated by a non-Hermitian Hamiltonian
is propagated with fixed-step classical RK4.  For a time-independent
generator the RK4 update is a constant matrix (the degree-4 Taylor polynomial
of the step propagator), so N steps are applied as an N-th matrix power; this
keeps stiff far-detuned problems (detunings of order 400 g over pulses of
order 1e5 / g) affordable while remaining the same integration scheme.
An independent dense matrix-exponential route is provided as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "ConvergenceError",
    "HilbertDims",
    "StateVector",
    "OperatorMatrix",
    "DensityMatrix",
    "basis_index",
    "basis_labels",
    "basis_state",
    "annihilator",
    "number_op",
    "atom_transition",
    "atom_projector",
    "identity_op",
    "survival_probability",
    "evolve_nojump",
    "expm_oracle",
    "lindblad_reference",
]

#: dense matrices beyond this size are refused by the oracle routes
MAX_ORACLE_DIM = 4096


class ConvergenceError(RuntimeError):
    """Raised when step-halving refinement fails to reach tolerance."""


@dataclass(frozen=True)
class HilbertDims:
    """Dimensions of the cavity + atoms Hilbert space.

    n_max is the Fock-space truncation (photon numbers 0..n_max),
    atom_levels the number of levels per atom and n_atoms the atom count.
    """

    n_max: int
    atom_levels: int
    n_atoms: int = 2

    def __post_init__(self) -> None:
        if self.n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {self.n_max}")
        if self.atom_levels not in (2, 3, 4):
            raise ValueError(f"atom_levels must be 2, 3 or 4, got {self.atom_levels}")
        if self.n_atoms not in (1, 2):
            raise ValueError(f"n_atoms must be 1 or 2, got {self.n_atoms}")

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * self.atom_levels**self.n_atoms


def basis_index(dims: HilbertDims, n: int, j1: int, j2: int | None = None) -> int:
    """Flat index of |n, j1(, j2)> in the declared basis ordering."""
    L = dims.atom_levels
    if not 0 <= n <= dims.n_max:
        raise ValueError(f"photon number {n} outside 0..{dims.n_max}")
    if not 0 <= j1 < L:
        raise ValueError(f"atom-1 level {j1} outside 0..{L - 1}")
    if dims.n_atoms == 1:
        if j2 is not None:
            raise ValueError("j2 given for a single-atom space")
        return n * L + j1
    if j2 is None:
        raise ValueError("j2 required for a two-atom space")
    if not 0 <= j2 < L:
        raise ValueError(f"atom-2 level {j2} outside 0..{L - 1}")
    return (n * L + j1) * L + j2


def basis_labels(dims: HilbertDims, index: int) -> tuple[int, ...]:
    """Inverse of basis_index: (n, j1) or (n, j1, j2)."""
    if not 0 <= index < dims.dim:
        raise ValueError(f"index {index} outside 0..{dims.dim - 1}")
    L = dims.atom_levels
    if dims.n_atoms == 1:
        return divmod(index, L)
    rest, j2 = divmod(index, L)
    n, j1 = divmod(rest, L)
    return n, j1, j2


@dataclass
class StateVector:
    """Complex amplitudes over the composite basis; may be unnormalized."""

    dims: HilbertDims
    amps: np.ndarray

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (self.dims.dim,):
            raise ValueError(
                f"amplitude vector has shape {self.amps.shape}, expected ({self.dims.dim},)"
            )

    def norm_sq(self) -> float:
        return float(np.real(np.vdot(self.amps, self.amps)))

    def normalized(self) -> "StateVector":
        n = np.sqrt(self.norm_sq())
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.dims, self.amps / n)

    def overlap(self, other: "StateVector") -> complex:
        if other.dims != self.dims:
            raise ValueError("dimension mismatch in overlap")
        return complex(np.vdot(self.amps, other.amps))


@dataclass
class OperatorMatrix:
    """Dense complex square matrix on the composite basis."""

    dims: HilbertDims
    mat: np.ndarray

    def __post_init__(self) -> None:
        self.mat = np.asarray(self.mat, dtype=complex)
        d = self.dims.dim
        if self.mat.shape != (d, d):
            raise ValueError(f"matrix has shape {self.mat.shape}, expected ({d}, {d})")

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.dims, self.mat.conj().T)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(np.abs(self.mat).max(), 1.0)
        return bool(np.abs(self.mat - self.mat.conj().T).max() <= tol * scale)

    def apply(self, psi: StateVector) -> StateVector:
        if psi.dims != self.dims:
            raise ValueError("dimension mismatch in operator application")
        return StateVector(self.dims, self.mat @ psi.amps)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.dims != self.dims:
            raise ValueError("dimension mismatch in operator sum")
        return OperatorMatrix(self.dims, self.mat + other.mat)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.dims != self.dims:
            raise ValueError("dimension mismatch in operator product")
        return OperatorMatrix(self.dims, self.mat @ other.mat)


@dataclass
class DensityMatrix:
    """Density operator on the composite basis."""

    dims: HilbertDims
    mat: np.ndarray

    def __post_init__(self) -> None:
        self.mat = np.asarray(self.mat, dtype=complex)
        d = self.dims.dim
        if self.mat.shape != (d, d):
            raise ValueError(f"matrix has shape {self.mat.shape}, expected ({d}, {d})")

    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def populations(self) -> np.ndarray:
        # tiny negative round-off clamps to zero
        p = np.real(np.diag(self.mat)).copy()
        p[(p < 0) & (p > -1e-12)] = 0.0
        return p

    @staticmethod
    def from_state(psi: StateVector) -> "DensityMatrix":
        return DensityMatrix(psi.dims, np.outer(psi.amps, psi.amps.conj()))


# ---------------------------------------------------------------------------
# elementary operator factories


def basis_state(dims: HilbertDims, n: int, j1: int, j2: int | None = None) -> StateVector:
    amps = np.zeros(dims.dim, dtype=complex)
    amps[basis_index(dims, n, j1, j2)] = 1.0
    return StateVector(dims, amps)


def identity_op(dims: HilbertDims) -> OperatorMatrix:
    return OperatorMatrix(dims, np.eye(dims.dim, dtype=complex))


def _cavity_destroy(n_max: int) -> np.ndarray:
    a = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(1, n_max + 1):
        a[n - 1, n] = np.sqrt(n)
    return a


def _embed(dims: HilbertDims, cav: np.ndarray, atoms: list[np.ndarray]) -> np.ndarray:
    out = cav
    for a in atoms:
        out = np.kron(out, a)
    return out


def annihilator(dims: HilbertDims) -> OperatorMatrix:
    """Photon annihilation operator b on the composite space."""
    L = dims.atom_levels
    eye = np.eye(L, dtype=complex)
    return OperatorMatrix(
        dims, _embed(dims, _cavity_destroy(dims.n_max), [eye] * dims.n_atoms)
    )


def number_op(dims: HilbertDims) -> OperatorMatrix:
    """Photon number operator b'b."""
    b = annihilator(dims).mat
    return OperatorMatrix(dims, b.conj().T @ b)


def atom_transition(dims: HilbertDims, atom: int, ket: int, bra: int) -> OperatorMatrix:
    """|ket><bra| acting on the given atom (0-based), identity elsewhere."""
    L = dims.atom_levels
    if not 0 <= atom < dims.n_atoms:
        raise ValueError(f"atom index {atom} outside 0..{dims.n_atoms - 1}")
    if not (0 <= ket < L and 0 <= bra < L):
        raise ValueError("atomic level outside range")
    op = np.zeros((L, L), dtype=complex)
    op[ket, bra] = 1.0
    eye_c = np.eye(dims.n_max + 1, dtype=complex)
    eye_a = np.eye(L, dtype=complex)
    atoms = [op if i == atom else eye_a for i in range(dims.n_atoms)]
    return OperatorMatrix(dims, _embed(dims, eye_c, atoms))


def atom_projector(dims: HilbertDims, atom: int, level: int) -> OperatorMatrix:
    return atom_transition(dims, atom, level, level)


# ---------------------------------------------------------------------------
# propagation engines


def survival_probability(psi: StateVector) -> float:
    """No-emission probability: squared norm, clamped to [0, 1]."""
    return min(max(psi.norm_sq(), 0.0), 1.0)


def _rk4_step_increment(a_mat: np.ndarray, h: float) -> np.ndarray:
    # classical RK4 for psi' = A psi with constant A collapses exactly to
    # the degree-4 Taylor polynomial of exp(hA); the identity is kept
    # implicit so tiny steps do not lose the increment to round-off
    ha = h * a_mat
    eye = np.eye(a_mat.shape[0], dtype=complex)
    inner = eye + 0.25 * ha
    inner = eye + (ha @ inner) / 3.0
    inner = eye + 0.5 * (ha @ inner)
    return ha @ inner


def _propagate_rk4(a_mat: np.ndarray, amps: np.ndarray, T: float, n_steps: int) -> np.ndarray:
    # (I + D)^n by binary exponentiation in increment form:
    # squaring maps D to 2D + D@D and the running product (I + E)(I + D)
    # keeps E = E + D + E@D, preserving relative precision while the
    # deviations from identity are small
    d = _rk4_step_increment(a_mat, T / n_steps)
    acc = None
    n = n_steps
    while True:
        if n & 1:
            acc = d.copy() if acc is None else acc + d + acc @ d
        n >>= 1
        if not n:
            break
        d = 2.0 * d + d @ d
    return amps + acc @ amps


def evolve_nojump(
    H: OperatorMatrix,
    psi0: StateVector,
    T: float,
    *,
    tol_per_time: float = 1e-11,
    omega_max: float | None = None,
    max_halvings: int = 40,
) -> StateVector:
    """Unnormalized conditional state exp(-iHT)|psi0> via fixed-step RK4.

    The initial step is h = min(1e-2/omega_max, T/1000), with omega_max
    defaulting to the infinity norm of H (an upper bound on every system
    frequency).  The step is halved until the propagated amplitudes change
    by less than tol_per_time * max(T, 1) in the max norm.
    """
    if psi0.dims != H.dims:
        raise ValueError("state and Hamiltonian dimensions differ")
    if T < 0:
        raise ValueError(f"negative evolution time {T}")
    if not np.all(np.isfinite(H.mat)):
        raise ValueError("Hamiltonian contains non-finite entries")
    if T == 0:
        return StateVector(psi0.dims, psi0.amps.copy())

    a_mat = -1j * H.mat
    if omega_max is None:
        omega_max = float(np.abs(H.mat).sum(axis=1).max())
    if omega_max <= 0:
        return StateVector(psi0.dims, psi0.amps.copy())

    tol = tol_per_time * max(T, 1.0)
    h0 = min(1e-2 / omega_max, T / 1000.0)
    n_steps = max(int(np.ceil(T / h0)), 1)
    prev = _propagate_rk4(a_mat, psi0.amps, T, n_steps)
    for _ in range(max_halvings):
        n_steps *= 2
        cur = _propagate_rk4(a_mat, psi0.amps, T, n_steps)
        if np.abs(cur - prev).max() < tol:
            return StateVector(psi0.dims, cur)
        prev = cur
    raise ConvergenceError(
        f"no-jump propagation did not converge to {tol} after {max_halvings} halvings"
    )


def expm_oracle(H: OperatorMatrix, T: float, psi: StateVector) -> StateVector:
    """exp(-iHT)|psi> by dense scaling-and-squaring; independent oracle."""
    if psi.dims != H.dims:
        raise ValueError("state and Hamiltonian dimensions differ")
    if H.dims.dim > MAX_ORACLE_DIM:
        raise ValueError(f"oracle limited to dim <= {MAX_ORACLE_DIM}")
    u = scipy.linalg.expm(-1j * T * H.mat)
    return StateVector(psi.dims, u @ psi.amps)


def _liouvillian(
    h_mat: np.ndarray, jumps: list[tuple[np.ndarray, float]], dim: int
) -> np.ndarray:
    # row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho)
    eye = np.eye(dim, dtype=complex)
    lv = -1j * (np.kron(h_mat, eye) - np.kron(eye, h_mat.T))
    for l_mat, rate in jumps:
        ldl = l_mat.conj().T @ l_mat
        lv += rate * (
            np.kron(l_mat, l_mat.conj())
            - 0.5 * np.kron(ldl, eye)
            - 0.5 * np.kron(eye, ldl.T)
        )
    return lv


def lindblad_reference(
    H_sys: OperatorMatrix,
    jumps: list[tuple[OperatorMatrix, float]],
    rho0: DensityMatrix,
    T: float,
) -> DensityMatrix:
    """Master-equation propagation via the exponential of the Liouvillian.

    Oracle for ensemble-averaged jump dynamics; algorithmically unrelated to
    the trajectory machinery it validates.
    """
    dims = H_sys.dims
    if rho0.dims != dims:
        raise ValueError("density matrix and Hamiltonian dimensions differ")
    if dims.dim**2 > MAX_ORACLE_DIM:
        raise ValueError("Liouvillian exponential limited to dim**2 <= 4096")
    if T < 0:
        raise ValueError(f"negative evolution time {T}")
    if not H_sys.is_hermitian(1e-12):
        raise ValueError(
            "H_sys must be Hermitian; decay belongs in the jump layer "
            "(pass conditional Hamiltonians to the trajectory engine instead)"
        )
    mats = []
    for op, rate in jumps:
        if rate < 0:
            raise ValueError(f"negative jump rate {rate}")
        if op.dims != dims:
            raise ValueError("jump operator dimension mismatch")
        mats.append((op.mat, rate))
    lv = _liouvillian(H_sys.mat, mats, dims.dim)
    vec = scipy.linalg.expm(T * lv) @ rho0.mat.reshape(-1)
    return DensityMatrix(dims, vec.reshape(dims.dim, dims.dim))

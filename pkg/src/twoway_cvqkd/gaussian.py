"""Gaussian-state algebra over labelled modes, in shot-noise units.

A state is a real symmetric 2N x 2N covariance matrix over an ordered tuple
of string mode labels, quadratures interleaved as (x1, p1, x2, p2, ...), with
the vacuum variance normalised to 1 (first moments are zero throughout).
Symplectic transforms act by congruence, gamma -> S gamma S^T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

# Numerical contracts shared across the package.
SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10
PHYSICALITY_TOL = 1e-9
SPECTRUM_PAIR_RTOL = 1e-8

SIGMA_Z = np.diag([1.0, -1.0])


class UnphysicalStateError(ValueError):
    """Covariance matrix violates the uncertainty bound."""


class DegenerateMeasurementError(ValueError):
    """Conditioning on a quadrature with (near-)zero variance."""


class SpectrumError(RuntimeError):
    """Eigen-solve failed or produced an unpaired symplectic spectrum.

    The offending matrix is attached as the ``matrix`` attribute.
    """

    def __init__(self, message: str, matrix: np.ndarray):
        super().__init__(message)
        self.matrix = np.array(matrix)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form, one [[0, 1], [-1, 0]] block per mode."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        omega[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = block
    return omega


def _check_labels(modes: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(modes)
    if not labels:
        raise ValueError("need at least one mode label")
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate mode labels in {labels}")
    return labels


@dataclass(frozen=True)
class CovarianceMatrix:
    """Covariance matrix over an ordered tuple of labelled modes.

    The stored array is a defensive, symmetrised, read-only copy.  Mild
    asymmetry (below SYMMETRY_TOL, as left behind by float congruences) is
    folded away as (gamma + gamma^T) / 2; anything larger is rejected.
    """

    modes: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self):
        labels = _check_labels(self.modes)
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"covariance matrix must be square, got {arr.shape}")
        if arr.shape[0] != 2 * len(labels):
            raise ValueError(
                f"matrix dimension {arr.shape[0]} does not match "
                f"{len(labels)} modes (expected {2 * len(labels)})"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("covariance matrix has non-finite entries")
        asym = np.max(np.abs(arr - arr.T), initial=0.0)
        scale = max(1.0, float(np.max(np.abs(arr), initial=0.0)))
        if asym > SYMMETRY_TOL * scale:
            raise ValueError(f"matrix asymmetry {asym:.3e} exceeds tolerance")
        arr = 0.5 * (arr + arr.T)
        arr.flags.writeable = False
        object.__setattr__(self, "modes", labels)
        object.__setattr__(self, "data", arr)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mode_index(self, label: str) -> int:
        try:
            return self.modes.index(label)
        except ValueError:
            raise KeyError(f"unknown mode label {label!r}; have {self.modes}") from None

    def _quad_index(self, label: str, quadrature: str) -> int:
        offset = {"x": 0, "p": 1}.get(quadrature)
        if offset is None:
            raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
        return 2 * self.mode_index(label) + offset

    def variance(self, label: str, quadrature: str) -> float:
        i = self._quad_index(label, quadrature)
        return float(self.data[i, i])

    def covariance(self, label_a: str, quad_a: str, label_b: str, quad_b: str) -> float:
        i = self._quad_index(label_a, quad_a)
        j = self._quad_index(label_b, quad_b)
        return float(self.data[i, j])

    def renamed(self, mapping: Mapping[str, str]) -> "CovarianceMatrix":
        """Relabel modes; mapping keys must exist, values must stay unique."""
        for old in mapping:
            self.mode_index(old)
        labels = tuple(mapping.get(m, m) for m in self.modes)
        return CovarianceMatrix(labels, self.data)

    def reordered(self, order: Sequence[str]) -> "CovarianceMatrix":
        """Same state with modes permuted into the given order."""
        order = tuple(order)
        if sorted(order) != sorted(self.modes):
            raise ValueError(f"reorder {order} is not a permutation of {self.modes}")
        perm = mode_permutation(self.modes, order)
        return CovarianceMatrix(order, perm @ self.data @ perm.T)

    def restricted(self, keep: Sequence[str]) -> "CovarianceMatrix":
        """Partial trace down to the listed modes, in the listed order."""
        keep = tuple(keep)
        idx = []
        for label in keep:
            i = self.mode_index(label)
            idx.extend((2 * i, 2 * i + 1))
        sub = self.data[np.ix_(idx, idx)]
        return CovarianceMatrix(keep, sub)

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        """True when every symplectic eigenvalue is >= 1 - tol."""
        return symplectic_spectrum(self).minimum >= 1.0 - tol


@dataclass(frozen=True)
class SymplecticTransform:
    """A symplectic matrix S with S Omega S^T = Omega, checked on build."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
            raise ValueError(f"transform must be square of even dimension, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("transform has non-finite entries")
        omega = symplectic_form(arr.shape[0] // 2)
        defect = np.max(np.abs(arr @ omega @ arr.T - omega))
        if defect > SYMPLECTIC_TOL:
            raise ValueError(f"matrix is not symplectic: defect {defect:.3e}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n_modes(self) -> int:
        return self.data.shape[0] // 2


def vacuum_state(n_modes: int, labels: Sequence[str] | None = None) -> CovarianceMatrix:
    """n-mode vacuum: the identity matrix."""
    if labels is None:
        labels = tuple(f"v{i}" for i in range(n_modes))
    return CovarianceMatrix(tuple(labels), np.eye(2 * n_modes))


def thermal_state(variance: float, label: str = "m0") -> CovarianceMatrix:
    """Single thermal mode of quadrature variance v >= 1."""
    if variance < 1.0:
        raise ValueError(f"thermal variance must be >= 1, got {variance}")
    return CovarianceMatrix((label,), variance * np.eye(2))


def epr_state(variance: float, labels: Sequence[str] = ("m0", "m1")) -> CovarianceMatrix:
    """Two-mode squeezed state of quadrature variance v >= 1.

    Diagonal blocks v*I2, off-diagonal sqrt(v^2-1)*sigma_z: x quadratures
    correlate, p quadratures anticorrelate.  v = 1 is a pair of vacua.
    """
    if variance < 1.0:
        raise ValueError(f"EPR variance must be >= 1, got {variance}")
    c = math.sqrt(variance * variance - 1.0)
    gamma = np.block(
        [
            [variance * np.eye(2), c * SIGMA_Z],
            [c * SIGMA_Z, variance * np.eye(2)],
        ]
    )
    return CovarianceMatrix(tuple(labels), gamma)


def tensor(a: CovarianceMatrix, b: CovarianceMatrix) -> CovarianceMatrix:
    """Direct sum of two states; mode label sets must be disjoint."""
    overlap = set(a.modes) & set(b.modes)
    if overlap:
        raise ValueError(f"mode labels {sorted(overlap)} appear on both sides")
    n, m = 2 * a.n_modes, 2 * b.n_modes
    out = np.zeros((n + m, n + m))
    out[:n, :n] = a.data
    out[n:, n:] = b.data
    return CovarianceMatrix(a.modes + b.modes, out)


def identity_transform(n_modes: int) -> SymplecticTransform:
    return SymplecticTransform(np.eye(2 * n_modes))


def beam_splitter(transmittance: float) -> SymplecticTransform:
    """Two-mode beam splitter of transmittance T in [0, 1].

    out1 = sqrt(T) in1 + sqrt(1-T) in2, out2 = -sqrt(1-T) in1 + sqrt(T) in2.
    """
    t = transmittance
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {t}")
    st, sr = math.sqrt(t), math.sqrt(1.0 - t)
    s = np.block(
        [
            [st * np.eye(2), sr * np.eye(2)],
            [-sr * np.eye(2), st * np.eye(2)],
        ]
    )
    return SymplecticTransform(s)


def psa(gain: float) -> SymplecticTransform:
    """Single-mode phase-sensitive amplifier: x stretched by sqrt(g), p shrunk."""
    if gain < 1.0:
        raise ValueError(f"amplifier gain must be >= 1, got {gain}")
    sg = math.sqrt(gain)
    return SymplecticTransform(np.diag([sg, 1.0 / sg]))


def pia(gain: float) -> SymplecticTransform:
    """Two-mode phase-insensitive amplifier of gain g >= 1.

    Acts on (signal, ancilla); the ancilla couples through sigma_z so the
    added noise rides on the conjugated quadratures.
    """
    if gain < 1.0:
        raise ValueError(f"amplifier gain must be >= 1, got {gain}")
    sg = math.sqrt(gain)
    sc = math.sqrt(gain - 1.0)
    s = np.block(
        [
            [sg * np.eye(2), sc * SIGMA_Z],
            [sc * SIGMA_Z, sg * np.eye(2)],
        ]
    )
    return SymplecticTransform(s)


def cnot_x(k: float) -> SymplecticTransform:
    """Continuous-variable gate subtracting k * x2 from x1, feeding p1 into p2.

    x1' = x1 - k x2, p2' = p2 + k p1; the other quadratures pass through.
    """
    if not math.isfinite(k):
        raise ValueError(f"gate strength must be finite, got {k}")
    s = np.array(
        [
            [1.0, 0.0, -k, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, k, 0.0, 1.0],
        ]
    )
    return SymplecticTransform(s)


def cnot_p(k: float) -> SymplecticTransform:
    """Conjugate gate: p1' = p1 + k p2, x2' = x2 - k x1."""
    if not math.isfinite(k):
        raise ValueError(f"gate strength must be finite, got {k}")
    s = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, k],
            [-k, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return SymplecticTransform(s)


def mode_permutation(modes: Sequence[str], new_order: Sequence[str]) -> np.ndarray:
    """Orthogonal (and symplectic) matrix reordering whole modes.

    Rows follow new_order: (P v)[2i:2i+2] = v[2j:2j+2] where new_order[i]
    == modes[j].
    """
    modes = tuple(modes)
    new_order = tuple(new_order)
    if sorted(modes) != sorted(new_order):
        raise ValueError(f"{new_order} is not a permutation of {modes}")
    n = len(modes)
    perm = np.zeros((2 * n, 2 * n))
    for i, label in enumerate(new_order):
        j = modes.index(label)
        perm[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = np.eye(2)
    return perm


def embed_transform(
    transform: SymplecticTransform, modes: Sequence[str], targets: Sequence[str]
) -> np.ndarray:
    """Embed a transform acting on `targets` into the full mode list.

    Non-adjacent targets are handled by permuting the targets to the front,
    applying blockdiag(S, I), and permuting back; the permutation itself is
    symplectic so the embedding is too.
    """
    modes = _check_labels(modes)
    targets = tuple(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target labels {targets}")
    for label in targets:
        if label not in modes:
            raise KeyError(f"unknown mode label {label!r}; have {modes}")
    if transform.n_modes != len(targets):
        raise ValueError(
            f"transform acts on {transform.n_modes} modes, got {len(targets)} targets"
        )
    rest = tuple(m for m in modes if m not in targets)
    front = targets + rest
    perm = mode_permutation(modes, front)
    full = np.eye(2 * len(modes))
    k = 2 * len(targets)
    full[:k, :k] = transform.data
    return perm.T @ full @ perm


def apply(
    transform: SymplecticTransform, state: CovarianceMatrix, targets: Sequence[str]
) -> CovarianceMatrix:
    """Apply a transform by congruence on the listed target modes."""
    s = embed_transform(transform, state.modes, targets)
    return CovarianceMatrix(state.modes, s @ state.data @ s.T)


def homodyne_condition(
    state: CovarianceMatrix, label: str, quadrature: str
) -> CovarianceMatrix:
    """State of the remaining modes after a homodyne readout of one quadrature.

    Implements the Schur-complement update gamma' = gamma_rest
    - c c^T / Var(measured), i.e. the pseudo-inverse of the projected
    measured block, and drops the measured mode.  A degenerate measured
    variance is an error, never regularised away.
    """
    i = state._quad_index(label, quadrature)
    var = float(state.data[i, i])
    if var <= 1e-12:
        raise DegenerateMeasurementError(
            f"variance of ({label}, {quadrature}) is {var:.3e}; cannot condition"
        )
    keep = [j for j in range(state.data.shape[0]) if j not in (2 * (i // 2), 2 * (i // 2) + 1)]
    rest = state.data[np.ix_(keep, keep)]
    cross = state.data[np.ix_(keep, [i])]
    cond = rest - (cross @ cross.T) / var
    labels = tuple(m for m in state.modes if m != label)
    return CovarianceMatrix(labels, cond)


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalues, one per mode, sorted in descending order."""

    values: tuple[float, ...]

    @property
    def minimum(self) -> float:
        return min(self.values)

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        return self.minimum >= 1.0 - tol

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def symplectic_spectrum(state: CovarianceMatrix) -> SymplecticSpectrum:
    """Moduli of the eigenvalues of i Omega gamma, deduplicated in pairs.

    The 2N eigenvalues come in +/- pairs; consecutive sorted moduli are
    averaged after checking they agree to SPECTRUM_PAIR_RTOL.
    """
    omega = symplectic_form(state.n_modes)
    try:
        eigs = np.linalg.eigvals(omega @ state.data)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(f"eigen-solve failed: {exc}", state.data) from exc
    mags = np.sort(np.abs(eigs))[::-1]
    values = []
    for i in range(0, len(mags), 2):
        a, b = mags[i], mags[i + 1]
        if abs(a - b) > SPECTRUM_PAIR_RTOL * max(1.0, abs(a)):
            raise SpectrumError(
                f"unpaired symplectic spectrum: {mags}", state.data
            )
        values.append(0.5 * (a + b))
    return SymplecticSpectrum(tuple(values))


def thermal_photon_entropy(mean_photons: float) -> float:
    """Entropy in bits of a thermal state with the given mean photon number.

    (n+1) log2(n+1) - n log2(n), continuously extended to 0 at n = 0.
    """
    n = mean_photons
    if n < 0.0:
        raise ValueError(f"mean photon number must be >= 0, got {n}")
    if n == 0.0:
        return 0.0
    return (n + 1.0) * math.log2(n + 1.0) - n * math.log2(n)


def entropy_of_spectrum(spectrum: SymplecticSpectrum | Iterable[float]) -> float:
    """Von Neumann entropy in bits from a symplectic spectrum.

    Eigenvalues inside [1 - PHYSICALITY_TOL, 1] are clamped to exactly 1
    (pure-mode float noise); smaller values are rejected as unphysical.
    """
    total = 0.0
    for lam in spectrum:
        if lam < 1.0 - PHYSICALITY_TOL:
            raise UnphysicalStateError(
                f"symplectic eigenvalue {lam} below the physical bound"
            )
        lam = max(lam, 1.0)
        total += thermal_photon_entropy(0.5 * (lam - 1.0))
    return total


def von_neumann_entropy(state: CovarianceMatrix) -> float:
    """Entropy in bits of a Gaussian state, via its symplectic spectrum."""
    return entropy_of_spectrum(symplectic_spectrum(state))

"""Frequency-domain input-output solver for linear Gaussian models.

A measurement scenario is a set of bosonic modes with linear (drift-matrix)
dynamics driven by white noise.  This module builds the scattering matrix
S(w) = -[H (A + iwI)^-1 H + I] relating input to output quadratures, the
input covariance matrix for a thermal/squeezed bath, and the symmetrized
spectral covariance of the outputs,

    V_out(w) = (1/2) [S(w) V_in S(-w)^T + S(-w) V_in S(w)^T].

Vacuum variance is 1/2 per quadrature throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .errors import NonHermitianResult, SingularAtFrequency, UnstableModel

#: reciprocal-condition-number floor below which (A + iwI) counts as singular
RCOND_FLOOR = 1e-12

#: largest imaginary residue tolerated when symmetrizing output covariances
HERMITIZATION_TOL = 1e-10

#: margin used by the builder-side stability check
STABILITY_TOL = 1e-10


@dataclass(frozen=True)
class ModeLayout:
    """Bookkeeping for the quadrature ordering of a model.

    ``signal_index`` is the measured mechanical quadrature (x),
    ``meter_index`` the measured optical output quadrature (Y), and
    ``conjugate_index`` the canonical conjugate of the signal (p).
    ``mechanical_modes`` lists the mode numbers (pairs of quadratures)
    that couple to the mechanical bath; the rest see the optical bath.
    ``ancilla_index`` optionally marks the quadrature used for secondary
    conditioning (the negative-mass X_c in the six-mode layout).
    """

    labels: tuple[str, ...]
    signal_index: int
    meter_index: int
    conjugate_index: int
    mechanical_modes: tuple[int, ...] = (1,)
    ancilla_index: int | None = None

    def __post_init__(self):
        n = len(self.labels)
        if n == 0 or n % 2:
            raise ValueError(f"labels must have even positive length, got {n}")
        idx = (self.signal_index, self.meter_index, self.conjugate_index)
        if len(set(idx)) != 3:
            raise ValueError(f"signal/meter/conjugate indices must be distinct: {idx}")
        for i in idx:
            if not 0 <= i < n:
                raise ValueError(f"index {i} out of range for {n} quadratures")
        for m in self.mechanical_modes:
            if not 0 <= m < n // 2:
                raise ValueError(f"mechanical mode {m} out of range")

    @property
    def n_modes(self) -> int:
        return len(self.labels) // 2


#: standard four-quadrature layout (X, Y, x, p)
FOUR_MODE = ModeLayout(("X", "Y", "x", "p"), 2, 1, 3, mechanical_modes=(1,))

#: CQNC layout with the negative-mass oscillator appended
CQNC_LAYOUT = ModeLayout(
    ("X", "Y", "x", "p", "Xc", "Yc"),
    2, 1, 3,
    mechanical_modes=(1, 2),
    ancilla_index=4,
)

#: dual-tweezer layout: primary cavity, readout cavity, mechanics
DUAL_TWEEZER_LAYOUT = ModeLayout(
    ("X1", "Y1", "X2", "Y2", "x", "p"),
    4, 3, 5,
    mechanical_modes=(2,),
)


@dataclass(frozen=True)
class BathSpec:
    """Input-noise specification.

    ``n_m`` is the mean mechanical bath occupation and ``m_sq`` its complex
    squeezing parameter; ``n_c`` the cavity bath occupation and ``eta`` the
    detection efficiency of the measured optical output.
    """

    n_m: float = 0.0
    m_sq: complex = 0.0
    n_c: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        if self.n_m < 0:
            raise ValueError(f"n_m must be nonnegative, got {self.n_m}")
        if self.n_c < 0:
            raise ValueError(f"n_c must be nonnegative, got {self.n_c}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if abs(self.m_sq) ** 2 > self.n_m * (self.n_m + 1) * (1 + 1e-12):
            raise ValueError(
                f"|m_sq|^2 = {abs(self.m_sq)**2:.6g} exceeds n_m(n_m+1) = "
                f"{self.n_m * (self.n_m + 1):.6g}"
            )
        if self.V_x <= 0 or self.V_p <= 0:
            raise ValueError("mechanical input variances must be positive")

    @property
    def V_x(self) -> float:
        """Position variance of the mechanical input, n_m + Re(m_sq) + 1/2."""
        return self.n_m + complex(self.m_sq).real + 0.5

    @property
    def V_p(self) -> float:
        """Momentum variance of the mechanical input, n_m - Re(m_sq) + 1/2."""
        return self.n_m - complex(self.m_sq).real + 0.5

    @property
    def V_xp(self) -> float:
        """Symmetrized position-momentum correlation, Im(m_sq)."""
        return complex(self.m_sq).imag

    @property
    def optical_variance(self) -> float:
        return self.n_c + 0.5

    def mechanical_block(self) -> NDArray[np.float64]:
        return np.array([[self.V_x, self.V_xp], [self.V_xp, self.V_p]])


@dataclass(frozen=True)
class LinearModel:
    """Drift matrix, input couplings, input covariance, and layout.

    ``detection_eta`` < 1 marks a loss-augmented model: the meter mode's
    output rows are scaled by sqrt(eta) and two vacuum-or-thermal ancilla
    input columns (covariance ``ancilla_variance`` each) are appended to
    the scattering matrix.
    """

    A: NDArray[np.float64]
    H: NDArray[np.float64]
    Vin: NDArray[np.float64]
    layout: ModeLayout
    detection_eta: float = 1.0
    ancilla_variance: float = 0.5

    def __post_init__(self):
        n = 2 * self.layout.n_modes
        A = np.asarray(self.A, dtype=float)
        H = np.asarray(self.H, dtype=float)
        Vin = np.asarray(self.Vin, dtype=float)
        if A.shape != (n, n) or H.shape != (n, n) or Vin.shape[0] != Vin.shape[1]:
            raise ValueError("A, H, Vin must be square and match the layout size")
        if np.any(H != np.diag(np.diag(H))) or np.any(np.diag(H) < 0):
            raise ValueError("H must be diagonal with nonnegative entries")
        if not np.allclose(Vin, Vin.T, atol=1e-12):
            raise ValueError("Vin must be symmetric")
        for m in range(Vin.shape[0] // 2):
            block = Vin[2 * m : 2 * m + 2, 2 * m : 2 * m + 2]
            if np.linalg.det(block) < 0.25 - 1e-9:
                raise ValueError(
                    f"input covariance block of mode {m} violates the "
                    f"Heisenberg bound (det = {np.linalg.det(block):.6g})"
                )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "Vin", Vin)

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def meter_mode(self) -> int:
        return self.layout.meter_index // 2


@dataclass(frozen=True)
class ScatteringMatrix:
    """Complex input-to-output map at one detection frequency.

    Rows are output channels; columns are input channels (possibly more
    than rows after loss augmentation).
    """

    S: NDArray[np.complex128]
    omega: float


def check_stable(A: NDArray, tol: float = STABILITY_TOL) -> None:
    """Raise :class:`UnstableModel` unless all eigenvalues sit strictly
    in the left half-plane (marginal modes are rejected as well, since
    their spectral covariances diverge)."""
    max_real = float(np.max(np.linalg.eigvals(np.asarray(A, dtype=float)).real))
    if max_real > -tol:
        raise UnstableModel(max_real)


def _equilibrated_rcond(M: NDArray) -> float:
    """Reciprocal condition number after row/column scaling.

    Rate hierarchies (gamma orders of magnitude below kappa) inflate the
    raw condition number without the matrix being anywhere near an
    undamped resonance; scaling removes that while a genuinely singular
    matrix stays singular.
    """
    absM = np.abs(M)
    r = absM.max(axis=1)
    if np.any(r == 0.0):
        return 0.0
    scaled = M / r[:, None]
    c = np.abs(scaled).max(axis=0)
    if np.any(c == 0.0):
        return 0.0
    cond = np.linalg.cond(scaled / c[None, :])
    return 1.0 / cond if np.isfinite(cond) and cond > 0 else 0.0


def _bare_scattering(A: NDArray, H: NDArray, omega: float) -> NDArray[np.complex128]:
    n = A.shape[0]
    M = A + 1j * omega * np.eye(n)
    rcond = _equilibrated_rcond(M)
    if rcond < RCOND_FLOOR:
        raise SingularAtFrequency(omega, rcond)
    return -(H @ np.linalg.solve(M, H) + np.eye(n))


def build_scattering(model: LinearModel, omega: float) -> ScatteringMatrix:
    """Scattering matrix S(w) = -[H (A + iwI)^-1 H + I] for the model.

    For a loss-augmented model the result is rectangular, 2M x (2M + 2):
    the meter mode's output rows are scaled by sqrt(eta) and pick up
    sqrt(1 - eta) ancilla columns.
    """
    S = _bare_scattering(model.A, model.H, omega)
    eta = model.detection_eta
    if eta == 1.0:
        return ScatteringMatrix(S, omega)
    n = model.size
    r0 = 2 * model.meter_mode
    aug = np.zeros((n, n + 2), dtype=complex)
    aug[:, :n] = S
    aug[r0 : r0 + 2, :n] *= np.sqrt(eta)
    aug[r0, n] = np.sqrt(1.0 - eta)
    aug[r0 + 1, n + 1] = np.sqrt(1.0 - eta)
    return ScatteringMatrix(aug, omega)


def apply_detection_loss(model: LinearModel, eta: float) -> LinearModel:
    """Model whose scattering is the loss-augmented rectangular matrix.

    The ancilla inputs mirror the optical bath of the meter mode (same
    variance), so a thermal cavity input also leaks thermal noise into
    the detector.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    anc = float(model.Vin[2 * model.meter_mode, 2 * model.meter_mode])
    return replace(model, detection_eta=eta * model.detection_eta, ancilla_variance=anc)


def input_covariance(bath: BathSpec, layout: ModeLayout) -> NDArray[np.float64]:
    """Input covariance: (n_c + 1/2) I_2 per optical mode and the
    thermal-squeezed block per mechanical mode."""
    n = 2 * layout.n_modes
    V = np.zeros((n, n))
    mech = bath.mechanical_block()
    for m in range(layout.n_modes):
        sl = slice(2 * m, 2 * m + 2)
        V[sl, sl] = mech if m in layout.mechanical_modes else bath.optical_variance * np.eye(2)
    return V


def extended_input_covariance(model: LinearModel) -> NDArray[np.float64]:
    """Model input covariance, with the ancilla block appended when the
    model is loss-augmented."""
    if model.detection_eta == 1.0:
        return model.Vin
    n = model.size
    V = np.zeros((n + 2, n + 2))
    V[:n, :n] = model.Vin
    V[n, n] = V[n + 1, n + 1] = model.ancilla_variance
    return V


def output_covariance(
    S_plus: ScatteringMatrix,
    S_minus: ScatteringMatrix,
    Vin: NDArray,
) -> NDArray[np.float64]:
    """Symmetrized output covariance from S(+w) and S(-w).

    Raises :class:`NonHermitianResult` if the imaginary residue exceeds
    ``HERMITIZATION_TOL`` relative to the matrix scale, which indicates
    the two scattering matrices do not belong to +/- the same frequency.
    """
    Vin = np.asarray(Vin)
    raw = 0.5 * (S_plus.S @ Vin @ S_minus.S.T + S_minus.S @ Vin @ S_plus.S.T)
    scale = max(float(np.max(np.abs(raw))), 1.0)
    residue = float(np.max(np.abs(raw.imag))) / scale
    if residue > HERMITIZATION_TOL:
        raise NonHermitianResult(
            f"imaginary residue {residue:.3e} exceeds {HERMITIZATION_TOL:.0e}"
        )
    out = raw.real
    return 0.5 * (out + out.T)


def output_covariance_at(model: LinearModel, omega: float) -> NDArray[np.float64]:
    """Output covariance at one frequency.

    Since A and H are real, S(-w) is the elementwise conjugate of S(+w)
    and the symmetrized covariance reduces to Re[S V_in S^dagger].
    """
    S = build_scattering(model, omega)
    Vin = extended_input_covariance(model)
    out = (S.S @ Vin @ S.S.conj().T).real
    return 0.5 * (out + out.T)

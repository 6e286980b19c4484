"""QND figures of merit and measurement-regime classification.

The three quantifiers are the conditional mechanical variance

    V_c = V_out[x,x] - |V_out[x,Y]|^2 / V_out[Y,Y],

and the signal/meter transfer coefficients T = V_x / (V_x + n_eq) built
from the measurement-equivalent input noises

    n_s_eq = V_out[x,x] / |S_xx|^2 - V_x,
    n_m_eq = V_out[Y,Y] / |S_Yx|^2 - V_x.

A measurement is QND when V_c < 1/2 and T_s + T_m > 1 simultaneously.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .core import (
    BathSpec,
    LinearModel,
    ModeLayout,
    ScatteringMatrix,
    apply_detection_loss,
    build_scattering,
    extended_input_covariance,
)
from .errors import DegenerateMeter

#: meter variances at or below this count as a missing noise channel
METER_FLOOR = 1e-14

#: scattering amplitudes below this make the corresponding transfer zero
SIGNAL_PATH_FLOOR = 1e-14

#: negative conditional variances above -this are clamped to zero
VC_CLAMP_TOL = 1e-12


class Regime(enum.Enum):
    CLASSICAL = "Classical"
    IDT = "IDT"
    QSP = "QSP"
    QND = "QND"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class MeasurementFigures:
    """Figures of merit of one measurement at one detection frequency."""

    Vc: float
    Ts: float
    Tm: float
    ns_eq: float
    nm_eq: float
    regime: Regime
    omega: float

    @property
    def t_sum(self) -> float:
        return self.Ts + self.Tm


def classify_regime(Vc: float, Ts: float, Tm: float) -> Regime:
    """TV-diagram quadrant for the given figures.

    QND requires the strict inequalities V_c < 1/2 and T_s + T_m > 1;
    ties go to the non-QND side.
    """
    squeezed = Vc < 0.5
    transferring = Ts + Tm > 1.0
    if squeezed and transferring:
        return Regime.QND
    if squeezed:
        return Regime.QSP
    if transferring:
        return Regime.IDT
    return Regime.CLASSICAL


def conditional_variance(
    Vout: NDArray,
    layout: ModeLayout | None = None,
    signal: int | None = None,
    meter: int | None = None,
) -> float:
    """Mechanical variance conditioned on the measured meter quadrature."""
    s = signal if signal is not None else (layout.signal_index if layout else 2)
    m = meter if meter is not None else (layout.meter_index if layout else 1)
    Vmm = float(Vout[m, m])
    if Vmm <= METER_FLOOR:
        raise DegenerateMeter(f"meter variance {Vmm:.3e} is not positive")
    Vc = float(Vout[s, s]) - abs(Vout[s, m]) ** 2 / Vmm
    if Vc < 0:
        if Vc < -VC_CLAMP_TOL * max(float(Vout[s, s]), 1.0):
            raise DegenerateMeter(f"conditional variance {Vc:.3e} below zero")
        Vc = 0.0
    return Vc


def cqnc_conditional_variance(
    Vout: NDArray,
    layout: ModeLayout | None = None,
    simplified: bool = False,
) -> float:
    """Mechanical variance conditioned on the meter and the negative-mass
    amplitude quadrature.

    The full expression keeps the meter-ancilla cross covariance; the
    ``simplified`` variant drops it (valid when that correlation is small
    against the two variances).
    """
    s = layout.signal_index if layout is not None else 2
    m = layout.meter_index if layout is not None else 1
    a = layout.ancilla_index if layout is not None and layout.ancilla_index is not None else 4
    Vmm, Vaa = float(Vout[m, m]), float(Vout[a, a])
    if min(Vmm, Vaa) <= METER_FLOOR:
        raise DegenerateMeter("conditioning channel has vanishing variance")
    Vsm, Vsa, Vma = float(Vout[s, m]), float(Vout[s, a]), float(Vout[m, a])
    if simplified:
        Vc = float(Vout[s, s]) - Vsm**2 / Vmm - Vsa**2 / Vaa
    else:
        denom = Vmm * Vaa - Vma**2
        if denom <= METER_FLOOR:
            raise DegenerateMeter("meter/ancilla covariance block is singular")
        num = Vmm * Vsa**2 + Vsm**2 * Vaa - 2 * Vsm * Vma * Vsa
        Vc = float(Vout[s, s]) - num / denom
    return max(Vc, 0.0) if Vc > -VC_CLAMP_TOL * max(float(Vout[s, s]), 1.0) else Vc


def equivalent_noises(
    S: ScatteringMatrix,
    Vout: NDArray,
    Vx: float,
    layout: ModeLayout,
) -> tuple[float, float]:
    """Measurement-equivalent input noises (n_s_eq, n_m_eq).

    Computed by referring the full output variances (all noise columns:
    optical, mechanical momentum, detection ancilla) back through the
    direct scattering amplitudes.  Vanishing amplitudes yield inf, which
    the transfer coefficients map to zero.
    """
    s, m = layout.signal_index, layout.meter_index
    Sss = abs(S.S[s, s])
    Sms = abs(S.S[m, s])
    ns = float(Vout[s, s]) / Sss**2 - Vx if Sss > SIGNAL_PATH_FLOOR else np.inf
    nm = float(Vout[m, m]) / Sms**2 - Vx if Sms > SIGNAL_PATH_FLOOR else np.inf
    return ns, nm


def transfer_coefficients(ns_eq: float, nm_eq: float, Vx: float) -> tuple[float, float]:
    """T = V_x / (V_x + n_eq) per channel; 0 when the path carries nothing."""

    def one(n_eq: float) -> float:
        if not np.isfinite(n_eq):
            return 0.0
        return Vx / (Vx + n_eq)

    return one(ns_eq), one(nm_eq)


def figures_from_parts(
    Vc: float, ns_eq: float, nm_eq: float, Vx: float, omega: float
) -> MeasurementFigures:
    Ts, Tm = transfer_coefficients(ns_eq, nm_eq, Vx)
    return MeasurementFigures(
        Vc=Vc, Ts=Ts, Tm=Tm, ns_eq=ns_eq, nm_eq=nm_eq,
        regime=classify_regime(Vc, Ts, Tm), omega=omega,
    )


def evaluate(
    model: LinearModel,
    omega: float,
    bath: BathSpec | None = None,
    conditioning: str = "meter",
) -> MeasurementFigures:
    """Full pipeline: scattering -> output covariance -> figures of merit.

    ``conditioning`` is ``"meter"`` (phase quadrature of the measured
    cavity output) or ``"meter+ancilla"`` (additionally on the
    negative-mass amplitude quadrature; requires an ancilla in the
    layout).  If ``bath`` carries ``eta < 1`` and the model is not yet
    loss-augmented, the detection loss is applied here.
    """
    if bath is not None and bath.eta < 1.0 and model.detection_eta == 1.0:
        model = apply_detection_loss(model, bath.eta)
    S = build_scattering(model, omega)
    Vin = extended_input_covariance(model)
    Vout = (S.S @ Vin @ S.S.conj().T).real
    Vout = 0.5 * (Vout + Vout.T)
    layout = model.layout
    if conditioning == "meter":
        Vc = conditional_variance(Vout, layout)
    elif conditioning == "meter+ancilla":
        Vc = cqnc_conditional_variance(Vout, layout)
    else:
        raise ValueError(f"unknown conditioning {conditioning!r}")
    Vx = float(model.Vin[layout.signal_index, layout.signal_index])
    ns, nm = equivalent_noises(S, Vout, Vx, layout)
    return figures_from_parts(Vc, ns, nm, Vx, omega)

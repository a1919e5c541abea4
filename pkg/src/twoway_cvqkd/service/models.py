"""Pydantic request/response models mirroring the core dataclasses."""
from __future__ import annotations

from pydantic import BaseModel, Field

from ..analysis import AmplifierVariant, SurfaceCell, SweepRow
from ..keyrate import KeyRateResult
from ..montecarlo import ValidationCheck
from ..protocol import AmplifierSpec, ChannelModel, DetectorModel, ProtocolParams


class ChannelIn(BaseModel):
    distance_km: float
    excess_noise: float = 0.02
    loss_db_per_km: float = 0.2

    def build(self) -> ChannelModel:
        return ChannelModel(self.distance_km, self.excess_noise, self.loss_db_per_km)


class DetectorIn(BaseModel):
    kind: str = "homodyne"
    efficiency: float = 0.552
    electronic_noise: float = 0.015

    def build(self) -> DetectorModel:
        return DetectorModel(self.kind, self.efficiency, self.electronic_noise)


class AmplifierIn(BaseModel):
    kind: str = "none"
    gain: float = 1.0
    inherent_noise: float = 1.0

    def build(self) -> AmplifierSpec:
        return AmplifierSpec(self.kind, self.gain, self.inherent_noise)


class ParamsIn(BaseModel):
    channel: ChannelIn
    detector: DetectorIn = DetectorIn()
    amplifier: AmplifierIn = AmplifierIn()
    v_a: float = 40.0
    v_b: float = 40.0
    t_a: float = 0.4
    beta: float = 0.948

    def build(self) -> ProtocolParams:
        return ProtocolParams(
            channel=self.channel.build(),
            detector=self.detector.build(),
            amplifier=self.amplifier.build(),
            v_a=self.v_a,
            v_b=self.v_b,
            t_a=self.t_a,
            beta=self.beta,
        )


class VariantIn(BaseModel):
    label: str
    amplifier: AmplifierIn = AmplifierIn()
    perfect_detector: bool = False

    def build(self) -> AmplifierVariant:
        return AmplifierVariant(self.label, self.amplifier.build(), self.perfect_detector)


class KeyRateOut(BaseModel):
    key_rate: float
    mutual_information: float
    holevo_bound: float
    v_alice: float
    v_alice_given_bob: float
    estimator_gain: float
    spectrum_unconditional: list[float]
    spectrum_conditional: list[float]

    @classmethod
    def from_result(cls, result: KeyRateResult) -> "KeyRateOut":
        return cls(
            key_rate=result.key_rate,
            mutual_information=result.mutual_information,
            holevo_bound=result.holevo_bound,
            v_alice=result.v_alice,
            v_alice_given_bob=result.v_alice_given_bob,
            estimator_gain=result.estimator_gain,
            spectrum_unconditional=list(result.spectrum_unconditional),
            spectrum_conditional=list(result.spectrum_conditional),
        )


class SweepIn(BaseModel):
    params: ParamsIn
    variable: str = "distance"
    start: float = 1.0
    stop: float = 80.0
    step: float = 1.0
    variants: list[VariantIn] | None = None


class SweepRowOut(BaseModel):
    value: float
    results: dict[str, KeyRateOut]

    @classmethod
    def from_row(cls, row: SweepRow) -> "SweepRowOut":
        return cls(
            value=row.value,
            results={label: KeyRateOut.from_result(r) for label, r in row.results.items()},
        )


class SweepOut(BaseModel):
    variable: str
    labels: list[str]
    rows: list[SweepRowOut]


class MaxDistanceOut(BaseModel):
    distance_km: float


class TolerableNoiseIn(BaseModel):
    params: ParamsIn


class TolerableNoiseOut(BaseModel):
    n_tol: float | None
    no_improvement: bool


class SurfaceIn(BaseModel):
    params: ParamsIn
    gain_range: tuple[float, float, float] = (2.0, 20.0, 2.0)
    distance_range: tuple[float, float, float] = (5.0, 70.0, 5.0)


class SurfaceCellOut(BaseModel):
    gain: float
    distance_km: float
    n_tol: float | None
    error: str | None = None

    @classmethod
    def from_cell(cls, cell: SurfaceCell) -> "SurfaceCellOut":
        return cls(gain=cell.gain, distance_km=cell.distance_km, n_tol=cell.n_tol, error=cell.error)


class SurfaceOut(BaseModel):
    cells: list[SurfaceCellOut]


class ValidateIn(BaseModel):
    params: ParamsIn
    seed: int = 12345
    samples: int = Field(default=1_000_000, ge=1)


class CheckOut(BaseModel):
    name: str
    passed: bool
    detail: str

    @classmethod
    def from_check(cls, check: ValidationCheck) -> "CheckOut":
        return cls(name=check.name, passed=check.passed, detail=check.detail)


class ValidateOut(BaseModel):
    checks: list[CheckOut]
    all_passed: bool


class DefaultsOut(BaseModel):
    params: ParamsIn
    seed: int
    samples: int

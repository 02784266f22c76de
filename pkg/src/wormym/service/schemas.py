"""Request and response models for the HTTP surface.

Requests validate the physical preconditions that are cheap to state
declaratively (positive truncation orders, nonempty coefficient maps);
anything deeper is left to the core modules, whose typed errors the app
maps onto HTTP status codes.  Responses mirror the serializer payloads so
a CLI client can write artifacts without recomputing anything.
"""
from __future__ import annotations

from pydantic import BaseModel, Field, field_validator


class StaticSolveRequest(BaseModel):
    ell: float
    n: int = Field(ge=1)
    r_max: float = Field(default=25.0, gt=0.0)
    n_points: int = Field(default=401, ge=2)


class StaticEnumerateRequest(BaseModel):
    ell: float
    r_max: float = Field(default=25.0, gt=0.0)
    n_points: int = Field(default=401, ge=2)


class ProfileSummary(BaseModel):
    label: str
    kind: str
    parity: str
    n: int
    shoot: float
    w_inf: float
    energy: float
    virial_residual: float
    ell: float
    r_max: float


class ProfileResponse(BaseModel):
    summary: ProfileSummary
    table: dict[str, list[float]]


class CatalogueResponse(BaseModel):
    ell: float
    count: int
    profiles: list[ProfileResponse]


class SpectrumRequest(BaseModel):
    ell: float
    background: str = "ground"
    M: int = Field(default=40, ge=4)
    j_max: int = Field(default=24, ge=1)


class ModePayload(BaseModel):
    re: float
    im: float
    parity: str
    source: str


class SpectrumResponse(BaseModel):
    background: str
    ell: float
    unstable_count: int
    modes: list[ModePayload]
    closed_form: list[ModePayload] | None = None
    max_closed_form_gap: float | None = None


class EvolveRequest(BaseModel):
    ell: float
    data: dict[int, float]
    data_dot: dict[int, float] = Field(default_factory=dict)
    N: int = Field(default=40, ge=1)
    tau_end: float = Field(default=60.0, gt=0.0)
    stride: float = Field(default=0.05, gt=0.0)
    rtol: float = Field(default=1e-10, gt=0.0)
    atol: float = Field(default=1e-12, gt=0.0)
    stepper: str = "adaptive"
    dt: float | None = Field(default=None, gt=0.0)
    obs_x: list[float] = Field(default_factory=list)
    background: str | None = None   # set for linearized flow

    @field_validator("data")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("initial data must set at least one coefficient")
        return v


class TrajectoryResponse(BaseModel):
    times: list[float]
    coeffs: list[list[float]]
    coeffs_dot: list[list[float]]
    flux_integral: list[float] | None
    linear: bool
    energy: list[float] | None
    balance_residual: float | None
    final_state: dict
    observables: dict[str, list[float]] = Field(default_factory=dict)


class FitRequest(BaseModel):
    model: str
    tau: list[float]
    y: list[float]
    window: tuple[float, float]

    @field_validator("model")
    @classmethod
    def _known(cls, v):
        if v not in ("exponential", "ringdown", "powerlaw"):
            raise ValueError(f"unknown fit model '{v}'")
        return v


class FitResponse(BaseModel):
    model: str
    rate: float
    frequency: float | None
    amplitude: float
    phase: float | None
    window: tuple[float, float]
    residual: float


class BisectRequest(BaseModel):
    ell: float
    family: str = "even-c"
    base: dict[int, float] = Field(default_factory=lambda: {0: -1.0})
    index: int = Field(default=2, ge=0)
    c_range: tuple[float, float] = (0.2, 1.0)
    digits: int = Field(default=14, ge=1)
    N: int = Field(default=32, ge=1)


class BisectResponse(BaseModel):
    family: str
    ell: float
    c_lo: float
    c_hi: float
    c_star: float
    attractor: str
    attractor_distance: float
    lifetimes: list[tuple[float, float]]


class LifetimeRequest(BaseModel):
    ell: float
    c_star: float
    offsets: list[float]
    delta: float = Field(default=0.05, gt=0.0)
    base: dict[int, float] = Field(default_factory=lambda: {0: -1.0})
    index: int = Field(default=2, ge=0)
    N: int = Field(default=32, ge=1)


class LifetimeResponse(BaseModel):
    slope: float
    predicted: float
    samples: list[tuple[float, float]]


class ConvergeRequest(BaseModel):
    ell: float
    data: dict[int, float]
    N_list: list[int]
    N_ref: int = Field(default=50, ge=2)
    tau: float = Field(default=1.0, gt=0.0)


class ConvergeResponse(BaseModel):
    rows: list[tuple[int, float]]
    N_ref: int
    tau: float


class FigureRequest(BaseModel):
    overrides: dict = Field(default_factory=dict)


class FigureResponse(BaseModel):
    figure: int
    tables: dict[str, dict[str, list[float]]]
    summary: dict

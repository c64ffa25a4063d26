"""
Experiment Validation Schemas

Pydantic models for TOML experiment files: top-level run settings plus the
tables [process], [estimator] and [target]. The process lead used by the
limit functionals is derived from the estimator lead (m + 1), so the
two never disagree.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

import tomli_w
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from models.cones import ExtremeSet
from models.errors import ConfigError
from models.estimates import EstimatorConfig, IntervalBox, LimitQuery, TargetKind
from models.processes import AcfModel
from models.tails import TailModel
from models.volatility import SvConfig, VolatilityFn


class AcfEnum(str, Enum):
    """Latent autocovariance families."""
    AR1 = 'ar1'
    FGN = 'fgn'
    WHITE_NOISE = 'white_noise'
    CUSTOM = 'custom'


class VolatilityEnum(str, Enum):
    """Volatility function families."""
    EXP = 'exp'
    ABS_POWER = 'abs_power'
    CONST = 'const'


class TailEnum(str, Enum):
    """Innovation laws."""
    PARETO = 'pareto'
    STUDENT_T = 'student_t'


class TargetEnum(str, Enum):
    """Target functional on the future window."""
    CDF = 'cdf'
    EVENT = 'event'
    SUM_CDF = 'sum_cdf'


class _Strict(BaseModel):
    model_config = ConfigDict(extra='forbid', use_enum_values=True, validate_default=True, str_strip_whitespace=True)


class ProcessSchema(_Strict):
    """
    Generative stochastic volatility model.
    """
    acf: AcfEnum = Field(..., description="Latent ACF family")
    phi: Optional[float] = Field(default=None, description="AR(1) coefficient, |phi| < 1")
    hurst: Optional[float] = Field(default=None, description="FGN Hurst index in [0.5, 1)")
    gammas: Optional[List[float]] = Field(default=None, description="Custom autocovariances gamma_0 = 1, gamma_1, ...")
    vol: VolatilityEnum = Field(default=VolatilityEnum.EXP, description="Volatility function family")
    vol_power: float = Field(default=1.0, gt=0, description="Exponent of abs_power")
    vol_scale: float = Field(default=1.0, gt=0, description="Multiplicative scale of sigma")
    tail: TailEnum = Field(default=TailEnum.PARETO, description="Innovation law")
    alpha: float = Field(..., gt=0, description="Tail index")
    n: int = Field(..., ge=2, description="Simulated series length")

    @field_validator('acf', 'vol', 'tail', mode='before')
    @classmethod
    def normalize_family(cls, v):
        """Lowercase family names."""
        if isinstance(v, str):
            return v.lower().strip()
        return v

    @model_validator(mode='after')
    def check_parameters(self) -> 'ProcessSchema':
        """Every family gets exactly the parameters it needs."""
        self.to_acf()
        self.to_vol()
        self.to_tail()
        return self

    def to_acf(self) -> AcfModel:
        if self.acf == AcfEnum.AR1.value:
            if self.phi is None:
                raise ValueError("acf = 'ar1' needs phi")
            return AcfModel.ar1(self.phi)
        if self.acf == AcfEnum.FGN.value:
            if self.hurst is None:
                raise ValueError("acf = 'fgn' needs hurst")
            return AcfModel.fgn(self.hurst)
        if self.acf == AcfEnum.CUSTOM.value:
            if not self.gammas:
                raise ValueError("acf = 'custom' needs gammas")
            return AcfModel.custom(self.gammas)
        return AcfModel.white_noise()

    def to_vol(self) -> VolatilityFn:
        if self.vol == VolatilityEnum.EXP.value:
            return VolatilityFn.exp(self.vol_scale)
        if self.vol == VolatilityEnum.ABS_POWER.value:
            return VolatilityFn.abs_power(self.vol_power, self.vol_scale)
        return VolatilityFn.const(self.vol_scale)

    def to_tail(self) -> TailModel:
        if self.tail == TailEnum.STUDENT_T.value:
            return TailModel.student_t(self.alpha)
        return TailModel.pareto(self.alpha)


class EstimatorSchema(_Strict):
    """
    Empirical estimator settings; ``m`` is the lag from the window start to
    the first target value.
    """
    set: str = Field(..., description="Extreme set: 'box:h', 'sum:h' or 'combined'")
    m: int = Field(..., ge=1, description="Lead from the conditioning window start")
    h_prime: int = Field(default=0, ge=0, description="Target window length minus one")
    k: Optional[int] = Field(default=None, ge=1, description="Fixed number of upper order statistics")
    k_exponent: Optional[float] = Field(default=None, gt=0, lt=1, description="k = ceil(n^k_exponent)")
    thinned: bool = Field(default=False, description="Use disjoint windows of length h")
    model_norming: bool = Field(default=True, description="Norm with the model mu_C when a process is given")

    @field_validator('set')
    @classmethod
    def validate_set(cls, v: str) -> str:
        """Canonical set spelling."""
        return ExtremeSet.parse(v).to_spec()

    @model_validator(mode='after')
    def check_config(self) -> 'EstimatorSchema':
        self.to_config()
        return self

    def extreme_set(self) -> ExtremeSet:
        return ExtremeSet.parse(self.set)

    def to_config(self, mu_c: Optional[float] = None) -> EstimatorConfig:
        return EstimatorConfig(
            set=self.extreme_set(),
            m=self.m,
            h_prime=self.h_prime,
            k=self.k,
            k_exponent=self.k_exponent,
            thinned=self.thinned,
            mu_c=mu_c,
        )


class TargetSchema(_Strict):
    """
    Target set B or curve grid.
    """
    kind: TargetEnum = Field(default=TargetEnum.CDF, description="cdf, event or sum_cdf")
    y_grid: List[float] = Field(default_factory=list, description="Increasing levels for curve targets")
    lower: Optional[List[float]] = Field(default=None, description="Event box lower bounds (exclusive)")
    upper: Optional[List[float]] = Field(default=None, description="Event box upper bounds (inclusive)")
    n_mc: Optional[int] = Field(default=None, ge=2, description="Monte Carlo draws for limit functionals")

    @field_validator('y_grid')
    @classmethod
    def increasing_grid(cls, v: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("y_grid must be strictly increasing")
        return v

    @model_validator(mode='after')
    def check_kind(self) -> 'TargetSchema':
        if self.kind == TargetEnum.EVENT.value:
            if self.lower is None or self.upper is None:
                raise ValueError("event targets need lower and upper")
            self.box()
        elif not self.y_grid:
            raise ValueError(f"{self.kind} targets need a nonempty y_grid")
        return self

    def box(self) -> Optional[IntervalBox]:
        if self.lower is None or self.upper is None:
            return None
        return IntervalBox(tuple(self.lower), tuple(self.upper))


class ExperimentSpec(_Strict):
    """
    Complete experiment: model, estimator, target and run settings.
    """
    name: str = Field(default='experiment', min_length=1, max_length=100, description="Experiment name")
    replicates: int = Field(default=1, ge=1, description="Independent replicates")
    master_seed: int = Field(default=0, ge=0, lt=2 ** 64, description="Root of all seed streams")
    outputs: str = Field(default='output', description="Output directory")
    process: Optional[ProcessSchema] = Field(default=None, description="Generative model (simulation studies)")
    estimator: EstimatorSchema
    target: TargetSchema = Field(default_factory=lambda: TargetSchema(y_grid=[1.0]))

    @model_validator(mode='after')
    def check_dimensions(self) -> 'ExperimentSpec':
        """Box dimension and process length agree with the estimator."""
        box = self.target.box()
        if box is not None and box.dim != self.estimator.h_prime + 1:
            raise ValueError(f"event box has dimension {box.dim}, expected h_prime + 1 = {self.estimator.h_prime + 1}")
        if self.process is not None:
            self.sv_config()
        return self

    def sv_config(self) -> SvConfig:
        if self.process is None:
            raise ConfigError(f"Experiment '{self.name}' has no [process] table")
        est_set = self.estimator.extreme_set()
        return SvConfig(
            acf=self.process.to_acf(),
            vol=self.process.to_vol(),
            tail=self.process.to_tail(),
            n=self.process.n,
            m=self.estimator.to_config().limit_lead,
            h=est_set.dim,
            h_prime=self.estimator.h_prime,
        )

    def target_kind(self) -> TargetKind:
        return TargetKind(self.target.kind)

    def limit_query(self, seed: int, n_mc: Optional[int] = None) -> LimitQuery:
        kind = self.target_kind()
        if n_mc is None:
            n_mc = self.target.n_mc if self.target.n_mc is not None else LimitQuery.n_mc
        return LimitQuery(
            cfg=self.sv_config(),
            set=self.estimator.extreme_set(),
            target=kind,
            y_grid=tuple(self.target.y_grid) if kind is not TargetKind.EVENT else (),
            box=self.target.box(),
            n_mc=n_mc,
            seed=seed,
        )


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = '.'.join(str(p) for p in item.get('loc', ())) or '<root>'
        parts.append(f"{location}: {item.get('msg')}")
    return '; '.join(parts)


def parse_experiment(text: str) -> ExperimentSpec:
    """
    Parse and validate TOML experiment text.

    Raises:
        ConfigError: on TOML syntax or validation failures
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid TOML: {e}")
    try:
        return ExperimentSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment: {_validation_message(e)}")


def emit_experiment(spec: ExperimentSpec) -> str:
    """TOML text with parse_experiment(emit_experiment(spec)) == spec."""
    return tomli_w.dumps(spec.model_dump(exclude_none=True))


def load_experiment(path: Union[str, Path]) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Cannot read experiment file {path}: {e}")
    return parse_experiment(text)

"""
Laser parameters for the two-level nanolaser model.

All rates are kept in units of the population relaxation rate gamma_par, so the
working form has gamma_par = 1 and every frequency axis is in gamma_par units.
"""

import logging
import math
from dataclasses import MISSING, dataclass, asdict, replace, fields
from typing import Dict, Optional

from scipy import constants

from errors import ConfigError

logger = logging.getLogger(__name__)

VC_UNITS = ("m3", "cubic_wavelength")


def _require_positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be > 0 (got {value!r})")


@dataclass(frozen=True)
class PhysicalInputs:
    """Laser parameters in SI units, as quoted for photonic crystal nanolasers"""
    lambda0: float          # wavelength [m]
    n_r: float              # refractive index
    Vc: float               # mode volume [m^3], or multiples of (lambda0/n_r)^3
    dipole: float           # transition dipole moment [C m]
    Q: float                # cavity quality factor
    gamma_par: float        # population relaxation rate [1/s]
    gamma_perp: float       # lasing transition width [1/s]
    N0: int                 # number of emitters
    f: float = 0.5          # average coupling factor
    P: float = 0.0          # dimensionless pump rate
    vc_unit: str = "m3"

    def validate(self) -> "PhysicalInputs":
        for name in ("lambda0", "n_r", "Vc", "dipole", "Q", "gamma_par", "gamma_perp"):
            _require_positive(name, getattr(self, name))
        _check_common(self.N0, self.f, self.P)
        if self.vc_unit not in VC_UNITS:
            raise ConfigError(f"vc_unit must be one of {VC_UNITS} (got {self.vc_unit!r})")
        return self

    @property
    def mode_volume(self) -> float:
        """Mode volume in m^3"""
        if self.vc_unit == "cubic_wavelength":
            return self.Vc * (self.lambda0 / self.n_r) ** 3
        return self.Vc

    @property
    def omega0(self) -> float:
        """Lasing angular frequency [rad/s]"""
        return 2.0 * math.pi * constants.c / self.lambda0


@dataclass(frozen=True)
class LaserParams:
    """
    Dimensionless working parameters.

    Args:
        kappa: field half-decay rate (the cavity loses photons at 2*kappa)
        gamma_perp: lasing transition width (polarization decays at gamma_perp/2)
        omega_rabi: vacuum Rabi frequency
        f: average coupling factor, the mean of f_i^2 over emitters
        N0: number of emitters
        P: dimensionless pump rate
        gamma_par: population relaxation rate, 1 in working units
    """
    kappa: float
    gamma_perp: float
    omega_rabi: float
    f: float = 0.5
    N0: int = 100
    P: float = 0.0
    gamma_par: float = 1.0

    def validate(self) -> "LaserParams":
        for name in ("kappa", "gamma_perp", "omega_rabi", "gamma_par"):
            _require_positive(name, getattr(self, name))
        _check_common(self.N0, self.f, self.P)
        return self

    @property
    def coupling_ratio(self) -> float:
        """Omega_0/(2 kappa + gamma_perp); the model assumes this is much smaller than 1"""
        return self.omega_rabi / (2.0 * self.kappa + self.gamma_perp)

    @property
    def weak_coupling(self) -> bool:
        return self.coupling_ratio < 1.0

    def with_pump(self, P: float) -> "LaserParams":
        return replace(self, P=float(P)).validate()

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    """Closed-form quantities derived from LaserParams"""
    Nth: float              # threshold inversion
    Pth: float              # semiclassical pump threshold (inf when N0 <= Nth)
    Nc: float               # collective Rabi splitting inversion
    beta_tilde: float
    beta_tilde_c: float
    beta_conv: float        # conventional beta factor
    gamma_c: float          # 2 kappa gamma_perp / (2 kappa + gamma_perp)
    gammaP: float           # gamma_par (P + 1)

    @property
    def lasing_possible(self) -> bool:
        return math.isfinite(self.Pth)

    def to_dict(self) -> Dict:
        return asdict(self)


def _check_common(N0, f, P) -> None:
    if isinstance(N0, bool) or not isinstance(N0, (int, float)) or N0 < 1 or int(N0) != N0:
        raise ConfigError(f"N0 must be an integer >= 1 (got {N0!r})")
    if not (isinstance(f, (int, float)) and 0.0 < f <= 1.0):
        raise ConfigError(f"f must satisfy 0 < f <= 1 (got {f!r})")
    if not (isinstance(P, (int, float)) and math.isfinite(P) and P >= 0.0):
        raise ConfigError(f"P must be >= 0 (got {P!r})")


def normalize(inputs: PhysicalInputs) -> LaserParams:
    """Convert SI inputs into the working form with gamma_par = 1"""
    inputs.validate()
    omega0 = inputs.omega0
    kappa = omega0 / (2.0 * inputs.Q)
    omega_rabi = (inputs.dipole / inputs.n_r) * math.sqrt(
        omega0 / (constants.epsilon_0 * constants.hbar * inputs.mode_volume)
    )
    params = LaserParams(
        kappa=kappa / inputs.gamma_par,
        gamma_perp=inputs.gamma_perp / inputs.gamma_par,
        omega_rabi=omega_rabi / inputs.gamma_par,
        f=inputs.f,
        N0=int(inputs.N0),
        P=float(inputs.P),
    ).validate()
    logger.info("✅ Normalized inputs: 2kappa=%.4g, Omega0=%.4g, gamma_perp=%.4g (gamma_par units)",
                2.0 * params.kappa, params.omega_rabi, params.gamma_perp)
    return params


def derive(p: LaserParams) -> DerivedParams:
    """Thresholds, beta factors and composite rates"""
    p.validate()
    Nth = p.kappa * p.gamma_perp / (2.0 * p.omega_rabi ** 2 * p.f)
    Pth = (p.N0 + Nth) / (p.N0 - Nth) if p.N0 > Nth else math.inf
    x = 2.0 * p.kappa / p.gamma_perp
    Nc = 0.5 * (x + 1.0 / x) * Nth
    beta_tilde = 4.0 * p.omega_rabi ** 2 * p.f / (p.gamma_perp * p.gamma_par)
    beta_tilde_c = beta_tilde / (1.0 + x)
    if not p.weak_coupling:
        logger.warning("⚠️ Omega0/(2kappa+gamma_perp) = %.3g is not small; the linearized model may not apply",
                       p.coupling_ratio)
    return DerivedParams(
        Nth=Nth,
        Pth=Pth,
        Nc=Nc,
        beta_tilde=beta_tilde,
        beta_tilde_c=beta_tilde_c,
        beta_conv=beta_tilde / (1.0 + beta_tilde),
        gamma_c=2.0 * p.kappa * p.gamma_perp / (2.0 * p.kappa + p.gamma_perp),
        gammaP=p.gamma_par * (p.P + 1.0),
    )


def _build(cls, block: Dict, where: str):
    allowed = {fld.name for fld in fields(cls)}
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"unknown key '{where}.{unknown[0]}' (allowed: {', '.join(sorted(allowed))})")
    required = {fld.name for fld in fields(cls) if fld.default is MISSING}
    missing = sorted(k for k in required if k not in block)
    if missing:
        raise ConfigError(f"missing key '{where}.{missing[0]}'")
    try:
        return cls(**block).validate()
    except TypeError as exc:
        raise ConfigError(f"invalid '{where}' block: {exc}") from exc


def params_from_config(config: Dict, pump: Optional[float] = None) -> LaserParams:
    """
    Build LaserParams from a config mapping holding exactly one of the
    'physical' or 'dimensionless' blocks.
    """
    blocks = [key for key in ("physical", "dimensionless") if config.get(key) is not None]
    if len(blocks) != 1:
        raise ConfigError("config must contain exactly one of 'physical' or 'dimensionless' "
                          f"(found {blocks or 'neither'})")
    key = blocks[0]
    block = config[key]
    if not isinstance(block, dict):
        raise ConfigError(f"'{key}' must be a JSON object")
    if key == "physical":
        params = normalize(_build(PhysicalInputs, block, key))
    else:
        params = _build(LaserParams, block, key)
    if pump is not None:
        params = params.with_pump(pump)
    return params

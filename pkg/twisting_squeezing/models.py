from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


Vector3 = Tuple[float, float, float]
Components6 = Tuple[float, float, float, float, float, float]

POLE_TOLERANCE = 1e-12


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _as_array(value: Any, shape: Tuple[int, ...], name: str, dtype=float) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    if array.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} contains non-finite entries")
    return array


class ArrayModel(BaseModel):
    """Immutable model whose fields may hold numpy arrays."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True, validate_default=True)


# Spin algebra models
class AngularMomentumSet(ArrayModel):
    """Dicke-basis angular momentum matrices for N particles (j = N/2)."""
    n_particles: int = Field(ge=1)
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def spin(self) -> float:
        return self.n_particles / 2

    @property
    def dimension(self) -> int:
        return self.n_particles + 1

    @property
    def operators(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.jx, self.jy, self.jz

    @property
    def casimir(self) -> float:
        """Eigenvalue j(j+1) of Jx² + Jy² + Jz²."""
        return self.spin * (self.spin + 1)


class TwistingTensor(ArrayModel):
    """Quadratic Hamiltonian parameters: H = ω_k J_k + χ_kl J_k J_l (ħ = 1)."""
    chi: np.ndarray
    omega: np.ndarray = Field(default_factory=lambda: np.zeros(3))

    @field_validator("chi", mode="before")
    @classmethod
    def _symmetric_chi(cls, value: Any) -> np.ndarray:
        chi = _as_array(value, (3, 3), "chi")
        scale = max(1.0, float(np.abs(chi).max()))
        if np.abs(chi - chi.T).max() > 1e-12 * scale:
            raise ValueError("chi must be symmetric")
        return _readonly(0.5 * (chi + chi.T))

    @field_validator("omega", mode="before")
    @classmethod
    def _omega_vector(cls, value: Any) -> np.ndarray:
        return _readonly(_as_array(value, (3,), "omega"))

    @classmethod
    def diagonal(cls, chi_x: float, chi_y: float, chi_z: float,
                 omega: Vector3 = (0.0, 0.0, 0.0)) -> "TwistingTensor":
        return cls(chi=np.diag([chi_x, chi_y, chi_z]), omega=omega)

    @classmethod
    def from_components(cls, components: Components6,
                        omega: Vector3 = (0.0, 0.0, 0.0)) -> "TwistingTensor":
        """Build from (χ_xx, χ_yy, χ_zz, χ_xy, χ_xz, χ_yz)."""
        xx, yy, zz, xy, xz, yz = components
        chi = [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
        return cls(chi=chi, omega=omega)

    @property
    def components(self) -> Components6:
        c = self.chi
        return (c[0, 0], c[1, 1], c[2, 2], c[0, 1], c[0, 2], c[1, 2])

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.chi - np.diag(np.diag(self.chi)))

    def with_omega(self, omega: Any) -> "TwistingTensor":
        return TwistingTensor(chi=self.chi, omega=omega)

    def shifted(self, c: float) -> "TwistingTensor":
        """χ + c·Identity; physically equivalent up to a global phase."""
        return TwistingTensor(chi=self.chi + c * np.eye(3), omega=self.omega)


class BlochDirection(BaseModel):
    """Direction on the Bloch sphere; θ = 0 is the +z pole."""
    model_config = ConfigDict(frozen=True)

    theta: float
    phi: float = 0.0

    @field_validator("theta")
    @classmethod
    def _polar_range(cls, value: float) -> float:
        if not np.isfinite(value) or value < -POLE_TOLERANCE or value > np.pi + POLE_TOLERANCE:
            raise ValueError(f"theta must lie in [0, pi], got {value}")
        return float(min(max(value, 0.0), np.pi))

    @field_validator("phi")
    @classmethod
    def _wrap_azimuth(cls, value: float) -> float:
        if not np.isfinite(value):
            raise ValueError("phi must be finite")
        return float(np.mod(value, 2 * np.pi))

    @classmethod
    def from_vector(cls, vector: Any) -> "BlochDirection":
        v = np.asarray(vector, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot take the direction of a zero vector")
        theta = float(np.arccos(np.clip(v[2] / norm, -1.0, 1.0)))
        return cls(theta=theta, phi=float(np.arctan2(v[1], v[0])))

    @property
    def unit_vector(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    @property
    def is_pole(self) -> bool:
        return self.theta == 0.0 or self.theta == np.pi


class TensorClass(str, Enum):
    """Squeezing scenario of a twisting tensor after trace-shift normalization."""
    FREE = "FREE"
    OAT = "OAT"
    TACT = "TACT"
    GENERAL = "GENERAL"


class CanonicalForm(ArrayModel):
    """Eigenstructure of χ: ascending eigenvalues (χ_y, χ_z, χ_x) and the diagonal frame.

    Rows of `frame` are the x, y, z axes of the diagonal frame in lab
    coordinates, so `frame @ v_lab` gives frame components.
    """
    eigenvalues: Tuple[float, float, float]
    frame: np.ndarray
    tensor_class: TensorClass

    @property
    def chi_x(self) -> float:
        return self.eigenvalues[2]

    @property
    def chi_y(self) -> float:
        return self.eigenvalues[0]

    @property
    def chi_z(self) -> float:
        return self.eigenvalues[1]

    @property
    def diagonal(self) -> Vector3:
        """Eigenvalues in (χ_x, χ_y, χ_z) order."""
        return (self.chi_x, self.chi_y, self.chi_z)


# Exact engine models
class SpinState(ArrayModel):
    """Pure state of the symmetric j = N/2 sector in the Dicke basis (m = j first)."""
    n_particles: int = Field(ge=1)
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _complex_vector(cls, value: Any) -> np.ndarray:
        amplitudes = np.array(value, dtype=complex)
        if amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a vector")
        if not np.all(np.isfinite(amplitudes)):
            raise ValueError("amplitudes contain non-finite entries")
        return _readonly(amplitudes)

    @model_validator(mode="after")
    def _consistent(self) -> "SpinState":
        if self.amplitudes.shape != (self.n_particles + 1,):
            raise ValueError(
                f"expected {self.n_particles + 1} amplitudes for N={self.n_particles}, "
                f"got {self.amplitudes.shape[0]}"
            )
        if self.norm_drift > 1e-8:
            raise ValueError(f"state is not normalized (drift {self.norm_drift:.3e})")
        return self

    @property
    def norm_drift(self) -> float:
        return abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1.0)


class MomentState(ArrayModel):
    """First moments 𝒥 and symmetrized variance tensor V (spin units)."""
    j_mean: np.ndarray
    variance: np.ndarray

    @field_validator("j_mean", mode="before")
    @classmethod
    def _mean_vector(cls, value: Any) -> np.ndarray:
        return _readonly(_as_array(value, (3,), "j_mean"))

    @field_validator("variance", mode="before")
    @classmethod
    def _symmetric_variance(cls, value: Any) -> np.ndarray:
        variance = _as_array(value, (3, 3), "variance")
        scale = max(1.0, float(np.abs(variance).max()))
        if np.abs(variance - variance.T).max() > 1e-9 * scale:
            raise ValueError("variance must be symmetric")
        return _readonly(0.5 * (variance + variance.T))

    @property
    def spin_length(self) -> float:
        return float(np.linalg.norm(self.j_mean))


# Gaussian engine models
class ScaledMomentState(BaseModel):
    """Pole-frame scaled variables: V = (N/4) v, 𝒥_z = (N/2) j, t = τ/N."""
    model_config = ConfigDict(frozen=True)

    v_xx: float = Field(gt=0)
    v_yy: float = Field(gt=0)
    v_xy: float = 0.0
    j: float = Field(default=1.0, ge=-1.0 - 1e-9, le=1.0 + 1e-9)
    tau: float = 0.0

    @classmethod
    def coherent(cls, j: float = 1.0) -> "ScaledMomentState":
        return cls(v_xx=1.0, v_yy=1.0, v_xy=0.0, j=j, tau=0.0)

    @property
    def determinant(self) -> float:
        return self.v_xx * self.v_yy - self.v_xy ** 2


class ControlMode(str, Enum):
    """How the rotation vector ω is chosen during a run."""
    NONE = "none"
    FIXED = "fixed"
    POLE_LOCK = "pole-lock"


class ControlLaw(BaseModel):
    """Rotation control: the tensor's own ω, a fixed ω, or the pole lock."""
    model_config = ConfigDict(frozen=True)

    mode: ControlMode = ControlMode.NONE
    omega: Optional[Vector3] = None
    rotate: bool = True
    compensate_backreaction: bool = True

    @model_validator(mode="after")
    def _omega_matches_mode(self) -> "ControlLaw":
        if self.mode == ControlMode.FIXED and self.omega is None:
            raise ValueError("FIXED control requires omega")
        if self.mode != ControlMode.FIXED and self.omega is not None:
            raise ValueError(f"omega is only accepted with FIXED control, not {self.mode.value}")
        return self

    @classmethod
    def none(cls) -> "ControlLaw":
        return cls(mode=ControlMode.NONE)

    @classmethod
    def fixed(cls, omega: Vector3) -> "ControlLaw":
        return cls(mode=ControlMode.FIXED, omega=tuple(float(w) for w in omega))

    @classmethod
    def pole_lock(cls, rotate: bool = True, compensate_backreaction: bool = True) -> "ControlLaw":
        return cls(mode=ControlMode.POLE_LOCK, rotate=rotate,
                   compensate_backreaction=compensate_backreaction)

    @property
    def is_static(self) -> bool:
        return self.mode != ControlMode.POLE_LOCK


class SqueezingRecord(ArrayModel):
    """One time-series row: τ, 𝒥, V, ξ², ellipse angle α and rate Q."""
    tau: float
    j_mean: np.ndarray
    variance: np.ndarray
    xi2: float
    alpha: float
    rate: float

    def as_row(self) -> Dict[str, float]:
        v = self.variance
        return {
            "tau": self.tau,
            "jx": self.j_mean[0], "jy": self.j_mean[1], "jz": self.j_mean[2],
            "vxx": v[0, 0], "vyy": v[1, 1], "vzz": v[2, 2],
            "vxy": v[0, 1], "vxz": v[0, 2], "vyz": v[1, 2],
            "xi2": self.xi2, "alpha": self.alpha, "Q": self.rate,
        }


# Grid models
class GridSpec(BaseModel):
    """θ uniform including both poles, φ uniform on [0, 2π)."""
    model_config = ConfigDict(frozen=True)

    n_theta: int = Field(default=181, ge=2)
    n_phi: int = Field(default=360, ge=2)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse 'TxP', e.g. '181x360'."""
        try:
            n_theta, n_phi = (int(part) for part in text.lower().split("x"))
        except ValueError as exc:
            raise ValueError(f"grid must look like 181x360, got {text!r}") from exc
        return cls(n_theta=n_theta, n_phi=n_phi)

    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.n_theta)

    def phis(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_phi) / self.n_phi


class BlochGrid(ArrayModel):
    """A scalar field sampled on a θ×φ lattice."""
    label: str
    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray

    @model_validator(mode="after")
    def _shape(self) -> "BlochGrid":
        if self.values.shape != (self.theta.size, self.phi.size):
            raise ValueError("values must have shape (len(theta), len(phi))")
        return self

    def to_frame(self, value_name: str = "value") -> pd.DataFrame:
        """Rows (theta, phi, value), θ-major."""
        theta, phi = np.meshgrid(self.theta, self.phi, indexing="ij")
        return pd.DataFrame({
            "theta": theta.ravel(),
            "phi": phi.ravel(),
            value_name: self.values.ravel(),
        })


# Analytic models
class ChiGaps(BaseModel):
    """Eigenvalue gaps Δχ_x = χ_x − χ_z and Δχ_y = χ_z − χ_y (χ_x ≥ χ_z ≥ χ_y)."""
    model_config = ConfigDict(frozen=True)

    d_chi_x: float = Field(ge=0)
    d_chi_y: float = Field(ge=0)

    @classmethod
    def from_eigenvalues(cls, chi_x: float, chi_y: float, chi_z: float) -> "ChiGaps":
        scale = max(abs(chi_x), abs(chi_y), abs(chi_z), 1.0)
        d_x, d_y = chi_x - chi_z, chi_z - chi_y
        if d_x < -1e-12 * scale or d_y < -1e-12 * scale:
            raise ValueError(f"eigenvalues must satisfy chi_x >= chi_z >= chi_y, "
                             f"got ({chi_x}, {chi_y}, {chi_z})")
        return cls(d_chi_x=max(d_x, 0.0), d_chi_y=max(d_y, 0.0))

    @property
    def d_chi(self) -> float:
        return 2.0 * float(np.sqrt(self.d_chi_x * self.d_chi_y))

    @property
    def spread(self) -> float:
        """χ_x − χ_y."""
        return self.d_chi_x + self.d_chi_y


# Device models
class KerrStage(BaseModel):
    """One beam-splitter + Kerr pass of the crossed-resonator interferometer."""
    model_config = ConfigDict(frozen=True)

    gamma_a: float = 0.0
    gamma_b: float = 0.0
    gamma_c: float = 0.0
    gamma_d: float = 0.0
    roundtrip_dt: float = 1.0
    n_particles: int = Field(default=2, ge=1)


class ChainedStage(BaseModel):
    """A Kerr stage followed by a mode-mixing rotation about `axis` by `angle`."""
    model_config = ConfigDict(frozen=True)

    stage: KerrStage
    axis: Vector3 = (0.0, 0.0, 1.0)
    angle: float = 0.0


class LmgParameters(BaseModel):
    """Lipkin-Meshkov-Glick parameters Ω, V, W."""
    model_config = ConfigDict(frozen=True)

    omega_big: float = 0.0
    v_param: float = 0.0
    w_param: float = 0.0

    @field_validator("omega_big", "v_param", "w_param")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not np.isfinite(value):
            raise ValueError("LMG parameters must be finite")
        return value


# Run configuration
class Engine(str, Enum):
    EXACT = "exact"
    GAUSSIAN_FULL = "gaussian-full"
    GAUSSIAN_SCALED = "gaussian-scaled"
    ANALYTIC = "analytic"


class Preset(str, Enum):
    """The three diagonal tensors of the landscape figures."""
    OAT = "oat"
    TACT = "tact"
    GENERAL = "general"


PRESET_DIAGONALS: Dict[Preset, Vector3] = {
    Preset.OAT: (1.0, 0.0, 0.0),
    Preset.TACT: (1.0, 0.0, 0.5),
    Preset.GENERAL: (1.0, 0.0, 0.8),
}

_INFINITE_WORDS = {"inf", "infinite", "infinity"}


class RunConfig(BaseModel):
    """Validated configuration shared by every CLI command."""
    model_config = ConfigDict(extra="forbid")

    engine: Engine = Engine.GAUSSIAN_SCALED
    n_particles: Optional[int] = Field(default=None, ge=1)
    n_list: List[int] = Field(default_factory=list)

    chi: Optional[Vector3] = None
    chi_full: Optional[Components6] = None
    preset: Optional[Preset] = None
    stages: Optional[List[ChainedStage]] = None
    lmg: Optional[LmgParameters] = None

    omega: Vector3 = (0.0, 0.0, 0.0)
    omega_tilde: float = 0.0
    control: ControlMode = ControlMode.NONE

    theta0: float = Field(default=0.0, ge=0.0, le=np.pi)
    phi0: float = 0.0
    tau_max: float = Field(default=3.0, ge=0.0)
    dtau: float = Field(default=1e-4, gt=0.0)
    stride: int = Field(default=100, ge=1)
    dt_control: Optional[float] = Field(default=None, gt=0.0)
    physical_time: bool = False

    grid: GridSpec = Field(default_factory=GridSpec)
    out: Optional[str] = None

    @field_validator("n_particles", mode="before")
    @classmethod
    def _parse_infinite(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in _INFINITE_WORDS:
            return None
        return value

    @field_validator("grid", mode="before")
    @classmethod
    def _parse_grid(cls, value: Any) -> Any:
        if isinstance(value, str):
            return GridSpec.parse(value)
        return value

    @field_validator("n_list")
    @classmethod
    def _finite_particle_numbers(cls, value: List[int]) -> List[int]:
        if any(n < 1 for n in value):
            raise ValueError("every entry of n_list must be a positive integer")
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        sources = [name for name in ("chi", "chi_full", "preset", "stages", "lmg")
                   if getattr(self, name) is not None]
        if len(sources) != 1:
            found = ", ".join(sources) if sources else "none"
            raise ValueError(
                "exactly one tensor source is required (chi, chi_full, preset, stages or lmg); "
                f"found: {found}"
            )
        finite_only = (Engine.EXACT, Engine.GAUSSIAN_FULL)
        if self.engine in finite_only and self.n_particles is None:
            raise ValueError(f"engine {self.engine.value} requires a finite n_particles")
        if self.physical_time and self.n_particles is None:
            raise ValueError("physical_time output requires a finite n_particles")
        if self.engine in (Engine.ANALYTIC, Engine.GAUSSIAN_SCALED):
            if not self.starts_at_pole:
                raise ValueError(f"engine {self.engine.value} requires a pole start (theta0 = 0 or pi)")
            if self.chi_full is not None and any(self.chi_full[3:]):
                raise ValueError(f"engine {self.engine.value} requires a diagonal tensor")
        if self.engine == Engine.ANALYTIC and self.control == ControlMode.FIXED:
            raise ValueError("engine analytic has closed forms only for control none or pole-lock")
        return self

    @property
    def is_infinite(self) -> bool:
        return self.n_particles is None

    @property
    def starts_at_pole(self) -> bool:
        return abs(self.theta0) <= POLE_TOLERANCE or abs(self.theta0 - np.pi) <= POLE_TOLERANCE

    @property
    def initial_direction(self) -> BlochDirection:
        return BlochDirection(theta=self.theta0, phi=self.phi0)

    def control_law(self) -> ControlLaw:
        if self.control == ControlMode.FIXED:
            return ControlLaw.fixed(self.omega)
        if self.control == ControlMode.POLE_LOCK:
            return ControlLaw.pole_lock()
        return ControlLaw.none()


# Command results
class CommandResult(BaseModel):
    """Outcome of one CLI command."""
    command: str
    success: bool
    output_paths: List[str] = Field(default_factory=list)
    rows: int = 0
    summary: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None
    exit_code: int = 0


class DeviceReport(BaseModel):
    """Twisting tensor obtained from a device description."""
    chi: List[List[float]]
    omega: List[float]
    eigenvalues: List[float]
    frame: List[List[float]]
    tensor_class: TensorClass
    gaps: Dict[str, float]

# models.py
import enum
from dataclasses import dataclass
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


# Enums for spin axes and joint operators
class SpinAxis(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


class JointOperator(str, enum.Enum):
    X_DIFFERENCE = "S1x-S2x"
    Y_DIFFERENCE = "S1y-S2y"
    Z_SUM = "S1z+S2z"

    @property
    def axis(self) -> SpinAxis:
        return {"x": SpinAxis.X, "y": SpinAxis.Y, "z": SpinAxis.Z}[self.value[2]]

    @property
    def sign(self) -> float:
        return 1.0 if self is JointOperator.Z_SUM else -1.0


# Dimensionless experiment configuration
class SystemParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_atoms: int = Field(..., ge=1, description="atoms per BEC (N)")
    alpha: float = Field(10.0, ge=0.0, description="coherent light amplitude")
    tau: float = Field(0.0, description="interaction time in units of hbar/q")
    n_c: int = Field(0, ge=0, description="photons counted in mode c")
    n_d: int = Field(0, ge=0, description="photons counted in mode d")
    chi_bar: float = Field(0.0, ge=0.0, description="amplitude attenuation in units of q/hbar")
    gamma_bar: float = Field(0.0, ge=0.0, description="phase damping in units of q/hbar")

    @property
    def photon_number(self) -> int:
        return self.n_c + self.n_d

    def updated(self, **changes: Any) -> "SystemParams":
        """Return a validated copy with the given fields replaced."""
        return SystemParams(**{**self.model_dump(), **changes})

    def as_point(self) -> Dict[str, Any]:
        return self.model_dump()


def _read_only_copy(array: np.ndarray) -> np.ndarray:
    """Private read-only copy; the caller keeps a writable original."""
    copied = np.array(array, copy=True)
    copied.setflags(write=False)
    return copied


@dataclass(frozen=True)
class StateAmplitudes:
    """Normalized real amplitude grid psi(k1, k2) and its outcome weight."""

    amplitudes: np.ndarray
    norm_weight: float
    params: Optional[SystemParams] = None

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _read_only_copy(self.amplitudes))

    @property
    def n_atoms(self) -> int:
        return self.amplitudes.shape[0] - 1

    def overlap(self, other: "StateAmplitudes") -> float:
        """Squared overlap |<self|other>|^2."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True)
class AtomDensityMatrix:
    """Two-BEC density matrix rho(k1, k2, k1', k2') on the Fock grid."""

    entries: np.ndarray
    trace_weight: float = 1.0
    params: Optional[SystemParams] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", _read_only_copy(self.entries))

    @classmethod
    def from_state(cls, state: StateAmplitudes) -> "AtomDensityMatrix":
        psi = state.amplitudes.astype(complex)
        entries = np.einsum("ab,cd->abcd", psi, psi.conj())
        return cls(entries=entries, trace_weight=1.0, params=state.params)

    @property
    def n_atoms(self) -> int:
        return self.entries.shape[0] - 1

    @property
    def dimension(self) -> int:
        return (self.n_atoms + 1) ** 2

    def as_matrix(self) -> np.ndarray:
        """Flatten to the (N+1)^2 x (N+1)^2 matrix with rows (k1, k2)."""
        return self.entries.reshape(self.dimension, self.dimension)

    def trace(self) -> complex:
        return complex(np.trace(self.as_matrix()))

    def purity(self) -> float:
        matrix = self.as_matrix()
        return float(np.real(np.sum(matrix * matrix.T)))

    def point(self) -> Dict[str, Any]:
        return self.params.as_point() if self.params else {"n_atoms": self.n_atoms}


@dataclass(frozen=True)
class SpinOperatorMatrix:
    """Single-BEC spin operator on the Fock basis |k>, k = 0..N."""

    axis: SpinAxis
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _read_only_copy(self.entries))

    @property
    def n_atoms(self) -> int:
        return self.entries.shape[0] - 1


@dataclass(frozen=True)
class WignerField:
    """Real Wigner quasi-probability sampled on a (theta, phi) grid."""

    theta_grid: np.ndarray
    phi_grid: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        for name in ("theta_grid", "phi_grid", "values"):
            object.__setattr__(self, name, _read_only_copy(getattr(self, name)))

    def argmax(self) -> Tuple[float, float]:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return float(self.theta_grid[i]), float(self.phi_grid[j])


class PerpendicularVariance(NamedTuple):
    var_min: float
    zeta_opt: float
    theta: float
    phi: float


# All scalar diagnostics at one parameter point
class CriterionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau: float
    chi_bar: float
    log_negativity: float
    log_negativity_normalized: float
    epr_fidelity: float
    c_ent: float
    c_dgcz: Optional[float] = None
    xi_squared: Optional[float] = None
    xi_squared_rescaled: Optional[float] = None
    c_steer_1to2: Optional[float] = None
    zeta_opt: Optional[float] = None
    mean_spin_angles: Optional[Tuple[float, float]] = None
    expectations: Dict[str, float] = Field(default_factory=dict)
    variances: Dict[str, float] = Field(default_factory=dict)

from typing import Any, Dict, List, Optional
from enum import Enum
from pydantic import BaseModel, Field, field_validator


class OutputFormat(str, Enum):
    """Report rendering."""
    JSON = "json"
    TEXT = "text"


class OrigamiFile(BaseModel):
    """An origami as (d, h, v) in 1-based cycle notation."""
    d: int = Field(..., gt=0, description="Number of squares")
    h: List[List[int]] = Field(..., description="Right-neighbour permutation as cycles")
    v: List[List[int]] = Field(..., description="Upper-neighbour permutation as cycles")


class DessinFile(BaseModel):
    """A dessin by its monodromy around 0 and 1."""
    degree: int = Field(..., gt=0, description="Degree of the Belyi map")
    g0: List[List[int]] = Field(..., description="Monodromy around 0 as cycles")
    g1: List[List[int]] = Field(..., description="Monodromy around 1 as cycles")


class CylindersRequest(BaseModel):
    """Schema for a cylinder decomposition request."""
    origami: OrigamiFile
    direction: str = Field("1/0", description="Direction p/q with gcd(p, q) = 1")


class CoveringMapFile(BaseModel):
    """A covering map (x, y) -> (P(x), y R(x)) in the strict polynomial grammar."""
    P: str = Field(..., description="P(x), e.g. 4*x^2 - 4*x")
    R: str = Field(..., description="R(x), e.g. 2*x - 1")


class IdentityFile(BaseModel):
    """One identity f_source R^2 = f_target(P) to check."""
    source: str = Field(..., description="Name of the source family")
    map: str = Field(..., description="Name of the covering map")
    target: Optional[str] = Field(None, description="Name of the target family; omit to derive the target cubic")


class FamilyManifestFile(BaseModel):
    """Schema for a manifest of hyperelliptic families, covering maps and identities."""
    families: Dict[str, str] = Field(..., description="Family name -> f(x; t) with y^2 = f")
    maps: Dict[str, CoveringMapFile] = Field(default_factory=dict, description="Map name -> (P, R)")
    identities: List[IdentityFile] = Field(default_factory=list, description="Identities checked in order")


class RunConfig(BaseModel):
    """Command-line run configuration."""
    orbit_bound: int = Field(..., description="Maximal orbit size for Veech group enumeration")
    format: OutputFormat = OutputFormat.JSON

    @field_validator("orbit_bound")
    @classmethod
    def positive_bound(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("orbit_bound must be positive")
        return value

    class Config:
        use_enum_values = True


class ClaimResult(BaseModel):
    """One checked statement."""
    anchor: str
    passed: bool
    detail: str


class ReportResponse(BaseModel):
    """Schema for report responses."""
    status: str
    message: str
    data: Optional[Dict[str, Any]] = None

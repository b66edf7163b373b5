"""
Pydantic models for reports, certificates and CLI documents
Ensures the JSON emitted by the toolkit is typed and validated
"""
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ConeSign(str, Enum):
    """Sign of <p,p>"""
    NEGATIVE = "Negative"
    NULL = "Null"
    POSITIVE = "Positive"


class IsometryKind(str, Enum):
    """Trace-polynomial classification"""
    LOXODROMIC = "Loxodromic"
    REGULAR_ELLIPTIC = "RegularElliptic"
    BOUNDARY = "Boundary"


class RefinedKind(str, Enum):
    """Best-effort eigenstructure refinement of the Boundary case"""
    UNIPOTENT = "Unipotent"
    SCREW_PARABOLIC = "ScrewParabolic"
    SPECIAL_ELLIPTIC = "SpecialElliptic"
    IDENTITY = "Identity"


class SphereSide(str, Enum):
    """Position relative to an isometric sphere"""
    INSIDE = "I-"
    ON = "I"
    OUTSIDE = "I+"


class StabilizerKind(str, Enum):
    TRANSLATION = "translation"
    ROTATION = "rotation"
    DILATION = "dilation"


class Verdict(str, Enum):
    """Discreteness certificate outcome"""
    CERTIFIED = "Certified"
    FAILED = "Failed"
    BOUNDARY = "Boundary"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class IsometryClass(BaseModel):
    """Classification of an isometry by the trace polynomial"""
    model_config = ConfigDict(frozen=True)

    kind: IsometryKind = Field(..., description="Loxodromic, RegularElliptic or Boundary")
    f_value: float = Field(..., description="Goldman discriminant f(trace)")
    trace: Tuple[float, float] = Field(..., description="Trace of the det-normalized matrix as (re, im)")
    refined: Optional[RefinedKind] = Field(None, description="Best-effort refinement of the Boundary case")


class RealEllipticWitness(BaseModel):
    """Outcome of the real elliptic test"""
    is_real: bool
    theta: float = Field(..., ge=0.0, le=3.2, description="Rotation angle of the positive eigenvectors")
    fixed_point: List[Tuple[float, float]] = Field(..., min_length=3, max_length=3)


class CertificateEntry(BaseModel):
    """One sphere-disjointness margin rho_{j',j,k}"""
    jprime: int = Field(..., ge=1)
    j: int = Field(..., ge=1)
    k: int = Field(..., ge=1)
    rho: float


class DiscretenessCertificate(BaseModel):
    """Margins, tangency residual and verdict for one (n, t)"""
    n: int = Field(..., ge=3)
    t: float = Field(..., gt=0.0)
    k_bound: int = Field(..., ge=1)
    entries: List[CertificateEntry]
    tangency_residual: float = Field(..., ge=0.0)
    verdict: Verdict
    min_margin: float
    witness: Optional[CertificateEntry] = Field(None, description="Minimal-margin entry when not Certified")
    wa_type: IsometryKind = Field(..., description="Classification of W_A")
    wb_type: IsometryKind = Field(..., description="Classification of W_B, reported only")

    @field_validator("entries")
    @classmethod
    def validate_entries(cls, v):
        """A certificate without margins is meaningless"""
        if not v:
            raise ValueError("Certificate needs at least one entry")
        return v


class SweepRow(BaseModel):
    n: int
    t: float
    jprime: int
    j: int
    k: int
    rho: float


class SweepCrossing(BaseModel):
    """Sign change of one margin curve located by root finding"""
    jprime: int
    j: int
    k: int
    t: float


class SweepTable(BaseModel):
    """Margins over a t-grid"""
    n: int = Field(..., ge=3)
    threshold: float = Field(..., description="tan(pi/(2n)), where W_A becomes parabolic")
    rows: List[SweepRow]
    crossings: List[SweepCrossing] = Field(default_factory=list)


class FaceRecord(BaseModel):
    label: str
    edges: List[str]


class EdgeRecord(BaseModel):
    label: str
    faces: List[str] = Field(..., min_length=2, max_length=2)


class VertexRecord(BaseModel):
    label: str
    edges: List[str]


class FordComplexDocument(BaseModel):
    """JSON document for the ideal boundary complex"""
    n: int = Field(..., ge=3)
    faces: List[FaceRecord]
    edges: List[EdgeRecord]
    vertices: List[VertexRecord]
    euler: int


class ProbeReport(BaseModel):
    """Outcome of the Monte-Carlo cell probe"""
    n: int
    samples: int
    faces_per_sphere: Dict[int, int]
    expected_faces_per_sphere: Dict[int, int]
    adjacency_matches: bool
    max_on_sphere_residual: float
    dropped_components: int = 0
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def agrees(self) -> bool:
        return self.adjacency_matches and self.faces_per_sphere == self.expected_faces_per_sphere


class RunConfig(BaseModel):
    """Per-invocation CLI configuration"""
    tol: float = Field(1e-9, gt=0.0)
    grid: int = Field(64, ge=2)
    format: OutputFormat = OutputFormat.CSV
    out: Optional[str] = Field(None, description="Output path; standard output when omitted")
    frac_pi: bool = Field(False, description="Read angles as rational multiples of pi")

import logging
from typing import Any, Callable, Dict, Optional

from fastapi import APIRouter, HTTPException, Query, status

from app.models.schemas import CylindersRequest, DessinFile, FamilyManifestFile, OrigamiFile, ReportResponse
from app.services.dessin import DessinMonodromy
from app.services.flatgeom import parse_direction
from app.services.grpcore import InvalidInputError, ResourceLimitError
from app.services.origami import Origami
from app.services.reports import ReportService
from app.utils.helpers import manifest_from_file

# Configure logging
logger = logging.getLogger(__name__)

# Create router
router = APIRouter()

# Create service instance
report_service = ReportService()


def _origami(body: OrigamiFile) -> Origami:
    return Origami.from_cycles(body.d, body.h, body.v)


def _respond(name: str, build: Callable[[], Dict[str, Any]]) -> ReportResponse:
    """Run a report builder and map toolkit errors to HTTP status codes."""
    try:
        data = build()
    except InvalidInputError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except ResourceLimitError as e:
        raise HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail=str(e))
    except Exception as e:
        logger.error(f"Error building {name} report: {str(e)}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error building {name} report: {str(e)}"
        )
    failed = ReportService.failures(data)
    if failed:
        return ReportResponse(status="failed", message="; ".join(failed), data=data)
    return ReportResponse(status="success", message=f"{name} report", data=data)


@router.post("/invariants", response_model=ReportResponse)
def invariants(body: OrigamiFile):
    """Genus, stratum, block systems and monodromy group order of an origami."""
    return _respond("invariants", lambda: report_service.invariants(_origami(body)))


@router.post("/veech", response_model=ReportResponse)
def veech(body: OrigamiFile):
    """Veech group, cusps, elliptic points and origami-curve genus."""
    return _respond("veech", lambda: report_service.veech(_origami(body)))


@router.post("/cylinders", response_model=ReportResponse)
def cylinders(body: CylindersRequest):
    return _respond(
        "cylinders",
        lambda: report_service.cylinders(_origami(body.origami), parse_direction(body.direction)),
    )


@router.post("/fingerprint", response_model=ReportResponse)
def fingerprint(
    body: OrigamiFile,
    source_degree: Optional[int] = Query(None, description="Degree of the source dessin"),
):
    return _respond("fingerprint", lambda: report_service.fingerprint(_origami(body), source_degree))


@router.post("/from-dessin", response_model=ReportResponse)
def from_dessin(body: DessinFile):
    """Origami attached to a pure dessin, with the Riemann-Hurwitz bookkeeping."""
    return _respond(
        "from-dessin",
        lambda: report_service.from_dessin(DessinMonodromy.from_cycles(body.degree, body.g0, body.g1)),
    )


@router.get("/builtins", response_model=ReportResponse)
def builtins():
    return _respond("builtins", report_service.builtins)


@router.get("/verify-families", response_model=ReportResponse)
def verify_families():
    return _respond("verify-families", report_service.verify_families)


@router.post("/verify-families", response_model=ReportResponse)
def verify_manifest(body: FamilyManifestFile):
    """Check the identities listed in a family manifest."""
    return _respond("verify-families", lambda: report_service.verify_families(manifest_from_file(body)))


@router.get("/verify-gt", response_model=ReportResponse)
def verify_gt():
    """Run the built-in formal-exponent ledger."""
    return _respond("verify-gt", report_service.verify_gt)

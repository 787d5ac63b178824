import logging
from typing import Any, Dict, List, Optional

from app.config import settings
from app.models.schemas import ClaimResult
from app.services.algver import FamilyManifest, verify_families
from app.services.dessin import (
    DessinMonodromy,
    fingerprint_check,
    origami_from_dessin,
    riemann_hurwitz_report,
    strip_doubling_check,
)
from app.services.flatgeom import cylinder_decomposition, format_direction, spin_parity
from app.services.grpcore import ResourceLimitError, block_systems
from app.services.gtledger import verify_gt_ledger
from app.services.origami import Origami, canonicalize, monodromy_group_order, singularity_data
from app.services.veech import cusp_report, same_teichmueller_curve, veech_group, veech_report
from app.utils.builtins import builtin_names
from app.utils.helpers import format_cycles

# Configure logging
logger = logging.getLogger(__name__)


def _group_order(o: Origami) -> Any:
    try:
        return monodromy_group_order(o)
    except ResourceLimitError:
        return f"> {settings.MONODROMY_ORDER_BOUND}"


class ReportService:
    """Builds the JSON-ready reports shared by the command line and the HTTP API."""

    def __init__(self, orbit_bound: Optional[int] = None):
        self.orbit_bound = orbit_bound or settings.ORBIT_BOUND

    def validate(self, o: Origami) -> Dict[str, Any]:
        return {"valid": True, "origami": o.to_json()}

    def invariants(self, o: Origami) -> Dict[str, Any]:
        """Genus, stratum, marked points, block systems and monodromy group order."""
        data = singularity_data(o)
        return {
            "origami": o.to_json(),
            "genus": data.genus,
            "stratum": data.stratum,
            "zero_orders": list(data.zero_orders),
            "n": data.n,
            "commutator": format_cycles(canonicalize(o).commutator().cycles()),
            "block_systems": block_systems([o.h, o.v], o.d),
            "monodromy_group_order": _group_order(o),
        }

    def veech(self, o: Origami) -> Dict[str, Any]:
        return veech_report(o, self.orbit_bound)

    def cylinders(self, o: Origami, direction) -> Dict[str, Any]:
        decomposition = cylinder_decomposition(o, direction)
        return {
            "direction": format_direction(decomposition.direction),
            "count": decomposition.count,
            "cylinders": [{"width": w, "height": k} for w, k in decomposition.cylinders],
            "unit_strips": decomposition.unit_strip_count,
        }

    def same_curve(self, o1: Origami, o2: Origami) -> Dict[str, Any]:
        return {
            "same_orbit": same_teichmueller_curve(o1, o2, self.orbit_bound),
            "note": "same SL(2,Z)-orbit is sufficient for equal origami curves",
        }

    def from_dessin(self, dessin: DessinMonodromy) -> Dict[str, Any]:
        o = origami_from_dessin(dessin)
        return {
            "dessin": dessin.to_json(),
            "origami": o.to_json(),
            "riemann_hurwitz": riemann_hurwitz_report(dessin),
            "strip_doubling": strip_doubling_check(dessin, o),
        }

    def fingerprint(self, o: Origami, source_degree: Optional[int] = None) -> Dict[str, Any]:
        """Galois-invariant record of an origami, plus the cusp check for dessin-built ones."""
        data = singularity_data(o)
        vgd = veech_group(o, self.orbit_bound)
        cusps = cusp_report(o, vgd)
        report: Dict[str, Any] = {
            "degree": o.d,
            "stratum": data.stratum,
            "ramification_profile": list(data.commutator_cycle_type),
            "monodromy_group_order": _group_order(o),
            "spin_parity": spin_parity(o),
            "veech_index": vgd.index,
            "cusp_widths": sorted(c.width for c in cusps.cusps),
            "node_counts": sorted(c.node_count for c in cusps.cusps),
        }
        if source_degree is not None:
            check = fingerprint_check(o, source_degree)
            report["dessin_check"] = {
                "counts": check.counts,
                "heights": check.heights,
                "r": check.r,
                "distinct": check.distinct,
                "passed": check.passed,
                "failures": check.failures,
            }
        return report

    def verify_families(self, manifest: Optional[FamilyManifest] = None) -> Dict[str, Any]:
        claims = verify_families(manifest)
        return {
            "source": "builtin" if manifest is None else "manifest",
            "passed": all(c.passed for c in claims),
            "claims": [ClaimResult(anchor=c.anchor, passed=c.passed, detail=c.detail).model_dump() for c in claims],
        }

    def verify_gt(self, script: Optional[str] = None) -> Dict[str, Any]:
        reports = verify_gt_ledger(script)
        return {
            "passed": all(r.passed for r in reports),
            "levels": [r.to_json() for r in reports],
        }

    def builtins(self) -> Dict[str, Any]:
        return {"builtins": builtin_names()}

    @staticmethod
    def failures(report: Dict[str, Any]) -> List[str]:
        """Anchors of the failed claims in a verification report."""
        failed = []
        for claim in report.get("claims", []):
            if not claim["passed"]:
                failed.append(claim["anchor"])
        for level in report.get("levels", []):
            failed.extend(c["anchor"] for c in level["claims"] if not c["passed"])
        check = report.get("dessin_check")
        if check and not check["passed"]:
            failed.extend(f"fingerprint: {f}" for f in check["failures"])
        for label, row in report.get("strip_doubling", {}).items():
            if not row["passed"]:
                failed.append(f"strip doubling: {label} has {row['strips']} strips, expected {row['expected']}")
        rh = report.get("riemann_hurwitz")
        if rh and not rh["origami"]["consistent"]:
            failed.append("dessin/riemann-hurwitz")
        return failed

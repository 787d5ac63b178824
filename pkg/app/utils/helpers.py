import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

from pydantic import ValidationError

from app.models.schemas import DessinFile, FamilyManifestFile
from app.services.algver import FamilyIdentity, FamilyManifest
from app.services.dessin import DessinMonodromy
from app.services.grpcore import InvalidInputError
from app.services.origami import Origami
from app.utils.builtins import BUILTIN_DESSINS, BUILTIN_ORIGAMIS, builtin_dessin, builtin_origami

# Configure logging
logger = logging.getLogger(__name__)


def format_cycles(cycles: Sequence[Sequence[int]]) -> str:
    """Cycle notation such as ``(1 2)(3 4)``; the identity is ``()``."""
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(a) for a in c) + ")" for c in cycles)


def load_json(path: str) -> Dict[str, Any]:
    """
    Read a JSON object from a file.

    Args:
        path: File path

    Returns:
        The parsed object
    """
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise InvalidInputError(f"No such file or built-in name: '{path}'") from e
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"Malformed JSON in {path}: {str(e)}") from e
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path} does not contain a JSON object")
    return data


def dump_json(data: Any) -> str:
    """Deterministic JSON rendering."""
    return json.dumps(data, indent=2, sort_keys=True, default=str)


def _validation_message(e: ValidationError) -> str:
    parts = []
    for error in e.errors():
        field = ".".join(str(p) for p in error["loc"])
        parts.append(f"field '{field}': {error['msg']}")
    return "; ".join(parts)


def load_origami(source: str) -> Origami:
    """An origami from a built-in name or a JSON file."""
    if source in BUILTIN_ORIGAMIS:
        return builtin_origami(source)
    data = load_json(source)
    try:
        return Origami.from_json(data)
    except ValidationError as e:
        raise InvalidInputError(_validation_message(e)) from e


def load_dessin(source: str) -> DessinMonodromy:
    """A dessin from a built-in name or a JSON file."""
    if source in BUILTIN_DESSINS:
        return builtin_dessin(source)
    data = load_json(source)
    try:
        parsed = DessinFile.model_validate(data)
    except ValidationError as e:
        raise InvalidInputError(_validation_message(e)) from e
    return DessinMonodromy.from_cycles(parsed.degree, parsed.g0, parsed.g1)


def manifest_from_file(body: FamilyManifestFile) -> FamilyManifest:
    """Parse a validated manifest's polynomials into families and maps."""
    return FamilyManifest.from_text(
        body.families,
        {name: (m.P, m.R) for name, m in body.maps.items()},
        [FamilyIdentity(i.source, i.map, i.target) for i in body.identities],
    )


def load_family_manifest(source: str) -> FamilyManifest:
    """A family manifest from a JSON file."""
    data = load_json(source)
    try:
        parsed = FamilyManifestFile.model_validate(data)
    except ValidationError as e:
        raise InvalidInputError(_validation_message(e)) from e
    return manifest_from_file(parsed)


def render_text(data: Any, indent: int = 0) -> List[str]:
    """
    Render a report as indented ``key: value`` lines.

    Lists of scalars stay on one line; keys keep their insertion order.
    """
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(data, dict):
        for key, value in data.items():
            if isinstance(value, (dict, list)) and value and not _is_flat(value):
                lines.append(f"{pad}{key}:")
                lines.extend(render_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(value)}")
    elif isinstance(data, list):
        for item in data:
            if isinstance(item, (dict, list)) and not _is_flat(item):
                lines.append(f"{pad}-")
                lines.extend(render_text(item, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(f"{pad}{_scalar(data)}")
    return lines


def _is_flat(value: Any) -> bool:
    return isinstance(value, list) and all(not isinstance(v, dict) for v in value)


def _scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True, default=str)
    return str(value)

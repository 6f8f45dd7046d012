"""Bundled scenarios and the scenario file loader.

A scenario reference is either the name of a bundled scenario ("reference",
"toy") or a path to a JSON file.
"""

import json
import logging
from importlib import resources
from pathlib import Path

from pydantic import ValidationError as PydanticValidationError

from ..errors import ScenarioError
from ..models import ScenarioConfig

logger = logging.getLogger(__name__)

BUNDLED = ("reference", "toy")


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse scenario JSON text.

    Raises:
        ScenarioError: On malformed JSON (with line and column) or invalid fields.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(source, e.msg, line=e.lineno, column=e.colno) from e
    try:
        return ScenarioConfig.model_validate(data)
    except PydanticValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
            for err in e.errors()
        )
        raise ScenarioError(source, details) from e


def load_scenario(ref: str) -> ScenarioConfig:
    """Load a bundled scenario by name, or a scenario file by path."""
    if ref in BUNDLED:
        text = resources.files(__name__).joinpath(f"{ref}.json").read_text(encoding="utf-8")
        logger.debug("Loaded bundled scenario %s", ref)
        return parse_scenario(text, ref)
    path = Path(ref)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(ref, f"cannot read file: {e.strerror}") from e
    return parse_scenario(text, ref)

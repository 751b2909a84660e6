"""
Run configuration files and command-line overrides.

Two equivalent formats are read:

* flat ``key=value`` text with dotted section keys (``solve.omega=0.1``),
  parsed with python-dotenv;
* sectioned JSON (``{"solve": {"omega": 0.1}}``).
"""
import json
import logging
from pathlib import Path

from dotenv import dotenv_values

from core.exceptions import DomainError, StructuralError
from core.utils import validation_error_to_lab_error

from .serializers import CONFIG_SERIALIZERS

logger = logging.getLogger(__name__)


def parse_flat(text_path):
    """Nest ``section.key=value`` lines into {section: {key: value}}."""
    sections = {}
    for dotted, value in dotenv_values(text_path).items():
        section, sep, key = dotted.partition('.')
        if not sep or not key:
            raise DomainError(
                "Config keys must look like section.key", key=dotted, path=str(text_path),
            )
        sections.setdefault(section, {})[key] = value
    return sections


def load_config_file(path):
    """
    Read a config file into a sectioned dict.

    Raises:
        StructuralError: If the file does not exist or is not valid JSON.
        DomainError: If a section is unknown or a flat key has no section.
    """
    path = Path(path)
    if not path.is_file():
        raise StructuralError("Config file not found", path=str(path))
    if path.suffix == '.json':
        try:
            sections = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise StructuralError("Config file is not valid JSON", path=str(path), error=str(exc))
        if not isinstance(sections, dict) or not all(isinstance(v, dict) for v in sections.values()):
            raise StructuralError("JSON config must map section names to objects", path=str(path))
    else:
        sections = parse_flat(path)
    unknown = sorted(set(sections) - set(CONFIG_SERIALIZERS))
    if unknown:
        raise DomainError("Unknown config sections", sections=unknown, path=str(path))
    return sections


def resolve_config(command, path=None, overrides=None):
    """
    Merge a config file section with command-line overrides and validate it.

    Args:
        command (str): Command name, also the config section.
        path (str): Optional config file.
        overrides (dict): Values from flags; None entries are ignored.

    Returns:
        dict: Validated configuration with every default filled in.

    Raises:
        DomainError: On unknown keys or invalid values.
        FrequencyOutOfWindow: If a frequency lies outside (0, 3/16).
    """
    data = dict(load_config_file(path).get(command, {})) if path else {}
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    serializer = CONFIG_SERIALIZERS[command](data=data)
    if not serializer.is_valid():
        raise validation_error_to_lab_error(serializer.errors, section=command)
    resolved = dict(serializer.validated_data)
    logger.debug("Resolved %s config: %s", command, resolved)
    return resolved

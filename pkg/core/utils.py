""" Validation and Custom Error Handling Extraction """
from core.exceptions import DomainError, FrequencyOutOfWindow

FREQUENCY_FIELDS = ('omega', 'omega_grid', 'omega_min', 'omega_max')


def extract_error_message(detail):
    """
    Recursively extract the first error message from a DRF ValidationError detail.
    """
    if isinstance(detail, str):
        return detail
    elif isinstance(detail, list) and detail:
        return extract_error_message(detail[0])
    elif isinstance(detail, dict):
        for value in detail.values():
            return extract_error_message(value)
    elif hasattr(detail, 'detail'):
        return extract_error_message(detail.detail)
    return "Validation error"


def first_error_field(detail):
    """Name of the first failing field in a serializer error dict, or None."""
    if isinstance(detail, dict):
        for key in detail:
            return key
    return None


def validation_error_to_lab_error(errors, section=None):
    """
    Turn serializer errors into the lab error a command exits with.

    A frequency outside (0, 3/16) becomes FrequencyOutOfWindow, anything
    else a DomainError.

    Args:
        errors (dict): ``serializer.errors``.
        section (str): Command whose config failed.

    Returns:
        DomainError: Error carrying the failing field and every message.
    """
    field_name = first_error_field(errors)
    message = extract_error_message(errors)
    context = {'field': field_name, 'errors': _plain(errors)}
    if section:
        context['section'] = section
    codes = _codes(errors.get(field_name)) if isinstance(errors, dict) else []
    if field_name in FREQUENCY_FIELDS and 'out_of_window' in codes:
        return FrequencyOutOfWindow(f"{field_name}: {message}", **context)
    return DomainError(f"{field_name}: {message}" if field_name else message, **context)


def _codes(detail):
    if detail is None:
        return []
    if isinstance(detail, list):
        return [code for item in detail for code in _codes(item)]
    if isinstance(detail, dict):
        return [code for item in detail.values() for code in _codes(item)]
    return [getattr(detail, 'code', None)]


def _plain(detail):
    if isinstance(detail, dict):
        return {key: _plain(value) for key, value in detail.items()}
    if isinstance(detail, list):
        return [_plain(item) for item in detail]
    return str(detail)

import json
import os
from pathlib import Path
from typing import Dict, Any, Union

from errors import ValidationError

# Largest JSON payload accepted from files or uploads
MAX_PAYLOAD_BYTES = 20 * 1024 * 1024

PAYLOAD_KEYS = {
    'grope': ['bodies'],
    'tower': ['trees'],
    'raw-tower': ['surfaces', 'points'],
    'certificate': ['kind'],
}

_COLORS = {'green': '\033[32m', 'yellow': '\033[33m', 'red': '\033[31m'}
_RESET = '\033[0m'


def validate_payload(data: Any, kind: str) -> Dict[str, Any]:
    """
    Validate a decoded JSON payload before it is handed to a loader

    Args:
        data: Decoded JSON value
        kind: One of the PAYLOAD_KEYS entries

    Returns:
        Dictionary with validation results
    """
    if kind not in PAYLOAD_KEYS:
        return {
            'valid': False,
            'message': f"Unknown payload kind '{kind}'."
        }

    if not isinstance(data, dict):
        return {
            'valid': False,
            'message': f"A {kind} payload must be a JSON object, got {type(data).__name__}."
        }

    # Raw towers may be a grope-shaped file by mistake
    if kind == 'tower' and 'bodies' in data:
        return {
            'valid': False,
            'message': "This looks like a grope payload (it has 'bodies'), not a tower."
        }

    missing = [key for key in PAYLOAD_KEYS[kind] if key not in data]
    if missing:
        return {
            'valid': False,
            'message': f"The {kind} payload is missing: {', '.join(missing)}."
        }

    return {
        'valid': True,
        'message': "Payload validation successful."
    }


def validate_upload(name: str, size: int) -> Dict[str, Any]:
    """Check an uploaded file's name and size"""
    if size > MAX_PAYLOAD_BYTES:
        return {
            'valid': False,
            'message': f"File size ({format_file_size(size)}) exceeds maximum allowed size ({format_file_size(MAX_PAYLOAD_BYTES)})."
        }

    if not name.lower().endswith('.json'):
        return {
            'valid': False,
            'message': "Only JSON files are accepted."
        }

    if size == 0:
        return {
            'valid': False,
            'message': "File is empty."
        }

    return {
        'valid': True,
        'message': "File validation successful."
    }


def decode_payload(raw: Union[str, bytes], *kinds: str) -> Dict[str, Any]:
    """Decode JSON text valid as one of ``kinds``; raises ValidationError with the first validation message"""
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ValidationError(f"Invalid JSON: {e}") from None

    results = [validate_payload(data, kind) for kind in kinds]
    if not any(result['valid'] for result in results):
        raise ValidationError(results[0]['message'])
    return data


def load_json_file(path: Union[str, Path], *kinds: str) -> Dict[str, Any]:
    """Read and validate a JSON payload file"""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"No such file: {path}")

    result = validate_upload(path.name, path.stat().st_size)
    if not result['valid']:
        raise ValidationError(result['message'])

    return decode_payload(path.read_bytes(), *kinds)


def dump_json(data: Any) -> str:
    """Canonical JSON text: sorted keys, stable indentation"""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False)


def use_color() -> bool:
    return 'NO_COLOR' not in os.environ


def colorize(text: str, color: str) -> str:
    if not use_color():
        return text
    return f"{_COLORS[color]}{text}{_RESET}"


def format_verdict(ok: bool) -> str:
    """
    Format a check result for display

    Args:
        ok: Whether the check passed

    Returns:
        Formatted verdict string
    """
    if ok:
        return colorize("✓ passed", 'green')
    return colorize("✗ failed", 'red')


def format_order(order: Any) -> str:
    """Format a tower order; unbounded orders are highlighted"""
    text = str(order)
    if text == "unbounded":
        return colorize("∞ (unbounded)", 'yellow')
    return text


def truncate_text(text: str, max_length: int = 100) -> str:
    """
    Truncate text to specified length with ellipsis

    Args:
        text: Text to truncate
        max_length: Maximum length before truncation

    Returns:
        Truncated text
    """
    if len(text) <= max_length:
        return text

    return text[:max_length-3] + "..."


def format_file_size(size_bytes: int) -> str:
    """
    Format file size in human-readable format

    Args:
        size_bytes: File size in bytes

    Returns:
        Formatted file size string
    """
    if size_bytes < 1024:
        return f"{size_bytes} B"
    elif size_bytes < 1024 * 1024:
        return f"{size_bytes / 1024:.1f} KB"
    else:
        return f"{size_bytes / (1024 * 1024):.1f} MB"

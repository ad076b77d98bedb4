"""
Exo-Mix - Utilities
"""
from .decorators import handle_errors
from .logger import audit_log
from .helpers import (
    significance_stars, format_coefficient, regression_table,
    write_json, read_json, write_csv, write_text, to_jsonable,
)

__all__ = [
    'handle_errors',
    'audit_log',
    'significance_stars',
    'format_coefficient',
    'regression_table',
    'write_json',
    'read_json',
    'write_csv',
    'write_text',
    'to_jsonable',
]

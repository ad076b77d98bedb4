"""
Exo-Mix - Helper Functions

Output formatting and artifact writers shared by the jobs and commands.
"""
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from ..extensions import get_config


# p-value cut-offs for significance stars, loosest first
STAR_LEVELS = ((0.01, '***'), (0.05, '**'), (0.1, '*'))


def significance_stars(p_value):
    """'***' p<0.01, '**' p<0.05, '*' p<0.1, '' otherwise (or when p is NaN)."""
    if p_value is None or not math.isfinite(p_value):
        return ''
    for level, stars in STAR_LEVELS:
        if p_value < level:
            return stars
    return ''


def format_coefficient(result, name='beta', digits=3):
    """
    Coefficient with stars and the standard error below it.

    Returns:
        tuple: ('1.968***', '(0.056)')
    """
    coef = result.coef(name)
    se = result.se(name)
    se_text = f"({se:.{digits}f})" if math.isfinite(se) else '(-)'
    return f"{coef:.{digits}f}{significance_stars(result.p_value(name))}", se_text


def regression_table(columns, names=('beta', 'alpha'), digits=3):
    """
    Plain-text regression table, one column per result.

    Args:
        columns: ordered {column title: RegressionResult}
        names: coefficient rows to print (missing ones are left blank)
    """
    titles = list(columns)
    lines = [[''] + titles]
    for name in names:
        coef_row, se_row = [name], ['']
        for title in titles:
            result = columns[title]
            if name in result.coefficients:
                coef, se = format_coefficient(result, name, digits)
            else:
                coef, se = '', ''
            coef_row.append(coef)
            se_row.append(se)
        lines += [coef_row, se_row]
    lines.append(['Observations'] + [str(columns[t].n_used) for t in titles])
    lines.append(['R2'] + [f"{columns[t].r_squared:.3f}" for t in titles])
    lines.append(['SE'] + [columns[t].se_kind for t in titles])

    widths = [max(len(row[i]) for row in lines) for i in range(len(lines[0]))]
    rule = '-' * (sum(widths) + 2 * (len(widths) - 1))
    text = [rule]
    for i, row in enumerate(lines):
        text.append('  '.join(cell.rjust(w) if j else cell.ljust(w)
                              for j, (cell, w) in enumerate(zip(row, widths))))
        if i == 0 or i == 2 * len(names):
            text.append(rule)
    text.append(rule)
    text.append('Note: *p<0.1; **p<0.05; ***p<0.01')
    return '\n'.join(text) + '\n'


def to_jsonable(value):
    """Recursively convert numpy / pandas values to JSON-native ones (NaN -> None)."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, pd.DataFrame):
        return to_jsonable(value.reset_index().to_dict(orient='records'))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(path, payload):
    """Write sorted, indented JSON and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        json.dump(to_jsonable(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write('\n')
    return path


def read_json(path):
    with open(path, encoding='utf-8') as fh:
        return json.load(fh)


def write_csv(frame, path, index=False):
    """Write a DataFrame with round-trip float precision and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, float_format=get_config().FLOAT_FORMAT, lineterminator='\n')
    return path


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(text)
    return path

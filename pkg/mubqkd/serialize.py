"""JSON, NDJSON and CSV forms of bases, reports, summaries and tables.

Outputs are written with sorted keys and '\\n' line endings so identical inputs give byte-identical files.
"""
import csv
import json
import math

import numpy as np

from .bases import Basis, BasisError, LABELS, check_dimension


__all__ = ['FormatError', 'RECORD_SCHEMA', 'RECORD_SCHEMA_VERSION',
           'basis_to_dict', 'basis_from_dict', 'dump_basis', 'load_basis',
           'to_jsonable', 'dumps', 'write_json', 'write_records', 'read_records', 'write_csv']


RECORD_SCHEMA = 'mubqkd.sift_record'
RECORD_SCHEMA_VERSION = 1


class FormatError(ValueError):
    """A document does not follow the expected layout."""
    pass


def basis_to_dict(basis):
    """Return {n, label, vectors} with one [[re, im], ...] list per basis vector."""
    return {'n': basis.n, 'label': basis.label,
            'vectors': [[[float(a.real), float(a.imag)] for a in row] for row in basis.matrix]}


def _complex(pair, where):
    try:
        re, im = pair
        value = complex(float(re), float(im))
    except (TypeError, ValueError):
        raise FormatError('Amplitude {} must be a [re, im] pair, got {!r}'.format(where, pair))
    return value


def basis_from_dict(data, validate=True):
    """Return the Basis described by a basis_to_dict document.

    The vectors may be nested (n lists of n pairs) or a flat row-major list of n * n pairs.

    Args:
        data (dict): Parsed JSON document.
        validate (bool)[True]: If False accept vectors that are not orthonormal.

    Raises:
        FormatError: If the document layout is wrong.
        BasisError: If validate is True and the vectors are not orthonormal.
    """
    if not isinstance(data, dict):
        raise FormatError('Basis document must be an object, got {}'.format(type(data).__name__))
    missing = [key for key in ('n', 'vectors') if key not in data]
    if missing:
        raise FormatError('Basis document is missing {}'.format(', '.join(missing)))
    n = check_dimension(data['n'])
    label = data.get('label', 'E')
    if label not in LABELS:
        raise FormatError('Basis label must be one of {}, got {!r}'.format(LABELS, label))

    vectors = data['vectors']
    if not isinstance(vectors, list):
        raise FormatError('"vectors" must be a list')
    if len(vectors) == n * n:
        flat = vectors
    elif len(vectors) == n and all(isinstance(v, list) and len(v) == n for v in vectors):
        flat = [pair for v in vectors for pair in v]
    else:
        raise FormatError('"vectors" must hold {} vectors of {} amplitudes'.format(n, n))

    matrix = np.array([_complex(pair, idx) for idx, pair in enumerate(flat)], dtype=complex).reshape(n, n)
    if validate:
        norms = np.sum(np.abs(matrix) ** 2, axis=1)
        for i, norm in enumerate(norms):
            if abs(norm - 1.0) > 1e-9:
                raise BasisError('Vector {} is not normalized: squared norm {!r}'.format(i + 1, float(norm)))
    return Basis(matrix, label=label, validate=validate)


def dump_basis(basis, path):
    write_json(path, basis_to_dict(basis))


def load_basis(path, validate=True):
    """Read a basis JSON file. See basis_from_dict."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as err:
        raise FormatError('{} is not valid JSON: {}'.format(path, err))
    return basis_from_dict(data, validate=validate)


def to_jsonable(value):
    """Convert numpy scalars, tuples and NaN into plain JSON values (NaN becomes None)."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, 'as_dict'):
        return to_jsonable(value.as_dict())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) else value
    return value


def dumps(value):
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_json(path, value):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dumps(value))


def write_records(path, records, config=None):
    """Write SiftRecords as newline-delimited JSON after a schema header line. Returns the record count."""
    count = 0
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        header = {'schema': RECORD_SCHEMA, 'version': RECORD_SCHEMA_VERSION, 'config': to_jsonable(config or {})}
        f.write(json.dumps(header, sort_keys=True) + '\n')
        for record in records:
            f.write(json.dumps(to_jsonable(record.as_dict()), sort_keys=True) + '\n')
            count += 1
    return count


def read_records(path):
    """Return (header, list of record dicts) from a write_records file."""
    with open(path, 'r', encoding='utf-8') as f:
        lines = [line for line in f if line.strip()]
    if not lines:
        raise FormatError('{} is empty'.format(path))
    header = json.loads(lines[0])
    if header.get('schema') != RECORD_SCHEMA:
        raise FormatError('{} is not a {} stream'.format(path, RECORD_SCHEMA))
    if header.get('version') != RECORD_SCHEMA_VERSION:
        raise FormatError('Unsupported record schema version {!r}'.format(header.get('version')))
    return header, [json.loads(line) for line in lines[1:]]


def write_csv(path, columns, rows):
    """Write rows (dicts or sequences in column order) under a fixed column header."""
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator='\n')
        writer.writeheader()
        for row in rows:
            if not isinstance(row, dict):
                row = dict(zip(columns, row))
            writer.writerow({k: _csv_value(row.get(k)) for k in columns})


def _csv_value(value):
    value = to_jsonable(value)
    if value is None:
        return ''
    return value

import json
import math

import numpy as np
import pytest

from mubqkd import (BasisError, FormatError, basis_from_dict, basis_to_dict, dump_basis,
                    fourier_mub_basis, fourier_mub_pair, load_basis, read_records, simulate, write_csv,
                    write_records)
from mubqkd.serialize import RECORD_SCHEMA, dumps, to_jsonable


def test_basis_document():
    f = fourier_mub_basis(3)
    data = basis_to_dict(f)
    assert data['n'] == 3
    assert data['label'] == 'F'
    assert len(data['vectors']) == 3
    assert data['vectors'][0][0] == [1 / math.sqrt(3), 0.0]

    flat = dict(data, vectors=[pair for vector in data['vectors'] for pair in vector])
    np.testing.assert_array_equal(basis_from_dict(flat).matrix, basis_from_dict(data).matrix)


def test_basis_file(tmp_path):
    path = tmp_path / 'f.json'
    f = fourier_mub_basis(4)
    dump_basis(f, str(path))
    loaded = load_basis(str(path))
    np.testing.assert_array_equal(loaded.matrix, f.matrix)
    assert loaded.label == 'F'
    assert path.read_text().endswith('\n')


def test_basis_errors(tmp_path):
    with pytest.raises(FormatError):
        basis_from_dict([1, 2])
    with pytest.raises(FormatError):
        basis_from_dict({'n': 2})
    with pytest.raises(FormatError):
        basis_from_dict({'n': 2, 'label': 'Q', 'vectors': [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]})
    with pytest.raises(FormatError):
        basis_from_dict({'n': 2, 'vectors': [[[1, 0], [0, 0]]]})
    with pytest.raises(FormatError):
        basis_from_dict({'n': 2, 'vectors': [[[1, 0], 'x'], [[0, 0], [1, 0]]]})

    half = {'n': 2, 'vectors': [[[math.sqrt(0.5), 0], [0, 0]], [[0, 0], [1, 0]]]}
    with pytest.raises(BasisError) as err:
        basis_from_dict(half)
    assert 'Vector 1 is not normalized' in str(err.value)
    assert basis_from_dict(half, validate=False).n == 2

    path = tmp_path / 'broken.json'
    path.write_text('{"n": 2,')
    with pytest.raises(FormatError):
        load_basis(str(path))


def test_to_jsonable():
    value = to_jsonable({'a': np.int64(3), 'b': float('nan'), 'c': (np.float64(0.5), None)})
    assert value == {'a': 3, 'b': None, 'c': [0.5, None]}
    assert dumps({'b': 1, 'a': 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'


def test_records(tmp_path):
    pair = fourier_mub_pair(3)
    summary, records = simulate(pair, pair.e, 500, 3, keep_records=True)
    path = tmp_path / 'records.ndjson'
    count = write_records(str(path), records, config={'seed': 3})
    assert count == 500

    header, rows = read_records(str(path))
    assert header['schema'] == RECORD_SCHEMA
    assert header['config'] == {'seed': 3}
    assert len(rows) == 500
    assert sum(row['verdict'] == 'KEY_BIT' for row in rows) == summary.sifted

    lines = path.read_text().splitlines()
    lines[0] = json.dumps({'schema': 'other', 'version': 1})
    path.write_text('\n'.join(lines) + '\n')
    with pytest.raises(FormatError):
        read_records(str(path))


def test_csv(tmp_path):
    path = tmp_path / 'table.csv'
    write_csv(str(path), ('n', 'value'), [(2, 0.25), {'n': 3, 'value': None}])
    assert path.read_bytes() == b'n,value\n2,0.25\n3,\n'

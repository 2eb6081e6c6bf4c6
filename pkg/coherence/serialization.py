"""JSON in and out: the matrix format shared by every command, and report encoding.

A matrix is stored as {"dim": d, "re": [...], "im": [...]} with row-major arrays of
length d^2. Witnesses add a {"kind": "witness", "tol": ...} header and channels are
{"kind": "incoherent_channel", "kraus": [matrix, ...]}.
"""

import dataclasses
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .channels import IncoherentChannel
from .exceptions import MatrixParseError
from .linalg import DEFAULT_TOL, DensityMatrix, HermitianOperator, as_matrix
from .measures import RobustnessSolution
from .witness import Witness


def clean_text(s):
    """Strip a byte-order mark and markdown code fences around a JSON payload."""
    s = (s or '').strip().lstrip('\ufeff').strip()
    if s.startswith('```'):
        s = s.strip('`').strip()
        if s.lower().startswith('json'):
            s = s[4:].strip()
    return s


def try_json_loads(s):
    """Parse JSON, returning None on any error."""
    s = clean_text(s)
    if not s:
        return None
    try:
        return json.loads(s)
    except ValueError:
        return None


def loads(s, what='document'):
    obj = try_json_loads(s)
    if obj is None:
        raise MatrixParseError(f'{what} is not valid JSON')
    return obj


def read_json(path, what=None):
    what = what or str(path)
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise MatrixParseError(f'cannot read {what}: {exc.strerror or exc}') from exc
    return loads(text, what)


# Matrices

def matrix_to_dict(a, **header):
    m = as_matrix(a)
    return {
        **header,
        'dim': m.shape[0],
        're': m.real.ravel().tolist(),
        'im': m.imag.ravel().tolist(),
    }


def _real_array(values, name, length):
    if not isinstance(values, list) or len(values) != length:
        got = len(values) if isinstance(values, list) else type(values).__name__
        raise MatrixParseError(f'"{name}" must be a list of {length} numbers, got {got}')
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise MatrixParseError(f'"{name}" contains a non-numeric entry')
    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise MatrixParseError(f'"{name}" contains a non-finite entry')
    return arr


def matrix_from_dict(obj):
    if not isinstance(obj, dict):
        raise MatrixParseError(f'expected a matrix object, got {type(obj).__name__}')
    dim = obj.get('dim')
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MatrixParseError(f'"dim" must be a positive integer, got {dim!r}')
    re = _real_array(obj.get('re'), 're', dim * dim)
    im = _real_array(obj.get('im', [0.0] * dim * dim), 'im', dim * dim)
    return (re + 1j * im).reshape(dim, dim)


def state_from_json(s, tol=DEFAULT_TOL):
    return DensityMatrix(matrix_from_dict(loads(s, 'state')), tol=tol)


def load_state(path, tol=DEFAULT_TOL):
    return DensityMatrix(matrix_from_dict(read_json(path)), tol=tol)


def witness_to_dict(w):
    return matrix_to_dict(w, kind='witness', tol=getattr(w, 'tol', DEFAULT_TOL))


def operator_from_dict(obj, tol=None):
    """Hermitian operator from a matrix object, with or without the witness header.

    An explicit `tol` wins over the stored one.
    """
    kind = obj.get('kind', 'witness') if isinstance(obj, dict) else None
    if kind != 'witness':
        raise MatrixParseError(f'expected kind "witness", got {kind!r}')
    stored = obj.get('tol', DEFAULT_TOL)
    if tol is None:
        tol = float(stored) if isinstance(stored, (int, float)) and not isinstance(stored, bool) else DEFAULT_TOL
    return HermitianOperator(matrix_from_dict(obj), tol=tol)


def witness_from_dict(obj, tol=None):
    op = operator_from_dict(obj, tol)
    return Witness(op.matrix, tol=op.tol)


def load_operator(path, tol=None):
    return operator_from_dict(read_json(path), tol)


def load_witness(path, tol=None):
    return witness_from_dict(read_json(path), tol)


def channel_to_dict(ch):
    return {'kind': 'incoherent_channel', 'kraus': [matrix_to_dict(k) for k in ch.kraus]}


def channel_from_dict(obj, tol=DEFAULT_TOL):
    if not isinstance(obj, dict) or obj.get('kind') != 'incoherent_channel':
        raise MatrixParseError('expected kind "incoherent_channel"')
    kraus = obj.get('kraus')
    if not isinstance(kraus, list) or not kraus:
        raise MatrixParseError('"kraus" must be a non-empty list of matrices')
    return IncoherentChannel(tuple(matrix_from_dict(k) for k in kraus), tol=tol)


def load_channel(path, tol=DEFAULT_TOL):
    return channel_from_dict(read_json(path), tol)


def robustness_to_dict(solution):
    """The robustness record with the cover written as `d`; tau and W* as matrices or null."""
    return {
        'value': solution.value,
        'd': solution.incoherent_cover,
        'tau': solution.tau,
        'dual_witness': solution.dual_witness,
        'primal_gap': solution.primal_gap,
        'dual_gap': solution.dual_gap,
        'iterations': solution.iterations,
    }


# Reports

def _key(k):
    if isinstance(k, tuple):
        return ':'.join(str(x) for x in k)
    return str(k)


def _float(x):
    x = float(x)
    return x if math.isfinite(x) else None


def to_jsonable(obj):
    """Recursively turn a report into plain JSON types, keeping field order."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, Witness):
        return witness_to_dict(obj)
    if isinstance(obj, HermitianOperator):
        return matrix_to_dict(obj)
    if isinstance(obj, RobustnessSolution):
        return to_jsonable(robustness_to_dict(obj))
    if isinstance(obj, IncoherentChannel):
        return channel_to_dict(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Fraction):
        return _float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': _float(obj.real), 'im': _float(obj.imag)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2 and obj.shape[0] == obj.shape[1]:
                return matrix_to_dict(obj)
            return {'re': to_jsonable(obj.real), 'im': to_jsonable(obj.imag)}
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f'cannot serialize {type(obj).__name__}')


def dumps(obj):
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False)
